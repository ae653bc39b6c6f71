#include "rfsde/reflect.hpp"

#include "rfsde/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rfsde {

Grid::Grid(double horizon, std::size_t steps) : T(horizon), n(steps)
{
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw PreconditionError("time horizon must be positive");
    if (steps == 0) throw PreconditionError("grid needs at least one step");
}

Eigen::VectorXd Grid::times() const
{
    Eigen::VectorXd out(size());
    for (Eigen::Index k = 0; k < size(); ++k) out[k] = t(static_cast<std::size_t>(k));
    return out;
}

std::size_t Grid::nearest_index(double time) const
{
    if (!(time >= 0.0 && time <= T))
        throw PreconditionError("time " + std::to_string(time) + " outside [0, T]");
    const double k = std::round(time / dt());
    return std::min(n, static_cast<std::size_t>(k));
}

TubeSpec::TubeSpec(dsl::FunctionSpec lower, dsl::FunctionSpec upper)
    : lower_(std::move(lower)), upper_(std::move(upper))
{
}

std::vector<std::string> TubeSpec::smoothness_warnings() const
{
    std::vector<std::string> out;
    for (const auto* f : {&lower_, &upper_})
        if (dsl::uses_nonsmooth_primitive(f->expr().root()))
            out.push_back("boundary '" + f->source() +
                          "' uses a non-smooth primitive; C^1 regularity is not guaranteed");
    return out;
}

TubeTrace trace_tube(const TubeSpec& tube, const Grid& grid)
{
    TubeTrace tr;
    tr.lower.resize(grid.size());
    tr.upper.resize(grid.size());
    tr.min_gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        const double t = grid.t(static_cast<std::size_t>(k));
        tr.lower[k] = tube.lower_at(t);
        tr.upper[k] = tube.upper_at(t);
        const double gap = tr.upper[k] - tr.lower[k];
        if (!(gap > 0.0)) {
            std::ostringstream msg;
            msg << "tube gap u - l = " << gap << " is not positive at t = " << t;
            throw NumericalError(msg.str());
        }
        tr.min_gap = std::min(tr.min_gap, gap);
    }
    tr.lipschitz = std::max(grid_lipschitz(tr.lower, grid.dt()), grid_lipschitz(tr.upper, grid.dt()));
    return tr;
}

double project_interval(double x, double lo, double hi)
{
    if (lo > hi) throw PreconditionError("projection onto an empty interval");
    return std::min(std::max(x, lo), hi);
}

ReflectedPath solve_reflected(const dsl::FunctionSpec& drift, const TubeTrace& tube,
                              const Eigen::Ref<const Eigen::VectorXd>& noise, double x0,
                              const Grid& grid)
{
    if (noise.size() != grid.size())
        throw PreconditionError("noise length " + std::to_string(noise.size()) +
                                " does not match grid size " + std::to_string(grid.size()));
    if (tube.lower.size() != grid.size() || tube.upper.size() != grid.size())
        throw PreconditionError("tube trace does not match the grid");
    if (noise[0] != 0.0) throw PreconditionError("noise must start at 0");
    if (!(x0 >= tube.lower[0] && x0 <= tube.upper[0])) {
        std::ostringstream msg;
        msg << "x0 = " << x0 << " lies outside C(0) = [" << tube.lower[0] << ", " << tube.upper[0] << "]";
        throw PreconditionError(msg.str());
    }
    if (!(tube.min_gap > 0.0)) throw NumericalError("tube gap is not positive on the grid");

    const double dt = grid.dt();
    ReflectedPath p{grid, Eigen::VectorXd(grid.size()), Eigen::VectorXd(grid.size()), noise,
                    tube.lower, tube.upper};
    p.X[0] = x0;
    p.Y[0] = x0;
    for (Eigen::Index k = 0; k + 1 < grid.size(); ++k) {
        const double free_step = drift(p.X[k]) * dt + (noise[k + 1] - noise[k]);
        const double next = project_interval(p.X[k] + free_step, tube.lower[k + 1], tube.upper[k + 1]);
        p.Y[k + 1] = p.Y[k] + (next - p.X[k] - free_step);
        p.X[k + 1] = next;
    }
    return p;
}

ReflectedPath solve_reflected(const dsl::FunctionSpec& drift, const TubeSpec& tube,
                              const Eigen::Ref<const Eigen::VectorXd>& noise, double x0,
                              const Grid& grid)
{
    return solve_reflected(drift, trace_tube(tube, grid), noise, x0, grid);
}

double path_variation(const Eigen::Ref<const Eigen::VectorXd>& Y)
{
    if (Y.size() < 2) return 0.0;
    return (Y.tail(Y.size() - 1) - Y.head(Y.size() - 1)).cwiseAbs().sum();
}

double decomposition_residual(const dsl::FunctionSpec& drift, const ReflectedPath& path)
{
    const double dt = path.grid.dt();
    double integral = 0.0;
    double worst = std::abs(path.X[0] - (path.W[0] + path.Y[0]));
    for (Eigen::Index k = 1; k < path.X.size(); ++k) {
        integral += drift(path.X[k - 1]) * dt;
        worst = std::max(worst, std::abs(path.X[k] - (integral + path.W[k] + path.Y[k])));
    }
    return worst;
}

double grid_lipschitz(const Eigen::Ref<const Eigen::VectorXd>& v, double dt)
{
    if (v.size() < 2) return 0.0;
    return (v.tail(v.size() - 1) - v.head(v.size() - 1)).cwiseAbs().maxCoeff() / dt;
}

} // namespace rfsde
