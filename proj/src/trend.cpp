#include "rfsde/trend.hpp"

#include "rfsde/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rfsde {

const char* regime_name(Regime r)
{
    switch (r) {
    case Regime::interior: return "interior";
    case Regime::lower: return "lower";
    case Regime::upper: return "upper";
    }
    return "?";
}

double default_contact_tol(const Grid& grid, const TubeTrace& tube)
{
    // Capped so that coarse grids still admit an unambiguous classification.
    return std::min(10.0 * grid.dt() * (1.0 + tube.lipschitz), 0.25 * tube.min_gap);
}

TrendSolution solve_trend(const dsl::FunctionSpec& drift, const TubeTrace& tube, double x0,
                          const Grid& grid, double contact_tol)
{
    const ReflectedPath path = solve_reflected(drift, tube, Eigen::VectorXd::Zero(grid.size()), x0, grid);

    TrendSolution sol;
    sol.grid = grid;
    sol.x0 = x0;
    sol.x = path.X;
    sol.y = path.Y;
    sol.lower = tube.lower;
    sol.upper = tube.upper;
    sol.tau = path.X.array() - x0;

    const double dt = grid.dt();
    double integral = 0.0;
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        if (k > 0) integral += drift(sol.x[k - 1]) * dt;
        const double riemann = integral + sol.y[k] - x0;
        sol.tau_crosscheck = std::max(sol.tau_crosscheck, std::abs(sol.tau[k] - riemann));
    }

    sol.contact_tol = contact_tol > 0.0 ? contact_tol : default_contact_tol(grid, tube);
    sol.regime.resize(grid.n + 1);
    for (std::size_t k = 0; k <= grid.n; ++k) sol.regime[k] = classify_regime(sol, k, sol.contact_tol);
    return sol;
}

TrendSolution solve_trend(const dsl::FunctionSpec& drift, const TubeSpec& tube, double x0,
                          const Grid& grid, double contact_tol)
{
    return solve_trend(drift, trace_tube(tube, grid), x0, grid, contact_tol);
}

Regime classify_regime(const TrendSolution& sol, std::size_t k, double contact_tol)
{
    if (!(contact_tol > 0.0)) throw PreconditionError("contact tolerance must be positive");
    if (k > sol.grid.n) throw PreconditionError("grid index out of range");
    const auto i = static_cast<Eigen::Index>(k);
    const double lo = sol.lower[i];
    const double hi = sol.upper[i];
    if (!(hi - lo > 2.0 * contact_tol)) {
        std::ostringstream msg;
        msg << "tube gap " << hi - lo << " at t = " << sol.grid.t(k)
            << " is too small for contact tolerance " << contact_tol;
        throw PreconditionError(msg.str());
    }
    if (sol.x[i] <= lo + contact_tol) return Regime::lower;
    if (sol.x[i] >= hi - contact_tol) return Regime::upper;
    return Regime::interior;
}

double ydot(const dsl::FunctionSpec& drift, const TubeSpec& tube, const TrendSolution& sol,
            std::size_t k)
{
    if (k > sol.grid.n || sol.regime.size() != sol.grid.n + 1)
        throw PreconditionError("grid index out of range");
    const Regime r = sol.regime[k];
    const bool stable = (k == 0 || sol.regime[k - 1] == r) && (k == sol.grid.n || sol.regime[k + 1] == r);
    if (!stable) {
        std::ostringstream msg;
        msg << "t = " << sol.grid.t(k) << " is a transition point (regime "
            << regime_name(r) << " is not stable); dy/dt is undefined there";
        throw PreconditionError(msg.str());
    }

    const double t = sol.grid.t(k);
    // Tolerance on the sign test: dy/dt is a difference of O(1) numbers.
    constexpr double kSignSlack = 1e-9;
    switch (r) {
    case Regime::interior: return 0.0;
    case Regime::lower: {
        const double v = tube.lower_rate(t) - drift(tube.lower_at(t));
        if (v < -kSignSlack)
            throw PreconditionError("floor contact with dy/dt = " + std::to_string(v) +
                                    " < 0 contradicts the normal cone; the state cannot stay on the floor");
        return v;
    }
    case Regime::upper: {
        const double v = tube.upper_rate(t) - drift(tube.upper_at(t));
        if (v > kSignSlack)
            throw PreconditionError("ceiling contact with dy/dt = " + std::to_string(v) +
                                    " > 0 contradicts the normal cone; the state cannot stay on the ceiling");
        return v;
    }
    }
    return 0.0;
}

double transition_fraction(const TrendSolution& sol)
{
    const std::size_t n = sol.regime.size();
    if (n == 0) return 0.0;
    std::size_t bad = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const Regime r = sol.regime[k];
        if ((k > 0 && sol.regime[k - 1] != r) || (k + 1 < n && sol.regime[k + 1] != r)) ++bad;
    }
    return static_cast<double>(bad) / static_cast<double>(n);
}

} // namespace rfsde
