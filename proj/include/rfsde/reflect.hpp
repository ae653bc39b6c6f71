#pragma once

// Catching-up (projected Euler) scheme for the reflected system
//   X(t) = \int_0^t b(X) ds + W(t) + Y(t),   -dY/d|DY| in N_{C(t)}(X(t)),
// with C(t) = [l(t), u(t)] and Y(0) = x0.

#include "rfsde/specdsl.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace rfsde {

/// Uniform grid t_k = k T / n, k = 0..n.
struct Grid {
    double T = 1.0;
    std::size_t n = 1;

    Grid() = default;
    Grid(double horizon, std::size_t steps);

    double dt() const { return T / static_cast<double>(n); }
    double t(std::size_t k) const { return T * static_cast<double>(k) / static_cast<double>(n); }
    Eigen::Index size() const { return static_cast<Eigen::Index>(n) + 1; }
    Eigen::VectorXd times() const;
    /// Index of the grid point closest to `time`, which must lie in [0, T].
    std::size_t nearest_index(double time) const;

    bool operator==(const Grid& o) const { return T == o.T && n == o.n; }
};

/// Moving interval C(t) = [l(t), u(t)] with C^1 boundaries given as DSL
/// functions of the time variable.
class TubeSpec {
public:
    TubeSpec(dsl::FunctionSpec lower, dsl::FunctionSpec upper);

    const dsl::FunctionSpec& lower() const { return lower_; }
    const dsl::FunctionSpec& upper() const { return upper_; }

    double lower_at(double t) const { return lower_(t); }
    double upper_at(double t) const { return upper_(t); }
    double lower_rate(double t) const { return dsl::eval(lower_.derivative(), t); }
    double upper_rate(double t) const { return dsl::eval(upper_.derivative(), t); }

    /// Non-empty when a boundary uses abs/sign/min/max/clamp, which may
    /// break continuous differentiability.
    std::vector<std::string> smoothness_warnings() const;

private:
    dsl::FunctionSpec lower_;
    dsl::FunctionSpec upper_;
};

/// Boundary values sampled on a grid.
struct TubeTrace {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    double min_gap = 0.0;
    /// max_k max(|l_{k+1} - l_k|, |u_{k+1} - u_k|) / dt
    double lipschitz = 0.0;
};

/// Samples the tube on `grid`; throws NumericalError when l >= u somewhere.
TubeTrace trace_tube(const TubeSpec& tube, const Grid& grid);

struct ReflectedPath {
    Grid grid;
    Eigen::VectorXd X; ///< state, l(t_k) <= X_k <= u(t_k)
    Eigen::VectorXd Y; ///< reflection term, Y_0 = x0
    Eigen::VectorXd W; ///< driving noise, W_0 = 0
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

/// min(max(x, lo), hi); throws PreconditionError if lo > hi.
double project_interval(double x, double lo, double hi);

/// X_{k+1} = P_{C(t_{k+1})}(X_k + b(X_k) dt + dW_k),
/// Y_{k+1} = Y_k + X_{k+1} - X_k - b(X_k) dt - dW_k.
ReflectedPath solve_reflected(const dsl::FunctionSpec& drift, const TubeTrace& tube,
                              const Eigen::Ref<const Eigen::VectorXd>& noise, double x0,
                              const Grid& grid);
ReflectedPath solve_reflected(const dsl::FunctionSpec& drift, const TubeSpec& tube,
                              const Eigen::Ref<const Eigen::VectorXd>& noise, double x0,
                              const Grid& grid);

/// Discrete 1-variation sum_k |Y_{k+1} - Y_k|.
double path_variation(const Eigen::Ref<const Eigen::VectorXd>& Y);

/// Largest |X_k - (sum_{j<k} b(X_j) dt + W_k + Y_k)| over the path.
double decomposition_residual(const dsl::FunctionSpec& drift, const ReflectedPath& path);

/// max_k |v_{k+1} - v_k| / dt.
double grid_lipschitz(const Eigen::Ref<const Eigen::VectorXd>& v, double dt);

} // namespace rfsde
