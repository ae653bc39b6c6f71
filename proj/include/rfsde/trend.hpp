#pragma once

// Noiseless system: x = \int b(x) + y, -dy in N_{C}(x), y(0) = x0, and its
// trend tau = \int b(x) + y - x0 = x - x0.

#include "rfsde/reflect.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace rfsde {

enum class Regime : std::uint8_t { interior, lower, upper };

const char* regime_name(Regime r);

struct TrendSolution {
    Grid grid;
    double x0 = 0.0;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    Eigen::VectorXd tau;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    double contact_tol = 0.0;
    std::vector<Regime> regime;
    /// max_k |(x_k - x0) - (sum_{j<k} b(x_j) dt + y_k - x0)|
    double tau_crosscheck = 0.0;
};

/// 10 dt (1 + ||C||_Lip,grid), capped at a quarter of the smallest gap.
double default_contact_tol(const Grid& grid, const TubeTrace& tube);

TrendSolution solve_trend(const dsl::FunctionSpec& drift, const TubeTrace& tube, double x0,
                          const Grid& grid, double contact_tol = 0.0);
TrendSolution solve_trend(const dsl::FunctionSpec& drift, const TubeSpec& tube, double x0,
                          const Grid& grid, double contact_tol = 0.0);

/// Lower if x_k <= l_k + tol, else Upper if x_k >= u_k - tol, else Interior.
/// Throws PreconditionError when the gap u_k - l_k does not exceed 2 tol.
Regime classify_regime(const TrendSolution& sol, std::size_t k, double contact_tol);

/// dy/dt at t_k on a stable regime (same regime at k-1, k, k+1):
/// 0 inside, l'(t) - b(l(t)) on the floor, u'(t) - b(u(t)) on the ceiling.
/// Throws PreconditionError at regime transitions and when the value
/// contradicts the normal-cone sign (dy >= 0 on the floor, <= 0 on the
/// ceiling).
double ydot(const dsl::FunctionSpec& drift, const TubeSpec& tube, const TrendSolution& sol,
            std::size_t k);

/// Fraction of grid indices at which `ydot` is undefined.
double transition_fraction(const TrendSolution& sol);

} // namespace rfsde
