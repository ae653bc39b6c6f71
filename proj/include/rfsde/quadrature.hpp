#pragma once

#include <Eigen/Dense>

namespace rfsde::quad {

/// Nodes and weights of an n-point Gaussian rule.
struct Rule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

/// Gauss-Legendre rule on [-1, 1].
Rule gauss_legendre(int n);

/// Gauss-Jacobi rule on [-1, 1] for the weight (1 - x)^alpha (1 + x)^beta,
/// alpha, beta > -1. Built by Golub-Welsch.
Rule gauss_jacobi(int n, double alpha, double beta);

/// Integral of f over [a, b] with the given Legendre rule.
template <typename F>
double integrate(const Rule& legendre, double a, double b, F&& f)
{
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < legendre.nodes.size(); ++i)
        acc += legendre.weights[i] * f(mid + half * legendre.nodes[i]);
    return half * acc;
}

/// Integral over [0, len] of w^power f(w), power > -1, using a Jacobi rule
/// built for beta = power.
template <typename F>
double integrate_left_singular(const Rule& jacobi, double power, double len, F&& f)
{
    double acc = 0.0;
    for (Eigen::Index i = 0; i < jacobi.nodes.size(); ++i)
        acc += jacobi.weights[i] * f(0.5 * len * (1.0 + jacobi.nodes[i]));
    return std::pow(0.5 * len, power + 1.0) * acc;
}

} // namespace rfsde::quad
