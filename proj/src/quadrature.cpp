#include "rfsde/quadrature.hpp"

#include "rfsde/errors.hpp"

#include <cmath>

namespace rfsde::quad {

namespace {

// Symmetric tridiagonal Jacobi matrix of the monic recurrence; the rule is
// its spectrum, the weights the squared first eigenvector components.
Rule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, double mu0)
{
    const Eigen::Index n = diag.size();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    J.diagonal() = diag;
    if (n > 1) {
        J.diagonal(1) = offdiag;
        J.diagonal(-1) = offdiag;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
    if (eig.info() != Eigen::Success) throw NumericalError("Golub-Welsch eigensolver failed");
    Rule r;
    r.nodes = eig.eigenvalues();
    r.weights = mu0 * eig.eigenvectors().row(0).transpose().array().square();
    return r;
}

} // namespace

Rule gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

Rule gauss_jacobi(int n, double alpha, double beta)
{
    if (n < 1) throw PreconditionError("quadrature rule needs at least one node");
    if (!(alpha > -1.0 && beta > -1.0)) throw PreconditionError("Jacobi exponents must exceed -1");

    const double ab = alpha + beta;
    Eigen::VectorXd a(n);
    Eigen::VectorXd b(n > 1 ? n - 1 : 0);
    a[0] = (beta - alpha) / (ab + 2.0);
    for (int k = 1; k < n; ++k) {
        const double s = 2.0 * k + ab;
        a[k] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
        const double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
        const double den = s * s * (s + 1.0) * (s - 1.0);
        b[k - 1] = std::sqrt(num / den);
    }
    const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                                std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0));
    return golub_welsch(a, b, mu0);
}

} // namespace rfsde::quad
