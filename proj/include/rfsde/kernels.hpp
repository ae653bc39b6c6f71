#pragma once

// Compactly supported smoothing kernels: density, closed-form CDF, first
// moment, autocorrelation and the asymptotic variance constant
//   sigma^2_{H,K} = H(2H-1) \int\int |u-v|^{2H-2} K(u) K(v) du dv.

#include <string>
#include <string_view>
#include <vector>

namespace rfsde {

enum class KernelFamily { triangular, epanechnikov, box, one_sided_triangular };

/// A built-in kernel family, optionally rescaled: K_c(u) = K(u / c) / c.
/// `lo` and `hi` are the support end points A < B after rescaling.
struct KernelSpec {
    KernelFamily family = KernelFamily::triangular;
    double scale = 1.0;
    double lo = -1.0;
    double hi = 1.0;
};

KernelSpec make_kernel(KernelFamily family, double scale = 1.0);

/// Accepts "triangular", "epanechnikov" (alias "parabolic"), "box" and
/// "one_sided_triangular". Throws ConfigError on anything else.
KernelSpec kernel_from_name(std::string_view name, double scale = 1.0);
std::string kernel_name(KernelFamily family);

double eval_kernel(const KernelSpec& k, double u);

/// Phi_K(v) = \int_A^{min(v,B)} K. Nondecreasing, 0 below A, 1 above B.
double kernel_cdf(const KernelSpec& k, double v);

/// \int K(u) u du.
double kernel_first_moment(const KernelSpec& k);

/// Points where K (or one of its derivatives) is discontinuous, including
/// the support end points, in increasing order.
std::vector<double> kernel_breakpoints(const KernelSpec& k);

/// rho(w) = \int K(u) K(u - w) du, computed piecewise with Gauss-Legendre
/// rules exact for the polynomial pieces. Even in w.
double kernel_autocorrelation(const KernelSpec& k, double w);

/// sigma^2_{H,K} for 1/2 < H < 1 via
///   2 H (2H-1) \int_0^{B-A} w^{2H-2} rho(w) dw,
/// with a Gauss-Jacobi rule absorbing the endpoint singularity on the first
/// polynomial piece of rho.
double sigma2_hk(const KernelSpec& k, double H);

} // namespace rfsde
