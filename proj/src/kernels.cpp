#include "rfsde/kernels.hpp"

#include "rfsde/errors.hpp"
#include "rfsde/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace rfsde {

namespace {

// Unit-scale densities and CDFs.

double unit_density(KernelFamily f, double u)
{
    switch (f) {
    case KernelFamily::triangular: return std::abs(u) <= 1.0 ? 1.0 - std::abs(u) : 0.0;
    case KernelFamily::epanechnikov: return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case KernelFamily::box: return std::abs(u) <= 1.0 ? 0.5 : 0.0;
    case KernelFamily::one_sided_triangular: return (u >= 0.0 && u <= 1.0) ? 2.0 * (1.0 - u) : 0.0;
    }
    return 0.0;
}

double unit_cdf(KernelFamily f, double v)
{
    switch (f) {
    case KernelFamily::triangular:
        if (v <= -1.0) return 0.0;
        if (v >= 1.0) return 1.0;
        return v <= 0.0 ? 0.5 * (1.0 + v) * (1.0 + v) : 1.0 - 0.5 * (1.0 - v) * (1.0 - v);
    case KernelFamily::epanechnikov:
        if (v <= -1.0) return 0.0;
        if (v >= 1.0) return 1.0;
        return 0.5 + 0.75 * v - 0.25 * v * v * v;
    case KernelFamily::box:
        if (v <= -1.0) return 0.0;
        if (v >= 1.0) return 1.0;
        return 0.5 * (v + 1.0);
    case KernelFamily::one_sided_triangular:
        if (v <= 0.0) return 0.0;
        if (v >= 1.0) return 1.0;
        return 1.0 - (1.0 - v) * (1.0 - v);
    }
    return 0.0;
}

double unit_first_moment(KernelFamily f)
{
    return f == KernelFamily::one_sided_triangular ? 1.0 / 3.0 : 0.0;
}

std::vector<double> unit_breakpoints(KernelFamily f)
{
    switch (f) {
    case KernelFamily::triangular: return {-1.0, 0.0, 1.0};
    case KernelFamily::epanechnikov:
    case KernelFamily::box: return {-1.0, 1.0};
    case KernelFamily::one_sided_triangular: return {0.0, 1.0};
    }
    return {};
}

// Gauss-Legendre with 8 nodes integrates the degree <= 4 products of two
// kernel pieces exactly; 48 nodes handle the smooth w^{2H-2} pieces.
const quad::Rule& inner_rule()
{
    static const quad::Rule r = quad::gauss_legendre(8);
    return r;
}

const quad::Rule& outer_rule()
{
    static const quad::Rule r = quad::gauss_legendre(48);
    return r;
}

} // namespace

KernelSpec make_kernel(KernelFamily family, double scale)
{
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("kernel scale must be positive");
    const auto bp = unit_breakpoints(family);
    return KernelSpec{family, scale, scale * bp.front(), scale * bp.back()};
}

KernelSpec kernel_from_name(std::string_view name, double scale)
{
    if (name == "triangular") return make_kernel(KernelFamily::triangular, scale);
    if (name == "epanechnikov" || name == "parabolic")
        return make_kernel(KernelFamily::epanechnikov, scale);
    if (name == "box") return make_kernel(KernelFamily::box, scale);
    if (name == "one_sided_triangular") return make_kernel(KernelFamily::one_sided_triangular, scale);
    throw ConfigError("unknown kernel '" + std::string(name) + "'");
}

std::string kernel_name(KernelFamily family)
{
    switch (family) {
    case KernelFamily::triangular: return "triangular";
    case KernelFamily::epanechnikov: return "epanechnikov";
    case KernelFamily::box: return "box";
    case KernelFamily::one_sided_triangular: return "one_sided_triangular";
    }
    return "unknown";
}

double eval_kernel(const KernelSpec& k, double u)
{
    return unit_density(k.family, u / k.scale) / k.scale;
}

double kernel_cdf(const KernelSpec& k, double v) { return unit_cdf(k.family, v / k.scale); }

double kernel_first_moment(const KernelSpec& k) { return k.scale * unit_first_moment(k.family); }

std::vector<double> kernel_breakpoints(const KernelSpec& k)
{
    auto bp = unit_breakpoints(k.family);
    for (double& b : bp) b *= k.scale;
    return bp;
}

double kernel_autocorrelation(const KernelSpec& k, double w)
{
    w = std::abs(w);
    const double lo = k.lo + w;
    const double hi = k.hi;
    if (lo >= hi) return 0.0;

    // K(u) is polynomial between its breakpoints and K(u - w) between the
    // shifted ones, so split the overlap at both sets.
    std::vector<double> cuts{lo, hi};
    for (double b : kernel_breakpoints(k)) {
        if (b > lo && b < hi) cuts.push_back(b);
        if (b + w > lo && b + w < hi) cuts.push_back(b + w);
    }
    std::sort(cuts.begin(), cuts.end());

    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] <= cuts[i]) continue;
        acc += quad::integrate(inner_rule(), cuts[i], cuts[i + 1],
                               [&](double u) { return eval_kernel(k, u) * eval_kernel(k, u - w); });
    }
    return acc;
}

double sigma2_hk(const KernelSpec& k, double H)
{
    if (!(H > 0.5 && H < 1.0)) throw PreconditionError("sigma2_HK requires 1/2 < H < 1");

    const double power = 2.0 * H - 2.0;
    const double span = k.hi - k.lo;

    // rho is piecewise polynomial with joints at pairwise breakpoint
    // differences.
    const auto bp = kernel_breakpoints(k);
    std::vector<double> joints{0.0, span};
    for (double a : bp)
        for (double b : bp) {
            const double d = b - a;
            if (d > 1e-14 * span && d < span * (1.0 - 1e-14)) joints.push_back(d);
        }
    std::sort(joints.begin(), joints.end());
    joints.erase(std::unique(joints.begin(), joints.end(),
                             [&](double x, double y) { return std::abs(x - y) <= 1e-14 * span; }),
                 joints.end());

    // Degree of rho on a piece is at most 5 for the built-ins.
    const quad::Rule jacobi = quad::gauss_jacobi(8, 0.0, power);
    double acc = quad::integrate_left_singular(jacobi, power, joints[1],
                                               [&](double w) { return kernel_autocorrelation(k, w); });
    for (std::size_t i = 1; i + 1 < joints.size(); ++i)
        acc += quad::integrate(outer_rule(), joints[i], joints[i + 1], [&](double w) {
            return std::pow(w, power) * kernel_autocorrelation(k, w);
        });
    return 2.0 * H * (2.0 * H - 1.0) * acc;
}

} // namespace rfsde
