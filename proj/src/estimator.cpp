#include "rfsde/estimator.hpp"

#include "rfsde/errors.hpp"
#include "rfsde/fbm.hpp"

#include <cmath>
#include <sstream>

namespace rfsde {

namespace {

void check_bandwidth(double h)
{
    if (!(h > 0.0) || !std::isfinite(h)) throw PreconditionError("bandwidth must be positive");
}

std::size_t grid_index_of(const Grid& grid, double t)
{
    const std::size_t k = grid.nearest_index(t);
    if (std::abs(grid.t(k) - t) > 1e-9 * grid.dt())
        throw PreconditionError("time " + std::to_string(t) + " is not a grid point");
    return k;
}

void check_support(const Grid& grid, const KernelSpec& k, double h, double t)
{
    const double tol = 1e-12 * grid.T;
    if (t + h * k.lo < -tol || t + h * k.hi > grid.T + tol) {
        std::ostringstream msg;
        msg << "kernel support [" << t + h * k.lo << ", " << t + h * k.hi
            << "] leaves the observation window [0, " << grid.T << "]";
        throw PreconditionError(msg.str());
    }
}

} // namespace

EstimatorConfig EstimatorConfig::with_power_bandwidth(const KernelSpec& kernel, double eps, double H,
                                                      std::vector<double> eval_times,
                                                      IncrementConvention convention)
{
    return EstimatorConfig{kernel, power_bandwidth(eps, H), std::move(eval_times), convention};
}

double power_bandwidth(double eps, double H)
{
    if (!(eps > 0.0)) throw PreconditionError("power bandwidth rule needs eps > 0");
    return std::pow(eps, 1.0 / (2.0 - H));
}

double bandwidth_ratio(double eps, double h, double H) { return eps / std::pow(h, 1.0 - H); }

double weight(double s, double t, const KernelSpec& k, double h)
{
    check_bandwidth(h);
    return kernel_cdf(k, s / h) - kernel_cdf(k, (s - t) / h);
}

Eigen::VectorXd increment_nodes(const Grid& grid, IncrementConvention convention)
{
    const double shift = convention == IncrementConvention::midpoint ? 0.5 : 0.0;
    Eigen::VectorXd s(static_cast<Eigen::Index>(grid.n));
    for (Eigen::Index j = 0; j < s.size(); ++j)
        s[j] = grid.T * (static_cast<double>(j) + shift) / static_cast<double>(grid.n);
    return s;
}

Eigen::MatrixXd weight_matrix(const Grid& grid, const EstimatorConfig& cfg)
{
    check_bandwidth(cfg.bandwidth);
    const Eigen::VectorXd s = increment_nodes(grid, cfg.convention);
    const auto rows = static_cast<Eigen::Index>(cfg.eval_times.size());
    Eigen::MatrixXd w(rows, s.size());
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double t = cfg.eval_times[static_cast<std::size_t>(i)];
        if (!(t >= 0.0 && t <= grid.T))
            throw PreconditionError("evaluation time " + std::to_string(t) + " outside [0, T]");
        for (Eigen::Index j = 0; j < s.size(); ++j) w(i, j) = weight(s[j], t, cfg.kernel, cfg.bandwidth);
    }
    return w;
}

Eigen::VectorXd increments(const Eigen::Ref<const Eigen::VectorXd>& path)
{
    if (path.size() < 2) return Eigen::VectorXd();
    return path.tail(path.size() - 1) - path.head(path.size() - 1);
}

Eigen::VectorXd estimate_trend(const Eigen::Ref<const Eigen::VectorXd>& X, const Grid& grid,
                               const EstimatorConfig& cfg)
{
    if (X.size() != grid.size()) throw PreconditionError("path does not cover the grid");
    return estimate_trend(X, weight_matrix(grid, cfg));
}

Eigen::VectorXd estimate_trend(const Eigen::Ref<const Eigen::VectorXd>& X,
                               const Eigen::Ref<const Eigen::MatrixXd>& weights)
{
    if (X.size() != weights.cols() + 1) throw PreconditionError("weight matrix does not match the path");
    return weights * increments(X);
}

ErrorDecomposition decompose_error(const ReflectedPath& noisy, const TrendSolution& trend,
                                   const Eigen::Ref<const Eigen::VectorXd>& B,
                                   const dsl::FunctionSpec& drift, double eps,
                                   const EstimatorConfig& cfg, double t)
{
    const Grid& grid = noisy.grid;
    if (!(grid == trend.grid) || B.size() != grid.size() || noisy.X.size() != grid.size())
        throw PreconditionError("noisy path, trend and noise must share one grid");
    check_bandwidth(cfg.bandwidth);
    const std::size_t k = grid_index_of(grid, t);

    const double dt = grid.dt();
    const Eigen::VectorXd s = increment_nodes(grid, cfg.convention);

    ErrorDecomposition d;
    d.t = t;
    double tau_hat = 0.0;
    double drift_before_t = 0.0;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
        const double w = weight(s[j], t, cfg.kernel, cfg.bandwidth);
        const double b_noisy = drift(noisy.X[j]);
        const double b_trend = drift(trend.x[j]);
        const double dy = trend.y[j + 1] - trend.y[j];
        d.alpha += w * (b_noisy - b_trend) * dt;
        d.beta += w * b_trend * dt;
        d.gamma += w * (B[j + 1] - B[j]);
        d.zeta += w * ((noisy.Y[j + 1] - noisy.Y[j]) - dy);
        d.eta += w * dy;
        tau_hat += w * (noisy.X[j + 1] - noisy.X[j]);
        if (static_cast<std::size_t>(j) < k) drift_before_t += b_trend * dt;
    }
    const auto ki = static_cast<Eigen::Index>(k);
    d.beta -= drift_before_t;
    d.gamma *= eps;
    d.eta -= trend.y[ki] - trend.x0;
    d.sum = d.alpha + d.beta + d.gamma + d.zeta + d.eta;
    d.error = tau_hat - trend.tau[ki];
    return d;
}

Eigen::VectorXd gamma_dot_coefficients(const Grid& grid, const KernelSpec& k, double h, double t,
                                       IncrementConvention convention)
{
    check_bandwidth(h);
    check_support(grid, k, h, t);
    const Eigen::VectorXd s = increment_nodes(grid, convention);
    Eigen::VectorXd c(s.size());
    for (Eigen::Index j = 0; j < s.size(); ++j) c[j] = eval_kernel(k, (s[j] - t) / h) / h;
    return c;
}

double gamma_dot(const Eigen::Ref<const Eigen::VectorXd>& B, const Grid& grid, const KernelSpec& k,
                 double h, double t, double eps, IncrementConvention convention)
{
    if (B.size() != grid.size()) throw PreconditionError("noise path does not cover the grid");
    return eps * gamma_dot_coefficients(grid, k, h, t, convention).dot(increments(B));
}

double gamma_dot_variance(double H, const Grid& grid, const KernelSpec& k, double h, double t,
                          double eps, IncrementConvention convention)
{
    const Eigen::VectorXd c = gamma_dot_coefficients(grid, k, h, t, convention);

    // Restrict to the nonzero window, then form the Toeplitz quadratic form.
    Eigen::Index first = 0;
    while (first < c.size() && c[first] == 0.0) ++first;
    Eigen::Index last = c.size() - 1;
    while (last >= first && c[last] == 0.0) --last;
    if (first > last) return 0.0;
    const Eigen::Index m = last - first + 1;
    const Eigen::VectorXd cw = c.segment(first, m);

    Eigen::VectorXd gamma(m);
    for (Eigen::Index lag = 0; lag < m; ++lag)
        gamma[lag] = fgn_covariance(H, static_cast<std::size_t>(lag), grid.dt());

    double acc = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        double row = gamma[0] * cw[i];
        for (Eigen::Index j = 0; j < i; ++j) row += 2.0 * gamma[i - j] * cw[j];
        acc += cw[i] * row;
    }
    return eps * eps * acc;
}

} // namespace rfsde
