#include "rfsde/experiments.hpp"

#include "rfsde/errors.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rfsde {

namespace {

double support_radius(const KernelSpec& k) { return std::max(std::abs(k.lo), std::abs(k.hi)); }

double sup_sq(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b)
{
    const double m = (a - b).cwiseAbs().maxCoeff();
    return m * m;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda)
{
    if (lambda < 0.2) return 1.0;
    double acc = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        acc += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * acc, 0.0, 1.0);
}

} // namespace

// ---------------------------------------------------------------------------
// Configuration

void validate(const ExperimentConfig& cfg)
{
    if (!(cfg.H > 0.5 && cfg.H < 1.0)) throw ConfigError("H must lie in (1/2, 1)");
    if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) throw ConfigError("T must be positive");
    if (cfg.n < 1) throw ConfigError("n must be at least 1");
    if (cfg.replications < 2) throw ConfigError("replications must be at least 2");
    if (cfg.epsilons.empty()) throw ConfigError("epsilons must not be empty");
    for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
        if (!(cfg.epsilons[i] >= 0.0) || !std::isfinite(cfg.epsilons[i]))
            throw ConfigError("epsilons must be finite and nonnegative");
        if (i > 0 && !(cfg.epsilons[i] < cfg.epsilons[i - 1]))
            throw ConfigError("epsilons must be strictly decreasing");
    }
    if (cfg.bandwidth_rule == BandwidthRule::fixed && !(cfg.fixed_bandwidth > 0.0))
        throw ConfigError("fixed bandwidth must be positive");
    if (cfg.bandwidth_rule == BandwidthRule::power && cfg.epsilons.back() <= 0.0)
        throw ConfigError("the power bandwidth rule needs every eps > 0");
    for (double t : cfg.eval_times)
        if (!(t >= 0.0 && t <= cfg.T)) throw ConfigError("eval_times must lie in [0, T]");
    const double l0 = cfg.tube.lower_at(0.0);
    const double u0 = cfg.tube.upper_at(0.0);
    if (!(cfg.x0 >= l0 && cfg.x0 <= u0)) {
        std::ostringstream msg;
        msg << "x0 = " << cfg.x0 << " lies outside C(0) = [" << l0 << ", " << u0 << "]";
        throw PreconditionError(msg.str());
    }
}

double bandwidth_for(const ExperimentConfig& cfg, double eps)
{
    return cfg.bandwidth_rule == BandwidthRule::power ? power_bandwidth(eps, cfg.H) : cfg.fixed_bandwidth;
}

std::vector<double> default_eval_times(const ExperimentConfig& cfg)
{
    double h_max = 0.0;
    for (double e : cfg.epsilons) h_max = std::max(h_max, bandwidth_for(cfg, e));
    const double margin = h_max * support_radius(cfg.kernel);
    if (!(2.0 * margin < cfg.T))
        throw PreconditionError("bandwidth margins cover the whole observation window");

    const Grid grid(cfg.T, cfg.n);
    constexpr int kPoints = 64;
    std::vector<double> out;
    for (int i = 0; i < kPoints; ++i) {
        const double t = margin + (cfg.T - 2.0 * margin) * i / (kPoints - 1.0);
        std::size_t k = grid.nearest_index(std::clamp(t, 0.0, cfg.T));
        // Keep snapped points inside the margins.
        while (grid.t(k) < margin && k < grid.n) ++k;
        while (grid.t(k) > cfg.T - margin && k > 0) --k;
        const double snapped = grid.t(k);
        if (out.empty() || snapped > out.back()) out.push_back(snapped);
    }
    return out;
}

// ---------------------------------------------------------------------------

Experiment::Experiment(ExperimentConfig cfg) : cfg_(std::move(cfg)), grid_(cfg_.T, cfg_.n)
{
    validate(cfg_);
    tube_ = trace_tube(cfg_.tube, grid_);
    trend_ = solve_trend(cfg_.drift, tube_, cfg_.x0, grid_);
    sampler_ = cached_sampler(cfg_.H, cfg_.n, cfg_.T, cfg_.fbm_method);

    eval_times_ = cfg_.eval_times.empty() ? default_eval_times(cfg_) : cfg_.eval_times;
    for (double& t : eval_times_) {
        const std::size_t k = grid_.nearest_index(t);
        eval_indices_.push_back(k);
        t = grid_.t(k);
    }
    decomposition_time_ = eval_times_[eval_times_.size() / 2];

    for (std::size_t i = 0; i < cfg_.epsilons.size(); ++i) {
        bandwidths_.push_back(bandwidth_for(cfg_, cfg_.epsilons[i]));
        weights_.push_back(weight_matrix(grid_, estimator_config(i)));
    }
}

EstimatorConfig Experiment::estimator_config(std::size_t eps_index) const
{
    return EstimatorConfig{cfg_.kernel, bandwidths_.at(eps_index), eval_times_, cfg_.convention};
}

Eigen::VectorXd Experiment::noise_path(std::size_t rep) const
{
    return sampler_->sample(SeedSpec{cfg_.master_seed, rep}).values;
}

// ---------------------------------------------------------------------------

namespace {

ReplicationRecord record_for(const Experiment& exp, std::size_t eps_index, std::size_t rep,
                             const Eigen::VectorXd& B)
{
    const ExperimentConfig& cfg = exp.config();
    const double eps = cfg.epsilons[eps_index];
    const Eigen::VectorXd W = eps * B;
    const ReflectedPath noisy = solve_reflected(cfg.drift, exp.tube(), W, cfg.x0, exp.grid());
    const TrendSolution& trend = exp.trend();

    ReplicationRecord r;
    r.rep_index = rep;
    r.epsilon = eps;
    r.bandwidth = exp.bandwidth(eps_index);

    const Eigen::VectorXd tau_hat = estimate_trend(noisy.X, exp.weights(eps_index));
    r.pointwise_error.resize(tau_hat.size());
    for (Eigen::Index i = 0; i < tau_hat.size(); ++i)
        r.pointwise_error[i] = tau_hat[i] - trend.tau[static_cast<Eigen::Index>(exp.eval_indices()[static_cast<std::size_t>(i)])];
    r.sup_sq_error = r.pointwise_error.size() ? r.pointwise_error.cwiseAbs2().maxCoeff() : 0.0;
    r.decomposition = decompose_error(noisy, trend, B, cfg.drift, eps, exp.estimator_config(eps_index),
                                      exp.decomposition_time());
    r.state_sup_sq = sup_sq(noisy.X, trend.x);
    r.reflection_sup_sq = sup_sq(noisy.Y, trend.y);
    return r;
}

} // namespace

ReplicationRecord run_replication(const Experiment& exp, std::size_t eps_index, std::size_t rep_index)
{
    if (rep_index >= exp.config().replications)
        throw PreconditionError("replication index exceeds the configured count");
    if (eps_index >= exp.config().epsilons.size()) throw PreconditionError("eps index out of range");
    return record_for(exp, eps_index, rep_index, exp.noise_path(rep_index));
}

std::vector<ReplicationRecord> run_replication_all(const Experiment& exp, std::size_t rep_index)
{
    if (rep_index >= exp.config().replications)
        throw PreconditionError("replication index exceeds the configured count");
    const Eigen::VectorXd B = exp.noise_path(rep_index);
    std::vector<ReplicationRecord> out;
    for (std::size_t e = 0; e < exp.config().epsilons.size(); ++e) out.push_back(record_for(exp, e, rep_index, B));
    return out;
}

std::vector<std::vector<ReplicationRecord>> run_all(const Experiment& exp, unsigned threads)
{
    return parallel_map<std::vector<ReplicationRecord>>(
        exp.config().replications, threads, [&](std::size_t rep) { return run_replication_all(exp, rep); });
}

// ---------------------------------------------------------------------------
// Aggregation

RiskEstimate estimate_risk(const std::vector<double>& values)
{
    if (values.size() < 2) throw PreconditionError("risk estimate needs at least two replications");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return RiskEstimate{mean, std::sqrt(ss / (n - 1.0) / n)};
}

RiskEstimate estimate_risk(const Experiment& exp, std::size_t eps_index, unsigned threads)
{
    const auto values = parallel_map<double>(exp.config().replications, threads, [&](std::size_t rep) {
        return run_replication(exp, eps_index, rep).sup_sq_error;
    });
    return estimate_risk(values);
}

SlopeFit linear_regression(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 3) throw PreconditionError("regression needs at least 3 points");
    const auto m = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd A(m, 2);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = x[static_cast<std::size_t>(i)];
        b[i] = y[static_cast<std::size_t>(i)];
    }
    const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(b);
    const Eigen::VectorXd resid = b - A * coef;
    const double dof = static_cast<double>(m - 2);
    const double s2 = resid.squaredNorm() / dof;
    const double mean_x = A.col(1).mean();
    const double sxx = (A.col(1).array() - mean_x).square().sum();
    if (!(sxx > 0.0)) throw PreconditionError("regression abscissae are all equal");

    SlopeFit fit;
    fit.intercept = coef[0];
    fit.slope = coef[1];
    fit.slope_se = std::sqrt(s2 / sxx);
    const boost::math::students_t dist(dof);
    const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
    fit.ci_low = fit.slope - q * fit.slope_se;
    fit.ci_high = fit.slope + q * fit.slope_se;
    fit.points = x.size();
    return fit;
}

SlopeFit rate_regression(const std::vector<std::pair<double, double>>& points)
{
    std::vector<double> lx, ly;
    for (const auto& [eps, risk] : points) {
        if (!(eps > 0.0)) throw PreconditionError("rate regression needs eps > 0");
        if (!(risk > 0.0)) throw PreconditionError("rate regression needs positive risks (log of zero)");
        lx.push_back(std::log(eps));
        ly.push_back(std::log(risk));
    }
    return linear_regression(lx, ly);
}

double target_rate_slope(double H) { return 2.0 / (2.0 - H); }

RiskReport summarize_risk(const Experiment& exp, const std::vector<std::vector<ReplicationRecord>>& records)
{
    const ExperimentConfig& cfg = exp.config();
    RiskReport report;
    report.target_slope = target_rate_slope(cfg.H);
    report.decomposition_time = exp.decomposition_time();
    report.eval_times = exp.eval_times();

    std::vector<std::pair<double, double>> curve;
    for (std::size_t e = 0; e < cfg.epsilons.size(); ++e) {
        RiskPoint p;
        p.epsilon = cfg.epsilons[e];
        p.bandwidth = exp.bandwidth(e);
        p.bandwidth_ratio = bandwidth_ratio(p.epsilon, p.bandwidth, cfg.H);
        p.h_over_dt = p.bandwidth / exp.grid().dt();

        std::vector<double> sup;
        Eigen::VectorXd pointwise = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(exp.eval_times().size()));
        for (const auto& rep : records) {
            const ReplicationRecord& r = rep[e];
            sup.push_back(r.sup_sq_error);
            pointwise += r.pointwise_error.cwiseAbs2();
            const auto& d = r.decomposition;
            const std::array<double, 5> c{d.alpha, d.beta, d.gamma, d.zeta, d.eta};
            for (std::size_t i = 0; i < 5; ++i) p.component_ms[i] += c[i] * c[i];
        }
        const double R = static_cast<double>(records.size());
        for (double& c : p.component_ms) c /= R;
        p.sup_risk = estimate_risk(sup);
        p.pointwise_sup_risk = pointwise.size() ? pointwise.maxCoeff() / R : 0.0;
        report.points.push_back(p);
        if (p.epsilon > 0.0 && p.sup_risk.mean > 0.0) curve.emplace_back(p.epsilon, p.sup_risk.mean);
    }
    if (curve.size() >= 3) {
        report.slope = rate_regression(curve);
        report.slope_available = true;
    }
    return report;
}

RiskReport risk_sweep(const Experiment& exp, unsigned threads)
{
    return summarize_risk(exp, run_all(exp, threads));
}

StateScalingReport state_scaling_study(const Experiment& exp, unsigned threads)
{
    const ExperimentConfig& cfg = exp.config();
    if (cfg.epsilons.size() < 3) throw PreconditionError("the scaling study needs at least three eps values");
    for (double e : cfg.epsilons)
        if (!(e > 0.0)) throw PreconditionError("eps = 0 has zero risk; its logarithm is undefined");

    const auto records = run_all(exp, threads);
    StateScalingReport rep;
    rep.epsilons = cfg.epsilons;
    std::vector<std::pair<double, double>> state_curve, refl_curve;
    for (std::size_t e = 0; e < cfg.epsilons.size(); ++e) {
        std::vector<double> xs, ys;
        for (const auto& r : records) {
            xs.push_back(r[e].state_sup_sq);
            ys.push_back(r[e].reflection_sup_sq);
        }
        rep.state.push_back(estimate_risk(xs));
        rep.reflection.push_back(estimate_risk(ys));
        state_curve.emplace_back(cfg.epsilons[e], rep.state.back().mean);
        refl_curve.emplace_back(cfg.epsilons[e], rep.reflection.back().mean);
    }
    rep.state_slope = rate_regression(state_curve);
    // The reflection term can vanish identically (no boundary contact).
    const bool refl_positive = std::all_of(refl_curve.begin(), refl_curve.end(),
                                           [](const auto& p) { return p.second > 0.0; });
    if (refl_positive) {
        rep.reflection_slope = rate_regression(refl_curve);
        rep.reflection_slope_available = true;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Pointwise limits

KsResult ks_normal(std::vector<double> samples, double variance)
{
    if (samples.empty() || !(variance > 0.0)) throw PreconditionError("KS test needs samples and a positive variance");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    const double sd = std::sqrt(variance);
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = normal_cdf(samples[i] / sd);
        d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
    }
    const double sqrt_n = std::sqrt(n);
    return KsResult{d, kolmogorov_survival((sqrt_n + 0.12 + 0.11 / sqrt_n) * d)};
}

double mu_limit(const Experiment& exp, std::size_t k)
{
    const ExperimentConfig& cfg = exp.config();
    const TrendSolution& sol = exp.trend();
    const double yt = ydot(cfg.drift, cfg.tube, sol, k);
    const double y0 = ydot(cfg.drift, cfg.tube, sol, 0);
    const double bt = cfg.drift(sol.x[static_cast<Eigen::Index>(k)]);
    const double b0 = cfg.drift(sol.x[0]);
    return (bt - b0 + yt - y0) * kernel_first_moment(cfg.kernel);
}

AsymptoticReport asymptotic_study(const Experiment& exp, double t, unsigned threads)
{
    const ExperimentConfig& cfg = exp.config();
    const Grid& grid = exp.grid();
    const std::size_t k = grid.nearest_index(t);
    t = grid.t(k);
    for (double e : cfg.epsilons)
        if (!(e > 0.0)) throw PreconditionError("the asymptotic study needs every eps > 0");

    AsymptoticReport rep;
    rep.t = t;
    rep.sigma2 = sigma2_hk(cfg.kernel, cfg.H);
    rep.first_moment = kernel_first_moment(cfg.kernel);
    rep.ydot_t = ydot(cfg.drift, cfg.tube, exp.trend(), k);
    rep.ydot_0 = ydot(cfg.drift, cfg.tube, exp.trend(), 0);
    rep.mu = mu_limit(exp, k);

    const std::size_t m = cfg.epsilons.size();
    std::vector<Eigen::VectorXd> coeffs;
    std::vector<EstimatorConfig> est;
    for (std::size_t e = 0; e < m; ++e) {
        coeffs.push_back(gamma_dot_coefficients(grid, cfg.kernel, exp.bandwidth(e), t, cfg.convention));
        EstimatorConfig c = exp.estimator_config(e);
        c.eval_times = {t};
        est.push_back(std::move(c));
    }

    struct Sample {
        std::vector<double> bias;
        std::vector<double> gdot;
    };
    const auto samples = parallel_map<Sample>(cfg.replications, threads, [&](std::size_t r) {
        const Eigen::VectorXd B = exp.noise_path(r);
        const Eigen::VectorXd dB = increments(B);
        Sample s;
        for (std::size_t e = 0; e < m; ++e) {
            const double eps = cfg.epsilons[e];
            const double scale = std::pow(eps, -1.0 / (2.0 - cfg.H));
            const ReflectedPath noisy = solve_reflected(cfg.drift, exp.tube(), (eps * B).eval(), cfg.x0, grid);
            const ErrorDecomposition d = decompose_error(noisy, exp.trend(), B, cfg.drift, eps, est[e], t);
            s.bias.push_back(scale * (d.error - d.gamma));
            s.gdot.push_back(scale * eps * coeffs[e].dot(dB));
        }
        return s;
    });

    std::vector<double> hs, bias_means;
    for (std::size_t e = 0; e < m; ++e) {
        const double eps = cfg.epsilons[e];
        AsymptoticPoint p;
        p.epsilon = eps;
        p.bandwidth = exp.bandwidth(e);
        p.h_over_dt = p.bandwidth / grid.dt();
        const double scale2 = std::pow(eps, -2.0 / (2.0 - cfg.H));
        p.scaled_variance = scale2 * gamma_dot_variance(cfg.H, grid, cfg.kernel, p.bandwidth, t, eps, cfg.convention);
        p.variance_ratio = p.scaled_variance / (rep.sigma2 * std::pow(p.bandwidth, 2.0 * cfg.H - 2.0) * scale2 * eps * eps);

        std::vector<double> bias, gdot;
        for (const auto& s : samples) {
            bias.push_back(s.bias[e]);
            gdot.push_back(s.gdot[e]);
        }
        p.scaled_bias = estimate_risk(bias);
        const RiskEstimate g2 = estimate_risk([&] {
            std::vector<double> sq;
            for (double g : gdot) sq.push_back(g * g);
            return sq;
        }());
        p.gamma_dot_sample_variance = g2.mean;
        p.ks = ks_normal(gdot, p.scaled_variance);

        if (p.h_over_dt >= 128.0)
            rep.worst_variance_ratio_error = std::max(rep.worst_variance_ratio_error, std::abs(p.variance_ratio - 1.0));
        rep.min_ks_p_value = std::min(rep.min_ks_p_value, p.ks.p_value);
        hs.push_back(p.bandwidth);
        bias_means.push_back(p.scaled_bias.mean);
        rep.points.push_back(p);
    }
    if (m >= 3) {
        rep.bias_extrapolation = linear_regression(hs, bias_means);
        rep.extrapolated_mu = rep.bias_extrapolation.intercept;
    } else {
        rep.extrapolated_mu = bias_means.back();
    }
    rep.mu_relative_error = rep.mu != 0.0 ? std::abs(rep.extrapolated_mu - rep.mu) / std::abs(rep.mu)
                                          : std::abs(rep.extrapolated_mu);
    return rep;
}

} // namespace rfsde
