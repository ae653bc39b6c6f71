#pragma once

// Monte Carlo studies: risk curves and their log-log slope, the eps^2
// scaling of ||X_eps - x||, and the pointwise bias / variance limits.
//
// Replication r of every study draws its fBm path from the stream
// (master_seed, r) and reuses that path for all eps (common random
// numbers), so results depend on neither thread count nor scheduling.

#include "rfsde/estimator.hpp"
#include "rfsde/fbm.hpp"
#include "rfsde/kernels.hpp"
#include "rfsde/reflect.hpp"
#include "rfsde/specdsl.hpp"
#include "rfsde/trend.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace rfsde {

enum class BandwidthRule { power, fixed };

struct ExperimentConfig {
    double H = 0.75;
    double T = 1.0;
    std::size_t n = 1024;
    double x0 = 0.0;
    dsl::FunctionSpec drift{"0", "x"};
    TubeSpec tube{dsl::FunctionSpec{"-1", "t"}, dsl::FunctionSpec{"1", "t"}};
    KernelSpec kernel = make_kernel(KernelFamily::triangular);
    std::vector<double> epsilons{0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
    BandwidthRule bandwidth_rule = BandwidthRule::power;
    double fixed_bandwidth = 0.1;
    std::size_t replications = 200;
    std::uint64_t master_seed = 1;
    /// Empty selects 64 points between margins of h_max * max(|A|, |B|).
    std::vector<double> eval_times;
    IncrementConvention convention = IncrementConvention::midpoint;
    FbmMethod fbm_method = FbmMethod::cholesky;
};

/// Throws ConfigError / PreconditionError on an invalid configuration.
void validate(const ExperimentConfig& cfg);

double bandwidth_for(const ExperimentConfig& cfg, double eps);

/// Default evaluation grid, snapped to grid points.
std::vector<double> default_eval_times(const ExperimentConfig& cfg);

/// Everything shared read-only by the replications of one configuration:
/// grid, tube trace, the noiseless solution and one weight matrix per eps.
class Experiment {
public:
    explicit Experiment(ExperimentConfig cfg);

    const ExperimentConfig& config() const { return cfg_; }
    const Grid& grid() const { return grid_; }
    const TubeTrace& tube() const { return tube_; }
    const TrendSolution& trend() const { return trend_; }
    const std::vector<double>& eval_times() const { return eval_times_; }
    const std::vector<std::size_t>& eval_indices() const { return eval_indices_; }
    double bandwidth(std::size_t eps_index) const { return bandwidths_.at(eps_index); }
    const Eigen::MatrixXd& weights(std::size_t eps_index) const { return weights_.at(eps_index); }
    /// Evaluation time used for the per-replication error decomposition.
    double decomposition_time() const { return decomposition_time_; }
    const FbmSampler& sampler() const { return *sampler_; }
    EstimatorConfig estimator_config(std::size_t eps_index) const;

    /// fBm path of replication `rep`.
    Eigen::VectorXd noise_path(std::size_t rep) const;

private:
    ExperimentConfig cfg_;
    Grid grid_;
    TubeTrace tube_;
    TrendSolution trend_;
    std::shared_ptr<const FbmSampler> sampler_;
    std::vector<double> eval_times_;
    std::vector<std::size_t> eval_indices_;
    std::vector<double> bandwidths_;
    std::vector<Eigen::MatrixXd> weights_;
    double decomposition_time_ = 0.0;
};

struct ReplicationRecord {
    std::size_t rep_index = 0;
    double epsilon = 0.0;
    double bandwidth = 0.0;
    /// max over eval times of |tau_hat - tau|^2
    double sup_sq_error = 0.0;
    Eigen::VectorXd pointwise_error;
    ErrorDecomposition decomposition;
    /// ||X_eps - x||_inf^2 and ||Y_eps - y||_inf^2 over the whole grid
    double state_sup_sq = 0.0;
    double reflection_sup_sq = 0.0;
};

ReplicationRecord run_replication(const Experiment& exp, std::size_t eps_index, std::size_t rep_index);
/// One record per eps, all driven by the same fBm path.
std::vector<ReplicationRecord> run_replication_all(const Experiment& exp, std::size_t rep_index);

/// Calls fn(i) for i in [0, count) on `threads` workers; results are stored
/// by index.
template <typename T>
std::vector<T> parallel_map(std::size_t count, unsigned threads, const std::function<T(std::size_t)>& fn);

/// records[rep][eps_index].
std::vector<std::vector<ReplicationRecord>> run_all(const Experiment& exp, unsigned threads);

struct RiskEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Sample mean and sd / sqrt(R); needs at least two values.
RiskEstimate estimate_risk(const std::vector<double>& values);
RiskEstimate estimate_risk(const Experiment& exp, std::size_t eps_index, unsigned threads = 1);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double ci_low = 0.0; ///< 95% confidence interval
    double ci_high = 0.0;
    std::size_t points = 0;
};

/// OLS of log(risk) on log(eps). Needs >= 3 points with eps, risk > 0.
SlopeFit rate_regression(const std::vector<std::pair<double, double>>& points);

/// Plain OLS of y on x (used for extrapolation in h).
SlopeFit linear_regression(const std::vector<double>& x, const std::vector<double>& y);

double target_rate_slope(double H);

struct RiskPoint {
    double epsilon = 0.0;
    double bandwidth = 0.0;
    RiskEstimate sup_risk;          ///< E sup_t |tau_hat - tau|^2
    double pointwise_sup_risk = 0.0; ///< sup_t E |tau_hat - tau|^2
    double bandwidth_ratio = 0.0;    ///< eps / h^{1-H}
    double h_over_dt = 0.0;
    /// Mean squares of alpha..eta at the decomposition time.
    std::array<double, 5> component_ms{};
};

struct RiskReport {
    std::vector<RiskPoint> points;
    SlopeFit slope;
    bool slope_available = false;
    double target_slope = 0.0;
    double decomposition_time = 0.0;
    std::vector<double> eval_times;
};

RiskReport risk_sweep(const Experiment& exp, unsigned threads);
RiskReport summarize_risk(const Experiment& exp, const std::vector<std::vector<ReplicationRecord>>& records);

struct StateScalingReport {
    std::vector<double> epsilons;
    std::vector<RiskEstimate> state;      ///< E ||X_eps - x||^2
    std::vector<RiskEstimate> reflection; ///< E ||Y_eps - y||^2
    SlopeFit state_slope;
    SlopeFit reflection_slope;
    bool reflection_slope_available = false;
    double target_slope = 2.0;
};

/// Throws PreconditionError for fewer than three eps or eps = 0.
StateScalingReport state_scaling_study(const Experiment& exp, unsigned threads);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against N(0, variance).
KsResult ks_normal(std::vector<double> samples, double variance);

struct AsymptoticPoint {
    double epsilon = 0.0;
    double bandwidth = 0.0;
    double h_over_dt = 0.0;
    double scaled_variance = 0.0; ///< exact Var(eps^{-1/(2-H)} gamma_dot(t))
    double variance_ratio = 0.0;  ///< scaled_variance / sigma2_HK
    RiskEstimate scaled_bias;     ///< eps^{-1/(2-H)} (tau_hat - tau - gamma)(t)
    double gamma_dot_sample_variance = 0.0;
    KsResult ks;
};

struct AsymptoticReport {
    double t = 0.0;
    double sigma2 = 0.0;
    double mu = 0.0;
    double first_moment = 0.0;
    double ydot_t = 0.0;
    double ydot_0 = 0.0;
    std::vector<AsymptoticPoint> points;
    SlopeFit bias_extrapolation; ///< scaled bias mean against h; intercept estimates mu
    double extrapolated_mu = 0.0;
    double mu_relative_error = 0.0;
    double worst_variance_ratio_error = 0.0; ///< over points with h/dt >= 128
    double min_ks_p_value = 1.0;
};

/// Requires every eps > 0, the kernel support around `t` to stay inside
/// [0, T] for all bandwidths, and t to be off regime transitions.
AsymptoticReport asymptotic_study(const Experiment& exp, double t, unsigned threads);

double mu_limit(const Experiment& exp, std::size_t k);

} // namespace rfsde

#include "rfsde/detail/parallel.hpp"
