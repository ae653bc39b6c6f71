#pragma once

// Kernel trend estimator
//   tau_hat(t) = (1/h) \int_0^t \int_0^T K((s-u)/h) dX(s) du
//              = \int_0^T W(s, t) dX(s),   W(s, t) = Phi_K(s/h) - Phi_K((s-t)/h),
// its five-term error decomposition, and the pointwise statistic
//   gamma_dot(t) = eps \int_0^T K_h(s - t) dB(s).

#include "rfsde/kernels.hpp"
#include "rfsde/reflect.hpp"
#include "rfsde/trend.hpp"

#include <Eigen/Dense>

#include <vector>

namespace rfsde {

/// Where the weight of the increment X_{j+1} - X_j is evaluated.
enum class IncrementConvention { left, midpoint };

struct EstimatorConfig {
    KernelSpec kernel;
    double bandwidth = 0.1;
    std::vector<double> eval_times;
    IncrementConvention convention = IncrementConvention::midpoint;

    /// h = eps^{1/(2-H)}.
    static EstimatorConfig with_power_bandwidth(const KernelSpec& kernel, double eps, double H,
                                                std::vector<double> eval_times,
                                                IncrementConvention convention = IncrementConvention::midpoint);
};

double power_bandwidth(double eps, double H);

/// eps / h^{1-H}; small values indicate the bandwidth is large enough for
/// the noise term to vanish.
double bandwidth_ratio(double eps, double h, double H);

/// W(s, t) = \int_0^t K_h(s - u) du, in [0, 1].
double weight(double s, double t, const KernelSpec& k, double h);

/// s_j for each of the n increments of `grid`.
Eigen::VectorXd increment_nodes(const Grid& grid, IncrementConvention convention);

/// Row i holds W(s_j, eval_times[i]) for every increment j, so that
/// tau_hat = weights * diff(X).
Eigen::MatrixXd weight_matrix(const Grid& grid, const EstimatorConfig& cfg);

Eigen::VectorXd increments(const Eigen::Ref<const Eigen::VectorXd>& path);

Eigen::VectorXd estimate_trend(const Eigen::Ref<const Eigen::VectorXd>& X, const Grid& grid,
                               const EstimatorConfig& cfg);
Eigen::VectorXd estimate_trend(const Eigen::Ref<const Eigen::VectorXd>& X,
                               const Eigen::Ref<const Eigen::MatrixXd>& weights);

struct ErrorDecomposition {
    double t = 0.0;
    double alpha = 0.0; ///< drift mismatch b(X_eps) - b(x)
    double beta = 0.0;  ///< smoothing bias of the drift integral
    double gamma = 0.0; ///< noise term
    double zeta = 0.0;  ///< reflection mismatch Y_eps - y
    double eta = 0.0;   ///< smoothing bias of the reflection term
    double sum = 0.0;
    double error = 0.0; ///< tau_hat(t) - tau(t) computed directly
};

/// Splits tau_hat(t) - tau(t) with the same weights as the estimator. `t`
/// must be a grid point. Requires the noisy path, the noiseless solution and
/// the driving fBm `B` to share one grid.
ErrorDecomposition decompose_error(const ReflectedPath& noisy, const TrendSolution& trend,
                                   const Eigen::Ref<const Eigen::VectorXd>& B,
                                   const dsl::FunctionSpec& drift, double eps,
                                   const EstimatorConfig& cfg, double t);

/// c_j = K_h(s_j - t), so that gamma_dot = eps * c . diff(B).
Eigen::VectorXd gamma_dot_coefficients(const Grid& grid, const KernelSpec& k, double h, double t,
                                       IncrementConvention convention = IncrementConvention::midpoint);

/// Requires [t + hA, t + hB] inside [0, T].
double gamma_dot(const Eigen::Ref<const Eigen::VectorXd>& B, const Grid& grid, const KernelSpec& k,
                 double h, double t, double eps,
                 IncrementConvention convention = IncrementConvention::midpoint);

/// Exact variance of the discrete gamma_dot:
///   eps^2 sum_{j,k} c_j c_k gamma_fGn(|j - k|).
double gamma_dot_variance(double H, const Grid& grid, const KernelSpec& k, double h, double t,
                          double eps, IncrementConvention convention = IncrementConvention::midpoint);

} // namespace rfsde
