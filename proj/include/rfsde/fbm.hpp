#pragma once

// Exact-in-law sampling of fractional Brownian motion on a uniform grid.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <string_view>

namespace rfsde {

/// Identifies one pseudorandom stream: the pair is hashed (splitmix64) into
/// the 64-bit seed of a mt19937_64 engine, so distinct stream indices give
/// statistically independent streams and no stream depends on scheduling.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;
};

using Rng = std::mt19937_64;

inline constexpr std::string_view kGeneratorName =
    "mt19937_64 seeded by splitmix64(splitmix64(master_seed) ^ stream_index); "
    "normals from std::normal_distribution<double> (libstdc++)";

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_stream_seed(const SeedSpec& seed);
Rng make_rng(const SeedSpec& seed);

/// Autocovariance of fractional Gaussian noise with step dt:
///   dt^{2H} (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2.
/// Accepts 1/2 <= H < 1 (H = 1/2 is Brownian motion).
double fgn_covariance(double H, std::size_t lag, double dt);

enum class FbmMethod { cholesky, circulant };

inline constexpr std::size_t kCholeskyMaxSteps = 4096;

struct FbmPath {
    double H = 0.75;
    double T = 1.0;
    Eigen::VectorXd values; ///< n + 1 samples, values[0] = 0
    std::size_t steps() const { return static_cast<std::size_t>(values.size()) - 1; }
};

/// Precomputed factorization of the n x n fGn covariance; immutable and
/// shareable across threads once built.
class FbmSampler {
public:
    FbmSampler(double H, std::size_t n, double T, FbmMethod method = FbmMethod::cholesky);

    double hurst() const { return H_; }
    std::size_t steps() const { return n_; }
    double horizon() const { return T_; }
    FbmMethod method() const { return method_; }

    /// n increments B(t_{k+1}) - B(t_k) drawn from `rng`.
    Eigen::VectorXd sample_increments(Rng& rng) const;
    FbmPath sample(const SeedSpec& seed) const;

private:
    double H_;
    std::size_t n_;
    double T_;
    FbmMethod method_;
    Eigen::MatrixXd lower_;        // Cholesky factor
    Eigen::VectorXd sqrt_eigs_;    // circulant embedding: sqrt(lambda / 2n)
};

/// Sampler for (H, n, T, method), built once and cached for the lifetime of
/// the process.
std::shared_ptr<const FbmSampler> cached_sampler(double H, std::size_t n, double T,
                                                 FbmMethod method = FbmMethod::cholesky);

/// One fBm path; deterministic in `seed`.
FbmPath sample_fbm(double H, std::size_t n, double T, const SeedSpec& seed,
                   FbmMethod method = FbmMethod::cholesky);

/// Cumulative sum with a leading zero.
Eigen::VectorXd cumulate(const Eigen::Ref<const Eigen::VectorXd>& increments);

} // namespace rfsde
