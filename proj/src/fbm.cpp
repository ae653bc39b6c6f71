#include "rfsde/fbm.hpp"

#include "rfsde/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace rfsde {

namespace {

void check_hurst(double H)
{
    if (!(H >= 0.5 && H < 1.0)) throw PreconditionError("Hurst index must lie in [1/2, 1)");
}

Eigen::VectorXd standard_normals(Rng& rng, Eigen::Index n)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
    return z;
}

} // namespace

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_stream_seed(const SeedSpec& seed)
{
    return splitmix64(splitmix64(seed.master_seed) ^ seed.stream_index);
}

Rng make_rng(const SeedSpec& seed) { return Rng(derive_stream_seed(seed)); }

double fgn_covariance(double H, std::size_t lag, double dt)
{
    check_hurst(H);
    const double two_h = 2.0 * H;
    const double k = static_cast<double>(lag);
    const double c = lag == 0 ? 1.0
                              : 0.5 * (std::pow(k + 1.0, two_h) - 2.0 * std::pow(k, two_h) +
                                       std::pow(k - 1.0, two_h));
    return std::pow(dt, two_h) * c;
}

FbmSampler::FbmSampler(double H, std::size_t n, double T, FbmMethod method)
    : H_(H), n_(n), T_(T), method_(method)
{
    check_hurst(H);
    if (n == 0) throw PreconditionError("fBm grid needs at least one step");
    if (!(T > 0.0)) throw PreconditionError("time horizon must be positive");

    const double dt = T / static_cast<double>(n);
    Eigen::VectorXd gamma(n + 1);
    for (std::size_t k = 0; k <= n; ++k) gamma[static_cast<Eigen::Index>(k)] = fgn_covariance(H, k, dt);

    if (method == FbmMethod::cholesky) {
        if (n > kCholeskyMaxSteps)
            throw PreconditionError("Cholesky fBm sampling is limited to " +
                                    std::to_string(kCholeskyMaxSteps) +
                                    " steps; enable circulant embedding for n = " + std::to_string(n));
        const auto N = static_cast<Eigen::Index>(n);
        Eigen::MatrixXd cov(N, N);
        for (Eigen::Index i = 0; i < N; ++i)
            for (Eigen::Index j = 0; j <= i; ++j) cov(i, j) = gamma[i - j];
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success)
            throw NumericalError("fGn covariance is not numerically positive definite");
        lower_ = llt.matrixL();
        return;
    }

    // Circulant embedding of size 2n: first row (g0, ..., gn, g_{n-1}, ..., g1).
    const std::size_t m = 2 * n;
    std::vector<std::complex<double>> row(m), eig;
    for (std::size_t k = 0; k <= n; ++k) row[k] = gamma[static_cast<Eigen::Index>(k)];
    for (std::size_t k = n + 1; k < m; ++k) row[k] = gamma[static_cast<Eigen::Index>(m - k)];
    Eigen::FFT<double> fft;
    fft.fwd(eig, row);

    double lam_max = 0.0;
    for (const auto& l : eig) lam_max = std::max(lam_max, l.real());
    sqrt_eigs_.resize(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) {
        double lam = eig[k].real();
        if (lam < -1e-10 * std::max(1.0, lam_max))
            throw NumericalError("circulant embedding has a negative eigenvalue " +
                                 std::to_string(lam));
        lam = std::max(lam, 0.0);
        sqrt_eigs_[static_cast<Eigen::Index>(k)] = std::sqrt(lam / static_cast<double>(m));
    }
}

Eigen::VectorXd FbmSampler::sample_increments(Rng& rng) const
{
    const auto N = static_cast<Eigen::Index>(n_);
    if (method_ == FbmMethod::cholesky) {
        const Eigen::VectorXd z = standard_normals(rng, N);
        return lower_.triangularView<Eigen::Lower>() * z;
    }

    // Re(F diag(sqrt(lambda/m)) (Z1 + i Z2)) has covariance exactly C.
    const auto m = sqrt_eigs_.size();
    const Eigen::VectorXd z = standard_normals(rng, 2 * m);
    std::vector<std::complex<double>> spectrum(static_cast<std::size_t>(m)), field;
    for (Eigen::Index k = 0; k < m; ++k)
        spectrum[static_cast<std::size_t>(k)] = sqrt_eigs_[k] * std::complex<double>(z[2 * k], z[2 * k + 1]);
    Eigen::FFT<double> fft;
    fft.fwd(field, spectrum);
    Eigen::VectorXd out(N);
    for (Eigen::Index k = 0; k < N; ++k) out[k] = field[static_cast<std::size_t>(k)].real();
    return out;
}

FbmPath FbmSampler::sample(const SeedSpec& seed) const
{
    Rng rng = make_rng(seed);
    return FbmPath{H_, T_, cumulate(sample_increments(rng))};
}

std::shared_ptr<const FbmSampler> cached_sampler(double H, std::size_t n, double T, FbmMethod method)
{
    using Key = std::tuple<double, std::size_t, double, int>;
    static std::mutex mutex;
    static std::map<Key, std::shared_ptr<const FbmSampler>> cache;

    const Key key{H, n, T, static_cast<int>(method)};
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto sampler = std::make_shared<const FbmSampler>(H, n, T, method);
    std::lock_guard lock(mutex);
    return cache.emplace(key, std::move(sampler)).first->second;
}

FbmPath sample_fbm(double H, std::size_t n, double T, const SeedSpec& seed, FbmMethod method)
{
    return cached_sampler(H, n, T, method)->sample(seed);
}

Eigen::VectorXd cumulate(const Eigen::Ref<const Eigen::VectorXd>& increments)
{
    Eigen::VectorXd out(increments.size() + 1);
    out[0] = 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < increments.size(); ++i) {
        acc += increments[i];
        out[i + 1] = acc;
    }
    return out;
}

} // namespace rfsde
