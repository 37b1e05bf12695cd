#pragma once

#include "resv/dynamics.hpp"
#include "resv/reservoir.hpp"
#include "resv/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace resv {

/// Noise amplitude sigma(m) >= 0 as a function of the source state.
using NoiseAmplitude = std::function<double(const Vec&)>;

[[nodiscard]] NoiseAmplitude constant_noise(double sigma);

struct SDEPath {
    std::vector<double> times;  // uniform, k * dt
    std::vector<Vec> states;
    std::uint64_t seed = 0;
    double dt = 0.0;
};

/// Euler-Maruyama for dX = -A X dt + C omega(phi^t m0) dt + C sigma(phi^t m0) dW
/// with dW in R^d, d = columns of C. The source is integrated
/// deterministically and read off on the same grid. Throws StepSizeError
/// unless dt * sigma_max(A) < 0.5.
[[nodiscard]] SDEPath euler_maruyama(const LinearReservoir& res, const SourceSystem& source,
                                     const Observation& omega, const NoiseAmplitude& sigma,
                                     const Vec& m0, const Vec& x0, double dt, double duration,
                                     std::uint64_t seed, const IntegratorConfig& cfg = {});

/// Y_t = X_t - f(phi^t m) on the path grid.
[[nodiscard]] SDEPath error_process(const SDEPath& path,
                                    const std::function<Vec(double)>& gs_reference);

/// dY = -A Y dt + b dW with scalar Brownian motion W (b = sigma C).
[[nodiscard]] SDEPath ou_simulate(const Mat& a, const Vec& b, const Vec& y0, double dt,
                                  double duration, std::uint64_t seed);

struct CovarianceReport {
    Mat empirical;
    Mat lyapunov;         // solves A S + S A^T = sigma0^2 C C^T
    Mat scaled_inverse;  // sigma0^2 A^{-1}
    double rel_dist_lyapunov = 0.0;
    double rel_dist_scaled_inverse = 0.0;
    std::size_t samples = 0;
    double effective_samples = 0.0;
    bool insufficient_samples = false;  // effective samples < 1e4
    double sigma0 = 0.0;
};

/// Relative Frobenius distance |x - ref| / |ref|; absolute when ref == 0.
[[nodiscard]] double relative_frobenius(const Mat& x, const Mat& ref);

/// Empirical covariance of the path samples with t >= burn_in, compared with
/// the Lyapunov solution and sigma0^2 A^{-1}. The effective sample size is
/// the post-burn-in duration over the slowest-mode correlation time
/// 2 / min Re lambda(A), summed over paths.
[[nodiscard]] CovarianceReport stationary_covariance_check(const std::vector<SDEPath>& paths,
                                                           const Mat& a, const Mat& c,
                                                           double sigma0, double burn_in);

enum class OuScheme { euler_maruyama, exact };

struct StreamingCovarianceOptions {
    OuScheme scheme = OuScheme::euler_maruyama;
    double dt = 1e-3;
    double burn_in = 0.0;   // 0: 10 / min Re lambda(A)
    double duration = 1e3;  // recorded time per chain after burn-in
    int chains = 1;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

/// Same report as stationary_covariance_check, from OU chains of
/// dY = -A Y dt + sigma0 C dW started at 0 and accumulated on the fly
/// (nothing is stored). Chains are seeded with mix_seed(seed, chain).
/// OuScheme::exact samples the Gaussian transition over dt exactly and needs
/// a symmetric positive definite A; it has no step-size restriction.
[[nodiscard]] CovarianceReport simulate_stationary_covariance(const Mat& a, const Mat& c,
                                                              double sigma0,
                                                              const StreamingCovarianceOptions& opts);

/// {sigma0, samples, effective_samples, insufficient_samples, dim,
///  empirical, lyapunov, scaled_inverse (row-major), rel_dist_lyapunov,
///  rel_dist_scaled_inverse}.
[[nodiscard]] std::string covariance_report_json(const CovarianceReport& report);

} // namespace resv
