// One PASS/FAIL line per acceptance criterion. Tolerances are fixed here.

#include "resv/dynamics.hpp"
#include "resv/embedding.hpp"
#include "resv/experiments.hpp"
#include "resv/gs.hpp"

#include <Eigen/LU>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

using namespace resv;
using namespace resv::experiments;

namespace {

constexpr double kCircleTol = 1e-6;
constexpr double kCircleSeconds = 1.0;
constexpr double kClosedFormTol = 1e-10;
constexpr double kPdeSlope = 2.0;
constexpr double kPdeSlopeTol = 0.2;
constexpr double kMultiGsMinDistance = 0.1;
constexpr double kMultiGsSyncTol = 1e-3;
constexpr double kMultiGsSeconds = 30.0;
constexpr int kEmbedTrials = 1000;
constexpr double kEmbedSeconds = 60.0;
constexpr int kLorenzSeeds = 10;
constexpr int kLorenzRequired = 8;
constexpr double kLorenzDistance = 1.0;
constexpr double kLorenzSeconds = 600.0;
constexpr double kCltSlopeLo = -1.2;
constexpr double kCltSlopeHi = -0.8;
constexpr double kCltVarTol = 0.15;
constexpr double kCltSeconds = 300.0;
constexpr double kScalarNoiseTol = 0.05;
constexpr double kReservoirNoiseTol = 0.10;
constexpr double kNoiseEffectiveSamples = 1e6;
constexpr double kNoiseSeconds = 300.0;

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
    std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

template <class F>
double timed(F&& f) {
    const auto start = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

void circle_gs() {
    GsCheckResult r;
    (void)timed([&] { r = compute_gs_check(GsCheckParams{}, {}); });
    const bool pass = r.rows.size() == 20 && r.max_integral_error <= kCircleTol && r.integral_seconds < kCircleSeconds;
    report(pass, "circle-analytic-gs",
           fmt("%zu points, max |integral - analytic| = %.3e (tol %.0e), %.3f s (limit %.0f s)", r.rows.size(),
               r.max_integral_error, kCircleTol, r.integral_seconds, kCircleSeconds));
}

void fixed_point_gs() {
    const SourceSystem lorenz = lorenz63();
    const Vec m_star = lorenz.fixed_point("m_star");
    const LinearReservoir res = generate_reservoir(RandomReservoirSpec{7, 30.0, 1});
    const Vec omega = Vec::Constant(1, m_star[0]);

    const Vec closed = gs_fixed_point(res, omega);
    const Vec oracle = res.A().fullPivLu().solve(res.C() * omega[0]);
    const double closed_err = (closed - oracle).norm();

    WashoutOptions opts;
    opts.washout = 35.0;
    opts.horizon = 40.0;
    opts.sample_dt = 1.0;
    opts.x0 = Vec::Ones(7);
    const auto samples = gs_washout(res, lorenz, observe_component(0), 1, m_star, opts);
    double worst_ratio = 0.0, worst_err = 0.0;
    for (const auto& s : samples) {
        const double err = (s.value - oracle).norm();
        worst_err = std::max(worst_err, err);
        worst_ratio = std::max(worst_ratio, err / s.error_bound);
    }
    const bool pass = closed_err <= kClosedFormTol && worst_ratio <= 1.0 && !samples.empty();
    report(pass, "fixed-point-gs",
           fmt("closed form vs LU oracle %.3e (tol %.0e); washout max error %.3e, max error/bound %.3f",
               closed_err, kClosedFormTol, worst_err, worst_ratio));
}

void pde_slope() {
    const GsCheckResult r = compute_gs_check(GsCheckParams{}, {});
    std::ostringstream res;
    for (const auto& row : r.pde) res << " " << row.delta << ":" << row.residual;
    const bool pass = std::abs(r.pde_slope - kPdeSlope) <= kPdeSlopeTol;
    report(pass, "pde-residual-slope",
           fmt("slope %.4f (target %.1f +/- %.1f); residuals", r.pde_slope, kPdeSlope, kPdeSlopeTol) + res.str());
}

void multi_gs() {
    MultiGsResult r;
    const double secs = timed([&] { r = compute_multi_gs(MultiGsParams{}, {}); });
    const double sync = *std::max_element(r.within_region_distance.begin(), r.within_region_distance.end());
    const bool pass = r.min_pairwise_distance > kMultiGsMinDistance && sync < kMultiGsSyncTol && secs < kMultiGsSeconds;
    report(pass, "multi-gs",
           fmt("min pairwise distance %.4f (> %.1f), within-region distance at t=35 %.3e (< %.0e), %.2f s (limit %.0f s)",
               r.min_pairwise_distance, kMultiGsMinDistance, sync, kMultiGsSyncTol, secs, kMultiGsSeconds));
}

void embedding() {
    const SourceSystem lorenz = lorenz63();
    const Mat j = jacobian(lorenz, lorenz.fixed_point("m_star"));
    double generic = 0.0, identity = 1.0, small = 1.0, repeated = 1.0;
    const double secs = timed([&] {
        generic = monte_carlo_embedding_rate(RandomReservoirSpec{7, 30.0, 0}, j, kEmbedTrials).success_fraction;

        const CVec eigs = check_distinct_eigs(j).eigenvalues;
        int ok = 0;
        for (int t = 0; t < kEmbedTrials; ++t) {
            Rng rng(mix_seed(77, static_cast<std::uint64_t>(t)));
            Vec c(7);
            for (auto& v : c) v = rng.uniform() - 0.5;
            ok += check_independence(LinearReservoir(Mat::Identity(7, 7), c), eigs).verdict ? 1 : 0;
        }
        identity = static_cast<double>(ok) / kEmbedTrials;

        small = monte_carlo_embedding_rate(RandomReservoirSpec{2, 30.0, 0}, j, kEmbedTrials).success_fraction;
        const Mat rep = (Mat(3, 3) << -1.0, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -2.0).finished();
        repeated = monte_carlo_embedding_rate(RandomReservoirSpec{7, 30.0, 0}, rep, kEmbedTrials).success_fraction;
    });
    const bool pass = generic == 1.0 && identity == 0.0 && small == 0.0 && repeated == 0.0 && secs < kEmbedSeconds;
    report(pass, "embedding-monte-carlo",
           fmt("generic %.3f (need 1.000); A=I %.3f, N=2 %.3f, repeated eigenvalues %.3f (need 0); %.2f s (limit %.0f s)",
               generic, identity, small, repeated, secs, kEmbedSeconds));
}

void lorenz_spectrum() {
    int recovered = 0, control_failures = 0;
    std::ostringstream per_seed;
    const double secs = timed([&] {
        for (int s = 1; s <= kLorenzSeeds; ++s) {
            const LorenzResult r = compute_lorenz(LorenzParams{}, static_cast<std::uint64_t>(s), default_integrator("lorenz-reconstruct"));
            const bool ok = r.comparison.max_distance <= kLorenzDistance;
            recovered += ok ? 1 : 0;
            const EigenComparison control = untrained_comparison(r.closed_loop.reservoir);
            control_failures += control.max_distance > kLorenzDistance ? 1 : 0;
            per_seed << " " << s << ":" << fmt("%.3g", r.comparison.max_distance);
        }
    });
    const bool pass = recovered >= kLorenzRequired && control_failures == kLorenzSeeds && secs < kLorenzSeconds;
    report(pass, "lorenz-spectrum-recovery",
           fmt("%d/%d seeds within %.1f (need %d); untrained control fails on %d/%d; %.1f s (limit %.0f s); max distance per seed",
               recovered, kLorenzSeeds, kLorenzDistance, kLorenzRequired, control_failures, kLorenzSeeds, secs, kLorenzSeconds) +
               per_seed.str());
}

void clt() {
    CltReport r;
    const double secs = timed([&] { r = compute_clt(CltParams{}, 1); });
    double worst = 0.0;
    for (const auto& row : r.rows)
        if (row.d >= 100) worst = std::max(worst, std::abs(row.emp_var * row.d / r.sigma2_ref - 1.0));
    const bool pass = r.slope >= kCltSlopeLo && r.slope <= kCltSlopeHi && worst <= kCltVarTol && secs < kCltSeconds;
    report(pass, "clt-scaling",
           fmt("slope %.4f (in [%.1f, %.1f]), max |var*D/sigma^2 - 1| for D>=100 %.4f (<= %.2f), %.1f s (limit %.0f s)",
               r.slope, kCltSlopeLo, kCltSlopeHi, worst, kCltVarTol, secs, kCltSeconds));
}

void noise() {
    NoiseResult scalar, scalar_em, reservoir;
    const double secs = timed([&] {
        scalar = compute_noise(NoiseParams{}, 1);
        NoiseParams em;
        em.scheme = "euler_maruyama";
        em.dt_scale = 0.02;
        scalar_em = compute_noise(em, 1);
        NoiseParams res;
        res.model = "random";
        reservoir = compute_noise(res, 1);
    });
    const NoiseParams defaults;
    const double target = defaults.sigma0 * defaults.sigma0 / (2.0 * defaults.a);
    const double err_exact = std::abs(scalar.report.empirical(0, 0) - target) / target;
    const double err_em = std::abs(scalar_em.report.empirical(0, 0) - target) / target;
    const bool pass = err_exact <= kScalarNoiseTol && err_em <= kScalarNoiseTol &&
                      reservoir.report.rel_dist_lyapunov <= kReservoirNoiseTol &&
                      reservoir.report.effective_samples >= kNoiseEffectiveSamples && secs < kNoiseSeconds;
    report(pass, "noise-stationary-covariance",
           fmt("scalar rel. error %.4f exact / %.4f Euler-Maruyama (<= %.2f); N=7 rel. Frobenius to Lyapunov %.4f (<= %.2f) "
               "with %.3g effective samples; distance to sigma^2 A^-1 %.4f (recorded only); %.1f s (limit %.0f s)",
               err_exact, err_em, kScalarNoiseTol, reservoir.report.rel_dist_lyapunov, kReservoirNoiseTol,
               reservoir.report.effective_samples, reservoir.report.rel_dist_scaled_inverse, secs, kNoiseSeconds));
}

void determinism() {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "resv_acceptance_determinism";
    int mismatched = 0, compared = 0;
    std::string details;
    for (auto command : kCommands) {
        const std::string cmd(command);
        std::vector<RunSummary> runs;
        for (const char* tag : {"a", "b"}) {
            const fs::path dir = root / (cmd + "_" + tag);
            fs::remove_all(dir);
            runs.push_back(run_experiment(parse_config(cmd, nlohmann::json::object(), dir.string(), 2024)));
        }
        bool same = runs[0].files.size() == runs[1].files.size();
        for (std::size_t i = 0; same && i < runs[0].files.size(); ++i) {
            ++compared;
            same = runs[0].files[i].name == runs[1].files[i].name && runs[0].files[i].sha256 == runs[1].files[i].sha256;
        }
        if (!same) {
            ++mismatched;
            details += " " + cmd;
        }
    }
    fs::remove_all(root);
    report(mismatched == 0, "determinism",
           fmt("%d data files compared across %zu commands, %d commands differ", compared, kCommands.size(), mismatched) + details);
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<void()>>> checks{
        {"circle-analytic-gs", circle_gs},     {"fixed-point-gs", fixed_point_gs},
        {"pde-residual-slope", pde_slope},     {"multi-gs", multi_gs},
        {"embedding-monte-carlo", embedding},  {"lorenz-spectrum-recovery", lorenz_spectrum},
        {"clt-scaling", clt},                  {"noise-stationary-covariance", noise},
        {"determinism", determinism}};
    for (const auto& [name, check] : checks) {
        try {
            check();
        } catch (const std::exception& e) {
            report(false, name, std::string("exception: ") + e.what());
        }
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
