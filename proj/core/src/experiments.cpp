#include "resv/experiments.hpp"

#include "resv/errors.hpp"
#include "resv/io.hpp"
#include "resv/linalg.hpp"
#include "resv/model_json.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#ifndef RESV_VERSION
#define RESV_VERSION "0.0.0"
#endif

namespace resv::experiments {

namespace {

using ojson = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ojson complex_pair(const Complex& z) { return ojson::array({z.real(), z.imag()}); }

}  // namespace

// ---------------------------------------------------------------------------

MultiGsResult compute_multi_gs(const MultiGsParams& p, const IntegratorConfig& cfg) {
    const SourceSystem src = circle();
    const Vec anchor = (Vec(2) << 0.0, 1.0).finished();
    const Observation omega = observe_component(0);
    const ReservoirModel model = SinusoidReservoir{p.lambda};
    const DrivenSignal signal{src, omega, 1, anchor, 0.0};

    MultiGsResult r;
    const Trajectory orbit = integrate(src, anchor, 0.0, p.t_end, cfg);
    r.observation_times = uniform_grid(0.0, p.t_end, p.output_dt);
    for (double t : r.observation_times) r.observations.push_back(omega(orbit.at(t))[0]);

    r.grid = uniform_grid(p.washout, p.t_end, p.output_dt);
    r.seeds = {(Vec(2) << 0.5, 0.5).finished(), (Vec(2) << -0.5, 0.5).finished(),
               (Vec(2) << 0.5, -0.5).finished(), (Vec(2) << -0.5, -0.5).finished()};
    for (std::size_t i = 0; i < 4; ++i) {
        const Trajectory x = drive(model, signal, r.seeds[i], 0.0, p.t_end, cfg);
        r.trajectories[i] = x.sample(r.grid);

        const Vec shift = (Vec(2) << -p.pair_offset, p.pair_offset).finished();
        const Trajectory a = drive(model, signal, r.seeds[i] + shift, 0.0, p.washout, cfg);
        const Trajectory b = drive(model, signal, r.seeds[i] - shift, 0.0, p.washout, cfg);
        r.within_region_distance[i] = (a.back() - b.back()).norm();
    }

    r.pairwise_min = Mat::Constant(4, 4, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i + 1; j < 4; ++j) {
            double m = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < r.grid.size(); ++k)
                m = std::min(m, (r.trajectories[i][k] - r.trajectories[j][k]).norm());
            r.pairwise_min(i, j) = r.pairwise_min(j, i) = m;
        }
    }
    r.min_pairwise_distance = r.pairwise_min.minCoeff();

    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (int i = 0; i < p.field_grid; ++i) {
        const double x = -p.field_extent + 2.0 * p.field_extent * i / (p.field_grid - 1);
        for (int j = 0; j < p.field_grid; ++j) {
            const double y = -p.field_extent + 2.0 * p.field_extent * j / (p.field_grid - 1);
            r.field.push_back({x, y, std::sin(two_pi * x), std::sin(two_pi * y)});
        }
    }
    return r;
}

// ---------------------------------------------------------------------------

double circle_gs_closed_form(double a, const Vec& m) { return (a * m[0] + m[1]) / (a * a + 1.0); }

GsCheckResult compute_gs_check(const GsCheckParams& p, const IntegratorConfig& cfg) {
    const SourceSystem src = circle();
    const Observation omega = observe_component(0);
    const LinearReservoir res(Mat::Constant(1, 1, p.a), Mat::Constant(1, 1, 1.0));
    const ReservoirModel model = res;

    WashoutOptions wo;
    wo.washout = p.washout;
    wo.horizon = p.washout + (p.points - 1) * p.point_spacing;
    wo.sample_dt = p.point_spacing;
    if (p.points == 1) wo.horizon = p.washout + p.point_spacing;
    std::vector<GSSample> washed = gs_washout(model, src, omega, 1, p.anchor, wo, cfg);
    washed.resize(static_cast<std::size_t>(p.points));

    GsCheckResult r;
    const auto start = Clock::now();
    for (const auto& w : washed) {
        GsCheckRow row;
        row.integral = gs_integral(res, src, omega, w.point, p.horizon, p.step, cfg);
        row.integral.t = w.t;
        row.washout = w;
        row.analytic = circle_gs_closed_form(p.a, w.point);
        r.rows.push_back(std::move(row));
    }
    r.integral_seconds = seconds_since(start);

    r.max_cross_excess = -std::numeric_limits<double>::infinity();
    for (const auto& row : r.rows) {
        r.max_integral_error = std::max(r.max_integral_error, std::abs(row.integral.value[0] - row.analytic));
        const double gap = std::abs(row.integral.value[0] - row.washout.value[0]);
        r.max_cross_excess = std::max(r.max_cross_excess, gap - row.integral.error_bound - row.washout.error_bound);
    }

    IntegratorConfig tight = cfg;
    tight.rtol = p.pde_rtol;
    tight.atol = p.pde_atol;
    const GSMap exact = [a = p.a](const Vec& m) { return Vec::Constant(1, circle_gs_closed_form(a, m)); };
    const GSMap shifted = [a = p.a](const Vec& m) { return Vec::Constant(1, circle_gs_closed_form(a, m) + 0.1); };
    std::vector<double> deltas, residuals;
    for (double delta : p.deltas) {
        PdeRow row;
        row.delta = delta;
        row.residual = pde_residual(exact, src, model, omega, p.anchor, delta, tight);
        row.perturbed_residual = pde_residual(shifted, src, model, omega, p.anchor, delta, tight);
        r.pde.push_back(row);
        deltas.push_back(delta);
        residuals.push_back(row.residual);
    }
    r.pde_slope = loglog_slope(deltas, residuals);
    return r;
}

// ---------------------------------------------------------------------------

EmbeddingSweep compute_embed_check(const EmbedCheckParams& p, std::uint64_t seed) {
    RandomReservoirSpec spec{p.n, p.scale, seed};
    return monte_carlo_embedding_rate(spec, p.jacobian, p.trials, 0, p.rank_tol);
}

// ---------------------------------------------------------------------------

Mat principal_components(const Mat& rows, int count) {
    const Vec mean = rows.colwise().mean();
    const Mat centred = rows.rowwise() - mean.transpose();
    Eigen::BDCSVD<Mat> svd(centred, Eigen::ComputeThinV);
    Mat v = svd.matrixV().leftCols(std::min<Eigen::Index>(count, svd.matrixV().cols()));
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
        Eigen::Index idx = 0;
        v.col(k).cwiseAbs().maxCoeff(&idx);
        if (v(idx, k) < 0.0) v.col(k) = -v.col(k);
    }
    return centred * v;
}

EigenComparison untrained_comparison(const LinearReservoir& res) {
    const SourceSystem lorenz = lorenz63();
    return eig_compare(-res.A(), jacobian(lorenz, lorenz.fixed_point("m_star")));
}

LorenzResult compute_lorenz(const LorenzParams& p, std::uint64_t seed, const IntegratorConfig& cfg) {
    const SourceSystem lorenz = lorenz63();
    const Vec m_star = lorenz.fixed_point("m_star");
    LinearReservoir res = generate_reservoir(RandomReservoirSpec{p.n, p.scale, seed});
    Rng feature_rng(mix_seed(seed, 1));
    FeatureBank bank = sample_features(p.d, p.n, feature_rng);

    LorenzResult r{ClosedLoopSystem{res, std::move(bank), {}}, {}, {}, {}, {}, {}, {}, {}, {}, 0, 0.0, 0.0, false, false};
    r.x_star = gs_fixed_point(res, Vec::Constant(1, m_star[0]));

    Vec m0 = m_star;
    m0[0] += p.perturbation;
    const DrivenSignal signal{lorenz, observe_component(0), 1, m0, 0.0};
    const DriveResult run = drive_coupled(res, signal, r.x_star, 0.0, p.t_end, cfg);
    r.source = run.source;

    r.sample_times = uniform_grid(0.0, p.t_end, p.sample_dt);
    const auto ns = static_cast<Eigen::Index>(r.sample_times.size());
    r.sampled_source.resize(ns, 3);
    r.sampled_reservoir.resize(ns, p.n);
    for (Eigen::Index k = 0; k < ns; ++k) {
        const double t = r.sample_times[static_cast<std::size_t>(k)];
        r.sampled_source.row(k) = run.source.at(t).transpose();
        r.sampled_reservoir.row(k) = run.reservoir.at(t).transpose();
    }

    Eigen::Index first = 0;
    while (first < ns && r.sample_times[static_cast<std::size_t>(first)] < p.train_start) ++first;
    const Mat train_x = r.sampled_reservoir.bottomRows(ns - first);
    const Vec train_y = r.sampled_source.col(0).tail(ns - first);
    r.training_samples = static_cast<std::size_t>(train_x.rows());
    r.closed_loop.weights = fit_readout(r.closed_loop.bank, train_x, train_y, p.damp);

    r.closed_jacobian = closed_loop_jacobian(r.closed_loop, r.x_star);
    r.comparison = eig_compare(r.closed_jacobian, jacobian(lorenz, m_star));
    r.pca = principal_components(r.sampled_reservoir, 3);

    r.training_max_norm = train_x.rowwise().norm().maxCoeff();
    try {
        const Trajectory free = closed_loop_integrate(r.closed_loop, train_x.row(train_x.rows() - 1).transpose(),
                                                      0.0, p.closed_loop_horizon, cfg);
        for (const auto& x : free.states()) r.closed_loop_max_norm = std::max(r.closed_loop_max_norm, x.norm());
    } catch (const DivergenceError&) {
        r.closed_loop_diverged = true;
        r.closed_loop_max_norm = std::numeric_limits<double>::infinity();
    }
    r.closed_loop_bounded = !r.closed_loop_diverged && r.closed_loop_max_norm <= 10.0 * r.training_max_norm;
    return r;
}

// ---------------------------------------------------------------------------

CltReport compute_clt(const CltParams& p, std::uint64_t seed) {
    CltProblem problem = tanh_clt_problem(static_cast<int>(p.x.size()));
    if (p.weight == "zero") problem.weight = [](const Vec&) { return 0.0; };
    CltOptions opts;
    opts.x = p.x;
    opts.d_list = p.d_list;
    opts.trials = p.trials;
    opts.seed = seed;
    opts.reference_samples = p.reference_samples;
    return clt_experiment(problem, opts);
}

NoiseResult compute_noise(const NoiseParams& p, std::uint64_t seed) {
    NoiseResult r;
    if (p.model == "scalar") {
        r.a = Mat::Constant(1, 1, p.a);
        r.c = Mat::Constant(1, 1, 1.0);
    } else {
        const LinearReservoir res = generate_reservoir(RandomReservoirSpec{p.n, p.scale, seed});
        r.a = res.A();
        r.c = res.C();
    }
    const SpectralDecomposition sd(r.a);
    const bool exact = p.scheme == "exact";
    r.dt = p.dt_scale / (exact ? sd.sigma_min() : sd.sigma_max());
    r.duration_per_chain = 2.0 * p.effective_samples / (sd.sigma_min() * p.chains);

    StreamingCovarianceOptions opts;
    opts.scheme = exact ? OuScheme::exact : OuScheme::euler_maruyama;
    opts.dt = r.dt;
    opts.burn_in = p.burn_in;
    opts.duration = r.duration_per_chain;
    opts.chains = p.chains;
    opts.seed = mix_seed(seed, 2);
    r.report = simulate_stationary_covariance(r.a, r.c, p.sigma0, opts);
    return r;
}

// ---------------------------------------------------------------------------

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return hex.str();
}

namespace {

using FileList = std::vector<std::pair<std::string, std::string>>;

std::string csv_text(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    std::ostringstream s;
    io::write_csv(s, header, rows);
    return s.str();
}

template <class F>
std::string render(F&& f) {
    std::ostringstream s;
    f(s);
    return s.str();
}

ojson multi_gs_outputs(const MultiGsParams& p, const IntegratorConfig& cfg, FileList& files) {
    const MultiGsResult r = compute_multi_gs(p, cfg);
    std::vector<std::vector<double>> obs;
    for (std::size_t k = 0; k < r.observation_times.size(); ++k)
        obs.push_back({r.observation_times[k], r.observations[k], r.observation_times[k] < p.washout ? 1.0 : 0.0});
    files.emplace_back("observations.csv", csv_text({"t", "omega", "washout"}, obs));
    ojson seeds = ojson::array();
    for (std::size_t i = 0; i < 4; ++i) {
        std::vector<std::vector<double>> rows;
        for (std::size_t k = 0; k < r.grid.size(); ++k)
            rows.push_back({r.grid[k], r.trajectories[i][k][0], r.trajectories[i][k][1]});
        const std::string name = "trajectory_" + std::to_string(i) + ".csv";
        files.emplace_back(name, csv_text({"t", "x0", "x1"}, rows));
        seeds.push_back({{"file", name}, {"initial", {r.seeds[i][0], r.seeds[i][1]}},
                         {"final", {r.trajectories[i].back()[0], r.trajectories[i].back()[1]}},
                         {"within_region_distance_at_washout", r.within_region_distance[i]}});
    }
    std::vector<std::vector<double>> field;
    for (const auto& f : r.field) field.push_back({f[0], f[1], f[2], f[3]});
    files.emplace_back("vector_field.csv", csv_text({"x", "y", "fx", "fy"}, field));

    ojson pairs = ojson::array();
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) pairs.push_back({{"i", i}, {"j", j}, {"min_distance", r.pairwise_min(i, j)}});
    return {{"washout", p.washout},
            {"min_pairwise_distance", r.min_pairwise_distance},
            {"pairs", pairs},
            {"seeds", seeds},
            {"max_within_region_distance_at_washout",
             *std::max_element(r.within_region_distance.begin(), r.within_region_distance.end())}};
}

ojson gs_check_outputs(const GsCheckParams& p, const IntegratorConfig& cfg, FileList& files,
                       ojson& timing) {
    const GsCheckResult r = compute_gs_check(p, cfg);
    timing["gs_integral_seconds"] = r.integral_seconds;
    std::vector<std::vector<double>> rows;
    std::vector<GSSample> samples;
    for (const auto& row : r.rows) {
        rows.push_back({row.washout.t, row.washout.point[0], row.washout.point[1], row.integral.value[0],
                        row.analytic, row.washout.value[0], row.integral.error_bound, row.washout.error_bound});
        samples.push_back(row.integral);
        samples.push_back(row.washout);
    }
    files.emplace_back("gs_compare.csv",
                       csv_text({"t", "m_0", "m_1", "f_integral", "f_analytic", "f_washout", "bound_integral",
                                 "bound_washout"},
                                rows));
    files.emplace_back("gs_samples.csv", render([&](std::ostream& s) { write_gs_samples_csv(s, samples); }));
    std::vector<std::vector<double>> pde;
    for (const auto& row : r.pde) pde.push_back({row.delta, row.residual, row.perturbed_residual});
    files.emplace_back("pde_residual.csv", csv_text({"delta", "residual", "perturbed_residual"}, pde));
    return {{"points", r.rows.size()},
            {"max_integral_error", r.max_integral_error},
            {"max_cross_excess", r.max_cross_excess},
            {"pde_slope", r.pde_slope}};
}

ojson embed_outputs(const EmbedCheckParams& p, std::uint64_t seed, FileList& files) {
    const EmbeddingSweep sweep = compute_embed_check(p, seed);
    files.emplace_back("sweep.csv", render([&](std::ostream& s) { write_sweep_csv(s, sweep); }));
    files.emplace_back("report.json", embedding_report_json(sweep.trials.front()) + "\n");
    return {{"trials", sweep.trials.size()},
            {"success_fraction", sweep.success_fraction},
            {"min_smallest_singular_value", sweep.min_smallest_singular_value}};
}

ojson lorenz_outputs(const LorenzParams& p, std::uint64_t seed, const IntegratorConfig& cfg, FileList& files) {
    const LorenzResult r = compute_lorenz(p, seed, cfg);
    std::vector<std::vector<double>> obs, pca;
    for (std::size_t k = 0; k < r.sample_times.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        obs.push_back({r.sample_times[k], r.sampled_source(i, 0)});
        pca.push_back({r.sample_times[k], r.pca(i, 0), r.pca(i, 1), r.pca(i, 2)});
    }
    files.emplace_back("observations.csv", csv_text({"t", "xi"}, obs));
    files.emplace_back("source.csv", render([&](std::ostream& s) { io::write_trajectory_csv(s, r.source); }));
    files.emplace_back("reservoir_pca.csv", csv_text({"t", "pc1", "pc2", "pc3"}, pca));
    files.emplace_back("eigs.csv", render([&](std::ostream& s) { write_eig_compare_csv(s, r.comparison); }));
    std::vector<std::vector<double>> closed;
    for (Eigen::Index i = 0; i < r.comparison.closed_eigenvalues.size(); ++i)
        closed.push_back({r.comparison.closed_eigenvalues[i].real(), r.comparison.closed_eigenvalues[i].imag()});
    files.emplace_back("closed_loop_eigs.csv", csv_text({"re", "im"}, closed));
    files.emplace_back("model.json", closed_loop_to_json(r.closed_loop).dump(2) + "\n");

    ojson matches = ojson::array();
    for (const auto& m : r.comparison.matches)
        matches.push_back({{"source", complex_pair(m.source)}, {"matched", complex_pair(m.matched)}, {"distance", m.distance}});
    return {{"training_samples", r.training_samples},
            {"training_residual", r.closed_loop.weights.residual},
            {"x_star", std::vector<double>(r.x_star.data(), r.x_star.data() + r.x_star.size())},
            {"matches", matches},
            {"max_matched_distance", r.comparison.max_distance},
            {"closed_loop_bounded", r.closed_loop_bounded},
            {"closed_loop_diverged", r.closed_loop_diverged},
            {"closed_loop_max_norm", r.closed_loop_diverged ? ojson(nullptr) : ojson(r.closed_loop_max_norm)},
            {"training_max_norm", r.training_max_norm}};
}

ojson clt_outputs(const CltParams& p, std::uint64_t seed, FileList& files) {
    const CltReport r = compute_clt(p, seed);
    files.emplace_back("clt.csv", render([&](std::ostream& s) { write_clt_csv(s, r); }));
    ojson rows = ojson::array();
    for (const auto& row : r.rows)
        rows.push_back({{"D", row.d}, {"emp_var", row.emp_var}, {"emp_mean", row.emp_mean},
                        {"var_times_D_over_sigma2", r.sigma2_ref > 0 ? row.emp_var * row.d / r.sigma2_ref : 0.0}});
    return {{"u_ref", r.u_ref}, {"sigma2_ref", r.sigma2_ref},
            {"slope", std::isfinite(r.slope) ? ojson(r.slope) : ojson(nullptr)}, {"rows", rows}};
}

ojson noise_outputs(const NoiseParams& p, std::uint64_t seed, FileList& files) {
    const NoiseResult r = compute_noise(p, seed);
    files.emplace_back("covariance.json", covariance_report_json(r.report) + "\n");
    return {{"model", p.model},
            {"scheme", p.scheme},
            {"dt", r.dt},
            {"duration_per_chain", r.duration_per_chain},
            {"effective_samples", r.report.effective_samples},
            {"rel_dist_lyapunov", r.report.rel_dist_lyapunov},
            {"rel_dist_scaled_inverse", r.report.rel_dist_scaled_inverse},
            {"insufficient_samples", r.report.insufficient_samples}};
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg) {
    const auto start = Clock::now();
    FileList files;
    ojson timing = ojson::object();
    ojson summary = std::visit(
        [&](const auto& p) -> ojson {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, MultiGsParams>) return multi_gs_outputs(p, cfg.integrator, files);
            else if constexpr (std::is_same_v<T, GsCheckParams>) return gs_check_outputs(p, cfg.integrator, files, timing);
            else if constexpr (std::is_same_v<T, EmbedCheckParams>) return embed_outputs(p, cfg.seed, files);
            else if constexpr (std::is_same_v<T, LorenzParams>) return lorenz_outputs(p, cfg.seed, cfg.integrator, files);
            else if constexpr (std::is_same_v<T, CltParams>) return clt_outputs(p, cfg.seed, files);
            else return noise_outputs(p, cfg.seed, files);
        },
        cfg.params);
    summary = ojson{{"experiment", cfg.experiment}, {"seed", cfg.seed}, {"results", summary}};
    files.emplace_back("summary.json", summary.dump(2) + "\n");

    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    RunSummary out;
    out.summary = summary;
    for (const auto& [name, content] : files) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
        f << content;
        out.files.push_back({name, sha256_hex(content), content.size()});
    }

    ojson listed = ojson::array();
    for (const auto& f : out.files) listed.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    timing["wall_clock_seconds"] = seconds_since(start);
    const ojson manifest{{"version", RESV_VERSION}, {"config", config_to_json(cfg)}, {"files", listed}, {"timing", timing}};
    std::ofstream m(dir / "manifest.json", std::ios::binary);
    if (!m) throw std::runtime_error("cannot write manifest");
    m << manifest.dump(2) << "\n";
    return out;
}

} // namespace resv::experiments
