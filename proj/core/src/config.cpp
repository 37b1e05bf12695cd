#include "resv/config.hpp"

#include "resv/dynamics.hpp"
#include "resv/errors.hpp"
#include "resv/model_json.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace resv::experiments {

namespace {

using json = nlohmann::json;

// Reads keys from one JSON object, remembering which were consumed so that
// leftovers can be rejected.
class Reader {
public:
    Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) fail("must be a JSON object");
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(where_ + ": " + msg); }

    const json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    double number(const std::string& key, double fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_number()) fail("'" + key + "' must be a number");
        const double x = v->get<double>();
        if (!std::isfinite(x)) fail("'" + key + "' must be finite");
        return x;
    }

    double positive(const std::string& key, double fallback) {
        const double x = number(key, fallback);
        if (!(x > 0.0)) fail("'" + key + "' must be positive");
        return x;
    }

    double non_negative(const std::string& key, double fallback) {
        const double x = number(key, fallback);
        if (!(x >= 0.0)) fail("'" + key + "' must be non-negative");
        return x;
    }

    long long integer(const std::string& key, long long fallback, long long lo, long long hi) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_number_integer()) fail("'" + key + "' must be an integer");
        const auto x = v->get<long long>();
        if (x < lo || x > hi) fail("'" + key + "' out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return x;
    }

    std::string text(const std::string& key, std::string fallback, std::initializer_list<std::string_view> allowed = {}) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_string()) fail("'" + key + "' must be a string");
        auto s = v->get<std::string>();
        if (allowed.size() && std::find(allowed.begin(), allowed.end(), s) == allowed.end())
            fail("'" + key + "' has unsupported value '" + s + "'");
        return s;
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_array() || v->empty()) fail("'" + key + "' must be a non-empty array of numbers");
        std::vector<double> out;
        for (const auto& e : *v) {
            if (!e.is_number()) fail("'" + key + "' must contain only numbers");
            out.push_back(e.get<double>());
            if (!std::isfinite(out.back())) fail("'" + key + "' must contain finite numbers");
        }
        return out;
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) fail("unknown key '" + it.key() + "'");
    }

private:
    const json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

MultiGsParams parse_multi_gs(Reader& r) {
    MultiGsParams p;
    p.lambda = r.number("lambda", p.lambda);
    p.t_end = r.positive("t_end", p.t_end);
    p.washout = r.non_negative("washout", p.washout);
    p.output_dt = r.positive("output_dt", p.output_dt);
    p.field_grid = static_cast<int>(r.integer("field_grid", p.field_grid, 2, 1001));
    p.field_extent = r.positive("field_extent", p.field_extent);
    p.pair_offset = r.positive("pair_offset", p.pair_offset);
    if (p.washout >= p.t_end) r.fail("'washout' must be smaller than 't_end'");
    if (p.pair_offset >= 0.5) r.fail("'pair_offset' must be below 0.5 to stay inside a region");
    return p;
}

GsCheckParams parse_gs_check(Reader& r) {
    GsCheckParams p;
    p.a = r.positive("a", p.a);
    const auto anchor = r.numbers("anchor", {p.anchor[0], p.anchor[1]});
    if (anchor.size() != 2) r.fail("'anchor' must have two entries");
    p.anchor = to_vec(anchor);
    p.horizon = r.positive("horizon", p.horizon);
    p.step = r.positive("step", p.step);
    p.points = static_cast<int>(r.integer("points", p.points, 1, 100000));
    p.point_spacing = r.positive("point_spacing", p.point_spacing);
    p.washout = r.non_negative("washout", p.washout);
    p.deltas = r.numbers("deltas", p.deltas);
    if (p.deltas.size() < 2) r.fail("'deltas' needs at least two entries");
    for (double d : p.deltas)
        if (!(d > 0.0)) r.fail("'deltas' must be positive");
    p.pde_rtol = r.positive("pde_rtol", p.pde_rtol);
    p.pde_atol = r.positive("pde_atol", p.pde_atol);
    if (p.step > p.horizon) r.fail("'step' exceeds 'horizon'");
    return p;
}

EmbedCheckParams parse_embed_check(Reader& r) {
    EmbedCheckParams p;
    p.n = static_cast<int>(r.integer("n", p.n, 1, 10000));
    p.scale = r.positive("scale", p.scale);
    p.trials = static_cast<int>(r.integer("trials", p.trials, 1, 100'000'000));
    p.rank_tol = r.positive("rank_tol", p.rank_tol);
    if (const json* j = r.find("jacobian")) {
        if (j->is_string()) {
            if (j->get<std::string>() != "lorenz_m_star") r.fail("'jacobian' must be \"lorenz_m_star\" or a square matrix");
        } else {
            if (!j->is_array() || j->empty()) r.fail("'jacobian' must be a non-empty array of rows");
            const auto q = static_cast<Eigen::Index>(j->size());
            p.jacobian.resize(q, q);
            for (Eigen::Index i = 0; i < q; ++i) {
                const auto& row = (*j)[static_cast<std::size_t>(i)];
                if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != q) r.fail("'jacobian' must be square");
                for (Eigen::Index k = 0; k < q; ++k) {
                    if (!row[static_cast<std::size_t>(k)].is_number()) r.fail("'jacobian' entries must be numbers");
                    p.jacobian(i, k) = row[static_cast<std::size_t>(k)].get<double>();
                }
            }
        }
    }
    if (p.jacobian.size() == 0) {
        const SourceSystem lorenz = lorenz63();
        p.jacobian = jacobian(lorenz, lorenz.fixed_point("m_star"));
    }
    return p;
}

LorenzParams parse_lorenz(Reader& r) {
    LorenzParams p;
    p.n = static_cast<int>(r.integer("n", p.n, 1, 10000));
    p.d = static_cast<int>(r.integer("d", p.d, 1, 1'000'000));
    p.scale = r.positive("scale", p.scale);
    p.t_end = r.positive("t_end", p.t_end);
    p.sample_dt = r.positive("sample_dt", p.sample_dt);
    p.train_start = r.non_negative("train_start", p.train_start);
    p.damp = r.non_negative("damp", p.damp);
    p.perturbation = r.number("perturbation", p.perturbation);
    p.closed_loop_horizon = r.positive("closed_loop_horizon", p.closed_loop_horizon);
    if (p.train_start >= p.t_end) r.fail("'train_start' must be smaller than 't_end'");
    if (p.sample_dt > p.t_end - p.train_start) r.fail("'sample_dt' leaves no training samples");
    return p;
}

CltParams parse_clt(Reader& r) {
    CltParams p;
    p.x = to_vec(r.numbers("x", {p.x.data(), p.x.data() + p.x.size()}));
    if (const json* v = r.find("d_list")) {
        if (!v->is_array() || v->size() < 2) r.fail("'d_list' must be an array of at least two integers");
        p.d_list.clear();
        for (const auto& e : *v) {
            if (!e.is_number_integer() || e.get<long long>() < 1) r.fail("'d_list' entries must be positive integers");
            p.d_list.push_back(static_cast<int>(e.get<long long>()));
        }
    }
    p.trials = static_cast<int>(r.integer("trials", p.trials, 2, 100'000'000));
    p.reference_samples = static_cast<std::size_t>(
        r.integer("reference_samples", static_cast<long long>(p.reference_samples), 2, 1'000'000'000'000LL));
    p.weight = r.text("weight", p.weight, {"one", "zero"});
    return p;
}

NoiseParams parse_noise(Reader& r) {
    NoiseParams p;
    p.model = r.text("model", p.model, {"scalar", "random"});
    p.a = r.positive("a", p.a);
    p.n = static_cast<int>(r.integer("n", p.n, 1, 10000));
    p.scale = r.positive("scale", p.scale);
    p.sigma0 = r.non_negative("sigma0", p.sigma0);
    p.scheme = r.text("scheme", p.scheme, {"exact", "euler_maruyama"});
    p.dt_scale = r.positive("dt_scale", p.dt_scale);
    if (p.scheme == "euler_maruyama" && p.dt_scale >= 0.5)
        r.fail("'dt_scale' must be below 0.5 for euler_maruyama");
    p.effective_samples = r.positive("effective_samples", p.effective_samples);
    p.chains = static_cast<int>(r.integer("chains", p.chains, 1, 4096));
    p.burn_in = r.non_negative("burn_in", p.burn_in);
    return p;
}

}  // namespace

IntegratorConfig default_integrator(std::string_view command) {
    IntegratorConfig cfg;
    if (command == "lorenz-reconstruct") cfg.atol = 1e-6;
    return cfg;
}

ExperimentConfig parse_config(std::string_view command, const nlohmann::json& doc,
                              const std::optional<std::string>& out_override,
                              const std::optional<std::uint64_t>& seed_override) {
    if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
        throw ConfigError("unknown command '" + std::string(command) + "'");

    Reader top(doc, "config");
    ExperimentConfig cfg;
    cfg.experiment = std::string(command);
    const std::string named = top.text("experiment", cfg.experiment);
    if (named != command)
        top.fail("'experiment' is '" + named + "' but the command is '" + std::string(command) + "'");

    if (const json* s = top.find("seed")) {
        if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0))
            top.fail("'seed' must be a non-negative integer");
        cfg.seed = s->get<std::uint64_t>();
    }
    cfg.output_dir = top.text("output_dir", cfg.output_dir);

    cfg.integrator = default_integrator(command);
    if (const json* integ = top.find("integrator")) {
        Reader r(*integ, "integrator");
        cfg.integrator.rtol = r.positive("rtol", cfg.integrator.rtol);
        cfg.integrator.atol = r.positive("atol", cfg.integrator.atol);
        if (const json* ms = r.find("max_step")) {
            if (!ms->is_number() || !(ms->get<double>() > 0.0)) r.fail("'max_step' must be a positive number");
            cfg.integrator.max_step = ms->get<double>();
        }
        cfg.integrator.divergence_norm = r.positive("divergence_norm", cfg.integrator.divergence_norm);
        r.finish();
    }

    const json empty = json::object();
    const json* params = top.find("params");
    Reader r(params ? *params : empty, "params");
    if (command == "multi-gs") cfg.params = parse_multi_gs(r);
    else if (command == "gs-check") cfg.params = parse_gs_check(r);
    else if (command == "embed-check") cfg.params = parse_embed_check(r);
    else if (command == "lorenz-reconstruct") cfg.params = parse_lorenz(r);
    else if (command == "clt") cfg.params = parse_clt(r);
    else cfg.params = parse_noise(r);
    r.finish();
    top.finish();

    if (out_override) cfg.output_dir = *out_override;
    if (seed_override) cfg.seed = *seed_override;
    return cfg;
}

ExperimentConfig load_config(std::string_view command, const std::filesystem::path& path,
                             const std::optional<std::string>& out_override,
                             const std::optional<std::uint64_t>& seed_override) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_config(command, doc, out_override, seed_override);
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
    using oj = nlohmann::ordered_json;
    oj j;
    j["experiment"] = cfg.experiment;
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    oj integ;
    integ["rtol"] = cfg.integrator.rtol;
    integ["atol"] = cfg.integrator.atol;
    if (std::isfinite(cfg.integrator.max_step)) integ["max_step"] = cfg.integrator.max_step;
    integ["divergence_norm"] = cfg.integrator.divergence_norm;
    j["integrator"] = integ;

    oj p;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, MultiGsParams>) {
                p = {{"lambda", v.lambda}, {"t_end", v.t_end}, {"washout", v.washout},
                     {"output_dt", v.output_dt}, {"field_grid", v.field_grid},
                     {"field_extent", v.field_extent}, {"pair_offset", v.pair_offset}};
            } else if constexpr (std::is_same_v<T, GsCheckParams>) {
                p = {{"a", v.a}, {"anchor", {v.anchor[0], v.anchor[1]}}, {"horizon", v.horizon},
                     {"step", v.step}, {"points", v.points}, {"point_spacing", v.point_spacing},
                     {"washout", v.washout}, {"deltas", v.deltas}, {"pde_rtol", v.pde_rtol},
                     {"pde_atol", v.pde_atol}};
            } else if constexpr (std::is_same_v<T, EmbedCheckParams>) {
                oj rows = oj::array();
                for (Eigen::Index i = 0; i < v.jacobian.rows(); ++i) {
                    oj row = oj::array();
                    for (Eigen::Index k = 0; k < v.jacobian.cols(); ++k) row.push_back(v.jacobian(i, k));
                    rows.push_back(row);
                }
                p = {{"n", v.n}, {"scale", v.scale}, {"trials", v.trials}, {"jacobian", rows},
                     {"rank_tol", v.rank_tol}};
            } else if constexpr (std::is_same_v<T, LorenzParams>) {
                p = {{"n", v.n}, {"d", v.d}, {"scale", v.scale}, {"t_end", v.t_end},
                     {"sample_dt", v.sample_dt}, {"train_start", v.train_start}, {"damp", v.damp},
                     {"perturbation", v.perturbation}, {"closed_loop_horizon", v.closed_loop_horizon}};
            } else if constexpr (std::is_same_v<T, CltParams>) {
                p = {{"x", std::vector<double>(v.x.data(), v.x.data() + v.x.size())},
                     {"d_list", v.d_list}, {"trials", v.trials},
                     {"reference_samples", v.reference_samples}, {"weight", v.weight}};
            } else {
                p = {{"model", v.model}, {"a", v.a}, {"n", v.n}, {"scale", v.scale},
                     {"sigma0", v.sigma0}, {"scheme", v.scheme}, {"dt_scale", v.dt_scale},
                     {"effective_samples", v.effective_samples}, {"chains", v.chains},
                     {"burn_in", v.burn_in}};
            }
        },
        cfg.params);
    j["params"] = p;
    return j;
}

} // namespace resv::experiments
