#include "resv/errors.hpp"
#include "resv/experiments.hpp"
#include "resv/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace resv;
using namespace resv::experiments;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("resv_test_" + name);
    fs::remove_all(p);
    return p;
}

// Small configs that keep every command fast.
json quick(const std::string& cmd) {
    if (cmd == "multi-gs") return {{"params", {{"t_end", 40.0}, {"field_grid", 5}}}};
    if (cmd == "gs-check") return {{"params", {{"points", 3}}}};
    if (cmd == "embed-check") return {{"params", {{"trials", 20}}}};
    if (cmd == "lorenz-reconstruct") return {{"params", {{"t_end", 20.0}, {"d", 30}, {"closed_loop_horizon", 5.0}}}};
    if (cmd == "clt") return {{"params", {{"d_list", {10, 30}}, {"trials", 50}, {"reference_samples", 1000}}}};
    return {{"params", {{"effective_samples", 2e4}}}};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("sha256 of known strings") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("circle closed form solves the linear GS equation") {
    // d/dt f(phi^t m) = -a f + u along u' = -v, v' = u
    const double a = 1.7;
    const Vec m = (Vec(2) << 0.3, -0.8).finished();
    const Vec dm = (Vec(2) << -m[1], m[0]).finished();
    const double lie = (a * dm[0] + dm[1]) / (a * a + 1.0);
    CHECK(lie == doctest::Approx(-a * circle_gs_closed_form(a, m) + m[0]));
}

TEST_CASE("principal components are centred and sign fixed") {
    Mat rows(4, 2);
    rows << 1, 1, 2, 2, 3, 3, 4, 4.5;
    const Mat pc = principal_components(rows, 1);
    CHECK(std::abs(pc.col(0).sum()) < 1e-12);
    CHECK(pc(3, 0) > 0.0);
}

TEST_CASE("every command writes its files and a manifest listing their hashes") {
    const std::map<std::string, std::vector<std::string>> expected{
        {"multi-gs", {"observations.csv", "trajectory_0.csv", "trajectory_3.csv", "vector_field.csv"}},
        {"gs-check", {"gs_compare.csv", "gs_samples.csv", "pde_residual.csv"}},
        {"embed-check", {"sweep.csv", "report.json"}},
        {"lorenz-reconstruct", {"observations.csv", "source.csv", "reservoir_pca.csv", "eigs.csv", "closed_loop_eigs.csv", "model.json"}},
        {"clt", {"clt.csv"}},
        {"noise", {"covariance.json"}}};
    for (const auto& [cmd, names] : expected) {
        CAPTURE(cmd);
        const fs::path dir = scratch(cmd);
        const ExperimentConfig cfg = parse_config(cmd, quick(cmd), dir.string(), 5);
        const RunSummary run = run_experiment(cfg);
        for (const auto& n : names) CHECK(fs::exists(dir / n));
        const json manifest = json::parse(slurp(dir / "manifest.json"));
        CHECK(manifest["files"].size() == run.files.size());
        CHECK(manifest.contains("version"));
        CHECK(manifest["timing"].contains("wall_clock_seconds"));
        for (const auto& f : manifest["files"]) CHECK(sha256_hex(slurp(dir / f["name"].get<std::string>())) == f["sha256"]);
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() != ".csv" || entry.path().filename() == "gs_samples.csv") continue;
            std::ifstream in(entry.path());
            CHECK_NOTHROW(io::read_csv(in));
        }
    }
}

TEST_CASE("gs sample export keeps full precision") {
    const fs::path dir = scratch("gs_samples");
    (void)run_experiment(parse_config("gs-check", quick("gs-check"), dir.string(), 1));
    std::ifstream in(dir / "gs_samples.csv");
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "t,m_0,m_1,f_0,err_bound,method");
    int rows = 0;
    while (std::getline(in, line)) {
        std::istringstream fields(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(fields, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 6);
        CHECK((cells[5] == "integral" || cells[5] == "washout"));
        const double v = std::stod(cells[3]);
        CHECK(io::format_double(v) == cells[3]);
        ++rows;
    }
    CHECK(rows == 6);
}

TEST_CASE("reruns are byte identical") {
    for (const std::string cmd : {"multi-gs", "lorenz-reconstruct", "clt", "noise"}) {
        CAPTURE(cmd);
        const auto a = run_experiment(parse_config(cmd, quick(cmd), scratch(cmd + "_a").string(), 11));
        const auto b = run_experiment(parse_config(cmd, quick(cmd), scratch(cmd + "_b").string(), 11));
        REQUIRE(a.files.size() == b.files.size());
        for (std::size_t i = 0; i < a.files.size(); ++i) CHECK(a.files[i].sha256 == b.files[i].sha256);
    }
}

TEST_CASE("lambda zero leaves the half-integer equilibria fixed") {
    MultiGsParams p;
    p.lambda = 0.0;
    p.t_end = 40.0;
    const auto r = compute_multi_gs(p, {});
    for (std::size_t i = 0; i < 4; ++i) CHECK((r.trajectories[i].back() - r.seeds[i]).norm() < 1e-9);

    // nearby starts relax onto the same equilibria
    const DrivenSignal sig{circle(), observe_component(0), 1, (Vec(2) << 0.0, 1.0).finished(), 0.0};
    const Trajectory x = drive(SinusoidReservoir{0.0}, sig, (Vec(2) << 0.3, -0.8).finished(), 0.0, 10.0);
    CHECK(x.back()[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(x.back()[1] == doctest::Approx(-0.5).epsilon(1e-9));
}

TEST_CASE("noise run with sigma0 zero has zero covariance") {
    NoiseParams p;
    p.sigma0 = 0.0;
    p.effective_samples = 1e4;
    const NoiseResult r = compute_noise(p, 1);
    CHECK(r.report.empirical.norm() == 0.0);
}

#ifdef RESV_SYNC_BIN
namespace {

int run_cli(const std::string& args) {
    const int status = std::system((std::string(RESV_SYNC_BIN) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const json& doc) {
    const fs::path p = fs::temp_directory_path() / ("resv_cli_" + name + ".json");
    std::ofstream(p) << doc.dump();
    return p;
}

}  // namespace

TEST_CASE("cli exit codes") {
    const fs::path out = scratch("cli");
    const fs::path good = write_config("good", quick("clt"));
    CHECK(run_cli("clt --config " + good.string() + " --out " + out.string() + " --seed 2") == 0);
    CHECK(fs::exists(out / "manifest.json"));

    const fs::path unknown = write_config("unknown", json{{"params", {{"nonsense", 1}}}});
    const fs::path out2 = scratch("cli_bad");
    CHECK(run_cli("clt --config " + unknown.string() + " --out " + out2.string()) == 2);
    CHECK_FALSE(fs::exists(out2));
    CHECK(run_cli("clt --config /nonexistent.json") == 2);
    CHECK(run_cli("clt") == 2);
    CHECK(run_cli("no-such-command --config x") == 2);

    json diverging = quick("lorenz-reconstruct");
    diverging["integrator"] = {{"divergence_norm", 10.0}};
    const fs::path div = write_config("div", diverging);
    CHECK(run_cli("lorenz-reconstruct --config " + div.string() + " --out " + scratch("cli_div").string()) == 3);
}
#endif
