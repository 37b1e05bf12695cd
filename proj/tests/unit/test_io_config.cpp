#include "resv/config.hpp"
#include "resv/embedding.hpp"
#include "resv/errors.hpp"
#include "resv/io.hpp"
#include "resv/model_json.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace resv;
using namespace resv::experiments;
using nlohmann::json;

TEST_CASE("csv round trip is lossless") {
    const std::vector<std::string> header{"a", "b"};
    const std::vector<std::vector<double>> rows{{0.1, 1.0 / 3.0}, {-1e-300, 6.02214076e23},
                                                {std::nextafter(1.0, 2.0), -0.0}};
    std::stringstream s;
    io::write_csv(s, header, rows);
    const io::CsvTable t = io::read_csv(s);
    CHECK(t.header == header);
    REQUIRE(t.rows.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(t.rows[i][j] == rows[i][j]);
}

TEST_CASE("csv reader rejects ragged and malformed input") {
    std::istringstream ragged("a,b\n1,2\n3\n");
    CHECK_THROWS(io::read_csv(ragged));
    std::istringstream junk("a\nabc\n");
    CHECK_THROWS(io::read_csv(junk));
}

TEST_CASE("trajectory csv round trip") {
    const Trajectory tr = integrate(circle(), (Vec(2) << 0.0, 1.0).finished(), 0.0, 1.0);
    std::stringstream s;
    io::write_trajectory_csv(s, tr);
    CHECK(s.str().rfind("t,x0,x1\n", 0) == 0);
    const Trajectory back = io::read_trajectory_csv(s);
    REQUIRE(back.size() == tr.size());
    CHECK(back.times() == tr.times());
    CHECK(back.back() == tr.back());
}

TEST_CASE("model json round trip") {
    const LinearReservoir res = generate_reservoir(RandomReservoirSpec{3, 30.0, 1});
    const ReservoirModel back = model_from_json(json::parse(model_to_json(res).dump()));
    REQUIRE(std::holds_alternative<LinearReservoir>(back));
    CHECK(std::get<LinearReservoir>(back).A() == res.A());
    const ReservoirModel sin = model_from_json(json::parse(model_to_json(SinusoidReservoir{0.3}).dump()));
    CHECK(std::get<SinusoidReservoir>(sin).lambda == 0.3);
    CHECK_THROWS(model_from_json(json{{"type", "nope"}}));
}

TEST_CASE("config defaults and overrides") {
    const ExperimentConfig c = parse_config("lorenz-reconstruct", json::object(), std::string("dir"), 42);
    CHECK(c.seed == 42);
    CHECK(c.output_dir == "dir");
    CHECK(c.integrator.rtol == 1e-9);
    CHECK(c.integrator.atol == 1e-6);
    const auto& p = std::get<LorenzParams>(c.params);
    CHECK(p.n == 7);
    CHECK(p.d == 300);
    CHECK(p.t_end == 200.0);
    CHECK(parse_config("gs-check", json::object()).integrator.atol == 1e-12);
}

TEST_CASE("config validation") {
    const auto bad = [](const char* cmd, const char* text) {
        CHECK_THROWS_AS(parse_config(cmd, json::parse(text)), ConfigError);
    };
    bad("clt", R"({"experiment": "noise"})");
    bad("clt", R"({"bogus": 1})");
    bad("clt", R"({"params": {"trials": "many"}})");
    bad("clt", R"({"params": {"d_list": [10, -3]}})");
    bad("noise", R"({"params": {"scheme": "euler_maruyama", "dt_scale": 0.7}})");
    bad("noise", R"({"params": {"model": "cubic"}})");
    bad("multi-gs", R"({"integrator": {"rtol": -1}})");
    bad("multi-gs", R"({"seed": -4})");
    bad("embed-check", R"({"params": {"jacobian": [[1, 2], [3]]}})");
    bad("lorenz-reconstruct", R"({"params": {"d": 0}})");
    CHECK_NOTHROW(parse_config("noise", json::parse(R"({"params": {"scheme": "exact", "dt_scale": 0.7}})")));
}

TEST_CASE("config echo parses back to the same config") {
    const ExperimentConfig c = parse_config("gs-check", json::parse(R"({"seed": 3, "params": {"a": 2.5, "points": 7}})"));
    const ExperimentConfig again = parse_config("gs-check", json::parse(config_to_json(c).dump()));
    CHECK(config_to_json(again) == config_to_json(c));
    CHECK(std::get<GsCheckParams>(again.params).a == 2.5);
}

TEST_CASE("missing config file is a config error") {
    CHECK_THROWS_AS(load_config("clt", "/nonexistent/config.json"), ConfigError);
}
