#include "oracles.hpp"
#include "resv/embedding.hpp"
#include "resv/errors.hpp"
#include "resv/stochastic.hpp"

#include <doctest.h>

using namespace resv;

TEST_CASE("euler-maruyama step guard") {
    const LinearReservoir res(Mat::Constant(1, 1, 10.0), Mat::Constant(1, 1, 1.0));
    CHECK_THROWS_AS(euler_maruyama(res, zero_system(1), observe_component(0), constant_noise(0.1),
                                   Vec::Zero(1), Vec::Zero(1), 0.06, 1.0, 1),
                    StepSizeError);
}

TEST_CASE("noiseless euler-maruyama follows the deterministic drive") {
    const LinearReservoir res(Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 1.0));
    const SDEPath p = euler_maruyama(res, zero_system(1), [](const Vec&) { return Vec::Constant(1, 2.0); },
                                     constant_noise(0.0), Vec::Zero(1), Vec::Zero(1), 1e-3, 5.0, 1);
    // x' = -x + 2 from 0: x(5) = 2 (1 - e^-5); first-order scheme error O(dt)
    CHECK(p.states.back()[0] == doctest::Approx(2.0 * (1.0 - std::exp(-5.0))).epsilon(1e-3));
    CHECK(p.times.size() == p.states.size());
}

TEST_CASE("paths are reproducible per seed") {
    const LinearReservoir res(Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 1.0));
    const auto run = [&](std::uint64_t seed) {
        return euler_maruyama(res, circle(), observe_component(0), constant_noise(0.3),
                              (Vec(2) << 0.0, 1.0).finished(), Vec::Zero(1), 1e-2, 2.0, seed);
    };
    CHECK(run(4).states.back() == run(4).states.back());
    CHECK(run(4).states.back() != run(5).states.back());
}

TEST_CASE("error process subtracts the reference") {
    const LinearReservoir res(Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 1.0));
    const SDEPath p = euler_maruyama(res, zero_system(1), observe_component(0), constant_noise(0.3),
                                     Vec::Zero(1), Vec::Zero(1), 1e-2, 1.0, 2);
    const SDEPath e = error_process(p, [](double) { return Vec::Constant(1, 1.0); });
    CHECK(e.states.back()[0] == doctest::Approx(p.states.back()[0] - 1.0));
}

TEST_CASE("scalar OU stationary variance") {
    for (auto scheme : {OuScheme::euler_maruyama, OuScheme::exact}) {
        StreamingCovarianceOptions o;
        o.scheme = scheme;
        o.dt = scheme == OuScheme::exact ? 0.1 : 0.005;
        o.duration = 20000.0;
        o.chains = 2;
        o.seed = 9;
        const auto rep = simulate_stationary_covariance(Mat::Constant(1, 1, 2.0), Mat::Constant(1, 1, 1.0), 0.5, o);
        CHECK(rep.lyapunov(0, 0) == doctest::Approx(0.0625));
        CHECK(rep.scaled_inverse(0, 0) == doctest::Approx(0.125));
        CHECK(rep.empirical(0, 0) == doctest::Approx(0.0625).epsilon(0.05));
    }
}

TEST_CASE("zero noise gives zero covariance") {
    StreamingCovarianceOptions o;
    o.scheme = OuScheme::exact;
    o.dt = 0.1;
    o.duration = 100.0;
    const LinearReservoir res = generate_reservoir(RandomReservoirSpec{3, 30.0, 2});
    const auto rep = simulate_stationary_covariance(res.A(), res.C(), 0.0, o);
    CHECK(rep.empirical.norm() == 0.0);
    CHECK(rep.rel_dist_lyapunov == 0.0);
}

TEST_CASE("multivariate covariance matches the lyapunov oracle") {
    const LinearReservoir res = generate_reservoir(RandomReservoirSpec{3, 10.0, 4});
    StreamingCovarianceOptions o;
    o.scheme = OuScheme::exact;
    o.dt = 0.1 / res.spectral().sigma_min();
    o.duration = 4e4 / res.spectral().sigma_min();
    o.seed = 1;
    const auto rep = simulate_stationary_covariance(res.A(), res.C(), 1.0, o);
    CHECK((rep.lyapunov - oracle::lyapunov(res.A(), res.C() * res.C().transpose())).norm() < 1e-12);
    CHECK(rep.rel_dist_lyapunov < 0.05);
    CHECK(rep.effective_samples > 1e4);
    CHECK_FALSE(rep.insufficient_samples);
}

TEST_CASE("relative frobenius distance") {
    CHECK(relative_frobenius(Mat::Identity(2, 2) * 1.1, Mat::Identity(2, 2)) == doctest::Approx(0.1));
    CHECK(relative_frobenius(Mat::Ones(1, 1), Mat::Zero(1, 1)) == doctest::Approx(1.0));
}

TEST_CASE("stored-path covariance check") {
    std::vector<SDEPath> paths;
    for (std::uint64_t s = 0; s < 4; ++s)
        paths.push_back(ou_simulate(Mat::Constant(1, 1, 1.0), Vec::Constant(1, 1.0), Vec::Zero(1), 0.01, 2000.0, s));
    const auto rep = stationary_covariance_check(paths, Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 1.0), 1.0, 10.0);
    CHECK(rep.empirical(0, 0) == doctest::Approx(0.5).epsilon(0.1));
}
