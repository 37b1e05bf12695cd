#include "oracles.hpp"
#include "resv/dynamics.hpp"
#include "resv/reservoir.hpp"

#include <doctest.h>

using namespace resv;

namespace {

LinearReservoir small_reservoir() {
    const Mat a = (Mat(3, 3) << 2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 0.5).finished();
    return {a, (Mat(3, 1) << 0.4, -0.2, 0.3).finished()};
}

}  // namespace

TEST_CASE("linear reservoir validates its matrices") {
    CHECK_THROWS(LinearReservoir(Mat::Identity(2, 2), Mat::Ones(3, 1)));
    CHECK_THROWS(LinearReservoir(-Mat::Identity(2, 2), Mat::Ones(2, 1)));
}

TEST_CASE("state jacobians agree with central differences") {
    const Vec z = Vec::Constant(1, 0.7);
    std::srand(2);
    LeakyESN esn{0.6, Mat::Random(3, 3), Mat::Random(3, 1), Vec::Random(3)};
    const std::vector<ReservoirModel> models{small_reservoir(), esn, SinusoidReservoir{0.8}};
    for (const auto& model : models) {
        const Vec x = Vec::LinSpaced(state_dim(model), -0.4, 0.3);
        const auto f = [&](const Vec& y) { return reservoir_rhs(model, y, z); };
        CHECK((jacobian_x(model, x, z) - oracle::jacobian_cd(f, x)).norm() < 1e-7);
    }
}

TEST_CASE("driven linear reservoir settles on A^-1 C z for constant input") {
    const LinearReservoir res = small_reservoir();
    const DrivenSignal sig{zero_system(1), [](const Vec&) { return Vec::Constant(1, 2.0); }, 1, Vec::Zero(1), 0.0};
    const Trajectory x = drive(res, sig, Vec::Zero(3), 0.0, 80.0);
    const Vec target = res.A().ldlt().solve(res.C() * 2.0);
    CHECK((x.back() - target).norm() < 1e-9);
}

TEST_CASE("drive_coupled returns both components on one time grid") {
    const DrivenSignal sig{circle(), observe_component(0), 1, (Vec(2) << 0.0, 1.0).finished(), 0.0};
    const DriveResult r = drive_coupled(small_reservoir(), sig, Vec::Zero(3), 0.0, 5.0);
    CHECK(r.source.size() == r.reservoir.size());
    CHECK(r.source.dim() == 2);
    CHECK(r.reservoir.dim() == 3);
    CHECK_THROWS(drive_coupled(small_reservoir(), sig, Vec::Zero(3), 5.0, 0.0));
}

TEST_CASE("contraction certificate") {
    const std::vector<Vec> xs{Vec::Zero(3), Vec::Ones(3)};
    const std::vector<Vec> zs{Vec::Zero(1)};
    const auto lin = contraction_certificate(small_reservoir(), xs, zs);
    CHECK(lin.verdict);
    const SpectralDecomposition sd(small_reservoir().A());
    CHECK(lin.delta == doctest::Approx(sd.sigma_min()));

    // near x = 0 the sinusoid reservoir expands (d/dx sin 2 pi x = 2 pi)
    const std::vector<Vec> xs2{Vec::Zero(2)};
    CHECK_FALSE(contraction_certificate(SinusoidReservoir{1.0}, xs2, zs).verdict);
}

TEST_CASE("stability probe recovers the slowest contraction rate") {
    const LinearReservoir res = small_reservoir();
    const DrivenSignal sig{circle(), observe_component(0), 1, (Vec(2) << 0.0, 1.0).finished(), 0.0};
    const Vec x0 = Vec::Zero(3);
    const Vec y0 = Vec::Ones(3);
    const StabilityProbe p = stability_probe(res, sig, x0, y0, 0.0, 30.0);
    REQUIRE(p.fitted);
    CHECK(p.rate == doctest::Approx(SpectralDecomposition(res.A()).sigma_min()).epsilon(0.02));
    CHECK(p.distances.front() == doctest::Approx(std::sqrt(3.0)));
}
