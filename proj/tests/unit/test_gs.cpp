#include "resv/errors.hpp"
#include "resv/gs.hpp"

#include <doctest.h>

#include <sstream>

using namespace resv;

namespace {

double closed_form(double a, const Vec& m) { return (a * m[0] + m[1]) / (a * a + 1.0); }

LinearReservoir scalar(double a) { return {Mat::Constant(1, 1, a), Mat::Constant(1, 1, 1.0)}; }

}  // namespace

TEST_CASE("gs_integral on the circle matches the closed form") {
    for (double a : {0.5, 1.0, 3.0}) {
        for (double theta : {0.0, 1.0, 2.5}) {
            const Vec m = (Vec(2) << std::cos(theta), std::sin(theta)).finished();
            const GSSample s = gs_integral(scalar(a), circle(), observe_component(0), m, 40.0, 0.01);
            CHECK(s.value[0] == doctest::Approx(closed_form(a, m)).epsilon(1e-8));
            CHECK(std::abs(s.value[0] - closed_form(a, m)) <= s.error_bound);
            CHECK(s.method == GSMethod::integral);
        }
    }
}

TEST_CASE("gs_integral truncation bound grows when the horizon is short") {
    const Vec m = (Vec(2) << 0.0, 1.0).finished();
    const GSSample s = gs_integral(scalar(1.0), circle(), observe_component(0), m, 2.0, 0.01);
    const double err = std::abs(s.value[0] - closed_form(1.0, m));
    CHECK(err > 1e-3);
    CHECK(err <= s.error_bound);
}

TEST_CASE("gs_fixed_point is A^-1 C omega") {
    const LinearReservoir res({(Mat(2, 2) << 2.0, 0.5, 0.5, 1.0).finished()}, (Mat(2, 1) << 1.0, -1.0).finished());
    const Vec f = gs_fixed_point(res, Vec::Constant(1, 3.0));
    CHECK((res.A() * f - res.C() * 3.0).norm() < 1e-14);
}

TEST_CASE("gs_washout reaches the fixed-point value within its bound") {
    const LinearReservoir res({(Mat(2, 2) << 2.0, 0.5, 0.5, 1.0).finished()}, (Mat(2, 1) << 1.0, -1.0).finished());
    WashoutOptions opts;
    opts.washout = 10.0;
    opts.horizon = 12.0;
    opts.sample_dt = 0.5;
    opts.x0 = (Vec(2) << 5.0, -4.0).finished();
    const Observation omega = [](const Vec&) { return Vec::Constant(1, 3.0); };
    const auto samples = gs_washout(res, zero_system(1), omega, 1, Vec::Zero(1), opts);
    const Vec exact = gs_fixed_point(res, Vec::Constant(1, 3.0));
    REQUIRE(samples.size() == 5);
    for (const auto& s : samples) {
        CHECK((s.value - exact).norm() <= s.error_bound);
        CHECK(s.method == GSMethod::washout);
    }
}

TEST_CASE("pde residual vanishes to second order for the true map only") {
    const GSMap exact = [](const Vec& m) { return Vec::Constant(1, closed_form(1.0, m)); };
    const GSMap wrong = [](const Vec& m) { return Vec::Constant(1, closed_form(1.0, m) + 0.1); };
    const Vec m = (Vec(2) << 0.0, 1.0).finished();
    IntegratorConfig tight;
    tight.rtol = 1e-13;
    tight.atol = 1e-15;
    const double r2 = pde_residual(exact, circle(), scalar(1.0), observe_component(0), m, 1e-2, tight);
    const double r3 = pde_residual(exact, circle(), scalar(1.0), observe_component(0), m, 1e-3, tight);
    CHECK(r2 / r3 == doctest::Approx(100.0).epsilon(0.05));
    CHECK(pde_residual(wrong, circle(), scalar(1.0), observe_component(0), m, 1e-3, tight) > 0.05);
}

TEST_CASE("gs sample csv export") {
    GSSample s{0.5, (Vec(2) << 1.0, 2.0).finished(), Vec::Constant(1, 0.25), GSMethod::closed_form, 0.0, 0.0};
    std::ostringstream out;
    write_gs_samples_csv(out, std::span<const GSSample>(&s, 1));
    CHECK(out.str().rfind("t,m_0,m_1,f_0,err_bound,method\n", 0) == 0);
    CHECK(out.str().find("closed_form") != std::string::npos);
}
