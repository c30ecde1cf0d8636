#include "resonance/errors.hpp"
#include "resonance/nonlinearity.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace resonance;

namespace {

constexpr double pi = std::numbers::pi;

}  // namespace

TEST_CASE("built-in families satisfy their declared bounds")
{
    const auto p1 = EllipticProblem::interval(pi, 63);
    const auto p2 = EllipticProblem::rectangle(pi, pi, 12);
    const auto dec = decompose_index(p1, assemble(p1), 1, 0.9);
    for (const std::string name : {"arctan", "neg_arctan", "strong_res", "periodic_forced_arctan"}) {
        const auto nl = builtin(name, {{"amplitude", 1.5}, {"period", 2.0}});
        for (const auto* p : {&p1, &p2}) {
            const auto report = probe(nl, *p, 4000, 11);
            INFO(name);
            CHECK(report.periodic());
            CHECK(report.bounded(nl.bound_m));
            CHECK(report.lipschitz_ratio <= nl.lipschitz_L * (1 + 1e-9));
        }
    }
    const auto kc = builtin("kernel_constant", {{"amplitude", 2.0}}, dec.get());
    const auto report = probe(kc, p1, 2000, 3);
    CHECK(report.bounded(kc.bound_m));
    CHECK(report.periodic());
}

TEST_CASE("arctan limits and forcing")
{
    const auto nl = builtin("arctan", {{"amplitude", 2.0}, {"forcing", -0.5}});
    REQUIRE(nl.landesman_lazer.has_value());
    const Vec2 x{1.0, 0.0};
    CHECK(nl.landesman_lazer->g_plus(x) == doctest::Approx(pi - 0.5));
    CHECK(nl.landesman_lazer->g_minus(x) == doctest::Approx(-pi - 0.5));
    CHECK(nl.pointwise(0.3, x, 1e9, {0, 0}) == doctest::Approx(pi - 0.5).epsilon(1e-8));
    CHECK(nl.pointwise(0.3, x, 0.0, {0, 0}) == doctest::Approx(-0.5));
    CHECK(nl.bound_m == doctest::Approx(pi + 0.5));
    CHECK_FALSE(nl.uses_gradient);

    const auto neg = builtin("neg_arctan", {{"amplitude", 2.0}});
    CHECK(neg.landesman_lazer->g_plus(x) == doctest::Approx(-pi));
    CHECK(neg.pointwise(0.0, x, -1e9, {0, 0}) == doctest::Approx(pi).epsilon(1e-8));
}

TEST_CASE("strong resonance metadata")
{
    const auto nl = builtin("strong_res", {{"amplitude", 3.0}});
    REQUIRE(nl.strong_resonance.has_value());
    CHECK_FALSE(nl.landesman_lazer.has_value());
    const Vec2 x{0.5, 0.0};
    CHECK(nl.strong_resonance->g_infinity(x) == 3.0);
    CHECK(nl.pointwise(0.0, x, 1e6, {0, 0}) * 1e6 == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(nl.bound_m == doctest::Approx(1.5));
    const auto flipped = builtin("strong_res", {{"orientation", -1.0}});
    CHECK(flipped.strong_resonance->g_infinity(x) == -1.0);
}

TEST_CASE("gradient dependence flag")
{
    const auto plain = builtin("arctan");
    const auto grad = builtin("arctan", {{"gradient_weight", 0.5}});
    CHECK_FALSE(plain.uses_gradient);
    CHECK(grad.uses_gradient);
    const Vec2 x{1.0, 0.0};
    CHECK(grad.pointwise(0.0, x, 0.0, {pi / 2, 0.0}) == doctest::Approx(0.5));
    CHECK(plain.pointwise(0.0, x, 0.0, {pi / 2, 0.0}) == 0.0);
}

TEST_CASE("unknown names and parameters are configuration errors")
{
    CHECK_THROWS_AS(builtin("cubic"), ConfigurationError);
    CHECK_THROWS_AS(builtin("arctan", {{"amplitud", 1.0}}), ConfigurationError);
    CHECK_THROWS_AS(builtin("arctan", {{"period", -1.0}}), ConfigurationError);
    CHECK_THROWS_AS(builtin("kernel_constant"), ConfigurationError);
}

TEST_CASE("periodic forcing has no declared limits and varies in t")
{
    const auto nl = builtin("periodic_forced_arctan", {{"period", 2.0}});
    CHECK_FALSE(nl.landesman_lazer.has_value());
    CHECK_FALSE(nl.strong_resonance.has_value());
    const Vec2 x{1.0, 0.0};
    CHECK(nl.pointwise(0.0, x, 1.0, {0, 0}) != doctest::Approx(nl.pointwise(1.0, x, 1.0, {0, 0})));
    CHECK(nl.pointwise(0.3, x, 1.0, {0, 0}) == doctest::Approx(nl.pointwise(2.3, x, 1.0, {0, 0})));
}

TEST_CASE("applying F to random data respects the bound on the grid")
{
    const auto p = EllipticProblem::interval(pi, 99);
    const auto dec = decompose_index(p, assemble(p), 1, 0.9);
    const auto nl = builtin("arctan", {{"amplitude", 1.0}, {"forcing", 0.25}});
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal(0.0, 30.0);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd v(dec->size());
        for (int i = 0; i < v.size(); ++i)
            v(i) = normal(rng);
        const auto fu = apply(nl, dec, 0.1 * trial, GridFunction::from_values(dec, v));
        CHECK(fu.values().cwiseAbs().maxCoeff() <= nl.bound_m);
        const double measure = pi;
        CHECK(fu.norm_h() <= nl.bound_m * std::sqrt(measure) + 1e-12);
    }
}

TEST_CASE("interpolation reproduces nodes and vanishes on the boundary")
{
    const auto p = EllipticProblem::interval(pi, 15);
    Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(15, 1.0, 15.0);
    const double h = pi / 16;
    CHECK(interpolate(p, v, {3 * h, 0.0}) == doctest::Approx(3.0));
    CHECK(interpolate(p, v, {3.5 * h, 0.0}) == doctest::Approx(3.5));
    CHECK(interpolate(p, v, {0.0, 0.0}) == 0.0);
    CHECK(interpolate(p, v, {pi, 0.0}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("Niemytzki operator in spectral coordinates")
{
    const auto p = EllipticProblem::interval(pi, 49);
    const auto dec = decompose_index(p, assemble(p), 1, 0.9);
    auto nl = std::make_shared<const Nonlinearity>(builtin("arctan"));
    NiemytzkiOperator op(nl, dec);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(dec->size());
    c(0) = 2.0;
    c(3) = -0.5;
    const Eigen::VectorXd direct = op.values(0.0, dec->to_values(c));
    CHECK((dec->to_values(op.spectral(0.0, c)) - direct).norm() <= 1e-10 * direct.norm());
    CHECK(op.gradient()[0].rows() == 0);

    auto with_grad = std::make_shared<const Nonlinearity>(builtin("arctan", {{"gradient_weight", 1.0}}));
    NiemytzkiOperator gop(with_grad, dec);
    REQUIRE(gop.gradient()[0].rows() == dec->size());
    // central differences of sin(x) approximate cos(x)
    Eigen::VectorXd y(dec->size());
    const double h = pi / 50;
    for (int i = 0; i < y.size(); ++i)
        y(i) = std::sin((i + 1) * h);
    const Eigen::VectorXd g = gop.gradient()[0] * y;
    CHECK(std::abs(g(24) - std::cos(25 * h)) <= 1e-2);
}
