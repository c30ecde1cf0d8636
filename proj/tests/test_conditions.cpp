#include "resonance/conditions.hpp"
#include "resonance/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace resonance;

namespace {

constexpr double pi = std::numbers::pi;

DecompositionPtr laplacian_1d(int n, int k)
{
    const auto p = EllipticProblem::interval(pi, n);
    return decompose_index(p, assemble(p), k, 0.9);
}

NonlinearityPtr shared(Nonlinearity nl)
{
    return std::make_shared<const Nonlinearity>(std::move(nl));
}

// int g+ y0^+ - int g- y0^- on the grid, for constant limits
double ll_integral(const SpectralDecomposition& dec, double gp, double gm, double sign)
{
    const Eigen::VectorXd y = dec.to_values(Eigen::VectorXd::Unit(dec.size(), dec.kernel_modes().front())) * sign;
    double sum = 0.0;
    for (int i = 0; i < y.size(); ++i)
        sum += y(i) > 0 ? gp * y(i) : gm * y(i);
    return sum * dec.problem().cell_weight();
}

}  // namespace

TEST_CASE("Landesman-Lazer for arctan")
{
    const auto dec = laplacian_1d(99, 1);
    const auto nl = builtin("arctan");
    const auto ll1 = check_landesman_lazer(*dec, nl, Condition::LL1);
    const auto ll2 = check_landesman_lazer(*dec, nl, Condition::LL2);
    CHECK(ll1.holds == Verdict::yes);
    CHECK(ll2.holds == Verdict::no);
    // worst case over the two unit kernel vectors y0 and -y0
    const double expected = std::min(ll_integral(*dec, pi / 2, -pi / 2, 1.0), ll_integral(*dec, pi / 2, -pi / 2, -1.0));
    CHECK(ll1.margin == doctest::Approx(expected).epsilon(1e-10));

    const auto neg = builtin("neg_arctan");
    CHECK(check_landesman_lazer(*dec, neg, Condition::LL2).holds == Verdict::yes);
    CHECK(check_landesman_lazer(*dec, neg, Condition::LL1).holds == Verdict::no);
}

TEST_CASE("Landesman-Lazer fails for kernel-constant forcing")
{
    const auto dec = laplacian_1d(99, 1);
    const auto nl = builtin("kernel_constant", {{"amplitude", 1.0}}, dec.get());
    CHECK(check_landesman_lazer(*dec, nl, Condition::LL1).holds == Verdict::no);
    CHECK(check_landesman_lazer(*dec, nl, Condition::LL2).holds == Verdict::no);
}

TEST_CASE("Landesman-Lazer with forcing below the threshold")
{
    const auto dec = laplacian_1d(99, 1);
    // g+ int y0 = (pi/2 + f) int y0 stays positive and -g- int y0 = (pi/2 - f) int y0 too
    CHECK(check_landesman_lazer(*dec, builtin("arctan", {{"forcing", 1.0}}), Condition::LL1).holds == Verdict::yes);
    CHECK(check_landesman_lazer(*dec, builtin("arctan", {{"forcing", 2.0}}), Condition::LL1).holds == Verdict::no);
}

TEST_CASE("strong resonance")
{
    const auto dec = laplacian_1d(99, 1);
    const auto sr = builtin("strong_res", {{"amplitude", 2.0}});
    const auto sr1 = check_strong_resonance(*dec, sr, Condition::SR1);
    CHECK(sr1.holds == Verdict::yes);
    CHECK(sr1.margin == doctest::Approx(2.0 * pi).epsilon(1e-6));
    CHECK(check_strong_resonance(*dec, sr, Condition::SR2).holds == Verdict::no);
    const auto flipped = builtin("strong_res", {{"orientation", -1.0}});
    CHECK(check_strong_resonance(*dec, flipped, Condition::SR2).holds == Verdict::yes);
}

TEST_CASE("missing metadata is a configuration error")
{
    const auto dec = laplacian_1d(31, 1);
    CHECK_THROWS_AS(check_strong_resonance(*dec, builtin("arctan"), Condition::SR1), ConfigurationError);
    CHECK_THROWS_AS(check_landesman_lazer(*dec, builtin("strong_res"), Condition::LL1), ConfigurationError);
    CHECK_THROWS_AS(check_landesman_lazer(*dec, builtin("periodic_forced_arctan"), Condition::LL1), ConfigurationError);
    CHECK_THROWS_AS(check_landesman_lazer(*dec, builtin("arctan"), Condition::SR1), ConfigurationError);
}

TEST_CASE("geometric conditions")
{
    const auto dec = laplacian_1d(63, 1);
    const std::vector<double> radii{1.0, 10.0, 100.0};
    GeometricOptions options;
    options.t_samples = 8;
    options.y_samples = 16;
    const auto arctan = shared(builtin("arctan"));
    const auto g1 = check_geometric(dec, arctan, Condition::G1, 1.0, radii, options);
    const auto g2 = check_geometric(dec, arctan, Condition::G2, 1.0, radii, options);
    CHECK(g1.holds == Verdict::yes);
    CHECK(g1.margin > kMarginFloor);
    CHECK(g2.holds == Verdict::no);
    REQUIRE(g2.witness.has_value());

    const auto neg = shared(builtin("neg_arctan"));
    CHECK(check_geometric(dec, neg, Condition::G2, 1.0, radii, options).holds == Verdict::yes);
    CHECK(check_geometric(dec, neg, Condition::G1, 1.0, radii, options).holds == Verdict::no);

    CHECK_THROWS_AS(check_geometric(dec, arctan, Condition::LL1, 1.0, radii, options), ConfigurationError);
    CHECK_THROWS_AS(check_geometric(dec, arctan, Condition::G1, 1.0, {}, options), ConfigurationError);
}

TEST_CASE("LL1 implies G1 on the built-in families")
{
    const auto dec = laplacian_1d(63, 1);
    GeometricOptions options;
    options.t_samples = 8;
    options.y_samples = 16;
    for (double f : {-1.0, 0.0, 0.5}) {
        const auto nl = shared(builtin("arctan", {{"forcing", f}}));
        if (check_landesman_lazer(*dec, *nl, Condition::LL1).holds == Verdict::yes)
            CHECK(check_geometric(dec, nl, Condition::G1, 1.0, {1.0, 10.0, 100.0}, options).holds == Verdict::yes);
    }
}

TEST_CASE("verdict names")
{
    CHECK(std::string(to_string(Verdict::inconclusive)) == "inconclusive");
    CHECK(std::string(to_string(Condition::SR2)) == "SR2");
}
