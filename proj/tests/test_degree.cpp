#include "resonance/degree.hpp"
#include "resonance/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

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

Eigen::VectorXd vec(std::initializer_list<double> values)
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values)
        v(i++) = x;
    return v;
}

}  // namespace

TEST_CASE("winding number of simple planar maps")
{
    const VectorMap identity = [](const Eigen::VectorXd& z) { return z; };
    const VectorMap negate = [](const Eigen::VectorXd& z) { return Eigen::VectorXd(-z); };
    const VectorMap reflect = [](const Eigen::VectorXd& z) { return vec({z(0), -z(1)}); };
    const VectorMap square = [](const Eigen::VectorXd& z) {
        return vec({z(0) * z(0) - z(1) * z(1), 2 * z(0) * z(1)});
    };
    CHECK(brouwer_degree(identity, 2, 1.0).value == 1);
    CHECK(brouwer_degree(negate, 2, 1.0).value == 1);
    CHECK(brouwer_degree(reflect, 2, 1.0).value == -1);
    CHECK(brouwer_degree(square, 2, 1.0).value == 2);
    CHECK(brouwer_degree(identity, 2, 1.0).method == DegreeMethod::winding_2d);

    const VectorMap shifted = [](const Eigen::VectorXd& z) { return vec({z(0) - 3.0, z(1)}); };
    CHECK(brouwer_degree(shifted, 2, 1.0).value == 0);
    CHECK_THROWS_AS(brouwer_degree(shifted, 2, 3.0), DegreeUndefinedError);
}

TEST_CASE("one-dimensional degree is the sign change")
{
    const VectorMap up = [](const Eigen::VectorXd& z) { return vec({z(0) - 0.5}); };
    const VectorMap down = [](const Eigen::VectorXd& z) { return vec({0.5 - z(0)}); };
    const VectorMap none = [](const Eigen::VectorXd& z) { return vec({z(0) * z(0) + 1.0}); };
    CHECK(brouwer_degree(up, 1, 1.0).value == 1);
    CHECK(brouwer_degree(down, 1, 1.0).value == -1);
    CHECK(brouwer_degree(none, 1, 1.0).value == 0);
    CHECK(brouwer_degree(up, 1, 1.0).method == DegreeMethod::sign_change_1d);
    CHECK_THROWS_AS(brouwer_degree(up, 1, 0.5), DegreeUndefinedError);
    CHECK_THROWS_AS(brouwer_degree(up, 3, 1.0), ConfigurationError);
}

TEST_CASE("linear degree count alternates with k")
{
    CHECK(linear_degree_count(*laplacian_1d(63, 1), 1.0, 64) == 1);
    CHECK(linear_degree_count(*laplacian_1d(63, 2), 1.0, 64) == -1);
    CHECK(linear_degree_count(*laplacian_1d(63, 3), 1.0, 64) == 1);
    CHECK_THROWS_AS(linear_degree_count(*laplacian_1d(15, 1), 0.0, 8), ConfigurationError);
}

TEST_CASE("averaged kernel map matches a brute-force quadrature")
{
    const auto dec = laplacian_1d(63, 1);
    auto nl = shared(builtin("periodic_forced_arctan", {{"amplitude", 1.0}, {"forcing", -0.5}, {"period", 2.0}}));
    KernelMap km(dec, nl, 64);
    CHECK(km.dimension() == 1);
    const Eigen::VectorXd z = vec({0.7});
    double sum = 0.0;
    const int n = 4000;
    for (int i = 0; i < n; ++i)
        sum += km.instantaneous((i + 0.5) * 2.0 / n, z)(0);
    const double brute = sum * 2.0 / n;
    CHECK(km(z)(0) == doctest::Approx(brute).epsilon(1e-8));
    CHECK(averaged_map(km, z)(0) == doctest::Approx(km(z)(0)));
    CHECK((km.coordinates(GridFunction::from_values(dec, km.embed(z))) - z).norm() <= 1e-12);
}

TEST_CASE("kernel map degree is invariant in the radius")
{
    const auto dec = laplacian_1d(63, 1);
    auto nl = shared(builtin("arctan", {{"forcing", -0.5}}));
    KernelMap km(dec, nl);
    const int d10 = brouwer_degree(km, 10.0).value;
    CHECK(d10 == 1);
    CHECK(brouwer_degree(km, 20.0).value == d10);
    CHECK(brouwer_degree(km, 40.0).value == d10);

    auto neg = shared(builtin("neg_arctan"));
    CHECK(brouwer_degree(KernelMap(dec, neg), 10.0).value == -1);
}

TEST_CASE("2D kernel map has winding degree one for arctan")
{
    const auto p = EllipticProblem::rectangle(pi, pi, 16);
    const auto dec = decompose(p, assemble(p), 5.0, 0.9);
    REQUIRE(dec->kernel_dimension() == 2);
    KernelMap km(dec, shared(builtin("arctan")), 16);
    const auto d = brouwer_degree(km, 10.0, 360);
    CHECK(d.value == 1);
    CHECK(std::abs(d.raw_winding - 1.0) < 0.1);
}

TEST_CASE("kernel translation degree against an Euler oracle")
{
    const auto dec = laplacian_1d(63, 1);
    auto nl = shared(builtin("arctan", {{"forcing", 0.3}}));
    KernelMap km(dec, nl);
    const double scale = 0.5, radius = 8.0;
    auto euler_gap = [&](double z0) {
        Eigen::VectorXd z = vec({z0});
        const int steps = 20000;
        const double h = km.period() / steps;
        for (int i = 0; i < steps; ++i)
            z += h * scale * km.instantaneous(i * h, z);
        return z0 - z(0);
    };
    const double left = euler_gap(-radius), right = euler_gap(radius);
    const int oracle = (right > 0) - (left > 0);
    const auto d = kernel_translation_degree(km, scale, radius);
    CHECK(d.value == oracle);
    CHECK(d.value == -brouwer_degree(km, radius).value);
}

TEST_CASE("regions and regular-value degree")
{
    const auto dec = laplacian_1d(63, 1);
    auto setup = EvolutionSetup::make(dec, shared(builtin("arctan", {{"forcing", -0.5}})), 0.1);
    const auto ball = Region::ball(2.0);
    CHECK(ball.level(*dec, GridFunction::mode(dec, 0)) == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(Region::product(10.0, 1.0).describe().find("10") != std::string::npos);

    NewtonOptions options;
    options.mode_cut = 24;
    const std::vector<GridFunction> seeds{GridFunction::zero(dec), GridFunction::mode(dec, 0) * 2.0,
                                          GridFunction::mode(dec, 0) * -2.0};
    const auto report = ls_degree_regular(setup, Region::product(10.0, 1.0), seeds, options);
    REQUIRE(report.certified);
    CHECK(report.count == 1);
    CHECK(report.sum == -1);
    CHECK(report.as_degree().value == -1);
    CHECK(report.as_degree().method == DegreeMethod::jacobian_sum);
}

TEST_CASE("averaging experiment at small eps")
{
    const auto dec = laplacian_1d(63, 1);
    auto setup = EvolutionSetup::make(dec, shared(builtin("arctan", {{"forcing", -0.5}})), 1.0);
    AveragingOptions options;
    options.newton.mode_cut = 24;
    const auto report = averaging_experiment(setup, {0.1, 0.05}, 10.0, 1.0, GridFunction::zero(dec), options);
    REQUIRE(report.brouwer.has_value());
    CHECK(report.brouwer->value == 1);
    REQUIRE(report.g_root.has_value());
    // g vanishes at the reported root
    KernelMap km(dec, setup.nonlinearity);
    CHECK(std::abs(km(*report.g_root)(0)) <= 1e-10);
    REQUIRE(report.rows.size() == 2);
    for (const auto& row : report.rows) {
        CHECK(row.found);
        CHECK(row.pass);
        CHECK(row.degree_value == row.expected_degree);
    }
    CHECK(report.rows[1].root_distance < report.rows[0].root_distance);
    CHECK(report.pass);
    std::ostringstream csv;
    write_averaging_csv(csv, report);
    CHECK(csv.str().rfind("epsilon,fixed_point_found,q_norm_alpha,kernel_coord,g_root_distance,degree_value,"
                          "expected_degree,pass",
                          0) == 0);
}
