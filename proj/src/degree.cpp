#include "resonance/degree.hpp"

#include "resonance/errors.hpp"

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <ostream>

namespace resonance {

KernelMap::KernelMap(DecompositionPtr dec, NonlinearityPtr nl, int quadrature_nodes)
    : dec_(dec), nl_(nl), op_(nl, dec), nodes_(quadrature_nodes)
{
    if (quadrature_nodes < 1)
        throw ConfigurationError("quadrature needs at least one node");
}

Eigen::VectorXd KernelMap::embed(const Eigen::VectorXd& z) const
{
    if (z.size() != dimension())
        throw DimensionError("kernel coordinates of the wrong dimension");
    Eigen::VectorXd values = Eigen::VectorXd::Zero(dec_->size());
    for (int i = 0; i < dimension(); ++i)
        values += z(i) * dec_->basis().col(dec_->kernel_modes()[static_cast<std::size_t>(i)]);
    return values;
}

Eigen::VectorXd KernelMap::coordinates(const GridFunction& u) const
{
    Eigen::VectorXd z(dimension());
    for (int i = 0; i < dimension(); ++i)
        z(i) = u.spectral()(dec_->kernel_modes()[static_cast<std::size_t>(i)]);
    return z;
}

Eigen::VectorXd KernelMap::instantaneous(double t, const Eigen::VectorXd& z) const
{
    const Eigen::VectorXd f = op_.values(t, embed(z));
    Eigen::VectorXd out(dimension());
    for (int i = 0; i < dimension(); ++i)
        out(i) = dec_->inner(f, dec_->basis().col(dec_->kernel_modes()[static_cast<std::size_t>(i)]));
    return out;
}

Eigen::VectorXd KernelMap::operator()(const Eigen::VectorXd& z) const
{
    // periodic integrand: the trapezoidal end weights merge into one node at t = 0
    const double T = period();
    const double h = T / nodes_;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dimension());
    for (int m = 0; m < nodes_; ++m)
        sum += instantaneous(m * h, z);
    return h * sum;
}

Eigen::VectorXd averaged_map(const KernelMap& km, const Eigen::VectorXd& z)
{
    return km(z);
}

const char* to_string(DegreeMethod m)
{
    switch (m) {
    case DegreeMethod::sign_change_1d:
        return "sign-change-1d";
    case DegreeMethod::winding_2d:
        return "winding-2d";
    case DegreeMethod::jacobian_sum:
        return "jacobian-sum";
    }
    return "?";
}

DegreeResult brouwer_degree(const VectorMap& g, int dim, double radius, int samples)
{
    if (!(radius > 0.0))
        throw ConfigurationError("degree radius must be positive");
    DegreeResult result;
    if (dim == 1) {
        const double right = g(Eigen::VectorXd::Constant(1, radius))(0);
        const double left = g(Eigen::VectorXd::Constant(1, -radius))(0);
        result.method = DegreeMethod::sign_change_1d;
        result.samples = 2;
        result.min_boundary_norm = std::min(std::abs(left), std::abs(right));
        if (!(result.min_boundary_norm > kDegreeFloor))
            throw DegreeUndefinedError(fmt::format("g vanishes on the boundary (|g| = {:.3e})", result.min_boundary_norm));
        const int sr = right > 0.0 ? 1 : -1;
        const int sl = left > 0.0 ? 1 : -1;
        result.value = (sr - sl) / 2;
        return result;
    }
    if (dim != 2)
        throw ConfigurationError("Brouwer degree is supported for kernel dimension 1 or 2 only");
    if (samples < 8)
        throw ConfigurationError("winding number needs at least 8 boundary samples");

    result.method = DegreeMethod::winding_2d;
    result.samples = samples;
    result.min_boundary_norm = std::numeric_limits<double>::infinity();
    std::vector<double> angle(static_cast<std::size_t>(samples));
    for (int m = 0; m < samples; ++m) {
        const double theta = 2.0 * std::numbers::pi * m / samples;
        Eigen::VectorXd z(2);
        z << radius * std::cos(theta), radius * std::sin(theta);
        const Eigen::VectorXd w = g(z);
        result.min_boundary_norm = std::min(result.min_boundary_norm, w.norm());
        angle[static_cast<std::size_t>(m)] = std::atan2(w(1), w(0));
    }
    if (!(result.min_boundary_norm > kDegreeFloor))
        throw DegreeUndefinedError(fmt::format("g vanishes on the boundary (|g| = {:.3e})", result.min_boundary_norm));

    double total = 0.0;
    for (int m = 0; m < samples; ++m) {
        double d = angle[static_cast<std::size_t>((m + 1) % samples)] - angle[static_cast<std::size_t>(m)];
        d = std::remainder(d, 2.0 * std::numbers::pi);
        if (std::abs(d) > std::numbers::pi / 2.0)
            throw ResolutionError(fmt::format("angle jump {:.3f} between boundary samples; increase the sample count "
                                              "above {}",
                                              d, samples));
        total += d;
    }
    result.raw_winding = total / (2.0 * std::numbers::pi);
    result.value = static_cast<int>(std::lround(result.raw_winding));
    if (std::abs(result.raw_winding - result.value) >= 0.1)
        throw ResolutionError("winding number is not close to an integer");
    return result;
}

DegreeResult brouwer_degree(const KernelMap& km, double radius, int samples)
{
    return brouwer_degree([&km](const Eigen::VectorXd& z) { return km(z); }, km.dimension(), radius, samples);
}

int linear_degree_count(const SpectralDecomposition& dec, double T, int mode_cut)
{
    if (!(T > 0.0))
        throw ConfigurationError("period must be positive");
    int sign = 1;
    const int cut = std::min(mode_cut, dec.size());
    for (int j = 0; j < cut; ++j) {
        if (dec.mode_class(j) == ModeClass::kernel)
            continue;
        if (1.0 - std::exp((dec.lambda() - dec.eigenvalues()(j)) * T) < 0.0)
            sign = -sign;
    }
    return sign;
}

// ---------------------------------------------------------------------------

double Region::level(const SpectralDecomposition& dec, const GridFunction& x) const
{
    if (kind == Kind::ball)
        return x.norm_alpha() / radius;
    const double p = project_coefficients(dec, x.spectral(), Part::P).norm();
    const double q = alpha_norm_of(dec, project_coefficients(dec, x.spectral(), Part::Q));
    return std::max(p / U, q / V);
}

std::string Region::describe() const
{
    if (kind == Kind::ball)
        return fmt::format("alpha-ball of radius {}", radius);
    return fmt::format("U + V with U = {}, V = {}", U, V);
}

DegreeResult RegularDegreeReport::as_degree() const
{
    DegreeResult r;
    r.value = sum;
    r.method = DegreeMethod::jacobian_sum;
    r.samples = seeds_tried;
    return r;
}

RegularDegreeReport ls_degree_regular(const EvolutionSetup& setup, const Region& region,
                                      const std::vector<GridFunction>& seeds, const NewtonOptions& options)
{
    if (seeds.empty())
        throw ConfigurationError("regular-value degree needs at least one seed");
    const auto& dec = *setup.dec;

    RegularDegreeReport report;
    bool degenerate = false;
    for (const auto& seed : seeds) {
        ++report.seeds_tried;
        PeriodicOrbit orbit = find_fixed_point(setup, seed, options);
        if (orbit.status == SolveStatus::degenerate && orbit.residual <= 1e-6) {
            degenerate = true;
            report.warnings.push_back(fmt::format("degenerate fixed point near level {:.4f}",
                                                  region.level(dec, orbit.fixed_point)));
            continue;
        }
        if (!orbit.certified()) {
            ++report.seeds_failed;
            continue;
        }
        const double level = region.level(dec, orbit.fixed_point);
        if (level >= 0.95 && level <= 1.05)
            report.warnings.push_back(fmt::format("fixed point at level {:.4f} lies in the boundary shell", level));
        if (level >= 1.0)
            continue;
        bool duplicate = false;
        for (const auto& known : report.fixed_points)
            duplicate = duplicate || (known.fixed_point - orbit.fixed_point).norm_alpha() < 1e-5;
        if (duplicate)
            continue;
        report.signs.push_back(orbit.jacobian_sign);
        report.sum += orbit.jacobian_sign;
        report.fixed_points.push_back(std::move(orbit));
    }
    report.count = static_cast<int>(report.fixed_points.size());
    report.certified = !degenerate;
    report.message = degenerate ? "cannot certify: degenerate fixed point"
                                : fmt::format("{} fixed point(s) in the {}", report.count, region.describe());
    return report;
}

// ---------------------------------------------------------------------------

namespace {

std::optional<Eigen::VectorXd> root_1d(const KernelMap& km, double radius)
{
    auto f = [&km](double z) { return km(Eigen::VectorXd::Constant(1, z))(0); };
    const double a = f(-radius);
    const double b = f(radius);
    if (a == 0.0 || b == 0.0 || (a > 0.0) == (b > 0.0))
        return std::nullopt;
    std::uintmax_t iterations = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(50);
    const auto bracket = boost::math::tools::toms748_solve(f, -radius, radius, a, b, tol, iterations);
    return Eigen::VectorXd::Constant(1, 0.5 * (bracket.first + bracket.second));
}

std::optional<Eigen::VectorXd> root_newton(const KernelMap& km, Eigen::VectorXd z)
{
    const int d = km.dimension();
    for (int it = 0; it < 60; ++it) {
        const Eigen::VectorXd g = km(z);
        if (g.norm() < 1e-13)
            return z;
        Eigen::MatrixXd jac(d, d);
        for (int j = 0; j < d; ++j) {
            Eigen::VectorXd zp = z;
            const double h = 1e-7 * (1.0 + std::abs(z(j)));
            zp(j) += h;
            jac.col(j) = (km(zp) - g) / (zp(j) - z(j));
        }
        const Eigen::VectorXd step = jac.fullPivLu().solve(g);
        z -= step;
        if (step.norm() < 1e-12 * (1.0 + z.norm()))
            return z;
    }
    return std::nullopt;
}

}  // namespace

AveragingReport averaging_experiment(const EvolutionSetup& setup_template, const std::vector<double>& eps_list,
                                     double U_radius, double V_radius, const GridFunction& x0,
                                     const AveragingOptions& options)
{
    if (!setup_template.nonlinearity)
        throw ConfigurationError("averaging experiment needs a nonlinearity");
    const auto& dec = *setup_template.dec;
    const KernelMap km(setup_template.dec, setup_template.nonlinearity, options.quadrature_nodes);
    const Region region = Region::product(U_radius, V_radius);

    AveragingReport report;
    try {
        report.brouwer = brouwer_degree(km, U_radius);
    } catch (const Error& e) {
        report.brouwer_error = e.what();
    }
    report.existence_checked = report.brouwer && report.brouwer->value != 0;
    if (report.existence_checked)
        report.g_root = km.dimension() == 1 ? root_1d(km, U_radius) : root_newton(km, Eigen::VectorXd::Zero(km.dimension()));

    const int sign_dk = dec.cumulative_multiplicity(dec.k()) % 2 == 0 ? 1 : -1;
    report.orbits = sweep_epsilon(setup_template, eps_list, x0, options.newton);

    for (const auto& orbit : report.orbits) {
        AveragingRow row;
        row.epsilon = orbit.epsilon;
        row.status = orbit.status;
        row.residual = orbit.residual;
        row.x_norm = orbit.fixed_point.norm_alpha();
        row.q_norm = alpha_norm_of(dec, project_coefficients(dec, orbit.fixed_point.spectral(), Part::Q));
        const Eigen::VectorXd z = km.coordinates(orbit.fixed_point);
        row.kernel_coord = z(0);
        row.found = orbit.certified() && region.level(dec, orbit.fixed_point) < 1.0;
        row.expected_degree = report.brouwer ? sign_dk * report.brouwer->value : 0;
        row.root_distance = std::numeric_limits<double>::quiet_NaN();
        if (report.g_root) {
            const double scale = report.g_root->norm();
            row.root_distance = (z - *report.g_root).norm() / (scale > 0.0 ? scale : 1.0);
        }

        if (report.existence_checked) {
            std::vector<GridFunction> seeds;
            if (orbit.certified())
                seeds.push_back(orbit.fixed_point);
            seeds.push_back(x0);
            for (const auto& s : options.extra_seeds)
                seeds.push_back(s);
            const RegularDegreeReport deg =
                ls_degree_regular(setup_template.with_epsilon(orbit.epsilon), region, seeds, options.newton);
            row.degree_value = deg.sum;
            row.degree_certified = deg.certified;
            row.pass = row.found && row.root_distance <= options.root_tolerance && deg.certified &&
                       deg.sum == row.expected_degree;
        }
        report.rows.push_back(row);
    }
    report.pass = report.existence_checked && !report.rows.empty() && report.rows.back().pass;
    return report;
}

void write_averaging_csv(std::ostream& out, const AveragingReport& report)
{
    out << "epsilon,fixed_point_found,q_norm_alpha,kernel_coord,g_root_distance,degree_value,expected_degree,pass\n";
    for (const auto& r : report.rows)
        out << fmt::format("{},{},{},{},{},{},{},{}\n", r.epsilon, r.found ? 1 : 0, r.q_norm, r.kernel_coord,
                           r.root_distance, r.degree_value, r.expected_degree, r.pass ? 1 : 0);
}

// ---------------------------------------------------------------------------

DegreeResult kernel_translation_degree(const KernelMap& km, double scale, double radius, int steps, int samples)
{
    const double T = km.period();
    const double h = T / steps;
    auto theta = [&](const Eigen::VectorXd& z0) {
        Eigen::VectorXd z = z0;
        for (int m = 0; m < steps; ++m) {
            const double t = m * h;
            const Eigen::VectorXd k1 = scale * km.instantaneous(t, z);
            const Eigen::VectorXd k2 = scale * km.instantaneous(t + h / 2, z + h / 2 * k1);
            const Eigen::VectorXd k3 = scale * km.instantaneous(t + h / 2, z + h / 2 * k2);
            const Eigen::VectorXd k4 = scale * km.instantaneous(t + h, z + h * k3);
            z += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        }
        return z;
    };
    return brouwer_degree([&](const Eigen::VectorXd& z) -> Eigen::VectorXd { return z - theta(z); }, km.dimension(),
                          radius, samples);
}

}  // namespace resonance
