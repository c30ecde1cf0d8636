#include "resonance/nonlinearity.hpp"

#include "resonance/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace resonance {

namespace {

double param(const Params& params, const std::string& key, double fallback)
{
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void require_known(const Params& params, std::initializer_list<const char*> known, const std::string& family)
{
    for (const auto& [key, value] : params) {
        bool found = false;
        for (const char* k : known)
            found = found || key == k;
        if (!found)
            throw ConfigurationError("unknown parameter '" + key + "' for nonlinearity '" + family + "'");
        if (!std::isfinite(value))
            throw ConfigurationError("parameter '" + key + "' is not finite");
    }
}

Nonlinearity arctan_family(const Params& params, double sign, const std::string& name)
{
    require_known(params, {"amplitude", "forcing", "gradient_weight", "period"}, name);
    const double a = param(params, "amplitude", 1.0);
    const double f = param(params, "forcing", 0.0);
    const double w = param(params, "gradient_weight", 0.0);
    const double period = param(params, "period", 1.0);
    if (!(a > 0.0))
        throw ConfigurationError(name + ": amplitude must be positive");
    if (!(period > 0.0))
        throw ConfigurationError(name + ": period must be positive");

    Nonlinearity nl;
    nl.name = name;
    nl.period = period;
    nl.bound_m = a * std::numbers::pi / 2.0 + std::abs(f) + std::abs(w);
    nl.lipschitz_L = a + std::abs(w);
    nl.uses_gradient = w != 0.0;
    if (nl.uses_gradient)
        nl.pointwise = [a, f, w, sign](double, const Vec2&, double s, const Vec2& g) {
            return sign * a * std::atan(s) + f + w * std::sin(g(0)) / (1.0 + s * s);
        };
    else
        nl.pointwise = [a, f, sign](double, const Vec2&, double s, const Vec2&) { return sign * a * std::atan(s) + f; };

    const double limit = sign * a * std::numbers::pi / 2.0;
    nl.landesman_lazer = LandesmanLazerLimits{[limit, f](const Vec2&) { return limit + f; },
                                              [limit, f](const Vec2&) { return -limit + f; }};
    return nl;
}

Nonlinearity strong_res_family(const Params& params)
{
    require_known(params, {"amplitude", "orientation", "period"}, "strong_res");
    const double a = param(params, "amplitude", 1.0);
    const double o = param(params, "orientation", 1.0);
    const double period = param(params, "period", 1.0);
    if (!(a > 0.0))
        throw ConfigurationError("strong_res: amplitude must be positive");
    if (o != 1.0 && o != -1.0)
        throw ConfigurationError("strong_res: orientation must be +1 or -1");
    if (!(period > 0.0))
        throw ConfigurationError("strong_res: period must be positive");

    Nonlinearity nl;
    nl.name = "strong_res";
    nl.period = period;
    nl.bound_m = a / 2.0;
    nl.lipschitz_L = a;
    nl.pointwise = [a, o](double, const Vec2&, double s, const Vec2&) { return o * a * s / (1.0 + s * s); };
    nl.strong_resonance =
        StrongResonanceLimits{[a, o](const Vec2&) { return o * a; }, [](const Vec2&) { return 0.0; }};
    return nl;
}

Nonlinearity kernel_constant_family(const Params& params, const SpectralDecomposition* dec)
{
    require_known(params, {"amplitude", "kernel_index", "period"}, "kernel_constant");
    if (dec == nullptr)
        throw ConfigurationError("kernel_constant needs the spectral decomposition");
    const double a = param(params, "amplitude", 1.0);
    const double period = param(params, "period", 1.0);
    const int index = static_cast<int>(param(params, "kernel_index", 0.0));
    if (!(a > 0.0))
        throw ConfigurationError("kernel_constant: amplitude must be positive");
    if (!(period > 0.0))
        throw ConfigurationError("kernel_constant: period must be positive");
    if (index < 0 || index >= dec->kernel_dimension())
        throw ConfigurationError("kernel_constant: kernel_index out of range");

    const Eigen::VectorXd y0 = dec->basis().col(dec->kernel_modes()[static_cast<std::size_t>(index)]);
    const EllipticProblem problem = dec->problem();
    auto shape = std::make_shared<const Eigen::VectorXd>(y0);

    Nonlinearity nl;
    nl.name = "kernel_constant";
    nl.period = period;
    nl.bound_m = a * y0.cwiseAbs().maxCoeff();
    nl.lipschitz_L = 0.0;
    nl.pointwise = [a, problem, shape](double, const Vec2& x, double, const Vec2&) {
        return a * interpolate(problem, *shape, x);
    };
    auto limit = [a, problem, shape](const Vec2& x) { return a * interpolate(problem, *shape, x); };
    nl.landesman_lazer = LandesmanLazerLimits{limit, limit};
    return nl;
}

Nonlinearity periodic_forced_family(const Params& params)
{
    require_known(params, {"amplitude", "forcing", "period"}, "periodic_forced_arctan");
    const double a = param(params, "amplitude", 1.0);
    const double f = param(params, "forcing", 0.0);
    const double period = param(params, "period", 1.0);
    if (!(a > 0.0))
        throw ConfigurationError("periodic_forced_arctan: amplitude must be positive");
    if (!(period > 0.0))
        throw ConfigurationError("periodic_forced_arctan: period must be positive");

    Nonlinearity nl;
    nl.name = "periodic_forced_arctan";
    nl.period = period;
    nl.bound_m = 1.5 * a * std::numbers::pi / 2.0 + std::abs(f);
    nl.lipschitz_L = 1.5 * a;
    const double omega = 2.0 * std::numbers::pi / period;
    nl.pointwise = [a, f, omega](double t, const Vec2&, double s, const Vec2&) {
        return (1.0 + 0.5 * std::cos(omega * t)) * a * std::atan(s) + f;
    };
    return nl;
}

}  // namespace

Nonlinearity builtin(const std::string& name, const Params& params, const SpectralDecomposition* dec)
{
    if (name == "arctan")
        return arctan_family(params, 1.0, name);
    if (name == "neg_arctan")
        return arctan_family(params, -1.0, name);
    if (name == "strong_res")
        return strong_res_family(params);
    if (name == "kernel_constant")
        return kernel_constant_family(params, dec);
    if (name == "periodic_forced_arctan")
        return periodic_forced_family(params);
    throw ConfigurationError("unknown nonlinearity family '" + name + "'");
}

double interpolate(const EllipticProblem& problem, const Eigen::VectorXd& values, const Vec2& x)
{
    const int n = problem.grid_size;
    // value at full-grid node (i, j), boundary nodes included
    auto at = [&](int i, int j) -> double {
        if (i <= 0 || i > n)
            return 0.0;
        if (problem.kind == DomainKind::interval)
            return values(i - 1);
        if (j <= 0 || j > n)
            return 0.0;
        return values((i - 1) + n * (j - 1));
    };
    auto locate = [n](double coord, double h, int& cell, double& frac) {
        const double u = std::clamp(coord / h, 0.0, static_cast<double>(n + 1));
        cell = std::min(static_cast<int>(std::floor(u)), n);
        frac = u - cell;
    };

    int i = 0, j = 0;
    double fx = 0.0, fy = 0.0;
    locate(x(0), problem.spacing(0), i, fx);
    if (problem.kind == DomainKind::interval)
        return (1.0 - fx) * at(i, 0) + fx * at(i + 1, 0);
    locate(x(1), problem.spacing(1), j, fy);
    return (1.0 - fx) * (1.0 - fy) * at(i, j) + fx * (1.0 - fy) * at(i + 1, j) + (1.0 - fx) * fy * at(i, j + 1) +
           fx * fy * at(i + 1, j + 1);
}

// ---------------------------------------------------------------------------

NiemytzkiOperator::NiemytzkiOperator(NonlinearityPtr nl, DecompositionPtr dec)
    : nl_(std::move(nl)), dec_(std::move(dec))
{
    if (!nl_ || !dec_)
        throw ConfigurationError("Niemytzki operator needs a nonlinearity and a decomposition");
    const auto& problem = dec_->problem();
    nodes_.reserve(static_cast<std::size_t>(problem.unknowns()));
    for (int i = 0; i < problem.unknowns(); ++i)
        nodes_.push_back(problem.node(i));
    if (nl_->uses_gradient)
        gradient_ = gradient_operators(problem);
}

Eigen::VectorXd NiemytzkiOperator::values_with_gradient(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& gx,
                                                        const Eigen::VectorXd& gy) const
{
    const Eigen::Index n = y.size();
    if (n != static_cast<Eigen::Index>(nodes_.size()))
        throw DimensionError("grid function does not match the Niemytzki operator grid");
    Eigen::VectorXd out(n);
    Vec2 grad = Vec2::Zero();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (gx.size() == n)
            grad(0) = gx(i);
        if (gy.size() == n)
            grad(1) = gy(i);
        const double v = nl_->pointwise(t, nodes_[static_cast<std::size_t>(i)], y(i), grad);
        if (!std::isfinite(v))
            throw NonlinearityDomainError(nl_->name + " returned a non-finite value at t = " + std::to_string(t));
        out(i) = v;
    }
    return out;
}

Eigen::VectorXd NiemytzkiOperator::values(double t, const Eigen::VectorXd& y) const
{
    if (!nl_->uses_gradient)
        return values_with_gradient(t, y, Eigen::VectorXd(), Eigen::VectorXd());
    Eigen::VectorXd gx = gradient_[0] * y;
    Eigen::VectorXd gy = gradient_[1].size() > 0 ? Eigen::VectorXd(gradient_[1] * y) : Eigen::VectorXd();
    return values_with_gradient(t, y, gx, gy);
}

Eigen::VectorXd NiemytzkiOperator::spectral(double t, const Eigen::VectorXd& coefficients) const
{
    return dec_->to_spectral(values(t, dec_->to_values(coefficients)));
}

GridFunction apply(const Nonlinearity& nl, const DecompositionPtr& dec, double t, const GridFunction& u)
{
    if (u.decomposition() != dec && (u.size() != dec->size()))
        throw DimensionError("grid function does not match the decomposition");
    NiemytzkiOperator op(std::make_shared<const Nonlinearity>(nl), dec);
    return GridFunction::from_values(dec, op.values(t, u.values()));
}

// ---------------------------------------------------------------------------

ProbeReport probe(const Nonlinearity& nl, const EllipticProblem& problem, int samples, std::uint64_t seed,
                  double range)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> sym(-range, range);
    const bool planar = problem.kind == DomainKind::rectangle;

    ProbeReport report;
    report.samples = samples;
    for (int n = 0; n < samples; ++n) {
        const double t = nl.period * unit(rng);
        Vec2 x(problem.length_x * unit(rng), planar ? problem.length_y * unit(rng) : 0.0);
        const double s1 = sym(rng);
        Vec2 g1(sym(rng), planar ? sym(rng) : 0.0);

        // half of the pairs are local perturbations, half are far apart
        double s2 = 0.0;
        Vec2 g2;
        if (n % 2 == 0) {
            const double r = std::pow(10.0, -6.0 * unit(rng));
            s2 = s1 + r * (2.0 * unit(rng) - 1.0);
            g2 = g1 + r * Vec2(2.0 * unit(rng) - 1.0, planar ? 2.0 * unit(rng) - 1.0 : 0.0);
        } else {
            s2 = sym(rng);
            g2 = Vec2(sym(rng), planar ? sym(rng) : 0.0);
        }

        const double v1 = nl.pointwise(t, x, s1, g1);
        const double v2 = nl.pointwise(t, x, s2, g2);
        const double shifted = nl.pointwise(t + nl.period, x, s1, g1);

        report.periodicity_defect = std::max(report.periodicity_defect, std::abs(shifted - v1));
        report.bound_excess = std::max({report.bound_excess, std::abs(v1) - nl.bound_m, std::abs(v2) - nl.bound_m});
        const double dist = std::abs(s1 - s2) + (g1 - g2).norm();
        if (dist > 0.0)
            report.lipschitz_ratio = std::max(report.lipschitz_ratio, std::abs(v1 - v2) / dist);
    }
    return report;
}

}  // namespace resonance
