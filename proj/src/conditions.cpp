#include "resonance/conditions.hpp"

#include "resonance/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace resonance {

const char* to_string(Condition c)
{
    switch (c) {
    case Condition::G1:
        return "G1";
    case Condition::G2:
        return "G2";
    case Condition::LL1:
        return "LL1";
    case Condition::LL2:
        return "LL2";
    case Condition::SR1:
        return "SR1";
    case Condition::SR2:
        return "SR2";
    }
    return "?";
}

const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::yes:
        return "yes";
    case Verdict::no:
        return "no";
    case Verdict::inconclusive:
        return "inconclusive";
    }
    return "?";
}

namespace {

// unit kernel directions in kernel coordinates
std::vector<Eigen::VectorXd> kernel_directions(int dim, int samples, std::mt19937_64& rng)
{
    std::vector<Eigen::VectorXd> out;
    if (dim == 1) {
        out.push_back(Eigen::VectorXd::Constant(1, 1.0));
        out.push_back(Eigen::VectorXd::Constant(1, -1.0));
    } else if (dim == 2) {
        for (int m = 0; m < samples; ++m) {
            const double theta = 2.0 * std::numbers::pi * m / samples;
            Eigen::VectorXd z(2);
            z << std::cos(theta), std::sin(theta);
            out.push_back(z);
        }
    } else {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int m = 0; m < samples; ++m) {
            Eigen::VectorXd z(dim);
            for (int i = 0; i < dim; ++i)
                z(i) = normal(rng);
            out.push_back(z / z.norm());
        }
    }
    return out;
}

Eigen::VectorXd kernel_values(const SpectralDecomposition& dec, const Eigen::VectorXd& z)
{
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dec.size());
    for (int i = 0; i < z.size(); ++i)
        v += z(i) * dec.basis().col(dec.kernel_modes()[static_cast<std::size_t>(i)]);
    return v;
}

// Q-space samples with ||y||_alpha <= B: origin, axis extremes, then random
std::vector<Eigen::VectorXd> ball_samples(const SpectralDecomposition& dec, double B, int count, std::mt19937_64& rng)
{
    std::vector<int> q_modes = dec.minus_modes();
    q_modes.insert(q_modes.end(), dec.plus_modes().begin(), dec.plus_modes().end());
    std::sort(q_modes.begin(), q_modes.end());

    std::vector<Eigen::VectorXd> out;
    const int n = dec.size();
    out.push_back(Eigen::VectorXd::Zero(n));
    if (q_modes.empty() || B <= 0.0)
        return out;

    const int axes = std::min<int>(static_cast<int>(q_modes.size()), std::max(0, (count - 1) / 4));
    for (int a = 0; a < axes && static_cast<int>(out.size()) + 2 <= count; ++a) {
        const int j = q_modes[static_cast<std::size_t>(a)];
        Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
        c(j) = B / dec.alpha_weights()(j);
        out.push_back(c);
        out.push_back(-c);
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    while (static_cast<int>(out.size()) < count) {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
        for (int j : q_modes)
            c(j) = normal(rng) / dec.alpha_weights()(j);
        c *= B * std::max(unit(rng), 1e-3) / alpha_norm_of(dec, c);
        out.push_back(c);
    }
    return out;
}

}  // namespace

ConditionReport check_geometric(const DecompositionPtr& dec, const NonlinearityPtr& nl, Condition which,
                                double B_radius, const std::vector<double>& R_grid, const GeometricOptions& options)
{
    if (which != Condition::G1 && which != Condition::G2)
        throw ConfigurationError("check_geometric tests G1 or G2 only");
    if (R_grid.empty())
        throw ConfigurationError("R_grid must not be empty");
    if (dec->kernel_dimension() < 1)
        throw ConfigurationError("empty kernel");

    std::vector<double> radii = R_grid;
    std::sort(radii.begin(), radii.end());
    const double orientation = which == Condition::G1 ? 1.0 : -1.0;

    std::mt19937_64 rng(options.seed);
    const auto directions = kernel_directions(dec->kernel_dimension(), options.sphere_samples, rng);
    const auto ys = ball_samples(*dec, B_radius, options.y_samples, rng);
    const NiemytzkiOperator op(nl, dec);
    const bool with_gradient = nl->uses_gradient;
    const auto& grad = op.gradient();

    std::vector<Eigen::VectorXd> dir_values, y_values;
    std::vector<std::array<Eigen::VectorXd, 2>> dir_grad, y_grad;
    for (const auto& z : directions) {
        dir_values.push_back(kernel_values(*dec, z));
        if (with_gradient)
            dir_grad.push_back({grad[0] * dir_values.back(),
                                grad[1].size() > 0 ? Eigen::VectorXd(grad[1] * dir_values.back()) : Eigen::VectorXd()});
    }
    for (const auto& c : ys) {
        y_values.push_back(dec->to_values(c));
        if (with_gradient)
            y_grad.push_back({grad[0] * y_values.back(),
                              grad[1].size() > 0 ? Eigen::VectorXd(grad[1] * y_values.back()) : Eigen::VectorXd()});
    }

    struct RadiusResult {
        double worst = std::numeric_limits<double>::infinity();  // min of orientation * value
        Witness witness;
        bool violated = false;
    };
    std::vector<RadiusResult> results(radii.size());
    const double T = nl->period;

    for (std::size_t r = 0; r < radii.size(); ++r) {
        const double R = radii[r];
        auto& res = results[r];
        for (int m = 0; m < options.t_samples; ++m) {
            const double t = T * m / options.t_samples;
            for (std::size_t d = 0; d < dir_values.size(); ++d) {
                for (std::size_t y = 0; y < y_values.size(); ++y) {
                    const Eigen::VectorXd u = R * dir_values[d] + y_values[y];
                    Eigen::VectorXd f;
                    if (with_gradient) {
                        Eigen::VectorXd gx = R * dir_grad[d][0] + y_grad[y][0];
                        Eigen::VectorXd gy = dir_grad[d][1].size() > 0 ? Eigen::VectorXd(R * dir_grad[d][1] + y_grad[y][1])
                                                                       : Eigen::VectorXd();
                        f = op.values_with_gradient(t, u, gx, gy);
                    } else {
                        f = op.values(t, u);
                    }
                    const double value = dec->inner(f, dir_values[d]);
                    const double q = orientation * value;
                    if (q < res.worst) {
                        res.worst = q;
                        res.witness = Witness{t, R * directions[d], alpha_norm_of(*dec, ys[y]), Vec2::Zero(), value};
                    }
                }
            }
        }
        res.violated = res.worst <= -kMarginFloor;
    }

    ConditionReport report;
    report.condition = which;
    const auto& last = results.back();
    report.margin = orientation * last.worst;
    if (last.worst > kMarginFloor) {
        report.holds = Verdict::yes;
        std::size_t from = radii.size() - 1;
        while (from > 0 && results[from - 1].worst > kMarginFloor)
            --from;
        report.R_used = radii[from];
        report.note = fmt::format("sign uniform for R >= {}", report.R_used);
    } else if (std::all_of(results.begin(), results.end(), [](const RadiusResult& r) { return r.violated; })) {
        report.holds = Verdict::no;
        report.witness = last.witness;
        report.R_used = radii.back();
        report.note = "opposite sign at every tested radius";
    } else {
        report.holds = Verdict::inconclusive;
        report.R_used = radii.back();
        report.note = "sign not stabilized at the largest radius";
    }
    return report;
}

ConditionReport check_landesman_lazer(const SpectralDecomposition& dec, const Nonlinearity& nl, Condition which,
                                      int sphere_samples)
{
    if (which != Condition::LL1 && which != Condition::LL2)
        throw ConfigurationError("check_landesman_lazer tests LL1 or LL2 only");
    if (!nl.landesman_lazer)
        throw ConfigurationError("nonlinearity '" + nl.name + "' declares no limits g+ and g-");
    const auto& limits = *nl.landesman_lazer;
    const double orientation = which == Condition::LL1 ? 1.0 : -1.0;
    const auto& problem = dec.problem();

    std::vector<double> gp(static_cast<std::size_t>(dec.size())), gm(static_cast<std::size_t>(dec.size()));
    for (int i = 0; i < dec.size(); ++i) {
        gp[static_cast<std::size_t>(i)] = limits.g_plus(problem.node(i));
        gm[static_cast<std::size_t>(i)] = limits.g_minus(problem.node(i));
    }

    std::mt19937_64 rng(1);
    ConditionReport report;
    report.condition = which;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& z : kernel_directions(dec.kernel_dimension(), sphere_samples, rng)) {
        const Eigen::VectorXd y = kernel_values(dec, z);
        double integral = 0.0;
        for (int i = 0; i < dec.size(); ++i) {
            const double yi = y(i);
            integral += yi > 0.0 ? gp[static_cast<std::size_t>(i)] * yi : (yi < 0.0 ? gm[static_cast<std::size_t>(i)] * yi : 0.0);
        }
        integral *= dec.weight();
        if (orientation * integral < worst) {
            worst = orientation * integral;
            report.witness = Witness{0.0, z, 0.0, Vec2::Zero(), integral};
        }
    }
    report.margin = orientation * worst;
    if (worst >= kMarginFloor) {
        report.holds = Verdict::yes;
        report.witness.reset();
    } else {
        report.holds = Verdict::no;
    }
    report.note = fmt::format("worst integral {}", report.margin);
    return report;
}

ConditionReport check_strong_resonance(const SpectralDecomposition& dec, const Nonlinearity& nl, Condition which,
                                       int t_samples)
{
    if (which != Condition::SR1 && which != Condition::SR2)
        throw ConfigurationError("check_strong_resonance tests SR1 or SR2 only");
    if (!nl.strong_resonance)
        throw ConfigurationError("nonlinearity '" + nl.name + "' declares no limit g_inf and bound q");
    const auto& limits = *nl.strong_resonance;
    const double orientation = which == Condition::SR1 ? 1.0 : -1.0;
    const auto& problem = dec.problem();

    static const double s_values[] = {0.0, 1e-3, -1e-3, 0.1, -0.1, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0,
                                      10.0, -10.0, 100.0, -100.0, 1e4, -1e4, 1e6, -1e6};
    const Vec2 grads[] = {Vec2(0, 0), Vec2(1, 1), Vec2(-1, -1), Vec2(50, -50), Vec2(-50, 50)};

    ConditionReport report;
    report.condition = which;
    double worst = std::numeric_limits<double>::infinity();
    for (int m = 0; m < t_samples; ++m) {
        const double t = nl.period * m / t_samples;
        for (int i = 0; i < dec.size(); ++i) {
            const Vec2 x = problem.node(i);
            const double q = limits.q(x);
            for (double s : s_values) {
                for (const Vec2& g : grads) {
                    const double v = orientation * (nl.pointwise(t, x, s, g) * s - q);
                    if (v < worst) {
                        worst = v;
                        Witness w;
                        w.t = t;
                        w.kernel = Eigen::VectorXd::Constant(1, s);
                        w.point = x;
                        w.value = nl.pointwise(t, x, s, g) * s;
                        report.witness = w;
                    }
                }
            }
        }
    }
    const bool pointwise_ok = worst >= -kMarginFloor;

    // trapezoidal rule over the closed domain, boundary nodes included
    const int n = problem.grid_size;
    auto weight = [n](int i) { return (i == 0 || i == n + 1) ? 0.5 : 1.0; };
    double integral = 0.0;
    if (problem.kind == DomainKind::interval) {
        const double h = problem.spacing(0);
        for (int i = 0; i <= n + 1; ++i)
            integral += weight(i) * limits.g_infinity(Vec2(i * h, 0.0));
        integral *= h;
    } else {
        const double hx = problem.spacing(0), hy = problem.spacing(1);
        for (int j = 0; j <= n + 1; ++j)
            for (int i = 0; i <= n + 1; ++i)
                integral += weight(i) * weight(j) * limits.g_infinity(Vec2(i * hx, j * hy));
        integral *= hx * hy;
    }

    report.margin = integral;
    const bool integral_ok = orientation * integral >= kMarginFloor;
    report.holds = pointwise_ok && integral_ok ? Verdict::yes : Verdict::no;
    if (report.holds == Verdict::yes)
        report.witness.reset();
    else if (pointwise_ok)
        report.witness.reset();
    report.note = fmt::format("min pointwise margin {}, integral of g_inf {}", worst, integral);
    return report;
}

}  // namespace resonance
