#include "resonance/poincare.hpp"

#include "resonance/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <ostream>

namespace resonance {

const char* to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::certified:
        return "certified";
    case SolveStatus::max_iterations:
        return "max_iterations";
    case SolveStatus::degenerate:
        return "degenerate";
    case SolveStatus::diverged:
        return "diverged";
    }
    return "?";
}

GridFunction poincare_map(const EvolutionSetup& setup, const GridFunction& x)
{
    EtdStepper stepper(setup);
    return GridFunction::from_spectral(setup.dec, stepper.advance(0.0, x.spectral(), setup.period()));
}

namespace {

int clip_cut(int mode_cut, int modes)
{
    return std::clamp(mode_cut, 1, modes);
}

JacobianInfo jacobian_at(const EtdStepper& stepper, const Eigen::VectorXd& x, const Eigen::VectorXd& phi_x, int cut,
                         double fd_scale)
{
    const auto& dec = *stepper.setup().dec;
    const double T = stepper.setup().period();
    const double h = fd_scale * (1.0 + alpha_norm_of(dec, x));

    JacobianInfo info;
    info.jacobian.resize(cut, cut);
    for (int j = 0; j < cut; ++j) {
        Eigen::VectorXd xp = x;
        xp(j) += h;
        const double step = xp(j) - x(j);
        const Eigen::VectorXd phi_p = stepper.advance(0.0, xp, T);
        info.jacobian.col(j) = (phi_p.head(cut) - phi_x.head(cut)) / step;
    }
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(cut, cut) - info.jacobian;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    info.min_singular_value = svd.singularValues()(cut - 1);
    const double det = m.fullPivLu().determinant();
    info.sign = det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
    return info;
}

}  // namespace

JacobianInfo truncated_jacobian(const EvolutionSetup& setup, const GridFunction& x, int mode_cut, double fd_scale)
{
    EtdStepper stepper(setup);
    const Eigen::VectorXd phi_x = stepper.advance(0.0, x.spectral(), setup.period());
    return jacobian_at(stepper, x.spectral(), phi_x, clip_cut(mode_cut, setup.dec->size()), fd_scale);
}

PeriodicOrbit find_fixed_point(const EvolutionSetup& setup, const GridFunction& x0, const NewtonOptions& options)
{
    const auto& dec = *setup.dec;
    const int n = dec.size();
    const int cut = clip_cut(options.mode_cut, n);
    const double T = setup.period();
    EtdStepper stepper(setup);

    PeriodicOrbit orbit;
    orbit.epsilon = setup.epsilon;
    orbit.mode_cut = cut;

    Eigen::VectorXd x = x0.spectral();
    auto finish = [&](SolveStatus status, std::string message, double residual) {
        orbit.status = status;
        orbit.message = std::move(message);
        orbit.residual = residual;
        orbit.fixed_point = GridFunction::from_spectral(setup.dec, x);
        return orbit;
    };

    try {
        Eigen::VectorXd phi = stepper.advance(0.0, x, T);
        Eigen::VectorXd r = phi - x;
        double res = alpha_norm_of(dec, r);

        for (int it = 0;; ++it) {
            orbit.iterations = it;
            const JacobianInfo jac = jacobian_at(stepper, x, phi, cut, options.fd_scale);
            orbit.jacobian_sign = jac.sign;
            orbit.min_singular_value = jac.min_singular_value;
            if (jac.min_singular_value < options.degenerate_threshold)
                return finish(SolveStatus::degenerate,
                              fmt::format("I - DPhi_T is singular (sigma_min = {:.3e})", jac.min_singular_value), res);

            if (res <= options.tolerance)
                break;
            if (it >= options.max_iterations)
                return finish(SolveStatus::max_iterations,
                              fmt::format("no convergence in {} iterations", options.max_iterations), res);

            const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(cut, cut) - jac.jacobian;
            const Eigen::VectorXd d = m.fullPivLu().solve(r.head(cut));

            bool accepted = false;
            double scale = 1.0;
            for (int s = 0; s <= options.line_search_halvings; ++s, scale *= 0.5) {
                Eigen::VectorXd trial = x;
                trial.head(cut) += scale * d;
                trial.tail(n - cut) = phi.tail(n - cut);
                Eigen::VectorXd phi_trial;
                try {
                    phi_trial = stepper.advance(0.0, trial, T);
                } catch (const DivergenceError&) {
                    continue;
                }
                const Eigen::VectorXd r_trial = phi_trial - trial;
                const double res_trial = alpha_norm_of(dec, r_trial);
                if (res_trial < res) {
                    x = std::move(trial);
                    phi = std::move(phi_trial);
                    r = r_trial;
                    res = res_trial;
                    accepted = true;
                    break;
                }
            }
            if (!accepted)
                return finish(SolveStatus::max_iterations,
                              fmt::format("line search stalled at residual {:.3e}", res), res);
            if (alpha_norm_of(dec, x) > 1e12)
                return finish(SolveStatus::diverged, "iterates left every bounded set", res);
        }

        finish(SolveStatus::certified, "converged", res);
        orbit.trajectory = integrate(setup, orbit.fixed_point, T, std::max(2, options.trajectory_samples));
        for (const auto& state : orbit.trajectory.states) {
            orbit.q_bound = std::max(orbit.q_bound, alpha_norm_of(dec, project_coefficients(dec, state.spectral(), Part::Q)));
            orbit.p_range = std::max(orbit.p_range, project_coefficients(dec, state.spectral(), Part::P).norm());
        }
        return orbit;
    } catch (const DivergenceError& e) {
        return finish(SolveStatus::diverged, e.what(), std::numeric_limits<double>::infinity());
    }
}

AprioriReport apriori_bound(const EvolutionSetup& setup, const PeriodicOrbit& orbit)
{
    if (!orbit.certified())
        throw Error("a-priori bound requested for an uncertified orbit");
    const auto& dec = *setup.dec;
    const double alpha = dec.alpha();
    const double T = setup.period();

    AprioriReport report;
    report.m = setup.nonlinearity ? setup.nonlinearity->bound_m * std::sqrt(dec.problem().measure()) : 0.0;
    report.c = dec.decay_constant();
    for (int j : dec.minus_modes())
        report.C_prime = std::max(report.C_prime, dec.alpha_weights()(j));

    // M = 1 and ||Q+|| = ||Q-|| = 1 for orthogonal spectral projections
    report.R_plus = report.m * std::pow(T, -alpha) * (std::exp(-report.c * T) / report.c + T / (1.0 - alpha));
    report.R_minus = dec.minus_modes().empty() ? 0.0 : report.m * report.C_prime / report.c;
    report.R = report.R_plus + report.R_minus;
    report.q_bound = orbit.q_bound;
    report.slack = report.R - report.q_bound;
    return report;
}

std::vector<PeriodicOrbit> sweep_epsilon(const EvolutionSetup& setup_template, const std::vector<double>& eps_list,
                                         const GridFunction& x0, const NewtonOptions& options)
{
    for (double eps : eps_list)
        if (!(eps > 0.0 && eps <= 1.0))
            throw ConfigurationError("sweep values must lie in (0, 1]");

    std::vector<PeriodicOrbit> orbits;
    GridFunction start = x0;
    for (double eps : eps_list) {
        orbits.push_back(find_fixed_point(setup_template.with_epsilon(eps), start, options));
        if (orbits.back().certified())
            start = orbits.back().fixed_point;
    }
    return orbits;
}

void write_orbit_csv(std::ostream& out, const PeriodicOrbit& orbit)
{
    write_trajectory_csv(out, orbit.trajectory, TrajectoryColumns::values);
}

std::string orbit_summary_json(const PeriodicOrbit& orbit, const AprioriReport& bound)
{
    auto num = [](double v) { return std::isfinite(v) ? fmt::format("{}", v) : std::string("null"); };
    return fmt::format(
        "{{\"epsilon\": {}, \"status\": \"{}\", \"residual\": {}, \"jacobian_sign\": {}, \"q_bound\": {}, "
        "\"R\": {}, \"p_range\": {}}}",
        num(orbit.epsilon), to_string(orbit.status), num(orbit.residual), orbit.jacobian_sign, num(orbit.q_bound),
        num(bound.R), num(orbit.p_range));
}

}  // namespace resonance
