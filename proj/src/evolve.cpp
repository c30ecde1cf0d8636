#include "resonance/evolve.hpp"

#include "resonance/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <ostream>
#include <random>

namespace resonance {

const char* to_string(Scheme s)
{
    return s == Scheme::exponential_euler ? "exponential_euler" : "etd2rk";
}

Scheme parse_scheme(const std::string& name)
{
    if (name == "exponential_euler" || name == "euler")
        return Scheme::exponential_euler;
    if (name == "etd2rk")
        return Scheme::etd2rk;
    throw ConfigurationError("unknown time scheme '" + name + "'");
}

EvolutionSetup EvolutionSetup::make(DecompositionPtr dec, NonlinearityPtr nl, double epsilon, Scheme scheme, double dt)
{
    EvolutionSetup s;
    s.dec = std::move(dec);
    s.nonlinearity = std::move(nl);
    s.lambda = s.dec->lambda();
    s.epsilon = epsilon;
    s.scheme = scheme;
    s.dt = dt > 0.0 ? dt : s.period() / 512.0;
    s.validate();
    return s;
}

double EvolutionSetup::period() const
{
    return nonlinearity ? nonlinearity->period : 1.0;
}

void EvolutionSetup::validate() const
{
    if (!dec)
        throw ConfigurationError("evolution setup without a decomposition");
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw ConfigurationError("time step must be positive");
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw ConfigurationError("epsilon must lie in [0, 1]");
}

EvolutionSetup EvolutionSetup::with_epsilon(double eps) const
{
    EvolutionSetup s = *this;
    s.epsilon = eps;
    s.validate();
    return s;
}

GridFunction semigroup_apply(const SpectralDecomposition& dec, double t, const GridFunction& u, bool shifted)
{
    if (u.size() != dec.size())
        throw DimensionError("semigroup applied to a grid function from a different grid");
    if (t < 0.0) {
        const double plus = project_coefficients(dec, u.spectral(), Part::Q_plus).norm();
        if (plus > 1e-12 * std::max(1.0, u.spectral().norm()))
            throw GroupExtensionError("backward evolution of data with an X+ component");
    }
    const double shift = shifted ? dec.lambda() : 0.0;
    Eigen::VectorXd c = u.spectral();
    for (int j = 0; j < c.size(); ++j) {
        if (t < 0.0 && dec.mode_class(j) == ModeClass::plus) {
            c(j) = 0.0;
            continue;
        }
        c(j) *= std::exp((shift - dec.eigenvalues()(j)) * t);
    }
    return GridFunction::from_spectral(u.decomposition(), std::move(c));
}

double phi1(double x)
{
    if (std::abs(x) < 1e-4)
        return 1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0 + x * x * x * x / 120.0;
    return std::expm1(x) / x;
}

double phi2(double x)
{
    if (std::abs(x) < 1e-4)
        return 0.5 + x / 6.0 + x * x / 24.0 + x * x * x / 120.0 + x * x * x * x / 720.0;
    return (std::expm1(x) - x) / (x * x);
}

// ---------------------------------------------------------------------------

EtdStepper::EtdStepper(const EvolutionSetup& setup) : setup_(setup)
{
    setup_.validate();
    z_ = (Eigen::VectorXd::Constant(setup_.dec->size(), setup_.lambda) - setup_.dec->eigenvalues());
    if (setup_.nonlinearity && setup_.epsilon != 0.0)
        op_ = std::make_unique<NiemytzkiOperator>(setup_.nonlinearity, setup_.dec);
    nominal_ = weights(setup_.dt);
}

EtdStepper::Weights EtdStepper::weights(double h) const
{
    Weights w;
    const Eigen::Index n = z_.size();
    w.e.resize(n);
    w.p1.resize(n);
    w.p2.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double x = z_(j) * h;
        w.e(j) = std::exp(x);
        w.p1(j) = phi1(x);
        w.p2(j) = phi2(x);
    }
    return w;
}

Eigen::VectorXd EtdStepper::forcing(double t, const Eigen::VectorXd& c) const
{
    if (!op_)
        return Eigen::VectorXd::Zero(c.size());
    return setup_.epsilon * op_->spectral(t, c);
}

Eigen::VectorXd EtdStepper::step(double t, const Eigen::VectorXd& c, double h) const
{
    const Weights partial = h == setup_.dt ? Weights{} : weights(h);
    const Weights& w = h == setup_.dt ? nominal_ : partial;

    Eigen::VectorXd out;
    if (!op_) {
        out = w.e.cwiseProduct(c);
    } else {
        const Eigen::VectorXd fn = forcing(t, c);
        Eigen::VectorXd a = w.e.cwiseProduct(c) + h * w.p1.cwiseProduct(fn);
        if (setup_.scheme == Scheme::exponential_euler) {
            out = std::move(a);
        } else {
            const Eigen::VectorXd fa = forcing(t + h, a);
            out = a + h * w.p2.cwiseProduct(fa - fn);
        }
    }
    if (!out.allFinite())
        throw DivergenceError("non-finite state after step ending at t = " + std::to_string(t + h), t + h);
    return out;
}

Eigen::VectorXd EtdStepper::advance(double t0, Eigen::VectorXd c, double duration) const
{
    const double dt = setup_.dt;
    // number of full steps, tolerant to the duration being a roundoff multiple of dt
    const double ratio = duration / dt;
    long full = static_cast<long>(std::floor(ratio + 1e-9));
    double rest = duration - static_cast<double>(full) * dt;
    if (std::abs(rest) <= 1e-12 * std::max(1.0, duration))
        rest = 0.0;
    if (rest < 0.0) {
        --full;
        rest += dt;
    }
    for (long m = 0; m < full; ++m)
        c = step(t0 + static_cast<double>(m) * dt, c, dt);
    if (rest > 0.0)
        c = step(t0 + static_cast<double>(full) * dt, c, rest);
    return c;
}

GridFunction step(const EvolutionSetup& setup, double t, const GridFunction& u)
{
    EtdStepper stepper(setup);
    return GridFunction::from_spectral(u.decomposition(), stepper.step(t, u.spectral(), setup.dt));
}

Trajectory integrate(const EvolutionSetup& setup, const GridFunction& u0, double t_final, int n_samples)
{
    if (!(t_final > 0.0))
        throw ConfigurationError("t_final must be positive");
    if (n_samples < 2)
        throw ConfigurationError("at least two samples are required");
    if (u0.size() != setup.dec->size())
        throw DimensionError("initial data does not match the setup grid");

    EtdStepper stepper(setup);
    Trajectory traj;
    traj.scheme = setup.scheme;
    traj.dt = setup.dt;
    traj.epsilon = setup.epsilon;
    traj.times.reserve(static_cast<std::size_t>(n_samples));
    traj.states.reserve(static_cast<std::size_t>(n_samples));

    Eigen::VectorXd c = u0.spectral();
    traj.times.push_back(0.0);
    traj.states.push_back(GridFunction::from_spectral(setup.dec, c));
    for (int i = 1; i < n_samples; ++i) {
        const double t0 = t_final * (i - 1) / (n_samples - 1);
        const double t1 = i == n_samples - 1 ? t_final : t_final * i / (n_samples - 1);
        c = stepper.advance(t0, std::move(c), t1 - t0);
        traj.times.push_back(t1);
        traj.states.push_back(GridFunction::from_spectral(setup.dec, c));
    }
    return traj;
}

double tail_energy(const SpectralDecomposition& dec, const Trajectory& traj, int mode_cut, double t_start)
{
    if (mode_cut < 0 || mode_cut >= dec.size())
        throw ConfigurationError("mode_cut must lie in [0, modes)");
    const Eigen::VectorXd& w = dec.alpha_weights();
    double reference = 0.0;
    for (const auto& s : traj.states)
        reference = std::max(reference, w.cwiseProduct(s.spectral()).squaredNorm());
    if (reference == 0.0)
        return 0.0;

    const int tail = dec.size() - mode_cut;
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        if (traj.times[i] < t_start)
            continue;
        const Eigen::VectorXd& c = traj.states[i].spectral();
        const double high = w.tail(tail).cwiseProduct(c.tail(tail)).squaredNorm();
        worst = std::max(worst, high / reference);
    }
    return worst;
}

// ---------------------------------------------------------------------------

namespace {

// max over modes and s in (0, T] of s^a (mu+delta)^a e^{(lambda - mu) s}
double smoothing_constant(const SpectralDecomposition& dec, double lambda, double T)
{
    const double a = dec.alpha();
    double best = 0.0;
    for (int j = 0; j < dec.size(); ++j) {
        const double z = lambda - dec.eigenvalues()(j);
        const double s = z < 0.0 ? std::min(a / -z, T) : T;
        best = std::max(best, std::pow(s, a) * dec.alpha_weights()(j) * std::exp(z * s));
    }
    return best;
}

// ||D|| in the Euclidean norm for the stacked gradient operators
double gradient_norm(const SpectralDecomposition& dec)
{
    const auto grad = gradient_operators(dec.problem());
    Eigen::MatrixXd gram = Eigen::MatrixXd(grad[0].transpose() * grad[0]);
    if (grad[1].size() > 0)
        gram += Eigen::MatrixXd(grad[1].transpose() * grad[1]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

}  // namespace

ContinuityReport continuity_check(const EvolutionSetup& setup, const GridFunction& u0, double t_final,
                                  double perturbation, std::uint64_t seed, int n_samples)
{
    const auto& dec = *setup.dec;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd eta(dec.size());
    for (int j = 0; j < dec.size(); ++j)
        eta(j) = normal(rng);
    eta *= perturbation / alpha_norm_of(dec, eta);

    const GridFunction v0 = u0 + GridFunction::from_spectral(setup.dec, eta);
    const Trajectory a = integrate(setup, u0, t_final, n_samples);
    const Trajectory b = integrate(setup, v0, t_final, n_samples);

    ContinuityReport report;
    report.perturbation = perturbation;
    for (std::size_t i = 0; i < a.states.size(); ++i)
        report.max_difference = std::max(report.max_difference, (a.states[i] - b.states[i]).norm_alpha());
    report.measured_C = report.max_difference / perturbation;

    double L = setup.nonlinearity ? setup.nonlinearity->lipschitz_L : 0.0;
    if (setup.nonlinearity && setup.nonlinearity->uses_gradient)
        L *= 1.0 + gradient_norm(dec);
    const double eL = setup.epsilon * L;
    const double a_exp = dec.alpha();
    const double z_max = setup.lambda - dec.eigenvalues()(0);
    const double lower = std::pow(dec.eigenvalues()(0) + dec.delta(), -a_exp);
    report.bound_C = std::exp(z_max * t_final) + eL * smoothing_constant(dec, setup.lambda, t_final) * lower *
                                                     std::exp((z_max + eL) * t_final) *
                                                     std::pow(t_final, 1.0 - a_exp) / (1.0 - a_exp);
    return report;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, TrajectoryColumns columns)
{
    if (traj.states.empty())
        return;
    const int n = traj.states.front().size();
    const int width = columns == TrajectoryColumns::values ? n : std::min(16, n);
    const char* prefix = columns == TrajectoryColumns::values ? "u" : "c";
    out << "t";
    for (int j = 0; j < width; ++j)
        out << ',' << prefix << j;
    out << '\n';
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const Eigen::VectorXd& v =
            columns == TrajectoryColumns::values ? traj.states[i].values() : traj.states[i].spectral();
        out << fmt::format("{}", traj.times[i]);
        for (int j = 0; j < width; ++j)
            out << ',' << fmt::format("{}", v(j));
        out << '\n';
    }
}

}  // namespace resonance
