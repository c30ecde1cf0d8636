#pragma once

#include "resonance/elliptic.hpp"
#include "resonance/nonlinearity.hpp"

#include <iosfwd>
#include <memory>
#include <vector>

namespace resonance {

enum class Scheme { exponential_euler, etd2rk };

const char* to_string(Scheme s);
Scheme parse_scheme(const std::string& name);

/// u' = -A u + lambda u + eps F(t, u), integrated in the eigenbasis.
struct EvolutionSetup {
    DecompositionPtr dec;
    NonlinearityPtr nonlinearity;  ///< may be null, meaning F = 0
    double lambda = 0.0;
    double epsilon = 0.0;
    double dt = 0.0;
    Scheme scheme = Scheme::etd2rk;

    /// lambda taken from the decomposition, dt = T / 512 unless given.
    static EvolutionSetup make(DecompositionPtr dec, NonlinearityPtr nl, double epsilon,
                               Scheme scheme = Scheme::etd2rk, double dt = 0.0);

    /// Period of the nonlinearity (1 when F = 0).
    double period() const;
    void validate() const;
    EvolutionSetup with_epsilon(double eps) const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<GridFunction> states;
    Scheme scheme = Scheme::etd2rk;
    double dt = 0.0;
    double epsilon = 0.0;
};

/// e^{-A t} u, or e^{(lambda I - A) t} u when `shifted`. Negative t is only
/// allowed for data without an X+ component.
GridFunction semigroup_apply(const SpectralDecomposition& dec, double t, const GridFunction& u, bool shifted);

/// phi_1(x) = (e^x - 1) / x and phi_2(x) = (e^x - 1 - x) / x^2 with Taylor fallback.
double phi1(double x);
double phi2(double x);

/// Exponential time differencing on spectral coefficients. Caches the
/// coefficient vectors for the nominal step; partial steps are computed on the fly.
class EtdStepper {
public:
    explicit EtdStepper(const EvolutionSetup& setup);

    const EvolutionSetup& setup() const { return setup_; }
    Eigen::VectorXd step(double t, const Eigen::VectorXd& c, double h) const;
    /// Integrate from t0 over `duration` with nominal steps and one final partial step.
    Eigen::VectorXd advance(double t0, Eigen::VectorXd c, double duration) const;
    /// eps * F^(t, c) in spectral coordinates (zero when F = 0 or eps = 0).
    Eigen::VectorXd forcing(double t, const Eigen::VectorXd& c) const;

private:
    struct Weights {
        Eigen::VectorXd e, p1, p2;
    };
    Weights weights(double h) const;

    EvolutionSetup setup_;
    Eigen::VectorXd z_;
    std::unique_ptr<NiemytzkiOperator> op_;
    Weights nominal_;
};

/// One ETD step of length setup.dt starting at time t.
GridFunction step(const EvolutionSetup& setup, double t, const GridFunction& u);

/// Samples at n_samples uniform times in [0, t_final], both ends included.
Trajectory integrate(const EvolutionSetup& setup, const GridFunction& u0, double t_final, int n_samples);

/// max over samples with t >= t_start of the alpha-energy fraction carried by modes >= mode_cut.
double tail_energy(const SpectralDecomposition& dec, const Trajectory& traj, int mode_cut, double t_start = 0.0);

struct ContinuityReport {
    double perturbation = 0.0;
    double max_difference = 0.0;  ///< sup_t ||u(t) - v(t)||_alpha
    double measured_C = 0.0;      ///< max_difference / perturbation
    double bound_C = 0.0;         ///< Gronwall-type bound from L and the decay constants
    bool holds() const { return measured_C <= bound_C; }
};

/// Compare trajectories from u0 and u0 + eta with ||eta||_alpha = perturbation.
ContinuityReport continuity_check(const EvolutionSetup& setup, const GridFunction& u0, double t_final,
                                  double perturbation, std::uint64_t seed, int n_samples = 65);

enum class TrajectoryColumns { values, spectral };

/// CSV: time plus grid values or the first 16 spectral coefficients.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, TrajectoryColumns columns);

}  // namespace resonance
