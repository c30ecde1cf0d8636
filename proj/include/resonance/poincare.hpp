#pragma once

#include "resonance/evolve.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace resonance {

/// Phi_T(eps, x) = u(T; eps, x) with T the period of the nonlinearity.
GridFunction poincare_map(const EvolutionSetup& setup, const GridFunction& x);

enum class SolveStatus { certified, max_iterations, degenerate, diverged };
const char* to_string(SolveStatus s);

struct NewtonOptions {
    int mode_cut = 64;  ///< clipped to the number of modes
    int max_iterations = 50;
    double tolerance = 1e-8;
    double fd_scale = 1e-6;
    double degenerate_threshold = 1e-10;
    int line_search_halvings = 12;
    int trajectory_samples = 65;
};

struct PeriodicOrbit {
    double epsilon = 0.0;
    SolveStatus status = SolveStatus::max_iterations;
    std::string message;
    int iterations = 0;
    int mode_cut = 0;
    GridFunction fixed_point;
    double residual = 0.0;  ///< ||Phi_T(x) - x||_alpha at the returned point
    Trajectory trajectory;  ///< filled for certified orbits only
    int jacobian_sign = 0;  ///< sign det(I - DPhi_T) on the truncated space
    double min_singular_value = 0.0;
    double q_bound = 0.0;  ///< max_t ||Q u(t)||_alpha
    double p_range = 0.0;  ///< max_t ||P u(t)||_H

    bool certified() const { return status == SolveStatus::certified; }
};

/// Newton on the first mode_cut modes with a forward-difference Jacobian,
/// Picard on the rest. Failures are reported through the status.
PeriodicOrbit find_fixed_point(const EvolutionSetup& setup, const GridFunction& x0, const NewtonOptions& options = {});

struct JacobianInfo {
    Eigen::MatrixXd jacobian;  ///< DPhi_T on the truncated space
    int sign = 0;
    double min_singular_value = 0.0;
};

/// Forward-difference Jacobian of Phi_T on the first mode_cut modes at x.
JacobianInfo truncated_jacobian(const EvolutionSetup& setup, const GridFunction& x, int mode_cut,
                                double fd_scale = 1e-6);

struct AprioriReport {
    double R = 0.0;
    double R_plus = 0.0;   ///< X+ contribution
    double R_minus = 0.0;  ///< X- contribution, zero when X- is empty
    double m = 0.0;        ///< bound on ||F||_H
    double c = 0.0;
    double C_prime = 0.0;  ///< max (mu + delta)^alpha over X-
    double q_bound = 0.0;
    double slack = 0.0;  ///< R - q_bound
    bool holds() const { return q_bound <= R; }
};

AprioriReport apriori_bound(const EvolutionSetup& setup, const PeriodicOrbit& orbit);

/// Continuation in eps in the given order, warm-starting each solve.
std::vector<PeriodicOrbit> sweep_epsilon(const EvolutionSetup& setup_template, const std::vector<double>& eps_list,
                                         const GridFunction& x0, const NewtonOptions& options = {});

void write_orbit_csv(std::ostream& out, const PeriodicOrbit& orbit);
/// One-line JSON record: eps, status, residual, jacobian_sign, q_bound, R, p_range.
std::string orbit_summary_json(const PeriodicOrbit& orbit, const AprioriReport& bound);

}  // namespace resonance
