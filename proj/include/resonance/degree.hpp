#pragma once

#include "resonance/poincare.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace resonance {

/// Averaged map g(z) = int_0^T P F(tau, sum z_i e_i) dtau in kernel coordinates.
class KernelMap {
public:
    KernelMap(DecompositionPtr dec, NonlinearityPtr nl, int quadrature_nodes = 64);

    int dimension() const { return dec_->kernel_dimension(); }
    int quadrature_nodes() const { return nodes_; }
    double period() const { return nl_->period; }
    const SpectralDecomposition& decomposition() const { return *dec_; }

    /// Kernel element with coordinates z.
    Eigen::VectorXd embed(const Eigen::VectorXd& z) const;
    /// Kernel coordinates of a grid function.
    Eigen::VectorXd coordinates(const GridFunction& u) const;
    /// P F(t, z) in kernel coordinates (no averaging).
    Eigen::VectorXd instantaneous(double t, const Eigen::VectorXd& z) const;
    /// Trapezoidal rule over the period; for periodic integrands the end nodes coincide.
    Eigen::VectorXd operator()(const Eigen::VectorXd& z) const;

private:
    DecompositionPtr dec_;
    NonlinearityPtr nl_;
    NiemytzkiOperator op_;
    int nodes_;
};

Eigen::VectorXd averaged_map(const KernelMap& km, const Eigen::VectorXd& z);

enum class DegreeMethod { sign_change_1d, winding_2d, jacobian_sum };
const char* to_string(DegreeMethod m);

struct DegreeResult {
    int value = 0;
    DegreeMethod method = DegreeMethod::sign_change_1d;
    double min_boundary_norm = 0.0;
    int samples = 0;
    double raw_winding = 0.0;  ///< accumulated angle / 2 pi before rounding (2D)
};

using VectorMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

inline constexpr double kDegreeFloor = 1e-10;

/// Brouwer degree of `g` on the ball of radius `radius` in R^dim, dim in {1, 2}.
DegreeResult brouwer_degree(const VectorMap& g, int dim, double radius, int samples = 720);
DegreeResult brouwer_degree(const KernelMap& km, double radius, int samples = 720);

/// prod sign(1 - e^{(lambda - lambda_i) T}) over non-kernel modes below mode_cut.
int linear_degree_count(const SpectralDecomposition& dec, double T, int mode_cut);

/// Either the alpha-ball B(0, radius) or the product U + V with
/// ||P x||_H <= U and ||Q x||_alpha <= V.
struct Region {
    enum class Kind { ball, product } kind = Kind::ball;
    double radius = 0.0;
    double U = 0.0;
    double V = 0.0;

    static Region ball(double r) { return {Kind::ball, r, 0.0, 0.0}; }
    static Region product(double u, double v) { return {Kind::product, 0.0, u, v}; }

    /// Scaled distance to the origin: < 1 inside, 1 on the boundary.
    double level(const SpectralDecomposition& dec, const GridFunction& x) const;
    std::string describe() const;
};

struct RegularDegreeReport {
    bool certified = false;
    int sum = 0;
    int count = 0;
    std::vector<int> signs;
    std::vector<PeriodicOrbit> fixed_points;  ///< distinct certified points inside the region
    std::vector<std::string> warnings;
    std::string message;
    int seeds_tried = 0;
    int seeds_failed = 0;

    DegreeResult as_degree() const;
};

/// Regular-value count of deg(I - Phi_T, region): multi-start Newton,
/// deduplication at alpha-distance 1e-5, sum of Jacobian signs.
RegularDegreeReport ls_degree_regular(const EvolutionSetup& setup, const Region& region,
                                      const std::vector<GridFunction>& seeds, const NewtonOptions& options = {});

struct AveragingRow {
    double epsilon = 0.0;
    SolveStatus status = SolveStatus::max_iterations;
    bool found = false;  ///< certified and inside U + V
    double residual = 0.0;
    double q_norm = 0.0;       ///< ||Q x*||_alpha
    double x_norm = 0.0;       ///< ||x*||_alpha
    double kernel_coord = 0.0; ///< first kernel coordinate of x*
    double root_distance = 0.0;
    int degree_value = 0;
    int expected_degree = 0;
    bool degree_certified = false;
    bool pass = false;
};

struct AveragingOptions {
    int quadrature_nodes = 64;
    double root_tolerance = 0.05;  ///< relative, in ||.||_H
    std::vector<GridFunction> extra_seeds;
    NewtonOptions newton;
};

struct AveragingReport {
    std::optional<DegreeResult> brouwer;
    std::string brouwer_error;
    std::optional<Eigen::VectorXd> g_root;
    std::vector<AveragingRow> rows;
    std::vector<PeriodicOrbit> orbits;
    bool existence_checked = false;
    bool pass = false;
};

AveragingReport averaging_experiment(const EvolutionSetup& setup_template, const std::vector<double>& eps_list,
                                     double U_radius, double V_radius, const GridFunction& x0,
                                     const AveragingOptions& options = {});

void write_averaging_csv(std::ostream& out, const AveragingReport& report);

/// Degree of z - Theta(z) on the ball of radius `radius`, where Theta is the
/// period map of the kernel ODE z' = scale * P F(t, z), integrated with RK4.
DegreeResult kernel_translation_degree(const KernelMap& km, double scale, double radius, int steps = 256,
                                       int samples = 720);

}  // namespace resonance
