#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace resonance {

using Vec2 = Eigen::Vector2d;

enum class DomainKind { interval, rectangle };

/// Dirichlet problem for -(a y')' on (0, L), or -Laplace on (0, L1) x (0, L2).
///
/// Unknowns are the interior nodes of a uniform grid with `grid_size` nodes per
/// axis. In 2D the unknown (i, j) is stored at index i + N * j.
struct EllipticProblem {
    DomainKind kind = DomainKind::interval;
    double length_x = 0.0;
    double length_y = 0.0;
    int grid_size = 0;
    /// 1D diffusion coefficient sampled at node coordinates (boundary nodes included).
    std::function<double(double)> coefficient;
    /// Human readable description of the coefficient, echoed into manifests.
    std::string coefficient_label = "constant:1";

    static EllipticProblem interval(double length, int grid_size,
                                    std::function<double(double)> coefficient = {},
                                    std::string label = "constant:1");
    static EllipticProblem rectangle(double length_x, double length_y, int grid_size);

    int dimension() const { return kind == DomainKind::interval ? 1 : 2; }
    int unknowns() const { return kind == DomainKind::interval ? grid_size : grid_size * grid_size; }
    double spacing(int axis) const;
    /// Quadrature weight of one interior node (h, or hx * hy).
    double cell_weight() const;
    /// |Omega|.
    double measure() const;
    /// Physical coordinates of unknown `index` (second component zero in 1D).
    Vec2 node(int index) const;
};

/// Second-order finite-difference stiffness matrix with Dirichlet rows eliminated.
Eigen::MatrixXd assemble(const EllipticProblem& problem);

/// Difference gradient, one matrix per axis (the second is empty in 1D).
/// Central differences in the interior, second-order one-sided at the first and
/// last interior node of every grid line.
std::array<Eigen::SparseMatrix<double>, 2> gradient_operators(const EllipticProblem& problem);

enum class ModeClass { minus, kernel, plus };

const char* to_string(ModeClass c);

class SpectralDecomposition;
using DecompositionPtr = std::shared_ptr<const SpectralDecomposition>;

/// Eigendecomposition of the discrete operator split around the resonant
/// eigenvalue into X- (below), X0 (kernel of lambda I - A) and X+ (above).
///
/// The basis is orthonormal in the discrete L2 inner product, so the spectral
/// coefficients of a grid function are its H-inner products with the basis.
class SpectralDecomposition {
public:
    const EllipticProblem& problem() const { return problem_; }
    int size() const { return static_cast<int>(raw_eigenvalues_.size()); }

    /// Ascending eigenvalues exactly as returned by the eigensolver.
    const Eigen::VectorXd& raw_eigenvalues() const { return raw_eigenvalues_; }
    /// Per-mode eigenvalue snapped to its cluster value (exact multiplicities).
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    /// Distinct eigenvalues lambda_1 < lambda_2 < ...
    const std::vector<double>& distinct() const { return distinct_; }
    const std::vector<int>& multiplicities() const { return multiplicities_; }
    /// Zero-based cluster id of every mode.
    const std::vector<int>& cluster_of_mode() const { return cluster_of_mode_; }

    /// One-based resonance index k with lambda = lambda_k.
    int k() const { return k_; }
    double lambda() const { return distinct_[static_cast<std::size_t>(k_ - 1)]; }
    double alpha() const { return alpha_; }
    double delta() const { return delta_; }

    const std::vector<int>& minus_modes() const { return minus_; }
    const std::vector<int>& kernel_modes() const { return kernel_; }
    const std::vector<int>& plus_modes() const { return plus_; }
    ModeClass mode_class(int mode) const { return classes_[static_cast<std::size_t>(mode)]; }
    int kernel_dimension() const { return static_cast<int>(kernel_.size()); }

    /// d_l = sum_{i <= l} dim ker(lambda_i I - A), with d_0 = 0.
    int cumulative_multiplicity(int l) const;

    std::optional<double> gap_minus() const { return gap_minus_; }
    std::optional<double> gap_plus() const { return gap_plus_; }
    /// Decay constant c: the smallest applicable spectral gap.
    double decay_constant() const;

    /// (mu_j + delta)^alpha for every mode.
    const Eigen::VectorXd& alpha_weights() const { return alpha_weights_; }

    /// H-orthonormal eigenvectors as columns (grid values).
    const Eigen::MatrixXd& basis() const { return basis_; }
    double weight() const { return weight_; }

    Eigen::VectorXd to_spectral(const Eigen::VectorXd& values) const;
    Eigen::VectorXd to_values(const Eigen::VectorXd& coefficients) const;
    double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

    /// Max-norm of the Gram matrix minus identity in the H inner product.
    double orthonormality_defect() const;
    /// max_j ||A v_j - mu_j v_j||_H / |mu_j| against the assembled matrix.
    double residual_defect(const Eigen::MatrixXd& matrix) const;

private:
    friend DecompositionPtr decompose_index(const EllipticProblem&, const Eigen::MatrixXd&, int, double);

    EllipticProblem problem_;
    Eigen::VectorXd raw_eigenvalues_;
    Eigen::VectorXd eigenvalues_;
    Eigen::VectorXd alpha_weights_;
    Eigen::MatrixXd basis_;
    Eigen::MatrixXd orthogonal_;  // Euclidean-orthonormal eigenvectors
    double weight_ = 1.0;
    std::vector<double> distinct_;
    std::vector<int> multiplicities_;
    std::vector<int> cluster_of_mode_;
    std::vector<ModeClass> classes_;
    std::vector<int> minus_, kernel_, plus_;
    std::vector<int> cumulative_;
    std::optional<double> gap_minus_, gap_plus_;
    int k_ = 1;
    double alpha_ = 0.9;
    double delta_ = 0.0;
};

/// Relative tolerance for grouping numerically split multiple eigenvalues.
inline constexpr double kClusterTolerance = 1e-8;
/// Relative tolerance for snapping a requested resonance value to a cluster.
inline constexpr double kResonanceTolerance = 1e-6;

/// Decompose around the eigenvalue nearest to `lambda_target`.
///
/// Throws ResonanceMismatchError when the target is not an eigenvalue, i.e. it is
/// further than max(1e-6, h^2 |target| / 4) (relative) from every cluster. The
/// second term admits continuum eigenvalues, which differ from the discrete ones
/// by O(h^2).
DecompositionPtr decompose(const EllipticProblem& problem, const Eigen::MatrixXd& matrix,
                           double lambda_target, double alpha);

/// Decompose around the k-th distinct eigenvalue (one-based).
DecompositionPtr decompose_index(const EllipticProblem& problem, const Eigen::MatrixXd& matrix,
                                 int k, double alpha);

// ---------------------------------------------------------------------------

/// A state vector on the decomposition's grid, kept in both representations.
class GridFunction {
public:
    GridFunction() = default;

    static GridFunction from_values(DecompositionPtr dec, Eigen::VectorXd values);
    static GridFunction from_spectral(DecompositionPtr dec, Eigen::VectorXd coefficients);
    static GridFunction zero(DecompositionPtr dec);
    /// Unit (in H) eigenvector of mode `j`.
    static GridFunction mode(DecompositionPtr dec, int j);

    const Eigen::VectorXd& values() const { return values_; }
    const Eigen::VectorXd& spectral() const { return spectral_; }
    const DecompositionPtr& decomposition() const { return dec_; }
    int size() const { return static_cast<int>(values_.size()); }

    double norm_h() const;
    double norm_alpha() const;

    GridFunction operator+(const GridFunction& other) const;
    GridFunction operator-(const GridFunction& other) const;
    GridFunction operator*(double scale) const;

private:
    GridFunction(DecompositionPtr dec, Eigen::VectorXd values, Eigen::VectorXd spectral);
    void require_same_grid(const GridFunction& other) const;

    DecompositionPtr dec_;
    Eigen::VectorXd values_;
    Eigen::VectorXd spectral_;
};

enum class Part { P, Q_minus, Q_plus, Q };
enum class NormKind { H, alpha };

/// Spectral projection onto X0 (P), X- (Q-), X+ (Q+) or X- + X+ (Q).
GridFunction project(const SpectralDecomposition& dec, const GridFunction& u, Part part);
/// Same, acting directly on a coefficient vector.
Eigen::VectorXd project_coefficients(const SpectralDecomposition& dec, const Eigen::VectorXd& c, Part part);

double fractional_norm(const SpectralDecomposition& dec, const GridFunction& u, NormKind which);
double alpha_norm_of(const SpectralDecomposition& dec, const Eigen::VectorXd& coefficients);

// ---------------------------------------------------------------------------

enum class CheckStatus { pass, fail, skipped };
const char* to_string(CheckStatus s);

struct DecayCheck {
    std::string name;
    CheckStatus status = CheckStatus::skipped;
    double worst_constant = 0.0;  ///< largest measured LHS / (bound without K)
    int samples = 0;
    int violations = 0;
};

struct DecayReport {
    double K = 1.0;
    double c = 0.0;
    DecayCheck smoothing_plus;  ///< ||A_d^a S(t) x|| <= K e^{-(lambda+c)t} t^{-a} ||x||, x in X+
    DecayCheck decay_plus;      ///< ||e^{lambda t} S(t) x|| <= K e^{-ct} ||x||, x in X+, t >= 0
    DecayCheck growth_minus;    ///< ||e^{lambda t} S(t) x|| <= K e^{ct} ||x||, x in X-, t <= 0
    bool all_pass() const;
};

/// Check the three semigroup bounds with K = 1 and c = decay_constant() on
/// `random_vectors` Gaussian vectors per subspace plus the extreme eigenvector.
/// Positive entries of `t_samples` drive the X+ checks, negative ones the X- check.
DecayReport verify_decay(const SpectralDecomposition& dec, const std::vector<double>& t_samples,
                         int random_vectors = 50, std::uint64_t seed = 1);

/// Number of adjacent interior node pairs where a 1D kernel eigenfunction is
/// below `floor` in absolute value at both nodes (0 for a healthy eigenfunction).
int adjacent_zero_pairs(const SpectralDecomposition& dec, double floor = 1e-8);

}  // namespace resonance
