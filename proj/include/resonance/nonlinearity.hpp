#pragma once

#include "resonance/elliptic.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace resonance {

/// g(t, x, s, grad y) evaluated at one grid point. In 1D only the first
/// components of `x` and `grad` are meaningful.
using PointwiseFn = std::function<double(double t, const Vec2& x, double s, const Vec2& grad)>;
using SpatialFn = std::function<double(const Vec2& x)>;

/// Limits g_+(x), g_-(x) of g as s -> +/- infinity.
struct LandesmanLazerLimits {
    SpatialFn g_plus;
    SpatialFn g_minus;
};

/// Limit g_inf(x) of g * s as |s| -> infinity and the one-sided bound q(x).
struct StrongResonanceLimits {
    SpatialFn g_infinity;
    SpatialFn q;
};

/// A bounded, Lipschitz, T-periodic pointwise map together with the metadata
/// the resonance machinery needs. The asymptotic data is declared, never inferred.
struct Nonlinearity {
    std::string name;
    PointwiseFn pointwise;
    double period = 1.0;
    double bound_m = 0.0;
    double lipschitz_L = 0.0;
    bool uses_gradient = false;
    std::optional<LandesmanLazerLimits> landesman_lazer;
    std::optional<StrongResonanceLimits> strong_resonance;
};

using NonlinearityPtr = std::shared_ptr<const Nonlinearity>;
using Params = std::map<std::string, double>;

/// Built-in families:
///
///   arctan                  a*atan(s) + f + w*sin(dy/dx1)/(1+s^2)     g+- = +-a*pi/2 + f
///   neg_arctan              -a*atan(s) + f + w*sin(dy/dx1)/(1+s^2)    g+- = -+a*pi/2 + f
///   strong_res              o*a*s/(1+s^2)                             g_inf = o*a, q = 0
///   kernel_constant         a*y0(x), y0 a unit kernel eigenvector     g+- = a*y0
///   periodic_forced_arctan  (1 + cos(2 pi t/T)/2)*a*atan(s) + f       (no declared limits)
///
/// Parameters: `amplitude` a (> 0, default 1), `forcing` f (default 0),
/// `gradient_weight` w (default 0), `orientation` o (+1 or -1, default +1),
/// `period` T (> 0, default 1), `kernel_index` (default 0). `kernel_constant`
/// requires the decomposition.
Nonlinearity builtin(const std::string& name, const Params& params = {},
                     const SpectralDecomposition* dec = nullptr);

/// Piecewise (bi)linear interpolation of interior grid values with zero Dirichlet data.
double interpolate(const EllipticProblem& problem, const Eigen::VectorXd& values, const Vec2& x);

/// Niemytzki operator bound to one grid: F(t, y)(x_i) = g(t, x_i, y_i, (grad y)_i).
class NiemytzkiOperator {
public:
    NiemytzkiOperator(NonlinearityPtr nl, DecompositionPtr dec);

    const Nonlinearity& nonlinearity() const { return *nl_; }
    const SpectralDecomposition& decomposition() const { return *dec_; }

    /// Grid values of F(t, y) from grid values of y.
    Eigen::VectorXd values(double t, const Eigen::VectorXd& y) const;
    /// Spectral coefficients of F(t, y) from spectral coefficients of y.
    Eigen::VectorXd spectral(double t, const Eigen::VectorXd& coefficients) const;
    /// Same as `values` with an externally supplied gradient per axis.
    Eigen::VectorXd values_with_gradient(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& gx,
                                         const Eigen::VectorXd& gy) const;

    const std::array<Eigen::SparseMatrix<double>, 2>& gradient() const { return gradient_; }

private:
    NonlinearityPtr nl_;
    DecompositionPtr dec_;
    std::vector<Vec2> nodes_;
    std::array<Eigen::SparseMatrix<double>, 2> gradient_;
};

/// Pointwise evaluation of the Niemytzki operator on `u`.
GridFunction apply(const Nonlinearity& nl, const DecompositionPtr& dec, double t, const GridFunction& u);

struct ProbeReport {
    int samples = 0;
    double periodicity_defect = 0.0;  ///< max |g(t+T) - g(t)|
    double bound_excess = 0.0;        ///< max(|g| - m, 0)
    double lipschitz_ratio = 0.0;     ///< max |dg| / (|ds| + |dy|)
    bool periodic() const { return periodicity_defect <= 1e-10; }
    bool bounded(double m) const { return bound_excess <= 1e-12 * std::max(1.0, m); }
};

/// Random probes over t in [0, T], x in the domain, s and grad y in [-range, range].
ProbeReport probe(const Nonlinearity& nl, const EllipticProblem& problem, int samples, std::uint64_t seed,
                  double range = 50.0);

}  // namespace resonance
