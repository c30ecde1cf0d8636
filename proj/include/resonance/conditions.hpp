#pragma once

#include "resonance/elliptic.hpp"
#include "resonance/nonlinearity.hpp"

#include <optional>
#include <string>
#include <vector>

namespace resonance {

enum class Condition { G1, G2, LL1, LL2, SR1, SR2 };
enum class Verdict { yes, no, inconclusive };

const char* to_string(Condition c);
const char* to_string(Verdict v);

/// Offending sample: time, kernel coordinates of x (or s for SR), norm of y,
/// spatial point (SR) and the tested value.
struct Witness {
    double t = 0.0;
    Eigen::VectorXd kernel;
    double y_norm = 0.0;
    Vec2 point = Vec2::Zero();
    double value = 0.0;
};

struct ConditionReport {
    Condition condition = Condition::G1;
    Verdict holds = Verdict::inconclusive;
    std::optional<Witness> witness;
    double margin = 0.0;  ///< worst normalized value (min for G1/LL1/SR1, max for the others)
    double R_used = 0.0;  ///< smallest tested radius from which the sign is uniform (G1/G2)
    std::string note;
};

inline constexpr double kMarginFloor = 1e-10;

struct GeometricOptions {
    int t_samples = 32;
    int y_samples = 64;
    int sphere_samples = 128;  ///< angles on the kernel circle (ignored in 1D)
    std::uint64_t seed = 1;
};

/// Sample <F(t, x + y), x>_H / ||x||_H over t, y in the alpha-ball of Q-space
/// of radius B_radius, and x on kernel spheres of the radii in R_grid.
ConditionReport check_geometric(const DecompositionPtr& dec, const NonlinearityPtr& nl, Condition which,
                                double B_radius, const std::vector<double>& R_grid,
                                const GeometricOptions& options = {});

/// Landesman-Lazer integral over kernel unit-sphere samples.
ConditionReport check_landesman_lazer(const SpectralDecomposition& dec, const Nonlinearity& nl, Condition which,
                                      int sphere_samples = 128);

/// Pointwise g*s >= q (SR1) or <= q (SR2) on a probe grid, plus the sign of int g_inf.
ConditionReport check_strong_resonance(const SpectralDecomposition& dec, const Nonlinearity& nl, Condition which,
                                       int t_samples = 32);

}  // namespace resonance
