#include "resonance/elliptic.hpp"

#include "resonance/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace resonance {

EllipticProblem EllipticProblem::interval(double length, int grid_size,
                                          std::function<double(double)> coefficient, std::string label)
{
    EllipticProblem p;
    p.kind = DomainKind::interval;
    p.length_x = length;
    p.grid_size = grid_size;
    p.coefficient = coefficient ? std::move(coefficient) : [](double) { return 1.0; };
    p.coefficient_label = std::move(label);
    return p;
}

EllipticProblem EllipticProblem::rectangle(double length_x, double length_y, int grid_size)
{
    EllipticProblem p;
    p.kind = DomainKind::rectangle;
    p.length_x = length_x;
    p.length_y = length_y;
    p.grid_size = grid_size;
    p.coefficient = [](double) { return 1.0; };
    p.coefficient_label = "laplacian";
    return p;
}

double EllipticProblem::spacing(int axis) const
{
    const double length = axis == 0 ? length_x : length_y;
    return length / (grid_size + 1);
}

double EllipticProblem::cell_weight() const
{
    return kind == DomainKind::interval ? spacing(0) : spacing(0) * spacing(1);
}

double EllipticProblem::measure() const
{
    return kind == DomainKind::interval ? length_x : length_x * length_y;
}

Vec2 EllipticProblem::node(int index) const
{
    if (kind == DomainKind::interval)
        return {(index + 1) * spacing(0), 0.0};
    const int i = index % grid_size;
    const int j = index / grid_size;
    return {(i + 1) * spacing(0), (j + 1) * spacing(1)};
}

namespace {

void validate(const EllipticProblem& problem)
{
    if (problem.grid_size < 8)
        throw ConfigurationError("grid_size must be at least 8 interior nodes, got " +
                                 std::to_string(problem.grid_size));
    if (!(problem.length_x > 0.0) || (problem.kind == DomainKind::rectangle && !(problem.length_y > 0.0)))
        throw ConfigurationError("domain lengths must be positive");
}

Eigen::MatrixXd second_difference(int n, double h)
{
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    const double s = 1.0 / (h * h);
    for (int i = 0; i < n; ++i) {
        d(i, i) = 2.0 * s;
        if (i > 0)
            d(i, i - 1) = -s;
        if (i + 1 < n)
            d(i, i + 1) = -s;
    }
    return d;
}

}  // namespace

Eigen::MatrixXd assemble(const EllipticProblem& problem)
{
    validate(problem);
    const int n = problem.grid_size;

    if (problem.kind == DomainKind::interval) {
        const double h = problem.spacing(0);
        // coefficient on all N + 2 nodes, averaged onto the N + 1 cell midpoints
        std::vector<double> a(static_cast<std::size_t>(n + 2));
        for (int i = 0; i < n + 2; ++i) {
            a[static_cast<std::size_t>(i)] = problem.coefficient(i * h);
            if (!(a[static_cast<std::size_t>(i)] > 0.0) || !std::isfinite(a[static_cast<std::size_t>(i)]))
                throw EllipticityError("coefficient not strictly positive at x = " + std::to_string(i * h));
        }
        std::vector<double> mid(static_cast<std::size_t>(n + 1));
        for (int i = 0; i <= n; ++i)
            mid[static_cast<std::size_t>(i)] = 0.5 * (a[static_cast<std::size_t>(i)] + a[static_cast<std::size_t>(i + 1)]);

        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
        const double s = 1.0 / (h * h);
        for (int i = 0; i < n; ++i) {
            // unknown i sits at node i + 1 between midpoints i and i + 1
            const double left = mid[static_cast<std::size_t>(i)];
            const double right = mid[static_cast<std::size_t>(i + 1)];
            m(i, i) = (left + right) * s;
            if (i > 0)
                m(i, i - 1) = -left * s;
            if (i + 1 < n)
                m(i, i + 1) = -right * s;
        }
        return m;
    }

    const Eigen::MatrixXd dx = second_difference(n, problem.spacing(0));
    const Eigen::MatrixXd dy = second_difference(n, problem.spacing(1));
    const int total = n * n;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(total, total);
    // I (x) Dx + Dy (x) I with index i + N j
    for (int j = 0; j < n; ++j)
        m.block(j * n, j * n, n, n) += dx;
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
            if (dy(j, l) != 0.0)
                for (int i = 0; i < n; ++i)
                    m(i + n * j, i + n * l) += dy(j, l);
    return m;
}

std::array<Eigen::SparseMatrix<double>, 2> gradient_operators(const EllipticProblem& problem)
{
    validate(problem);
    const int n = problem.grid_size;
    const int total = problem.unknowns();
    std::array<Eigen::SparseMatrix<double>, 2> ops;

    const int axes = problem.dimension();
    for (int axis = 0; axis < axes; ++axis) {
        const double inv = 1.0 / (2.0 * problem.spacing(axis));
        std::vector<Eigen::Triplet<double>> entries;
        entries.reserve(static_cast<std::size_t>(3 * total));
        for (int idx = 0; idx < total; ++idx) {
            // position along this axis and stride to the neighbour
            const int pos = axis == 0 ? idx % n : idx / n;
            const int stride = axis == 0 ? 1 : n;
            if (pos == 0) {
                entries.emplace_back(idx, idx, -3.0 * inv);
                entries.emplace_back(idx, idx + stride, 4.0 * inv);
                entries.emplace_back(idx, idx + 2 * stride, -1.0 * inv);
            } else if (pos == n - 1) {
                entries.emplace_back(idx, idx, 3.0 * inv);
                entries.emplace_back(idx, idx - stride, -4.0 * inv);
                entries.emplace_back(idx, idx - 2 * stride, 1.0 * inv);
            } else {
                entries.emplace_back(idx, idx + stride, inv);
                entries.emplace_back(idx, idx - stride, -inv);
            }
        }
        ops[static_cast<std::size_t>(axis)].resize(total, total);
        ops[static_cast<std::size_t>(axis)].setFromTriplets(entries.begin(), entries.end());
    }
    return ops;
}

const char* to_string(ModeClass c)
{
    switch (c) {
    case ModeClass::minus:
        return "minus";
    case ModeClass::kernel:
        return "kernel";
    case ModeClass::plus:
        return "plus";
    }
    return "?";
}

const char* to_string(CheckStatus s)
{
    switch (s) {
    case CheckStatus::pass:
        return "PASS";
    case CheckStatus::fail:
        return "FAIL";
    case CheckStatus::skipped:
        return "SKIPPED";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// SpectralDecomposition

int SpectralDecomposition::cumulative_multiplicity(int l) const
{
    if (l < 0 || l >= static_cast<int>(cumulative_.size()))
        throw ConfigurationError("cumulative multiplicity index out of range: " + std::to_string(l));
    return cumulative_[static_cast<std::size_t>(l)];
}

double SpectralDecomposition::decay_constant() const
{
    double c = std::numeric_limits<double>::infinity();
    if (gap_minus_)
        c = std::min(c, *gap_minus_);
    if (gap_plus_)
        c = std::min(c, *gap_plus_);
    return std::isfinite(c) ? c : 0.0;
}

Eigen::VectorXd SpectralDecomposition::to_spectral(const Eigen::VectorXd& values) const
{
    if (values.size() != size())
        throw DimensionError("grid function has " + std::to_string(values.size()) + " values, grid has " +
                             std::to_string(size()));
    return std::sqrt(weight_) * (orthogonal_.transpose() * values);
}

Eigen::VectorXd SpectralDecomposition::to_values(const Eigen::VectorXd& coefficients) const
{
    if (coefficients.size() != size())
        throw DimensionError("coefficient vector has " + std::to_string(coefficients.size()) +
                             " entries, grid has " + std::to_string(size()));
    return basis_ * coefficients;
}

double SpectralDecomposition::inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const
{
    if (a.size() != b.size() || a.size() != size())
        throw DimensionError("inner product of mismatched grid functions");
    return weight_ * a.dot(b);
}

double SpectralDecomposition::orthonormality_defect() const
{
    const Eigen::MatrixXd gram = weight_ * (basis_.transpose() * basis_);
    return (gram - Eigen::MatrixXd::Identity(size(), size())).cwiseAbs().maxCoeff();
}

double SpectralDecomposition::residual_defect(const Eigen::MatrixXd& matrix) const
{
    double worst = 0.0;
    for (int j = 0; j < size(); ++j) {
        const Eigen::VectorXd r = matrix * basis_.col(j) - raw_eigenvalues_(j) * basis_.col(j);
        const double rel = std::sqrt(weight_ * r.squaredNorm()) / std::max(std::abs(raw_eigenvalues_(j)), 1e-300);
        worst = std::max(worst, rel);
    }
    return worst;
}

DecompositionPtr decompose_index(const EllipticProblem& problem, const Eigen::MatrixXd& matrix, int k, double alpha)
{
    if (!(alpha > 0.75 && alpha < 1.0))
        throw ConfigurationError("alpha must lie in (3/4, 1), got " + std::to_string(alpha));
    if (matrix.rows() != matrix.cols() || matrix.rows() != problem.unknowns())
        throw DimensionError("operator matrix does not match the problem grid");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
    if (solver.info() != Eigen::Success)
        throw Error("symmetric eigensolver failed");

    auto dec = std::make_shared<SpectralDecomposition>();
    dec->problem_ = problem;
    dec->raw_eigenvalues_ = solver.eigenvalues();
    dec->orthogonal_ = solver.eigenvectors();
    // fix the sign ambiguity: positive sum, or positive largest entry when the sum cancels
    for (Eigen::Index j = 0; j < dec->orthogonal_.cols(); ++j) {
        auto col = dec->orthogonal_.col(j);
        double key = col.sum();
        if (std::abs(key) < 1e-8) {
            Eigen::Index at = 0;
            col.cwiseAbs().maxCoeff(&at);
            key = col(at);
        }
        if (key < 0)
            col = -col;
    }
    dec->weight_ = problem.cell_weight();
    dec->basis_ = dec->orthogonal_ / std::sqrt(dec->weight_);
    dec->alpha_ = alpha;

    const int n = static_cast<int>(dec->raw_eigenvalues_.size());
    const double scale = dec->raw_eigenvalues_.cwiseAbs().maxCoeff();
    const double tol = kClusterTolerance * std::max(scale, 1e-300);

    // chain-cluster the sorted spectrum
    std::vector<int> start;
    dec->cluster_of_mode_.assign(static_cast<std::size_t>(n), 0);
    for (int j = 0; j < n; ++j) {
        if (j == 0 || dec->raw_eigenvalues_(j) - dec->raw_eigenvalues_(j - 1) > tol)
            start.push_back(j);
        dec->cluster_of_mode_[static_cast<std::size_t>(j)] = static_cast<int>(start.size()) - 1;
    }
    start.push_back(n);
    const int clusters = static_cast<int>(start.size()) - 1;
    for (int c = 0; c < clusters; ++c) {
        const int lo = start[static_cast<std::size_t>(c)];
        const int hi = start[static_cast<std::size_t>(c + 1)];
        dec->distinct_.push_back(dec->raw_eigenvalues_.segment(lo, hi - lo).mean());
        dec->multiplicities_.push_back(hi - lo);
    }

    if (k < 1 || k > clusters)
        throw ResonanceMismatchError("resonance index k = " + std::to_string(k) + " outside 1.." +
                                     std::to_string(clusters));
    dec->k_ = k;

    dec->eigenvalues_.resize(n);
    for (int j = 0; j < n; ++j)
        dec->eigenvalues_(j) = dec->distinct_[static_cast<std::size_t>(dec->cluster_of_mode_[static_cast<std::size_t>(j)])];

    dec->cumulative_.assign(static_cast<std::size_t>(clusters + 1), 0);
    for (int c = 0; c < clusters; ++c)
        dec->cumulative_[static_cast<std::size_t>(c + 1)] =
            dec->cumulative_[static_cast<std::size_t>(c)] + dec->multiplicities_[static_cast<std::size_t>(c)];

    dec->classes_.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const int c = dec->cluster_of_mode_[static_cast<std::size_t>(j)];
        ModeClass cls = c < k - 1 ? ModeClass::minus : (c == k - 1 ? ModeClass::kernel : ModeClass::plus);
        dec->classes_[static_cast<std::size_t>(j)] = cls;
        (cls == ModeClass::minus ? dec->minus_ : cls == ModeClass::kernel ? dec->kernel_ : dec->plus_).push_back(j);
    }

    if (k > 1)
        dec->gap_minus_ = dec->distinct_[static_cast<std::size_t>(k - 1)] - dec->distinct_[static_cast<std::size_t>(k - 2)];
    if (k < clusters)
        dec->gap_plus_ = dec->distinct_[static_cast<std::size_t>(k)] - dec->distinct_[static_cast<std::size_t>(k - 1)];

    const double lambda1 = dec->distinct_.front();
    dec->delta_ = lambda1 > 1e-12 ? 0.0 : std::abs(lambda1) + 1.0;
    dec->alpha_weights_ = (dec->eigenvalues_.array() + dec->delta_).pow(alpha).matrix();
    return dec;
}

DecompositionPtr decompose(const EllipticProblem& problem, const Eigen::MatrixXd& matrix, double lambda_target,
                           double alpha)
{
    // cluster once through the index path, then pick the nearest cluster
    auto probe = decompose_index(problem, matrix, 1, alpha);
    const auto& distinct = probe->distinct();
    std::size_t best = 0;
    for (std::size_t c = 1; c < distinct.size(); ++c)
        if (std::abs(distinct[c] - lambda_target) < std::abs(distinct[best] - lambda_target))
            best = c;

    double h = problem.spacing(0);
    if (problem.kind == DomainKind::rectangle)
        h = std::max(h, problem.spacing(1));
    const double scale = std::max(std::abs(lambda_target), 1e-12);
    const double allowed = std::max(kResonanceTolerance, 0.25 * h * h * std::abs(lambda_target));
    const double rel = std::abs(distinct[best] - lambda_target) / scale;
    if (!(rel <= allowed))
        throw ResonanceMismatchError("lambda_target = " + std::to_string(lambda_target) +
                                     " is not an eigenvalue (nearest cluster " + std::to_string(distinct[best]) +
                                     ", relative distance " + std::to_string(rel) + ")");
    if (best == 0)
        return probe;
    return decompose_index(problem, matrix, static_cast<int>(best) + 1, alpha);
}

// ---------------------------------------------------------------------------
// GridFunction

GridFunction::GridFunction(DecompositionPtr dec, Eigen::VectorXd values, Eigen::VectorXd spectral)
    : dec_(std::move(dec)), values_(std::move(values)), spectral_(std::move(spectral))
{
}

GridFunction GridFunction::from_values(DecompositionPtr dec, Eigen::VectorXd values)
{
    Eigen::VectorXd spectral = dec->to_spectral(values);
    return GridFunction(std::move(dec), std::move(values), std::move(spectral));
}

GridFunction GridFunction::from_spectral(DecompositionPtr dec, Eigen::VectorXd coefficients)
{
    Eigen::VectorXd values = dec->to_values(coefficients);
    return GridFunction(std::move(dec), std::move(values), std::move(coefficients));
}

GridFunction GridFunction::zero(DecompositionPtr dec)
{
    const int n = dec->size();
    return GridFunction(std::move(dec), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n));
}

GridFunction GridFunction::mode(DecompositionPtr dec, int j)
{
    if (j < 0 || j >= dec->size())
        throw DimensionError("mode index out of range: " + std::to_string(j));
    Eigen::VectorXd c = Eigen::VectorXd::Zero(dec->size());
    c(j) = 1.0;
    Eigen::VectorXd values = dec->basis().col(j);
    return GridFunction(std::move(dec), std::move(values), std::move(c));
}

double GridFunction::norm_h() const
{
    return spectral_.norm();
}

double GridFunction::norm_alpha() const
{
    return alpha_norm_of(*dec_, spectral_);
}

void GridFunction::require_same_grid(const GridFunction& other) const
{
    if (dec_ != other.dec_ && (dec_ == nullptr || other.dec_ == nullptr || dec_->size() != other.dec_->size()))
        throw DimensionError("grid functions live on different grids");
}

GridFunction GridFunction::operator+(const GridFunction& other) const
{
    require_same_grid(other);
    return GridFunction(dec_, values_ + other.values_, spectral_ + other.spectral_);
}

GridFunction GridFunction::operator-(const GridFunction& other) const
{
    require_same_grid(other);
    return GridFunction(dec_, values_ - other.values_, spectral_ - other.spectral_);
}

GridFunction GridFunction::operator*(double scale) const
{
    return GridFunction(dec_, values_ * scale, spectral_ * scale);
}

Eigen::VectorXd project_coefficients(const SpectralDecomposition& dec, const Eigen::VectorXd& c, Part part)
{
    if (c.size() != dec.size())
        throw DimensionError("projection of a vector from a different grid");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(c.size());
    for (int j = 0; j < c.size(); ++j) {
        const ModeClass cls = dec.mode_class(j);
        bool keep = false;
        switch (part) {
        case Part::P:
            keep = cls == ModeClass::kernel;
            break;
        case Part::Q_minus:
            keep = cls == ModeClass::minus;
            break;
        case Part::Q_plus:
            keep = cls == ModeClass::plus;
            break;
        case Part::Q:
            keep = cls != ModeClass::kernel;
            break;
        }
        if (keep)
            out(j) = c(j);
    }
    return out;
}

GridFunction project(const SpectralDecomposition& dec, const GridFunction& u, Part part)
{
    if (u.size() != dec.size())
        throw DimensionError("projection of a grid function from a different grid");
    return GridFunction::from_spectral(u.decomposition(), project_coefficients(dec, u.spectral(), part));
}

double alpha_norm_of(const SpectralDecomposition& dec, const Eigen::VectorXd& coefficients)
{
    return dec.alpha_weights().cwiseProduct(coefficients).norm();
}

double fractional_norm(const SpectralDecomposition& dec, const GridFunction& u, NormKind which)
{
    if (u.size() != dec.size())
        throw DimensionError("norm of a grid function from a different grid");
    return which == NormKind::H ? u.spectral().norm() : alpha_norm_of(dec, u.spectral());
}

// ---------------------------------------------------------------------------
// decay inequalities

bool DecayReport::all_pass() const
{
    for (const DecayCheck* c : {&smoothing_plus, &decay_plus, &growth_minus})
        if (c->status == CheckStatus::fail)
            return false;
    return true;
}

namespace {

// Runs `ratio(x, t)` over the sampled vectors and times; ratio is LHS / (K-free RHS).
template <typename Ratio>
void run_check(DecayCheck& check, const std::vector<Eigen::VectorXd>& vectors, const std::vector<double>& times,
               double K, Ratio ratio)
{
    if (vectors.empty() || times.empty()) {
        check.status = CheckStatus::skipped;
        return;
    }
    for (const auto& x : vectors)
        for (double t : times) {
            const double r = ratio(x, t);
            check.worst_constant = std::max(check.worst_constant, r);
            ++check.samples;
            if (r > K * (1.0 + 1e-10))
                ++check.violations;
        }
    check.status = check.violations == 0 ? CheckStatus::pass : CheckStatus::fail;
}

}  // namespace

DecayReport verify_decay(const SpectralDecomposition& dec, const std::vector<double>& t_samples, int random_vectors,
                         std::uint64_t seed)
{
    DecayReport report;
    report.c = dec.decay_constant();
    report.smoothing_plus.name = "smoothing_plus";
    report.decay_plus.name = "decay_plus";
    report.growth_minus.name = "growth_minus";

    std::vector<double> forward, backward;
    for (double t : t_samples)
        (t > 0 ? forward : backward).push_back(t);
    if (std::find(t_samples.begin(), t_samples.end(), 0.0) != t_samples.end())
        backward.push_back(0.0);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    auto sample = [&](const std::vector<int>& modes, int extreme) {
        std::vector<Eigen::VectorXd> out;
        if (modes.empty())
            return out;
        Eigen::VectorXd e = Eigen::VectorXd::Zero(dec.size());
        e(extreme) = 1.0;
        out.push_back(e);
        for (int r = 0; r < random_vectors; ++r) {
            Eigen::VectorXd x = Eigen::VectorXd::Zero(dec.size());
            for (int j : modes)
                x(j) = normal(rng);
            out.push_back(x);
        }
        return out;
    };

    const double lambda = dec.lambda();
    const double c = report.c;
    const double alpha = dec.alpha();
    const Eigen::VectorXd& mu = dec.eigenvalues();
    const Eigen::VectorXd& aw = dec.alpha_weights();

    const auto plus = sample(dec.plus_modes(), dec.plus_modes().empty() ? 0 : dec.plus_modes().front());
    const auto minus = sample(dec.minus_modes(), dec.minus_modes().empty() ? 0 : dec.minus_modes().back());

    // scaled forms avoid underflow of e^{-mu t} for stiff modes
    run_check(report.smoothing_plus, plus, forward, report.K, [&](const Eigen::VectorXd& x, double t) {
        double s = 0.0;
        for (int j : dec.plus_modes()) {
            const double v = aw(j) * std::pow(t, alpha) * std::exp(-(mu(j) - lambda - c) * t) * x(j);
            s += v * v;
        }
        return std::sqrt(s) / x.norm();
    });
    run_check(report.decay_plus, plus, forward, report.K, [&](const Eigen::VectorXd& x, double t) {
        double s = 0.0;
        for (int j : dec.plus_modes()) {
            const double v = std::exp((lambda - mu(j) + c) * t) * x(j);
            s += v * v;
        }
        return std::sqrt(s) / x.norm();
    });
    run_check(report.growth_minus, minus, backward, report.K, [&](const Eigen::VectorXd& x, double t) {
        double s = 0.0;
        for (int j : dec.minus_modes()) {
            const double v = std::exp((lambda - mu(j) - c) * t) * x(j);
            s += v * v;
        }
        return std::sqrt(s) / x.norm();
    });
    return report;
}

int adjacent_zero_pairs(const SpectralDecomposition& dec, double floor)
{
    if (dec.problem().kind != DomainKind::interval)
        return 0;
    int count = 0;
    for (int j : dec.kernel_modes()) {
        const Eigen::VectorXd v = dec.basis().col(j);
        for (int i = 0; i + 1 < v.size(); ++i)
            if (std::abs(v(i)) < floor && std::abs(v(i + 1)) < floor)
                ++count;
    }
    return count;
}

}  // namespace resonance
