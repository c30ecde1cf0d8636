#include "resonance/cli.hpp"

#include "resonance/conditions.hpp"
#include "resonance/degree.hpp"
#include "resonance/errors.hpp"
#include "resonance/poincare.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#ifndef RESONANCE_VERSION
#define RESONANCE_VERSION "0.0.0"
#endif

namespace resonance::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& text)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v))
            throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigurationError("'" + key + "' expects a number, got '" + text + "'");
    }
}

int to_int(const std::string& key, const std::string& text)
{
    const double v = to_double(key, text);
    if (v != std::floor(v) || std::abs(v) > 1e9)
        throw ConfigurationError("'" + key + "' expects an integer, got '" + text + "'");
    return static_cast<int>(v);
}

std::vector<double> to_list(const std::string& key, const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty())
            out.push_back(to_double(key, trim(item)));
    if (out.empty())
        throw ConfigurationError("'" + key + "' expects a non-empty list");
    return out;
}


}  // namespace

// ---------------------------------------------------------------------------

ConfigFile ConfigFile::parse(std::istream& in, const std::string& origin)
{
    ConfigFile file;
    std::string section;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigurationError(fmt::format("{}:{}: unterminated section header", origin, number));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigurationError(fmt::format("{}:{}: expected key = value", origin, number));
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigurationError(fmt::format("{}:{}: empty key", origin, number));
        if (!section.empty())
            key = section + "." + key;
        if (file.entries_.count(key))
            throw ConfigurationError(fmt::format("{}:{}: duplicate key '{}'", origin, number, key));
        file.entries_[key] = value;
    }
    return file;
}

ConfigFile ConfigFile::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigurationError("cannot open config file '" + path + "'");
    return parse(in, path);
}

const std::vector<std::string>& experiment_names()
{
    static const std::vector<std::string> names{"spectral_audit", "nonexistence", "averaging_sweep", "index_formula",
                                                "ll_criterion",   "sr_criterion", "conditions_audit"};
    return names;
}

ExperimentConfig ExperimentConfig::from(const ConfigFile& file)
{
    ExperimentConfig c;
    c.echo = file.entries();
    for (const auto& [key, value] : file.entries()) {
        if (key == "problem.domain")
            c.domain = value;
        else if (key == "problem.length")
            c.length_x = to_double(key, value);
        else if (key == "problem.length_y")
            c.length_y = to_double(key, value);
        else if (key == "problem.grid_size")
            c.grid_size = to_int(key, value);
        else if (key == "problem.coefficient")
            c.coefficient = value;
        else if (key == "resonance.k")
            c.k = to_int(key, value);
        else if (key == "resonance.lambda_target")
            c.lambda_target = to_double(key, value);
        else if (key == "resonance.alpha")
            c.alpha = to_double(key, value);
        else if (key == "nonlinearity.family")
            c.family = value;
        else if (key.rfind("nonlinearity.", 0) == 0)
            c.params[key.substr(13)] = to_double(key, value);
        else if (key == "time.T")
            c.T = to_double(key, value);
        else if (key == "time.dt")
            c.dt = to_double(key, value);
        else if (key == "time.scheme")
            c.scheme = parse_scheme(value);
        else if (key == "time.decay_times")
            c.decay_times = to_list(key, value);
        else if (key == "experiment.name")
            c.experiment = value;
        else if (key == "experiment.epsilon")
            c.epsilon = to_double(key, value);
        else if (key == "experiment.expect")
            ;  // read by the experiments from the echo
        else if (key == "solver.mode_cut")
            c.mode_cut = to_int(key, value);
        else if (key == "solver.mode_cut_check")
            c.mode_cut_check = to_int(key, value);
        else if (key == "solver.seeds")
            c.seeds = to_list(key, value);
        else if (key == "solver.seed_spread")
            c.seed_spread = to_double(key, value);
        else if (key == "solver.eps_list")
            c.eps_list = to_list(key, value);
        else if (key == "solver.U")
            c.U_radius = to_double(key, value);
        else if (key == "solver.V")
            c.V_radius = to_double(key, value);
        else if (key == "solver.B")
            c.B_radius = to_double(key, value);
        else if (key == "solver.radii")
            c.radii = to_list(key, value);
        else if (key == "output.directory")
            c.output_dir = value;
        else if (key == "output.trajectory")
            c.trajectory_columns = value;
        else if (key == "seed" || key == "seed.value")
            c.seed = static_cast<std::uint64_t>(to_int(key, value));
        else
            throw ConfigurationError("unknown config key '" + key + "'");
    }

    if (c.experiment.empty())
        throw ConfigurationError("experiment.name is required");
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), c.experiment) == names.end())
        throw ConfigurationError("unknown experiment '" + c.experiment + "'");
    if (c.domain != "interval" && c.domain != "rectangle")
        throw ConfigurationError("problem.domain must be interval or rectangle");
    if (!(c.length_x > 0.0) || !(c.length_y > 0.0))
        throw ConfigurationError("domain lengths must be positive");
    if (c.k && c.lambda_target)
        throw ConfigurationError("give either resonance.k or resonance.lambda_target, not both");
    if (!(c.T > 0.0))
        throw ConfigurationError("time.T must be positive");
    if (c.dt < 0.0)
        throw ConfigurationError("time.dt must be positive");
    if (c.params.count("period"))
        throw ConfigurationError("the period is time.T; remove nonlinearity.period");
    if (!(c.epsilon > 0.0 && c.epsilon <= 1.0))
        throw ConfigurationError("experiment.epsilon must lie in (0, 1]");
    if (c.mode_cut < 1 || c.mode_cut_check < 1)
        throw ConfigurationError("mode cuts must be positive");
    if (c.trajectory_columns != "values" && c.trajectory_columns != "spectral")
        throw ConfigurationError("output.trajectory must be values or spectral");
    if (!(c.U_radius > 0.0 && c.V_radius > 0.0 && c.B_radius >= 0.0))
        throw ConfigurationError("solver radii must be positive");
    return c;
}

// ---------------------------------------------------------------------------

namespace {

struct Context {
    ExperimentConfig config;
    fs::path dir;
    RunResult result;
    std::ostream* log = nullptr;
    bool verbose = false;
    Eigen::MatrixXd matrix;
    DecompositionPtr dec;

    void say(const std::string& text) const
    {
        if (verbose && log)
            *log << text << '\n';
    }
    void check(const std::string& name, bool pass, const std::string& detail)
    {
        result.checks.push_back({name, pass, detail});
    }
    void info(const std::string& text)
    {
        result.info.push_back(text);
        say(text);
    }
    std::ofstream open(const std::string& name)
    {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out)
            throw Error("cannot write " + (dir / name).string());
        result.files.push_back(name);
        return out;
    }
};

EllipticProblem build_problem(const ExperimentConfig& c)
{
    if (c.domain == "rectangle")
        return EllipticProblem::rectangle(c.length_x, c.length_y, c.grid_size);
    const auto colon = c.coefficient.find(':');
    const std::string kind = c.coefficient.substr(0, colon);
    const double value = colon == std::string::npos ? 1.0 : to_double("problem.coefficient", c.coefficient.substr(colon + 1));
    if (kind == "constant")
        return EllipticProblem::interval(c.length_x, c.grid_size, [value](double) { return value; }, c.coefficient);
    if (kind == "sine")
        return EllipticProblem::interval(
            c.length_x, c.grid_size, [value](double x) { return 1.0 + value * std::sin(x); }, c.coefficient);
    throw ConfigurationError("problem.coefficient must be constant:<a> or sine:<amplitude>");
}

NonlinearityPtr build_nonlinearity(const ExperimentConfig& c, const SpectralDecomposition& dec)
{
    Params params = c.params;
    params["period"] = c.T;
    return std::make_shared<const Nonlinearity>(builtin(c.family, params, &dec));
}

std::vector<GridFunction> build_seeds(const ExperimentConfig& c, const DecompositionPtr& dec)
{
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int e = dec->kernel_modes().front();
    std::vector<GridFunction> seeds;
    for (double amplitude : c.seeds) {
        Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(dec->size());
        if (c.seed_spread > 0.0 && dec->size() > dec->kernel_dimension()) {
            for (int j = 0; j < dec->size(); ++j)
                if (dec->mode_class(j) != ModeClass::kernel)
                    coeffs(j) = normal(rng) / dec->alpha_weights()(j);
            coeffs *= c.seed_spread / alpha_norm_of(*dec, coeffs);
        }
        coeffs(e) += amplitude;
        seeds.push_back(GridFunction::from_spectral(dec, coeffs));
    }
    return seeds;
}

EvolutionSetup build_setup(const Context& ctx, double epsilon)
{
    auto nl = build_nonlinearity(ctx.config, *ctx.dec);
    return EvolutionSetup::make(ctx.dec, nl, epsilon, ctx.config.scheme, ctx.config.dt);
}

NewtonOptions newton_options(const ExperimentConfig& c)
{
    NewtonOptions o;
    o.mode_cut = c.mode_cut;
    return o;
}

int parity(int d)
{
    return d % 2 == 0 ? 1 : -1;
}

// ---------------------------------------------------------------------------

void spectral_audit(Context& ctx)
{
    const auto& dec = *ctx.dec;
    const auto& problem = dec.problem();
    ctx.info(fmt::format("k = {}, lambda = {}, delta = {}, c = {}", dec.k(), dec.lambda(), dec.delta(),
                         dec.decay_constant()));
    ctx.info(fmt::format("dim X- = {}, dim X0 = {}, dim X+ = {}", dec.minus_modes().size(), dec.kernel_dimension(),
                         dec.plus_modes().size()));

    ctx.check("orthonormality", dec.orthonormality_defect() <= 1e-10,
              fmt::format("Gram defect {:.3e}", dec.orthonormality_defect()));
    const double residual = dec.residual_defect(ctx.matrix);
    ctx.check("eigen residual", residual <= 1e-9, fmt::format("max relative residual {:.3e}", residual));

    if (problem.kind == DomainKind::interval && ctx.config.coefficient.rfind("constant", 0) == 0) {
        const double a = problem.coefficient(0.0);
        const double h = problem.spacing(0);
        const int n = problem.grid_size;
        double worst = 0.0;
        for (int j = 1; j <= n; ++j) {
            const double s = std::sin(j * 3.141592653589793 / (2.0 * (n + 1)));
            const double exact = a * 4.0 / (h * h) * s * s;
            worst = std::max(worst, std::abs(dec.raw_eigenvalues()(j - 1) - exact) / exact);
        }
        ctx.check("closed-form eigenvalues", worst <= 1e-10, fmt::format("max relative error {:.3e}", worst));
    }

    std::mt19937_64 rng(ctx.config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double algebra = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd u(dec.size());
        for (int j = 0; j < dec.size(); ++j)
            u(j) = normal(rng);
        const GridFunction g = GridFunction::from_values(ctx.dec, u);
        const GridFunction p = project(dec, g, Part::P);
        const GridFunction qm = project(dec, g, Part::Q_minus);
        const GridFunction qp = project(dec, g, Part::Q_plus);
        const double scale = g.norm_h();
        algebra = std::max({algebra, (p + qm + qp - g).norm_h() / scale,
                            (project(dec, p, Part::P) - p).norm_h() / scale,
                            (project(dec, qp, Part::Q_plus) - qp).norm_h() / scale,
                            (project(dec, qm, Part::Q_minus) - qm).norm_h() / scale,
                            project(dec, p, Part::Q).norm_h() / scale, project(dec, qp, Part::P).norm_h() / scale,
                            std::abs(dec.inner(p.values(), (qm + qp).values())) / (scale * scale)});
    }
    ctx.check("projection algebra", algebra <= 1e-10, fmt::format("max defect {:.3e} on 100 vectors", algebra));

    const DecayReport decay = verify_decay(dec, [&] {
        std::vector<double> t = ctx.config.decay_times;
        for (double v : ctx.config.decay_times)
            t.push_back(-v);
        return t;
    }(), 50, ctx.config.seed);
    for (const DecayCheck* c : {&decay.smoothing_plus, &decay.decay_plus, &decay.growth_minus}) {
        if (c->status == CheckStatus::skipped)
            ctx.info(fmt::format("decay check {} skipped (empty subspace)", c->name));
        else
            ctx.check("decay " + c->name, c->status == CheckStatus::pass,
                      fmt::format("{} violations in {} samples, worst constant {}", c->violations, c->samples,
                                  c->worst_constant));
    }
    if (problem.kind == DomainKind::interval) {
        const int pairs = adjacent_zero_pairs(dec);
        ctx.check("kernel zeros isolated", pairs == 0, fmt::format("{} adjacent near-zero pairs", pairs));
    }

    auto modes = ctx.open("modes.csv");
    modes << "index,eigenvalue,cluster,class\n";
    for (int j = 0; j < dec.size(); ++j)
        modes << fmt::format("{},{},{},{}\n", j, dec.eigenvalues()(j), dec.cluster_of_mode()[static_cast<std::size_t>(j)],
                             to_string(dec.mode_class(j)));
    auto out = ctx.open("decay.csv");
    out << "check,status,worst_constant,samples,violations\n";
    for (const DecayCheck* c : {&decay.smoothing_plus, &decay.decay_plus, &decay.growth_minus})
        out << fmt::format("{},{},{},{},{}\n", c->name, to_string(c->status), c->worst_constant, c->samples,
                           c->violations);
}

void nonexistence(Context& ctx)
{
    if (ctx.config.family != "kernel_constant")
        throw ConfigurationError("the nonexistence experiment uses the kernel_constant family");
    const auto& dec = *ctx.dec;
    const EvolutionSetup setup = build_setup(ctx, ctx.config.epsilon);
    const double amplitude = ctx.config.params.count("amplitude") ? ctx.config.params.at("amplitude") : 1.0;
    const int index = ctx.config.params.count("kernel_index") ? static_cast<int>(ctx.config.params.at("kernel_index")) : 0;
    const Eigen::VectorXd y0 = project_coefficients(
        dec, dec.to_spectral(amplitude * dec.basis().col(dec.kernel_modes()[static_cast<std::size_t>(index)])), Part::P);

    const auto seeds = build_seeds(ctx.config, ctx.dec);
    auto out = ctx.open("nonexistence.csv");
    out << "seed,kernel_amplitude,drift_error,status,iterations,residual\n";
    double worst_drift = 0.0;
    int converged = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const GridFunction phi = poincare_map(setup, seeds[i]);
        const Eigen::VectorXd drift = project_coefficients(dec, phi.spectral() - seeds[i].spectral(), Part::P);
        const double error = (drift - setup.epsilon * setup.period() * y0).norm();
        worst_drift = std::max(worst_drift, error);
        const PeriodicOrbit orbit = find_fixed_point(setup, seeds[i], newton_options(ctx.config));
        converged += orbit.certified() ? 1 : 0;
        out << fmt::format("{},{},{},{},{},{}\n", i, ctx.config.seeds[i], error, to_string(orbit.status),
                           orbit.iterations, orbit.residual);
        ctx.say(fmt::format("seed {}: {} ({})", i, to_string(orbit.status), orbit.message));
    }
    ctx.check("kernel drift equals eps T y0", worst_drift <= 1e-9, fmt::format("max error {:.3e}", worst_drift));
    ctx.check("no periodic orbit found", converged == 0,
              fmt::format("{} of {} seeds certified a fixed point", converged, seeds.size()));
}

void averaging_sweep(Context& ctx)
{
    const EvolutionSetup setup = build_setup(ctx, ctx.config.eps_list.front());
    auto seeds = build_seeds(ctx.config, ctx.dec);
    AveragingOptions options;
    options.newton = newton_options(ctx.config);
    options.extra_seeds.assign(seeds.begin() + 1, seeds.end());
    const AveragingReport report =
        averaging_experiment(setup, ctx.config.eps_list, ctx.config.U_radius, ctx.config.V_radius, seeds.front(), options);

    if (report.brouwer)
        ctx.info(fmt::format("deg_B(g, U) = {} (min |g| on boundary {})", report.brouwer->value,
                             report.brouwer->min_boundary_norm));
    else
        ctx.info("deg_B(g, U) undefined: " + report.brouwer_error);
    if (report.g_root)
        ctx.info(fmt::format("g root at kernel coordinate {}", (*report.g_root)(0)));

    {
        auto out = ctx.open("averaging.csv");
        write_averaging_csv(out, report);
    }
    {
        auto out = ctx.open("sweep.csv");
        out << "epsilon,status,residual,q_norm_alpha,x_norm_alpha,kernel_coord,jacobian_sign,q_bound,R\n";
        for (std::size_t i = 0; i < report.orbits.size(); ++i) {
            const auto& orbit = report.orbits[i];
            const auto& row = report.rows[i];
            const double R = orbit.certified() ? apriori_bound(setup.with_epsilon(orbit.epsilon), orbit).R
                                               : std::numeric_limits<double>::quiet_NaN();
            out << fmt::format("{},{},{},{},{},{},{},{},{}\n", orbit.epsilon, to_string(orbit.status), orbit.residual,
                               row.q_norm, row.x_norm, row.kernel_coord, orbit.jacobian_sign, orbit.q_bound, R);
        }
    }
    const PeriodicOrbit* last = nullptr;
    for (const auto& orbit : report.orbits)
        if (orbit.certified())
            last = &orbit;
    if (last) {
        auto out = ctx.open("orbit.csv");
        write_trajectory_csv(out, last->trajectory,
                             ctx.config.trajectory_columns == "values" ? TrajectoryColumns::values
                                                                       : TrajectoryColumns::spectral);
    }

    ctx.check("degree of g defined", report.existence_checked,
              report.brouwer ? fmt::format("deg_B = {}", report.brouwer->value) : report.brouwer_error);
    bool all_certified = true, bounds = true;
    for (const auto& orbit : report.orbits) {
        all_certified = all_certified && orbit.certified();
        if (orbit.certified())
            bounds = bounds && apriori_bound(setup.with_epsilon(orbit.epsilon), orbit).holds();
    }
    ctx.check("fixed point certified at every eps", all_certified, fmt::format("{} sweep values", report.orbits.size()));
    bool decreasing = true;
    for (std::size_t i = 1; i < report.rows.size(); ++i)
        decreasing = decreasing && report.rows[i].q_norm < report.rows[i - 1].q_norm;
    ctx.check("||Q x*||_alpha decreases along the sweep", decreasing, "");
    if (!report.rows.empty()) {
        const auto& r = report.rows.back();
        ctx.check("Q part small at the smallest eps", r.q_norm <= 0.05 * r.x_norm,
                  fmt::format("||Qx*|| = {}, ||x*|| = {}", r.q_norm, r.x_norm));
        ctx.check("kernel coordinate near the g root", r.root_distance <= options.root_tolerance,
                  fmt::format("relative distance {}", r.root_distance));
        ctx.check("regular-value degree equals (-1)^d_k deg_B", r.degree_certified && r.degree_value == r.expected_degree,
                  fmt::format("{} vs expected {}", r.degree_value, r.expected_degree));
    }
    ctx.check("a-priori bound on every certified orbit", bounds, "");
    ctx.check("smallest eps passes all averaging checks", report.pass, "");

    const PlotScripts scripts = emit_plot_scripts(ctx.dir.string());
    for (const auto& s : scripts.written)
        ctx.result.files.push_back(s);
    for (const auto& s : scripts.skipped)
        ctx.info("plot script skipped: " + s);
}

struct Expectation {
    std::optional<int> sign;
    std::string reason;
};

Expectation expectation_from(Context& ctx, const Nonlinearity& nl, std::vector<ConditionReport>& reports,
                             bool use_ll, bool use_sr)
{
    const auto& dec = *ctx.dec;
    const int dk = dec.cumulative_multiplicity(dec.k());
    const int dk1 = dec.cumulative_multiplicity(dec.k() - 1);
    auto record = [&](ConditionReport r) {
        reports.push_back(r);
        return r.holds == Verdict::yes;
    };
    if (use_ll && nl.landesman_lazer) {
        if (record(check_landesman_lazer(dec, nl, Condition::LL1)))
            return {parity(dk), "LL1"};
        if (record(check_landesman_lazer(dec, nl, Condition::LL2)))
            return {parity(dk1), "LL2"};
    }
    if (use_sr && nl.strong_resonance) {
        if (record(check_strong_resonance(dec, nl, Condition::SR1)))
            return {parity(dk), "SR1"};
        if (record(check_strong_resonance(dec, nl, Condition::SR2)))
            return {parity(dk1), "SR2"};
    }
    return {std::nullopt, "no sufficient condition holds"};
}

void write_conditions(Context& ctx, const std::vector<ConditionReport>& reports)
{
    auto out = ctx.open("conditions.csv");
    out << "condition,holds,margin,R_used\n";
    for (const auto& r : reports)
        out << fmt::format("{},{},{},{}\n", to_string(r.condition), to_string(r.holds), r.margin, r.R_used);
}

enum class Require { none, landesman_lazer, strong_resonance };

void orbit_experiment(Context& ctx, bool use_ll, bool use_sr, Require require)
{
    const auto& dec = *ctx.dec;
    const EvolutionSetup setup = build_setup(ctx, ctx.config.epsilon);
    const auto& nl = *setup.nonlinearity;

    std::vector<ConditionReport> reports;
    Expectation expected = expectation_from(ctx, nl, reports, use_ll, use_sr);
    if (!expected.sign) {
        const int dk = dec.cumulative_multiplicity(dec.k());
        const int dk1 = dec.cumulative_multiplicity(dec.k() - 1);
        GeometricOptions g;
        g.seed = ctx.config.seed;
        const auto g1 = check_geometric(ctx.dec, setup.nonlinearity, Condition::G1, ctx.config.B_radius,
                                        ctx.config.radii, g);
        reports.push_back(g1);
        if (g1.holds == Verdict::yes) {
            expected = {parity(dk), "G1"};
        } else {
            const auto g2 = check_geometric(ctx.dec, setup.nonlinearity, Condition::G2, ctx.config.B_radius,
                                            ctx.config.radii, g);
            reports.push_back(g2);
            if (g2.holds == Verdict::yes)
                expected = {parity(dk1), "G2"};
        }
    }
    for (const auto& r : reports)
        ctx.info(fmt::format("{}: {} (margin {})", to_string(r.condition), to_string(r.holds), r.margin));
    write_conditions(ctx, reports);
    if (require == Require::landesman_lazer)
        ctx.check("Landesman-Lazer condition holds", expected.reason == "LL1" || expected.reason == "LL2",
                  expected.reason);
    if (require == Require::strong_resonance)
        ctx.check("strong resonance condition holds", expected.reason == "SR1" || expected.reason == "SR2",
                  expected.reason);

    const NewtonOptions options = newton_options(ctx.config);
    PeriodicOrbit orbit;
    for (const auto& seed : build_seeds(ctx.config, ctx.dec)) {
        orbit = find_fixed_point(setup, seed, options);
        ctx.say(fmt::format("seed: {} after {} iterations ({})", to_string(orbit.status), orbit.iterations,
                            orbit.message));
        if (orbit.certified())
            break;
    }
    ctx.check("certified periodic orbit", orbit.certified(),
              fmt::format("status {}, residual {:.3e}", to_string(orbit.status), orbit.residual));
    if (!orbit.certified())
        return;

    const double loop = (orbit.trajectory.states.front() - orbit.trajectory.states.back()).norm_alpha();
    ctx.check("trajectory closes", loop <= 2.0 * orbit.residual + 1e-12,
              fmt::format("||u(0) - u(T)|| = {:.3e}", loop));
    ctx.check("jacobian sign matches the index formula", expected.sign && orbit.jacobian_sign == *expected.sign,
              fmt::format("sign {} vs expected {} ({})", orbit.jacobian_sign,
                          expected.sign ? std::to_string(*expected.sign) : std::string("none"), expected.reason));

    const JacobianInfo wide = truncated_jacobian(setup, orbit.fixed_point, ctx.config.mode_cut_check);
    ctx.check("jacobian sign stable under mode_cut increase", wide.sign == orbit.jacobian_sign,
              fmt::format("mode_cut {} -> {}: {} -> {}", orbit.mode_cut, std::min(ctx.config.mode_cut_check, dec.size()),
                          orbit.jacobian_sign, wide.sign));
    const AprioriReport bound = apriori_bound(setup, orbit);
    ctx.check("a-priori bound", bound.holds() && bound.slack > 0.0,
              fmt::format("q_bound {} <= R {} (slack {})", bound.q_bound, bound.R, bound.slack));

    {
        auto out = ctx.open("index.csv");
        out << "mode_cut,jacobian_sign,sigma_min\n";
        out << fmt::format("{},{},{}\n", orbit.mode_cut, orbit.jacobian_sign, orbit.min_singular_value);
        out << fmt::format("{},{},{}\n", std::min(ctx.config.mode_cut_check, dec.size()), wide.sign,
                           wide.min_singular_value);
    }
    {
        auto out = ctx.open("orbit.csv");
        write_trajectory_csv(out, orbit.trajectory,
                             ctx.config.trajectory_columns == "values" ? TrajectoryColumns::values
                                                                       : TrajectoryColumns::spectral);
    }
    {
        auto out = ctx.open("orbit_summary.json");
        out << orbit_summary_json(orbit, bound) << '\n';
    }
}

void conditions_audit(Context& ctx)
{
    const auto& dec = *ctx.dec;
    const auto nl = build_nonlinearity(ctx.config, dec);
    GeometricOptions g;
    g.seed = ctx.config.seed;

    std::vector<ConditionReport> reports;
    reports.push_back(check_geometric(ctx.dec, nl, Condition::G1, ctx.config.B_radius, ctx.config.radii, g));
    reports.push_back(check_geometric(ctx.dec, nl, Condition::G2, ctx.config.B_radius, ctx.config.radii, g));
    if (nl->landesman_lazer) {
        reports.push_back(check_landesman_lazer(dec, *nl, Condition::LL1));
        reports.push_back(check_landesman_lazer(dec, *nl, Condition::LL2));
    }
    if (nl->strong_resonance) {
        reports.push_back(check_strong_resonance(dec, *nl, Condition::SR1));
        reports.push_back(check_strong_resonance(dec, *nl, Condition::SR2));
    }
    auto verdict = [&](Condition c) -> std::optional<Verdict> {
        for (const auto& r : reports)
            if (r.condition == c)
                return r.holds;
        return std::nullopt;
    };
    for (const auto& r : reports)
        ctx.info(fmt::format("{}: {} (margin {}, R_used {})", to_string(r.condition), to_string(r.holds), r.margin,
                             r.R_used));
    write_conditions(ctx, reports);

    ctx.check("G1 and G2 exclusive", !(verdict(Condition::G1) == Verdict::yes && verdict(Condition::G2) == Verdict::yes),
              "");
    auto implies = [&](Condition a, Condition b) {
        const auto va = verdict(a);
        if (va && *va == Verdict::yes)
            ctx.check(fmt::format("{} implies {}", to_string(a), to_string(b)), verdict(b) == Verdict::yes, "");
    };
    implies(Condition::LL1, Condition::G1);
    implies(Condition::LL2, Condition::G2);
    implies(Condition::SR1, Condition::G1);
    implies(Condition::SR2, Condition::G2);

    auto expect = ctx.config.echo.find("experiment.expect");
    if (expect != ctx.config.echo.end()) {
        std::stringstream ss(expect->second);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            const auto eq = item.find(':');
            const std::string name = trim(item.substr(0, eq));
            const std::string want = eq == std::string::npos ? "yes" : trim(item.substr(eq + 1));
            std::optional<Verdict> got;
            for (const auto& r : reports)
                if (name == to_string(r.condition))
                    got = r.holds;
            if (!got)
                throw ConfigurationError("experiment.expect names untested condition '" + name + "'");
            ctx.check(fmt::format("{} is {}", name, want), want == to_string(*got), fmt::format("got {}", to_string(*got)));
        }
    }
}

void write_summary(Context& ctx)
{
    auto out = ctx.open("summary.txt");
    out << "experiment: " << ctx.config.experiment << '\n';
    for (const auto& line : ctx.result.info)
        out << "  " << line << '\n';
    for (const auto& c : ctx.result.checks)
        out << (c.pass ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << '\n';
    const bool all = std::all_of(ctx.result.checks.begin(), ctx.result.checks.end(), [](const Check& c) { return c.pass; });
    out << "overall: " << (all && !ctx.result.checks.empty() ? "PASS" : "FAIL") << '\n';
}

void write_manifest(Context& ctx)
{
    nlohmann::json manifest;
    manifest["experiment"] = ctx.config.experiment;
    manifest["config"] = ctx.config.echo;
    manifest["seed"] = ctx.config.seed;
    manifest["versions"] = {{"resonance", RESONANCE_VERSION},
                            {"compiler", __VERSION__},
                            {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
                            {"fmt", FMT_VERSION}};
    ctx.result.files.push_back("manifest.json");
    manifest["files"] = ctx.result.files;
    manifest["exit_code"] = ctx.result.exit_code;
    std::ofstream out(ctx.dir / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << '\n';
}

}  // namespace

RunResult run(ExperimentConfig config, const RunOptions& options)
{
    if (options.output_dir)
        config.output_dir = *options.output_dir;
    if (options.seed) {
        config.seed = *options.seed;
        config.echo["seed"] = std::to_string(*options.seed);
    }

    Context ctx;
    ctx.config = std::move(config);
    ctx.log = options.log ? options.log : &std::cerr;
    ctx.verbose = options.verbose;
    ctx.dir = ctx.config.output_dir;
    ctx.result.output_dir = ctx.dir.string();
    std::error_code ec;
    fs::create_directories(ctx.dir, ec);
    if (ec || !fs::is_directory(ctx.dir))
        throw ConfigurationError("cannot create output directory '" + ctx.dir.string() + "'");

    const EllipticProblem problem = build_problem(ctx.config);
    ctx.matrix = assemble(problem);
    ctx.dec = ctx.config.lambda_target ? decompose(problem, ctx.matrix, *ctx.config.lambda_target, ctx.config.alpha)
                                       : decompose_index(problem, ctx.matrix, ctx.config.k.value_or(1), ctx.config.alpha);

    try {
        const std::string& name = ctx.config.experiment;
        if (name == "spectral_audit")
            spectral_audit(ctx);
        else if (name == "nonexistence")
            nonexistence(ctx);
        else if (name == "averaging_sweep")
            averaging_sweep(ctx);
        else if (name == "index_formula")
            orbit_experiment(ctx, true, true, Require::none);
        else if (name == "ll_criterion")
            orbit_experiment(ctx, true, false, Require::landesman_lazer);
        else if (name == "sr_criterion")
            orbit_experiment(ctx, false, true, Require::strong_resonance);
        else if (name == "conditions_audit")
            conditions_audit(ctx);
    } catch (const ConfigurationError&) {
        throw;
    } catch (const Error& e) {
        ctx.result.diagnostic = e.what();
        ctx.check("experiment completed", false, e.what());
    }

    const bool all = !ctx.result.checks.empty() &&
                     std::all_of(ctx.result.checks.begin(), ctx.result.checks.end(), [](const Check& c) { return c.pass; });
    ctx.result.exit_code = all ? kExitPass : kExitFailure;
    write_summary(ctx);
    write_manifest(ctx);
    return ctx.result;
}

// ---------------------------------------------------------------------------

PlotScripts emit_plot_scripts(const std::string& run_dir)
{
    struct Spec {
        const char* file;
        const char* data;
        const char* body;
    };
    static const Spec specs[] = {
        {"eps_vs_qnorm.plot", "averaging.csv",
         "title = eps versus ||Q x*||_alpha\nkind = line\nx = epsilon\ny = q_norm_alpha\nxscale = log\nyscale = log\n"},
        {"kernel_trace.plot", "sweep.csv",
         "title = kernel coordinate of x* along the sweep\nkind = line\nx = epsilon\ny = kernel_coord\nxscale = log\n"},
        {"orbit_heatmap.plot", "orbit.csv",
         "title = periodic orbit u(t, x)\nkind = heatmap\nrows = t\ncolumns = all-but-first\n"},
    };

    PlotScripts result;
    const fs::path dir(run_dir);
    for (const auto& spec : specs) {
        if (!fs::exists(dir / spec.data)) {
            result.skipped.push_back(spec.file);
            continue;
        }
        std::ofstream out(dir / spec.file, std::ios::binary);
        out << "# plot specification; any plotting front end can render it\n";
        out << "data = " << spec.data << '\n' << spec.body;
        result.written.push_back(spec.file);
    }
    return result;
}

int main_entry(int argc, char** argv)
{
    CLI::App app{"Periodic solutions of parabolic equations at resonance"};
    app.require_subcommand(1);
    auto* sub = app.add_subcommand("run", "run one experiment configuration");
    std::string config_path;
    std::string output_dir;
    std::uint64_t seed = 0;
    bool verbose = false;
    sub->add_option("config", config_path, "experiment configuration file")->required();
    auto* out_opt = sub->add_option("--output-dir", output_dir, "directory for manifest, CSVs and summary");
    auto* seed_opt = sub->add_option("--seed", seed, "override the configured random seed");
    sub->add_flag("--verbose", verbose, "print progress and checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        ExperimentConfig config = ExperimentConfig::from(ConfigFile::load(config_path));
        RunOptions options;
        if (*out_opt)
            options.output_dir = output_dir;
        if (*seed_opt)
            options.seed = seed;
        options.verbose = verbose;
        const RunResult result = run(std::move(config), options);
        for (const auto& c : result.checks)
            std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << '\n';
        if (!result.diagnostic.empty())
            std::cerr << "error: " << result.diagnostic << '\n';
        std::cout << "output: " << result.output_dir << '\n';
        return result.exit_code;
    } catch (const ConfigurationError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ResonanceMismatchError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const EllipticityError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace resonance::cli
