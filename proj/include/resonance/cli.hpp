#pragma once

#include "resonance/evolve.hpp"
#include "resonance/nonlinearity.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace resonance::cli {

/// Flat `key = value` text with `[section]` headers or dotted keys and `#` comments.
class ConfigFile {
public:
    static ConfigFile parse(std::istream& in, const std::string& origin = "<config>");
    static ConfigFile load(const std::string& path);

    const std::map<std::string, std::string>& entries() const { return entries_; }
    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { entries_[key] = value; }

private:
    std::map<std::string, std::string> entries_;
};

struct ExperimentConfig {
    // problem
    std::string domain = "interval";
    double length_x = 3.141592653589793;
    double length_y = 3.141592653589793;
    int grid_size = 127;
    std::string coefficient = "constant:1";
    // resonance
    std::optional<int> k;
    std::optional<double> lambda_target;
    double alpha = 0.9;
    // nonlinearity
    std::string family = "arctan";
    Params params;
    // time
    double T = 1.0;
    double dt = 0.0;  ///< 0 means T / 512
    Scheme scheme = Scheme::etd2rk;
    std::vector<double> decay_times{0.1, 1.0, 5.0};
    // experiment
    std::string experiment;
    double epsilon = 1.0;
    // solver
    int mode_cut = 64;
    int mode_cut_check = 96;
    std::vector<double> seeds{0.0};  ///< kernel amplitudes of the Newton starting points
    double seed_spread = 0.1;       ///< alpha-norm of the random Q part added to seeds
    std::vector<double> eps_list{0.2, 0.1, 0.05};
    double U_radius = 10.0;
    double V_radius = 1.0;
    double B_radius = 1.0;
    std::vector<double> radii{1.0, 10.0, 100.0};
    // output
    std::string output_dir = "out";
    std::string trajectory_columns = "values";
    std::uint64_t seed = 1;

    /// Echo of the parsed key/value pairs, written into the manifest.
    std::map<std::string, std::string> echo;

    static ExperimentConfig from(const ConfigFile& file);
};

const std::vector<std::string>& experiment_names();

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunOptions {
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> seed;
    bool verbose = false;
    std::ostream* log = nullptr;
};

struct RunResult {
    int exit_code = 0;
    std::vector<Check> checks;
    std::vector<std::string> info;
    std::vector<std::string> files;  ///< relative to the output directory
    std::string output_dir;
    std::string diagnostic;
};

inline constexpr int kExitPass = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Run one experiment and write the manifest, CSVs and summary. Configuration
/// problems surface as ConfigurationError; numeric failures give exit code 1.
RunResult run(ExperimentConfig config, const RunOptions& options = {});

struct PlotScripts {
    std::vector<std::string> written;
    std::vector<std::string> skipped;  ///< scripts whose CSV is missing
};

/// Declarative plot specifications next to the CSVs they reference.
PlotScripts emit_plot_scripts(const std::string& run_dir);

/// Full command line entry: `run <config> [--output-dir D] [--seed S] [--verbose]`.
int main_entry(int argc, char** argv);

}  // namespace resonance::cli
