#include "resonance/cli.hpp"
#include "resonance/errors.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace resonance;
using namespace resonance::cli;
namespace fs = std::filesystem;

namespace {

ConfigFile parse(const std::string& text)
{
    std::istringstream in(text);
    return ConfigFile::parse(in);
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("resonance_test_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

const char* kSmallSweep = R"(seed = 5
[problem]
grid_size = 31
[resonance]
k = 1
[nonlinearity]
family = arctan
forcing = -0.5
[experiment]
name = averaging_sweep
[solver]
mode_cut = 16
eps_list = 0.2, 0.1
seeds = 0, 2
)";

int call_main(std::vector<std::string> args)
{
    std::vector<char*> argv;
    for (auto& a : args)
        argv.push_back(a.data());
    return main_entry(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("config parsing")
{
    const auto file = parse("seed = 3\n[problem]\ngrid_size = 63  # comment\n\n[time]\nT = 2\nresonance.k = 2\n");
    CHECK(file.entries().at("problem.grid_size") == "63");
    CHECK(file.entries().at("time.T") == "2");
    CHECK(file.entries().at("time.resonance.k") == "2");
    CHECK(file.has("seed"));
    CHECK_THROWS_AS(parse("[a]\nx = 1\nx = 2\n"), ConfigurationError);
    CHECK_THROWS_AS(parse("[a\nx = 1\n"), ConfigurationError);
    CHECK_THROWS_AS(parse("[a]\njust text\n"), ConfigurationError);
}

TEST_CASE("experiment config validation")
{
    const auto ok = ExperimentConfig::from(parse(kSmallSweep));
    CHECK(ok.experiment == "averaging_sweep");
    CHECK(ok.grid_size == 31);
    CHECK(ok.seed == 5);
    CHECK(ok.eps_list == std::vector<double>{0.2, 0.1});
    CHECK(ok.params.at("forcing") == -0.5);

    CHECK_THROWS_AS(ExperimentConfig::from(parse("[experiment]\nname = bogus\n")), ConfigurationError);
    CHECK_THROWS_AS(ExperimentConfig::from(parse("[experiment]\nname = nonexistence\n[solver]\nmodecut = 4\n")),
                    ConfigurationError);
    CHECK_THROWS_AS(ExperimentConfig::from(parse("[experiment]\nname = nonexistence\n[time]\nT = abc\n")),
                    ConfigurationError);
    CHECK_THROWS_AS(ExperimentConfig::from(parse("[problem]\ngrid_size = 31\n")), ConfigurationError);
    CHECK(experiment_names().size() == 7);
}

TEST_CASE("unknown experiment exits with usage code")
{
    const fs::path dir = scratch("usage");
    const fs::path conf = dir / "bad.conf";
    std::ofstream(conf) << "[experiment]\nname = fourier_magic\n";
    CHECK(call_main({"resonance", "run", conf.string(), "--output-dir", (dir / "out").string()}) == kExitUsage);
    CHECK(call_main({"resonance", "run", (dir / "missing.conf").string()}) == kExitUsage);
    CHECK(call_main({"resonance", "frobnicate"}) == kExitUsage);
}

TEST_CASE("resonance mismatch exits with usage code")
{
    const fs::path dir = scratch("mismatch");
    const fs::path conf = dir / "bad.conf";
    std::ofstream(conf) << "[resonance]\nlambda_target = 2.5\n[experiment]\nname = spectral_audit\n";
    CHECK(call_main({"resonance", "run", conf.string(), "--output-dir", (dir / "out").string()}) == kExitUsage);
}

TEST_CASE("averaging runs are deterministic and the manifest is complete")
{
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const auto config = ExperimentConfig::from(parse(kSmallSweep));
    RunOptions first, second;
    first.output_dir = a.string();
    second.output_dir = b.string();
    const auto ra = run(config, first);
    const auto rb = run(config, second);
    CHECK(ra.exit_code == kExitPass);
    CHECK(rb.exit_code == kExitPass);
    for (const char* name : {"averaging.csv", "sweep.csv", "orbit.csv"}) {
        INFO(name);
        REQUIRE(fs::exists(a / name));
        CHECK(slurp(a / name) == slurp(b / name));
    }

    const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    for (const char* key : {"config", "seed", "versions", "files", "exit_code"})
        CHECK(manifest.contains(key));
    CHECK(manifest["seed"] == 5);
    CHECK(manifest["exit_code"] == 0);
    CHECK(manifest["config"]["experiment.name"] == "averaging_sweep");
    for (const auto& f : manifest["files"])
        CHECK(fs::exists(a / f.get<std::string>()));
    CHECK(fs::exists(a / "summary.txt"));
    CHECK(slurp(a / "summary.txt").find("PASS") != std::string::npos);
}

TEST_CASE("seed override reaches the manifest")
{
    const fs::path dir = scratch("seed");
    auto config = ExperimentConfig::from(parse(kSmallSweep));
    RunOptions options;
    options.output_dir = dir.string();
    options.seed = 99;
    run(config, options);
    CHECK(nlohmann::json::parse(slurp(dir / "manifest.json"))["seed"] == 99);
}

TEST_CASE("plot scripts")
{
    const fs::path empty = scratch("plots_empty");
    const auto none = emit_plot_scripts(empty.string());
    CHECK(none.written.empty());
    CHECK(none.skipped.size() == 3);

    const fs::path full = scratch("plots_full");
    std::ofstream(full / "averaging.csv") << "epsilon,q_norm_alpha\n0.1,0.01\n";
    std::ofstream(full / "sweep.csv") << "epsilon,kernel_coord\n0.1,0.8\n";
    std::ofstream(full / "orbit.csv") << "t,u_0\n0,0\n";
    const auto some = emit_plot_scripts(full.string());
    CHECK(some.written.size() == 3);
    for (const auto& f : some.written)
        CHECK(fs::exists(full / f));
}

TEST_CASE("shipped presets parse")
{
    const char* env = std::getenv("RESONANCE_CONFIGS");
    if (!env)
        return;
    int count = 0;
    for (const auto& entry : fs::directory_iterator(env)) {
        if (entry.path().extension() != ".conf")
            continue;
        INFO(entry.path().string());
        CHECK_NOTHROW(ExperimentConfig::from(ConfigFile::load(entry.path().string())));
        ++count;
    }
    CHECK(count >= 7);
}
