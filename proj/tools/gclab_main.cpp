#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "gclab/error.hpp"
#include "gclab/experiment.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw gclab::ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral graph network lab"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "run one experiment from a JSON config");
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool synthesize_weather = false;
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed, "override the config seed");
  run->add_flag("--synthesize-weather", synthesize_weather,
                "generate a synthetic station dataset instead of reading CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const gclab::experiment::RunOutput out =
        gclab::experiment::run_from_json(slurp(config_path), out_dir, seed, synthesize_weather);
    std::printf("wrote %zu files to %s\n", out.files.size(), out_dir.c_str());
    for (const std::string& f : out.files) std::printf("  %s\n", f.c_str());
    return 0;
  } catch (const gclab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const gclab::InvalidInput& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const gclab::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
