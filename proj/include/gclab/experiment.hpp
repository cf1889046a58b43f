#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gclab/barron.hpp"
#include "gclab/model.hpp"
#include "gclab/spectral.hpp"

namespace gclab::experiment {

struct RunOutput {
  std::string report_json;         // also written to out_dir/report.json
  std::vector<std::string> files;  // paths written, relative to out_dir
};

// Parses an experiment config (JSON object with an "experiment" selector),
// runs it, and writes the CSV tables plus report.json under out_dir. Config
// problems throw ConfigError naming the offending field; numerical failures
// propagate as NumericalError. Reruns with the same config and seed produce
// byte-identical CSV files; report.json additionally carries wall-clock time.
RunOutput run_from_json(const std::string& config_text, const std::string& out_dir,
                        std::optional<std::uint64_t> seed_override = std::nullopt,
                        bool synthesize_weather = false);

// count networks in spectral_signal mode with `neurons` neurons each, entries
// uniform on [-1,1], output weights rescaled so ||Theta||_{P,1} equals q.
std::vector<model::NetworkParams> random_family(const spectral::SpectralBasis& basis, int count,
                                                int neurons, double q,
                                                const model::NormConfig& cfg, std::uint64_t seed);

}  // namespace gclab::experiment
