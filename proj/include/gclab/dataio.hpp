#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gclab/graph.hpp"
#include "gclab/linalg.hpp"

namespace gclab::dataio {

// Hourly station temperatures in degrees C. Hours are 0-based (0..23), days
// 1-based (1..days); every (station, hour, day) cell is present.
struct TemperatureDataset {
  int n = 0;
  int days = 0;
  std::vector<std::string> station_ids;
  std::vector<std::vector<double>> station_coords;  // (lat, lon) per station
  std::vector<double> values;

  double at(int station, int hour, int day) const {
    return values[(static_cast<std::size_t>(station) * 24 + hour) * days + (day - 1)];
  }
  double& at(int station, int hour, int day) {
    return values[(static_cast<std::size_t>(station) * 24 + hour) * days + (day - 1)];
  }
};

// Centered, scaled copy: value = (original - x_ave[station]) / b, every entry
// in [-1, 1]. hours_divisor is the denominator convention used for the
// per-station average: 24 averages over the actual hour count, 23 reproduces
// the off-by-one divisor some writeups use.
struct PreprocessedDataset {
  int n = 0;
  int days = 0;
  double b = 1.0;
  int hours_divisor = 24;
  linalg::Vec x_ave;
  std::vector<double> values;
  std::vector<std::string> station_ids;
  std::vector<std::vector<double>> station_coords;

  double at(int station, int hour, int day) const {
    return values[(static_cast<std::size_t>(station) * 24 + hour) * days + (day - 1)];
  }
  linalg::Vec signal(int hour, int day) const;           // over stations
  double original(int station, int hour, int day) const;  // b * value + x_ave
};

// Reads `station,day,hour,temp_c` rows plus a `stations.csv` sidecar
// (`station,lat,lon`) from the same directory. Station order follows the
// sidecar. Malformed rows fail with their line number; incomplete grids fail
// listing the missing (station, day, hour) cells.
TemperatureDataset load_weather(const std::string& temps_csv_path);

// b empty: b is set to the maximum absolute deviation (1 for a constant
// dataset), so at least one scaled entry touches +-1. b given: must cover the
// deviations, otherwise out of range.
PreprocessedDataset preprocess(const TemperatureDataset& ds,
                               std::optional<double> b = std::nullopt, int hours_divisor = 24);

// ||x_{day+1}(hour)||_2^2 - mean(x_{day+1}(hour))^2, the squared-variance
// target of the next-day signal (written exactly this way; it is not an
// actual variance and can be negative). day must have a next day.
double target_sv(const PreprocessedDataset& pds, int day, int hour);

// f(x) = ||B x||_2^2 with b(i,i) and both b(i,j), b(j,i) for edges {i,j}
// uniform on [-1,1], all other entries zero.
struct QuadraticTarget {
  linalg::Mat b_q;
  double operator()(const linalg::Vec& x) const;
};
QuadraticTarget synth_quadratic(const graph::Graph& g, std::uint64_t seed);

std::vector<linalg::Vec> sample_domain(int n, int s, std::uint64_t seed);

// Statistics-matched synthetic weather: smooth station offsets over random
// plane coordinates, a diurnal sinusoid, a slow day drift, and bounded noise.
// Deviations from station means stay below 8 degrees, so the conventional
// scale 10.35 is always admissible.
TemperatureDataset synth_weather(int n_stations = 32, int days = 31, std::uint64_t seed = 0);

// Writes dir/temps.csv and dir/stations.csv in the load_weather schema.
void write_weather_csv(const TemperatureDataset& ds, const std::string& dir);

}  // namespace gclab::dataio
