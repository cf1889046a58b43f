#include "gclab/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "gclab/error.hpp"
#include "gclab/fmt.hpp"
#include "gclab/rng.hpp"

namespace gclab::dataio {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string chomp(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  return line;
}

[[noreturn]] void parse_fail(const std::string& path, int lineno, const std::string& msg) {
  throw InvalidInput(path + ":" + std::to_string(lineno) + ": " + msg);
}

long parse_int(const std::string& s, const std::string& path, int lineno, const char* what) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') parse_fail(path, lineno, std::string(what) + " '" + s + "' is not an integer");
  return v;
}

double parse_num(const std::string& s, const std::string& path, int lineno, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') parse_fail(path, lineno, std::string(what) + " '" + s + "' is not a number");
  return v;
}

std::string dir_of(const std::string& path) {
  const std::size_t pos = path.find_last_of('/');
  if (pos == std::string::npos) return ".";
  if (pos == 0) return "/";
  return path.substr(0, pos);
}

}  // namespace

linalg::Vec PreprocessedDataset::signal(int hour, int day) const {
  if (hour < 0 || hour > 23 || day < 1 || day > days)
    throw InvalidInput("hour must be 0..23 and day 1.." + std::to_string(days));
  linalg::Vec x(n);
  for (int v = 0; v < n; ++v) x[v] = at(v, hour, day);
  return x;
}

double PreprocessedDataset::original(int station, int hour, int day) const {
  return b * at(station, hour, day) + x_ave[station];
}

TemperatureDataset load_weather(const std::string& temps_csv_path) {
  const std::string stations_path = dir_of(temps_csv_path) + "/stations.csv";

  TemperatureDataset ds;
  std::map<std::string, int> station_index;
  {
    std::ifstream in(stations_path);
    if (!in) throw InvalidInput("cannot open " + stations_path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = chomp(line);
      if (lineno == 1) {
        if (line != "station,lat,lon")
          parse_fail(stations_path, lineno, "expected header 'station,lat,lon'");
        continue;
      }
      if (line.empty()) continue;
      const std::vector<std::string> f = split_csv(line);
      if (f.size() != 3) parse_fail(stations_path, lineno, "expected 3 fields");
      if (f[0].empty()) parse_fail(stations_path, lineno, "empty station id");
      if (station_index.count(f[0]))
        parse_fail(stations_path, lineno, "duplicate station '" + f[0] + "'");
      station_index[f[0]] = static_cast<int>(ds.station_ids.size());
      ds.station_ids.push_back(f[0]);
      ds.station_coords.push_back({parse_num(f[1], stations_path, lineno, "lat"),
                                   parse_num(f[2], stations_path, lineno, "lon")});
    }
  }
  ds.n = static_cast<int>(ds.station_ids.size());
  if (ds.n == 0) throw InvalidInput(stations_path + ": no stations");

  struct Cell {
    int station, hour, day;
    double temp;
  };
  std::vector<Cell> cells;
  int max_day = 0;
  {
    std::ifstream in(temps_csv_path);
    if (!in) throw InvalidInput("cannot open " + temps_csv_path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = chomp(line);
      if (lineno == 1) {
        if (line != "station,day,hour,temp_c")
          parse_fail(temps_csv_path, lineno, "expected header 'station,day,hour,temp_c'");
        continue;
      }
      if (line.empty()) continue;
      const std::vector<std::string> f = split_csv(line);
      if (f.size() != 4) parse_fail(temps_csv_path, lineno, "expected 4 fields");
      auto it = station_index.find(f[0]);
      if (it == station_index.end())
        parse_fail(temps_csv_path, lineno, "unknown station '" + f[0] + "'");
      const long day = parse_int(f[1], temps_csv_path, lineno, "day");
      const long hour = parse_int(f[2], temps_csv_path, lineno, "hour");
      if (day < 1) parse_fail(temps_csv_path, lineno, "day must be >= 1");
      if (hour < 0 || hour > 23) parse_fail(temps_csv_path, lineno, "hour must be 0..23");
      const double temp = parse_num(f[3], temps_csv_path, lineno, "temp_c");
      cells.push_back({it->second, static_cast<int>(hour), static_cast<int>(day), temp});
      max_day = std::max<int>(max_day, static_cast<int>(day));
    }
  }
  if (cells.empty()) throw InvalidInput(temps_csv_path + ": no temperature rows");
  ds.days = max_day;
  ds.values.assign(static_cast<std::size_t>(ds.n) * 24 * ds.days, 0.0);
  std::vector<char> seen(ds.values.size(), 0);
  for (const Cell& c : cells) {
    const std::size_t idx = (static_cast<std::size_t>(c.station) * 24 + c.hour) * ds.days +
                            (c.day - 1);
    if (seen[idx])
      throw InvalidInput(temps_csv_path + ": duplicate cell (" + ds.station_ids[c.station] +
                         ", day " + std::to_string(c.day) + ", hour " + std::to_string(c.hour) +
                         ")");
    seen[idx] = 1;
    ds.values[idx] = c.temp;
  }

  std::string missing;
  int missing_count = 0;
  for (int v = 0; v < ds.n; ++v) {
    for (int i = 0; i < 24; ++i) {
      for (int d = 1; d <= ds.days; ++d) {
        const std::size_t idx = (static_cast<std::size_t>(v) * 24 + i) * ds.days + (d - 1);
        if (seen[idx]) continue;
        ++missing_count;
        if (missing_count <= 10)
          missing += " (" + ds.station_ids[v] + ", day " + std::to_string(d) + ", hour " +
                     std::to_string(i) + ")";
      }
    }
  }
  if (missing_count > 0) {
    if (missing_count > 10)
      missing += " and " + std::to_string(missing_count - 10) + " more";
    throw InvalidInput(temps_csv_path + ": missing cells:" + missing);
  }
  return ds;
}

PreprocessedDataset preprocess(const TemperatureDataset& ds, std::optional<double> b,
                               int hours_divisor) {
  if (ds.n < 1 || ds.days < 1 ||
      ds.values.size() != static_cast<std::size_t>(ds.n) * 24 * ds.days)
    throw InvalidInput("malformed temperature dataset");
  if (hours_divisor != 23 && hours_divisor != 24)
    throw InvalidInput("hours divisor must be 23 or 24");

  PreprocessedDataset out;
  out.n = ds.n;
  out.days = ds.days;
  out.hours_divisor = hours_divisor;
  out.station_ids = ds.station_ids;
  out.station_coords = ds.station_coords;
  out.x_ave.assign(ds.n, 0.0);
  for (int v = 0; v < ds.n; ++v) {
    double acc = 0.0;
    for (int i = 0; i < 24; ++i)
      for (int d = 1; d <= ds.days; ++d) acc += ds.at(v, i, d);
    out.x_ave[v] = acc / (static_cast<double>(hours_divisor) * ds.days);
  }

  double maxdev = 0.0;
  for (int v = 0; v < ds.n; ++v)
    for (int i = 0; i < 24; ++i)
      for (int d = 1; d <= ds.days; ++d)
        maxdev = std::max(maxdev, std::fabs(ds.at(v, i, d) - out.x_ave[v]));

  if (b.has_value()) {
    if (!(*b > 0.0)) throw InvalidInput("scale must be positive");
    if (maxdev > *b)
      throw InvalidInput("scale " + fmt::format_double(*b) +
                         " is below the maximum deviation " + fmt::format_double(maxdev));
    out.b = *b;
  } else {
    out.b = maxdev > 0.0 ? maxdev : 1.0;
  }

  out.values.resize(ds.values.size());
  for (int v = 0; v < ds.n; ++v)
    for (int i = 0; i < 24; ++i)
      for (int d = 1; d <= ds.days; ++d)
        out.values[(static_cast<std::size_t>(v) * 24 + i) * ds.days + (d - 1)] =
            (ds.at(v, i, d) - out.x_ave[v]) / out.b;
  return out;
}

double target_sv(const PreprocessedDataset& pds, int day, int hour) {
  if (day < 1 || day > pds.days - 1)
    throw InvalidInput("day " + std::to_string(day) + " has no next day in 1.." +
                       std::to_string(pds.days));
  const linalg::Vec x = pds.signal(hour, day + 1);
  double sumsq = 0.0, sum = 0.0;
  for (double v : x) {
    sumsq += v * v;
    sum += v;
  }
  const double mean = sum / pds.n;
  return sumsq - mean * mean;
}

double QuadraticTarget::operator()(const linalg::Vec& x) const {
  const linalg::Vec y = linalg::matvec(b_q, x);
  double acc = 0.0;
  for (double v : y) acc += v * v;
  return acc;
}

QuadraticTarget synth_quadratic(const graph::Graph& g, std::uint64_t seed) {
  QuadraticTarget out;
  out.b_q = linalg::Mat(g.order, g.order);
  Rng rng(seed);
  for (int i = 0; i < g.order; ++i) out.b_q(i, i) = rng.uniform(-1.0, 1.0);
  for (const graph::Edge& e : g.edges) {
    out.b_q(e.i, e.j) = rng.uniform(-1.0, 1.0);
    out.b_q(e.j, e.i) = rng.uniform(-1.0, 1.0);
  }
  return out;
}

std::vector<linalg::Vec> sample_domain(int n, int s, std::uint64_t seed) {
  if (n < 1 || s < 1) throw InvalidInput("need n >= 1 and s >= 1");
  Rng rng(seed);
  std::vector<linalg::Vec> xs(s, linalg::Vec(n));
  for (linalg::Vec& x : xs)
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
  return xs;
}

TemperatureDataset synth_weather(int n_stations, int days, std::uint64_t seed) {
  if (n_stations < 1 || days < 1) throw InvalidInput("need at least one station and one day");
  TemperatureDataset ds;
  ds.n = n_stations;
  ds.days = days;
  ds.values.assign(static_cast<std::size_t>(n_stations) * 24 * days, 0.0);
  Rng rng(seed);

  std::vector<double> offset(n_stations), amp(n_stations), phase(n_stations);
  for (int v = 0; v < n_stations; ++v) {
    const double cx = rng.uniform01();
    const double cy = rng.uniform01();
    ds.station_ids.push_back("s" + std::to_string(v + 1));
    ds.station_coords.push_back({cx, cy});
    // Smooth functions of the coordinates plus a small jitter keep nearby
    // stations alike.
    offset[v] = 5.0 * std::sin(2.0 * kPi * cx) * std::cos(kPi * cy) + rng.uniform(-1.0, 1.0);
    amp[v] = 3.0 + 0.8 * std::sin(2.0 * kPi * cy);
    phase[v] = 0.3 * cx;
  }
  for (int v = 0; v < n_stations; ++v)
    for (int i = 0; i < 24; ++i)
      for (int d = 1; d <= days; ++d) {
        const double diurnal = amp[v] * std::sin(2.0 * kPi * (i - 14) / 24.0 + phase[v]);
        const double drift = 2.5 * std::sin(2.0 * kPi * d / 31.0);
        ds.at(v, i, d) = 12.0 + offset[v] + diurnal + drift + rng.uniform(-0.8, 0.8);
      }
  return ds;
}

void write_weather_csv(const TemperatureDataset& ds, const std::string& dir) {
  {
    std::ofstream out(dir + "/stations.csv");
    if (!out) throw InvalidInput("cannot write " + dir + "/stations.csv");
    out << "station,lat,lon\n";
    for (int v = 0; v < ds.n; ++v)
      out << ds.station_ids[v] << ',' << fmt::format_double(ds.station_coords[v][0]) << ','
          << fmt::format_double(ds.station_coords[v][1]) << '\n';
  }
  {
    std::ofstream out(dir + "/temps.csv");
    if (!out) throw InvalidInput("cannot write " + dir + "/temps.csv");
    out << "station,day,hour,temp_c\n";
    for (int v = 0; v < ds.n; ++v)
      for (int d = 1; d <= ds.days; ++d)
        for (int i = 0; i < 24; ++i)
          out << ds.station_ids[v] << ',' << d << ',' << i << ','
              << fmt::format_double(ds.at(v, i, d)) << '\n';
  }
}

}  // namespace gclab::dataio
