#include "gclab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>

#include "gclab/bounds.hpp"
#include "gclab/dataio.hpp"
#include "gclab/error.hpp"
#include "gclab/fmt.hpp"
#include "gclab/graph.hpp"
#include "gclab/kernels.hpp"
#include "gclab/rng.hpp"
#include "gclab/train.hpp"
#include "json.hpp"

namespace gclab::experiment {

namespace {

using nlohmann::json;

// ---- config plumbing ------------------------------------------------------

json parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  return j;
}

void check_keys(const json& cfg, const std::string& exp, const std::set<std::string>& allowed) {
  for (const auto& item : cfg.items()) {
    const std::string& key = item.key();
    if (key == "experiment" || key == "seed") continue;
    if (!allowed.count(key))
      throw ConfigError("unknown config field '" + key + "' for experiment '" + exp + "'");
  }
}

[[noreturn]] void bad_field(const char* key, const char* want) {
  throw ConfigError(std::string("config field '") + key + "' must be " + want);
}

int get_int(const json& cfg, const char* key, int def) {
  if (!cfg.contains(key)) return def;
  if (!cfg.at(key).is_number_integer()) bad_field(key, "an integer");
  return cfg.at(key).get<int>();
}

double get_num(const json& cfg, const char* key, double def) {
  if (!cfg.contains(key)) return def;
  if (!cfg.at(key).is_number()) bad_field(key, "a number");
  return cfg.at(key).get<double>();
}

std::string get_str(const json& cfg, const char* key, const char* def) {
  if (!cfg.contains(key)) return def;
  if (!cfg.at(key).is_string()) bad_field(key, "a string");
  return cfg.at(key).get<std::string>();
}

std::vector<int> get_int_list(const json& cfg, const char* key, std::vector<int> def) {
  if (!cfg.contains(key)) return def;
  const json& j = cfg.at(key);
  if (!j.is_array() || j.empty()) bad_field(key, "a nonempty array of integers");
  std::vector<int> out;
  for (const json& e : j) {
    if (!e.is_number_integer()) bad_field(key, "a nonempty array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

graph::ShiftKind shift_of(const std::string& name) {
  if (name == "adjacency") return graph::ShiftKind::adjacency;
  if (name == "laplacian") return graph::ShiftKind::laplacian;
  if (name == "sym_normalized_laplacian") return graph::ShiftKind::sym_normalized_laplacian;
  throw ConfigError("config field 'shift' must be one of adjacency, laplacian, "
                    "sym_normalized_laplacian");
}

// ---- shared pieces --------------------------------------------------------

graph::Graph station_graph(int n, int k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> coords(n);
  for (auto& c : coords) c = {rng.uniform01(), rng.uniform01()};
  return graph::knn_graph(coords, k);
}

train::TrainConfig train_config(const json& cfg, int iterations, std::uint64_t init_seed) {
  train::TrainConfig tc;
  tc.momentum = get_num(cfg, "momentum", 0.9);
  tc.learning_rate = get_num(cfg, "learning_rate", 0.003);
  tc.iterations = iterations;
  tc.init = train::InitKind::uniform;
  tc.init_scale = get_num(cfg, "init_scale", 0.1);
  tc.seed = init_seed;
  tc.eps = get_num(cfg, "eps", 1e-5);
  return tc;
}

void rethrow_trial_errors(const std::vector<std::string>& errors) {
  for (const std::string& e : errors)
    if (!e.empty()) throw NumericalError(e);
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

std::string u64(std::uint64_t v) { return std::to_string(v); }

// ---- experiments ----------------------------------------------------------

struct Ctx {
  json report;
  std::vector<std::pair<std::string, std::string>> files;  // name, content
};

// Mean loss curve of repeated quadratic-target trainings, fresh target,
// samples and init per trial on one fixed graph.
void run_quadratic_sgdm(const json& cfg, std::uint64_t seed, Ctx& ctx) {
  check_keys(cfg, "quadratic_sgdm",
             {"n", "knn_k", "shift", "m", "degree", "s", "iterations", "trials", "momentum",
              "learning_rate", "init_scale", "eps", "record_every"});
  const int n = get_int(cfg, "n", 32);
  const int knn_k = get_int(cfg, "knn_k", 5);
  const int m = get_int(cfg, "m", 4);
  const int degree = get_int(cfg, "degree", 5);
  const int s = get_int(cfg, "s", 100);
  const int iterations = get_int(cfg, "iterations", 300);
  const int trials = get_int(cfg, "trials", 100);
  const int record_every = get_int(cfg, "record_every", 1);
  const graph::ShiftKind kind = shift_of(get_str(cfg, "shift", "sym_normalized_laplacian"));
  if (trials < 1) bad_field("trials", "at least 1");

  Rng master(seed);
  const std::uint64_t graph_seed = master.next_u64();
  struct Seeds {
    std::uint64_t target, domain, init;
  };
  std::vector<Seeds> seeds(trials);
  for (Seeds& sd : seeds) {
    sd.target = master.next_u64();
    sd.domain = master.next_u64();
    sd.init = master.next_u64();
  }

  const graph::Graph g = station_graph(n, knn_k, graph_seed);
  const spectral::SpectralBasis basis = spectral::basis_of(g, kind);

  std::vector<train::Trajectory> trajs(trials);
  std::vector<std::string> errors(trials);
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < trials; ++t) {
    try {
      const dataio::QuadraticTarget target = dataio::synth_quadratic(g, seeds[t].target);
      const std::vector<linalg::Vec> xs = dataio::sample_domain(n, s, seeds[t].domain);
      linalg::Vec y(s);
      for (int i = 0; i < s; ++i) y[i] = target(xs[i]);
      train::TrainConfig tc = train_config(cfg, iterations, seeds[t].init);
      tc.record_every = record_every;
      trajs[t] = train::sgdm(basis, xs, y, {m, degree, n}, tc);
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
  }
  rethrow_trial_errors(errors);

  std::string curve = "iteration,mean_rmse\n";
  const std::size_t points = trajs[0].losses.size();
  for (std::size_t p = 0; p < points; ++p) {
    double acc = 0.0;
    for (int t = 0; t < trials; ++t) acc += trajs[t].losses[p].second;
    curve += std::to_string(trajs[0].losses[p].first);
    curve += ',';
    curve += fmt::format_double(acc / trials);
    curve += '\n';
  }

  std::string rows = "trial,target_seed,domain_seed,init_seed,final_rmse,ruae\n";
  std::vector<double> finals(trials), ruaes(trials);
  for (int t = 0; t < trials; ++t) {
    finals[t] = trajs[t].losses.back().second;
    ruaes[t] = trajs[t].ruae_final;
    rows += std::to_string(t) + ',' + u64(seeds[t].target) + ',' + u64(seeds[t].domain) + ',' +
            u64(seeds[t].init) + ',' + fmt::format_double(finals[t]) + ',' +
            fmt::format_double(ruaes[t]) + '\n';
  }

  ctx.report["config"] = {{"n", n},           {"knn_k", knn_k},
                          {"m", m},           {"degree", degree},
                          {"s", s},           {"iterations", iterations},
                          {"trials", trials}, {"record_every", record_every},
                          {"shift", graph::shift_kind_name(kind)}};
  ctx.report["results"] = {{"mean_final_rmse", mean_of(finals)},
                           {"mean_ruae", mean_of(ruaes)},
                           {"graph_seed", graph_seed}};
  ctx.files.emplace_back("quadratic_sgdm_curve.csv", std::move(curve));
  ctx.files.emplace_back("quadratic_sgdm_trials.csv", std::move(rows));
}

// Final RMSE/RUAE versus neuron count at a few iteration budgets.
void run_neurons_sweep(const json& cfg, std::uint64_t seed, Ctx& ctx) {
  check_keys(cfg, "neurons_sweep",
             {"n", "knn_k", "shift", "m_list", "degree", "s", "iters", "trials", "momentum",
              "learning_rate", "init_scale", "eps"});
  const int n = get_int(cfg, "n", 32);
  const int knn_k = get_int(cfg, "knn_k", 5);
  const std::vector<int> m_list = get_int_list(cfg, "m_list", {1, 2, 4, 8, 16});
  const int degree = get_int(cfg, "degree", 5);
  const int s = get_int(cfg, "s", 100);
  const std::vector<int> iters = get_int_list(cfg, "iters", {50, 200});
  const int trials = get_int(cfg, "trials", 100);
  const graph::ShiftKind kind = shift_of(get_str(cfg, "shift", "sym_normalized_laplacian"));
  if (trials < 1) bad_field("trials", "at least 1");

  Rng master(seed);
  const std::uint64_t graph_seed = master.next_u64();
  struct Cell {
    int iter, m, trial;
    std::uint64_t target, domain, init;
    double rmse = 0.0, ruae = 0.0;
  };
  std::vector<Cell> cells;
  for (int iter : iters)
    for (int m : m_list)
      for (int t = 0; t < trials; ++t)
        cells.push_back({iter, m, t, master.next_u64(), master.next_u64(), master.next_u64(),
                         0.0, 0.0});

  const graph::Graph g = station_graph(n, knn_k, graph_seed);
  const spectral::SpectralBasis basis = spectral::basis_of(g, kind);

  std::vector<std::string> errors(cells.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t c = 0; c < cells.size(); ++c) {
    try {
      Cell& cell = cells[c];
      const dataio::QuadraticTarget target = dataio::synth_quadratic(g, cell.target);
      const std::vector<linalg::Vec> xs = dataio::sample_domain(n, s, cell.domain);
      linalg::Vec y(s);
      for (int i = 0; i < s; ++i) y[i] = target(xs[i]);
      train::TrainConfig tc = train_config(cfg, cell.iter, cell.init);
      tc.record_every = cell.iter;  // only endpoints needed
      const train::Trajectory traj = train::sgdm(basis, xs, y, {cell.m, degree, n}, tc);
      cell.rmse = traj.losses.back().second;
      cell.ruae = traj.ruae_final;
    } catch (const std::exception& e) {
      errors[c] = e.what();
    }
  }
  rethrow_trial_errors(errors);

  std::string rows = "iter,m,trial,target_seed,domain_seed,init_seed,rmse,ruae\n";
  for (const Cell& cell : cells)
    rows += std::to_string(cell.iter) + ',' + std::to_string(cell.m) + ',' +
            std::to_string(cell.trial) + ',' + u64(cell.target) + ',' + u64(cell.domain) + ',' +
            u64(cell.init) + ',' + fmt::format_double(cell.rmse) + ',' +
            fmt::format_double(cell.ruae) + '\n';

  std::string agg = "iter,m,mean_rmse,mean_ruae\n";
  json agg_rows = json::array();
  std::size_t c = 0;
  for (int iter : iters)
    for (int m : m_list) {
      double rm = 0.0, ru = 0.0;
      for (int t = 0; t < trials; ++t, ++c) {
        rm += cells[c].rmse;
        ru += cells[c].ruae;
      }
      rm /= trials;
      ru /= trials;
      agg += std::to_string(iter) + ',' + std::to_string(m) + ',' + fmt::format_double(rm) +
             ',' + fmt::format_double(ru) + '\n';
      agg_rows.push_back({{"iter", iter}, {"m", m}, {"mean_rmse", rm}, {"mean_ruae", ru}});
    }

  ctx.report["config"] = {{"n", n},       {"knn_k", knn_k}, {"m_list", m_list},
                          {"degree", degree}, {"s", s},     {"iters", iters},
                          {"trials", trials}, {"shift", graph::shift_kind_name(kind)}};
  ctx.report["results"] = {{"cells", agg_rows}, {"graph_seed", graph_seed}};
  ctx.files.emplace_back("neurons_sweep_trials.csv", std::move(rows));
  ctx.files.emplace_back("neurons_sweep_agg.csv", std::move(agg));
}

// Squared-variance forecasting on station temperatures: train on a sparse set
// of days, score on the whole month.
void run_weather_sv(const json& cfg, std::uint64_t seed, bool synthesize,
                    const std::string& out_dir, Ctx& ctx) {
  check_keys(cfg, "weather_sv",
             {"weather_csv", "b", "hours_divisor", "knn_k", "m_list", "degree", "iters",
              "trials", "train_days", "momentum", "learning_rate", "init_scale", "eps",
              "weather_n", "weather_days"});
  const int knn_k = get_int(cfg, "knn_k", 5);
  const std::vector<int> m_list = get_int_list(cfg, "m_list", {4});
  const int degree = get_int(cfg, "degree", 5);
  const std::vector<int> iters = get_int_list(cfg, "iters", {30, 100});
  const int trials = get_int(cfg, "trials", 10);
  const int hours_divisor = get_int(cfg, "hours_divisor", 24);
  const std::vector<int> train_days = get_int_list(cfg, "train_days", {1, 6, 11, 16, 21, 26});
  if (trials < 1) bad_field("trials", "at least 1");

  std::optional<double> b_opt;
  if (cfg.contains("b")) {
    const json& jb = cfg.at("b");
    if (jb.is_string() && jb.get<std::string>() == "auto") {
      // leave empty: scale from the data
    } else if (jb.is_number()) {
      b_opt = jb.get<double>();
    } else {
      bad_field("b", "a number or \"auto\"");
    }
  } else {
    b_opt = 10.35;  // the conventional scale for this dataset shape
  }

  Rng master(seed);
  const std::uint64_t synth_seed = master.next_u64();
  struct Cell {
    int iter, m, trial;
    std::uint64_t init;
    double wmse = 0.0, wuae = 0.0;
  };
  std::vector<Cell> cells;
  for (int iter : iters)
    for (int m : m_list)
      for (int t = 0; t < trials; ++t) cells.push_back({iter, m, t, master.next_u64(), 0.0, 0.0});

  dataio::TemperatureDataset ds;
  if (synthesize) {
    ds = dataio::synth_weather(get_int(cfg, "weather_n", 32), get_int(cfg, "weather_days", 31),
                               synth_seed);
    dataio::write_weather_csv(ds, out_dir);
    ctx.files.emplace_back("temps.csv", "");     // written directly by the generator
    ctx.files.emplace_back("stations.csv", "");
  } else {
    if (!cfg.contains("weather_csv"))
      throw ConfigError("config field 'weather_csv' is required unless --synthesize-weather "
                        "is given");
    ds = dataio::load_weather(get_str(cfg, "weather_csv", ""));
  }
  const dataio::PreprocessedDataset pds = dataio::preprocess(ds, b_opt, hours_divisor);

  const graph::Graph g = graph::knn_graph(pds.station_coords, knn_k);
  const spectral::SpectralBasis basis =
      spectral::basis_of(g, graph::ShiftKind::sym_normalized_laplacian);
  const int n = pds.n;

  std::vector<linalg::Vec> xs_train;
  linalg::Vec y_train;
  for (int d : train_days) {
    if (d < 1 || d > pds.days - 1)
      throw ConfigError("config field 'train_days' must name days with a next day (1.." +
                        std::to_string(pds.days - 1) + ")");
    for (int i = 0; i < 24; ++i) {
      xs_train.push_back(pds.signal(i, d));
      y_train.push_back(dataio::target_sv(pds, d, i));
    }
  }
  std::vector<linalg::Vec> xs_all;
  linalg::Vec y_all;
  for (int d = 1; d <= pds.days - 1; ++d)
    for (int i = 0; i < 24; ++i) {
      xs_all.push_back(pds.signal(i, d));
      y_all.push_back(dataio::target_sv(pds, d, i));
    }
  double y_all_sq = 0.0, y_all_sup = 0.0;
  for (double v : y_all) {
    y_all_sq += v * v;
    y_all_sup = std::max(y_all_sup, std::fabs(v));
  }
  if (!(y_all_sq > 0.0) || !(y_all_sup > 0.0))
    throw NumericalError("whole-set targets are identically zero, relative errors undefined");

  const kernels::BatchData eval_data =
      kernels::make_batch(basis, xs_all, model::ConvMode::poly_filter, degree);

  std::vector<std::string> errors(cells.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t c = 0; c < cells.size(); ++c) {
    try {
      Cell& cell = cells[c];
      train::TrainConfig tc = train_config(cfg, cell.iter, cell.init);
      tc.record_every = cell.iter;
      const train::Trajectory traj =
          train::sgdm(basis, xs_train, y_train, {cell.m, degree, n}, tc);
      const linalg::Vec f = kernels::batch_forward(basis, traj.params_final, eval_data);
      double num_sq = 0.0, num_sup = 0.0;
      for (std::size_t i = 0; i < y_all.size(); ++i) {
        const double z = y_all[i] - f[i];
        num_sq += z * z;
        num_sup = std::max(num_sup, std::fabs(z));
      }
      cell.wmse = num_sq / y_all_sq;
      cell.wuae = num_sup / y_all_sup;
    } catch (const std::exception& e) {
      errors[c] = e.what();
    }
  }
  rethrow_trial_errors(errors);

  std::string rows = "iter,m,trial,init_seed,wmse,wuae\n";
  for (const Cell& cell : cells)
    rows += std::to_string(cell.iter) + ',' + std::to_string(cell.m) + ',' +
            std::to_string(cell.trial) + ',' + u64(cell.init) + ',' +
            fmt::format_double(cell.wmse) + ',' + fmt::format_double(cell.wuae) + '\n';

  std::string agg = "iter,m,mean_wmse,mean_wuae\n";
  json agg_rows = json::array();
  std::size_t c = 0;
  for (int iter : iters)
    for (int m : m_list) {
      double wm = 0.0, wu = 0.0;
      for (int t = 0; t < trials; ++t, ++c) {
        wm += cells[c].wmse;
        wu += cells[c].wuae;
      }
      wm /= trials;
      wu /= trials;
      agg += std::to_string(iter) + ',' + std::to_string(m) + ',' + fmt::format_double(wm) +
             ',' + fmt::format_double(wu) + '\n';
      agg_rows.push_back({{"iter", iter}, {"m", m}, {"mean_wmse", wm}, {"mean_wuae", wu}});
    }

  ctx.report["config"] = {{"knn_k", knn_k},
                          {"m_list", m_list},
                          {"degree", degree},
                          {"iters", iters},
                          {"trials", trials},
                          {"hours_divisor", hours_divisor},
                          {"train_days", train_days},
                          {"b", pds.b},
                          {"n", n},
                          {"days", pds.days}};
  ctx.report["results"] = {
      {"cells", agg_rows},
      {"train_pairs", static_cast<int>(xs_train.size())},
      {"eval_pairs", static_cast<int>(xs_all.size())},
      {"sample_count_note",
       "S = 24 hours x " + std::to_string(train_days.size()) + " training days = " +
           std::to_string(xs_train.size()) +
           "; the often-quoted S = 218 = 24 x 12 is inconsistent with both counts "
           "(24 x 12 = 288)"}};
  ctx.files.emplace_back("weather_sv_trials.csv", std::move(rows));
  ctx.files.emplace_back("weather_sv_agg.csv", std::move(agg));
}

// Monte Carlo width sweep for one random atomic measure.
void run_approx_rate(const json& cfg, std::uint64_t seed, Ctx& ctx) {
  check_keys(cfg, "approx_rate",
             {"n", "knn_k", "shift", "atoms", "m_list", "trials", "s_eval"});
  const int n = get_int(cfg, "n", 8);
  const int knn_k = get_int(cfg, "knn_k", 3);
  const int atoms = get_int(cfg, "atoms", 10);
  const std::vector<int> m_list = get_int_list(cfg, "m_list", {4, 8, 16, 32, 64, 128, 256});
  const int trials = get_int(cfg, "trials", 50);
  const int s_eval = get_int(cfg, "s_eval", 200);
  const graph::ShiftKind kind = shift_of(get_str(cfg, "shift", "sym_normalized_laplacian"));

  Rng master(seed);
  const std::uint64_t graph_seed = master.next_u64();
  const std::uint64_t measure_seed = master.next_u64();
  const std::uint64_t mc_seed = master.next_u64();

  const graph::Graph g = station_graph(n, knn_k, graph_seed);
  const spectral::SpectralBasis basis = spectral::basis_of(g, kind);
  const model::NormConfig normcfg;
  const barron::NormalizedMeasure nm = barron::random_measure(basis, atoms, normcfg, measure_seed);

  const std::vector<barron::ApproxRateRow> rows =
      barron::approx_rate_experiment(basis, nm.measure, nm.scale, m_list, trials, s_eval, mc_seed);

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  bool slope_ok = true;
  for (const barron::ApproxRateRow& r : rows) {
    if (!(r.mean_sq_err > 0.0)) slope_ok = false;
  }
  double slope = 0.0;
  if (slope_ok) {
    for (const barron::ApproxRateRow& r : rows) {
      const double lx = std::log(static_cast<double>(r.m));
      const double ly = std::log(r.mean_sq_err);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double k = static_cast<double>(rows.size());
    slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  }

  const double margin = 1.0 + 3.0 / std::sqrt(static_cast<double>(trials));
  bool within = true;
  for (const barron::ApproxRateRow& r : rows)
    if (r.mean_sq_err > r.bound * margin) within = false;

  ctx.report["config"] = {{"n", n},         {"knn_k", knn_k}, {"atoms", atoms},
                          {"m_list", m_list}, {"trials", trials}, {"s_eval", s_eval},
                          {"shift", graph::shift_kind_name(kind)}};
  ctx.report["results"] = {{"scale", nm.scale},
                           {"within_bound", within},
                           {"loglog_slope", slope_ok ? json(slope) : json()},
                           {"graph_seed", graph_seed},
                           {"measure_seed", measure_seed},
                           {"mc_seed", mc_seed}};
  ctx.files.emplace_back("approx_rate.csv", barron::approx_table_csv(rows));
}

// Finite-family Rademacher estimates against the closed-form bound.
void run_rademacher_check(const json& cfg, std::uint64_t seed, Ctx& ctx) {
  check_keys(cfg, "rademacher_check",
             {"q", "s_list", "n_list", "family_size", "family_neurons", "trials", "knn_k",
              "shift"});
  const double q = get_num(cfg, "q", 1.0);
  const std::vector<int> s_list = get_int_list(cfg, "s_list", {25, 100, 400});
  const std::vector<int> n_list = get_int_list(cfg, "n_list", {8, 32});
  const int family_size = get_int(cfg, "family_size", 50);
  const int family_neurons = get_int(cfg, "family_neurons", 3);
  const int trials = get_int(cfg, "trials", 200);
  const int knn_k = get_int(cfg, "knn_k", 3);
  const graph::ShiftKind kind = shift_of(get_str(cfg, "shift", "sym_normalized_laplacian"));

  Rng master(seed);
  const model::NormConfig normcfg;
  std::string rows = "n,s,graph_seed,family_seed,domain_seed,trial_seed,estimate,std_error,"
                     "bound,pass\n";
  json cells = json::array();
  bool all_pass = true;
  for (int n : n_list) {
    const std::uint64_t graph_seed = master.next_u64();
    const std::uint64_t family_seed = master.next_u64();
    const graph::Graph g = station_graph(n, knn_k, graph_seed);
    const spectral::SpectralBasis basis = spectral::basis_of(g, kind);
    const std::vector<model::NetworkParams> family =
        random_family(basis, family_size, family_neurons, q, normcfg, family_seed);
    for (int s : s_list) {
      const std::uint64_t domain_seed = master.next_u64();
      const std::uint64_t trial_seed = master.next_u64();
      const std::vector<linalg::Vec> xs = dataio::sample_domain(n, s, domain_seed);
      const bounds::RadEstimate est =
          bounds::empirical_rademacher(basis, family, xs, q, normcfg, trials, trial_seed);
      const double bound = bounds::rademacher_bound(q, s, n, normcfg.d0, normcfg.d2);
      const bool pass = est.estimate <= bound + 3.0 * est.std_error;
      all_pass = all_pass && pass;
      rows += std::to_string(n) + ',' + std::to_string(s) + ',' + u64(graph_seed) + ',' +
              u64(family_seed) + ',' + u64(domain_seed) + ',' + u64(trial_seed) + ',' +
              fmt::format_double(est.estimate) + ',' + fmt::format_double(est.std_error) + ',' +
              fmt::format_double(bound) + ',' + (pass ? "1" : "0") + '\n';
      cells.push_back({{"n", n},
                       {"s", s},
                       {"estimate", est.estimate},
                       {"std_error", est.std_error},
                       {"bound", bound},
                       {"pass", pass}});
    }
  }

  ctx.report["config"] = {{"q", q},
                          {"s_list", s_list},
                          {"n_list", n_list},
                          {"family_size", family_size},
                          {"family_neurons", family_neurons},
                          {"trials", trials},
                          {"knn_k", knn_k},
                          {"shift", graph::shift_kind_name(kind)}};
  ctx.report["results"] = {{"cells", cells}, {"all_pass", all_pass}};
  ctx.files.emplace_back("rademacher_check.csv", std::move(rows));
}

// Closed-form bound values over small grids.
void run_bounds_table(const json& cfg, std::uint64_t seed, Ctx& ctx) {
  check_keys(cfg, "bounds_table",
             {"q", "delta", "d0", "d2", "s_list", "n_list", "eps_list", "n_ext_list",
              "sparsity_list"});
  const double q = get_num(cfg, "q", 1.0);
  const double delta = get_num(cfg, "delta", 0.05);
  const double d0 = get_num(cfg, "d0", 1.0);
  const double d2 = get_num(cfg, "d2", 1.0);
  const std::vector<int> s_list = get_int_list(cfg, "s_list", {25, 100, 400});
  const std::vector<int> n_list = get_int_list(cfg, "n_list", {8, 32});
  const std::vector<int> n_ext_list = get_int_list(cfg, "n_ext_list", {10, 100, 1000});
  const std::vector<int> sparsity_list = get_int_list(cfg, "sparsity_list", {1, 2});
  std::vector<double> eps_list = {0.1, 0.2, 0.3, 0.4};
  if (cfg.contains("eps_list")) {
    const json& j = cfg.at("eps_list");
    if (!j.is_array() || j.empty()) bad_field("eps_list", "a nonempty array of numbers");
    eps_list.clear();
    for (const json& e : j) {
      if (!e.is_number()) bad_field("eps_list", "a nonempty array of numbers");
      eps_list.push_back(e.get<double>());
    }
  }
  (void)seed;

  std::string rows = "name,params,value\n";
  for (int s : s_list)
    for (int n : n_list) {
      rows += "rademacher_bound,q=" + fmt::format_double(q) + " s=" + std::to_string(s) +
              " n=" + std::to_string(n) + ',' +
              fmt::format_double(bounds::rademacher_bound(q, s, n, d0, d2)) + '\n';
      rows += "generalization_bound,q=" + fmt::format_double(q) + " s=" + std::to_string(s) +
              " n=" + std::to_string(n) + " delta=" + fmt::format_double(delta) + ',' +
              fmt::format_double(bounds::generalization_bound(q, s, n, delta, d0, d2)) + '\n';
    }
  for (int n : n_list)
    for (double eps : eps_list) {
      rows += "covering_bound_ball,n=" + std::to_string(n) +
              " eps=" + fmt::format_double(eps) + ',' +
              std::to_string(bounds::covering_bound_ball(n, eps)) + '\n';
      for (int sp : sparsity_list) {
        if (sp > n) continue;
        rows += "covering_bound_sparse,n=" + std::to_string(n) + " s=" + std::to_string(sp) +
                " eps=" + fmt::format_double(eps) + ',' +
                std::to_string(bounds::covering_bound_sparse(n, sp, eps)) + '\n';
      }
    }
  for (int ne : n_ext_list)
    for (double eps : eps_list)
      rows += "min_width,n_ext=" + std::to_string(ne) + " eps=" + fmt::format_double(eps) +
              ',' + std::to_string(bounds::min_width(eps, ne)) + '\n';

  ctx.report["config"] = {{"q", q},           {"delta", delta},
                          {"d0", d0},         {"d2", d2},
                          {"s_list", s_list}, {"n_list", n_list},
                          {"eps_list", eps_list}, {"n_ext_list", n_ext_list},
                          {"sparsity_list", sparsity_list}};
  ctx.report["results"] = {{"rows", "bounds_table.csv"}};
  ctx.files.emplace_back("bounds_table.csv", std::move(rows));
}

}  // namespace

std::vector<model::NetworkParams> random_family(const spectral::SpectralBasis& basis, int count,
                                                int neurons, double q,
                                                const model::NormConfig& cfg,
                                                std::uint64_t seed) {
  if (count < 1 || neurons < 1) throw InvalidInput("need count >= 1 and neurons >= 1");
  if (!(q > 0.0)) throw InvalidInput("norm budget must be positive");
  Rng rng(seed);
  std::vector<model::NetworkParams> family;
  family.reserve(count);
  for (int j = 0; j < count; ++j) {
    model::NetworkParams params;
    params.mode = model::ConvMode::spectral_signal;
    params.activation = model::Activation::relu;
    params.neurons.resize(neurons);
    for (model::Neuron& nu : params.neurons) {
      nu.a.resize(basis.n);
      nu.b.resize(basis.n);
      nu.c.resize(basis.n);
      for (double& v : nu.a) v = rng.uniform(-1.0, 1.0);
      for (double& v : nu.b) v = rng.uniform(-1.0, 1.0);
      for (double& v : nu.c) v = rng.uniform(-1.0, 1.0);
    }
    // The path norm is 1-homogeneous in the output weights.
    const double pn = model::path_norm(basis, params, 1.0, cfg);
    if (!(pn > 0.0)) throw NumericalError("degenerate random network, path norm zero");
    const double f = q / pn;
    for (model::Neuron& nu : params.neurons)
      for (double& v : nu.a) v *= f;
    family.push_back(std::move(params));
  }
  return family;
}

RunOutput run_from_json(const std::string& config_text, const std::string& out_dir,
                        std::optional<std::uint64_t> seed_override, bool synthesize_weather) {
  const auto t0 = std::chrono::steady_clock::now();
  json cfg = parse_config(config_text);
  if (!cfg.contains("experiment") || !cfg.at("experiment").is_string())
    throw ConfigError("config field 'experiment' (string) is required");
  const std::string exp = cfg.at("experiment").get<std::string>();
  std::uint64_t seed = 0;
  if (cfg.contains("seed")) {
    if (!cfg.at("seed").is_number_integer()) bad_field("seed", "an integer");
    seed = cfg.at("seed").get<std::uint64_t>();
  }
  if (seed_override.has_value()) seed = *seed_override;

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw InvalidInput("cannot create output directory " + out_dir + ": " + ec.message());

  Ctx ctx;
  if (exp == "quadratic_sgdm") {
    run_quadratic_sgdm(cfg, seed, ctx);
  } else if (exp == "neurons_sweep") {
    run_neurons_sweep(cfg, seed, ctx);
  } else if (exp == "weather_sv") {
    run_weather_sv(cfg, seed, synthesize_weather, out_dir, ctx);
  } else if (exp == "approx_rate") {
    run_approx_rate(cfg, seed, ctx);
  } else if (exp == "rademacher_check") {
    run_rademacher_check(cfg, seed, ctx);
  } else if (exp == "bounds_table") {
    run_bounds_table(cfg, seed, ctx);
  } else {
    throw ConfigError("unknown experiment '" + exp + "'");
  }

  RunOutput out;
  for (const auto& [name, content] : ctx.files) {
    if (!content.empty()) {
      std::ofstream f(out_dir + "/" + name, std::ios::binary);
      if (!f) throw InvalidInput("cannot write " + out_dir + "/" + name);
      f << content;
    }
    out.files.push_back(name);
  }

  ctx.report["schema_version"] = 1;
  ctx.report["experiment"] = exp;
  ctx.report["seed"] = seed;
  ctx.report["files"] = out.files;
  const auto t1 = std::chrono::steady_clock::now();
  ctx.report["wall_clock_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  out.report_json = ctx.report.dump(2);
  {
    std::ofstream f(out_dir + "/report.json", std::ios::binary);
    if (!f) throw InvalidInput("cannot write " + out_dir + "/report.json");
    f << out.report_json << '\n';
  }
  out.files.push_back("report.json");
  return out;
}

}  // namespace gclab::experiment
