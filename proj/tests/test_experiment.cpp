#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gclab/bounds.hpp"
#include "gclab/dataio.hpp"
#include "gclab/error.hpp"
#include "gclab/experiment.hpp"
#include "gclab/fmt.hpp"
#include "gclab/graph.hpp"
#include "gclab/model.hpp"
#include "gclab/spectral.hpp"
#include "json.hpp"
#include "test_util.hpp"

using namespace gclab;
using nlohmann::json;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int line_count(const std::string& text) {
  return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

json report_without_clock(const std::string& report_text) {
  json j = json::parse(report_text);
  j.erase("wall_clock_ms");
  return j;
}

template <typename Fn>
std::string config_error_message(Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "<no throw>";
}

}  // namespace

TEST_CASE("bounds_table writes the expected table byte for byte") {
  const std::string cfg = R"({"experiment":"bounds_table","seed":1,
      "s_list":[25],"n_list":[8],"eps_list":[0.3],"n_ext_list":[10],"sparsity_list":[1]})";
  const std::filesystem::path d1 = fresh_dir("gclab_exp_bounds1");
  const std::filesystem::path d2 = fresh_dir("gclab_exp_bounds2");
  const experiment::RunOutput r1 = experiment::run_from_json(cfg, d1.string());
  const experiment::RunOutput r2 = experiment::run_from_json(cfg, d2.string());

  CHECK(r1.files == std::vector<std::string>{"bounds_table.csv", "report.json"});
  const std::string csv = slurp(d1 / "bounds_table.csv");
  CHECK(csv == slurp(d2 / "bounds_table.csv"));

  // The whole table rebuilt from the bound functions and the same formatter.
  std::string want = "name,params,value\n";
  want += "rademacher_bound,q=1 s=25 n=8," +
          fmt::format_double(bounds::rademacher_bound(1.0, 25, 8, 1.0, 1.0)) + '\n';
  want += "generalization_bound,q=1 s=25 n=8 delta=0.05," +
          fmt::format_double(bounds::generalization_bound(1.0, 25, 8, 0.05, 1.0, 1.0)) + '\n';
  want += "covering_bound_ball,n=8 eps=0.3," +
          std::to_string(bounds::covering_bound_ball(8, 0.3)) + '\n';
  want += "covering_bound_sparse,n=8 s=1 eps=0.3," +
          std::to_string(bounds::covering_bound_sparse(8, 1, 0.3)) + '\n';
  want += "min_width,n_ext=10 eps=0.3," + std::to_string(bounds::min_width(0.3, 10)) + '\n';
  CHECK(csv == want);

  const json report = json::parse(slurp(d1 / "report.json"));
  CHECK(report.at("schema_version") == 1);
  CHECK(report.at("experiment") == "bounds_table");
  CHECK(report.at("seed") == 1);
  // The report lists the data files it indexes; report.json itself only
  // appears in RunOutput.files.
  CHECK(report.at("files") == json::array({"bounds_table.csv"}));
  CHECK(report.contains("wall_clock_ms"));
  CHECK(report_without_clock(slurp(d1 / "report.json")) ==
        report_without_clock(slurp(d2 / "report.json")));
  CHECK(report_without_clock(r1.report_json) == report_without_clock(r2.report_json));
}

TEST_CASE("quadratic_sgdm small run: row counts, determinism, seed override") {
  const std::string cfg = R"({"experiment":"quadratic_sgdm","seed":3,"n":6,"knn_k":2,
      "m":2,"degree":2,"s":10,"iterations":5,"trials":2})";
  const std::filesystem::path d1 = fresh_dir("gclab_exp_quad1");
  const std::filesystem::path d2 = fresh_dir("gclab_exp_quad2");
  const std::filesystem::path d3 = fresh_dir("gclab_exp_quad3");
  experiment::run_from_json(cfg, d1.string());
  experiment::run_from_json(cfg, d2.string());
  const experiment::RunOutput other = experiment::run_from_json(cfg, d3.string(), 4);

  const std::string curve = slurp(d1 / "quadratic_sgdm_curve.csv");
  CHECK(curve.rfind("iteration,mean_rmse\n", 0) == 0);
  CHECK(line_count(curve) == 7);  // header + iterations 0..5
  const std::string trials = slurp(d1 / "quadratic_sgdm_trials.csv");
  CHECK(line_count(trials) == 3);  // header + 2 trials

  CHECK(curve == slurp(d2 / "quadratic_sgdm_curve.csv"));
  CHECK(trials == slurp(d2 / "quadratic_sgdm_trials.csv"));
  CHECK(slurp(d3 / "quadratic_sgdm_trials.csv") != trials);

  const json report = json::parse(slurp(d1 / "report.json"));
  CHECK(report.at("seed") == 3);
  CHECK(report.at("results").at("mean_final_rmse").is_number());
  CHECK(report.at("results").at("mean_final_rmse").get<double>() > 0.0);
  CHECK(json::parse(other.report_json).at("seed") == 4);
}

TEST_CASE("config problems are reported as ConfigError naming the field") {
  const std::filesystem::path dir = fresh_dir("gclab_exp_badcfg");
  const std::string out = dir.string();

  CHECK_THROWS_AS(experiment::run_from_json("not json", out), ConfigError);
  CHECK_THROWS_AS(experiment::run_from_json("[1,2]", out), ConfigError);
  CHECK_THROWS_AS(experiment::run_from_json("{}", out), ConfigError);

  std::string msg = config_error_message(
      [&] { experiment::run_from_json(R"({"experiment":"nope"})", out); });
  CHECK(msg.find("unknown experiment 'nope'") != std::string::npos);

  msg = config_error_message([&] {
    experiment::run_from_json(R"({"experiment":"bounds_table","bogus_field":1})", out);
  });
  CHECK(msg.find("bogus_field") != std::string::npos);
  CHECK(msg.find("bounds_table") != std::string::npos);

  msg = config_error_message([&] {
    experiment::run_from_json(R"({"experiment":"quadratic_sgdm","trials":"many"})", out);
  });
  CHECK(msg.find("trials") != std::string::npos);

  CHECK_THROWS_AS(
      experiment::run_from_json(R"({"experiment":"bounds_table","seed":1.5})", out),
      ConfigError);

  // weather_sv needs a data source when synthesis is off.
  msg = config_error_message([&] {
    experiment::run_from_json(R"({"experiment":"weather_sv"})", out);
  });
  CHECK(msg.find("weather_csv") != std::string::npos);
}

TEST_CASE("weather_sv synthesized end to end") {
  const std::string cfg = R"({"experiment":"weather_sv","seed":11,"weather_n":6,
      "weather_days":4,"train_days":[1,2],"iters":[2],"m_list":[1],"trials":1,
      "degree":2,"knn_k":2,"b":"auto"})";
  const std::filesystem::path dir = fresh_dir("gclab_exp_weather");
  const experiment::RunOutput out =
      experiment::run_from_json(cfg, dir.string(), std::nullopt, true);

  for (const char* name : {"temps.csv", "stations.csv", "weather_sv_trials.csv",
                           "weather_sv_agg.csv", "report.json"}) {
    CAPTURE(name);
    CHECK(std::count(out.files.begin(), out.files.end(), name) == 1);
    CHECK(std::filesystem::exists(dir / name));
  }

  // The synthesized station file is loadable and matches the run's shape.
  const dataio::TemperatureDataset ds = dataio::load_weather((dir / "temps.csv").string());
  CHECK(ds.n == 6);
  CHECK(ds.days == 4);

  const std::string trials = slurp(dir / "weather_sv_trials.csv");
  CHECK(trials.rfind("iter,m,trial,init_seed,wmse,wuae\n", 0) == 0);
  CHECK(line_count(trials) == 2);  // header + one cell
  const std::string agg = slurp(dir / "weather_sv_agg.csv");
  CHECK(agg.rfind("iter,m,mean_wmse,mean_wuae\n", 0) == 0);

  const json report = json::parse(slurp(dir / "report.json"));
  CHECK(report.at("results").at("train_pairs") == 48);
  CHECK(report.at("results").at("eval_pairs") == 72);
  CHECK(report.at("config").at("b").get<double>() > 0.0);

  // Same seed, same synthetic data and the same result files.
  const std::filesystem::path dir2 = fresh_dir("gclab_exp_weather2");
  experiment::run_from_json(cfg, dir2.string(), std::nullopt, true);
  CHECK(slurp(dir / "temps.csv") == slurp(dir2 / "temps.csv"));
  CHECK(trials == slurp(dir2 / "weather_sv_trials.csv"));
}

TEST_CASE("random_family hits the norm budget exactly enough") {
  const graph::Graph g = testutil::random_connected_graph(6, 800);
  const spectral::SpectralBasis basis = spectral::basis_of(g, graph::ShiftKind::laplacian);
  model::NormConfig cfg;
  const std::vector<model::NetworkParams> family =
      experiment::random_family(basis, 3, 2, 1.0, cfg, 801);
  REQUIRE(family.size() == 3);
  for (const model::NetworkParams& member : family) {
    CHECK(member.mode == model::ConvMode::spectral_signal);
    CHECK(member.m() == 2);
    CHECK(model::path_norm(basis, member, 1.0, cfg) == doctest::Approx(1.0).epsilon(1e-9));
  }
  const std::vector<model::NetworkParams> again =
      experiment::random_family(basis, 3, 2, 1.0, cfg, 801);
  CHECK(again[2].neurons[1].a == family[2].neurons[1].a);
  CHECK_THROWS_AS(experiment::random_family(basis, 0, 2, 1.0, cfg, 1), InvalidInput);
  CHECK_THROWS_AS(experiment::random_family(basis, 1, 2, 0.0, cfg, 1), InvalidInput);
}

TEST_CASE("approx_rate small run stays within its variance bound") {
  const std::string cfg = R"({"experiment":"approx_rate","seed":7,"n":6,"knn_k":2,
      "atoms":4,"m_list":[4,16],"trials":30,"s_eval":40})";
  const std::filesystem::path dir = fresh_dir("gclab_exp_approx");
  experiment::run_from_json(cfg, dir.string());
  const json report = json::parse(slurp(dir / "report.json"));
  CHECK(report.at("results").at("within_bound") == true);
  CHECK(report.at("results").at("scale").get<double>() > 0.0);
  const std::string csv = slurp(dir / "approx_rate.csv");
  CHECK(csv.rfind("m,mean_sq_err,bound\n", 0) == 0);
  CHECK(line_count(csv) == 3);
}

TEST_CASE("rademacher_check small run passes everywhere") {
  const std::string cfg = R"({"experiment":"rademacher_check","seed":9,"q":1,
      "s_list":[25],"n_list":[8],"family_size":10,"family_neurons":2,"trials":80,"knn_k":3})";
  const std::filesystem::path dir = fresh_dir("gclab_exp_rad");
  experiment::run_from_json(cfg, dir.string());
  const json report = json::parse(slurp(dir / "report.json"));
  CHECK(report.at("results").at("all_pass") == true);
  REQUIRE(report.at("results").at("cells").size() == 1);
  CHECK(report.at("results").at("cells")[0].at("pass") == true);
  const std::string csv = slurp(dir / "rademacher_check.csv");
  CHECK(csv.rfind("n,s,graph_seed,family_seed,domain_seed,trial_seed,estimate,std_error,"
                  "bound,pass\n",
                  0) == 0);
  CHECK(line_count(csv) == 2);
}
