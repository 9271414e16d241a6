#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rcm/errors.hpp"
#include "rcm/harness.hpp"

using namespace rcm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string tmp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "rcm_harness_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string base_config(const std::string& out, const std::string& tasks,
                        int workers) {
  std::ostringstream ss;
  ss << R"({"model": {"model": "boolean"},
            "marks": {"type": "dirac", "value": 0.5},
            "d": 2, "rho": [1.5, 2.5], "ell": [3.0, 5.0],
            "replicas": 3, "seed": 97531,
            "tasks": [)"
     << tasks << R"(], "workers": )" << workers << R"(, "out": ")" << out
     << "\"}";
  return ss.str();
}

}  // namespace

TEST_CASE("config validation reports the failing field") {
  CHECK_THROWS_AS(ExperimentConfig::from_json_text("not json"), ValidationError);

  try {
    ExperimentConfig::from_json_text(
        R"({"model": {"model": "noidea"}, "tasks": []})");
    CHECK(false);
  } catch (const ValidationError& e) {
    CHECK(e.field() == "model.model");
  }

  try {
    ExperimentConfig::from_json_text(
        R"({"tasks": ["crossings"], "ell": [2.0]})");
    CHECK(false);
  } catch (const ValidationError& e) {
    CHECK(e.field() == "rho/ell");
  }

  try {
    ExperimentConfig::from_json_text(
        R"({"tasks": ["warp"], "rho": 1.0, "ell": 2.0})");
    CHECK(false);
  } catch (const ValidationError& e) {
    CHECK(e.field() == "tasks");
  }

  CHECK_THROWS_AS(ExperimentConfig::from_json_text(
                      R"({"replicas": 0, "tasks": []})"),
                  ValidationError);
  CHECK_THROWS_AS(ExperimentConfig::from_json_text(
                      R"({"marks": {"type": "discrete", "values": [1], "probs": [0.5]},
                          "tasks": []})"),
                  ValidationError);

  const auto ok = ExperimentConfig::from_json_text(
      R"({"model": {"model": "mott", "zeta": 1.5, "norm": "l1"},
          "marks": {"type": "uniform", "a": -0.5, "b": 0.5},
          "rho": 2.0, "ell": 4.0, "tasks": ["crossings"]})");
  CHECK(ok.model.kind() == ConnectionModel::Kind::Mott);
  CHECK(ok.model.mott_norm() == Norm::L1);
  CHECK(ok.rho_grid == std::vector<double>{2.0});
}

TEST_CASE("single grid point, one replica: one row plus summary") {
  const auto out = tmp_dir("single");
  auto config = ExperimentConfig::from_json_text(
      R"({"model": {"model": "boolean"}, "marks": {"type": "dirac", "value": 0.5},
          "rho": 2.0, "ell": 3.0, "replicas": 1, "seed": 5,
          "tasks": ["crossings"], "out": ")" +
      out + "\"}");
  run_campaign(config);
  const auto rows = read_rows_csv(out + "/results.csv");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].task == "crossings");
  CHECK(rows[0].metric == "n_crossings");
  CHECK(rows[0].value >= 0);
  CHECK(fs::exists(out + "/summary.json"));
  CHECK(fs::exists(out + "/timings.csv"));
  CHECK(fs::exists(out + "/plot.csv"));
  const auto summary = slurp(out + "/summary.json");
  CHECK(summary.find("\"config_hash\"") != std::string::npos);
  CHECK(config.content_hash.size() == 16);
}

TEST_CASE("campaign determinism across reruns and worker counts") {
  const auto out1 = tmp_dir("det1");
  const auto out2 = tmp_dir("det2");
  const auto out4 = tmp_dir("det4");
  const auto tasks = R"("crossings", "conductivity", "explore")";
  run_campaign(ExperimentConfig::from_json_text(base_config(out1, tasks, 1)));
  run_campaign(ExperimentConfig::from_json_text(base_config(out2, tasks, 2)));
  run_campaign(ExperimentConfig::from_json_text(base_config(out4, tasks, 7)));
  const auto body = slurp(out1 + "/results.csv");
  CHECK(body == slurp(out2 + "/results.csv"));
  CHECK(body == slurp(out4 + "/results.csv"));

  // Rerun in place: byte-identical (rows reused verbatim).
  run_campaign(ExperimentConfig::from_json_text(base_config(out1, tasks, 3)));
  CHECK(body == slurp(out1 + "/results.csv"));
}

TEST_CASE("interrupt and resume reproduces the uninterrupted file") {
  const auto full_dir = tmp_dir("full");
  const auto resume_dir = tmp_dir("resume");
  const auto tasks = R"("crossings", "conductivity")";
  run_campaign(ExperimentConfig::from_json_text(base_config(full_dir, tasks, 2)));
  const auto reference = slurp(full_dir + "/results.csv");

  auto config = ExperimentConfig::from_json_text(base_config(resume_dir, tasks, 2));
  run_campaign(config, 11);  // stop mid-way (24 rows total)
  const auto partial = slurp(resume_dir + "/results.csv");
  CHECK(partial.size() < reference.size());
  CHECK(reference.substr(0, partial.size()) == partial);

  // Simulate a torn final line from a hard kill.
  {
    std::ofstream torn(resume_dir + "/results.csv", std::ios::app);
    torn << "crossings,12345,1.5";
  }
  run_campaign(config);
  CHECK(slurp(resume_dir + "/results.csv") == reference);
}

TEST_CASE("resume skips completed rows without recompute") {
  const auto out = tmp_dir("noredo");
  auto config = ExperimentConfig::from_json_text(
      base_config(out, R"("crossings")", 2));
  run_campaign(config);
  const auto before = slurp(out + "/results.csv");

  // Poison one completed row's value; resume must keep it verbatim
  // (identity-keyed reuse), proving no recompute happened.
  auto rows = read_rows_csv(out + "/results.csv");
  REQUIRE(!rows.empty());
  auto poisoned = before;
  const auto pos = poisoned.find("n_crossings,");
  REQUIRE(pos != std::string::npos);
  poisoned.replace(pos, 12, "n_crossings,9999 ");
  {
    std::ofstream out_file(out + "/results.csv", std::ios::trunc);
    out_file << poisoned;
  }
  run_campaign(config);
  CHECK(slurp(out + "/results.csv") == poisoned);
}

TEST_CASE("tail estimate per ell with wilson intervals") {
  std::vector<CampaignRow> rows;
  auto add = [&](double ell, double count) {
    CampaignRow row;
    row.task = "crossings";
    row.rho = 2.0;
    row.ell = ell;
    row.value = count;
    rows.push_back(row);
  };
  // ell = 2: counts 5,7,0 against threshold c1 * ell = 2 -> 2/3.
  add(2.0, 5);
  add(2.0, 7);
  add(2.0, 0);
  // ell = 4: counts all huge -> 1.
  add(4.0, 50);
  add(4.0, 60);

  const auto points = tail_estimate(rows, 1.0, 2);
  REQUIRE(points.size() == 2);
  CHECK(points[0].ell == 2.0);
  CHECK(points[0].p_hat == doctest::Approx(2.0 / 3.0));
  CHECK(points[0].n == 3);
  CHECK(points[0].wilson_lo < 2.0 / 3.0);
  CHECK(points[0].wilson_hi > 2.0 / 3.0);
  CHECK(points[1].p_hat == 1.0);

  // c1 = 0: count >= 0 always.
  const auto all = tail_estimate(rows, 0.0, 2);
  CHECK(all[0].p_hat == 1.0);
  CHECK(all[1].p_hat == 1.0);

  CHECK_THROWS_AS(tail_estimate({}, 1.0, 2), std::invalid_argument);
  rows[0].rho = 9.0;
  CHECK_THROWS_AS(tail_estimate(rows, 1.0, 2), std::invalid_argument);
}

TEST_CASE("plot data: header-only, series labels, parse-back") {
  CHECK(emit_plotdata({}) == "x,y,yerr,series\n");

  std::vector<CampaignRow> rows;
  for (int rep = 0; rep < 4; ++rep) {
    CampaignRow row;
    row.task = "conductivity";
    row.metric = "sigma";
    row.rho = 2.0;
    row.ell = 3.0;
    row.replica = rep;
    row.value = 1.0 + rep;
    rows.push_back(row);
  }
  const auto text = emit_plotdata(rows);
  CHECK(text.find("conductivity:sigma:rho=2") != std::string::npos);

  // Parse back and compare against a direct aggregation.
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  REQUIRE(std::getline(in, line));
  std::istringstream fields(line);
  std::string x, y, yerr;
  std::getline(fields, x, ',');
  std::getline(fields, y, ',');
  std::getline(fields, yerr, ',');
  CHECK(std::stod(x) == 3.0);
  CHECK(std::stod(y) == doctest::Approx(2.5));
  CHECK(std::stod(yerr) == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(!std::getline(in, line));  // single series, single ell: one data row
}

TEST_CASE("csv escaping round-trips through the reader") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");

  const auto out = tmp_dir("aux");
  auto config = ExperimentConfig::from_json_text(
      R"({"model": {"model": "boolean"}, "marks": {"type": "dirac", "value": 0.5},
          "rho": 2.0, "ell": 3.0, "replicas": 1, "seed": 5,
          "tasks": ["conductivity"], "out": ")" +
      out + "\"}");
  run_campaign(config);
  const auto rows = read_rows_csv(out + "/results.csv");
  REQUIRE(rows.size() == 1);
  // aux is JSON with commas; it must survive the CSV round trip.
  CHECK(rows[0].aux.find("\"residual\":") != std::string::npos);
  CHECK(rows[0].aux.find("\"n_nodes\":") != std::string::npos);
}

TEST_CASE("explore task rows match the oracle annotation") {
  const auto out = tmp_dir("explore");
  auto config = ExperimentConfig::from_json_text(
      R"({"model": {"model": "boolean"},
          "replicas": 20, "seed": 333,
          "explore": {"M": 3, "L": 2, "p_site": 0.8, "p_link": 0.8},
          "tasks": ["explore"], "out": ")" +
      out + "\"}");
  run_campaign(config);
  const auto rows = read_rows_csv(out + "/results.csv");
  REQUIRE(rows.size() == 20);
  for (const auto& row : rows) {
    CHECK(row.metric == "n_crossing_rows");
    CHECK(row.aux.find("\"match\":true") != std::string::npos);
  }
}

TEST_CASE("unwritable output directory raises io-error") {
  ExperimentConfig config = ExperimentConfig::from_json_text(
      R"({"model": {"model": "boolean"}, "rho": 1.0, "ell": 2.0,
          "replicas": 1, "tasks": ["crossings"],
          "out": "/proc/definitely/not/writable"})");
  CHECK_THROWS_AS(run_campaign(config), IoError);
}
