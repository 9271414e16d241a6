#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rcm/connection_model.hpp"
#include "rcm/homogenization.hpp"

namespace rcm {

struct ExploreParams {
  int M = 3;
  int L = 3;
  double p_site = 0.9;
  double p_link = 0.9;
};

// Batch experiment description, read from a JSON config file. The model
// spec follows {"model":"boolean"} | {"model":"mott","zeta":..} |
// {"model":"kernel","name":..,"params":{..},"range":..}.
struct ExperimentConfig {
  ConnectionModel model = ConnectionModel::boolean();
  std::string model_spec;  // canonical echo of the model JSON
  MarkDistribution marks = MarkDistribution::dirac(0.5);
  int d = 2;
  std::vector<double> rho_grid;
  std::vector<double> ell_grid;
  int replicas = 1;
  std::uint64_t master_seed = 1;
  double pad_factor = 0.5;
  double trunc_factor = 2.0;
  std::string out_dir = "out";
  std::vector<std::string> tasks;  // crossings|conductivity|explore|kappa|dbound|percprob
  int workers = 0;                 // 0: env RCM_WORKERS or 1
  ExploreParams explore;
  double tail_c1 = 0.5;
  double percprob_mark = 0.0;
  std::vector<double> dbound_a;     // defaults to e1
  std::string content_hash;         // digest of the raw config text

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
};

struct CampaignRow {
  std::string task;
  std::uint64_t seed = 0;
  double rho = 0.0;
  double ell = 0.0;
  int replica = 0;
  std::string metric;
  double value = 0.0;
  std::string aux;  // JSON
  long wall_millis = 0;
};

// Executes the task grid with replica-level parallelism. Rows land in
// <out>/results.csv in a canonical order that does not depend on worker
// count; re-running with the same config reuses completed rows verbatim
// (idempotent resume). Timing goes to <out>/timings.csv, which is the one
// output that varies run to run; a summary lands in <out>/summary.json.
// max_rows > 0 stops after that many rows (test hook for interruption).
void run_campaign(const ExperimentConfig& config, long max_rows = -1);

std::vector<CampaignRow> read_rows_csv(const std::string& path);

struct TailPoint {
  double ell = 0.0;
  double p_hat = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 1.0;
  long n = 0;
};

// Per-ell frequency of {count >= c1 * ell^{d-1}} over crossing rows at a
// single rho, with Wilson 95% intervals.
std::vector<TailPoint> tail_estimate(const std::vector<CampaignRow>& rows,
                                     double c1, int d);

// Long-format (x, y, yerr, series) aggregation of campaign rows, one line
// per (task, metric, rho, ell). No plotting here.
std::string emit_plotdata(const std::vector<CampaignRow>& rows);

std::string csv_escape(const std::string& field);

}  // namespace rcm
