// Command-line front end: parameter sweeps over random connection models,
// crossing counts, resistor-network conductivities, exploration runs, and
// tail summaries. All outputs are CSV/JSON under --out.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rcm/errors.hpp"
#include "rcm/harness.hpp"
#include "rcm/point_process.hpp"
#include "rcm/resistor_network.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitIo = 4;

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
  std::string out_dir;
};

rcm::ExperimentConfig load_config(const CommonOpts& opts) {
  auto config = rcm::ExperimentConfig::from_json_file(opts.config_path);
  if (opts.seed_set) config.master_seed = opts.seed;
  if (opts.workers > 0) config.workers = opts.workers;
  if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
  return config;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "experiment config (JSON)")
      ->required();
  cmd->add_option("--seed", opts.seed, "override master seed")
      ->each([&](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--workers", opts.workers, "worker thread count");
  cmd->add_option("--out", opts.out_dir, "output directory");
}

int run_single_task(const CommonOpts& opts, const std::string& task) {
  auto config = load_config(opts);
  config.tasks = {task};
  rcm::run_campaign(config);
  std::cout << "wrote " << config.out_dir << "/results.csv\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"marked random connection model simulations"};
  app.require_subcommand(1);

  CommonOpts opts;

  auto* sample = app.add_subcommand("sample", "sample one marked configuration");
  add_common(sample, opts);
  auto* crossings = app.add_subcommand("crossings", "disjoint crossing counts");
  add_common(crossings, opts);
  auto* conductivity =
      app.add_subcommand("conductivity", "resistor-network conductivities");
  add_common(conductivity, opts);
  auto* explore = app.add_subcommand("explore", "growth-process runs");
  add_common(explore, opts);
  auto* kappa = app.add_subcommand("kappa", "conductivity scaling estimates");
  add_common(kappa, opts);
  auto* campaign = app.add_subcommand("campaign", "run the config's task list");
  add_common(campaign, opts);
  auto* tail = app.add_subcommand("tail", "tail frequencies of crossing counts");
  add_common(tail, opts);
  double tail_c1 = -1.0;
  tail->add_option("--c1", tail_c1, "threshold coefficient for count >= c1 * ell^{d-1}");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sample->parsed()) {
      auto config = load_config(opts);
      if (config.rho_grid.empty() || config.ell_grid.empty())
        throw rcm::ValidationError("rho/ell", "sample needs one rho and one ell");
      const auto region = rcm::Region::strip(config.d, config.ell_grid.front(),
                                             config.trunc_factor);
      const auto cfg = rcm::sample_ppp(region, config.rho_grid.front(),
                                       config.marks, config.master_seed, 0);
      std::filesystem::create_directories(config.out_dir);
      const std::string path = config.out_dir + "/config.json";
      std::ofstream out(path, std::ios::trunc);
      if (!out) throw rcm::IoError("cannot write " + path);
      out << rcm::config_to_json(cfg) << '\n';
      std::cout << "wrote " << path << " (" << cfg.points.size() << " points)\n";
      return kExitOk;
    }
    if (crossings->parsed()) return run_single_task(opts, "crossings");
    if (conductivity->parsed()) return run_single_task(opts, "conductivity");
    if (explore->parsed()) return run_single_task(opts, "explore");
    if (kappa->parsed()) return run_single_task(opts, "kappa");
    if (campaign->parsed()) {
      auto config = load_config(opts);
      if (config.tasks.empty())
        throw rcm::ValidationError("tasks", "campaign needs a nonempty task list");
      rcm::run_campaign(config);
      std::cout << "wrote " << config.out_dir << "/results.csv\n";
      return kExitOk;
    }
    if (tail->parsed()) {
      auto config = load_config(opts);
      const auto rows = rcm::read_rows_csv(config.out_dir + "/results.csv");
      std::vector<rcm::CampaignRow> crossing_rows;
      for (const auto& row : rows)
        if (row.task == "crossings") crossing_rows.push_back(row);
      const double c1 = tail_c1 >= 0 ? tail_c1 : config.tail_c1;
      const auto points = rcm::tail_estimate(crossing_rows, c1, config.d);
      const std::string path = config.out_dir + "/tail.csv";
      std::ofstream out(path, std::ios::trunc);
      if (!out) throw rcm::IoError("cannot write " + path);
      out << "ell,p_hat,wilson_lo,wilson_hi,n\n";
      for (const auto& tp : points) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%ld\n", tp.ell,
                      tp.p_hat, tp.wilson_lo, tp.wilson_hi, tp.n);
        out << buf;
      }
      std::cout << "wrote " << path << '\n';
      return kExitOk;
    }
  } catch (const rcm::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const rcm::ConvergenceFailure& e) {
    std::cerr << "convergence failure: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const rcm::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}
