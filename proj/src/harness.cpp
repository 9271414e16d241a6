#include "rcm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rcm/crossings.hpp"
#include "rcm/errors.hpp"
#include "rcm/exploration.hpp"
#include "rcm/stats.hpp"

namespace rcm {

namespace {

using nlohmann::json;

MarkDistribution marks_from_json(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("type"))
    throw ValidationError(path, "expected an object with a 'type' field");
  const std::string type = j.at("type").get<std::string>();
  try {
    if (type == "dirac") return MarkDistribution::dirac(j.at("value").get<double>());
    if (type == "uniform")
      return MarkDistribution::uniform_interval(j.at("a").get<double>(),
                                                j.at("b").get<double>());
    if (type == "discrete")
      return MarkDistribution::discrete_table(
          j.at("values").get<std::vector<double>>(),
          j.at("probs").get<std::vector<double>>());
    if (type == "mixture") {
      std::vector<MarkDistribution> components;
      int i = 0;
      for (const auto& cj : j.at("components"))
        components.push_back(
            marks_from_json(cj, path + ".components[" + std::to_string(i++) + "]"));
      return MarkDistribution::mixture(std::move(components),
                                       j.at("weights").get<std::vector<double>>());
    }
  } catch (const json::exception& e) {
    throw ValidationError(path, e.what());
  } catch (const std::invalid_argument& e) {
    throw ValidationError(path, e.what());
  }
  throw ValidationError(path + ".type", "unknown mark distribution '" + type + "'");
}

ConnectionModel model_from_json(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("model"))
    throw ValidationError(path, "expected an object with a 'model' field");
  const std::string name = j.at("model").get<std::string>();
  try {
    if (name == "boolean") return ConnectionModel::boolean();
    if (name == "mott") {
      Norm norm = Norm::L2;
      if (j.contains("norm")) {
        const std::string n = j.at("norm").get<std::string>();
        if (n == "l2") norm = Norm::L2;
        else if (n == "l1") norm = Norm::L1;
        else if (n == "linf") norm = Norm::Linf;
        else throw ValidationError(path + ".norm", "unknown norm '" + n + "'");
      }
      return ConnectionModel::mott(j.at("zeta").get<double>(), norm);
    }
    if (name == "kernel") {
      std::map<std::string, double> params;
      if (j.contains("params"))
        for (const auto& [k, v] : j.at("params").items())
          params[k] = v.get<double>();
      if (j.contains("range")) params["range"] = j.at("range").get<double>();
      return ConnectionModel::kernel(j.at("name").get<std::string>(), params);
    }
  } catch (const ValidationError&) {
    throw;
  } catch (const json::exception& e) {
    throw ValidationError(path, e.what());
  } catch (const std::invalid_argument& e) {
    throw ValidationError(path, e.what());
  }
  throw ValidationError(path + ".model", "unknown model '" + name + "'");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError("$", e.what());
  }

  ExperimentConfig config;
  {
    // Content digest of the canonicalized config, echoed into summaries.
    std::uint64_t h = 0x636f6e666967ULL;
    for (char c : j.dump()) h = derive(h, static_cast<unsigned char>(c));
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    config.content_hash = buf;
  }
  config.model = model_from_json(j.value("model", json{{"model", "boolean"}}), "model");
  config.model_spec = j.value("model", json{{"model", "boolean"}}).dump();
  if (j.contains("marks")) config.marks = marks_from_json(j.at("marks"), "marks");

  auto get_number = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ValidationError(key, "expected a number");
    return j.at(key).get<double>();
  };
  config.d = static_cast<int>(get_number("d", 2));
  if (config.d < 2) throw ValidationError("d", "dimension must be >= 2");
  if (j.contains("rho")) {
    if (j.at("rho").is_number())
      config.rho_grid = {j.at("rho").get<double>()};
    else
      config.rho_grid = j.at("rho").get<std::vector<double>>();
  }
  if (j.contains("ell")) {
    if (j.at("ell").is_number())
      config.ell_grid = {j.at("ell").get<double>()};
    else
      config.ell_grid = j.at("ell").get<std::vector<double>>();
  }
  config.replicas = static_cast<int>(get_number("replicas", 1));
  if (config.replicas < 1) throw ValidationError("replicas", "must be >= 1");
  config.master_seed = static_cast<std::uint64_t>(get_number("seed", 1));
  config.pad_factor = get_number("pad_factor", 0.5);
  if (config.pad_factor < 0) throw ValidationError("pad_factor", "must be >= 0");
  config.trunc_factor = get_number("trunc_factor", 2.0);
  if (config.trunc_factor <= 1.0 + config.pad_factor)
    throw ValidationError("trunc_factor", "must exceed 1 + pad_factor");
  config.out_dir = j.value("out", "out");
  config.workers = static_cast<int>(get_number("workers", 0));
  if (j.contains("tasks"))
    config.tasks = j.at("tasks").get<std::vector<std::string>>();
  config.tail_c1 = get_number("c1", 0.5);
  config.percprob_mark = get_number("percprob_mark", 0.0);
  if (j.contains("dbound_a"))
    config.dbound_a = j.at("dbound_a").get<std::vector<double>>();
  if (j.contains("explore")) {
    const auto& e = j.at("explore");
    config.explore.M = e.value("M", 3);
    config.explore.L = e.value("L", 3);
    config.explore.p_site = e.value("p_site", 0.9);
    config.explore.p_link = e.value("p_link", 0.9);
    if (config.explore.M < 1 || config.explore.L < 1)
      throw ValidationError("explore", "M and L must be >= 1");
    if (config.explore.p_site < 0 || config.explore.p_site > 1 ||
        config.explore.p_link < 0 || config.explore.p_link > 1)
      throw ValidationError("explore", "probabilities must be in [0,1]");
  }

  static const std::vector<std::string> known = {
      "crossings", "conductivity", "explore", "kappa", "dbound", "percprob"};
  for (const auto& t : config.tasks)
    if (std::find(known.begin(), known.end(), t) == known.end())
      throw ValidationError("tasks", "unknown task '" + t + "'");
  const bool needs_grid =
      std::any_of(config.tasks.begin(), config.tasks.end(),
                  [](const std::string& t) { return t != "explore"; });
  if (needs_grid && (config.rho_grid.empty() || config.ell_grid.empty()))
    throw ValidationError("rho/ell", "grids must be nonempty for the requested tasks");
  for (double r : config.rho_grid)
    if (!(r >= 0) || !std::isfinite(r)) throw ValidationError("rho", "values must be finite and >= 0");
  for (double e : config.ell_grid)
    if (!(e > 0)) throw ValidationError("ell", "values must be > 0");
  return config;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct RowSpec {
  std::string task;
  double rho = 0.0;
  double ell = 0.0;
  int replica = 0;
  std::uint64_t seed = 0;
};

std::string row_identity(const std::string& task, double rho, double ell,
                         int replica) {
  return task + "|" + format_g17(rho) + "|" + format_g17(ell) + "|" +
         std::to_string(replica);
}

std::uint64_t task_tag(const std::string& task) {
  std::uint64_t h = stream_tag::campaign;
  for (char c : task) h = derive(h, static_cast<std::uint64_t>(c));
  return h;
}

std::vector<RowSpec> enumerate_rows(const ExperimentConfig& config) {
  std::vector<RowSpec> rows;
  for (const auto& task : config.tasks) {
    const std::uint64_t tag = task_tag(task);
    if (task == "explore") {
      for (int rep = 0; rep < config.replicas; ++rep)
        rows.push_back({task, 0.0, 0.0, rep,
                        derive(config.master_seed, tag, 0, 0, rep)});
      continue;
    }
    for (std::size_t ri = 0; ri < config.rho_grid.size(); ++ri)
      for (std::size_t ei = 0; ei < config.ell_grid.size(); ++ei)
        for (int rep = 0; rep < config.replicas; ++rep)
          rows.push_back({task, config.rho_grid[ri], config.ell_grid[ei], rep,
                          derive(config.master_seed, tag, ri, ei, rep)});
  }
  return rows;
}

struct RowOutput {
  std::string metric;
  double value = 0.0;
  std::string aux;
  long wall_millis = 0;
};

RowOutput compute_row(const ExperimentConfig& config, const RowSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  RowOutput out;
  SimParams params{config.d, config.marks, config.pad_factor, config.trunc_factor};

  if (spec.task == "explore") {
    const GridDomain domain(config.explore.M, config.explore.L);
    auto inner = bernoulli_driver(config.explore.p_site, config.explore.p_link,
                                  spec.seed);
    RecordingDriver recording(*inner);
    const auto state = explore(domain, recording);
    const int n_rows = crossings_from_exploration(state, domain);
    const int oracle = menger_oracle(recording, domain);
    out.metric = "n_crossing_rows";
    out.value = n_rows;
    out.aux = "{\"menger\":" + std::to_string(oracle) +
              ",\"match\":" + (oracle == n_rows ? std::string("true") : std::string("false")) + "}";
  } else if (spec.task == "crossings") {
    const Region region = Region::strip(config.d, spec.ell, config.trunc_factor);
    const auto cfg = sample_ppp(region, spec.rho, config.marks, spec.seed, 0);
    const auto graph = build_graph(cfg, config.model, derive(spec.seed, 1));
    const double pad = config.pad_factor * spec.ell;
    const auto proxy = crossing_cluster_ids(graph, spec.ell, pad);
    CrossingQuery query;
    query.ell = spec.ell;
    query.cluster_filter = proxy;
    const auto result = max_disjoint_crossings(graph, query);
    long in_box = 0;
    for (const auto& v : graph.vertices) {
      bool inside = true;
      for (double c : v.position)
        if (std::fabs(c) > spec.ell) { inside = false; break; }
      in_box += inside;
    }
    out.metric = "n_crossings";
    out.value = result.count;
    out.aux = "{\"method\":\"exact_maxflow\",\"proxy_clusters\":" +
              std::to_string(proxy.size()) +
              ",\"n_vertices_box\":" + std::to_string(in_box) + "}";
  } else if (spec.task == "conductivity" || spec.task == "kappa") {
    const Region region = Region::strip(config.d, spec.ell, config.trunc_factor);
    const auto cfg = sample_ppp(region, spec.rho, config.marks, spec.seed, 0);
    const auto graph = build_graph(cfg, config.model, derive(spec.seed, 1));
    const auto rn = build_rn(graph, spec.ell);
    const auto solve = solve_potential(rn);
    if (spec.task == "conductivity") {
      out.metric = "sigma";
      out.value = solve.sigma;
    } else {
      out.metric = "kappa_term";
      out.value = spec.rho > 0
                      ? std::pow(2.0 * spec.ell, 2 - config.d) * solve.sigma / spec.rho
                      : 0.0;
    }
    out.aux = "{\"residual\":" + format_g17(solve.residual) +
              ",\"iters\":" + std::to_string(solve.iterations) +
              ",\"n_nodes\":" + std::to_string(rn.pos.size()) +
              ",\"n_edges\":" + std::to_string(rn.edges.size()) + "}";
  } else if (spec.task == "dbound") {
    Vec a = config.dbound_a;
    if (a.empty()) {
      a.assign(config.d, 0.0);
      a[0] = 1.0;
    }
    const auto batch = palm_neighbor_batch(config.model, spec.rho, config.marks,
                                           spec.ell, 1, spec.seed, params);
    const auto& replica = batch.replicas.front();
    double sum = 0.0;
    for (const auto& x : replica.neighbor_displacements) {
      double dot = 0.0;
      for (std::size_t j = 0; j < a.size(); ++j) dot += a[j] * x[j];
      sum += dot * dot;
    }
    out.metric = "dbound_term";
    out.value = 0.5 * sum;
    out.aux = std::string("{\"qualified\":") +
              (replica.origin_in_proxy_cluster ? "true" : "false") + "}";
  } else if (spec.task == "percprob") {
    const auto result = point_percolation_prob(config.percprob_mark, config.model,
                                               spec.rho, spec.ell, 1, spec.seed,
                                               params);
    out.metric = "origin_reaches_shell";
    out.value = result.p_hat;  // 0 or 1 for a single replica
    out.aux = "{}";
  } else {
    throw ValidationError("tasks", "unknown task '" + spec.task + "'");
  }

  out.wall_millis = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  return out;
}

std::string render_row(const RowSpec& spec, const RowOutput& out) {
  std::string line;
  line += csv_escape(spec.task);
  line += ',';
  line += std::to_string(spec.seed);
  line += ',';
  line += format_g17(spec.rho);
  line += ',';
  line += format_g17(spec.ell);
  line += ',';
  line += std::to_string(spec.replica);
  line += ',';
  line += csv_escape(out.metric);
  line += ',';
  line += format_g17(out.value);
  line += ',';
  line += csv_escape(out.aux);
  line += '\n';
  return line;
}

constexpr const char* kHeader = "task,seed,rho,ell,replica,metric,value,aux\n";

// Parse one CSV line with RFC-4180 quoting into fields.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

int default_workers() {
  if (const char* env = std::getenv("RCM_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

}  // namespace

std::vector<CampaignRow> read_rows_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open rows file: " + path);
  std::vector<CampaignRow> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      continue;  // header
    }
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 8) continue;  // tolerate a truncated trailing line
    CampaignRow row;
    row.task = fields[0];
    row.seed = std::strtoull(fields[1].c_str(), nullptr, 10);
    row.rho = std::strtod(fields[2].c_str(), nullptr);
    row.ell = std::strtod(fields[3].c_str(), nullptr);
    row.replica = std::atoi(fields[4].c_str());
    row.metric = fields[5];
    row.value = std::strtod(fields[6].c_str(), nullptr);
    row.aux = fields[7];
    rows.push_back(std::move(row));
  }
  return rows;
}

void run_campaign(const ExperimentConfig& config, long max_rows) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + config.out_dir);
  const std::string results_path = config.out_dir + "/results.csv";
  const std::string timings_path = config.out_dir + "/timings.csv";
  const std::string summary_path = config.out_dir + "/summary.json";

  const auto specs = enumerate_rows(config);
  const long n_total = max_rows >= 0
                           ? std::min<long>(max_rows, specs.size())
                           : static_cast<long>(specs.size());

  // Resume: reuse the rendered line of every complete row already on disk.
  std::map<std::string, std::string> completed;
  if (fs::exists(results_path)) {
    std::ifstream in(results_path);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (first) {
        first = false;
        continue;
      }
      if (line.empty()) continue;
      const auto fields = split_csv_line(line);
      if (fields.size() != 8) continue;  // interrupted mid-write
      completed[row_identity(fields[0], std::strtod(fields[2].c_str(), nullptr),
                             std::strtod(fields[3].c_str(), nullptr),
                             std::atoi(fields[4].c_str()))] = line + "\n";
    }
  }

  std::ofstream out(results_path, std::ios::trunc);
  if (!out) throw IoError("cannot write results file: " + results_path);
  std::ofstream timings(timings_path, std::ios::trunc);
  if (!timings) throw IoError("cannot write timings file: " + timings_path);
  out << kHeader;
  timings << "task,seed,rho,ell,replica,wall_millis\n";

  const int workers =
      std::max(1, config.workers > 0 ? config.workers : default_workers());

  std::vector<std::string> rendered(n_total);
  std::vector<long> millis(n_total, 0);
  std::vector<char> done(n_total, 0);
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<long> next_index{0};
  std::exception_ptr first_error;

  auto worker_fn = [&]() {
    while (true) {
      const long i = next_index.fetch_add(1);
      if (i >= n_total) return;
      const auto& spec = specs[i];
      std::string line;
      long ms = 0;
      const auto it = completed.find(
          row_identity(spec.task, spec.rho, spec.ell, spec.replica));
      try {
        if (it != completed.end()) {
          line = it->second;  // verbatim reuse, no recompute
        } else {
          const auto result = compute_row(config, spec);
          line = render_row(spec, result);
          ms = result.wall_millis;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
        cv.notify_all();
        return;
      }
      {
        std::lock_guard<std::mutex> lock(mu);
        rendered[i] = std::move(line);
        millis[i] = ms;
        done[i] = 1;
        cv.notify_all();
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn);

  // Single appender: flush rows in canonical order as they complete.
  long flushed = 0;
  {
    std::unique_lock<std::mutex> lock(mu);
    while (flushed < n_total) {
      cv.wait(lock, [&] { return done[flushed] || first_error; });
      if (first_error) break;
      while (flushed < n_total && done[flushed]) {
        out << rendered[flushed];
        out.flush();
        const auto& spec = specs[flushed];
        timings << spec.task << ',' << spec.seed << ',' << format_g17(spec.rho)
                << ',' << format_g17(spec.ell) << ',' << spec.replica << ','
                << millis[flushed] << '\n';
        ++flushed;
      }
    }
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  // Summary: per (task, metric, rho, ell) aggregates over replicas.
  out.close();
  const auto rows = read_rows_csv(results_path);
  std::map<std::string, std::vector<double>> groups;
  for (const auto& row : rows)
    groups[row.task + "|" + row.metric + "|" + format_g17(row.rho) + "|" +
           format_g17(row.ell)]
        .push_back(row.value);
  nlohmann::ordered_json summary;
  summary["schema_version"] = 1;
  summary["model"] = nlohmann::json::parse(
      config.model_spec.empty() ? "{\"model\":\"boolean\"}" : config.model_spec);
  summary["seed"] = config.master_seed;
  summary["d"] = config.d;
  summary["config_hash"] = config.content_hash;
  summary["rows"] = rows.size();
  auto& agg = summary["aggregates"];
  agg = nlohmann::ordered_json::array();
  for (const auto& [key, values] : groups) {
    nlohmann::ordered_json g;
    g["key"] = key;
    g["n"] = values.size();
    g["mean"] = mean(values);
    g["stderr"] = stderr_of_mean(values);
    agg.push_back(std::move(g));
  }
  std::ofstream sum(summary_path, std::ios::trunc);
  sum << summary.dump(2) << '\n';

  std::ofstream plot(config.out_dir + "/plot.csv", std::ios::trunc);
  plot << emit_plotdata(rows);
}

std::vector<TailPoint> tail_estimate(const std::vector<CampaignRow>& rows,
                                     double c1, int d) {
  if (rows.empty()) throw std::invalid_argument("tail_estimate: no rows");
  double rho = rows.front().rho;
  std::map<double, std::pair<long, long>> per_ell;  // ell -> (hits, n)
  for (const auto& row : rows) {
    if (row.rho != rho)
      throw std::invalid_argument("tail_estimate: rows mix different rho values");
    auto& [hits, n] = per_ell[row.ell];
    ++n;
    hits += row.value >= c1 * std::pow(row.ell, d - 1);
  }
  std::vector<TailPoint> out;
  for (const auto& [ell, hn] : per_ell) {
    TailPoint tp;
    tp.ell = ell;
    tp.n = hn.second;
    tp.p_hat = static_cast<double>(hn.first) / static_cast<double>(hn.second);
    std::tie(tp.wilson_lo, tp.wilson_hi) =
        wilson95(static_cast<double>(hn.first), static_cast<double>(hn.second));
    out.push_back(tp);
  }
  return out;
}

std::string emit_plotdata(const std::vector<CampaignRow>& rows) {
  std::map<std::string, std::map<double, std::vector<double>>> series;
  for (const auto& row : rows)
    series[row.task + ":" + row.metric + ":rho=" + format_g17(row.rho)][row.ell]
        .push_back(row.value);
  std::string out = "x,y,yerr,series\n";
  for (const auto& [label, by_ell] : series)
    for (const auto& [ell, values] : by_ell) {
      out += format_g17(ell);
      out += ',';
      out += format_g17(mean(values));
      out += ',';
      out += format_g17(stderr_of_mean(values));
      out += ',';
      out += csv_escape(label);
      out += '\n';
    }
  return out;
}

}  // namespace rcm
