#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <iterator>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cluster.hpp"
#include "csv.hpp"
#include "eval.hpp"
#include "export.hpp"
#include "maxmin.hpp"
#include "metric.hpp"
#include "scenarios.hpp"
#include "swarm.hpp"
#include "topology.hpp"

namespace tomo {

enum class RootPolicy { fixed, rotate };

inline std::string to_string(RootPolicy p) { return p == RootPolicy::fixed ? "fixed" : "rotate"; }

inline RootPolicy parse_root_policy(const std::string& s) {
  if (s == "fixed") return RootPolicy::fixed;
  if (s == "rotate") return RootPolicy::rotate;
  throw std::invalid_argument("unknown root policy '" + s + "' (expected fixed or rotate)");
}

/// Broadcast root of run `iteration`.
constexpr NodeId rotate_root(RootPolicy policy, std::uint64_t iteration, std::size_t node_count) noexcept {
  if (policy == RootPolicy::fixed || node_count == 0) return 0;
  return static_cast<NodeId>(iteration % node_count);
}

struct ExperimentConfig {
  std::string scenario;       // builtin name; ignored when topology_path is set
  std::string topology_path;  // JSON topology document
  std::uint64_t iterations = 1;
  std::uint64_t seed = 0;
  RootPolicy root_policy = RootPolicy::fixed;
  std::optional<std::uint32_t> fragments;
  std::optional<std::uint32_t> upload_slots;
  std::optional<std::uint32_t> peer_cap;
  std::string output_dir;  // empty: nothing written
  unsigned threads = 0;    // 0: hardware concurrency
  bool write_ledgers = true;
  double dot_fraction = 0.5;
};

struct RunRecord {
  NodeId root = 0;
  std::uint64_t seed = 0;
  std::uint64_t digest = 0;  // FNV-1a of the ledger CSV
  double makespan = 0.0;     // simulated seconds
  double wall_seconds = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string topology_name;
  std::vector<std::string> node_names;
  Partition truth;
  std::vector<TransferLedger> ledgers;
  std::vector<RunRecord> runs;
  MeasurementGraph graph;
  ConvergenceTrace trace;
  LouvainResult clustering;
  double final_nmi = 0.0;
  double simulate_seconds = 0.0;
  double analyze_seconds = 0.0;
};

/// Seed of run `iteration` under the master seed.
constexpr std::uint64_t run_seed(std::uint64_t master, std::uint64_t iteration) noexcept {
  return derive_seed(master, iteration);
}

/// Clustering seed used for every prefix of the trace.
constexpr std::uint64_t cluster_seed(std::uint64_t master) noexcept { return derive_seed(master, ~std::uint64_t{0}); }

inline SwarmConfig swarm_config(const ExperimentConfig& cfg, std::uint64_t iteration, std::size_t node_count) {
  SwarmConfig s;
  if (cfg.fragments) s.file_size_fragments = *cfg.fragments;
  if (cfg.upload_slots) s.max_parallel_uploads = *cfg.upload_slots;
  if (cfg.peer_cap) s.max_peer_set = *cfg.peer_cap;
  s.root = rotate_root(cfg.root_policy, iteration, node_count);
  s.rng_seed = run_seed(cfg.seed, iteration);
  return s;
}

inline TopologyDocument load_experiment_topology(const ExperimentConfig& cfg, std::string* name = nullptr) {
  if (!cfg.topology_path.empty()) {
    auto in = csv::open_input(cfg.topology_path);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (name) *name = cfg.topology_path;
    return parse_topology(text);
  }
  if (cfg.scenario.empty()) throw std::invalid_argument("experiment needs a scenario or a topology file");
  auto s = builtin_scenario(cfg.scenario);
  if (name) *name = s.name;
  return {std::move(s.topology), std::move(s.ground_truth)};
}

namespace detail {

/// Runs body(i) for i in [0, count) on up to `threads` workers. The first
/// exception is rethrown after all workers stop.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; !failed && (i = next.fetch_add(1)) < count;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

inline nlohmann::json report_json(const ExperimentReport& r) {
  using nlohmann::json;
  const auto& c = r.config;
  json config = {{"scenario", c.topology_path.empty() ? c.scenario : ""},
                 {"topology", c.topology_path},
                 {"iterations", c.iterations},
                 {"seed", c.seed},
                 {"root_policy", to_string(c.root_policy)},
                 {"dot_fraction", c.dot_fraction}};
  if (c.fragments) config["fragments"] = *c.fragments;
  if (c.upload_slots) config["upload_slots"] = *c.upload_slots;
  if (c.peer_cap) config["peer_cap"] = *c.peer_cap;

  json runs = json::array();
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    const auto& run = r.runs[i];
    runs.push_back({{"iteration", i},
                    {"root", run.root},
                    {"seed", run.seed},
                    {"ledger_fnv1a", csv::hex64(run.digest)},
                    {"makespan_seconds", run.makespan},
                    {"wall_seconds", run.wall_seconds}});
  }
  return {{"config", config},
          {"topology", r.topology_name},
          {"nodes", r.truth.size()},
          {"runs", runs},
          {"final", {{"nmi", r.final_nmi}, {"modularity", r.clustering.score.q}, {"clusters", r.clustering.partition.cluster_count()}}},
          {"timings", {{"simulate_seconds", r.simulate_seconds}, {"analyze_seconds", r.analyze_seconds}}}};
}

/// Writes trace.csv, partition.csv, truth.csv, weights.csv, graph.dot,
/// report.json and, when enabled, runs/ledger_NNNN.csv.
inline void write_report_bundle(const ExperimentReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  csv::write_file((dir / "trace.csv").string(), trace_csv(r.trace));
  csv::write_file((dir / "partition.csv").string(), partition_csv(r.clustering.partition));
  csv::write_file((dir / "truth.csv").string(), partition_csv(r.truth));
  csv::write_file((dir / "weights.csv").string(), weights_csv(r.graph));
  csv::write_file((dir / "graph.dot").string(), to_dot(r.graph, r.truth, r.config.dot_fraction, r.node_names));
  csv::write_file((dir / "report.json").string(), report_json(r).dump(2) + "\n");
  if (r.config.write_ledgers) {
    std::filesystem::create_directories(dir / "runs");
    for (std::size_t i = 0; i < r.ledgers.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "ledger_%04zu.csv", i);
      csv::write_file((dir / "runs" / name).string(), ledger_csv(r.ledgers[i]));
    }
  }
}

/// n broadcasts with per-run seeds, then the prefix convergence trace and
/// the final clustering. Runs execute concurrently; everything downstream
/// folds over them in iteration order.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  ExperimentReport report;
  report.config = cfg;
  auto doc = load_experiment_topology(cfg, &report.topology_name);
  const auto& topo = doc.topology;
  const std::size_t n = topo.node_count();
  for (NodeId i = 0; i < n; ++i) report.node_names.push_back(topo.node_name(i));
  report.truth = doc.ground_truth;
  for (std::uint64_t i = 0; i < cfg.iterations; ++i) swarm_config(cfg, i, n).validate(n);

  const FlowNetwork net(topo);
  std::vector<std::optional<TransferLedger>> slots(cfg.iterations);
  report.runs.resize(cfg.iterations);
  const auto t0 = std::chrono::steady_clock::now();
  detail::parallel_for(cfg.iterations, cfg.threads, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    const auto sc = swarm_config(cfg, i, n);
    slots[i] = run_broadcast(net, sc);
    auto& rec = report.runs[i];
    rec.root = sc.root;
    rec.seed = sc.rng_seed;
    rec.digest = csv::fnv1a(ledger_csv(*slots[i]));
    rec.makespan = slots[i]->makespan();
    rec.wall_seconds = detail::seconds_since(start);
  });
  report.simulate_seconds = detail::seconds_since(t0);
  for (auto& s : slots) report.ledgers.push_back(std::move(*s));

  const auto t1 = std::chrono::steady_clock::now();
  report.trace = convergence_trace(report.ledgers, report.truth, cluster_seed(cfg.seed), &report.clustering, &report.graph);
  report.final_nmi = report.trace.back().nmi;
  report.analyze_seconds = detail::seconds_since(t1);

  if (!cfg.output_dir.empty()) write_report_bundle(report, cfg.output_dir);
  return report;
}

}  // namespace tomo
