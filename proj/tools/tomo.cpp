#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tomo/tomo.hpp"

namespace {

std::uint64_t parse_seed(const std::string& text, const char* what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw std::invalid_argument(std::string(what) + ": '" + text + "' is not an unsigned 64-bit integer");
  return v;
}

std::uint64_t effective_seed(std::uint64_t flag_value) {
  if (const char* env = std::getenv("TOMO_SEED"); env && *env) return parse_seed(env, "TOMO_SEED");
  return flag_value;
}

tomo::Partition load_partition(const std::string& path) {
  auto in = tomo::csv::open_input(path);
  try {
    return tomo::read_partition_csv(in);
  } catch (const tomo::FormatError& e) {
    throw tomo::FormatError(path + ": " + e.what());
  }
}

tomo::MeasurementGraph load_weights(const std::string& path, std::size_t node_count) {
  auto in = tomo::csv::open_input(path);
  try {
    return tomo::read_weights_csv(in, node_count);
  } catch (const tomo::FormatError& e) {
    throw tomo::FormatError(path + ": " + e.what());
  }
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    tomo::csv::write_file(out_path, text);
  }
}

void check_cover(const tomo::MeasurementGraph& g, const tomo::Partition& truth) {
  if (g.node_count() != truth.size())
    throw std::invalid_argument("weights mention node " + std::to_string(g.node_count() - 1) + " but truth covers " +
                                std::to_string(truth.size()) + " nodes");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tomo: network tomography from simulated BitTorrent broadcasts"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  // run
  auto* run = app.add_subcommand("run", "Simulate n broadcasts, cluster the aggregated graph, write a report bundle");
  tomo::ExperimentConfig cfg;
  std::string root_policy = "fixed";
  std::uint32_t fragments = 0, slots = 0, peer_cap = 0;
  bool no_ledgers = false;
  bool quiet = false;
  auto* scenario_opt = run->add_option("--scenario", cfg.scenario, "Built-in scenario (see `tomo scenarios`)");
  auto* topo_opt = run->add_option("--topology", cfg.topology_path, "Topology JSON file")->check(CLI::ExistingFile);
  scenario_opt->excludes(topo_opt);
  run->add_option("-n,--iterations", cfg.iterations, "Number of broadcasts")->check(CLI::PositiveNumber);
  run->add_option("--seed", cfg.seed, "Master seed (TOMO_SEED overrides)");
  run->add_option("--out", cfg.output_dir, "Output directory for the report bundle");
  run->add_option("--root-policy", root_policy, "fixed | rotate")->check(CLI::IsMember({"fixed", "rotate"}));
  run->add_option("--fragments", fragments, "Override file size in fragments")->check(CLI::PositiveNumber);
  run->add_option("--slots", slots, "Override parallel upload slots")->check(CLI::PositiveNumber);
  run->add_option("--peer-cap", peer_cap, "Override peer set cap")->check(CLI::PositiveNumber);
  run->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
  run->add_option("--fraction", cfg.dot_fraction, "Edge fraction for graph.dot")->check(CLI::Range(0.0, 1.0));
  run->add_flag("--no-ledgers", no_ledgers, "Skip per-run ledger files");
  run->add_flag("-q,--quiet", quiet, "Print only the final summary line");

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Louvain clustering of a weights CSV, scored against a truth partition");
  std::string weights_path, truth_path, out_path;
  std::uint64_t cluster_seed = 0;
  cluster->add_option("--weights", weights_path, "node_a,node_b,weight CSV")->required()->check(CLI::ExistingFile);
  cluster->add_option("--truth", truth_path, "node,cluster CSV")->required()->check(CLI::ExistingFile);
  cluster->add_option("--seed", cluster_seed, "Louvain seed (TOMO_SEED overrides)");
  cluster->add_option("--out", out_path, "Write the found partition CSV here");

  // nmi
  auto* nmi = app.add_subcommand("nmi", "NMI between two partition CSVs");
  std::string a_path, b_path;
  nmi->add_option("--a", a_path, "node,cluster CSV")->required()->check(CLI::ExistingFile);
  nmi->add_option("--b", b_path, "node,cluster CSV")->required()->check(CLI::ExistingFile);

  // export-dot
  auto* dot = app.add_subcommand("export-dot", "DOT graph of the heaviest edges for neato");
  double fraction = 0.5;
  std::string dot_out;
  dot->add_option("--weights", weights_path, "node_a,node_b,weight CSV")->required()->check(CLI::ExistingFile);
  dot->add_option("--truth", truth_path, "node,cluster CSV")->required()->check(CLI::ExistingFile);
  dot->add_option("--fraction", fraction, "Fraction of edges kept, in (0, 1]")->check(CLI::Range(0.0, 1.0));
  dot->add_option("--out", dot_out, "Output file (default stdout)");

  // scenarios
  auto* scenarios = app.add_subcommand("scenarios", "List built-in scenarios");
  std::string dump_name;
  scenarios->add_option("--json", dump_name, "Print the topology document of one scenario");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (cfg.scenario.empty() && cfg.topology_path.empty()) throw CLI::RequiredError("--scenario or --topology");
      cfg.seed = effective_seed(cfg.seed);
      cfg.root_policy = tomo::parse_root_policy(root_policy);
      if (fragments) cfg.fragments = fragments;
      if (slots) cfg.upload_slots = slots;
      if (peer_cap) cfg.peer_cap = peer_cap;
      cfg.write_ledgers = !no_ledgers;
      const auto report = tomo::run_experiment(cfg);
      if (!quiet) {
        std::printf("%-5s %-10s %-12s %s\n", "n", "nmi", "modularity", "k");
        for (const auto& p : report.trace)
          std::printf("%-5llu %-10.6f %-12.6f %zu\n", static_cast<unsigned long long>(p.iterations), p.nmi,
                      p.modularity, p.clusters);
      }
      std::printf("topology=%s runs=%llu seed=%llu nmi=%.6f modularity=%.6f k=%zu simulate_s=%.2f analyze_s=%.2f\n",
                  report.topology_name.c_str(), static_cast<unsigned long long>(cfg.iterations),
                  static_cast<unsigned long long>(cfg.seed), report.final_nmi, report.clustering.score.q,
                  report.clustering.partition.cluster_count(), report.simulate_seconds, report.analyze_seconds);
      if (!cfg.output_dir.empty()) std::printf("wrote %s\n", cfg.output_dir.c_str());
    } else if (*cluster) {
      const auto truth = load_partition(truth_path);
      const auto graph = load_weights(weights_path, truth.size());
      check_cover(graph, truth);
      const auto result = tomo::louvain(graph, effective_seed(cluster_seed));
      if (!out_path.empty()) tomo::csv::write_file(out_path, tomo::partition_csv(result.partition));
      std::printf("k=%zu modularity=%.6f nmi=%.6f\n", result.partition.cluster_count(), result.score.q,
                  tomo::nmi(result.partition, truth));
      if (out_path.empty()) std::cout << tomo::partition_csv(result.partition);
    } else if (*nmi) {
      std::printf("%.12f\n", tomo::nmi(load_partition(a_path), load_partition(b_path)));
    } else if (*dot) {
      const auto truth = load_partition(truth_path);
      const auto graph = load_weights(weights_path, truth.size());
      check_cover(graph, truth);
      emit(tomo::to_dot(graph, truth, fraction), dot_out);
    } else if (*scenarios) {
      if (!dump_name.empty()) {
        const auto s = tomo::builtin_scenario(dump_name);
        std::cout << tomo::serialize_topology(s.topology, s.ground_truth);
      } else {
        for (const auto& name : tomo::builtin_scenario_names()) {
          const auto s = tomo::builtin_scenario(name);
          std::printf("%-5s nodes=%-3zu k=%zu  %s\n", name.c_str(), s.topology.node_count(),
                      s.ground_truth.cluster_count(), s.description.c_str());
        }
      }
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "tomo: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
