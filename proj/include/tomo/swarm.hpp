#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "csv.hpp"
#include "maxmin.hpp"
#include "pieces.hpp"
#include "rng.hpp"
#include "topology.hpp"

namespace tomo {

/// Parameters of one synchronized broadcast.
struct SwarmConfig {
  std::uint32_t file_size_fragments = 15259;
  std::uint32_t fragment_size = 16384;  // bytes
  std::uint32_t max_parallel_uploads = 4;
  std::uint32_t max_peer_set = 35;
  NodeId root = 0;
  std::uint64_t rng_seed = 0;
  double unchoke_period = 10.0;  // simulated seconds
  std::uint32_t optimistic_slots = 1;
  /// Verify per-resource capacity after every rate change.
  bool check_capacity = true;

  double fragment_bits() const noexcept { return static_cast<double>(fragment_size) * 8.0; }

  void validate(std::size_t node_count) const {
    if (file_size_fragments < 1) throw std::invalid_argument("file_size_fragments must be >= 1");
    if (fragment_size < 1) throw std::invalid_argument("fragment_size must be >= 1");
    if (max_parallel_uploads < 1 || max_parallel_uploads >= max_peer_set)
      throw std::invalid_argument("need 1 <= max_parallel_uploads < max_peer_set");
    if (optimistic_slots > max_parallel_uploads)
      throw std::invalid_argument("optimistic_slots exceeds max_parallel_uploads");
    if (!(unchoke_period > 0.0)) throw std::invalid_argument("unchoke_period must be positive");
    if (root >= node_count) throw std::invalid_argument("root is not a node of the topology");
  }
};

/// Who sent how many fragments to whom during one broadcast.
class TransferLedger {
 public:
  TransferLedger() = default;
  TransferLedger(std::size_t node_count, std::uint32_t file_size_fragments, NodeId root)
      : node_count_(node_count),
        file_size_fragments_(file_size_fragments),
        root_(root),
        completion_(node_count, 0.0) {}

  std::size_t node_count() const noexcept { return node_count_; }
  std::uint32_t file_size_fragments() const noexcept { return file_size_fragments_; }
  NodeId root() const noexcept { return root_; }

  std::uint64_t count(NodeId sender, NodeId receiver) const {
    auto it = counts_.find({sender, receiver});
    return it == counts_.end() ? 0 : it->second;
  }

  void add(NodeId sender, NodeId receiver, std::uint64_t fragments) {
    if (sender >= node_count_ || receiver >= node_count_ || sender == receiver)
      throw std::out_of_range("ledger entry outside node range");
    if (fragments > 0) counts_[{sender, receiver}] += fragments;
  }

  /// Nonzero counts, ordered by (sender, receiver).
  const std::map<std::pair<NodeId, NodeId>, std::uint64_t>& counts() const noexcept { return counts_; }

  std::uint64_t received_by(NodeId receiver) const {
    std::uint64_t total = 0;
    for (const auto& [key, c] : counts_)
      if (key.second == receiver) total += c;
    return total;
  }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& [key, c] : counts_) t += c;
    return t;
  }

  double completion_time(NodeId n) const { return completion_.at(n); }
  void set_completion_time(NodeId n, double seconds) { completion_.at(n) = seconds; }
  const std::vector<double>& completion_times() const noexcept { return completion_; }
  double makespan() const { return completion_.empty() ? 0.0 : *std::max_element(completion_.begin(), completion_.end()); }

  friend bool operator==(const TransferLedger&, const TransferLedger&) = default;

 private:
  std::size_t node_count_ = 0;
  std::uint32_t file_size_fragments_ = 0;
  NodeId root_ = 0;
  std::map<std::pair<NodeId, NodeId>, std::uint64_t> counts_;
  std::vector<double> completion_;
};

// ---------------------------------------------------------------------------
// Ledger serialization.

inline std::string ledger_csv(const TransferLedger& ledger) {
  std::string out = "sender,receiver,fragments\n";
  for (const auto& [key, c] : ledger.counts())
    out += std::to_string(key.first) + "," + std::to_string(key.second) + "," + std::to_string(c) + "\n";
  return out;
}

inline std::string completion_csv(const TransferLedger& ledger) {
  std::string out = "node,completion_seconds\n";
  for (NodeId n = 0; n < ledger.node_count(); ++n)
    out += std::to_string(n) + "," + csv::format(ledger.completion_time(n)) + "\n";
  return out;
}

/// Reads a ledger back from its two files. The completion file fixes the node
/// count; file size is inferred as the largest per-receiver total.
inline TransferLedger read_ledger(std::istream& counts_in, std::istream& completion_in, NodeId root = 0) {
  std::vector<double> completion;
  csv::read(completion_in, "node,completion_seconds", [&](const auto& f, std::size_t line) {
    const auto node = csv::parse_number<NodeId>(f[0], "node", line);
    if (node != completion.size()) throw FormatError("line " + std::to_string(line) + ": nodes must be listed in order");
    completion.push_back(csv::parse_number<double>(f[1], "completion_seconds", line));
  });
  std::vector<std::tuple<NodeId, NodeId, std::uint64_t>> rows;
  csv::read(counts_in, "sender,receiver,fragments", [&](const auto& f, std::size_t line) {
    rows.emplace_back(csv::parse_number<NodeId>(f[0], "sender", line), csv::parse_number<NodeId>(f[1], "receiver", line),
                      csv::parse_number<std::uint64_t>(f[2], "fragments", line));
  });
  std::vector<std::uint64_t> inbound(completion.size(), 0);
  for (auto [s, r, c] : rows) {
    if (s >= completion.size() || r >= completion.size()) throw FormatError("ledger row references unknown node");
    inbound[r] += c;
  }
  const auto file_size = inbound.empty() ? 0 : *std::max_element(inbound.begin(), inbound.end());
  TransferLedger ledger(completion.size(), static_cast<std::uint32_t>(file_size), root);
  for (auto [s, r, c] : rows) ledger.add(s, r, c);
  for (NodeId n = 0; n < completion.size(); ++n) ledger.set_completion_time(n, completion[n]);
  return ledger;
}

// ---------------------------------------------------------------------------
// Protocol building blocks.

/// Uniformly random subset of min(max_peer_set, N-1) other nodes, sorted.
inline std::vector<NodeId> select_peer_set(NodeId node, std::size_t node_count, const SwarmConfig& config, Rng& rng) {
  std::vector<NodeId> others;
  others.reserve(node_count - 1);
  for (NodeId i = 0; i < node_count; ++i)
    if (i != node) others.push_back(i);
  const std::size_t k = std::min<std::size_t>(config.max_peer_set, others.size());
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(others.size() - i));
    std::swap(others[i], others[j]);
  }
  others.resize(k);
  std::sort(others.begin(), others.end());
  return others;
}

/// Draws every node's peer set (from that node's stream), symmetrizes, and
/// bridges any component not reachable from the root so the broadcast can
/// finish. Bridging only triggers for tiny peer caps.
inline std::vector<std::vector<NodeId>> build_peer_sets(std::size_t node_count, const SwarmConfig& config,
                                                        std::vector<Rng>& streams) {
  std::vector<std::vector<char>> adj(node_count, std::vector<char>(node_count, 0));
  for (NodeId n = 0; n < node_count; ++n) {
    for (NodeId p : select_peer_set(n, node_count, config, streams[n])) {
      adj[n][p] = 1;
      adj[p][n] = 1;
    }
  }
  std::vector<char> reached(node_count, 0);
  auto flood = [&](NodeId start) {
    std::vector<NodeId> stack{start};
    reached[start] = 1;
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (NodeId w = 0; w < node_count; ++w)
        if (adj[v][w] && !reached[w]) {
          reached[w] = 1;
          stack.push_back(w);
        }
    }
  };
  flood(config.root);
  for (NodeId n = 0; n < node_count; ++n) {
    if (reached[n]) continue;
    std::vector<NodeId> inside;
    for (NodeId i = 0; i < node_count; ++i)
      if (reached[i]) inside.push_back(i);
    const NodeId anchor = inside[streams[n].below(inside.size())];
    adj[n][anchor] = adj[anchor][n] = 1;
    flood(n);
  }
  std::vector<std::vector<NodeId>> peers(node_count);
  for (NodeId n = 0; n < node_count; ++n)
    for (NodeId p = 0; p < node_count; ++p)
      if (adj[n][p]) peers[n].push_back(p);
  return peers;
}

/// Peer as seen by a node deciding whom to unchoke.
struct ChokeCandidate {
  NodeId peer = 0;
  bool interested = false;
  /// Download rate from the peer (upload rate to it, for the seed).
  double recent_rate = 0.0;
};

/// One rechoke decision for a single node. Unchokes at most
/// max_parallel_uploads interested peers: the regular slots go to the highest
/// recent rates (lower id first on ties) and the optimistic slots to uniformly
/// drawn remaining interested peers. Returns the sorted unchoked set.
inline std::vector<NodeId> choke_round(std::span<const ChokeCandidate> candidates, const SwarmConfig& config, Rng& rng) {
  std::vector<ChokeCandidate> interested;
  for (const auto& c : candidates)
    if (c.interested) interested.push_back(c);

  std::vector<NodeId> chosen;
  if (interested.size() <= config.max_parallel_uploads) {
    for (const auto& c : interested) chosen.push_back(c.peer);
  } else {
    std::sort(interested.begin(), interested.end(), [](const ChokeCandidate& x, const ChokeCandidate& y) {
      if (x.recent_rate != y.recent_rate) return x.recent_rate > y.recent_rate;
      return x.peer < y.peer;
    });
    const std::size_t regular = config.max_parallel_uploads - config.optimistic_slots;
    for (std::size_t i = 0; i < regular; ++i) chosen.push_back(interested[i].peer);
    std::vector<NodeId> rest;
    for (std::size_t i = regular; i < interested.size(); ++i) rest.push_back(interested[i].peer);
    std::sort(rest.begin(), rest.end());
    for (std::uint32_t s = 0; s < config.optimistic_slots && !rest.empty(); ++s) {
      const auto j = static_cast<std::size_t>(rng.below(rest.size()));
      chosen.push_back(rest[j]);
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(j));
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

// ---------------------------------------------------------------------------
// The simulator.

/// Counters exposed for tests and diagnostics.
struct SwarmStats {
  std::uint64_t events = 0;
  std::uint64_t rate_recomputations = 0;
  std::uint64_t choke_rounds = 0;
  std::uint64_t cancelled_fragments = 0;
  double max_capacity_ratio = 0.0;  // max over checks of load / capacity
};

namespace detail {

class BroadcastSimulation {
 public:
  BroadcastSimulation(const FlowNetwork& net, const SwarmConfig& config)
      : net_(net), cfg_(config), n_(net.node_count()), ledger_(n_, config.file_size_fragments, config.root) {
    cfg_.validate(n_);
    streams_.reserve(n_);
    for (NodeId i = 0; i < n_; ++i) streams_.emplace_back(derive_seed(cfg_.rng_seed, i));
    peers_ = build_peer_sets(n_, cfg_, streams_);
    is_peer_.assign(n_ * n_, 0);
    for (NodeId i = 0; i < n_; ++i)
      for (NodeId p : peers_[i]) is_peer_[i * n_ + p] = 1;

    const std::size_t f = cfg_.file_size_fragments;
    has_.assign(n_, PieceSet(f));
    pending_.assign(n_, PieceSet(f));
    has_[cfg_.root] = PieceSet(f, true);
    index_.resize(n_);
    for (NodeId i = 0; i < n_; ++i) {
      if (i == cfg_.root) continue;
      index_[i] = RarityIndex(f, peers_[i].size());
      const bool sees_root = is_peer_[i * n_ + cfg_.root];
      for (FragmentIndex p = 0; p < f; ++p) {
        if (sees_root) index_[i].increment(p);
        index_[i].insert(p);
      }
    }
    interest_.assign(n_ * n_, 0);
    for (NodeId p : peers_[cfg_.root]) interest_[p * n_ + cfg_.root] = static_cast<std::uint32_t>(f);
    unchoked_.assign(n_, {});
    unchoked_flag_.assign(n_ * n_, 0);
    inflight_.assign(n_ * n_, -1);
    solved_rate_.assign(n_ * n_, 0.0);
    sent_.assign(n_ * n_, 0);
    recent_.assign(n_ * n_, 0);
    previous_.assign(n_ * n_, 0);
    recent_busy_.assign(n_ * n_, 0.0);
    previous_busy_.assign(n_ * n_, 0.0);
    complete_.assign(n_, 0);
    complete_[cfg_.root] = 1;
    remaining_nodes_ = n_ - 1;
  }

  TransferLedger run() {
    // Before any rate is known the seed fills its slots at random; the
    // first choke round happens one period in.
    refill(cfg_.root);
    double next_choke = cfg_.unchoke_period;
    while (remaining_nodes_ > 0) {
      if (now_ >= next_choke) {
        rechoke_all();
        next_choke += cfg_.unchoke_period;
      }
      if (mismatch_ != 0) recompute();
      for (auto key : unscheduled_) {
        const auto slot = inflight_[key];
        if (slot >= 0 && flows_[static_cast<std::size_t>(slot)].finish < 0.0) schedule(flows_[static_cast<std::size_t>(slot)]);
      }
      unscheduled_.clear();
      while (!due_.empty() && !live(due_.front())) {
        std::pop_heap(due_.begin(), due_.end(), std::greater<>{});
        due_.pop_back();
      }
      if (due_.empty()) {
        // Nothing can move until the next rechoke; if that does not help either
        // the protocol state is inconsistent.
        if (stalled_) throw std::logic_error("broadcast stalled with no active transfers");
        stalled_ = true;
        now_ = next_choke;
        continue;
      }
      stalled_ = false;

      const double first = due_.front().time;
      if (first >= next_choke) {
        now_ = next_choke;
        continue;
      }
      now_ = first;
      // Fragments finishing within rounding distance complete together.
      const double horizon = first + 1e-12 * (1.0 + first);
      finished_.clear();
      while (!due_.empty() && due_.front().time <= horizon) {
        std::pop_heap(due_.begin(), due_.end(), std::greater<>{});
        const Due d = due_.back();
        due_.pop_back();
        if (live(d)) finished_.push_back({d.sender, d.receiver});
      }
      std::sort(finished_.begin(), finished_.end());
      for (auto [s, r] : finished_) complete_transfer(s, r);
    }
    for (NodeId s = 0; s < n_; ++s)
      for (NodeId r = 0; r < n_; ++r)
        if (sent_[s * n_ + r] > 0) ledger_.add(s, r, sent_[s * n_ + r]);
    return std::move(ledger_);
  }

  const SwarmStats& stats() const noexcept { return stats_; }
  const std::vector<std::vector<NodeId>>& peer_sets() const noexcept { return peers_; }

 private:
  struct Flow {
    NodeId sender;
    NodeId receiver;
    FragmentIndex piece;
    double remaining;  // bits left at time `synced`
    double rate;
    double start;
    double synced;
    double finish;
    std::uint64_t serial;
  };

  /// Scheduled completion; stale once its flow is gone or rescheduled.
  struct Due {
    double time;
    std::uint64_t serial;
    NodeId sender;
    NodeId receiver;
    friend bool operator>(const Due& a, const Due& b) {
      return a.time != b.time ? a.time > b.time : a.serial > b.serial;
    }
  };

  bool live(const Due& d) const noexcept {
    const auto slot = inflight_[at(d.sender, d.receiver)];
    return slot >= 0 && flows_[static_cast<std::size_t>(slot)].serial == d.serial &&
           flows_[static_cast<std::size_t>(slot)].finish == d.time;
  }

  void schedule(Flow& fl) {
    fl.finish = fl.synced + fl.remaining / fl.rate;
    due_.push_back({fl.finish, fl.serial, fl.sender, fl.receiver});
    std::push_heap(due_.begin(), due_.end(), std::greater<>{});
  }

  std::size_t at(NodeId a, NodeId b) const noexcept { return static_cast<std::size_t>(a) * n_ + b; }

  /// Rate ranking used by the choker: download rate from `peer`, or for the
  /// seed, upload rate to it. This is the throughput achieved while the
  /// connection was actually transferring, over the current and previous
  /// period; 0 without completed fragments.
  double rank(NodeId node, NodeId peer) const noexcept {
    const auto k = node == cfg_.root ? at(node, peer) : at(peer, node);
    const double busy = recent_busy_[k] + previous_busy_[k];
    return busy > 0.0 ? static_cast<double>(recent_[k] + previous_[k]) * cfg_.fragment_bits() / busy : 0.0;
  }

  void rechoke_all() {
    ++stats_.choke_rounds;
    std::vector<ChokeCandidate> cands;
    for (NodeId node = 0; node < n_; ++node) {
      cands.clear();
      for (NodeId p : peers_[node]) cands.push_back({p, interest_[at(p, node)] > 0, rank(node, p)});
      const auto next = choke_round(cands, cfg_, streams_[node]);
      const auto current = unchoked_[node];
      for (NodeId p : current)
        if (!std::binary_search(next.begin(), next.end(), p)) choke(node, p);
      for (NodeId p : next)
        if (!unchoked_flag_[at(node, p)]) unchoke(node, p);
    }
    std::swap(previous_, recent_);
    std::fill(recent_.begin(), recent_.end(), 0);
    std::swap(previous_busy_, recent_busy_);
    std::fill(recent_busy_.begin(), recent_busy_.end(), 0.0);
    period_start_ = now_;
  }

  void unchoke(NodeId s, NodeId r) {
    unchoked_flag_[at(s, r)] = 1;
    unchoked_[s].push_back(r);
    try_start(s, r);
  }

  void choke(NodeId s, NodeId r) {
    unchoked_flag_[at(s, r)] = 0;
    auto& list = unchoked_[s];
    list.erase(std::find(list.begin(), list.end(), r));
    const auto slot = inflight_[at(s, r)];
    if (slot >= 0) {
      // Partial fragment is discarded; the receiver may fetch it again.
      const FragmentIndex piece = flows_[static_cast<std::size_t>(slot)].piece;
      remove_flow(static_cast<std::size_t>(slot));
      pending_[r].reset(piece);
      index_[r].insert(piece);
      ++stats_.cancelled_fragments;
      // Another unchoked uploader of r may have been idle waiting for this piece.
      for (NodeId q : peers_[r])
        if (unchoked_flag_[at(q, r)] && inflight_[at(q, r)] < 0 && q != s && has_[q].test(piece)) try_start(q, r);
    }
  }

  /// Fill free upload slots of `s` from interested, choked peers: best rank
  /// first, uniformly random among equals.
  void refill(NodeId s) {
    while (unchoked_[s].size() < cfg_.max_parallel_uploads) {
      double best = -1.0;
      std::vector<NodeId>& ties = scratch_;
      ties.clear();
      for (NodeId p : peers_[s]) {
        if (unchoked_flag_[at(s, p)] || interest_[at(p, s)] == 0) continue;
        const double r = rank(s, p);
        if (r > best) {
          best = r;
          ties.clear();
        }
        if (r == best) ties.push_back(p);
      }
      if (ties.empty()) return;
      unchoke(s, ties[streams_[s].below(ties.size())]);
    }
  }

  void try_start(NodeId s, NodeId r) {
    if (!unchoked_flag_[at(s, r)] || inflight_[at(s, r)] >= 0) return;
    auto piece = index_[r].pick(has_[s], streams_[r], 1);
    if (!piece) return;
    index_[r].remove(*piece);
    pending_[r].set(*piece);
    inflight_[at(s, r)] = static_cast<std::int32_t>(flows_.size());
    flows_.push_back({s, r, *piece, cfg_.fragment_bits(), solved_rate_[at(s, r)], now_, now_, -1.0, next_serial_++});
    pair_changed(at(s, r));
    unscheduled_.push_back(at(s, r));
  }

  void remove_flow(std::size_t slot) {
    const auto& gone = flows_[slot];
    inflight_[at(gone.sender, gone.receiver)] = -1;
    pair_changed(at(gone.sender, gone.receiver));
    if (slot + 1 != flows_.size()) {
      flows_[slot] = flows_.back();
      inflight_[at(flows_[slot].sender, flows_[slot].receiver)] = static_cast<std::int32_t>(slot);
    }
    flows_.pop_back();
  }

  // Rates only depend on which sender/receiver pairs are active. A connection
  // that finishes a fragment and starts the next one leaves that set, and so
  // every rate, unchanged; only a net change triggers a new solve.
  void pair_changed(std::size_t key) {
    if (solved_rate_[key] > 0.0) {
      mismatch_ += inflight_[key] >= 0 ? -1 : 1;
    } else {
      mismatch_ += inflight_[key] >= 0 ? 1 : -1;
    }
  }

  void complete_transfer(NodeId s, NodeId r) {
    ++stats_.events;
    const auto slot = inflight_[at(s, r)];
    const FragmentIndex piece = flows_[static_cast<std::size_t>(slot)].piece;
    {
      const double start = flows_[static_cast<std::size_t>(slot)].start;
      recent_busy_[at(s, r)] += now_ - std::max(start, period_start_);
      if (start < period_start_) previous_busy_[at(s, r)] += period_start_ - start;
    }
    remove_flow(static_cast<std::size_t>(slot));
    ++sent_[at(s, r)];
    ++recent_[at(s, r)];
    pending_[r].reset(piece);
    has_[r].set(piece);

    bool new_interest = false;
    for (NodeId q : peers_[r]) {
      if (!has_[q].test(piece)) {
        index_[q].increment(piece);
        if (interest_[at(q, r)]++ == 0) {
          new_interest = true;
        } else if (unchoked_flag_[at(r, q)] && !pending_[q].test(piece)) {
          // An idle r->q connection only becomes useful through this piece.
          try_start(r, q);
        }
      } else if (--interest_[at(r, q)] == 0) {
        lose_interest(r, q);
      }
    }

    // Peers that just became interested compete for r's free slots by rank.
    if (new_interest) refill(r);

    if (has_[r].full()) {
      complete_[r] = 1;
      --remaining_nodes_;
      ledger_.set_completion_time(r, now_);
    }
    try_start(s, r);
  }

  /// `r` no longer wants anything `q` has.
  void lose_interest(NodeId r, NodeId q) {
    if (unchoked_flag_[at(q, r)]) {
      choke(q, r);
      refill(q);
    }
  }

  void recompute() {
    ++stats_.rate_recomputations;
    for (auto key : solved_pairs_) solved_rate_[key] = 0.0;
    solved_pairs_.clear();
    paths_.clear();
    for (const auto& fl : flows_) paths_.push_back(&net_.path(fl.sender, fl.receiver));
    const auto& rates = solver_.solve(net_.capacities(), paths_);
    due_.clear();
    for (std::size_t i = 0; i < flows_.size(); ++i) {
      if (!(rates[i] > 0.0)) throw std::logic_error("flow allocated a zero rate");
      auto& fl = flows_[i];
      fl.remaining = std::max(0.0, fl.remaining - fl.rate * (now_ - fl.synced));
      fl.synced = now_;
      fl.rate = rates[i];
      schedule(fl);
      const auto key = at(flows_[i].sender, flows_[i].receiver);
      solved_rate_[key] = rates[i];
      solved_pairs_.push_back(key);
    }
    mismatch_ = 0;
    if (cfg_.check_capacity) check_capacity();
  }

  void check_capacity() {
    const auto caps = net_.capacities();
    load_.assign(caps.size(), 0.0);
    for (std::size_t i = 0; i < flows_.size(); ++i)
      for (auto res : paths_[i]->resources) load_[res] += flows_[i].rate;
    for (std::size_t res = 0; res < caps.size(); ++res) {
      if (load_[res] == 0.0) continue;
      const double ratio = load_[res] / caps[res];
      stats_.max_capacity_ratio = std::max(stats_.max_capacity_ratio, ratio);
      if (ratio > 1.0 + 1e-9) throw std::logic_error("link capacity exceeded");
    }
  }

  const FlowNetwork& net_;
  SwarmConfig cfg_;
  std::size_t n_;
  TransferLedger ledger_;
  std::vector<Rng> streams_;
  std::vector<std::vector<NodeId>> peers_;
  std::vector<char> is_peer_;
  std::vector<PieceSet> has_;
  std::vector<PieceSet> pending_;
  std::vector<RarityIndex> index_;
  std::vector<std::uint32_t> interest_;  // [r*n+s] = |has(s) \ has(r)|
  std::vector<std::vector<NodeId>> unchoked_;
  std::vector<char> unchoked_flag_;  // [s*n+r]
  std::vector<std::int32_t> inflight_;
  std::vector<std::uint64_t> sent_;
  std::vector<std::uint64_t> recent_;
  std::vector<std::uint64_t> previous_;
  std::vector<double> recent_busy_;  // seconds spent transferring, per pair
  std::vector<double> previous_busy_;
  std::vector<char> complete_;
  std::size_t remaining_nodes_ = 0;
  std::vector<Flow> flows_;
  std::vector<std::pair<NodeId, NodeId>> finished_;
  std::vector<Due> due_;  // min-heap on completion time
  std::uint64_t next_serial_ = 0;
  std::vector<std::size_t> unscheduled_;  // pairs whose new flow still needs a completion time
  std::vector<const FlowPath*> paths_;
  std::vector<double> load_;
  std::vector<NodeId> scratch_;
  FairShareSolver solver_;
  SwarmStats stats_;
  double now_ = 0.0;
  double period_start_ = 0.0;
  std::vector<double> solved_rate_;  // [s*n+r], rate from the last solve or 0
  std::vector<std::size_t> solved_pairs_;
  std::int64_t mismatch_ = 0;  // size of the symmetric difference with the solved pair set
  bool stalled_ = false;
};

}  // namespace detail

/// Simulates one broadcast from `config.root` to every other node and returns
/// the per-pair fragment counts. Deterministic in (network, config).
inline TransferLedger run_broadcast(const FlowNetwork& net, const SwarmConfig& config, SwarmStats* stats = nullptr) {
  detail::BroadcastSimulation sim(net, config);
  auto ledger = sim.run();
  if (stats) *stats = sim.stats();
  return ledger;
}

inline TransferLedger run_broadcast(const PhysicalTopology& topology, const SwarmConfig& config,
                                    SwarmStats* stats = nullptr) {
  const FlowNetwork net(topology);
  return run_broadcast(net, config, stats);
}

}  // namespace tomo
