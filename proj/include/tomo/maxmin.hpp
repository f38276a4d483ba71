#pragma once

#include <algorithm>
#include <functional>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "topology.hpp"

namespace tomo {

/// Route of one flow through capacity resources, plus an optional private cap.
struct FlowPath {
  std::vector<std::uint32_t> resources;
  double cap_bps = std::numeric_limits<double>::infinity();
};

namespace detail {
inline const FlowPath& as_path(const FlowPath& p) noexcept { return p; }
inline const FlowPath& as_path(const FlowPath* p) noexcept { return *p; }
}  // namespace detail

/// Max-min fair rate allocation by progressive filling.
///
/// Equivalent to raising all unfrozen flows together and freezing the flows
/// of each resource as it saturates, but done bottleneck by bottleneck: the
/// resource with the smallest fair share (remaining capacity / unfrozen
/// users) fixes the rate of all its unfrozen flows, then shares are updated.
/// A flow's private cap acts as a resource used by that flow alone. Scratch
/// buffers are kept between calls so the simulator can resolve rates after
/// every flow-set change without allocating.
class FairShareSolver {
 public:
  template <class PathRange>
  const std::vector<double>& solve(std::span<const double> capacities, const PathRange& flows) {
    const std::size_t nr = capacities.size();
    const std::size_t nf = std::size(flows);
    // Resources nr + f are the private caps of flows f.
    remaining_.assign(capacities.begin(), capacities.end());
    remaining_.resize(nr + nf, std::numeric_limits<double>::infinity());
    users_.assign(nr + nf, 0);
    mark_.assign(nr + nf, 0);
    rates_.assign(nf, 0.0);
    frozen_.assign(nf, 0);
    paths_.clear();
    for (const auto& elem : flows) {
      const FlowPath& p = detail::as_path(elem);
      const bool capped = p.cap_bps < std::numeric_limits<double>::infinity();
      if (p.resources.empty() && !capped)
        throw std::invalid_argument("flow with neither resources nor a cap has unbounded rate");
      for (auto r : p.resources) {
        if (r >= nr) throw std::out_of_range("flow references unknown resource");
        ++users_[r];
      }
      if (capped) {
        remaining_[nr + paths_.size()] = p.cap_bps;
        users_[nr + paths_.size()] = 1;
      }
      paths_.push_back(&p);
    }

    // Flows of each resource, as offsets into a flat array.
    offsets_.assign(nr + nf + 1, 0);
    for (std::size_t r = 0; r < nr + nf; ++r) offsets_[r + 1] = offsets_[r] + users_[r];
    members_.resize(offsets_.back());
    fill_.assign(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t f = 0; f < nf; ++f) {
      for (auto r : paths_[f]->resources) members_[fill_[r]++] = static_cast<std::uint32_t>(f);
      if (users_[nr + f]) members_[fill_[nr + f]++] = static_cast<std::uint32_t>(f);
    }

    heap_.clear();
    for (std::size_t r = 0; r < nr + nf; ++r)
      if (users_[r] > 0) heap_.push_back({share(r), static_cast<std::uint32_t>(r)});
    std::make_heap(heap_.begin(), heap_.end(), std::greater<>{});

    double level = 0.0;
    while (!heap_.empty()) {
      std::pop_heap(heap_.begin(), heap_.end(), std::greater<>{});
      const auto [key, r] = heap_.back();
      heap_.pop_back();
      if (users_[r] == 0 || key != share(r)) continue;  // stale entry
      level = std::max(level, key);
      touched_.clear();
      for (std::size_t i = offsets_[r]; i < offsets_[r + 1]; ++i) {
        const auto f = members_[i];
        if (frozen_[f]) continue;
        frozen_[f] = 1;
        rates_[f] = level;
        release(nr + f, level);
        for (auto q : paths_[f]->resources) release(q, level);
      }
      for (auto q : touched_) {
        mark_[q] = 0;
        if (users_[q] > 0) {
          heap_.push_back({share(q), q});
          std::push_heap(heap_.begin(), heap_.end(), std::greater<>{});
        }
      }
    }
    return rates_;
  }

 private:
  struct Entry {
    double share;
    std::uint32_t resource;
    friend bool operator>(const Entry& a, const Entry& b) {
      return a.share != b.share ? a.share > b.share : a.resource > b.resource;
    }
  };

  double share(std::size_t r) const noexcept { return std::max(0.0, remaining_[r]) / static_cast<double>(users_[r]); }

  void release(std::size_t r, double rate) {
    if (users_[r] == 0) return;
    remaining_[r] -= rate;
    --users_[r];
    if (!mark_[r]) {
      mark_[r] = 1;
      touched_.push_back(static_cast<std::uint32_t>(r));
    }
  }

  std::vector<double> remaining_;
  std::vector<std::size_t> users_;
  std::vector<double> rates_;
  std::vector<char> frozen_;
  std::vector<const FlowPath*> paths_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> fill_;
  std::vector<std::uint32_t> members_;
  std::vector<Entry> heap_;
  std::vector<std::uint32_t> touched_;
  std::vector<char> mark_;
};

/// One-shot convenience wrapper.
inline std::vector<double> max_min_rates(std::span<const double> capacities, std::span<const FlowPath> flows) {
  FairShareSolver solver;
  return solver.solve(capacities, flows);
}

/// Capacity resources of a topology and the resource path of every ordered
/// node pair. A full-duplex link contributes one resource per direction; a
/// half-duplex link has a single resource shared by both directions.
class FlowNetwork {
 public:
  explicit FlowNetwork(const PhysicalTopology& t) : n_(t.node_count()), paths_(n_ * n_) {
    capacities_.reserve(2 * t.links().size());
    for (const auto& l : t.links()) {
      capacities_.push_back(l.capacity_bps());
      capacities_.push_back(l.duplex ? l.capacity_bps() : 0.0);
    }
    const RouteTable routes(t);
    for (NodeId s = 0; s < n_; ++s) {
      for (NodeId d = 0; d < n_; ++d) {
        if (s == d) continue;
        FlowPath& path = paths_[s * n_ + d];
        std::size_t at = t.vertex(Endpoint::node(s));
        for (LinkId lid : routes(s, d)) {
          const Link& l = t.link(lid);
          const bool forward = t.vertex(l.a) == at;
          path.resources.push_back(2 * lid + ((forward || !l.duplex) ? 0 : 1));
          at = forward ? t.vertex(l.b) : t.vertex(l.a);
          if (l.flow_cap_mbps > 0.0) path.cap_bps = std::min(path.cap_bps, l.flow_cap_bps());
        }
      }
    }
  }

  std::size_t node_count() const noexcept { return n_; }
  std::span<const double> capacities() const noexcept { return capacities_; }
  const FlowPath& path(NodeId src, NodeId dst) const { return paths_.at(src * n_ + dst); }

 private:
  std::size_t n_;
  std::vector<double> capacities_;
  std::vector<FlowPath> paths_;
};

/// Rates (bits/s) of flows between node pairs under max-min fair sharing.
inline std::vector<double> recompute_rates(const FlowNetwork& net, std::span<const std::pair<NodeId, NodeId>> flows) {
  std::vector<FlowPath> paths;
  paths.reserve(flows.size());
  for (auto [s, d] : flows) paths.push_back(net.path(s, d));
  return max_min_rates(net.capacities(), paths);
}

}  // namespace tomo
