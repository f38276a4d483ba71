#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace tomo {

using NodeId = std::uint32_t;
using ClusterId = std::uint32_t;

/// Non-overlapping assignment of nodes 0..N-1 to clusters 0..k-1.
///
/// Labels are always dense: construction renumbers arbitrary labels in order
/// of first appearance, so two partitions that differ only by a label
/// permutation compare equal.
class Partition {
 public:
  Partition() = default;

  template <class Label>
  explicit Partition(std::span<const Label> labels) {
    assign(labels.begin(), labels.end());
  }

  template <class Label>
  explicit Partition(const std::vector<Label>& labels) {
    assign(labels.begin(), labels.end());
  }

  Partition(std::initializer_list<std::int64_t> labels) { assign(labels.begin(), labels.end()); }

  static Partition singletons(std::size_t n) {
    std::vector<ClusterId> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<ClusterId>(i);
    return Partition(labels);
  }

  static Partition one_cluster(std::size_t n) { return Partition(std::vector<ClusterId>(n, 0)); }

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t cluster_count() const noexcept { return cluster_count_; }
  ClusterId operator[](NodeId node) const { return labels_.at(node); }
  const std::vector<ClusterId>& labels() const noexcept { return labels_; }

  std::vector<std::size_t> cluster_sizes() const {
    std::vector<std::size_t> sizes(cluster_count_, 0);
    for (auto l : labels_) ++sizes[l];
    return sizes;
  }

  std::vector<std::vector<NodeId>> members() const {
    std::vector<std::vector<NodeId>> out(cluster_count_);
    for (std::size_t i = 0; i < labels_.size(); ++i) out[labels_[i]].push_back(static_cast<NodeId>(i));
    return out;
  }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  template <class It>
  void assign(It first, It last) {
    std::unordered_map<std::int64_t, ClusterId> remap;
    for (; first != last; ++first) {
      const auto key = static_cast<std::int64_t>(*first);
      auto [it, inserted] = remap.try_emplace(key, static_cast<ClusterId>(remap.size()));
      labels_.push_back(it->second);
    }
    cluster_count_ = remap.size();
  }

  std::vector<ClusterId> labels_;
  std::size_t cluster_count_ = 0;
};

}  // namespace tomo
