#pragma once

#include <array>
#include <bit>
#include <cassert>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rng.hpp"

namespace tomo {

using FragmentIndex = std::uint32_t;

/// Fixed-size bitset over fragment indices.
class PieceSet {
 public:
  PieceSet() = default;
  explicit PieceSet(std::size_t size, bool full = false)
      : size_(size), words_((size + 63) / 64, full ? ~std::uint64_t{0} : 0) {
    if (full) {
      trim();
      count_ = size;
    }
  }

  std::size_t size() const noexcept { return size_; }
  std::size_t count() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  bool full() const noexcept { return count_ == size_; }

  bool test(FragmentIndex i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1U; }

  void set(FragmentIndex i) noexcept {
    auto& w = words_[i >> 6];
    const auto bit = std::uint64_t{1} << (i & 63);
    count_ += (w & bit) ? 0 : 1;
    w |= bit;
  }

  void reset(FragmentIndex i) noexcept {
    auto& w = words_[i >> 6];
    const auto bit = std::uint64_t{1} << (i & 63);
    count_ -= (w & bit) ? 1 : 0;
    w &= ~bit;
  }

  std::span<const std::uint64_t> words() const noexcept { return words_; }

  friend bool operator==(const PieceSet& a, const PieceSet& b) { return a.size_ == b.size_ && a.words_ == b.words_; }

 private:
  void trim() noexcept {
    if (size_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  }

  std::size_t size_ = 0;
  std::size_t count_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Straightforward rarest-first choice: among fragments the sender has that
/// the receiver neither has nor is already fetching, take the minimum
/// availability; break ties uniformly at random. Empty result = not interested.
inline std::optional<FragmentIndex> select_fragment(const PieceSet& receiver_has, const PieceSet& receiver_pending,
                                                    const PieceSet& sender_has,
                                                    std::span<const std::uint32_t> availability, Rng& rng) {
  std::vector<FragmentIndex> best;
  std::uint32_t best_avail = 0;
  for (FragmentIndex i = 0; i < sender_has.size(); ++i) {
    if (!sender_has.test(i) || receiver_has.test(i) || receiver_pending.test(i)) continue;
    if (best.empty() || availability[i] < best_avail) {
      best.clear();
      best_avail = availability[i];
    }
    if (availability[i] == best_avail) best.push_back(i);
  }
  if (best.empty()) return std::nullopt;
  return best[rng.below(best.size())];
}

/// Incremental rarest-first index for one receiver.
///
/// Every fragment the receiver still needs (missing and not in flight) sits
/// in the bucket of its current availability, i.e. the number of peers in
/// the receiver's peer set holding it. `pick` draws the same distribution as
/// `select_fragment`: the k-th common bit of the lowest matching bucket with
/// k uniform. When the sender can offer only a few needed fragments they are
/// enumerated directly; otherwise buckets are scanned from the lowest, each
/// with a summary of its nonzero words so sparse buckets cost little.
class RarityIndex {
 public:
  RarityIndex() = default;
  RarityIndex(std::size_t fragments, std::size_t max_availability)
      : levels_(max_availability + 1),
        words_((fragments + 63) / 64),
        summary_words_((words_ + 63) / 64),
        state_(fragments, 0),
        members_(words_, 0),
        sizes_(levels_, 0),
        bits_(levels_ * words_, 0),
        summary_(levels_ * summary_words_, 0) {
    if (max_availability >= kMaxAvailability) throw std::invalid_argument("peer set too large for rarity index");
  }

  std::uint32_t availability(FragmentIndex i) const noexcept { return state_[i] >> 1; }
  bool contains(FragmentIndex i) const noexcept { return state_[i] & 1U; }
  std::size_t size() const noexcept { return size_; }

  void insert(FragmentIndex i) {
    if (state_[i] & 1U) return;
    state_[i] |= 1U;
    members_[i >> 6] |= std::uint64_t{1} << (i & 63);
    add_to(state_[i] >> 1, i);
    ++size_;
  }

  void remove(FragmentIndex i) {
    if (!(state_[i] & 1U)) return;
    state_[i] &= static_cast<std::uint16_t>(~1U);
    members_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
    remove_from(state_[i] >> 1, i);
    --size_;
  }

  /// One more peer now holds fragment i.
  void increment(FragmentIndex i) {
    const std::size_t a = state_[i] >> 1;
    assert(a + 1 < levels_);
    if (state_[i] & 1U) {
      remove_from(a, i);
      add_to(a + 1, i);
    }
    state_[i] = static_cast<std::uint16_t>(state_[i] + 2);
  }

  /// `min_availability` lets callers skip buckets that cannot hold any of the
  /// sender's fragments (a sender inside the peer set counts toward every
  /// fragment it has, so 1 is exact there).
  std::optional<FragmentIndex> pick(const PieceSet& sender_has, Rng& rng, std::size_t min_availability = 0) const {
    const auto sender = sender_has.words();
    if (auto few = pick_few(sender, rng)) return *few;
    for (std::size_t level = min_availability; level < levels_; ++level) {
      if (sizes_[level] == 0) continue;
      const std::uint64_t* summary = &summary_[level * summary_words_];
      std::uint64_t n = 0;
      for_each_word(summary, [&](std::size_t w) {
        n += static_cast<std::uint64_t>(std::popcount(word(level, w) & sender[w]));
        return false;
      });
      if (n == 0) continue;
      std::uint64_t k = rng.below(n);
      FragmentIndex found = 0;
      for_each_word(summary, [&](std::size_t w) {
        std::uint64_t bits = word(level, w) & sender[w];
        const auto c = static_cast<std::uint64_t>(std::popcount(bits));
        if (k >= c) {
          k -= c;
          return false;
        }
        for (; k > 0; --k) bits &= bits - 1;
        found = static_cast<FragmentIndex>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
        return true;
      });
      return found;
    }
    return std::nullopt;
  }

 private:
  static constexpr std::size_t kMaxAvailability = 0x7fff;
  static constexpr std::size_t kFewCandidates = 128;

  // Outer nullopt: too many candidates, use the bucket scan. Inner nullopt:
  // no candidate at all.
  std::optional<std::optional<FragmentIndex>> pick_few(std::span<const std::uint64_t> sender, Rng& rng) const {
    std::array<FragmentIndex, kFewCandidates> found;
    std::size_t count = 0;
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t bits = members_[w] & sender[w];
      while (bits) {
        if (count == kFewCandidates) return std::nullopt;
        found[count++] = static_cast<FragmentIndex>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
        bits &= bits - 1;
      }
    }
    if (count == 0) return std::optional<FragmentIndex>{};
    std::uint16_t lowest = std::numeric_limits<std::uint16_t>::max();
    std::uint64_t ties = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const auto a = static_cast<std::uint16_t>(state_[found[i]] >> 1);
      if (a < lowest) {
        lowest = a;
        ties = 0;
      }
      ties += a == lowest;
    }
    std::uint64_t k = rng.below(ties);
    for (std::size_t i = 0; i < count; ++i) {
      if ((state_[found[i]] >> 1) != lowest) continue;
      if (k-- == 0) return std::optional<FragmentIndex>{found[i]};
    }
    return std::optional<FragmentIndex>{};
  }

  // Level-major layout: pick() streams through one level at a time.
  std::uint64_t word(std::size_t level, std::size_t w) const noexcept { return bits_[level * words_ + w]; }

  template <class Fn>
  void for_each_word(const std::uint64_t* summary, Fn&& fn) const {
    for (std::size_t s = 0; s < summary_words_; ++s) {
      std::uint64_t live = summary[s];
      while (live) {
        const auto w = s * 64 + static_cast<std::size_t>(std::countr_zero(live));
        if (fn(w)) return;
        live &= live - 1;
      }
    }
  }

  void add_to(std::size_t level, FragmentIndex i) {
    const std::size_t w = i >> 6;
    bits_[level * words_ + w] |= std::uint64_t{1} << (i & 63);
    summary_[level * summary_words_ + (w >> 6)] |= std::uint64_t{1} << (w & 63);
    ++sizes_[level];
  }

  void remove_from(std::size_t level, FragmentIndex i) {
    const std::size_t w = i >> 6;
    auto& bucket_word = bits_[level * words_ + w];
    bucket_word &= ~(std::uint64_t{1} << (i & 63));
    if (bucket_word == 0) summary_[level * summary_words_ + (w >> 6)] &= ~(std::uint64_t{1} << (w & 63));
    --sizes_[level];
  }

  std::size_t levels_ = 0;
  std::size_t words_ = 0;
  std::size_t summary_words_ = 0;
  std::size_t size_ = 0;
  std::vector<std::uint16_t> state_;  // availability << 1 | member
  std::vector<std::uint64_t> members_;
  std::vector<std::size_t> sizes_;
  std::vector<std::uint64_t> bits_;
  std::vector<std::uint64_t> summary_;
};

}  // namespace tomo
