#pragma once

// Description-order labels. Two equivalent views exist and both are used:
//   ranks   : ranks[slot] = description rank of the triplet stored in that
//             input slot (kPadRank for padding slots). This is what the
//             sorter predicts and what supervision files store.
//   listing : listing[d] = input slot described at position d, i.e. the
//             inverse permutation. Reports and examples use this view.

#include <string>
#include <vector>

#include "kgtext/common.hpp"

namespace kgtext {

struct OrderLabel {
  static constexpr int kPadRank = -1;

  std::vector<int> ranks;

  int n_slots() const { return static_cast<int>(ranks.size()); }

  int n_real() const {
    int n = 0;
    for (int r : ranks)
      if (r != kPadRank) ++n;
    return n;
  }

  // True when the non-pad entries form a permutation of {0..n_real-1} and
  // all pad entries come after the real ones.
  bool valid() const {
    int n = n_real();
    std::vector<bool> seen(static_cast<size_t>(n), false);
    for (int i = 0; i < n_slots(); ++i) {
      int r = ranks[static_cast<size_t>(i)];
      if (i < n) {
        if (r < 0 || r >= n || seen[static_cast<size_t>(r)]) return false;
        seen[static_cast<size_t>(r)] = true;
      } else if (r != kPadRank) {
        return false;
      }
    }
    return true;
  }

  std::vector<int> listing() const {
    int n = n_real();
    std::vector<int> out(static_cast<size_t>(n), -1);
    for (int slot = 0; slot < n_slots(); ++slot) {
      int r = ranks[static_cast<size_t>(slot)];
      if (r != kPadRank) out[static_cast<size_t>(r)] = slot;
    }
    return out;
  }

  static OrderLabel identity(int n_real, int n_slots) {
    OrderLabel o;
    o.ranks.assign(static_cast<size_t>(n_slots), kPadRank);
    for (int i = 0; i < n_real; ++i) o.ranks[static_cast<size_t>(i)] = i;
    return o;
  }

  static OrderLabel from_listing(const std::vector<int>& listing, int n_slots) {
    OrderLabel o;
    o.ranks.assign(static_cast<size_t>(n_slots), kPadRank);
    for (size_t d = 0; d < listing.size(); ++d) {
      int slot = listing[d];
      if (slot < 0 || slot >= n_slots)
        throw DataError("order listing references slot " + std::to_string(slot));
      o.ranks[static_cast<size_t>(slot)] = static_cast<int>(d);
    }
    return o;
  }

  bool operator==(const OrderLabel& other) const { return ranks == other.ranks; }
};

}  // namespace kgtext
