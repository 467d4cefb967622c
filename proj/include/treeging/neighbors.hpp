#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "treeging/data.hpp"

namespace treeging {

// Range search over a coordinate set: rows are grouped by distinct (s1, s2)
// location, locations are sorted by s1, and rows at a location by time.
class NeighborIndex {
 public:
  explicit NeighborIndex(std::span<const Coordinate> coords) : coords_(coords) {
    std::vector<std::size_t> order(coords.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto& p = coords[a];
      const auto& q = coords[b];
      if (p.s1 != q.s1) return p.s1 < q.s1;
      if (p.s2 != q.s2) return p.s2 < q.s2;
      return p.t.value_or(0.0) < q.t.value_or(0.0);
    });
    rows_ = std::move(order);
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      const auto& c = coords[rows_[k]];
      if (k == 0 || c.s1 != loc_s1_.back() || c.s2 != loc_s2_.back()) {
        loc_s1_.push_back(c.s1);
        loc_s2_.push_back(c.s2);
        loc_begin_.push_back(k);
      }
    }
    loc_begin_.push_back(rows_.size());
  }

  std::size_t n_locations() const noexcept { return loc_s1_.size(); }
  double location_s1(std::size_t l) const { return loc_s1_[l]; }
  double location_s2(std::size_t l) const { return loc_s2_[l]; }

  // Calls fn(row, h_spatial, h_temporal) for every indexed row within
  // spatial lag rs and, for timed coordinates, temporal lag rt of q.
  template <typename Fn>
  void query(const Coordinate& q, double rs, double rt, Fn&& fn) const {
    // windows are padded so rounding never drops a lag exactly at the radius
    const double ws = rs + 1e-9 * (std::abs(q.s1) + rs);
    auto lo = std::lower_bound(loc_s1_.begin(), loc_s1_.end(), q.s1 - ws);
    for (auto l = static_cast<std::size_t>(lo - loc_s1_.begin()); l < loc_s1_.size() && loc_s1_[l] <= q.s1 + ws;
         ++l) {
      const double hs = std::hypot(q.s1 - loc_s1_[l], q.s2 - loc_s2_[l]);
      if (hs > rs) continue;
      auto first = rows_.begin() + static_cast<std::ptrdiff_t>(loc_begin_[l]);
      auto last = rows_.begin() + static_cast<std::ptrdiff_t>(loc_begin_[l + 1]);
      if (q.t) {
        const double t = *q.t;
        const double wt = rt + 1e-9 * (std::abs(t) + rt);
        first = std::lower_bound(first, last, t - wt, [&](std::size_t r, double v) { return *coords_[r].t < v; });
        for (; first != last && *coords_[*first].t <= t + wt; ++first) {
          const double ht = std::abs(*coords_[*first].t - t);
          if (ht <= rt) fn(*first, hs, ht);
        }
      } else {
        for (; first != last; ++first) fn(*first, hs, 0.0);
      }
    }
  }

 private:
  std::span<const Coordinate> coords_;
  std::vector<std::size_t> rows_;
  std::vector<double> loc_s1_, loc_s2_;
  std::vector<std::size_t> loc_begin_;
};

}  // namespace treeging
