// Copyright 2026 The idla-lab Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "idla/lattice.hpp"

namespace idla {

/// Join index of every site of a completed growth run. Site z joined as the
/// k-th particle has join(z) = k; the set {join <= k} is the cluster A(k).
///
/// Storage is a dense square [-half_side, half_side]^2, row-major with y
/// outermost. The outermost ring of the box is never occupied.
class GrowthHistory {
 public:
  GrowthHistory() = default;
  /// Validates the invariants (indices 1..n each used once, origin first,
  /// every prefix 4-connected). Throws Format on violation.
  GrowthHistory(std::uint64_t seed, std::uint32_t half_side, std::vector<std::uint32_t> join);

  /// Synthetic history from an explicit join order (order[k-1] joins k-th).
  static GrowthHistory from_order(std::span<const LatticePoint> order, std::uint64_t seed = 0,
                                  std::uint32_t margin = 8);

  std::uint64_t size() const noexcept { return order_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint32_t half_side() const noexcept { return half_; }
  std::uint32_t side() const noexcept { return 2 * half_ + 1; }

  bool in_box(LatticePoint z) const noexcept {
    return std::uint32_t(std::abs(z.x)) <= half_ && std::uint32_t(std::abs(z.y)) <= half_;
  }
  /// 0 when z never joined (or lies outside the box).
  std::uint32_t join(LatticePoint z) const noexcept { return in_box(z) ? join_[cell(z)] : 0; }
  std::span<const std::uint32_t> join_grid() const noexcept { return join_; }

  /// order()[k-1] is the site with join index k.
  std::span<const LatticePoint> order() const noexcept { return order_; }

  /// Random-walk steps spent growing the cluster (0 for loaded histories).
  std::uint64_t total_steps() const noexcept { return total_steps_; }

  std::size_t cell(LatticePoint z) const noexcept {
    return std::size_t(z.y + std::int64_t(half_)) * side() + std::size_t(z.x + std::int64_t(half_));
  }
  LatticePoint point(std::size_t cell) const noexcept {
    return {std::int32_t(cell % side()) - std::int32_t(half_), std::int32_t(cell / side()) - std::int32_t(half_)};
  }

 private:
  friend GrowthHistory idla_grow(std::uint64_t n, std::uint64_t seed);
  void rebuild_order();

  std::uint64_t seed_ = 0;
  std::uint32_t half_ = 0;
  std::vector<std::uint32_t> join_;
  std::vector<LatticePoint> order_;
  std::uint64_t total_steps_ = 0;
};

/// Box half-side used for an n-particle run: ceil(2 sqrt(n/pi)) + 32.
std::uint32_t growth_half_side(std::uint64_t n);

/// Internal DLA with n particles. Particle k walks with RngStream(seed, k).
/// Throws CapacityExceeded if the cluster reaches the box boundary.
GrowthHistory idla_grow(std::uint64_t n, std::uint64_t seed);

/// min{|z| : z not in A(k)}; 0 for k = 0.
double inner_radius(const GrowthHistory& h, std::uint64_t k);
/// max{|z| : z in A(k)}; 0 for k <= 1.
double outer_radius(const GrowthHistory& h, std::uint64_t k);

/// inner_radius and outer_radius for every k in [0, n].
struct RadiusProfile {
  std::vector<double> inner;
  std::vector<double> outer;
};
RadiusProfile radius_profile(const GrowthHistory& h);

/// Binary snapshot (little-endian): "IDLA", u16 version = 1, u64 n, u64 seed,
/// u32 half-side, then (2 half + 1)^2 u32 join indices, row-major, y outermost.
void write_snapshot(std::ostream& os, const GrowthHistory& h);
GrowthHistory read_snapshot(std::istream& is);

inline constexpr std::uint16_t kSnapshotVersion = 1;

}  // namespace idla
