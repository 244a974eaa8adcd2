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

#include "idla/idla_engine.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>

#include "idla/rng.hpp"

namespace idla {

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot IO assumes a little-endian host");

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error(ErrorCode::Format, "truncated snapshot");
  return v;
}

constexpr std::uint8_t kEmpty = 0;
constexpr std::uint8_t kOccupied = 1;
constexpr std::uint8_t kWall = 2;

}  // namespace

std::uint32_t growth_half_side(std::uint64_t n) {
  return static_cast<std::uint32_t>(std::ceil(2.0 * std::sqrt(double(n) / std::numbers::pi))) + 32;
}

GrowthHistory::GrowthHistory(std::uint64_t seed, std::uint32_t half_side, std::vector<std::uint32_t> join)
    : seed_(seed), half_(half_side), join_(std::move(join)) {
  const std::size_t s = side();
  if (join_.size() != s * s) throw Error(ErrorCode::Format, "join grid has the wrong size");
  rebuild_order();
}

void GrowthHistory::rebuild_order() {
  std::uint64_t n = 0;
  for (std::uint32_t j : join_) n += (j != 0);
  order_.assign(n, LatticePoint{0, 0});
  std::vector<bool> filled(n, false);
  for (std::size_t c = 0; c < join_.size(); ++c) {
    const std::uint32_t j = join_[c];
    if (j == 0) continue;
    if (j > n || filled[j - 1]) throw Error(ErrorCode::Format, "join indices are not a permutation of 1..n");
    filled[j - 1] = true;
    order_[j - 1] = point(c);
  }
  if (n == 0) return;
  if (order_[0] != LatticePoint{0, 0}) throw Error(ErrorCode::Format, "join index 1 is not the origin");
  for (std::uint64_t k = 1; k < n; ++k) {
    const LatticePoint z = order_[k];
    if (std::uint32_t(std::abs(z.x)) == half_ || std::uint32_t(std::abs(z.y)) == half_)
      throw Error(ErrorCode::Format, "occupied site on the box boundary");
    bool attached = false;
    for (Direction d : kDirections) {
      const std::uint32_t j = join_[cell(z + step(d))];
      attached |= (j != 0 && j <= k);
    }
    if (!attached) throw Error(ErrorCode::Format, "cluster prefix is not 4-connected");
  }
}

GrowthHistory GrowthHistory::from_order(std::span<const LatticePoint> order, std::uint64_t seed,
                                        std::uint32_t margin) {
  std::uint32_t half = 0;
  for (LatticePoint z : order)
    half = std::max({half, std::uint32_t(std::abs(z.x)), std::uint32_t(std::abs(z.y))});
  half += std::max<std::uint32_t>(margin, 1);
  const std::size_t side = 2 * std::size_t(half) + 1;
  std::vector<std::uint32_t> join(side * side, 0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const LatticePoint z = order[k];
    std::uint32_t& slot = join[std::size_t(z.y + std::int64_t(half)) * side + std::size_t(z.x + std::int64_t(half))];
    if (slot != 0) throw Error(ErrorCode::Format, "site listed twice in join order");
    slot = static_cast<std::uint32_t>(k + 1);
  }
  return GrowthHistory(seed, half, std::move(join));
}

GrowthHistory idla_grow(std::uint64_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "particle count must be positive");
  if (n >= std::uint64_t(UINT32_MAX)) throw Error(ErrorCode::InvalidArgument, "particle count too large");
  const std::uint32_t half = growth_half_side(n);
  const std::size_t side = 2 * std::size_t(half) + 1;

  std::vector<std::uint8_t> occ;
  std::vector<std::uint32_t> join;
  try {
    occ.assign(side * side, kEmpty);
    join.assign(side * side, 0);
  } catch (const std::bad_alloc&) {
    throw Error(ErrorCode::CapacityExceeded, "cannot allocate a " + std::to_string(side) + "^2 growth box");
  }
  for (std::size_t i = 0; i < side; ++i) {
    occ[i] = occ[(side - 1) * side + i] = kWall;
    occ[i * side] = occ[i * side + side - 1] = kWall;
  }

  const auto w = static_cast<std::ptrdiff_t>(side);
  const std::array<std::ptrdiff_t, 4> offset = {1, -1, w, -w};
  const std::size_t origin = std::size_t(half) * side + half;
  occ[origin] = kOccupied;
  join[origin] = 1;

  std::uint64_t steps = 0;
  for (std::uint64_t k = 2; k <= n; ++k) {
    RngStream rng(seed, k);
    std::size_t pos = origin;
    for (;;) {
      std::uint64_t bits = rng.next();
      int i = 0;
      for (; i < 32; ++i) {
        pos = std::size_t(std::ptrdiff_t(pos) + offset[bits & 3U]);
        bits >>= 2;
        if (occ[pos] != kOccupied) break;
      }
      steps += std::uint64_t(i < 32 ? i + 1 : 32);
      if (i < 32) break;
    }
    if (occ[pos] == kWall)
      throw Error(ErrorCode::CapacityExceeded, "cluster reached the growth box boundary at particle " +
                                                    std::to_string(k));
    occ[pos] = kOccupied;
    join[pos] = static_cast<std::uint32_t>(k);
  }

  GrowthHistory h;
  h.seed_ = seed;
  h.half_ = half;
  h.join_ = std::move(join);
  h.total_steps_ = steps;
  h.order_.resize(n);
  for (std::size_t c = 0; c < h.join_.size(); ++c)
    if (h.join_[c] != 0) h.order_[h.join_[c] - 1] = h.point(c);
  return h;
}

double inner_radius(const GrowthHistory& h, std::uint64_t k) {
  if (k == 0) return 0.0;
  if (k > h.size()) throw Error(ErrorCode::InvalidArgument, "k exceeds the particle count");
  std::int64_t best = -1;
  const auto grid = h.join_grid();
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const std::uint32_t j = grid[c];
    if (j != 0 && j <= k) continue;
    const std::int64_t d2 = norm2(h.point(c));
    if (best < 0 || d2 < best) best = d2;
  }
  return std::sqrt(double(best));
}

double outer_radius(const GrowthHistory& h, std::uint64_t k) {
  if (k > h.size()) throw Error(ErrorCode::InvalidArgument, "k exceeds the particle count");
  std::int64_t best = 0;
  for (std::uint64_t i = 0; i < k; ++i) best = std::max(best, norm2(h.order()[i]));
  return std::sqrt(double(best));
}

RadiusProfile radius_profile(const GrowthHistory& h) {
  const std::uint64_t n = h.size();
  RadiusProfile p;
  p.outer.assign(n + 1, 0.0);
  std::int64_t best = 0;
  for (std::uint64_t k = 1; k <= n; ++k) {
    best = std::max(best, norm2(h.order()[k - 1]));
    p.outer[k] = std::sqrt(double(best));
  }

  // Sites by distance; inner(k) is the distance of the first site whose
  // running-max join index exceeds k (never-joined sites count as n + 1).
  struct Site {
    std::int64_t d2;
    std::uint64_t join;
  };
  std::vector<Site> sites;
  sites.reserve(h.join_grid().size());
  for (std::size_t c = 0; c < h.join_grid().size(); ++c) {
    const std::uint32_t j = h.join_grid()[c];
    sites.push_back({norm2(h.point(c)), j == 0 ? n + 1 : j});
  }
  std::sort(sites.begin(), sites.end(), [](const Site& a, const Site& b) { return a.d2 < b.d2; });
  p.inner.assign(n + 1, 0.0);
  std::size_t i = 0;
  std::uint64_t running = sites.empty() ? n + 1 : sites[0].join;
  for (std::uint64_t k = 0; k <= n; ++k) {
    while (running <= k) {
      ++i;
      running = std::max(running, sites[i].join);
    }
    p.inner[k] = std::sqrt(double(sites[i].d2));
  }
  return p;
}

void write_snapshot(std::ostream& os, const GrowthHistory& h) {
  os.write("IDLA", 4);
  put<std::uint16_t>(os, kSnapshotVersion);
  put<std::uint64_t>(os, h.size());
  put<std::uint64_t>(os, h.seed());
  put<std::uint32_t>(os, h.half_side());
  const auto grid = h.join_grid();
  os.write(reinterpret_cast<const char*>(grid.data()), std::streamsize(grid.size() * sizeof(std::uint32_t)));
  if (!os) throw Error(ErrorCode::Io, "snapshot write failed");
}

GrowthHistory read_snapshot(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "IDLA", 4) != 0) throw Error(ErrorCode::Format, "bad snapshot magic");
  const auto version = get<std::uint16_t>(is);
  if (version != kSnapshotVersion)
    throw Error(ErrorCode::Format, "snapshot schema version " + std::to_string(version) + " is not supported");
  const auto n = get<std::uint64_t>(is);
  const auto seed = get<std::uint64_t>(is);
  const auto half = get<std::uint32_t>(is);
  if (half > (1U << 15)) throw Error(ErrorCode::Format, "snapshot box is implausibly large");
  const std::size_t side = 2 * std::size_t(half) + 1;
  std::vector<std::uint32_t> join(side * side);
  is.read(reinterpret_cast<char*>(join.data()), std::streamsize(join.size() * sizeof(std::uint32_t)));
  if (!is) throw Error(ErrorCode::Format, "truncated snapshot");
  GrowthHistory h(seed, half, std::move(join));
  if (h.size() != n) throw Error(ErrorCode::Format, "snapshot particle count does not match its grid");
  return h;
}

}  // namespace idla
