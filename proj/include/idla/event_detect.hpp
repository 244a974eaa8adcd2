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
#include <span>
#include <vector>

#include "idla/idla_engine.hpp"
#include "idla/lattice.hpp"

namespace idla {

// Real-valued times follow A(t) = A(floor(t)); every threshold below is an
// explicit floor so boundary cases are reproducible.

struct JoinedSite {
  LatticePoint site;
  std::uint32_t join = 0;
  friend bool operator==(const JoinedSite&, const JoinedSite&) = default;
};

/// Sites z with join(z) <= N that are m-early: |z| >= m and
/// join(z) <= floor(pi (|z| - m)^2). Sorted by join index.
std::vector<JoinedSite> detect_early(const GrowthHistory& h, double m, std::uint64_t N);

/// Sites z in B_{sqrt(N/pi) - ell} with join(z) absent or > floor(pi (|z| + ell)^2).
/// Sorted row-major (y, then x).
std::vector<LatticePoint> detect_late(const GrowthHistory& h, double ell, std::uint64_t N);

/// Containment form of the two events, evaluated from the radius profile:
///   no early point  <=>  A(k) within B_{sqrt(k/pi) + m}            for all k <= N
///   no late point   <=>  B_{sqrt(t/pi) - ell} within A(floor(t))   for all real t <= N
struct ContainmentResult {
  bool outer_contained = true;
  bool inner_contained = true;
};
ContainmentResult containment_events(const GrowthHistory& h, double m, double ell, std::uint64_t N);

/// True iff the definition side and the containment side agree for both events.
bool event_complement_check(const GrowthHistory& h, double m, double ell, std::uint64_t N);

struct LatenessEntry {
  LatticePoint site;
  double lateness = 0.0;
};
/// L(z) = sqrt(join(z)/pi) - |z| for every joined site, in join order.
std::vector<LatenessEntry> lateness_field(const GrowthHistory& h);

/// Sites z of A(k) with |z| >= m whose ball B(z, m) holds at most b m^2 sites of A(k).
std::vector<LatticePoint> tentacle_scan(const GrowthHistory& h, std::uint64_t k, double b, int m);

/// Number of sites of A(k) in the open disk of radius m around z.
std::uint64_t ball_occupancy(const GrowthHistory& h, std::uint64_t k, LatticePoint z, int m);

// ---------------------------------------------------------------------------
// Square shells and cube towers.

struct ShellProfile {
  LatticePoint center;
  int m = 0;
  /// a[j] = #(A cap S_j), S_j = {x : max_i |x_i - center_i| = m - j}; outside in.
  std::vector<std::uint64_t> a;
};

ShellProfile shell_profile(const GrowthHistory& h, std::uint64_t k, LatticePoint center, int m);
ShellProfile shell_profile(std::span<const LatticePoint> sites, LatticePoint center, int m);

struct TowerDecomposition {
  std::vector<int> beta;   ///< block sizes beta_1..beta_k
  std::vector<int> alpha;  ///< alpha_0 = 0, alpha_i = beta_1 + ... + beta_i
  std::vector<std::uint64_t> b;  ///< b_j = beta_{gamma_j}^{d-1}, one per shell
  double c_prime = 0.5;
  int d = 2;
  /// The last block did not satisfy the window condition; it holds the rest.
  bool last_unconstrained = false;
};

/// Greedy construction: each beta_i is the smallest block with
///   c' (beta/2)^d <= a_{alpha_{i-1}} + ... + a_{alpha_{i-1} + beta - 1} <= c' beta^d.
/// When no block fits in the remaining shells, the remainder becomes the final
/// block. Requires all a_j >= 1 (NonpositiveShell otherwise).
TowerDecomposition tower_decompose(const ShellProfile& profile, double c_prime, int d = 2);

/// True when every block except the last satisfies the window condition.
bool tower_window_holds(const TowerDecomposition& t, std::span<const std::uint64_t> a);

/// E(beta) = sum_i i beta_i^d.
std::uint64_t tower_energy(std::span<const int> beta, int d = 2);
inline std::uint64_t tower_energy(const TowerDecomposition& t) { return tower_energy(t.beta, t.d); }

struct MinTower {
  std::uint64_t energy = 0;
  std::vector<int> beta;
};
inline constexpr int kMaxExhaustiveTower = 40;
/// Exact minimum of E over compositions of m + 1. Throws SizeLimit for m > 40.
MinTower min_tower_energy(int m, int d = 2);

}  // namespace idla
