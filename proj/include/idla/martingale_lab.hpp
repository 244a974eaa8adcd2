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

// Stopped IDLA inside Omega_zeta and the martingale
//
//     M(k) = sum over stopped particles of (H(exit point) - H(0)),
//
// with S(k) = sum of squared increments of H along every walk step.
//
// Grid Brownian motion is simulated through its embedded chain: from a vertex
// whose four edges end at distances d_1..d_4 (d = 1 at a neighbouring vertex,
// d < 1 at a mark on the edge), the first point hit is i with probability
// proportional to 1/d_i.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "idla/harmonic_field.hpp"
#include "idla/rng.hpp"

namespace idla {

struct EdgeMark {
  double dist = 1.0;       ///< in (0, 1]
  bool absorbing = false;  ///< the walk stops on reaching this point
};

struct SplitOutcome {
  int edge = 0;  ///< index in Direction order
  bool absorbed = false;
};

std::array<double, 4> split_probabilities(const std::array<EdgeMark, 4>& marks);
SplitOutcome split_step(const std::array<EdgeMark, 4>& marks, RngStream& rng);
/// Plain distances; a mark is absorbing iff d < 1.
SplitOutcome split_step(const std::array<double, 4>& dist, RngStream& rng);

enum class ExitKind : std::uint8_t { Settled = 0, Frozen = 1, Pole = 2 };
const char* to_string(ExitKind kind) noexcept;

struct ParticleRecord {
  ExitKind kind = ExitKind::Settled;
  GridPoint exit;
  double delta_m = 0.0;
  double delta_s = 0.0;
  std::uint64_t steps = 0;
  /// Extremes of H - H(0) over every point the particle visited.
  double excursion_min = 0.0;
  double excursion_max = 0.0;
};

/// Stopped cluster A_zeta(t): settled lattice sites plus a multiset of frozen
/// boundary points. Keeps a shared reference to its region.
class StoppedCluster {
 public:
  explicit StoppedCluster(std::shared_ptr<const OmegaRegion> omega);

  const OmegaRegion& omega() const noexcept { return *omega_; }
  const HarmonicPole& pole() const noexcept { return omega_->pole(); }

  bool occupied(std::int32_t i) const noexcept { return occupied_[std::size_t(i)] != 0; }
  std::span<const std::uint8_t> occupied_flags() const noexcept { return occupied_; }
  std::vector<LatticePoint> occupied_sites() const;
  /// Multiplicity per entry of omega().crossings(); puncture entries stay 0.
  std::span<const std::uint64_t> frozen_counts() const noexcept { return frozen_; }

  std::uint64_t settled() const noexcept { return settled_; }
  std::uint64_t frozen() const noexcept { return frozen_total_; }
  std::uint64_t absorbed_at_pole() const noexcept { return pole_hits_; }
  std::uint64_t launched() const noexcept { return launched_; }

  /// Min and max of H - H(0) over the possible exit points of the next
  /// particle: free vertices of Omega next to the settled set (or the origin
  /// while it is free), crossings leaving the settled set, and the puncture.
  std::array<double, 2> boundary_extremes() const;

 private:
  friend ParticleRecord run_stopped_particle(StoppedCluster& cluster, RngStream& rng);
  std::int32_t crossing_id(std::int32_t i, Direction d) const noexcept {
    return crossing_id_[std::size_t(i) * 4 + std::size_t(d)];
  }

  std::shared_ptr<const OmegaRegion> omega_;
  std::vector<std::uint8_t> occupied_;
  std::vector<std::int32_t> crossing_id_;
  std::vector<std::uint64_t> frozen_;
  std::uint64_t settled_ = 0;
  std::uint64_t frozen_total_ = 0;
  std::uint64_t pole_hits_ = 0;
  std::uint64_t launched_ = 0;
};

/// Walks one particle from the origin and records where it stops. Frozen
/// exits take H exactly equal to the level 1/(2 rho).
ParticleRecord run_stopped_particle(StoppedCluster& cluster, RngStream& rng);

struct MartingaleTrace {
  HarmonicPole pole;
  double level = 0.0;
  double h_origin = 0.0;
  std::vector<ParticleRecord> records;
  std::vector<double> m;  ///< m[k], k = 0..n
  std::vector<double> s;  ///< s[k], k = 0..n
  std::uint64_t settled = 0;
  std::uint64_t frozen = 0;
  std::uint64_t pole_hits = 0;
};

/// n particles; particle k draws from RngStream(seed, k).
MartingaleTrace martingale_trace(std::shared_ptr<const OmegaRegion> omega, std::uint64_t n, std::uint64_t seed);
MartingaleTrace martingale_trace(LatticePoint zeta, std::uint64_t n, std::uint64_t seed, const KernelTable& table);

struct EnsembleCheckpoint {
  std::uint64_t t = 0;
  double mean_m = 0.0;
  double se_m = 0.0;  ///< standard error of the mean
  double mean_s = 0.0;
};

struct MartingaleEnsemble {
  std::vector<EnsembleCheckpoint> checkpoints;
  /// max |delta_M - (1/(2 rho) - H(0))| over frozen particles of all traces
  double max_frozen_error = 0.0;
  bool conserved = true;
  std::uint64_t settled = 0;
  std::uint64_t frozen = 0;
  std::uint64_t pole_hits = 0;
};

/// `seeds` independent traces of n particles; trace i uses derive_seed(master, i).
/// Checkpoints must lie in [0, n].
MartingaleEnsemble martingale_ensemble(const std::shared_ptr<const OmegaRegion>& omega, std::uint64_t n,
                                       std::span<const std::uint64_t> checkpoints, std::uint64_t seeds,
                                       std::uint64_t master, unsigned threads = 0);

/// Columns k,exit_kind,x,y,frac,delta_M,delta_S,M,S,dir (x, y, dir name the edge base).
void write_trace_csv(std::ostream& os, const MartingaleTrace& trace);

// ---------------------------------------------------------------------------
// Exit times of the diffusion with generator d^2/dx^2 from [-a, b].

/// E_0 exp(lambda tau) = cos(sqrt(lambda) x0) / cos(sqrt(lambda) c),
/// c = (a + b)/2, x0 = (a - b)/2. Throws Pole if sqrt(lambda) c >= pi/2.
double exit_mgf_exact(double a, double b, double lambda);

/// 1 + 10 lambda a b. Needs 0 < a <= b; throws Domain if sqrt(lambda)(a + b) > 3.
double exit_mgf_bound(double a, double b, double lambda);

/// exp(-k^2 s / 2), the tail bound for sup_{[0,s]} B >= k s.
double bm_sup_tail(double k, double s);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

/// Simple random walk with step h = min(a, b)/25 and time step h^2/2.
McEstimate mc_exit_mgf(double a, double b, double lambda, std::uint64_t paths, std::uint64_t seed,
                       unsigned threads = 0);

/// Fraction of +-1 walks of `steps` steps, scaled to standard Brownian motion
/// on [0, s], whose running maximum reaches k s.
McEstimate mc_sup_tail(double k, double s, std::uint64_t paths, std::uint64_t steps, std::uint64_t seed,
                       unsigned threads = 0);

}  // namespace idla
