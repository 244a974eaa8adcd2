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

// Harmonic detector with a pole at a boundary point zeta.
//
// In sector coordinates (0 <= y <= x) write zeta/rho = a1 + a2 (1 + i). Then
//
//   H(z) = (pi/2) [a1 g(z - zeta - 1) + a2 g(z - zeta - 1 - i) - (a1 + a2) g(z - zeta)]
//
// is discrete harmonic away from zeta, zeta + 1 and zeta + 1 + i, and tracks the
// continuum field F(z) = Re((zeta/|zeta|) / (zeta - z)), whose 1/(2 rho) level
// set is the circle |z| = rho. Other zeta are handled by transporting z into
// the sector with the same dihedral map that moves zeta there.

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "idla/lattice.hpp"
#include "idla/potential_kernel.hpp"

namespace idla {

struct HarmonicPole {
  LatticePoint zeta;
  double rho = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  Dihedral sector;  ///< sector(zeta) lies in {0 <= y <= x}
  LatticePoint sector_zeta;
};

/// Throws InvalidArgument for zeta = 0.
HarmonicPole make_pole(LatticePoint zeta);

/// zeta, zeta + 1, zeta + 1 + i (sector coordinates), mapped back to the lattice.
std::array<LatticePoint, 3> exceptional_points(const HarmonicPole& pole);

/// A point of the grid G: a vertex, or the point at distance `frac` along the
/// edge from `base` in direction `dir`.
struct GridPoint {
  LatticePoint base;
  Direction dir = Direction::None;
  double frac = 0.0;

  static GridPoint vertex(LatticePoint z) { return {z, Direction::None, 0.0}; }
  bool is_vertex() const { return dir == Direction::None || frac == 0.0; }
  std::complex<double> position() const {
    const LatticePoint s = step(dir);
    return {base.x + frac * s.x, base.y + frac * s.y};
  }
};

/// Re((zeta/|zeta|) / (zeta - z)). Throws Pole at z = zeta.
double f_zeta(LatticePoint zeta, std::complex<double> z);

double h_zeta(const HarmonicPole& pole, const KernelTable& table, LatticePoint z);
/// Linear interpolation along the edge for non-vertex points.
double h_zeta(const HarmonicPole& pole, const KernelTable& table, const GridPoint& z);

/// Boundary point of Omega on the directed edge from an inside vertex.
struct Crossing {
  LatticePoint from;
  Direction dir = Direction::None;
  double frac = 1.0;      ///< in (0, 1]
  bool puncture = false;  ///< the edge ends at zeta itself

  GridPoint point() const { return {from, dir, frac}; }
};

/// Connected component of the origin in {z in G - {zeta} : H(z) > 1/(2 rho)}.
///
/// Lattice points are kept in a dense grid; each inside vertex carries its
/// H value and one mark per direction (0 for an edge leading to another inside
/// vertex, otherwise the crossing fraction).
class OmegaRegion {
 public:
  static constexpr std::int32_t kOutside = -1;

  const HarmonicPole& pole() const noexcept { return pole_; }
  LatticePoint puncture() const noexcept { return pole_.zeta; }
  double level() const noexcept { return level_; }
  double h_origin() const noexcept { return h_[0]; }
  double h_pole() const noexcept { return h_pole_; }

  /// Inside vertices in breadth-first order from the origin (origin first).
  std::span<const LatticePoint> inside() const noexcept { return inside_; }
  std::span<const Crossing> crossings() const noexcept { return crossings_; }

  std::int32_t index_of(LatticePoint z) const noexcept {
    if (std::abs(z.x) > half_ || std::abs(z.y) > half_) return kOutside;
    return cell_[cell(z)];
  }
  bool contains(LatticePoint z) const noexcept { return index_of(z) != kOutside; }

  double h(std::int32_t i) const noexcept { return h_[std::size_t(i)]; }
  /// 0 for an interior edge, else the crossing fraction.
  double mark(std::int32_t i, Direction d) const noexcept { return marks_[std::size_t(i)][std::size_t(d)]; }
  bool is_puncture_edge(std::int32_t i, Direction d) const noexcept {
    return (puncture_mask_[std::size_t(i)] >> unsigned(d)) & 1U;
  }
  std::uint8_t crossing_mask(std::int32_t i) const noexcept { return crossing_mask_[std::size_t(i)]; }
  /// Index of the inside vertex across edge d, or kOutside for a crossing edge.
  std::int32_t neighbor(std::int32_t i, Direction d) const noexcept {
    return neighbors_[std::size_t(i)][std::size_t(d)];
  }

  /// `x y` per inside vertex, then `x y dir frac` per crossing.
  void dump(std::ostream& os) const;

 private:
  friend OmegaRegion build_omega(const HarmonicPole&, const KernelTable&);
  std::size_t cell(LatticePoint z) const noexcept {
    return std::size_t(z.y + half_) * std::size_t(2 * half_ + 1) + std::size_t(z.x + half_);
  }

  HarmonicPole pole_;
  double level_ = 0.0;
  double h_pole_ = 0.0;
  std::int32_t half_ = 0;
  std::vector<std::int32_t> cell_;
  std::vector<LatticePoint> inside_;
  std::vector<double> h_;
  std::vector<std::array<double, 4>> marks_;
  std::vector<std::array<std::int32_t, 4>> neighbors_;
  std::vector<std::uint8_t> crossing_mask_;
  std::vector<std::uint8_t> puncture_mask_;
  std::vector<Crossing> crossings_;
};

/// Throws OriginOutside when H(0) <= 1/(2 rho).
OmegaRegion build_omega(const HarmonicPole& pole, const KernelTable& table);

/// Sum over z in B_r of (H(z) - H(0)). Requires 0 < r <= rho.
double mean_value_sum(const HarmonicPole& pole, const KernelTable& table, double r);
/// Sum over the lattice points of Omega of (H(z) - H(0)).
double mean_value_sum(const OmegaRegion& region);

/// Discrete Laplacian (four-neighbour sum minus four times the centre).
double h_laplacian(const HarmonicPole& pole, const KernelTable& table, LatticePoint z);

}  // namespace idla
