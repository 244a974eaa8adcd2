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

#include "idla/harmonic_field.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "idla/format.hpp"

namespace idla {

HarmonicPole make_pole(LatticePoint zeta) {
  if (zeta == LatticePoint{0, 0}) throw Error(ErrorCode::InvalidArgument, "pole at the origin");
  HarmonicPole pole;
  pole.zeta = zeta;
  pole.rho = norm(zeta);
  pole.sector = sector_map(zeta);
  pole.sector_zeta = pole.sector(zeta);
  pole.alpha2 = pole.sector_zeta.y / pole.rho;
  pole.alpha1 = (pole.sector_zeta.x - pole.sector_zeta.y) / pole.rho;
  return pole;
}

std::array<LatticePoint, 3> exceptional_points(const HarmonicPole& pole) {
  const Dihedral back = pole.sector.inverse();
  const LatticePoint s = pole.sector_zeta;
  return {back(s), back(s + LatticePoint{1, 0}), back(s + LatticePoint{1, 1})};
}

double f_zeta(LatticePoint zeta, std::complex<double> z) {
  const std::complex<double> c = to_complex(zeta);
  if (c == z) throw Error(ErrorCode::Pole, "F evaluated at its pole");
  return std::real((c / std::abs(c)) / (c - z));
}

double h_zeta(const HarmonicPole& pole, const KernelTable& table, LatticePoint z) {
  const LatticePoint w = pole.sector(z) - pole.sector_zeta;
  const double a1 = pole.alpha1, a2 = pole.alpha2;
  return (std::numbers::pi / 2.0) *
         (a1 * table(w - LatticePoint{1, 0}) + a2 * table(w - LatticePoint{1, 1}) - (a1 + a2) * table(w));
}

double h_zeta(const HarmonicPole& pole, const KernelTable& table, const GridPoint& z) {
  const double h0 = h_zeta(pole, table, z.base);
  if (z.is_vertex()) return h0;
  const double h1 = h_zeta(pole, table, z.base + step(z.dir));
  return h0 + z.frac * (h1 - h0);
}

double h_laplacian(const HarmonicPole& pole, const KernelTable& table, LatticePoint z) {
  double sum = 0.0;
  for (Direction d : kDirections) sum += h_zeta(pole, table, z + step(d));
  return sum - 4.0 * h_zeta(pole, table, z);
}

OmegaRegion build_omega(const HarmonicPole& pole, const KernelTable& table) {
  OmegaRegion r;
  r.pole_ = pole;
  r.level_ = 1.0 / (2.0 * pole.rho);
  r.h_pole_ = h_zeta(pole, table, pole.zeta);
  const double h0 = h_zeta(pole, table, LatticePoint{0, 0});
  if (!(h0 > r.level_)) {
    throw Error(ErrorCode::OriginOutside, "H(0) = " + format_double(h0) + " <= 1/(2 rho) at rho = " +
                                              format_double(pole.rho));
  }

  r.half_ = static_cast<std::int32_t>(std::ceil(2.0 * pole.rho)) + 16;
  const std::size_t side = std::size_t(2 * r.half_ + 1);
  r.cell_.assign(side * side, OmegaRegion::kOutside);
  std::vector<double> seen(side * side, std::numeric_limits<double>::quiet_NaN());

  auto h_at = [&](LatticePoint z) {
    double& slot = seen[r.cell(z)];
    if (std::isnan(slot)) slot = h_zeta(pole, table, z);
    return slot;
  };
  auto add_inside = [&](LatticePoint z, double h) {
    r.cell_[r.cell(z)] = static_cast<std::int32_t>(r.inside_.size());
    r.inside_.push_back(z);
    r.h_.push_back(h);
    r.marks_.push_back({0.0, 0.0, 0.0, 0.0});
    r.crossing_mask_.push_back(0);
    r.puncture_mask_.push_back(0);
  };

  add_inside({0, 0}, h0);
  for (std::size_t head = 0; head < r.inside_.size(); ++head) {
    const LatticePoint u = r.inside_[head];
    const double hu = r.h_[head];
    for (Direction d : kDirections) {
      const LatticePoint w = u + step(d);
      if (std::abs(w.x) >= r.half_ || std::abs(w.y) >= r.half_)
        throw Error(ErrorCode::CapacityExceeded, "Omega escaped its bounding box");
      const auto bit = static_cast<std::uint8_t>(1U << unsigned(d));
      if (w == pole.zeta) {
        r.marks_[head][std::size_t(d)] = 1.0;
        r.crossing_mask_[head] |= bit;
        r.puncture_mask_[head] |= bit;
        r.crossings_.push_back({u, d, 1.0, true});
        continue;
      }
      if (r.cell_[r.cell(w)] != OmegaRegion::kOutside) continue;
      const double hw = h_at(w);
      if (hw > r.level_) {
        add_inside(w, hw);
        continue;
      }
      // ties at exactly the level are outside (strict inequality)
      double frac = (hu - r.level_) / (hu - hw);
      if (!(frac > 0.0)) frac = std::numeric_limits<double>::min();
      if (frac > 1.0) frac = 1.0;
      r.marks_[head][std::size_t(d)] = frac;
      r.crossing_mask_[head] |= bit;
      r.crossings_.push_back({u, d, frac, false});
    }
  }
  r.neighbors_.resize(r.inside_.size());
  for (std::size_t i = 0; i < r.inside_.size(); ++i) {
    for (Direction d : kDirections) {
      const bool crossing = (r.crossing_mask_[i] >> unsigned(d)) & 1U;
      r.neighbors_[i][std::size_t(d)] = crossing ? OmegaRegion::kOutside : r.index_of(r.inside_[i] + step(d));
    }
  }
  return r;
}

double mean_value_sum(const HarmonicPole& pole, const KernelTable& table, double r) {
  if (!(r > 0.0) || r > pole.rho) throw Error(ErrorCode::InvalidArgument, "ball radius must be in (0, rho]");
  const double h0 = h_zeta(pole, table, LatticePoint{0, 0});
  double sum = 0.0;
  for_each_in_ball(r, [&](LatticePoint z) { sum += h_zeta(pole, table, z) - h0; });
  return sum;
}

double mean_value_sum(const OmegaRegion& region) {
  const double h0 = region.h_origin();
  double sum = 0.0;
  for (std::size_t i = 0; i < region.inside().size(); ++i) sum += region.h(std::int32_t(i)) - h0;
  return sum;
}

void OmegaRegion::dump(std::ostream& os) const {
  for (LatticePoint z : inside_) os << z.x << ' ' << z.y << '\n';
  for (const Crossing& c : crossings_)
    os << c.from.x << ' ' << c.from.y << ' ' << to_string(c.dir) << ' ' << format_double(c.frac) << '\n';
}

}  // namespace idla
