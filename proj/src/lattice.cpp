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

#include "idla/lattice.hpp"

#include <cmath>

namespace idla {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::Overflow: return "OVERFLOW";
    case ErrorCode::CapacityExceeded: return "CAPACITY_EXCEEDED";
    case ErrorCode::OriginOutside: return "ORIGIN_OUTSIDE";
    case ErrorCode::NonpositiveShell: return "NONPOSITIVE_SHELL";
    case ErrorCode::SizeLimit: return "SIZE_LIMIT";
    case ErrorCode::Pole: return "POLE";
    case ErrorCode::Domain: return "DOMAIN";
    case ErrorCode::Io: return "IO";
    case ErrorCode::Format: return "FORMAT";
  }
  return "UNKNOWN";
}

const char* to_string(Direction d) noexcept {
  switch (d) {
    case Direction::PlusX: return "+x";
    case Direction::MinusX: return "-x";
    case Direction::PlusY: return "+y";
    case Direction::MinusY: return "-y";
    case Direction::None: return "none";
  }
  return "none";
}

Direction direction_from_string(const std::string& s) {
  for (Direction d : kDirections)
    if (s == to_string(d)) return d;
  if (s == "none") return Direction::None;
  throw Error(ErrorCode::Format, "unknown direction '" + s + "'");
}

std::int64_t ball_count(double r) {
  std::int64_t count = 0;
  for_each_in_ball(r, [&](LatticePoint) { ++count; });
  return count;
}

void for_each_in_ball(double r, const std::function<void(LatticePoint)>& fn) {
  if (!(r > 0.0)) return;
  const double r2 = r * r;
  const auto ymax = static_cast<std::int32_t>(std::ceil(r));
  for (std::int32_t y = -ymax; y <= ymax; ++y) {
    const double rest = r2 - double(y) * double(y);
    if (rest <= 0.0) continue;
    auto xmax = static_cast<std::int32_t>(std::ceil(std::sqrt(rest)));
    // sqrt rounding: settle the bound with the exact strict comparison
    while (xmax >= 0 && double(xmax) * xmax + double(y) * y >= r2) --xmax;
    while (double(xmax + 1) * (xmax + 1) + double(y) * y < r2) ++xmax;
    for (std::int32_t x = -xmax; x <= xmax; ++x) fn({x, y});
  }
}

Dihedral Dihedral::from_index(int index) {
  if (index < 0 || index >= 8) throw Error(ErrorCode::InvalidArgument, "dihedral index out of range");
  const bool swap = (index & 4) != 0;
  const int sx = (index & 1) ? -1 : 1;
  const int sy = (index & 2) ? -1 : 1;
  return swap ? Dihedral(0, sx, sy, 0) : Dihedral(sx, 0, 0, sy);
}

const std::array<Dihedral, 8>& Dihedral::all() {
  static const std::array<Dihedral, 8> maps = [] {
    std::array<Dihedral, 8> m{};
    for (int i = 0; i < 8; ++i) m[i] = from_index(i);
    return m;
  }();
  return maps;
}

Direction Dihedral::operator()(Direction d) const {
  if (d == Direction::None) return d;
  const LatticePoint v = (*this)(step(d));
  for (Direction e : kDirections)
    if (step(e) == v) return e;
  return Direction::None;
}

Dihedral sector_map(LatticePoint z) {
  const int ax = std::abs(z.x), ay = std::abs(z.y);
  if (ax >= ay) return Dihedral::from_index((z.x < 0 ? 1 : 0) | (z.y < 0 ? 2 : 0));
  // after the swap the first coordinate is y, the second is x
  return Dihedral::from_index(4 | (z.y < 0 ? 1 : 0) | (z.x < 0 ? 2 : 0));
}

}  // namespace idla
