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

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace idla {

/// Error categories surfaced by the library. Every throw site uses Error so
/// callers (and the CLI) can map failures to exit codes without string matching.
enum class ErrorCode {
  InvalidArgument,
  Overflow,
  CapacityExceeded,
  OriginOutside,
  NonpositiveShell,
  SizeLimit,
  Pole,
  Domain,
  Io,
  Format,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// A point of Z^2, identified with x + iy.
struct LatticePoint {
  std::int32_t x = 0;
  std::int32_t y = 0;

  friend constexpr bool operator==(LatticePoint, LatticePoint) = default;
  friend constexpr auto operator<=>(LatticePoint, LatticePoint) = default;
  friend constexpr LatticePoint operator+(LatticePoint a, LatticePoint b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr LatticePoint operator-(LatticePoint a, LatticePoint b) { return {a.x - b.x, a.y - b.y}; }
};

constexpr std::int64_t norm2(LatticePoint z) {
  return std::int64_t{z.x} * z.x + std::int64_t{z.y} * z.y;
}
inline double norm(LatticePoint z) { return std::sqrt(static_cast<double>(norm2(z))); }
inline std::complex<double> to_complex(LatticePoint z) { return {double(z.x), double(z.y)}; }

/// Membership in B_r = {x^2 + y^2 < r^2}. The comparison is strict.
inline bool in_ball(LatticePoint z, double r) {
  return r > 0.0 && static_cast<double>(norm2(z)) < r * r;
}

/// Number of lattice points of B_r, counted row by row from integer bounds.
std::int64_t ball_count(double r);

/// Calls fn(z) for each z in B_r, rows in increasing y, then increasing x.
void for_each_in_ball(double r, const std::function<void(LatticePoint)>& fn);

/// Unit steps. Index order (+x, -x, +y, -y) is used for edge marks everywhere.
enum class Direction : std::uint8_t { PlusX = 0, MinusX = 1, PlusY = 2, MinusY = 3, None = 4 };

inline constexpr std::array<Direction, 4> kDirections = {Direction::PlusX, Direction::MinusX,
                                                          Direction::PlusY, Direction::MinusY};

constexpr LatticePoint step(Direction d) {
  switch (d) {
    case Direction::PlusX: return {1, 0};
    case Direction::MinusX: return {-1, 0};
    case Direction::PlusY: return {0, 1};
    case Direction::MinusY: return {0, -1};
    case Direction::None: break;
  }
  return {0, 0};
}
constexpr Direction opposite(Direction d) {
  switch (d) {
    case Direction::PlusX: return Direction::MinusX;
    case Direction::MinusX: return Direction::PlusX;
    case Direction::PlusY: return Direction::MinusY;
    case Direction::MinusY: return Direction::PlusY;
    case Direction::None: break;
  }
  return Direction::None;
}
const char* to_string(Direction d) noexcept;
Direction direction_from_string(const std::string& s);

/// One of the 8 symmetries of Z^2 fixing the origin, stored as an integer
/// orthogonal matrix [[a b][c d]].
class Dihedral {
 public:
  constexpr Dihedral() = default;

  /// index in [0, 8): bit 2 swaps coordinates, bit 0 negates x, bit 1 negates y
  /// (negations applied after the swap).
  static Dihedral from_index(int index);
  static const std::array<Dihedral, 8>& all();

  constexpr LatticePoint operator()(LatticePoint z) const { return {a_ * z.x + b_ * z.y, c_ * z.x + d_ * z.y}; }
  std::complex<double> operator()(std::complex<double> z) const {
    return {a_ * z.real() + b_ * z.imag(), c_ * z.real() + d_ * z.imag()};
  }
  Direction operator()(Direction d) const;
  constexpr Dihedral inverse() const { return Dihedral(a_, c_, b_, d_); }
  friend constexpr bool operator==(const Dihedral&, const Dihedral&) = default;

 private:
  constexpr Dihedral(int a, int b, int c, int d) : a_(a), b_(b), c_(c), d_(d) {}
  int a_ = 1, b_ = 0, c_ = 0, d_ = 1;
};

/// A map phi with phi(z) in the sector {0 <= y <= x}. Deterministic choice.
Dihedral sector_map(LatticePoint z);

/// The canonical representative (max(|x|,|y|), min(|x|,|y|)).
constexpr LatticePoint canonical(LatticePoint z) {
  const std::int32_t ax = z.x < 0 ? -z.x : z.x;
  const std::int32_t ay = z.y < 0 ? -z.y : z.y;
  return ax >= ay ? LatticePoint{ax, ay} : LatticePoint{ay, ax};
}

struct LatticePointHash {
  std::size_t operator()(LatticePoint z) const noexcept {
    const std::uint64_t k = (std::uint64_t(std::uint32_t(z.x)) << 32) | std::uint32_t(z.y);
    return std::hash<std::uint64_t>{}(k * 0x9e3779b97f4a7c15ULL);
  }
};

}  // namespace idla
