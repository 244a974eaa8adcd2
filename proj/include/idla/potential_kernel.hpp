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

// Potential kernel of simple random walk on Z^2:
//
//     g(z) = sum_n (P_n(0) - P_n(z)),   Delta g = delta_0,
//     g(z) = (2/pi) log|z| + lambda + O(|z|^-2).
//
// Values near the origin are exact numbers p + q/pi with p, q rational. They
// are generated from the diagonal g(n,n) = (4/pi) sum_{k<=n} 1/(2k-1) by solving
// the harmonicity identity ring by ring. The recursion cancels catastrophically
// in floating point, so the sweep runs in exact integer arithmetic over a common
// denominator and the final conversion to double uses MPFR at a precision sized
// to the largest integer in the table.

#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "idla/lattice.hpp"

namespace idla {

/// An exact value p + q/pi.
struct KernelValue {
  mpq_class p;
  mpq_class q;

  double to_double() const;
  friend bool operator==(const KernelValue& a, const KernelValue& b) { return a.p == b.p && a.q == b.q; }
};

struct LambdaFit {
  double lambda = 0.0;
  double spread = 0.0;  ///< sample standard deviation of g(z) - (2/pi) ln|z|
  std::size_t samples = 0;
};

class KernelTable {
 public:
  /// Crossover radius R0: points with max(|x|,|y|) <= R0 are exact.
  int radius_exact() const noexcept { return radius_; }
  double lambda_hat() const noexcept { return lambda_hat_; }

  bool is_tabulated(LatticePoint z) const noexcept {
    const LatticePoint c = canonical(z);
    return c.x <= radius_;
  }

  /// Exact tabulated value; throws InvalidArgument outside the table.
  KernelValue exact(LatticePoint z) const;

  /// g(z) in double precision: tabulated value inside, asymptotic branch outside.
  double operator()(LatticePoint z) const noexcept {
    const LatticePoint c = canonical(z);
    if (c.x <= radius_) return values_[index(c)];
    return asymptotic(z);
  }
  double asymptotic(LatticePoint z) const noexcept;

  /// Four-neighbour average minus centre, exactly, for z with max(|x|,|y|) < R0.
  KernelValue laplacian_exact(LatticePoint z) const;

  /// One line per canonical point: `x y p_num p_den q_num q_den`.
  void dump(std::ostream& os) const;

  /// Bit-size of the largest numerator; documents the cost curve of the sweep.
  std::size_t max_integer_bits() const noexcept { return max_bits_; }

 private:
  friend KernelTable build_kernel_table(int radius);
  static std::size_t index(LatticePoint c) noexcept {
    return std::size_t(c.x) * (std::size_t(c.x) + 1) / 2 + std::size_t(c.y);
  }

  int radius_ = 0;
  // value = p[i] + q_num[i] / (denominator * pi); p is always an integer.
  std::vector<mpz_class> p_;
  std::vector<mpz_class> q_num_;
  mpz_class denominator_;
  std::vector<double> values_;
  double lambda_hat_ = 0.0;
  std::size_t max_bits_ = 0;
};

/// Exact table for max(|x|,|y|) <= radius. Requires radius >= 2.
KernelTable build_kernel_table(int radius);

double kernel_eval(const KernelTable& table, LatticePoint z);

/// Mean and spread of g(z) - (2/pi) ln|z| over all lattice z with r_lo <= |z| <= r_hi.
LambdaFit fit_lambda_ring(const std::function<double(LatticePoint)>& g, double r_lo, double r_hi);

/// fit_lambda_ring over [R0/2, R0]. Requires R0 >= 32.
LambdaFit fit_lambda(const KernelTable& table);

}  // namespace idla
