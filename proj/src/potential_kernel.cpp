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

#include "idla/potential_kernel.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace idla {

namespace {

// RAII wrapper for a single mpfr_t.
class Mpfr {
 public:
  explicit Mpfr(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
  ~Mpfr() { mpfr_clear(v_); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

mpfr_prec_t precision_for(std::size_t bits) { return static_cast<mpfr_prec_t>(bits + 128); }

}  // namespace

double KernelValue::to_double() const {
  // p + q/pi = (p_num q_den + q_num p_den / pi) / (p_den q_den)
  const mpz_class a = p.get_num() * q.get_den();
  const mpz_class b = q.get_num() * p.get_den();
  const mpz_class den = p.get_den() * q.get_den();
  const std::size_t bits = std::max({mpz_sizeinbase(a.get_mpz_t(), 2), mpz_sizeinbase(b.get_mpz_t(), 2),
                                     mpz_sizeinbase(den.get_mpz_t(), 2)});
  const mpfr_prec_t prec = precision_for(bits);
  Mpfr pi(prec), t(prec);
  mpfr_const_pi(pi.get(), MPFR_RNDN);
  mpfr_set_z(t.get(), b.get_mpz_t(), MPFR_RNDN);
  mpfr_div(t.get(), t.get(), pi.get(), MPFR_RNDN);
  mpfr_add_z(t.get(), t.get(), a.get_mpz_t(), MPFR_RNDN);
  mpfr_div_z(t.get(), t.get(), den.get_mpz_t(), MPFR_RNDN);
  return mpfr_get_d(t.get(), MPFR_RNDN);
}

KernelValue KernelTable::exact(LatticePoint z) const {
  const LatticePoint c = canonical(z);
  if (c.x > radius_) throw Error(ErrorCode::InvalidArgument, "point outside the exact kernel table");
  const std::size_t i = index(c);
  KernelValue v{mpq_class(p_[i]), mpq_class(q_num_[i], denominator_)};
  v.q.canonicalize();
  return v;
}

double KernelTable::asymptotic(LatticePoint z) const noexcept {
  return (2.0 / std::numbers::pi) * std::log(norm(z)) + lambda_hat_;
}

KernelValue KernelTable::laplacian_exact(LatticePoint z) const {
  const LatticePoint c = canonical(z);
  if (c.x >= radius_) throw Error(ErrorCode::InvalidArgument, "laplacian needs all four neighbours tabulated");
  mpz_class sp = 0, sq = 0;
  for (Direction d : kDirections) {
    const std::size_t j = index(canonical(c + step(d)));
    sp += p_[j];
    sq += q_num_[j];
  }
  const std::size_t i = index(c);
  sp -= 4 * p_[i];
  sq -= 4 * q_num_[i];
  KernelValue v{mpq_class(sp, 4), mpq_class(sq, 4 * denominator_)};
  v.p.canonicalize();
  v.q.canonicalize();
  return v;
}

void KernelTable::dump(std::ostream& os) const {
  for (int x = 0; x <= radius_; ++x) {
    for (int y = 0; y <= x; ++y) {
      const KernelValue v = exact({x, y});
      os << x << ' ' << y << ' ' << v.p.get_num() << ' ' << v.p.get_den() << ' ' << v.q.get_num() << ' '
         << v.q.get_den() << '\n';
    }
  }
}

KernelTable build_kernel_table(int radius) {
  if (radius < 2) throw Error(ErrorCode::InvalidArgument, "kernel table radius must be >= 2");
  // Coordinates and index arithmetic stay comfortably inside 32 bits.
  if (radius > 20000) throw Error(ErrorCode::Overflow, "kernel table radius too large");

  KernelTable t;
  t.radius_ = radius;
  const std::size_t count = KernelTable::index({radius, radius}) + 1;
  t.p_.assign(count, 0);
  t.q_num_.assign(count, 0);

  mpz_class& den = t.denominator_;
  den = 1;
  for (int k = 1; k <= radius; ++k) mpz_lcm_ui(den.get_mpz_t(), den.get_mpz_t(), 2UL * k - 1);

  auto at = [&](LatticePoint z) -> std::size_t { return KernelTable::index(canonical(z)); };

  // Diagonal seed: g(n,n) = (4/pi) sum_{k=1}^n 1/(2k-1).
  {
    mpz_class q = 0;
    for (int n = 1; n <= radius; ++n) {
      q += 4 * (den / (2 * n - 1));
      t.q_num_[at({n, n})] = q;
    }
  }
  t.p_[at({1, 0})] = 1;

  // Ring n from harmonicity at (n-1, y): the unknown is the neighbour (n, y),
  // which appears twice when y = n-1 (reflection across the diagonal).
  mpz_class sp, sq;
  for (int n = 2; n <= radius; ++n) {
    for (int y = 0; y < n; ++y) {
      const LatticePoint centre{n - 1, y};
      const LatticePoint target{n, y};
      sp = 4 * t.p_[at(centre)];
      sq = 4 * t.q_num_[at(centre)];
      int hits = 0;
      for (Direction d : kDirections) {
        const LatticePoint c = canonical(centre + step(d));
        if (c == target) {
          ++hits;
          continue;
        }
        sp -= t.p_[at(c)];
        sq -= t.q_num_[at(c)];
      }
      if (hits == 2) {
        if (!mpz_divisible_ui_p(sp.get_mpz_t(), 2) || !mpz_divisible_ui_p(sq.get_mpz_t(), 2))
          throw Error(ErrorCode::Overflow, "non-integral value in kernel sweep");
        mpz_divexact_ui(sp.get_mpz_t(), sp.get_mpz_t(), 2);
        mpz_divexact_ui(sq.get_mpz_t(), sq.get_mpz_t(), 2);
      }
      t.p_[at(target)] = sp;
      t.q_num_[at(target)] = sq;
    }
  }

  std::size_t bits = mpz_sizeinbase(den.get_mpz_t(), 2);
  for (std::size_t i = 0; i < count; ++i) {
    bits = std::max({bits, mpz_sizeinbase(t.p_[i].get_mpz_t(), 2), mpz_sizeinbase(t.q_num_[i].get_mpz_t(), 2)});
  }
  t.max_bits_ = bits;

  // Conversion: reuse one MPFR context sized for the whole table.
  const mpfr_prec_t prec = precision_for(bits);
  t.values_.resize(count);
  {
    Mpfr pi_den(prec), v(prec);
    mpfr_const_pi(pi_den.get(), MPFR_RNDN);
    mpfr_mul_z(pi_den.get(), pi_den.get(), den.get_mpz_t(), MPFR_RNDN);
    for (std::size_t i = 0; i < count; ++i) {
      mpfr_set_z(v.get(), t.q_num_[i].get_mpz_t(), MPFR_RNDN);
      mpfr_div(v.get(), v.get(), pi_den.get(), MPFR_RNDN);
      mpfr_add_z(v.get(), v.get(), t.p_[i].get_mpz_t(), MPFR_RNDN);
      t.values_[i] = mpfr_get_d(v.get(), MPFR_RNDN);
    }
  }

  const double r = radius;
  t.lambda_hat_ = fit_lambda_ring([&](LatticePoint z) { return t.values_[at(z)]; }, r / 2.0, r).lambda;
  return t;
}

double kernel_eval(const KernelTable& table, LatticePoint z) { return table(z); }

LambdaFit fit_lambda_ring(const std::function<double(LatticePoint)>& g, double r_lo, double r_hi) {
  if (!(r_lo > 0.0) || !(r_hi >= r_lo)) throw Error(ErrorCode::InvalidArgument, "bad fitting ring");
  const auto bound = static_cast<std::int32_t>(std::floor(r_hi));
  const double lo2 = r_lo * r_lo, hi2 = r_hi * r_hi;
  // Welford accumulation in a fixed traversal order.
  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  for (std::int32_t y = -bound; y <= bound; ++y) {
    for (std::int32_t x = -bound; x <= bound; ++x) {
      const LatticePoint z{x, y};
      const auto d2 = static_cast<double>(norm2(z));
      if (d2 < lo2 || d2 > hi2) continue;
      const double sample = g(z) - (1.0 / std::numbers::pi) * std::log(d2);
      ++n;
      const double delta = sample - mean;
      mean += delta / double(n);
      m2 += delta * (sample - mean);
    }
  }
  LambdaFit fit;
  fit.lambda = mean;
  fit.samples = n;
  fit.spread = n > 1 ? std::sqrt(m2 / double(n - 1)) : 0.0;
  return fit;
}

LambdaFit fit_lambda(const KernelTable& table) {
  if (table.radius_exact() < 32) throw Error(ErrorCode::InvalidArgument, "fit_lambda needs R0 >= 32");
  const double r = table.radius_exact();
  return fit_lambda_ring([&](LatticePoint z) { return table(z); }, r / 2.0, r);
}

}  // namespace idla
