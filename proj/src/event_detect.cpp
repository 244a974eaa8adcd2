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

#include "idla/event_detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace idla {

namespace {

void check_time(const GrowthHistory& h, std::uint64_t N) {
  if (N > h.size()) throw Error(ErrorCode::InvalidArgument, "N exceeds the particle count");
}

double ipow(double x, int d) {
  double r = 1.0;
  for (int i = 0; i < d; ++i) r *= x;
  return r;
}

}  // namespace

std::vector<JoinedSite> detect_early(const GrowthHistory& h, double m, std::uint64_t N) {
  check_time(h, N);
  std::vector<JoinedSite> out;
  for (std::uint64_t k = 1; k <= N; ++k) {
    const LatticePoint z = h.order()[k - 1];
    const double lead = norm(z) - m;
    if (lead < 0.0) continue;
    const double threshold = std::floor(std::numbers::pi * lead * lead);
    if (double(k) <= threshold) out.push_back({z, static_cast<std::uint32_t>(k)});
  }
  return out;
}

std::vector<LatticePoint> detect_late(const GrowthHistory& h, double ell, std::uint64_t N) {
  check_time(h, N);
  std::vector<LatticePoint> out;
  const double radius = std::sqrt(double(N) / std::numbers::pi) - ell;
  for_each_in_ball(radius, [&](LatticePoint z) {
    const std::uint32_t j = h.join(z);
    const double lag = norm(z) + ell;
    const double threshold = std::floor(std::numbers::pi * lag * lag);
    if (j == 0 || double(j) > threshold) out.push_back(z);
  });
  return out;
}

ContainmentResult containment_events(const GrowthHistory& h, double m, double ell, std::uint64_t N) {
  check_time(h, N);
  const RadiusProfile p = radius_profile(h);
  ContainmentResult c;
  for (std::uint64_t k = 1; k <= N && c.outer_contained; ++k)
    c.outer_contained = p.outer[k] < std::sqrt(double(k) / std::numbers::pi) + m;
  // On [k, k+1) the cluster is A(k) while the ball grows towards radius
  // sqrt((k+1)/pi) - ell; the union of these open balls is that open ball.
  for (std::uint64_t k = 0; k <= N && c.inner_contained; ++k) {
    const std::uint64_t t = k < N ? k + 1 : N;
    const double s = std::sqrt(double(t) / std::numbers::pi) - ell;
    c.inner_contained = s <= p.inner[k];
  }
  return c;
}

bool event_complement_check(const GrowthHistory& h, double m, double ell, std::uint64_t N) {
  const bool no_early = detect_early(h, m, N).empty();
  const bool no_late = detect_late(h, ell, N).empty();
  const ContainmentResult c = containment_events(h, m, ell, N);
  return no_early == c.outer_contained && no_late == c.inner_contained;
}

std::vector<LatenessEntry> lateness_field(const GrowthHistory& h) {
  std::vector<LatenessEntry> out;
  out.reserve(h.size());
  for (std::uint64_t k = 1; k <= h.size(); ++k) {
    const LatticePoint z = h.order()[k - 1];
    out.push_back({z, std::sqrt(double(k) / std::numbers::pi) - norm(z)});
  }
  return out;
}

std::uint64_t ball_occupancy(const GrowthHistory& h, std::uint64_t k, LatticePoint z, int m) {
  std::uint64_t count = 0;
  for_each_in_ball(double(m), [&](LatticePoint off) {
    const std::uint32_t j = h.join(z + off);
    count += (j != 0 && j <= k);
  });
  return count;
}

std::vector<LatticePoint> tentacle_scan(const GrowthHistory& h, std::uint64_t k, double b, int m) {
  check_time(h, k);
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "tentacle radius must be >= 1");
  const std::size_t side = h.side();
  const auto half = static_cast<std::int64_t>(h.half_side());

  // prefix[row][x + 1] = number of A(k) sites in that row left of and at x
  std::vector<std::uint32_t> prefix(side * (side + 1), 0);
  for (std::size_t row = 0; row < side; ++row) {
    std::uint32_t run = 0;
    for (std::size_t col = 0; col < side; ++col) {
      const std::uint32_t j = h.join_grid()[row * side + col];
      run += (j != 0 && j <= k);
      prefix[row * (side + 1) + col + 1] = run;
    }
  }
  std::vector<std::int64_t> width(std::size_t(2 * m + 1));
  for (int dy = -m; dy <= m; ++dy) {
    std::int64_t w = -1;
    while ((w + 1) * (w + 1) + std::int64_t(dy) * dy < std::int64_t(m) * m) ++w;
    width[std::size_t(dy + m)] = w;
  }

  const double limit = b * double(m) * double(m);
  std::vector<LatticePoint> out;
  for (std::uint64_t i = 0; i < k; ++i) {
    const LatticePoint z = h.order()[i];
    if (norm2(z) < std::int64_t(m) * m) continue;
    std::uint64_t count = 0;
    for (int dy = -m; dy <= m; ++dy) {
      const std::int64_t w = width[std::size_t(dy + m)];
      if (w < 0) continue;
      const std::int64_t row = z.y + dy + half;
      if (row < 0 || row >= std::int64_t(side)) continue;
      const std::int64_t lo = std::max<std::int64_t>(z.x - w + half, 0);
      const std::int64_t hi = std::min<std::int64_t>(z.x + w + half, std::int64_t(side) - 1);
      if (hi < lo) continue;
      const std::uint32_t* r = prefix.data() + std::size_t(row) * (side + 1);
      count += r[hi + 1] - r[lo];
    }
    if (double(count) <= limit) out.push_back(z);
  }
  return out;
}

ShellProfile shell_profile(const GrowthHistory& h, std::uint64_t k, LatticePoint center, int m) {
  check_time(h, k);
  if (m < 0) throw Error(ErrorCode::InvalidArgument, "shell radius must be >= 0");
  ShellProfile p{center, m, std::vector<std::uint64_t>(std::size_t(m) + 1, 0)};
  for (int dy = -m; dy <= m; ++dy) {
    for (int dx = -m; dx <= m; ++dx) {
      const std::uint32_t j = h.join(center + LatticePoint{dx, dy});
      if (j == 0 || j > k) continue;
      p.a[std::size_t(m - std::max(std::abs(dx), std::abs(dy)))] += 1;
    }
  }
  return p;
}

ShellProfile shell_profile(std::span<const LatticePoint> sites, LatticePoint center, int m) {
  if (m < 0) throw Error(ErrorCode::InvalidArgument, "shell radius must be >= 0");
  ShellProfile p{center, m, std::vector<std::uint64_t>(std::size_t(m) + 1, 0)};
  for (LatticePoint z : sites) {
    const LatticePoint off = z - center;
    const int r = std::max(std::abs(off.x), std::abs(off.y));
    if (r <= m) p.a[std::size_t(m - r)] += 1;
  }
  return p;
}

TowerDecomposition tower_decompose(const ShellProfile& profile, double c_prime, int d) {
  if (!(c_prime > 0.0) || d < 1) throw Error(ErrorCode::InvalidArgument, "need c' > 0 and d >= 1");
  const std::vector<std::uint64_t>& a = profile.a;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] == 0) throw Error(ErrorCode::NonpositiveShell, "shell " + std::to_string(j) + " is empty");
  }

  TowerDecomposition t;
  t.c_prime = c_prime;
  t.d = d;
  t.alpha.push_back(0);
  const int shells = static_cast<int>(a.size());
  int pos = 0;
  while (pos < shells) {
    int chosen = 0;
    std::uint64_t window = 0;
    for (int beta = 1; pos + beta <= shells; ++beta) {
      window += a[std::size_t(pos + beta - 1)];
      const double lo = c_prime * ipow(beta / 2.0, d);
      const double hi = c_prime * ipow(double(beta), d);
      if (lo <= double(window) && double(window) <= hi) {
        chosen = beta;
        break;
      }
    }
    if (chosen == 0) {
      chosen = shells - pos;
      t.last_unconstrained = true;
    }
    t.beta.push_back(chosen);
    pos += chosen;
    t.alpha.push_back(pos);
  }
  for (std::size_t i = 0; i < t.beta.size(); ++i) {
    const auto step = static_cast<std::uint64_t>(std::llround(ipow(double(t.beta[i]), d - 1)));
    for (int j = 0; j < t.beta[i]; ++j) t.b.push_back(step);
  }
  return t;
}

bool tower_window_holds(const TowerDecomposition& t, std::span<const std::uint64_t> a) {
  if (t.beta.empty()) return true;
  for (std::size_t i = 0; i + 1 < t.beta.size(); ++i) {
    std::uint64_t window = 0;
    for (int j = t.alpha[i]; j < t.alpha[i + 1]; ++j) window += a[std::size_t(j)];
    const double lo = t.c_prime * ipow(t.beta[i] / 2.0, t.d);
    const double hi = t.c_prime * ipow(double(t.beta[i]), t.d);
    if (double(window) < lo || double(window) > hi) return false;
  }
  return true;
}

std::uint64_t tower_energy(std::span<const int> beta, int d) {
  std::uint64_t e = 0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    std::uint64_t p = 1;
    for (int k = 0; k < d; ++k) p *= std::uint64_t(beta[i]);
    e += (i + 1) * p;
  }
  return e;
}

MinTower min_tower_energy(int m, int d) {
  if (m < 0 || d < 1) throw Error(ErrorCode::InvalidArgument, "need m >= 0 and d >= 1");
  if (m > kMaxExhaustiveTower)
    throw Error(ErrorCode::SizeLimit, "exhaustive tower minimisation is limited to m <= 40");
  const int mass = m + 1;
  auto power = [d](int b) {
    std::uint64_t p = 1;
    for (int k = 0; k < d; ++k) p *= std::uint64_t(b);
    return p;
  };
  constexpr std::uint64_t kInf = std::numeric_limits<std::uint64_t>::max();
  // best[i][r]: minimal energy placing mass r in blocks i, i+1, ... (1-based i)
  std::vector<std::vector<std::uint64_t>> best(std::size_t(mass) + 2,
                                               std::vector<std::uint64_t>(std::size_t(mass) + 1, kInf));
  std::vector<std::vector<int>> pick(best.size(), std::vector<int>(std::size_t(mass) + 1, 0));
  for (int i = mass + 1; i >= 1; --i) {
    best[std::size_t(i)][0] = 0;
    if (i == mass + 1) continue;
    for (int r = 1; r <= mass; ++r) {
      for (int beta = 1; beta <= r; ++beta) {
        const std::uint64_t rest = best[std::size_t(i) + 1][std::size_t(r - beta)];
        if (rest == kInf) continue;
        const std::uint64_t e = std::uint64_t(i) * power(beta) + rest;
        if (e < best[std::size_t(i)][std::size_t(r)]) {
          best[std::size_t(i)][std::size_t(r)] = e;
          pick[std::size_t(i)][std::size_t(r)] = beta;
        }
      }
    }
  }
  MinTower out;
  out.energy = best[1][std::size_t(mass)];
  for (int i = 1, r = mass; r > 0; ++i) {
    const int beta = pick[std::size_t(i)][std::size_t(r)];
    out.beta.push_back(beta);
    r -= beta;
  }
  return out;
}

}  // namespace idla
