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

#include "idla/martingale_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "idla/format.hpp"
#include "idla/parallel.hpp"

namespace idla {

std::array<double, 4> split_probabilities(const std::array<EdgeMark, 4>& marks) {
  std::array<double, 4> p{};
  double total = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    p[i] = 1.0 / marks[i].dist;
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

SplitOutcome split_step(const std::array<EdgeMark, 4>& marks, RngStream& rng) {
  std::array<double, 4> w{};
  double total = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    w[i] = 1.0 / marks[i].dist;
    total += w[i];
  }
  double u = rng.uniform() * total;
  int edge = 3;
  for (int i = 0; i < 3; ++i) {
    if (u < w[std::size_t(i)]) {
      edge = i;
      break;
    }
    u -= w[std::size_t(i)];
  }
  return {edge, marks[std::size_t(edge)].absorbing};
}

SplitOutcome split_step(const std::array<double, 4>& dist, RngStream& rng) {
  std::array<EdgeMark, 4> marks{};
  for (std::size_t i = 0; i < 4; ++i) marks[i] = {dist[i], dist[i] < 1.0};
  return split_step(marks, rng);
}

const char* to_string(ExitKind kind) noexcept {
  switch (kind) {
    case ExitKind::Settled: return "settled";
    case ExitKind::Frozen: return "frozen";
    case ExitKind::Pole: return "pole";
  }
  return "settled";
}

StoppedCluster::StoppedCluster(std::shared_ptr<const OmegaRegion> omega) : omega_(std::move(omega)) {
  if (!omega_) throw Error(ErrorCode::InvalidArgument, "null region");
  const std::size_t n = omega_->inside().size();
  occupied_.assign(n, 0);
  crossing_id_.assign(n * 4, -1);
  const auto crossings = omega_->crossings();
  frozen_.assign(crossings.size(), 0);
  for (std::size_t c = 0; c < crossings.size(); ++c) {
    const std::int32_t i = omega_->index_of(crossings[c].from);
    crossing_id_[std::size_t(i) * 4 + std::size_t(crossings[c].dir)] = static_cast<std::int32_t>(c);
  }
}

std::vector<LatticePoint> StoppedCluster::occupied_sites() const {
  std::vector<LatticePoint> out;
  for (std::size_t i = 0; i < occupied_.size(); ++i)
    if (occupied_[i]) out.push_back(omega_->inside()[i]);
  return out;
}

std::array<double, 2> StoppedCluster::boundary_extremes() const {
  const OmegaRegion& r = *omega_;
  const double h0 = r.h_origin();
  if (!occupied_[0]) return {0.0, 0.0};
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  auto take = [&](double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (std::size_t i = 0; i < occupied_.size(); ++i) {
    if (!occupied_[i]) continue;
    const auto idx = static_cast<std::int32_t>(i);
    for (Direction d : kDirections) {
      const std::int32_t j = r.neighbor(idx, d);
      if (j != OmegaRegion::kOutside) {
        if (!occupied_[std::size_t(j)]) take(r.h(j) - h0);
      } else {
        take((r.is_puncture_edge(idx, d) ? r.h_pole() : r.level()) - h0);
      }
    }
  }
  return {lo, hi};
}

ParticleRecord run_stopped_particle(StoppedCluster& cluster, RngStream& rng) {
  const OmegaRegion& r = *cluster.omega_;
  const double h0 = r.h_origin();
  ParticleRecord rec;
  ++cluster.launched_;

  std::int32_t i = 0;
  double hi = h0;
  if (!cluster.occupied_[0]) {
    cluster.occupied_[0] = 1;
    ++cluster.settled_;
    rec.exit = GridPoint::vertex(r.inside()[0]);
    return rec;
  }

  double s = 0.0;
  double lo_exc = 0.0, hi_exc = 0.0;
  std::uint64_t steps = 0;
  std::uint64_t bits = 0;
  int bits_left = 0;
  for (;;) {
    const std::uint8_t mask = r.crossing_mask(i);
    if (mask == 0) {
      if (bits_left == 0) {
        bits = rng.next();
        bits_left = 32;
      }
      const auto d = static_cast<Direction>(bits & 3U);
      bits >>= 2;
      --bits_left;
      ++steps;
      const std::int32_t j = r.neighbor(i, d);
      const double hj = r.h(j);
      s += (hj - hi) * (hj - hi);
      lo_exc = std::min(lo_exc, hj - h0);
      hi_exc = std::max(hi_exc, hj - h0);
      if (!cluster.occupied_[std::size_t(j)]) {
        cluster.occupied_[std::size_t(j)] = 1;
        ++cluster.settled_;
        rec.kind = ExitKind::Settled;
        rec.exit = GridPoint::vertex(r.inside()[std::size_t(j)]);
        rec.delta_m = hj - h0;
        break;
      }
      i = j;
      hi = hj;
      continue;
    }

    std::array<EdgeMark, 4> marks{};
    for (Direction d : kDirections) {
      if ((mask >> unsigned(d)) & 1U) marks[std::size_t(d)] = {r.is_puncture_edge(i, d) ? 1.0 : r.mark(i, d), true};
    }
    const SplitOutcome out = split_step(marks, rng);
    const auto d = static_cast<Direction>(out.edge);
    ++steps;
    if (out.absorbed) {
      const bool pole = r.is_puncture_edge(i, d);
      const double he = pole ? r.h_pole() : r.level();
      s += (he - hi) * (he - hi);
      lo_exc = std::min(lo_exc, he - h0);
      hi_exc = std::max(hi_exc, he - h0);
      rec.delta_m = he - h0;
      if (pole) {
        rec.kind = ExitKind::Pole;
        rec.exit = GridPoint::vertex(r.puncture());
        ++cluster.pole_hits_;
      } else {
        rec.kind = ExitKind::Frozen;
        rec.exit = {r.inside()[std::size_t(i)], d, r.mark(i, d)};
        ++cluster.frozen_[std::size_t(cluster.crossing_id(i, d))];
        ++cluster.frozen_total_;
      }
      break;
    }
    const std::int32_t j = r.neighbor(i, d);
    const double hj = r.h(j);
    s += (hj - hi) * (hj - hi);
    lo_exc = std::min(lo_exc, hj - h0);
    hi_exc = std::max(hi_exc, hj - h0);
    if (!cluster.occupied_[std::size_t(j)]) {
      cluster.occupied_[std::size_t(j)] = 1;
      ++cluster.settled_;
      rec.kind = ExitKind::Settled;
      rec.exit = GridPoint::vertex(r.inside()[std::size_t(j)]);
      rec.delta_m = hj - h0;
      break;
    }
    i = j;
    hi = hj;
  }
  rec.delta_s = s;
  rec.steps = steps;
  rec.excursion_min = lo_exc;
  rec.excursion_max = hi_exc;
  return rec;
}

MartingaleTrace martingale_trace(std::shared_ptr<const OmegaRegion> omega, std::uint64_t n, std::uint64_t seed) {
  StoppedCluster cluster(std::move(omega));
  const OmegaRegion& r = cluster.omega();
  MartingaleTrace t;
  t.pole = r.pole();
  t.level = r.level();
  t.h_origin = r.h_origin();
  t.records.reserve(n);
  t.m.assign(n + 1, 0.0);
  t.s.assign(n + 1, 0.0);
  for (std::uint64_t k = 1; k <= n; ++k) {
    RngStream rng(seed, k);
    ParticleRecord rec = run_stopped_particle(cluster, rng);
    t.m[k] = t.m[k - 1] + rec.delta_m;
    t.s[k] = t.s[k - 1] + rec.delta_s;
    t.records.push_back(rec);
  }
  t.settled = cluster.settled();
  t.frozen = cluster.frozen();
  t.pole_hits = cluster.absorbed_at_pole();
  return t;
}

MartingaleTrace martingale_trace(LatticePoint zeta, std::uint64_t n, std::uint64_t seed, const KernelTable& table) {
  const HarmonicPole pole = make_pole(zeta);
  auto omega = std::make_shared<const OmegaRegion>(build_omega(pole, table));
  return martingale_trace(std::move(omega), n, seed);
}

MartingaleEnsemble martingale_ensemble(const std::shared_ptr<const OmegaRegion>& omega, std::uint64_t n,
                                       std::span<const std::uint64_t> checkpoints, std::uint64_t seeds,
                                       std::uint64_t master, unsigned threads) {
  for (std::uint64_t t : checkpoints)
    if (t > n) throw Error(ErrorCode::InvalidArgument, "checkpoint beyond the particle count");
  if (seeds == 0) throw Error(ErrorCode::InvalidArgument, "need at least one seed");

  struct Slot {
    std::vector<double> m, s;
    double frozen_error = 0.0;
    bool conserved = true;
    std::uint64_t settled = 0, frozen = 0, pole = 0;
  };
  std::vector<Slot> slots(seeds);
  parallel_for(seeds, threads, [&](std::size_t i) {
    const MartingaleTrace t = martingale_trace(omega, n, derive_seed(master, i));
    Slot& slot = slots[i];
    for (std::uint64_t c : checkpoints) {
      slot.m.push_back(t.m[c]);
      slot.s.push_back(t.s[c]);
    }
    const double expected = t.level - t.h_origin;
    for (const ParticleRecord& r : t.records)
      if (r.kind == ExitKind::Frozen) slot.frozen_error = std::max(slot.frozen_error, std::abs(r.delta_m - expected));
    slot.conserved = t.settled + t.frozen + t.pole_hits == n && t.records.size() == n;
    slot.settled = t.settled;
    slot.frozen = t.frozen;
    slot.pole = t.pole_hits;
  });

  MartingaleEnsemble e;
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    double sum = 0.0, sum_s = 0.0;
    for (const Slot& slot : slots) {
      sum += slot.m[c];
      sum_s += slot.s[c];
    }
    const double mean = sum / double(seeds);
    double var = 0.0;
    for (const Slot& slot : slots) var += (slot.m[c] - mean) * (slot.m[c] - mean);
    var = seeds > 1 ? var / double(seeds - 1) : 0.0;
    e.checkpoints.push_back({checkpoints[c], mean, std::sqrt(var / double(seeds)), sum_s / double(seeds)});
  }
  for (const Slot& slot : slots) {
    e.max_frozen_error = std::max(e.max_frozen_error, slot.frozen_error);
    e.conserved = e.conserved && slot.conserved;
    e.settled += slot.settled;
    e.frozen += slot.frozen;
    e.pole_hits += slot.pole;
  }
  return e;
}

void write_trace_csv(std::ostream& os, const MartingaleTrace& trace) {
  os << "k,exit_kind,x,y,frac,delta_M,delta_S,M,S,dir\n";
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const ParticleRecord& r = trace.records[k];
    const bool vertex = r.exit.is_vertex();
    os << (k + 1) << ',' << to_string(r.kind) << ',' << r.exit.base.x << ',' << r.exit.base.y << ','
       << format_double(vertex ? 0.0 : r.exit.frac) << ',' << format_double(r.delta_m) << ','
       << format_double(r.delta_s) << ',' << format_double(trace.m[k + 1]) << ',' << format_double(trace.s[k + 1])
       << ',' << to_string(vertex ? Direction::None : r.exit.dir) << '\n';
  }
}

// ---------------------------------------------------------------------------

double exit_mgf_exact(double a, double b, double lambda) {
  if (!(a > 0.0) || !(b > 0.0) || !(lambda >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "need a, b > 0 and lambda >= 0");
  const double c = 0.5 * (a + b);
  const double x0 = 0.5 * (a - b);
  const double root = std::sqrt(lambda);
  if (root * c >= std::numbers::pi / 2.0) throw Error(ErrorCode::Pole, "sqrt(lambda) c >= pi/2");
  return std::cos(root * x0) / std::cos(root * c);
}

double exit_mgf_bound(double a, double b, double lambda) {
  if (!(a > 0.0) || !(a <= b) || !(lambda >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "need 0 < a <= b and lambda >= 0");
  if (std::sqrt(lambda) * (a + b) > 3.0) throw Error(ErrorCode::Domain, "sqrt(lambda)(a + b) > 3");
  return 1.0 + 10.0 * lambda * a * b;
}

double bm_sup_tail(double k, double s) {
  if (!(k > 0.0) || !(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "need k, s > 0");
  return std::exp(-k * k * s / 2.0);
}

namespace {

// Eight +-1 steps per byte (bit set = +1): total displacement and the extreme
// partial sums after 1..8 steps.
struct ByteWalk {
  std::array<std::int8_t, 256> sum{};
  std::array<std::int8_t, 256> max{};
  std::array<std::int8_t, 256> min{};
  ByteWalk() {
    for (int b = 0; b < 256; ++b) {
      int pos = 0, hi = -8, lo = 8;
      for (int i = 0; i < 8; ++i) {
        pos += ((b >> i) & 1) ? 1 : -1;
        hi = std::max(hi, pos);
        lo = std::min(lo, pos);
      }
      sum[std::size_t(b)] = std::int8_t(pos);
      max[std::size_t(b)] = std::int8_t(hi);
      min[std::size_t(b)] = std::int8_t(lo);
    }
  }
};

const ByteWalk& byte_walk() {
  static const ByteWalk table;
  return table;
}

constexpr std::uint64_t kChunk = 4096;

McEstimate combine(const std::vector<std::array<double, 2>>& parts, std::uint64_t paths) {
  double sum = 0.0, sum2 = 0.0;
  for (const auto& p : parts) {
    sum += p[0];
    sum2 += p[1];
  }
  McEstimate e;
  e.samples = paths;
  e.mean = sum / double(paths);
  const double var = paths > 1 ? std::max(0.0, (sum2 - sum * e.mean) / double(paths - 1)) : 0.0;
  e.std_error = std::sqrt(var / double(paths));
  return e;
}

}  // namespace

McEstimate mc_exit_mgf(double a, double b, double lambda, std::uint64_t paths, std::uint64_t seed,
                       unsigned threads) {
  exit_mgf_exact(a, b, lambda);  // domain checks
  if (paths == 0) throw Error(ErrorCode::InvalidArgument, "need at least one path");
  const double h = std::min(a, b) / 25.0;
  const double dt = h * h / 2.0;
  const auto lo = -static_cast<std::int64_t>(std::llround(a / h));
  const auto hi = static_cast<std::int64_t>(std::llround(b / h));
  const ByteWalk& bw = byte_walk();

  const std::uint64_t chunks = (paths + kChunk - 1) / kChunk;
  std::vector<std::array<double, 2>> parts(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    double sum = 0.0, sum2 = 0.0;
    const std::uint64_t end = std::min<std::uint64_t>(paths, (c + 1) * kChunk);
    for (std::uint64_t p = c * kChunk; p < end; ++p) {
      RngStream rng(seed, p);
      std::int64_t x = 0;
      std::uint64_t n = 0;
      bool done = false;
      while (!done) {
        std::uint64_t word = rng.next();
        for (int byte = 0; byte < 8 && !done; ++byte, word >>= 8) {
          const auto v = std::size_t(word & 0xffU);
          if (x + bw.min[v] > lo && x + bw.max[v] < hi) {
            x += bw.sum[v];
            n += 8;
            continue;
          }
          for (int i = 0; i < 8; ++i) {
            x += ((v >> i) & 1U) ? 1 : -1;
            ++n;
            if (x <= lo || x >= hi) {
              done = true;
              break;
            }
          }
        }
      }
      const double f = std::exp(lambda * dt * double(n));
      sum += f;
      sum2 += f * f;
    }
    parts[c] = {sum, sum2};
  });
  return combine(parts, paths);
}

McEstimate mc_sup_tail(double k, double s, std::uint64_t paths, std::uint64_t steps, std::uint64_t seed,
                       unsigned threads) {
  if (!(k > 0.0) || !(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "need k, s > 0");
  if (paths == 0 || steps == 0) throw Error(ErrorCode::InvalidArgument, "need paths and steps >= 1");
  // sqrt(s / steps) * max partial sum >= k s
  const double target = k * std::sqrt(s * double(steps));
  const ByteWalk& bw = byte_walk();

  const std::uint64_t chunks = (paths + kChunk - 1) / kChunk;
  std::vector<std::array<double, 2>> parts(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    double hits = 0.0;
    const std::uint64_t end = std::min<std::uint64_t>(paths, (c + 1) * kChunk);
    for (std::uint64_t p = c * kChunk; p < end; ++p) {
      RngStream rng(seed, p);
      std::int64_t x = 0;
      std::uint64_t left = steps;
      bool hit = false;
      while (left > 0 && !hit) {
        std::uint64_t word = rng.next();
        for (int byte = 0; byte < 8 && left > 0 && !hit; ++byte, word >>= 8) {
          const auto v = std::size_t(word & 0xffU);
          if (left >= 8) {
            hit = double(x + bw.max[v]) >= target;
            x += bw.sum[v];
            left -= 8;
            continue;
          }
          for (int i = 0; i < 8 && left > 0; ++i, --left) {
            x += ((v >> i) & 1U) ? 1 : -1;
            if (double(x) >= target) {
              hit = true;
              break;
            }
          }
        }
      }
      hits += hit ? 1.0 : 0.0;
    }
    parts[c] = {hits, hits};
  });
  return combine(parts, paths);
}

}  // namespace idla
