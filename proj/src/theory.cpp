#include "gpmix/theory.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "gpmix/enumerate.hpp"
#include "gpmix/errors.hpp"
#include "gpmix/numerics.hpp"
#include "gpmix/parallel.hpp"
#include "gpmix/posterior.hpp"
#include "gpmix/rng.hpp"

namespace gpmix {

namespace {

double log_m_of(const ExponentialFamily& family, const ConjugateHyper& hyper, const Vec& sum, int count) {
  return log_marginal_from_sum(family, hyper, std::span<const double>(sum.data(), sum.size()), count);
}

// Per-subset |{j in S : m(x_S) <= c m(x_{S\j}) m(x_j)}|.
std::vector<std::int16_t> splittable_counts(const std::vector<double>& log_m, int n, double log_c) {
  const std::size_t total = std::size_t{1} << n;
  std::vector<std::int16_t> cnt(total, 0);
  for (std::size_t S = 1; S < total; ++S) {
    int c = 0;
    for (std::size_t rest = S; rest; rest &= rest - 1) {
      const std::size_t bit = rest & (~rest + 1);
      if (log_m[S] <= log_c + log_m[S ^ bit] + log_m[bit]) ++c;
    }
    cnt[S] = static_cast<std::int16_t>(c);
  }
  return cnt;
}

void check_t(int n, int t) {
  if (t < 1 || t > n) throw DomainError("t must lie in 1..n (got t=" + std::to_string(t) + ", n=" + std::to_string(n) + ")");
}

int capture_size(int n, double beta) {
  const int m = static_cast<int>(std::ceil(beta * n - 1e-9));
  return std::clamp(m, 1, n);
}

}  // namespace

std::vector<int> s_a_set(const ExponentialFamily& family, const ConjugateHyper& hyper, const Dataset& data,
                         const OrderedPartition& partition, double c) {
  if (!(c >= 0.0)) throw DomainError("c must be nonnegative");
  if (partition.size() != data.size()) throw StructuralError("partition size does not match the data");
  const double log_c = std::log(c);
  const int k = family.stat_dim();
  std::vector<int> out;
  for (const auto& block : partition.blocks()) {
    Vec sum = Vec::Zero(k);
    for (int j : block) sum += data.stats()[j];
    const double lm_block = log_m_of(family, hyper, sum, static_cast<int>(block.size()));
    for (int j : block) {
      const double lm_rest = log_m_of(family, hyper, sum - data.stats()[j], static_cast<int>(block.size()) - 1);
      const double lm_j = log_m_of(family, hyper, data.stats()[j], 1);
      if (lm_block <= log_c + lm_rest + lm_j) out.push_back(j);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

PhiResult phi_t(const ExponentialFamily& family, const ConjugateHyper& hyper, const Dataset& data, int t, double c,
                int cap) {
  const int n = data.size();
  check_t(n, t);
  if (!(c >= 0.0)) throw DomainError("c must be nonnegative");
  if (n > cap) throw Refusal("phi_t is capped at n = " + std::to_string(cap) + " (got n = " + std::to_string(n) + ")");
  const auto log_m = subset_log_marginals(family, hyper, data);
  const auto cnt = splittable_counts(log_m, n, std::log(c));
  const std::size_t total = std::size_t{1} << n;
  const std::size_t full = total - 1;
  constexpr int kInfCount = 1 << 20;

  // g[k][S] = min over partitions of S into k blocks of the summed counts.
  std::vector<std::vector<int>> g(t + 1);
  g[1].assign(total, kInfCount);
  for (std::size_t S = 1; S < total; ++S) g[1][S] = cnt[S];
  auto best_split = [&](int k, std::size_t S) {
    const std::size_t low = S & (~S + 1);
    const std::size_t rest = S ^ low;
    int best = kInfCount;
    for (std::size_t sub = rest; sub; sub = (sub - 1) & rest) {
      // B = low | (rest ^ sub), R = sub nonempty
      const int v = g[k - 1][sub];
      if (v >= kInfCount) continue;
      best = std::min(best, cnt[low | (rest ^ sub)] + v);
    }
    return best;
  };
  for (int k = 2; k < t; ++k) {
    g[k].assign(total, kInfCount);
    for (std::size_t S = 1; S < total; ++S) {
      if (std::popcount(S) >= k) g[k][S] = best_split(k, S);
    }
  }
  if (t >= 2) {
    g[t].assign(total, kInfCount);
    g[t][full] = best_split(t, full);
  }

  PhiResult out;
  out.value = static_cast<double>(g[t][full]) / n;
  out.argmin_labels.assign(n, 0);
  std::size_t S = full;
  int label = 0;
  for (int k = t; k >= 1; --k, ++label) {
    std::size_t block = S;
    if (k > 1) {
      const std::size_t low = S & (~S + 1);
      const std::size_t rest = S ^ low;
      for (std::size_t sub = rest; sub; sub = (sub - 1) & rest) {
        const int v = g[k - 1][sub];
        if (v < kInfCount && cnt[low | (rest ^ sub)] + v == g[k][S]) {
          block = low | (rest ^ sub);
          break;
        }
      }
    }
    for (int j = 0; j < n; ++j) {
      if (block >> j & 1) out.argmin_labels[j] = label;
    }
    S ^= block;
  }
  return out;
}

PhiResult phi_t_enumerate(const ExponentialFamily& family, const ConjugateHyper& hyper, const Dataset& data, int t,
                          double c, int cap) {
  const int n = data.size();
  check_t(n, t);
  if (!(c >= 0.0)) throw DomainError("c must be nonnegative");
  SetPartitionEnumerator it(n, t, cap);
  const auto log_m = subset_log_marginals(family, hyper, data);
  const auto cnt = splittable_counts(log_m, n, std::log(c));
  std::vector<std::uint64_t> masks;
  PhiResult out;
  int best = n + 1;
  do {
    it.block_masks(masks);
    int v = 0;
    for (auto m : masks) v += cnt[m];
    if (v < best) {
      best = v;
      out.argmin_labels.assign(it.rgs().begin(), it.rgs().end());
    }
  } while (it.next());
  out.value = static_cast<double>(best) / n;
  return out;
}

bool BoundReport::holds() const {
  if (!posterior || !preconditions()) return true;
  return *posterior <= bound;
}

BoundReport assemble_bound(const GibbsPartitionModel& model, int n, int t, double c, double phi, bool phi_exact) {
  check_t(n, t);
  if (n < 2) throw DomainError("the posterior bound needs n >= 2");
  BoundReport r;
  r.n = n;
  r.t = t;
  r.c = c;
  r.phi = phi;
  r.phi_exact = phi_exact;
  r.c_w = gpmix::c_w(model, n);
  r.c_v = t < n ? gpmix::c_v(model, n, t) : kInf;
  r.phi_above_t_over_n = phi > static_cast<double>(t) / n;
  r.c_w_finite = std::isfinite(r.c_w);
  r.c_v_finite = std::isfinite(r.c_v);
  std::vector<std::string> notes;
  if (!r.c_v_finite) notes.push_back(t < n ? "uninformative: c_v infinite (t = N)" : "t = n");
  if (!r.c_w_finite) notes.push_back("c_w infinite");
  if (!r.phi_above_t_over_n) notes.push_back("phi_t <= t/n");
  if (!std::isfinite(c)) notes.push_back("c infinite");
  if (r.preconditions() && std::isfinite(c)) {
    r.C_t = t * c * r.c_w * r.c_v / (phi - static_cast<double>(t) / n);
    r.bound = r.C_t / (1.0 + r.C_t);
  } else {
    r.C_t = kInf;
    r.bound = 1.0;
  }
  for (std::size_t i = 0; i < notes.size(); ++i) r.note += (i ? "; " : "") + notes[i];
  return r;
}

BoundReport lemma_bound(const GibbsPartitionModel& model, const ExponentialFamily& family,
                        const ConjugateHyper& hyper, const Dataset& data, int t, double c) {
  const int n = data.size();
  const auto phi = phi_t(family, hyper, data, t, c);
  auto r = assemble_bound(model, n, t, c, phi.value, true);
  r.phi_argmin = phi.argmin_labels;
  if (n <= kDefaultSubsetDpCap) {
    r.posterior = exact_joint_subset_dp(model, family, hyper, data).posterior[t - 1];
  }
  return r;
}

bool in_region(const SampleRegion& region, const Vec& x) {
  for (const auto& p : region.points) {
    if (p.size() == x.size() && p == x) return true;
  }
  if (region.box) {
    const auto& [lo, hi] = *region.box;
    return x.size() == lo.size() && (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }
  return false;
}

BoundedCaseConstant bounded_case_constant(const ExponentialFamily& family, const ConjugateHyper& hyper,
                                          const SampleRegion& region) {
  BoundedCaseConstant out;
  std::vector<Vec> candidates = region.points;
  const auto kind = family.kind();
  if (region.box) {
    const auto& [lo, hi] = *region.box;
    const int d = static_cast<int>(lo.size());
    if (hi.size() != d || d != family.data_dim()) throw DomainError("region box dimension does not match the family");
    if (family.is_discrete()) throw DomainError("use a finite point set for discrete families");
    if (d > 16) throw DomainError("region box has too many corners");
    for (int corner = 0; corner < (1 << d); ++corner) {
      Vec x(d);
      for (int i = 0; i < d; ++i) x[i] = (corner >> i & 1) ? hi[i] : lo[i];
      candidates.push_back(x);
    }
  }
  if (candidates.empty()) throw DomainError("the region U must contain at least one point");
  for (const auto& x : candidates) {
    if (!family.in_sample_space(x)) throw DomainError("region point outside the sample space of " + family.name());
  }
  if (kind == FamilyKind::NormalGamma) {
    out.c = kInf;
    out.log_c = kInf;
    out.method = "unbounded: sup over the variance of the normal density is infinite";
    return out;
  }
  double best = kNegInf;
  for (const auto& x : candidates) {
    double log_sup = 0.0;
    switch (kind) {
      case FamilyKind::PoissonGamma:
        log_sup = x[0] > 0.0 ? x[0] * std::log(x[0]) - x[0] : 0.0;
        break;
      case FamilyKind::GeometricBeta:
        log_sup = x[0] > 0.0 ? x[0] * std::log(x[0]) - (x[0] + 1.0) * std::log1p(x[0]) : 0.0;
        break;
      case FamilyKind::ExponentialGamma: log_sup = -std::log(x[0]) - 1.0; break;
      case FamilyKind::GaussianKnownVariance:
        for (int i = 0; i < x.size(); ++i) log_sup += x[i] * x[i] / (2.0 * family.variances()[i]);
        break;
      case FamilyKind::NormalGamma: break;
    }
    const std::vector<Vec> single{x};
    best = std::max(best, log_sup - log_marginal(family, hyper, single));
  }
  out.log_c = best;
  out.c = std::exp(best);
  switch (kind) {
    case FamilyKind::PoissonGamma:
    case FamilyKind::GeometricBeta: out.method = "analytic sup over theta at each point of U"; break;
    case FamilyKind::ExponentialGamma: out.method = "analytic sup over theta; quasi-convex in x, interval ends"; break;
    default: out.method = "analytic sup over theta; convex log ratio, box corners"; break;
  }
  return out;
}

HalfspaceRegion::HalfspaceRegion(std::vector<Halfspace> faces) : faces_(std::move(faces)) {
  if (faces_.empty()) throw DomainError("a halfspace region needs at least one face");
  const auto d = faces_.front().u.size();
  for (const auto& f : faces_) {
    if (f.u.size() != d) throw DomainError("halfspace normals must share one dimension");
    if (std::fabs(f.u.norm() - 1.0) > 1e-12) throw DomainError("halfspace normals must have unit length");
    if (!std::isfinite(f.b)) throw DomainError("halfspace offsets must be finite");
  }
}

HalfspaceRegion HalfspaceRegion::box(const Vec& lo, const Vec& hi) {
  if (lo.size() != hi.size() || lo.size() == 0) throw DomainError("box bounds must have equal positive dimension");
  std::vector<Halfspace> faces;
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) throw DomainError("box lower bound exceeds upper bound");
    Vec e = Vec::Zero(lo.size());
    e[i] = 1.0;
    faces.push_back({e, hi[i]});
    faces.push_back({-e, -lo[i]});
  }
  return HalfspaceRegion(std::move(faces));
}

bool HalfspaceRegion::contains(const Vec& y) const {
  for (const auto& f : faces_) {
    if (y.dot(f.u) > f.b) return false;
  }
  return true;
}

bool capture_check(std::span<const Vec> points, const HalfspaceRegion& region, double beta) {
  if (points.empty()) throw DomainError("capture check needs at least one point");
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0, 1]");
  const int n = static_cast<int>(points.size());
  const int m = capture_size(n, beta);
  std::vector<double> proj(n);
  for (const auto& f : region.faces()) {
    for (int j = 0; j < n; ++j) {
      if (points[j].size() != f.u.size()) throw DomainError("point dimension does not match the region");
      proj[j] = points[j].dot(f.u);
    }
    std::partial_sort(proj.begin(), proj.begin() + m, proj.end(), std::greater<>());
    double top = 0.0;
    for (int i = 0; i < m; ++i) top += proj[i];
    if (top / m > f.b) return false;
  }
  return true;
}

CaptureConvergence capture_convergence_experiment(const std::function<std::vector<Vec>(int, std::uint64_t)>& draw,
                                                  double beta, const HalfspaceRegion& region,
                                                  const std::vector<int>& n_grid, int seeds, int threads) {
  if (seeds < 1) throw DomainError("need at least one seed");
  const std::size_t tasks = n_grid.size() * seeds;
  std::vector<char> hit(tasks, 0);
  parallel_for(tasks, threads, [&](std::size_t i) {
    const int n = n_grid[i / seeds];
    const auto pts = draw(n, i % seeds);
    hit[i] = capture_check(pts, region, beta);
  });
  CaptureConvergence out;
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    CaptureRow row;
    row.n = n_grid[g];
    row.seeds = seeds;
    for (int s = 0; s < seeds; ++s) row.captured += hit[g * seeds + s];
    row.frequency = static_cast<double>(row.captured) / seeds;
    out.rows.push_back(row);
  }
  for (auto it = out.rows.rbegin(); it != out.rows.rend() && it->frequency == 1.0; ++it) out.threshold_n = it->n;
  return out;
}

EventVerdict subset_marginal_event_check(const ExponentialFamily& family, const ConjugateHyper& hyper,
                                         const Dataset& data, double beta, double c,
                                         const std::optional<EventSufficientSpec>& sufficient, bool force_sufficient) {
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0, 1]");
  if (!(c > 0.0)) throw DomainError("c must be positive");
  const int n = data.size();
  if (n < 1) throw DomainError("event check needs data");
  const double log_c = std::log(c);
  const int min_size = capture_size(n, beta);
  EventVerdict out;

  if (n <= 15 && !force_sufficient) {
    out.mode = EventMode::Exact;
    const auto log_m = subset_log_marginals(family, hyper, data);
    const auto cnt = splittable_counts(log_m, n, log_c);
    out.holds = true;
    for (std::size_t J = 1; J < (std::size_t{1} << n); ++J) {
      const int size = std::popcount(J);
      if (size < min_size) continue;
      if (2 * cnt[J] < size) {
        out.holds = false;
        out.witness = J;
        break;
      }
    }
    return out;
  }

  if (!sufficient) {
    throw Refusal("n = " + std::to_string(n) + " exceeds the exhaustive limit 15; supply U1 and U2 for the sufficient check");
  }
  out.mode = EventMode::SufficientOnly;
  const auto& spec = *sufficient;
  const int k = family.stat_dim();
  out.capture_stats = capture_check(data.stats(), HalfspaceRegion::box(spec.u1.lo, spec.u1.hi), beta / 2.0);
  std::vector<Vec> ys;
  const auto u2 = HalfspaceRegion::box(spec.u2.lo, spec.u2.hi);
  for (const auto& s : data.stats()) {
    const Vec mu = (hyper.xi + s) / (hyper.nu + 1.0);
    ys.push_back(Vec::Constant(1, u2.contains(mu) ? 1.0 : 0.0));
  }
  out.capture_singletons = capture_check(ys, HalfspaceRegion::box(Vec::Constant(1, 0.5), Vec::Constant(1, 1.0)), beta);
  MomentSpaceBox u{spec.u1.lo.cwiseMin(spec.u2.lo), spec.u1.hi.cwiseMax(spec.u2.hi),
                   std::max(spec.u1.grid, spec.u2.grid)};
  const auto split = splitting_bound(family, hyper, u);
  out.required_log_c = 0.5 * k * std::log(hyper.nu + 1.0) + split.log_C;
  out.constant_ok = log_c >= out.required_log_c;
  out.holds = beta * n >= 2.0 && out.capture_stats && out.capture_singletons && out.constant_ok;

  SplitMix64 rng(SplitMix64::stream_key(spec.seed, 0));
  std::vector<int> idx(n);
  for (int r = 0; r < spec.spot_checks; ++r) {
    std::iota(idx.begin(), idx.end(), 0);
    const int size = min_size + static_cast<int>(rng.below(n - min_size + 1));
    for (int i = 0; i < size; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
    Vec sum = Vec::Zero(k);
    for (int i = 0; i < size; ++i) sum += data.stats()[idx[i]];
    const double lm_j = log_m_of(family, hyper, sum, size);
    int good = 0;
    for (int i = 0; i < size; ++i) {
      const Vec& s = data.stats()[idx[i]];
      if (lm_j <= log_c + log_m_of(family, hyper, sum - s, size - 1) + log_m_of(family, hyper, s, 1)) ++good;
    }
    ++out.spot_checks;
    if (2 * good < size) ++out.spot_failures;
  }
  return out;
}

}  // namespace gpmix
