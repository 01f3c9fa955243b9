#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gpmix/dataset.hpp"
#include "gpmix/expfam.hpp"
#include "gpmix/laplace.hpp"
#include "gpmix/partition.hpp"

namespace gpmix {

inline constexpr int kDefaultPhiCap = 20;

/// Indices j (0-based, ascending) whose block A_l satisfies
/// m(x_{A_l}) <= c m(x_{A_l \ j}) m(x_j), compared on log values.
std::vector<int> s_a_set(const ExponentialFamily& family, const ConjugateHyper& hyper, const Dataset& data,
                         const OrderedPartition& partition, double c);

struct PhiResult {
  double value = 0.0;                 ///< min over partitions into t parts of |S_A| / n
  std::vector<int> argmin_labels;     ///< a minimizing partition
};

/// Exact phi_t by min-plus dynamic programming over subsets, using that
/// |S_A| is a sum of per-block counts. Throws Refusal above the cap.
PhiResult phi_t(const ExponentialFamily& family, const ConjugateHyper& hyper, const Dataset& data, int t, double c,
                int cap = kDefaultPhiCap);
/// Same minimum by walking every partition into t parts (capped at 12).
PhiResult phi_t_enumerate(const ExponentialFamily& family, const ConjugateHyper& hyper, const Dataset& data, int t,
                          double c, int cap = 12);

struct BoundReport {
  int n = 0;
  int t = 0;
  double c = 0.0;
  double c_w = 0.0;
  double c_v = 0.0;
  double phi = 0.0;
  bool phi_exact = true;  ///< false when phi is a lower bound
  std::vector<int> phi_argmin;
  double C_t = 0.0;
  double bound = 1.0;  ///< C_t / (1 + C_t); 1 when a precondition fails
  std::optional<double> posterior;
  bool phi_above_t_over_n = false;
  bool c_w_finite = false;
  bool c_v_finite = false;
  bool preconditions() const { return phi_above_t_over_n && c_w_finite && c_v_finite; }
  /// posterior <= bound, or vacuously true without a posterior or preconditions.
  bool holds() const;
  std::string note;  ///< e.g. "uninformative: c_v infinite"
};

/// Assembles c_w, c_v, phi_t and C_t = t c c_w c_v(t) / (phi_t - t/n) and,
/// for n within the subset DP cap, the exact posterior at t.
BoundReport lemma_bound(const GibbsPartitionModel& model, const ExponentialFamily& family,
                        const ConjugateHyper& hyper, const Dataset& data, int t, double c);

/// The bound from supplied pieces; phi may be a lower bound on phi_t.
BoundReport assemble_bound(const GibbsPartitionModel& model, int n, int t, double c, double phi, bool phi_exact);

/// A region of the sample space: a finite point set (discrete families) or a
/// box (continuous families).
struct SampleRegion {
  std::vector<Vec> points;
  std::optional<std::pair<Vec, Vec>> box;
};

struct BoundedCaseConstant {
  double c = 0.0;
  double log_c = 0.0;
  std::string method;  ///< how the supremum over theta and x was found
};

/// c = sup_{x in U} sup_theta p_theta(x) / m(x), in closed form per family:
///  Poisson: sup_theta p = x^x e^{-x} (1 at x = 0); Geometric: x^x/(x+1)^{x+1};
///  Exponential: 1/(e x), ratio quasi-convex in x so the interval ends suffice;
///  Gaussian: exp(x^2/(2 var)) per axis, a convex log ratio so the box corners
///  suffice; NormalGamma: unbounded in the variance, so +inf.
BoundedCaseConstant bounded_case_constant(const ExponentialFamily& family, const ConjugateHyper& hyper,
                                          const SampleRegion& region);

/// Whether x lies in the region (box inclusive).
bool in_region(const SampleRegion& region, const Vec& x);

struct Halfspace {
  Vec u;     ///< unit normal
  double b;  ///< {y : y'u <= b}
};

class HalfspaceRegion {
 public:
  /// Throws DomainError unless every |u| = 1 within 1e-12.
  explicit HalfspaceRegion(std::vector<Halfspace> faces);
  static HalfspaceRegion box(const Vec& lo, const Vec& hi);
  const std::vector<Halfspace>& faces() const { return faces_; }
  bool contains(const Vec& y) const;
  int dim() const { return faces_.empty() ? 0 : static_cast<int>(faces_.front().u.size()); }

 private:
  std::vector<Halfspace> faces_;
};

/// Capture_beta(y, U): every subset of size >= beta n has its mean in U.
/// Per halfspace, the worst subset is the top ceil(beta n) projections.
bool capture_check(std::span<const Vec> points, const HalfspaceRegion& region, double beta);

struct CaptureRow {
  int n = 0;
  int seeds = 0;
  int captured = 0;
  double frequency = 0.0;
};

struct CaptureConvergence {
  std::vector<CaptureRow> rows;
  /// Smallest grid n from which every later frequency is 1 (unset if none).
  std::optional<int> threshold_n;
};

/// draw(n, seed) returns n points; frequencies of Capture = 1 over seeds 0..seeds-1.
CaptureConvergence capture_convergence_experiment(const std::function<std::vector<Vec>(int, std::uint64_t)>& draw,
                                                  double beta, const HalfspaceRegion& region,
                                                  const std::vector<int>& n_grid, int seeds, int threads = 1);

enum class EventMode { Exact, SufficientOnly };

struct EventVerdict {
  EventMode mode = EventMode::Exact;
  bool holds = false;
  /// Exact mode: a subset J violating the event (bitmask), when one exists.
  std::optional<std::uint64_t> witness;
  /// Sufficient mode: the two capture conditions and the constant requirement.
  bool capture_stats = false;
  bool capture_singletons = false;
  bool constant_ok = false;
  double required_log_c = 0.0;  ///< log[(nu+1)^{k/2} C] from the splitting bound
  int spot_checks = 0;
  int spot_failures = 0;
};

struct EventSufficientSpec {
  MomentSpaceBox u1;  ///< captures means of s(x) over subsets of size >= beta n / 2
  MomentSpaceBox u2;  ///< mu_{x_j} in U2 for at least half of each large subset
  std::uint64_t seed = 1;
  int spot_checks = 1000;
};

/// Whether every J with |J| >= beta n has K ⊂ J, |K| >= |J|/2, with
/// m(x_J) <= c m(x_{J\j}) m(x_j) for j in K. Exhaustive for n <= 15; above
/// that (or when `sufficient` is given and force_sufficient is set) the two
/// capture conditions plus c >= (nu+1)^{k/2} C are checked instead, with a
/// random spot check of the definition.
EventVerdict subset_marginal_event_check(const ExponentialFamily& family, const ConjugateHyper& hyper,
                                         const Dataset& data, double beta, double c,
                                         const std::optional<EventSufficientSpec>& sufficient = {},
                                         bool force_sufficient = false);

}  // namespace gpmix
