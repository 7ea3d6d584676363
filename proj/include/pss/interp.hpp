#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "pss/errors.hpp"
#include "pss/legendre.hpp"
#include "pss/multiindex.hpp"
#include "pss/parallel.hpp"
#include "pss/tridiagonal.hpp"

namespace pss {

using ParametricMap = std::function<Vector(const std::vector<double>&)>;

/// Nested univariate interpolation points on [-1,1] with the hierarchical
/// function cache h_k(t) = prod_{l<k} (t - t_l)/(t_k - t_l).
class UnivariateSequence {
public:
  enum class Kind { Leja, RLeja, Custom };

  UnivariateSequence(std::vector<double> points, Kind kind)
      : points_(std::move(points)), kind_(kind) {
    if (points_.empty()) throw malformed_input("UnivariateSequence: empty point list");
    for (std::size_t k = 0; k < points_.size(); ++k) {
      if (!(std::abs(points_[k]) <= 1.0 + 1e-14))
        throw malformed_input("UnivariateSequence: points must lie in [-1,1]");
      for (std::size_t l = 0; l < k; ++l)
        if (std::abs(points_[k] - points_[l]) < 1e-13)
          throw malformed_input("UnivariateSequence: points must be pairwise distinct");
    }
    denom_.resize(points_.size());
    for (std::size_t k = 0; k < points_.size(); ++k) {
      double d = 1.0;
      for (std::size_t l = 0; l < k; ++l) d *= points_[k] - points_[l];
      denom_[k] = d;
    }
  }

  Kind kind() const { return kind_; }
  int max_degree() const { return static_cast<int>(points_.size()) - 1; }
  double point(int k) const { return points_[static_cast<std::size_t>(k)]; }
  const std::vector<double>& points() const { return points_; }

  double hierarchical(int k, double t) const {
    double p = 1.0;
    for (int l = 0; l < k; ++l) p *= t - points_[static_cast<std::size_t>(l)];
    return p / denom_[static_cast<std::size_t>(k)];
  }

  /// h_0(t), ..., h_K(t) in one sweep.
  std::vector<double> hierarchical_row(int K, double t) const {
    if (K > max_degree()) throw sequence_too_short("UnivariateSequence: degree beyond sequence");
    std::vector<double> row(static_cast<std::size_t>(K) + 1);
    double p = 1.0;
    for (int k = 0; k <= K; ++k) {
      row[static_cast<std::size_t>(k)] = p / denom_[static_cast<std::size_t>(k)];
      p *= t - points_[static_cast<std::size_t>(k)];
    }
    return row;
  }

  /// sup norm of h_k probed over a dense grid including the points.
  double hierarchical_sup(int k) const {
    double m = std::abs(hierarchical(k, points_[static_cast<std::size_t>(k)]));
    const int G = 2048;
    for (int i = 0; i <= G; ++i) {
      double t = std::cos(3.14159265358979323846 * i / G);
      m = std::max(m, std::abs(hierarchical(k, t)));
    }
    return m;
  }

  /// L2(dt/2) norm of h_k by Gauss-Legendre, exact for the square.
  double hierarchical_l2(int k) const {
    auto [x, w] = gauss_legendre(k + 1);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double h = hierarchical(k, x[i]);
      s += 0.5 * w[i] * h * h;
    }
    return std::sqrt(s);
  }

private:
  std::vector<double> points_;
  std::vector<double> denom_;
  Kind kind_;
};

namespace detail {

/// Argmax of a smooth objective over [-1,1]: coarse Chebyshev-distributed
/// grid, candidate near-maxima refined by local grid zooms, exact ties
/// resolved toward the smaller abscissa.
template <class F>
double argmax_with_small_tie(const F& objective, int grid_size) {
  const double pi = 3.14159265358979323846;
  std::vector<double> grid(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i)
    grid[static_cast<std::size_t>(i)] = -std::cos(pi * i / (grid_size - 1));

  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> candidates;
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = objective(grid[i]);
    best = std::max(best, values[i]);
  }
  const double wide = 1e-3 * (1.0 + std::abs(best));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    bool local_max = (i == 0 || values[i] >= values[i - 1]) &&
                     (i + 1 == grid.size() || values[i] >= values[i + 1]);
    if (local_max && values[i] >= best - wide) candidates.push_back(static_cast<int>(i));
  }

  double best_t = grid[static_cast<std::size_t>(candidates.front())];
  double best_v = -std::numeric_limits<double>::infinity();
  for (int ci : candidates) {
    double lo = grid[static_cast<std::size_t>(std::max(0, ci - 1))];
    double hi = grid[static_cast<std::size_t>(std::min(grid_size - 1, ci + 1))];
    double t = grid[static_cast<std::size_t>(ci)], v = values[static_cast<std::size_t>(ci)];
    for (int pass = 0; pass < 3; ++pass) {
      const int local = 64;
      double step = (hi - lo) / local;
      double lt = t, lv = v;
      for (int i = 0; i <= local; ++i) {
        double x = lo + i * step;
        double val = objective(x);
        if (val > lv + 1e-13) {
          lv = val;
          lt = x;
        }
      }
      t = lt;
      v = lv;
      lo = std::max(-1.0, t - step);
      hi = std::min(1.0, t + step);
    }
    if (v > best_v + 1e-10 || (std::abs(v - best_v) <= 1e-10 && t < best_t)) {
      best_v = v;
      best_t = t;
    }
  }
  return best_t;
}

}  // namespace detail

/// Leja points on [-1,1] started at t_0 = 1; each point maximizes the
/// product of distances to its predecessors, ties toward the smaller t.
inline UnivariateSequence leja_sequence(int K, int grid_size = 20000) {
  if (K < 0) throw malformed_input("leja_sequence: negative degree");
  if (grid_size < 10000) throw malformed_input("leja_sequence: grid_size >= 10^4 required");
  std::vector<double> pts{1.0};
  while (static_cast<int>(pts.size()) <= K) {
    auto objective = [&](double t) {
      double s = 0.0;
      for (double p : pts) s += std::log(std::max(std::abs(t - p), 1e-300));
      return s;
    };
    pts.push_back(detail::argmax_with_small_tie(objective, grid_size));
  }
  return UnivariateSequence(std::move(pts), UnivariateSequence::Kind::Leja);
}

/// Projections of the unit-disc Leja points onto the real axis, duplicates
/// removed in order of first appearance.
inline UnivariateSequence rleja_sequence(int K, int grid_size = 20000) {
  if (K < 0) throw malformed_input("rleja_sequence: negative degree");
  std::vector<std::complex<double>> z{{1.0, 0.0}};
  std::vector<double> pts{1.0};
  const double pi = 3.14159265358979323846;
  while (static_cast<int>(pts.size()) <= K) {
    double best_v = -std::numeric_limits<double>::infinity();
    double best_theta = 0.0;
    for (int i = 0; i < grid_size; ++i) {
      double theta = 2.0 * pi * i / grid_size;
      std::complex<double> c(std::cos(theta), std::sin(theta));
      double s = 0.0;
      for (const auto& p : z) s += 0.5 * std::log(std::norm(c - p));
      if (s > best_v + 1e-12) {
        best_v = s;
        best_theta = theta;
      }
    }
    std::complex<double> c(std::cos(best_theta), std::sin(best_theta));
    z.push_back(c);
    double x = c.real();
    bool dup = false;
    for (double p : pts)
      if (std::abs(p - x) < 1e-9) dup = true;
    if (!dup) pts.push_back(x);
  }
  return UnivariateSequence(std::move(pts), UnivariateSequence::Kind::RLeja);
}

/// Lower bound of the univariate Lebesgue constant for the first k+1 points,
/// probed on a uniform grid (plus the nodes themselves, where it equals 1).
inline double lebesgue_constant_1d(const UnivariateSequence& seq, int k, int probe_size) {
  auto profile = [&](int kk) {
    // barycentric weights for points t_0..t_kk
    std::vector<double> w(static_cast<std::size_t>(kk) + 1, 1.0);
    for (int i = 0; i <= kk; ++i)
      for (int l = 0; l <= kk; ++l)
        if (l != i) w[static_cast<std::size_t>(i)] /= seq.point(i) - seq.point(l);
    double m = 1.0;
    for (int g = 0; g < probe_size; ++g) {
      double t = -1.0 + 2.0 * g / (probe_size - 1);
      double prod = 1.0;
      bool at_node = false;
      for (int l = 0; l <= kk; ++l) {
        double diff = t - seq.point(l);
        if (std::abs(diff) < 1e-14) at_node = true;
        prod *= diff;
      }
      if (at_node) continue;
      double s = 0.0;
      for (int i = 0; i <= kk; ++i)
        s += std::abs(w[static_cast<std::size_t>(i)] / (t - seq.point(i)));
      m = std::max(m, std::abs(prod) * s);
    }
    return m;
  };
  if (k > seq.max_degree()) throw sequence_too_short("lebesgue_constant_1d: k beyond sequence");
  return profile(k);
}

/// lambda_0..lambda_kmax in one pass with incrementally updated weights.
inline std::vector<double> lebesgue_profile_1d(const UnivariateSequence& seq, int k_max,
                                               int probe_size) {
  if (k_max > seq.max_degree()) throw sequence_too_short("lebesgue_profile_1d: beyond sequence");
  std::vector<double> out(static_cast<std::size_t>(k_max) + 1, 1.0);
  std::vector<double> probes(static_cast<std::size_t>(probe_size));
  for (int g = 0; g < probe_size; ++g)
    probes[static_cast<std::size_t>(g)] = -1.0 + 2.0 * g / (probe_size - 1);
  std::vector<double> w{1.0};
  std::vector<double> lognum(static_cast<std::size_t>(probe_size), 0.0);
  std::vector<double> signs(static_cast<std::size_t>(probe_size), 1.0);

  for (int k = 0; k <= k_max; ++k) {
    if (k > 0) {
      for (int i = 0; i < k; ++i) w[static_cast<std::size_t>(i)] /= seq.point(i) - seq.point(k);
      double wk = 1.0;
      for (int l = 0; l < k; ++l) wk /= seq.point(k) - seq.point(l);
      w.push_back(wk);
    }
    std::vector<double> maxima(probes.size(), 0.0);
    parallel_for(probes.size(), [&](std::size_t g) {
      double t = probes[g];
      double prod = 1.0;
      bool at_node = false;
      for (int l = 0; l <= k; ++l) {
        double diff = t - seq.point(l);
        if (std::abs(diff) < 1e-14) {
          at_node = true;
          break;
        }
        prod *= diff;
      }
      if (at_node) {
        maxima[g] = 1.0;
        return;
      }
      double s = 0.0;
      for (int i = 0; i <= k; ++i)
        s += std::abs(w[static_cast<std::size_t>(i)] / (t - seq.point(i)));
      maxima[g] = std::abs(prod) * s;
    });
    double m = 1.0;
    for (double v : maxima) m = std::max(m, v);
    out[static_cast<std::size_t>(k)] = m;
  }
  return out;
}

/// Sparse polynomial interpolant in the hierarchical Newton form
///   I_Lambda u = sum_nu alpha_nu H_nu,  H_nu(y) = prod_j h_{nu_j}(y_j).
class SparseInterpolant {
public:
  SparseInterpolant(const UnivariateSequence& seq, int y_dims, IndexSet lambda,
                    std::vector<Vector> alphas, long solves)
      : seq_(&seq), y_dims_(y_dims), lambda_(std::move(lambda)), alphas_(std::move(alphas)),
        solves_(solves) {
    if (static_cast<int>(alphas_.size()) != lambda_.size())
      throw malformed_input("SparseInterpolant: one coefficient per index");
    max_deg_.assign(static_cast<std::size_t>(y_dims_) + 1, 0);
    for (const auto& nu : lambda_.members())
      for (const auto& [p, e] : nu.entries())
        max_deg_[static_cast<std::size_t>(p)] = std::max(max_deg_[static_cast<std::size_t>(p)], e);
  }

  const IndexSet& index_set() const { return lambda_; }
  const UnivariateSequence& sequence() const { return *seq_; }
  int y_dims() const { return y_dims_; }
  long solves() const { return solves_; }
  const Vector& coefficient(int i) const { return alphas_[static_cast<std::size_t>(i)]; }
  const Vector& coefficient(const MultiIndex& nu) const {
    int i = lambda_.position_of(nu);
    if (i < 0) throw malformed_input("SparseInterpolant: " + nu.str() + " not in the set");
    return alphas_[static_cast<std::size_t>(i)];
  }

  /// The grid point y_nu = (t_{nu_j})_j, padded with t_0 beyond the support.
  std::vector<double> grid_point(const MultiIndex& nu) const {
    std::vector<double> y(static_cast<std::size_t>(y_dims_), seq_->point(0));
    for (const auto& [p, e] : nu.entries()) y[static_cast<std::size_t>(p) - 1] = seq_->point(e);
    return y;
  }

  Vector evaluate(const std::vector<double>& y) const { return evaluate_prefix(lambda_.size(), y); }

  /// Partial Newton sum over the first `count` members; valid because the
  /// hierarchical coefficients are intrinsic to their indices.
  Vector evaluate_prefix(int count, const std::vector<double>& y) const {
    if (count < 0 || count > lambda_.size())
      throw malformed_input("SparseInterpolant: invalid prefix length");
    if (static_cast<int>(y.size()) != y_dims_)
      throw malformed_input("SparseInterpolant::evaluate: wrong parameter dimension");
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(y_dims_) + 1);
    for (int j = 1; j <= y_dims_; ++j)
      rows[static_cast<std::size_t>(j)] =
          seq_->hierarchical_row(max_deg_[static_cast<std::size_t>(j)], y[static_cast<std::size_t>(j) - 1]);
    Vector out = Vector::Zero(alphas_.empty() ? 0 : alphas_.front().size());
    for (int i = 0; i < count; ++i) {
      double h = 1.0;
      for (const auto& [p, e] : lambda_.at(i).entries())
        h *= rows[static_cast<std::size_t>(p)][static_cast<std::size_t>(e)];
      if (h != 0.0) out += h * alphas_[static_cast<std::size_t>(i)];
    }
    return out;
  }

private:
  const UnivariateSequence* seq_;
  int y_dims_;
  IndexSet lambda_;
  std::vector<Vector> alphas_;
  std::vector<int> max_deg_;
  long solves_ = 0;
};

/// Newton coefficients for prescribed values on the grid of a downward
/// closed set: alpha_nu = value(y_nu) - I_partial(y_nu) along the insertion
/// order.  No solver involved.
inline SparseInterpolant interpolate_values(const IndexSet& lambda, const UnivariateSequence& seq,
                                            int y_dims, const std::vector<Vector>& values,
                                            long solver_calls = 0) {
  if (static_cast<int>(values.size()) != lambda.size())
    throw malformed_input("interpolate_values: one value per index");
  if (lambda.max_active_dim() > y_dims)
    throw invalid_cap("interpolate_values: set active dims exceed parameter dims");
  for (const auto& nu : lambda.members())
    for (const auto& [p, e] : nu.entries())
      if (e > seq.max_degree())
        throw sequence_too_short("interpolate_values: exponent beyond the point sequence");

  std::vector<Vector> alphas;
  alphas.reserve(values.size());
  IndexSet grown;
  for (int i = 0; i < lambda.size(); ++i) {
    SparseInterpolant current(seq, y_dims, grown, alphas, 0);
    std::vector<double> y(static_cast<std::size_t>(y_dims), seq.point(0));
    for (const auto& [p, e] : lambda.at(i).entries())
      y[static_cast<std::size_t>(p) - 1] = seq.point(e);
    Vector a = values[static_cast<std::size_t>(i)];
    if (i > 0) a -= current.evaluate(y);
    alphas.push_back(std::move(a));
    grown.insert(lambda.at(i));
  }
  return SparseInterpolant(seq, y_dims, grown, std::move(alphas), solver_calls);
}

/// Interpolate the map u on the grid of Lambda: exactly #(Lambda) solver
/// calls, run as a parallel map, then the Newton update.  The interpolation
/// property is verified at every grid point to 1e-10 relative.
inline SparseInterpolant interpolate(const ParametricMap& u, int y_dims, const IndexSet& lambda,
                                     const UnivariateSequence& seq) {
  if (lambda.max_active_dim() > y_dims)
    throw invalid_cap("interpolate: set active dims exceed parameter dims");
  std::vector<Vector> values(static_cast<std::size_t>(lambda.size()));
  parallel_for(values.size(), [&](std::size_t i) {
    std::vector<double> y(static_cast<std::size_t>(y_dims), seq.point(0));
    for (const auto& [p, e] : lambda.at(static_cast<int>(i)).entries()) {
      if (e > seq.max_degree()) return;  // reported below
      y[static_cast<std::size_t>(p) - 1] = seq.point(e);
    }
    values[i] = u(y);
  });
  for (const auto& nu : lambda.members())
    for (const auto& [p, e] : nu.entries())
      if (e > seq.max_degree())
        throw sequence_too_short("interpolate: exponent beyond the point sequence");

  SparseInterpolant out = interpolate_values(lambda, seq, y_dims, values, lambda.size());

  double scale = 0.0;
  for (const auto& v : values) scale = std::max(scale, v.lpNorm<Eigen::Infinity>());
  for (int i = 0; i < lambda.size(); ++i) {
    Vector diff = out.evaluate(out.grid_point(lambda.at(i))) - values[static_cast<std::size_t>(i)];
    if (diff.lpNorm<Eigen::Infinity>() > 1e-10 * std::max(scale, 1e-30))
      throw numerical_error("interpolate: interpolation property violated at " +
                            lambda.at(i).str());
  }
  return out;
}

enum class InterpWeight { SupNorm, MeanSquare };
enum class InterpSchedule { Alternating, PureGreedy };

struct AdaptiveInterpStep {
  int n = 0;                 // cardinality after the step
  MultiIndex added;
  double weighted_norm = 0;  // c_nu ||alpha_nu||_V of the added index
  bool by_weight = false;    // even step (argmax) or odd step (earliest seen)
  long solves = 0;           // cumulative truth solves including the frontier
};

struct AdaptiveInterpResult {
  SparseInterpolant interpolant;
  std::vector<AdaptiveInterpStep> steps;
  std::vector<std::vector<MultiIndex>> lambda_snapshots;
};

/// Alternating greedy growth of an anchored downward-closed set, one index
/// per step: even steps take the largest weighted hierarchical coefficient
/// on the frontier, odd steps the frontier index seen earliest.  Frontier
/// coefficients count as truth solves; they are intrinsic to nu and cached.
inline AdaptiveInterpResult adaptive_interpolate(
    const ParametricMap& u, int y_dims, const std::function<double(const Vector&)>& norm,
    int n_max, const UnivariateSequence& seq, InterpWeight weight = InterpWeight::SupNorm,
    InterpSchedule schedule = InterpSchedule::Alternating) {
  if (n_max < 1) throw malformed_input("adaptive_interpolate: n_max >= 1");

  std::vector<double> c1d(static_cast<std::size_t>(seq.max_degree()) + 1, 1.0);
  for (int k = 0; k <= seq.max_degree(); ++k)
    c1d[static_cast<std::size_t>(k)] =
        weight == InterpWeight::SupNorm ? seq.hierarchical_sup(k) : seq.hierarchical_l2(k);
  auto weight_of = [&](const MultiIndex& nu) {
    double c = 1.0;
    for (const auto& [p, e] : nu.entries()) c *= c1d[static_cast<std::size_t>(e)];
    return c;
  };

  IndexSet lambda = IndexSet::singleton_zero();
  std::vector<Vector> alphas;
  MultiIndexMap<Vector> alpha_cache;
  MultiIndexMap<int> first_seen;
  long solves = 0;

  auto y_of = [&](const MultiIndex& nu) {
    std::vector<double> y(static_cast<std::size_t>(y_dims), seq.point(0));
    for (const auto& [p, e] : nu.entries()) {
      if (e > seq.max_degree()) throw sequence_too_short("adaptive_interpolate: sequence too short");
      y[static_cast<std::size_t>(p) - 1] = seq.point(e);
    }
    return y;
  };

  Vector u0 = u(y_of(MultiIndex()));
  ++solves;
  alphas.push_back(u0);
  alpha_cache.emplace(MultiIndex(), u0);

  AdaptiveInterpResult result{SparseInterpolant(seq, y_dims, lambda, alphas, solves), {}, {}};
  result.lambda_snapshots.push_back(lambda.members());

  for (int n = 2; n <= n_max; ++n) {
    // anchored frontier, capped at the model's parameter dimension
    std::vector<MultiIndex> frontier =
        neighbors(lambda, std::min(lambda.max_active_dim() + 1, y_dims));
    SparseInterpolant current(seq, y_dims, lambda, alphas, 0);

    std::vector<MultiIndex> fresh;
    for (const auto& nu : frontier) {
      if (!first_seen.count(nu)) first_seen.emplace(nu, n - 1);
      if (!alpha_cache.count(nu)) fresh.push_back(nu);
    }
    std::vector<Vector> fresh_alpha(fresh.size());
    parallel_for(fresh.size(), [&](std::size_t i) {
      std::vector<double> y = y_of(fresh[i]);
      fresh_alpha[i] = u(y) - current.evaluate(y);
    });
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      alpha_cache.emplace(fresh[i], std::move(fresh_alpha[i]));
      ++solves;
    }

    bool by_weight = schedule == InterpSchedule::PureGreedy || n % 2 == 0;
    const MultiIndex* pick = nullptr;
    double pick_val = 0.0;
    if (by_weight) {
      for (const auto& nu : frontier) {
        double v = weight_of(nu) * norm(alpha_cache.at(nu));
        if (!pick || v > pick_val || (v == pick_val && nu < *pick)) {
          pick = &nu;
          pick_val = v;
        }
      }
    } else {
      int best_seen = std::numeric_limits<int>::max();
      for (const auto& nu : frontier) {
        int seen = first_seen.at(nu);
        if (!pick || seen < best_seen || (seen == best_seen && nu < *pick)) {
          pick = &nu;
          best_seen = seen;
          pick_val = weight_of(nu) * norm(alpha_cache.at(nu));
        }
      }
    }
    assert(pick != nullptr);
    lambda.insert(*pick);
    alphas.push_back(alpha_cache.at(*pick));

    AdaptiveInterpStep step;
    step.n = lambda.size();
    step.added = *pick;
    step.weighted_norm = pick_val;
    step.by_weight = by_weight;
    step.solves = solves;
    result.steps.push_back(step);
    result.lambda_snapshots.push_back(lambda.members());
  }
  result.interpolant = SparseInterpolant(seq, y_dims, lambda, alphas, solves);
  return result;
}

/// Empirical multivariate Lebesgue constant: max over random probe points of
/// the l1 norm of the Lagrange cardinal row, computed through the Newton
/// coefficients of unit data.
inline double lebesgue_probe(const IndexSet& lambda, const UnivariateSequence& seq, int y_dims,
                             int n_probe, unsigned seed) {
  const int n = lambda.size();
  std::vector<std::vector<Vector>> cardinal_alphas;
  for (int g = 0; g < n; ++g) {
    std::vector<Vector> values(static_cast<std::size_t>(n), Vector::Zero(1));
    values[static_cast<std::size_t>(g)] = Vector::Ones(1);
    auto interp = interpolate_values(lambda, seq, y_dims, values);
    std::vector<Vector> a;
    for (int i = 0; i < n; ++i) a.push_back(interp.coefficient(i));
    cardinal_alphas.push_back(std::move(a));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double worst = 1.0;
  std::vector<int> max_deg(static_cast<std::size_t>(y_dims) + 1, 0);
  for (const auto& nu : lambda.members())
    for (const auto& [p, e] : nu.entries())
      max_deg[static_cast<std::size_t>(p)] = std::max(max_deg[static_cast<std::size_t>(p)], e);
  for (int t = 0; t < n_probe; ++t) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(y_dims) + 1);
    std::vector<double> y(static_cast<std::size_t>(y_dims));
    for (int j = 1; j <= y_dims; ++j) {
      y[static_cast<std::size_t>(j) - 1] = dist(rng);
      rows[static_cast<std::size_t>(j)] =
          seq.hierarchical_row(max_deg[static_cast<std::size_t>(j)], y[static_cast<std::size_t>(j) - 1]);
    }
    std::vector<double> h(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      double v = 1.0;
      for (const auto& [p, e] : lambda.at(i).entries())
        v *= rows[static_cast<std::size_t>(p)][static_cast<std::size_t>(e)];
      h[static_cast<std::size_t>(i)] = v;
    }
    double s = 0.0;
    for (int g = 0; g < n; ++g) {
      double c = 0.0;
      for (int i = 0; i < n; ++i) c += cardinal_alphas[static_cast<std::size_t>(g)][static_cast<std::size_t>(i)][0] * h[static_cast<std::size_t>(i)];
      s += std::abs(c);
    }
    worst = std::max(worst, s);
  }
  return worst;
}

}  // namespace pss
