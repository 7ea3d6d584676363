#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "pss/errors.hpp"
#include "pss/model.hpp"
#include "pss/multiindex.hpp"
#include "pss/parallel.hpp"

namespace pss {

/// Ellipticity-derived constants of the adaptive Taylor analysis.
struct BulkState {
  double theta = 0.5;
  double eps = 1e-8;
  double alpha = 0.0;  // amax / (r + amax)
  double gamma = 0.0;  // 1 - r / amax
  double delta = 0.0;  // (amax/r) (1 + alpha gamma / (1 - alpha gamma))

  BulkState(const AffineCoefficientFamily& family, double theta_, double eps_)
      : theta(theta_), eps(eps_) {
    if (!(theta > 0.0 && theta < 1.0)) throw malformed_input("BulkState: theta in (0,1)");
    if (!(eps > 0.0)) throw malformed_input("BulkState: eps must be positive");
    const double r = family.uea_constant(), amax = family.abar_max();
    alpha = amax / (r + amax);
    gamma = 1.0 - r / amax;
    delta = (amax / r) * (1.0 + alpha * gamma / (1.0 - alpha * gamma));
  }
};

/// Recursive Taylor coefficient calculator.  Every coefficient costs one
/// back-substitution against the shared Bbar factorization; predecessors
/// must have been computed first, which any downward-closed insertion order
/// guarantees.
class TaylorCalculator {
public:
  explicit TaylorCalculator(const StiffnessSet& stiff) : stiff_(&stiff) {}

  const StiffnessSet& stiff() const { return *stiff_; }
  long solves() const { return solves_; }
  bool has(const MultiIndex& nu) const { return cache_.count(nu) != 0; }

  const FieldVector& coefficient(const MultiIndex& nu) {
    auto it = cache_.find(nu);
    if (it != cache_.end()) return it->second;
    FieldVector t = stiff_->solve_bbar(right_hand_side(nu));
    ++solves_;
    return cache_.emplace(nu, std::move(t)).first->second;
  }

  /// Coefficients for a batch of indices of equal total degree; within such
  /// a layer the solves are independent and run as a parallel map.
  void compute_layer(const std::vector<MultiIndex>& layer) {
    std::vector<MultiIndex> missing;
    for (const auto& nu : layer)
      if (!cache_.count(nu)) missing.push_back(nu);
    if (missing.empty()) return;
    std::vector<FieldVector> slots(missing.size());
    parallel_for(missing.size(), [&](std::size_t i) {
      slots[i] = stiff_->solve_bbar(right_hand_side(missing[i]));
    });
    for (std::size_t i = 0; i < missing.size(); ++i) {
      cache_.emplace(missing[i], std::move(slots[i]));
      ++solves_;
    }
  }

  /// Coefficients for an arbitrary finite set whose predecessors are cached
  /// or contained in the set itself; processed by increasing degree.
  void compute_graded(std::vector<MultiIndex> indices) {
    std::sort(indices.begin(), indices.end());
    std::size_t i = 0;
    while (i < indices.size()) {
      std::size_t j = i;
      while (j < indices.size() && indices[j].total_degree() == indices[i].total_degree()) ++j;
      compute_layer({indices.begin() + static_cast<long>(i), indices.begin() + static_cast<long>(j)});
      i = j;
    }
  }

  double v_norm(const MultiIndex& nu) { return stiff_->v_norm(coefficient(nu)); }

  /// d_nu = ||t_nu||_abar^2
  double d_value(const MultiIndex& nu) {
    const FieldVector& t = coefficient(nu);
    return stiff_->bbar().quadratic(t, t);
  }

  /// d_{nu,j} = int |psi_j| |grad t_nu|^2,  1-based j
  double d_value_j(const MultiIndex& nu, int j) {
    const FieldVector& t = coefficient(nu);
    return stiff_->abs_bj(j - 1).quadratic(t, t);
  }

private:
  FieldVector right_hand_side(const MultiIndex& nu) const {
    if (nu.is_zero()) return stiff_->load();
    FieldVector rhs = FieldVector::Zero(stiff_->space().n_interior);
    for (const auto& [p, e] : nu.entries()) {
      auto pit = cache_.find(nu.with_decrement(p));
      if (pit == cache_.end())
        throw std::logic_error("TaylorCalculator: predecessor of " + nu.str() +
                               " not computed yet");
      rhs -= stiff_->bj(p - 1).apply(pit->second);
    }
    return rhs;
  }

  const StiffnessSet* stiff_;
  MultiIndexMap<FieldVector> cache_;
  long solves_ = 0;
};

/// Truncated Taylor expansion: index set plus one coefficient vector per
/// member, with cached norms.
class TaylorSurrogate {
public:
  TaylorSurrogate(const StiffnessSet& stiff, IndexSet lambda, std::vector<FieldVector> coeffs)
      : stiff_(&stiff), lambda_(std::move(lambda)), coeffs_(std::move(coeffs)) {
    if (static_cast<int>(coeffs_.size()) != lambda_.size())
      throw malformed_input("TaylorSurrogate: one coefficient per index");
    v_norms_.reserve(coeffs_.size());
    d_values_.reserve(coeffs_.size());
    for (const auto& t : coeffs_) {
      v_norms_.push_back(stiff_->v_norm(t));
      d_values_.push_back(stiff_->bbar().quadratic(t, t));
    }
  }

  const IndexSet& index_set() const { return lambda_; }
  const StiffnessSet& stiff() const { return *stiff_; }
  const FieldVector& coefficient(int i) const { return coeffs_[static_cast<std::size_t>(i)]; }
  const FieldVector& coefficient(const MultiIndex& nu) const {
    int i = lambda_.position_of(nu);
    if (i < 0) throw malformed_input("TaylorSurrogate: " + nu.str() + " not in the set");
    return coeffs_[static_cast<std::size_t>(i)];
  }
  double v_norm(int i) const { return v_norms_[static_cast<std::size_t>(i)]; }
  double d_value(int i) const { return d_values_[static_cast<std::size_t>(i)]; }

  /// sum_{nu in Lambda} t_nu y^nu with one multiply per monomial along the
  /// downward-closed insertion order.
  FieldVector evaluate(const std::vector<double>& y) const { return evaluate_prefix(lambda_.size(), y); }

  /// Partial sum over the first `count` members (every prefix is itself a
  /// downward-closed set, so this is the surrogate of a smaller run).
  FieldVector evaluate_prefix(int count, const std::vector<double>& y) const {
    if (count < 0 || count > lambda_.size())
      throw malformed_input("TaylorSurrogate: invalid prefix length");
    for (double v : y)
      if (!(std::abs(v) <= 1.0 + 1e-14)) throw malformed_input("TaylorSurrogate: y outside cube");
    std::vector<double> monomial(coeffs_.size());
    FieldVector out = FieldVector::Zero(stiff_->space().n_interior);
    for (int i = 0; i < count; ++i) {
      const MultiIndex& nu = lambda_.at(i);
      double m = 1.0;
      if (!nu.is_zero()) {
        int p = nu.entries().front().first;
        int parent = lambda_.position_of(nu.with_decrement(p));
        assert(parent >= 0 && parent < i);
        double yp = p <= static_cast<int>(y.size()) ? y[static_cast<std::size_t>(p) - 1] : 0.0;
        m = monomial[static_cast<std::size_t>(parent)] * yp;
      }
      monomial[static_cast<std::size_t>(i)] = m;
      if (m != 0.0) out += m * coeffs_[static_cast<std::size_t>(i)];
    }
    return out;
  }

  /// (d_nu, d_{nu,1..J})
  std::pair<double, std::vector<double>> quantities_d(const MultiIndex& nu) const {
    const FieldVector& t = coefficient(nu);
    double d = stiff_->bbar().quadratic(t, t);
    std::vector<double> dj(static_cast<std::size_t>(stiff_->dims()));
    for (int j = 0; j < stiff_->dims(); ++j) dj[static_cast<std::size_t>(j)] = stiff_->abs_bj(j).quadratic(t, t);
    return {d, dj};
  }

private:
  const StiffnessSet* stiff_;
  IndexSet lambda_;
  std::vector<FieldVector> coeffs_;
  std::vector<double> v_norms_, d_values_;
};

/// Exactly #(Lambda) back-substitutions against the Bbar factorization.
inline TaylorSurrogate compute_taylor(const StiffnessSet& stiff, const IndexSet& lambda) {
  if (lambda.max_active_dim() > stiff.dims())
    throw invalid_cap("compute_taylor: set active dims exceed model dims");
  TaylorCalculator calc(stiff);
  std::vector<FieldVector> coeffs;
  coeffs.reserve(static_cast<std::size_t>(lambda.size()));
  for (const auto& nu : lambda.members()) coeffs.push_back(calc.coefficient(nu));
  if (calc.solves() != lambda.size())
    throw numerical_error("compute_taylor: back-substitution count mismatch");
  return TaylorSurrogate(stiff, lambda, std::move(coeffs));
}

/// The finite margin M~ of the SPARSE procedure: members of M(Lambda) whose
/// predecessors inside Lambda all sit in dimensions <= J, with J the
/// smallest head size whose scaled psi tail clears the accuracy budget.
/// Guarantees e(M \ M~) <= eps.
struct SparseMargin {
  std::vector<MultiIndex> members;
  int head_dims = 0;  // the chosen J
};

inline SparseMargin sparse_margin(const BulkState& state, TaylorCalculator& calc,
                                  const IndexSet& lambda) {
  const StiffnessSet& stiff = calc.stiff();
  const AffineCoefficientFamily& family = stiff.family();
  double ebar = 0.0;
  for (const auto& nu : lambda.members()) ebar += calc.d_value(nu);
  const double r = family.uea_constant();
  const double threshold =
      (1.0 - state.alpha * state.gamma) * r * state.eps / (state.alpha * ebar);

  int J = 0;
  while (J < family.dims() && family.scaled_tail_sup(J) > threshold) ++J;
  if (family.scaled_tail_sup(J) > threshold)
    throw truncation_insufficient("sparse_margin: model dimension too small for requested eps");

  SparseMargin out;
  out.head_dims = J;
  for (const auto& nu : margin(lambda, stiff.dims())) {
    bool keep = true;
    for (const auto& [p, e] : nu.entries())
      if (lambda.contains(nu.with_decrement(p)) && p > J) keep = false;
    if (keep) out.members.push_back(nu);
  }
  std::sort(out.members.begin(), out.members.end());
  return out;
}

struct BulkStep {
  int step = 0;
  int card_lambda = 0;       // #(Lambda^k) after the step
  int added = 0;             // #(S^{k-1})
  int head_dims = 0;         // J used by SPARSE
  double margin_energy = 0;  // e(M~^{k-1}) before selection
  double sigma_hat = 0;      // brute-force tail of Lambda^k over the reference set
  long solves = 0;           // cumulative truth solves
};

struct BulkTrace {
  std::vector<BulkStep> steps;
  std::vector<std::vector<MultiIndex>> lambda_snapshots;
  IndexSet final_lambda;
  std::vector<FieldVector> coefficients;  // aligned with final_lambda members
  double final_margin_energy = 0.0;
};

/// Brute-force reference for sigma(Lambda): total-degree simplex large
/// enough to contain every visited set; norms are kept, coefficient vectors
/// stream through degree by degree.
class TaylorTailOracle {
public:
  TaylorTailOracle(const StiffnessSet& stiff, int degree) : stiff_(&stiff) { grow(degree); }

  void ensure_contains(const IndexSet& lambda) {
    int need = 0;
    for (const auto& nu : lambda.members()) need = std::max(need, nu.total_degree());
    if (need > degree_) grow(need + 2);
  }

  int degree() const { return degree_; }
  double total_energy() const { return total_; }

  /// sum_{nu in reference \ Lambda} ||t_nu||_V^2
  double tail_energy(const IndexSet& lambda) const {
    double s = 0.0;
    for (const auto& [nu, n2] : norms_)
      if (!lambda.contains(nu)) s += n2;
    return s;
  }

  /// Certified bound on the energy ignored beyond the reference simplex:
  /// the per-dimension product estimate with t = r/2 for disjoint
  /// inclusions, the uniform admissible radius otherwise.
  double neglected_tail_bound() const {
    const AffineCoefficientFamily& family = stiff_->family();
    const double r = family.uea_constant();
    const double t = r / 2.0;
    bool disjoint = true;
    for (int j = 0; j < family.dims(); ++j)
      if (family.kind(j) != PsiKind::DisjointIndicator) disjoint = false;
    double rho_min;
    if (disjoint) {
      rho_min = std::numeric_limits<double>::infinity();
      for (int j = 0; j < family.dims(); ++j)
        rho_min = std::min(rho_min, (family.abar_min() - t) / family.psi_sup(j));
    } else {
      rho_min = (family.abar_max() - t) / (family.abar_max() - r);
    }
    const double q = 1.0 / (rho_min * rho_min);
    if (!(q < 1.0)) return std::numeric_limits<double>::infinity();
    const double c0 = norms_.count(MultiIndex()) ? norms_.at(MultiIndex()) : 1.0;
    const int d = family.dims();
    double bound = 0.0;
    double qk = std::pow(q, degree_ + 1);
    for (int k = degree_ + 1; k < degree_ + 400; ++k) {
      double count = 1.0;  // #{|nu| = k} = C(k+d-1, d-1)
      for (int i = 1; i < d; ++i) count *= static_cast<double>(k + i) / i;
      bound += 1.21 * c0 * count * qk;
      qk *= q;
    }
    return bound;
  }

private:
  void grow(int degree) {
    std::vector<double> ones(static_cast<std::size_t>(stiff_->dims()), 1.0);
    IndexSet ref = simplex_set(ones, degree);
    TaylorCalculator calc(*stiff_);
    norms_.clear();
    total_ = 0.0;
    for (const auto& nu : ref.members()) {
      double n = stiff_->v_norm(calc.coefficient(nu));
      norms_.emplace(nu, n * n);
      total_ += n * n;
    }
    degree_ = degree;
  }

  const StiffnessSet* stiff_;
  MultiIndexMap<double> norms_;
  double total_ = 0.0;
  int degree_ = 0;
};

/// Bulk chasing with eps-accuracy.  Each step computes the finite margin,
/// selects the smallest bulk S by the m_nu ordering with
/// e(S) >= theta e(M~), and stops once e(M~) <= 2 theta eps.
inline BulkTrace bulk_chase_run(const StiffnessSet& stiff, double theta, double eps,
                                TaylorTailOracle* oracle = nullptr, int max_steps = 200) {
  BulkState state(stiff.family(), theta, eps);
  TaylorCalculator calc(stiff);
  IndexSet lambda = IndexSet::singleton_zero();
  calc.coefficient(MultiIndex());

  BulkTrace trace;
  for (int k = 1; k <= max_steps; ++k) {
    SparseMargin mt = sparse_margin(state, calc, lambda);
    calc.compute_graded(mt.members);

    double e_margin = 0.0;
    std::vector<double> energy(mt.members.size());
    for (std::size_t i = 0; i < mt.members.size(); ++i) {
      double n = calc.v_norm(mt.members[i]);
      energy[i] = n * n;
      e_margin += energy[i];
    }

    trace.final_margin_energy = e_margin;
    if (e_margin <= 2.0 * theta * eps) break;

    // m_nu = max{||t_mu|| : mu >= nu, mu in M~}; because the margin of a
    // downward closed set is itself graded-closed within M~ one step at a
    // time, the sup over the cone equals the max over immediate successors,
    // computed by a sweep in decreasing degree
    MultiIndexMap<int> margin_pos;
    for (std::size_t i = 0; i < mt.members.size(); ++i)
      margin_pos.emplace(mt.members[i], static_cast<int>(i));
    std::vector<double> m(mt.members.size());
    const int dims = stiff.dims();
    for (std::size_t r = mt.members.size(); r-- > 0;) {
      double best = std::sqrt(energy[r]);
      for (int j = 1; j <= dims; ++j) {
        auto it = margin_pos.find(mt.members[r].with_increment(j));
        if (it != margin_pos.end()) best = std::max(best, m[static_cast<std::size_t>(it->second)]);
      }
      m[r] = best;
    }
    std::vector<std::size_t> order(mt.members.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (m[a] != m[b]) return m[a] > m[b];
      return mt.members[a] < mt.members[b];
    });
    double captured = 0.0;
    std::vector<MultiIndex> bulk;
    for (std::size_t i : order) {
      bulk.push_back(mt.members[i]);
      captured += energy[i];
      if (captured >= theta * e_margin) break;
    }
    std::sort(bulk.begin(), bulk.end());
    for (const auto& nu : bulk) lambda.insert(nu);

    BulkStep stepinfo;
    stepinfo.step = k;
    stepinfo.card_lambda = lambda.size();
    stepinfo.added = static_cast<int>(bulk.size());
    stepinfo.head_dims = mt.head_dims;
    stepinfo.margin_energy = e_margin;
    stepinfo.solves = calc.solves();
    if (oracle) {
      oracle->ensure_contains(lambda);
      stepinfo.sigma_hat = oracle->tail_energy(lambda);
    }
    trace.steps.push_back(stepinfo);
    trace.lambda_snapshots.push_back(lambda.members());
  }
  for (const auto& nu : lambda.members()) trace.coefficients.push_back(calc.coefficient(nu));
  trace.final_lambda = std::move(lambda);
  return trace;
}

}  // namespace pss
