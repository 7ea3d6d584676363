#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pss/errors.hpp"

namespace pss {

/// A finitely supported sequence of non-negative integer exponents.
/// Stored sparsely as (position, exponent) pairs with 1-based positions,
/// sorted by position; exponent 0 entries are never stored.
class MultiIndex {
public:
  using Entry = std::pair<int, int>;

  MultiIndex() = default;

  static MultiIndex unit(int position, int exponent = 1) {
    MultiIndex nu;
    if (position < 1) throw malformed_input("MultiIndex: positions are 1-based");
    if (exponent > 0) nu.entries_.emplace_back(position, exponent);
    return nu;
  }

  static MultiIndex from_dense(const std::vector<int>& dense) {
    MultiIndex nu;
    for (std::size_t j = 0; j < dense.size(); ++j) {
      if (dense[j] < 0) throw malformed_input("MultiIndex: negative exponent");
      if (dense[j] > 0) nu.entries_.emplace_back(static_cast<int>(j) + 1, dense[j]);
    }
    return nu;
  }

  const std::vector<Entry>& entries() const { return entries_; }
  bool is_zero() const { return entries_.empty(); }

  int exponent(int position) const {
    for (const auto& [p, e] : entries_)
      if (p == position) return e;
    return 0;
  }

  /// |nu|: sum of all exponents.
  int total_degree() const {
    int s = 0;
    for (const auto& [p, e] : entries_) s += e;
    return s;
  }

  /// #supp(nu)
  int support_size() const { return static_cast<int>(entries_.size()); }

  /// Largest active position, 0 for the null index.
  int max_position() const { return entries_.empty() ? 0 : entries_.back().first; }

  MultiIndex with_increment(int position) const {
    MultiIndex out = *this;
    for (auto& [p, e] : out.entries_) {
      if (p == position) {
        ++e;
        return out;
      }
    }
    auto it = std::lower_bound(out.entries_.begin(), out.entries_.end(), position,
                               [](const Entry& a, int pos) { return a.first < pos; });
    out.entries_.insert(it, {position, 1});
    return out;
  }

  MultiIndex with_decrement(int position) const {
    MultiIndex out = *this;
    for (auto it = out.entries_.begin(); it != out.entries_.end(); ++it) {
      if (it->first == position) {
        if (--it->second == 0) out.entries_.erase(it);
        return out;
      }
    }
    throw malformed_input("MultiIndex: cannot decrement inactive position");
  }

  /// Coordinatewise partial order.
  bool leq(const MultiIndex& other) const {
    for (const auto& [p, e] : entries_)
      if (other.exponent(p) < e) return false;
    return true;
  }

  bool operator==(const MultiIndex& other) const { return entries_ == other.entries_; }
  bool operator!=(const MultiIndex& other) const { return !(*this == other); }

  /// The tie-breaking total order: graded by |nu|, then by largest active
  /// position, then on the dense prefix with earlier-dimension mass first.
  /// Greedy selections sorted this way keep prefixes downward closed.
  bool operator<(const MultiIndex& other) const {
    int da = total_degree(), db = other.total_degree();
    if (da != db) return da < db;
    int ma = max_position(), mb = other.max_position();
    if (ma != mb) return ma < mb;
    for (int j = 1; j <= ma; ++j) {
      int ea = exponent(j), eb = other.exponent(j);
      if (ea != eb) return ea > eb;
    }
    return false;
  }

  std::string str() const {
    if (entries_.empty()) return "0";
    std::string s;
    for (const auto& [p, e] : entries_) {
      if (!s.empty()) s += "+";
      if (e != 1) s += std::to_string(e) + "*";
      s += "e" + std::to_string(p);
    }
    return s;
  }

private:
  std::vector<Entry> entries_;
};

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& nu) const {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& [p, e] : nu.entries()) {
      h = (h ^ static_cast<std::uint64_t>(p)) * 1099511628211ull;
      h = (h ^ static_cast<std::uint64_t>(e)) * 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

template <class T>
using MultiIndexMap = std::unordered_map<MultiIndex, T, MultiIndexHash>;

/// True iff for every nu in the collection and every active j, nu - e_j is
/// also present.  Duplicates are rejected.
inline bool is_downward_closed(const std::vector<MultiIndex>& set) {
  std::unordered_map<MultiIndex, int, MultiIndexHash> seen;
  for (const auto& nu : set) {
    if (++seen[nu] > 1) throw malformed_input("is_downward_closed: duplicate entries");
  }
  for (const auto& nu : set) {
    for (const auto& [p, e] : nu.entries()) {
      if (!seen.count(nu.with_decrement(p))) return false;
    }
  }
  return true;
}

/// Ordered downward-closed collection of multi-indices.  Insertion order is
/// part of the contract: every prefix is itself downward closed, which is
/// what the recursive coefficient computations rely on.
class IndexSet {
public:
  IndexSet() = default;

  /// Insert a new index whose predecessors must already be members.
  void insert(const MultiIndex& nu) {
    if (lookup_.count(nu)) throw malformed_input("IndexSet::insert: duplicate index " + nu.str());
    for (const auto& [p, e] : nu.entries()) {
      if (!lookup_.count(nu.with_decrement(p)))
        throw malformed_input("IndexSet::insert: predecessor of " + nu.str() + " missing");
    }
    lookup_.emplace(nu, members_.size());
    members_.push_back(nu);
    jmax_ = std::max(jmax_, nu.max_position());
  }

  static IndexSet singleton_zero() {
    IndexSet s;
    s.insert(MultiIndex());
    return s;
  }

  /// Build from an arbitrary downward-closed collection; members are sorted
  /// into the total order so that insertion prefixes stay downward closed.
  static IndexSet from_indices(std::vector<MultiIndex> indices) {
    std::sort(indices.begin(), indices.end());
    IndexSet s;
    for (auto& nu : indices) s.insert(nu);
    return s;
  }

  int size() const { return static_cast<int>(members_.size()); }
  bool empty() const { return members_.empty(); }
  const MultiIndex& at(int i) const { return members_[static_cast<std::size_t>(i)]; }
  const std::vector<MultiIndex>& members() const { return members_; }
  bool contains(const MultiIndex& nu) const { return lookup_.count(nu) != 0; }

  int position_of(const MultiIndex& nu) const {
    auto it = lookup_.find(nu);
    return it == lookup_.end() ? -1 : it->second;
  }

  /// j(Lambda): largest active dimension over all members.
  int max_active_dim() const { return jmax_; }

  /// e_j in Lambda and l <= j implies e_l in Lambda.
  bool is_anchored() const {
    int je = 0;
    for (int j = 1; j <= jmax_; ++j)
      if (contains(MultiIndex::unit(j))) je = j;
    for (int l = 1; l <= je; ++l)
      if (!contains(MultiIndex::unit(l))) return false;
    return true;
  }

private:
  std::vector<MultiIndex> members_;
  std::unordered_map<MultiIndex, int, MultiIndexHash> lookup_;
  int jmax_ = 0;
};

/// N(Lambda): indices outside Lambda all of whose predecessors lie in Lambda,
/// restricted to positions <= dim_cap.
inline std::vector<MultiIndex> neighbors(const IndexSet& lambda, int dim_cap) {
  if (dim_cap < lambda.max_active_dim())
    throw invalid_cap("neighbors: dimension cap below the set's active dimension");
  std::set<MultiIndex> candidates;
  for (const auto& nu : lambda.members()) {
    for (int j = 1; j <= dim_cap; ++j) {
      MultiIndex cand = nu.with_increment(j);
      if (!lambda.contains(cand)) candidates.insert(cand);
    }
  }
  std::vector<MultiIndex> out;
  for (const auto& cand : candidates) {
    bool all_in = true;
    for (const auto& [p, e] : cand.entries()) {
      if (!lambda.contains(cand.with_decrement(p))) {
        all_in = false;
        break;
      }
    }
    if (all_in) out.push_back(cand);
  }
  return out;
}

/// M(Lambda): indices outside Lambda with at least one predecessor inside.
inline std::vector<MultiIndex> margin(const IndexSet& lambda, int dim_cap) {
  if (dim_cap < lambda.max_active_dim())
    throw invalid_cap("margin: dimension cap below the set's active dimension");
  std::set<MultiIndex> candidates;
  for (const auto& nu : lambda.members())
    for (int j = 1; j <= dim_cap; ++j) {
      MultiIndex cand = nu.with_increment(j);
      if (!lambda.contains(cand)) candidates.insert(cand);
    }
  return {candidates.begin(), candidates.end()};
}

/// The finite frontier of the a priori construction: neighbors whose active
/// positions do not exceed j(Lambda)+1.  No cap is needed.
inline std::vector<MultiIndex> anchored_neighbors(const IndexSet& lambda) {
  return neighbors(lambda, lambda.max_active_dim() + 1);
}

/// All nu supported on the given dimensions with sum_j lambda_j nu_j <= k.
/// Members come out in the total order, so prefixes are downward closed.
inline IndexSet simplex_set(const std::vector<double>& weights, double k) {
  for (double w : weights)
    if (!(w > 0.0)) throw malformed_input("simplex_set: weights must be positive");
  std::vector<MultiIndex> found;
  std::vector<int> dense(weights.size(), 0);
  const int d = static_cast<int>(weights.size());
  std::function<void(int, double)> rec = [&](int j, double budget) {
    if (j == d) {
      found.push_back(MultiIndex::from_dense(dense));
      return;
    }
    for (int e = 0; e * weights[static_cast<std::size_t>(j)] <= budget + 1e-12; ++e) {
      dense[static_cast<std::size_t>(j)] = e;
      rec(j + 1, budget - e * weights[static_cast<std::size_t>(j)]);
    }
    dense[static_cast<std::size_t>(j)] = 0;
  };
  rec(0, k);
  return IndexSet::from_indices(std::move(found));
}

/// Multi-indices of the finite box {nu : positions <= dim_cap, nu_j <= deg_max}
/// sorted by decreasing monotone majorant  c^_nu := sup_{mu >= nu} |c_mu|
/// (the sup taken over the same box), ties toward the total-order-smaller
/// index so that every prefix of the output is downward closed.
/// Returns (order, majorant values aligned with the order).
inline std::pair<std::vector<MultiIndex>, std::vector<double>> monotone_majorant_order(
    const MultiIndexMap<double>& values, int dim_cap, int deg_max) {
  std::vector<MultiIndex> box;
  std::vector<int> dense(static_cast<std::size_t>(dim_cap), 0);
  std::function<void(int)> rec = [&](int j) {
    if (j == dim_cap) {
      box.push_back(MultiIndex::from_dense(dense));
      return;
    }
    for (int e = 0; e <= deg_max; ++e) {
      dense[static_cast<std::size_t>(j)] = e;
      rec(j + 1);
    }
    dense[static_cast<std::size_t>(j)] = 0;
  };
  rec(0);

  MultiIndexMap<double> majorant;
  majorant.reserve(box.size());
  // sweep by decreasing |nu|: c^_nu = max(|c_nu|, max_j c^_{nu+e_j})
  std::sort(box.begin(), box.end());
  for (auto it = box.rbegin(); it != box.rend(); ++it) {
    const MultiIndex& nu = *it;
    auto vit = values.find(nu);
    if (vit == values.end())
      throw malformed_input("monotone_majorant_order: value missing for " + nu.str());
    double m = std::abs(vit->second);
    for (int j = 1; j <= dim_cap; ++j) {
      if (nu.exponent(j) < deg_max) {
        auto mit = majorant.find(nu.with_increment(j));
        if (mit != majorant.end()) m = std::max(m, mit->second);
      }
    }
    majorant.emplace(nu, m);
  }

  std::sort(box.begin(), box.end(), [&](const MultiIndex& a, const MultiIndex& b) {
    double ma = majorant.at(a), mb = majorant.at(b);
    if (ma != mb) return ma > mb;
    return a < b;
  });
  std::vector<double> vals;
  vals.reserve(box.size());
  for (const auto& nu : box) vals.push_back(majorant.at(nu));
  return {std::move(box), std::move(vals)};
}

struct AprioriStats {
  long surrogate_evaluations = 0;
};

/// Greedy anchored-neighbor expansion: grow from {0} by repeatedly adjoining
/// the frontier index with the largest surrogate value, ties resolved by the
/// total order.  The surrogate is evaluated once per frontier index and the
/// count is checked against the n^2/2 + n budget.
template <class Surrogate>
IndexSet build_apriori_set(const Surrogate& s, int n, AprioriStats* stats = nullptr) {
  if (n < 1) throw malformed_input("build_apriori_set: n must be >= 1");
  IndexSet lambda = IndexSet::singleton_zero();
  MultiIndexMap<double> cache;
  long evals = 0;
  auto value_of = [&](const MultiIndex& nu) {
    auto it = cache.find(nu);
    if (it != cache.end()) return it->second;
    double v = s(nu);
    ++evals;
    // monotone check against already-evaluated predecessors
    for (const auto& [p, e] : nu.entries()) {
      auto pit = cache.find(nu.with_decrement(p));
      if (pit != cache.end() && v > pit->second * (1.0 + 1e-12) + 1e-300)
        throw surrogate_violation("build_apriori_set: surrogate increased from " +
                                  nu.with_decrement(p).str() + " to " + nu.str());
    }
    cache.emplace(nu, v);
    return v;
  };
  value_of(MultiIndex());

  while (lambda.size() < n) {
    std::vector<MultiIndex> frontier = anchored_neighbors(lambda);
    const MultiIndex* best = nullptr;
    double best_val = 0.0;
    for (const auto& nu : frontier) {
      double v = value_of(nu);
      if (!best || v > best_val || (v == best_val && nu < *best)) {
        best = &nu;
        best_val = v;
      }
    }
    assert(best != nullptr);
    lambda.insert(*best);
  }
  long budget = static_cast<long>(n) * n / 2 + n;
  if (evals > budget)
    throw numerical_error("build_apriori_set: surrogate evaluation budget exceeded");
  if (stats) stats->surrogate_evaluations = evals;
  assert(lambda.is_anchored());
  return lambda;
}

}  // namespace pss
