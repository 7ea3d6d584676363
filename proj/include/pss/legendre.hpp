#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "pss/errors.hpp"
#include "pss/multiindex.hpp"
#include "pss/tridiagonal.hpp"

namespace pss {

/// (P_k(t), L_k(t)) by the three-term recurrence; L_k = sqrt(2k+1) P_k,
/// P_k normalized by P_k(1) = 1 so that ||P_k||_inf = 1 on [-1,1].
inline std::pair<double, double> legendre_1d(int k, double t) {
  if (k < 0) throw malformed_input("legendre_1d: negative degree");
  double pm = 1.0, p = t;
  if (k == 0) return {1.0, 1.0};
  for (int n = 1; n < k; ++n) {
    double pn = ((2 * n + 1) * t * p - n * pm) / (n + 1);
    pm = p;
    p = pn;
  }
  return {p, std::sqrt(2.0 * k + 1.0) * p};
}

/// All P_0..P_K at t.
inline std::vector<double> legendre_row(int K, double t) {
  std::vector<double> row(static_cast<std::size_t>(K) + 1);
  row[0] = 1.0;
  if (K >= 1) row[1] = t;
  for (int n = 1; n < K; ++n)
    row[static_cast<std::size_t>(n) + 1] =
        ((2 * n + 1) * t * row[static_cast<std::size_t>(n)] - n * row[static_cast<std::size_t>(n) - 1]) /
        (n + 1);
  return row;
}

/// theta(t) = pi t / (2(t-1)), the ellipse factor of the coefficient bounds.
inline double ellipse_factor(double t) {
  if (!(t > 1.0)) throw malformed_input("ellipse_factor: argument must exceed 1");
  return 3.14159265358979323846 * t / (2.0 * (t - 1.0));
}

/// Gauss-Legendre nodes/weights on [-1,1] (Newton on P_n; weights sum to 2).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) throw malformed_input("gauss_legendre: need at least one node");
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < n; ++i) {
    double t = std::cos(pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto row = legendre_row(n, t);
      double p = row[static_cast<std::size_t>(n)];
      double dp = n * (t * p - row[static_cast<std::size_t>(n) - 1]) / (t * t - 1.0);
      double dt = p / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    auto row = legendre_row(n, t);
    double dp = n * (t * row[static_cast<std::size_t>(n)] - row[static_cast<std::size_t>(n) - 1]) /
                (t * t - 1.0);
    x[static_cast<std::size_t>(i)] = t;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  return {x, w};
}

/// Monotone non-increasing, anchored surrogate for the Legendre coefficient
/// bounds, built from the tail-split construction: kappa on the head block,
/// kappa + beta + eps*nu_j/(3 b_j |nu_F|) beyond it, with the head size J
/// chosen so the scaled tail sum drops below one and beta large enough to
/// force monotonicity.  Values are normalized so the null index maps to 1.
class LegendreSurrogate {
public:
  /// psi_norms: the truncated model's non-increasing sup norms; tail_beyond:
  /// the l1 mass of the discarded j > dims terms of the mathematical family.
  LegendreSurrogate(std::vector<double> psi_norms, double eps, double tail_beyond = 0.0)
      : b_(std::move(psi_norms)), eps_(eps) {
    if (!(eps_ > 0.0)) throw malformed_input("LegendreSurrogate: eps must be positive");
    for (std::size_t j = 1; j < b_.size(); ++j)
      if (b_[j] > b_[j - 1] * (1.0 + 1e-12))
        throw malformed_input("LegendreSurrogate: psi norms must be non-increasing");
    double l1 = tail_beyond;
    for (double b : b_) l1 += b;
    if (!(l1 > 0.0)) throw malformed_input("LegendreSurrogate: zero psi norms");
    const double e = 2.718281828459045235;
    // smallest J with sum_{j>J} 2e b_j / eps < 1, the discarded mass included
    double tail = 2.0 * e * tail_beyond / eps_;
    for (double b : b_) tail += 2.0 * e * b / eps_;
    head_ = 0;
    while (head_ < static_cast<int>(b_.size()) && tail >= 1.0) {
      tail -= 2.0 * e * b_[static_cast<std::size_t>(head_)] / eps_;
      ++head_;
    }
    if (tail >= 1.0)
      throw truncation_insufficient(
          "LegendreSurrogate: psi tail never drops below threshold within model dims");
    kappa_ = 1.0 + eps_ / (3.0 * l1);
    eta_ = (1.0 + kappa_) / (2.0 * kappa_);
    beta_ = std::max(2.0 * e, 3.0 * ellipse_factor(kappa_) * e);
  }

  int head_size() const { return head_; }
  double kappa() const { return kappa_; }
  double beta() const { return beta_; }

  double operator()(const MultiIndex& nu) const {
    double nu_f = 0.0;
    for (const auto& [p, k] : nu.entries())
      if (p > head_) nu_f += k;
    double value = 1.0;
    for (const auto& [p, k] : nu.entries()) {
      if (p > static_cast<int>(b_.size()))
        throw malformed_input("LegendreSurrogate: index beyond model dimensions");
      if (p <= head_) {
        value *= std::pow(eta_, k);
      } else {
        double bj = b_[static_cast<std::size_t>(p) - 1];
        double rho = beta_ + eps_ * k / (3.0 * bj * nu_f);
        value *= ellipse_factor(kappa_) * (1.0 + 2.0 * k) * std::pow(rho, -static_cast<double>(k));
      }
    }
    return value;
  }

private:
  std::vector<double> b_;
  double eps_ = 0.0, kappa_ = 0.0, eta_ = 0.0, beta_ = 0.0;
  int head_ = 0;
};

/// Tensor Gauss-Legendre computation of the Legendre coefficients
///   v_nu = int u(y) L_nu(y) dmu(y)
/// over the first `active_dims` parameter dimensions.  The solver is queried
/// once per tensor node; the rule is exact for the polynomial part up to
/// degree 2*nodes_per_dim - 1 in each variable.
struct LegendreCoefficients {
  MultiIndexMap<Vector> v;  // v_nu
  MultiIndexMap<Vector> w;  // w_nu = prod(1+2nu_j)^(1/2) v_nu
  long solves = 0;
};

inline LegendreCoefficients legendre_coeffs_quadrature(
    const std::function<Vector(const std::vector<double>&)>& solver, const IndexSet& lambda,
    int active_dims, int nodes_per_dim) {
  if (active_dims < 1 || active_dims > 4)
    throw malformed_input("legendre_coeffs_quadrature: supports 1..4 active dimensions");
  if (lambda.max_active_dim() > active_dims)
    throw invalid_cap("legendre_coeffs_quadrature: set active dims exceed quadrature dims");
  int max_deg = 0;
  for (const auto& nu : lambda.members())
    for (const auto& [p, e] : nu.entries()) max_deg = std::max(max_deg, e);
  if (nodes_per_dim < max_deg + 1)
    throw malformed_input("legendre_coeffs_quadrature: nodes_per_dim below max degree + 1");
  double total = std::pow(static_cast<double>(nodes_per_dim), active_dims);
  if (total > 1e6) throw configuration_error("legendre_coeffs_quadrature: > 1e6 tensor nodes");

  auto [gx, gw] = gauss_legendre(nodes_per_dim);
  const long n_nodes = static_cast<long>(total + 0.5);

  LegendreCoefficients out;
  std::vector<double> y(static_cast<std::size_t>(active_dims), 0.0);
  std::vector<int> idx(static_cast<std::size_t>(active_dims), 0);
  for (long node = 0; node < n_nodes; ++node) {
    long rem = node;
    double weight = 1.0;
    for (int d = 0; d < active_dims; ++d) {
      idx[static_cast<std::size_t>(d)] = static_cast<int>(rem % nodes_per_dim);
      rem /= nodes_per_dim;
      y[static_cast<std::size_t>(d)] = gx[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])];
      weight *= gw[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])] / 2.0;
    }
    Vector u = solver(y);
    ++out.solves;
    for (const auto& nu : lambda.members()) {
      double lnu = 1.0;
      for (const auto& [p, e] : nu.entries())
        lnu *= legendre_1d(e, y[static_cast<std::size_t>(p) - 1]).second;
      auto it = out.v.find(nu);
      if (it == out.v.end())
        out.v.emplace(nu, weight * lnu * u);
      else
        it->second += weight * lnu * u;
    }
  }
  for (const auto& nu : lambda.members()) {
    double scale = 1.0;
    for (const auto& [p, e] : nu.entries()) scale *= 1.0 + 2.0 * e;
    out.w.emplace(nu, std::sqrt(scale) * out.v.at(nu));
  }
  return out;
}

}  // namespace pss
