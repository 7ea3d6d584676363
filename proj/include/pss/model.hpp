#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "pss/errors.hpp"
#include "pss/tridiagonal.hpp"

namespace pss {

/// Uniform P1 mesh on (0,1) with homogeneous Dirichlet ends and midpoint
/// quadrature.  N_h interior nodes, N_h + 1 elements.
struct FemSpace {
  int n_interior = 0;
  double h = 0.0;

  explicit FemSpace(int interior_nodes) : n_interior(interior_nodes) {
    if (interior_nodes < 3) throw malformed_input("FemSpace: need at least 3 interior nodes");
    h = 1.0 / (interior_nodes + 1);
  }

  int n_elements() const { return n_interior + 1; }
  double node(int i) const { return (i + 1) * h; }            // interior node i, 0-based
  double midpoint(int e) const { return (e + 0.5) * h; }      // element e, 0-based
};

enum class PsiKind { DisjointIndicator, GlobalSmooth };

/// The affine diffusion family abar + sum_j y_j psi_j, sampled at element
/// midpoints.  Construction reorders the psi_j by non-increasing sup norm
/// and verifies uniform ellipticity.
class AffineCoefficientFamily {
public:
  AffineCoefficientFamily(const FemSpace& space, std::vector<double> abar,
                          std::vector<std::vector<double>> psis, std::vector<PsiKind> kinds)
      : abar_(std::move(abar)), psis_(std::move(psis)), kinds_(std::move(kinds)) {
    const std::size_t ne = static_cast<std::size_t>(space.n_elements());
    if (abar_.size() != ne) throw malformed_input("AffineCoefficientFamily: abar sample size");
    for (const auto& psi : psis_)
      if (psi.size() != ne) throw malformed_input("AffineCoefficientFamily: psi sample size");
    if (kinds_.size() != psis_.size())
      throw malformed_input("AffineCoefficientFamily: one kind tag per psi");

    sup_norms_.resize(psis_.size());
    for (std::size_t j = 0; j < psis_.size(); ++j) {
      double m = 0.0;
      for (double v : psis_[j]) m = std::max(m, std::abs(v));
      sup_norms_[j] = m;
    }
    std::vector<std::size_t> order(psis_.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sup_norms_[a] > sup_norms_[b]; });
    apply_order(order);

    uea_constant_ = compute_uea();
    if (!(uea_constant_ > 0.0))
      throw malformed_input("AffineCoefficientFamily: uniform ellipticity fails, r = " +
                            std::to_string(uea_constant_));
    abar_min_ = *std::min_element(abar_.begin(), abar_.end());
    abar_max_ = *std::max_element(abar_.begin(), abar_.end());
  }

  int dims() const { return static_cast<int>(psis_.size()); }
  const std::vector<double>& abar() const { return abar_; }
  const std::vector<double>& psi(int j) const { return psis_[static_cast<std::size_t>(j)]; }
  PsiKind kind(int j) const { return kinds_[static_cast<std::size_t>(j)]; }
  double psi_sup(int j) const { return sup_norms_[static_cast<std::size_t>(j)]; }
  const std::vector<double>& psi_sups() const { return sup_norms_; }
  double uea_constant() const { return uea_constant_; }
  double abar_min() const { return abar_min_; }
  double abar_max() const { return abar_max_; }

  /// For models that truncate an infinite family: an upper bound on
  /// || sum_{j > dims} |psi_j| ||_inf of the discarded terms.
  void set_truncated_tail(double bound) { truncated_tail_ = std::max(0.0, bound); }
  double truncated_tail() const { return truncated_tail_; }

  /// Grid sup of sum_{j>J} |psi_j| / abar plus the (scaled) mass the model
  /// truncation itself discarded; this is the tail entering SPARSE.
  double scaled_tail_sup(int J) const {
    double m = 0.0;
    for (std::size_t x = 0; x < abar_.size(); ++x) {
      double s = 0.0;
      for (std::size_t j = static_cast<std::size_t>(J); j < psis_.size(); ++j)
        s += std::abs(psis_[j][x]);
      m = std::max(m, s / abar_[x]);
    }
    return m + truncated_tail_ / abar_min_;
  }

private:
  double compute_uea() const {
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < abar_.size(); ++x) {
      double s = 0.0;
      for (const auto& psi : psis_) s += std::abs(psi[x]);
      r = std::min(r, abar_[x] - s);
    }
    return r;
  }

  void apply_order(const std::vector<std::size_t>& order) {
    std::vector<std::vector<double>> psis(psis_.size());
    std::vector<PsiKind> kinds(kinds_.size());
    std::vector<double> sups(sup_norms_.size());
    for (std::size_t j = 0; j < order.size(); ++j) {
      psis[j] = std::move(psis_[order[j]]);
      kinds[j] = kinds_[order[j]];
      sups[j] = sup_norms_[order[j]];
    }
    psis_ = std::move(psis);
    kinds_ = std::move(kinds);
    sup_norms_ = std::move(sups);
  }

  std::vector<double> abar_;
  std::vector<std::vector<double>> psis_;
  std::vector<PsiKind> kinds_;
  std::vector<double> sup_norms_;
  double uea_constant_ = 0.0, abar_min_ = 0.0, abar_max_ = 0.0;
  double truncated_tail_ = 0.0;
};

/// min_x ( abar(x) - sum_j |psi_j(x)| ), evaluated on the quadrature grid.
/// Callers reject the model when the result is <= 0; the family constructor
/// already does so, so this exists for probing candidate coefficients.
inline double check_uea(const std::vector<double>& abar,
                        const std::vector<std::vector<double>>& psis) {
  double r = std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < abar.size(); ++x) {
    double s = 0.0;
    for (const auto& psi : psis) s += std::abs(psi[x]);
    r = std::min(r, abar[x] - s);
  }
  return r;
}

using FieldVector = Vector;

/// Assembled forms of the parametric problem: Bbar (factorized once), the
/// B_j, their absolute-value variants |B_j|, the a=1 stiffness realizing the
/// V-norm, and the load.
class StiffnessSet {
public:
  StiffnessSet(FemSpace space, AffineCoefficientFamily family, const Vector& load)
      : space_(space), family_(std::move(family)) {
    bbar_ = assemble_coefficient(family_.abar());
    bbar_.factorize();
    std::vector<double> ones(static_cast<std::size_t>(space_.n_elements()), 1.0);
    laplace_ = assemble_coefficient(ones);
    laplace_.factorize();
    for (int j = 0; j < family_.dims(); ++j) {
      bjs_.push_back(assemble_coefficient(family_.psi(j)));
      std::vector<double> abs_psi = family_.psi(j);
      for (double& v : abs_psi) v = std::abs(v);
      abs_bjs_.push_back(assemble_coefficient(abs_psi));
    }
    if (load.size() != space_.n_interior) throw malformed_input("StiffnessSet: load size");
    f_ = load;
  }

  static Vector constant_load(const FemSpace& space, double value) {
    return Vector::Constant(space.n_interior, value * space.h);
  }

  const FemSpace& space() const { return space_; }
  const AffineCoefficientFamily& family() const { return family_; }
  const SymTridiagonal& bbar() const { return bbar_; }
  const SymTridiagonal& bj(int j) const { return bjs_[static_cast<std::size_t>(j)]; }
  const SymTridiagonal& abs_bj(int j) const { return abs_bjs_[static_cast<std::size_t>(j)]; }
  const SymTridiagonal& laplace() const { return laplace_; }
  const Vector& load() const { return f_; }
  int dims() const { return family_.dims(); }

  /// u_h(y): solves (Bbar + sum y_j B_j) U = F.  |y_j| <= 1 required.
  FieldVector solve(const std::vector<double>& y) const {
    if (static_cast<int>(y.size()) > dims())
      throw malformed_input("StiffnessSet::solve: more parameters than model dimensions");
    for (double v : y)
      if (!(std::abs(v) <= 1.0 + 1e-14))
        throw malformed_input("StiffnessSet::solve: parameter outside [-1,1]");
    SymTridiagonal b = bbar_;
    for (std::size_t j = 0; j < y.size(); ++j)
      if (y[j] != 0.0) b.axpy(y[j], bjs_[j]);
    try {
      b.factorize();
    } catch (const numerical_error&) {
      throw numerical_error("StiffnessSet::solve: indefinite parametric system");
    }
    FieldVector u = b.solve(f_);
    assert((b.apply(u) - f_).norm() <= 1e-12 * std::max(1.0, f_.norm()));
    return u;
  }

  FieldVector solve(const Vector& y) const {
    return solve(std::vector<double>(y.data(), y.data() + y.size()));
  }

  /// One back-substitution against the shared Bbar factorization.
  FieldVector solve_bbar(const Vector& rhs) const { return bbar_.solve(rhs); }

  /// ||v||_V = ||v'||_{L2}
  double v_norm(const FieldVector& v) const { return std::sqrt(std::max(0.0, laplace_.quadratic(v, v))); }
  /// ||v||_abar
  double abar_norm(const FieldVector& v) const { return std::sqrt(std::max(0.0, bbar_.quadratic(v, v))); }

  double v_inner(const FieldVector& u, const FieldVector& v) const { return laplace_.quadratic(u, v); }

  /// Discrete H^-1 norm of the load: sqrt(F^T L^{-1} F).
  double load_dual_norm() const {
    Vector z = laplace_.solve(f_);
    return std::sqrt(std::max(0.0, f_.dot(z)));
  }

private:
  SymTridiagonal assemble_coefficient(const std::vector<double>& c) const {
    const int n = space_.n_interior;
    const double h = space_.h;
    Vector d(n), e(std::max(0, n - 1));
    for (int i = 0; i < n; ++i) {
      d[i] = (c[static_cast<std::size_t>(i)] + c[static_cast<std::size_t>(i) + 1]) / h;
      if (i + 1 < n) e[i] = -c[static_cast<std::size_t>(i) + 1] / h;
    }
    return SymTridiagonal(std::move(d), std::move(e));
  }

  FemSpace space_;
  AffineCoefficientFamily family_;
  SymTridiagonal bbar_, laplace_;
  std::vector<SymTridiagonal> bjs_, abs_bjs_;
  Vector f_;
};

// ---------------------------------------------------------------------------
// Built-in coefficient families
// ---------------------------------------------------------------------------

/// abar = 1, psi_j = theta_j * indicator of the j-th interval of a uniform
/// partition of (0,1) into d pieces.  The mesh must align with the partition.
inline AffineCoefficientFamily disjoint_inclusions(const FemSpace& space, int d,
                                                   const std::vector<double>& thetas) {
  if (d < 1 || static_cast<int>(thetas.size()) != d)
    throw malformed_input("disjoint_inclusions: need one theta per subdomain");
  if (space.n_elements() % d != 0)
    throw malformed_input("disjoint_inclusions: mesh does not align with the partition");
  const std::size_t ne = static_cast<std::size_t>(space.n_elements());
  std::vector<double> abar(ne, 1.0);
  std::vector<std::vector<double>> psis(static_cast<std::size_t>(d),
                                        std::vector<double>(ne, 0.0));
  for (std::size_t e = 0; e < ne; ++e) {
    int j = std::min(d - 1, static_cast<int>(space.midpoint(static_cast<int>(e)) * d));
    psis[static_cast<std::size_t>(j)][e] = thetas[static_cast<std::size_t>(j)];
  }
  std::vector<PsiKind> kinds(static_cast<std::size_t>(d), PsiKind::DisjointIndicator);
  return AffineCoefficientFamily(space, std::move(abar), std::move(psis), std::move(kinds));
}

inline AffineCoefficientFamily disjoint_inclusions(const FemSpace& space, int d, double theta) {
  return disjoint_inclusions(space, d, std::vector<double>(static_cast<std::size_t>(d), theta));
}

/// abar = 1, psi_j = c j^{-beta} sin(j pi x), the model-side truncation of
/// the full series over j >= 1.  The amplitude can be given directly or
/// derived from a target ellipticity constant through the crude bound
/// sum_j |psi_j| <= c sum_j j^{-beta}; the discarded tail mass is recorded
/// for the SPARSE tail checks.
inline AffineCoefficientFamily smooth_family_with_amplitude(const FemSpace& space, int terms,
                                                            double beta, double c) {
  if (terms < 1) throw malformed_input("smooth_family: need at least one term");
  if (!(beta > 1.0)) throw malformed_input("smooth_family: beta must exceed 1");
  if (!(c > 0.0)) throw malformed_input("smooth_family: amplitude must be positive");
  const double zeta_tail = std::pow(terms, 1.0 - beta) / (beta - 1.0);
  const std::size_t ne = static_cast<std::size_t>(space.n_elements());
  std::vector<double> abar(ne, 1.0);
  std::vector<std::vector<double>> psis;
  const double pi = 3.14159265358979323846;
  for (int j = 1; j <= terms; ++j) {
    std::vector<double> psi(ne);
    for (std::size_t e = 0; e < ne; ++e)
      psi[e] = c * std::pow(j, -beta) * std::sin(j * pi * space.midpoint(static_cast<int>(e)));
    psis.push_back(std::move(psi));
  }
  std::vector<PsiKind> kinds(static_cast<std::size_t>(terms), PsiKind::GlobalSmooth);
  AffineCoefficientFamily family(space, std::move(abar), std::move(psis), std::move(kinds));
  family.set_truncated_tail(c * zeta_tail);
  return family;
}

inline AffineCoefficientFamily smooth_family(const FemSpace& space, int terms, double beta,
                                             double r_target) {
  if (!(r_target > 0.0 && r_target < 1.0)) throw malformed_input("smooth_family: r_target in (0,1)");
  if (!(beta > 1.0)) throw malformed_input("smooth_family: beta must exceed 1");
  double zeta_head = 0.0;
  for (int j = 1; j <= terms; ++j) zeta_head += std::pow(j, -beta);
  const double zeta_tail = std::pow(terms, 1.0 - beta) / (beta - 1.0);
  return smooth_family_with_amplitude(space, terms, beta,
                                      (1.0 - r_target) / (zeta_head + zeta_tail));
}

/// abar = 1 with the two complementary weights psi_1 = theta*w and
/// psi_2 = theta*(1-w), so that psi_1 + psi_2 = theta everywhere.  The
/// weight ramps linearly from 1 to 0 between the plateaus, making the
/// two-subdomain solution manifold genuinely infinite-rank in 1D while
/// keeping the Neumann-series structure B~_1 + B~_2 = theta*I.
inline AffineCoefficientFamily complementary_pair(const FemSpace& space, double theta,
                                                  double plateau = 0.0) {
  if (!(theta > 0.0 && theta < 1.0)) throw malformed_input("complementary_pair: theta in (0,1)");
  if (!(plateau >= 0.0 && plateau < 0.5))
    throw malformed_input("complementary_pair: plateau fraction in [0, 0.5)");
  const std::size_t ne = static_cast<std::size_t>(space.n_elements());
  std::vector<double> abar(ne, 1.0);
  std::vector<std::vector<double>> psis(2, std::vector<double>(ne, 0.0));
  const double lo = plateau, hi = 1.0 - plateau;
  for (std::size_t e = 0; e < ne; ++e) {
    double x = space.midpoint(static_cast<int>(e));
    double w = x <= lo ? 1.0 : (x >= hi ? 0.0 : (hi - x) / (hi - lo));
    psis[0][e] = theta * w;
    psis[1][e] = theta * (1.0 - w);
  }
  std::vector<PsiKind> kinds(2, PsiKind::GlobalSmooth);
  return AffineCoefficientFamily(space, std::move(abar), std::move(psis), std::move(kinds));
}

}  // namespace pss
