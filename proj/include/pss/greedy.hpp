#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pss/errors.hpp"

namespace pss {

using GramFunction = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

/// A finite family of vectors in a Hilbert space, the discretized stand-in
/// for the compact sets the greedy algorithms run on.
class CompactSet {
public:
  CompactSet(Eigen::MatrixXd members, GramFunction inner, std::string inner_tag = "euclidean")
      : members_(std::move(members)), inner_(std::move(inner)), tag_(std::move(inner_tag)) {}

  static CompactSet euclidean(Eigen::MatrixXd members) {
    return CompactSet(std::move(members),
                      [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b); });
  }

  int size() const { return static_cast<int>(members_.cols()); }
  Eigen::VectorXd member(int i) const { return members_.col(i); }
  const Eigen::MatrixXd& matrix() const { return members_; }
  double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const { return inner_(a, b); }
  double norm(const Eigen::VectorXd& a) const { return std::sqrt(std::max(0.0, inner_(a, a))); }
  const std::string& inner_tag() const { return tag_; }

private:
  Eigen::MatrixXd members_;
  GramFunction inner_;
  std::string tag_;
};

struct GreedyTrace {
  std::vector<int> labels;          // selected member indices, in order
  std::vector<double> sigmas;       // sigma_0 .. sigma_n (exact over the set)
  Eigen::MatrixXd coefficients;     // lower-triangular A, a_{i,j} = <g_i, g*_j>
  Eigen::MatrixXd basis;            // orthonormalized selected vectors (columns)
  double gamma = 1.0;
  int reorthogonalizations = 0;
};

/// Weak greedy selection with parameter gamma on a finite set, driven by
/// exact projection distances: each step accepts the smallest label whose
/// distance reaches gamma times the current maximum (gamma = 1 is the pure
/// greedy with smallest-label ties).  sigma_n is always the exact maximum
/// distance over the whole set.  The surrogate-distance instantiation on
/// the parametric model, with gamma = delta/beta, is rb_offline in
/// reduced_basis.hpp.
inline GreedyTrace weak_greedy(const CompactSet& set, double gamma, int n_max) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw malformed_input("weak_greedy: gamma in (0,1]");
  if (n_max < 1) throw malformed_input("weak_greedy: n_max >= 1");
  const int m = set.size();
  if (m == 0) throw malformed_input("weak_greedy: empty set");

  std::vector<double> dist2(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    double n2 = set.inner(set.member(i), set.member(i));
    dist2[static_cast<std::size_t>(i)] = std::max(0.0, n2);
  }

  GreedyTrace trace;
  trace.gamma = gamma;
  const Eigen::Index dim = set.member(0).size();
  Eigen::MatrixXd q(dim, std::min(n_max, m));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(std::min(n_max, m), std::min(n_max, m));

  int n = 0;
  while (n < n_max && n < m) {
    double worst = 0.0;
    for (int i = 0; i < m; ++i) worst = std::max(worst, dist2[static_cast<std::size_t>(i)]);
    trace.sigmas.push_back(std::sqrt(worst));
    if (!(worst > 0.0) || std::sqrt(worst) <= 1e-14 * (trace.sigmas.front() + 1e-300)) break;

    int pick = -1;
    const double target = gamma * gamma * worst * (1.0 - 1e-12);
    for (int i = 0; i < m; ++i) {
      if (dist2[static_cast<std::size_t>(i)] >= target) {
        pick = i;
        break;
      }
    }

    Eigen::VectorXd g = set.member(pick);
    Eigen::VectorXd residual = g;
    for (int j = 0; j < n; ++j) {
      double c = set.inner(g, q.col(j));
      a(n, j) = c;
      residual -= c * q.col(j);
    }
    // second-pass correction when orthogonality degrades
    double rn = set.norm(residual);
    bool drifted = false;
    for (int j = 0; j < n; ++j)
      if (std::abs(set.inner(residual, q.col(j))) > 1e-8 * (rn + 1e-300)) drifted = true;
    if (drifted) {
      ++trace.reorthogonalizations;
      for (int j = 0; j < n; ++j) {
        double c = set.inner(residual, q.col(j));
        a(n, j) += c;
        residual -= c * q.col(j);
      }
      rn = set.norm(residual);
    }
    // the diagonal entry is dist(g_n, V_n); take it from the same downdated
    // distances the selection and sigma_n use, so that P1 survives rounding
    // near the rank floor where the fresh residual norm drifts at sqrt(eps)
    a(n, n) = std::sqrt(dist2[static_cast<std::size_t>(pick)]);
    if (!(rn > 0.0)) break;
    q.col(n) = residual / rn;

    trace.labels.push_back(pick);
    for (int i = 0; i < m; ++i) {
      double c = set.inner(set.member(i), q.col(n));
      dist2[static_cast<std::size_t>(i)] = std::max(0.0, dist2[static_cast<std::size_t>(i)] - c * c);
    }
    ++n;
  }
  if (static_cast<int>(trace.sigmas.size()) == n) {
    double worst = 0.0;
    for (int i = 0; i < m; ++i) worst = std::max(worst, dist2[static_cast<std::size_t>(i)]);
    trace.sigmas.push_back(std::sqrt(worst));
  }
  while (static_cast<int>(trace.sigmas.size()) <= n_max && n >= m) trace.sigmas.push_back(0.0);

  trace.coefficients = a.topLeftCorner(n, n);
  trace.basis = q.leftCols(n);
  return trace;
}

struct MatrixTraceReport {
  Eigen::MatrixXd a;
  bool p1 = true;
  bool p2 = true;
  double worst_p1_slack = 0.0;  // most negative margin of gamma sigma_n <= |a_nn| <= sigma_n
  double worst_p2_slack = 0.0;  // most negative margin of sum_{j=n..m} a_mj^2 <= sigma_n^2
};

/// P1/P2 verification of a Hilbertian greedy trace, with brute-force partial
/// sums for P2.
inline MatrixTraceReport matrix_trace(const GreedyTrace& trace, double tol = 1e-10) {
  MatrixTraceReport report;
  report.a = trace.coefficients;
  const int n = static_cast<int>(trace.coefficients.rows());
  for (int i = 0; i < n; ++i) {
    double sigma = trace.sigmas[static_cast<std::size_t>(i)];
    double diag = std::abs(trace.coefficients(i, i));
    double low = trace.gamma * sigma - diag;
    double high = diag - sigma;
    double slack = std::max(low, high);  // positive means violated
    report.worst_p1_slack = std::max(report.worst_p1_slack, slack);
    if (slack > tol * (sigma + 1.0)) report.p1 = false;
  }
  for (int row = 0; row < n; ++row) {
    double tail = 0.0;
    for (int j = row; j >= 0; --j) {
      tail += trace.coefficients(row, j) * trace.coefficients(row, j);
      double sigma = trace.sigmas[static_cast<std::size_t>(j)];
      double slack = tail - sigma * sigma;
      report.worst_p2_slack = std::max(report.worst_p2_slack, slack);
      if (slack > tol * (sigma * sigma + 1.0)) report.p2 = false;
    }
  }
  return report;
}

/// Upper estimates of the Kolmogorov widths of a finite set through its POD
/// subspaces (computed from the Gram eigendecomposition): the returned d_n
/// dominate the true widths, which is the safe side for the rate checks.
struct PodWidths {
  std::vector<double> widths;           // d^_0 .. d^_{n_max}
  std::vector<double> singular_values;  // sqrt of the Gram eigenvalues, descending
};

inline PodWidths pod_width_estimates(const CompactSet& set, int n_max) {
  const int m = set.size();
  Eigen::MatrixXd gram(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j) {
      double v = set.inner(set.member(i), set.member(j));
      gram(i, j) = v;
      gram(j, i) = v;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  Eigen::VectorXd lam = eig.eigenvalues().reverse();  // descending
  Eigen::MatrixXd u = eig.eigenvectors().rowwise().reverse();

  PodWidths out;
  for (int k = 0; k < m; ++k) out.singular_values.push_back(std::sqrt(std::max(0.0, lam[k])));
  for (int n = 0; n <= std::min(n_max, m); ++n) {
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
      double d2 = gram(i, i);
      for (int k = 0; k < n; ++k) d2 -= std::max(0.0, lam[k]) * u(i, k) * u(i, k);
      worst = std::max(worst, d2);
    }
    out.widths.push_back(std::sqrt(std::max(0.0, worst)));
  }
  return out;
}

// Synthetic fixtures from the greedy convergence analysis.

/// Diagonal set {x_j e_j} with a monotone sequence x.
inline CompactSet diagonal_set(const std::vector<double>& x) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x.size()),
                                            static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = x[j];
  return CompactSet::euclidean(std::move(m));
}

/// Block-constant diagonal set: x_j = 2^{-ks} for 2^{k-1} <= j <= 2^k - 1,
/// labels j = 1 .. 2^levels - 1.
inline CompactSet block_set(double s, int levels) {
  std::vector<double> x;
  for (int k = 1; k <= levels; ++k) {
    double v = std::pow(2.0, -k * s);
    for (int j = (1 << (k - 1)); j <= (1 << k) - 1; ++j) x.push_back(v);
  }
  return diagonal_set(x);
}

}  // namespace pss
