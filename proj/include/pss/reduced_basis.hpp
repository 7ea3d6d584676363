#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "pss/errors.hpp"
#include "pss/greedy.hpp"
#include "pss/model.hpp"
#include "pss/parallel.hpp"
#include "pss/sampling.hpp"

namespace pss {

/// Snapshot basis with the projected parametric system
///   B_n(y) = Bbar_n + sum_j y_j B_{n,j},  F_n,
/// plus the Cea constants of the underlying model.
class ReducedBasis {
public:
  ReducedBasis(Matrix snapshots, Matrix bbar_n, std::vector<Matrix> bj_n, Vector f_n,
               std::vector<std::vector<double>> parameters, double coercivity, double continuity)
      : g_(std::move(snapshots)), bbar_n_(std::move(bbar_n)), bj_n_(std::move(bj_n)),
        f_n_(std::move(f_n)), parameters_(std::move(parameters)), alpha_(coercivity),
        r_cont_(continuity) {}

  int size() const { return static_cast<int>(g_.cols()); }
  int dims() const { return static_cast<int>(bj_n_.size()); }
  const Matrix& snapshots() const { return g_; }
  const std::vector<std::vector<double>>& parameters() const { return parameters_; }
  double coercivity() const { return alpha_; }
  double continuity() const { return r_cont_; }
  double surrogate_lower() const { return std::pow(alpha_ / r_cont_, 1.5); }  // delta
  double surrogate_upper() const { return r_cont_ / alpha_; }                 // beta

  /// Dense n x n Galerkin solve; returns the reduced coefficients.
  Vector online_coefficients(const std::vector<double>& y, int n = -1) const {
    if (n < 0) n = size();
    if (n < 1 || n > size()) throw malformed_input("ReducedBasis: invalid online dimension");
    if (static_cast<int>(y.size()) > dims())
      throw malformed_input("ReducedBasis: more parameters than model dimensions");
    Matrix b = bbar_n_.topLeftCorner(n, n);
    for (std::size_t j = 0; j < y.size(); ++j)
      if (y[j] != 0.0) b += y[j] * bj_n_[j].topLeftCorner(n, n);
    Eigen::LDLT<Matrix> ldlt(b);
    if (ldlt.info() != Eigen::Success)
      throw numerical_error("ReducedBasis: reduced system not SPD");
    return ldlt.solve(f_n_.head(n));
  }

  /// Lifted reduced solution u_n(y) in the finite element basis.
  Vector online_field(const std::vector<double>& y, int n = -1) const {
    Vector a = online_coefficients(y, n);
    return g_.leftCols(a.size()) * a;
  }

  const Matrix& projected_bbar() const { return bbar_n_; }
  const Matrix& projected_bj(int j) const { return bj_n_[static_cast<std::size_t>(j)]; }
  const Vector& projected_load() const { return f_n_; }

private:
  Matrix g_;
  Matrix bbar_n_;
  std::vector<Matrix> bj_n_;
  Vector f_n_;
  std::vector<std::vector<double>> parameters_;
  double alpha_ = 0.0, r_cont_ = 0.0;
};

/// Residual surrogate d(y, V_k) = || Bbar^{-1} B(y) (U_h(y) - U_k(y)) ||_V,
/// computable without solving for U_h(y): Bbar^{-1} B(y) U_h(y) = Bbar^{-1} F.
/// All inner products among {Bbar^{-1}F, G_i, Bbar^{-1}B_j G_i} are
/// precomputed, so one evaluation costs O((kJ)^2) after the reduced solve.
class ResidualSurrogate {
public:
  ResidualSurrogate(const StiffnessSet& stiff, const Matrix& snapshots)
      : stiff_(&stiff), n_(static_cast<int>(snapshots.cols())), dims_(stiff.dims()) {
    vec0_ = stiff.solve_bbar(stiff.load());
    const int blocks = 1 + n_ + n_ * dims_;
    store_ = Matrix(stiff.space().n_interior, blocks);
    store_.col(0) = vec0_;
    for (int i = 0; i < n_; ++i) store_.col(1 + i) = snapshots.col(i);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < dims_; ++j)
        store_.col(1 + n_ + i * dims_ + j) = stiff.solve_bbar(stiff.bj(j).apply(snapshots.col(i)));
    gram_ = Matrix(blocks, blocks);
    for (int a = 0; a < blocks; ++a)
      for (int b = 0; b <= a; ++b) {
        double v = stiff.v_inner(store_.col(a), store_.col(b));
        gram_(a, b) = v;
        gram_(b, a) = v;
      }
  }

  /// d(y, V_k) for the reduced coefficients alpha of dimension k.
  double evaluate(const std::vector<double>& y, const Vector& alpha) const {
    const int k = static_cast<int>(alpha.size());
    // weights of Bbar^{-1} F - sum_i alpha_i (G_i + sum_j y_j Z_{ij})
    Vector w = Vector::Zero(gram_.rows());
    w[0] = 1.0;
    for (int i = 0; i < k; ++i) {
      w[1 + i] = -alpha[i];
      for (std::size_t j = 0; j < y.size(); ++j)
        w[1 + n_ + i * dims_ + static_cast<int>(j)] = -alpha[i] * y[j];
    }
    double d2 = w.dot(gram_ * w);
    return std::sqrt(std::max(0.0, d2));
  }

private:
  const StiffnessSet* stiff_;
  int n_ = 0, dims_ = 0;
  Vector vec0_;
  Matrix store_;
  Matrix gram_;
};

struct RbOfflineOptions {
  int n_max = 60;
  bool record_exact_sigma = true;
  bool enforce_net = false;  // reject lattices whose transported radius misses eps/3
};

struct RbOfflineResult {
  ReducedBasis basis;
  std::vector<int> selected;            // training labels in selection order
  std::vector<double> surrogate_max;    // max_y d(y, V_k) before each pick
  std::vector<double> sigma_exact;      // exact dist(M_train, V_k), if recorded
  long snapshot_solves = 0;             // truth solves spent on the basis itself
  long verification_solves = 0;         // extra solves for the exact sigma trace
  double covering_radius = 0.0;
  double net_error_bound = 0.0;         // Lipschitz-transported covering radius
  double gamma_realized = 0.0;          // delta / beta
};

/// Numerical weak greedy over a training set, driven by the residual
/// surrogate, stopping at max d(y, V_n) <= eps / (3 beta).  Each selected
/// snapshot costs exactly one truth solve.
inline RbOfflineResult rb_offline(const StiffnessSet& stiff, const TrainingSet& train, double eps,
                                  const RbOfflineOptions& opts = {}) {
  if (!(eps > 0.0)) throw malformed_input("rb_offline: eps must be positive");
  const int m = static_cast<int>(train.points.size());
  if (m == 0) throw malformed_input("rb_offline: empty training set");
  const AffineCoefficientFamily& family = stiff.family();
  const double coercivity = family.uea_constant();
  double continuity = 0.0;
  for (std::size_t e = 0; e < family.abar().size(); ++e) {
    double s = family.abar()[e];
    for (int j = 0; j < family.dims(); ++j) s += std::abs(family.psi(j)[e]);
    continuity = std::max(continuity, s);
  }
  const double beta = continuity / coercivity;
  const double delta = std::pow(coercivity / continuity, 1.5);

  double psi_l1 = 0.0;
  for (int j = 0; j < family.dims(); ++j) psi_l1 += family.psi_sup(j);
  const double lipschitz = 2.0 * stiff.load_dual_norm() / (coercivity * coercivity);
  const double net_bound = lipschitz * psi_l1 * train.covering_radius_linf;
  if (opts.enforce_net && net_bound > eps / 3.0)
    throw configuration_error("rb_offline: training set too coarse for requested eps");

  RbOfflineResult result{ReducedBasis(Matrix(), Matrix(), {}, Vector(), {}, coercivity, continuity),
                         {}, {}, {}, 0, 0, 0.0, 0.0, 0.0};
  result.covering_radius = train.covering_radius_linf;
  result.net_error_bound = net_bound;
  result.gamma_realized = delta / beta;

  // exact sigma trace wants every training solution; these solves are
  // instrumentation, not part of the algorithm
  Matrix truth;
  if (opts.record_exact_sigma) {
    truth = Matrix(stiff.space().n_interior, m);
    parallel_for(static_cast<std::size_t>(m), [&](std::size_t i) {
      truth.col(static_cast<Eigen::Index>(i)) = stiff.solve(train.points[i]);
    });
    result.verification_solves += m;
  }

  Matrix snapshots(stiff.space().n_interior, 0);
  std::vector<std::vector<double>> chosen_params;
  Matrix q(stiff.space().n_interior, 0);  // V-orthonormal basis for exact sigma

  for (int n = 0; n < opts.n_max; ++n) {
    ReducedBasis basis = [&] {
      const int k = static_cast<int>(snapshots.cols());
      Matrix bbar_n(k, k);
      std::vector<Matrix> bj_n(static_cast<std::size_t>(stiff.dims()), Matrix(k, k));
      Vector f_n(k);
      for (int a = 0; a < k; ++a) {
        f_n[a] = snapshots.col(a).dot(stiff.load());
        for (int b = 0; b < k; ++b) {
          bbar_n(a, b) = stiff.bbar().quadratic(snapshots.col(a), snapshots.col(b));
          for (int j = 0; j < stiff.dims(); ++j)
            bj_n[static_cast<std::size_t>(j)](a, b) =
                stiff.bj(j).quadratic(snapshots.col(a), snapshots.col(b));
        }
      }
      return ReducedBasis(snapshots, std::move(bbar_n), std::move(bj_n), std::move(f_n),
                          chosen_params, coercivity, continuity);
    }();
    ResidualSurrogate surrogate(stiff, snapshots);

    std::vector<double> d(static_cast<std::size_t>(m));
    parallel_for(static_cast<std::size_t>(m), [&](std::size_t i) {
      Vector alpha = snapshots.cols() > 0 ? basis.online_coefficients(train.points[i])
                                          : Vector(0);
      d[i] = surrogate.evaluate(train.points[i], alpha);
    });
    double worst = 0.0;
    int pick = 0;
    for (int i = 0; i < m; ++i) {
      if (d[static_cast<std::size_t>(i)] > worst * (1.0 + 1e-12)) {
        worst = d[static_cast<std::size_t>(i)];
        pick = i;
      }
    }
    result.surrogate_max.push_back(worst);

    if (opts.record_exact_sigma) {
      double worst_exact = 0.0;
      for (int i = 0; i < m; ++i) {
        Vector res = truth.col(i);
        for (int c = 0; c < q.cols(); ++c) res -= stiff.v_inner(truth.col(i), q.col(c)) * q.col(c);
        worst_exact = std::max(worst_exact, stiff.v_norm(res));
      }
      result.sigma_exact.push_back(worst_exact);
    }

    if (worst <= eps / (3.0 * beta)) {
      result.basis = std::move(basis);
      return result;
    }

    Vector g = opts.record_exact_sigma ? Vector(truth.col(pick)) : stiff.solve(train.points[pick]);
    ++result.snapshot_solves;

    // a numerically dependent snapshot means the training manifold is
    // exhausted below the surrogate floor; adding it would only degrade
    // the conditioning of the reduced system
    Vector res = g;
    for (int c = 0; c < q.cols(); ++c) res -= stiff.v_inner(g, q.col(c)) * q.col(c);
    for (int c = 0; c < q.cols(); ++c) res -= stiff.v_inner(res, q.col(c)) * q.col(c);
    double rn = stiff.v_norm(res);
    if (!(rn > 1e-12 * (stiff.v_norm(g) + 1e-300))) {
      --result.snapshot_solves;
      result.basis = std::move(basis);
      return result;
    }
    snapshots.conservativeResize(Eigen::NoChange, snapshots.cols() + 1);
    snapshots.col(snapshots.cols() - 1) = g;
    chosen_params.push_back(train.points[static_cast<std::size_t>(pick)]);
    result.selected.push_back(pick);
    q.conservativeResize(Eigen::NoChange, q.cols() + 1);
    q.col(q.cols() - 1) = res / rn;
  }

  // assemble the final basis if n_max was exhausted
  const int k = static_cast<int>(snapshots.cols());
  Matrix bbar_n(k, k);
  std::vector<Matrix> bj_n(static_cast<std::size_t>(stiff.dims()), Matrix(k, k));
  Vector f_n(k);
  for (int a = 0; a < k; ++a) {
    f_n[a] = snapshots.col(a).dot(stiff.load());
    for (int b = 0; b < k; ++b) {
      bbar_n(a, b) = stiff.bbar().quadratic(snapshots.col(a), snapshots.col(b));
      for (int j = 0; j < stiff.dims(); ++j)
        bj_n[static_cast<std::size_t>(j)](a, b) =
            stiff.bj(j).quadratic(snapshots.col(a), snapshots.col(b));
    }
  }
  result.basis = ReducedBasis(snapshots, std::move(bbar_n), std::move(bj_n), std::move(f_n),
                              chosen_params, coercivity, continuity);
  return result;
}

enum class SnapshotInner { Euclidean, VNorm, AbarNorm };

/// Singular values of the snapshot matrix in the chosen inner product, via
/// the Cholesky-weighted SVD (full accuracy down to machine precision).
inline Vector snapshot_widths(const StiffnessSet& stiff,
                              const std::vector<std::vector<double>>& sample,
                              SnapshotInner inner = SnapshotInner::VNorm) {
  if (sample.empty()) throw malformed_input("snapshot_widths: empty sample");
  Matrix s(stiff.space().n_interior, static_cast<Eigen::Index>(sample.size()));
  parallel_for(sample.size(), [&](std::size_t i) {
    s.col(static_cast<Eigen::Index>(i)) = stiff.solve(sample[i]);
  });
  if (inner != SnapshotInner::Euclidean) {
    const SymTridiagonal& m = inner == SnapshotInner::VNorm ? stiff.laplace() : stiff.bbar();
    auto [rd, rs] = m.cholesky_bidiagonal();
    Matrix weighted(s.rows(), s.cols());
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      weighted.row(i) = rd[i] * s.row(i);
      if (i + 1 < s.rows()) weighted.row(i) += rs[i] * s.row(i + 1);
    }
    s = std::move(weighted);
  }
  Eigen::BDCSVD<Matrix> svd(s);
  return svd.singularValues();
}

// ---------------------------------------------------------------------------
// Offline state persistence: JSON manifest plus a raw little-endian double
// blob holding snapshots and projected matrices.
// ---------------------------------------------------------------------------

inline void save_reduced_basis(const ReducedBasis& basis, const std::string& json_path,
                               const std::string& blob_path) {
  std::ofstream blob(blob_path, std::ios::binary);
  if (!blob) throw configuration_error("save_reduced_basis: cannot open " + blob_path);
  auto put = [&](const Matrix& m) {
    blob.write(reinterpret_cast<const char*>(m.data()),
               static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
  };
  put(basis.snapshots());
  put(basis.projected_bbar());
  for (int j = 0; j < basis.dims(); ++j) put(basis.projected_bj(j));
  Matrix f = basis.projected_load();
  put(f);
  blob.close();

  nlohmann::json j;
  j["n"] = basis.size();
  j["n_h"] = basis.snapshots().rows();
  j["dims"] = basis.dims();
  j["coercivity"] = basis.coercivity();
  j["continuity"] = basis.continuity();
  j["parameters"] = basis.parameters();
  j["blob"] = blob_path;
  j["layout"] = "snapshots, bbar_n, bj_n..., f_n (column-major doubles)";
  std::ofstream out(json_path);
  if (!out) throw configuration_error("save_reduced_basis: cannot open " + json_path);
  out << j.dump(2) << "\n";
}

inline ReducedBasis load_reduced_basis(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw configuration_error("load_reduced_basis: cannot open " + json_path);
  nlohmann::json j;
  in >> j;
  const int n = j.at("n").get<int>();
  const int nh = j.at("n_h").get<int>();
  const int dims = j.at("dims").get<int>();
  std::ifstream blob(j.at("blob").get<std::string>(), std::ios::binary);
  if (!blob) throw configuration_error("load_reduced_basis: cannot open blob");
  auto get = [&](Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    blob.read(reinterpret_cast<char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
    if (!blob) throw configuration_error("load_reduced_basis: blob truncated");
    return m;
  };
  Matrix g = get(nh, n);
  Matrix bbar_n = get(n, n);
  std::vector<Matrix> bj_n;
  for (int d = 0; d < dims; ++d) bj_n.push_back(get(n, n));
  Vector f_n = get(n, 1);
  std::vector<std::vector<double>> params = j.at("parameters").get<std::vector<std::vector<double>>>();
  return ReducedBasis(std::move(g), std::move(bbar_n), std::move(bj_n), std::move(f_n),
                      std::move(params), j.at("coercivity").get<double>(),
                      j.at("continuity").get<double>());
}

}  // namespace pss
