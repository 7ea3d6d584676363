#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "pss/errors.hpp"

namespace pss {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Symmetric tridiagonal matrix with an LDL^T factorization.
/// This is the only matrix shape the 1D P1 discretization produces.
class SymTridiagonal {
public:
  SymTridiagonal() = default;
  SymTridiagonal(Vector diag, Vector off) : d_(std::move(diag)), e_(std::move(off)) {
    if (e_.size() + 1 != d_.size() && !(d_.size() == 1 && e_.size() == 0))
      throw malformed_input("SymTridiagonal: off-diagonal must have size n-1");
  }

  Eigen::Index size() const { return d_.size(); }
  const Vector& diagonal() const { return d_; }
  const Vector& off_diagonal() const { return e_; }

  Vector apply(const Vector& x) const {
    const Eigen::Index n = d_.size();
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double v = d_[i] * x[i];
      if (i > 0) v += e_[i - 1] * x[i - 1];
      if (i + 1 < n) v += e_[i] * x[i + 1];
      y[i] = v;
    }
    return y;
  }

  /// u^T A v
  double quadratic(const Vector& u, const Vector& v) const {
    const Eigen::Index n = d_.size();
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += d_[i] * u[i] * v[i];
    for (Eigen::Index i = 0; i + 1 < n; ++i) s += e_[i] * (u[i] * v[i + 1] + u[i + 1] * v[i]);
    return s;
  }

  SymTridiagonal& axpy(double a, const SymTridiagonal& other) {
    d_ += a * other.d_;
    e_ += a * other.e_;
    return *this;
  }

  /// LDL^T; throws numerical_error on a non-positive pivot.
  void factorize() {
    const Eigen::Index n = d_.size();
    ld_.resize(n);
    ll_.resize(n > 0 ? n - 1 : 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      double piv = d_[i];
      if (i > 0) piv -= ll_[i - 1] * ll_[i - 1] * ld_[i - 1];
      if (!(piv > 0.0)) throw numerical_error("SymTridiagonal: matrix is not positive definite");
      ld_[i] = piv;
      if (i + 1 < n) ll_[i] = e_[i] / piv;
    }
    factored_ = true;
  }

  bool factored() const { return factored_; }

  Vector solve(const Vector& rhs) const {
    if (!factored_) throw numerical_error("SymTridiagonal::solve before factorize");
    const Eigen::Index n = d_.size();
    Vector x = rhs;
    for (Eigen::Index i = 1; i < n; ++i) x[i] -= ll_[i - 1] * x[i - 1];
    for (Eigen::Index i = 0; i < n; ++i) x[i] /= ld_[i];
    for (Eigen::Index i = n - 2; i >= 0; --i) x[i] -= ll_[i] * x[i + 1];
    return x;
  }

  /// Upper bidiagonal Cholesky factor R with A = R^T R (for weighted SVDs).
  /// Returns pair (main diagonal of R, superdiagonal of R).
  std::pair<Vector, Vector> cholesky_bidiagonal() const {
    const Eigen::Index n = d_.size();
    Vector r(n), s(n > 0 ? n - 1 : 0);
    double prev_s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double piv = d_[i] - prev_s * prev_s;
      if (!(piv > 0.0)) throw numerical_error("SymTridiagonal: Cholesky pivot not positive");
      r[i] = std::sqrt(piv);
      if (i + 1 < n) {
        s[i] = e_[i] / r[i];
        prev_s = s[i];
      }
    }
    return {r, s};
  }

private:
  Vector d_, e_;
  Vector ld_, ll_;
  bool factored_ = false;
};

}  // namespace pss
