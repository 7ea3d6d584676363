#pragma once

#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "pss/errors.hpp"
#include "pss/legendre.hpp"
#include "pss/multiindex.hpp"

namespace pss {

/// Computable monotone surrogates s_nu used to drive a priori set selection.
/// All kinds multiply one factor per active dimension; positions beyond the
/// parameter list evaluate to zero (the model has no such dimension).
class SurrogateWeights {
public:
  enum class Kind { ProductOfRadii, LegendreProduct, Simplex };

  static SurrogateWeights product_of_radii(std::vector<double> rho, double algebraic_exponent = 0.0) {
    for (std::size_t j = 0; j < rho.size(); ++j) {
      if (!(rho[j] >= 1.0)) throw malformed_input("SurrogateWeights: radii must be >= 1");
      if (j > 0 && rho[j] < rho[j - 1] * (1.0 - 1e-12))
        throw malformed_input("SurrogateWeights: radii must be non-decreasing (anchored)");
    }
    SurrogateWeights s;
    s.kind_ = Kind::ProductOfRadii;
    s.params_ = std::move(rho);
    s.algebraic_ = algebraic_exponent;
    return s;
  }

  static SurrogateWeights simplex(std::vector<double> lambda) {
    for (std::size_t j = 0; j < lambda.size(); ++j) {
      if (!(lambda[j] > 0.0)) throw malformed_input("SurrogateWeights: simplex weights positive");
      if (j > 0 && lambda[j] < lambda[j - 1] * (1.0 - 1e-12))
        throw malformed_input("SurrogateWeights: simplex weights must be non-decreasing");
    }
    SurrogateWeights s;
    s.kind_ = Kind::Simplex;
    s.params_ = std::move(lambda);
    return s;
  }

  static SurrogateWeights legendre_product(std::vector<double> psi_norms, double eps,
                                           double tail_beyond = 0.0) {
    SurrogateWeights s;
    s.kind_ = Kind::LegendreProduct;
    s.legendre_ = std::make_shared<LegendreSurrogate>(std::move(psi_norms), eps, tail_beyond);
    return s;
  }

  /// Radii from the polydisc budget.  The joint split rho_j = 1 + eps/(J b_j)
  /// satisfies sum_j (rho_j - 1) b_j = eps, so the product is a certified
  /// coefficient bound; it divides the budget equally and flattens the
  /// leading dimensions.  The per-dimension variant rho_j = 1 + eps/b_j
  /// spends the whole budget on each coordinate direction separately (each
  /// factor alone is an admissible single-dimension bound), which tracks the
  /// true anisotropy much more closely and is the better set selector.
  static SurrogateWeights radii_from_norms(const std::vector<double>& psi_norms, double eps,
                                           bool joint_budget = false) {
    std::vector<double> rho(psi_norms.size());
    const double share = joint_budget ? static_cast<double>(psi_norms.size()) : 1.0;
    for (std::size_t j = 0; j < psi_norms.size(); ++j) {
      if (!(psi_norms[j] > 0.0)) throw malformed_input("radii_from_norms: zero psi norm");
      rho[j] = 1.0 + eps / (share * psi_norms[j]);
    }
    return product_of_radii(std::move(rho));
  }

  Kind kind() const { return kind_; }

  double operator()(const MultiIndex& nu) const {
    switch (kind_) {
      case Kind::LegendreProduct:
        return (*legendre_)(nu);
      case Kind::ProductOfRadii: {
        double v = 1.0;
        for (const auto& [p, e] : nu.entries()) {
          if (p > static_cast<int>(params_.size())) return 0.0;
          v *= std::pow(params_[static_cast<std::size_t>(p) - 1], -static_cast<double>(e));
          if (algebraic_ > 0.0) v *= std::pow(1.0 + 2.0 * e, algebraic_);
        }
        return v;
      }
      case Kind::Simplex: {
        double wsum = 0.0;
        for (const auto& [p, e] : nu.entries()) {
          if (p > static_cast<int>(params_.size())) return 0.0;
          wsum += params_[static_cast<std::size_t>(p) - 1] * e;
        }
        return std::pow(2.0, -wsum);
      }
    }
    return 0.0;
  }

private:
  Kind kind_ = Kind::ProductOfRadii;
  std::vector<double> params_;
  double algebraic_ = 0.0;
  std::shared_ptr<LegendreSurrogate> legendre_;
};

}  // namespace pss
