#pragma once

// Penalty family l_{alpha,beta}, given through its inverse
//   l^{-1}(y) = (exp(beta y) - 1) / beta + alpha y.

#include "ldo/common.hpp"

#include <atomic>
#include <string>

namespace ldo {

inline constexpr double kExpOverflowArg = 700.0;

class Penalty {
public:
  Penalty(double alpha, double beta) : alpha_(alpha), beta_(beta) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw DomainError("Penalty: alpha must be positive and finite (got " + std::to_string(alpha) +
                        "); alpha = 0 is not an admissible penalty");
    if (!(beta > 0.0) || !std::isfinite(beta))
      throw DomainError("Penalty: beta must be positive and finite (got " + std::to_string(beta) + ")");
  }

  /// The l_{beta,beta} member used in all experiments.
  static Penalty beta_family(double beta) { return Penalty(beta, beta); }

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  /// l^{-1}(y) for real y; +-inf map to +-inf, beta*y > 700 saturates to +inf.
  double inverse(double y) const {
    if (std::isnan(y)) throw DomainError("Penalty::inverse: NaN argument");
    if (y == kInf) return kInf;
    if (y == -kInf) return -kInf;
    if (beta_ * y > kExpOverflowArg) {
      static std::atomic<int> warned{0};
      log_warning(warned, "penalty inverse saturated to +inf at y = " + std::to_string(y));
      return kInf;
    }
    return std::expm1(beta_ * y) / beta_ + alpha_ * y;
  }

  ExtendedReal inverse(const ExtendedReal& y) const {
    if (y.is_infinite()) return ExtendedReal::infinity();
    const double v = inverse(y.value());
    return v == kInf ? ExtendedReal::infinity() : ExtendedReal(v);
  }

  /// (l^{-1})'(y) = exp(beta y) + alpha.
  double inverse_derivative(double y) const {
    if (!std::isfinite(y)) throw DomainError("Penalty::inverse_derivative: non-finite argument");
    if (beta_ * y > kExpOverflowArg) {
      static std::atomic<int> warned{0};
      log_warning(warned, "penalty derivative saturated to +inf at y = " + std::to_string(y));
      return kInf;
    }
    return std::exp(beta_ * y) + alpha_;
  }

  /// l(v): the unique y with l^{-1}(y) = v.
  double forward(double v) const {
    if (!std::isfinite(v)) {
      if (std::isnan(v)) throw DomainError("Penalty::forward: NaN argument");
      return v;
    }
    if (v == 0.0) return 0.0;
    const double tol = 1e-12 * (1.0 + std::abs(v));
    double lo = -1.0;
    double hi = 1.0;
    while (inverse(lo) > v) lo *= 2.0;
    while (inverse(hi) < v) hi *= 2.0;
    double y = 0.5 * (lo + hi);
    for (int it = 0; it < 400; ++it) {
      const double f = inverse(y) - v;
      if (std::abs(f) <= tol) return y;
      if (f > 0.0) hi = y;
      else lo = y;
      const double newton = y - f / inverse_derivative(y);
      y = (newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
      if (hi - lo <= 0.0) break;
    }
    // Bisection exhausted the representable bracket; return the closer endpoint.
    return std::abs(inverse(lo) - v) < std::abs(inverse(hi) - v) ? lo : hi;
  }

  std::string describe() const {
    return "penalty(alpha=" + std::to_string(alpha_) + ", beta=" + std::to_string(beta_) + ")";
  }

private:
  double alpha_;
  double beta_;
};

}  // namespace ldo
