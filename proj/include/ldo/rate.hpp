#pragma once

// Rate functions I_theta(z) on parameter x data space.

#include "ldo/common.hpp"
#include "ldo/spaces.hpp"

#include <string>
#include <variant>

namespace ldo {

// ---------------------------------------------------------------------------------------------
// Relative entropy

/// sum_i z_i log(z_i / theta_i), +inf iff some theta_i = 0 < z_i.
inline ExtendedReal rel_entropy(const Vec& theta, const Vec& z) {
  require_same_size(theta, z, "rel_entropy");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z[i] <= 0.0) continue;
    if (theta[i] <= 0.0) return ExtendedReal::infinity();
    acc += z[i] * std::log(z[i] / theta[i]);
  }
  // Jensen gives acc >= 0 on the simplex; clip rounding noise.
  return ExtendedReal(std::max(acc, 0.0));
}

inline Vec rel_entropy_grad_theta(const Vec& theta, const Vec& z) {
  require_same_size(theta, z, "rel_entropy_grad_theta");
  if (theta.minCoeff() <= 0.0) throw DomainError("rel_entropy_grad_theta: theta has a zero entry");
  return -(z.array() / theta.array()).matrix();
}

struct RobustEntropyResult {
  ExtendedReal value;
  Vec theta_prime;  // minimizer in B_theta(R) ∩ floored simplex
  double mu = 0.0;  // ball multiplier; theta-gradient of the value is mu (theta - theta_prime)
};

namespace detail {

/// Floored KKT point for ball multiplier mu and simplex multiplier lambda:
/// theta'_i = max(floor, positive root of mu t^2 + (lambda - mu theta_i) t - z_i).
/// Also returns d theta'_i / d lambda (zero on the floor).
inline std::pair<double, double> robust_kkt_entry(double z, double theta, double mu, double lambda, double floor) {
  const double b = lambda - mu * theta;
  double t;
  double s;
  if (mu == 0.0) {
    if (z == 0.0) return {floor, 0.0};
    if (b <= 0.0) return {kInf, 0.0};
    t = z / b;
    s = b;
  } else {
    s = std::sqrt(b * b + 4.0 * mu * z);
    if (b >= 0.0) t = (b + s == 0.0) ? 0.0 : 2.0 * z / (b + s);
    else t = (s - b) / (2.0 * mu);
    s = 2.0 * mu * t + b;
  }
  if (t <= floor) return {floor, 0.0};
  return {t, s > 0.0 ? -t / s : 0.0};
}

/// Solves sum_i theta'_i(lambda) = 1 for fixed mu by safeguarded Newton.
inline Vec robust_kkt_point(const Vec& z, const Vec& theta, double mu, double floor) {
  const auto d = z.size();
  Vec t(d);
  auto mass = [&](double lambda, double* slope) {
    double m = 0.0;
    double sl = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      auto [v, dv] = robust_kkt_entry(z[i], theta[i], mu, lambda, floor);
      t[i] = v;
      m += v;
      sl += dv;
    }
    if (slope) *slope = sl;
    return m - 1.0;
  };
  if (floor * static_cast<double>(d) >= 1.0 - 1e-15) return Vec::Constant(d, floor);
  // mass(lambda) is nonincreasing; bracket the root.
  double lo = -1.0;
  double hi = 1.0;
  while (mass(lo, nullptr) < 0.0) lo *= 2.0;
  while (mass(hi, nullptr) > 0.0) hi *= 2.0;
  double lambda = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double slope;
    const double f = mass(lambda, &slope);
    if (f == 0.0) break;
    (f > 0.0 ? lo : hi) = lambda;
    if (std::abs(f) <= 1e-15) break;
    double next = slope < 0.0 ? lambda - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == lambda || hi - lo <= 4e-16 * std::max(std::abs(lo), std::abs(hi))) break;
    lambda = next;
  }
  mass(lambda, nullptr);
  // Spread the residual mass over entries above the floor.
  const double residual = 1.0 - t.sum();
  double free_mass = 0.0;
  for (Eigen::Index i = 0; i < d; ++i)
    if (t[i] > floor) free_mass += t[i];
  if (free_mass > 0.0)
    for (Eigen::Index i = 0; i < d; ++i)
      if (t[i] > floor) t[i] += residual * t[i] / free_mass;
  return t;
}

/// Root of a decreasing function on [lo, hi] with f(lo) > 0 >= f(hi), by the Illinois
/// variant of regula falsi. Returns the endpoint on the nonpositive side.
template <class F>
double decreasing_root(F&& f, double lo, double hi, double flo, double fhi) {
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    if (hi - lo <= 1e-15 * hi) break;
    double m = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(m > lo && m < hi)) m = 0.5 * (lo + hi);
    const double fm = f(m);
    if (fm > 0.0) {
      lo = m;
      flo = fm;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = m;
      fhi = fm;
      if (fm == 0.0) break;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
  }
  return hi;
}

}  // namespace detail

/// inf of rel_entropy(theta', z) over theta' in B_theta(R) ∩ (simplex with floor).
///
/// Solved through its KKT system: for a ball multiplier mu the minimizer is explicit up to
/// the simplex multiplier (safeguarded Newton), and mu is the root of
/// ||theta'(mu) - theta|| = R when the ball constraint is active.
inline RobustEntropyResult robust_rel_entropy_solve(const Vec& theta, const Vec& z, double radius,
                                                    double floor = 0.0) {
  require_same_size(theta, z, "robust_rel_entropy");
  if (radius < 0.0) throw DomainError("robust_rel_entropy: negative radius");
  const auto d = z.size();
  if (floor * static_cast<double>(d) > 1.0) throw DomainError("robust_rel_entropy: infeasible floor");
  const ExtendedReal plain = rel_entropy(theta, z);
  if (radius == 0.0) return {plain, theta, 0.0};
  if ((z - theta).norm() <= radius && z.minCoeff() >= floor) return {ExtendedReal(0.0), z, 0.0};
  if (theta.minCoeff() < floor - 1e-12 && (project_simplex(theta, floor).values() - theta).norm() > radius)
    throw DomainError("robust_rel_entropy: ball around theta misses the parameter set");

  // mu = 0: z lifted to the floor, the minimizer when the ball is inactive.
  Vec best = detail::robust_kkt_point(z, theta, 0.0, floor);
  double mu_star = 0.0;
  const double f0 = (best - theta).norm() - radius;
  if (f0 > 0.0) {
    auto excess = [&](double mu) { return (detail::robust_kkt_point(z, theta, mu, floor) - theta).norm() - radius; };
    double lo = 0.0;
    double flo = f0;
    double hi = 1.0;
    double fhi = excess(hi);
    while (fhi > 0.0) {
      lo = hi;
      flo = fhi;
      hi *= 8.0;
      if (hi > 1e300) throw NumericalError("robust_rel_entropy: ball multiplier diverged");
      fhi = excess(hi);
    }
    mu_star = detail::decreasing_root(excess, lo, hi, flo, fhi);
    best = detail::robust_kkt_point(z, theta, mu_star, floor);
  }
  ExtendedReal value = rel_entropy(best, z);
  if (plain < value) return {plain, theta, mu_star};
  return {value, best, mu_star};
}

inline ExtendedReal robust_rel_entropy(const Vec& theta, const Vec& z, double radius, double floor = 0.0) {
  return robust_rel_entropy_solve(theta, z, radius, floor).value;
}

// ---------------------------------------------------------------------------------------------
// Gaussian, conditional entropy, degenerate rates

inline double gaussian_rate(const Vec& theta, const Vec& z, const Mat& precision) {
  require_same_size(theta, z, "gaussian_rate");
  if (precision.rows() != theta.size() || precision.cols() != theta.size())
    throw DimensionError("gaussian_rate: precision matrix dimension mismatch");
  const Vec diff = theta - z;
  return std::max(0.0, 0.5 * diff.dot(precision * diff));
}

/// Pair-measure conditional relative entropy; theta and z are row-major flattened s x s.
inline ExtendedReal cond_rel_entropy(const Vec& theta, const Vec& z, int states) {
  require_same_size(theta, z, "cond_rel_entropy");
  if (z.size() != static_cast<Eigen::Index>(states) * states)
    throw DimensionError("cond_rel_entropy: expected " + std::to_string(states * states) + " entries");
  double acc = 0.0;
  for (int i = 0; i < states; ++i) {
    double zrow = 0.0;
    double trow = 0.0;
    for (int j = 0; j < states; ++j) {
      zrow += z[i * states + j];
      trow += theta[i * states + j];
    }
    if (zrow <= 0.0) continue;
    double row = 0.0;
    for (int j = 0; j < states; ++j) {
      const double zij = z[i * states + j];
      if (zij <= 0.0) continue;
      const double tij = theta[i * states + j];
      if (tij <= 0.0) return ExtendedReal::infinity();
      row += zij * (std::log(zij / zrow) - std::log(tij / trow));
    }
    acc += row;
  }
  return ExtendedReal(std::max(acc, 0.0));
}

inline Vec cond_rel_entropy_grad_theta(const Vec& theta, const Vec& z, int states) {
  require_same_size(theta, z, "cond_rel_entropy_grad_theta");
  if (theta.minCoeff() <= 0.0) throw DomainError("cond_rel_entropy_grad_theta: theta has a zero entry");
  Vec g(theta.size());
  for (int i = 0; i < states; ++i) {
    double zrow = 0.0;
    double trow = 0.0;
    for (int j = 0; j < states; ++j) {
      zrow += z[i * states + j];
      trow += theta[i * states + j];
    }
    for (int j = 0; j < states; ++j) {
      const int k = i * states + j;
      g[k] = -z[k] / theta[k] + zrow / trow;
    }
  }
  return g;
}

/// 0 iff z is bitwise equal to theta.
inline ExtendedReal lln_rate(const Vec& theta, const Vec& z) {
  if (theta.size() != z.size()) return ExtendedReal::infinity();
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (theta[i] != z[i]) return ExtendedReal::infinity();
  return ExtendedReal(0.0);
}

/// 0 iff ||z - theta||_2 <= R (boundary included).
inline ExtendedReal rlln_rate(const Vec& theta, const Vec& z, double radius) {
  require_same_size(theta, z, "rlln_rate");
  return (z - theta).norm() <= radius ? ExtendedReal(0.0) : ExtendedReal::infinity();
}

// ---------------------------------------------------------------------------------------------
// RateFunction

struct LLNRate {};
struct RLLNBallRate {
  double radius;
};
struct RelEntropyRate {};
struct RobustRelEntropyRate {
  double radius;
  double floor;
};
struct GaussianCramerRate {
  Mat precision;
};
struct CondRelEntropyRate {
  int states;
};

enum class DomainKind { AllOfTheta, Singleton, Ball, PositiveSupportMatch };

/// Description of {theta : I_theta(z) < inf}.
struct EffectiveDomain {
  DomainKind kind = DomainKind::AllOfTheta;
  Vec center;  // z for Singleton / Ball
  double radius = 0.0;
};

inline const char* to_string(DomainKind k) {
  switch (k) {
    case DomainKind::AllOfTheta: return "AllOfTheta";
    case DomainKind::Singleton: return "Singleton";
    case DomainKind::Ball: return "Ball";
    case DomainKind::PositiveSupportMatch: return "PositiveSupportMatch";
  }
  return "?";
}

class RateFunction {
public:
  using Variant =
      std::variant<LLNRate, RLLNBallRate, RelEntropyRate, RobustRelEntropyRate, GaussianCramerRate, CondRelEntropyRate>;

  static RateFunction lln() { return RateFunction(LLNRate{}); }
  static RateFunction rlln_ball(double radius) {
    if (!(radius >= 0.0)) throw DomainError("RateFunction::rlln_ball: negative radius");
    return RateFunction(RLLNBallRate{radius});
  }
  static RateFunction rel_entropy() { return RateFunction(RelEntropyRate{}); }
  static RateFunction robust_rel_entropy(double radius, double floor) {
    if (!(radius >= 0.0)) throw DomainError("RateFunction::robust_rel_entropy: negative radius");
    return RateFunction(RobustRelEntropyRate{radius, floor});
  }
  /// Gaussian Cramer rate for a known covariance; the covariance must be positive definite.
  static RateFunction gaussian(const Mat& covariance) {
    if (covariance.rows() != covariance.cols()) throw DimensionError("RateFunction::gaussian: non-square");
    Eigen::LLT<Mat> llt(covariance);
    if (llt.info() != Eigen::Success || !covariance.isApprox(covariance.transpose()))
      throw DomainError("RateFunction::gaussian: covariance is not symmetric positive definite");
    Mat precision = llt.solve(Mat::Identity(covariance.rows(), covariance.cols()));
    precision = 0.5 * (precision + precision.transpose());
    return RateFunction(GaussianCramerRate{std::move(precision)});
  }
  static RateFunction cond_rel_entropy(int states) {
    if (states < 2) throw DomainError("RateFunction::cond_rel_entropy: need at least 2 states");
    return RateFunction(CondRelEntropyRate{states});
  }

  const Variant& variant() const { return v_; }

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(v_);
  }

  ExtendedReal eval(const Vec& theta, const Vec& z) const {
    return std::visit(
        [&](const auto& r) -> ExtendedReal {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, LLNRate>) return lln_rate(theta, z);
          else if constexpr (std::is_same_v<T, RLLNBallRate>) return rlln_rate(theta, z, r.radius);
          else if constexpr (std::is_same_v<T, RelEntropyRate>) return ldo::rel_entropy(theta, z);
          else if constexpr (std::is_same_v<T, RobustRelEntropyRate>)
            return ldo::robust_rel_entropy(theta, z, r.radius, r.floor);
          else if constexpr (std::is_same_v<T, GaussianCramerRate>)
            return ExtendedReal(gaussian_rate(theta, z, r.precision));
          else return ldo::cond_rel_entropy(theta, z, r.states);
        },
        v_);
  }

  /// Value and theta-gradient at a point of finite value. Degenerate rates have no gradient.
  std::pair<ExtendedReal, Vec> eval_with_grad(const Vec& theta, const Vec& z) const {
    return std::visit(
        [&](const auto& r) -> std::pair<ExtendedReal, Vec> {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, RelEntropyRate>) {
            ExtendedReal v = ldo::rel_entropy(theta, z);
            if (v.is_infinite()) return {v, Vec()};
            return {v, rel_entropy_grad_theta(theta, z)};
          } else if constexpr (std::is_same_v<T, RobustRelEntropyRate>) {
            auto res = robust_rel_entropy_solve(theta, z, r.radius, r.floor);
            if (res.value.is_infinite()) return {res.value, Vec()};
            if (r.radius == 0.0) return {res.value, rel_entropy_grad_theta(theta, z)};
            return {res.value, res.mu * (theta - res.theta_prime)};
          } else if constexpr (std::is_same_v<T, GaussianCramerRate>) {
            return {ExtendedReal(gaussian_rate(theta, z, r.precision)), r.precision * (theta - z)};
          } else if constexpr (std::is_same_v<T, CondRelEntropyRate>) {
            ExtendedReal v = ldo::cond_rel_entropy(theta, z, r.states);
            if (v.is_infinite()) return {v, Vec()};
            return {v, cond_rel_entropy_grad_theta(theta, z, r.states)};
          } else {
            return {eval(theta, z), Vec::Zero(theta.size())};
          }
        },
        v_);
  }

  /// Whether theta -> I_theta(z) is convex (so that the cost objective is concave in theta).
  bool convex_in_theta() const { return !is<CondRelEntropyRate>(); }

  /// The set where the rate is finite, relative to the parameter space.
  EffectiveDomain effective_domain(const Vec& z, const ParamSpace& space) const {
    if (is<LLNRate>()) return {DomainKind::Singleton, z, 0.0};
    if (const auto* r = std::get_if<RLLNBallRate>(&v_)) return {DomainKind::Ball, z, r->radius};
    if (is<RelEntropyRate>() || is<CondRelEntropyRate>())
      return space.floor() > 0.0 ? EffectiveDomain{} : EffectiveDomain{DomainKind::PositiveSupportMatch, z, 0.0};
    return {};
  }

  std::string describe() const {
    return std::visit(
        [](const auto& r) -> std::string {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, LLNRate>) return "lln";
          else if constexpr (std::is_same_v<T, RLLNBallRate>) return "rlln(R=" + std::to_string(r.radius) + ")";
          else if constexpr (std::is_same_v<T, RelEntropyRate>) return "rel_entropy";
          else if constexpr (std::is_same_v<T, RobustRelEntropyRate>)
            return "robust_rel_entropy(R=" + std::to_string(r.radius) + ")";
          else if constexpr (std::is_same_v<T, GaussianCramerRate>) return "gaussian";
          else return "cond_rel_entropy";
        },
        v_);
  }

private:
  explicit RateFunction(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

}  // namespace ldo
