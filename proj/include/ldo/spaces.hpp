#pragma once

// Decision and parameter spaces: simplex, ball and stationary-pair geometry, Euclidean
// projections, type lattices and seeded sampling.

#include "ldo/common.hpp"
#include "ldo/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

namespace ldo {

inline constexpr double kSimplexSumTol = 1e-12;
inline constexpr double kStationarityTol = 1e-10;

/// Point of the probability simplex, optionally with an entrywise floor.
class ProbVector {
public:
  ProbVector() = default;

  explicit ProbVector(Vec p, double floor = 0.0) : p_(std::move(p)), floor_(floor) {
    if (p_.size() == 0) throw DimensionError("ProbVector: empty vector");
    for (Eigen::Index i = 0; i < p_.size(); ++i) {
      if (!(p_[i] >= floor_))
        throw DomainError("ProbVector: entry " + std::to_string(i) + " = " + std::to_string(p_[i]) +
                          " below floor " + std::to_string(floor_));
    }
    const double s = p_.sum();
    if (std::abs(s - 1.0) > kSimplexSumTol)
      throw DomainError("ProbVector: entries sum to " + std::to_string(s));
  }

  const Vec& values() const { return p_; }
  Eigen::Index size() const { return p_.size(); }
  double operator[](Eigen::Index i) const { return p_[i]; }
  double floor() const { return floor_; }

private:
  Vec p_;
  double floor_ = 0.0;
};

/// Square matrix of pair probabilities; flattened row-major when used as a parameter vector.
class ProbMatrix {
public:
  ProbMatrix() = default;

  explicit ProbMatrix(Mat m, bool stationary_pair = false) : m_(std::move(m)), stationary_(stationary_pair) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) throw DimensionError("ProbMatrix: must be square");
    if ((m_.array() < 0.0).any()) throw DomainError("ProbMatrix: negative entry");
    if (std::abs(m_.sum() - 1.0) > kSimplexSumTol)
      throw DomainError("ProbMatrix: entries sum to " + std::to_string(m_.sum()));
    if (stationary_) {
      const Vec diff = m_.rowwise().sum() - m_.colwise().sum().transpose();
      if (diff.cwiseAbs().maxCoeff() > kStationarityTol)
        throw DomainError("ProbMatrix: row sums differ from column sums");
    }
  }

  static ProbMatrix from_flat(const Vec& flat, int states, bool stationary_pair = false) {
    if (flat.size() != static_cast<Eigen::Index>(states) * states)
      throw DimensionError("ProbMatrix::from_flat: expected " + std::to_string(states * states) + " entries");
    Mat m(states, states);
    for (int i = 0; i < states; ++i)
      for (int j = 0; j < states; ++j) m(i, j) = flat[i * states + j];
    return ProbMatrix(std::move(m), stationary_pair);
  }

  Vec flatten() const {
    const auto s = m_.rows();
    Vec out(s * s);
    for (Eigen::Index i = 0; i < s; ++i)
      for (Eigen::Index j = 0; j < s; ++j) out[i * s + j] = m_(i, j);
    return out;
  }

  const Mat& values() const { return m_; }
  int states() const { return static_cast<int>(m_.rows()); }
  bool stationary_pair() const { return stationary_; }
  double operator()(int i, int j) const { return m_(i, j); }

private:
  Mat m_;
  bool stationary_ = false;
};

// ---------------------------------------------------------------------------------------------
// Projections

namespace detail {

/// Projects v onto {x >= 0, sum x = mass} by the sort-based threshold rule.
inline Vec project_nonneg_mass(const Vec& v, double mass) {
  const auto d = v.size();
  std::vector<double> u(v.data(), v.data() + d);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double tau = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    cumsum += u[j];
    const double t = (cumsum - mass) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) tau = t;
  }
  Vec x = (v.array() - tau).cwiseMax(0.0).matrix();
  // Large inputs lose the mass to cancellation in v - tau; rescaling restores it.
  const double s = x.sum();
  if (s > 0.0 && s != mass) x *= mass / s;
  if (!(s > 0.0) && mass > 0.0) {
    Eigen::Index k;
    v.maxCoeff(&k);
    x.setZero();
    x[k] = mass;
  }
  return x;
}

}  // namespace detail

/// Euclidean projection of v onto the floored simplex {x : sum x = 1, x_i >= floor}.
///
/// Points already in the set are returned unchanged, so projection is exactly idempotent.
inline ProbVector project_simplex(const Vec& v, double floor = 0.0) {
  const auto d = v.size();
  if (d == 0) throw DimensionError("project_simplex: empty vector");
  if (floor < 0.0 || floor * static_cast<double>(d) > 1.0 + 1e-15)
    throw DomainError("project_simplex: infeasible floor " + std::to_string(floor) + " for d = " +
                      std::to_string(d));
  if (v.minCoeff() >= floor && std::abs(v.sum() - 1.0) <= 1e-14) return ProbVector(v, floor);
  const double mass = std::max(0.0, 1.0 - floor * static_cast<double>(d));
  Vec x = detail::project_nonneg_mass(v.array() - floor, mass).array() + floor;
  return ProbVector(std::move(x), floor);
}

inline ProbVector project_simplex(const Vec& v, double floor, Eigen::Index expected_dim) {
  if (v.size() != expected_dim) throw DimensionError("project_simplex: dimension mismatch");
  return project_simplex(v, floor);
}

inline Vec project_l2_ball(const Vec& v, const Vec& center, double radius) {
  require_same_size(v, center, "project_l2_ball");
  if (!(radius > 0.0)) throw DomainError("project_l2_ball: radius must be positive");
  const Vec diff = v - center;
  const double norm = diff.norm();
  if (norm <= radius) return v;
  return center + (radius / norm) * diff;
}

/// Projection onto {lo <= x_i <= hi, sum x = total}.
inline Vec project_capped_simplex(const Vec& v, double lo, double hi, double total) {
  const auto d = static_cast<double>(v.size());
  if (lo * d > total + 1e-12 || hi * d < total - 1e-12 || lo > hi)
    throw DomainError("project_capped_simplex: empty feasible set");
  auto mass = [&](double lambda) { return (v.array() - lambda).cwiseMax(lo).cwiseMin(hi).sum(); };
  double a = v.minCoeff() - hi;  // mass(a) = d*hi >= total
  double b = v.maxCoeff() - lo;  // mass(b) = d*lo <= total
  for (int it = 0; it < 200 && b - a > 0.0; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    (mass(m) > total ? a : b) = m;
  }
  // Solve exactly on the identified active set.
  double lambda = 0.5 * (a + b);
  double fixed = 0.0;
  double free_sum = 0.0;
  int free_count = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double t = v[i] - lambda;
    if (t <= lo) fixed += lo;
    else if (t >= hi) fixed += hi;
    else {
      free_sum += v[i];
      ++free_count;
    }
  }
  if (free_count > 0) lambda = (free_sum + fixed - total) / free_count;
  return (v.array() - lambda).cwiseMax(lo).cwiseMin(hi).matrix();
}

/// Exact projection onto (floored simplex) ∩ B_center(radius).
///
/// The ball multiplier mu enters as a convex combination: the projection equals the simplex
/// projection of ((1-t) v + t center) for t = mu/(1+mu), and the distance to `center` is
/// nonincreasing in t. t is found by bisection on the feasible side.
inline Vec project_ball_simplex(const Vec& v, const Vec& center, double radius, double floor) {
  require_same_size(v, center, "project_ball_simplex");
  if (radius < 0.0) throw DomainError("project_ball_simplex: negative radius");
  Vec p = project_simplex(v, floor).values();
  if ((p - center).norm() <= radius) return p;
  Vec far = project_simplex(center, floor).values();
  if ((far - center).norm() > radius * (1.0 + 1e-12) + 1e-15)
    throw DomainError("project_ball_simplex: ball does not meet the simplex");
  double lo = 0.0;  // infeasible side
  double hi = 1.0;  // feasible side
  Vec best = far;
  for (int it = 0; it < 200; ++it) {
    const double t = 0.5 * (lo + hi);
    if (t <= lo || t >= hi) break;
    Vec q = project_simplex((1.0 - t) * v + t * center, floor).values();
    if ((q - center).norm() <= radius) {
      hi = t;
      best = std::move(q);
    } else {
      lo = t;
    }
  }
  return best;
}

/// Dykstra's alternating projections between the floored simplex and a ball.
inline Vec dykstra_ball_simplex(const Vec& v, const Vec& center, double radius, double floor, int rounds = 100) {
  require_same_size(v, center, "dykstra_ball_simplex");
  Vec x = v;
  Vec p = Vec::Zero(v.size());
  Vec q = Vec::Zero(v.size());
  for (int k = 0; k < rounds; ++k) {
    const Vec y = project_simplex(x + p, floor).values();
    p = x + p - y;
    const Vec x_next = project_l2_ball(y + q, center, radius);
    q = y + q - x_next;
    x = x_next;
  }
  return x;
}

/// Projection onto stationary pair matrices {sum = 1, row sums = column sums, floor <= x <= 1},
/// flattened row-major. Semismooth Newton on the dual of the equality constraints.
inline Vec project_stationary_pairs(const Vec& v, int states, double floor) {
  const Eigen::Index n = static_cast<Eigen::Index>(states) * states;
  if (v.size() != n) throw DimensionError("project_stationary_pairs: dimension mismatch");
  if (floor < 0.0 || floor * static_cast<double>(n) > 1.0)
    throw DomainError("project_stationary_pairs: infeasible floor");
  // Constraint rows: total mass, then (row_i - col_i) for i < states-1 (the last is implied).
  Mat a = Mat::Zero(states, n);
  Vec b = Vec::Zero(states);
  a.row(0).setOnes();
  b[0] = 1.0;
  for (int i = 0; i + 1 < states; ++i)
    for (int j = 0; j < states; ++j) {
      a(i + 1, i * states + j) += 1.0;
      a(i + 1, j * states + i) -= 1.0;
    }
  auto primal = [&](const Vec& nu) -> Vec { return (v - a.transpose() * nu).cwiseMax(floor).cwiseMin(1.0); };
  auto dual_value = [&](const Vec& nu, const Vec& x) { return 0.5 * (x - v).squaredNorm() + nu.dot(a * x - b); };
  Vec nu = Vec::Zero(states);
  Vec x = primal(nu);
  for (int it = 0; it < 100; ++it) {
    const Vec residual = a * x - b;
    // Feasible up to rounding; the line search below cannot improve on that.
    if (residual.cwiseAbs().maxCoeff() < 1e-14) break;
    Vec active(n);
    const Vec raw = v - a.transpose() * nu;
    for (Eigen::Index k = 0; k < n; ++k) active[k] = (raw[k] > floor && raw[k] < 1.0) ? 1.0 : 0.0;
    Mat h = a * active.asDiagonal() * a.transpose();
    h.diagonal().array() += 1e-12;
    const Vec step = h.ldlt().solve(residual);
    const double q0 = dual_value(nu, x);
    double s = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, s *= 0.5) {
      const Vec nu_try = nu + s * step;
      const Vec x_try = primal(nu_try);
      // Near the optimum dual changes fall below rounding of q0; the residual decides there.
      if (dual_value(nu_try, x_try) >= q0 - 1e-15 * (1.0 + std::abs(q0)) ||
          (a * x_try - b).squaredNorm() < residual.squaredNorm()) {
        nu = nu_try;
        x = x_try;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return x;
}

// ---------------------------------------------------------------------------------------------
// Type lattice

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

/// Number of empirical types of length-n sequences over d symbols, C(n+d-1, d-1).
inline double type_count(int d, int n) { return binomial(n + d - 1, d - 1); }

/// Calls fn(counts) for every composition of n into d nonnegative parts, first coordinate
/// descending (so (n,0,...,0) comes first).
template <class Fn>
void for_each_composition(int d, int n, Fn&& fn) {
  std::vector<int> counts(d, 0);
  std::function<void(int, int)> rec = [&](int pos, int remaining) {
    if (pos == d - 1) {
      counts[pos] = remaining;
      fn(static_cast<const std::vector<int>&>(counts));
      return;
    }
    for (int c = remaining; c >= 0; --c) {
      counts[pos] = c;
      rec(pos + 1, remaining - c);
    }
  };
  rec(0, n);
}

inline std::vector<ProbVector> type_lattice(int d, int n, double cap = 1e7) {
  if (d < 2 || n < 1) throw DomainError("type_lattice: need d >= 2 and n >= 1");
  const double count = type_count(d, n);
  if (count > cap)
    throw CapExceeded("type_lattice: " + std::to_string(count) + " types exceed cap " + std::to_string(cap));
  std::vector<ProbVector> out;
  out.reserve(static_cast<std::size_t>(count));
  for_each_composition(d, n, [&](const std::vector<int>& c) {
    Vec p(d);
    for (int i = 0; i < d; ++i) p[i] = static_cast<double>(c[i]) / n;
    out.emplace_back(std::move(p));
  });
  return out;
}

// ---------------------------------------------------------------------------------------------
// Parameter space

struct SimplexWithFloor {
  int dim;
  double floor;
};
struct L2Ball {
  Vec center;
  double radius;
};
struct StationaryPairMatrices {
  int states;
  double floor;
};
struct Singleton {
  Vec point;
};

inline constexpr int kSampleRejectionBudget = 10000;

class ParamSpace {
public:
  using Variant = std::variant<SimplexWithFloor, L2Ball, StationaryPairMatrices, Singleton>;

  static ParamSpace simplex(int dim, double floor = 0.001) {
    if (dim < 1) throw DomainError("ParamSpace::simplex: dimension must be positive");
    if (floor < 0.0 || floor * dim > 1.0) throw DomainError("ParamSpace::simplex: floor * d must be <= 1");
    return ParamSpace(SimplexWithFloor{dim, floor});
  }
  static ParamSpace ball(Vec center, double radius) {
    if (!(radius > 0.0)) throw DomainError("ParamSpace::ball: radius must be positive");
    return ParamSpace(L2Ball{std::move(center), radius});
  }
  static ParamSpace stationary_pairs(int states, double floor = 0.01) {
    if (states < 2) throw DomainError("ParamSpace::stationary_pairs: need at least 2 states");
    if (floor < 0.0 || floor * states * states > 1.0)
      throw DomainError("ParamSpace::stationary_pairs: floor too large");
    return ParamSpace(StationaryPairMatrices{states, floor});
  }
  static ParamSpace singleton(Vec point) { return ParamSpace(Singleton{std::move(point)}); }

  const Variant& variant() const { return v_; }

  int dimension() const {
    return std::visit(
        [](const auto& s) -> int {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, SimplexWithFloor>) return s.dim;
          else if constexpr (std::is_same_v<T, L2Ball>) return static_cast<int>(s.center.size());
          else if constexpr (std::is_same_v<T, StationaryPairMatrices>) return s.states * s.states;
          else return static_cast<int>(s.point.size());
        },
        v_);
  }

  /// Entrywise floor for simplex-like spaces, 0 otherwise.
  double floor() const {
    if (auto* s = std::get_if<SimplexWithFloor>(&v_)) return s->floor;
    if (auto* s = std::get_if<StationaryPairMatrices>(&v_)) return s->floor;
    return 0.0;
  }

  bool is_simplex() const { return std::holds_alternative<SimplexWithFloor>(v_); }

  Vec project(const Vec& v) const {
    if (v.size() != dimension()) throw DimensionError("ParamSpace::project: dimension mismatch");
    return std::visit(
        [&](const auto& s) -> Vec {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, SimplexWithFloor>) return project_simplex(v, s.floor).values();
          else if constexpr (std::is_same_v<T, L2Ball>) return project_l2_ball(v, s.center, s.radius);
          else if constexpr (std::is_same_v<T, StationaryPairMatrices>)
            return project_stationary_pairs(v, s.states, s.floor);
          else return s.point;
        },
        v_);
  }

  bool contains(const Vec& v, double tol = 1e-9) const {
    if (v.size() != dimension()) return false;
    return std::visit(
        [&](const auto& s) -> bool {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, SimplexWithFloor>)
            return v.minCoeff() >= s.floor - tol && std::abs(v.sum() - 1.0) <= tol;
          else if constexpr (std::is_same_v<T, L2Ball>) return (v - s.center).norm() <= s.radius + tol;
          else if constexpr (std::is_same_v<T, StationaryPairMatrices>) {
            if (v.minCoeff() < s.floor - tol || std::abs(v.sum() - 1.0) > tol) return false;
            const auto m = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                v.data(), s.states, s.states);
            return (m.rowwise().sum() - m.colwise().sum().transpose()).cwiseAbs().maxCoeff() <= tol;
          } else return (v - s.point).norm() <= tol;
        },
        v_);
  }

  /// Deterministic extreme-ish points used to seed multistart searches.
  std::vector<Vec> corner_points() const {
    std::vector<Vec> out;
    const int n = dimension();
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, SimplexWithFloor>) {
            for (int i = 0; i < n; ++i) {
              Vec e = Vec::Constant(n, s.floor);
              e[i] = 1.0 - (n - 1) * s.floor;
              out.push_back(std::move(e));
            }
          } else if constexpr (std::is_same_v<T, L2Ball>) {
            for (int i = 0; i < n; ++i)
              for (double sign : {1.0, -1.0}) {
                Vec e = s.center;
                e[i] += sign * s.radius;
                out.push_back(std::move(e));
              }
          } else if constexpr (std::is_same_v<T, StationaryPairMatrices>) {
            for (int i = 0; i < s.states; ++i) {
              Vec e = Vec::Zero(n);
              e[i * s.states + i] = 1.0;
              out.push_back(project_stationary_pairs(e, s.states, s.floor));
            }
          } else {
            out.push_back(s.point);
          }
        },
        v_);
    return out;
  }

  std::string describe() const {
    return std::visit(
        [](const auto& s) -> std::string {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, SimplexWithFloor>)
            return "simplex(d=" + std::to_string(s.dim) + ", floor=" + std::to_string(s.floor) + ")";
          else if constexpr (std::is_same_v<T, L2Ball>)
            return "ball(d=" + std::to_string(s.center.size()) + ", R=" + std::to_string(s.radius) + ")";
          else if constexpr (std::is_same_v<T, StationaryPairMatrices>)
            return "stationary_pairs(states=" + std::to_string(s.states) + ")";
          else return "singleton";
        },
        v_);
  }

private:
  explicit ParamSpace(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

/// Flat Dirichlet draw on the simplex via normalized exponential spacings.
inline Vec sample_flat_dirichlet(int d, Rng& rng) {
  Vec e(d);
  for (int i = 0; i < d; ++i) e[i] = rng.exponential();
  return e / e.sum();
}

/// Uniform draw from the space. The floored simplex is sampled by rejection from the flat
/// Dirichlet law, so the result is uniform on the constrained set.
inline Vec sample_param(const ParamSpace& space, Rng& rng) {
  return std::visit(
      [&](const auto& s) -> Vec {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SimplexWithFloor>) {
          for (int attempt = 0; attempt < kSampleRejectionBudget; ++attempt) {
            Vec p = sample_flat_dirichlet(s.dim, rng);
            if (p.minCoeff() >= s.floor) return p;
          }
          throw NumericalError("sample_param: rejection budget exhausted (floor " + std::to_string(s.floor) +
                               " too tight for d = " + std::to_string(s.dim) + ")");
        } else if constexpr (std::is_same_v<T, L2Ball>) {
          const auto d = s.center.size();
          Vec g(d);
          for (Eigen::Index i = 0; i < d; ++i) g[i] = rng.normal();
          const double radius = s.radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
          return s.center + radius * g / g.norm();
        } else if constexpr (std::is_same_v<T, StationaryPairMatrices>) {
          // Random transition kernel, its stationary law, then the pair measure.
          const int k = s.states;
          Mat p(k, k);
          for (int i = 0; i < k; ++i) p.row(i) = sample_flat_dirichlet(k, rng).transpose();
          Vec w = Vec::Constant(k, 1.0 / k);
          for (int it = 0; it < 2000; ++it) w = (w.transpose() * p).transpose();
          Vec flat(k * k);
          for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) flat[i * k + j] = w[i] * p(i, j);
          return project_stationary_pairs(flat, k, s.floor);
        } else {
          return s.point;
        }
      },
      space.variant());
}

// ---------------------------------------------------------------------------------------------
// Decision space

struct Interval {
  double lo;
  double hi;
};
struct SimplexDecisions {
  int dim;
};
struct BoxSimplex {
  double lo;
  double hi;
  int dim;
};

class DecisionSpace {
public:
  using Variant = std::variant<Interval, SimplexDecisions, BoxSimplex>;

  static DecisionSpace interval(double lo, double hi) {
    if (!(lo < hi)) throw DomainError("DecisionSpace::interval: need lo < hi");
    return DecisionSpace(Interval{lo, hi});
  }
  static DecisionSpace simplex(int dim) {
    if (dim < 1) throw DomainError("DecisionSpace::simplex: dimension must be positive");
    return DecisionSpace(SimplexDecisions{dim});
  }
  static DecisionSpace box_simplex(double lo, double hi, int dim) {
    if (!(lo < hi) || lo * dim > 1.0 || hi * dim < 1.0)
      throw DomainError("DecisionSpace::box_simplex: empty set");
    return DecisionSpace(BoxSimplex{lo, hi, dim});
  }

  const Variant& variant() const { return v_; }
  bool is_scalar() const { return std::holds_alternative<Interval>(v_); }

  int dimension() const {
    if (is_scalar()) return 1;
    if (auto* s = std::get_if<SimplexDecisions>(&v_)) return s->dim;
    return std::get<BoxSimplex>(v_).dim;
  }

  /// Scalar bounds; only valid for interval spaces.
  Interval bounds() const { return std::get<Interval>(v_); }

  Vec project(const Vec& x) const {
    if (x.size() != dimension()) throw DimensionError("DecisionSpace::project: dimension mismatch");
    if (auto* s = std::get_if<Interval>(&v_)) return Vec::Constant(1, std::clamp(x[0], s->lo, s->hi));
    if (std::holds_alternative<SimplexDecisions>(v_)) return project_simplex(x, 0.0).values();
    const auto& b = std::get<BoxSimplex>(v_);
    return project_capped_simplex(x, b.lo, b.hi, 1.0);
  }

  bool contains(const Vec& x, double tol = 1e-9) const {
    if (x.size() != dimension()) return false;
    if (auto* s = std::get_if<Interval>(&v_)) return x[0] >= s->lo - tol && x[0] <= s->hi + tol;
    if (std::holds_alternative<SimplexDecisions>(v_))
      return x.minCoeff() >= -tol && std::abs(x.sum() - 1.0) <= tol;
    const auto& b = std::get<BoxSimplex>(v_);
    return x.minCoeff() >= b.lo - tol && x.maxCoeff() <= b.hi + tol && std::abs(x.sum() - 1.0) <= tol;
  }

  double diameter() const {
    if (auto* s = std::get_if<Interval>(&v_)) return s->hi - s->lo;
    if (std::holds_alternative<SimplexDecisions>(v_)) return std::sqrt(2.0);
    const auto& b = std::get<BoxSimplex>(v_);
    return (b.hi - b.lo) * std::sqrt(static_cast<double>(b.dim));
  }

  Vec centroid() const {
    if (auto* s = std::get_if<Interval>(&v_)) return Vec::Constant(1, 0.5 * (s->lo + s->hi));
    const int d = dimension();
    return Vec::Constant(d, 1.0 / d);
  }

  /// Extreme points (simplex vertices; for the box-simplex a projected unit vector per axis).
  std::vector<Vec> vertices() const {
    std::vector<Vec> out;
    if (auto* s = std::get_if<Interval>(&v_)) {
      out.push_back(Vec::Constant(1, s->lo));
      out.push_back(Vec::Constant(1, s->hi));
      return out;
    }
    const int d = dimension();
    for (int i = 0; i < d; ++i) out.push_back(project(Vec::Unit(d, i) * 2.0));
    return out;
  }

  Vec sample(Rng& rng) const {
    if (auto* s = std::get_if<Interval>(&v_)) return Vec::Constant(1, rng.uniform(s->lo, s->hi));
    const int d = dimension();
    Vec p = sample_flat_dirichlet(d, rng);
    if (std::holds_alternative<SimplexDecisions>(v_)) return p;
    const auto& b = std::get<BoxSimplex>(v_);
    Vec raw(d);
    for (int i = 0; i < d; ++i) raw[i] = rng.uniform(b.lo, b.hi);
    return project(raw);
  }

private:
  explicit DecisionSpace(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

}  // namespace ldo
