#pragma once

// Exact finite-n checks by the method of types: multinomial law of the empirical measure,
// (robust) Sanov sandwich bounds, Laplace-principle convergence and rate-function regularity
// probes.

#include "ldo/common.hpp"
#include "ldo/parallel.hpp"
#include "ldo/rate.hpp"
#include "ldo/rng.hpp"
#include "ldo/spaces.hpp"

#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace ldo {

inline constexpr double kEnumerationCap = 2e5;

inline double log_sum_exp(const std::vector<double>& xs) {
  double m = -kInf;
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

/// log P(Z_n = z) for every type z with positive probability.
struct ExactTypeDistribution {
  int d = 0;
  int n = 0;
  std::vector<std::vector<int>> counts;
  std::vector<double> log_prob;

  std::size_t size() const { return counts.size(); }
  Vec type(std::size_t k) const {
    Vec z(d);
    for (int i = 0; i < d; ++i) z[i] = static_cast<double>(counts[k][i]) / n;
    return z;
  }
  /// log of the total mass; 0 up to rounding.
  double log_total() const { return log_sum_exp(log_prob); }
};

inline ExactTypeDistribution exact_type_distribution(const Vec& theta, int n, double cap = kEnumerationCap) {
  const int d = static_cast<int>(theta.size());
  if (d < 2 || n < 1) throw DomainError("exact_type_distribution: need d >= 2 and n >= 1");
  if (theta.minCoeff() < 0.0 || std::abs(theta.sum() - 1.0) > 1e-12)
    throw DomainError("exact_type_distribution: theta is not a probability vector");
  const double count = type_count(d, n);
  if (count > cap)
    throw CapExceeded("exact_type_distribution: " + std::to_string(count) + " types exceed cap " +
                      std::to_string(cap));
  ExactTypeDistribution out;
  out.d = d;
  out.n = n;
  out.counts.reserve(static_cast<std::size_t>(count));
  out.log_prob.reserve(static_cast<std::size_t>(count));
  Vec log_theta(d);
  for (int i = 0; i < d; ++i) log_theta[i] = theta[i] > 0.0 ? std::log(theta[i]) : -kInf;
  const double log_nfact = std::lgamma(n + 1.0);
  for_each_composition(d, n, [&](const std::vector<int>& c) {
    double lp = log_nfact;
    for (int i = 0; i < d; ++i) {
      if (c[i] == 0) continue;
      if (theta[i] == 0.0) return;  // zero probability
      lp += c[i] * log_theta[i] - std::lgamma(c[i] + 1.0);
    }
    out.counts.push_back(c);
    out.log_prob.push_back(lp);
  });
  return out;
}

// ---------------------------------------------------------------------------------------------
// Sanov sandwich

struct SanovReport {
  int d = 0;
  int n = 0;
  double radius = 0.0;
  bool degenerate = false;  // A ∩ L_n empty
  double log_prob = -kInf;  // log sup over the ball grid of P(Z_n in A)
  double min_rate = kInf;   // min over A ∩ L_n of the (robust) relative entropy
  double slack = 0.0;       // d log(n + 1)
  double deviation = 0.0;   // |log_prob + n min_rate|
  int grid_points = 0;
  bool holds = true;
  Vec argmin_type;
  Vec worst_theta;
};

/// Low-discrepancy points of B_theta(R) ∩ simplex: Halton points of the cube mapped into the
/// sum-zero subspace, kept if they fall in the ball and on the simplex; theta itself first.
inline std::vector<Vec> ball_grid(const Vec& theta, double radius, int size) {
  std::vector<Vec> pts{theta};
  if (radius == 0.0 || size <= 1) return pts;
  const int d = static_cast<int>(theta.size());
  // Orthonormal basis of {v : sum v = 0}.
  Mat a = Mat::Identity(d, d);
  a.col(0).setOnes();
  Eigen::HouseholderQR<Mat> qr(a);
  const Mat q = qr.householderQ();
  const Mat basis = q.rightCols(d - 1);
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47};
  auto halton = [](long idx, int base) {
    double f = 1.0;
    double r = 0.0;
    while (idx > 0) {
      f /= base;
      r += f * (idx % base);
      idx /= base;
    }
    return r;
  };
  for (long idx = 1; static_cast<int>(pts.size()) < size && idx < 1000L * size; ++idx) {
    Vec u(d - 1);
    for (int j = 0; j < d - 1; ++j) u[j] = 2.0 * halton(idx, primes[j % 15]) - 1.0;
    if (u.norm() > 1.0) continue;
    const Vec p = theta + radius * basis * u;
    if (p.minCoeff() < 0.0) continue;
    pts.push_back(p);
  }
  return pts;
}

/// sup_{theta' in B_theta(R)} P_theta'(Z_n in A) against exp(-n min_{A ∩ L_n} I^R_theta):
/// the two must agree within a factor (n + 1)^d in either direction.
///
/// The supremum is taken over a finite grid of the ball that contains the minimizer theta'*
/// of the robust rate at the minimizing type, which keeps the lower bound exact; the grid sup
/// never exceeds the true sup, so the upper bound stays sound.
inline SanovReport sanov_sandwich_check(const Vec& theta, int n, const std::function<bool(const Vec&)>& in_A,
                                        double radius, int ball_grid_size = 50, double cap = kEnumerationCap) {
  SanovReport rep;
  rep.d = static_cast<int>(theta.size());
  rep.n = n;
  rep.radius = radius;
  rep.slack = rep.d * std::log(n + 1.0);
  if (type_count(rep.d, n) > cap) throw CapExceeded("sanov_sandwich_check: lattice exceeds cap");

  std::vector<std::vector<int>> in_set;
  for_each_composition(rep.d, n, [&](const std::vector<int>& c) {
    Vec z(rep.d);
    for (int i = 0; i < rep.d; ++i) z[i] = static_cast<double>(c[i]) / n;
    if (!in_A(z)) return;
    in_set.push_back(c);
    const ExtendedReal v = robust_rel_entropy(theta, z, radius, 0.0);
    if (v.as_double() < rep.min_rate) {
      rep.min_rate = v.as_double();
      rep.argmin_type = z;
    }
  });
  if (in_set.empty()) {
    rep.degenerate = true;
    return rep;
  }

  std::vector<Vec> grid = ball_grid(theta, radius, ball_grid_size);
  if (radius > 0.0) grid.push_back(robust_rel_entropy_solve(theta, rep.argmin_type, radius, 0.0).theta_prime);
  rep.grid_points = static_cast<int>(grid.size());
  const double log_nfact = std::lgamma(n + 1.0);
  for (const Vec& tp : grid) {
    std::vector<double> terms;
    terms.reserve(in_set.size());
    for (const auto& c : in_set) {
      double lp = log_nfact;
      bool zero = false;
      for (int i = 0; i < rep.d && !zero; ++i) {
        if (c[i] == 0) continue;
        if (tp[i] <= 0.0) zero = true;
        else lp += c[i] * std::log(tp[i]) - std::lgamma(c[i] + 1.0);
      }
      if (!zero) terms.push_back(lp);
    }
    const double lp = log_sum_exp(terms);
    if (lp > rep.log_prob) {
      rep.log_prob = lp;
      rep.worst_theta = tp;
    }
  }
  rep.deviation = std::abs(rep.log_prob + n * rep.min_rate);
  rep.holds = std::isfinite(rep.log_prob) && rep.deviation <= rep.slack + 1e-9;
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Laplace principle

struct LaplaceRow {
  int n;
  double lhs;
  double rhs;
  double error;
};

/// max over the 1/m simplex grid of f(z) - rel_entropy(theta, z).
inline double laplace_rhs(const Vec& theta, const std::function<double(const Vec&)>& f, int m,
                          double cap = 1e7) {
  const int d = static_cast<int>(theta.size());
  if (type_count(d, m) > cap) throw CapExceeded("laplace_rhs: grid exceeds cap");
  double best = -kInf;
  for_each_composition(d, m, [&](const std::vector<int>& c) {
    Vec z(d);
    for (int i = 0; i < d; ++i) z[i] = static_cast<double>(c[i]) / m;
    const ExtendedReal ent = rel_entropy(theta, z);
    if (ent.is_infinite()) return;
    best = std::max(best, f(z) - ent.value());
  });
  return best;
}

/// lhs_n = (1/n) log E_theta exp(n f(Z_n)), exact over the type lattice.
inline double laplace_lhs(const Vec& theta, const std::function<double(const Vec&)>& f, int n,
                          double cap = kEnumerationCap) {
  const ExactTypeDistribution dist = exact_type_distribution(theta, n, cap);
  std::vector<double> terms(dist.size());
  for (std::size_t k = 0; k < dist.size(); ++k) terms[k] = dist.log_prob[k] + n * f(dist.type(k));
  return log_sum_exp(terms) / n;
}

inline std::vector<LaplaceRow> laplace_convergence(const Vec& theta, const std::function<double(const Vec&)>& f,
                                                   const std::vector<int>& n_list, int grid_resolution,
                                                   double cap = kEnumerationCap) {
  const double rhs = laplace_rhs(theta, f, grid_resolution);
  std::vector<LaplaceRow> rows(n_list.size());
  parallel_for(n_list.size(), [&](std::size_t k) {
    const double lhs = laplace_lhs(theta, f, n_list[k], cap);
    rows[k] = {n_list[k], lhs, rhs, std::abs(lhs - rhs)};
  });
  return rows;
}

// ---------------------------------------------------------------------------------------------
// Regularity probes

struct ProbeReport {
  int checked[3] = {0, 0, 0};
  int passed[3] = {0, 0, 0};
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

namespace detail {

inline std::string fmt_vec(const Vec& v) {
  std::ostringstream os;
  os.precision(6);
  os << '(';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ')';
  return os.str();
}

/// Uniform point of the floored simplex with coordinate `zero` pinned to the floor.
inline Vec boundary_point(int d, double floor, int zero, Rng& rng) {
  Vec p = sample_flat_dirichlet(d, rng);
  p[zero] = 0.0;
  p /= p.sum();
  p = p * (1.0 - d * floor);
  return (p.array() + floor).matrix();
}

}  // namespace detail

/// Probes the three regularity properties of a rate on a simplex-type parameter space:
///  (I)   every sampled z has some theta with finite rate;
///  (II)  lower semicontinuity along sampled sequences (theta_k, z_k) -> (theta, z);
///  (III) for boundary theta and z_k -> z, the mixture theta_k = ((k-1)/k) theta + z_k / k
///        gives I_{theta_k}(z_k) -> I_theta(z) (checked at k = 10^4).
/// Sequences move from the limit point by `scale` times a random direction over k.
inline ProbeReport assumption_probe(const RateFunction& rate, const ParamSpace& space, int samples,
                                    std::uint64_t seed, double scale = 0.01) {
  ProbeReport rep;
  const int d = space.dimension();
  const double floor = space.floor();
  auto eval = [&](const Vec& th, const Vec& z) { return rate.eval(th, z); };

  for (int s = 0; s < samples; ++s) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(s), 0x9b0e);

    // (I) domain non-emptiness.
    {
      const Vec z = sample_flat_dirichlet(d, rng);
      std::vector<Vec> cands{space.project(z)};
      for (const Vec& c : space.corner_points()) cands.push_back(c);
      if (space.contains(z)) cands.push_back(z);
      bool found = false;
      for (const Vec& c : cands)
        if (eval(c, z).is_finite()) {
          found = true;
          break;
        }
      ++rep.checked[0];
      if (found) ++rep.passed[0];
      else rep.failures.push_back("(I) no finite-rate theta for z = " + detail::fmt_vec(z));
    }

    // (II) lower semicontinuity along k in {1e8, 1e10, 1e12}.
    {
      const Vec theta = sample_param(space, rng);
      const Vec z = sample_flat_dirichlet(d, rng);
      const Vec theta_dir = sample_param(space, rng) - theta;
      const Vec z_dir = sample_flat_dirichlet(d, rng) - z;
      const ExtendedReal limit = eval(theta, z);
      std::vector<double> tail;
      for (double k : {1e8, 1e10, 1e12}) tail.push_back(eval(theta + theta_dir / k, z + z_dir / k).as_double());
      bool ok;
      // Finite k carries an O(|grad| / k) offset, so only the far tail estimates the liminf.
      if (limit.is_finite()) ok = std::min(tail[1], tail[2]) >= limit.value() - 1e-6 * (1.0 + std::abs(limit.value()));
      else ok = std::is_sorted(tail.begin(), tail.end());  // diverging towards +inf
      ++rep.checked[1];
      if (ok) ++rep.passed[1];
      else
        rep.failures.push_back("(II) liminf below limit at theta = " + detail::fmt_vec(theta) +
                               ", z = " + detail::fmt_vec(z));
    }

    // (III) edge continuity through the mixture sequence.
    {
      const int zero = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(d));
      const Vec theta = detail::boundary_point(d, floor, zero, rng);
      // z near theta and with no mass beyond theta's support, so I_theta(z) < inf.
      Vec z = theta + scale * (detail::boundary_point(d, floor, zero, rng) - theta);
      const Vec w = z + scale * (sample_flat_dirichlet(d, rng) * (1.0 - d * floor) + Vec::Constant(d, floor) - z);
      const ExtendedReal limit = eval(theta, z);
      const double k = 1e4;
      const Vec zk = z + (w - z) / k;
      const Vec thk = ((k - 1.0) / k) * theta + zk / k;
      const ExtendedReal vk = eval(thk, zk);
      const bool ok = limit.is_finite() && vk.is_finite() && std::abs(vk.value() - limit.value()) <= 1e-4;
      ++rep.checked[2];
      if (ok) ++rep.passed[2];
      else
        rep.failures.push_back("(III) mixture sequence misses the limit at theta = " + detail::fmt_vec(theta) +
                               ", z = " + detail::fmt_vec(z) + ": " + std::to_string(vk.as_double()) + " vs " +
                               std::to_string(limit.as_double()));
    }
  }
  return rep;
}

}  // namespace ldo
