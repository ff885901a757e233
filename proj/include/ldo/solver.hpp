#pragma once

// Min-max engine for G(x, z) = max_theta { g(x, theta) - l^{-1}(I_theta(z) - r) }:
// inner worst-case search, outer decision search, plug-in and DRO baselines, feasibility
// margins and the consistency gap.

#include "ldo/common.hpp"
#include "ldo/penalty.hpp"
#include "ldo/problems.hpp"
#include "ldo/rate.hpp"
#include "ldo/rng.hpp"
#include "ldo/spaces.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ldo {

struct SolverConfig {
  double r;
  Penalty penalty;
  RateFunction rate;
  int multistart = 32;
  int outer_multistart = 8;
  double inner_tol = 1e-8;
  double outer_tol = 1e-8;
  int max_iter = 2000;
  std::uint64_t seed = 0;

  SolverConfig(double r_, Penalty p, RateFunction rate_) : r(r_), penalty(p), rate(std::move(rate_)) { validate(); }

  void validate() const {
    if (!(r > 0.0)) throw DomainError("SolverConfig: r must be positive");
    if (!(inner_tol > 0.0) || !(outer_tol > 0.0)) throw DomainError("SolverConfig: tolerances must be positive");
    if (multistart < 1 || outer_multistart < 1 || max_iter < 1)
      throw DomainError("SolverConfig: iteration counts must be positive");
  }
};

struct InnerResult {
  Vec theta;
  double value = -kInf;
  int iterations = 0;
  int restarts = 0;
};

struct DecisionOutput {
  Vec x_star;
  double u_star = kInf;
  Vec theta_star;
  int iterations = 0;
  int restarts = 0;
  double grad_norm = 0.0;
};

// ---------------------------------------------------------------------------------------------
// Generic first-order routines

namespace detail {

inline constexpr std::uint64_t kInnerStreamId = 0x1a11;
inline constexpr std::uint64_t kOuterStreamId = 0x2b22;

/// Value and gradient; value -inf marks an infeasible point.
using ValueGrad = std::pair<double, Vec>;

struct AscentResult {
  Vec point;
  double value = -kInf;
  int iterations = 0;
  double step_norm = 0.0;
};

/// Projected gradient ascent with Barzilai-Borwein steps and Armijo backtracking along the
/// projection arc.
template <class F, class P>
AscentResult projected_ascent(F&& f, P&& proj, const Vec& start, int max_iter, double tol) {
  AscentResult res;
  Vec x = proj(start);
  auto [v, g] = f(x);
  res.point = x;
  res.value = v;
  if (!std::isfinite(v)) return res;
  double step = 1.0 / std::max(1.0, g.norm());
  int stalls = 0;
  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    bool accepted = false;
    Vec xn;
    double vn = -kInf;
    Vec gn;
    double dn = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      xn = proj(x + step * g);
      const Vec d = xn - x;
      dn = d.norm();
      if (dn <= 1e-15 * (1.0 + x.norm())) break;
      auto fv = f(xn);
      vn = fv.first;
      if (vn >= v + 1e-4 * g.dot(d)) {
        gn = std::move(fv.second);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    res.step_norm = dn;
    if (!accepted) break;
    const Vec dx = xn - x;
    const Vec dg = gn - g;
    const double curv = -dx.dot(dg);
    const double gain = vn - v;
    x = std::move(xn);
    v = vn;
    g = std::move(gn);
    step = curv > 0.0 ? std::clamp(dx.squaredNorm() / curv, 1e-14, 1e14) : std::min(step * 4.0, 1e14);
    if (gain <= 1e-15 * (1.0 + std::abs(v)) && dn <= tol) {
      if (++stalls >= 3) break;
    } else {
      stalls = 0;
    }
  }
  res.point = x;
  res.value = v;
  return res;
}

inline double golden_section(const std::function<double(double)>& f, double lo, double hi, double tol,
                             double* best_x, int* evals) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  int n = 2;
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
    ++n;
  }
  double x = fc <= fd ? c : d;
  double fx = std::min(fc, fd);
  for (double e : {lo, hi}) {
    const double fe = f(e);
    ++n;
    if (fe < fx) {
      fx = fe;
      x = e;
    }
  }
  if (best_x) *best_x = x;
  if (evals) *evals = n;
  return fx;
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// Inner maximization

namespace detail {

/// Projection onto the feasible region Theta ∩ (effective domain).
inline std::function<Vec(const Vec&)> region_projection(const EffectiveDomain& dom, const ParamSpace& space) {
  if (dom.kind != DomainKind::Ball) return [&space](const Vec& v) { return space.project(v); };
  const Vec center = dom.center;
  const double radius = dom.radius;
  if (auto* s = std::get_if<SimplexWithFloor>(&space.variant())) {
    const double floor = s->floor;
    return [center, radius, floor](const Vec& v) { return project_ball_simplex(v, center, radius, floor); };
  }
  if (auto* b = std::get_if<L2Ball>(&space.variant())) {
    if ((center - b->center).norm() + radius <= b->radius)
      return [center, radius](const Vec& v) { return project_l2_ball(v, center, radius); };
  }
  return [&space, center, radius](const Vec& v) {
    // Dykstra between the parameter space and the ball.
    Vec x = v;
    Vec p = Vec::Zero(v.size());
    Vec q = Vec::Zero(v.size());
    for (int k = 0; k < 200; ++k) {
      const Vec y = space.project(x + p);
      p = x + p - y;
      const Vec xn = project_l2_ball(y + q, center, radius);
      q = y + q - xn;
      x = xn;
    }
    return space.project(x);
  };
}

/// Starting points: project(z), the space's corner points, then seeded mixtures
/// (1-t) z + t s with s drawn from the space.
inline std::vector<Vec> inner_starts(const Vec& z, const ParamSpace& space,
                                     const std::function<Vec(const Vec&)>& proj, int count, std::uint64_t seed) {
  std::vector<Vec> starts;
  starts.push_back(proj(space.dimension() == z.size() ? z : space.project(Vec::Zero(space.dimension()))));
  for (const Vec& c : space.corner_points()) {
    if (static_cast<int>(starts.size()) >= count) break;
    starts.push_back(proj(c));
  }
  for (int k = 0; static_cast<int>(starts.size()) < count; ++k) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(k), kInnerStreamId);
    const Vec s = sample_param(space, rng);
    const double t = rng.uniform();
    starts.push_back(proj((1.0 - t) * z + t * s));
  }
  return starts;
}

}  // namespace detail

/// phi(theta) = g(x, theta) - l^{-1}(I_theta(z) - r) with its theta-gradient.
/// If `anchor` is set, the regret's min-cost term is replaced by c(anchor, theta) (DC surrogate).
inline detail::ValueGrad inner_objective(const Vec& x, const Vec& z, const Vec& theta, const DecisionProblem& problem,
                                         const SolverConfig& cfg, const EffectiveDomain& dom,
                                         const Vec* anchor = nullptr) {
  double value = problem.cost(x, theta);
  Vec grad = problem.cost_grad_theta(x, theta);
  if (problem.objective() == Objective::Regret) {
    if (anchor) {
      value -= problem.cost(*anchor, theta);
      grad -= problem.cost_grad_theta(*anchor, theta);
    } else {
      const MinCost m = problem.min_cost(theta);
      value -= m.value;
      grad -= problem.cost_grad_theta(m.x, theta);
    }
  }
  if (dom.kind == DomainKind::Ball || dom.kind == DomainKind::Singleton) {
    // Rate is 0 on the region.
    return {value - cfg.penalty.inverse(-cfg.r), grad};
  }
  auto [rate, rate_grad] = cfg.rate.eval_with_grad(theta, z);
  if (rate.is_infinite()) return {-kInf, grad};
  const double y = rate.value() - cfg.r;
  const double pen = cfg.penalty.inverse(y);
  if (!std::isfinite(pen)) return {-kInf, grad};
  const double dpen = cfg.penalty.inverse_derivative(y);
  if (!std::isfinite(dpen)) return {-kInf, grad};
  return {value - pen, grad - dpen * rate_grad};
}

/// Unpenalized-by-domain objective value at theta (any theta in Theta); -inf where the rate is infinite.
inline double inner_value(const Vec& x, const Vec& z, const Vec& theta, const DecisionProblem& problem,
                          const SolverConfig& cfg) {
  const ExtendedReal rate = cfg.rate.eval(theta, z);
  if (rate.is_infinite()) return -kInf;
  const double pen = cfg.penalty.inverse(rate.value() - cfg.r);
  if (!std::isfinite(pen)) return -kInf;
  return problem.g(x, theta) - pen;
}

/// theta* and G(x, z).
inline InnerResult worst_case_param(const Vec& x, const Vec& z, const DecisionProblem& problem,
                                    const SolverConfig& cfg) {
  const ParamSpace& space = problem.param_space();
  if (z.size() != space.dimension()) throw DimensionError("worst_case_param: z dimension mismatch");
  const EffectiveDomain dom = cfg.rate.effective_domain(z, space);
  InnerResult best;

  if (dom.kind == DomainKind::Singleton) {
    best.theta = z;
    best.value = problem.g(x, z) - cfg.penalty.inverse(-cfg.r);
    best.iterations = 1;
    return best;
  }
  if (auto* single = std::get_if<Singleton>(&space.variant())) {
    best.theta = single->point;
    best.value = inner_value(x, z, single->point, problem, cfg);
    best.iterations = 1;
    if (!std::isfinite(best.value))
      throw NumericalError("worst_case_param: the single parameter has infinite rate (no parameter with finite rate)");
    return best;
  }

  std::function<Vec(const Vec&)> proj;
  try {
    proj = detail::region_projection(dom, space);
    proj(z);
  } catch (const DomainError& e) {
    throw NumericalError(std::string("worst_case_param: empty feasible region (no parameter with finite rate): ") + e.what());
  }

  const bool regret = problem.objective() == Objective::Regret;
  const bool convex_rate = dom.kind == DomainKind::Ball || cfg.rate.convex_in_theta();
  const bool concave = !regret && convex_rate;
  const int nstarts = concave ? 1 : cfg.multistart;
  const auto starts = detail::inner_starts(z, space, proj, nstarts, cfg.seed);

  auto full = [&](const Vec& th) { return inner_objective(x, z, th, problem, cfg, dom); };

  // The surrogate is concave, so its maximizer depends only on the anchor; starts that reach the
  // same anchor (or the same DC fixed point) share one solve.
  std::vector<std::pair<Vec, detail::AscentResult>> surrogate_memo;
  std::vector<std::pair<Vec, detail::AscentResult>> polish_memo;
  auto lookup = [](std::vector<std::pair<Vec, detail::AscentResult>>& memo, const Vec& key) -> detail::AscentResult* {
    for (auto& [k, r] : memo)
      if ((k - key).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + key.lpNorm<Eigen::Infinity>())) return &r;
    return nullptr;
  };

  for (const Vec& s : starts) {
    detail::AscentResult run;
    if (regret && convex_rate) {
      // DC iteration: freeze the min-cost decision, solve the concave surrogate, repeat.
      Vec theta = s;
      double value = full(theta).first;
      if (!std::isfinite(value)) continue;
      int iters = 0;
      for (int round = 0; round < 50; ++round) {
        const Vec anchor = problem.min_cost(theta).x;
        detail::AscentResult sub;
        if (auto* hit = lookup(surrogate_memo, anchor)) {
          sub = *hit;
        } else {
          auto surrogate = [&](const Vec& th) { return inner_objective(x, z, th, problem, cfg, dom, &anchor); };
          sub = detail::projected_ascent(surrogate, proj, theta, cfg.max_iter, cfg.inner_tol);
          iters += sub.iterations;
          surrogate_memo.emplace_back(anchor, sub);
        }
        const double v_new = full(sub.point).first;
        if (!(v_new > value + 1e-15 * (1.0 + std::abs(value)))) break;
        theta = sub.point;
        value = v_new;
      }
      if (auto* hit = lookup(polish_memo, theta)) {
        run = *hit;
        run.iterations = 0;
      } else {
        run = detail::projected_ascent(full, proj, theta, cfg.max_iter, cfg.inner_tol);
        polish_memo.emplace_back(theta, run);
      }
      run.iterations += iters;
      if (run.value < value) {
        run.point = theta;
        run.value = value;
      }
    } else {
      run = detail::projected_ascent(full, proj, s, cfg.max_iter, cfg.inner_tol);
    }
    best.iterations += run.iterations;
    ++best.restarts;
    if (run.value > best.value) {
      best.value = run.value;
      best.theta = run.point;
    }
  }
  if (!std::isfinite(best.value))
    throw NumericalError("worst_case_param: no parameter with finite rate found from " +
                         std::to_string(starts.size()) + " starts (no finite rate at this z)");
  return best;
}

inline double G(const Vec& x, const Vec& z, const DecisionProblem& problem, const SolverConfig& cfg) {
  return worst_case_param(x, z, problem, cfg).value;
}

// ---------------------------------------------------------------------------------------------
// Outer minimization

namespace detail {

struct OuterResult {
  Vec x;
  double value = kInf;
  int iterations = 0;
  int restarts = 0;
  double grad_norm = 0.0;
};

/// Minimizes a convex function over the decision space. F(x) returns (value, subgradient).
template <class F>
OuterResult minimize_decision(const DecisionSpace& space, F&& f, const SolverConfig& cfg) {
  OuterResult best;
  if (space.is_scalar()) {
    const auto b = space.bounds();
    int evals = 0;
    double xb = b.lo;
    const double tol = std::max(cfg.outer_tol * 1e-1, 1e-10) * (b.hi - b.lo);
    auto scalar = [&](double t) { return f(Vec::Constant(1, t)).first; };
    best.value = golden_section(scalar, b.lo, b.hi, tol, &xb, &evals);
    best.x = Vec::Constant(1, xb);
    best.iterations = evals;
    best.restarts = 1;
    return best;
  }
  std::vector<Vec> starts{space.centroid()};
  for (const Vec& v : space.vertices()) starts.push_back(v);
  for (int k = 0; static_cast<int>(starts.size()) < cfg.outer_multistart; ++k) {
    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(k), kOuterStreamId);
    starts.push_back(space.sample(rng));
  }
  starts.resize(std::min<std::size_t>(starts.size(), static_cast<std::size_t>(cfg.outer_multistart)));
  const double a = 0.1 * space.diameter();
  const double bconst = 10.0;
  for (const Vec& s : starts) {
    Vec x = space.project(s);
    auto [v, g] = f(x);
    Vec xbest = x;
    double vbest = v;
    double step = 1.0 / std::max(1.0, g.norm());
    bool subgradient_mode = false;
    int k_sub = 0;
    int it = 0;
    for (; it < cfg.max_iter; ++it) {
      if (!subgradient_mode) {
        bool accepted = false;
        Vec xn;
        double vn = kInf;
        Vec gn;
        double dn = 0.0;
        for (int ls = 0; ls < 50; ++ls) {
          xn = space.project(x - step * g);
          dn = (xn - x).norm();
          if (dn <= 1e-15) break;
          auto fv = f(xn);
          vn = fv.first;
          if (vn <= v + 1e-4 * g.dot(xn - x)) {
            gn = std::move(fv.second);
            accepted = true;
            break;
          }
          step *= 0.5;
        }
        if (!accepted) {
          if (dn <= cfg.outer_tol * 1e-3) break;  // projected-gradient stationary
          subgradient_mode = true;
          continue;
        }
        const Vec dx = xn - x;
        const Vec dg = gn - g;
        const double curv = dx.dot(dg);
        x = std::move(xn);
        v = vn;
        g = std::move(gn);
        if (v < vbest) {
          vbest = v;
          xbest = x;
        }
        if (dx.norm() <= cfg.outer_tol) break;
        step = curv > 0.0 ? std::clamp(dx.squaredNorm() / curv, 1e-12, 1e6) : std::min(step * 4.0, 1e6);
      } else {
        const double gnorm = g.norm();
        if (gnorm == 0.0) break;
        const double t = a / (k_sub++ + bconst);
        x = space.project(x - (t / gnorm) * g);
        auto fv = f(x);
        v = fv.first;
        g = std::move(fv.second);
        if (v < vbest) {
          vbest = v;
          xbest = x;
        }
        if (t < cfg.outer_tol) break;
      }
    }
    best.iterations += it;
    ++best.restarts;
    if (vbest < best.value) {
      best.value = vbest;
      best.x = xbest;
      best.grad_norm = g.norm();
    }
  }
  return best;
}

}  // namespace detail

inline Vec plugin_decision(const Vec& z, const DecisionProblem& problem) { return problem.min_cost(z).x; }

inline DecisionOutput optimal_decision(const Vec& z, const DecisionProblem& problem, const SolverConfig& cfg) {
  DecisionOutput out;
  const EffectiveDomain dom = cfg.rate.effective_domain(z, problem.param_space());
  if (dom.kind == DomainKind::Singleton) {
    // G(x, z) = g(x, z) - l^{-1}(-r): minimized by the plug-in decision for both objectives.
    out.x_star = plugin_decision(z, problem);
    out.theta_star = z;
    out.u_star = problem.g(out.x_star, z) - cfg.penalty.inverse(-cfg.r);
    out.iterations = 1;
    out.restarts = 1;
    return out;
  }
  auto f = [&](const Vec& x) -> detail::ValueGrad {
    InnerResult in = worst_case_param(x, z, problem, cfg);
    return {in.value, problem.cost_grad_x(x, in.theta)};
  };
  detail::OuterResult res = detail::minimize_decision(problem.decision_space(), f, cfg);
  InnerResult final_inner = worst_case_param(res.x, z, problem, cfg);
  out.x_star = res.x;
  out.u_star = final_inner.value;
  out.theta_star = final_inner.theta;
  out.iterations = res.iterations;
  out.restarts = res.restarts;
  out.grad_norm = res.grad_norm;
  return out;
}

// ---------------------------------------------------------------------------------------------
// DRO baselines

struct BallAmbiguity {
  double radius;
};
struct RateLevelSet {
  RateFunction rate;
  double level;
};
using Ambiguity = std::variant<BallAmbiguity, RateLevelSet>;

namespace detail {

/// max w'theta over Theta.
inline Vec linear_max_space(const Vec& w, const ParamSpace& space) {
  if (auto* s = std::get_if<SimplexWithFloor>(&space.variant())) {
    Eigen::Index k;
    w.maxCoeff(&k);
    Vec v = Vec::Constant(w.size(), s->floor);
    v[k] = 1.0 - s->floor * static_cast<double>(w.size() - 1);
    return v;
  }
  if (auto* b = std::get_if<L2Ball>(&space.variant())) {
    const double wn = w.norm();
    return wn == 0.0 ? b->center : Vec(b->center + b->radius * w / wn);
  }
  if (auto* p = std::get_if<Singleton>(&space.variant())) return p->point;
  auto lin = [&](const Vec& th) -> ValueGrad { return {w.dot(th), w}; };
  auto proj = [&](const Vec& v) { return space.project(v); };
  return projected_ascent(lin, proj, space.project(Vec::Constant(w.size(), 1.0 / w.size())), 4000, 1e-14).point;
}

/// max w'theta over B_center(R) ∩ Theta. On the floored simplex the maximizer is
/// P(center + w / mu), mu the multiplier of the active ball, found by bisection in log mu.
inline Vec linear_max_ball(const Vec& w, const Vec& center, double radius, const ParamSpace& space) {
  if (radius == 0.0) return center;
  const Vec global = linear_max_space(w, space);
  if ((global - center).norm() <= radius) return global;
  if (auto* s = std::get_if<SimplexWithFloor>(&space.variant())) {
    const double floor = s->floor;
    // Shifting w by a constant leaves w'theta unchanged up to a constant on the simplex.
    const Vec wc = (w.array() - w.mean()).matrix();
    const double scale = wc.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) return center;
    auto at = [&](double log_mu) { return project_simplex(center + wc * std::exp(-log_mu), floor).values(); };
    const double log_min = std::log(scale) - 40.0;  // beyond e^40 / scale the projection is a vertex
    double lo = 0.0;
    while ((at(lo) - center).norm() <= radius && lo > log_min) lo = std::max(lo - 5.0, log_min);
    double hi = 0.0;
    while ((at(hi) - center).norm() > radius && hi < 700.0) hi += 5.0;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (lo + hi);
      if (m <= lo || m >= hi) break;
      ((at(m) - center).norm() > radius ? lo : hi) = m;
    }
    return at(hi);
  }
  if (std::holds_alternative<L2Ball>(space.variant())) {
    const double wn = w.norm();
    Vec cand = wn == 0.0 ? center : Vec(center + radius * w / wn);
    if (space.contains(cand, 0.0)) return cand;
  }
  auto proj = region_projection(EffectiveDomain{DomainKind::Ball, center, radius}, space);
  auto lin = [&](const Vec& th) -> ValueGrad { return {w.dot(th), w}; };
  return projected_ascent(lin, proj, center, 4000, 1e-14).point;
}

/// max c(x, theta) over {theta in Theta : I_theta(z) <= level}, via bisection on the Lagrange
/// multiplier of the level constraint.
inline std::pair<Vec, double> level_set_max(const Vec& x, const Vec& z, const DecisionProblem& problem,
                                            const RateFunction& rate, double level) {
  const ParamSpace& space = problem.param_space();
  auto proj = [&](const Vec& v) { return space.project(v); };
  const Vec w = problem.cost_grad_theta(x, z);  // costs are affine in theta; gradient is theta-free
  auto solve = [&](double lambda, const Vec& start) {
    auto obj = [&](const Vec& th) -> ValueGrad {
      auto [val, grad] = rate.eval_with_grad(th, z);
      if (val.is_infinite()) return {-kInf, w};
      return {problem.cost(x, th) - lambda * val.value(), problem.cost_grad_theta(x, th) - lambda * grad};
    };
    return projected_ascent(obj, proj, start, 4000, 1e-12).point;
  };
  // Feasibility: the rate minimizer must satisfy the level.
  auto min_rate = [&](const Vec& th) -> ValueGrad {
    auto [val, grad] = rate.eval_with_grad(th, z);
    if (val.is_infinite()) return {-kInf, grad};
    return {-val.value(), -grad};
  };
  const Vec th_min = projected_ascent(min_rate, proj, space.project(z), 4000, 1e-14).point;
  const ExtendedReal rmin = rate.eval(th_min, z);
  if (rmin.is_infinite() || rmin.value() > level)
    throw NumericalError("dro_decision: empty level set {theta : I_theta(z) <= " + std::to_string(level) +
                         "} (no finite rate at this z)");
  // lambda = 0: unconstrained linear maximum over Theta.
  const Vec th0 = linear_max_space(w, space);
  const ExtendedReal r0 = rate.eval(th0, z);
  if (r0.is_finite() && r0.value() <= level) return {th0, problem.cost(x, th0)};
  double lo = 0.0;
  double hi = 1.0;
  Vec th_hi = solve(hi, th_min);
  while (rate.eval(th_hi, z).as_double() > level) {
    lo = hi;
    hi *= 4.0;
    th_hi = solve(hi, th_hi);
    if (hi > 1e12) break;
  }
  for (int it = 0; it < 100 && hi - lo > 1e-12 * hi; ++it) {
    const double m = 0.5 * (lo + hi);
    Vec th = solve(m, th_hi);
    if (rate.eval(th, z).as_double() > level) lo = m;
    else {
      hi = m;
      th_hi = std::move(th);
    }
  }
  return {th_hi, problem.cost(x, th_hi)};
}

}  // namespace detail

/// Worst-case cost over the ambiguity set at z, and its maximizer.
inline std::pair<Vec, double> dro_worst_case(const Vec& x, const Vec& z, const DecisionProblem& problem,
                                             const Ambiguity& amb) {
  if (auto* b = std::get_if<BallAmbiguity>(&amb)) {
    const Vec w = problem.cost_grad_theta(x, z);
    Vec th = detail::linear_max_ball(w, z, b->radius, problem.param_space());
    return {th, problem.cost(x, th)};
  }
  const auto& ls = std::get<RateLevelSet>(amb);
  return detail::level_set_max(x, z, problem, ls.rate, ls.level);
}

inline Vec dro_decision(const Vec& z, const DecisionProblem& problem, const Ambiguity& amb, const SolverConfig& cfg) {
  if (auto* b = std::get_if<BallAmbiguity>(&amb); b && b->radius == 0.0) return plugin_decision(z, problem);
  auto f = [&](const Vec& x) -> detail::ValueGrad {
    auto [th, v] = dro_worst_case(x, z, problem, amb);
    return {v, problem.cost_grad_x(x, th)};
  };
  return detail::minimize_decision(problem.decision_space(), f, cfg).x;
}

// ---------------------------------------------------------------------------------------------
// Feasibility and consistency

enum class MarginVariant { Pairwise, MinMin };

/// max over (z, theta) of l(g(X(z), theta) - u(z)) - (I_theta(z) - r); pairs with infinite
/// rate are skipped. MinMin replaces g(X(z), theta) by min_x g(x, theta).
inline double feasibility_margin(const std::function<Vec(const Vec&)>& X, const std::function<double(const Vec&)>& u,
                                 const DecisionProblem& problem, const SolverConfig& cfg,
                                 const std::vector<Vec>& z_grid, const std::vector<Vec>& theta_grid,
                                 MarginVariant variant = MarginVariant::Pairwise) {
  double margin = -kInf;
  for (const Vec& z : z_grid) {
    const double uz = u(z);
    const Vec xz = variant == MarginVariant::Pairwise ? X(z) : Vec();
    for (const Vec& th : theta_grid) {
      const ExtendedReal rate = cfg.rate.eval(th, z);
      if (rate.is_infinite()) continue;
      double gval;
      if (variant == MarginVariant::Pairwise) gval = problem.g(xz, th);
      else gval = problem.objective() == Objective::Cost ? problem.min_cost(th).value : 0.0;
      const double m = cfg.penalty.forward(gval - uz) - (rate.value() - cfg.r);
      margin = std::max(margin, m);
    }
  }
  return margin;
}

/// Regret at theta of the optimal decision evaluated at the data limit Z_inf(theta).
inline double consistency_gap(const Vec& theta, const DecisionProblem& problem, const SolverConfig& cfg) {
  const DecisionOutput out = optimal_decision(problem.limit_map(theta), problem, cfg);
  return problem.regret(out.x_star, theta);
}

}  // namespace ldo
