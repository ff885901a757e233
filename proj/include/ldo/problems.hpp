#pragma once

// Decision problems: newsvendor, mean-variance portfolio and finite-state expected loss.

#include "ldo/common.hpp"
#include "ldo/csv.hpp"
#include "ldo/spaces.hpp"

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace ldo {

enum class Objective { Cost, Regret };

inline const char* to_string(Objective g) { return g == Objective::Cost ? "cost" : "regret"; }

inline Objective parse_objective(const std::string& s) {
  if (s == "cost") return Objective::Cost;
  if (s == "regret") return Objective::Regret;
  throw DomainError("unknown objective '" + s + "' (expected cost or regret)");
}

/// Newsvendor with per-state demand: h(x, i) = kappa x + rho x^2 - p min(x, demand_i).
struct NewsvendorCost {
  double kappa;
  double price;
  double rho;
  Vec demand;
};

/// -x'theta + rho x' Sigma x.
struct PortfolioCost {
  double rho;
  Mat sigma;
};

/// h(x, i) = piecewise-linear interpolation of loss(i, .) on `grid`, plus rho x^2.
struct FiniteLossCost {
  Vec grid;
  Mat loss;  // states x grid points
  double rho;
};

struct MinCost {
  Vec x;
  double value;
};

class DecisionProblem {
public:
  using Cost = std::variant<NewsvendorCost, PortfolioCost, FiniteLossCost>;

  DecisionProblem(Cost cost, DecisionSpace decisions, ParamSpace params, Objective g = Objective::Cost)
      : cost_(std::move(cost)), x_space_(std::move(decisions)), theta_space_(std::move(params)), g_(g) {
    validate();
  }

  /// Classic newsvendor: demand on {1, ..., d}, orders on [0, d].
  static DecisionProblem newsvendor(double kappa, double price, double rho, int d, double floor = 0.001,
                                    Objective g = Objective::Cost) {
    Vec demand(d);
    for (int i = 0; i < d; ++i) demand[i] = i + 1;
    return DecisionProblem(NewsvendorCost{kappa, price, rho, demand}, DecisionSpace::interval(0.0, d),
                           ParamSpace::simplex(d, floor), g);
  }

  /// Newsvendor driven by a Markov chain on {1, ..., s}: theta is a stationary pair measure and
  /// the demand of pair (i, j) is the next state j.
  static DecisionProblem markov_newsvendor(double kappa, double price, double rho, int states, double floor = 0.01,
                                           Objective g = Objective::Cost) {
    Vec demand(states * states);
    for (int i = 0; i < states; ++i)
      for (int j = 0; j < states; ++j) demand[i * states + j] = j + 1;
    return DecisionProblem(NewsvendorCost{kappa, price, rho, demand}, DecisionSpace::interval(0.0, states),
                           ParamSpace::stationary_pairs(states, floor), g);
  }

  static DecisionProblem portfolio(double rho, const Mat& sigma, bool short_selling = false,
                                   double theta_radius = 10000.0, Objective g = Objective::Cost) {
    const int d = static_cast<int>(sigma.rows());
    DecisionSpace xs = short_selling ? DecisionSpace::box_simplex(-1.0, 1.0, d) : DecisionSpace::simplex(d);
    return DecisionProblem(PortfolioCost{rho, sigma}, std::move(xs), ParamSpace::ball(Vec::Zero(d), theta_radius),
                           g);
  }

  static DecisionProblem finite_loss(Vec grid, Mat loss, double rho, double floor = 0.001,
                                     Objective g = Objective::Cost) {
    const int states = static_cast<int>(loss.rows());
    const double lo = grid.size() ? grid[0] : 0.0;
    const double hi = grid.size() ? grid[grid.size() - 1] : 0.0;
    return DecisionProblem(FiniteLossCost{std::move(grid), std::move(loss), rho}, DecisionSpace::interval(lo, hi),
                           ParamSpace::simplex(states, floor), g);
  }

  DecisionProblem with_objective(Objective g) const {
    DecisionProblem p = *this;
    p.g_ = g;
    return p;
  }
  DecisionProblem with_param_space(ParamSpace space) const {
    DecisionProblem p = *this;
    p.theta_space_ = std::move(space);
    p.validate();
    return p;
  }

  const Cost& cost_model() const { return cost_; }
  const DecisionSpace& decision_space() const { return x_space_; }
  const ParamSpace& param_space() const { return theta_space_; }
  Objective objective() const { return g_; }
  int param_dim() const { return theta_space_.dimension(); }

  /// Z_infinity(theta): the data limit under theta. All supported settings use the identity.
  Vec limit_map(const Vec& theta) const { return theta; }

  // -------------------------------------------------------------------------------------------
  // Cost and derivatives

  double cost(const Vec& x, const Vec& theta) const {
    check_x(x);
    if (theta.size() != param_dim()) throw DimensionError("cost: theta dimension mismatch");
    return std::visit(
        [&](const auto& c) -> double {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, PortfolioCost>) return -x.dot(theta) + c.rho * x.dot(c.sigma * x);
          else return theta.dot(state_losses(c, x[0]));
        },
        cost_);
  }

  /// theta-gradient of the cost (costs are affine in theta).
  Vec cost_grad_theta(const Vec& x, const Vec& theta) const {
    check_x(x);
    (void)theta;
    return std::visit(
        [&](const auto& c) -> Vec {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, PortfolioCost>) return -x;
          else return state_losses(c, x[0]);
        },
        cost_);
  }

  /// x-gradient of the cost (right derivative at scalar breakpoints).
  Vec cost_grad_x(const Vec& x, const Vec& theta) const {
    check_x(x);
    return std::visit(
        [&](const auto& c) -> Vec {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, PortfolioCost>) return -theta + 2.0 * c.rho * (c.sigma * x);
          else return Vec::Constant(1, scalar_derivative(c, x[0], theta));
        },
        cost_);
  }

  MinCost min_cost(const Vec& theta) const {
    if (theta.size() != param_dim()) throw DimensionError("min_cost: theta dimension mismatch");
    return std::visit(
        [&](const auto& c) -> MinCost {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, PortfolioCost>) return portfolio_min(c, theta);
          else return scalar_min(c, theta);
        },
        cost_);
  }

  double regret(const Vec& x, const Vec& theta) const {
    return std::max(0.0, cost(x, theta) - min_cost(theta).value);
  }

  Vec regret_theta_subgradient(const Vec& x, const Vec& theta) const {
    const MinCost m = min_cost(theta);
    return cost_grad_theta(x, theta) - cost_grad_theta(m.x, theta);
  }

  /// The objective g(x, theta) selected by `objective()`.
  double g(const Vec& x, const Vec& theta) const {
    return g_ == Objective::Cost ? cost(x, theta) : cost(x, theta) - min_cost(theta).value;
  }

  /// Modulus m with c((x1+x2)/2) <= (c(x1)+c(x2))/2 - m ||x1-x2||^2 / 4 for theta on the simplex.
  double strong_convexity() const {
    return std::visit(
        [&](const auto& c) -> double {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, PortfolioCost>) {
            Eigen::SelfAdjointEigenSolver<Mat> es(c.sigma);
            return c.rho * es.eigenvalues().minCoeff();
          } else {
            return c.rho;
          }
        },
        cost_);
  }

  std::string describe() const {
    return std::visit(
        [](const auto& c) -> std::string {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, NewsvendorCost>) return "newsvendor";
          else if constexpr (std::is_same_v<T, PortfolioCost>) return "portfolio";
          else return "finite_loss";
        },
        cost_);
  }

private:
  void check_x(const Vec& x) const {
    if (x.size() != x_space_.dimension()) throw DimensionError("cost: decision dimension mismatch");
    if (x_space_.is_scalar()) {
      const auto b = x_space_.bounds();
      if (!(x[0] >= b.lo && x[0] <= b.hi))
        throw DomainError("cost: decision " + std::to_string(x[0]) + " outside [" + std::to_string(b.lo) + ", " +
                          std::to_string(b.hi) + "]");
    }
  }

  void validate() const {
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, NewsvendorCost>) {
            if (!(c.rho > 0.0)) throw DomainError("newsvendor: rho must be positive");
            if (!(c.kappa >= 0.0 && c.price > c.kappa)) throw DomainError("newsvendor: need p > kappa >= 0");
            if (c.demand.size() != theta_space_.dimension())
              throw DimensionError("newsvendor: demand vector does not match the parameter dimension");
            if (!x_space_.is_scalar()) throw DomainError("newsvendor: decision space must be an interval");
          } else if constexpr (std::is_same_v<T, PortfolioCost>) {
            if (!(c.rho > 0.0)) throw DomainError("portfolio: rho must be positive");
            if (c.sigma.rows() != c.sigma.cols() || c.sigma.rows() != theta_space_.dimension())
              throw DimensionError("portfolio: covariance dimension mismatch");
            Eigen::LLT<Mat> llt(c.sigma);
            if (llt.info() != Eigen::Success || !c.sigma.isApprox(c.sigma.transpose()))
              throw DomainError("portfolio: covariance is not positive definite");
            if (x_space_.dimension() != c.sigma.rows()) throw DimensionError("portfolio: decision dimension mismatch");
          } else {
            if (!(c.rho > 0.0)) throw DomainError("finite loss: rho must be positive");
            if (c.grid.size() < 2) throw DomainError("finite loss: need at least two grid points");
            for (Eigen::Index k = 1; k < c.grid.size(); ++k)
              if (!(c.grid[k] > c.grid[k - 1])) throw DomainError("finite loss: grid must be strictly increasing");
            if (c.loss.cols() != c.grid.size()) throw DimensionError("finite loss: table width != grid size");
            if (c.loss.rows() != theta_space_.dimension())
              throw DimensionError("finite loss: state count does not match the parameter dimension");
            for (Eigen::Index i = 0; i < c.loss.rows(); ++i)
              for (Eigen::Index k = 1; k + 1 < c.grid.size(); ++k) {
                const double s0 = (c.loss(i, k) - c.loss(i, k - 1)) / (c.grid[k] - c.grid[k - 1]);
                const double s1 = (c.loss(i, k + 1) - c.loss(i, k)) / (c.grid[k + 1] - c.grid[k]);
                if (s1 < s0 - 1e-12)
                  throw DomainError("finite loss: loss of state " + std::to_string(i + 1) + " is not convex in x");
              }
          }
        },
        cost_);
  }

  // Scalar costs -------------------------------------------------------------------------------

  static Vec state_losses(const NewsvendorCost& c, double x) {
    Vec h(c.demand.size());
    for (Eigen::Index i = 0; i < h.size(); ++i)
      h[i] = c.kappa * x + c.rho * x * x - c.price * std::min(x, c.demand[i]);
    return h;
  }

  static Vec state_losses(const FiniteLossCost& c, double x) {
    const auto m = c.grid.size();
    Eigen::Index k = std::upper_bound(c.grid.data(), c.grid.data() + m, x) - c.grid.data();
    k = std::clamp<Eigen::Index>(k, 1, m - 1);
    const double w = (x - c.grid[k - 1]) / (c.grid[k] - c.grid[k - 1]);
    Vec h = (1.0 - w) * c.loss.col(k - 1) + w * c.loss.col(k);
    return h.array() + c.rho * x * x;
  }

  static double scalar_derivative(const NewsvendorCost& c, double x, const Vec& theta) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i)
      acc += theta[i] * (c.kappa + 2.0 * c.rho * x - (x < c.demand[i] ? c.price : 0.0));
    return acc;
  }

  static double scalar_derivative(const FiniteLossCost& c, double x, const Vec& theta) {
    const auto m = c.grid.size();
    Eigen::Index k = std::upper_bound(c.grid.data(), c.grid.data() + m, x) - c.grid.data();
    k = std::clamp<Eigen::Index>(k, 1, m - 1);
    const Vec slope = (c.loss.col(k) - c.loss.col(k - 1)) / (c.grid[k] - c.grid[k - 1]);
    return theta.dot(slope) + 2.0 * c.rho * x * theta.sum();
  }

  static std::vector<double> breakpoints(const NewsvendorCost& c) {
    return std::vector<double>(c.demand.data(), c.demand.data() + c.demand.size());
  }
  static std::vector<double> breakpoints(const FiniteLossCost& c) {
    return std::vector<double>(c.grid.data(), c.grid.data() + c.grid.size());
  }

  /// Exact minimization of a cost that is quadratic between consecutive breakpoints.
  template <class C>
  MinCost scalar_min(const C& c, const Vec& theta) const {
    const auto b = x_space_.bounds();
    std::vector<double> knots = breakpoints(c);
    knots.push_back(b.lo);
    knots.push_back(b.hi);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    knots.erase(std::remove_if(knots.begin(), knots.end(), [&](double k) { return k < b.lo || k > b.hi; }),
                knots.end());
    auto value = [&](double x) { return theta.dot(state_losses(c, x)); };
    double best_x = knots.front();
    double best_v = value(best_x);
    auto consider = [&](double x) {
      const double v = value(x);
      if (v < best_v) {
        best_v = v;
        best_x = x;
      }
    };
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
      const double a = knots[k];
      const double e = knots[k + 1];
      consider(e);
      // Derivative is affine on (a, e); locate its root from two interior samples.
      const double m1 = a + 0.25 * (e - a);
      const double m2 = a + 0.75 * (e - a);
      const double d1 = scalar_derivative(c, m1, theta);
      const double d2 = scalar_derivative(c, m2, theta);
      const double slope = (d2 - d1) / (m2 - m1);
      if (slope > 0.0) {
        const double root = m1 - d1 / slope;
        if (root > a && root < e) consider(root);
      }
    }
    return {Vec::Constant(1, best_x), best_v};
  }

  // Portfolio ---------------------------------------------------------------------------------

  /// Exact QP over the decision polytope by enumerating faces: every coordinate is either free
  /// or pinned to a bound, the equality-constrained problem on the face is solved from its KKT
  /// system, and the best feasible face optimum is the global optimum.
  MinCost portfolio_min(const PortfolioCost& c, const Vec& theta) const {
    const int d = static_cast<int>(c.sigma.rows());
    double lo = 0.0;
    double hi = kInf;
    if (auto* bs = std::get_if<BoxSimplex>(&x_space_.variant())) {
      lo = bs->lo;
      hi = bs->hi;
    }
    const int choices = std::isfinite(hi) ? 3 : 2;  // free, at lo, (at hi)
    long long total = 1;
    for (int i = 0; i < d; ++i) total *= choices;
    if (d > 12) return portfolio_min_iterative(c, theta);
    const Mat q = 2.0 * c.rho * c.sigma;
    MinCost best{Vec(), kInf};
    std::vector<int> state(d);
    for (long long code = 0; code < total; ++code) {
      long long t = code;
      int nfree = 0;
      double pinned_mass = 0.0;
      for (int i = 0; i < d; ++i) {
        state[i] = static_cast<int>(t % choices);
        t /= choices;
        if (state[i] == 0) ++nfree;
        else pinned_mass += state[i] == 1 ? lo : hi;
      }
      if (nfree == 0) {
        if (std::abs(pinned_mass - 1.0) > 1e-12) continue;
      }
      Vec x = Vec::Zero(d);
      for (int i = 0; i < d; ++i)
        if (state[i] != 0) x[i] = state[i] == 1 ? lo : hi;
      if (nfree > 0) {
        // min over free block F: 1/2 x_F' Q_FF x_F + (Q_FP x_P - theta_F)' x_F, sum x_F = 1 - pinned.
        std::vector<int> f;
        for (int i = 0; i < d; ++i)
          if (state[i] == 0) f.push_back(i);
        Mat kkt = Mat::Zero(nfree + 1, nfree + 1);
        Vec rhs(nfree + 1);
        for (int a = 0; a < nfree; ++a) {
          for (int b = 0; b < nfree; ++b) kkt(a, b) = q(f[a], f[b]);
          kkt(a, nfree) = 1.0;
          kkt(nfree, a) = 1.0;
          double lin = -theta[f[a]];
          for (int i = 0; i < d; ++i)
            if (state[i] != 0) lin += q(f[a], i) * x[i];
          rhs[a] = -lin;
        }
        rhs[nfree] = 1.0 - pinned_mass;
        const Vec sol = kkt.fullPivLu().solve(rhs);
        for (int a = 0; a < nfree; ++a) x[f[a]] = sol[a];
      }
      if (x.minCoeff() < lo - 1e-13 || x.maxCoeff() > hi + 1e-13) continue;
      x = x.cwiseMax(lo).cwiseMin(hi);
      const double v = -x.dot(theta) + c.rho * x.dot(c.sigma * x);
      if (v < best.value) best = {x, v};
    }
    if (!std::isfinite(best.value)) return portfolio_min_iterative(c, theta);
    return best;
  }

  /// Accelerated projected gradient; used beyond the face-enumeration size.
  MinCost portfolio_min_iterative(const PortfolioCost& c, const Vec& theta) const {
    Eigen::SelfAdjointEigenSolver<Mat> es(c.sigma);
    const double lipschitz = 2.0 * c.rho * es.eigenvalues().maxCoeff();
    Vec x = x_space_.centroid();
    Vec y = x;
    double t = 1.0;
    for (int it = 0; it < 200000; ++it) {
      const Vec grad = -theta + 2.0 * c.rho * (c.sigma * y);
      const Vec x_next = x_space_.project(y - grad / lipschitz);
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = x_next + ((t - 1.0) / t_next) * (x_next - x);
      const double step = (x_next - x).norm();
      x = x_next;
      t = t_next;
      if (step < 1e-14) break;
    }
    return {x, -x.dot(theta) + c.rho * x.dot(c.sigma * x)};
  }

  Cost cost_;
  DecisionSpace x_space_;
  ParamSpace theta_space_;
  Objective g_;
};

/// Reads a loss table: columns (x, state, loss) or (state, loss). States are 1-based; without
/// an x column the grid is 0, 1, 2, ... in row order per state.
struct LossTable {
  Vec grid;
  Mat loss;
};

inline LossTable read_loss_table_csv(const std::string& path) {
  auto records = read_csv_file(path);
  if (records.empty()) throw ParseError("empty loss table", 1, 1);
  std::size_t start = 0;
  int x_col = -1, state_col, loss_col;
  const std::size_t width = records[0].size();
  if (is_header_record(records[0])) {
    start = 1;
    x_col = state_col = loss_col = -1;
    for (std::size_t k = 0; k < width; ++k) {
      const auto& name = records[0][k].text;
      if (name == "x") x_col = static_cast<int>(k);
      else if (name == "state") state_col = static_cast<int>(k);
      else if (name == "loss") loss_col = static_cast<int>(k);
      else throw ParseError("unknown column '" + name + "'", records[0][k].line, records[0][k].column);
    }
    if (state_col < 0 || loss_col < 0) throw ParseError("header must name 'state' and 'loss'", 1, 1);
  } else if (width == 3) {
    x_col = 0;
    state_col = 1;
    loss_col = 2;
  } else if (width == 2) {
    state_col = 0;
    loss_col = 1;
  } else {
    throw ParseError("expected 2 or 3 columns", records[0][0].line, 1);
  }
  std::map<int, std::vector<std::pair<double, double>>> per_state;
  for (std::size_t r = start; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != width)
      throw ParseError("expected " + std::to_string(width) + " fields, got " + std::to_string(rec.size()),
                       rec[0].line, rec[0].column);
    const long long s = parse_int(rec[state_col]);
    if (s < 1) throw ParseError("states are 1-based", rec[state_col].line, rec[state_col].column);
    auto& list = per_state[static_cast<int>(s)];
    const double x = x_col >= 0 ? parse_double(rec[x_col]) : static_cast<double>(list.size());
    list.emplace_back(x, parse_double(rec[loss_col]));
  }
  const int states = per_state.rbegin()->first;
  if (static_cast<int>(per_state.size()) != states) throw ParseError("states must be 1..d without gaps", 1, 1);
  auto& first = per_state.begin()->second;
  std::sort(first.begin(), first.end());
  LossTable t;
  t.grid.resize(static_cast<Eigen::Index>(first.size()));
  for (std::size_t k = 0; k < first.size(); ++k) t.grid[k] = first[k].first;
  t.loss.resize(states, t.grid.size());
  for (auto& [s, list] : per_state) {
    std::sort(list.begin(), list.end());
    if (list.size() != first.size()) throw ParseError("state " + std::to_string(s) + " has a different grid", 1, 1);
    for (std::size_t k = 0; k < list.size(); ++k) {
      if (list[k].first != t.grid[k]) throw ParseError("state " + std::to_string(s) + " has a different grid", 1, 1);
      t.loss(s - 1, k) = list[k].second;
    }
  }
  return t;
}

}  // namespace ldo
