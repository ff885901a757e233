#include "ldo/problems.hpp"
#include "ldo/rng.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace ldo;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Vec x1(double x) { return Vec::Constant(1, x); }

const Vec kRefTheta = vec({0.115, 0.115, 0.115, 0.125, 0.135, 0.135, 0.135, 0.125});

DecisionProblem ref_newsvendor(Objective g = Objective::Cost) {
  return DecisionProblem::newsvendor(1.0, 1.65, 0.0025, 8, 0.001, g);
}

Mat ref_sigma() {
  Mat s(3, 3);
  s << 2.819, 1.726, 1.917, 1.726, 1.297, 1.081, 1.917, 1.081, 2.717;
  return s;
}

// Brute force over the 1/m grid of the 3-simplex, in scalar arithmetic for speed.
double portfolio_grid_min(const Mat& S, double rho, const Vec& th, int m) {
  double best = kInf;
  for (int i = 0; i <= m; ++i)
    for (int j = 0; i + j <= m; ++j) {
      const double a = static_cast<double>(i) / m, b = static_cast<double>(j) / m, c = 1.0 - a - b;
      const double q = S(0, 0) * a * a + S(1, 1) * b * b + S(2, 2) * c * c +
                       2.0 * (S(0, 1) * a * b + S(0, 2) * a * c + S(1, 2) * b * c);
      best = std::min(best, -(a * th[0] + b * th[1] + c * th[2]) + rho * q);
    }
  return best;
}

}  // namespace

TEST(Newsvendor, CostExamples) {
  const auto p = ref_newsvendor();
  Rng rng(1);
  for (int s = 0; s < 20; ++s) {
    const Vec th = sample_flat_dirichlet(8, rng);
    EXPECT_EQ(p.cost(x1(0.0), th), 0.0);
    EXPECT_NEAR(p.cost(x1(1.0), th), 1.0 + 0.0025 - 1.65, 1e-14);
  }
  // mpmath term-by-term sum.
  EXPECT_NEAR(p.cost(x1(4.0), kRefTheta), -1.4215, 1e-14);
  EXPECT_THROW(p.cost(x1(8.5), kRefTheta), DomainError);
  EXPECT_THROW(p.cost(x1(-0.1), kRefTheta), DomainError);
}

TEST(Newsvendor, RejectsInvalidParameters) {
  EXPECT_THROW(DecisionProblem::newsvendor(1.0, 1.65, 0.0, 8), DomainError);
  EXPECT_THROW(DecisionProblem::newsvendor(2.0, 1.65, 0.01, 8), DomainError);
  EXPECT_THROW(DecisionProblem::newsvendor(-1.0, 1.65, 0.01, 8), DomainError);
}

TEST(Newsvendor, MinCostAllDemandAtTop) {
  // On a single segment the minimizer is (p - kappa) / (2 rho), clamped to [0, d].
  const auto p = DecisionProblem::newsvendor(1.0, 1.65, 0.1, 8);
  const Vec top = Vec::Unit(8, 7);
  EXPECT_NEAR(p.min_cost(top).x[0], 3.25, 1e-12);
  const auto q = ref_newsvendor();
  EXPECT_NEAR(q.min_cost(top).x[0], 8.0, 1e-12);
  // 1e-5 grid cross-check of the unclamped case.
  double best = kInf, arg = 0.0;
  for (int k = 0; k <= 800000; ++k) {
    const double x = k * 1e-5;
    const double v = p.cost(x1(x), top);
    if (v < best) best = v, arg = x;
  }
  EXPECT_NEAR(arg, 3.25, 1e-5);
  EXPECT_NEAR(p.min_cost(top).value, best, 1e-9);
}

TEST(Newsvendor, MinCostReferenceThetaMatchesGrid) {
  const auto p = ref_newsvendor();
  const MinCost m = p.min_cost(kRefTheta);
  // numpy 1e-5 grid: minimum -1.4215 at x = 4.
  EXPECT_NEAR(m.value, -1.4215, 1e-12);
  EXPECT_NEAR(m.x[0], 4.0, 1e-9);
  EXPECT_NEAR(p.regret(x1(0.0), kRefTheta), 1.4215, 1e-12);
}

TEST(Newsvendor, MinCostAgreesWithGridOnRandomTheta) {
  for (double rho : {0.0025, 0.05}) {
    const auto p = DecisionProblem::newsvendor(1.0, 1.65, rho, 8);
    for (int s = 0; s < 50; ++s) {
      Rng rng = Rng::stream(2, s, 4);
      const Vec th = sample_flat_dirichlet(8, rng);
      double best = kInf;
      for (int k = 0; k <= 80000; ++k) best = std::min(best, p.cost(x1(k * 1e-4), th));
      const MinCost m = p.min_cost(th);
      EXPECT_LE(m.value, best + 1e-12);
      EXPECT_NEAR(m.value, best, 1e-6);
    }
  }
}

TEST(Portfolio, CostExamples) {
  const auto p = DecisionProblem::portfolio(1.0, Mat::Identity(3, 3));
  EXPECT_EQ(p.cost(Vec::Unit(3, 0), Vec::Zero(3)), 1.0);
  Rng rng(3);
  for (int s = 0; s < 20; ++s) {
    const Vec x = sample_flat_dirichlet(3, rng);
    EXPECT_NEAR(p.cost(x, x), 0.0, 1e-15);
  }
  const auto q = DecisionProblem::portfolio(1.0, ref_sigma());
  // mpmath matrix arithmetic.
  EXPECT_NEAR(q.cost(Vec::Constant(3, 1.0 / 3.0), vec({-0.2, 0.6, 0.35})), 1.559, 1e-12);
  EXPECT_THROW(q.cost(Vec::Constant(2, 0.5), vec({-0.2, 0.6, 0.35})), DimensionError);
}

TEST(Portfolio, RejectsInvalidCovariance) {
  Mat bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(DecisionProblem::portfolio(1.0, bad), DomainError);
  EXPECT_THROW(DecisionProblem::portfolio(0.0, Mat::Identity(2, 2)), DomainError);
}

TEST(Portfolio, MinCostConcentratesOnBestAsset) {
  const auto p = DecisionProblem::portfolio(1.0, Mat::Identity(3, 3));
  const MinCost m = p.min_cost(vec({1.0, 0.0, 0.0}));
  // KKT: x = (theta + lambda) / 2 with lambda = 1/3.
  EXPECT_NEAR(m.x[0], 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(m.x[1], 1.0 / 6.0, 1e-9);
  EXPECT_NEAR(m.x[2], 1.0 / 6.0, 1e-9);
  EXPECT_NEAR(m.value, portfolio_grid_min(Mat::Identity(3, 3), 1.0, vec({1.0, 0.0, 0.0}), 600), 1e-9);
}

TEST(Portfolio, MinCostAgreesWithGridOnRandomTheta) {
  const auto p = DecisionProblem::portfolio(1.0, ref_sigma());
  for (int s = 0; s < 50; ++s) {
    Rng rng = Rng::stream(4, s, 4);
    const Vec th = vec({rng.normal(), rng.normal(), rng.normal()});
    const MinCost m = p.min_cost(th);
    const double grid = portfolio_grid_min(ref_sigma(), 1.0, th, 3000);
    EXPECT_LE(m.value, grid + 1e-10);
    EXPECT_NEAR(m.value, grid, 1e-6);
  }
}

TEST(Portfolio, ShortSellingVariant) {
  const auto p = DecisionProblem::portfolio(0.5, Mat::Identity(3, 3), true);
  const MinCost m = p.min_cost(vec({3.0, -3.0, 0.0}));
  EXPECT_NEAR(m.x.sum(), 1.0, 1e-9);
  EXPECT_GE(m.x.minCoeff(), -1.0 - 1e-9);
  EXPECT_LE(m.x.maxCoeff(), 1.0 + 1e-9);
  EXPECT_LT(m.x[1], 0.0);
  Rng rng(5);
  for (int s = 0; s < 200; ++s) {
    const Vec x = p.decision_space().sample(rng);
    EXPECT_LE(m.value, p.cost(x, vec({3.0, -3.0, 0.0})) + 1e-10);
  }
}

TEST(MinCost, NoFeasibleDecisionDoesBetter) {
  const auto nv = ref_newsvendor();
  const auto pf = DecisionProblem::portfolio(1.0, ref_sigma());
  for (int s = 0; s < 20; ++s) {
    Rng rng = Rng::stream(6, s, 4);
    const Vec th = sample_flat_dirichlet(8, rng);
    const Vec mu = vec({rng.normal(), rng.normal(), rng.normal()});
    const double mn = nv.min_cost(th).value;
    const double mp = pf.min_cost(mu).value;
    for (int k = 0; k < 100; ++k) {
      EXPECT_LE(mn, nv.cost(nv.decision_space().sample(rng), th) + 1e-12);
      EXPECT_LE(mp, pf.cost(pf.decision_space().sample(rng), mu) + 1e-12);
    }
  }
}

TEST(Regret, ZeroAtMinimizerAndNonNegative) {
  const auto nv = ref_newsvendor();
  const auto pf = DecisionProblem::portfolio(1.0, ref_sigma());
  for (int s = 0; s < 1000; ++s) {
    Rng rng = Rng::stream(7, s, 4);
    const Vec th = sample_flat_dirichlet(8, rng);
    const Vec mu = vec({rng.normal(), rng.normal(), rng.normal()});
    EXPECT_GE(nv.regret(nv.decision_space().sample(rng), th), 0.0);
    EXPECT_GE(pf.regret(pf.decision_space().sample(rng), mu), 0.0);
    if (s < 50) {
      EXPECT_NEAR(nv.regret(nv.min_cost(th).x, th), 0.0, 1e-9);
      EXPECT_NEAR(pf.regret(pf.min_cost(mu).x, mu), 0.0, 1e-9);
    }
  }
}

TEST(Regret, ThetaSubgradient) {
  const auto nv = ref_newsvendor();
  const Vec xm = nv.min_cost(kRefTheta).x;
  EXPECT_NEAR(nv.regret_theta_subgradient(xm, kRefTheta).norm(), 0.0, 1e-12);

  // Component i is h(x, i) - h(x_min, i).
  const double x = 2.5;
  const double xmin = xm[0];
  const Vec sg = nv.regret_theta_subgradient(x1(x), kRefTheta);
  for (int i = 0; i < 8; ++i) {
    auto h = [&](double y) { return y + 0.0025 * y * y - 1.65 * std::min(y, i + 1.0); };
    EXPECT_NEAR(sg[i], h(x) - h(xmin), 1e-12) << "component " << i;
  }

  // Finite differences along simplex-tangent directions where x_min is locally constant.
  for (const auto& p : {ref_newsvendor(), DecisionProblem::portfolio(1.0, ref_sigma())}) {
    const int d = p.param_dim();
    for (int s = 0; s < 20; ++s) {
      Rng rng = Rng::stream(8, s, 4);
      const Vec th = d == 8 ? kRefTheta : vec({rng.normal(), rng.normal(), rng.normal()});
      const Vec xx = p.decision_space().sample(rng);
      Vec dir(d);
      for (int i = 0; i < d; ++i) dir[i] = rng.normal();
      if (d == 8) dir.array() -= dir.mean();
      dir.normalize();
      const double h = 1e-6;
      const double fd = (p.regret(xx, th + h * dir) - p.regret(xx, th - h * dir)) / (2 * h);
      const double an = p.regret_theta_subgradient(xx, th).dot(dir);
      EXPECT_NEAR(an, fd, 1e-3 * std::max(1.0, std::abs(fd))) << p.describe() << " sample " << s;
    }
  }
}

TEST(Problems, StrictConvexityProbe) {
  for (const auto& p : {ref_newsvendor(), DecisionProblem::portfolio(1.0, ref_sigma())}) {
    const double m = p.strong_convexity();
    ASSERT_GT(m, 0.0);
    for (int s = 0; s < 500; ++s) {
      Rng rng = Rng::stream(9, s, 4);
      const Vec a = p.decision_space().sample(rng);
      const Vec b = p.decision_space().sample(rng);
      const Vec th = p.param_dim() == 8 ? Vec(sample_flat_dirichlet(8, rng))
                                        : vec({rng.normal(), rng.normal(), rng.normal()});
      const double delta = 0.99 * m * (a - b).squaredNorm() / 4.0;
      if ((a - b).norm() < 1e-6) continue;
      EXPECT_LT(p.cost(0.5 * (a + b), th), 0.5 * (p.cost(a, th) + p.cost(b, th)) - delta);
    }
  }
  EXPECT_NEAR(DecisionProblem::portfolio(1.0, ref_sigma()).strong_convexity(),
              Eigen::SelfAdjointEigenSolver<Mat>(ref_sigma()).eigenvalues().minCoeff(), 1e-12);
}

TEST(FiniteLoss, InterpolatedCostAndMinimum) {
  // Two states, losses |x - 1| and |x - 3| on the grid 0..4, plus rho x^2.
  Vec grid(5);
  grid << 0, 1, 2, 3, 4;
  Mat loss(2, 5);
  loss << 1, 0, 1, 2, 3, 3, 2, 1, 0, 1;
  const auto p = DecisionProblem::finite_loss(grid, loss, 0.01);
  const Vec th = vec({0.5, 0.5});
  EXPECT_NEAR(p.cost(x1(1.5), th), 0.5 * 0.5 + 0.5 * 1.5 + 0.01 * 2.25, 1e-14);
  const MinCost m = p.min_cost(th);
  // Flat on [1, 3] before the quadratic term, so the minimizer is the left end.
  EXPECT_NEAR(m.x[0], 1.0, 1e-9);
  EXPECT_NEAR(m.value, 1.0 + 0.01, 1e-12);
  Mat concave(2, 5);
  concave << 0, 2, 3, 3.5, 3.7, 0, 0, 0, 0, 0;
  EXPECT_THROW(DecisionProblem::finite_loss(grid, concave, 0.01), DomainError);
}

TEST(FiniteLoss, ReadsLossTableCsv) {
  const auto dir = std::filesystem::temp_directory_path() / "ldo_test_problems";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "loss.csv").string();
  {
    std::ofstream os(path);
    os << "x,state,loss\n0,1,1\n1,1,0\n2,1,1\n0,2,2\n1,2,1\n2,2,0\n";
  }
  const LossTable t = read_loss_table_csv(path);
  EXPECT_EQ(t.grid, vec({0, 1, 2}));
  ASSERT_EQ(t.loss.rows(), 2);
  EXPECT_EQ(t.loss(0, 0), 1.0);
  EXPECT_EQ(t.loss(1, 2), 0.0);
  {
    std::ofstream os(path);
    os << "state,loss\n1,3\n1,1\n2,0\n";
  }
  EXPECT_THROW(read_loss_table_csv(path), ParseError);
  {
    std::ofstream os(path);
    os << "x,state,loss\n0,1,abc\n";
  }
  EXPECT_THROW(read_loss_table_csv(path), ParseError);
  std::filesystem::remove_all(dir);
}
