#include "ldo/verify.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace ldo;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST(ExactTypeDistribution, SingleDrawIsTheta) {
  const Vec th = vec({0.2, 0.3, 0.5});
  const auto dist = exact_type_distribution(th, 1);
  ASSERT_EQ(dist.size(), 3u);
  for (std::size_t k = 0; k < dist.size(); ++k) {
    const Vec z = dist.type(k);
    Eigen::Index i;
    z.maxCoeff(&i);
    EXPECT_NEAR(std::exp(dist.log_prob[k]), th[i], 1e-15);
  }
}

TEST(ExactTypeDistribution, TwoFairCoins) {
  const auto dist = exact_type_distribution(vec({0.5, 0.5}), 2);
  std::map<int, double> p;
  for (std::size_t k = 0; k < dist.size(); ++k) p[dist.counts[k][0]] = std::exp(dist.log_prob[k]);
  EXPECT_NEAR(p[2], 0.25, 1e-15);
  EXPECT_NEAR(p[1], 0.5, 1e-15);
  EXPECT_NEAR(p[0], 0.25, 1e-15);
}

TEST(ExactTypeDistribution, Normalization) {
  for (auto [d, n] : std::vector<std::pair<int, int>>{{2, 60}, {3, 25}, {4, 12}}) {
    Vec th(d);
    for (int i = 0; i < d; ++i) th[i] = i + 1.0;
    th /= th.sum();
    const auto dist = exact_type_distribution(th, n);
    double total = 0.0;
    for (double lp : dist.log_prob) total += std::exp(lp);
    EXPECT_NEAR(total, 1.0, 1e-10) << d << "," << n;
    EXPECT_NEAR(dist.log_total(), 0.0, 1e-10);
    EXPECT_EQ(static_cast<double>(dist.size()), type_count(d, n));
  }
}

TEST(ExactTypeDistribution, ZeroThetaEntriesAndCap) {
  const auto dist = exact_type_distribution(vec({0.0, 1.0}), 5);
  ASSERT_EQ(dist.size(), 1u);
  EXPECT_EQ(dist.counts[0][1], 5);
  EXPECT_THROW(exact_type_distribution(Vec::Constant(8, 0.125), 60), CapExceeded);
  EXPECT_THROW(exact_type_distribution(vec({0.5, 0.6}), 3), DomainError);
}

TEST(SanovSandwich, WholeSimplex) {
  const auto rep = sanov_sandwich_check(vec({0.3, 0.7}), 20, [](const Vec&) { return true; }, 0.0);
  EXPECT_NEAR(rep.log_prob, 0.0, 1e-12);
  EXPECT_EQ(rep.min_rate, 0.0);
  EXPECT_TRUE(rep.holds);
}

TEST(SanovSandwich, BinomialTail) {
  const auto rep = sanov_sandwich_check(vec({0.3, 0.7}), 20, [](const Vec& z) { return z[0] >= 0.5; }, 0.0);
  // mpmath: exact binomial tail and lattice minimum of the relative entropy.
  EXPECT_NEAR(rep.log_prob, -3.0373483889017521614, 1e-12);
  EXPECT_NEAR(rep.min_rate, 0.08717669357238887635, 1e-14);
  EXPECT_NEAR(rep.slack, 2.0 * std::log(21.0), 1e-14);
  EXPECT_TRUE(rep.holds);
  EXPECT_GE(rep.log_prob, -20 * rep.min_rate - 2 * std::log(21.0));
  EXPECT_LE(rep.log_prob, -20 * rep.min_rate + 2 * std::log(21.0));
}

TEST(SanovSandwich, RobustBallHolds) {
  const auto plain = sanov_sandwich_check(vec({0.3, 0.7}), 20, [](const Vec& z) { return z[0] >= 0.5; }, 0.0);
  const auto rep = sanov_sandwich_check(vec({0.3, 0.7}), 20, [](const Vec& z) { return z[0] >= 0.5; }, 0.05, 50);
  EXPECT_TRUE(rep.holds);
  EXPECT_LT(rep.min_rate, plain.min_rate);
  EXPECT_GT(rep.log_prob, plain.log_prob);
  EXPECT_GE(rep.grid_points, 2);
  EXPECT_LE((rep.worst_theta - vec({0.3, 0.7})).norm(), 0.05 + 1e-9);
}

TEST(SanovSandwich, EmptyIntersectionIsDegenerate) {
  const auto rep = sanov_sandwich_check(vec({0.3, 0.7}), 4, [](const Vec& z) { return z[0] > 0.3 && z[0] < 0.45; }, 0.0);
  EXPECT_TRUE(rep.degenerate);
}

TEST(BallGrid, PointsStayInBallAndSimplex) {
  const Vec th = vec({0.2, 0.3, 0.5});
  const auto pts = ball_grid(th, 0.05, 50);
  EXPECT_EQ(pts.front(), th);
  EXPECT_GT(pts.size(), 10u);
  for (const Vec& p : pts) {
    EXPECT_LE((p - th).norm(), 0.05 + 1e-12);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_GE(p.minCoeff(), 0.0);
  }
}

TEST(Laplace, LinearFunctionIsExactAtEveryN) {
  const Vec th = vec({0.35, 0.65});
  const Vec a = vec({0.8, -0.4});
  auto f = [&](const Vec& z) { return a.dot(z); };
  const double exact = std::log(th[0] * std::exp(a[0]) + th[1] * std::exp(a[1]));
  for (int n : {1, 5, 10, 20, 40}) EXPECT_NEAR(laplace_lhs(th, f, n), exact, 1e-12) << "n " << n;
  EXPECT_NEAR(laplace_rhs(th, f, 4000), exact, 1e-6);
}

TEST(Laplace, ZeroFunction) {
  const auto rows = laplace_convergence(vec({0.2, 0.8}), [](const Vec&) { return 0.0; }, {5, 10}, 100);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.lhs, 0.0, 1e-12);
    EXPECT_NEAR(r.rhs, 0.0, 1e-12);
  }
}

TEST(Laplace, QuadraticErrorDecreases) {
  const Vec th = vec({0.35, 0.65});
  auto f = [&](const Vec& z) { return -(z - th).squaredNorm(); };
  const auto rows = laplace_convergence(th, f, {5, 10, 20, 40}, 400);
  for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_LE(rows[k].error, rows[k - 1].error + 1e-9);
  const auto& last = rows.back();
  EXPECT_LE(last.error, 2 * 2 * std::log(last.n + 1.0) / last.n + 1e-3);
}

TEST(AssumptionProbe, RelEntropyOnFlooredSimplex) {
  const auto rep = assumption_probe(RateFunction::rel_entropy(), ParamSpace::simplex(3, 0.001), 100, 1);
  EXPECT_TRUE(rep.ok()) << (rep.failures.empty() ? "" : rep.failures.front());
  for (int i = 0; i < 3; ++i) EXPECT_EQ(rep.passed[i], rep.checked[i]);
}

TEST(AssumptionProbe, RelEntropyOnOpenSimplexViaMixtures) {
  const auto rep = assumption_probe(RateFunction::rel_entropy(), ParamSpace::simplex(4, 0.0), 100, 2);
  EXPECT_EQ(rep.passed[2], rep.checked[2]);
  EXPECT_TRUE(rep.ok()) << (rep.failures.empty() ? "" : rep.failures.front());
}

TEST(AssumptionProbe, LLNLowerSemicontinuity) {
  const auto rep = assumption_probe(RateFunction::lln(), ParamSpace::simplex(3, 0.0), 50, 3);
  EXPECT_EQ(rep.passed[1], rep.checked[1]);
  EXPECT_EQ(rep.passed[0], rep.checked[0]);
}

TEST(LogSumExp, StableForLargeMagnitudes) {
  EXPECT_NEAR(log_sum_exp({-1000.0, -1000.0}), -1000.0 + std::log(2.0), 1e-12);
  EXPECT_NEAR(log_sum_exp({800.0, 0.0}), 800.0, 1e-12);
  EXPECT_EQ(log_sum_exp({}), -kInf);
}
