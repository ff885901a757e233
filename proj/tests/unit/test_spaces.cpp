#include "ldo/spaces.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace ldo;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

Vec random_vec(int d, Rng& rng, double scale = 2.0) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = scale * rng.normal();
  return v;
}

}  // namespace

TEST(ProbVector, RejectsOffSimplexInput) {
  EXPECT_NO_THROW(ProbVector(v2(0.25, 0.75)));
  EXPECT_THROW(ProbVector(v2(0.5, 0.6)), DomainError);
  EXPECT_THROW(ProbVector(v2(-0.1, 1.1)), DomainError);
  EXPECT_THROW(ProbVector(v2(0.0005, 0.9995), 0.001), DomainError);
  EXPECT_THROW(ProbVector{Vec{}}, DimensionError);
}

TEST(ProbMatrix, StationarityAndFlattening) {
  Mat m(2, 2);
  m << 0.4, 0.1, 0.1, 0.4;
  const ProbMatrix p(m, true);
  EXPECT_EQ(p.flatten(), (Vec(4) << 0.4, 0.1, 0.1, 0.4).finished());
  const ProbMatrix back = ProbMatrix::from_flat(p.flatten(), 2, true);
  EXPECT_EQ(back.values(), m);
  Mat bad(2, 2);
  bad << 0.5, 0.3, 0.1, 0.1;
  EXPECT_THROW(ProbMatrix(bad, true), DomainError);
  EXPECT_NO_THROW(ProbMatrix(bad, false));
}

TEST(ProjectSimplex, SpecExamples) {
  EXPECT_EQ(project_simplex(v2(0.5, 0.5)).values(), v2(0.5, 0.5));
  const Vec p = project_simplex(v2(0.6, 0.6)).values();
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_NEAR(p[1], 0.5, 1e-15);
  // Brute-force grid search at 1e-4 on Delta_2 gives (1, 0) (tests/oracles/frozen_values.py).
  const Vec q = project_simplex(v2(2.0, 0.0)).values();
  EXPECT_NEAR(q[0], 1.0, 1e-15);
  EXPECT_NEAR(q[1], 0.0, 1e-15);
}

TEST(ProjectSimplex, FeasibleIdempotentAndNonexpansive) {
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 2 + trial % 9;
    const double floor = (trial % 3) * 0.01;
    const Vec a = random_vec(d, rng);
    const Vec b = random_vec(d, rng);
    const Vec pa = project_simplex(a, floor).values();
    const Vec pb = project_simplex(b, floor).values();
    EXPECT_GE(pa.minCoeff(), floor - 1e-15);
    EXPECT_NEAR(pa.sum(), 1.0, 1e-12);
    EXPECT_EQ(project_simplex(pa, floor).values(), pa);
    EXPECT_LE((pa - pb).norm(), (a - b).norm() + 1e-12);
    // Variational inequality: <a - P(a), y - P(a)> <= 0 for feasible y.
    const Vec y = project_simplex(random_vec(d, rng), floor).values();
    EXPECT_LE((a - pa).dot(y - pa), 1e-10);
  }
}

TEST(ProjectSimplex, DimensionMismatchAndInfeasibleFloor) {
  EXPECT_THROW(project_simplex(v3(0.1, 0.2, 0.7), 0.0, 2), DimensionError);
  EXPECT_THROW(project_simplex(v3(0.1, 0.2, 0.7), 0.5), DomainError);
}

TEST(ProjectBall, SpecExamples) {
  const Vec c = v2(1.0, -2.0);
  EXPECT_EQ(project_l2_ball(c, c, 1.0), c);
  const Vec p = project_l2_ball(c + v2(2.0, 0.0), c, 1.0);
  EXPECT_NEAR(p[0], 2.0, 1e-15);
  EXPECT_NEAR(p[1], -2.0, 1e-15);
}

TEST(ProjectBall, MinimizesDistanceOnSampledGrid) {
  Rng rng(11);
  const Vec c = v2(0.3, -0.1);
  const double R = 0.7;
  for (int trial = 0; trial < 50; ++trial) {
    const Vec v = random_vec(2, rng);
    const Vec p = project_l2_ball(v, c, R);
    EXPECT_LE((p - c).norm(), R + 1e-12);
    const double dp = (p - v).norm();
    for (int k = 0; k < 400; ++k) {
      const double ang = 2.0 * M_PI * k / 400.0;
      for (double rad : {0.25 * R, 0.5 * R, R}) {
        const Vec q = c + rad * v2(std::cos(ang), std::sin(ang));
        EXPECT_LE(dp, (q - v).norm() + 1e-12);
      }
    }
  }
}

TEST(ProjectBallSimplex, AgreesWithDykstraAndIsFeasible) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 3 + trial % 6;
    const double floor = 0.001;
    const Vec center = project_simplex(random_vec(d, rng, 0.3).array().abs().matrix(), floor).values();
    const double R = 0.05 + 0.2 * rng.uniform();
    const Vec v = random_vec(d, rng, 0.5);
    const Vec exact = project_ball_simplex(v, center, R, floor);
    const Vec dyk = dykstra_ball_simplex(v, center, R, floor, 5000);
    EXPECT_LE((exact - center).norm(), R + 1e-12);
    EXPECT_GE(exact.minCoeff(), floor - 1e-14);
    EXPECT_NEAR(exact.sum(), 1.0, 1e-12);
    EXPECT_LE((exact - dyk).norm(), 1e-6) << "trial " << trial;
  }
}

TEST(ProjectCappedSimplex, BoundsAndSum) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec v = random_vec(4, rng);
    const Vec p = project_capped_simplex(v, -1.0, 1.0, 1.0);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_GE(p.minCoeff(), -1.0 - 1e-15);
    EXPECT_LE(p.maxCoeff(), 1.0 + 1e-15);
    for (int k = 0; k < 20; ++k) {
      const Vec y = project_capped_simplex(random_vec(4, rng), -1.0, 1.0, 1.0);
      EXPECT_LE((v - p).dot(y - p), 1e-10);
    }
  }
  EXPECT_THROW(project_capped_simplex(v2(0, 0), 0.6, 1.0, 1.0), DomainError);
}

TEST(ProjectStationaryPairs, FeasibleAndOptimal) {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const int s = 2 + trial % 3;
    const Vec v = random_vec(s * s, rng, 0.3);
    const Vec p = project_stationary_pairs(v, s, 0.01);
    const ParamSpace sp = ParamSpace::stationary_pairs(s, 0.01);
    EXPECT_TRUE(sp.contains(p, 1e-10));
    for (int k = 0; k < 20; ++k) {
      Rng r2 = Rng::stream(trial, k, 0);
      const Vec y = sample_param(sp, r2);
      EXPECT_LE((v - p).dot(y - p), 1e-9);
    }
  }
}

TEST(TypeLattice, SpecExamples) {
  const auto l22 = type_lattice(2, 2);
  ASSERT_EQ(l22.size(), 3u);
  EXPECT_EQ(l22[0].values(), v2(1.0, 0.0));
  EXPECT_EQ(l22[1].values(), v2(0.5, 0.5));
  EXPECT_EQ(l22[2].values(), v2(0.0, 1.0));
  const auto l31 = type_lattice(3, 1);
  ASSERT_EQ(l31.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(l31[i].values(), Vec::Unit(3, i));
  EXPECT_EQ(type_lattice(3, 4).size(), 15u);  // C(6, 2)
}

TEST(TypeLattice, CountMatchesStarsAndBarsAndEntriesAreDistinct) {
  for (int d = 2; d <= 5; ++d)
    for (int n = 1; n <= 12; ++n) {
      const auto l = type_lattice(d, n);
      EXPECT_EQ(static_cast<double>(l.size()), type_count(d, n));
      std::set<std::vector<long>> seen;
      for (const auto& p : l) {
        std::vector<long> key;
        for (int i = 0; i < d; ++i) {
          const double c = p[i] * n;
          EXPECT_NEAR(c, std::round(c), 1e-9);
          key.push_back(std::lround(c));
        }
        EXPECT_TRUE(seen.insert(key).second);
      }
    }
  EXPECT_THROW(type_lattice(10, 200, 1e6), CapExceeded);
}

TEST(ParamSpace, ProjectionAndContainment) {
  const auto s = ParamSpace::simplex(4, 0.05);
  const Vec p = s.project((Vec(4) << 3.0, -1.0, 0.2, 0.1).finished());
  EXPECT_TRUE(s.contains(p));
  EXPECT_EQ(s.dimension(), 4);
  EXPECT_DOUBLE_EQ(s.floor(), 0.05);
  const auto b = ParamSpace::ball(v2(0, 0), 2.0);
  EXPECT_TRUE(b.contains(b.project(v2(10, 0))));
  const auto one = ParamSpace::singleton(v3(0.2, 0.3, 0.5));
  EXPECT_EQ(one.project(v3(1, 2, 3)), v3(0.2, 0.3, 0.5));
  EXPECT_THROW(ParamSpace::simplex(4, 0.3), DomainError);
  EXPECT_THROW(s.project(v2(1, 0)), DimensionError);
  for (const auto& c : s.corner_points()) EXPECT_TRUE(s.contains(c));
  const auto sp = ParamSpace::stationary_pairs(3, 0.01);
  for (const auto& c : sp.corner_points()) EXPECT_TRUE(sp.contains(c, 1e-10));
}

TEST(SampleParam, UniformOnTwoSimplexHasMeanHalf) {
  const auto s = ParamSpace::simplex(2, 0.0);
  double sum = 0.0;
  const int n = 100000;
  Rng rng(2024);
  for (int k = 0; k < n; ++k) sum += sample_param(s, rng)[0];
  EXPECT_NEAR(sum / n, 0.5, 0.01);
}

TEST(SampleParam, FlooredSamplesRespectFloor) {
  const auto s = ParamSpace::simplex(8, 0.05);
  Rng rng(1);
  for (int k = 0; k < 2000; ++k) {
    const Vec p = sample_param(s, rng);
    EXPECT_GE(p.minCoeff(), 0.05);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
  }
}

TEST(SampleParam, SingletonBallAndBudget) {
  Rng rng(4);
  EXPECT_EQ(sample_param(ParamSpace::singleton(v2(0.1, 0.9)), rng), v2(0.1, 0.9));
  const auto b = ParamSpace::ball(v3(1, 2, 3), 0.5);
  for (int k = 0; k < 1000; ++k) EXPECT_TRUE(b.contains(sample_param(b, rng)));
  // Floor 0.124 on d=8 leaves a sliver of volume (1 - 8*0.124)^7 ~ 2e-15: rejection gives up.
  EXPECT_THROW(sample_param(ParamSpace::simplex(8, 0.124), rng), NumericalError);
}

TEST(DecisionSpace, IntervalSimplexAndBoxSimplex) {
  const auto iv = DecisionSpace::interval(0.0, 8.0);
  EXPECT_TRUE(iv.is_scalar());
  EXPECT_EQ(iv.project(Vec::Constant(1, 9.0))[0], 8.0);
  EXPECT_EQ(iv.project(Vec::Constant(1, -1.0))[0], 0.0);
  EXPECT_DOUBLE_EQ(iv.diameter(), 8.0);
  const auto sx = DecisionSpace::simplex(3);
  EXPECT_TRUE(sx.contains(sx.project(v3(5, -2, 1))));
  for (const auto& v : sx.vertices()) EXPECT_TRUE(sx.contains(v));
  const auto bx = DecisionSpace::box_simplex(-1.0, 1.0, 3);
  const Vec p = bx.project(v3(5, -5, 0));
  EXPECT_TRUE(bx.contains(p));
  EXPECT_NEAR(p[0], 1.0, 1e-12);
  EXPECT_NEAR(p[1], -1.0, 1e-12);
  EXPECT_NEAR(p[2], 1.0, 1e-12);
  Rng rng(8);
  for (int k = 0; k < 100; ++k) {
    EXPECT_TRUE(iv.contains(iv.sample(rng)));
    EXPECT_TRUE(sx.contains(sx.sample(rng)));
    EXPECT_TRUE(bx.contains(bx.sample(rng)));
  }
  EXPECT_THROW(DecisionSpace::interval(1.0, 1.0), DomainError);
  EXPECT_THROW(DecisionSpace::box_simplex(0.5, 1.0, 3), DomainError);
}
