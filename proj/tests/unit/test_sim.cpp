#include "ldo/sim.hpp"
#include "ldo/verify.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace ldo;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

const Vec kTheta1 = vec({0.109, 0.145, 0.155, 0.135, 0.12, 0.12, 0.10, 0.116});
const Vec kTheta2 = vec({0.088, 0.09, 0.09, 0.105, 0.152, 0.16, 0.16, 0.155});

Mat ref_sigma() {
  Mat s(3, 3);
  s << 2.819, 1.726, 1.917, 1.726, 1.297, 1.081, 1.917, 1.081, 2.717;
  return s;
}

}  // namespace

TEST(IidCategorical, DegenerateDistribution) {
  const PathBatch b = gen_iid_categorical(Vec::Unit(4, 0), 50, 5, 1);
  for (const auto& p : b.states)
    for (int s : p) EXPECT_EQ(s, 1);
  EXPECT_EQ(b.paths(), 5);
  EXPECT_EQ(b.steps(), 50);
}

TEST(IidCategorical, FrequenciesWithinBinomialBounds) {
  const Vec th = vec({0.1, 0.2, 0.3, 0.4});
  const int K = 100, n = 10000;
  const PathBatch b = gen_iid_categorical(th, n, K, 2);
  std::vector<long> counts(4, 0);
  for (const auto& p : b.states)
    for (int s : p) ++counts[s - 1];
  const double N = static_cast<double>(K) * n;
  for (int i = 0; i < 4; ++i) {
    const double sd = std::sqrt(th[i] * (1 - th[i]) / N);
    EXPECT_NEAR(counts[i] / N, th[i], 3 * sd) << "state " << i + 1;
  }
}

TEST(IidCategorical, SameSeedSameBatch) {
  const Vec th = vec({0.3, 0.3, 0.4});
  EXPECT_EQ(gen_iid_categorical(th, 100, 20, 77), gen_iid_categorical(th, 100, 20, 77));
  EXPECT_FALSE(gen_iid_categorical(th, 100, 20, 77) == gen_iid_categorical(th, 100, 20, 78));
  EXPECT_THROW(gen_iid_categorical(vec({0.5, 0.6}), 10, 1, 0), DomainError);
}

TEST(MixtureSources, CertainSourceReducesToIid) {
  const auto [b, src] = gen_mixture_sources(kTheta1, kTheta2, 1.0, 200, 30, 5);
  EXPECT_EQ(b.states, gen_iid_categorical(kTheta1, 200, 30, 5).states);
  for (int l : src.label) EXPECT_EQ(l, 1);
}

TEST(MixtureSources, PathsClusterAroundTheirSource) {
  const auto [b, src] = gen_mixture_sources(kTheta1, kTheta2, 0.5, 800, 100, 6);
  for (int k = 0; k < 100; ++k) {
    const Vec z = empirical_measure(b.states[k], 8).values();
    const Vec& c = src.label[k] == 1 ? kTheta1 : kTheta2;
    const Vec& other = src.label[k] == 1 ? kTheta2 : kTheta1;
    EXPECT_LE((z - c).cwiseAbs().maxCoeff(), 0.05) << "path " << k;
    EXPECT_LT((z - c).norm(), (z - other).norm()) << "path " << k;
  }
}

TEST(MixtureSources, SourceFrequencyMatchesProbability) {
  const double p1 = 0.3;
  const int K = 10000;
  const auto [b, src] = gen_mixture_sources(kTheta1, kTheta2, p1, 1, K, 7);
  long ones = 0;
  for (int l : src.label) ones += l == 1;
  EXPECT_NEAR(ones / static_cast<double>(K), p1, 3 * std::sqrt(p1 * (1 - p1) / K));
}

TEST(GaussianIid, NearDeterministicCovariance) {
  const Vec th = vec({-0.2, 0.6, 0.35});
  const PathBatch b = gen_gaussian_iid(th, 1e-12 * Mat::Identity(3, 3), 10, 2, 8);
  for (const Mat& m : b.means) EXPECT_LE((m.row(9).transpose() - th).norm(), 1e-5);
}

TEST(GaussianIid, SampleCovarianceMatchesSigma) {
  // With n = 1 each path's Z_1 is a single draw.
  const Vec th = vec({-0.2, 0.6, 0.35});
  const Mat S = ref_sigma();
  const int K = 100000;
  const PathBatch b = gen_gaussian_iid(th, S, 1, K, 9);
  Mat X(K, 3);
  for (int k = 0; k < K; ++k) X.row(k) = b.means[k].row(0);
  const Vec mean = X.colwise().mean().transpose();
  const Mat C = (X.rowwise() - mean.transpose()).transpose() * (X.rowwise() - mean.transpose()) / (K - 1.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(C(i, j), S(i, j), 0.05 * std::abs(S(i, j))) << i << "," << j;
  EXPECT_THROW(gen_gaussian_iid(th, -Mat::Identity(3, 3), 1, 1, 0), DomainError);
}

TEST(GaussianIid, RunningMeanConverges) {
  const Vec th = vec({-0.2, 0.6, 0.35});
  const Mat S = ref_sigma();
  const double bound = 4.0 * std::sqrt(S.trace() / 1e4);
  int within = 0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    const PathBatch b = gen_gaussian_iid(th, S, 10000, 1, 100 + s);
    within += (b.means[0].row(9999).transpose() - th).norm() <= bound;
  }
  EXPECT_GE(within, 99);
}

TEST(MarkovChain, IdenticalRowsGiveIidMarginal) {
  Mat m(2, 2);
  m << 0.09, 0.21, 0.21, 0.49;  // rows proportional to (0.3, 0.7)
  const PathBatch b = gen_markov_chain(ProbMatrix(m, true), 100000, 1, 10);
  long ones = 0;
  for (int s : b.states[0]) ones += s == 1;
  EXPECT_NEAR(ones / 1e5, 0.3, 3 * std::sqrt(0.21 / 1e5));
}

TEST(MarkovChain, PairFrequenciesConvergeToTheta) {
  Mat m(3, 3);
  m << 0.2, 0.1, 0.05, 0.1, 0.15, 0.05, 0.05, 0.05, 0.25;
  const ProbMatrix th(m, true);
  const PathBatch b = gen_markov_chain(th, 100000, 1, 11);
  const Mat z = pair_empirical_measure(b.states[0], 3).values();
  EXPECT_LE((z - m).cwiseAbs().maxCoeff(), 0.02);
  EXPECT_EQ(gen_markov_chain(th, 500, 3, 12), gen_markov_chain(th, 500, 3, 12));
  EXPECT_EQ(b.initial_state, 1);
}

TEST(MarkovChain, StationaryPairOfKernel) {
  Mat k(2, 2);
  k << 0.9, 0.1, 0.5, 0.5;
  const Mat pair = stationary_pair_measure(k);
  // w = (5/6, 1/6).
  EXPECT_NEAR(pair(0, 0), 0.75, 1e-12);
  EXPECT_NEAR(pair(0, 1), 5.0 / 60.0, 1e-12);
  EXPECT_NEAR(pair(1, 0), 5.0 / 60.0, 1e-12);
  EXPECT_NEAR(pair(1, 1), 5.0 / 60.0, 1e-12);
  EXPECT_NO_THROW(ProbMatrix(pair, true));
  EXPECT_TRUE(transition_kernel(pair).isApprox(k, 1e-12));
}

TEST(EmpiricalStatistics, Examples) {
  EXPECT_EQ(empirical_measure({1, 1, 2}, 2).values(), vec({2.0 / 3.0, 1.0 / 3.0}));
  const Mat pair = pair_empirical_measure({1, 2}, 2).values();
  EXPECT_EQ(pair(0, 0), 0.5);
  EXPECT_EQ(pair(0, 1), 0.5);
  EXPECT_EQ(pair(1, 0), 0.0);
  EXPECT_EQ(pair(1, 1), 0.0);
  Mat samples(2, 2);
  samples << 1, 2, 3, 6;
  EXPECT_EQ(empirical_mean(samples), vec({2.0, 4.0}));
  EXPECT_THROW(empirical_measure({}, 2), DomainError);
  EXPECT_THROW(empirical_measure({1, 3}, 2), DomainError);
}

TEST(EmpiricalStatistics, MeasuresLieOnTheTypeLattice) {
  const PathBatch b = gen_iid_categorical(vec({0.2, 0.3, 0.5}), 7, 50, 13);
  std::set<std::vector<long>> lattice;
  for (const auto& z : type_lattice(3, 7)) {
    std::vector<long> c(3);
    for (int i = 0; i < 3; ++i) c[i] = std::lround(z[i] * 7);
    lattice.insert(c);
  }
  for (const auto& p : b.states) {
    const Vec z = empirical_measure(p, 3).values();
    std::vector<long> c(3);
    for (int i = 0; i < 3; ++i) {
      c[i] = std::lround(z[i] * 7);
      EXPECT_EQ(z[i] * 7, static_cast<double>(c[i]));
    }
    EXPECT_TRUE(lattice.count(c));
  }
}

TEST(EmpiricalStatistics, PrefixConsistency) {
  const PathBatch b = gen_iid_categorical(vec({0.2, 0.3, 0.5}), 100, 5, 14);
  Mat m(2, 2);
  m << 0.4, 0.1, 0.1, 0.4;
  const PathBatch mk = gen_markov_chain(ProbMatrix(m, true), 100, 5, 15);
  for (int k = 0; k < 5; ++k)
    for (int n : {1, 17, 60}) {
      const std::vector<int> cut(b.states[k].begin(), b.states[k].begin() + n);
      EXPECT_EQ(empirical_measure(b.states[k], 3, n).values(), empirical_measure(cut, 3).values());
      const std::vector<int> mcut(mk.states[k].begin(), mk.states[k].begin() + n);
      EXPECT_EQ(pair_empirical_measure(mk.states[k], 2, n).values(), pair_empirical_measure(mcut, 2).values());
      EXPECT_NEAR(pair_empirical_measure(mk.states[k], 2, n).values().sum(), 1.0, 1e-12);
    }
}

TEST(PathBatchCsv, RoundTrip) {
  Mat m(2, 2);
  m << 0.4, 0.1, 0.1, 0.4;
  const std::vector<PathBatch> batches{gen_iid_categorical(vec({0.2, 0.8}), 12, 3, 16),
                                       gen_markov_chain(ProbMatrix(m, true), 9, 2, 17),
                                       gen_gaussian_iid(vec({0.1, -0.3}), Mat::Identity(2, 2), 5, 2, 18)};
  for (const PathBatch& b : batches) {
    std::stringstream ss;
    write_path_batch_csv(b, ss);
    const PathBatch back = read_path_batch_csv(ss);
    EXPECT_EQ(back, b) << to_string(b.kind);
    EXPECT_EQ(back.seed, b.seed);
    EXPECT_EQ(back.generator, b.generator);
  }
}

TEST(PathBatchCsv, RejectsBadInput) {
  std::stringstream missing("path,step,state\n0,1,1\n");
  EXPECT_THROW(read_path_batch_csv(missing), ParseError);
  std::stringstream bad_state("# kind=categorical,generator=iid,seed=1,dim=2,initial=0\npath,step,state\n0,1,3\n");
  EXPECT_THROW(read_path_batch_csv(bad_state), ParseError);
}
