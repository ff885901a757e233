#pragma once

// Seeded data-generating processes and their empirical statistics.
//
// Every path k owns the stream Rng::stream(seed, k, generator id), so batches are
// reproducible regardless of how paths are scheduled across threads.

#include "ldo/common.hpp"
#include "ldo/csv.hpp"
#include "ldo/parallel.hpp"
#include "ldo/rng.hpp"
#include "ldo/spaces.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace ldo {

namespace stream_id {
inline constexpr std::uint64_t kCategorical = 11;
inline constexpr std::uint64_t kSource = 12;
inline constexpr std::uint64_t kGaussian = 13;
inline constexpr std::uint64_t kMarkov = 14;
}  // namespace stream_id

enum class PathKind { Categorical, Markov, Gaussian };

inline const char* to_string(PathKind k) {
  switch (k) {
    case PathKind::Categorical: return "categorical";
    case PathKind::Markov: return "markov";
    case PathKind::Gaussian: return "gaussian";
  }
  return "?";
}

struct PathBatch {
  PathKind kind = PathKind::Categorical;
  std::string generator;
  std::uint64_t seed = 0;
  int dim = 0;            // alphabet size, or vector dimension for Gaussian batches
  int initial_state = 0;  // Markov: the deterministic xi_0 (1-based)
  std::vector<std::vector<int>> states;  // K paths of N states in {1, ..., dim}
  std::vector<Mat> means;                // Gaussian: K paths, row n-1 holds Z_n

  int paths() const { return static_cast<int>(kind == PathKind::Gaussian ? means.size() : states.size()); }
  int steps() const {
    if (kind == PathKind::Gaussian) return means.empty() ? 0 : static_cast<int>(means[0].rows());
    return states.empty() ? 0 : static_cast<int>(states[0].size());
  }

  friend bool operator==(const PathBatch& a, const PathBatch& b) {
    if (a.kind != b.kind || a.dim != b.dim || a.initial_state != b.initial_state || a.states != b.states ||
        a.means.size() != b.means.size())
      return false;
    for (std::size_t k = 0; k < a.means.size(); ++k)
      if (a.means[k] != b.means[k]) return false;
    return true;
  }
};

/// Per-path source label in {1, 2}.
struct SourceAssignment {
  std::vector<int> label;
};

namespace detail {

inline Vec cumulative(const Vec& p) {
  Vec c(p.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) c[i] = (acc += p[i]);
  return c;
}

/// 1-based categorical draw by inverse CDF; u in [0, 1).
inline int draw_state(const Vec& cum, double u) {
  const auto d = cum.size();
  const double total = cum[d - 1];
  const double target = u * total;
  for (Eigen::Index i = 0; i < d; ++i)
    if (target < cum[i]) return static_cast<int>(i) + 1;
  return static_cast<int>(d);
}

inline void check_distribution(const Vec& theta, const char* what) {
  if (theta.size() == 0 || theta.minCoeff() < 0.0 || std::abs(theta.sum() - 1.0) > 1e-9)
    throw DomainError(std::string(what) + ": not a probability vector");
}

}  // namespace detail

inline PathBatch gen_iid_categorical(const Vec& theta, int n, int K, std::uint64_t seed) {
  detail::check_distribution(theta, "gen_iid_categorical");
  if (n < 1 || K < 1) throw DomainError("gen_iid_categorical: need n >= 1 and K >= 1");
  PathBatch b;
  b.kind = PathKind::Categorical;
  b.generator = "iid";
  b.seed = seed;
  b.dim = static_cast<int>(theta.size());
  b.states.assign(K, std::vector<int>(n));
  const Vec cum = detail::cumulative(theta);
  parallel_for(static_cast<std::size_t>(K), [&](std::size_t k) {
    Rng rng = Rng::stream(seed, k, stream_id::kCategorical);
    for (int t = 0; t < n; ++t) b.states[k][t] = detail::draw_state(cum, rng.uniform());
  });
  return b;
}

/// Each path picks theta1 with probability p1 (else theta2) once, then samples i.i.d.
/// The path streams coincide with gen_iid_categorical, so p1 = 1 reproduces it exactly.
inline std::pair<PathBatch, SourceAssignment> gen_mixture_sources(const Vec& theta1, const Vec& theta2, double p1,
                                                                  int n, int K, std::uint64_t seed) {
  detail::check_distribution(theta1, "gen_mixture_sources");
  detail::check_distribution(theta2, "gen_mixture_sources");
  require_same_size(theta1, theta2, "gen_mixture_sources");
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw DomainError("gen_mixture_sources: p1 must lie in [0, 1]");
  if (n < 1 || K < 1) throw DomainError("gen_mixture_sources: need n >= 1 and K >= 1");
  PathBatch b;
  b.kind = PathKind::Categorical;
  b.generator = "mixture";
  b.seed = seed;
  b.dim = static_cast<int>(theta1.size());
  b.states.assign(K, std::vector<int>(n));
  SourceAssignment src;
  src.label.assign(K, 1);
  const Vec cum1 = detail::cumulative(theta1);
  const Vec cum2 = detail::cumulative(theta2);
  parallel_for(static_cast<std::size_t>(K), [&](std::size_t k) {
    Rng source_rng = Rng::stream(seed, k, stream_id::kSource);
    src.label[k] = source_rng.uniform() < p1 ? 1 : 2;
    const Vec& cum = src.label[k] == 1 ? cum1 : cum2;
    Rng rng = Rng::stream(seed, k, stream_id::kCategorical);
    for (int t = 0; t < n; ++t) b.states[k][t] = detail::draw_state(cum, rng.uniform());
  });
  return {std::move(b), std::move(src)};
}

/// Running empirical means Z_1, ..., Z_n of xi_k ~ N(theta, Sigma), xi = theta + L w with
/// L the Cholesky factor of Sigma and w standard normal.
inline PathBatch gen_gaussian_iid(const Vec& theta, const Mat& sigma, int n, int K, std::uint64_t seed) {
  if (sigma.rows() != theta.size() || sigma.cols() != theta.size())
    throw DimensionError("gen_gaussian_iid: covariance dimension mismatch");
  Eigen::LLT<Mat> llt(sigma);
  if (llt.info() != Eigen::Success) throw DomainError("gen_gaussian_iid: Cholesky failed, covariance not PD");
  const Mat L = llt.matrixL();
  if (n < 1 || K < 1) throw DomainError("gen_gaussian_iid: need n >= 1 and K >= 1");
  PathBatch b;
  b.kind = PathKind::Gaussian;
  b.generator = "gaussian";
  b.seed = seed;
  b.dim = static_cast<int>(theta.size());
  b.means.assign(K, Mat());
  parallel_for(static_cast<std::size_t>(K), [&](std::size_t k) {
    Rng rng = Rng::stream(seed, k, stream_id::kGaussian);
    Mat m(n, theta.size());
    Vec sum = Vec::Zero(theta.size());
    Vec w(theta.size());
    for (int t = 0; t < n; ++t) {
      for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.normal();
      sum += theta + L * w;
      m.row(t) = (sum / static_cast<double>(t + 1)).transpose();
    }
    b.means[k] = std::move(m);
  });
  return b;
}

/// Transition kernel p(j|i) = theta_ij / sum_k theta_ik of a pair measure.
inline Mat transition_kernel(const Mat& pair) {
  Mat p = pair;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double s = p.row(i).sum();
    if (!(s > 0.0)) throw DomainError("transition_kernel: zero row sum in row " + std::to_string(i + 1));
    p.row(i) /= s;
  }
  return p;
}

/// Stationary pair measure w_i p(j|i) of a transition matrix (power iteration for w).
inline Mat stationary_pair_measure(const Mat& kernel) {
  const auto s = kernel.rows();
  Vec w = Vec::Constant(s, 1.0 / static_cast<double>(s));
  for (int it = 0; it < 100000; ++it) {
    Vec next = (w.transpose() * kernel).transpose();
    next /= next.sum();
    const double diff = (next - w).cwiseAbs().maxCoeff();
    w = next;
    if (diff < 1e-16) break;
  }
  Mat pair(s, s);
  for (Eigen::Index i = 0; i < s; ++i) pair.row(i) = w[i] * kernel.row(i);
  return pair / pair.sum();
}

/// Chain paths xi_1, ..., xi_n from the kernel of `theta`, started at xi_0 = 1.
inline PathBatch gen_markov_chain(const ProbMatrix& theta, int n, int K, std::uint64_t seed) {
  if (n < 1 || K < 1) throw DomainError("gen_markov_chain: need n >= 1 and K >= 1");
  const Mat kernel = transition_kernel(theta.values());
  const int s = theta.states();
  std::vector<Vec> cum(s);
  for (int i = 0; i < s; ++i) cum[i] = detail::cumulative(kernel.row(i).transpose());
  PathBatch b;
  b.kind = PathKind::Markov;
  b.generator = "markov";
  b.seed = seed;
  b.dim = s;
  b.initial_state = 1;
  b.states.assign(K, std::vector<int>(n));
  parallel_for(static_cast<std::size_t>(K), [&](std::size_t k) {
    Rng rng = Rng::stream(seed, k, stream_id::kMarkov);
    int prev = 1;
    for (int t = 0; t < n; ++t) prev = b.states[k][t] = detail::draw_state(cum[prev - 1], rng.uniform());
  });
  return b;
}

// ---------------------------------------------------------------------------------------------
// Empirical statistics

/// Normalized counts of the first n states (n = 0: whole path).
inline ProbVector empirical_measure(const std::vector<int>& path, int d, int n = 0) {
  if (n == 0) n = static_cast<int>(path.size());
  if (n < 1 || n > static_cast<int>(path.size())) throw DomainError("empirical_measure: bad prefix length");
  std::vector<long> counts(d, 0);
  for (int t = 0; t < n; ++t) {
    const int s = path[t];
    if (s < 1 || s > d) throw DomainError("empirical_measure: state " + std::to_string(s) + " outside 1.." + std::to_string(d));
    ++counts[s - 1];
  }
  Vec p(d);
  for (int i = 0; i < d; ++i) p[i] = static_cast<double>(counts[i]) / n;
  return ProbVector(std::move(p));
}

/// Mean of the rows of a sample matrix.
inline Vec empirical_mean(const Mat& samples) {
  if (samples.rows() == 0) throw DomainError("empirical_mean: empty path");
  return samples.colwise().mean().transpose();
}

/// (Z_n)_ij = (1/n) #{k in 1..n : (xi_{k-1}, xi_k) = (i, j)}, using xi_0 = `initial`.
inline ProbMatrix pair_empirical_measure(const std::vector<int>& path, int d, int n = 0, int initial = 1) {
  if (n == 0) n = static_cast<int>(path.size());
  if (n < 1 || n > static_cast<int>(path.size())) throw DomainError("pair_empirical_measure: bad prefix length");
  Mat m = Mat::Zero(d, d);
  int prev = initial;
  for (int t = 0; t < n; ++t) {
    const int s = path[t];
    if (s < 1 || s > d || prev < 1 || prev > d)
      throw DomainError("pair_empirical_measure: state outside 1.." + std::to_string(d));
    m(prev - 1, s - 1) += 1.0;
    prev = s;
  }
  return ProbMatrix(m / static_cast<double>(n));
}

/// Data point Z_n of path k: empirical measure, flattened pair measure, or running mean.
inline Vec batch_statistic(const PathBatch& b, int k, int n) {
  switch (b.kind) {
    case PathKind::Categorical: return empirical_measure(b.states[k], b.dim, n).values();
    case PathKind::Markov: return pair_empirical_measure(b.states[k], b.dim, n, b.initial_state).flatten();
    case PathKind::Gaussian: return b.means[k].row(n - 1).transpose();
  }
  return {};
}

// ---------------------------------------------------------------------------------------------
// CSV export / import
//
// First line: "# kind=<kind>,generator=<name>,seed=<u64>,dim=<d>,initial=<xi0>", then a header
// and one row per (path, step). Categorical and Markov rows carry `state`; Gaussian rows carry
// the running mean components z1..zd. Markov files include step 0 for xi_0.

inline void write_path_batch_csv(const PathBatch& b, std::ostream& os) {
  os << "# kind=" << to_string(b.kind) << ",generator=" << b.generator << ",seed=" << b.seed << ",dim=" << b.dim
     << ",initial=" << b.initial_state << "\r\n";
  if (b.kind == PathKind::Gaussian) {
    std::vector<std::string> header{"path", "step"};
    for (int i = 1; i <= b.dim; ++i) header.push_back("z" + std::to_string(i));
    write_csv_row(os, header);
    for (int k = 0; k < b.paths(); ++k)
      for (Eigen::Index t = 0; t < b.means[k].rows(); ++t) {
        std::vector<std::string> row{std::to_string(k), std::to_string(t + 1)};
        for (int i = 0; i < b.dim; ++i) row.push_back(format_double(b.means[k](t, i)));
        write_csv_row(os, row);
      }
    return;
  }
  write_csv_row(os, {"path", "step", "state"});
  for (int k = 0; k < b.paths(); ++k) {
    if (b.kind == PathKind::Markov) write_csv_row(os, {std::to_string(k), "0", std::to_string(b.initial_state)});
    for (std::size_t t = 0; t < b.states[k].size(); ++t)
      write_csv_row(os, {std::to_string(k), std::to_string(t + 1), std::to_string(b.states[k][t])});
  }
}

inline void write_path_batch_csv(const PathBatch& b, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_path_batch_csv(b, os);
  if (!os) throw std::runtime_error("write failed: " + path);
}

inline PathBatch read_path_batch_csv(std::istream& is) {
  std::string meta;
  std::getline(is, meta);
  if (meta.rfind("# ", 0) != 0) throw ParseError("missing '# kind=...' metadata line", 1, 1);
  PathBatch b;
  std::stringstream ms(meta.substr(2));
  std::string item;
  while (std::getline(ms, item, ',')) {
    while (!item.empty() && (item.back() == '\r' || item.back() == ' ')) item.pop_back();
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ParseError("bad metadata item '" + item + "'", 1, 1);
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    if (key == "kind") {
      if (val == "categorical") b.kind = PathKind::Categorical;
      else if (val == "markov") b.kind = PathKind::Markov;
      else if (val == "gaussian") b.kind = PathKind::Gaussian;
      else throw ParseError("unknown kind '" + val + "'", 1, 1);
    } else if (key == "generator") b.generator = val;
    else if (key == "seed") b.seed = std::stoull(val);
    else if (key == "dim") b.dim = std::stoi(val);
    else if (key == "initial") b.initial_state = std::stoi(val);
    else throw ParseError("unknown metadata key '" + key + "'", 1, 1);
  }
  auto records = read_csv_records(is);
  if (records.empty()) throw ParseError("missing header", 2, 1);
  for (auto& r : records)
    for (auto& f : r) ++f.line;  // account for the metadata line
  const std::size_t width = records[0].size();
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != width)
      throw ParseError("expected " + std::to_string(width) + " fields", rec[0].line, rec[0].column);
    const long long k = parse_int(rec[0]);
    const long long t = parse_int(rec[1]);
    if (k < 0 || t < 0) throw ParseError("negative index", rec[0].line, rec[0].column);
    if (b.kind == PathKind::Gaussian) {
      if (static_cast<long long>(b.means.size()) <= k) b.means.resize(k + 1);
      Mat& m = b.means[k];
      if (m.rows() < t) m.conservativeResize(t, b.dim);
      for (int i = 0; i < b.dim; ++i) m(t - 1, i) = parse_double(rec[2 + i]);
    } else {
      if (static_cast<long long>(b.states.size()) <= k) b.states.resize(k + 1);
      const long long s = parse_int(rec[2]);
      if (s < 1 || s > b.dim) throw ParseError("state outside 1.." + std::to_string(b.dim), rec[2].line, rec[2].column);
      if (t == 0) continue;  // xi_0 is recorded in the metadata
      auto& p = b.states[k];
      if (static_cast<long long>(p.size()) < t) p.resize(t);
      p[t - 1] = static_cast<int>(s);
    }
  }
  return b;
}

inline PathBatch read_path_batch_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_path_batch_csv(is);
}

}  // namespace ldo
