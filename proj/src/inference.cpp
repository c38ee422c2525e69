#include "egraph/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "egraph/error.hpp"

namespace egraph {
namespace {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};

Moments moments(std::span<const double> x) {
  Moments m;
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) /
           static_cast<double>(x.size());
  for (double v : x) m.variance += (v - m.mean) * (v - m.mean);
  m.variance /= static_cast<double>(x.size() - 1);
  return m;
}

void require_finite(std::span<const double> x, const char* what) {
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw InvalidInput(std::string(what) + " contains non-finite values");
    }
  }
}

double two_sided_t_p(double t, double dof) {
  if (t == 0.0) return 1.0;
  if (!std::isfinite(t)) return 0.0;
  const boost::math::students_t dist(dof);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))),
                    0.0, 1.0);
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Generator for replicate `index`, independent of evaluation order.
std::mt19937_64 replicate_stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed ^ (0xD1B54A32D192ED03ull * (index + 1));
  std::seed_seq seq{splitmix64(state), splitmix64(state), splitmix64(state),
                    splitmix64(state)};
  return std::mt19937_64(seq);
}

// Uniform integer in [0, bound) by rejection, identical on every platform.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = 0;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

void shuffle(std::vector<int>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[bounded(rng, i)]);
  }
}

}  // namespace

void DistanceMatrix::validate() const {
  const Eigen::Index m = d.rows();
  if (d.cols() != m) throw InvalidInput("distance matrix must be square");
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(m)) {
    throw InvalidInput("distance matrix label count does not match its size");
  }
  if (covariate && covariate->size() != static_cast<std::size_t>(m)) {
    throw InvalidInput("covariate length does not match distance matrix");
  }
  if (!d.allFinite()) throw InvalidInput("distance matrix is not finite");
  for (Eigen::Index i = 0; i < m; ++i) {
    if (d(i, i) != 0.0) {
      throw InvalidInput("distance matrix diagonal must be zero");
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      if (d(i, j) < 0.0) throw InvalidInput("negative distance");
      if (std::abs(d(i, j) - d(j, i)) > 1e-6) {
        throw InvalidInput("distance matrix is not symmetric at (" +
                           std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }
}

TestReport two_sample_t(std::span<const double> a, std::span<const double> b,
                        TTestVariance variance) {
  if (a.size() < 2 || b.size() < 2) {
    throw InvalidInput("t-test needs at least two samples per group");
  }
  require_finite(a, "scores");
  require_finite(b, "scores");
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());

  TestReport r;
  double se2 = 0.0;
  if (variance == TTestVariance::welch) {
    r.method = "welch_t";
    const double va = ma.variance / na;
    const double vb = mb.variance / nb;
    se2 = va + vb;
    if (se2 > 0.0) {
      r.dof1 = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    }
  } else {
    r.method = "pooled_t";
    const double pooled =
        ((na - 1.0) * ma.variance + (nb - 1.0) * mb.variance) / (na + nb - 2.0);
    se2 = pooled * (1.0 / na + 1.0 / nb);
    r.dof1 = na + nb - 2.0;
  }
  if (!(se2 > 0.0)) {
    throw NumericError("t-test: both groups have zero variance");
  }
  r.statistic = (ma.mean - mb.mean) / std::sqrt(se2);
  r.p_value = two_sided_t_p(r.statistic, r.dof1);
  return r;
}

TestReport hotelling_t2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::Index k = a.cols();
  if (b.cols() != k || k < 1) {
    throw InvalidInput("Hotelling test: groups need the same number of "
                       "score components");
  }
  const double na = static_cast<double>(a.rows());
  const double nb = static_cast<double>(b.rows());
  const double n = na + nb;
  if (a.rows() < 2 || b.rows() < 2 || !(n - 2.0 > static_cast<double>(k))) {
    throw InvalidInput("Hotelling test needs m_a + m_b - 2 > k");
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw InvalidInput("scores contain non-finite values");
  }

  const Eigen::VectorXd mean_a = a.colwise().mean().transpose();
  const Eigen::VectorXd mean_b = b.colwise().mean().transpose();
  const Eigen::MatrixXd ca = a.rowwise() - mean_a.transpose();
  const Eigen::MatrixXd cb = b.rowwise() - mean_b.transpose();
  Eigen::MatrixXd pooled =
      (ca.transpose() * ca + cb.transpose() * cb) / (n - 2.0);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(pooled);
  const double top = eig.eigenvalues().maxCoeff();
  if (!(top > 0.0)) {
    throw NumericError("Hotelling test: pooled covariance is zero");
  }
  if (eig.eigenvalues().minCoeff() <= 1e-12 * top) {
    pooled += 1e-8 * pooled.trace() / static_cast<double>(k) *
              Eigen::MatrixXd::Identity(k, k);
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(pooled);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericError("Hotelling test: pooled covariance is singular");
  }
  const Eigen::VectorXd diff = mean_a - mean_b;
  const double t2 = na * nb / n * diff.dot(ldlt.solve(diff));

  TestReport r;
  r.method = "hotelling_t2";
  r.statistic = t2;
  r.dof1 = static_cast<double>(k);
  r.dof2 = n - static_cast<double>(k) - 1.0;
  const double f = (n - static_cast<double>(k) - 1.0) /
                   (static_cast<double>(k) * (n - 2.0)) * t2;
  if (f <= 0.0) {
    r.p_value = 1.0;
  } else {
    const boost::math::fisher_f dist(r.dof1, r.dof2);
    r.p_value =
        std::clamp(boost::math::cdf(boost::math::complement(dist, f)), 0.0, 1.0);
  }
  return r;
}

TestReport covariate_correlation(std::span<const double> scores,
                                 std::span<const double> covariate) {
  if (scores.size() != covariate.size()) {
    throw InvalidInput("scores and covariate have different lengths");
  }
  if (scores.size() < 3) {
    throw InvalidInput("correlation needs at least three samples");
  }
  require_finite(scores, "scores");
  require_finite(covariate, "covariate");
  const Moments ms = moments(scores);
  const Moments mc = moments(covariate);
  if (!(ms.variance > 0.0) || !(mc.variance > 0.0)) {
    throw NumericError("correlation: zero variance");
  }
  double cross = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    cross += (scores[i] - ms.mean) * (covariate[i] - mc.mean);
  }
  const double m = static_cast<double>(scores.size());
  cross /= m - 1.0;

  TestReport r;
  r.method = "pearson";
  r.statistic =
      std::clamp(cross / std::sqrt(ms.variance * mc.variance), -1.0, 1.0);
  r.dof1 = m - 2.0;
  const double rr = r.statistic * r.statistic;
  r.p_value = rr >= 1.0 ? 0.0
                        : two_sided_t_p(r.statistic * std::sqrt((m - 2.0) / (1.0 - rr)),
                                        r.dof1);
  return r;
}

std::string to_string(PermutationStatistic statistic) {
  return statistic == PermutationStatistic::pseudo_f ? "pseudo_f"
                                                     : "between_minus_within";
}

PermutationStatistic parse_permutation_statistic(const std::string& tag) {
  if (tag == "between_minus_within") {
    return PermutationStatistic::between_minus_within;
  }
  if (tag == "pseudo_f") return PermutationStatistic::pseudo_f;
  throw UsageError("unknown permutation statistic '" + tag + "'");
}

double permutation_statistic(const Eigen::MatrixXd& d,
                             std::span<const int> labels,
                             PermutationStatistic statistic) {
  const std::size_t m = labels.size();
  double between = 0.0, within = 0.0;
  std::size_t n_between = 0, n_within = 0;
  double sq_total = 0.0;
  double sq_within[2] = {0.0, 0.0};
  std::size_t group_size[2] = {0, 0};
  for (std::size_t i = 0; i < m; ++i) {
    ++group_size[labels[i]];
    for (std::size_t j = i + 1; j < m; ++j) {
      const double v =
          d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      sq_total += v * v;
      if (labels[i] == labels[j]) {
        within += v;
        ++n_within;
        sq_within[labels[i]] += v * v;
      } else {
        between += v;
        ++n_between;
      }
    }
  }
  if (statistic == PermutationStatistic::between_minus_within) {
    const double mb = n_between ? between / static_cast<double>(n_between) : 0.0;
    const double mw = n_within ? within / static_cast<double>(n_within) : 0.0;
    return mb - mw;
  }
  const double n = static_cast<double>(m);
  const double ss_total = sq_total / n;
  const double ss_within =
      sq_within[0] / static_cast<double>(group_size[0]) +
      sq_within[1] / static_cast<double>(group_size[1]);
  const double ss_among = ss_total - ss_within;
  if (m <= 2 || !(ss_within > 0.0)) {
    return ss_among > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return ss_among / (ss_within / (n - 2.0));
}

TestReport permutation_test(const DistanceMatrix& dist,
                            std::span<const int> labels, std::size_t n_perm,
                            std::uint64_t seed,
                            PermutationStatistic statistic) {
  dist.validate();
  if (labels.size() != static_cast<std::size_t>(dist.d.rows())) {
    throw InvalidInput("label count does not match distance matrix");
  }
  if (n_perm < 100) {
    throw UsageError("permutation test needs at least 100 permutations");
  }
  std::size_t ones = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw InvalidInput("group labels must be 0 or 1");
    ones += static_cast<std::size_t>(l);
  }
  if (ones == 0 || ones == labels.size()) {
    throw InvalidInput("permutation test needs two non-empty groups");
  }

  const double observed = permutation_statistic(dist.d, labels, statistic);
  std::size_t at_least = 0;
  std::vector<int> shuffled;
  for (std::size_t r = 0; r < n_perm; ++r) {
    shuffled.assign(labels.begin(), labels.end());
    std::mt19937_64 rng = replicate_stream(seed, r);
    shuffle(shuffled, rng);
    if (permutation_statistic(dist.d, shuffled, statistic) >= observed) {
      ++at_least;
    }
  }

  TestReport report;
  report.method = "permutation_" + to_string(statistic);
  report.statistic = observed;
  report.p_value = static_cast<double>(1 + at_least) /
                   static_cast<double>(1 + n_perm);
  report.permutations = n_perm;
  report.seed = seed;
  return report;
}

MdsResult classical_mds(const DistanceMatrix& dist, std::size_t k) {
  if (k < 1) throw UsageError("MDS target dimension must be at least 1");
  dist.validate();
  const Eigen::Index m = dist.d.rows();
  const Eigen::MatrixXd sq = dist.d.array().square().matrix();
  const Eigen::MatrixXd j =
      Eigen::MatrixXd::Identity(m, m) -
      Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m));
  Eigen::MatrixXd b = -0.5 * j * sq * j;
  b = 0.5 * (b + b.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  // Ascending from Eigen; walk from the top.
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double top = m > 0 ? values(m - 1) : 0.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = m - 1; c >= 0 && keep.size() < k; --c) {
    if (top > 0.0 && values(c) > 1e-10 * top) keep.push_back(c);
  }

  MdsResult out;
  out.truncated = keep.size() < k;
  out.coordinates.resize(m, static_cast<Eigen::Index>(keep.size()));
  out.eigenvalues.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    const double lambda = values(keep[c]);
    Eigen::VectorXd coords = eig.eigenvectors().col(keep[c]) * std::sqrt(lambda);
    Eigen::Index at = 0;
    coords.cwiseAbs().maxCoeff(&at);
    if (coords(at) < 0.0) coords *= -1.0;
    out.coordinates.col(col) = coords;
    out.eigenvalues(col) = lambda;
  }
  return out;
}

}  // namespace egraph
