#include "divcov/harness/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "divcov/core/error.hpp"

namespace divcov::harness {

std::string_view to_token(Verdict verdict) {
  return verdict == Verdict::kSignificant ? "**" : "ns";
}

SignificanceTest significance_test_from_token(std::string_view token) {
  if (token == "t") return SignificanceTest::kStudentT;
  if (token == "permutation") return SignificanceTest::kPermutation;
  throw ContractError("unknown significance test: " + std::string(token));
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double percentile(std::vector<double> xs, double q) {
  if (xs.empty()) return 0.0;
  if (!(q > 0.0 && q <= 1.0)) throw ContractError("percentile q must be in (0, 1]");
  std::sort(xs.begin(), xs.end());
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(xs.size())));
  rank = std::clamp<std::size_t>(rank, 1, xs.size());
  return xs[rank - 1];
}

SignificanceResult significance_test(std::span<const double> seed_scores, double baseline_score,
                                     double alpha, SignificanceTest test) {
  if (seed_scores.size() < 2) throw ContractError("significance needs at least two seed scores");
  for (double x : seed_scores) {
    if (!std::isfinite(x)) throw ContractError("non-finite seed score");
  }
  SignificanceResult r;
  r.seed_scores.assign(seed_scores.begin(), seed_scores.end());
  r.baseline_score = baseline_score;
  const double m = mean(seed_scores);
  const double sd = sample_stddev(seed_scores);
  const auto n = static_cast<double>(seed_scores.size());

  if (sd == 0.0) {
    if (m == baseline_score) {
      r.statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.statistic = m > baseline_score ? std::numeric_limits<double>::infinity()
                                       : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
  } else {
    r.statistic = (m - baseline_score) / (sd / std::sqrt(n));
    if (test == SignificanceTest::kStudentT) {
      const boost::math::students_t dist(n - 1.0);
      r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic)));
    } else {
      std::vector<double> dev;
      for (double x : seed_scores) dev.push_back(x - baseline_score);
      const double observed = std::abs(mean(dev));
      const std::size_t k = dev.size();
      if (k > 20) throw ContractError("permutation test supports at most 20 seeds");
      const std::size_t total = std::size_t{1} << k;
      std::size_t extreme = 0;
      for (std::size_t mask = 0; mask < total; ++mask) {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) s += (mask >> i & 1) ? -dev[i] : dev[i];
        if (std::abs(s / static_cast<double>(k)) >= observed - 1e-12) ++extreme;
      }
      r.p_value = static_cast<double>(extreme) / static_cast<double>(total);
    }
  }
  r.p_value = std::clamp(r.p_value, 0.0, 1.0);
  r.verdict = r.p_value < alpha && m > baseline_score ? Verdict::kSignificant
                                                      : Verdict::kNotSignificant;
  return r;
}

}  // namespace divcov::harness
