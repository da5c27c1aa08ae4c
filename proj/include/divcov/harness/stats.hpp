#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace divcov::harness {

enum class Verdict { kSignificant, kNotSignificant };

std::string_view to_token(Verdict verdict);  // "**", "ns"

enum class SignificanceTest { kStudentT, kPermutation };

SignificanceTest significance_test_from_token(std::string_view token);  // "t", "permutation"

struct SignificanceResult {
  std::string method;
  std::string baseline;
  std::vector<double> seed_scores;
  double baseline_score = 0.0;
  double statistic = 0.0;
  double p_value = 1.0;
  Verdict verdict = Verdict::kNotSignificant;
};

// Two-sided one-sample test of the seed scores against a fixed baseline
// value. ** iff p < alpha and the seed mean exceeds the baseline. Zero
// variance gives p = 0 when the mean differs from the baseline and p = 1
// (ns) when it is equal. The permutation variant enumerates all sign flips
// of the deviations from the baseline.
SignificanceResult significance_test(std::span<const double> seed_scores, double baseline_score,
                                     double alpha = 0.05,
                                     SignificanceTest test = SignificanceTest::kStudentT);

double mean(std::span<const double> xs);
// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_stddev(std::span<const double> xs);
// Nearest-rank percentile, q in (0, 1].
double percentile(std::vector<double> xs, double q);

}  // namespace divcov::harness
