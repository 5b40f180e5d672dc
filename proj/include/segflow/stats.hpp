#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace segflow::stats {

enum class Method { exact, asymptotic };

const char* method_name(Method m);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  std::size_t m = 0;  // second sample size; equals n for paired statistics
  Method method = Method::exact;
};

// Two-sample Kolmogorov-Smirnov test. D = sup |F_a - F_b| over the pooled
// sample points. The p-value is exact (lattice-path count over all
// C(n+m, n) label assignments, tie-aware) when both n and m are at or
// below kKsExactLimit, and uses the asymptotic Kolmogorov distribution of
// sqrt(nm/(n+m)) * D otherwise.
inline constexpr std::size_t kKsExactLimit = 25;

TestResult ks2_test(std::span<const double> a, std::span<const double> b);

enum class RankFlavor { spearman_rho, kendall_tau };

// Rank correlation with a two-sided p-value: full permutation enumeration
// for n <= kRankExactLimit, t / normal approximation above. Ties get
// average ranks (Spearman) and the tau-b correction (Kendall).
inline constexpr std::size_t kRankExactLimit = 10;

TestResult rank_correlation(std::span<const double> x, std::span<const double> y,
                            RankFlavor flavor);

TestResult pearson_correlation(std::span<const double> x, std::span<const double> y);

// Order-statistics quantiles with linear interpolation between adjacent
// order statistics (h = (n-1)p). quantile(0.5) of an even-sized sample is
// the mean of the two central values.
double quantile(std::span<const double> sample, double p);
std::vector<double> quantiles(std::span<const double> sample, std::span<const double> probes);

double mean(std::span<const double> sample);
inline double median(std::span<const double> sample) { return quantile(sample, 0.5); }

// Average ranks, 1-based, ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x);

// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_sf(double lambda);

// Two-sided p for a Student-t statistic with df degrees of freedom.
double student_t_two_sided(double t, double df);

// Two-sided p for a standard normal statistic.
double normal_two_sided(double z);

}  // namespace segflow::stats
