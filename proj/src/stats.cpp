#include "segflow/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace segflow::stats {

namespace {

void require_nonempty(std::span<const double> s, const char* who) {
  if (s.empty()) throw std::invalid_argument(std::string(who) + ": empty sample");
}

bool is_constant(std::span<const double> x) {
  for (double v : x)
    if (v != x.front()) return false;
  return true;
}

// Pooled tie groups: sorted distinct values with per-sample counts.
struct TieGroup {
  double value;
  std::size_t in_a;
  std::size_t in_b;
};

std::vector<TieGroup> tie_groups(std::span<const double> a, std::span<const double> b) {
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(a.size() + b.size());
  for (double v : a) pooled.emplace_back(v, 0);
  for (double v : b) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end());
  std::vector<TieGroup> groups;
  for (const auto& [v, which] : pooled) {
    if (groups.empty() || groups.back().value != v) groups.push_back({v, 0, 0});
    if (which == 0)
      ++groups.back().in_a;
    else
      ++groups.back().in_b;
  }
  return groups;
}

// Largest |i*m - j*n| over the observed pooled walk; D = value / (n*m).
uint64_t ks_numerator(const std::vector<TieGroup>& groups, std::size_t n, std::size_t m) {
  int64_t i = 0, j = 0;
  uint64_t best = 0;
  for (const auto& g : groups) {
    i += static_cast<int64_t>(g.in_a);
    j += static_cast<int64_t>(g.in_b);
    const int64_t diff = i * static_cast<int64_t>(m) - j * static_cast<int64_t>(n);
    best = std::max<uint64_t>(best, static_cast<uint64_t>(std::llabs(diff)));
  }
  return best;
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

// Exact permutation p-value for the two-sample KS statistic, conditional on
// the pooled data. Counts label assignments whose whole CDF walk stays
// strictly below the observed deviation; within a tie group only the split
// matters, contributing a binomial factor. Comparisons are integral
// (|i*m - j*n| against the observed numerator) and every count stays below
// 2^53, so the double arithmetic is exact.
double ks_exact_p(const std::vector<TieGroup>& groups, std::size_t n, std::size_t m,
                  uint64_t observed_num) {
  if (observed_num == 0) return 1.0;
  // After any prefix of groups, j is determined by i and the consumed total,
  // so the state is one-dimensional: cur[i] = number of surviving labelings
  // with i a's among the consumed items.
  std::vector<double> cur(n + 1, 0.0), next(n + 1, 0.0);
  cur[0] = 1.0;
  std::size_t consumed = 0;
  for (const auto& g : groups) {
    const std::size_t gsz = g.in_a + g.in_b;
    std::fill(next.begin(), next.end(), 0.0);
    const std::size_t i_lo = consumed > m ? consumed - m : 0;
    const std::size_t i_hi = std::min(consumed, n);
    for (std::size_t i = i_lo; i <= i_hi; ++i) {
      const double ways = cur[i];
      if (ways == 0.0) continue;
      const std::size_t j = consumed - i;
      const std::size_t t_lo = gsz > m - j ? gsz - (m - j) : 0;
      const std::size_t t_hi = std::min(gsz, n - i);
      for (std::size_t t = t_lo; t <= t_hi; ++t) {
        const int64_t ni = static_cast<int64_t>(i + t);
        const int64_t nj = static_cast<int64_t>(j + gsz - t);
        const int64_t diff = ni * static_cast<int64_t>(m) - nj * static_cast<int64_t>(n);
        if (static_cast<uint64_t>(std::llabs(diff)) >= observed_num) continue;
        next[static_cast<std::size_t>(ni)] += ways * binomial(gsz, t);
      }
    }
    cur.swap(next);
    consumed += gsz;
  }
  const double surviving = cur[n];
  const double total = binomial(n + m, n);
  double p = 1.0 - surviving / total;
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

const char* method_name(Method m) {
  return m == Method::exact ? "exact" : "asymptotic";
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Jacobi theta form, accurate for small lambda where the alternating
    // series converges slowly.
    const double pi = 3.14159265358979323846;
    const double t = std::exp(-pi * pi / (8.0 * lambda * lambda));
    const double cdf = std::sqrt(2.0 * pi) / lambda *
                       (t + std::pow(t, 9.0) + std::pow(t, 25.0) + std::pow(t, 49.0));
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks2_test(std::span<const double> a, std::span<const double> b) {
  require_nonempty(a, "ks2_test");
  require_nonempty(b, "ks2_test");
  const std::size_t n = a.size(), m = b.size();
  const auto groups = tie_groups(a, b);
  const uint64_t num = ks_numerator(groups, n, m);
  TestResult r;
  r.n = n;
  r.m = m;
  r.statistic = static_cast<double>(num) / (static_cast<double>(n) * static_cast<double>(m));
  if (n <= kKsExactLimit && m <= kKsExactLimit) {
    r.method = Method::exact;
    r.p_value = ks_exact_p(groups, n, m, num);
  } else {
    r.method = Method::asymptotic;
    const double ne = static_cast<double>(n) * static_cast<double>(m) /
                      static_cast<double>(n + m);
    r.p_value = kolmogorov_sf(std::sqrt(ne) * r.statistic);
  }
  return r;
}

double quantile(std::span<const double> sample, double p) {
  require_nonempty(sample, "quantile");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile: probe outside [0,1]");
  std::vector<double> a(sample.begin(), sample.end());
  const double h = static_cast<double>(a.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(h);
  std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(lo), a.end());
  const double v_lo = a[lo];
  if (h == static_cast<double>(lo)) return v_lo;
  const double v_hi = *std::min_element(a.begin() + static_cast<std::ptrdiff_t>(lo) + 1, a.end());
  return v_lo + (h - static_cast<double>(lo)) * (v_hi - v_lo);
}

std::vector<double> quantiles(std::span<const double> sample, std::span<const double> probes) {
  std::vector<double> out;
  out.reserve(probes.size());
  for (double p : probes) out.push_back(quantile(sample, p));
  return out;
}

double mean(std::span<const double> sample) {
  require_nonempty(sample, "mean");
  return std::accumulate(sample.begin(), sample.end(), 0.0) /
         static_cast<double>(sample.size());
}

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

double pearson_r(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("correlation: constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  int64_t concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[j] - x[i], dy = y[j] - y[i];
      if (dx == 0.0 && dy == 0.0) continue;
      if (dx == 0.0) {
        ++ties_x;
      } else if (dy == 0.0) {
        ++ties_y;
      } else if ((dx > 0.0) == (dy > 0.0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double n0 = static_cast<double>(n) * (static_cast<double>(n) - 1.0) / 2.0;
  double tied_x_pairs = 0.0, tied_y_pairs = 0.0;
  {
    // recompute tie-pair totals per series (including pairs tied in both)
    auto tied_pairs = [](std::span<const double> v) {
      std::vector<double> s(v.begin(), v.end());
      std::sort(s.begin(), s.end());
      double total = 0.0;
      std::size_t i = 0;
      while (i < s.size()) {
        std::size_t j = i;
        while (j + 1 < s.size() && s[j + 1] == s[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        total += t * (t - 1.0) / 2.0;
        i = j + 1;
      }
      return total;
    };
    tied_x_pairs = tied_pairs(x);
    tied_y_pairs = tied_pairs(y);
  }
  const double denom = std::sqrt((n0 - tied_x_pairs) * (n0 - tied_y_pairs));
  if (denom == 0.0) throw std::invalid_argument("correlation: constant series");
  return std::clamp(static_cast<double>(concordant - discordant) / denom, -1.0, 1.0);
}

double rank_statistic(std::span<const double> x, std::span<const double> y, RankFlavor f) {
  if (f == RankFlavor::kendall_tau) return kendall_tau_b(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson_r(rx, ry);
}

// Two-sided permutation p over all n! pairings: fraction of permutations of
// y whose |statistic| reaches the observed |statistic| (small epsilon guards
// against float noise in equal-statistic permutations).
double permutation_p(std::span<const double> x, std::span<const double> y, RankFlavor f,
                     double observed) {
  const std::size_t n = x.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> ybuf(n);
  uint64_t total = 0, at_least = 0;
  const double threshold = std::abs(observed) - 1e-12;
  do {
    for (std::size_t i = 0; i < n; ++i) ybuf[i] = y[perm[i]];
    const double s = rank_statistic(x, ybuf, f);
    ++total;
    if (std::abs(s) >= threshold) ++at_least;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(at_least) / static_cast<double>(total);
}

}  // namespace

double student_t_two_sided(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  // regularized incomplete beta via Lentz continued fraction
  const auto betacf = [](double a, double b, double x) {
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    const double tiny = 1e-300;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
      const double m2 = 2.0 * m;
      double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < tiny) d = tiny;
      c = 1.0 + aa / c;
      if (std::abs(c) < tiny) c = tiny;
      d = 1.0 / d;
      h *= d * c;
      aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < tiny) d = tiny;
      c = 1.0 + aa / c;
      if (std::abs(c) < tiny) c = tiny;
      d = 1.0 / d;
      const double del = d * c;
      h *= del;
      if (std::abs(del - 1.0) < 3e-15) break;
    }
    return h;
  };
  const auto betai = [&](double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
  };
  const double x = df / (df + t * t);
  return std::clamp(betai(df / 2.0, 0.5, x), 0.0, 1.0);
}

double normal_two_sided(double z) {
  return std::clamp(std::erfc(std::abs(z) / std::sqrt(2.0)), 0.0, 1.0);
}

TestResult rank_correlation(std::span<const double> x, std::span<const double> y,
                            RankFlavor flavor) {
  if (x.size() != y.size()) throw std::invalid_argument("rank_correlation: length mismatch");
  if (x.size() < 3) throw std::invalid_argument("rank_correlation: need at least 3 pairs");
  if (is_constant(x) || is_constant(y))
    throw std::invalid_argument("rank_correlation: constant series");
  const std::size_t n = x.size();
  TestResult r;
  r.n = r.m = n;
  r.statistic = rank_statistic(x, y, flavor);
  if (n <= kRankExactLimit) {
    r.method = Method::exact;
    r.p_value = permutation_p(x, y, flavor, r.statistic);
    return r;
  }
  r.method = Method::asymptotic;
  if (flavor == RankFlavor::spearman_rho) {
    const double rho = r.statistic;
    if (std::abs(rho) >= 1.0) {
      r.p_value = 0.0;
    } else {
      const double t = rho * std::sqrt((static_cast<double>(n) - 2.0) / (1.0 - rho * rho));
      r.p_value = student_t_two_sided(t, static_cast<double>(n) - 2.0);
    }
  } else {
    const double nn = static_cast<double>(n);
    const double z = 3.0 * r.statistic * std::sqrt(nn * (nn - 1.0)) /
                     std::sqrt(2.0 * (2.0 * nn + 5.0));
    r.p_value = normal_two_sided(z);
  }
  return r;
}

TestResult pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson_correlation: length mismatch");
  if (x.size() < 3) throw std::invalid_argument("pearson_correlation: need at least 3 pairs");
  TestResult r;
  r.n = r.m = x.size();
  r.statistic = pearson_r(x, y);
  r.method = Method::asymptotic;
  if (std::abs(r.statistic) >= 1.0) {
    r.p_value = 0.0;
  } else {
    const double df = static_cast<double>(x.size()) - 2.0;
    const double t = r.statistic * std::sqrt(df / (1.0 - r.statistic * r.statistic));
    r.p_value = student_t_two_sided(t, df);
  }
  return r;
}

}  // namespace segflow::stats
