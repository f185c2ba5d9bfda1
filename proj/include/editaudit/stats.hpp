// Copyright 2026 The editaudit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include "editaudit/error.hpp"

namespace editaudit::stats {

/// Inverse of the standard normal CDF. Acklam's rational approximation
/// polished with one Halley step against erfc, good to ~1e-15 relative.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw InvalidArgument("normal_quantile: p outside [0, 1]");
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  // Halley refinement. Work in the lower tail to keep erfc accurate.
  for (int iter = 0; iter < 2; ++iter) {
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
    x = x - u / (1 + x * u / 2);
  }
  return x;
}

/// Two-sided critical value z_{1 - alpha/2}.
inline double z_critical(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  return -normal_quantile(alpha / 2);
}

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for k successes in n trials.
inline Interval wilson_interval(std::int64_t k, std::int64_t n, double alpha) {
  if (n <= 0) throw InvalidArgument("wilson_interval: no trials");
  if (k < 0 || k > n) throw InvalidArgument("wilson_interval: successes outside [0, n]");
  const double z = z_critical(alpha);
  const double z2 = z * z;
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double denom = nd + z2;
  const double center = (kd + z2 / 2) / denom;
  const double half = z / denom * std::sqrt(kd * (nd - kd) / nd + z2 / 4);
  Interval out{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (k == 0) out.low = 0.0;
  if (k == n) out.high = 1.0;
  return out;
}

/// A 2x2 contingency table; rows are groups, columns are (success, failure).
struct Table2x2 {
  std::int64_t a = 0, b = 0;  // group 1: successes, failures
  std::int64_t c = 0, d = 0;  // group 2: successes, failures

  std::int64_t min_cell() const { return std::min({a, b, c, d}); }
};

namespace detail {

inline double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(k) + 1) -
         std::lgamma(static_cast<double>(n - k) + 1);
}

// Exact binomial coefficient; valid while the result fits in 64 bits.
inline unsigned __int128 choose_exact(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::int64_t i = 1; i <= k; ++i) r = r * static_cast<unsigned __int128>(n - k + i) / i;
  return r;
}

}  // namespace detail

/// Two-sided Fisher exact test p-value: total probability (under the
/// hypergeometric null with fixed margins) of tables no more likely than the
/// observed one. Small tables compare exact integer weights; large tables use
/// log-space weights with a 1e-7 relative tie tolerance.
inline double fisher_exact_two_sided(const Table2x2& t) {
  if (t.min_cell() < 0) throw InvalidArgument("fisher: negative cell");
  const std::int64_t row1 = t.a + t.b;
  const std::int64_t row2 = t.c + t.d;
  const std::int64_t col1 = t.a + t.c;
  const std::int64_t n = row1 + row2;
  if (n == 0) return 1.0;
  const std::int64_t lo = std::max<std::int64_t>(0, col1 - row2);
  const std::int64_t hi = std::min(row1, col1);

  double p = 0.0;
  if (n <= 60) {
    // C(r1, x) * C(r2, col1 - x) <= C(n, col1) <= C(60, 30) < 2^64.
    const auto total = detail::choose_exact(n, col1);
    auto weight = [&](std::int64_t x) { return detail::choose_exact(row1, x) * detail::choose_exact(row2, col1 - x); };
    const auto observed = weight(t.a);
    unsigned __int128 sum = 0;
    for (std::int64_t x = lo; x <= hi; ++x) {
      const auto w = weight(x);
      if (w <= observed) sum += w;
    }
    p = static_cast<double>(sum) / static_cast<double>(total);
  } else {
    const double log_total = detail::log_choose(n, col1);
    auto log_weight = [&](std::int64_t x) {
      return detail::log_choose(row1, x) + detail::log_choose(row2, col1 - x) - log_total;
    };
    const double observed = log_weight(t.a);
    for (std::int64_t x = lo; x <= hi; ++x) {
      const double lw = log_weight(x);
      if (lw <= observed + 1e-7) p += std::exp(lw);
    }
  }
  return std::min(1.0, p);
}

/// Pooled two-proportion z-test, two-sided. Returns (z, p). Equal
/// proportions with zero pooled variance give (0, 1).
inline std::pair<double, double> two_proportion_z(std::int64_t k1, std::int64_t n1, std::int64_t k2,
                                                  std::int64_t n2) {
  if (n1 <= 0 || n2 <= 0) throw InvalidArgument("two_proportion_z: empty group");
  const double p1 = static_cast<double>(k1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(k2) / static_cast<double>(n2);
  const double pooled = static_cast<double>(k1 + k2) / static_cast<double>(n1 + n2);
  const double se = std::sqrt(pooled * (1 - pooled) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
  if (se == 0.0) return {0.0, 1.0};
  const double z = (p1 - p2) / se;
  return {z, std::erfc(std::fabs(z) / std::sqrt(2.0))};
}

}  // namespace editaudit::stats
