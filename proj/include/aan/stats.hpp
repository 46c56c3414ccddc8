#pragma once
// Small statistics kit: mean/std, Pearson correlation, Welch's t-test,
// fixed-range histograms. All accumulation in double regardless of input
// scalar type; results feed both the reports and the test oracles.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace aan {

template <typename V>
inline double mean_of(const V& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Sample standard deviation (n-1 denominator); 0 for n < 2.
template <typename V>
inline double stddev_of(const V& xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

template <typename V>
inline MeanStd mean_std(const V& xs) {
  return {mean_of(xs), stddev_of(xs)};
}

// Two-pass Pearson r. Returns NaN when either side has zero variance;
// callers decide how to report that (the correlation tables exclude such
// rows with a warning rather than inventing a number).
template <typename V>
inline double pearson(const V& xs, const V& ys) {
  if (xs.size() != ys.size()) throw std::runtime_error("pearson: length mismatch");
  const std::size_t n = xs.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double mx = mean_of(xs), my = mean_of(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(xs[i]) - mx;
    const double dy = static_cast<double>(ys[i]) - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

namespace detail {

// Continued-fraction core of the regularized incomplete beta (Lentz).
inline double betacf(double a, double b, double x) {
  const int kMaxIter = 300;
  const double kEps = 3e-14, kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

inline double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// Two-sided p for Student's t with df degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
  if (df <= 0.0) return 1.0;
  const double x = df / (df + t * t);
  return detail::reg_inc_beta(df / 2.0, 0.5, x);
}

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

// Welch's unequal-variance two-sample t-test.
template <typename V>
inline TTestResult welch_t_test(const V& a, const V& b) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  if (na < 2 || nb < 2) return {0.0, 0.0, 1.0};
  const double ma = mean_of(a), mb = mean_of(b);
  const double sa = stddev_of(a), sb = stddev_of(b);
  const double va = sa * sa / na, vb = sb * sb / nb;
  if (va + vb <= 0.0) return {0.0, na + nb - 2.0, ma == mb ? 1.0 : 0.0};
  TTestResult r;
  r.t = (ma - mb) / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) /
         (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

// Fixed-range histogram; values outside [lo, hi] clip into the edge bins
// (activations are already clamped to [0,1] upstream, this just makes the
// binning total-preserving by construction).
struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::uint64_t> bins;

  Histogram(double lo_, double hi_, std::size_t nbins) : lo(lo_), hi(hi_), bins(nbins, 0) {}

  void add(double x) {
    const std::size_t n = bins.size();
    double f = (x - lo) / (hi - lo);
    long long k = static_cast<long long>(std::floor(f * static_cast<double>(n)));
    if (k < 0) k = 0;
    if (k >= static_cast<long long>(n)) k = static_cast<long long>(n) - 1;
    bins[static_cast<std::size_t>(k)]++;
  }

  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto b : bins) s += b;
    return s;
  }
};

}  // namespace aan
