#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "spinbench/rng.hpp"

namespace spinbench {

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean of empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

inline double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) throw std::invalid_argument("need at least two values");
  const double m = mean(v);
  double acc = 0;
  for (const double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / double(v.size() - 1));
}

// standard error of a success fraction estimated from n Bernoulli trials
inline double binomial_error(double p_hat, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("binomial error needs trials");
  return std::sqrt(p_hat * (1.0 - p_hat) / double(n));
}

struct BootstrapResult {
  double mean = 0;
  double err = 0;
};

// nonparametric bootstrap over the sample; err is the std of resampled means
inline BootstrapResult bootstrap_mean(const std::vector<double>& values,
                                      int n_resamples, std::uint64_t seed) {
  if (values.empty()) throw std::invalid_argument("bootstrap of empty sample");
  if (n_resamples < 1) throw std::invalid_argument("need resamples");
  BootstrapResult r;
  r.mean = mean(values);
  if (values.size() == 1) return r;
  Rng rng(derive_seed(seed, 0xb005ull));
  double acc = 0, acc2 = 0;
  for (int k = 0; k < n_resamples; ++k) {
    double s = 0;
    for (std::size_t i = 0; i < values.size(); ++i)
      s += values[rng.below(values.size())];
    const double m = s / double(values.size());
    acc += m;
    acc2 += m * m;
  }
  const double bm = acc / n_resamples;
  r.err = std::sqrt(std::max(0.0, acc2 / n_resamples - bm * bm));
  return r;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// ranks with ties averaged
inline std::vector<double> ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * double(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

struct SpearmanResult {
  double rho = 0;
  double z = 0;       // rho * sqrt(n - 1), normal approximation
  double p_neg = 1;   // one-sided P(correlation < 0)
  std::size_t n = 0;
};

inline SpearmanResult spearman(const std::vector<double>& x,
                               const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("size mismatch");
  if (x.size() < 3) throw std::invalid_argument("need at least three pairs");
  const auto rx = ranks(x), ry = ranks(y);
  const double mx = mean(rx), my = mean(ry);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  SpearmanResult r;
  r.n = x.size();
  if (sxx == 0 || syy == 0)
    throw std::invalid_argument("constant input has no rank correlation");
  r.rho = sxy / std::sqrt(sxx * syy);
  r.z = r.rho * std::sqrt(double(r.n - 1));
  r.p_neg = normal_cdf(r.z);
  return r;
}

} // namespace spinbench
