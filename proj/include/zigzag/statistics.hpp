#pragma once

// Goodness-of-fit and estimation helpers for the diagnostics harness.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace zigzag::stats {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  std::size_t n = 0;

  double standard_error() const {
    return n ? std::sqrt(variance / static_cast<double>(n)) : 0.0;
  }
};

/// Welford accumulation.
inline MeanVar mean_var(std::span<const double> xs) {
  MeanVar out;
  double m2 = 0.0;
  for (double x : xs) {
    ++out.n;
    const double delta = x - out.mean;
    out.mean += delta / static_cast<double>(out.n);
    m2 += delta * (x - out.mean);
  }
  out.variance = out.n > 1 ? m2 / static_cast<double>(out.n - 1) : 0.0;
  return out;
}

/// Asymptotic Kolmogorov survival function Q(t) = 2 sum (-1)^(k-1) e^(-2 k^2 t^2).
inline double kolmogorov_sf(double t) {
  if (t < 0.18) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// sup_x |F_n(x) - F(x)| for the empirical CDF of `samples`.
inline double ecdf_sup_distance(std::vector<double> samples,
                                const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double D = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = cdf(samples[i]);
    D = std::max({D, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return D;
}

/// One-sample Kolmogorov-Smirnov test with the Stephens small-sample
/// correction (sqrt(n) + 0.12 + 0.11 / sqrt(n)) D.
inline KsResult ks_test(std::vector<double> samples,
                        const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("KS test needs samples");
  KsResult out;
  out.n = samples.size();
  out.statistic = ecdf_sup_distance(std::move(samples), cdf);
  const double rn = std::sqrt(static_cast<double>(out.n));
  out.p_value = kolmogorov_sf((rn + 0.12 + 0.11 / rn) * out.statistic);
  return out;
}

/// Dvoretzky-Kiefer-Wolfowitz half-width: P(sup |F_n - F| > eps) <= alpha.
inline double dkw_epsilon(std::size_t n, double alpha) {
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

/// Pearson goodness-of-fit of counts against cell probabilities. Adjacent
/// cells are pooled left to right until each has expected count >= 5; the
/// last cell must absorb the probability tail (probabilities should sum to 1).
inline ChiSquareResult chi_square_gof(std::span<const double> observed,
                                      std::span<const double> probabilities) {
  if (observed.size() != probabilities.size() || observed.empty()) {
    throw std::invalid_argument("chi-square: mismatched or empty cells");
  }
  double total = 0.0;
  for (double o : observed) total += o;

  std::vector<double> obs, exp;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o_acc += observed[i];
    e_acc += probabilities[i] * total;
    if (e_acc >= 5.0) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (exp.empty()) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
    } else {
      obs.back() += o_acc;
      exp.back() += e_acc;
    }
  }

  ChiSquareResult out;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double diff = obs[i] - exp[i];
    out.statistic += diff * diff / exp[i];
  }
  out.dof = obs.size() > 1 ? obs.size() - 1 : 0;
  out.p_value = out.dof ? boost::math::gamma_q(0.5 * static_cast<double>(out.dof),
                                               0.5 * out.statistic)
                        : 1.0;
  return out;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_standard_error = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
inline LinearFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("OLS needs >= 2 paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("OLS: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.slope_standard_error = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return fit;
}

/// Fit of log y against log x.
inline LinearFit loglog_fit(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw std::invalid_argument("log-log fit needs positive values");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return ols(lx, ly);
}

/// Poisson(mean) probabilities of 0..max_n-1, with the upper tail folded
/// into the last cell.
inline std::vector<double> poisson_cells(double mean, std::size_t max_n) {
  std::vector<double> p(max_n, 0.0);
  double term = std::exp(-mean);
  double acc = 0.0;
  for (std::size_t n = 0; n + 1 < max_n; ++n) {
    p[n] = term;
    acc += term;
    term *= mean / static_cast<double>(n + 1);
  }
  p[max_n - 1] = std::max(0.0, 1.0 - acc);
  return p;
}

}  // namespace zigzag::stats
