#pragma once

// Closed-form quantities: terminal-time rules, moments of the squared
// inter-refresh durations, Gaussian chi-square divergences and tail bounds.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>

namespace zigzag::analytics {

struct TimeBudget {
  double T = 0.0;
  double epsilon = 0.0;
  double chi2_0 = 0.0;
  double K = 1.0;
  /// log(1/eps) + log chi2_0 + log K.
  double bracket = 0.0;
  /// log of the warm-start ceiling, d / (8 K kappa log d); unset when d < 2.
  std::optional<double> log_warm_start_ceiling;
  /// chi2_0 <= exp(d / (8 K kappa log d)).
  std::optional<bool> warm_start_ok;
  /// eps >= exp(-d / (8 K kappa log d)).
  std::optional<bool> epsilon_floor_ok;
};

/// T = K (sqrt(L) / m) (log(1/eps) + log chi2_0 + log K). Nothing is
/// clamped: a nonpositive bracket is an error.
inline TimeBudget choose_T(double m, double L, double epsilon, double chi2_0,
                           double K, std::optional<std::size_t> d = {}) {
  if (!(m > 0.0) || !(L >= m)) throw std::invalid_argument("need 0 < m <= L");
  if (!(epsilon > 0.0) || !(chi2_0 > 0.0) || !(K > 0.0)) {
    throw std::invalid_argument("epsilon, chi2_0 and K must be positive");
  }
  TimeBudget b;
  b.epsilon = epsilon;
  b.chi2_0 = chi2_0;
  b.K = K;
  b.bracket = -std::log(epsilon) + std::log(chi2_0) + std::log(K);
  if (!(b.bracket > 0.0)) {
    throw std::domain_error(
        "terminal-time bracket is nonpositive; increase chi2_0 or decrease epsilon");
  }
  b.T = K * (std::sqrt(L) / m) * b.bracket;
  if (d && *d >= 2) {
    const double kappa = L / m;
    const double ceiling =
        static_cast<double>(*d) / (8.0 * K * kappa * std::log(static_cast<double>(*d)));
    b.log_warm_start_ceiling = ceiling;
    b.warm_start_ok = std::log(chi2_0) <= ceiling;
    b.epsilon_floor_ok = std::log(epsilon) >= -ceiling;
  }
  return b;
}

/// Terminal time of the LMC-then-zigzag pipeline:
/// K (sqrt(L)/m) (log(1/eps) + d^(1/5) kappa^(4/5) log^2(d/kappa) + log K).
inline double corollary_terminal_time(std::size_t d, double m, double L,
                                      double epsilon, double K) {
  if (!(epsilon > 0.0) || !(K > 0.0)) {
    throw std::invalid_argument("epsilon and K must be positive");
  }
  const double dd = static_cast<double>(d);
  const double kappa = L / m;
  const double lg = std::log(dd / kappa);
  return K * (std::sqrt(L) / m) *
         (-std::log(epsilon) + std::pow(dd, 0.2) * std::pow(kappa, 0.8) * lg * lg +
          std::log(K));
}

/// E(Xi | N) = 2 T^2 / (N + 2) for N refreshments in (0, T).
inline double conditional_xi_moment(std::size_t N, double T) {
  return 2.0 * T * T / (static_cast<double>(N) + 2.0);
}

/// E(Xi^2 | N) = 4 (N + 6) T^4 / ((N + 2)(N + 3)(N + 4)).
inline double conditional_xi_second_moment(std::size_t N, double T) {
  const double n = static_cast<double>(N);
  const double T2 = T * T;
  return 4.0 * (n + 6.0) * T2 * T2 / ((n + 2.0) * (n + 3.0) * (n + 4.0));
}

struct XiMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;
  /// 2T / sqrt(L) >= mean.
  double mean_bound = 0.0;
  /// 8T / L^(3/2); bounds the variance once sqrt(L) T is moderately large.
  double variance_bound = 0.0;
  /// Xi >= 4T / sqrt(L) is the tail event.
  double tail_threshold = 0.0;
  /// 2 / (sqrt(L) T), the Chebyshev bound on the tail event.
  double tail_probability_bound = 0.0;
};

/// Moments of Xi = sum_k t_k^2 where the t_k are the gaps of a rate
/// sqrt(L) Poisson process on [0, T] (the last gap truncated at T).
///
/// With z = sqrt(L) T:
///   E Xi   = (2 / L)   (z - 1 + e^-z)
///   E Xi^2 = (1 / L^2) (4z^2 - 24 + 8 e^-z (z^2 + 3z + 3))
///   Var Xi = (1 / L^2) (8z - 28 + 8 e^-z (z^2 + 2z + 4) - 4 e^-2z)
/// For z < 1 the closed forms cancel badly, so the Poisson mixture of the
/// conditional moments is summed instead (all terms positive).
inline XiMoments xi_moments(double L, double T) {
  if (!(L > 0.0) || !(T > 0.0)) throw std::invalid_argument("need L > 0, T > 0");
  const double sqL = std::sqrt(L);
  const double z = sqL * T;
  XiMoments out;
  if (z < 1.0) {
    double p = std::exp(-z);
    for (std::size_t n = 0; n < 200; ++n) {
      out.mean += p * conditional_xi_moment(n, T);
      out.second_moment += p * conditional_xi_second_moment(n, T);
      p *= z / static_cast<double>(n + 1);
      if (p < 1e-300) break;
    }
    out.variance = out.second_moment - out.mean * out.mean;
  } else {
    const double e = std::exp(-z);
    out.mean = (2.0 / L) * (z - 1.0 + e);
    out.second_moment = (4.0 * z * z - 24.0 + 8.0 * e * (z * z + 3.0 * z + 3.0)) / (L * L);
    out.variance =
        (8.0 * z - 28.0 + 8.0 * e * (z * z + 2.0 * z + 4.0) - 4.0 * e * e) / (L * L);
  }
  out.mean_bound = 2.0 * T / sqL;
  out.variance_bound = 8.0 * T / (L * sqL);
  out.tail_threshold = 4.0 * T / sqL;
  out.tail_probability_bound = 2.0 / z;
  return out;
}

struct AppendixIntegrals {
  double I1 = 0.0;
  double I2 = 0.0;
};

/// Integrals over the simplex {t_1 + ... + t_N < T} of
/// Q = sum_k t_k^2 + (T - sum_k t_k)^2 (I1) and of Q^2 (I2):
///   I1 = 2 (N+1) / (N+2)! T^(N+2),   I2 = 4 (N+1)(N+6) / (N+4)! T^(N+4).
/// Factorials go through lgamma so large N does not overflow early.
inline AppendixIntegrals appendix_integrals(std::size_t N, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("need T > 0");
  const double n = static_cast<double>(N);
  const double lT = std::log(T);
  AppendixIntegrals out;
  out.I1 = std::exp(std::log(2.0 * (n + 1.0)) - std::lgamma(n + 3.0) + (n + 2.0) * lT);
  out.I2 = std::exp(std::log(4.0 * (n + 1.0) * (n + 6.0)) - std::lgamma(n + 5.0) +
                    (n + 4.0) * lT);
  return out;
}

/// chi^2(N(0, s1 Id_d) || N(0, s0 Id_d)) = (s0 / (sqrt(s1) sqrt(2 s0 - s1)))^d - 1.
/// Returns +inf when s1 >= 2 s0, where the integral diverges.
inline double gaussian_chi2(double sigma1_sq, double sigma0_sq, std::size_t d) {
  if (!(sigma1_sq > 0.0) || !(sigma0_sq > 0.0)) {
    throw std::invalid_argument("variances must be positive");
  }
  if (sigma1_sq >= 2.0 * sigma0_sq) return std::numeric_limits<double>::infinity();
  const double log_factor = std::log(sigma0_sq) - 0.5 * std::log(sigma1_sq) -
                            0.5 * std::log(2.0 * sigma0_sq - sigma1_sq);
  return std::expm1(static_cast<double>(d) * log_factor);
}

/// Coordinate-wise version for diagonal covariances: the 1 + chi^2 factors
/// multiply across independent coordinates.
inline double gaussian_chi2(std::span<const double> sigma1_sq,
                            std::span<const double> sigma0_sq) {
  if (sigma1_sq.size() != sigma0_sq.size()) {
    throw std::invalid_argument("dimension mismatch");
  }
  double log_sum = 0.0;
  for (std::size_t i = 0; i < sigma1_sq.size(); ++i) {
    const double c = gaussian_chi2(sigma1_sq[i], sigma0_sq[i], 1);
    if (std::isinf(c)) return c;
    log_sum += std::log1p(c);
  }
  return std::expm1(log_sum);
}

struct TailBound {
  double threshold = 0.0;
  double probability_bound = 0.0;
};

/// P_mu(|d_i U| >= 2 sqrt(L) + 2 c sqrt(L) log d) <= 3 d^-c.
inline TailBound lemma5_tail_bound(double L, std::size_t d, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
  if (!(L > 0.0) || d == 0) throw std::invalid_argument("need L > 0, d >= 1");
  const double dd = static_cast<double>(d);
  return {2.0 * std::sqrt(L) + 2.0 * c * std::sqrt(L) * std::log(dd),
          3.0 * std::pow(dd, -c)};
}

/// d^(3/2) L^(5/4) m^(-1/2) T^(1/2): proposal-rate scale whose product with
/// T predicts the proposed-event count up to a universal constant.
inline double proposal_rate_scale(double d, double m, double L, double T) {
  if (!(d > 0.0) || !(m > 0.0) || !(L > 0.0) || !(T > 0.0)) {
    throw std::invalid_argument("all arguments must be positive");
  }
  return std::pow(d, 1.5) * std::pow(L, 1.25) / std::sqrt(m) * std::sqrt(T);
}

}  // namespace zigzag::analytics
