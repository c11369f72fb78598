#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "zigzag/random.hpp"

namespace zigzag {

using Point = std::vector<double>;

/// A strongly convex potential with declared constants m and L, i.e.
/// m Id <= Hessian <= L Id everywhere, minimised at the origin with U(0) = 0.
///
/// `value` and `partial` are const and carry no counters; instrumentation is
/// added per trajectory by CountingOracle, so a potential can be shared
/// read-only across threads.
template <class P>
concept Potential = requires(const P& p, std::span<const double> x,
                             std::size_t i) {
  { p.dim() } -> std::convertible_to<std::size_t>;
  { p.m() } -> std::convertible_to<double>;
  { p.L() } -> std::convertible_to<double>;
  { p.value(x) } -> std::convertible_to<double>;
  { p.partial(x, i) } -> std::convertible_to<double>;
};

/// Potentials whose target is a centred Gaussian with diagonal precision,
/// so that exact draws from the target are available.
template <class P>
concept GaussianPotential = Potential<P> && requires(const P& p, std::size_t i) {
  { p.precision(i) } -> std::convertible_to<double>;
};

namespace detail {

inline void check_dim(std::span<const double> x, std::size_t dim) {
  if (x.size() != dim) {
    throw std::invalid_argument("dimension mismatch: point has " +
                                std::to_string(x.size()) +
                                " coordinates, potential has " +
                                std::to_string(dim));
  }
}

inline void check_index(std::size_t i, std::size_t dim) {
  if (i >= dim) {
    throw std::out_of_range("coordinate index " + std::to_string(i) +
                            " out of range for dimension " +
                            std::to_string(dim));
  }
}

inline void check_constants(double m, double L) {
  if (!(m > 0.0) || !(L >= m) || !std::isfinite(L)) {
    throw std::invalid_argument("potential constants must satisfy 0 < m <= L");
  }
}

}  // namespace detail

/// U(x) = m |x|^2 / 2, so m = L.
class IsotropicGaussianPotential {
 public:
  IsotropicGaussianPotential(std::size_t dim, double precision)
      : dim_(dim), precision_(precision), m_(precision), L_(precision) {
    if (dim == 0) throw std::invalid_argument("dimension must be positive");
    detail::check_constants(m_, L_);
  }

  std::size_t dim() const { return dim_; }
  double m() const { return m_; }
  double L() const { return L_; }
  double precision(std::size_t) const { return precision_; }

  double value(std::span<const double> x) const {
    detail::check_dim(x, dim_);
    double s = 0.0;
    for (double xi : x) s += xi * xi;
    return 0.5 * precision_ * s;
  }

  double partial(std::span<const double> x, std::size_t i) const {
    detail::check_index(i, dim_);
    return precision_ * x[i];
  }

  /// Copy with overridden declared constants. The potential itself is
  /// unchanged, only what the sampler believes about it.
  IsotropicGaussianPotential with_declared(double m, double L) const {
    detail::check_constants(m, L);
    auto copy = *this;
    copy.m_ = m;
    copy.L_ = L;
    return copy;
  }

 private:
  std::size_t dim_;
  double precision_;
  double m_;
  double L_;
};

/// U(x) = sum_i a_i x_i^2 / 2 with m = min a_i and L = max a_i.
class DiagonalGaussianPotential {
 public:
  explicit DiagonalGaussianPotential(std::vector<double> precisions)
      : precisions_(std::move(precisions)) {
    if (precisions_.empty()) {
      throw std::invalid_argument("dimension must be positive");
    }
    for (double a : precisions_) {
      if (!(a > 0.0) || !std::isfinite(a)) {
        throw std::invalid_argument("precisions must be positive and finite");
      }
    }
    auto [lo, hi] = std::minmax_element(precisions_.begin(), precisions_.end());
    m_ = *lo;
    L_ = *hi;
  }

  std::size_t dim() const { return precisions_.size(); }
  double m() const { return m_; }
  double L() const { return L_; }
  double precision(std::size_t i) const { return precisions_[i]; }
  const std::vector<double>& precisions() const { return precisions_; }

  double value(std::span<const double> x) const {
    detail::check_dim(x, dim());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += precisions_[i] * x[i] * x[i];
    return 0.5 * s;
  }

  double partial(std::span<const double> x, std::size_t i) const {
    detail::check_index(i, dim());
    return precisions_[i] * x[i];
  }

  DiagonalGaussianPotential with_declared(double m, double L) const {
    detail::check_constants(m, L);
    auto copy = *this;
    copy.m_ = m;
    copy.L_ = L;
    return copy;
  }

 private:
  std::vector<double> precisions_;
  double m_ = 0.0;
  double L_ = 0.0;
};

/// Even perturbation s(y) = log cosh(y): s(0) = s'(0) = 0, s' = tanh and
/// s'' = sech^2 in (0, 1], with sup s'' = 1 attained at 0 and inf s'' = 0.
struct LogCosh {
  static double value(double y) {
    const double a = std::abs(y);
    return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
  }
  static double derivative(double y) { return std::tanh(y); }
  static double second_derivative(double y) {
    const double c = std::cosh(y);
    return 1.0 / (c * c);
  }
};

/// U(x) = sum_i [ a x_i^2 / 2 + b log cosh(x_i) ], a non-Gaussian product
/// potential with certified constants m = a and L = a + b.
class SoftenedQuadraticPotential {
 public:
  SoftenedQuadraticPotential(std::size_t dim, double a, double b)
      : dim_(dim), a_(a), b_(b), m_(a), L_(a + b) {
    if (dim == 0) throw std::invalid_argument("dimension must be positive");
    if (!(b >= 0.0)) throw std::invalid_argument("perturbation b must be >= 0");
    detail::check_constants(m_, L_);
  }

  std::size_t dim() const { return dim_; }
  double m() const { return m_; }
  double L() const { return L_; }
  double a() const { return a_; }
  double b() const { return b_; }

  double value(std::span<const double> x) const {
    detail::check_dim(x, dim_);
    double s = 0.0;
    for (double xi : x) s += 0.5 * a_ * xi * xi + b_ * LogCosh::value(xi);
    return s;
  }

  double partial(std::span<const double> x, std::size_t i) const {
    detail::check_index(i, dim_);
    return a_ * x[i] + b_ * LogCosh::derivative(x[i]);
  }

  SoftenedQuadraticPotential with_declared(double m, double L) const {
    detail::check_constants(m, L);
    auto copy = *this;
    copy.m_ = m;
    copy.L_ = L;
    return copy;
  }

 private:
  std::size_t dim_;
  double a_;
  double b_;
  double m_;
  double L_;
};

static_assert(GaussianPotential<IsotropicGaussianPotential>);
static_assert(GaussianPotential<DiagonalGaussianPotential>);
static_assert(Potential<SoftenedQuadraticPotential>);

/// Runtime-selected potential, as built from an experiment manifest.
using AnyPotential = std::variant<IsotropicGaussianPotential,
                                  DiagonalGaussianPotential,
                                  SoftenedQuadraticPotential>;

inline std::string potential_kind(const AnyPotential& p) {
  switch (p.index()) {
    case 0: return "isotropic";
    case 1: return "diagonal";
    default: return "softened";
  }
}

template <Potential P>
double potential_value(const P& p, std::span<const double> x) {
  return p.value(x);
}

/// Per-trajectory instrumentation: counts partial-derivative evaluations
/// (the complexity unit) on top of a shared read-only potential.
template <Potential P>
class CountingOracle {
 public:
  explicit CountingOracle(const P& p) : p_(&p) {}

  std::size_t dim() const { return p_->dim(); }
  double m() const { return p_->m(); }
  double L() const { return p_->L(); }
  const P& potential() const { return *p_; }

  double value(std::span<const double> x) const { return p_->value(x); }

  double partial(std::span<const double> x, std::size_t i) {
    const double g = p_->partial(x, i);
    ++eval_count_;
    return g;
  }

  /// Full gradient; costs dim() partial evaluations.
  void gradient(std::span<const double> x, std::span<double> out) {
    detail::check_dim(x, dim());
    detail::check_dim(out, dim());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = p_->partial(x, i);
    eval_count_ += out.size();
  }

  std::uint64_t eval_count() const { return eval_count_; }

 private:
  const P* p_;
  std::uint64_t eval_count_ = 0;
};

/// Exact draw from the target exp(-U) of a Gaussian potential.
template <GaussianPotential P>
void sample_target(const P& p, Rng& rng, std::span<double> out) {
  detail::check_dim(out, p.dim());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = rng.normal() / std::sqrt(p.precision(i));
  }
}

struct CurvatureReport {
  double min_curvature = 0.0;
  double max_curvature = 0.0;
  std::size_t n_probes = 0;
  bool pass = false;
  /// Whether the declared constants satisfy m <= 1 <= L. Only recorded;
  /// nothing downstream requires it.
  bool unit_bracket = false;
};

/// Probe-based check of m Id <= Hessian <= L Id.
///
/// Each probe draws a point x ~ N(0, Id / m) and evaluates the directional
/// second difference (U(x+hu) - 2U(x) + U(x-hu)) / h^2 along one random unit
/// direction and along the axis e_(k mod d). Passes iff every curvature lies
/// in [m - tol*L, L + tol*L].
template <Potential P>
CurvatureReport verify_assumption1(const P& p, std::size_t probes,
                                   std::uint64_t seed, double tol = 1e-4,
                                   double h = 1e-3) {
  if (probes == 0) throw std::invalid_argument("probes must be >= 1");
  const std::size_t d = p.dim();
  Rng rng(seed);
  Point x(d), u(d), plus(d), minus(d);

  CurvatureReport report;
  report.min_curvature = std::numeric_limits<double>::infinity();
  report.max_curvature = -std::numeric_limits<double>::infinity();

  auto probe = [&](const Point& dir) {
    for (std::size_t i = 0; i < d; ++i) {
      plus[i] = x[i] + h * dir[i];
      minus[i] = x[i] - h * dir[i];
    }
    const double c = (p.value(plus) - 2.0 * p.value(x) + p.value(minus)) / (h * h);
    report.min_curvature = std::min(report.min_curvature, c);
    report.max_curvature = std::max(report.max_curvature, c);
    ++report.n_probes;
  };

  const double scale = 1.0 / std::sqrt(p.m());
  for (std::size_t k = 0; k < probes; ++k) {
    for (auto& xi : x) xi = scale * rng.normal();
    double norm = 0.0;
    for (auto& ui : u) {
      ui = rng.normal();
      norm += ui * ui;
    }
    norm = std::sqrt(norm);
    for (auto& ui : u) ui /= norm;
    probe(u);

    std::fill(u.begin(), u.end(), 0.0);
    u[k % d] = 1.0;
    probe(u);
  }

  const double slack = tol * p.L();
  report.pass = report.min_curvature >= p.m() - slack &&
                report.max_curvature <= p.L() + slack;
  report.unit_bracket = p.m() <= 1.0 && 1.0 <= p.L();
  return report;
}

}  // namespace zigzag
