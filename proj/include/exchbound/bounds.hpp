/*
   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "exchbound/error.hpp"
#include "exchbound/model.hpp"

namespace exchbound {

enum class Side { Upper, Lower };

constexpr std::string_view to_string(Side s) noexcept { return s == Side::Upper ? "upper" : "lower"; }

struct TailQuery {
  std::size_t M = 1;
  double t = 0.0;
  Side side = Side::Upper;

  TailQuery(std::size_t m, double dev, Side s) : M(m), t(dev), side(s) {
    if (M == 0) throw Error(ErrorCode::InvalidArgument, "M must be at least 1");
    if (!(t > 0.0)) throw Error(ErrorCode::InvalidT, "t must be positive");
  }
};

struct RangeBounds {
  double a;
  double b;
  RangeBounds(double lo, double hi) : a(lo), b(hi) {
    if (!(a < b)) throw Error(ErrorCode::InvalidArgument, "range needs a < b");
  }
};

namespace detail {

inline void require_count(std::size_t M) {
  if (M == 0) throw Error(ErrorCode::InvalidArgument, "M must be at least 1");
}

inline void require_open_unit(double mu, const char* what) {
  if (!(mu > 0.0 && mu < 1.0)) {
    throw Error(ErrorCode::DomainError, std::string(what) + " must lie in (0,1)");
  }
}

// 0 < t < 1 - mu, with mu in (0,1).
inline void require_window(double mu, double t) {
  require_open_unit(mu, "mu_tilde");
  if (!(t > 0.0 && t < 1.0 - mu)) {
    throw Error(ErrorCode::OutOfValidityRange,
                "t = " + std::to_string(t) + " outside (0, 1 - mu_tilde)");
  }
}

// log of the M = 1 optimised Chernoff value:
// (mu + t) ln(mu / (mu + t)) + (1 - mu - t) ln((1 - mu) / (1 - mu - t)).
inline double log_kl_form(double mu, double t) {
  return -(mu + t) * std::log1p(t / mu) - (1.0 - mu - t) * std::log1p(-t / (1.0 - mu));
}

}  // namespace detail

/// exp(-2 M t^2): one-sided tail bound around mu_plus (upper) or mu_minus (lower).
inline double hoeffding_tail_bound(std::size_t M, double t) {
  detail::require_count(M);
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidT, "t must be positive");
  return std::exp(-2.0 * static_cast<double>(M) * t * t);
}

/// [exp(-(mu + t) h) (1 - mu + mu e^h)]^M, the exponential-moment envelope at parameter h.
inline double chernoff_curve(double mu_tilde, double t, std::size_t M, double h) {
  detail::require_count(M);
  detail::require_open_unit(mu_tilde, "mu_tilde");
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidH, "h must be positive");
  const double log_one = -(mu_tilde + t) * h + std::log1p(mu_tilde * std::expm1(h));
  return std::exp(static_cast<double>(M) * log_one);
}

/// Minimiser h0 = ln((1 - mu)(t + mu) / ((1 - mu - t) mu)) of the envelope; positive in the window.
inline double optimal_h(double mu_tilde, double t) {
  detail::require_window(mu_tilde, t);
  return std::log1p(t / mu_tilde) - std::log1p(-t / (1.0 - mu_tilde));
}

/// The envelope at h0, evaluated in log space.
inline double kl_form_bound(double mu_tilde, double t, std::size_t M) {
  detail::require_count(M);
  detail::require_window(mu_tilde, t);
  return std::exp(static_cast<double>(M) * detail::log_kl_form(mu_tilde, t));
}

/// G(t, mu) with kl_form_bound(mu, t, 1) = exp(-t^2 G(t, mu)).
inline double big_g(double t, double mu_tilde) {
  detail::require_window(mu_tilde, t);
  return -detail::log_kl_form(mu_tilde, t) / (t * t);
}

/// Minimum of G(., mu) over the window: ln((1-mu)/mu) / (1-2mu) below 1/2, 1/(2mu(1-mu)) above.
inline double little_g(double mu_tilde) {
  detail::require_open_unit(mu_tilde, "mu_tilde");
  if (mu_tilde < 0.5) {
    // With x = 1 - 2mu, ln((1-mu)/mu) = 2 atanh(x); stable as mu -> 1/2.
    const double x = 1.0 - 2.0 * mu_tilde;
    return 2.0 * std::atanh(x) / x;
  }
  return 1.0 / (2.0 * mu_tilde * (1.0 - mu_tilde));
}

/// H(x) = (1 - 2/x) ln(1 - x) on (0,1).
inline double big_h(double x) {
  if (!(x > 0.0 && x < 1.0)) throw Error(ErrorCode::DomainError, "x must lie in (0,1)");
  return (1.0 - 2.0 / x) * std::log1p(-x);
}

/// Chord of e^{hx} over [a, b]: bounds E e^{hX} for any X in [a, b] with the given mean.
inline double mgf_convexity_bound(double mean_x, const RangeBounds& r, double h) {
  if (!(mean_x >= r.a && mean_x <= r.b)) {
    throw Error(ErrorCode::MeanOutOfRange, "mean outside [a, b]");
  }
  const double width = r.b - r.a;
  return (r.b - mean_x) / width * std::exp(h * r.a) + (mean_x - r.a) / width * std::exp(h * r.b);
}

/// Deviation t with exp(-2 M t^2) = delta. Both one-sided statements together give
/// X-bar in [mu_minus - t, mu_plus + t] with probability at least 1 - 2 delta.
inline double t_for_confidence(std::size_t M, double delta) {
  detail::require_count(M);
  if (!(delta > 0.0 && delta <= 1.0)) throw Error(ErrorCode::InvalidDelta, "delta must lie in (0,1]");
  return std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(M)));
}

struct FlippedBound {
  double bound = 0.0;
  /// mu_plus of the reflected model 1 - X, i.e. 1 - mu_minus.
  double flipped_mu_plus = 0.0;
};

/// Lower tail by reflection: the upper bound applied to 1 - X_m, whose mu_plus is 1 - mu_minus.
inline FlippedBound lower_tail_bound_by_flip(const ModelSummary& s, std::size_t M, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidT, "t must be positive");
  const double flipped_mu_plus = 1.0 - s.mu_minus;
  // The window 0 < t < 1 - (1 - mu_minus) is read off the summary directly.
  if (!(t < s.mu_minus)) {
    throw Error(ErrorCode::OutOfValidityRange,
                "t = " + std::to_string(t) + " not below mu_minus = " + std::to_string(s.mu_minus));
  }
  return {hoeffding_tail_bound(M, t), flipped_mu_plus};
}

struct BoundReport {
  Side side = Side::Upper;
  double mu_tilde = 0.0;  // mu_plus for the upper side, 1 - mu_minus for the lower side
  double hoeffding_form = 1.0;
  double h0 = std::numeric_limits<double>::quiet_NaN();
  double chernoff_at_h0 = std::numeric_limits<double>::quiet_NaN();
  double kl_form = std::numeric_limits<double>::quiet_NaN();
  bool in_validity_range = false;
};

/// Every closed-form bound for one side. Outside the validity window only the
/// Hoeffding form is filled in and no guarantee is implied.
inline BoundReport bound_report(const ModelSummary& s, std::size_t M, double t, Side side) {
  BoundReport r;
  r.side = side;
  r.mu_tilde = side == Side::Upper ? s.mu_plus : 1.0 - s.mu_minus;
  r.hoeffding_form = hoeffding_tail_bound(M, t);
  r.in_validity_range = side == Side::Upper ? s.upper_valid(t) : s.lower_valid(t);
  if (!r.in_validity_range) return r;
  if (r.mu_tilde > 0.0) {
    r.h0 = optimal_h(r.mu_tilde, t);
    r.chernoff_at_h0 = chernoff_curve(r.mu_tilde, t, M, r.h0);
    r.kl_form = kl_form_bound(r.mu_tilde, t, M);
  } else {
    // mu_tilde = 0: the envelope decreases to 0 as h grows.
    r.h0 = std::numeric_limits<double>::infinity();
    r.chernoff_at_h0 = 0.0;
    r.kl_form = 0.0;
  }
  return r;
}

}  // namespace exchbound
