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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "exchbound/bounds.hpp"
#include "exchbound/events.hpp"
#include "exchbound/model.hpp"
#include "exchbound/quadrature.hpp"

namespace exchbound {

enum class TailMethod { BinomialClosedForm, DiscreteConvolution, QuadratureOverBinomial };

constexpr std::string_view to_string(TailMethod m) noexcept {
  switch (m) {
    case TailMethod::BinomialClosedForm: return "binomial_closed_form";
    case TailMethod::DiscreteConvolution: return "discrete_convolution";
    case TailMethod::QuadratureOverBinomial: return "quadrature_over_binomial";
  }
  return "unknown";
}

struct ExactTail {
  double probability = 0.0;
  TailMethod method = TailMethod::BinomialClosedForm;
  std::optional<double> quadrature_error;  // set iff method == QuadratureOverBinomial
};

inline constexpr std::size_t kMaxConvolutionM = 64;
inline constexpr std::int64_t kMaxLatticeDenominator = 1000;
inline constexpr double kQuadratureBudget = 1e-10;

/// Reflect every component through x -> 1 - x. An involution, exactly.
inline MixingMeasure flip_model(const MixingMeasure& m) {
  if (const auto* fm = std::get_if<FiniteMixture>(&m)) {
    std::vector<Atom> atoms;
    atoms.reserve(fm->atoms().size());
    for (const auto& a : fm->atoms()) atoms.push_back({a.weight, reflect(a.component)});
    return FiniteMixture(std::move(atoms));
  }
  return BernoulliParamMixture(reflect(std::get<BernoulliParamMixture>(m).density));
}

namespace detail {

// Cumulative log-factorials; lchoose is evaluated at min(k, M - k) so that
// lchoose(M, k) and lchoose(M, M - k) are the same double.
class LogChoose {
 public:
  explicit LogChoose(std::size_t M) : M_(M), log_fact_(M + 1, 0.0) {
    for (std::size_t i = 2; i <= M; ++i) {
      log_fact_[i] = log_fact_[i - 1] + std::log(static_cast<double>(i));
    }
  }
  double operator()(std::size_t k) const {
    const std::size_t j = std::min(k, M_ - k);
    return log_fact_[M_] - log_fact_[j] - log_fact_[M_ - j];
  }
  std::size_t M() const noexcept { return M_; }

 private:
  std::size_t M_;
  std::vector<double> log_fact_;
};

inline double xlogy(std::size_t n, double y) {
  return n == 0 ? 0.0 : static_cast<double>(n) * std::log(y);
}

// Smallest count k with k >= x - tol, and largest count k with k <= x + tol, clamped to [0, M].
inline std::int64_t first_count_at_least(double x, std::int64_t max_count) {
  const double c = std::ceil(x);
  if (c <= 0.0) return 0;
  if (c > static_cast<double>(max_count)) return max_count + 1;
  return static_cast<std::int64_t>(c);
}
inline std::int64_t last_count_at_most(double x, std::int64_t max_count) {
  const double f = std::floor(x);
  if (f < 0.0) return -1;
  if (f > static_cast<double>(max_count)) return max_count;
  return static_cast<std::int64_t>(f);
}

/// P(Binomial(M, p) meets the event), summed from the extreme outcome inward.
inline double binomial_tail(const LogChoose& lc, UnitValue p, double level, Side side) {
  const std::size_t M = lc.M();
  const auto Mi = static_cast<std::int64_t>(M);
  const double target = static_cast<double>(M) * level;
  const double tol = kLatticeTolerance * static_cast<double>(M);
  auto term = [&](std::size_t k) {
    return std::exp(lc(k) + (xlogy(k, p.value()) + xlogy(M - k, p.complement())));
  };
  double total = 0.0;
  if (side == Side::Upper) {
    const std::int64_t first = first_count_at_least(target - tol, Mi);
    for (std::int64_t k = Mi; k >= first; --k) total += term(static_cast<std::size_t>(k));
  } else {
    const std::int64_t last = last_count_at_most(target + tol, Mi);
    for (std::int64_t k = 0; k <= last; ++k) total += term(static_cast<std::size_t>(k));
  }
  return std::min(total, 1.0);
}

// Smallest D <= kMaxLatticeDenominator with every point * D an integer (to 1e-9).
inline std::optional<std::int64_t> lattice_denominator(const DiscreteOnUnit& d) {
  for (std::int64_t D = 1; D <= kMaxLatticeDenominator; ++D) {
    bool ok = true;
    for (const auto& x : d.points()) {
      const double scaled = x.value() * static_cast<double>(D);
      if (std::abs(scaled - std::round(scaled)) > 1e-9) {
        ok = false;
        break;
      }
    }
    if (ok) return D;
  }
  return std::nullopt;
}

// Exact-order-independent sum: products are added in increasing order.
inline double sorted_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double v : terms) s += v;
  return s;
}

/// Law of the sum of M i.i.d. draws on the lattice {0, 1/D, ..., 1}, by repeated convolution.
inline double lattice_convolution_tail(const DiscreteOnUnit& d, std::int64_t D, std::size_t M,
                                       double level, Side side) {
  const std::size_t n = d.points().size();
  std::vector<std::int64_t> step(n);
  for (std::size_t i = 0; i < n; ++i) {
    step[i] = std::llround(d.points()[i].value() * static_cast<double>(D));
  }
  // dist has length m * D + 1 after m draws, indexed by the scaled sum.
  std::vector<double> dist{1.0};
  std::vector<double> terms;
  terms.reserve(n);
  for (std::size_t m = 0; m < M; ++m) {
    const auto width = static_cast<std::int64_t>(dist.size()) + D;
    std::vector<double> next(static_cast<std::size_t>(width), 0.0);
    for (std::int64_t s = 0; s < width; ++s) {
      terms.clear();
      for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t from = s - step[i];
        if (from >= 0 && from < static_cast<std::int64_t>(dist.size())) {
          terms.push_back(dist[static_cast<std::size_t>(from)] * d.weights()[i]);
        }
      }
      next[static_cast<std::size_t>(s)] = sorted_sum(terms);
    }
    dist = std::move(next);
  }
  const auto top = static_cast<std::int64_t>(dist.size()) - 1;
  const double target = static_cast<double>(M) * level;
  const double tol = kLatticeTolerance * static_cast<double>(M);
  double total = 0.0;
  if (side == Side::Upper) {
    const std::int64_t first =
        first_count_at_least((target - tol) * static_cast<double>(D), top);
    for (std::int64_t s = top; s >= first; --s) total += dist[static_cast<std::size_t>(s)];
  } else {
    const std::int64_t last = last_count_at_most((target + tol) * static_cast<double>(D), top);
    for (std::int64_t s = 0; s <= last; ++s) total += dist[static_cast<std::size_t>(s)];
  }
  return std::min(total, 1.0);
}

// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline constexpr std::size_t kMaxFloatingStates = 2'000'000;

/// Fallback for points without a small common denominator: sums are keyed on a 2^-40 grid.
inline double floating_convolution_tail(const DiscreteOnUnit& d, std::size_t M, double level,
                                        Side side) {
  constexpr double kScale = 0x1.0p40;
  std::map<std::int64_t, std::pair<double, CompensatedSum>> dist;
  dist[0] = {0.0, CompensatedSum{}};
  dist[0].second.add(1.0);
  for (std::size_t m = 0; m < M; ++m) {
    std::map<std::int64_t, std::pair<double, CompensatedSum>> next;
    for (const auto& [key, entry] : dist) {
      const double mass = entry.second.value();
      for (std::size_t i = 0; i < d.points().size(); ++i) {
        const double s = entry.first + d.points()[i].value();
        auto& slot = next[std::llround(s * kScale)];
        slot.first = s;
        slot.second.add(mass * d.weights()[i]);
      }
    }
    if (next.size() > kMaxFloatingStates) {
      throw Error(ErrorCode::MTooLarge, "too many distinct attainable sums");
    }
    dist = std::move(next);
  }
  CompensatedSum total;
  for (const auto& [key, entry] : dist) {
    if (sum_meets(entry.first, M, level, side)) total.add(entry.second.value());
  }
  return std::clamp(total.value(), 0.0, 1.0);
}

inline double point_mass_tail(UnitValue c, std::size_t M, double level, Side side) {
  return sum_meets(static_cast<double>(M) * c.value(), M, level, side) ? 1.0 : 0.0;
}

}  // namespace detail

/// Exact P(X-bar >= level) (upper) or P(X-bar <= level) (lower) for supported models.
///
/// Conditionally on the drawn component the sum of Bernoulli draws is binomial; discrete
/// components are convolved on their common lattice; Bernoulli-parameter mixtures
/// integrate the binomial tail against the mixing density.
inline ExactTail exact_sample_mean_tail(const MixingMeasure& m, std::size_t M, double level,
                                        Side side) {
  if (M == 0) throw Error(ErrorCode::InvalidArgument, "M must be at least 1");
  const detail::LogChoose lc(M);

  if (const auto* pm = std::get_if<BernoulliParamMixture>(&m)) {
    const double lo = pm->lo().value(), hi = pm->hi().value();
    const double mass = mixing_density_mass(pm->density);
    auto integrand = [&](double p) {
      return mixing_density(pm->density, p) * detail::binomial_tail(lc, UnitValue(p), level, side);
    };
    const auto q = integrate_adaptive(integrand, lo, hi, kQuadratureBudget * mass);
    ExactTail out;
    out.probability = std::clamp(q.value / mass, 0.0, 1.0);
    out.method = TailMethod::QuadratureOverBinomial;
    out.quadrature_error = q.error_estimate / mass;
    return out;
  }

  const auto& fm = std::get<FiniteMixture>(m);
  ExactTail out;
  out.method = TailMethod::BinomialClosedForm;
  for (const auto& a : fm.atoms()) {
    if (std::holds_alternative<BetaDist>(a.component)) {
      throw Error(ErrorCode::UnsupportedModel, "beta components have no closed-form sum law");
    }
    if (std::holds_alternative<DiscreteOnUnit>(a.component)) {
      out.method = TailMethod::DiscreteConvolution;
      if (M > kMaxConvolutionM) {
        throw Error(ErrorCode::MTooLarge,
                    "M = " + std::to_string(M) + " exceeds the convolution limit of 64");
      }
    }
  }

  double total = 0.0;
  for (const auto& a : fm.atoms()) {
    double tail = 0.0;
    if (const auto* b = std::get_if<Bernoulli>(&a.component)) {
      tail = detail::binomial_tail(lc, b->p, level, side);
    } else if (const auto* c = std::get_if<PointMass>(&a.component)) {
      tail = detail::point_mass_tail(c->c, M, level, side);
    } else {
      const auto& d = std::get<DiscreteOnUnit>(a.component);
      if (const auto D = detail::lattice_denominator(d)) {
        tail = detail::lattice_convolution_tail(d, *D, M, level, side);
      } else {
        tail = detail::floating_convolution_tail(d, M, level, side);
      }
    }
    total += a.weight * tail;
  }
  out.probability = std::clamp(total, 0.0, 1.0);
  return out;
}

/// P(X-bar - mu_plus >= t) or P(mu_minus - X-bar >= t).
inline ExactTail exact_tail(const MixingMeasure& m, const TailQuery& q) {
  return exact_sample_mean_tail(m, q.M, event_level(summarize(m), q), q.side);
}

/// Whether exact_tail can answer `q` for model `m` without throwing.
inline bool exact_tail_supported(const MixingMeasure& m, std::size_t M) {
  if (std::holds_alternative<BernoulliParamMixture>(m)) return true;
  for (const auto& a : std::get<FiniteMixture>(m).atoms()) {
    if (std::holds_alternative<BetaDist>(a.component)) return false;
    if (std::holds_alternative<DiscreteOnUnit>(a.component) && M > kMaxConvolutionM) return false;
  }
  return true;
}

}  // namespace exchbound
