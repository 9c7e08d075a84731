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
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "exchbound/error.hpp"
#include "exchbound/quadrature.hpp"

namespace exchbound {

inline constexpr double kWeightSumTolerance = 1e-12;

/// A number in [0,1] stored together with its complement 1 - x.
///
/// Reflection x -> 1 - x swaps the two stored values, so reflecting twice is
/// the identity bit for bit and sums over reflected models reuse the exact
/// same floating-point operands as the original.
class UnitValue {
 public:
  constexpr UnitValue() = default;

  explicit UnitValue(double v) : value_(v), complement_(1.0 - v) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::InvalidModel, "value " + std::to_string(v) + " outside [0,1]");
    }
  }

  double value() const noexcept { return value_; }
  double complement() const noexcept { return complement_; }
  UnitValue reflected() const noexcept { return UnitValue(complement_, value_); }

  friend bool operator==(const UnitValue&, const UnitValue&) = default;

 private:
  constexpr UnitValue(double v, double c) : value_(v), complement_(c) {}

  double value_ = 0.0;
  double complement_ = 1.0;
};

// ---------------------------------------------------------------------------
// Components: single distributions q on [0,1].

struct Bernoulli {
  UnitValue p;
  explicit Bernoulli(double prob) : p(prob) {}
  explicit Bernoulli(UnitValue prob) : p(prob) {}
  friend bool operator==(const Bernoulli&, const Bernoulli&) = default;
};

struct PointMass {
  UnitValue c;
  explicit PointMass(double at) : c(at) {}
  explicit PointMass(UnitValue at) : c(at) {}
  friend bool operator==(const PointMass&, const PointMass&) = default;
};

/// Finitely supported law on [0,1]: strictly increasing points with a probability vector.
class DiscreteOnUnit {
 public:
  DiscreteOnUnit(std::vector<double> points, std::vector<double> weights)
      : weights_(std::move(weights)) {
    points_.reserve(points.size());
    for (double x : points) points_.emplace_back(x);
    validate();
  }

  DiscreteOnUnit(std::vector<UnitValue> points, std::vector<double> weights)
      : points_(std::move(points)), weights_(std::move(weights)) {
    validate();
  }

  const std::vector<UnitValue>& points() const noexcept { return points_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  DiscreteOnUnit reflected() const {
    std::vector<UnitValue> pts(points_.rbegin(), points_.rend());
    for (auto& p : pts) p = p.reflected();
    return DiscreteOnUnit(std::move(pts), std::vector<double>(weights_.rbegin(), weights_.rend()));
  }

  friend bool operator==(const DiscreteOnUnit&, const DiscreteOnUnit&) = default;

 private:
  void validate() const {
    if (points_.empty() || points_.size() != weights_.size()) {
      throw Error(ErrorCode::InvalidModel, "discrete component needs equally many points and weights");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (i > 0 && !(points_[i - 1].value() < points_[i].value())) {
        throw Error(ErrorCode::InvalidModel, "discrete points must be strictly increasing");
      }
      if (!(weights_[i] >= 0.0 && weights_[i] <= 1.0)) {
        throw Error(ErrorCode::InvalidModel, "discrete weight outside [0,1]");
      }
      total += weights_[i];
    }
    if (std::abs(total - 1.0) > kWeightSumTolerance) {
      throw Error(ErrorCode::InvalidModel, "discrete weights sum to " + std::to_string(total));
    }
  }

  std::vector<UnitValue> points_;
  std::vector<double> weights_;
};

struct BetaDist {
  double alpha;
  double beta;
  BetaDist(double a, double b) : alpha(a), beta(b) {
    if (!(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b))) {
      throw Error(ErrorCode::InvalidModel, "beta parameters must be positive and finite");
    }
  }
  friend bool operator==(const BetaDist&, const BetaDist&) = default;
};

using Component = std::variant<Bernoulli, PointMass, DiscreteOnUnit, BetaDist>;

// ---------------------------------------------------------------------------
// Mixing measures.

struct Atom {
  double weight;
  Component component;
  friend bool operator==(const Atom&, const Atom&) = default;
};

class FiniteMixture {
 public:
  explicit FiniteMixture(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw Error(ErrorCode::InvalidModel, "mixture needs at least one atom");
    double total = 0.0;
    for (const auto& a : atoms_) {
      if (!(a.weight > 0.0 && a.weight <= 1.0)) {
        throw Error(ErrorCode::InvalidModel, "atom weights must lie in (0,1]");
      }
      total += a.weight;
    }
    if (std::abs(total - 1.0) > kWeightSumTolerance) {
      throw Error(ErrorCode::InvalidModel, "atom weights sum to " + std::to_string(total));
    }
  }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }

  friend bool operator==(const FiniteMixture&, const FiniteMixture&) = default;

 private:
  std::vector<Atom> atoms_;
};

namespace detail {
inline void check_support(UnitValue lo, UnitValue hi) {
  if (!(lo.value() < hi.value())) {
    throw Error(ErrorCode::InvalidModel, "mixing density support needs lo < hi");
  }
}
}  // namespace detail

struct UniformDensity {
  UnitValue lo, hi;
  UniformDensity(UnitValue l, UnitValue h) : lo(l), hi(h) { detail::check_support(lo, hi); }
  UniformDensity(double l, double h) : UniformDensity(UnitValue(l), UnitValue(h)) {}
  friend bool operator==(const UniformDensity&, const UniformDensity&) = default;
};

/// Beta(alpha, beta) density over the Bernoulli mean, restricted to [lo, hi] and renormalised.
struct TruncatedBetaDensity {
  double alpha, beta;
  UnitValue lo, hi;
  TruncatedBetaDensity(double a, double b, UnitValue l, UnitValue h)
      : alpha(a), beta(b), lo(l), hi(h) {
    (void)BetaDist(a, b);
    detail::check_support(lo, hi);
  }
  TruncatedBetaDensity(double a, double b, double l, double h)
      : TruncatedBetaDensity(a, b, UnitValue(l), UnitValue(h)) {}
  friend bool operator==(const TruncatedBetaDensity&, const TruncatedBetaDensity&) = default;
};

using MixingDensity = std::variant<UniformDensity, TruncatedBetaDensity>;

/// Continuous mixture of Bernoulli(p) laws with p drawn from a density on [lo, hi].
struct BernoulliParamMixture {
  MixingDensity density;
  explicit BernoulliParamMixture(MixingDensity d) : density(std::move(d)) {}

  UnitValue lo() const {
    return std::visit([](const auto& d) { return d.lo; }, density);
  }
  UnitValue hi() const {
    return std::visit([](const auto& d) { return d.hi; }, density);
  }
  friend bool operator==(const BernoulliParamMixture&, const BernoulliParamMixture&) = default;
};

using MixingMeasure = std::variant<FiniteMixture, BernoulliParamMixture>;

// ---------------------------------------------------------------------------
// Summaries.

struct ModelSummary {
  double mu_plus = 0.0;
  double mu_minus = 0.0;
  double mu = 0.0;
  double t_max_upper = 1.0;  // 1 - mu_plus
  double t_max_lower = 0.0;  // mu_minus

  bool upper_valid(double t) const noexcept { return t > 0.0 && t < t_max_upper; }
  bool lower_valid(double t) const noexcept { return t > 0.0 && t < t_max_lower; }
};

inline double component_mean(const Component& c) {
  struct Visitor {
    double operator()(const Bernoulli& b) const { return b.p.value(); }
    double operator()(const PointMass& m) const { return m.c.value(); }
    double operator()(const DiscreteOnUnit& d) const {
      double s = 0.0;
      for (std::size_t i = 0; i < d.points().size(); ++i) s += d.weights()[i] * d.points()[i].value();
      return std::clamp(s, 0.0, 1.0);
    }
    double operator()(const BetaDist& b) const { return b.alpha / (b.alpha + b.beta); }
  };
  return std::visit(Visitor{}, c);
}

/// Unnormalised density of the mixing law over the Bernoulli mean.
inline double mixing_density(const MixingDensity& d, double p) {
  struct Visitor {
    double p;
    double operator()(const UniformDensity& u) const {
      return 1.0 / (u.hi.value() - u.lo.value());
    }
    double operator()(const TruncatedBetaDensity& b) const {
      return boost::math::ibeta_derivative(b.alpha, b.beta, p);
    }
  };
  return std::visit(Visitor{p}, d);
}

/// Mass that the untruncated density puts on [lo, hi] (1 for the uniform density).
inline double mixing_density_mass(const MixingDensity& d) {
  struct Visitor {
    double operator()(const UniformDensity&) const { return 1.0; }
    double operator()(const TruncatedBetaDensity& b) const {
      return boost::math::ibeta(b.alpha, b.beta, b.hi.value()) -
             boost::math::ibeta(b.alpha, b.beta, b.lo.value());
    }
  };
  return std::visit(Visitor{}, d);
}

/// Mean of the mixing density: closed form for the uniform density, quadrature otherwise.
inline double mixing_density_mean(const MixingDensity& d) {
  if (const auto* u = std::get_if<UniformDensity>(&d)) {
    return 0.5 * (u->lo.value() + u->hi.value());
  }
  const auto& b = std::get<TruncatedBetaDensity>(d);
  const double lo = b.lo.value(), hi = b.hi.value();
  auto num = integrate_adaptive([&](double p) { return p * mixing_density(d, p); }, lo, hi);
  auto den = integrate_adaptive([&](double p) { return mixing_density(d, p); }, lo, hi);
  return std::clamp(num.value / den.value, lo, hi);
}

inline ModelSummary summarize(const MixingMeasure& m) {
  ModelSummary s;
  if (const auto* fm = std::get_if<FiniteMixture>(&m)) {
    s.mu_plus = 0.0;
    s.mu_minus = 1.0;
    double avg = 0.0;
    for (const auto& a : fm->atoms()) {
      const double mean = component_mean(a.component);
      s.mu_plus = std::max(s.mu_plus, mean);
      s.mu_minus = std::min(s.mu_minus, mean);
      avg += a.weight * mean;
    }
    s.mu = std::clamp(avg, s.mu_minus, s.mu_plus);
  } else {
    const auto& pm = std::get<BernoulliParamMixture>(m);
    s.mu_plus = pm.hi().value();
    s.mu_minus = pm.lo().value();
    s.mu = mixing_density_mean(pm.density);
  }
  s.t_max_upper = 1.0 - s.mu_plus;
  s.t_max_lower = s.mu_minus;
  return s;
}

// ---------------------------------------------------------------------------
// Reflection x -> 1 - x.

inline Component reflect(const Component& c) {
  struct Visitor {
    Component operator()(const Bernoulli& b) const { return Bernoulli(b.p.reflected()); }
    Component operator()(const PointMass& m) const { return PointMass(m.c.reflected()); }
    Component operator()(const DiscreteOnUnit& d) const { return d.reflected(); }
    Component operator()(const BetaDist& b) const { return BetaDist(b.beta, b.alpha); }
  };
  return std::visit(Visitor{}, c);
}

inline MixingDensity reflect(const MixingDensity& d) {
  struct Visitor {
    MixingDensity operator()(const UniformDensity& u) const {
      return UniformDensity(u.hi.reflected(), u.lo.reflected());
    }
    MixingDensity operator()(const TruncatedBetaDensity& b) const {
      return TruncatedBetaDensity(b.beta, b.alpha, b.hi.reflected(), b.lo.reflected());
    }
  };
  return std::visit(Visitor{}, d);
}

// ---------------------------------------------------------------------------
// Exact finite-dimensional laws.

/// Finite support of a discrete component as (value, mass) pairs in increasing value order.
/// Throws UnsupportedModel for Beta components.
inline std::vector<std::pair<double, double>> component_support(const Component& c) {
  struct Visitor {
    std::vector<std::pair<double, double>> operator()(const Bernoulli& b) const {
      return {{0.0, b.p.complement()}, {1.0, b.p.value()}};
    }
    std::vector<std::pair<double, double>> operator()(const PointMass& m) const {
      return {{m.c.value(), 1.0}};
    }
    std::vector<std::pair<double, double>> operator()(const DiscreteOnUnit& d) const {
      std::vector<std::pair<double, double>> out;
      for (std::size_t i = 0; i < d.points().size(); ++i) {
        out.emplace_back(d.points()[i].value(), d.weights()[i]);
      }
      return out;
    }
    std::vector<std::pair<double, double>> operator()(const BetaDist&) const {
      throw Error(ErrorCode::UnsupportedModel, "beta component has no finite support");
    }
  };
  return std::visit(Visitor{}, c);
}

inline constexpr std::size_t kMaxJointLawDimension = 6;

struct JointLaw {
  std::size_t k = 0;
  std::vector<double> values;                 // common support of X_1, sorted
  std::vector<std::vector<double>> support;   // k-tuples, lexicographic in `values`
  std::vector<double> probabilities;

  /// Probability of a tuple of support indices (each in [0, values.size())).
  double probability_at(const std::vector<std::size_t>& index) const {
    std::size_t flat = 0;
    for (std::size_t j : index) flat = flat * values.size() + j;
    return probabilities.at(flat);
  }
};

/// Exact joint pmf of (X_1, ..., X_k): p(x) = sum_i w_i prod_j q_i(x_j).
inline JointLaw joint_law(const MixingMeasure& m, std::size_t k) {
  const auto* fm = std::get_if<FiniteMixture>(&m);
  if (fm == nullptr) {
    throw Error(ErrorCode::UnsupportedModel, "joint law needs a finite mixture of discrete components");
  }
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (k > kMaxJointLawDimension) {
    throw Error(ErrorCode::KTooLarge, "k = " + std::to_string(k) + " exceeds 6");
  }

  // Per-atom mass on the merged support.
  std::map<double, std::size_t> index_of;
  std::vector<std::vector<std::pair<double, double>>> supports;
  for (const auto& a : fm->atoms()) {
    supports.push_back(component_support(a.component));
    for (const auto& [x, w] : supports.back()) index_of.emplace(x, 0);
  }
  JointLaw law;
  law.k = k;
  for (auto& [x, idx] : index_of) {
    idx = law.values.size();
    law.values.push_back(x);
  }
  const std::size_t n = law.values.size();
  std::vector<std::vector<double>> mass(supports.size(), std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < supports.size(); ++i) {
    for (const auto& [x, w] : supports[i]) mass[i][index_of[x]] += w;
  }

  std::size_t cells = 1;
  for (std::size_t j = 0; j < k; ++j) cells *= n;
  law.support.reserve(cells);
  law.probabilities.reserve(cells);

  std::vector<std::size_t> idx(k, 0);
  std::vector<double> factors(k);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    std::vector<double> tuple(k);
    for (std::size_t j = 0; j < k; ++j) tuple[j] = law.values[idx[j]];
    double p = 0.0;
    for (std::size_t i = 0; i < supports.size(); ++i) {
      for (std::size_t j = 0; j < k; ++j) factors[j] = mass[i][idx[j]];
      // Multiplying in sorted order makes the product independent of coordinate order.
      std::sort(factors.begin(), factors.end());
      double prod = 1.0;
      for (double f : factors) prod *= f;
      p += fm->atoms()[i].weight * prod;
    }
    law.support.push_back(std::move(tuple));
    law.probabilities.push_back(p);
    for (std::size_t j = k; j-- > 0;) {
      if (++idx[j] < n) break;
      idx[j] = 0;
    }
  }
  return law;
}

}  // namespace exchbound
