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
#include <optional>
#include <variant>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "exchbound/model.hpp"

namespace exchbound {

// ---------------------------------------------------------------------------
// Random streams.

/// Finaliser of SplitMix64 (Steele, Lea & Flood); a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t replication_index = 0;
  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// xoshiro256** generator. Models std::uniform_random_bit_generator.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t key) noexcept {
    // State words come from a SplitMix64 sequence started at `key`; never all zero.
    std::uint64_t x = key;
    for (auto& w : state_) {
      x += kGoldenGamma;
      w = mix64(x);
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

/// Stream for one replication. A pure function of (master_seed, replication_index):
/// the key is mix64(master_seed) advanced by replication_index Weyl steps, so distinct
/// indices under one master seed never share a key.
inline Stream derive_stream(const SeedSpec& seed) noexcept {
  return Stream(mix64(mix64(seed.master_seed) + seed.replication_index * kGoldenGamma));
}

// ---------------------------------------------------------------------------
// Variate generation. All methods are fixed so that results only depend on libm.

/// Standard normal by the Marsaglia polar method (one of the pair is discarded).
inline double standard_normal(Stream& rng) {
  for (;;) {
    const double u = 2.0 * rng.uniform() - 1.0;
    const double v = 2.0 * rng.uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

/// Gamma(shape, 1) by Marsaglia & Tsang (2000), with the u^(1/shape) boost for shape < 1.
inline double gamma_variate(Stream& rng, double shape) {
  if (shape < 1.0) {
    const double g = gamma_variate(rng, shape + 1.0);
    return g * std::pow(rng.uniform_open(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

/// Beta(alpha, beta) as G1 / (G1 + G2) with independent gamma draws.
inline double beta_variate(Stream& rng, double alpha, double beta) {
  const double g1 = gamma_variate(rng, alpha);
  const double g2 = gamma_variate(rng, beta);
  const double s = g1 + g2;
  return s > 0.0 ? g1 / s : (rng.uniform() < alpha / (alpha + beta) ? 1.0 : 0.0);
}

namespace detail {

template <class Weights>
std::size_t inverse_cdf_index(double u, const Weights& weights) {
  double cum = 0.0;
  const std::size_t n = weights.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    cum += weights[i];
    if (u < cum) return i;
  }
  return n - 1;
}

struct AtomWeights {
  const std::vector<Atom>* atoms;
  double operator[](std::size_t i) const { return (*atoms)[i].weight; }
  std::size_t size() const { return atoms->size(); }
};

template <class Sink>
void draw_iid(const Component& c, std::size_t count, Stream& rng, Sink& sink) {
  if (const auto* b = std::get_if<Bernoulli>(&c)) {
    const double p = b->p.value();
    for (std::size_t i = 0; i < count; ++i) sink(rng.uniform() < p ? 1.0 : 0.0);
  } else if (const auto* pm = std::get_if<PointMass>(&c)) {
    for (std::size_t i = 0; i < count; ++i) sink(pm->c.value());
  } else if (const auto* d = std::get_if<DiscreteOnUnit>(&c)) {
    for (std::size_t i = 0; i < count; ++i) {
      sink(d->points()[inverse_cdf_index(rng.uniform(), d->weights())].value());
    }
  } else {
    const auto& be = std::get<BetaDist>(c);
    for (std::size_t i = 0; i < count; ++i) sink(beta_variate(rng, be.alpha, be.beta));
  }
}

inline double draw_bernoulli_mean(const MixingDensity& density, Stream& rng) {
  if (const auto* u = std::get_if<UniformDensity>(&density)) {
    const double lo = u->lo.value(), hi = u->hi.value();
    return std::min(hi, lo + (hi - lo) * rng.uniform());
  }
  // Inverse CDF of the truncated beta law.
  const auto& b = std::get<TruncatedBetaDensity>(density);
  const double f_lo = boost::math::ibeta(b.alpha, b.beta, b.lo.value());
  const double f_hi = boost::math::ibeta(b.alpha, b.beta, b.hi.value());
  const double target = f_lo + (f_hi - f_lo) * rng.uniform();
  const double p = boost::math::ibeta_inv(b.alpha, b.beta, std::min(target, 1.0));
  return std::clamp(p, b.lo.value(), b.hi.value());
}

}  // namespace detail

/// Two-stage draw: pick a component q from the mixing measure once, then feed `count`
/// conditionally i.i.d. draws from q to `sink`. Returns the atom index for finite mixtures.
template <class Sink>
std::optional<std::size_t> draw_exchangeable(const MixingMeasure& m, std::size_t count,
                                             Stream& rng, Sink&& sink) {
  if (const auto* fm = std::get_if<FiniteMixture>(&m)) {
    const std::size_t i =
        detail::inverse_cdf_index(rng.uniform(), detail::AtomWeights{&fm->atoms()});
    detail::draw_iid(fm->atoms()[i].component, count, rng, sink);
    return i;
  }
  const auto& pm = std::get<BernoulliParamMixture>(m);
  const Bernoulli q(detail::draw_bernoulli_mean(pm.density, rng));
  detail::draw_iid(Component(q), count, rng, sink);
  return std::nullopt;
}

struct SampleBatch {
  std::vector<double> values;
  double sample_mean = 0.0;
  std::optional<std::size_t> drawn_component_index;
};

inline SampleBatch sample_sequence(const MixingMeasure& m, std::size_t count, const SeedSpec& seed) {
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "sequence length must be at least 1");
  Stream rng = derive_stream(seed);
  SampleBatch batch;
  batch.values.reserve(count);
  double sum = 0.0;
  batch.drawn_component_index = draw_exchangeable(m, count, rng, [&](double x) {
    batch.values.push_back(x);
    sum += x;
  });
  batch.sample_mean = sum / static_cast<double>(count);
  return batch;
}

/// Sum X_1 + ... + X_M of one replication, without materialising the sequence.
/// Agrees exactly with summing sample_sequence(m, count, seed).values in order.
inline double sample_sum(const MixingMeasure& m, std::size_t count, const SeedSpec& seed) {
  Stream rng = derive_stream(seed);
  double sum = 0.0;
  draw_exchangeable(m, count, rng, [&](double x) { sum += x; });
  return sum;
}

}  // namespace exchbound
