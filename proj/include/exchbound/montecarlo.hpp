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
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "exchbound/bounds.hpp"
#include "exchbound/events.hpp"
#include "exchbound/model.hpp"
#include "exchbound/oracle.hpp"
#include "exchbound/sampler.hpp"

namespace exchbound {

inline constexpr double kDefaultLevel = 0.999;
inline constexpr std::size_t kDefaultSweepReplications = 100'000;
inline constexpr std::size_t kDefaultAcceptanceReplications = 1'000'000;

struct ProportionInterval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for `successes` out of `trials` at two-sided confidence `level`.
inline ProportionInterval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                          double level = kDefaultLevel) {
  if (trials == 0) throw Error(ErrorCode::InvalidArgument, "no trials");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidArgument, "level must lie in (0,1)");
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * level);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2n = z * z / n;
  const double center = (p + 0.5 * z2n) / (1.0 + z2n);
  const double half = z / (1.0 + z2n) * std::sqrt(p * (1.0 - p) / n + 0.25 * z2n / n);
  return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

struct TailEstimate {
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::uint64_t replications = 0;
  std::uint64_t exceed_count = 0;
  std::uint64_t master_seed = 0;
  double level = kDefaultLevel;

  friend bool operator==(const TailEstimate&, const TailEstimate&) = default;
};

struct SimulationOptions {
  double level = kDefaultLevel;
  unsigned threads = 0;  // 0: hardware concurrency
};

namespace detail {

inline unsigned resolve_threads(unsigned requested, std::size_t work) {
  unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(work, 1)));
}

/// Runs body(i) for i in [0, count), splitting the range into contiguous chunks.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  const unsigned n = resolve_threads(threads, count);
  if (n <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (unsigned w = 0; w < n; ++w) {
    const std::size_t begin = count * w / n, end = count * (w + 1) / n;
    pool.emplace_back([&body, begin, end] {
      for (std::size_t i = begin; i < end; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

inline TailEstimate make_estimate(std::uint64_t count, std::uint64_t reps, std::uint64_t seed,
                                  double level) {
  TailEstimate e;
  e.replications = reps;
  e.exceed_count = count;
  e.master_seed = seed;
  e.level = level;
  e.p_hat = static_cast<double>(count) / static_cast<double>(reps);
  const auto ci = wilson_interval(count, reps, level);
  e.ci_low = ci.low;
  e.ci_high = ci.high;
  return e;
}

}  // namespace detail

/// Per-replication sums X_1 + ... + X_M; entry i uses SeedSpec{master_seed, i}.
inline std::vector<double> simulate_sums(const MixingMeasure& m, std::size_t M,
                                         std::size_t replications, std::uint64_t master_seed,
                                         unsigned threads = 0) {
  if (M == 0) throw Error(ErrorCode::InvalidArgument, "M must be at least 1");
  std::vector<double> sums(replications);
  detail::parallel_for(replications, threads, [&](std::size_t i) {
    sums[i] = sample_sum(m, M, SeedSpec{master_seed, i});
  });
  return sums;
}

inline std::uint64_t count_events(const std::vector<double>& sums, std::size_t M, double level,
                                  Side side) {
  std::uint64_t count = 0;
  for (double s : sums) count += sum_meets(s, M, level, side) ? 1 : 0;
  return count;
}

/// Fraction of replications in which the queried tail event holds, with a Wilson interval.
inline TailEstimate estimate_tail(const MixingMeasure& m, const TailQuery& q,
                                  std::size_t replications, std::uint64_t master_seed,
                                  const SimulationOptions& opt = {}) {
  if (replications == 0) throw Error(ErrorCode::InvalidArgument, "replications must be at least 1");
  const auto sums = simulate_sums(m, q.M, replications, master_seed, opt.threads);
  const double level = event_level(summarize(m), q);
  return detail::make_estimate(count_events(sums, q.M, level, q.side), replications, master_seed,
                               opt.level);
}

struct Histogram {
  std::vector<double> edges;  // bins + 1 uniform edges on [0,1]
  std::vector<std::uint64_t> counts;
  std::uint64_t replications = 0;

  double fraction_in(double lo, double hi) const {
    // Mass of the bins lying entirely inside [lo, hi].
    std::uint64_t c = 0;
    for (std::size_t b = 0; b < counts.size(); ++b) {
      if (edges[b] >= lo - 1e-12 && edges[b + 1] <= hi + 1e-12) c += counts[b];
    }
    return static_cast<double>(c) / static_cast<double>(replications);
  }
};

/// Empirical law of the sample mean over replications; bin b covers [b/bins, (b+1)/bins).
inline Histogram sample_mean_histogram(const MixingMeasure& m, std::size_t M,
                                       std::size_t replications, std::size_t bins,
                                       std::uint64_t master_seed, unsigned threads = 0) {
  if (bins < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 bins");
  if (replications == 0) throw Error(ErrorCode::InvalidArgument, "replications must be at least 1");
  const auto sums = simulate_sums(m, M, replications, master_seed, threads);
  Histogram h;
  h.replications = replications;
  h.counts.assign(bins, 0);
  for (std::size_t b = 0; b <= bins; ++b) {
    h.edges.push_back(static_cast<double>(b) / static_cast<double>(bins));
  }
  for (double s : sums) {
    const double mean = s / static_cast<double>(M);
    const auto b = static_cast<std::size_t>(std::clamp(mean * static_cast<double>(bins), 0.0,
                                                       static_cast<double>(bins - 1)));
    ++h.counts[b];
  }
  return h;
}

// ---------------------------------------------------------------------------
// Sweeps.

struct NamedModel {
  std::string id;
  MixingMeasure model;
};

struct SweepOptions {
  std::size_t replications = kDefaultSweepReplications;
  std::uint64_t master_seed = 0;
  double level = kDefaultLevel;
  unsigned threads = 0;
  bool use_oracle = true;
  /// Test hook: multiplies every Hoeffding bound before the violation check.
  double bound_scale = 1.0;
};

inline constexpr std::string_view kMonteCarloMethod = "monte_carlo";

struct SweepRow {
  std::string model_id;
  std::size_t M = 0;
  double t = 0.0;
  Side side = Side::Upper;
  std::string method;  // oracle method, "monte_carlo", or "error:<code>: <message>"
  double value = std::numeric_limits<double>::quiet_NaN();
  double ci_low = std::numeric_limits<double>::quiet_NaN();
  double ci_high = std::numeric_limits<double>::quiet_NaN();
  double hoeffding = std::numeric_limits<double>::quiet_NaN();
  double kl_form = std::numeric_limits<double>::quiet_NaN();
  double h0 = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;
  bool violation = false;

  bool is_error() const { return method.rfind("error:", 0) == 0; }
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::size_t violations() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return r.violation; }));
  }
};

/// One row per (model, M, t, side). Exact oracle where supported, Monte Carlo otherwise.
/// Per-cell failures become "error:<code>" rows; the sweep itself only fails on empty grids.
inline SweepResult run_sweep(const std::vector<NamedModel>& models,
                             const std::vector<std::size_t>& M_grid,
                             const std::vector<double>& t_grid, const std::vector<Side>& sides,
                             const SweepOptions& opt = {}) {
  if (models.empty() || M_grid.empty() || t_grid.empty() || sides.empty()) {
    throw Error(ErrorCode::EmptyGrid, "sweep grids must be non-empty");
  }
  if (opt.replications == 0) throw Error(ErrorCode::InvalidArgument, "replications must be at least 1");

  SweepResult result;
  for (const auto& nm : models) {
    const ModelSummary summary = summarize(nm.model);
    for (std::size_t M : M_grid) {
      std::optional<std::vector<double>> sums;  // shared by every t and side at this M
      const bool exact = opt.use_oracle && M > 0 && exact_tail_supported(nm.model, M);
      for (double t : t_grid) {
        for (Side side : sides) {
          SweepRow row;
          row.model_id = nm.id;
          row.M = M;
          row.t = t;
          row.side = side;
          try {
            const TailQuery q(M, t, side);
            const BoundReport br = bound_report(summary, M, t, side);
            row.hoeffding = br.hoeffding_form * opt.bound_scale;
            row.kl_form = br.kl_form;
            row.h0 = br.h0;
            row.valid = br.in_validity_range;
            const double level = event_level(summary, q);
            double checked = 0.0;
            if (exact) {
              const ExactTail et = exact_sample_mean_tail(nm.model, M, level, side);
              row.method = std::string(to_string(et.method));
              row.value = et.probability;
              checked = et.probability;
            } else {
              if (!sums) sums = simulate_sums(nm.model, M, opt.replications, opt.master_seed, opt.threads);
              const TailEstimate est = detail::make_estimate(count_events(*sums, M, level, side),
                                                             opt.replications, opt.master_seed,
                                                             opt.level);
              row.method = std::string(kMonteCarloMethod);
              row.value = est.p_hat;
              row.ci_low = est.ci_low;
              row.ci_high = est.ci_high;
              checked = est.ci_low;
            }
            row.violation = row.valid && checked > row.hoeffding;
          } catch (const Error& e) {
            row.method = std::string("error:") + e.what();
            row.violation = false;
          }
          result.rows.push_back(std::move(row));
        }
      }
    }
  }
  return result;
}

}  // namespace exchbound
