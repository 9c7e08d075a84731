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

#include "exchbound/bounds.hpp"
#include "exchbound/model.hpp"

namespace exchbound {

/// Slack, per observation, when comparing a sum against M * level. Sums of lattice-valued
/// draws such as 0.1 + 0.2 miss their lattice point by a few ulps; without the slack the
/// non-strict event "sum >= M * level" would depend on rounding.
inline constexpr double kLatticeTolerance = 1e-9;

/// Level that the sample mean is compared against: mu_plus + t or mu_minus - t.
inline double event_level(const ModelSummary& s, const TailQuery& q) {
  return q.side == Side::Upper ? s.mu_plus + q.t : s.mu_minus - q.t;
}

/// Non-strict event {sum >= M level} (upper) or {sum <= M level} (lower).
inline bool sum_meets(double sum, std::size_t M, double level, Side side) {
  const double target = static_cast<double>(M) * level;
  const double tol = kLatticeTolerance * static_cast<double>(M);
  return side == Side::Upper ? sum >= target - tol : sum <= target + tol;
}

}  // namespace exchbound
