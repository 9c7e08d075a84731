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

#include <vector>

#include "exchbound/model.hpp"
#include "exchbound/montecarlo.hpp"

// Reference models used by the verification sweeps and the test suites.

namespace exchbound::suite {

inline MixingMeasure single_bernoulli() {
  return FiniteMixture({{1.0, Bernoulli(0.3)}});
}

inline MixingMeasure two_bernoulli() {
  return FiniteMixture({{0.5, Bernoulli(0.2)}, {0.5, Bernoulli(0.8)}});
}

/// Component means 0.375, 0.5 and 0.75 on the lattice of quarters.
inline MixingMeasure three_discrete() {
  return FiniteMixture({
      {0.25, DiscreteOnUnit({0.0, 0.5, 1.0}, {0.5, 0.25, 0.25})},
      {0.5, DiscreteOnUnit({0.25, 0.75}, {0.5, 0.5})},
      {0.25, DiscreteOnUnit({0.0, 0.5, 1.0}, {0.1, 0.3, 0.6})},
  });
}

inline MixingMeasure two_point_masses() {
  return FiniteMixture({{0.5, PointMass(0.0)}, {0.5, PointMass(1.0)}});
}

inline MixingMeasure uniform_bernoulli_mixture() {
  return BernoulliParamMixture(UniformDensity(0.2, 0.8));
}

inline std::vector<NamedModel> standard() {
  return {
      {"single_bernoulli", single_bernoulli()},
      {"two_bernoulli", two_bernoulli()},
      {"three_discrete", three_discrete()},
      {"two_point_masses", two_point_masses()},
      {"uniform_bernoulli_mixture", uniform_bernoulli_mixture()},
  };
}

}  // namespace exchbound::suite
