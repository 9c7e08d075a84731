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
#include <exception>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "exchbound/error.hpp"

namespace exchbound {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Adaptive 31-point Gauss-Kronrod integration of `f` over [lo, hi], falling back to tanh-sinh
/// for integrands with endpoint singularities. Throws QuadratureFailure when the estimated
/// absolute error exceeds `abs_budget`.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double lo, double hi, double abs_budget = 1e-10) {
  if (!(lo < hi)) return {0.0, 0.0};
  double error = 0.0;
  double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 12,
                                                                               1e-13, &error);
  if (std::isfinite(value) && error <= abs_budget) return {value, error};

  boost::math::quadrature::tanh_sinh<double> ts;
  double l1 = 0.0;
  try {
    value = ts.integrate(f, lo, hi, 1e-13, &error, &l1);
  } catch (const std::exception&) {
    value = std::numeric_limits<double>::quiet_NaN();
  }
  if (!std::isfinite(value) || !(error <= abs_budget)) {
    throw Error(ErrorCode::QuadratureFailure,
                "error estimate " + std::to_string(error) + " exceeds budget " +
                    std::to_string(abs_budget));
  }
  return {value, error};
}

}  // namespace exchbound
