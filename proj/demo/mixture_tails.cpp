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

// Prints exact upper and lower tails of the sample mean next to the Hoeffding-type bound
// for each model in the standard suite.
//
//   mixture_tails [M]

#include <cstdio>
#include <cstdlib>

#include "exchbound/exchbound.hpp"

int main(int argc, char** argv) {
  using namespace exchbound;
  const std::size_t M = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 50;
  if (M == 0) {
    std::fprintf(stderr, "M must be positive\n");
    return 2;
  }
  std::printf("%-28s %-6s %-8s %-14s %-14s %-14s\n", "model", "side", "t", "exact", "kl_form",
              "hoeffding");
  for (const auto& nm : suite::standard()) {
    const auto s = summarize(nm.model);
    for (Side side : {Side::Upper, Side::Lower}) {
      const double t_max = side == Side::Upper ? s.t_max_upper : s.t_max_lower;
      if (t_max <= 0.0) {
        std::printf("%-28s %-6s (no valid t)\n", nm.id.c_str(), std::string(to_string(side)).c_str());
        continue;
      }
      for (double frac : {0.25, 0.5, 0.75}) {
        const double t = frac * t_max;
        const auto r = bound_report(s, M, t, side);
        const auto e = exact_tail(nm.model, TailQuery(M, t, side));
        std::printf("%-28s %-6s %-8.4f %-14.6e %-14.6e %-14.6e\n", nm.id.c_str(),
                    std::string(to_string(side)).c_str(), t, e.probability, r.kl_form,
                    r.hoeffding_form);
      }
    }
  }
  return 0;
}
