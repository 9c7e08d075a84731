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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "exchbound/cli.hpp"
#include "exchbound/exchbound.hpp"

using namespace exchbound;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

std::string fmt(double x) { return io::format_double(x); }

std::vector<double> window_points(double t_max) {
  std::vector<double> ts;
  for (int j = 1; j <= 10; ++j) ts.push_back(t_max * j / 11.0);
  return ts;
}

// ---------------------------------------------------------------------------

Check bound_validity() {
  Check c;
  std::size_t exact_cells = 0, mc_cells = 0;
  const std::vector<std::size_t> Ms{1, 2, 5, 10, 50, 200};
  for (const auto& nm : suite::standard()) {
    const auto s = summarize(nm.model);
    for (Side side : {Side::Upper, Side::Lower}) {
      const double t_max = side == Side::Upper ? s.t_max_upper : s.t_max_lower;
      if (t_max <= 0.0) continue;  // empty window: nothing to check
      const auto ts = window_points(t_max);
      const auto exact = run_sweep({nm}, Ms, ts, {side});
      SweepOptions mc;
      mc.replications = 100'000;
      mc.master_seed = 2024;
      mc.use_oracle = false;
      const auto est = run_sweep({nm}, Ms, ts, {side}, mc);
      for (std::size_t i = 0; i < exact.rows.size(); ++i) {
        const auto& e = exact.rows[i];
        const auto& m = est.rows[i];
        const std::string where = nm.id + " M=" + std::to_string(e.M) + " t=" + fmt(e.t) + " " +
                                  std::string(to_string(side));
        c.require(!e.is_error() && !m.is_error(), where + ": " + e.method + " " + m.method);
        c.require(e.valid, where + " outside window");
        if (e.method != kMonteCarloMethod) {
          ++exact_cells;
          c.require(e.value <= e.hoeffding, where + ": exact " + fmt(e.value) + " > " + fmt(e.hoeffding));
        }
        ++mc_cells;
        c.require(m.ci_low <= m.hoeffding, where + ": ci_low " + fmt(m.ci_low) + " > " + fmt(m.hoeffding));
      }
    }
  }
  c.detail += (c.detail.empty() ? "" : "; ") + std::to_string(exact_cells) + " exact cells, " +
              std::to_string(mc_cells) + " Monte Carlo cells";
  return c;
}

Check proof_chain() {
  Check c;
  for (int i = 1; i <= 20; ++i) {
    const double mu = i / 21.0;
    double min_g = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= 20; ++j) {
      const double t = (1.0 - mu) * j / 21.0;
      const double kl = kl_form_bound(mu, t, 1);
      const double at_h0 = chernoff_curve(mu, t, 1, optimal_h(mu, t));
      c.require(std::abs(at_h0 - kl) <= 1e-12, "chernoff(h0) != kl at mu=" + fmt(mu) + " t=" + fmt(t));
      c.require(kl <= hoeffding_tail_bound(1, t), "kl > hoeffding at mu=" + fmt(mu) + " t=" + fmt(t));
      min_g = std::min(min_g, big_g(t, mu));
    }
    c.require(min_g >= little_g(mu) - 1e-9, "grid min of G below g at mu=" + fmt(mu));
    c.require(little_g(mu) >= 2.0 - 1e-12, "g < 2 at mu=" + fmt(mu));
  }
  c.require(std::abs(little_g(0.5) - 2.0) <= 1e-12, "g(1/2) != 2");
  double prev = -std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 997; ++i) {
    const double x = 0.001 + 0.998 * i / 998.0;
    const double h = big_h(x);
    c.require(h > prev, "H not increasing at x=" + fmt(x));
    prev = h;
  }
  return c;
}

Check oracle_agrees_with_simulation() {
  Check c;
  const TailQuery q(2, 0.15, Side::Upper);
  const double exact = exact_tail(suite::two_bernoulli(), q).probability;
  const auto est = estimate_tail(suite::two_bernoulli(), q, 1'000'000, 42);
  c.require(std::abs(exact - 0.34) <= 1e-12, "oracle " + fmt(exact));
  c.require(std::abs(est.p_hat - 0.34) <= 0.002, "p_hat " + fmt(est.p_hat));
  c.detail = "p_hat=" + fmt(est.p_hat);
  return c;
}

Check iid_recovery() {
  Check c;
  const std::vector<std::pair<std::string, MixingMeasure>> models{
      {"Bern(0.3)", FiniteMixture({{1.0, Bernoulli(0.3)}})},
      {"Bern(0.5)", FiniteMixture({{1.0, Bernoulli(0.5)}})},
      {"PointMass(0.4)", FiniteMixture({{1.0, PointMass(0.4)}})},
      {"Discrete", FiniteMixture({{1.0, DiscreteOnUnit({0.0, 0.5, 1.0}, {0.2, 0.3, 0.5})}})},
      {"Beta(2,5)", FiniteMixture({{1.0, BetaDist(2, 5)}})}};
  for (const auto& [id, m] : models) {
    const auto s = summarize(m);
    c.require(s.mu_plus == s.mu && s.mu_minus == s.mu, id + ": component means differ from mean");
    c.require(s.t_max_upper == 1.0 - s.mu && s.t_max_lower == s.mu, id + ": windows");
    for (std::size_t M : {1u, 10u, 50u}) {
      for (Side side : {Side::Upper, Side::Lower}) {
        const double t_max = side == Side::Upper ? 1.0 - s.mu : s.mu;
        for (double t : window_points(t_max)) {
          const auto br = bound_report(s, M, t, side);
          c.require(br.in_validity_range, id + ": point inside window flagged invalid");
          c.require(br.hoeffding_form == std::exp(-2.0 * M * t * t), id + ": bound form");
          double tail;
          if (exact_tail_supported(m, M)) {
            tail = exact_tail(m, TailQuery(M, t, side)).probability;
          } else {
            tail = estimate_tail(m, TailQuery(M, t, side), 20'000, 9).ci_low;
          }
          c.require(tail <= br.hoeffding_form, id + ": tail above bound");
        }
        c.require(!bound_report(s, M, t_max, side).in_validity_range, id + ": window end flagged valid");
      }
    }
  }
  return c;
}

Check non_concentration() {
  Check c;
  const auto m = suite::two_point_masses();
  const auto s = summarize(m);
  c.require(s.mu_plus == 1.0 && s.mu_minus == 0.0 && s.mu == 0.5, "summary");
  for (std::size_t M : {1u, 2u, 5u, 10u, 50u, 200u, 10000u}) {
    const double p = exact_sample_mean_tail(m, M, 0.9, Side::Upper).probability +
                     exact_sample_mean_tail(m, M, 0.1, Side::Lower).probability;
    c.require(p == 1.0, "P(|mean - 0.5| >= 0.4) = " + fmt(p) + " at M=" + std::to_string(M));
    for (double t : {1e-9, 1e-3, 0.1, 0.4, 0.5, 0.9, 1.0}) {
      for (Side side : {Side::Upper, Side::Lower}) {
        c.require(!bound_report(s, M, t, side).in_validity_range, "valid (side, t) found");
      }
    }
    for (std::size_t i = 0; i < 200; ++i) {
      const double mean = sample_sequence(m, M, SeedSpec{5, i}).sample_mean;
      c.require(mean >= s.mu_minus && mean <= s.mu_plus, "sample mean outside [mu_minus, mu_plus]");
    }
  }
  return c;
}

Check flip_duality() {
  Check c;
  std::size_t cells = 0;
  for (const auto& nm : suite::standard()) {
    c.require(flip_model(flip_model(nm.model)) == nm.model, nm.id + ": flip is not an involution");
    if (std::holds_alternative<BernoulliParamMixture>(nm.model)) continue;  // quadrature path
    const auto f = flip_model(nm.model);
    for (std::size_t M : {1u, 2u, 5u, 10u, 50u, 200u}) {
      if (!exact_tail_supported(nm.model, M)) continue;
      for (double t : {0.01, 0.05, 0.1, 0.2, 0.3, 0.45, 0.7}) {
        const double lower = exact_tail(nm.model, TailQuery(M, t, Side::Lower)).probability;
        const double upper = exact_tail(f, TailQuery(M, t, Side::Upper)).probability;
        c.require(lower == upper, nm.id + ": M=" + std::to_string(M) + " t=" + fmt(t) + " " +
                                      fmt(lower) + " vs " + fmt(upper));
        ++cells;
      }
    }
  }
  c.detail += (c.detail.empty() ? "" : "; ") + std::to_string(cells) + " cells";
  return c;
}

Check sampler_exchangeability() {
  Check c;
  constexpr std::size_t k = 3, reps = 100'000;
  const double n = static_cast<double>(reps);
  double worst = 0.0;
  for (const auto& [id, m] : std::vector<std::pair<std::string, MixingMeasure>>{
           {"two_bernoulli", suite::two_bernoulli()}, {"three_discrete", suite::three_discrete()}}) {
    const JointLaw law = joint_law(m, k);
    const std::size_t d = law.values.size();
    std::vector<std::uint64_t> counts(law.probabilities.size(), 0);
    std::vector<std::array<std::size_t, k>> draws(reps);
    for (std::size_t i = 0; i < reps; ++i) {
      const auto batch = sample_sequence(m, k, SeedSpec{31337, i});
      std::size_t flat = 0;
      for (std::size_t j = 0; j < k; ++j) {
        const auto it = std::lower_bound(law.values.begin(), law.values.end(), batch.values[j]);
        if (it == law.values.end() || *it != batch.values[j]) {
          c.require(false, id + ": draw outside the support");
          return c;
        }
        draws[i][j] = static_cast<std::size_t>(it - law.values.begin());
        flat = flat * d + draws[i][j];
      }
      ++counts[flat];
    }
    for (std::size_t cell = 0; cell < counts.size(); ++cell) {
      const double p = law.probabilities[cell];
      const double se = std::sqrt(p * (1.0 - p) / n);
      const double diff = std::abs(counts[cell] / n - p);
      if (se > 0) worst = std::max(worst, diff / se);
      c.require(diff <= 4.0 * se, id + ": cell " + std::to_string(cell) + " off by " + fmt(diff / se) + " SE");
    }
    // Permuted coordinates: the pmf of (X_s(1), X_s(2), X_s(3)) against the identity ordering.
    std::array<std::size_t, k> perm{0, 1, 2};
    while (std::next_permutation(perm.begin(), perm.end())) {
      std::vector<std::uint64_t> permuted(counts.size(), 0);
      for (const auto& x : draws) {
        std::size_t flat = 0;
        for (std::size_t j = 0; j < k; ++j) flat = flat * d + x[perm[j]];
        ++permuted[flat];
      }
      for (std::size_t cell = 0; cell < counts.size(); ++cell) {
        const double p = law.probabilities[cell];
        const double se_diff = std::sqrt(2.0 * p * (1.0 - p) / n);
        const double diff = std::abs((static_cast<double>(permuted[cell]) - counts[cell]) / n);
        c.require(diff <= 4.0 * se_diff, id + ": permuted cell " + std::to_string(cell));
      }
    }
  }
  c.detail += (c.detail.empty() ? "" : "; ") + std::string("worst cell ") + fmt(worst) + " SE";
  return c;
}

std::string strip_timestamp(const std::string& s) {
  std::istringstream is(s);
  std::string line, out;
  while (std::getline(is, line)) {
    if (line.rfind("# timestamp=", 0) == 0) continue;
    out += line + "\n";
  }
  return out;
}

Check determinism() {
  Check c;
  cli::VerifyArgs a;
  a.reps = 50'000;
  a.seed = 99;
  a.monte_carlo_only = true;
  a.M_grid = {5, 50};
  a.t_grid = {0.05, 0.1, 0.2};
  std::ostringstream first, second;
  const int c1 = cli::cmd_verify(a, first);
  const int c2 = cli::cmd_verify(a, second);
  c.require(c1 == c2, "exit codes differ");
  c.require(strip_timestamp(first.str()) == strip_timestamp(second.str()), "reports differ");
  a.format = "json";
  std::ostringstream j1, j2;
  cli::cmd_verify(a, j1);
  cli::cmd_verify(a, j2);
  auto drop = [](std::string s) {
    auto doc = nlohmann::json::parse(s);
    doc["metadata"].erase("timestamp");
    return doc.dump();
  };
  c.require(drop(j1.str()) == drop(j2.str()), "JSON reports differ");
  return c;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Check()> run;
    double budget_s;
  };
  const std::vector<Criterion> criteria{
      {"AC1 bound validity over the model suite", bound_validity, 60},
      {"AC2 optimised Chernoff chain on the validity grid", proof_chain, 5},
      {"AC3 exact tail recovered by simulation", oracle_agrees_with_simulation, 10},
      {"AC4 single-atom models reduce to the i.i.d. bound", iid_recovery, 1e9},
      {"AC5 point-mass pair does not concentrate", non_concentration, 1e9},
      {"AC6 flip duality and involution", flip_duality, 1e9},
      {"AC7 sampler exchangeability", sampler_exchangeability, 1e9},
      {"AC8 verify reports are deterministic", determinism, 1e9},
  };
  int failures = 0;
  for (const auto& cr : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check c;
    try {
      c = cr.run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > cr.budget_s) {
      c.ok = false;
      c.detail += " (over the " + fmt(cr.budget_s) + " s budget)";
    }
    std::printf("[%s] %s (%.2f s)%s%s\n", c.ok ? "PASS" : "FAIL", cr.name, secs,
                c.detail.empty() ? "" : " -- ", c.detail.c_str());
    std::fflush(stdout);
    failures += c.ok ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
