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
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "exchbound/bounds.hpp"
#include "exchbound/model_io.hpp"
#include "exchbound/montecarlo.hpp"
#include "exchbound/oracle.hpp"
#include "exchbound/report.hpp"
#include "exchbound/suite.hpp"

/// Command-line front end. `run` is the whole program minus process plumbing, so the
/// tests drive it in-process. Exit codes: 0 success, 1 bound violation found by verify,
/// 2 invalid arguments or model file, 3 I/O failure.
namespace exchbound::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

namespace detail {

inline unsigned threads_from_env() {
  const char* v = std::getenv("EXCHBOUND_THREADS");
  if (v == nullptr || *v == '\0') return 0;
  char* end = nullptr;
  const unsigned long n = std::strtoul(v, &end, 10);
  if (*end != '\0' || n == 0) {
    throw Error(ErrorCode::InvalidArgument, "EXCHBOUND_THREADS must be a positive integer");
  }
  return static_cast<unsigned>(n);
}

inline std::vector<Side> parse_sides(const std::string& s) {
  if (s == "both") return {Side::Upper, Side::Lower};
  return {io::parse_side(s)};
}

inline io::Format parse_format(const std::string& s) {
  if (s == "csv") return io::Format::Csv;
  if (s == "json") return io::Format::Json;
  throw Error(ErrorCode::InvalidArgument, "format must be 'csv' or 'json'");
}

inline std::string model_id_for(const std::filesystem::path& p) { return p.stem().string(); }

inline std::vector<NamedModel> collect_models(const std::vector<std::string>& files,
                                              const std::string& dir) {
  std::vector<NamedModel> out;
  for (const auto& f : files) out.push_back({model_id_for(f), io::load_model(f)});
  if (!dir.empty()) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
      throw Error(ErrorCode::IoError, "not a directory: " + dir);
    }
    std::vector<std::filesystem::path> paths;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".json") paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) out.push_back({model_id_for(p), io::load_model(p)});
  }
  if (out.empty()) out = suite::standard();
  return out;
}

inline void emit(const std::string& content, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << content;
  } else {
    io::write_file_atomic(out_path, content);
  }
}

inline std::string describe(const BoundReport& b, const ModelSummary& s) {
  std::ostringstream os;
  const double t_max = b.side == Side::Upper ? s.t_max_upper : s.t_max_lower;
  os << to_string(b.side) << ": valid=" << (b.in_validity_range ? "true" : "false")
     << " window=(0," << io::format_double(t_max) << ")"
     << " hoeffding=" << io::format_double(b.hoeffding_form)
     << " h0=" << io::format_double(b.h0)
     << " chernoff_at_h0=" << io::format_double(b.chernoff_at_h0)
     << " kl_form=" << io::format_double(b.kl_form);
  return os.str();
}

inline std::string histogram_csv(const Histogram& h, const io::ReportMetadata& m) {
  std::ostringstream os;
  os << "# command=" << m.command << '\n'
     << "# tool_version=" << m.tool_version << '\n'
     << "# timestamp=" << m.timestamp << '\n'
     << "# master_seed=" << m.master_seed << '\n'
     << "# replications=" << m.replications << '\n'
     << "bin_low,bin_high,count,fraction\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    os << io::format_double(h.edges[b]) << ',' << io::format_double(h.edges[b + 1]) << ','
       << h.counts[b] << ','
       << io::format_double(static_cast<double>(h.counts[b]) / static_cast<double>(h.replications))
       << '\n';
  }
  return os.str();
}

inline std::string histogram_json(const Histogram& h, const io::ReportMetadata& m) {
  nlohmann::json bins = nlohmann::json::array();
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    bins.push_back({{"bin_low", h.edges[b]},
                    {"bin_high", h.edges[b + 1]},
                    {"count", h.counts[b]},
                    {"fraction", static_cast<double>(h.counts[b]) /
                                     static_cast<double>(h.replications)}});
  }
  nlohmann::json doc = {{"metadata",
                         {{"command", m.command},
                          {"tool_version", m.tool_version},
                          {"timestamp", m.timestamp},
                          {"master_seed", m.master_seed},
                          {"replications", m.replications}}},
                        {"bins", bins}};
  return doc.dump(2) + "\n";
}

}  // namespace detail

struct BoundsArgs {
  double mu_plus = 0.0, mu_minus = 0.0, t = 0.0;
  std::size_t M = 0;
};

inline int cmd_bounds(const BoundsArgs& a, std::ostream& out) {
  if (!(a.mu_minus >= 0.0 && a.mu_minus <= a.mu_plus && a.mu_plus <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "need 0 <= mu_minus <= mu_plus <= 1");
  }
  ModelSummary s;
  s.mu_plus = a.mu_plus;
  s.mu_minus = a.mu_minus;
  s.mu = std::clamp(0.5 * (a.mu_plus + a.mu_minus), a.mu_minus, a.mu_plus);
  s.t_max_upper = 1.0 - a.mu_plus;
  s.t_max_lower = a.mu_minus;
  out << "mu_plus=" << io::format_double(a.mu_plus) << " mu_minus=" << io::format_double(a.mu_minus)
      << " M=" << a.M << " t=" << io::format_double(a.t) << '\n';
  for (Side side : {Side::Upper, Side::Lower}) {
    out << detail::describe(bound_report(s, a.M, a.t, side), s) << '\n';
  }
  return kExitOk;
}

struct SimulateArgs {
  std::string model_path;
  std::size_t M = 0;
  double t = 0.0;
  std::string side = "upper";
  std::size_t reps = kDefaultSweepReplications;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string format = "csv";
  double level = kDefaultLevel;
};

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const auto format = detail::parse_format(a.format);
  const auto sides = detail::parse_sides(a.side);
  if (sides.size() != 1) throw Error(ErrorCode::InvalidArgument, "simulate takes one side");
  const MixingMeasure model = io::load_model(a.model_path);
  const TailQuery q(a.M, a.t, sides.front());
  const ModelSummary summary = summarize(model);
  const BoundReport br = bound_report(summary, q.M, q.t, q.side);
  const TailEstimate est =
      estimate_tail(model, q, a.reps, a.seed, {a.level, detail::threads_from_env()});

  SweepRow row;
  row.model_id = detail::model_id_for(a.model_path);
  row.M = q.M;
  row.t = q.t;
  row.side = q.side;
  row.method = std::string(kMonteCarloMethod);
  row.value = est.p_hat;
  row.ci_low = est.ci_low;
  row.ci_high = est.ci_high;
  row.hoeffding = br.hoeffding_form;
  row.kl_form = br.kl_form;
  row.h0 = br.h0;
  row.valid = br.in_validity_range;
  row.violation = row.valid && est.ci_low > row.hoeffding;

  io::Report report{{"simulate", a.seed, a.reps, a.level, std::string(io::kToolVersion),
                     io::utc_timestamp()},
                    {row}};
  detail::emit(io::encode(report, format), a.out_path, out);
  if (!a.out_path.empty()) {
    out << "p_hat=" << io::format_double(est.p_hat) << " ci=[" << io::format_double(est.ci_low)
        << "," << io::format_double(est.ci_high) << "] exceed=" << est.exceed_count << "/"
        << est.replications << " hoeffding=" << io::format_double(br.hoeffding_form)
        << " kl_form=" << io::format_double(br.kl_form)
        << " valid=" << (br.in_validity_range ? "true" : "false") << '\n';
  }
  return kExitOk;
}

struct VerifyArgs {
  std::vector<std::string> model_paths;
  std::string models_dir;
  std::vector<std::size_t> M_grid{10, 100};
  std::vector<double> t_grid{0.05, 0.1};
  std::string side = "both";
  std::size_t reps = kDefaultSweepReplications;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string format = "csv";
  double level = kDefaultLevel;
  double bound_scale = 1.0;
  bool monte_carlo_only = false;
};

inline int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const auto format = detail::parse_format(a.format);
  const auto sides = detail::parse_sides(a.side);
  const auto models = detail::collect_models(a.model_paths, a.models_dir);
  SweepOptions opt;
  opt.replications = a.reps;
  opt.master_seed = a.seed;
  opt.level = a.level;
  opt.threads = detail::threads_from_env();
  opt.use_oracle = !a.monte_carlo_only;
  opt.bound_scale = a.bound_scale;
  const SweepResult sweep = run_sweep(models, a.M_grid, a.t_grid, sides, opt);

  io::Report report{{"verify", a.seed, a.reps, a.level, std::string(io::kToolVersion),
                     io::utc_timestamp()},
                    sweep.rows};
  detail::emit(io::encode(report, format), a.out_path, out);
  const std::size_t violations = sweep.violations();
  if (!a.out_path.empty()) {
    out << "rows=" << sweep.rows.size() << " violations=" << violations << '\n';
  }
  return violations == 0 ? kExitOk : kExitViolation;
}

struct CiArgs {
  std::size_t M = 0;
  double delta = 0.0;
};

inline int cmd_ci(const CiArgs& a, std::ostream& out) {
  const double t = t_for_confidence(a.M, a.delta);
  out << "t=" << io::format_double(t) << '\n'
      << "sample mean in [mu_minus - t, mu_plus + t] with probability >= 1 - 2*delta = "
      << io::format_double(std::max(0.0, 1.0 - 2.0 * a.delta)) << " (subject to validity windows)\n";
  return kExitOk;
}

struct HistogramArgs {
  std::string model_path;
  std::size_t M = 0;
  std::size_t reps = 10'000;
  std::size_t bins = 50;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string format = "csv";
};

inline int cmd_histogram(const HistogramArgs& a, std::ostream& out) {
  const auto format = detail::parse_format(a.format);
  const MixingMeasure model = io::load_model(a.model_path);
  const Histogram h =
      sample_mean_histogram(model, a.M, a.reps, a.bins, a.seed, detail::threads_from_env());
  io::ReportMetadata meta{"histogram", a.seed, a.reps, kDefaultLevel, std::string(io::kToolVersion),
                          io::utc_timestamp()};
  detail::emit(format == io::Format::Csv ? detail::histogram_csv(h, meta)
                                         : detail::histogram_json(h, meta),
               a.out_path, out);
  return kExitOk;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tail bounds and simulation for exchangeable sequences in [0,1]", "exchbound"};
  app.require_subcommand(1);

  BoundsArgs bounds;
  auto* sub_bounds = app.add_subcommand("bounds", "Closed-form bounds for both tails");
  sub_bounds->add_option("--mu-plus", bounds.mu_plus, "Largest component mean")->required();
  sub_bounds->add_option("--mu-minus", bounds.mu_minus, "Smallest component mean")->required();
  sub_bounds->add_option("--m", bounds.M, "Sample size M")->required();
  sub_bounds->add_option("--t", bounds.t, "Deviation t > 0")->required();

  SimulateArgs sim;
  auto* sub_sim = app.add_subcommand("simulate", "Monte Carlo tail estimate for one model");
  sub_sim->add_option("--model", sim.model_path, "Model file (JSON)")->required();
  sub_sim->add_option("--m", sim.M, "Sample size M")->required();
  sub_sim->add_option("--t", sim.t, "Deviation t > 0")->required();
  sub_sim->add_option("--side", sim.side, "upper or lower");
  sub_sim->add_option("--reps", sim.reps, "Replications");
  sub_sim->add_option("--seed", sim.seed, "Master seed");
  sub_sim->add_option("--out", sim.out_path, "Report file (default: stdout)");
  sub_sim->add_option("--format", sim.format, "csv or json");
  sub_sim->add_option("--level", sim.level, "Confidence level of the proportion interval");

  VerifyArgs ver;
  auto* sub_ver = app.add_subcommand("verify", "Sweep models x M x t x side against the bounds");
  sub_ver->add_option("--model", ver.model_paths, "Model file (repeatable)");
  sub_ver->add_option("--models-dir", ver.models_dir, "Directory of *.json model files");
  sub_ver->add_option("--m-grid", ver.M_grid, "Comma-separated sample sizes")->delimiter(',');
  sub_ver->add_option("--t-grid", ver.t_grid, "Comma-separated deviations")->delimiter(',');
  sub_ver->add_option("--side", ver.side, "upper, lower or both");
  sub_ver->add_option("--reps", ver.reps, "Replications per Monte Carlo cell");
  sub_ver->add_option("--seed", ver.seed, "Master seed");
  sub_ver->add_option("--out", ver.out_path, "Report file (default: stdout)");
  sub_ver->add_option("--format", ver.format, "csv or json");
  sub_ver->add_option("--level", ver.level, "Confidence level of the proportion interval");
  sub_ver->add_flag("--monte-carlo-only", ver.monte_carlo_only, "Skip the exact oracle");
  sub_ver->add_option("--bound-scale", ver.bound_scale, "Test hook: scale bounds before checking")
      ->group("");

  CiArgs ci;
  auto* sub_ci = app.add_subcommand("ci", "Deviation for a two-sided containment statement");
  sub_ci->add_option("--m", ci.M, "Sample size M")->required();
  sub_ci->add_option("--delta", ci.delta, "Per-side failure probability in (0,1]")->required();

  HistogramArgs hist;
  auto* sub_hist = app.add_subcommand("histogram", "Empirical law of the sample mean");
  sub_hist->add_option("--model", hist.model_path, "Model file (JSON)")->required();
  sub_hist->add_option("--m", hist.M, "Sample size M")->required();
  sub_hist->add_option("--reps", hist.reps, "Replications");
  sub_hist->add_option("--bins", hist.bins, "Number of bins on [0,1]");
  sub_hist->add_option("--seed", hist.seed, "Master seed");
  sub_hist->add_option("--out", hist.out_path, "Output file (default: stdout)");
  sub_hist->add_option("--format", hist.format, "csv or json");

  std::vector<const char*> argv{"exchbound"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    // Subcommand help requests arrive here too.
    if (e.get_exit_code() == 0) {
      out << e.what() << '\n';
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (sub_bounds->parsed()) return cmd_bounds(bounds, out);
    if (sub_sim->parsed()) return cmd_simulate(sim, out);
    if (sub_ver->parsed()) return cmd_verify(ver, out);
    if (sub_ci->parsed()) return cmd_ci(ci, out);
    if (sub_hist->parsed()) return cmd_histogram(hist, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::IoError ? kExitIo : kExitUsage;
  }
  return kExitUsage;
}

}  // namespace exchbound::cli
