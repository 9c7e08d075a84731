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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "exchbound/error.hpp"
#include "exchbound/model.hpp"

// Model files are JSON documents:
//
//   {"type": "finite", "atoms": [{"weight": w, "component": C}, ...]}
//     C = {"kind": "bernoulli", "p": p}
//       | {"kind": "pointmass", "c": c}
//       | {"kind": "discrete", "points": [...], "weights": [...]}
//       | {"kind": "beta", "alpha": a, "beta": b}
//
//   {"type": "bernoulli_param", "density": D}
//     D = {"kind": "uniform", "lo": lo, "hi": hi}
//       | {"kind": "truncated_beta", "alpha": a, "beta": b, "lo": lo, "hi": hi}
//
// Parse errors name the offending field, e.g. "atoms[2].component.p".

namespace exchbound::io {

using nlohmann::json;

namespace detail {

[[noreturn]] inline void fail(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::InvalidModel, field + ": " + why);
}

inline const json& member(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline double number(const json& obj, const std::string& key, const std::string& path) {
  const json& v = member(obj, key, path);
  if (!v.is_number()) fail(join(path, key), "expected a number");
  return v.get<double>();
}

inline double unit_number(const json& obj, const std::string& key, const std::string& path) {
  const double x = number(obj, key, path);
  if (!(x >= 0.0 && x <= 1.0)) fail(join(path, key), "must lie in [0,1]");
  return x;
}

inline double positive_number(const json& obj, const std::string& key, const std::string& path) {
  const double x = number(obj, key, path);
  if (!(x > 0.0 && std::isfinite(x))) fail(join(path, key), "must be positive and finite");
  return x;
}

inline std::string text(const json& obj, const std::string& key, const std::string& path) {
  const json& v = member(obj, key, path);
  if (!v.is_string()) fail(join(path, key), "expected a string");
  return v.get<std::string>();
}

inline std::vector<double> numbers(const json& obj, const std::string& key, const std::string& path) {
  const json& v = member(obj, key, path);
  if (!v.is_array() || v.empty()) fail(join(path, key), "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(join(path, key) + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

inline Component parse_component(const json& c, const std::string& path) {
  const std::string kind = text(c, "kind", path);
  if (kind == "bernoulli") return Bernoulli(unit_number(c, "p", path));
  if (kind == "pointmass") return PointMass(unit_number(c, "c", path));
  if (kind == "beta") return BetaDist(positive_number(c, "alpha", path), positive_number(c, "beta", path));
  if (kind == "discrete") {
    const auto pts = numbers(c, "points", path);
    const auto ws = numbers(c, "weights", path);
    if (pts.size() != ws.size()) fail(join(path, "weights"), "length differs from points");
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string pi = join(path, "points") + "[" + std::to_string(i) + "]";
      if (!(pts[i] >= 0.0 && pts[i] <= 1.0)) fail(pi, "must lie in [0,1]");
      if (i > 0 && !(pts[i - 1] < pts[i])) fail(pi, "points must be strictly increasing");
      if (!(ws[i] >= 0.0 && ws[i] <= 1.0)) {
        fail(join(path, "weights") + "[" + std::to_string(i) + "]", "must lie in [0,1]");
      }
      total += ws[i];
    }
    if (std::abs(total - 1.0) > kWeightSumTolerance) {
      fail(join(path, "weights") + "[*]", "weights sum to " + std::to_string(total) + ", expected 1");
    }
    return DiscreteOnUnit(pts, ws);
  }
  fail(join(path, "kind"), "unknown component kind '" + kind + "'");
}

inline MixingDensity parse_density(const json& d, const std::string& path) {
  const std::string kind = text(d, "kind", path);
  double alpha = 1.0, beta = 1.0;
  if (kind == "truncated_beta") {
    alpha = positive_number(d, "alpha", path);
    beta = positive_number(d, "beta", path);
  } else if (kind != "uniform") {
    fail(join(path, "kind"), "unknown density kind '" + kind + "'");
  }
  const double lo = unit_number(d, "lo", path);
  const double hi = unit_number(d, "hi", path);
  if (!(lo < hi)) fail(join(path, "hi"), "must exceed lo");
  if (kind == "uniform") return UniformDensity(lo, hi);
  return TruncatedBetaDensity(alpha, beta, lo, hi);
}

}  // namespace detail

inline MixingMeasure model_from_json(const json& doc) {
  using namespace detail;
  const std::string type = text(doc, "type", "");
  if (type == "finite") {
    const json& atoms = member(doc, "atoms", "");
    if (!atoms.is_array() || atoms.empty()) fail("atoms", "expected a non-empty array");
    std::vector<Atom> out;
    double total = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const std::string path = "atoms[" + std::to_string(i) + "]";
      const double w = number(atoms[i], "weight", path);
      if (!(w > 0.0 && w <= 1.0)) fail(path + ".weight", "must lie in (0,1]");
      total += w;
      out.push_back({w, parse_component(member(atoms[i], "component", path), path + ".component")});
    }
    if (std::abs(total - 1.0) > kWeightSumTolerance) {
      fail("atoms[*].weight", "weights sum to " + std::to_string(total) + ", expected 1");
    }
    return FiniteMixture(std::move(out));
  }
  if (type == "bernoulli_param") {
    return BernoulliParamMixture(parse_density(member(doc, "density", ""), "density"));
  }
  fail("type", "expected 'finite' or 'bernoulli_param'");
}

inline MixingMeasure parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidModel, std::string("<document>: ") + e.what());
  }
  return model_from_json(doc);
}

inline MixingMeasure load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

inline json component_to_json(const Component& c) {
  struct Visitor {
    json operator()(const Bernoulli& b) const { return {{"kind", "bernoulli"}, {"p", b.p.value()}}; }
    json operator()(const PointMass& m) const { return {{"kind", "pointmass"}, {"c", m.c.value()}}; }
    json operator()(const DiscreteOnUnit& d) const {
      json pts = json::array();
      for (const auto& x : d.points()) pts.push_back(x.value());
      return {{"kind", "discrete"}, {"points", pts}, {"weights", d.weights()}};
    }
    json operator()(const BetaDist& b) const {
      return {{"kind", "beta"}, {"alpha", b.alpha}, {"beta", b.beta}};
    }
  };
  return std::visit(Visitor{}, c);
}

inline json model_to_json(const MixingMeasure& m) {
  if (const auto* fm = std::get_if<FiniteMixture>(&m)) {
    json atoms = json::array();
    for (const auto& a : fm->atoms()) {
      atoms.push_back({{"weight", a.weight}, {"component", component_to_json(a.component)}});
    }
    return {{"type", "finite"}, {"atoms", atoms}};
  }
  const auto& pm = std::get<BernoulliParamMixture>(m);
  json density;
  if (const auto* u = std::get_if<UniformDensity>(&pm.density)) {
    density = {{"kind", "uniform"}, {"lo", u->lo.value()}, {"hi", u->hi.value()}};
  } else {
    const auto& b = std::get<TruncatedBetaDensity>(pm.density);
    density = {{"kind", "truncated_beta"}, {"alpha", b.alpha}, {"beta", b.beta},
               {"lo", b.lo.value()},      {"hi", b.hi.value()}};
  }
  return {{"type", "bernoulli_param"}, {"density", density}};
}

}  // namespace exchbound::io
