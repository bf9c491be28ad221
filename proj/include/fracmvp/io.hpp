#pragma once

// JSON and CSV plumbing for the command-line tool. Uses the vendored nlohmann json.hpp.

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "error.hpp"
#include "exterior_data.hpp"
#include "gaps.hpp"
#include "geometry.hpp"
#include "harmonic.hpp"
#include "limits.hpp"
#include "wos.hpp"

namespace fracmvp {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

namespace detail {

inline double get_number(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw DomainError(what + ": missing field '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_number()) throw DomainError(what + ": field '" + std::string(key) + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw DomainError(what + ": field '" + std::string(key) + "' must be finite");
  return x;
}

inline Vec get_vec(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw DomainError(what + ": missing field '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_array() || v.empty() || v.size() > static_cast<std::size_t>(kMaxDim))
    throw DomainError(what + ": field '" + std::string(key) + "' must be a non-empty array of numbers");
  std::vector<double> xs;
  for (const auto& e : v) {
    if (!e.is_number()) throw DomainError(what + ": field '" + std::string(key) + "' must hold numbers");
    xs.push_back(e.get<double>());
    if (!std::isfinite(xs.back())) throw DomainError(what + ": non-finite coordinate");
  }
  return Vec::from(xs);
}

inline int get_dim(const json& j, const std::string& what, int fallback) {
  if (!j.contains("dim")) return fallback;
  if (!j.at("dim").is_number_integer()) throw DomainError(what + ": 'dim' must be an integer");
  const int n = j.at("dim").get<int>();
  if (n < 1 || n > kMaxDim) throw DomainError(what + ": 'dim' out of range");
  return n;
}

inline std::string get_type(const json& j, const std::string& what) {
  if (!j.is_object()) throw DomainError(what + ": expected a JSON object");
  if (!j.contains("type") || !j.at("type").is_string()) throw DomainError(what + ": missing string field 'type'");
  return j.at("type").get<std::string>();
}

inline Ball ball_from_json(const json& j) {
  Ball b{get_vec(j, "center", "ball"), get_number(j, "radius", "ball")};
  if (!(b.radius > 0.0)) throw DomainError("ball: radius must be positive");
  return b;
}

}  // namespace detail

/// {"type":"ball","center":[...],"radius":x} | {"type":"union","parts":[balls]} |
/// {"type":"shifted_ball","R":x[,"dim":n]} | {"type":"slab_complement","r":x,"delta":x[,"dim":n][,"fillet":x]} |
/// {"type":"dilated","lambda":x,"base":{...}}
inline Domain domain_from_json(const json& j) {
  const std::string t = detail::get_type(j, "domain");
  if (t == "ball") return {detail::ball_from_json(j)};
  if (t == "union") {
    if (!j.contains("parts") || !j.at("parts").is_array() || j.at("parts").empty())
      throw DomainError("union: 'parts' must be a non-empty array of balls");
    BallUnion u;
    for (const auto& pj : j.at("parts")) {
      if (detail::get_type(pj, "union part") != "ball") throw DomainError("union: every part must be a ball");
      u.parts.push_back(detail::ball_from_json(pj));
      if (u.parts.back().center.dim() != u.parts.front().center.dim())
        throw DomainError("union: parts have different dimensions");
    }
    return {u};
  }
  if (t == "shifted_ball") {
    const double R = detail::get_number(j, "R", "shifted_ball");
    if (!(R >= 1.0)) throw DomainError("shifted_ball: R must be at least 1");
    return make_shifted_ball(R, detail::get_dim(j, "shifted_ball", 2));
  }
  if (t == "slab_complement") {
    const double r = detail::get_number(j, "r", "slab_complement");
    const double delta = detail::get_number(j, "delta", "slab_complement");
    const double fillet = j.contains("fillet") ? detail::get_number(j, "fillet", "slab_complement") : 0.25;
    if (!(r > 0.0) || !(delta > 0.0 && delta < 0.5) || !(fillet > 0.0 && fillet < 1.0))
      throw DomainError("slab_complement: need r > 0, 0 < delta < 0.5, 0 < fillet < 1");
    return make_slab(r, delta, detail::get_dim(j, "slab_complement", 2), fillet);
  }
  if (t == "dilated") {
    const double lambda = detail::get_number(j, "lambda", "dilated");
    if (!(lambda > 0.0)) throw DomainError("dilated: lambda must be positive");
    if (!j.contains("base")) throw DomainError("dilated: missing field 'base'");
    return dilate(domain_from_json(j.at("base")), lambda);
  }
  throw DomainError("domain: unknown type '" + t + "'");
}

inline json vec_to_json(const Vec& v) { return v.to_vector(); }

inline json domain_to_json(const Domain& d) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return {{"type", "ball"}, {"center", vec_to_json(x.center)}, {"radius", x.radius}};
        } else if constexpr (std::is_same_v<T, BallUnion>) {
          json parts = json::array();
          for (const auto& b : x.parts) parts.push_back({{"type", "ball"}, {"center", vec_to_json(b.center)}, {"radius", b.radius}});
          return {{"type", "union"}, {"parts", parts}};
        } else if constexpr (std::is_same_v<T, ShiftedBall>) {
          return {{"type", "shifted_ball"}, {"R", x.R}, {"dim", x.dim}};
        } else if constexpr (std::is_same_v<T, SlabComplement>) {
          return {{"type", "slab_complement"}, {"r", x.r}, {"delta", x.delta}, {"dim", x.dim}, {"fillet", x.fillet}};
        } else if constexpr (std::is_same_v<T, Dilated>) {
          return {{"type", "dilated"}, {"lambda", x.lambda}, {"base", domain_to_json(*x.base)}};
        } else {
          throw DomainError("implicit domains have no JSON form");
        }
      },
      d.v);
}

/// {"terms":[{"kind":"bump","center":[...],"radius":x,"height":x} |
///           {"kind":"constant","height":x} |
///           {"kind":"shell","center":[...],"inner":x[,"outer":x][,"width":x],"height":x}, ...]}
inline ExteriorData data_from_json(const json& j) {
  if (!j.is_object() || !j.contains("terms") || !j.at("terms").is_array())
    throw DomainError("exterior data: expected an object with a 'terms' array");
  ExteriorData g;
  for (const auto& tj : j.at("terms")) {
    if (!tj.is_object() || !tj.contains("kind") || !tj.at("kind").is_string())
      throw DomainError("exterior data: each term needs a string field 'kind'");
    const std::string k = tj.at("kind").get<std::string>();
    const double h = detail::get_number(tj, "height", k);
    if (k == "bump") {
      g.terms.push_back(bump_term(detail::get_vec(tj, "center", k), detail::get_number(tj, "radius", k), h));
    } else if (k == "constant") {
      g.terms.push_back(constant_term(h));
    } else if (k == "shell") {
      const double outer = tj.contains("outer") ? detail::get_number(tj, "outer", k) : INFINITY;
      const double width = tj.contains("width") ? detail::get_number(tj, "width", k) : 0.0;
      g.terms.push_back(shell_term(detail::get_vec(tj, "center", k), detail::get_number(tj, "inner", k), outer, width, h));
    } else {
      throw DomainError("exterior data: unknown term kind '" + k + "'");
    }
  }
  int n = 0;
  for (const auto& t : g.terms) {
    if (t.kind == DataTerm::Kind::Constant) continue;
    if (n == 0) n = t.center.dim();
    if (t.center.dim() != n) throw DomainError("exterior data: terms have different dimensions");
  }
  return g;
}

inline json data_to_json(const ExteriorData& g) {
  json terms = json::array();
  for (const auto& t : g.terms) {
    switch (t.kind) {
      case DataTerm::Kind::Bump:
        terms.push_back({{"kind", "bump"}, {"center", vec_to_json(t.center)}, {"radius", t.radius}, {"height", t.height}});
        break;
      case DataTerm::Kind::Constant:
        terms.push_back({{"kind", "constant"}, {"height", t.height}});
        break;
      case DataTerm::Kind::Shell: {
        json s = {{"kind", "shell"}, {"center", vec_to_json(t.center)}, {"inner", t.radius}, {"width", t.width}, {"height", t.height}};
        if (std::isfinite(t.outer)) s["outer"] = t.outer;
        terms.push_back(s);
        break;
      }
    }
  }
  return {{"terms", terms}};
}

/// Dimension of the data, or 0 if it is constant.
inline int data_dim(const ExteriorData& g) {
  for (const auto& t : g.terms)
    if (t.kind != DataTerm::Kind::Constant) return t.center.dim();
  return 0;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DomainError("malformed JSON in '" + path + "': " + e.what());
  }
}

struct RunManifest {
  std::string command;
  int n = 2;
  double s = 0.5;
  json domain_spec;
  std::uint64_t seed = 1;
  std::string tool_version = kToolVersion;
  std::string timestamp;
};

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline json to_json(const RunManifest& m) {
  return {{"command", m.command},       {"params", {{"n", m.n}, {"s", m.s}}}, {"domain_spec", m.domain_spec},
          {"seed", m.seed},             {"tool_version", m.tool_version},   {"timestamp", m.timestamp}};
}

inline json to_json(const QuadResult& q) { return {{"value", q.value}, {"err", q.err}}; }

inline json to_json(const WosEstimate& e) {
  return {{"mean", e.mean},   {"stderr", e.stderr}, {"n_paths", e.n_paths}, {"mean_jumps", e.mean_jumps},
          {"seed", e.seed},   {"capped", e.capped}, {"valid", e.valid}};
}

inline json to_json(const MvpCheck& c) {
  return {{"residual", c.residual}, {"u0", c.u0}, {"integral", c.integral}, {"quad_err", c.quad_err}};
}

inline json to_json(const GapCandidate& c) {
  json j = {{"label", c.label}, {"value", c.value}, {"err", c.err}, {"k", c.k}, {"within_upper", c.within_upper}};
  j["lp_objective"] = std::isnan(c.lp_objective) ? json(nullptr) : json(c.lp_objective);
  j["upper_bound"] = std::isnan(c.upper_bound) ? json(nullptr) : json(c.upper_bound);
  return j;
}

inline json to_json(const GapReport& r) {
  json cands = json::array();
  for (const auto& c : r.candidates) cands.push_back(to_json(c));
  json j = {{"kind", to_string(r.kind)},   {"family", to_string(r.family)}, {"lower_bound", r.lower_bound},
            {"lower_err", r.lower_err},    {"witness", r.witness},          {"r", r.r},
            {"mu_gap", r.mu_gap},          {"mu_gap_err", r.mu_gap_err},    {"mu_comp", r.mu_comp},
            {"mu_comp_err", r.mu_comp_err}, {"flagged", r.flagged},         {"candidates", cands}};
  if (r.kind == GapKind::Gcal) {
    // sandwich diagnostics: the bound 2 mu_r(dom \ B_r) against the best value found
    const double ub = 2.0 * r.mu_gap;
    j["upper_bound"] = ub;
    j["upper_over_lower"] = r.lower_bound > 0.0 ? json(ub / r.lower_bound) : json(nullptr);
  }
  return j;
}

inline json to_json(const BoundaryLimitProfile& p) {
  return {{"p", vec_to_json(p.p)},
          {"nu", vec_to_json(p.nu)},
          {"t_grid", p.t_grid},
          {"values", p.values},
          {"errs", p.errs},
          {"extrapolated_limit", p.extrapolated_limit},
          {"limit_err", p.limit_err},
          {"bracket", {{"lower", p.bracket.lower}, {"upper", p.bracket.upper}, {"vacuous_lower", p.bracket.vacuous_lower}}},
          {"closed_form", p.closed_form},
          {"flagged", p.flagged}};
}

inline json to_json(const BallVerdict& v) {
  json pts = json::array();
  for (const auto& p : v.points)
    pts.push_back({{"p", vec_to_json(p.p)}, {"limit", p.limit}, {"err", p.err}, {"matches", p.matches}});
  return {{"verdict", v.consistent ? "consistent-with-ball" : "not-consistent-with-ball"},
          {"target", v.target},
          {"tolerance", v.tolerance},
          {"points", pts},
          {"mu_excess", v.mu_excess},
          {"mu_excess_err", v.mu_excess_err},
          {"caveat", v.caveat}};
}

/// CSV with the manifest as a leading comment line.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const RunManifest& m, const std::vector<std::string>& columns) : os_(os) {
    os_ << "# manifest: " << to_json(m).dump() << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
    os_ << '\n';
    os_ << std::setprecision(17);
  }
  void row(const std::vector<double>& xs) {
    for (std::size_t i = 0; i < xs.size(); ++i) os_ << (i ? "," : "") << xs[i];
    os_ << '\n';
  }

 private:
  std::ostream& os_;
};

}  // namespace fracmvp
