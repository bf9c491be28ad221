// fracmvp: command-line front end.
//
// Exit codes: 0 success, 2 input error, 3 numerical-condition error, 4 statistical-quality error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fracmvp/fracmvp.hpp"

using namespace fracmvp;

namespace {

struct Common {
  std::optional<int> n;
  double s = 0.5;
  std::uint64_t seed = 1;
  std::int64_t paths = 100000;
  std::string domain_file;
  std::string out_file;
  int radial_nodes = 64;
  int angular_nodes = 128;
};

void add_common(CLI::App* c, Common& o, bool need_domain = true) {
  c->add_option("--n", o.n, "dimension (defaults to the domain's)");
  c->add_option("--s", o.s, "fractional order in (0,1)")->check(CLI::Range(1e-6, 1.0 - 1e-6));
  c->add_option("--seed", o.seed, "random seed");
  c->add_option("--paths", o.paths, "Monte Carlo paths")->check(CLI::PositiveNumber);
  auto* d = c->add_option("--domain", o.domain_file, "domain JSON file");
  if (need_domain) d->required();
  c->add_option("--out", o.out_file, "write the JSON result here instead of stdout");
  c->add_option("--radial-nodes", o.radial_nodes, "radial quadrature nodes")->check(CLI::Range(4, 4096));
  c->add_option("--angular-nodes", o.angular_nodes, "angular quadrature nodes")->check(CLI::Range(4, 1 << 20));
}

struct Loaded {
  FracParams prm;
  Domain dom;
  RunManifest man;
};

Loaded load(const std::string& command, const Common& o) {
  const json dj = read_json_file(o.domain_file);
  Loaded L{{}, domain_from_json(dj), {}};
  const int n = dim(L.dom);
  if (o.n && *o.n != n) throw DomainError("--n does not match the domain dimension " + std::to_string(n));
  L.prm = calibrate_constant(n, o.s);
  L.man = {command, n, o.s, dj, o.seed, kToolVersion, utc_timestamp()};
  return L;
}

ExteriorQuadScheme scheme(const Common& o) {
  ExteriorQuadScheme q;
  q.radial_nodes = o.radial_nodes;
  q.angular_nodes = o.angular_nodes;
  return q;
}

WosConfig wos_config(const Common& o) {
  WosConfig w;
  w.n_paths = o.paths;
  w.seed = o.seed;
  return w;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> xs;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      xs.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw DomainError(std::string(what) + ": cannot parse '" + item + "' as a number");
    }
  }
  if (xs.empty()) throw DomainError(std::string(what) + ": empty list");
  return xs;
}

Vec parse_point(const std::string& s, int n, const char* what) {
  const auto xs = parse_list(s, what);
  if (static_cast<int>(xs.size()) != n) throw DomainError(std::string(what) + ": expected " + std::to_string(n) + " coordinates");
  return Vec::from(xs);
}

void emit(const Common& o, const RunManifest& man, const json& result) {
  const json j = {{"manifest", to_json(man)}, {"result", result}};
  if (o.out_file.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::ofstream f(o.out_file);
    if (!f) throw DomainError("cannot write '" + o.out_file + "'");
    f << j.dump(2) << '\n';
  }
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DomainError("cannot write '" + path + "'");
  return f;
}

// ---- mvp

struct MvpArgs {
  Common c;
  std::string data_file, radii = "0.3,0.7,1.0";
  double tol = 1e-4;
};

int cmd_mvp(const MvpArgs& a) {
  Loaded L = load("mvp", a.c);
  const auto ball = detail::single_ball(L.dom);
  if (!ball || norm(ball->center) > 1e-12 * ball->radius)
    throw DomainError("mvp: the domain must be a ball centred at the origin");
  const ExteriorData g = data_from_json(read_json_file(a.data_file));
  if (const int dn = data_dim(g); dn != 0 && dn != L.prm.n) throw DomainError("mvp: data dimension does not match");
  for (const auto& t : g.terms)
    if (t.kind == DataTerm::Kind::Bump) require_support_outside(L.dom, t, "mvp");
  const auto radii = parse_list(a.radii, "--radii");
  for (double r : radii)
    if (!(r > 0.0) || r > ball->radius * (1.0 + 1e-12))
      throw DomainError("mvp: radius " + std::to_string(r) + " exceeds the inradius " + std::to_string(ball->radius));
  const ExteriorQuadScheme sch = scheme(a.c);
  const Field u = poisson_field(L.prm, ball->radius, g, sch);
  json rows = json::array();
  bool ok = true;
  std::fprintf(stderr, "%8s %16s %16s %12s\n", "r", "u(0)", "integral", "residual");
  for (double r : radii) {
    const MvpCheck c = verify_mvp(L.prm, L.dom, u, r, sch, &g);
    std::fprintf(stderr, "%8.4f %16.10f %16.10f %12.3e\n", r, c.u0, c.integral, c.residual);
    json row = to_json(c);
    row["r"] = r;
    row["pass"] = c.residual <= a.tol;
    ok = ok && c.residual <= a.tol;
    rows.push_back(row);
  }
  L.man.seed = 0;  // deterministic
  emit(a.c, L.man, {{"tol", a.tol}, {"data", data_to_json(g)}, {"rows", rows}, {"pass", ok}});
  return ok ? kExitOk : kExitNumerical;
}

// ---- gap

struct GapArgs {
  Common c;
  std::string kind = "G", family = "touch-point", sweep;
  int steps = 4, directions = 12, ladder_steps = 1;
  double r = 1.0, fillet = 0.25;
  std::int64_t grid_paths = 1000;
  std::string csv;
};

int cmd_gap(const GapArgs& a) {
  const GapKind kind = parse_gap_kind(a.kind);
  GapConfig cfg;
  cfg.wos = wos_config(a.c);
  cfg.quad = scheme(a.c);
  cfg.grid_paths = a.grid_paths;
  if (!a.sweep.empty()) {
    if (kind != GapKind::Gstar) throw DomainError("--sweep-delta applies to --kind Gstar");
    const int n = a.c.n.value_or(2);
    const FracParams prm = calibrate_constant(n, a.c.s);
    const auto deltas = parse_list(a.sweep, "--sweep-delta");
    const auto rows = slab_blowup_experiment(prm, a.r, deltas, cfg, a.ladder_steps, a.fillet);
    RunManifest man{"gap --sweep-delta", n, a.c.s, {{"type", "slab_complement"}, {"r", a.r}, {"dim", n}, {"fillet", a.fillet}, {"delta", deltas}}, a.c.seed, kToolVersion, utc_timestamp()};
    auto write = [&](std::ostream& os) {
      CsvWriter w(os, man, {"delta", "mu_comp", "target_bound", "best_witness_value", "stderr"});
      for (const auto& r : rows) w.row({r.delta, r.mu_comp, r.target_bound, r.best_witness_value, r.stderr});
    };
    if (a.csv.empty()) {
      write(std::cout);
    } else {
      auto f = open_csv(a.csv);
      write(f);
    }
    return kExitOk;
  }
  if (a.c.domain_file.empty()) throw DomainError("gap: --domain is required unless --sweep-delta is given");
  Loaded L = load("gap", a.c);
  WitnessFamily fam{parse_family(a.family), a.steps, a.directions};
  const GapReport rep = estimate_gap_lower_bound(kind, L.prm, L.dom, fam, cfg);
  emit(a.c, L.man, to_json(rep));
  return kExitOk;
}

// ---- wos

struct WosArgs {
  Common c;
  std::string data_file, point;
};

int cmd_wos(const WosArgs& a) {
  Loaded L = load("wos", a.c);
  const ExteriorData g = data_from_json(read_json_file(a.data_file));
  if (const int dn = data_dim(g); dn != 0 && dn != L.prm.n) throw DomainError("wos: data dimension does not match");
  const Vec x = a.point.empty() ? Vec(L.prm.n) : parse_point(a.point, L.prm.n, "--point");
  if (!contains(L.dom, x)) throw DomainError("wos: the start point must lie inside the domain");
  const WosEstimate e = wos_solve(L.prm, L.dom, g, x, wos_config(a.c));
  emit(a.c, L.man, {{"x", vec_to_json(x)}, {"estimate", to_json(e)}});
  if (!e.valid) throw StatisticalError("wos: too many walks hit the jump cap");
  return kExitOk;
}

// ---- limit

struct LimitArgs {
  Common c;
  std::string point, x0, t_grid, norm = "weighted", csv;
};

int cmd_limit(const LimitArgs& a) {
  Loaded L = load("limit", a.c);
  const int n = L.prm.n;
  const Vec origin(n);
  const Vec x0 = a.x0.empty() ? origin : parse_point(a.x0, n, "--x0");
  Vec p;
  if (a.point.empty()) {
    const auto iv = ray_intervals(L.dom, origin, Vec::axis(n, 0));
    if (iv.empty()) throw DomainError("limit: the origin is not inside the domain; give --point");
    p = Vec::axis(n, 0, iv.front().second);
  } else {
    p = parse_point(a.point, n, "--point");
    if (std::abs(signed_dist(L.dom, p)) > 1e-9) throw DomainError("limit: --point must lie on the boundary");
  }
  const bool ball = detail::single_ball(L.dom).has_value();
  const auto ts = parse_list(a.t_grid.empty() ? (ball ? "0.01,0.001,0.0001" : "0.1,0.05,0.025") : a.t_grid, "--t-grid");
  LimitConfig lc;
  if (a.norm == "weighted") lc.norm = ProfileNorm::WeightedDist;
  else if (a.norm == "dist") lc.norm = ProfileNorm::Dist;
  else throw DomainError("--norm must be 'weighted' or 'dist'");
  lc.wos = wos_config(a.c);
  const BoundaryLimitProfile prof = boundary_profile(L.prm, L.dom, x0, p, ts, lc);
  if (!a.csv.empty()) {
    auto f = open_csv(a.csv);
    CsvWriter w(f, L.man, {"t", "psi", "stderr", "bracket_lo", "bracket_hi"});
    for (std::size_t i = 0; i < ts.size(); ++i)
      w.row({ts[i], prof.values[i], prof.errs[i], prof.bracket.lower, prof.bracket.upper});
  }
  emit(a.c, L.man, to_json(prof));
  return prof.flagged ? kExitStatistical : kExitOk;
}

// ---- cfrak

int cmd_cfrak(const Common& c) {
  Loaded L = load("cfrak", c);
  const QuadResult q = c_frak(L.prm, L.dom, scheme(c));
  L.man.seed = 0;
  emit(c, L.man, {{"c_frak", q.value}, {"err", q.err}});
  return kExitOk;
}

// ---- detect

struct DetectArgs {
  Common c;
  std::string t_grid;
  int extra = 8;
};

int cmd_detect(const DetectArgs& a) {
  Loaded L = load("detect", a.c);
  DetectConfig dc;
  dc.limit.wos = wos_config(a.c);
  dc.quad = scheme(a.c);
  dc.extra_points = a.extra;
  if (!a.t_grid.empty()) dc.t_grid = parse_list(a.t_grid, "--t-grid");
  const BallVerdict v = ball_detect(L.prm, L.dom, dc);
  emit(a.c, L.man, to_json(v));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean value formulas for the fractional Laplacian: checks and experiments"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  MvpArgs mvp;
  auto* c_mvp = app.add_subcommand("mvp", "check the mean value identity for a Poisson extension on a ball");
  add_common(c_mvp, mvp.c);
  c_mvp->add_option("--data", mvp.data_file, "exterior data JSON file")->required();
  c_mvp->add_option("--radii", mvp.radii, "comma-separated radii");
  c_mvp->add_option("--tol", mvp.tol, "residual tolerance");

  GapArgs gap;
  auto* c_gap = app.add_subcommand("gap", "lower bounds for the mean value gaps");
  add_common(c_gap, gap.c, false);
  c_gap->add_option("--kind", gap.kind, "G, Gstar or Gcal");
  c_gap->add_option("--family", gap.family, "touch-point, far-bump-ladder or lp-bounded");
  c_gap->add_option("--steps", gap.steps, "witnesses per family")->check(CLI::Range(1, 12));
  c_gap->add_option("--directions", gap.directions, "lp basis bumps per layer")->check(CLI::Range(1, 256));
  c_gap->add_option("--grid-paths", gap.grid_paths, "paths per lp constraint point")->check(CLI::PositiveNumber);
  c_gap->add_option("--sweep-delta", gap.sweep, "comma-separated decreasing slab widths (Gstar)");
  c_gap->add_option("--r", gap.r, "ball radius of the slab domains");
  c_gap->add_option("--fillet", gap.fillet, "fillet radius of the slab domains, in units of delta");
  c_gap->add_option("--ladder-steps", gap.ladder_steps, "far-bump witnesses per slab (0 = none)");
  c_gap->add_option("--csv", gap.csv, "sweep CSV output file");

  WosArgs wos;
  auto* c_wos = app.add_subcommand("wos", "walk-on-spheres estimate of the s-harmonic extension");
  add_common(c_wos, wos.c);
  c_wos->add_option("--data", wos.data_file, "exterior data JSON file")->required();
  c_wos->add_option("--point", wos.point, "start point, comma-separated (default: origin)");

  LimitArgs lim;
  auto* c_lim = app.add_subcommand("limit", "boundary limit profile of the Poisson kernel");
  add_common(c_lim, lim.c);
  c_lim->add_option("--point", lim.point, "boundary point (default: where the ray along e_1 exits)");
  c_lim->add_option("--x0", lim.x0, "interior pole (default: origin)");
  c_lim->add_option("--t-grid", lim.t_grid, "comma-separated decreasing distances");
  c_lim->add_option("--norm", lim.norm, "weighted (|q|^n dist^s) or dist (dist^s)");
  c_lim->add_option("--csv", lim.csv, "profile CSV output file");

  Common cf;
  auto* c_cf = app.add_subcommand("cfrak", "total mass of the Poisson-like weight over the complement");
  add_common(c_cf, cf);

  DetectArgs det;
  auto* c_det = app.add_subcommand("detect", "test whether boundary limits single out the unit ball");
  add_common(c_det, det.c);
  c_det->add_option("--t-grid", det.t_grid, "comma-separated decreasing distances");
  c_det->add_option("--points", det.extra, "extra boundary points")->check(CLI::Range(0, 64));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }
  try {
    if (*c_mvp) return cmd_mvp(mvp);
    if (*c_gap) return cmd_gap(gap);
    if (*c_wos) return cmd_wos(wos);
    if (*c_lim) return cmd_limit(lim);
    if (*c_cf) return cmd_cfrak(cf);
    if (*c_det) return cmd_detect(det);
  } catch (const DomainError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const StatisticalError& e) {
    std::cerr << "statistical error: " << e.what() << '\n';
    return kExitStatistical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
