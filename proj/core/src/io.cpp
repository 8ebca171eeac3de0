#include "rotnc/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace rotnc {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json j = json::parse(text);
  RunConfig cfg;
  if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
  if (j.contains("centres"))
    for (const auto& c : j["centres"]) cfg.centres.push_back({c[0].get<double>(), c[1].get<double>()});
  if (j.contains("masses"))
    for (const auto& m : j["masses"]) cfg.masses.push_back(m.get<double>());
  if (j.contains("h")) cfg.h = j["h"].get<double>();
  if (j.contains("nu")) cfg.nu = j["nu"].get<double>();
  if (j.contains("eps")) cfg.eps = j["eps"].get<double>();
  if (j.contains("nu_prime")) cfg.nu_prime = j["nu_prime"].get<double>();
  if (j.contains("seq"))
    for (const auto& s : j["seq"]) cfg.seq.push_back(s.get<std::string>());
  if (j.contains("mesh")) cfg.mesh = j["mesh"].get<int>();
  if (j.contains("inner_tol")) cfg.inner_tol = j["inner_tol"].get<double>();
  if (j.contains("outer_tol")) cfg.outer_tol = j["outer_tol"].get<double>();
  if (j.contains("junction_tol")) cfg.junction_tol = j["junction_tol"].get<double>();
  if (j.contains("delta")) cfg.delta = j["delta"].get<double>();
  if (j.contains("guard")) cfg.guard = j["guard"].get<double>();
  if (j.contains("beta_min")) cfg.beta_min = j["beta_min"].get<double>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<unsigned>();
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_to_text(const RunConfig& cfg) {
  json j;
  j["alpha"] = cfg.alpha;
  json cs = json::array();
  for (const Vec2& c : cfg.centres) cs.push_back({c.x, c.y});
  j["centres"] = cs;
  j["masses"] = cfg.masses;
  if (cfg.h) j["h"] = *cfg.h;
  if (cfg.nu) j["nu"] = *cfg.nu;
  if (cfg.eps) j["eps"] = *cfg.eps;
  if (cfg.nu_prime) j["nu_prime"] = *cfg.nu_prime;
  j["seq"] = cfg.seq;
  j["mesh"] = cfg.mesh;
  j["inner_tol"] = cfg.inner_tol;
  j["outer_tol"] = cfg.outer_tol;
  j["junction_tol"] = cfg.junction_tol;
  j["delta"] = cfg.delta;
  j["guard"] = cfg.guard;
  j["beta_min"] = cfg.beta_min;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  return j.dump(2);
}

CentreSystem system_from(const RunConfig& cfg) {
  return CentreSystem::create(cfg.alpha, cfg.centres, cfg.masses);
}

RescaledProblem problem_from(const RunConfig& cfg) {
  CentreSystem sys = system_from(cfg);
  if (cfg.eps) return make_rescaled(sys, *cfg.eps, cfg.nu_prime.value_or(0.0));
  if (cfg.h) return rescale(sys, *cfg.h, cfg.nu.value_or(0.0));
  throw Error("config needs either (h, nu) or (eps, nu_prime)");
}

std::pair<double, double> h_nu_from(const RunConfig& cfg) {
  if (cfg.h) return {*cfg.h, cfg.nu.value_or(0.0)};
  CentreSystem sys = system_from(cfg);
  return rescale_inverse(problem_from(cfg), sys);
}

namespace {

SymbolSequence parse_symbols(const std::vector<std::string>& tokens, int n) {
  SymbolSequence seq;
  std::vector<GSymbol> gblocks;
  bool has_g = false, has_p = false;
  auto partitions = enumerate_partitions(n);
  for (const std::string& tok : tokens) {
    if (tok == "G1" || tok == "G2") {
      has_g = true;
      gblocks.push_back(tok == "G1" ? GSymbol::G1 : GSymbol::G2);
      continue;
    }
    has_p = true;
    if (tok.size() >= 2 && (tok[0] == 'P' || tok[0] == 'p')) {
      int label = std::stoi(tok.substr(1));
      bool found = false;
      for (const Partition& p : partitions)
        if (p.label == label) {
          seq.symbols.push_back(p);
          found = true;
          break;
        }
      if (!found) throw Error("unknown partition label: " + tok);
    } else if (tok.find('|') != std::string::npos) {
      std::vector<int> side;
      for (char c : tok.substr(0, tok.find('|'))) {
        if (c < '1' || c > '9') throw Error("bad partition spec: " + tok);
        side.push_back(c - '0');
      }
      seq.symbols.push_back(make_partition(n, side));
    } else {
      throw Error("cannot parse symbol: " + tok);
    }
  }
  if (has_g && has_p) throw Error("cannot mix G-blocks and explicit partitions");
  if (has_g) {
    if (n != 3) throw Error("G-blocks require N = 3");
    return compose(gblocks);
  }
  return seq;
}

}  // namespace

SymbolSequence sequence_from(const RunConfig& cfg, int n) {
  if (cfg.seq.empty()) throw Error("config carries no symbol sequence");
  return parse_symbols(cfg.seq, n);
}

GlueConfig glue_config_from(const RunConfig& cfg) {
  GlueConfig g;
  g.delta_factor = cfg.delta;
  g.junction_tol = cfg.junction_tol;
  g.inner.mesh = cfg.mesh;
  g.inner.tol = std::min(cfg.inner_tol, 3e-9);
  g.inner.guard_factor = cfg.guard;
  g.inner.collision_factor = cfg.beta_min;
  g.inner.seed = cfg.seed;
  g.outer.integrator.tol = cfg.outer_tol;
  return g;
}

VerifyConfig verify_config_from(const RunConfig& cfg) {
  VerifyConfig v;
  v.beta_min_factor = cfg.beta_min;
  v.junction_tang_tol = cfg.junction_tol;
  v.delta_factor = cfg.delta;
  return v;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "t,x,y,vx,vy\n";
  for (const StateSample& s : traj)
    out << fmt_double(s.t) << ',' << fmt_double(s.pos.x) << ',' << fmt_double(s.pos.y) << ','
        << fmt_double(s.vel.x) << ',' << fmt_double(s.vel.y) << '\n';
}

namespace {

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path, size_t min_cols,
                                                    std::string* header = nullptr) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1) {
      if (header) *header = line;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < min_cols)
      throw Error(path + ": malformed row at line " + std::to_string(lineno));
    rows.push_back(std::move(cells));
  }
  return rows;
}

double parse_cell(const std::string& s, const std::string& path) {
  try {
    return std::stod(s);
  } catch (...) {
    throw Error(path + ": cannot parse number '" + s + "'");
  }
}

}  // namespace

Trajectory read_trajectory_csv(const std::string& path) {
  Trajectory traj;
  for (const auto& row : read_csv_rows(path, 5))
    traj.push_back({parse_cell(row[0], path),
                    {parse_cell(row[1], path), parse_cell(row[2], path)},
                    {parse_cell(row[3], path), parse_cell(row[4], path)}});
  return traj;
}

void write_orbit_csv(const std::string& path, const GluedOrbit& orbit) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "t,x,y,vx,vy,leg_index,leg_kind\n";
  double t0 = 0.0;
  for (size_t i = 0; i < orbit.legs.size(); ++i) {
    const Leg& leg = orbit.legs[i];
    for (const StateSample& s : leg.samples)
      out << fmt_double(t0 + s.t) << ',' << fmt_double(s.pos.x) << ',' << fmt_double(s.pos.y)
          << ',' << fmt_double(s.vel.x) << ',' << fmt_double(s.vel.y) << ',' << i << ','
          << (leg.kind == LegKind::Outer ? "outer" : "inner") << '\n';
    t0 += leg.duration;
  }
}

GluedOrbit read_orbit_csv(const std::string& path) {
  GluedOrbit orbit;
  int current = -1;
  double leg_t0 = 0.0;
  for (const auto& row : read_csv_rows(path, 7)) {
    int idx = static_cast<int>(parse_cell(row[5], path));
    if (idx != current) {
      if (!orbit.legs.empty()) {
        Leg& prev = orbit.legs.back();
        prev.duration = prev.samples.back().t;
        prev.p_from = prev.samples.front().pos;
        prev.p_to = prev.samples.back().pos;
        prev.v_start = prev.samples.front().vel;
        prev.v_end = prev.samples.back().vel;
      }
      Leg leg;
      leg.kind = row[6] == "outer" ? LegKind::Outer : LegKind::Inner;
      orbit.legs.push_back(std::move(leg));
      current = idx;
      leg_t0 = parse_cell(row[0], path);
    }
    StateSample s;
    s.t = parse_cell(row[0], path) - leg_t0;
    s.pos = {parse_cell(row[1], path), parse_cell(row[2], path)};
    s.vel = {parse_cell(row[3], path), parse_cell(row[4], path)};
    orbit.legs.back().samples.push_back(s);
  }
  if (orbit.legs.empty()) throw Error(path + ": no samples");
  Leg& last = orbit.legs.back();
  last.duration = last.samples.back().t;
  last.p_from = last.samples.front().pos;
  last.p_to = last.samples.back().pos;
  last.v_start = last.samples.front().vel;
  last.v_end = last.samples.back().vel;

  double t = 0.0;
  for (Leg& leg : orbit.legs) {
    if (leg.kind == LegKind::Outer) {
      leg.max_radius = 0.0;
      leg.max_speed = 0.0;
      for (const StateSample& s : leg.samples) {
        leg.max_radius = std::max(leg.max_radius, norm(s.pos));
        leg.max_speed = std::max(leg.max_speed, norm(s.vel));
      }
    }
    t += leg.duration;
    orbit.junction_times.push_back(t);
  }
  orbit.period = t;
  const int L = static_cast<int>(orbit.legs.size());
  for (int k = 0; k < L; ++k) {
    const Leg& in = orbit.legs[(k - 1 + L) % L];
    const Leg& out = orbit.legs[k];
    Vec2 dv = in.v_end - out.v_start;
    orbit.junction_tangential.push_back(dot(dv, rot90(normalized(out.p_from))) / std::sqrt(2.0));
    orbit.junction_dv.push_back(norm(dv));
  }
  return orbit;
}

std::string report_to_json(const CertificationReport& rep, const GluedOrbit& orbit) {
  json j;
  j["verdict"] = rep.pass() ? "PASS" : "FAIL";
  j["jacobi_drift_legs"] = rep.jacobi_drift_legs;
  j["jacobi_drift_orbit"] = rep.jacobi_drift_orbit;
  j["crossings"] = rep.crossings;
  j["expected_crossings"] = rep.expected_crossings;
  j["min_transversal_speed"] = rep.min_transversal_speed;
  j["min_collision_margin"] = rep.min_collision_margin;
  j["delta"] = rep.delta;
  j["outer_gaps"] = rep.outer_gaps;
  j["junction_tangential"] = rep.junction_tangential;
  j["junction_dv"] = rep.junction_dv;
  j["outer_time_low"] = rep.outer_time_low;
  j["outer_time_high"] = rep.outer_time_high;
  j["brake_time"] = rep.brake_time;
  j["period"] = orbit.period;
  json checks;
  checks["jacobi"] = rep.pass_jacobi;
  checks["crossings"] = rep.pass_crossings;
  checks["partitions"] = rep.pass_partitions;
  checks["margins"] = rep.pass_margins;
  checks["junctions"] = rep.pass_junctions;
  checks["proximity"] = rep.pass_proximity;
  checks["confinement"] = rep.pass_confinement;
  checks["time_bounds"] = rep.pass_time_bounds;
  j["checks"] = checks;
  json passages = json::array();
  for (const PassageCheck& pc : rep.passages) {
    json p;
    p["leg"] = pc.leg;
    p["requested"] = pc.requested;
    p["realized"] = pc.realized;
    p["ok"] = pc.ok;
    p["margin"] = pc.margin;
    p["nearest_centre"] = pc.nearest_centre;
    p["collision_flag"] = pc.collision_flag;
    passages.push_back(p);
  }
  j["passages"] = passages;
  json legs = json::array();
  for (const Leg& leg : orbit.legs) {
    json l;
    l["kind"] = leg.kind == LegKind::Outer ? "outer" : "inner";
    l["duration"] = leg.duration;
    l["length"] = leg.length;
    legs.push_back(l);
  }
  j["legs"] = legs;
  return j.dump(2);
}

std::string report_summary(const CertificationReport& rep) {
  std::ostringstream os;
  os << "verdict: " << (rep.pass() ? "PASS" : "FAIL") << '\n';
  os << "  jacobi drift (legs/orbit): " << rep.jacobi_drift_legs << " / "
     << rep.jacobi_drift_orbit << (rep.pass_jacobi ? "  ok" : "  FAIL") << '\n';
  os << "  crossings: " << rep.crossings << " of " << rep.expected_crossings
     << (rep.pass_crossings ? "  ok" : "  FAIL") << '\n';
  os << "  partitions: " << (rep.pass_partitions ? "ok" : "FAIL");
  for (const PassageCheck& pc : rep.passages)
    os << "  [" << pc.requested << " -> " << pc.realized << "]";
  os << '\n';
  os << "  min collision margin: " << rep.min_collision_margin
     << (rep.pass_margins ? "  ok" : "  FAIL") << '\n';
  double worst_tang = 0.0, worst_dv = 0.0;
  for (double t : rep.junction_tangential) worst_tang = std::max(worst_tang, std::abs(t));
  for (double d : rep.junction_dv) worst_dv = std::max(worst_dv, d);
  os << "  junctions: max tangential " << worst_tang << ", max |dv| " << worst_dv
     << (rep.pass_junctions ? "  ok" : "  FAIL") << '\n';
  os << "  outer gaps vs delta=" << rep.delta << (rep.pass_proximity ? "  ok" : "  FAIL")
     << '\n';
  os << "  outer times [" << rep.outer_time_low << ", " << rep.outer_time_high
     << "] vs brake " << rep.brake_time << (rep.pass_time_bounds ? "  ok" : "  FAIL") << '\n';
  os << "  confinement: " << (rep.pass_confinement ? "ok" : "FAIL") << '\n';
  return os.str();
}

namespace {

void svg_write(const std::string& path, const std::vector<std::vector<Vec2>>& curves,
               const RescaledProblem& problem) {
  const double R = problem.radius;
  double lo_x = -1.2 * R, hi_x = 1.2 * R, lo_y = -1.2 * R, hi_y = 1.2 * R;
  for (const auto& c : curves)
    for (const Vec2& p : c) {
      lo_x = std::min(lo_x, p.x - 0.1 * R);
      hi_x = std::max(hi_x, p.x + 0.1 * R);
      lo_y = std::min(lo_y, p.y - 0.1 * R);
      hi_y = std::max(hi_y, p.y + 0.1 * R);
    }
  const double W = 800.0;
  const double scale = W / std::max(hi_x - lo_x, hi_y - lo_y);
  const double H = (hi_y - lo_y) * scale;
  auto X = [&](double x) { return (x - lo_x) * scale; };
  auto Y = [&](double y) { return H - (y - lo_y) * scale; };

  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt_double(W) << "\" height=\""
      << fmt_double(H) << "\" viewBox=\"0 0 " << fmt_double(W) << ' ' << fmt_double(H)
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<circle cx=\"" << fmt_double(X(0)) << "\" cy=\"" << fmt_double(Y(0)) << "\" r=\""
      << fmt_double(R * scale)
      << "\" fill=\"none\" stroke=\"#888888\" stroke-dasharray=\"6,4\"/>\n";
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  int ci = 0;
  for (const auto& curve : curves) {
    out << "<polyline fill=\"none\" stroke=\"" << colors[ci % 4]
        << "\" stroke-width=\"1.2\" points=\"";
    for (const Vec2& p : curve) out << fmt_double(X(p.x)) << ',' << fmt_double(Y(p.y)) << ' ';
    out << "\"/>\n";
    ++ci;
  }
  for (const Vec2& c : problem.system.centres)
    out << "<circle cx=\"" << fmt_double(X(c.x)) << "\" cy=\"" << fmt_double(Y(c.y))
        << "\" r=\"3\" fill=\"black\"/>\n";
  out << "</svg>\n";
}

}  // namespace

void write_orbit_svg(const std::string& path, const GluedOrbit& orbit,
                     const RescaledProblem& problem) {
  std::vector<std::vector<Vec2>> curves;
  std::vector<Vec2> curve;
  for (const Leg& leg : orbit.legs)
    for (const StateSample& s : leg.samples) curve.push_back(s.pos);
  curves.push_back(std::move(curve));
  svg_write(path, curves, problem);
}

void write_trajectory_svg(const std::string& path, const std::vector<Trajectory>& curves,
                          const RescaledProblem& problem) {
  std::vector<std::vector<Vec2>> cs;
  for (const Trajectory& t : curves) {
    std::vector<Vec2> c;
    for (const StateSample& s : t) c.push_back(s.pos);
    cs.push_back(std::move(c));
  }
  svg_write(path, cs, problem);
}

}  // namespace rotnc
