// Command-line front end: problem ingestion, pipeline orchestration, exports.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rotnc/io.hpp"

namespace fs = std::filesystem;
using namespace rotnc;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

struct CliOptions {
  std::string config_path;
  std::string preset;
  std::string centres_text;
  std::string masses_text;
  std::string seq_text;
  std::string nu_list_text;
  std::string orbit_path;
  double p0_angle = 0.0, p1_angle = 0.0;
  bool force = false;
  bool dry_run = false;
  RunConfig cfg;
  // flag presence markers
  bool has_alpha = false, has_h = false, has_nu = false, has_eps = false, has_nup = false;
  double alpha = 1.0, h = 0.0, nu = 0.0, eps = 0.0, nup = 0.0;
  int mesh = -1;
  double delta = -1.0, guard = -1.0, beta_min = -1.0;
  double inner_tol = -1.0, outer_tol = -1.0, junction_tol = -1.0;
  int n_centres = 0;
  long seed = -1;
  std::string out_dir;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

void apply_preset(RunConfig& cfg, const std::string& preset) {
  if (preset == "equilateral3") {
    cfg.alpha = 1.0;
    cfg.centres.clear();
    cfg.masses.assign(3, 2.0 / 3.0);
    for (int k = 0; k < 3; ++k) {
      double th = M_PI / 2.0 + 2.0 * M_PI * k / 3.0;
      cfg.centres.push_back({0.5 * std::cos(th), 0.5 * std::sin(th)});
    }
  } else if (preset == "square4") {
    cfg.alpha = 1.0;
    cfg.centres.clear();
    cfg.masses.assign(4, 0.5);
    for (int k = 0; k < 4; ++k) {
      double th = M_PI / 4.0 + 2.0 * M_PI * k / 4.0;
      cfg.centres.push_back({0.5 * std::cos(th), 0.5 * std::sin(th)});
    }
  } else {
    throw Error("unknown preset: " + preset + " (available: equilateral3, square4)");
  }
}

RunConfig resolve_config(CliOptions& o) {
  RunConfig cfg;
  if (!o.config_path.empty()) cfg = load_config(o.config_path);
  if (!o.preset.empty()) apply_preset(cfg, o.preset);
  if (!o.centres_text.empty()) {
    cfg.centres.clear();
    std::stringstream ss(o.centres_text);
    std::string pair;
    while (std::getline(ss, pair, ';')) {
      auto xy = parse_list(pair);
      if (xy.size() != 2) throw Error("bad --centres entry: " + pair);
      cfg.centres.push_back({xy[0], xy[1]});
    }
  }
  if (!o.masses_text.empty()) cfg.masses = parse_list(o.masses_text);
  if (o.has_alpha) cfg.alpha = o.alpha;
  if (o.has_h) cfg.h = o.h;
  if (o.has_nu) cfg.nu = o.nu;
  if (o.has_eps) cfg.eps = o.eps;
  if (o.has_nup) cfg.nu_prime = o.nup;
  if (!o.seq_text.empty()) {
    cfg.seq.clear();
    std::stringstream ss(o.seq_text);
    std::string tok;
    while (std::getline(ss, tok, ',')) cfg.seq.push_back(tok);
  }
  if (o.mesh > 0) cfg.mesh = o.mesh;
  if (o.delta > 0) cfg.delta = o.delta;
  if (o.guard > 0) cfg.guard = o.guard;
  if (o.beta_min > 0) cfg.beta_min = o.beta_min;
  if (o.inner_tol > 0) cfg.inner_tol = o.inner_tol;
  if (o.outer_tol > 0) cfg.outer_tol = o.outer_tol;
  if (o.junction_tol > 0) cfg.junction_tol = o.junction_tol;
  if (o.seed >= 0) cfg.seed = static_cast<unsigned>(o.seed);
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  return cfg;
}

void ensure_out_dir(const RunConfig& cfg) { fs::create_directories(cfg.out_dir); }

int cmd_rescale(CliOptions& o) {
  RunConfig cfg = resolve_config(o);
  CentreSystem sys = system_from(cfg);
  RescaledProblem p = problem_from(cfg);
  auto [h, nu] = h_nu_from(cfg);
  std::printf("eps      = %.17g\n", p.eps);
  std::printf("nu_prime = %.17g\n", p.nu);
  std::printf("R        = %.17g\n", p.radius);
  std::printf("M1       = %.17g\n", p.phi_floor);
  std::printf("h        = %.17g\n", h);
  std::printf("nu       = %.17g\n", nu);
  (void)sys;
  return kExitPass;
}

int cmd_partitions(CliOptions& o) {
  RunConfig cfg = resolve_config(o);
  int n = o.n_centres > 0 ? o.n_centres : static_cast<int>(cfg.centres.size());
  if (n < 3) throw Error("need --N or a configured problem with N >= 3 centres");
  for (const Partition& p : enumerate_partitions(n))
    std::printf("%-4s %s%s\n", p.name().c_str(), p.sides_text().c_str(),
                p.is_singleton() ? "  (singleton)" : "");
  return kExitPass;
}

int cmd_inner(CliOptions& o) {
  RunConfig cfg = resolve_config(o);
  RescaledProblem p = problem_from(cfg);
  SymbolSequence seq = sequence_from(cfg, p.system.size());
  if (seq.size() != 1) throw Error("inner expects exactly one symbol in --seq");
  GlueConfig gc = glue_config_from(cfg);
  gc.inner.tol = cfg.inner_tol;

  Vec2 p1 = from_polar(p.radius, o.p0_angle), p2 = from_polar(p.radius, o.p1_angle);
  MinimizeResult mr = minimize_inner(p1, p2, ClassSpec::of(seq.symbols[0]), p, gc.inner);
  InnerArc arc = reparametrize(mr, p);

  ensure_out_dir(cfg);
  write_trajectory_csv(cfg.out_dir + "/inner_arc.csv", arc.samples);
  std::printf("objective M = %.17g\n", arc.objective);
  std::printf("length L    = %.17g\n", arc.length);
  std::printf("omega       = %.17g\n", arc.omega);
  std::printf("T           = %.17g\n", arc.duration);
  std::printf("partition   = %s\n", arc.partition.sides_text().c_str());
  std::printf("margin      = %.17g (centre %d)\n", arc.margin.distance, arc.margin.centre);
  std::printf("collision   = %s\n", arc.collision_flag ? "flagged" : "no");
  std::printf("wrote %s\n", (cfg.out_dir + "/inner_arc.csv").c_str());
  return kExitPass;
}

int cmd_outer(CliOptions& o) {
  RunConfig cfg = resolve_config(o);
  RescaledProblem p = problem_from(cfg);
  GlueConfig gc = glue_config_from(cfg);
  Vec2 p0 = from_polar(p.radius, o.p0_angle), p1 = from_polar(p.radius, o.p1_angle);
  OuterArc arc = shoot(p, p0, p1, gc.outer);
  ensure_out_dir(cfg);
  write_trajectory_csv(cfg.out_dir + "/outer_arc.csv", arc.samples);
  std::printf("theta_dot0 = %.17g\n", arc.theta_dot0);
  std::printf("T_ext      = %.17g\n", arc.duration);
  std::printf("defect     = %.3g\n", arc.defect);
  std::printf("jacobi     = %.3g\n", arc.jacobi_drift);
  std::printf("length L   = %.17g\n", arc.length);
  std::printf("wrote %s\n", (cfg.out_dir + "/outer_arc.csv").c_str());
  return kExitPass;
}

int cmd_synthesize(CliOptions& o) {
  RunConfig cfg = resolve_config(o);
  RescaledProblem p = problem_from(cfg);
  SymbolSequence seq = sequence_from(cfg, p.system.size());

  AdmissibilityVerdict adm = symbol_admissibility(seq, p.system.size(), p.system.alpha);
  if (!adm.admissible && !o.force) {
    std::fprintf(stderr, "refused: inadmissible sequence (%s); use --force to override\n",
                 adm.reason.c_str());
    return kExitError;
  }
  if (!adm.admissible)
    std::fprintf(stderr, "warning: forcing an inadmissible sequence (%s)\n", adm.reason.c_str());
  if (o.dry_run) {
    std::printf("sequence accepted: %s\n", adm.reason.c_str());
    return kExitPass;
  }

  GlueConfig gc = glue_config_from(cfg);
  EndpointTuple init = default_endpoints(seq, p);
  MinimizeFResult res = minimize_F(seq, p, init, gc);
  CertificationReport rep = certify(res.orbit, seq, p, verify_config_from(cfg));

  ensure_out_dir(cfg);
  write_orbit_csv(cfg.out_dir + "/orbit_rotating.csv", res.orbit);

  Trajectory rotating;
  double t0 = 0.0;
  for (const Leg& leg : res.orbit.legs) {
    for (const StateSample& s : leg.samples)
      rotating.push_back({t0 + s.t, s.pos, s.vel});
    t0 += leg.duration;
  }
  write_trajectory_csv(cfg.out_dir + "/orbit_inertial.csv", map_to_inertial(rotating, p.nu));
  auto [h, nu] = h_nu_from(cfg);
  write_trajectory_csv(cfg.out_dir + "/orbit_unscaled.csv",
                       unscale_solution(rotating, h, p.system.alpha));
  write_orbit_svg(cfg.out_dir + "/orbit.svg", res.orbit, p);
  std::ofstream rpt(cfg.out_dir + "/report.json");
  rpt << report_to_json(rep, res.orbit);
  rpt.close();

  std::printf("%s", report_summary(rep).c_str());
  std::printf("F: %.17g -> %.17g in %d steps (max mismatch %.3g)\n", res.F_initial, res.F_final,
              res.steps, res.max_mismatch);
  std::printf("outputs in %s\n", cfg.out_dir.c_str());
  return rep.pass() ? kExitPass : kExitFail;
}

int cmd_verify(CliOptions& o) {
  RunConfig cfg = resolve_config(o);
  if (o.orbit_path.empty()) throw Error("verify needs --orbit <csv>");
  RescaledProblem p = problem_from(cfg);
  SymbolSequence seq = sequence_from(cfg, p.system.size());
  GluedOrbit orbit = read_orbit_csv(o.orbit_path);
  orbit.sequence = seq;
  CertificationReport rep = certify(orbit, seq, p, verify_config_from(cfg));
  std::printf("%s", report_summary(rep).c_str());
  ensure_out_dir(cfg);
  std::ofstream rpt(cfg.out_dir + "/verify_report.json");
  rpt << report_to_json(rep, orbit);
  return rep.pass() ? kExitPass : kExitFail;
}

int cmd_study(CliOptions& o) {
  RunConfig cfg = resolve_config(o);
  RescaledProblem p = problem_from(cfg);
  SymbolSequence seq = sequence_from(cfg, p.system.size());
  if (seq.size() != 1) throw Error("study expects exactly one symbol in --seq");

  std::vector<double> nus;
  if (!o.nu_list_text.empty()) {
    nus = parse_list(o.nu_list_text);
  } else {
    double top = p.nu != 0.0 ? p.nu : 0.08;
    for (int m = 0; m <= 5; ++m) nus.push_back(top * std::pow(2.0, -m));
  }

  GlueConfig gc = glue_config_from(cfg);
  Vec2 p1 = from_polar(p.radius, o.p0_angle), p2 = from_polar(p.radius, o.p1_angle);
  ContinuityStudy study =
      continuity_study(p1, p2, ClassSpec::of(seq.symbols[0]), p, nus, gc.inner);

  ensure_out_dir(cfg);
  std::ofstream out(cfg.out_dir + "/study.csv");
  out << "nu,solved,d_h1,gap_objective,gap_fixed,fitted_C\n";
  std::printf("%12s %10s %12s %12s %10s\n", "nu", "d_H1", "gap_obj", "gap_fixed", "C");
  for (const ContinuityRow& r : study.rows) {
    out << r.nu << ',' << r.solved << ',' << r.d_h1 << ',' << r.gap_objective << ','
        << r.gap_fixed << ',' << r.fitted_C << '\n';
    std::printf("%12.6g %10.3e %12.3e %12.3e %10.4g%s\n", r.nu, r.d_h1, r.gap_objective,
                r.gap_fixed, r.fitted_C, r.solved ? "" : "  (failed)");
  }
  std::printf("monotone d: %s, monotone gap: %s, stable C: %s, final d: %.3e\n",
              study.monotone_d ? "yes" : "NO", study.monotone_gap ? "yes" : "NO",
              study.stable_C ? "yes" : "NO", study.final_d);
  std::printf("study: %s\n", study.pass ? "PASS" : "FAIL");
  return study.pass ? kExitPass : kExitFail;
}

int cmd_plot(CliOptions& o) {
  RunConfig cfg = resolve_config(o);
  if (o.orbit_path.empty()) throw Error("plot needs --orbit <csv>");
  RescaledProblem p = problem_from(cfg);
  GluedOrbit orbit = read_orbit_csv(o.orbit_path);
  ensure_out_dir(cfg);
  std::string out = cfg.out_dir + "/orbit.svg";
  write_orbit_svg(out, orbit, p);
  std::printf("wrote %s\n", out.c_str());
  return kExitPass;
}

void add_common(CLI::App* app, CliOptions& o) {
  app->set_help_flag("--help", "print help");
  app->add_option("--config", o.config_path, "JSON config file");
  app->add_option("--preset", o.preset, "equilateral3 or square4");
  app->add_option("--centres", o.centres_text, "x,y;x,y;... (overrides config)");
  app->add_option("--masses", o.masses_text, "m1,m2,...");
  app->add_option("--alpha", o.alpha)->each([&o](const std::string&) { o.has_alpha = true; });
  app->add_option("--h", o.h)->each([&o](const std::string&) { o.has_h = true; });
  app->add_option("--nu", o.nu)->each([&o](const std::string&) { o.has_nu = true; });
  app->add_option("--eps", o.eps)->each([&o](const std::string&) { o.has_eps = true; });
  app->add_option("--nu-prime", o.nup)->each([&o](const std::string&) { o.has_nup = true; });
  app->add_option("--seq", o.seq_text, "comma list: P2,P3 / G1,G2 / 12|34,13|24");
  app->add_option("--mesh", o.mesh, "inner mesh size");
  app->add_option("--delta", o.delta, "outer-pair gap bound, fraction of R");
  app->add_option("--guard", o.guard, "guard radius, fraction of R");
  app->add_option("--beta-min", o.beta_min, "collision verdict threshold, fraction of R");
  app->add_option("--inner-tol", o.inner_tol);
  app->add_option("--outer-tol", o.outer_tol);
  app->add_option("--junction-tol", o.junction_tol);
  app->add_option("--seed", o.seed);
  app->add_option("--out", o.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"broken-geodesic periodic orbits of the rotating N-centre problem"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  CliOptions o;

  CLI::App* rescale_cmd = app.add_subcommand("rescale", "map (h, nu) <-> (eps, nu'), print R and M1");
  CLI::App* partitions_cmd = app.add_subcommand("partitions", "list the partition alphabet");
  partitions_cmd->add_option("--N", o.n_centres, "number of centres");
  CLI::App* inner_cmd = app.add_subcommand("inner", "solve one inner arc");
  CLI::App* outer_cmd = app.add_subcommand("outer", "shoot one outer arc");
  CLI::App* synth_cmd = app.add_subcommand("synthesize", "build and certify a periodic orbit");
  synth_cmd->add_flag("--force", o.force, "run an inadmissible sequence anyway");
  synth_cmd->add_flag("--dry-run", o.dry_run, "validate the request and stop");
  CLI::App* verify_cmd = app.add_subcommand("verify", "re-certify an orbit CSV");
  verify_cmd->add_option("--orbit", o.orbit_path, "orbit CSV path");
  CLI::App* study_cmd = app.add_subcommand("study", "inner-minimizer continuity study in nu");
  study_cmd->add_option("--nu-list", o.nu_list_text, "comma list, descending to 0");
  CLI::App* plot_cmd = app.add_subcommand("plot", "render an orbit CSV to SVG");
  plot_cmd->add_option("--orbit", o.orbit_path, "orbit CSV path");

  for (CLI::App* sub : {rescale_cmd, partitions_cmd, inner_cmd, outer_cmd, synth_cmd, verify_cmd,
                        study_cmd, plot_cmd})
    add_common(sub, o);
  for (CLI::App* sub : {inner_cmd, outer_cmd, study_cmd}) {
    sub->add_option("--theta0", o.p0_angle, "first endpoint angle (rad)");
    sub->add_option("--theta1", o.p1_angle, "second endpoint angle (rad)");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (rescale_cmd->parsed()) return cmd_rescale(o);
    if (partitions_cmd->parsed()) return cmd_partitions(o);
    if (inner_cmd->parsed()) return cmd_inner(o);
    if (outer_cmd->parsed()) return cmd_outer(o);
    if (synth_cmd->parsed()) return cmd_synthesize(o);
    if (verify_cmd->parsed()) return cmd_verify(o);
    if (study_cmd->parsed()) return cmd_study(o);
    if (plot_cmd->parsed()) return cmd_plot(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
