#include "rotnc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rotnc/outer.hpp"

namespace rotnc {

CertificationReport certify(const GluedOrbit& orbit, const SymbolSequence& seq,
                            const RescaledProblem& problem, const VerifyConfig& cfg) {
  CertificationReport rep;
  const double R = problem.radius;
  const int L = static_cast<int>(orbit.legs.size());
  rep.expected_crossings = L;  // one transversal crossing per junction
  rep.delta = cfg.delta_factor * R;
  rep.brake_time = brake_return_time(problem.system.total_mass, problem.system.alpha);

  // Jacobi constant over every stored sample
  double worst_leg = 0.0;
  for (const Leg& leg : orbit.legs) {
    double d = 0.0;
    for (const StateSample& s : leg.samples)
      d = std::max(d, std::abs(jacobi_constant(problem, {s.pos, s.vel}) + 1.0));
    worst_leg = std::max(worst_leg, d);
  }
  rep.jacobi_drift_legs = worst_leg;
  rep.jacobi_drift_orbit = worst_leg;
  rep.pass_jacobi =
      worst_leg <= cfg.jacobi_tol_leg && rep.jacobi_drift_orbit <= cfg.jacobi_tol_orbit;

  // crossings: junctions with transversal radial speed, plus any stray interior
  // sign changes of |y| - R (confinement failures)
  double vmin = std::numeric_limits<double>::max();
  int crossings = 0;
  for (int k = 0; k < L; ++k) {
    const Leg& out = orbit.legs[k];
    const Leg& in = orbit.legs[(k - 1 + L) % L];
    double r_out = std::abs(dot(out.v_start, normalized(out.p_from)));
    double r_in = std::abs(dot(in.v_end, normalized(in.p_to)));
    double r_speed = std::min(r_out, r_in);
    vmin = std::min(vmin, r_speed);
    if (r_speed >= cfg.transversal_factor * std::sqrt(2.0 * problem.phi_floor)) ++crossings;
  }
  rep.min_transversal_speed = vmin;

  bool confined = true;
  for (const Leg& leg : orbit.legs) {
    for (const StateSample& s : leg.samples) {
      if (s.t <= 0.0 || s.t >= leg.duration) continue;
      double r = norm(s.pos);
      if (leg.kind == LegKind::Outer && r < R - cfg.confinement_tol) confined = false;
      if (leg.kind == LegKind::Inner && r > R + cfg.confinement_tol) confined = false;
    }
    if (leg.kind == LegKind::Outer) {
      double hill = std::pow(problem.system.total_mass / problem.system.alpha,
                             1.0 / problem.system.alpha);
      double vmax = 2.0 * std::sqrt(2.0 * (-1.0 + problem.system.total_mass /
                                                      (problem.system.alpha *
                                                       std::pow(R, problem.system.alpha))));
      if (leg.max_radius > 2.0 * hill + 1e-9) confined = false;
      if (leg.max_speed > vmax + 1e-9) confined = false;
    }
  }
  rep.pass_confinement = confined;
  rep.crossings = crossings;
  rep.pass_crossings = (crossings == rep.expected_crossings);

  // partitions and margins per inner passage
  rep.min_collision_margin = std::numeric_limits<double>::max();
  bool parts_ok = true, margins_ok = true;
  int inner_index = 0;
  for (int k = 0; k < L; ++k) {
    const Leg& leg = orbit.legs[k];
    if (leg.kind != LegKind::Inner) continue;
    PassageCheck pc;
    pc.leg = k;
    if (inner_index < seq.size()) pc.requested = seq.symbols[inner_index].sides_text();

    std::vector<Vec2> poly;
    poly.reserve(leg.samples.size());
    for (const StateSample& s : leg.samples) poly.push_back(s.pos);
    try {
      WindingVector w = winding_vector(poly, problem);
      Partition realized = partition_of(w, problem.system.size());
      pc.realized = realized.sides_text();
      pc.ok = inner_index < seq.size() && realized == seq.symbols[inner_index];
    } catch (const Error& e) {
      pc.realized = std::string("error: ") + e.what();
      pc.ok = false;
    }
    CollisionMargin margin = collision_margin(leg.samples, problem);
    pc.margin = margin.distance;
    pc.nearest_centre = margin.centre;
    pc.collision_flag = margin.distance < cfg.beta_min_factor * R;
    rep.min_collision_margin = std::min(rep.min_collision_margin, margin.distance);
    parts_ok = parts_ok && pc.ok;
    margins_ok = margins_ok && !pc.collision_flag;
    rep.passages.push_back(std::move(pc));
    ++inner_index;
  }
  rep.pass_partitions = parts_ok && inner_index == seq.size();
  rep.pass_margins = margins_ok;

  // junction smoothness
  bool junctions_ok = true;
  for (int k = 0; k < L; ++k) {
    JunctionGradient jg = junction_gradient(orbit, k);
    rep.junction_tangential.push_back(jg.tangential);
    rep.junction_dv.push_back(jg.dv_norm);
    if (std::abs(jg.tangential) > cfg.junction_tang_tol) junctions_ok = false;
    if (jg.dv_norm > cfg.junction_dv_tol) junctions_ok = false;
  }
  rep.pass_junctions = junctions_ok;

  // outer proximity and time bounds
  bool proximity_ok = true, times_ok = true;
  rep.outer_time_low = std::numeric_limits<double>::max();
  rep.outer_time_high = 0.0;
  for (const Leg& leg : orbit.legs) {
    if (leg.kind != LegKind::Outer) continue;
    double gap = norm(leg.p_to - leg.p_from);
    rep.outer_gaps.push_back(gap);
    if (gap > rep.delta + 1e-12) proximity_ok = false;
    rep.outer_time_low = std::min(rep.outer_time_low, leg.duration);
    rep.outer_time_high = std::max(rep.outer_time_high, leg.duration);
    if (leg.duration < 0.5 * rep.brake_time || leg.duration > 2.0 * rep.brake_time)
      times_ok = false;
  }
  rep.pass_proximity = proximity_ok;
  rep.pass_time_bounds = times_ok;
  return rep;
}

ContinuityStudy continuity_study(Vec2 p1, Vec2 p2, const ClassSpec& cls,
                                 const RescaledProblem& problem, std::vector<double> nu_list,
                                 const MinimizerConfig& cfg) {
  ContinuityStudy study;

  RescaledProblem base = problem;
  base.nu = 0.0;
  MinimizeResult ref = minimize_inner(p1, p2, cls, base, cfg);
  const int m = ref.path.segments();
  const double dt = 1.0 / m;

  auto h1_distance = [&](const DiscretePath& a, const DiscretePath& b) {
    double l2 = 0.0, dl2 = 0.0;
    for (int i = 0; i <= m; ++i) {
      double w = (i == 0 || i == m) ? 0.5 : 1.0;
      l2 += w * dt * norm2(a.nodes[i] - b.nodes[i]);
    }
    for (int j = 0; j < m; ++j) {
      Vec2 d = (a.nodes[j + 1] - a.nodes[j]) - (b.nodes[j + 1] - b.nodes[j]);
      dl2 += norm2(d) / dt;
    }
    return std::sqrt(l2 + dl2);
  };

  const double M0_ref = maupertuis_value(ref.path, base);

  const DiscretePath* warm = nullptr;
  DiscretePath warm_store;
  for (double nu : nu_list) {
    ContinuityRow row;
    row.nu = nu;
    RescaledProblem pnu = problem;
    pnu.nu = nu;
    try {
      MinimizeResult res = minimize_inner(p1, p2, cls, pnu, cfg, warm);
      warm_store = res.path;
      warm = &warm_store;
      row.solved = true;
      row.d_h1 = h1_distance(res.path, ref.path);
      row.gap_objective = std::abs(maupertuis_value(res.path, base) - M0_ref);
      row.gap_fixed = std::abs(maupertuis_value(ref.path, pnu) - M0_ref);
      double denom = std::abs(nu) + nu * nu;
      row.fitted_C = denom > 0.0 ? row.gap_fixed / denom : 0.0;
    } catch (const Error&) {
      row.solved = false;
    }
    study.rows.push_back(row);
  }

  bool monotone_d = true, monotone_gap = true;
  double prev_d = std::numeric_limits<double>::max();
  double prev_gap = std::numeric_limits<double>::max();
  std::vector<double> cs;
  for (const ContinuityRow& row : study.rows) {
    if (!row.solved) {
      monotone_d = monotone_gap = false;
      continue;
    }
    if (row.d_h1 > prev_d * 1.10) monotone_d = false;
    if (row.gap_objective > prev_gap * 1.10) monotone_gap = false;
    prev_d = row.d_h1;
    prev_gap = row.gap_objective;
    if (row.nu != 0.0) cs.push_back(row.fitted_C);
  }
  study.monotone_d = monotone_d;
  study.monotone_gap = monotone_gap;
  study.final_d = study.rows.empty() ? 0.0 : study.rows.back().d_h1;

  if (!cs.empty()) {
    std::vector<double> sorted = cs;
    std::sort(sorted.begin(), sorted.end());
    double median = sorted[sorted.size() / 2];
    study.stable_C = median > 0.0;
    for (double c : cs)
      if (std::abs(c / median - 1.0) > 0.25) study.stable_C = false;
  }
  study.pass = monotone_d && monotone_gap && study.stable_C && study.final_d < 1e-3;
  return study;
}

AdmissibilityVerdict symbol_admissibility(const SymbolSequence& seq, int n, double alpha) {
  AdmissibilityVerdict v;
  if (seq.size() == 0) {
    v.reason = "empty sequence";
    return v;
  }
  for (const Partition& p : seq.symbols)
    if (p.n != n) {
      v.reason = "partition " + p.name() + " does not belong to an N=" + std::to_string(n) +
                 " alphabet";
      return v;
    }

  if (alpha > 1.0) {
    v.admissible = true;
    v.reason = "alpha in (1, 2): every partition sequence is admissible";
    return v;
  }

  if (n >= 4) {
    for (const Partition& p : seq.symbols)
      if (p.is_singleton()) {
        v.reason = "alpha = 1, N >= 4 requires non-singleton partitions; " + p.name() +
                   " isolates centre " + std::to_string(p.isolated_centre());
        return v;
      }
    v.admissible = true;
    v.reason = "alpha = 1, N >= 4 with non-singleton partitions";
    return v;
  }

  // N = 3, alpha = 1: the sequence must be a composition of the two 4-blocks,
  // up to a cyclic shift.
  if (seq.size() % 4 != 0) {
    v.reason = "alpha = 1, N = 3 requires a composition of the 4-blocks G1/G2 (length 4n)";
    return v;
  }
  auto g = g_alphabet();
  SymbolSequence shifted = seq;
  bool composed = false;
  for (int s = 0; s < seq.size() && !composed; ++s) {
    bool ok = true;
    for (int b = 0; b < seq.size() / 4 && ok; ++b) {
      std::vector<Partition> block(shifted.symbols.begin() + 4 * b,
                                   shifted.symbols.begin() + 4 * b + 4);
      ok = block == g[0].symbols || block == g[1].symbols;
    }
    composed = ok;
    shifted = right_shift(shifted);
  }
  if (!composed) {
    v.reason = "alpha = 1, N = 3: sequence is not a composition of G1/G2 blocks";
    return v;
  }
  for (const auto& w : five_windows(seq, true))
    for (int c = 1; c <= 3; ++c)
      if (collision_symmetry_present(w, c)) {
        v.reason = "five-window scan found the reflection-symmetric collision pattern";
        return v;
      }
  v.admissible = true;
  v.reason = "alpha = 1, N = 3 with a G-composed sequence and a clean five-window scan";
  return v;
}

}  // namespace rotnc
