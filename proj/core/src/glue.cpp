#include "rotnc/glue.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rotnc {

namespace {

struct ChainSpec {
  std::vector<LegKind> kinds;        // leg i connects point i -> i+1 (cyclic when periodic)
  std::vector<Partition> classes;    // parallel to kinds; used on inner legs
  bool periodic = false;

  int nlegs() const { return static_cast<int>(kinds.size()); }
  int npoints() const { return periodic ? nlegs() : nlegs() + 1; }
};

}  // namespace

class LegCache {
 public:
  struct Entry {
    bool valid = false;
    double a0 = 0.0, a1 = 0.0;
    Leg leg;
    DiscretePath inner_warm;
    double seed_theta_dot = 0.0;
    double seed_T = -1.0;
  };
  std::vector<Entry> entries;
};

LegCachePtr make_leg_cache() { return std::make_shared<LegCache>(); }

namespace {

Leg leg_from_inner(const InnerArc& arc, Vec2 p_from, Vec2 p_to) {
  Leg leg;
  leg.kind = LegKind::Inner;
  leg.samples = arc.samples;
  leg.duration = arc.duration;
  leg.length = arc.length;
  leg.p_from = p_from;
  leg.p_to = p_to;
  leg.v_start = arc.samples.front().vel;
  leg.v_end = arc.samples.back().vel;
  leg.partition = arc.partition;
  leg.winding = arc.winding;
  leg.margin = arc.margin;
  leg.collision_flag = arc.collision_flag;
  leg.boundary_contacts = arc.boundary_contacts;
  return leg;
}

Leg leg_from_outer(const OuterArc& arc) {
  Leg leg;
  leg.kind = LegKind::Outer;
  leg.samples = arc.samples;
  leg.duration = arc.duration;
  leg.length = arc.length;
  leg.p_from = arc.p0;
  leg.p_to = arc.p1;
  leg.v_start = arc.samples.front().vel;
  leg.v_end = arc.samples.back().vel;
  leg.theta_dot0 = arc.theta_dot0;
  leg.defect = arc.defect;
  leg.jacobi_drift = arc.jacobi_drift;
  leg.max_radius = arc.max_radius;
  leg.max_speed = arc.max_speed;
  return leg;
}

std::vector<Leg> solve_chain(const ChainSpec& spec, const std::vector<double>& angles,
                             const RescaledProblem& problem, const GlueConfig& cfg,
                             LegCache& cache) {
  const double R = problem.radius;
  if (static_cast<int>(angles.size()) != spec.npoints())
    throw Error("angle vector does not match the chain layout");
  if (static_cast<int>(cache.entries.size()) != spec.nlegs())
    cache.entries.assign(spec.nlegs(), LegCache::Entry{});

  std::vector<Leg> legs(spec.nlegs());
  for (int i = 0; i < spec.nlegs(); ++i) {
    double a0 = angles[i];
    double a1 = angles[(i + 1) % spec.npoints()];
    LegCache::Entry& e = cache.entries[i];
    bool reuse = e.valid && std::abs(wrap_pi(a0 - e.a0)) <= cfg.resolve_tol &&
                 std::abs(wrap_pi(a1 - e.a1)) <= cfg.resolve_tol;
    if (reuse) {
      legs[i] = e.leg;
      continue;
    }
    Vec2 p0 = from_polar(R, a0), p1 = from_polar(R, a1);
    try {
      if (spec.kinds[i] == LegKind::Outer) {
        ShootConfig sc = cfg.outer;
        if (e.valid && e.seed_T > 0.0) {
          sc.seed_theta_dot = e.seed_theta_dot;
          sc.seed_T = e.seed_T;
        }
        OuterArc arc = shoot(problem, p0, p1, sc);
        legs[i] = leg_from_outer(arc);
        e.seed_theta_dot = arc.theta_dot0;
        e.seed_T = arc.duration;
      } else {
        MinimizeResult mr =
            minimize_inner(p0, p1, ClassSpec::of(spec.classes[i]), problem, cfg.inner,
                           e.valid ? &e.inner_warm : nullptr);
        InnerArc arc = reparametrize(mr, problem);
        legs[i] = leg_from_inner(arc, p0, p1);
        e.inner_warm = mr.path;
      }
    } catch (const Error& err) {
      throw Error("leg " + std::to_string(i) + " (" +
                  (spec.kinds[i] == LegKind::Outer ? "outer" : "inner") +
                  ") failed: " + err.what());
    }
    e.valid = true;
    e.a0 = a0;
    e.a1 = a1;
    e.leg = legs[i];
  }
  return legs;
}

/// Velocity mismatch <dv, tau> at every interior junction (all of them when periodic).
std::vector<double> junction_field(const ChainSpec& spec, const std::vector<double>& angles,
                                   const std::vector<Leg>& legs) {
  const int L = spec.nlegs();
  std::vector<double> g;
  if (spec.periodic) {
    g.resize(L);
    for (int k = 0; k < L; ++k) {
      const Leg& in = legs[(k - 1 + L) % L];
      const Leg& out = legs[k];
      Vec2 tau = rot90(normalized(from_polar(1.0, angles[k])));
      g[k] = dot(in.v_end - out.v_start, tau);
    }
  } else {
    g.resize(L - 1);
    for (int k = 1; k < L; ++k) {
      const Leg& in = legs[k - 1];
      const Leg& out = legs[k];
      Vec2 tau = rot90(normalized(from_polar(1.0, angles[k])));
      g[k - 1] = dot(in.v_end - out.v_start, tau);
    }
  }
  return g;
}

double total_length(const std::vector<Leg>& legs) {
  double F = 0.0;
  for (const Leg& leg : legs) F += leg.length;
  return F;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Outer-pair point indices whose angular gap is constrained by delta.
std::vector<std::pair<int, int>> delta_pairs(const ChainSpec& spec) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < spec.nlegs(); ++i)
    if (spec.kinds[i] == LegKind::Outer) pairs.push_back({i, (i + 1) % spec.npoints()});
  return pairs;
}

bool project_delta(std::vector<double>& angles, const ChainSpec& spec, double delta, double R) {
  double max_gap = 2.0 * std::asin(std::min(delta / (2.0 * R), 1.0));
  bool touched = false;
  for (auto [a, b] : delta_pairs(spec)) {
    double gap = wrap_pi(angles[b] - angles[a]);
    if (std::abs(gap) > max_gap) {
      double mid = angles[a] + 0.5 * gap;
      double half = 0.5 * max_gap * (gap >= 0.0 ? 1.0 : -1.0);
      angles[a] = mid - half;
      angles[b] = mid + half;
      touched = true;
    }
  }
  return touched;
}

struct NewtonOutcome {
  std::vector<double> angles;
  std::vector<Leg> legs;
  double F_initial = 0.0;
  double F_final = 0.0;
  double max_mismatch = 0.0;
  int steps = 0;
  bool boundary_contact = false;
};

/// Damped Newton iteration on the junction mismatch field over the free angles.
NewtonOutcome junction_newton(const ChainSpec& spec, std::vector<double> angles,
                              const RescaledProblem& problem, const GlueConfig& cfg,
                              LegCache& cache) {
  const double delta = cfg.delta_factor * problem.radius;
  const int first_free = spec.periodic ? 0 : 1;
  const int n_free = spec.periodic ? spec.npoints() : spec.npoints() - 2;

  project_delta(angles, spec, delta, problem.radius);
  std::vector<Leg> legs = solve_chain(spec, angles, problem, cfg, cache);
  std::vector<double> g = junction_field(spec, angles, legs);

  NewtonOutcome out;
  out.F_initial = total_length(legs);
  double gnorm = inf_norm(g);

  // Levenberg-Marquardt on |g|^2: robust against the weak midpoint modes of the
  // junction Jacobian, with the delta-gap constraint handled by projection.
  const int dim = n_free;
  auto phi_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return 0.5 * s;
  };
  double lambda = 1e-3;
  int step = 0;
  for (; step < cfg.max_steps && gnorm >= cfg.junction_tol; ++step) {
    // finite-difference Jacobian over the free angles; warm caches keep it cheap
    std::vector<std::vector<double>> J(dim, std::vector<double>(dim, 0.0));
    for (int l = 0; l < dim; ++l) {
      std::vector<double> pert = angles;
      pert[first_free + l] += cfg.fd_angle;
      LegCache scratch = cache;
      std::vector<Leg> legs_p = solve_chain(spec, pert, problem, cfg, scratch);
      std::vector<double> gp = junction_field(spec, pert, legs_p);
      for (int r = 0; r < dim; ++r) J[r][l] = (gp[r] - g[r]) / cfg.fd_angle;
    }
    std::vector<std::vector<double>> JtJ(dim, std::vector<double>(dim, 0.0));
    std::vector<double> Jtg(dim, 0.0);
    double diag_max = 0.0;
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b)
        for (int r = 0; r < dim; ++r) JtJ[a][b] += J[r][a] * J[r][b];
      for (int r = 0; r < dim; ++r) Jtg[a] += J[r][a] * g[r];
      diag_max = std::max(diag_max, JtJ[a][a]);
    }

    double phi = phi_of(g);
    bool accepted = false;
    for (int trial = 0; trial < 14 && !accepted; ++trial) {
      // solve (JtJ + lambda diag_max I) dx = -Jtg by Cholesky-ish elimination
      std::vector<std::vector<double>> A = JtJ;
      for (int a = 0; a < dim; ++a) A[a][a] += lambda * std::max(diag_max, 1e-12);
      std::vector<double> rhs(dim);
      for (int a = 0; a < dim; ++a) rhs[a] = -Jtg[a];
      bool ok = true;
      for (int c = 0; c < dim && ok; ++c) {
        if (A[c][c] <= 0.0) {
          ok = false;
          break;
        }
        for (int r = c + 1; r < dim; ++r) {
          double w = A[r][c] / A[c][c];
          for (int cc = c; cc < dim; ++cc) A[r][cc] -= w * A[c][cc];
          rhs[r] -= w * rhs[c];
        }
      }
      if (!ok) {
        lambda *= 4.0;
        continue;
      }
      std::vector<double> dx(dim);
      for (int r = dim - 1; r >= 0; --r) {
        double s = rhs[r];
        for (int c = r + 1; c < dim; ++c) s -= A[r][c] * dx[c];
        dx[r] = s / A[r][r];
      }
      std::vector<double> cand = angles;
      for (int l = 0; l < dim; ++l) cand[first_free + l] += dx[l];
      project_delta(cand, spec, delta, problem.radius);
      LegCache scratch = cache;
      std::vector<Leg> legs_c;
      try {
        legs_c = solve_chain(spec, cand, problem, cfg, scratch);
      } catch (const Error&) {
        lambda *= 4.0;
        continue;
      }
      std::vector<double> gc = junction_field(spec, cand, legs_c);
      if (phi_of(gc) < phi || inf_norm(gc) < cfg.junction_tol) {
        angles = std::move(cand);
        legs = std::move(legs_c);
        g = std::move(gc);
        gnorm = inf_norm(g);
        cache = scratch;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
      } else {
        lambda *= 4.0;
      }
    }
    if (!accepted) {
      int worst = 0;
      for (size_t r = 0; r < g.size(); ++r)
        if (std::abs(g[r]) > std::abs(g[worst])) worst = static_cast<int>(r);
      throw NoConvergenceError("non-smooth junction: stalled with mismatch " +
                               std::to_string(gnorm) + " at junction " + std::to_string(worst));
    }
  }
  if (gnorm >= cfg.junction_tol)
    throw NoConvergenceError("non-smooth junction: mismatch " + std::to_string(gnorm) +
                             " after " + std::to_string(step) + " steps");

  out.angles = std::move(angles);
  out.legs = std::move(legs);
  out.F_final = total_length(out.legs);
  out.max_mismatch = gnorm;
  out.steps = step;
  double max_gap = 2.0 * std::asin(std::min(delta / (2.0 * problem.radius), 1.0));
  for (auto [a, b] : delta_pairs(spec))
    if (std::abs(wrap_pi(out.angles[b] - out.angles[a])) >= max_gap * (1.0 - 1e-9))
      out.boundary_contact = true;
  return out;
}

ChainSpec periodic_spec(const SymbolSequence& seq) {
  ChainSpec spec;
  spec.periodic = true;
  for (const Partition& p : seq.symbols) {
    spec.kinds.push_back(LegKind::Outer);
    spec.classes.emplace_back();
    spec.kinds.push_back(LegKind::Inner);
    spec.classes.push_back(p);
  }
  return spec;
}

ChainSpec open_spec(const std::array<Partition, 5>& window) {
  ChainSpec spec;
  spec.periodic = false;
  for (int j = 0; j < 5; ++j) {
    spec.kinds.push_back(LegKind::Inner);
    spec.classes.push_back(window[j]);
    if (j < 4) {
      spec.kinds.push_back(LegKind::Outer);
      spec.classes.emplace_back();
    }
  }
  return spec;
}

GluedOrbit orbit_from(const ChainSpec& spec, const std::vector<double>& angles,
                      std::vector<Leg> legs, const SymbolSequence& seq) {
  GluedOrbit orbit;
  orbit.legs = std::move(legs);
  orbit.sequence = seq;
  double t = 0.0;
  for (const Leg& leg : orbit.legs) {
    t += leg.duration;
    orbit.junction_times.push_back(t);
  }
  orbit.period = t;
  std::vector<double> g = junction_field(spec, angles, orbit.legs);
  const int L = spec.nlegs();
  for (int k = 0; k < L; ++k) {
    const Leg& in = orbit.legs[(k - 1 + L) % L];
    const Leg& out = orbit.legs[k];
    Vec2 dv = in.v_end - out.v_start;
    orbit.junction_tangential.push_back(g[k] / std::sqrt(2.0));
    orbit.junction_dv.push_back(norm(dv));
  }
  return orbit;
}

}  // namespace

GluedOrbit assemble(const EndpointTuple& endpoints, const SymbolSequence& seq,
                    const RescaledProblem& problem, const GlueConfig& cfg,
                    const LegCachePtr& cache) {
  if (seq.size() < 1) throw Error("empty symbol sequence");
  if (endpoints.size() != 2 * seq.size())
    throw Error("endpoint tuple must carry 2n angles");
  ChainSpec spec = periodic_spec(seq);
  LegCachePtr store = cache ? cache : make_leg_cache();
  std::vector<Leg> legs = solve_chain(spec, endpoints.angles, problem, cfg, *store);
  return orbit_from(spec, endpoints.angles, std::move(legs), seq);
}

double total_length_F(const EndpointTuple& endpoints, const SymbolSequence& seq,
                      const RescaledProblem& problem, const GlueConfig& cfg,
                      const LegCachePtr& cache) {
  ChainSpec spec = periodic_spec(seq);
  LegCachePtr store = cache ? cache : make_leg_cache();
  std::vector<Leg> legs = solve_chain(spec, endpoints.angles, problem, cfg, *store);
  return total_length(legs);
}

JunctionGradient junction_gradient(const GluedOrbit& orbit, int k) {
  const int L = static_cast<int>(orbit.legs.size());
  if (k < 0 || k >= L) throw Error("junction index out of range");
  const Leg& in = orbit.legs[(k - 1 + L) % L];
  const Leg& out = orbit.legs[k];
  Vec2 dv = in.v_end - out.v_start;
  Vec2 tau = rot90(normalized(out.p_from));
  JunctionGradient jg;
  jg.dv = dv;
  jg.dv_norm = norm(dv);
  jg.tangential = dot(dv, tau) / std::sqrt(2.0);
  return jg;
}

MinimizeFResult minimize_F(const SymbolSequence& seq, const RescaledProblem& problem,
                           const EndpointTuple& init, const GlueConfig& cfg) {
  ChainSpec spec = periodic_spec(seq);
  LegCachePtr cache = make_leg_cache();
  NewtonOutcome nw = junction_newton(spec, init.angles, problem, cfg, *cache);

  MinimizeFResult out;
  out.endpoints.angles = nw.angles;
  out.orbit = orbit_from(spec, nw.angles, std::move(nw.legs), seq);
  out.F_initial = nw.F_initial;
  out.F_final = nw.F_final;
  out.steps = nw.steps;
  out.max_mismatch = nw.max_mismatch;
  out.boundary_contact = nw.boundary_contact;
  return out;
}

EndpointTuple default_endpoints(const SymbolSequence& seq, const RescaledProblem& problem) {
  const int n = seq.size();
  std::vector<double> gates(n);
  for (int j = 0; j < n; ++j) {
    const Partition& p = seq.symbols[j];
    const std::vector<int>& side =
        p.side_a.size() <= p.side_b.size() ? p.side_a : p.side_b;
    Vec2 centroid{0, 0};
    for (int k : side) centroid += problem.system.centres[k - 1];
    centroid = centroid / static_cast<double>(side.size());
    if (norm(centroid) < 1e-12 * std::max(problem.eps, 1e-30))
      centroid = problem.system.centres[side.front() - 1];
    gates[j] = norm(centroid) > 0.0 ? angle_of(centroid) : 0.0;
  }
  EndpointTuple tuple;
  tuple.angles.resize(2 * n);
  for (int j = 0; j < n; ++j) {
    // outer pair j sits between the gates of the neighbouring passages, walking the
    // circle counterclockwise in sequence order
    double prev = gates[(j - 1 + n) % n];
    double mid = prev + 0.5 * wrap_angle(gates[j] - prev);
    tuple.angles[2 * j] = mid - 0.01;
    tuple.angles[2 * j + 1] = mid + 0.01;
  }
  return tuple;
}

OpenChain assemble_open_chain(Vec2 p_first, Vec2 p_last, const std::array<Partition, 5>& window,
                              const std::vector<double>& interior_angles,
                              const RescaledProblem& problem, const GlueConfig& cfg,
                              const LegCachePtr& cache) {
  if (interior_angles.size() != 8) throw Error("open chain takes 8 interior angles");
  ChainSpec spec = open_spec(window);
  std::vector<double> angles;
  angles.push_back(angle_of(p_first));
  for (double a : interior_angles) angles.push_back(a);
  angles.push_back(angle_of(p_last));

  LegCachePtr store = cache ? cache : make_leg_cache();
  std::vector<Leg> legs = solve_chain(spec, angles, problem, cfg, *store);

  OpenChain chain;
  chain.legs = std::move(legs);
  chain.angles = interior_angles;
  chain.total_length = total_length(chain.legs);
  const Leg& third = chain.legs[4];
  chain.third_passage_margin = third.margin.distance;
  chain.third_passage_centre = third.margin.centre;
  chain.third_passage_flag = third.collision_flag;
  std::vector<double> g = junction_field(spec, angles, chain.legs);
  chain.max_mismatch = inf_norm(g);
  return chain;
}

OpenChain minimize_open_chain(Vec2 p_first, Vec2 p_last, const std::array<Partition, 5>& window,
                              const std::vector<double>& interior_angles,
                              const RescaledProblem& problem, const GlueConfig& cfg) {
  if (interior_angles.size() != 8) throw Error("open chain takes 8 interior angles");
  ChainSpec spec = open_spec(window);
  std::vector<double> angles;
  angles.push_back(angle_of(p_first));
  for (double a : interior_angles) angles.push_back(a);
  angles.push_back(angle_of(p_last));

  LegCachePtr cache = make_leg_cache();
  NewtonOutcome nw = junction_newton(spec, angles, problem, cfg, *cache);

  OpenChain chain;
  chain.legs = std::move(nw.legs);
  chain.angles.assign(nw.angles.begin() + 1, nw.angles.end() - 1);
  chain.total_length = nw.F_final;
  const Leg& third = chain.legs[4];
  chain.third_passage_margin = third.margin.distance;
  chain.third_passage_centre = third.margin.centre;
  chain.third_passage_flag = third.collision_flag;
  chain.max_mismatch = nw.max_mismatch;
  chain.steps = nw.steps;
  return chain;
}

}  // namespace rotnc
