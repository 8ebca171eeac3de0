#include "rotnc/outer.hpp"

#include <algorithm>
#include <cmath>

#include "rotnc/quadrature.hpp"

namespace rotnc {

namespace {

PhaseState to_phase(const OdeState& s) { return {{s[0], s[1]}, {s[2], s[3]}}; }
OdeState to_state(const PhaseState& s) { return {s.pos.x, s.pos.y, s.vel.x, s.vel.y}; }

// max |y(t)| over the trajectory, refined on the dense output
double refined_max_radius(const OdeSolution& sol) {
  size_t best = 0;
  double rbest = 0.0;
  for (size_t i = 0; i < sol.states.size(); ++i) {
    double r = std::hypot(sol.states[i][0], sol.states[i][1]);
    if (r > rbest) {
      rbest = r;
      best = i;
    }
  }
  double lo = sol.times[best > 0 ? best - 1 : 0];
  double hi = sol.times[std::min(best + 1, sol.times.size() - 1)];
  auto radius = [&](double t) {
    OdeState s = sol.at(t);
    return std::hypot(s[0], s[1]);
  };
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
    double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (radius(m1) < radius(m2))
      lo = m1;
    else
      hi = m2;
  }
  return std::max(rbest, radius(0.5 * (lo + hi)));
}

Trajectory sample_solution(const OdeSolution& sol, int per_step) {
  Trajectory out;
  out.reserve(sol.times.size() * per_step);
  for (size_t i = 0; i + 1 < sol.times.size(); ++i) {
    double t0 = sol.times[i], t1 = sol.times[i + 1];
    for (int j = 0; j < per_step; ++j) {
      double t = t0 + (t1 - t0) * j / per_step;
      OdeState s = (j == 0) ? sol.states[i] : sol.dense[i].eval(t);
      out.push_back({t, {s[0], s[1]}, {s[2], s[3]}});
    }
  }
  const OdeState& last = sol.states.back();
  out.push_back({sol.times.back(), {last[0], last[1]}, {last[2], last[3]}});
  return out;
}

}  // namespace

OdeRhs problem_rhs(const RescaledProblem& problem) {
  return [problem](double, const OdeState& s) -> OdeState {
    ValueGrad phi = effective_potential(problem, {s[0], s[1]});
    double nu2 = 2.0 * problem.nu;
    // ydd + 2 nu i yd = grad Phi
    return {s[2], s[3], phi.grad.x + nu2 * s[3], phi.grad.y - nu2 * s[2]};
  };
}

OdeSolution integrate(const RescaledProblem& problem, const PhaseState& s0, double T,
                      const IntegratorOptions& opt) {
  return integrate_ode(problem_rhs(problem), to_state(s0), T, opt);
}

double jacobi_drift(const RescaledProblem& problem, const OdeSolution& sol) {
  double drift = 0.0;
  for (size_t i = 0; i + 1 < sol.times.size(); ++i) {
    for (int j = 0; j < 10; ++j) {
      double t = sol.times[i] + (sol.times[i + 1] - sol.times[i]) * j / 10.0;
      OdeState s = (j == 0) ? sol.states[i] : sol.dense[i].eval(t);
      drift = std::max(drift, std::abs(jacobi_constant(problem, to_phase(s)) + 1.0));
    }
  }
  drift = std::max(drift,
                   std::abs(jacobi_constant(problem, to_phase(sol.states.back())) + 1.0));
  return drift;
}

PhaseState initial_velocity(const RescaledProblem& problem, Vec2 p0, double theta_dot0) {
  const double R = problem.radius;
  Vec2 radial = p0 / norm(p0);
  double phi = effective_potential(problem, p0).value;
  double radical = 2.0 * (phi - 1.0) - R * R * theta_dot0 * theta_dot0;
  if (radical < 0.0)
    throw Error("angular speed too large: no outward departure at Jacobi constant -1");
  double rdot = std::sqrt(radical);
  return {p0, rdot * radial + (R * theta_dot0) * rot90(radial)};
}

double brake_return_time(double total_mass, double alpha) {
  const double R = circle_radius(total_mass, alpha);
  const double rmax = std::pow(total_mass / alpha, 1.0 / alpha);
  // r = R + (rmax - R) sin^2(phi) removes the turning-point singularity; the radicand is
  // evaluated through log1p/expm1 so the endpoint stays finite.
  auto integrand = [&](double phi) {
    double c = std::cos(phi), s = std::sin(phi);
    double r = R + (rmax - R) * s * s;
    double ratio = -std::expm1(alpha * std::log1p(-(1.0 - R / rmax) * c * c));
    // V0(r) - 1 = (M/alpha) r^(-alpha) (1 - (r/rmax)^alpha), with (M/alpha) rmax^(-alpha) = 1
    double w = total_mass / (alpha * std::pow(r, alpha)) * ratio / (c * c);
    return 2.0 * (rmax - R) * s / std::sqrt(2.0 * w);
  };
  return 2.0 * adaptive_simpson(integrand, 0.0, 0.5 * M_PI, 1e-14);
}

OuterArc brake_orbit(Vec2 p0, double total_mass, double alpha, const IntegratorOptions& opt) {
  CentreSystem origin = CentreSystem::create(
      alpha, {{0, 0}, {0, 0}, {0, 0}},
      {total_mass / 3.0, total_mass / 3.0, total_mass / 3.0});
  RescaledProblem kepler = make_rescaled(origin, 0.0, 0.0);

  PhaseState s0 = initial_velocity(kepler, p0, 0.0);
  double T = brake_return_time(total_mass, alpha);
  OdeSolution sol = integrate(kepler, s0, T, opt);

  OuterArc arc;
  arc.samples = sample_solution(sol, 8);
  arc.duration = T;
  arc.p0 = p0;
  arc.p1 = p0;
  arc.theta_dot0 = 0.0;
  arc.jacobi_drift = jacobi_drift(kepler, sol);
  arc.length = arc_length_L(kepler, sol, T);
  arc.max_radius = refined_max_radius(sol);
  arc.max_speed = 0.0;
  arc.min_interior_radius = std::numeric_limits<double>::max();
  for (const StateSample& s : arc.samples) {
    arc.max_speed = std::max(arc.max_speed, norm(s.vel));
    if (s.t > 0.0 && s.t < T)
      arc.min_interior_radius = std::min(arc.min_interior_radius, norm(s.pos));
  }
  arc.defect = norm(arc.samples.back().pos - p0);
  return arc;
}

double arc_length_L(const RescaledProblem& problem, const OdeSolution& sol, double T) {
  double total = 0.0;
  auto integrand = [&](double t) {
    OdeState s = sol.at(t);
    Vec2 y{s[0], s[1]}, v{s[2], s[3]};
    double phi = effective_potential(problem, y).value;
    double core = std::sqrt(std::max(phi - 1.0, 0.0)) * norm(v);
    return core + problem.nu / std::sqrt(2.0) * cross(y, v);
  };
  for (size_t i = 0; i + 1 < sol.times.size(); ++i) {
    double t0 = std::min(sol.times[i], T), t1 = std::min(sol.times[i + 1], T);
    if (t1 <= t0) continue;
    total += gauss8(integrand, t0, t1);
  }
  return total;
}

OuterArc shoot(const RescaledProblem& problem, Vec2 p0, Vec2 p1, const ShootConfig& cfg) {
  const double Tbar = brake_return_time(problem.system.total_mass, problem.system.alpha);
  const double R = problem.radius;

  auto terminal = [&](double theta_dot0, double T) -> std::pair<Vec2, OdeSolution> {
    PhaseState s0 = initial_velocity(problem, p0, theta_dot0);
    OdeSolution sol = integrate(problem, s0, T, cfg.integrator);
    const OdeState& last = sol.states.back();
    return {Vec2{last[0], last[1]} - p1, std::move(sol)};
  };

  double td = cfg.seed_theta_dot;
  double T = cfg.seed_T > 0.0 ? cfg.seed_T : Tbar;
  auto [res, sol] = terminal(td, T);
  double rnorm = norm(res);
  int iter = 0;
  for (; iter < cfg.max_newton && rnorm >= cfg.newton_tol; ++iter) {
    // central-difference Jacobian in (theta_dot0, T)
    double d = cfg.fd_step;
    Vec2 r_tp = terminal(td + d, T).first, r_tm = terminal(td - d, T).first;
    Vec2 r_Tp = terminal(td, T + d).first, r_Tm = terminal(td, T - d).first;
    double j11 = (r_tp.x - r_tm.x) / (2 * d), j12 = (r_Tp.x - r_Tm.x) / (2 * d);
    double j21 = (r_tp.y - r_tm.y) / (2 * d), j22 = (r_Tp.y - r_Tm.y) / (2 * d);
    double det = j11 * j22 - j12 * j21;
    if (std::abs(det) < 1e-14)
      throw NoConvergenceError("outside perturbative regime: singular shooting Jacobian");
    double dtd = -(j22 * res.x - j12 * res.y) / det;
    double dT = -(-j21 * res.x + j11 * res.y) / det;

    bool accepted = false;
    double step = 1.0;
    for (int half = 0; half <= cfg.max_halvings; ++half, step *= 0.5) {
      double td_try = td + step * dtd;
      double T_try = T + step * dT;
      if (!(T_try > 0.05 * Tbar)) continue;
      try {
        auto [res_try, sol_try] = terminal(td_try, T_try);
        if (norm(res_try) < rnorm * (1.0 - 0.25 * step) || norm(res_try) < cfg.newton_tol) {
          td = td_try;
          T = T_try;
          res = res_try;
          sol = std::move(sol_try);
          rnorm = norm(res);
          accepted = true;
          break;
        }
      } catch (const Error&) {
        // shrinking the step may leave the failing region
      }
    }
    if (!accepted)
      throw NoConvergenceError("outside perturbative regime: shooting step rejected");
  }
  if (rnorm >= cfg.newton_tol)
    throw NoConvergenceError("outside perturbative regime: no Newton convergence after " +
                             std::to_string(iter) + " iterations");

  // exteriority on a dense refinement; endpoints touch the circle by construction
  double min_r = std::numeric_limits<double>::max();
  for (size_t i = 0; i + 1 < sol.times.size(); ++i) {
    for (int j = 0; j < 10; ++j) {
      double t = sol.times[i] + (sol.times[i + 1] - sol.times[i]) * (j + 0.5) / 10.0;
      if (t <= 0.0 || t >= T) continue;
      OdeState s = sol.dense[i].eval(t);
      min_r = std::min(min_r, norm(Vec2{s[0], s[1]}));
    }
  }
  if (min_r < R - 1e-9) throw Error("re-entry: outer arc dips inside the circle");

  OuterArc arc;
  arc.samples = sample_solution(sol, 8);
  arc.duration = T;
  arc.p0 = p0;
  arc.p1 = p1;
  arc.theta_dot0 = td;
  arc.defect = rnorm;
  arc.newton_iterations = iter;
  arc.jacobi_drift = jacobi_drift(problem, sol);
  arc.length = arc_length_L(problem, sol, T);
  arc.min_interior_radius = min_r;
  arc.max_radius = refined_max_radius(sol);
  arc.max_speed = 0.0;
  for (const StateSample& s : arc.samples) arc.max_speed = std::max(arc.max_speed, norm(s.vel));
  arc.samples.back().pos = p1;  // position continuity at junctions; the defect is recorded
  return arc;
}

}  // namespace rotnc
