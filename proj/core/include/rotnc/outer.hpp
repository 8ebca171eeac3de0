#pragma once

#include "rotnc/dopri5.hpp"
#include "rotnc/geometry.hpp"

namespace rotnc {

/// Solution segment that stays outside the circle, both ends on it.
struct OuterArc {
  Trajectory samples;
  double duration = 0.0;   // T_ext
  Vec2 p0, p1;
  double theta_dot0 = 0.0;
  double length = 0.0;     // L_nu along the arc
  double jacobi_drift = 0.0;
  double max_radius = 0.0;
  double max_speed = 0.0;
  double min_interior_radius = 0.0;
  int newton_iterations = 0;
  double defect = 0.0;     // |y(T) - p1| before snapping
};

struct ShootConfig {
  IntegratorOptions integrator{};
  double newton_tol = 1e-10;
  int max_newton = 25;
  double fd_step = 1e-7;
  int max_halvings = 8;
  double seed_theta_dot = 0.0;  // warm-start seeds; seed_T <= 0 falls back to the brake time
  double seed_T = -1.0;
};

/// Right-hand side of the rotating-frame equation for `problem`.
OdeRhs problem_rhs(const RescaledProblem& problem);

/// Integrate the rotating-frame equation; samples are the accepted steps.
OdeSolution integrate(const RescaledProblem& problem, const PhaseState& s0, double T,
                      const IntegratorOptions& opt = {});

/// Max |J + 1| over accepted steps and a 10x dense refinement.
double jacobi_drift(const RescaledProblem& problem, const OdeSolution& sol);

/// Departure state on the circle with Jacobi constant -1: the angular component is
/// R * theta_dot0, the radial one is fixed outward by the constant.
/// Throws when the radical is negative ("angular speed too large").
PhaseState initial_velocity(const RescaledProblem& problem, Vec2 p0, double theta_dot0);

/// Return time of the rectilinear brake orbit of the unperturbed alpha-Kepler problem
/// (out from radius R to the apoapsis (M/alpha)^(1/alpha) and back), by quadrature.
double brake_return_time(double total_mass, double alpha);

/// The brake arc itself, integrated from p0.
OuterArc brake_orbit(Vec2 p0, double total_mass, double alpha, const IntegratorOptions& opt = {});

/// Newton shooting on (theta_dot0, T) from the brake-orbit seed; connects p0 to p1 outside
/// the circle at Jacobi constant -1.
OuterArc shoot(const RescaledProblem& problem, Vec2 p0, Vec2 p1, const ShootConfig& cfg = {});

/// L_nu of a sampled arc: integral of sqrt(Phi - 1) |ydot| plus the circulation term,
/// accumulated over dense subsamples of the ODE solution.
double arc_length_L(const RescaledProblem& problem, const OdeSolution& sol, double T);

}  // namespace rotnc
