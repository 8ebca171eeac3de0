#pragma once

#include <utility>
#include <vector>

#include "rotnc/errors.hpp"
#include "rotnc/vec2.hpp"

namespace rotnc {

/// N attracting centres with alpha-homogeneous potential terms m_k / (alpha * |y - c_k|^alpha).
/// The origin sits at the centre of mass; small input violations are corrected on construction.
struct CentreSystem {
  double alpha = 1.0;          // homogeneity exponent, in [1, 2)
  std::vector<Vec2> centres;   // c_k
  std::vector<double> masses;  // m_k > 0
  double total_mass = 0.0;     // M

  static CentreSystem create(double alpha, std::vector<Vec2> centres, std::vector<double> masses);

  int size() const { return static_cast<int>(centres.size()); }
  double max_centre_norm() const;
};

struct PhaseState {
  Vec2 pos;
  Vec2 vel;
};

struct StateSample {
  double t = 0.0;
  Vec2 pos;
  Vec2 vel;
};

using Trajectory = std::vector<StateSample>;

/// Problem brought to Jacobi constant -1: centres shrunk so that max |c'_k| = eps,
/// angular velocity nu, circle radius `radius` and the floor `phi_floor` for Phi - 1 on the disc.
struct RescaledProblem {
  CentreSystem system;     // rescaled centres
  double eps = 0.0;        // max_k |c'_k|
  double nu = 0.0;         // angular velocity of the rescaled problem
  double radius = 0.0;     // radius of the circular alpha-Kepler solution at Jacobi constant -1
  double phi_floor = 0.0;  // min over the closed disc of Phi - 1, computed with the instance eps
};

struct ValueGrad {
  double value = 0.0;
  Vec2 grad;
};

/// V(y) = sum_k m_k / (alpha |y - c_k|^alpha) and its gradient.
ValueGrad potential(const CentreSystem& sys, Vec2 y);

/// Phi_nu(y) = nu^2 |y|^2 / 2 + V(y) and its gradient.
ValueGrad effective_potential(const CentreSystem& sys, double nu, Vec2 y);
inline ValueGrad effective_potential(const RescaledProblem& p, Vec2 y) {
  return effective_potential(p.system, p.nu, y);
}

/// J_nu(z, zdot) = |zdot|^2 / 2 - Phi_nu(z).  For nu = 0 this is the energy.
double jacobi_constant(const CentreSystem& sys, double nu, const PhaseState& s);
inline double jacobi_constant(const RescaledProblem& p, const PhaseState& s) {
  return jacobi_constant(p.system, p.nu, s);
}

/// Radius of the circular alpha-Kepler orbit with energy -1: ((2-alpha) M / (2 alpha))^(1/alpha).
double circle_radius(double total_mass, double alpha);

/// Map (h, nu), h < 0, to the equivalent problem at Jacobi constant -1.
/// Throws AdmissibilityError when eps < radius/2 < radius < (M/alpha)^(1/alpha) - eps fails
/// ("Jacobi constant too negative").
RescaledProblem rescale(const CentreSystem& sys, double h, double nu);

/// Build the rescaled problem directly from (eps, nu); centres of `sys` are shrunk so that
/// max |c'_k| = eps.  Same admissibility checks as rescale().
RescaledProblem make_rescaled(const CentreSystem& sys, double eps, double nu);

/// Recover (h, nu) of the original system from a rescaled problem; inverse of rescale().
std::pair<double, double> rescale_inverse(const RescaledProblem& p, const CentreSystem& original);

/// x(t) = exp(i nu t) z(t); velocities transform as xdot = exp(i nu t)(zdot + i nu z).
Trajectory map_to_inertial(const Trajectory& z, double nu);

/// Take a trajectory at Jacobi constant -1 back to Jacobi constant h < 0:
/// z(t) = (-h)^(-1/alpha) y((-h)^((alpha+2)/(2 alpha)) t).
Trajectory unscale_solution(const Trajectory& y, double h, double alpha);

}  // namespace rotnc
