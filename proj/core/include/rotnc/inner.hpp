#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "rotnc/geometry.hpp"
#include "rotnc/symbols.hpp"

namespace rotnc {

/// Polygonal path on the uniform parameter grid over [0, 1]; endpoints on the circle,
/// every node confined to the closed disc.
struct DiscretePath {
  std::vector<Vec2> nodes;

  int segments() const { return static_cast<int>(nodes.size()) - 1; }
};

/// Discretizations of the three integrals entering the length functionals:
/// kinetic by segment difference quotients, potential by the trapezoid rule on nodes,
/// circulation by the exact per-segment cross sum.
struct PathIntegrals {
  double kinetic = 0.0;      // int |udot|^2
  double potential = 0.0;    // int (Phi - 1)
  double circulation = 0.0;  // int <iu, udot>
};

PathIntegrals path_integrals(const DiscretePath& path, const RescaledProblem& problem);

/// M(u) = sqrt(2) sqrt(int |udot|^2) sqrt(int Phi - 1) + nu int <iu, udot>.
double maupertuis_value(const DiscretePath& path, const RescaledProblem& problem);

/// Exact gradient of the discretized functional, one vector per node.
std::vector<Vec2> maupertuis_gradient(const DiscretePath& path, const RescaledProblem& problem);

/// L(u) = int sqrt(Phi - 1) |udot| + (nu / sqrt 2) int <iu, udot>, with the first integral
/// evaluated by per-segment quadrature along the polygon, so the value depends on the
/// geometric image only.
double jacobi_length(const DiscretePath& path, const RescaledProblem& problem);

/// omega^2 = int(Phi - 1) / (int |udot|^2 / 2); the time-parametrized arc lives on [0, 1/omega].
double omega_of(const DiscretePath& path, const RescaledProblem& problem);

/// Topological class request: a partition (either parity assignment accepted) or a
/// specific winding vector.
struct ClassSpec {
  std::optional<Partition> partition;
  std::optional<WindingVector> winding;

  static ClassSpec of(Partition p) { return {std::move(p), std::nullopt}; }
  static ClassSpec of(WindingVector l) { return {std::nullopt, std::move(l)}; }
};

struct MinimizerConfig {
  int mesh = 256;
  double tol = 1e-8;               // projected-gradient norm
  int max_iterations = 40000;
  double guard_factor = 1e-6;      // hard floor around centres, fraction of R
  double collision_factor = 1e-3;  // collision flag threshold, fraction of R
  unsigned seed = 0;
};

/// Waypoint construction threading the gap between the two partition sides, with small
/// detour loops fixing individual winding parities.  Throws on degenerate configurations.
DiscretePath initial_guess(Vec2 p1, Vec2 p2, const ClassSpec& cls, const RescaledProblem& problem,
                           const MinimizerConfig& cfg);

struct CollisionMargin {
  double distance = 0.0;
  int centre = -1;        // 1-based
  double parameter = 0.0; // parameter/time of the closest approach
};

CollisionMargin collision_margin(const DiscretePath& path, const RescaledProblem& problem);
CollisionMargin collision_margin(const Trajectory& traj, const RescaledProblem& problem);

struct MinimizeResult {
  DiscretePath path;
  double objective = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool collision_flag = false;
  CollisionMargin margin;
  WindingVector winding;
  Partition partition;
  std::vector<int> boundary_contacts;  // node indices with |u| at the radius
};

/// Constrained minimization of the Maupertuis-type functional in the requested class.
MinimizeResult minimize_inner(Vec2 p1, Vec2 p2, const ClassSpec& cls,
                              const RescaledProblem& problem, const MinimizerConfig& cfg,
                              const DiscretePath* warm_start = nullptr);

/// Fixed-Jacobi-constant arc obtained from a converged minimizer.  Samples are placed at
/// the polygon corners plus an equal-time refinement; velocities carry the exact
/// Jacobi-constant speed along the local tangent.
struct InnerArc {
  Trajectory samples;
  double duration = 0.0;  // T = 1/omega
  double omega = 0.0;
  double objective = 0.0;
  double length = 0.0;
  WindingVector winding;
  Partition partition;
  bool collision_flag = false;
  CollisionMargin margin;
  std::vector<int> boundary_contacts;
};

InnerArc reparametrize(const MinimizeResult& minimizer, const RescaledProblem& problem,
                       int min_samples = 0);

/// Matched-quadrature consistency of a reparametrized arc: the difference-quotient speed
/// against the field speed averaged along each gap, and the Cauchy-Schwarz defect between
/// sqrt(2) L and M evaluated on the same sample set.
struct SpeedConsistency {
  double max_ratio_deviation = 0.0;  // pointwise |ratio/C - 1|
  double best_fit_C = 0.0;
  double holder_defect = 0.0;        // |sqrt(2) L / M - 1|
};

SpeedConsistency speed_consistency(const InnerArc& arc, const RescaledProblem& problem);

/// Short-arc uniqueness diagnostic: re-minimize between nearby endpoints inside the annulus
/// from several seeds and measure the disagreement.
struct ForwardNormalReport {
  bool unique = false;
  double max_disagreement = 0.0;
  double rho = 0.0;
};

ForwardNormalReport forward_normal_check(Vec2 p1, Vec2 p2, const RescaledProblem& problem,
                                         const MinimizerConfig& cfg, int starts = 5);

}  // namespace rotnc
