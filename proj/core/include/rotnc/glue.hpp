#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rotnc/inner.hpp"
#include "rotnc/outer.hpp"
#include "rotnc/symbols.hpp"

namespace rotnc {

/// Junction angles theta_0 .. theta_{2n-1} on the circle; the tuple closes periodically.
/// Outer legs connect p_{2j} -> p_{2j+1} and must obey |p_{2j+1} - p_{2j}| <= delta.
struct EndpointTuple {
  std::vector<double> angles;

  int size() const { return static_cast<int>(angles.size()); }
};

enum class LegKind { Outer, Inner };

struct Leg {
  LegKind kind = LegKind::Outer;
  Trajectory samples;       // leg-local times starting at 0
  double duration = 0.0;
  double length = 0.0;      // L_nu contribution
  Vec2 p_from, p_to;
  Vec2 v_start, v_end;
  // inner legs
  Partition partition;
  WindingVector winding;
  CollisionMargin margin;
  bool collision_flag = false;
  std::vector<int> boundary_contacts;
  // outer legs
  double theta_dot0 = 0.0;
  double defect = 0.0;
  double jacobi_drift = 0.0;
  double max_radius = 0.0;
  double max_speed = 0.0;
};

struct GluedOrbit {
  std::vector<Leg> legs;               // alternating outer/inner, 2n of them
  std::vector<double> junction_times;  // cumulative leg end times
  double period = 0.0;
  SymbolSequence sequence;
  std::vector<double> junction_tangential;  // (1/sqrt2) <dv, tau> at p_k
  std::vector<double> junction_dv;          // |dv| at p_k
};

struct GlueConfig {
  double delta_factor = 0.15;  // delta as a fraction of R
  double junction_tol = 1e-6;  // on |<dv, tau>|
  int max_steps = 120;
  double resolve_tol = 1e-9;   // legs are re-solved when an endpoint angle moves more
  double fd_angle = 1e-6;      // Jacobian step for the junction Newton iteration
  MinimizerConfig inner{.tol = 3e-9};
  ShootConfig outer{};
};

/// Opaque warm-start store for repeated leg solves over moving endpoints.
class LegCache;
using LegCachePtr = std::shared_ptr<LegCache>;
LegCachePtr make_leg_cache();

/// Solve every leg of the alternating chain and glue them into a periodic orbit.
GluedOrbit assemble(const EndpointTuple& endpoints, const SymbolSequence& seq,
                    const RescaledProblem& problem, const GlueConfig& cfg,
                    const LegCachePtr& cache = nullptr);

/// F = sum of L_nu over the legs.
double total_length_F(const EndpointTuple& endpoints, const SymbolSequence& seq,
                      const RescaledProblem& problem, const GlueConfig& cfg,
                      const LegCachePtr& cache = nullptr);

struct JunctionGradient {
  double tangential = 0.0;  // (1/sqrt2) <dv, tau_k>, the derivative of F along the circle
  double dv_norm = 0.0;
  Vec2 dv;
};

JunctionGradient junction_gradient(const GluedOrbit& orbit, int k);

struct MinimizeFResult {
  EndpointTuple endpoints;
  GluedOrbit orbit;
  double F_initial = 0.0;
  double F_final = 0.0;
  int steps = 0;
  double max_mismatch = 0.0;  // max_k |<dv, tau>|
  bool boundary_contact = false;
};

/// Drive the junction mismatches to zero over the endpoint angles (projected onto the
/// delta-gap set), using the velocity-mismatch formula as the gradient of F.
MinimizeFResult minimize_F(const SymbolSequence& seq, const RescaledProblem& problem,
                           const EndpointTuple& init, const GlueConfig& cfg);

/// Heuristic initial tuple: each outer pair sits between the natural gates of the
/// neighbouring inner passages.
EndpointTuple default_endpoints(const SymbolSequence& seq, const RescaledProblem& problem);

/// Open 9-leg chain (5 inner passages, 4 outer excursions) with fixed outer ends.
struct OpenChain {
  std::vector<Leg> legs;           // inner/outer alternating, inner first and last
  std::vector<double> angles;      // the 8 interior junction angles
  double total_length = 0.0;
  double third_passage_margin = 0.0;
  int third_passage_centre = -1;
  bool third_passage_flag = false; // margin below the collision threshold
  double max_mismatch = 0.0;
  int steps = 0;
};

OpenChain assemble_open_chain(Vec2 p_first, Vec2 p_last, const std::array<Partition, 5>& window,
                              const std::vector<double>& interior_angles,
                              const RescaledProblem& problem, const GlueConfig& cfg,
                              const LegCachePtr& cache = nullptr);

OpenChain minimize_open_chain(Vec2 p_first, Vec2 p_last, const std::array<Partition, 5>& window,
                              const std::vector<double>& interior_angles,
                              const RescaledProblem& problem, const GlueConfig& cfg);

}  // namespace rotnc
