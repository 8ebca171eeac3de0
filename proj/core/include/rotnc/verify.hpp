#pragma once

#include <string>
#include <vector>

#include "rotnc/glue.hpp"

namespace rotnc {

struct VerifyConfig {
  double beta_min_factor = 1e-3;        // collision verdict threshold, fraction of R
  double transversal_factor = 1e-4;     // |radial speed| >= factor * sqrt(2 M1) at crossings
  double jacobi_tol_leg = 1e-8;
  double jacobi_tol_orbit = 1e-5;
  double junction_tang_tol = 1e-6;
  double junction_dv_tol = 1e-5;
  double delta_factor = 0.15;
  double confinement_tol = 1e-9;
};

struct PassageCheck {
  int leg = -1;
  std::string requested;
  std::string realized;
  bool ok = false;
  double margin = 0.0;
  int nearest_centre = -1;
  bool collision_flag = false;
};

struct CertificationReport {
  double jacobi_drift_legs = 0.0;   // worst leg drift
  double jacobi_drift_orbit = 0.0;  // worst drift over the whole orbit
  int crossings = 0;
  int expected_crossings = 0;
  double min_transversal_speed = 0.0;
  std::vector<PassageCheck> passages;
  std::vector<double> junction_tangential;
  std::vector<double> junction_dv;
  std::vector<double> outer_gaps;  // |p_{2k} - p_{2k+1}| against delta
  double delta = 0.0;
  double min_collision_margin = 0.0;
  double outer_time_low = 0.0, outer_time_high = 0.0;  // against [Tbar/2, 2 Tbar]
  double brake_time = 0.0;

  bool pass_jacobi = false;
  bool pass_crossings = false;
  bool pass_partitions = false;
  bool pass_margins = false;
  bool pass_junctions = false;
  bool pass_proximity = false;
  bool pass_confinement = false;
  bool pass_time_bounds = false;

  bool pass() const {
    return pass_jacobi && pass_crossings && pass_partitions && pass_margins && pass_junctions &&
           pass_proximity && pass_confinement && pass_time_bounds;
  }
};

/// Post-hoc certification of an assembled orbit against the construction's claims.
CertificationReport certify(const GluedOrbit& orbit, const SymbolSequence& seq,
                            const RescaledProblem& problem, const VerifyConfig& cfg = {});

struct ContinuityRow {
  double nu = 0.0;
  bool solved = false;
  double d_h1 = 0.0;           // discrete H1 distance to the nu = 0 minimizer
  double gap_objective = 0.0;  // |M_0(u_nu) - M_0(u_0)|
  double gap_fixed = 0.0;      // |M_nu(u_0) - M_0(u_0)| on the fixed minimizer
  double fitted_C = 0.0;       // gap_fixed / (|nu| + nu^2)
};

struct ContinuityStudy {
  std::vector<ContinuityRow> rows;  // one per requested nu, descending
  double final_d = 0.0;
  bool monotone_d = false;
  bool monotone_gap = false;
  bool stable_C = false;
  bool pass = false;
};

/// Convergence of inner minimizers as nu decreases to 0 (desk-scale form of the
/// continuity lemmas).  Monotonicity allows 10% slack; the fitted constant must stay
/// within 25% of its median.
ContinuityStudy continuity_study(Vec2 p1, Vec2 p2, const ClassSpec& cls,
                                 const RescaledProblem& problem, std::vector<double> nu_list,
                                 const MinimizerConfig& cfg);

struct AdmissibilityVerdict {
  bool admissible = false;
  std::string reason;
};

/// Case split over (alpha, N): for alpha = 1, N >= 4 only non-singleton partitions;
/// for alpha = 1, N = 3 only compositions of the two 4-blocks (checked up to cyclic
/// shift, plus the five-window symmetry scan); for alpha in (1, 2) everything.
AdmissibilityVerdict symbol_admissibility(const SymbolSequence& seq, int n, double alpha);

}  // namespace rotnc
