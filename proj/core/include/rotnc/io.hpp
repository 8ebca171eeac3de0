#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rotnc/glue.hpp"
#include "rotnc/verify.hpp"

namespace rotnc {

/// Everything a pipeline run needs: the problem, the symbols and the knobs.
struct RunConfig {
  double alpha = 1.0;
  std::vector<Vec2> centres;
  std::vector<double> masses;
  std::optional<double> h, nu;          // either (h, nu) ...
  std::optional<double> eps, nu_prime;  // ... or (eps, nu_prime)
  std::vector<std::string> seq;         // "P2", "G1", or explicit sides "12|34"

  int mesh = 256;
  double inner_tol = 1e-8;
  double outer_tol = 1e-11;
  double junction_tol = 1e-6;
  double delta = 0.15;      // fraction of R
  double guard = 1e-6;      // fraction of R
  double beta_min = 1e-3;   // fraction of R
  unsigned seed = 0;
  std::string out_dir = "out";
};

RunConfig parse_config_text(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string config_to_text(const RunConfig& cfg);

CentreSystem system_from(const RunConfig& cfg);
/// Builds the rescaled problem from whichever parameter pair the config carries.
RescaledProblem problem_from(const RunConfig& cfg);
/// (h, nu) of the original system; direct when given, recovered otherwise.
std::pair<double, double> h_nu_from(const RunConfig& cfg);

SymbolSequence sequence_from(const RunConfig& cfg, int n);
GlueConfig glue_config_from(const RunConfig& cfg);
VerifyConfig verify_config_from(const RunConfig& cfg);

/// CSV with header `t,x,y,vx,vy`, 17 significant digits.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path);

/// Orbit CSV adds `leg_index,leg_kind` columns; legs are written in global time.
void write_orbit_csv(const std::string& path, const GluedOrbit& orbit);
GluedOrbit read_orbit_csv(const std::string& path);

std::string report_to_json(const CertificationReport& rep, const GluedOrbit& orbit);
std::string report_summary(const CertificationReport& rep);

/// Static figure: trajectory, centres and the circle.
void write_orbit_svg(const std::string& path, const GluedOrbit& orbit,
                     const RescaledProblem& problem);
void write_trajectory_svg(const std::string& path, const std::vector<Trajectory>& curves,
                          const RescaledProblem& problem);

}  // namespace rotnc
