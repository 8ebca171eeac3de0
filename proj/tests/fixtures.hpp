#pragma once

#include <cmath>

#include "rotnc/geometry.hpp"

namespace fixtures {

/// Three equal masses (sum 2) on an equilateral triangle of radius 0.5, alpha = 1.
inline rotnc::CentreSystem equilateral3() {
  std::vector<rotnc::Vec2> centres;
  for (int k = 0; k < 3; ++k) {
    double th = M_PI / 2.0 + 2.0 * M_PI * k / 3.0;
    centres.push_back({0.5 * std::cos(th), 0.5 * std::sin(th)});
  }
  return rotnc::CentreSystem::create(1.0, centres, {2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0});
}

/// Four masses of 0.5 on a square of radius 0.5 (vertices on the diagonals), alpha = 1.
inline rotnc::CentreSystem square4() {
  std::vector<rotnc::Vec2> centres;
  for (int k = 0; k < 4; ++k) {
    double th = M_PI / 4.0 + 2.0 * M_PI * k / 4.0;
    centres.push_back({0.5 * std::cos(th), 0.5 * std::sin(th)});
  }
  return rotnc::CentreSystem::create(1.0, centres, {0.5, 0.5, 0.5, 0.5});
}

/// One physical centre of mass 2 at the origin, padded to the 3-centre minimum.
inline rotnc::CentreSystem single_centre(double total_mass = 2.0, double alpha = 1.0) {
  return rotnc::CentreSystem::create(
      alpha, {{0, 0}, {0, 0}, {0, 0}},
      {total_mass / 3.0, total_mass / 3.0, total_mass / 3.0});
}

}  // namespace fixtures
