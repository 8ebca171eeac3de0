#pragma once

#include <array>
#include <functional>
#include <vector>

#include "rotnc/errors.hpp"

namespace rotnc {

/// Planar second-order state (x, y, vx, vy).
using OdeState = std::array<double, 4>;
using OdeRhs = std::function<OdeState(double t, const OdeState&)>;

struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  std::array<OdeState, 5> rcont{};  // Hairer's contd5 coefficients

  OdeState eval(double t) const {
    double theta = (t - t0) / h;
    double th1 = 1.0 - theta;
    OdeState out;
    for (int i = 0; i < 4; ++i)
      out[i] = rcont[0][i] +
               theta * (rcont[1][i] +
                        th1 * (rcont[2][i] + theta * (rcont[3][i] + th1 * rcont[4][i])));
    return out;
  }
};

struct OdeSolution {
  std::vector<double> times;    // accepted step boundaries, starts at 0, ends at T
  std::vector<OdeState> states;
  std::vector<DenseStep> dense;  // one per accepted step
  int steps = 0;
  int rejected = 0;

  OdeState at(double t) const;
};

struct IntegratorOptions {
  double tol = 1e-11;       // absolute and relative
  double h_init = 1e-3;
  double h_min = 1e-14;
  long max_steps = 2000000;
};

/// Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) with dense output.
/// Throws NoConvergenceError on step-size underflow ("singular approach").
OdeSolution integrate_ode(const OdeRhs& rhs, const OdeState& y0, double T,
                          const IntegratorOptions& opt = {});

}  // namespace rotnc
