#include "rotnc/dopri5.hpp"

#include <algorithm>
#include <cmath>

namespace rotnc {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output weights.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

OdeState axpy(const OdeState& y, double h, std::initializer_list<std::pair<double, const OdeState*>> terms) {
  OdeState out = y;
  for (auto& [c, k] : terms)
    for (int i = 0; i < 4; ++i) out[i] += h * c * (*k)[i];
  return out;
}

}  // namespace

OdeState OdeSolution::at(double t) const {
  if (dense.empty()) throw Error("empty ode solution");
  if (t <= times.front()) return states.front();
  if (t >= times.back()) return states.back();
  // times is sorted; find the step containing t
  auto it = std::upper_bound(times.begin(), times.end(), t);
  size_t idx = static_cast<size_t>(it - times.begin());
  idx = std::min(idx - 1, dense.size() - 1);
  return dense[idx].eval(t);
}

OdeSolution integrate_ode(const OdeRhs& rhs, const OdeState& y0, double T,
                          const IntegratorOptions& opt) {
  OdeSolution sol;
  if (!(T > 0.0)) throw Error("integrate_ode requires T > 0");

  double t = 0.0;
  OdeState y = y0;
  OdeState k1 = rhs(t, y);
  double h = std::min(opt.h_init, T);

  sol.times.push_back(0.0);
  sol.states.push_back(y);

  while (t < T) {
    if (h < opt.h_min * std::max(1.0, T))
      throw NoConvergenceError("singular approach: step size underflow at t = " +
                               std::to_string(t));
    if (sol.steps + sol.rejected > opt.max_steps)
      throw NoConvergenceError("integrator exceeded the step budget");
    bool last = false;
    if (t + h >= T) {
      h = T - t;
      last = true;
    }

    OdeState k2 = rhs(t + h / 5.0, axpy(y, h, {{a21, &k1}}));
    OdeState k3 = rhs(t + 3.0 * h / 10.0, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    OdeState k4 = rhs(t + 4.0 * h / 5.0, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    OdeState k5 =
        rhs(t + 8.0 * h / 9.0, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    OdeState k6 =
        rhs(t + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    OdeState ynew =
        axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    OdeState k7 = rhs(t + h, ynew);

    double err = 0.0;
    for (int i = 0; i < 4; ++i) {
      double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                       e7 * k7[i]);
      double sc = opt.tol + opt.tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / 4.0);

    if (err <= 1.0) {
      DenseStep ds;
      ds.t0 = t;
      ds.h = h;
      for (int i = 0; i < 4; ++i) {
        double dy = ynew[i] - y[i];
        double bspl = h * k1[i] - dy;
        ds.rcont[0][i] = y[i];
        ds.rcont[1][i] = dy;
        ds.rcont[2][i] = bspl;
        ds.rcont[3][i] = dy - h * k7[i] - bspl;
        ds.rcont[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                              d7 * k7[i]);
      }
      sol.dense.push_back(ds);
      t += h;
      y = ynew;
      k1 = k7;  // FSAL
      sol.times.push_back(t);
      sol.states.push_back(y);
      ++sol.steps;
      if (last && t >= T) break;
    } else {
      ++sol.rejected;
    }
    double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    h *= std::clamp(fac, 0.2, 5.0);
  }
  return sol;
}

}  // namespace rotnc
