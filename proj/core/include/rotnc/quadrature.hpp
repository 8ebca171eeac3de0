#pragma once

#include <cmath>
#include <functional>

namespace rotnc {

namespace detail {

template <class F>
double simpson_step(const F&, double a, double fa, double b, double fb, double, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson_rec(const F& f, double a, double fa, double b, double fb, double m,
                            double fm, double whole, double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson_step(f, a, fa, m, fm, lm, flm);
  double right = simpson_step(f, m, fm, b, fb, rm, frm);
  double delta = left + right - whole;
  // the roundoff floor keeps tolerances below machine precision from recursing forever
  double floor = 1e-15 * (std::abs(left) + std::abs(right));
  if (!std::isfinite(delta)) return left + right;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol + floor) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol = 1e-12, int max_depth = 40) {
  if (a == b) return 0.0;
  double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
  double whole = detail::simpson_step(f, a, fa, b, fb, m, fm);
  return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

/// Fixed 8-point Gauss-Legendre on [a, b]; enough for the smooth per-segment integrands here.
template <class F>
double gauss8(const F& f, double a, double b) {
  static const double xs[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                               0.9602898564975363};
  static const double ws[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                               0.1012285362903763};
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += ws[i] * (f(c - h * xs[i]) + f(c + h * xs[i]));
  return s * h;
}

}  // namespace rotnc
