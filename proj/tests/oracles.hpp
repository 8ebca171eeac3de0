#pragma once

// Independent oracles used to freeze expected values: these deliberately avoid the
// code paths of the library (different quadrature, different winding algorithm).

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "rotnc/geometry.hpp"
#include "rotnc/inner.hpp"

namespace oracles {

/// Romberg integration on [a, b].
inline double romberg(const std::function<double(double)>& f, double a, double b,
                      double tol = 1e-13, int max_level = 22) {
  std::vector<std::vector<double>> r(1);
  double h = b - a;
  r[0].push_back(0.5 * h * (f(a) + f(b)));
  for (int k = 1; k <= max_level; ++k) {
    h *= 0.5;
    double sum = 0.0;
    long pts = 1L << (k - 1);
    for (long i = 0; i < pts; ++i) sum += f(a + (2 * i + 1) * h);
    r.emplace_back();
    r[k].push_back(0.5 * r[k - 1][0] + h * sum);
    for (int j = 1; j <= k; ++j) {
      double factor = std::pow(4.0, j);
      r[k].push_back((factor * r[k][j - 1] - r[k - 1][j - 1]) / (factor - 1.0));
    }
    if (k > 3 && std::abs(r[k][k] - r[k - 1][k - 1]) < tol * (1.0 + std::abs(r[k][k])))
      return r[k][k];
  }
  return r.back().back();
}

/// Winding parity of a closed polygon about a point by ray crossings, retried over
/// several ray directions for robustness.
inline int winding_parity_raycast(const std::vector<rotnc::Vec2>& closed_poly, rotnc::Vec2 c,
                                  unsigned seed = 12345) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
  for (int attempt = 0; attempt < 32; ++attempt) {
    double th = ang(rng);
    rotnc::Vec2 d{std::cos(th), std::sin(th)};
    int crossings = 0;
    bool degenerate = false;
    for (size_t i = 0; i + 1 < closed_poly.size(); ++i) {
      rotnc::Vec2 a = closed_poly[i] - c, b = closed_poly[i + 1] - c;
      // crossing of segment ab with the ray t*d, t > 0
      double da = rotnc::cross(d, a), db = rotnc::cross(d, b);
      if (std::abs(da) < 1e-14 || std::abs(db) < 1e-14) {
        degenerate = true;
        break;
      }
      if ((da > 0) != (db > 0)) {
        double t = da / (da - db);  // intersection parameter along the segment
        rotnc::Vec2 x = a + t * (b - a);
        double along = rotnc::dot(x, d);
        if (std::abs(along) < 1e-14) {
          degenerate = true;
          break;
        }
        if (along > 0) ++crossings;
      }
    }
    if (!degenerate) return crossings % 2;
  }
  throw std::runtime_error("raycast oracle: no non-degenerate ray found");
}

/// Classical Maupertuis functional 0.5 int|udot|^2 * int(V - 1) on the same grid scheme
/// as the library (segment quotients, node trapezoid), for the nu = 0 comparisons.
inline double classical_maupertuis(const rotnc::DiscretePath& path,
                                   const rotnc::RescaledProblem& problem) {
  const int m = path.segments();
  const double dt = 1.0 / m;
  double kin = 0.0, pot = 0.0;
  for (int j = 0; j < m; ++j) kin += rotnc::norm2(path.nodes[j + 1] - path.nodes[j]) / dt;
  for (int i = 0; i <= m; ++i) {
    double w = (i == 0 || i == m) ? 0.5 : 1.0;
    pot += w * dt * (rotnc::potential(problem.system, path.nodes[i]).value - 1.0);
  }
  return 0.5 * kin * pot;
}

/// High-resolution quadrature of the continuum Maupertuis-type value of a smooth curve
/// gamma: [0,1] -> R^2, independent of the library discretization.
inline double maupertuis_highres(const std::function<rotnc::Vec2(double)>& gamma,
                                 const rotnc::RescaledProblem& problem, int n = 4096) {
  auto deriv = [&](double t) {
    double h = 0.5 / n;
    if (t < h) t = h;
    if (t > 1.0 - h) t = 1.0 - h;
    return (gamma(t + h) - gamma(t - h)) / (2.0 * h);
  };
  double kin = 0.0, pot = 0.0, circ = 0.0;
  for (int i = 0; i < n; ++i) {
    double t = (i + 0.5) / n;
    rotnc::Vec2 u = gamma(t), du = deriv(t);
    kin += rotnc::norm2(du) / n;
    pot += (rotnc::effective_potential(problem, u).value - 1.0) / n;
    circ += rotnc::cross(u, du) / n;
  }
  return std::sqrt(2.0 * kin * pot) + problem.nu * circ;
}

/// Central finite differences of a node objective.
inline std::vector<rotnc::Vec2> fd_gradient(
    const std::function<double(const std::vector<rotnc::Vec2>&)>& f,
    std::vector<rotnc::Vec2> x, double step = 1e-7) {
  std::vector<rotnc::Vec2> g(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double keep = x[i].x;
    x[i].x = keep + step;
    double fp = f(x);
    x[i].x = keep - step;
    double fm = f(x);
    x[i].x = keep;
    g[i].x = (fp - fm) / (2.0 * step);
    keep = x[i].y;
    x[i].y = keep + step;
    fp = f(x);
    x[i].y = keep - step;
    fm = f(x);
    x[i].y = keep;
    g[i].y = (fp - fm) / (2.0 * step);
  }
  return g;
}

}  // namespace oracles
