#include "rotnc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rotnc {

namespace {
constexpr double kSingularityGuard = 1e-10;
constexpr double kCentreOfMassTol = 1e-12;
}  // namespace

CentreSystem CentreSystem::create(double alpha, std::vector<Vec2> centres,
                                  std::vector<double> masses) {
  if (centres.size() < 3) throw Error("need at least 3 centres");
  if (centres.size() != masses.size()) throw Error("centres/masses size mismatch");
  if (!(alpha >= 1.0 && alpha < 2.0)) throw Error("alpha must lie in [1, 2)");

  double M = 0.0;
  for (double m : masses) {
    if (!(m > 0.0)) throw Error("masses must be positive");
    M += m;
  }

  double scale = 1.0;
  for (const Vec2& c : centres) scale = std::max(scale, norm(c));
  Vec2 com{0.0, 0.0};
  for (size_t k = 0; k < centres.size(); ++k) com += (masses[k] / M) * centres[k];

  if (norm(com) > kCentreOfMassTol * scale)
    throw Error("centre of mass is off the origin beyond tolerance");
  for (Vec2& c : centres) c -= com;

  CentreSystem sys;
  sys.alpha = alpha;
  sys.centres = std::move(centres);
  sys.masses = std::move(masses);
  sys.total_mass = M;
  return sys;
}

double CentreSystem::max_centre_norm() const {
  double r = 0.0;
  for (const Vec2& c : centres) r = std::max(r, norm(c));
  return r;
}

ValueGrad potential(const CentreSystem& sys, Vec2 y) {
  ValueGrad out;
  const bool newtonian = sys.alpha == 1.0;
  for (int k = 0; k < sys.size(); ++k) {
    Vec2 d = y - sys.centres[k];
    double r2 = norm2(d);
    double r = std::sqrt(r2);
    if (r < kSingularityGuard)
      throw CentreSingularityError(k, "potential evaluated at centre " + std::to_string(k + 1));
    double ra = newtonian ? r : std::pow(r, sys.alpha);
    out.value += sys.masses[k] / (sys.alpha * ra);
    // grad of m/(alpha r^alpha) = -m (y - c) / r^(alpha+2)
    out.grad -= (sys.masses[k] / (ra * r2)) * d;
  }
  return out;
}

ValueGrad effective_potential(const CentreSystem& sys, double nu, Vec2 y) {
  ValueGrad out = potential(sys, y);
  out.value += 0.5 * nu * nu * norm2(y);
  out.grad += (nu * nu) * y;
  return out;
}

double jacobi_constant(const CentreSystem& sys, double nu, const PhaseState& s) {
  return 0.5 * norm2(s.vel) - effective_potential(sys, nu, s.pos).value;
}

double circle_radius(double total_mass, double alpha) {
  return std::pow((2.0 - alpha) * total_mass / (2.0 * alpha), 1.0 / alpha);
}

namespace {

RescaledProblem finish_rescaled(CentreSystem scaled, double eps, double nu) {
  const double M = scaled.total_mass;
  const double alpha = scaled.alpha;
  const double R = circle_radius(M, alpha);
  const double hill = std::pow(M / alpha, 1.0 / alpha);

  if (!(eps < R / 2.0 && R < hill - eps))
    throw AdmissibilityError(
        "Jacobi constant too negative: admissibility chain eps < R/2 < R < (M/alpha)^(1/alpha) - "
        "eps fails (eps = " +
        std::to_string(eps) + ", R = " + std::to_string(R) + ")");

  RescaledProblem p;
  p.system = std::move(scaled);
  p.eps = eps;
  p.nu = nu;
  p.radius = R;
  p.phi_floor = M / (alpha * std::pow(R + eps, alpha)) - 1.0;
  return p;
}

}  // namespace

RescaledProblem rescale(const CentreSystem& sys, double h, double nu) {
  if (!(h < 0.0)) throw Error("rescale requires h < 0");
  const double lambda = std::pow(-h, 1.0 / sys.alpha);
  CentreSystem scaled = sys;
  for (Vec2& c : scaled.centres) c = lambda * c;
  const double eps = lambda * sys.max_centre_norm();
  const double nu_scaled = std::pow(-h, -(sys.alpha + 2.0) / (2.0 * sys.alpha)) * nu;
  return finish_rescaled(std::move(scaled), eps, nu_scaled);
}

RescaledProblem make_rescaled(const CentreSystem& sys, double eps, double nu) {
  if (!(eps >= 0.0)) throw Error("eps must be nonnegative");
  const double cmax = sys.max_centre_norm();
  CentreSystem scaled = sys;
  const double factor = (cmax > 0.0) ? eps / cmax : 0.0;
  for (Vec2& c : scaled.centres) c = factor * c;
  return finish_rescaled(std::move(scaled), eps, nu);
}

std::pair<double, double> rescale_inverse(const RescaledProblem& p, const CentreSystem& original) {
  const double cmax = original.max_centre_norm();
  if (!(cmax > 0.0)) throw Error("degenerate original configuration: all centres at the origin");
  const double alpha = original.alpha;
  const double h = -std::pow(p.eps / cmax, alpha);
  const double nu = std::pow(-h, (alpha + 2.0) / (2.0 * alpha)) * p.nu;
  return {h, nu};
}

Trajectory map_to_inertial(const Trajectory& z, double nu) {
  Trajectory x;
  x.reserve(z.size());
  for (const StateSample& s : z) {
    StateSample o;
    o.t = s.t;
    o.pos = rotate(s.pos, nu * s.t);
    o.vel = rotate(s.vel + nu * rot90(s.pos), nu * s.t);
    x.push_back(o);
  }
  return x;
}

Trajectory unscale_solution(const Trajectory& y, double h, double alpha) {
  if (!(h < 0.0)) throw Error("unscale_solution requires h < 0");
  const double amp = std::pow(-h, -1.0 / alpha);
  const double time = std::pow(-h, -(alpha + 2.0) / (2.0 * alpha));
  const double vel = std::sqrt(-h);
  Trajectory z;
  z.reserve(y.size());
  for (const StateSample& s : y) {
    StateSample o;
    o.t = time * s.t;
    o.pos = amp * s.pos;
    o.vel = vel * s.vel;
    z.push_back(o);
  }
  return z;
}

}  // namespace rotnc
