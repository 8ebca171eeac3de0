#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "rotnc/geometry.hpp"
#include "rotnc/outer.hpp"

using namespace rotnc;

namespace {

CentreSystem one_centre_m2() { return fixtures::single_centre(2.0, 1.0); }

}  // namespace

TEST_CASE("potential: single centre values") {
  CentreSystem sys = one_centre_m2();
  ValueGrad v = potential(sys, {2.0, 0.0});
  CHECK(v.value == doctest::Approx(1.0).epsilon(1e-15));  // 2 / (1 * 2)

  ValueGrad g = potential(sys, {1.0, 0.0});
  CHECK(g.grad.x == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(g.grad.y == doctest::Approx(0.0));
}

TEST_CASE("potential: equilateral value by direct summation oracle") {
  CentreSystem sys = fixtures::equilateral3();
  double expected = 0.0;
  for (int k = 0; k < 3; ++k)
    expected += sys.masses[k] / (sys.alpha * norm(Vec2{0, 0} - sys.centres[k]));
  CHECK(potential(sys, {0, 0}).value == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("potential: evaluation at a centre raises the centre index") {
  CentreSystem sys = fixtures::equilateral3();
  try {
    potential(sys, sys.centres[1]);
    FAIL("expected singularity error");
  } catch (const CentreSingularityError& e) {
    CHECK(e.centre == 1);
  }
}

TEST_CASE("effective potential: centrifugal part and nu = 0 reduction") {
  CentreSystem sys = fixtures::equilateral3();
  Vec2 y{3.0, 4.0};
  double vonly = potential(sys, y).value;
  CHECK(effective_potential(sys, 0.0, y).value == doctest::Approx(vonly));
  CHECK(effective_potential(sys, 1.0, y).value - vonly == doctest::Approx(12.5).epsilon(1e-15));
}

TEST_CASE("effective potential: rescaled evaluation against an independent sum") {
  RescaledProblem p = make_rescaled(fixtures::equilateral3(), 0.05, 0.1);
  Vec2 y{0.8, 0.0};
  long double acc = 0.5L * 0.1L * 0.1L * (0.8L * 0.8L);
  for (int k = 0; k < 3; ++k) {
    long double dx = 0.8L - (long double)p.system.centres[k].x;
    long double dy = -(long double)p.system.centres[k].y;
    acc += (long double)p.system.masses[k] / sqrtl(dx * dx + dy * dy);
  }
  CHECK(effective_potential(p, y).value == doctest::Approx((double)acc).epsilon(1e-12));
}

TEST_CASE("jacobi constant: energy cases and rescaled state") {
  CentreSystem sys = one_centre_m2();
  CHECK(jacobi_constant(sys, 0.0, {{2, 0}, {0, 0}}) == doctest::Approx(-1.0));
  CHECK(jacobi_constant(sys, 0.0, {{1, 0}, {std::sqrt(2.0), 0}}) == doctest::Approx(-1.0));

  RescaledProblem p = make_rescaled(fixtures::equilateral3(), 0.05, 0.1);
  PhaseState s{{1.0, 0.0}, {0.0, 1.2}};
  double expected = 0.5 * 1.2 * 1.2 - effective_potential(p, s.pos).value;
  CHECK(jacobi_constant(p, s) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("rescale: identity, scaling exponents, R and M1") {
  CentreSystem sys = fixtures::equilateral3();

  // a compact configuration keeps h = -1 admissible (eps stays below R/2)
  std::vector<Vec2> small;
  for (const Vec2& c : sys.centres) small.push_back(0.6 * c);
  CentreSystem compact = CentreSystem::create(1.0, small, sys.masses);
  RescaledProblem id = rescale(compact, -1.0, 0.25);
  CHECK(id.eps == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(id.nu == doctest::Approx(0.25).epsilon(1e-15));
  for (int k = 0; k < 3; ++k) {
    CHECK(id.system.centres[k].x == doctest::Approx(compact.centres[k].x));
    CHECK(id.system.centres[k].y == doctest::Approx(compact.centres[k].y));
  }
  auto [h_id, nu_id] = rescale_inverse(make_rescaled(compact, 0.3, 0.25), compact);
  CHECK(h_id == doctest::Approx(-1.0).epsilon(1e-14));  // eps equal to max|c_k|
  CHECK(nu_id == doctest::Approx(0.25).epsilon(1e-14));

  RescaledProblem q = rescale(sys, -0.25, 1.0);
  CHECK(q.eps == doctest::Approx(0.25 * 0.5).epsilon(1e-14));
  CHECK(q.nu == doctest::Approx(8.0).epsilon(1e-14));  // 0.25^(-3/2)

  CHECK(circle_radius(2.0, 1.0) == doctest::Approx(1.0));
  // high-precision oracle for the alpha = 1.5 radius
  long double r15 = expl(logl(1.0L / 3.0L) * (1.0L / 1.5L));
  CHECK(circle_radius(2.0, 1.5) == doctest::Approx((double)r15).epsilon(1e-12));
  CHECK(circle_radius(2.0, 1.5) == doctest::Approx(0.480750).epsilon(1e-5));

  RescaledProblem w = make_rescaled(sys, 0.1, 0.0);
  CHECK(w.phi_floor == doctest::Approx(2.0 / 1.1 - 1.0).epsilon(1e-15));
}

TEST_CASE("rescale: admissibility violation is an error") {
  CentreSystem sys = fixtures::equilateral3();
  CHECK_THROWS_AS(make_rescaled(sys, 0.6, 0.0), AdmissibilityError);
  CHECK_THROWS_AS(rescale(sys, 1.0, 0.0), Error);  // h must be negative
}

TEST_CASE("rescale_inverse: round trips and monotonicity") {
  CentreSystem sys = fixtures::equilateral3();

  RescaledProblem p = make_rescaled(sys, 0.05, 0.02);
  auto [h, nu] = rescale_inverse(p, sys);
  CHECK(h == doctest::Approx(-0.1).epsilon(1e-14));
  RescaledProblem back = rescale(sys, h, nu);
  CHECK(back.eps == doctest::Approx(p.eps).epsilon(1e-13));
  CHECK(back.nu == doctest::Approx(p.nu).epsilon(1e-13));

  RescaledProblem full = make_rescaled(sys, 0.45, 0.0);
  auto [h2, nu2] = rescale_inverse(full, sys);
  CHECK(h2 == doctest::Approx(-0.9).epsilon(1e-13));
  CHECK(nu2 == 0.0);

  // h strictly decreasing in eps, sampled over a grid and two alphas
  for (double alpha : {1.0, 1.5}) {
    CentreSystem s2 = CentreSystem::create(alpha, sys.centres, sys.masses);
    double prev = 0.0;
    for (double eps = 0.02; eps < 0.2; eps += 0.02) {
      RescaledProblem pr = make_rescaled(s2, eps, 0.0);
      auto [hh, dummy] = rescale_inverse(pr, s2);
      (void)dummy;
      CHECK(hh < prev);
      prev = hh;
    }
  }

  CHECK_THROWS_AS(rescale_inverse(make_rescaled(fixtures::single_centre(), 0.0, 0.0),
                                  fixtures::single_centre()),
                  Error);
}

TEST_CASE("rescale round trip: 1000 random configurations within 1e-12") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    int n = 3 + static_cast<int>(unif(rng) * 3.999);
    double alpha = 1.0 + 0.95 * unif(rng);
    std::vector<Vec2> centres;
    std::vector<double> masses;
    Vec2 acc{0, 0};
    double mtot = 0.0;
    for (int k = 0; k < n; ++k) {
      Vec2 c{2.0 * unif(rng) - 1.0, 2.0 * unif(rng) - 1.0};
      double m = 0.2 + unif(rng);
      centres.push_back(c);
      masses.push_back(m);
      acc += m * c;
      mtot += m;
    }
    for (Vec2& c : centres) c -= acc / mtot;  // centre the configuration
    CentreSystem sys = CentreSystem::create(alpha, centres, masses);
    if (sys.max_centre_norm() < 1e-3) continue;
    double R = circle_radius(sys.total_mass, alpha);
    double eps = unif(rng) * 0.45 * R;
    if (eps < 1e-6) continue;
    double nup = 2.0 * unif(rng) - 1.0;
    RescaledProblem p = make_rescaled(sys, eps, nup);
    auto [h, nu] = rescale_inverse(p, sys);
    RescaledProblem back = rescale(sys, h, nu);
    CHECK(std::abs(back.eps - eps) < 1e-12);
    CHECK(std::abs(back.nu - nup) < 1e-12);
  }
}

TEST_CASE("gradients match central finite differences") {
  CentreSystem sys = fixtures::equilateral3();
  RescaledProblem p = make_rescaled(sys, 0.05, 0.07);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> unif(-1.5, 1.5);
  int tested = 0;
  while (tested < 100) {
    Vec2 y{unif(rng), unif(rng)};
    bool ok = true;
    for (const Vec2& c : p.system.centres)
      if (norm(y - c) < 0.05) ok = false;
    if (!ok) continue;
    ++tested;
    const double step = 1e-6;
    for (auto eval : {+0, +1}) {
      auto f = [&](Vec2 z) {
        return eval == 0 ? potential(p.system, z).value : effective_potential(p, z).value;
      };
      Vec2 grad = eval == 0 ? potential(p.system, y).grad : effective_potential(p, y).grad;
      Vec2 fd{(f({y.x + step, y.y}) - f({y.x - step, y.y})) / (2 * step),
              (f({y.x, y.y + step}) - f({y.x, y.y - step})) / (2 * step)};
      CHECK(norm(grad - fd) <= 1e-5 * std::max(1.0, norm(fd)));
    }
  }
}

TEST_CASE("disc floor and Hill region: Phi - 1 >= M1 on a grid of the disc") {
  RescaledProblem p = make_rescaled(fixtures::equilateral3(), 0.05, 0.1);
  const int n = 60;
  for (int i = -n; i <= n; ++i) {
    for (int j = -n; j <= n; ++j) {
      Vec2 y{p.radius * i / n, p.radius * j / n};
      if (norm(y) > p.radius) continue;
      bool near = false;
      for (const Vec2& c : p.system.centres)
        if (norm(y - c) < 1e-6) near = true;
      if (near) continue;
      double phi = effective_potential(p, y).value;
      CHECK(phi - 1.0 >= p.phi_floor - 1e-12);
      CHECK(phi >= 1.0);  // the disc sits inside the Hill region
    }
  }
}

TEST_CASE("perturbation decay on the annulus as (eps, nu) -> 0") {
  CentreSystem sys = fixtures::equilateral3();
  const double R = circle_radius(sys.total_mass, sys.alpha);
  const double outer = 2.0 * std::pow(sys.total_mass / sys.alpha, 1.0 / sys.alpha);
  std::vector<Vec2> grid;
  for (int i = 0; i < 24; ++i)
    for (int j = 1; j <= 8; ++j)
      grid.push_back(from_polar(R + (outer - R) * j / 8.0, 2.0 * M_PI * i / 24.0));

  double prev = 1e300;
  for (int m = 2; m <= 8; ++m) {
    double eps = std::pow(2.0, -m);
    RescaledProblem p = make_rescaled(sys, eps, eps);
    double worst = 0.0;
    for (const Vec2& y : grid) {
      double v0 = sys.total_mass / (sys.alpha * std::pow(norm(y), sys.alpha));
      worst = std::max(worst, std::abs(effective_potential(p, y).value - v0));
    }
    CHECK(worst < prev);
    prev = worst;
  }
}

TEST_CASE("map_to_inertial: identity, half turn, rotation oracle on a brake sample") {
  Trajectory z{{0.0, {1, 0}, {0, 1}}, {1.0, {1, 0}, {0, 1}}};
  Trajectory same = map_to_inertial(z, 0.0);
  CHECK(same[1].pos.x == doctest::Approx(1.0));
  CHECK(same[1].pos.y == doctest::Approx(0.0));

  Trajectory half = map_to_inertial(z, M_PI);
  CHECK(half[1].pos.x == doctest::Approx(-1.0));
  CHECK(half[1].pos.y == doctest::Approx(0.0).epsilon(1e-12));

  OuterArc brake = brake_orbit({1.0, 0.0}, 2.0, 1.0);
  Trajectory rot = map_to_inertial(brake.samples, 0.01);
  for (size_t i = 0; i < rot.size(); i += 50) {
    Vec2 expect = rotate(brake.samples[i].pos, 0.01 * brake.samples[i].t);
    CHECK(norm(rot[i].pos - expect) < 1e-14);
  }
}

TEST_CASE("unscale_solution: scaling exponents and Jacobi constant restoration") {
  Trajectory y{{0.0, {1, 0}, {0, 0.5}}, {8.0, {2, 0}, {0.25, 0}}};
  Trajectory z = unscale_solution(y, -0.25, 1.0);
  // amplitudes x4, time x8, velocities x0.5
  CHECK(z[1].pos.x == doctest::Approx(8.0));
  CHECK(z[1].t == doctest::Approx(64.0));
  CHECK(z[1].vel.x == doctest::Approx(0.125));

  Trajectory id = unscale_solution(y, -1.0, 1.0);
  CHECK(id[1].pos.x == doctest::Approx(2.0));
  CHECK(id[1].t == doctest::Approx(8.0));

  // numeric check on a shot outer arc: unscaled samples hold J_nu = h for the original
  CentreSystem sys = fixtures::equilateral3();
  RescaledProblem p = make_rescaled(sys, 0.05, 0.02);
  auto [h, nu] = rescale_inverse(p, sys);
  OuterArc arc = shoot(p, from_polar(p.radius, 0.1), from_polar(p.radius, 0.15));
  Trajectory zarc = unscale_solution(arc.samples, h, sys.alpha);
  for (size_t i = 0; i < zarc.size(); i += 97) {
    double J = jacobi_constant(sys, nu, {zarc[i].pos, zarc[i].vel});
    CHECK(J == doctest::Approx(h).epsilon(1e-7));
  }
}

TEST_CASE("centre of mass handling") {
  // tiny violation is corrected silently
  std::vector<Vec2> c{{0.5, 1e-13}, {-0.25, 0.433}, {-0.25, -0.433}};
  CentreSystem sys = CentreSystem::create(1.0, c, {1.0, 1.0, 1.0});
  Vec2 com{0, 0};
  for (int k = 0; k < 3; ++k) com += (1.0 / 3.0) * sys.centres[k];
  CHECK(norm(com) < 1e-14);

  std::vector<Vec2> bad{{0.5, 0.01}, {-0.25, 0.433}, {-0.25, -0.433}};
  CHECK_THROWS_AS(CentreSystem::create(1.0, bad, {1.0, 1.0, 1.0}), Error);
}
