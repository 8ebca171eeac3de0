#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "rotnc/inner.hpp"

using namespace rotnc;

namespace {

RescaledProblem cfgA(double eps = 0.05, double nu = 0.01) {
  return make_rescaled(fixtures::equilateral3(), eps, nu);
}

DiscretePath sample_curve(const std::function<Vec2(double)>& gamma, int m) {
  DiscretePath path;
  for (int i = 0; i <= m; ++i) path.nodes.push_back(gamma(double(i) / m));
  return path;
}

// an analytic loop inside the disc that stays clear of the CFG-A centres
Vec2 test_loop(double t) {
  double ang = 2.0 * M_PI * t;
  return Vec2{0.30 + 0.18 * std::cos(ang), 0.05 + 0.26 * std::sin(ang)};
}

std::mt19937 g_rng(17);

DiscretePath random_feasible_path(const RescaledProblem& p, int m) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  while (true) {
    double a = 2.0 * M_PI * unif(g_rng);
    double b = a + 0.5 + 4.0 * unif(g_rng);
    Vec2 p1 = from_polar(p.radius, a), p2 = from_polar(p.radius, b);
    double amp = 0.3 * unif(g_rng);
    double phase = 2.0 * M_PI * unif(g_rng);
    DiscretePath path = sample_curve(
        [&](double t) {
          Vec2 chord = p1 + t * (p2 - p1);
          Vec2 n = rot90(normalized(p2 - p1));
          return chord + amp * std::sin(M_PI * t + phase) * std::sin(M_PI * t) * n;
        },
        m);
    bool ok = true;
    for (const Vec2& u : path.nodes)
      if (norm(u) > p.radius) ok = false;
    if (!ok) continue;
    if (collision_margin(path, p).distance < 0.02) continue;
    return path;
  }
}

}  // namespace

TEST_CASE("maupertuis value: nu = 0 reduction to the classical functional") {
  RescaledProblem p = cfgA(0.05, 0.0);
  DiscretePath path = sample_curve(test_loop, 128);
  PathIntegrals I = path_integrals(path, p);
  double classical = 0.5 * I.kinetic * I.potential;
  CHECK(maupertuis_value(path, p) ==
        doctest::Approx(2.0 * std::sqrt(classical)).epsilon(1e-12));
}

TEST_CASE("maupertuis value: circulation term of a circle") {
  RescaledProblem p = cfgA(0.05, 0.1);
  // u(t) = r (cos 2 pi t, sin 2 pi t), r = 0.1: the circulation integral is 2 pi r^2
  DiscretePath path = sample_curve(
      [](double t) { return Vec2{0.1 * std::cos(2 * M_PI * t), 0.1 * std::sin(2 * M_PI * t)}; },
      4096);
  PathIntegrals I = path_integrals(path, p);
  CHECK(p.nu * I.circulation == doctest::Approx(0.1 * 0.02 * M_PI).epsilon(1e-6));
  CHECK(0.1 * 0.02 * M_PI == doctest::Approx(0.0062832).epsilon(1e-4));
}

TEST_CASE("maupertuis value: agreement with a high-resolution quadrature oracle") {
  RescaledProblem p = cfgA(0.05, 0.02);
  double coarse = maupertuis_value(sample_curve(test_loop, 256), p);
  double fine = oracles::maupertuis_highres(test_loop, p, 4096);
  CHECK(coarse == doctest::Approx(fine).epsilon(2e-4));
}

TEST_CASE("maupertuis gradient matches finite differences") {
  RescaledProblem p = cfgA(0.05, 0.03);
  for (int trial = 0; trial < 8; ++trial) {
    DiscretePath path = random_feasible_path(p, 48);
    std::vector<Vec2> g = maupertuis_gradient(path, p);
    auto f = [&](const std::vector<Vec2>& nodes) {
      DiscretePath q;
      q.nodes = nodes;
      return maupertuis_value(q, p);
    };
    std::vector<Vec2> fd = oracles::fd_gradient(f, path.nodes, 1e-7);
    double num = 0.0, den = 0.0;
    for (size_t i = 1; i + 1 < g.size(); ++i) {
      num += norm2(g[i] - fd[i]);
      den += norm2(fd[i]);
    }
    CHECK(std::sqrt(num / den) < 1e-4);
  }
}

TEST_CASE("jacobi length: radial segment against an adaptive quadrature oracle") {
  RescaledProblem p = make_rescaled(fixtures::single_centre(2.0, 1.0), 0.0, 0.0);
  // straight radial segment from r=0.3 to r=0.9 in a single-centre field
  DiscretePath path = sample_curve([](double t) { return Vec2{0.3 + 0.6 * t, 0.0}; }, 200);
  double L = jacobi_length(path, p);
  double oracle = oracles::romberg(
      [&](double r) { return std::sqrt(2.0 / r - 1.0); }, 0.3, 0.9, 1e-12);
  CHECK(L == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("jacobi length: Hoelder inequality against the Maupertuis value") {
  RescaledProblem p = cfgA(0.05, 0.02);
  for (int trial = 0; trial < 100; ++trial) {
    DiscretePath path = random_feasible_path(p, 64);
    double L = jacobi_length(path, p);
    double M = maupertuis_value(path, p);
    CHECK(std::sqrt(2.0) * L <= M * (1.0 + 1e-9));
  }
}

TEST_CASE("jacobi length: orientation reversal flips only the circulation term") {
  RescaledProblem p = cfgA(0.05, 0.08);
  DiscretePath path = random_feasible_path(p, 64);
  DiscretePath rev = path;
  std::reverse(rev.nodes.begin(), rev.nodes.end());
  double circ = path_integrals(path, p).circulation;
  double diff = jacobi_length(rev, p) - jacobi_length(path, p);
  CHECK(diff == doctest::Approx(-2.0 * p.nu / std::sqrt(2.0) * circ).epsilon(1e-10));
}

TEST_CASE("jacobi length: invariance under reparametrization at the same image") {
  RescaledProblem p = cfgA(0.05, 0.02);
  DiscretePath path = random_feasible_path(p, 64);
  double L0 = jacobi_length(path, p);
  // resample under a smooth increasing grid map, keeping every original corner so the
  // geometric image is unchanged
  std::vector<double> params;
  for (int i = 0; i <= 64; ++i) params.push_back(double(i) / 64);
  for (int i = 0; i <= 64; ++i) {
    double s = double(i) / 64;
    params.push_back(s * s * (3 - 2 * s));  // smooth increasing map
  }
  std::sort(params.begin(), params.end());
  params.erase(std::unique(params.begin(), params.end()), params.end());
  DiscretePath re;
  for (double t : params) {
    double scaled = t * 64;
    int j = std::min(static_cast<int>(scaled), 63);
    double frac = scaled - j;
    re.nodes.push_back(path.nodes[j] + frac * (path.nodes[j + 1] - path.nodes[j]));
  }
  CHECK(jacobi_length(re, p) == doctest::Approx(L0).epsilon(1e-8));
}

TEST_CASE("omega: ratio formula and duration") {
  RescaledProblem p = cfgA(0.05, 0.02);
  DiscretePath path = random_feasible_path(p, 64);
  PathIntegrals I = path_integrals(path, p);
  double w = omega_of(path, p);
  CHECK(w * w == doctest::Approx(I.potential / (0.5 * I.kinetic)).epsilon(1e-12));
  CHECK(w > 0.0);
}

TEST_CASE("initial guess: class realization checked by the winding oracle") {
  RescaledProblem p = cfgA();
  auto parts = enumerate_partitions(3);
  MinimizerConfig cfg;

  Vec2 p1 = from_polar(p.radius, 0.0), p2 = from_polar(p.radius, 0.0);
  DiscretePath g1 = initial_guess(p1, p2, ClassSpec::of(parts[0]), p, cfg);
  CHECK(partition_of(winding_vector(g1.nodes, p), 3) == parts[0]);

  // N = 4 square, partition {1,2}|{3,4}: the corridor runs along the symmetry axis
  RescaledProblem q = make_rescaled(fixtures::square4(), 0.05, 0.0);
  auto parts4 = enumerate_partitions(4);
  DiscretePath g2 = initial_guess(from_polar(q.radius, 1.5), from_polar(q.radius, 1.7),
                                  ClassSpec::of(parts4[6]), q, cfg);
  CHECK(partition_of(winding_vector(g2.nodes, q), 4) == parts4[6]);
  CHECK(collision_margin(g2, q).distance > 0.01);

  WindingVector bad{{0, 0, 0}};
  CHECK_THROWS_AS(initial_guess(p1, p2, ClassSpec::of(bad), p, cfg), Error);

  // explicit winding vector request
  WindingVector l{{1, 1, 0}};
  DiscretePath g3 = initial_guess(from_polar(p.radius, 2.0), from_polar(p.radius, 2.2),
                                  ClassSpec::of(l), p, cfg);
  CHECK(winding_vector(g3.nodes, p) == l);
}

TEST_CASE("minimize_inner: descent, class preservation, confinement, bounds") {
  RescaledProblem p = cfgA(0.05, 0.02);
  auto parts = enumerate_partitions(3);
  MinimizerConfig cfg;
  cfg.mesh = 128;
  Vec2 p1 = from_polar(p.radius, -2.7), p2 = from_polar(p.radius, -2.5);

  DiscretePath guess = initial_guess(p1, p2, ClassSpec::of(parts[1]), p, cfg);
  double f0 = maupertuis_value(guess, p);
  MinimizeResult res = minimize_inner(p1, p2, ClassSpec::of(parts[1]), p, cfg);
  CHECK(res.objective <= f0);
  CHECK(res.partition == parts[1]);
  CHECK_FALSE(res.collision_flag);
  CHECK(res.margin.distance > 1e-3);

  const double R = p.radius;
  for (const Vec2& u : res.path.nodes) CHECK(norm(u) <= R + 1e-12);

  // minimizer bounds: the path runs from the circle into the centre cluster and back
  PathIntegrals I = path_integrals(res.path, p);
  CHECK(std::sqrt(I.kinetic) >= 2.0 * (R - p.eps) * 0.95);
  CHECK(I.potential >= p.phi_floor);
}

TEST_CASE("minimize_inner: nu = 0 minimizer agrees with the classical functional") {
  RescaledProblem p = cfgA(0.05, 0.0);
  auto parts = enumerate_partitions(3);
  MinimizerConfig cfg;
  cfg.mesh = 96;
  Vec2 p1 = from_polar(p.radius, -2.8), p2 = from_polar(p.radius, -2.45);

  MinimizeResult res = minimize_inner(p1, p2, ClassSpec::of(parts[1]), p, cfg);

  // independent descent on the classical Maupertuis functional over the same mesh
  DiscretePath u = res.path;
  auto classical = [&](const DiscretePath& q) {
    PathIntegrals I = path_integrals(q, p);
    return 0.5 * I.kinetic * I.potential;
  };
  double step = 1e-3;
  for (int it = 0; it < 4000; ++it) {
    std::vector<Vec2> g = maupertuis_gradient(u, p);  // gradient of 2 sqrt(Mh)
    double val = classical(u);
    // d(Mh)/du = sqrt(Mh) * d(2 sqrt(Mh))/du; rescale accordingly
    double scale = std::sqrt(val);
    DiscretePath cand = u;
    bool moved = false;
    for (int i = 1; i < u.segments(); ++i) {
      cand.nodes[i] -= step * scale * g[i];
      if (norm(step * scale * g[i]) > 1e-14) moved = true;
      double r = norm(cand.nodes[i]);
      if (r > p.radius) cand.nodes[i] = (p.radius / r) * cand.nodes[i];
    }
    if (!moved) break;
    if (classical(cand) < val)
      u = cand;
    else
      step *= 0.5;
    if (step < 1e-12) break;
  }
  // the classical descent should not move away: the two objectives are monotone
  // transforms of each other
  double h1 = 0.0;
  const int m = res.path.segments();
  for (int j = 0; j < m; ++j) {
    Vec2 d = (u.nodes[j + 1] - u.nodes[j]) - (res.path.nodes[j + 1] - res.path.nodes[j]);
    h1 += norm2(d) * m;
  }
  for (int i = 0; i <= m; ++i) h1 += norm2(u.nodes[i] - res.path.nodes[i]) / m;
  CHECK(std::sqrt(h1) < 1e-6);
}

TEST_CASE("minimize_inner: objective difference scales linearly in nu") {
  RescaledProblem base = cfgA(0.05, 0.0);
  auto parts = enumerate_partitions(3);
  MinimizerConfig cfg;
  cfg.mesh = 128;
  Vec2 p1 = from_polar(base.radius, M_PI), p2 = from_polar(base.radius, -2.6);

  auto solve = [&](double nu) {
    RescaledProblem p = base;
    p.nu = nu;
    return minimize_inner(p1, p2, ClassSpec::of(parts[1]), p, cfg).objective;
  };
  double f0 = solve(0.0);
  double d1 = std::abs(solve(0.02) - f0);
  double d2 = std::abs(solve(0.01) - f0);
  double ratio = d2 / d1;
  CHECK(ratio > 0.3);
  CHECK(ratio < 0.7);
}

TEST_CASE("reparametrize: duration, pointwise Jacobi constant, speed consistency") {
  RescaledProblem p = cfgA(0.05, 0.01);
  auto parts = enumerate_partitions(3);
  MinimizerConfig cfg;
  Vec2 p1 = from_polar(p.radius, -2.67), p2 = from_polar(p.radius, -2.56);
  MinimizeResult res = minimize_inner(p1, p2, ClassSpec::of(parts[1]), p, cfg);
  InnerArc arc = reparametrize(res, p);

  CHECK(arc.duration == doctest::Approx(1.0 / omega_of(res.path, p)).epsilon(1e-12));
  for (const StateSample& s : arc.samples) {
    double J = jacobi_constant(p, {s.pos, s.vel});
    CHECK(std::abs(J + 1.0) < 1e-5);
  }
  SpeedConsistency sc = speed_consistency(arc, p);
  CHECK(sc.max_ratio_deviation < 1e-3);
  CHECK(sc.holder_defect < 1e-6);
}

TEST_CASE("reparametrize: second-order residual decay under mesh refinement") {
  RescaledProblem p = cfgA(0.05, 0.01);
  auto parts = enumerate_partitions(3);
  Vec2 p1 = from_polar(p.radius, -2.67), p2 = from_polar(p.radius, -2.56);

  auto residual = [&](int mesh) {
    MinimizerConfig cfg;
    cfg.mesh = mesh;
    MinimizeResult res = minimize_inner(p1, p2, ClassSpec::of(parts[1]), p, cfg);
    InnerArc arc = reparametrize(res, p);
    // second-order finite differences on the nonuniform samples, interior only,
    // excluding near-contact segments
    double worst = 0.0;
    const auto& s = arc.samples;
    for (size_t i = 1; i + 1 < s.size(); ++i) {
      double h1 = s[i].t - s[i - 1].t, h2 = s[i + 1].t - s[i].t;
      if (h1 <= 0 || h2 <= 0) continue;
      Vec2 acc = 2.0 * ((s[i - 1].pos * (1.0 / (h1 * (h1 + h2)))) -
                        (s[i].pos * (1.0 / (h1 * h2))) +
                        (s[i + 1].pos * (1.0 / (h2 * (h1 + h2)))));
      Vec2 rhs = effective_potential(p, s[i].pos).grad - 2.0 * p.nu * rot90(s[i].vel);
      worst = std::max(worst, norm(acc - rhs));
    }
    return worst;
  };
  double r128 = residual(128);
  double r256 = residual(256);
  CHECK(r256 < r128);
  double ratio = r128 / r256;
  CHECK(ratio > 2.0);  // second-order scheme: ~4x per mesh doubling
}

TEST_CASE("collision margin: exact segment distances") {
  RescaledProblem p = cfgA();
  DiscretePath through;
  through.nodes = {p.system.centres[0] + Vec2{-0.1, 0.0}, p.system.centres[0] + Vec2{0.1, 0.0}};
  CollisionMargin m0 = collision_margin(through, p);
  CHECK(m0.distance == doctest::Approx(0.0));
  CHECK(m0.centre == 1);

  RescaledProblem lone = make_rescaled(fixtures::single_centre(2.0, 1.0), 0.0, 0.0);
  DiscretePath circle = sample_curve(
      [&](double t) { return from_polar(0.3, 2 * M_PI * t); }, 256);
  CollisionMargin m1 = collision_margin(circle, lone);
  CHECK(m1.distance == doctest::Approx(0.3).epsilon(1e-3));
  CHECK(m1.centre == 1);
}

TEST_CASE("collision margin: solver output verified by brute force at 10x resolution") {
  RescaledProblem p = cfgA(0.05, 0.02);
  auto parts = enumerate_partitions(3);
  MinimizerConfig cfg;
  cfg.mesh = 128;
  Vec2 p1 = from_polar(p.radius, -2.7), p2 = from_polar(p.radius, -2.5);
  MinimizeResult res = minimize_inner(p1, p2, ClassSpec::of(parts[1]), p, cfg);
  CHECK(res.margin.distance > 0.0);
  double brute = std::numeric_limits<double>::max();
  for (int j = 0; j < res.path.segments(); ++j) {
    for (int s = 0; s <= 100; ++s) {
      Vec2 x = res.path.nodes[j] +
               (double(s) / 100.0) * (res.path.nodes[j + 1] - res.path.nodes[j]);
      for (const Vec2& c : p.system.centres) brute = std::min(brute, norm(x - c));
    }
  }
  // point sampling can only overestimate the exact point-to-segment minimum
  CHECK(res.margin.distance <= brute + 1e-12);
  CHECK(res.margin.distance >= brute - 1e-5);
}

TEST_CASE("forward normal neighbourhood: unique short minimizer under multi-start") {
  RescaledProblem p = cfgA(0.05, 0.01);
  MinimizerConfig cfg;
  Vec2 p1 = from_polar(p.radius, 0.30), p2 = from_polar(p.radius * 0.97, 0.36);
  ForwardNormalReport rep = forward_normal_check(p1, p2, p, cfg, 5);
  CHECK(rep.unique);
  CHECK(rep.max_disagreement < 1e-6);
}
