#include "rotnc/lbfgs.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <limits>

namespace rotnc {

namespace {

double dot_nodes(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += dot(a[i], b[i]);
  return s;
}

double norm_nodes(const std::vector<Vec2>& a) { return std::sqrt(dot_nodes(a, a)); }

}  // namespace

ProjectedLbfgsResult minimize_projected(std::vector<Vec2> x, const NodeObjective& f,
                                        const NodeGradient& grad, const NodeProjection& project,
                                        const GradientProjection& project_gradient,
                                        const NodePredicate& admissible,
                                        const NodePreconditioner& precondition,
                                        const ProjectedLbfgsOptions& opt,
                                        const NodePredicate& abort_when) {
  struct Pair {
    std::vector<Vec2> s, y;
    double rho;
  };
  std::deque<Pair> mem;

  ProjectedLbfgsResult out;
  project(x);
  double fx = f(x);
  std::vector<Vec2> g = grad(x);
  const bool trace = std::getenv("ROTNC_TRACE") != nullptr;

  auto lbfgs_direction = [&](const std::vector<Vec2>& pg) {
    std::vector<Vec2> q = pg;
    std::vector<double> alpha(mem.size());
    for (size_t i = mem.size(); i-- > 0;) {
      alpha[i] = mem[i].rho * dot_nodes(mem[i].s, q);
      for (size_t k = 0; k < q.size(); ++k) q[k] -= alpha[i] * mem[i].y[k];
    }
    q = precondition(q);
    for (size_t i = 0; i < mem.size(); ++i) {
      double beta = mem[i].rho * dot_nodes(mem[i].y, q);
      for (size_t k = 0; k < q.size(); ++k) q[k] += (alpha[i] - beta) * mem[i].s[k];
    }
    for (Vec2& v : q) v = -v;
    return q;
  };

  double best_pg = std::numeric_limits<double>::max();
  int last_progress = 0;

  for (int it = 0; it < opt.max_iterations; ++it) {
    std::vector<Vec2> pg = project_gradient(x, g);
    double pgn = norm_nodes(pg);
    if (pgn < 0.99 * best_pg) {
      best_pg = pgn;
      last_progress = it;
    }
    if (it - last_progress > 64) {  // numerical floor reached short of the tolerance
      out.x = std::move(x);
      out.value = fx;
      out.projected_gradient_norm = pgn;
      out.iterations = it;
      out.stalled = true;
      return out;
    }
    if (trace && it % 200 == 0)
      std::fprintf(stderr, "[lbfgs] it=%d f=%.10f pg=%.3e\n", it, fx, pgn);
    if (pgn < opt.tol) {
      out.x = std::move(x);
      out.value = fx;
      out.projected_gradient_norm = pgn;
      out.iterations = it;
      out.converged = true;
      return out;
    }

    bool accepted = false;

    // Armijo backtracking, first along the quasi-Newton direction, then along the
    // preconditioned gradient with the memory dropped.
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      if (attempt == 1) {
        if (mem.empty()) break;
        mem.clear();
      }
      std::vector<Vec2> dir = lbfgs_direction(pg);
      double slope = dot_nodes(g, dir);
      if (slope >= 0.0) {
        mem.clear();
        dir = precondition(pg);
        for (Vec2& v : dir) v = -v;
        slope = dot_nodes(g, dir);
      }
      // expected decreases below roundoff cannot be verified; defer to the
      // gradient-norm phase instead of accepting noise
      if (std::abs(slope) < 1e-13 * (1.0 + std::abs(fx))) break;
      double t = 1.0;
      for (int half = 0; half <= opt.max_halvings && !accepted; ++half, t *= 0.5) {
        std::vector<Vec2> cand(x.size());
        for (size_t k = 0; k < x.size(); ++k) cand[k] = x[k] + t * dir[k];
        project(cand);
        if (!admissible(cand)) continue;
        double fc = f(cand);
        if (fc <= fx + opt.armijo * t * slope) {
          std::vector<Vec2> gnew = grad(cand);
          Pair p;
          p.s.resize(x.size());
          p.y.resize(x.size());
          for (size_t k = 0; k < x.size(); ++k) {
            p.s[k] = cand[k] - x[k];
            p.y[k] = gnew[k] - g[k];
          }
          double sy = dot_nodes(p.s, p.y);
          if (sy > 1e-12 * norm_nodes(p.s) * norm_nodes(p.y)) {
            p.rho = 1.0 / sy;
            mem.push_back(std::move(p));
            if (static_cast<int>(mem.size()) > opt.history) mem.pop_front();
          }
          x = std::move(cand);
          fx = fc;
          g = std::move(gnew);
          accepted = true;
        }
      }
    }

    if (!accepted) {
      // objective differences are below roundoff here; accept on a decrease of the
      // projected-gradient norm along the preconditioned gradient instead
      std::vector<Vec2> dir = precondition(pg);
      for (Vec2& v : dir) v = -v;
      double t = 1.0;
      for (int half = 0; half <= opt.max_halvings && !accepted; ++half, t *= 0.5) {
        std::vector<Vec2> cand(x.size());
        for (size_t k = 0; k < x.size(); ++k) cand[k] = x[k] + t * dir[k];
        project(cand);
        if (!admissible(cand)) continue;
        std::vector<Vec2> gnew = grad(cand);
        double pn = norm_nodes(project_gradient(cand, gnew));
        if (trace && half < 3)
          std::fprintf(stderr, "[polish] it=%d t=%.3g pg %.3e -> %.3e\n", it, t, pgn, pn);
        if (pn < 0.995 * pgn) {
          x = std::move(cand);
          fx = f(x);
          g = std::move(gnew);
          mem.clear();
          accepted = true;
        }
      }
    }

    if (accepted && abort_when && abort_when(x)) {
      if (trace) std::fprintf(stderr, "[lbfgs] abort at it=%d f=%.8f\n", it, fx);
      out.x = std::move(x);
      out.value = fx;
      out.projected_gradient_norm = pgn;
      out.iterations = it;
      out.stalled = true;
      out.aborted = true;
      return out;
    }
    if (!accepted) {
      if (trace) std::fprintf(stderr, "[lbfgs] stall at it=%d f=%.10f pg=%.3e\n", it, fx, pgn);
      out.x = std::move(x);
      out.value = fx;
      out.projected_gradient_norm = pgn;
      out.iterations = it;
      out.stalled = true;
      return out;
    }
  }

  out.x = std::move(x);
  out.value = fx;
  std::vector<Vec2> pg = project_gradient(out.x, g);
  out.projected_gradient_norm = norm_nodes(pg);
  out.iterations = opt.max_iterations;
  out.stalled = true;
  return out;
}

}  // namespace rotnc
