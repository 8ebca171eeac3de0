#include "rotnc/inner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "rotnc/lbfgs.hpp"
#include <memory>

#include "rotnc/quadrature.hpp"

namespace rotnc {

namespace {

double segment_point_distance(Vec2 a, Vec2 b, Vec2 p, double* t_out = nullptr) {
  Vec2 d = b - a;
  double len2 = norm2(d);
  double t = len2 > 0.0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
  if (t_out) *t_out = t;
  return norm(p - (a + t * d));
}

double field_speed(const RescaledProblem& problem, Vec2 y) {
  double phi = effective_potential(problem, y).value;
  double rad = 2.0 * (phi - 1.0);
  if (rad <= 0.0) throw Error("Phi - 1 nonpositive along an inner path");
  return std::sqrt(rad);
}

}  // namespace

namespace {

// 4-panel 8-point Gauss rule on [0, 1]; the nodes resolve a potential spike anywhere
// along a segment, which a node-based rule would tunnel through.
struct SegmentRule {
  static constexpr int kPoints = 32;
  double sigma[kPoints];
  double weight[kPoints];

  SegmentRule() {
    static const double xs[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                 0.9602898564975363};
    static const double ws[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                 0.1012285362903763};
    int idx = 0;
    for (int p = 0; p < 4; ++p) {
      double c = (p + 0.5) / 4.0, h = 0.5 / 4.0;
      for (int i = 0; i < 4; ++i) {
        sigma[idx] = c - h * xs[i];
        weight[idx] = ws[i] * h;
        ++idx;
        sigma[idx] = c + h * xs[i];
        weight[idx] = ws[i] * h;
        ++idx;
      }
    }
  }
};

const SegmentRule& segment_rule() {
  static const SegmentRule rule;
  return rule;
}

}  // namespace

PathIntegrals path_integrals(const DiscretePath& path, const RescaledProblem& problem) {
  const int m = path.segments();
  if (m < 1) throw Error("path needs at least one segment");
  const double dt = 1.0 / m;
  const SegmentRule& rule = segment_rule();

  PathIntegrals out;
  for (int j = 0; j < m; ++j) {
    Vec2 a = path.nodes[j];
    Vec2 d = path.nodes[j + 1] - path.nodes[j];
    out.kinetic += norm2(d) / dt;
    out.circulation += cross(path.nodes[j], path.nodes[j + 1]);
    double seg = 0.0;
    for (int q = 0; q < SegmentRule::kPoints; ++q)
      seg += rule.weight[q] *
             (effective_potential(problem, a + rule.sigma[q] * d).value - 1.0);
    out.potential += dt * seg;
  }
  return out;
}

double maupertuis_value(const DiscretePath& path, const RescaledProblem& problem) {
  PathIntegrals I = path_integrals(path, problem);
  if (I.potential <= 0.0)
    throw Error("Maupertuis functional undefined: int(Phi - 1) <= 0 on the path");
  return std::sqrt(2.0 * I.kinetic * I.potential) + problem.nu * I.circulation;
}

std::vector<Vec2> maupertuis_gradient(const DiscretePath& path, const RescaledProblem& problem) {
  const int m = path.segments();
  const double dt = 1.0 / m;
  PathIntegrals I = path_integrals(path, problem);
  if (I.potential <= 0.0 || I.kinetic <= 0.0)
    throw Error("Maupertuis gradient undefined on a degenerate path");

  const double cK = std::sqrt(2.0) * std::sqrt(I.potential) / (2.0 * std::sqrt(I.kinetic));
  const double cP = std::sqrt(2.0) * std::sqrt(I.kinetic) / (2.0 * std::sqrt(I.potential));

  // per-segment quadrature of the potential gradient, split between the two end nodes
  const SegmentRule& rule = segment_rule();
  std::vector<Vec2> gP(path.nodes.size(), Vec2{0, 0});
  for (int j = 0; j < m; ++j) {
    Vec2 a = path.nodes[j];
    Vec2 d = path.nodes[j + 1] - path.nodes[j];
    Vec2 acc_lo{0, 0}, acc_hi{0, 0};
    for (int q = 0; q < SegmentRule::kPoints; ++q) {
      Vec2 gq = effective_potential(problem, a + rule.sigma[q] * d).grad;
      acc_lo += (rule.weight[q] * (1.0 - rule.sigma[q])) * gq;
      acc_hi += (rule.weight[q] * rule.sigma[q]) * gq;
    }
    gP[j] += dt * acc_lo;
    gP[j + 1] += dt * acc_hi;
  }

  std::vector<Vec2> g(path.nodes.size());
  for (int i = 0; i <= m; ++i) {
    Vec2 gK{0, 0};
    if (i > 0) gK += (2.0 / dt) * (path.nodes[i] - path.nodes[i - 1]);
    if (i < m) gK -= (2.0 / dt) * (path.nodes[i + 1] - path.nodes[i]);

    Vec2 gC{0, 0};
    if (i > 0) gC += rot90(path.nodes[i - 1]);
    if (i < m) gC -= rot90(path.nodes[i + 1]);

    g[i] = cK * gK + cP * gP[i] + problem.nu * gC;
  }
  return g;
}

double jacobi_length(const DiscretePath& path, const RescaledProblem& problem) {
  const int m = path.segments();
  double circulation = 0.0;
  double core = 0.0;
  for (int j = 0; j < m; ++j) {
    Vec2 a = path.nodes[j], d = path.nodes[j + 1] - path.nodes[j];
    double len = norm(d);
    circulation += cross(path.nodes[j], path.nodes[j + 1]);
    if (len == 0.0) continue;
    auto integrand = [&](double s) {
      double phi = effective_potential(problem, a + s * d).value;
      if (phi <= 1.0) throw Error("Phi - 1 nonpositive along an inner path");
      return std::sqrt(phi - 1.0);
    };
    double seg = 0.0;  // composite Gauss keeps the value tied to the geometric image
    for (int p = 0; p < 4; ++p) seg += gauss8(integrand, p / 4.0, (p + 1) / 4.0);
    core += seg * len;
  }
  return core + problem.nu / std::sqrt(2.0) * circulation;
}

double omega_of(const DiscretePath& path, const RescaledProblem& problem) {
  PathIntegrals I = path_integrals(path, problem);
  if (!(I.kinetic > 0.0)) throw Error("omega undefined: constant path");
  if (!(I.potential > 0.0)) throw Error("omega undefined: int(Phi - 1) <= 0");
  return std::sqrt(I.potential / (0.5 * I.kinetic));
}

CollisionMargin collision_margin(const DiscretePath& path, const RescaledProblem& problem) {
  CollisionMargin out;
  out.distance = std::numeric_limits<double>::max();
  const int m = path.segments();
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < problem.system.size(); ++k) {
      double t;
      double d = segment_point_distance(path.nodes[j], path.nodes[j + 1],
                                        problem.system.centres[k], &t);
      if (d < out.distance) {
        out.distance = d;
        out.centre = k + 1;
        out.parameter = (j + t) / m;
      }
    }
  }
  return out;
}

CollisionMargin collision_margin(const Trajectory& traj, const RescaledProblem& problem) {
  CollisionMargin out;
  out.distance = std::numeric_limits<double>::max();
  for (size_t j = 0; j + 1 < traj.size(); ++j) {
    for (int k = 0; k < problem.system.size(); ++k) {
      double t;
      double d = segment_point_distance(traj[j].pos, traj[j + 1].pos,
                                        problem.system.centres[k], &t);
      if (d < out.distance) {
        out.distance = d;
        out.centre = k + 1;
        out.parameter = traj[j].t + t * (traj[j + 1].t - traj[j].t);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// initial guess
// ---------------------------------------------------------------------------

namespace {

bool class_matches(const WindingVector& w, const ClassSpec& cls, int n) {
  if (cls.winding) return w == *cls.winding;
  if (cls.partition) {
    if (!w.admissible()) return false;
    return partition_of(w, n) == *cls.partition;
  }
  return true;
}

// Flip set for an explicit winding request.
std::vector<int> parity_flips(const WindingVector& have, const WindingVector& want, int n) {
  std::vector<int> flips;
  for (int k = 0; k < n; ++k)
    if (have.parities[k] != want.parities[k]) flips.push_back(k);
  return flips;
}

Vec2 side_centroid(const std::vector<int>& side, const RescaledProblem& problem) {
  Vec2 g{0, 0};
  for (int k : side) g += problem.system.centres[k - 1];
  return g / static_cast<double>(side.size());
}

// Counterclockwise convex hull (monotone chain); fine for a handful of points.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](Vec2 a, Vec2 b) { return norm(a - b) < 1e-15; }),
            pts.end());
  if (pts.size() <= 2) return pts;
  std::vector<Vec2> hull;
  auto build = [&](auto begin, auto end) {
    size_t base = hull.size();
    for (auto it = begin; it != end; ++it) {
      while (hull.size() >= base + 2 &&
             cross(hull.back() - hull[hull.size() - 2], *it - hull.back()) <= 0.0)
        hull.pop_back();
      hull.push_back(*it);
    }
    hull.pop_back();
  };
  build(pts.begin(), pts.end());
  build(pts.rbegin(), pts.rend());
  return hull;
}

double distance_to_hull(const std::vector<Vec2>& hull, Vec2 p) {
  if (hull.size() == 1) return norm(p - hull[0]);
  double best = std::numeric_limits<double>::max();
  for (size_t i = 0; i < hull.size(); ++i)
    best = std::min(best,
                    segment_point_distance(hull[i], hull[(i + 1) % hull.size()], p));
  return best;
}

// Closed counterclockwise loop at offset w around the convex hull of the given centres:
// rounded corners joined by edge-parallel segments (a circle or a stadium in the
// degenerate cases).  The loop starts at the vertex nearest to `near`.
std::vector<Vec2> offset_hull_loop(const std::vector<Vec2>& centres, double w, Vec2 near) {
  std::vector<Vec2> hull = convex_hull(centres);
  std::vector<Vec2> loop;
  const double step = M_PI / 16.0;
  if (hull.size() == 1) {
    int segs = 32;
    for (int s = 0; s < segs; ++s)
      loop.push_back(hull[0] + w * Vec2{std::cos(2.0 * M_PI * s / segs),
                                        std::sin(2.0 * M_PI * s / segs)});
  } else {
    const size_t h = hull.size();  // a 2-point hull yields the stadium around the pair
    for (size_t i = 0; i < h; ++i) {
      Vec2 prev = hull[(i + h - 1) % h], cur = hull[i], next = hull[(i + 1) % h];
      Vec2 d_in = normalized(cur - prev), d_out = normalized(next - cur);
      Vec2 n_in{d_in.y, -d_in.x}, n_out{d_out.y, -d_out.x};  // outward for a ccw hull
      double a0 = angle_of(n_in), a1 = angle_of(n_out);
      double turn = wrap_angle(a1 - a0);
      int segs = std::max(1, static_cast<int>(std::ceil(turn / step)));
      for (int s = 0; s <= segs; ++s)
        loop.push_back(cur + w * Vec2{std::cos(a0 + turn * s / segs),
                                      std::sin(a0 + turn * s / segs)});
    }
  }
  // rotate so the loop starts at the point nearest to `near`, then close it
  size_t start = 0;
  double best = std::numeric_limits<double>::max();
  for (size_t i = 0; i < loop.size(); ++i) {
    double d = norm(loop[i] - near);
    if (d < best) {
      best = d;
      start = i;
    }
  }
  std::rotate(loop.begin(), loop.begin() + start, loop.end());
  loop.push_back(loop.front());
  return loop;
}

std::vector<Vec2> dedup(std::vector<Vec2> pts) {
  std::vector<Vec2> out;
  for (const Vec2& p : pts)
    if (out.empty() || norm(p - out.back()) > 1e-14) out.push_back(p);
  return out;
}

DiscretePath resample_with_corners(const std::vector<Vec2>& corners, int mesh) {
  const int nseg = static_cast<int>(corners.size()) - 1;
  if (mesh < 2 * nseg)
    throw Error("mesh too coarse for the constructed class representative");
  std::vector<double> len(nseg);
  double total = 0.0;
  for (int j = 0; j < nseg; ++j) {
    len[j] = norm(corners[j + 1] - corners[j]);
    total += len[j];
  }
  std::vector<int> counts(nseg, 1);
  int assigned = nseg;
  while (assigned < mesh) {
    int best = 0;
    double worst = -1.0;
    for (int j = 0; j < nseg; ++j) {
      double load = len[j] / counts[j];
      if (load > worst) {
        worst = load;
        best = j;
      }
    }
    ++counts[best];
    ++assigned;
  }
  DiscretePath path;
  path.nodes.reserve(mesh + 1);
  for (int j = 0; j < nseg; ++j) {
    Vec2 a = corners[j], d = corners[j + 1] - corners[j];
    for (int s = 0; s < counts[j]; ++s) path.nodes.push_back(a + (double(s) / counts[j]) * d);
  }
  path.nodes.push_back(corners.back());
  return path;
}

}  // namespace

namespace {

// Splice a loop around the given centres into the waypoint chain.  Returns false when no
// attachment clears the other centres.
bool attach_loop(std::vector<Vec2>& wp, const std::vector<int>& group,
                 const RescaledProblem& problem, double guard) {
  const int n = problem.system.size();
  std::vector<Vec2> pts;
  for (int k : group) pts.push_back(problem.system.centres[k]);
  std::vector<Vec2> hull = convex_hull(pts);

  double clearance = std::numeric_limits<double>::max();
  for (int j = 0; j < n; ++j) {
    if (std::find(group.begin(), group.end(), j) != group.end()) continue;
    clearance = std::min(clearance, distance_to_hull(hull, problem.system.centres[j]));
  }
  double w_cap = 0.4 * problem.radius;  // keep the loop well inside the disc
  double w = std::min(0.5 * clearance, w_cap);
  if (!(w > 8.0 * guard)) return false;

  // attach at the waypoint nearest to the loop
  std::vector<int> order;
  for (size_t i = 1; i + 1 < wp.size(); ++i) order.push_back(static_cast<int>(i));
  Vec2 g{0, 0};
  for (const Vec2& c : pts) g += c / static_cast<double>(pts.size());
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return norm(wp[a] - g) < norm(wp[b] - g); });
  for (int idx : order) {
    std::vector<Vec2> loop = offset_hull_loop(pts, w, wp[idx]);
    bool clear = true;
    for (int j = 0; j < n && clear; ++j)
      if (segment_point_distance(wp[idx], loop.front(), problem.system.centres[j]) <
          std::max(4.0 * guard, 0.45 * w))
        clear = false;
    if (!clear) continue;
    std::vector<Vec2> next(wp.begin(), wp.begin() + idx + 1);
    next.insert(next.end(), loop.begin(), loop.end());
    next.insert(next.end(), wp.begin() + idx, wp.end());
    wp = dedup(std::move(next));
    return true;
  }
  return false;
}

// Per-centre fallback: one small loop per flipped parity.
bool attach_single_loops(std::vector<Vec2>& wp, const std::vector<int>& flips,
                         const RescaledProblem& problem, double guard) {
  for (int k : flips)
    if (!attach_loop(wp, {k}, problem, guard)) return false;
  return true;
}

}  // namespace

namespace {

// Recursive visibility routing: when the straight connection passes a centre too
// closely, bend around it on the biased side and route the two halves.
void route_clear(Vec2 from, Vec2 to, const RescaledProblem& problem, double clearance,
                 int side_bias, int depth, std::vector<Vec2>& out) {
  int worst = -1;
  double worst_d = clearance;
  for (int k = 0; k < problem.system.size(); ++k) {
    double d = segment_point_distance(from, to, problem.system.centres[k]);
    if (d < worst_d) {
      worst_d = d;
      worst = k;
    }
  }
  if (worst < 0 || depth <= 0) {
    out.push_back(to);
    return;
  }
  Vec2 c = problem.system.centres[worst];
  Vec2 dir = normalized(to - from);
  Vec2 perp = rot90(dir);
  double side = side_bias != 0 ? static_cast<double>(side_bias)
                               : (dot(c - from, perp) <= 0.0 ? 1.0 : -1.0);
  // waypoint abreast of the blocking centre, clearance away on the chosen side
  double along = std::clamp(dot(c - from, dir), 0.0, norm(to - from));
  Vec2 foot = from + along * dir;
  Vec2 w = c + (1.5 * clearance) * normalized(foot - c + side * clearance * perp);
  route_clear(from, w, problem, clearance, side_bias, depth - 1, out);
  route_clear(w, to, problem, clearance, side_bias, depth - 1, out);
}

std::vector<Vec2> routed_chain(const std::vector<Vec2>& anchors, const RescaledProblem& problem,
                               double clearance, int side_bias) {
  std::vector<Vec2> out{anchors.front()};
  for (size_t i = 0; i + 1 < anchors.size(); ++i)
    route_clear(anchors[i], anchors[i + 1], problem, clearance, side_bias, 4, out);
  return out;
}

// Base chain near the boundary: dive at theta1, shallow arc, rise at theta2.
std::vector<Vec2> base_waypoints(Vec2 p1, Vec2 p2, double R) {
  const double theta1 = angle_of(p1), theta2 = angle_of(p2);
  const double r_outer = 0.82 * R, r_mid = 0.55 * R;
  std::vector<Vec2> wp{p1, from_polar(r_outer, theta1), from_polar(r_mid, theta1)};
  double span = wrap_angle(theta2 - theta1);
  if (span > M_PI) span -= 2.0 * M_PI;  // shorter arc
  int arc_steps = static_cast<int>(std::ceil(std::abs(span) / (M_PI / 30.0)));
  for (int s = 1; s <= arc_steps; ++s)
    wp.push_back(from_polar(r_mid, theta1 + span * s / arc_steps));
  wp.push_back(from_polar(r_outer, theta2));
  wp.push_back(p2);
  return dedup(wp);
}

double polyline_margin(const std::vector<Vec2>& wp, const RescaledProblem& problem) {
  double best = std::numeric_limits<double>::max();
  for (size_t i = 0; i + 1 < wp.size(); ++i)
    for (const Vec2& c : problem.system.centres)
      best = std::min(best, segment_point_distance(wp[i], wp[i + 1], c));
  return best;
}

// Simple corridor-crossing arc: the path dives in, crosses the gap between the two
// partition sides, and rises again, so that together with the counterclockwise closure
// it leaves one side in the bite next to the boundary gap.  `swap_order` reverses the
// crossing direction.
std::vector<Vec2> corridor_waypoints(Vec2 p1, Vec2 p2, const Partition& part,
                                     const RescaledProblem& problem, bool swap_order) {
  const double R = problem.radius;
  const double theta1 = angle_of(p1), theta2 = angle_of(p2);
  double psi_bite = theta1 + 0.5 * wrap_angle(theta2 - theta1);

  Vec2 ga = side_centroid(part.side_a, problem);
  Vec2 gb = side_centroid(part.side_b, problem);
  if (norm(ga - gb) < 1e-9 * std::max(problem.eps, 1e-30)) return {};  // coincident centroids

  double da = std::abs(wrap_pi(angle_of(ga) - psi_bite));
  double db = std::abs(wrap_pi(angle_of(gb) - psi_bite));
  Vec2 g_bite = (da <= db) ? ga : gb;
  Vec2 g_other = (da <= db) ? gb : ga;

  Vec2 u = normalized(g_other - g_bite);
  Vec2 nrm = rot90(u);
  Vec2 mid = 0.5 * (g_bite + g_other);

  double lateral = 0.0;
  for (const Vec2& c : problem.system.centres)
    lateral = std::max(lateral, std::abs(dot(c - mid, nrm)));
  double L = std::min(lateral + std::max(2.0 * problem.eps, 0.1 * R), 0.42 * R);
  Vec2 ep = mid + L * nrm, em = mid - L * nrm;

  Vec2 e_first = std::abs(wrap_pi(angle_of(ep) - theta1)) <=
                         std::abs(wrap_pi(angle_of(em) - theta1))
                     ? ep
                     : em;
  Vec2 e_second = (norm(e_first - ep) < 1e-15) ? em : ep;
  if (swap_order) std::swap(e_first, e_second);

  double w_corr = std::numeric_limits<double>::max();
  for (const Vec2& c : problem.system.centres)
    w_corr = std::min(w_corr, std::abs(dot(c - mid, u)));
  double clearance = 0.5 * w_corr;

  std::vector<Vec2> wp{p1};
  for (const Vec2& v : routed_chain({p1, from_polar(0.85 * R, theta1), e_first, mid, e_second,
                                     from_polar(0.85 * R, theta2), p2},
                                    problem, clearance, 0))
    wp.push_back(v);
  return dedup(wp);
}

DiscretePath finalize_guess(std::vector<Vec2> wp, const ClassSpec& cls,
                            const RescaledProblem& problem, const MinimizerConfig& cfg) {
  const double R = problem.radius;
  WindingVector realized = winding_vector(wp, problem, {cfg.guard_factor * 0.5});
  if (!class_matches(realized, cls, problem.system.size()))
    throw Error("class representative construction failed to realize the requested class");
  DiscretePath path = resample_with_corners(wp, cfg.mesh);
  for (Vec2& u : path.nodes) {
    double r = norm(u);
    if (r > R) u = (R / r) * u;
  }
  WindingVector resampled = winding_vector(path.nodes, problem, {cfg.guard_factor * 0.5});
  if (!(resampled == realized))
    throw Error("class representative lost its class under resampling; refine the mesh");
  return path;
}

}  // namespace

/// Candidate waypoint chains for the requested class, best first.  Every candidate is
/// oracle-verified; construction heuristics only shape the basin the minimizer starts in.
static std::vector<std::vector<Vec2>> guess_candidates(Vec2 p1, Vec2 p2, const ClassSpec& cls,
                                                       const RescaledProblem& problem,
                                                       const MinimizerConfig& cfg) {
  const double R = problem.radius;
  const int n = problem.system.size();
  const double guard = cfg.guard_factor * R;
  std::vector<std::vector<Vec2>> out;

  auto consider = [&](std::vector<Vec2> wp) {
    if (wp.size() < 2) return;
    if (polyline_margin(wp, problem) < 4.0 * guard) return;
    try {
      if (!class_matches(winding_vector(wp, problem, {cfg.guard_factor * 0.5}), cls, n)) return;
    } catch (const Error&) {
      return;
    }
    out.push_back(std::move(wp));
  };

  // Fat loop around a group with side-biased routed threads from the endpoints.
  auto loop_candidate = [&](const std::vector<int>& group, int side_bias) -> std::vector<Vec2> {
    std::vector<Vec2> pts;
    for (int k : group) pts.push_back(problem.system.centres[k]);
    std::vector<Vec2> hull = convex_hull(pts);
    double clearance = std::numeric_limits<double>::max();
    for (int j = 0; j < n; ++j) {
      if (std::find(group.begin(), group.end(), j) != group.end()) continue;
      clearance = std::min(clearance, distance_to_hull(hull, problem.system.centres[j]));
    }
    double w = std::min(0.5 * clearance, 0.4 * R);
    if (!(w > 8.0 * guard)) return {};
    Vec2 a1 = from_polar(0.85 * R, angle_of(p1)), a2 = from_polar(0.85 * R, angle_of(p2));
    Vec2 gate_dir = normalized(a1 + a2);
    if (norm(a1 + a2) < 1e-12) gate_dir = normalized(a1);
    Vec2 g{0, 0};
    for (const Vec2& c : pts) g += c / static_cast<double>(pts.size());
    std::vector<Vec2> loop = offset_hull_loop(pts, w, g + gate_dir);
    double route_clearance = std::max(4.0 * guard, 0.6 * w);
    std::vector<Vec2> wp{p1};
    for (const Vec2& v : routed_chain({p1, a1, loop.front()}, problem, route_clearance,
                                      side_bias))
      wp.push_back(v);
    wp.insert(wp.end(), loop.begin() + 1, loop.end());
    for (const Vec2& v : routed_chain({loop.front(), a2, p2}, problem, route_clearance,
                                      side_bias))
      wp.push_back(v);
    return dedup(wp);
  };

  if (cls.partition) {
    consider(corridor_waypoints(p1, p2, *cls.partition, problem, false));
    consider(corridor_waypoints(p1, p2, *cls.partition, problem, true));
    // fat loop around either side, farther-from-gate first, both passing sides
    Vec2 gate = 0.5 * (p1 + p2);
    Vec2 ga = side_centroid(cls.partition->side_a, problem);
    Vec2 gb = side_centroid(cls.partition->side_b, problem);
    std::vector<const std::vector<int>*> sides;
    if (norm(ga - gate) >= norm(gb - gate)) {
      sides = {&cls.partition->side_a, &cls.partition->side_b};
    } else {
      sides = {&cls.partition->side_b, &cls.partition->side_a};
    }
    for (const std::vector<int>* side : sides) {
      std::vector<int> group;
      for (int k : *side) group.push_back(k - 1);
      for (int bias : {+1, -1}) consider(loop_candidate(group, bias));
    }
  } else {
    if (!cls.winding->admissible())
      throw Error("requested winding vector is inadmissible (all parities equal)");
    std::vector<Vec2> base = base_waypoints(p1, p2, R);
    WindingVector have = winding_vector(base, problem, {cfg.guard_factor * 0.5});
    std::vector<int> flips = parity_flips(have, *cls.winding, n);
    if (flips.empty()) {
      consider(std::move(base));
    } else {
      std::vector<Vec2> grouped = base;
      if (attach_loop(grouped, flips, problem, guard)) consider(std::move(grouped));
      std::vector<Vec2> singles = base;
      if (attach_single_loops(singles, flips, problem, guard)) consider(std::move(singles));
    }
  }
  if (out.empty())
    throw Error("degenerate configuration: no admissible class representative clears the "
                "guard radius");
  return out;
}

DiscretePath initial_guess(Vec2 p1, Vec2 p2, const ClassSpec& cls, const RescaledProblem& problem,
                           const MinimizerConfig& cfg) {
  auto candidates = guess_candidates(p1, p2, cls, problem, cfg);
  return finalize_guess(candidates.front(), cls, problem, cfg);
}

// ---------------------------------------------------------------------------
// minimization
// ---------------------------------------------------------------------------

namespace {

struct InnerRun {
  ProjectedLbfgsResult lbfgs;
  WindingVector target;
};

InnerRun minimize_core(DiscretePath start, const RescaledProblem& problem,
                       const MinimizerConfig& cfg, double r_low, double r_high,
                       bool enforce_class) {
  const double R = problem.radius;
  const double guard = cfg.guard_factor * R;
  const int m = start.segments();
  const double dt = 1.0 / m;
  const Vec2 p1 = start.nodes.front(), p2 = start.nodes.back();

  WindingVector target;
  if (enforce_class) target = winding_vector(start.nodes, problem, {cfg.guard_factor * 0.5});

  auto as_path = [](const std::vector<Vec2>& nodes) {
    DiscretePath p;
    p.nodes = nodes;
    return p;
  };

  // shared curvature model for the preconditioner, refreshed by the gradient:
  // kinetic tridiagonal coefficient plus a per-node floor for the stiff potential part
  struct Curvature {
    double coef = 1.0;
    std::vector<double> diag;
  };
  auto curv = std::make_shared<Curvature>();

  NodeObjective f = [&problem, as_path](const std::vector<Vec2>& nodes) {
    return maupertuis_value(as_path(nodes), problem);
  };
  NodeGradient grad = [&problem, as_path, curv, dt](const std::vector<Vec2>& nodes) {
    DiscretePath p = as_path(nodes);
    PathIntegrals I = path_integrals(p, problem);
    curv->coef = std::sqrt(2.0 * I.potential / I.kinetic) / dt;
    double cP = std::sqrt(0.5 * I.kinetic / I.potential);
    const double alpha = problem.system.alpha;
    curv->diag.assign(nodes.size(), 0.0);
    for (size_t i = 0; i < nodes.size(); ++i) {
      double hess = 0.0;
      for (int k = 0; k < problem.system.size(); ++k) {
        double r = std::max(norm(nodes[i] - problem.system.centres[k]), 1e-8);
        hess += (alpha + 2.0) * problem.system.masses[k] / std::pow(r, alpha + 2.0);
      }
      curv->diag[i] = cP * dt * hess;
    }
    return maupertuis_gradient(p, problem);
  };
  NodeProjection project = [p1, p2, r_low, r_high](std::vector<Vec2>& nodes) {
    nodes.front() = p1;
    nodes.back() = p2;
    for (size_t i = 1; i + 1 < nodes.size(); ++i) {
      double r = norm(nodes[i]);
      if (r > r_high) nodes[i] = (r_high / r) * nodes[i];
      if (r_low > 0.0 && r < r_low && r > 0.0) nodes[i] = (r_low / r) * nodes[i];
    }
  };
  GradientProjection project_gradient = [r_low, r_high](const std::vector<Vec2>& nodes,
                                                        const std::vector<Vec2>& g) {
    std::vector<Vec2> pg = g;
    pg.front() = {0, 0};
    pg.back() = {0, 0};
    for (size_t i = 1; i + 1 < nodes.size(); ++i) {
      double r = norm(nodes[i]);
      if (r >= r_high * (1.0 - 1e-12)) {
        Vec2 nhat = nodes[i] / r;
        double gn = dot(pg[i], nhat);
        if (gn < 0.0) pg[i] -= gn * nhat;  // outward motion blocked
      }
      if (r_low > 0.0 && r <= r_low * (1.0 + 1e-12) && r > 0.0) {
        Vec2 nhat = nodes[i] / r;
        double gn = dot(pg[i], nhat);
        if (gn > 0.0) pg[i] -= gn * nhat;  // inward motion blocked
      }
    }
    return pg;
  };
  auto reject_margin = std::make_shared<long>(0);
  auto reject_class = std::make_shared<long>(0);
  NodePredicate admissible = [&, reject_margin, reject_class](const std::vector<Vec2>& nodes) {
    DiscretePath p = as_path(nodes);
    CollisionMargin margin = collision_margin(p, problem);
    if (margin.distance < guard) {
      ++*reject_margin;
      return false;
    }
    if (enforce_class) {
      try {
        if (winding_vector(nodes, problem, {cfg.guard_factor * 0.5}) == target) return true;
      } catch (const AmbiguousWindingError&) {
      }
      ++*reject_class;
      return false;
    }
    return true;
  };
  NodePreconditioner precondition = [curv](const std::vector<Vec2>& q) {
    // solve (c * tridiag(-1, 2, -1) + diag) x = q on the interior nodes
    const int total = static_cast<int>(q.size());
    const int n_int = total - 2;
    std::vector<Vec2> x(total, Vec2{0, 0});
    if (n_int <= 0) return x;
    const double c = std::max(curv->coef, 1e-300);
    std::vector<double> diag(n_int), rhsx(n_int), rhsy(n_int);
    for (int i = 0; i < n_int; ++i) {
      double extra =
          static_cast<int>(curv->diag.size()) == total ? curv->diag[i + 1] : 0.0;
      diag[i] = 2.0 * c + extra;
      rhsx[i] = q[i + 1].x;
      rhsy[i] = q[i + 1].y;
    }
    for (int i = 1; i < n_int; ++i) {
      double w = c / diag[i - 1];
      diag[i] -= w * c;
      rhsx[i] += w * rhsx[i - 1];
      rhsy[i] += w * rhsy[i - 1];
    }
    x[n_int].x = rhsx[n_int - 1] / diag[n_int - 1];
    x[n_int].y = rhsy[n_int - 1] / diag[n_int - 1];
    for (int i = n_int - 2; i >= 0; --i) {
      x[i + 1].x = (rhsx[i] + c * x[i + 2].x) / diag[i];
      x[i + 1].y = (rhsy[i] + c * x[i + 2].y) / diag[i];
    }
    return x;
  };

  ProjectedLbfgsOptions opt;
  opt.tol = cfg.tol;
  opt.max_iterations = cfg.max_iterations;

  // paths that sink below the collision threshold are flagged anyway; stop burning
  // iterations on them and let the caller try the next class representative
  NodePredicate abort_when = [&](const std::vector<Vec2>& nodes) {
    DiscretePath p = as_path(nodes);
    return collision_margin(p, problem).distance < 0.7 * cfg.collision_factor * R;
  };

  InnerRun run;
  run.lbfgs = minimize_projected(start.nodes, f, grad, project, project_gradient, admissible,
                                 precondition, opt, abort_when);
  run.target = target;
  if (std::getenv("ROTNC_TRACE")) {
    DiscretePath p;
    p.nodes = run.lbfgs.x;
    CollisionMargin cm = collision_margin(p, problem);
    std::fprintf(stderr,
                 "[inner] conv=%d stall=%d f=%.8f pg=%.3e margin=%.6f (c%d) rej_margin=%ld "
                 "rej_class=%ld\n",
                 (int)run.lbfgs.converged, (int)run.lbfgs.stalled, run.lbfgs.value,
                 run.lbfgs.projected_gradient_norm, cm.distance, cm.centre, *reject_margin,
                 *reject_class);
  }
  return run;
}

}  // namespace

MinimizeResult minimize_inner(Vec2 p1, Vec2 p2, const ClassSpec& cls,
                              const RescaledProblem& problem, const MinimizerConfig& cfg,
                              const DiscretePath* warm_start) {
  const int n = problem.system.size();
  std::vector<DiscretePath> starts;
  bool warm_used = false;
  if (warm_start && warm_start->segments() == cfg.mesh) {
    DiscretePath start = *warm_start;
    Vec2 d1 = p1 - start.nodes.front(), d2 = p2 - start.nodes.back();
    const int m = start.segments();
    for (int i = 0; i <= m; ++i) {
      double t = double(i) / m;
      start.nodes[i] += (1.0 - t) * d1 + t * d2;
    }
    bool ok = true;
    try {
      ok = class_matches(winding_vector(start.nodes, problem, {cfg.guard_factor * 0.5}), cls, n);
    } catch (const Error&) {
      ok = false;
    }
    if (ok) {
      starts.push_back(std::move(start));
      warm_used = true;
    }
  }
  if (starts.empty()) {
    for (auto& wp : guess_candidates(p1, p2, cls, problem, cfg)) {
      try {
        starts.push_back(finalize_guess(std::move(wp), cls, problem, cfg));
      } catch (const Error&) {
        // a candidate that cannot be resampled cleanly is dropped
      }
    }
    if (starts.empty()) throw Error("no usable class representative");
  }

  // Deterministic choice among minimizers: the first candidate that converges clear of
  // the collision threshold wins.  A stall at the numerical floor of the line search
  // still counts as converged when the projected gradient is small; stalls at the
  // collision threshold come back flagged as near-collision weak solutions.
  const double floor_accept = std::max(cfg.tol, 2e-6);
  std::optional<InnerRun> clean;
  std::optional<InnerRun> floor_stalled;
  std::optional<InnerRun> flagged;
  for (DiscretePath& start : starts) {
    InnerRun run = minimize_core(start, problem, cfg, 0.0, problem.radius, true);
    DiscretePath path;
    path.nodes = run.lbfgs.x;
    CollisionMargin cm = collision_margin(path, problem);
    bool near_collision = cm.distance <= cfg.collision_factor * problem.radius;
    if (!near_collision && run.lbfgs.converged) {
      clean = std::move(run);
      break;
    }
    if (!near_collision && run.lbfgs.projected_gradient_norm <= floor_accept) {
      if (!floor_stalled || run.lbfgs.projected_gradient_norm <
                                floor_stalled->lbfgs.projected_gradient_norm)
        floor_stalled = std::move(run);
      continue;
    }
    if (near_collision && (!flagged || run.lbfgs.value < flagged->lbfgs.value))
      flagged = std::move(run);
  }
  if (!clean && !floor_stalled && !flagged && warm_used) {
    // a warm start that stalls away from its floor is retried from scratch
    starts.clear();
    for (auto& wp : guess_candidates(p1, p2, cls, problem, cfg)) {
      try {
        starts.push_back(finalize_guess(std::move(wp), cls, problem, cfg));
      } catch (const Error&) {
      }
    }
    for (DiscretePath& start : starts) {
      InnerRun run = minimize_core(start, problem, cfg, 0.0, problem.radius, true);
      DiscretePath path;
      path.nodes = run.lbfgs.x;
      CollisionMargin cm = collision_margin(path, problem);
      bool near_collision = cm.distance <= cfg.collision_factor * problem.radius;
      if (!near_collision && run.lbfgs.converged) {
        clean = std::move(run);
        break;
      }
      if (!near_collision && run.lbfgs.projected_gradient_norm <= floor_accept) {
        if (!floor_stalled || run.lbfgs.projected_gradient_norm <
                                  floor_stalled->lbfgs.projected_gradient_norm)
          floor_stalled = std::move(run);
        continue;
      }
      if (near_collision && (!flagged || run.lbfgs.value < flagged->lbfgs.value))
        flagged = std::move(run);
    }
  }
  if (!clean && !floor_stalled && !flagged)
    throw NoConvergenceError("inner minimizer did not converge in any candidate class "
                             "representative");
  InnerRun run = clean          ? std::move(*clean)
                 : floor_stalled ? std::move(*floor_stalled)
                                 : std::move(*flagged);

  MinimizeResult res;
  res.path.nodes = std::move(run.lbfgs.x);
  res.objective = run.lbfgs.value;
  res.gradient_norm = run.lbfgs.projected_gradient_norm;
  res.iterations = run.lbfgs.iterations;
  res.margin = collision_margin(res.path, problem);
  res.collision_flag = res.margin.distance <= cfg.collision_factor * problem.radius;

  res.winding = winding_vector(res.path.nodes, problem, {cfg.guard_factor * 0.5});
  if (!(res.winding == run.target))
    throw ClassEscapeError("class escape: converged path left its topological class");
  res.partition = partition_of(res.winding, n);

  const double R = problem.radius;
  for (int i = 1; i < res.path.segments(); ++i)
    if (norm(res.path.nodes[i]) >= R - 1e-9) res.boundary_contacts.push_back(i);
  return res;
}

// ---------------------------------------------------------------------------
// reparametrization
// ---------------------------------------------------------------------------

InnerArc reparametrize(const MinimizeResult& minimizer, const RescaledProblem& problem,
                       int min_samples) {
  const DiscretePath& u = minimizer.path;
  const int m = u.segments();
  const double omega = omega_of(u, problem);
  const double T = 1.0 / omega;

  // physical time across each polygon segment by fine quadrature of ds / v
  const int panels = 16;
  std::vector<std::vector<double>> cum(m);  // cumulative time at panel boundaries
  std::vector<double> seg_time(m);
  for (int j = 0; j < m; ++j) {
    Vec2 a = u.nodes[j], d = u.nodes[j + 1] - u.nodes[j];
    double len = norm(d);
    cum[j].assign(panels + 1, 0.0);
    for (int p = 0; p < panels; ++p) {
      auto integrand = [&](double s) { return len / field_speed(problem, a + s * d); };
      cum[j][p + 1] = cum[j][p] + gauss8(integrand, double(p) / panels, double(p + 1) / panels);
    }
    seg_time[j] = cum[j][panels];
  }
  double t_fine = 0.0;
  for (int j = 0; j < m; ++j) t_fine += seg_time[j];
  const double scale = T / t_fine;

  int target = std::max(min_samples, 2 * m);
  InnerArc arc;
  arc.samples.reserve(target + m + 2);

  auto tangent_at_corner = [&](int j) {  // corner between segments j-1 and j
    Vec2 t1 = (j > 0) ? normalized(u.nodes[j] - u.nodes[j - 1]) : Vec2{0, 0};
    Vec2 t2 = (j < m) ? normalized(u.nodes[j + 1] - u.nodes[j]) : Vec2{0, 0};
    Vec2 t = t1 + t2;
    if (norm(t) < 1e-12) t = (j < m) ? t2 : t1;
    return normalized(t);
  };

  // cumulative fine time within segment j up to parameter sigma
  auto cum_at = [&](int j, double sigma) {
    Vec2 a = u.nodes[j], d = u.nodes[j + 1] - u.nodes[j];
    double len = norm(d);
    if (len == 0.0 || sigma <= 0.0) return 0.0;
    int base = std::min(static_cast<int>(sigma * panels), panels - 1);
    auto integrand = [&](double z) { return len / field_speed(problem, a + z * d); };
    return cum[j][base] + gauss8(integrand, double(base) / panels, sigma);
  };

  double t_accum = 0.0;
  for (int j = 0; j < m; ++j) {
    Vec2 a = u.nodes[j], d = u.nodes[j + 1] - u.nodes[j];
    double len = norm(d);
    int n_j = std::max(1, static_cast<int>(std::round(seg_time[j] / (t_fine / target))));
    for (int s = 0; s < n_j; ++s) {
      double sigma = 0.0;
      double tau = 0.0;
      if (s > 0 && len > 0.0) {
        double tau_goal = seg_time[j] * s / n_j;
        int p = 0;  // seed from the panel table
        while (p + 1 < panels && cum[j][p + 1] < tau_goal) ++p;
        double frac = (tau_goal - cum[j][p]) / std::max(cum[j][p + 1] - cum[j][p], 1e-300);
        sigma = std::clamp((p + frac) / panels, 0.0, 1.0);
        for (int it = 0; it < 3; ++it) {
          double density = len / field_speed(problem, a + sigma * d);
          sigma = std::clamp(sigma - (cum_at(j, sigma) - tau_goal) / density, 0.0, 1.0);
        }
        tau = cum_at(j, sigma);
      }
      Vec2 pos = a + sigma * d;
      Vec2 tangent = (s == 0) ? tangent_at_corner(j) : normalized(d);
      arc.samples.push_back({(t_accum + tau) * scale, pos, field_speed(problem, pos) * tangent});
    }
    t_accum += seg_time[j];
  }
  Vec2 end = u.nodes[m];
  arc.samples.push_back({T, end, field_speed(problem, end) * tangent_at_corner(m)});
  arc.samples.front().t = 0.0;

  // endpoint directions from a one-sided quadratic fit, speeds from the Jacobi constant
  auto refit_end = [&](bool front) {
    size_t i0 = front ? 0 : arc.samples.size() - 1;
    size_t i1 = front ? 1 : arc.samples.size() - 2;
    size_t i2 = front ? 2 : arc.samples.size() - 3;
    if (arc.samples.size() < 3) return;
    double t0 = arc.samples[i0].t, t1 = arc.samples[i1].t, t2 = arc.samples[i2].t;
    Vec2 x0 = arc.samples[i0].pos, x1 = arc.samples[i1].pos, x2 = arc.samples[i2].pos;
    Vec2 dfit = x0 * ((2 * t0 - t1 - t2) / ((t0 - t1) * (t0 - t2))) +
                x1 * ((t0 - t2) / ((t1 - t0) * (t1 - t2))) +
                x2 * ((t0 - t1) / ((t2 - t0) * (t2 - t1)));
    Vec2 dir = normalized(dfit);
    if (norm(dir) > 0.0)
      arc.samples[i0].vel = field_speed(problem, arc.samples[i0].pos) * dir;
  };
  refit_end(true);
  refit_end(false);

  arc.duration = T;
  arc.omega = omega;
  arc.objective = minimizer.objective;
  arc.length = jacobi_length(u, problem);
  arc.winding = minimizer.winding;
  arc.partition = minimizer.partition;
  arc.collision_flag = minimizer.collision_flag;
  arc.margin = minimizer.margin;
  arc.boundary_contacts = minimizer.boundary_contacts;

  for (const StateSample& s : arc.samples) {
    double dev = std::abs(0.5 * norm2(s.vel) - effective_potential(problem, s.pos).value + 1.0);
    if (dev > 1e-9)
      throw Error("pointwise Jacobi constant violated after reparametrization (dev = " +
                  std::to_string(dev) + ")");
  }
  return arc;
}

SpeedConsistency speed_consistency(const InnerArc& arc, const RescaledProblem& problem) {
  SpeedConsistency out;
  const auto& s = arc.samples;
  std::vector<double> ratio, wts;
  double K = 0.0, P = 0.0, L1 = 0.0, circ = 0.0;
  for (size_t i = 0; i + 1 < s.size(); ++i) {
    Vec2 a = s[i].pos, d = s[i + 1].pos - s[i].pos;
    double len = norm(d);
    double dt = s[i + 1].t - s[i].t;
    circ += cross(s[i].pos, s[i + 1].pos);
    if (!(dt > 0.0) || len == 0.0) continue;
    auto integrand = [&](double z) { return 1.0 / field_speed(problem, a + z * d); };
    double inv_speed = 0.0;
    for (int p = 0; p < 4; ++p) inv_speed += gauss8(integrand, p / 4.0, (p + 1) / 4.0);
    double vbar = 1.0 / inv_speed;  // harmonic field speed along the gap
    double vhat = len / dt;
    ratio.push_back((vhat / vbar) * (vhat / vbar));
    wts.push_back(dt);
    K += len * len / dt;
    P += dt * vbar * vbar / 2.0;
    L1 += len * vbar / std::sqrt(2.0);
  }
  double wsum = 0.0, rsum = 0.0;
  for (size_t i = 0; i < ratio.size(); ++i) {
    wsum += wts[i];
    rsum += wts[i] * ratio[i];
  }
  out.best_fit_C = rsum / std::max(wsum, 1e-300);
  for (double r : ratio)
    out.max_ratio_deviation = std::max(out.max_ratio_deviation, std::abs(r / out.best_fit_C - 1.0));
  double M = std::sqrt(2.0 * K * P) + problem.nu * circ;
  double L = L1 + problem.nu / std::sqrt(2.0) * circ;
  out.holder_defect = std::abs(std::sqrt(2.0) * L / M - 1.0);
  return out;
}

ForwardNormalReport forward_normal_check(Vec2 p1, Vec2 p2, const RescaledProblem& problem,
                                         const MinimizerConfig& cfg, int starts) {
  const double R = problem.radius;
  const double rho = 0.1 * R;
  ForwardNormalReport rep;
  rep.rho = rho;

  MinimizerConfig local = cfg;
  local.mesh = std::max(32, cfg.mesh / 4);

  std::mt19937 rng(cfg.seed);
  std::uniform_real_distribution<double> amp(-0.05 * R, 0.05 * R);

  std::vector<std::vector<Vec2>> solutions;
  for (int trial = 0; trial < starts; ++trial) {
    DiscretePath path;
    double xi = (trial == 0) ? 0.0 : amp(rng);
    Vec2 chord = p2 - p1;
    Vec2 nrm = rot90(normalized(chord));
    if (norm(chord) < 1e-12) nrm = rot90(normalized(p1));
    for (int i = 0; i <= local.mesh; ++i) {
      double t = double(i) / local.mesh;
      path.nodes.push_back(p1 + t * chord + xi * std::sin(M_PI * t) * nrm);
    }
    InnerRun run =
        minimize_core(std::move(path), problem, local, 0.5 * R - rho, R + rho, false);
    if (!run.lbfgs.converged) continue;
    solutions.push_back(std::move(run.lbfgs.x));
  }

  if (solutions.size() < 2) {
    rep.unique = solutions.size() == 1;
    return rep;
  }
  for (size_t a = 0; a < solutions.size(); ++a)
    for (size_t b = a + 1; b < solutions.size(); ++b)
      for (size_t i = 0; i < solutions[a].size(); ++i)
        rep.max_disagreement =
            std::max(rep.max_disagreement, norm(solutions[a][i] - solutions[b][i]));
  rep.unique = rep.max_disagreement < 1e-6;
  return rep;
}

}  // namespace rotnc
