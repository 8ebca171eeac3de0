#pragma once

#include <functional>
#include <vector>

#include "rotnc/vec2.hpp"

namespace rotnc {

/// Projected quasi-Newton descent over a vector of plane nodes.
/// Feasibility is restored by `project` (closed-form clamp); candidate steps may be
/// vetoed by `admissible` (topology/guard checks), which halves the step instead.
struct ProjectedLbfgsOptions {
  double tol = 1e-8;  // projected-gradient 2-norm
  int max_iterations = 20000;
  int history = 12;
  int max_halvings = 30;
  double armijo = 1e-4;
};

struct ProjectedLbfgsResult {
  std::vector<Vec2> x;
  double value = 0.0;
  double projected_gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
  bool aborted = false;
};

using NodeObjective = std::function<double(const std::vector<Vec2>&)>;
using NodeGradient = std::function<std::vector<Vec2>(const std::vector<Vec2>&)>;
using NodeProjection = std::function<void(std::vector<Vec2>&)>;
using NodePredicate = std::function<bool(const std::vector<Vec2>&)>;
using NodePreconditioner = std::function<std::vector<Vec2>(const std::vector<Vec2>&)>;
/// Removes from the gradient the components blocked by active constraints.
using GradientProjection =
    std::function<std::vector<Vec2>(const std::vector<Vec2>&, const std::vector<Vec2>&)>;

/// `abort_when` (optional) is polled on accepted iterates; a true result stops the run
/// with `aborted` set, so hopeless basins hand control back cheaply.
ProjectedLbfgsResult minimize_projected(std::vector<Vec2> x0, const NodeObjective& f,
                                        const NodeGradient& grad, const NodeProjection& project,
                                        const GradientProjection& project_gradient,
                                        const NodePredicate& admissible,
                                        const NodePreconditioner& precondition,
                                        const ProjectedLbfgsOptions& opt,
                                        const NodePredicate& abort_when = nullptr);

}  // namespace rotnc
