#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace vbd {

struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const noexcept { return lower.size(); }
  bool contains(std::span<const double> x) const;
};

/// Throws std::invalid_argument unless bounds are finite with lower < upper.
void validate(const Bounds& bounds);

struct OptimizeTolerances {
  double gradient = 1e-8;   // infinity norm of the projected gradient
  double step = 1e-10;      // infinity norm of the accepted step
  double relative_reduction = 1e-12;  // (f_k - f_{k+1}) / max(|f_k|, |f_{k+1}|)
  std::size_t max_iterations = 500;
  std::size_t memory = 10;  // stored correction pairs
};

enum class Termination {
  gradient_converged,
  step_converged,
  function_converged,
  max_iterations,
  line_search_failed,
  non_finite_start,
};

std::string to_string(Termination reason);

struct OptimizeResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  double projected_gradient_norm = 0.0;
  Termination reason = Termination::max_iterations;

  /// False only when the objective was non-finite at the start point.
  bool usable() const noexcept { return reason != Termination::non_finite_start; }
};

using Objective = std::function<double(std::span<const double>)>;

/// Central-difference gradient with steps h_i = max(1e-7, 1e-7 |x_i|),
/// switching to a one-sided difference where x_i +- h_i leaves the box.
std::vector<double> finite_difference_gradient(const Objective& f, std::span<const double> x,
                                               const Bounds& bounds, std::size_t* evaluations = nullptr);

/// Bounded limited-memory quasi-Newton descent.
///
/// Iterates are kept feasible by projection onto the box. Variables pinned at
/// a bound by the gradient are frozen for the search direction; the rest
/// follow an L-BFGS direction built from the stored correction pairs. The
/// search runs in coordinates rescaled to the unit box so that parameters of
/// very different magnitude share one line search. Returned x always lies
/// inside `bounds`.
OptimizeResult local_optimize(const Objective& f, std::span<const double> x0, const Bounds& bounds,
                              const OptimizeTolerances& tolerances = {});

}  // namespace vbd
