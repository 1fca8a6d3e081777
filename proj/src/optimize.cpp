#include "vbd/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace vbd {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double inf_norm(std::span<const double> a) {
  double m = 0.0;
  for (const double v : a) m = std::max(m, std::abs(v));
  return m;
}

struct Correction {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

// Two-loop recursion: returns -H g restricted to the free variables.
std::vector<double> lbfgs_direction(const std::deque<Correction>& memory, std::span<const double> g,
                                    const std::vector<bool>& free) {
  const std::size_t n = g.size();
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = free[i] ? g[i] : 0.0;

  std::vector<double> alpha(memory.size());
  for (std::size_t k = memory.size(); k-- > 0;) {
    const auto& c = memory[k];
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (free[i]) sq += c.s[i] * q[i];
    alpha[k] = c.rho * sq;
    for (std::size_t i = 0; i < n; ++i)
      if (free[i]) q[i] -= alpha[k] * c.y[i];
  }
  if (!memory.empty()) {
    const auto& last = memory.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : q) v *= gamma;
  }
  for (std::size_t k = 0; k < memory.size(); ++k) {
    const auto& c = memory[k];
    double yr = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (free[i]) yr += c.y[i] * q[i];
    const double beta = c.rho * yr;
    for (std::size_t i = 0; i < n; ++i)
      if (free[i]) q[i] += c.s[i] * (alpha[k] - beta);
  }
  for (std::size_t i = 0; i < n; ++i) q[i] = free[i] ? -q[i] : 0.0;
  return q;
}

// Affine map between the box and the unit cube.
struct UnitBox {
  const Bounds& bounds;

  std::vector<double> to_x(std::span<const double> u) const {
    std::vector<double> x(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (u[i] <= 0.0) {
        x[i] = bounds.lower[i];
      } else if (u[i] >= 1.0) {
        x[i] = bounds.upper[i];
      } else {
        x[i] = std::clamp(bounds.lower[i] + u[i] * width(i), bounds.lower[i], bounds.upper[i]);
      }
    }
    return x;
  }
  std::vector<double> to_u(std::span<const double> x) const {
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      u[i] = std::clamp((x[i] - bounds.lower[i]) / width(i), 0.0, 1.0);
    return u;
  }
  double width(std::size_t i) const { return bounds.upper[i] - bounds.lower[i]; }
};

}  // namespace

bool Bounds::contains(std::span<const double> x) const {
  if (x.size() != size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  return true;
}

void validate(const Bounds& b) {
  if (b.lower.size() != b.upper.size()) throw std::invalid_argument("bounds dimension mismatch");
  if (b.lower.empty()) throw std::invalid_argument("bounds are empty");
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!std::isfinite(b.lower[i]) || !std::isfinite(b.upper[i]))
      throw std::invalid_argument("bounds must be finite");
    if (!(b.lower[i] < b.upper[i])) throw std::invalid_argument("lower bound must be below upper bound");
  }
}

std::string to_string(Termination reason) {
  switch (reason) {
    case Termination::gradient_converged: return "gradient_converged";
    case Termination::step_converged: return "step_converged";
    case Termination::function_converged: return "function_converged";
    case Termination::max_iterations: return "max_iterations";
    case Termination::line_search_failed: return "line_search_failed";
    case Termination::non_finite_start: return "non_finite_start";
  }
  return "unknown";
}

std::vector<double> finite_difference_gradient(const Objective& f, std::span<const double> x,
                                               const Bounds& bounds, std::size_t* evaluations) {
  std::vector<double> g(x.size());
  std::vector<double> probe(x.begin(), x.end());
  std::size_t evals = 0;
  double f0 = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = std::max(1e-7, 1e-7 * std::abs(x[i]));
    const bool up_ok = x[i] + h <= bounds.upper[i];
    const bool down_ok = x[i] - h >= bounds.lower[i];
    if (up_ok && down_ok) {
      probe[i] = x[i] + h;
      const double fp = f(probe);
      probe[i] = x[i] - h;
      const double fm = f(probe);
      evals += 2;
      g[i] = (fp - fm) / (2.0 * h);
    } else {
      if (std::isnan(f0)) {
        f0 = f(x);
        ++evals;
      }
      probe[i] = up_ok ? x[i] + h : x[i] - h;
      const double fs = f(probe);
      ++evals;
      g[i] = up_ok ? (fs - f0) / h : (f0 - fs) / h;
    }
    probe[i] = x[i];
  }
  if (evaluations) *evaluations += evals;
  return g;
}

OptimizeResult local_optimize(const Objective& f, std::span<const double> x0, const Bounds& bounds,
                              const OptimizeTolerances& tol) {
  validate(bounds);
  if (x0.size() != bounds.size()) throw std::invalid_argument("start point dimension mismatch");
  const std::size_t n = x0.size();
  const UnitBox box{bounds};

  OptimizeResult result;
  std::vector<double> u = box.to_u(x0);
  std::vector<double> x = box.to_x(u);
  double fx = f(x);
  result.evaluations = 1;
  result.x = x;
  result.value = fx;
  if (!std::isfinite(fx)) {
    result.reason = Termination::non_finite_start;
    return result;
  }

  // Gradient with respect to the unit-cube coordinates.
  const auto gradient_u = [&](const std::vector<double>& at_x) {
    auto g = finite_difference_gradient(f, at_x, bounds, &result.evaluations);
    for (std::size_t i = 0; i < n; ++i) g[i] *= box.width(i);
    return g;
  };
  const auto projected_norm = [&](const std::vector<double>& at_x, const std::vector<double>& gu) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double gx = gu[i] / box.width(i);
      const double moved = std::clamp(at_x[i] - gx, bounds.lower[i], bounds.upper[i]);
      m = std::max(m, std::abs(moved - at_x[i]));
    }
    return m;
  };

  std::vector<double> g = gradient_u(x);
  std::deque<Correction> memory;
  result.reason = Termination::max_iterations;

  for (result.iterations = 0; result.iterations < tol.max_iterations; ++result.iterations) {
    result.projected_gradient_norm = projected_norm(x, g);
    if (result.projected_gradient_norm <= tol.gradient) {
      result.reason = Termination::gradient_converged;
      break;
    }

    std::vector<bool> free(n, true);
    for (std::size_t i = 0; i < n; ++i)
      if ((u[i] <= 0.0 && g[i] > 0.0) || (u[i] >= 1.0 && g[i] < 0.0)) free[i] = false;

    std::vector<double> d = lbfgs_direction(memory, g, free);
    if (dot(d, g) >= 0.0) {
      memory.clear();
      d = lbfgs_direction(memory, g, free);
    }

    // Backtracking Armijo search along the projected path.
    double alpha = memory.empty() ? std::min(1.0, 0.1 / std::max(inf_norm(d), 1e-300)) : 1.0;
    bool accepted = false;
    std::vector<double> u_new(n), x_new, s(n);
    double f_new = fx;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) u_new[i] = std::clamp(u[i] + alpha * d[i], 0.0, 1.0);
      for (std::size_t i = 0; i < n; ++i) s[i] = u_new[i] - u[i];
      if (inf_norm(s) == 0.0) break;
      x_new = box.to_x(u_new);
      f_new = f(x_new);
      ++result.evaluations;
      const double slope = dot(g, s);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * slope) {
        accepted = true;
        break;
      }
      double next = 0.5 * alpha;
      if (std::isfinite(f_new)) {
        // Minimizer of the quadratic through f(0), f'(0) and f(alpha).
        const double denom = 2.0 * (f_new - fx - slope);
        if (denom > 0.0) next = std::clamp(-slope * alpha / denom, 0.1 * alpha, 0.5 * alpha);
      }
      alpha = next;
    }

    if (!accepted) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      result.reason = Termination::line_search_failed;
      break;
    }

    std::vector<double> g_new = gradient_u(x_new);
    double x_step = 0.0;
    for (std::size_t i = 0; i < n; ++i) x_step = std::max(x_step, std::abs(x_new[i] - x[i]));
    const double reduction = (fx - f_new) / std::max(std::abs(fx), std::abs(f_new));

    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = g_new[i] - g[i];
    const double sy = dot(s, y);
    if (sy > 1e-12 * dot(y, y)) {
      memory.push_back({s, y, 1.0 / sy});
      if (memory.size() > tol.memory) memory.pop_front();
    }

    u = std::move(u_new);
    x = std::move(x_new);
    fx = f_new;
    g = std::move(g_new);

    if (x_step <= tol.step) {
      ++result.iterations;
      result.reason = Termination::step_converged;
      break;
    }
    if (reduction <= tol.relative_reduction) {
      ++result.iterations;
      result.reason = Termination::function_converged;
      break;
    }
  }

  result.x = x;
  result.value = fx;
  result.projected_gradient_norm = projected_norm(x, g);
  return result;
}

}  // namespace vbd
