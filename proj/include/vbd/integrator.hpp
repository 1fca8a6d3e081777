#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vbd {

enum class StepMethod {
  /// Dormand-Prince 5(4) with FSAL and the fourth-order continuous extension.
  dormand_prince54,
};

struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-8;
  double max_step = 1.0;  // days
  StepMethod method = StepMethod::dormand_prince54;
  std::size_t max_steps = 10'000'000;
};

/// Throws std::invalid_argument for non-positive tolerances or step cap.
void validate(const IntegratorConfig& config);

/// Step-size underflow or step-budget exhaustion. Carries the last time the
/// solution was accepted.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double last_good_time)
      : std::runtime_error(what), last_good_time_(last_good_time) {}
  double last_good_time() const noexcept { return last_good_time_; }

 private:
  double last_good_time_;
};

/// dy/dt = f(t, y). Must write every entry of dydt.
using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

/// Piecewise polynomial continuous extension over the accepted steps.
class DenseOutput {
 public:
  DenseOutput() = default;
  DenseOutput(std::size_t dim, double t0) : dim_(dim), t0_(t0) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t segments() const noexcept { return ends_.size(); }
  double t_begin() const noexcept { return t0_; }
  double t_end() const noexcept { return ends_.empty() ? t0_ : ends_.back(); }

  /// Interpolated solution at t; throws std::out_of_range outside the span.
  std::vector<double> operator()(double t) const;
  void evaluate(double t, std::span<double> out) const;

  /// Appends the step [t_start, t_stop]; t_start must equal t_end().
  /// `coeffs` holds five dim-long blocks r1..r5 of the Hairer-Wanner
  /// contd5 form.
  void push_segment(double t_start, double t_stop, std::span<const double> coeffs);

 private:
  std::size_t dim_ = 0;
  double t0_ = 0.0;
  std::vector<double> ends_;
  std::vector<double> steps_;
  std::vector<double> coeffs_;
};

struct OdeSolution {
  std::vector<double> t;                // requested output times
  std::vector<std::vector<double>> y;   // solution at each output time
  DenseOutput dense;                    // empty unless requested
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t rhs_evaluations = 0;
};

/// Adaptive explicit Runge-Kutta integration from t0 to t_end.
/// `t_eval` must be non-decreasing and inside [t0, t_end]; its entries are
/// produced from the continuous extension of the step containing them.
OdeSolution solve_ivp(const OdeRhs& rhs, std::span<const double> y0, double t0, double t_end,
                      std::span<const double> t_eval, const IntegratorConfig& config,
                      bool keep_dense = false);

}  // namespace vbd
