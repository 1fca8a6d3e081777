#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "vbd/integrator.hpp"
#include "vbd/model.hpp"

namespace vbd {

/// Time-indexed model states with off-grid interpolation.
///
/// Stored samples are returned verbatim at their own times. Between samples
/// the integrator's continuous extension is used when available, otherwise a
/// cubic Hermite interpolant with finite-difference slopes.
class Trajectory {
 public:
  Trajectory() = default;
  /// Throws std::invalid_argument unless times are strictly increasing and
  /// match states in length.
  Trajectory(std::vector<double> times, std::vector<SystemState> states,
             std::optional<DenseOutput> dense = std::nullopt);

  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<SystemState>& states() const noexcept { return states_; }
  const SystemState& operator[](std::size_t i) const { return states_[i]; }
  bool has_dense_output() const noexcept { return dense_.has_value(); }

  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }

  /// Throws std::out_of_range outside [t_begin, t_end].
  SystemState at(double t) const;

 private:
  SystemState hermite(std::size_t left, double t) const;

  std::vector<double> times_;
  std::vector<SystemState> states_;
  std::optional<DenseOutput> dense_;
};

/// Integer-day sampling grid t0, t0+1, ... plus t_end when it is off-grid.
std::vector<double> daily_grid(double t0, double t_end);

/// Integrates the six-compartment model, sampled on daily_grid(t0, t_end).
/// Throws InvalidParameter for invalid params and IntegrationError on
/// step-size underflow.
Trajectory integrate(const ModelParams& params, const SystemState& initial, double t0,
                     double t_end, const IntegratorConfig& config = {});

/// Same dynamics sampled only at `times`, without retaining the continuous
/// extension. Used by the calibration loss.
std::vector<SystemState> integrate_at(const ModelParams& params, const SystemState& initial,
                                      double t0, std::span<const double> times,
                                      const IntegratorConfig& config = {});

/// Throws std::out_of_range for any time outside the trajectory span.
std::vector<SystemState> sample_at(const Trajectory& traj, std::span<const double> times);

/// Header: time,S_D,I_MD,S_ND,I_M,S_V,I_V. Values clamped at zero.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace vbd
