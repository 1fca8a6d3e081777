#include "vbd/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "vbd/csv.hpp"

namespace vbd {

namespace {

OdeRhs model_rhs(const ModelParams& params) {
  return [&params](double t, std::span<const double> y, std::span<double> dydt) {
    const SystemState s{y[0], y[1], y[2], y[3], y[4], y[5]};
    const StateDerivative d = derivatives(t, s, params);
    dydt[0] = d.s_d;
    dydt[1] = d.i_md;
    dydt[2] = d.s_nd;
    dydt[3] = d.i_m;
    dydt[4] = d.s_v;
    dydt[5] = d.i_v;
  };
}

SystemState to_state(const std::vector<double>& y) { return {y[0], y[1], y[2], y[3], y[4], y[5]}; }

}  // namespace

Trajectory::Trajectory(std::vector<double> times, std::vector<SystemState> states,
                       std::optional<DenseOutput> dense)
    : times_(std::move(times)), states_(std::move(states)), dense_(std::move(dense)) {
  if (times_.size() != states_.size())
    throw std::invalid_argument("trajectory times and states differ in length");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1]))
      throw std::invalid_argument("trajectory times must be strictly increasing");
}

SystemState Trajectory::at(double t) const {
  if (times_.empty() || t < times_.front() || t > times_.back())
    throw std::out_of_range("time " + std::to_string(t) + " outside trajectory span");
  const auto it = std::lower_bound(times_.begin(), times_.end(), t);
  const auto idx = static_cast<std::size_t>(it - times_.begin());
  if (*it == t) return states_[idx];
  if (dense_ && t >= dense_->t_begin() && t <= dense_->t_end()) {
    std::array<double, SystemState::size> y{};
    dense_->evaluate(t, y);
    return SystemState::from_array(y);
  }
  return hermite(idx - 1, t);
}

SystemState Trajectory::hermite(std::size_t left, double t) const {
  const std::size_t n = times_.size();
  const std::size_t right = left + 1;
  const double t0 = times_[left], t1 = times_[right];
  const double h = t1 - t0;
  const auto y0 = states_[left].to_array();
  const auto y1 = states_[right].to_array();

  // Finite-difference slope at sample k, one-sided at the ends.
  const auto slope = [&](std::size_t k, std::size_t comp) {
    const std::size_t lo = k == 0 ? 0 : k - 1;
    const std::size_t hi = k + 1 >= n ? n - 1 : k + 1;
    return (states_[hi].to_array()[comp] - states_[lo].to_array()[comp]) / (times_[hi] - times_[lo]);
  };

  const double s = (t - t0) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  std::array<double, SystemState::size> out{};
  for (std::size_t c = 0; c < out.size(); ++c)
    out[c] = h00 * y0[c] + h10 * h * slope(left, c) + h01 * y1[c] + h11 * h * slope(right, c);
  return SystemState::from_array(out);
}

std::vector<double> daily_grid(double t0, double t_end) {
  std::vector<double> grid;
  const auto days = static_cast<std::size_t>(std::floor(t_end - t0));
  grid.reserve(days + 2);
  for (std::size_t k = 0; k <= days; ++k) grid.push_back(t0 + static_cast<double>(k));
  if (grid.back() < t_end) grid.push_back(t_end);
  return grid;
}

Trajectory integrate(const ModelParams& params, const SystemState& initial, double t0,
                     double t_end, const IntegratorConfig& config) {
  validate(params);
  const auto grid = daily_grid(t0, t_end);
  const auto y0 = initial.to_array();
  OdeSolution sol = solve_ivp(model_rhs(params), y0, t0, t_end, grid, config, true);
  std::vector<SystemState> states;
  states.reserve(sol.y.size());
  for (const auto& y : sol.y) states.push_back(to_state(y));
  return Trajectory(std::move(sol.t), std::move(states), std::move(sol.dense));
}

std::vector<SystemState> integrate_at(const ModelParams& params, const SystemState& initial,
                                      double t0, std::span<const double> times,
                                      const IntegratorConfig& config) {
  validate(params);
  if (times.empty()) return {};
  if (times.back() == t0) return std::vector<SystemState>(times.size(), initial);
  const auto y0 = initial.to_array();
  const OdeSolution sol = solve_ivp(model_rhs(params), y0, t0, times.back(), times, config, false);
  std::vector<SystemState> states;
  states.reserve(sol.y.size());
  for (const auto& y : sol.y) states.push_back(to_state(y));
  return states;
}

std::vector<SystemState> sample_at(const Trajectory& traj, std::span<const double> times) {
  std::vector<SystemState> out;
  out.reserve(times.size());
  for (const double t : times) out.push_back(traj.at(t));
  return out;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << "time";
  for (const char* label : kCompartmentLabels) out << ',' << label;
  out << '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    std::vector<std::string> cells{csv::format_number(traj.times()[i])};
    for (const double v : clamp_non_negative(traj[i]).to_array()) cells.push_back(csv::format_number(v));
    csv::write_row(out, cells);
  }
}

}  // namespace vbd
