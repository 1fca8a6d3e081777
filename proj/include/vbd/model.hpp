#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace vbd {

/// Raised when a parameter set or state violates the model's invariants.
/// `field()` names the offending entry so callers can report it.
class InvalidParameter : public std::invalid_argument {
 public:
  InvalidParameter(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Constants of the two-host (diabetic / non-diabetic) vector-borne model.
/// Defaults are the reference parameter set: 80k diabetic and 920k
/// non-diabetic humans, 2M vectors, 12-month sinusoidal biting rate.
struct ModelParams {
  double n_d = 80'000.0;
  double n_nd = 920'000.0;
  double n_v = 2'000'000.0;

  double b_d = 0.65;   // vector -> diabetic
  double b_nd = 0.50;  // vector -> non-diabetic
  double c_d = 0.75;   // diabetic -> vector
  double c_nd = 0.50;  // non-diabetic -> vector

  double gamma_md = 1.0 / 120.0;  // per day
  double gamma_nd = 1.0 / 60.0;   // per day
  double mu_v = 1.0 / 14.0;       // per day

  double a_mean = 0.1;  // bites per day
  double a_amp = 0.8;
  double phase_offset = 10.0;  // months
  double period_months = 12.0;
  double days_per_month = 30.4;

  double n_h_total() const noexcept { return n_d + n_nd; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Throws InvalidParameter naming the first violated invariant.
void validate(const ModelParams& params);

/// The six compartments at one instant. Values are continuous counts.
struct SystemState {
  double s_d = 0.0;
  double i_md = 0.0;
  double s_nd = 0.0;
  double i_m = 0.0;
  double s_v = 0.0;
  double i_v = 0.0;

  static constexpr std::size_t size = 6;

  std::array<double, size> to_array() const noexcept {
    return {s_d, i_md, s_nd, i_m, s_v, i_v};
  }
  static SystemState from_array(const std::array<double, size>& y) noexcept {
    return {y[0], y[1], y[2], y[3], y[4], y[5]};
  }

  friend bool operator==(const SystemState&, const SystemState&) = default;
};

/// Time derivative of SystemState, individuals per day.
struct StateDerivative {
  double s_d = 0.0;
  double i_md = 0.0;
  double s_nd = 0.0;
  double i_m = 0.0;
  double s_v = 0.0;
  double i_v = 0.0;
};

/// Column labels in compartment order, shared by every CSV writer.
inline constexpr std::array<const char*, 6> kCompartmentLabels = {
    "S_D", "I_MD", "S_ND", "I_M", "S_V", "I_V"};

/// Initially infected fractions of each sub-population.
struct InitialFractions {
  double diabetic = 0.025;
  double nondiabetic = 0.025;
  double vector = 0.01;
};

/// Builds a state whose sub-population sums match params exactly.
SystemState initial_state(const ModelParams& params,
                          const InitialFractions& fractions = {});

/// Fully susceptible state.
SystemState disease_free_state(const ModelParams& params);

/// Largest relative deviation of the three sub-population sums from the
/// totals in params.
double conservation_error(const SystemState& state, const ModelParams& params);

/// Copy with every negative compartment replaced by zero. Applied to
/// observed outputs only; the right-hand side never clamps.
SystemState clamp_non_negative(const SystemState& state) noexcept;

/// Seasonally forced biting rate a(t), t in days.
double biting_rate(double t, const ModelParams& params) noexcept;

/// Vector-to-human force of infection a * i_v / n_v.
double force_of_infection_human(double a, double i_v, double n_v);

/// Human-to-vector force of infection from one host group, a * c * i_host / n_h.
double force_of_infection_vector(double a, double c, double i_host,
                                 double n_h_total);

StateDerivative derivatives(double t, const SystemState& state,
                            const ModelParams& params);

}  // namespace vbd
