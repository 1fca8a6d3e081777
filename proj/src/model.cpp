#include "vbd/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vbd {

namespace {

void require_probability(const char* name, double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw InvalidParameter(name, "must lie in [0, 1]");
}

void require_positive_rate(const char* name, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidParameter(name, "must be a positive finite rate");
}

void require_population(const char* name, double v) {
  if (!(v > 0.0) || !std::isfinite(v) || std::floor(v) != v)
    throw InvalidParameter(name, "must be a positive integer count");
}

}  // namespace

void validate(const ModelParams& p) {
  require_population("n_d", p.n_d);
  require_population("n_nd", p.n_nd);
  require_population("n_v", p.n_v);
  require_probability("b_d", p.b_d);
  require_probability("b_nd", p.b_nd);
  require_probability("c_d", p.c_d);
  require_probability("c_nd", p.c_nd);
  require_positive_rate("gamma_md", p.gamma_md);
  require_positive_rate("gamma_nd", p.gamma_nd);
  require_positive_rate("mu_v", p.mu_v);
  if (!(p.a_mean >= 0.0) || !std::isfinite(p.a_mean))
    throw InvalidParameter("a_mean", "must be a non-negative finite rate");
  if (!(p.a_amp >= 0.0 && p.a_amp < 1.0)) throw InvalidParameter("a_amp", "must lie in [0, 1)");
  if (!std::isfinite(p.phase_offset)) throw InvalidParameter("phase_offset", "must be finite");
  require_positive_rate("period_months", p.period_months);
  require_positive_rate("days_per_month", p.days_per_month);
}

SystemState initial_state(const ModelParams& p, const InitialFractions& f) {
  const auto check = [](const char* name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidParameter(name, "infected fraction must lie in [0, 1]");
  };
  check("init_frac_d", f.diabetic);
  check("init_frac_nd", f.nondiabetic);
  check("init_frac_v", f.vector);
  SystemState s;
  s.i_md = f.diabetic * p.n_d;
  s.s_d = p.n_d - s.i_md;
  s.i_m = f.nondiabetic * p.n_nd;
  s.s_nd = p.n_nd - s.i_m;
  s.i_v = f.vector * p.n_v;
  s.s_v = p.n_v - s.i_v;
  return s;
}

SystemState disease_free_state(const ModelParams& p) {
  return {p.n_d, 0.0, p.n_nd, 0.0, p.n_v, 0.0};
}

double conservation_error(const SystemState& s, const ModelParams& p) {
  const auto rel = [](double sum, double total) { return std::abs(sum - total) / total; };
  return std::max({rel(s.s_d + s.i_md, p.n_d), rel(s.s_nd + s.i_m, p.n_nd),
                   rel(s.s_v + s.i_v, p.n_v)});
}

SystemState clamp_non_negative(const SystemState& s) noexcept {
  const auto c = [](double v) { return std::max(v, 0.0); };
  return {c(s.s_d), c(s.i_md), c(s.s_nd), c(s.i_m), c(s.s_v), c(s.i_v)};
}

double biting_rate(double t, const ModelParams& p) noexcept {
  const double months = t / p.days_per_month - p.phase_offset;
  return p.a_mean * (1.0 + p.a_amp * std::cos(2.0 * std::numbers::pi * months / p.period_months));
}

double force_of_infection_human(double a, double i_v, double n_v) {
  if (!(n_v > 0.0)) throw InvalidParameter("n_v", "vector population must be positive");
  return a * i_v / n_v;
}

double force_of_infection_vector(double a, double c, double i_host, double n_h_total) {
  if (!(n_h_total > 0.0)) throw InvalidParameter("n_h_total", "human population must be positive");
  return a * c * i_host / n_h_total;
}

StateDerivative derivatives(double t, const SystemState& s, const ModelParams& p) {
  const double a = biting_rate(t, p);
  const double lambda_h = force_of_infection_human(a, s.i_v, p.n_v);
  const double lambda_v = force_of_infection_vector(a, p.c_d, s.i_md, p.n_h_total()) +
                          force_of_infection_vector(a, p.c_nd, s.i_m, p.n_h_total());

  // Net susceptible -> infected flux per population; each pair sums to zero.
  const double flux_d = lambda_h * p.b_d * s.s_d - p.gamma_md * s.i_md;
  const double flux_nd = lambda_h * p.b_nd * s.s_nd - p.gamma_nd * s.i_m;
  // Recruitment mu_v * N_v offsets mortality of both vector classes, so on
  // the invariant manifold dS_v/dt = mu_v * I_v - lambda_v * S_v.
  const double flux_v = lambda_v * s.s_v - p.mu_v * s.i_v;

  return {-flux_d, flux_d, -flux_nd, flux_nd, -flux_v, flux_v};
}

}  // namespace vbd
