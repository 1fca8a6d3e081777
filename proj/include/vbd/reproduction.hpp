#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "vbd/model.hpp"

namespace vbd {

/// Population-weighted means of the group-specific transmission and
/// recovery parameters.
struct EffectiveParams {
  double b_eff = 0.0;
  double c_eff = 0.0;
  double gamma_eff = 0.0;
};

EffectiveParams effective_params(const ModelParams& params);

/// Closed-form R0 from effective parameters together with its two
/// directional factors; value == sqrt(host_to_vector * vector_to_host).
struct R0Effective {
  double value = 0.0;
  double host_to_vector = 0.0;  // vectors infected by one infected human
  double vector_to_host = 0.0;  // humans infected by one infected vector
};

R0Effective r0_effective_detail(const ModelParams& params, double a);
double r0_effective(const ModelParams& params, double a);

using Matrix3 = std::array<std::array<double, 3>, 3>;

/// Next-generation matrices at the disease-free equilibrium. Rows and
/// columns are ordered I_MD, I_M, I_V.
struct NgmMatrices {
  Matrix3 f{};  // new infections
  Matrix3 v{};  // transitions (diagonal)
};

NgmMatrices ngm_matrices(const ModelParams& params, double a);

/// F * V^-1.
Matrix3 next_generation_matrix(const ModelParams& params, double a);

/// Spectral radius of F * V^-1 evaluated from its block structure:
/// the characteristic polynomial is lambda^3 - q lambda, so rho = sqrt(q).
double r0_ngm(const ModelParams& params, double a);

struct SeasonalR0Point {
  double t = 0.0;
  double a_t = 0.0;
  double r0_effective = 0.0;
  double r0_ngm = 0.0;
};

struct SeriesSummary {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

struct SeasonalR0Series {
  std::vector<SeasonalR0Point> points;
  SeriesSummary effective;
  SeriesSummary ngm;
};

/// Evaluates both R0 variants at a(t) for t = t0, t0 + step, ... <= t_end.
/// Throws std::invalid_argument unless t_end > t0 and step > 0.
SeasonalR0Series r0_seasonal_series(const ModelParams& params, double t0, double t_end,
                                    double step);

/// Header: time,a_t,r0_effective,r0_ngm.
void write_seasonal_csv(const SeasonalR0Series& series, std::ostream& out);

}  // namespace vbd
