#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbd/datagen.hpp"
#include "vbd/integrator.hpp"
#include "vbd/model.hpp"
#include "vbd/optimize.hpp"

namespace vbd {

enum class FreeParameter {
  a_mean,
  a_amp,
  gamma_md,
  gamma_nd,
  init_frac_d,
  init_frac_nd,
  init_frac_v,
};

std::string to_string(FreeParameter p);
/// Throws std::invalid_argument for unknown names.
FreeParameter parse_free_parameter(const std::string& name);

struct ParameterBound {
  FreeParameter parameter;
  double lower;
  double upper;
};

/// a_mean in [0.01, 0.5], a_amp in [0, 0.95], recovery rates in
/// [1/365, 1/7], initial infected fractions in [0, 0.2].
ParameterBound default_bound(FreeParameter p);

struct FitSpec {
  std::vector<ParameterBound> free = {
      default_bound(FreeParameter::a_mean),
      default_bound(FreeParameter::a_amp),
      default_bound(FreeParameter::gamma_md),
      default_bound(FreeParameter::gamma_nd),
  };
  std::size_t n_starts = 16;
  std::uint64_t seed = 20190101;
  OptimizeTolerances tolerances;
  /// Initial condition for every fit; free init_frac_* entries override it.
  InitialFractions initial;
  IntegratorConfig integrator;
  /// Worker threads for the starts; 0 picks the hardware concurrency.
  unsigned threads = 0;

  Bounds bounds() const;
};

/// Throws std::invalid_argument on empty/duplicate parameter lists, bad
/// bounds or n_starts == 0.
void validate(const FitSpec& spec);

/// Parameter set and initial state with theta substituted into `fixed`.
ModelParams apply_parameters(const ModelParams& fixed, const FitSpec& spec,
                             std::span<const double> theta);
SystemState apply_initial(const ModelParams& params, const FitSpec& spec,
                          std::span<const double> theta);

/// Value returned by the loss when the forward model cannot be evaluated.
inline constexpr double kLossPenalty = 1e12;

struct LossEvaluation {
  double value = 0.0;
  bool penalized = false;
  std::string diagnostic;
};

/// sum (obs_d - model_d)^2 / var(obs_d) + sum (obs_nd - model_nd)^2 / var(obs_nd),
/// with population variances; a zero variance normalizes by 1.
double normalized_sse(std::span<const double> obs_d, std::span<const double> model_d,
                      std::span<const double> obs_nd, std::span<const double> model_nd);

/// Integrates the model with theta substituted and scores both observed
/// infected series. Throws std::invalid_argument for an empty dataset or
/// theta outside the bounds; forward-model failures yield kLossPenalty.
LossEvaluation evaluate_loss(std::span<const double> theta, const Dataset& dataset,
                             const ModelParams& fixed, const FitSpec& spec);
double loss(std::span<const double> theta, const Dataset& dataset, const ModelParams& fixed,
            const FitSpec& spec);

/// n stratified points inside the box, one per stratum in every dimension.
std::vector<std::vector<double>> latin_hypercube(std::size_t n, const Bounds& bounds,
                                                 std::uint64_t seed);

struct StartRecord {
  std::vector<double> start;
  std::vector<double> converged;
  double loss = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  Termination reason = Termination::max_iterations;
  bool penalized = false;
};

struct FitResult {
  std::vector<FreeParameter> parameters;
  std::vector<double> best;
  double best_loss = 0.0;
  std::size_t best_start = 0;
  std::vector<StartRecord> starts;
  double residual_sd_i_md = 0.0;
  double residual_sd_i_m = 0.0;
  std::size_t residual_count = 0;
  ModelParams fitted_params;
  SystemState fitted_initial;
  IntegratorConfig integrator;
  std::vector<std::string> warnings;
};

class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(const std::string& what, std::vector<StartRecord> starts)
      : std::runtime_error(what), starts_(std::move(starts)) {}
  const std::vector<StartRecord>& starts() const noexcept { return starts_; }

 private:
  std::vector<StartRecord> starts_;
};

/// Objective over theta as used by every start.
Objective make_objective(const Dataset& dataset, const ModelParams& fixed, const FitSpec& spec);

/// Seeded Latin-hypercube multi-start of local_optimize. Starts may run on
/// several threads; records are kept in start order and ties go to the
/// lowest index, so the result does not depend on the thread count.
FitResult multi_start_calibrate(const Dataset& dataset, const ModelParams& fixed,
                                const FitSpec& spec);

/// Fitted curves with +-1.96 residual-sd bands (homoscedastic).
struct ConfidenceBands {
  static constexpr double kZ = 1.96;
  std::vector<double> times;
  std::vector<double> fit_i_md, lo_i_md, hi_i_md;
  std::vector<double> fit_i_m, lo_i_m, hi_i_m;
};

/// Throws std::invalid_argument when fewer than 10 residuals back the fit.
ConfidenceBands confidence_bands(const FitResult& fit, const Dataset& dataset,
                                 const ModelParams& fixed);

/// Header: time,fit_I_MD,lo_I_MD,hi_I_MD,fit_I_M,lo_I_M,hi_I_M.
void write_bands_csv(const ConfidenceBands& bands, std::ostream& out);

}  // namespace vbd
