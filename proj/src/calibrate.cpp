#include "vbd/calibrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <thread>

#include "vbd/csv.hpp"
#include "vbd/trajectory.hpp"

namespace vbd {

namespace {

double population_variance(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size());
}

struct ModelSeries {
  std::vector<double> i_md;
  std::vector<double> i_m;
};

ModelSeries forward(const ModelParams& params, const SystemState& initial, const Dataset& dataset,
                    const IntegratorConfig& config) {
  const auto times = dataset.times();
  const auto states = integrate_at(params, initial, times.front(), times, config);
  ModelSeries out;
  out.i_md.reserve(states.size());
  out.i_m.reserve(states.size());
  for (const auto& s : states) {
    const SystemState c = clamp_non_negative(s);
    out.i_md.push_back(c.i_md);
    out.i_m.push_back(c.i_m);
  }
  return out;
}

double residual_sd(std::span<const double> obs, std::span<const double> model, std::size_t dof_lost) {
  double ss = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) ss += (obs[i] - model[i]) * (obs[i] - model[i]);
  const std::size_t n = obs.size();
  const std::size_t dof = n > dof_lost ? n - dof_lost : n;
  return std::sqrt(ss / static_cast<double>(dof));
}

}  // namespace

std::string to_string(FreeParameter p) {
  switch (p) {
    case FreeParameter::a_mean: return "a_mean";
    case FreeParameter::a_amp: return "a_amp";
    case FreeParameter::gamma_md: return "gamma_md";
    case FreeParameter::gamma_nd: return "gamma_nd";
    case FreeParameter::init_frac_d: return "init_frac_d";
    case FreeParameter::init_frac_nd: return "init_frac_nd";
    case FreeParameter::init_frac_v: return "init_frac_v";
  }
  return "unknown";
}

FreeParameter parse_free_parameter(const std::string& name) {
  for (auto p : {FreeParameter::a_mean, FreeParameter::a_amp, FreeParameter::gamma_md,
                 FreeParameter::gamma_nd, FreeParameter::init_frac_d, FreeParameter::init_frac_nd,
                 FreeParameter::init_frac_v})
    if (to_string(p) == name) return p;
  throw std::invalid_argument("unknown free parameter '" + name + "'");
}

ParameterBound default_bound(FreeParameter p) {
  switch (p) {
    case FreeParameter::a_mean: return {p, 0.01, 0.5};
    case FreeParameter::a_amp: return {p, 0.0, 0.95};
    case FreeParameter::gamma_md:
    case FreeParameter::gamma_nd: return {p, 1.0 / 365.0, 1.0 / 7.0};
    case FreeParameter::init_frac_d:
    case FreeParameter::init_frac_nd:
    case FreeParameter::init_frac_v: return {p, 0.0, 0.2};
  }
  throw std::invalid_argument("unknown free parameter");
}

Bounds FitSpec::bounds() const {
  Bounds b;
  for (const auto& pb : free) {
    b.lower.push_back(pb.lower);
    b.upper.push_back(pb.upper);
  }
  return b;
}

void validate(const FitSpec& spec) {
  if (spec.free.empty()) throw std::invalid_argument("no free parameters");
  std::set<FreeParameter> seen;
  for (const auto& pb : spec.free)
    if (!seen.insert(pb.parameter).second)
      throw std::invalid_argument("duplicate free parameter " + to_string(pb.parameter));
  validate(spec.bounds());
  if (spec.n_starts == 0) throw std::invalid_argument("n_starts must be at least 1");
  validate(spec.integrator);
}

ModelParams apply_parameters(const ModelParams& fixed, const FitSpec& spec,
                             std::span<const double> theta) {
  ModelParams p = fixed;
  for (std::size_t i = 0; i < spec.free.size(); ++i) {
    switch (spec.free[i].parameter) {
      case FreeParameter::a_mean: p.a_mean = theta[i]; break;
      case FreeParameter::a_amp: p.a_amp = theta[i]; break;
      case FreeParameter::gamma_md: p.gamma_md = theta[i]; break;
      case FreeParameter::gamma_nd: p.gamma_nd = theta[i]; break;
      default: break;
    }
  }
  return p;
}

SystemState apply_initial(const ModelParams& params, const FitSpec& spec,
                          std::span<const double> theta) {
  InitialFractions f = spec.initial;
  for (std::size_t i = 0; i < spec.free.size(); ++i) {
    switch (spec.free[i].parameter) {
      case FreeParameter::init_frac_d: f.diabetic = theta[i]; break;
      case FreeParameter::init_frac_nd: f.nondiabetic = theta[i]; break;
      case FreeParameter::init_frac_v: f.vector = theta[i]; break;
      default: break;
    }
  }
  return initial_state(params, f);
}

double normalized_sse(std::span<const double> obs_d, std::span<const double> model_d,
                      std::span<const double> obs_nd, std::span<const double> model_nd) {
  const auto term = [](std::span<const double> obs, std::span<const double> model) {
    double var = population_variance(obs);
    if (!(var > 0.0)) var = 1.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) ss += (obs[i] - model[i]) * (obs[i] - model[i]);
    return ss / var;
  };
  return term(obs_d, model_d) + term(obs_nd, model_nd);
}

LossEvaluation evaluate_loss(std::span<const double> theta, const Dataset& dataset,
                             const ModelParams& fixed, const FitSpec& spec) {
  if (dataset.empty()) throw std::invalid_argument("dataset has no rows");
  if (theta.size() != spec.free.size()) throw std::invalid_argument("theta dimension mismatch");
  if (!spec.bounds().contains(theta)) throw std::invalid_argument("theta outside bounds");

  LossEvaluation out;
  try {
    const ModelParams params = apply_parameters(fixed, spec, theta);
    const SystemState initial = apply_initial(params, spec, theta);
    const ModelSeries model = forward(params, initial, dataset, spec.integrator);
    const auto obs_d = dataset.observed_i_md();
    const auto obs_nd = dataset.observed_i_m();
    out.value = normalized_sse(obs_d, model.i_md, obs_nd, model.i_m);
    if (!std::isfinite(out.value)) {
      out.value = kLossPenalty;
      out.penalized = true;
      out.diagnostic = "non-finite loss";
    }
  } catch (const IntegrationError& e) {
    out.value = kLossPenalty;
    out.penalized = true;
    out.diagnostic = std::string("integration failed: ") + e.what();
  } catch (const InvalidParameter& e) {
    out.value = kLossPenalty;
    out.penalized = true;
    out.diagnostic = std::string("invalid parameters: ") + e.what();
  }
  return out;
}

double loss(std::span<const double> theta, const Dataset& dataset, const ModelParams& fixed,
            const FitSpec& spec) {
  return evaluate_loss(theta, dataset, fixed, spec).value;
}

std::vector<std::vector<double>> latin_hypercube(std::size_t n, const Bounds& bounds,
                                                 std::uint64_t seed) {
  validate(bounds);
  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  std::vector<std::vector<double>> points(n, std::vector<double>(bounds.size()));
  std::vector<std::size_t> strata(n);
  for (std::size_t d = 0; d < bounds.size(); ++d) {
    std::iota(strata.begin(), strata.end(), std::size_t{0});
    std::shuffle(strata.begin(), strata.end(), rng);
    const double width = bounds.upper[d] - bounds.lower[d];
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (static_cast<double>(strata[i]) + jitter(rng)) / static_cast<double>(n);
      points[i][d] = std::clamp(bounds.lower[d] + u * width, bounds.lower[d], bounds.upper[d]);
    }
  }
  return points;
}

Objective make_objective(const Dataset& dataset, const ModelParams& fixed, const FitSpec& spec) {
  return [&dataset, &fixed, &spec](std::span<const double> theta) {
    return evaluate_loss(theta, dataset, fixed, spec).value;
  };
}

FitResult multi_start_calibrate(const Dataset& dataset, const ModelParams& fixed,
                                const FitSpec& spec) {
  validate(spec);
  validate(fixed);
  if (dataset.empty()) throw std::invalid_argument("dataset has no rows");

  FitResult result;
  for (const auto& pb : spec.free) result.parameters.push_back(pb.parameter);
  const double span_days = dataset.rows.back().time - dataset.rows.front().time;
  const double period_days = fixed.period_months * fixed.days_per_month;
  if (span_days < 2.0 * period_days)
    result.warnings.push_back("dataset spans fewer than two seasonal periods; a_amp may be poorly identified");

  const Bounds bounds = spec.bounds();
  const auto starts = latin_hypercube(spec.n_starts, bounds, spec.seed);
  const Objective objective = make_objective(dataset, fixed, spec);

  const auto run_start = [&](std::size_t i) {
    const OptimizeResult r = local_optimize(objective, starts[i], bounds, spec.tolerances);
    StartRecord rec;
    rec.start = starts[i];
    rec.converged = r.x;
    rec.loss = r.value;
    rec.iterations = r.iterations;
    rec.evaluations = r.evaluations;
    rec.reason = r.reason;
    rec.penalized = !r.usable() || r.value >= kLossPenalty;
    return rec;
  };

  result.starts.resize(spec.n_starts);
  unsigned workers = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, spec.n_starts));
  if (workers <= 1) {
    for (std::size_t i = 0; i < spec.n_starts; ++i) result.starts[i] = run_start(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.push_back(std::async(std::launch::async, [&] {
        for (std::size_t i = next++; i < spec.n_starts; i = next++) result.starts[i] = run_start(i);
      }));
    }
    for (auto& f : pool) f.get();
  }

  bool found = false;
  for (std::size_t i = 0; i < result.starts.size(); ++i) {
    const auto& rec = result.starts[i];
    if (rec.penalized) continue;
    if (!found || rec.loss < result.best_loss) {
      found = true;
      result.best_loss = rec.loss;
      result.best_start = i;
    }
  }
  if (!found) {
    std::string msg = "all " + std::to_string(result.starts.size()) + " starts failed:";
    for (std::size_t i = 0; i < result.starts.size(); ++i)
      msg += " [" + std::to_string(i) + "] " + to_string(result.starts[i].reason);
    throw CalibrationError(msg, result.starts);
  }

  result.best = result.starts[result.best_start].converged;
  result.fitted_params = apply_parameters(fixed, spec, result.best);
  result.fitted_initial = apply_initial(result.fitted_params, spec, result.best);
  result.integrator = spec.integrator;

  const ModelSeries model = forward(result.fitted_params, result.fitted_initial, dataset, spec.integrator);
  const auto obs_d = dataset.observed_i_md();
  const auto obs_nd = dataset.observed_i_m();
  result.residual_sd_i_md = residual_sd(obs_d, model.i_md, spec.free.size());
  result.residual_sd_i_m = residual_sd(obs_nd, model.i_m, spec.free.size());
  result.residual_count = dataset.size();
  return result;
}

ConfidenceBands confidence_bands(const FitResult& fit, const Dataset& dataset,
                                 const ModelParams& fixed) {
  if (fit.residual_count < 10 || dataset.size() < 10)
    throw std::invalid_argument("confidence bands need at least 10 residuals, got " +
                                std::to_string(std::min(fit.residual_count, dataset.size())));
  if (fixed.n_d != fit.fitted_params.n_d || fixed.n_nd != fit.fitted_params.n_nd ||
      fixed.n_v != fit.fitted_params.n_v)
    throw std::invalid_argument("fit was produced for different population sizes");

  const ModelSeries model = forward(fit.fitted_params, fit.fitted_initial, dataset, fit.integrator);
  ConfidenceBands bands;
  bands.times = dataset.times();
  const double half_d = ConfidenceBands::kZ * fit.residual_sd_i_md;
  const double half_nd = ConfidenceBands::kZ * fit.residual_sd_i_m;
  for (std::size_t i = 0; i < bands.times.size(); ++i) {
    bands.fit_i_md.push_back(model.i_md[i]);
    bands.lo_i_md.push_back(model.i_md[i] - half_d);
    bands.hi_i_md.push_back(model.i_md[i] + half_d);
    bands.fit_i_m.push_back(model.i_m[i]);
    bands.lo_i_m.push_back(model.i_m[i] - half_nd);
    bands.hi_i_m.push_back(model.i_m[i] + half_nd);
  }
  return bands;
}

void write_bands_csv(const ConfidenceBands& b, std::ostream& out) {
  out << "time,fit_I_MD,lo_I_MD,hi_I_MD,fit_I_M,lo_I_M,hi_I_M\n";
  for (std::size_t i = 0; i < b.times.size(); ++i) {
    csv::write_row(out, {csv::format_number(b.times[i]), csv::format_number(b.fit_i_md[i]),
                         csv::format_number(b.lo_i_md[i]), csv::format_number(b.hi_i_md[i]),
                         csv::format_number(b.fit_i_m[i]), csv::format_number(b.lo_i_m[i]),
                         csv::format_number(b.hi_i_m[i])});
  }
}

}  // namespace vbd
