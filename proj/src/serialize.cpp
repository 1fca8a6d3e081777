#include "vbd/serialize.hpp"

#include <algorithm>
#include <array>
#include <fstream>

namespace vbd {

namespace {

struct ParamField {
  const char* name;
  double ModelParams::*member;
};

constexpr std::array<ParamField, 15> kParamFields = {{
    {"n_d", &ModelParams::n_d},
    {"n_nd", &ModelParams::n_nd},
    {"n_v", &ModelParams::n_v},
    {"b_d", &ModelParams::b_d},
    {"b_nd", &ModelParams::b_nd},
    {"c_d", &ModelParams::c_d},
    {"c_nd", &ModelParams::c_nd},
    {"gamma_md", &ModelParams::gamma_md},
    {"gamma_nd", &ModelParams::gamma_nd},
    {"mu_v", &ModelParams::mu_v},
    {"a_mean", &ModelParams::a_mean},
    {"a_amp", &ModelParams::a_amp},
    {"phase_offset", &ModelParams::phase_offset},
    {"period_months", &ModelParams::period_months},
    {"days_per_month", &ModelParams::days_per_month},
}};

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

ModelParams params_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidParameter("params", "expected a JSON object");
  ModelParams p;
  for (const auto& [key, value] : j.items()) {
    const auto it = std::find_if(kParamFields.begin(), kParamFields.end(),
                                 [&](const ParamField& f) { return key == f.name; });
    if (it == kParamFields.end()) throw InvalidParameter(key, "unknown parameter");
    if (!value.is_number()) throw InvalidParameter(key, "must be a number");
    p.*(it->member) = value.get<double>();
  }
  validate(p);
  return p;
}

Json params_to_json(const ModelParams& p) {
  Json j = Json::object();
  for (const auto& f : kParamFields) j[f.name] = p.*(f.member);
  return j;
}

ModelParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("params", "cannot open " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidParameter("params", std::string("malformed JSON: ") + e.what());
  }
  return params_from_json(j);
}

Json state_to_json(const SystemState& s) {
  Json j = Json::object();
  const auto values = s.to_array();
  for (std::size_t i = 0; i < values.size(); ++i) j[kCompartmentLabels[i]] = values[i];
  return j;
}

Json noise_to_json(const NoiseConfig& n) {
  return Json{{"sigma_diabetic", n.sigma_diabetic},
              {"sigma_nondiabetic", n.sigma_nondiabetic},
              {"seed", n.seed},
              {"model", "multiplicative gaussian, clamped at zero"},
              {"rng", "mt19937_64 per column, seeded splitmix64(seed + column); column 0 obs_I_MD, 1 obs_I_M"}};
}

Json dataset_meta_to_json(const DatasetProvenance& prov, const std::optional<std::string>& timestamp) {
  Json j;
  j["generator_version"] = prov.generator_version;
  j["duration_days"] = prov.duration_days;
  j["params"] = params_to_json(prov.params);
  j["initial_state"] = state_to_json(prov.initial);
  j["noise"] = noise_to_json(prov.noise);
  Json ranges = Json::object();
  for (const auto& [col, count] : prov.range_exceedances) ranges[col] = count;
  j["reference_range_exceedances"] = ranges;
  if (timestamp) j["created"] = *timestamp;
  return j;
}

Json fit_result_to_json(const FitResult& fit) {
  Json j;
  Json best = Json::object();
  for (std::size_t i = 0; i < fit.parameters.size(); ++i) best[to_string(fit.parameters[i])] = fit.best[i];
  j["parameters"] = best;
  j["best_loss"] = fit.best_loss;
  j["best_start"] = fit.best_start;
  j["loss"] = "sum of squared residuals of obs_I_MD and obs_I_M, each divided by the observed series variance";
  j["residual_sd"] = {{"I_MD", fit.residual_sd_i_md}, {"I_M", fit.residual_sd_i_m}};
  j["residual_count"] = fit.residual_count;
  j["confidence_band"] = "fitted curve +- 1.96 x residual standard deviation (homoscedastic residual band)";
  j["fitted_params"] = params_to_json(fit.fitted_params);
  j["initial_state"] = state_to_json(fit.fitted_initial);
  Json starts = Json::array();
  for (const auto& s : fit.starts) {
    Json rec;
    rec["start"] = s.start;
    rec["converged"] = s.converged;
    rec["loss"] = s.loss;
    rec["iterations"] = s.iterations;
    rec["evaluations"] = s.evaluations;
    rec["termination"] = to_string(s.reason);
    rec["penalized"] = s.penalized;
    starts.push_back(rec);
  }
  j["starts"] = starts;
  j["warnings"] = fit.warnings;
  return j;
}

Json report_to_json(const AnalysisReport& report) {
  const auto& s = report.summary;
  Json j;
  Json summary;
  summary["peak_prevalence_diabetic"] = s.peak_prevalence_d;
  summary["peak_prevalence_nondiabetic"] = s.peak_prevalence_nd;
  summary["peak_infected_diabetic"] = s.peak_i_md;
  summary["peak_infected_nondiabetic"] = s.peak_i_m;
  summary["odds_ratio_min"] = optional_number(s.odds_ratio_min);
  summary["odds_ratio_max"] = optional_number(s.odds_ratio_max);
  summary["odds_ratio_omitted"] = s.odds_ratio_omitted;
  summary["odds_ratio_definition"] = "(I_MD/S_D)/(I_M/S_ND), unadjusted: the model has no covariates";
  summary["major_peak_times"] = s.major_peak_times;
  Json windows = Json::array();
  for (const auto& w : s.windows) {
    windows.push_back({{"window_start", w.window_start},
                       {"window_end", w.window_end},
                       {"time_I_MD", w.time_i_md},
                       {"peak_I_MD", w.peak_i_md},
                       {"peak_prevalence_diabetic", w.peak_prevalence_d},
                       {"time_I_M", w.time_i_m},
                       {"peak_I_M", w.peak_i_m},
                       {"peak_prevalence_nondiabetic", w.peak_prevalence_nd}});
  }
  summary["annual_windows"] = windows;
  j["summary"] = summary;

  Json corr;
  corr["labels"] = Json::array();
  for (const char* l : kCorrelationLabels) corr["labels"].push_back(l);
  corr["values"] = Json::array();
  for (const auto& row : report.correlation.values) {
    Json r = Json::array();
    for (const auto& v : row) r.push_back(optional_number(v));
    corr["values"].push_back(r);
  }
  j["correlation"] = corr;
  j["samples"] = report.prevalence.times.size();
  return j;
}

R0Report make_r0_report(const ModelParams& params, double t0, double t_end, double step) {
  R0Report r;
  r.a = params.a_mean;
  r.effective = effective_params(params);
  r.r0_effective = r0_effective_detail(params, params.a_mean);
  r.r0_ngm = r0_ngm(params, params.a_mean);
  r.seasonal = r0_seasonal_series(params, t0, t_end, step);
  return r;
}

Json r0_report_to_json(const R0Report& r) {
  Json j;
  j["a"] = r.a;
  j["effective_params"] = {{"b_eff", r.effective.b_eff}, {"c_eff", r.effective.c_eff},
                           {"gamma_eff", r.effective.gamma_eff}};
  j["r0_effective"] = r.r0_effective.value;
  j["r0_host_to_vector"] = r.r0_effective.host_to_vector;
  j["r0_vector_to_host"] = r.r0_effective.vector_to_host;
  j["r0_ngm"] = r.r0_ngm;
  const auto summary = [](const SeriesSummary& s) {
    return Json{{"min", s.min}, {"max", s.max}, {"mean", s.mean}};
  };
  j["seasonal"] = {{"t0", r.seasonal.points.front().t},
                   {"t_end", r.seasonal.points.back().t},
                   {"samples", r.seasonal.points.size()},
                   {"r0_effective", summary(r.seasonal.effective)},
                   {"r0_ngm", summary(r.seasonal.ngm)}};
  return j;
}

void write_json(const Json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace vbd
