#include "vbd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "vbd/csv.hpp"

namespace vbd {

namespace {

std::array<std::vector<double>, 8> dataset_columns(const Dataset& ds) {
  std::array<std::vector<double>, 8> cols;
  for (auto& c : cols) c.reserve(ds.size());
  for (const auto& r : ds.rows) {
    const std::array<double, 8> v = {r.model.s_d, r.model.i_md, r.model.s_nd, r.model.i_m,
                                     r.model.s_v, r.model.i_v,  r.obs_i_md,   r.obs_i_m};
    for (std::size_t c = 0; c < 8; ++c) cols[c].push_back(v[c]);
  }
  return cols;
}

}  // namespace

PrevalenceSeries prevalence_series(const Trajectory& traj, const ModelParams& params) {
  PrevalenceSeries out;
  out.times = traj.times();
  out.diabetic.reserve(traj.size());
  out.nondiabetic.reserve(traj.size());
  for (const auto& raw : traj.states()) {
    const SystemState s = clamp_non_negative(raw);
    out.diabetic.push_back(std::clamp(s.i_md / params.n_d, 0.0, 1.0));
    out.nondiabetic.push_back(std::clamp(s.i_m / params.n_nd, 0.0, 1.0));
  }
  return out;
}

OddsRatioSeries aor_series(const Trajectory& traj, const ModelParams&) {
  OddsRatioSeries out;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const SystemState s = clamp_non_negative(traj[i]);
    if (s.s_d <= 0.0 || s.s_nd <= 0.0 || s.i_m <= 0.0) {
      ++out.omitted;
      continue;
    }
    out.times.push_back(traj.times()[i]);
    out.values.push_back((s.i_md / s.s_d) / (s.i_m / s.s_nd));
  }
  return out;
}

double odds_ratio_from_prevalence(double p_d, double p_nd) {
  return (p_d / (1.0 - p_d)) / (p_nd / (1.0 - p_nd));
}

std::optional<double> CorrelationMatrix::at(const std::string& row, const std::string& col) const {
  const auto index = [](const std::string& label) {
    for (std::size_t i = 0; i < kCorrelationLabels.size(); ++i)
      if (label == kCorrelationLabels[i]) return i;
    throw std::invalid_argument("unknown correlation label '" + label + "'");
  };
  return values[index(row)][index(col)];
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix correlation_matrix(const Dataset& dataset) {
  if (dataset.size() < 3) throw std::invalid_argument("correlation needs at least 3 rows");
  const auto cols = dataset_columns(dataset);
  CorrelationMatrix m;
  for (std::size_t i = 0; i < 8; ++i) {
    const bool constant = !pearson(cols[i], cols[i]).has_value();
    m.values[i][i] = constant ? std::nullopt : std::optional<double>(1.0);
    for (std::size_t j = i + 1; j < 8; ++j) {
      m.values[i][j] = pearson(cols[i], cols[j]);
      m.values[j][i] = m.values[i][j];
    }
  }
  return m;
}

std::size_t autocorrelation_peak_lag(std::span<const double> series, std::size_t min_lag,
                                     std::size_t max_lag) {
  const std::size_t n = series.size();
  if (min_lag > max_lag || max_lag >= n) throw std::invalid_argument("lag range exceeds series");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  double denom = 0.0;
  for (const double v : series) denom += (v - mean) * (v - mean);
  if (denom == 0.0) throw std::invalid_argument("constant series has no autocorrelation");

  std::size_t best_lag = min_lag;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) acc += (series[i] - mean) * (series[i + lag] - mean);
    if (acc / denom > best) {
      best = acc / denom;
      best_lag = lag;
    }
  }
  return best_lag;
}

std::vector<std::size_t> major_peaks(std::span<const double> series, double fraction) {
  std::vector<std::size_t> out;
  if (series.size() < 3) return out;
  const double global = *std::max_element(series.begin(), series.end());
  if (!(global > 0.0)) return out;
  for (std::size_t i = 1; i + 1 < series.size(); ++i) {
    if (series[i] >= series[i - 1] && series[i] > series[i + 1] && series[i] >= fraction * global)
      out.push_back(i);
  }
  return out;
}

AnalysisReport summarize(const Trajectory& traj, const Dataset& dataset, const ModelParams& params,
                         double window_days) {
  if (traj.empty()) throw std::invalid_argument("trajectory is empty");
  if (!(window_days > 0.0)) throw std::invalid_argument("window length must be positive");
  if (dataset.size() != traj.size())
    throw AlignmentError("dataset has " + std::to_string(dataset.size()) + " rows, trajectory has " +
                         std::to_string(traj.size()) + " samples");
  for (std::size_t i = 0; i < traj.size(); ++i)
    if (dataset.rows[i].time != traj.times()[i])
      throw AlignmentError("time grids differ at sample " + std::to_string(i));

  AnalysisReport report;
  report.prevalence = prevalence_series(traj, params);
  report.odds_ratio = aor_series(traj, params);
  report.correlation = correlation_matrix(dataset);

  AnalysisSummary& sum = report.summary;
  sum.odds_ratio_omitted = report.odds_ratio.omitted;
  if (!report.odds_ratio.values.empty()) {
    const auto [lo, hi] = std::minmax_element(report.odds_ratio.values.begin(), report.odds_ratio.values.end());
    sum.odds_ratio_min = *lo;
    sum.odds_ratio_max = *hi;
  }

  // Per-window global maxima; the final sample joins the last full window.
  const double t0 = traj.t_begin();
  const auto window_count =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor((traj.t_end() - t0) / window_days)));
  sum.windows.resize(window_count);
  for (std::size_t w = 0; w < window_count; ++w) {
    sum.windows[w].window_start = t0 + static_cast<double>(w) * window_days;
    sum.windows[w].window_end = w + 1 == window_count ? traj.t_end() : t0 + static_cast<double>(w + 1) * window_days;
    sum.windows[w].peak_i_md = -1.0;
    sum.windows[w].peak_i_m = -1.0;
  }
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times()[i];
    const auto w = std::min(window_count - 1, static_cast<std::size_t>(std::floor((t - t0) / window_days)));
    const SystemState s = clamp_non_negative(traj[i]);
    WindowPeak& pk = sum.windows[w];
    if (s.i_md > pk.peak_i_md) {
      pk.peak_i_md = s.i_md;
      pk.time_i_md = t;
      pk.peak_prevalence_d = report.prevalence.diabetic[i];
    }
    if (s.i_m > pk.peak_i_m) {
      pk.peak_i_m = s.i_m;
      pk.time_i_m = t;
      pk.peak_prevalence_nd = report.prevalence.nondiabetic[i];
    }
  }
  for (const auto& pk : sum.windows) {
    sum.peak_i_md = std::max(sum.peak_i_md, pk.peak_i_md);
    sum.peak_i_m = std::max(sum.peak_i_m, pk.peak_i_m);
    sum.peak_prevalence_d = std::max(sum.peak_prevalence_d, pk.peak_prevalence_d);
    sum.peak_prevalence_nd = std::max(sum.peak_prevalence_nd, pk.peak_prevalence_nd);
  }

  std::vector<double> i_md;
  i_md.reserve(traj.size());
  for (const auto& s : traj.states()) i_md.push_back(std::max(0.0, s.i_md));
  for (const std::size_t idx : major_peaks(i_md)) sum.major_peak_times.push_back(traj.times()[idx]);
  return report;
}

void write_prevalence_csv(const AnalysisReport& report, std::ostream& out) {
  out << "time,prev_D,prev_ND,odds_ratio\n";
  const auto& prev = report.prevalence;
  const auto& orr = report.odds_ratio;
  std::size_t k = 0;
  for (std::size_t i = 0; i < prev.times.size(); ++i) {
    double ratio = std::numeric_limits<double>::quiet_NaN();
    if (k < orr.times.size() && orr.times[k] == prev.times[i]) ratio = orr.values[k++];
    csv::write_row(out, {csv::format_number(prev.times[i]), csv::format_number(prev.diabetic[i]),
                         csv::format_number(prev.nondiabetic[i]), csv::format_number(ratio)});
  }
}

void write_correlation_csv(const CorrelationMatrix& m, std::ostream& out) {
  out << "label";
  for (const char* l : kCorrelationLabels) out << ',' << l;
  out << '\n';
  for (std::size_t i = 0; i < 8; ++i) {
    std::vector<std::string> cells{kCorrelationLabels[i]};
    for (std::size_t j = 0; j < 8; ++j)
      cells.push_back(m.values[i][j] ? csv::format_number(*m.values[i][j]) : "NA");
    csv::write_row(out, cells);
  }
}

}  // namespace vbd
