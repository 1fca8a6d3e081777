#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbd/datagen.hpp"
#include "vbd/model.hpp"
#include "vbd/trajectory.hpp"

namespace vbd {

/// Trajectory and dataset are sampled on different time grids.
class AlignmentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PrevalenceSeries {
  std::vector<double> times;
  std::vector<double> diabetic;     // I_MD / N_D
  std::vector<double> nondiabetic;  // I_M / N_ND
};

PrevalenceSeries prevalence_series(const Trajectory& traj, const ModelParams& params);

/// Compartmental odds ratio (I_MD / S_D) / (I_M / S_ND). No covariates
/// exist in the model, so this is the unadjusted ratio.
struct OddsRatioSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::size_t omitted = 0;  // samples with S_D, S_ND or I_M equal to zero
};

OddsRatioSeries aor_series(const Trajectory& traj, const ModelParams& params);

/// Odds ratio implied by two prevalences.
double odds_ratio_from_prevalence(double prevalence_d, double prevalence_nd);

inline constexpr std::array<const char*, 8> kCorrelationLabels = {
    "S_D", "I_MD", "S_ND", "I_M", "S_V", "I_V", "obs_I_MD", "obs_I_M"};

/// Pearson correlations over all rows. Entries involving a constant column
/// are std::nullopt.
struct CorrelationMatrix {
  std::array<std::array<std::optional<double>, 8>, 8> values{};

  std::optional<double> at(const std::string& row, const std::string& col) const;
};

/// Throws std::invalid_argument for fewer than 3 rows.
CorrelationMatrix correlation_matrix(const Dataset& dataset);

/// Pearson correlation; std::nullopt when either series is constant.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Lag in [min_lag, max_lag] maximizing the sample autocorrelation.
std::size_t autocorrelation_peak_lag(std::span<const double> series, std::size_t min_lag,
                                     std::size_t max_lag);

struct WindowPeak {
  double window_start = 0.0;
  double window_end = 0.0;
  double time_i_md = 0.0;
  double peak_i_md = 0.0;
  double peak_prevalence_d = 0.0;
  double time_i_m = 0.0;
  double peak_i_m = 0.0;
  double peak_prevalence_nd = 0.0;
};

struct AnalysisSummary {
  double peak_prevalence_d = 0.0;
  double peak_prevalence_nd = 0.0;
  double peak_i_md = 0.0;
  double peak_i_m = 0.0;
  std::optional<double> odds_ratio_min;
  std::optional<double> odds_ratio_max;
  std::size_t odds_ratio_omitted = 0;
  std::vector<WindowPeak> windows;
  /// Local maxima of I_MD reaching at least half the global maximum.
  std::vector<double> major_peak_times;
};

struct AnalysisReport {
  PrevalenceSeries prevalence;
  OddsRatioSeries odds_ratio;
  CorrelationMatrix correlation;
  AnalysisSummary summary;
};

/// Local maxima (>= left neighbour, > right neighbour) not below
/// `fraction` of the global maximum. Returns indices.
std::vector<std::size_t> major_peaks(std::span<const double> series, double fraction = 0.5);

/// Window length in days for annual peak detection (12 thirty-day months).
inline constexpr double kAnnualWindowDays = 360.0;

/// Builds the full report. Throws AlignmentError when the dataset's time
/// grid differs from the trajectory's.
AnalysisReport summarize(const Trajectory& traj, const Dataset& dataset, const ModelParams& params,
                         double window_days = kAnnualWindowDays);

/// Header: time,prev_D,prev_ND,odds_ratio. Omitted odds ratios print as NA.
void write_prevalence_csv(const AnalysisReport& report, std::ostream& out);

/// Labeled 8x8 matrix; undefined entries print as NA.
void write_correlation_csv(const CorrelationMatrix& matrix, std::ostream& out);

}  // namespace vbd
