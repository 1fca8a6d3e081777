#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vbd/model.hpp"
#include "vbd/trajectory.hpp"

namespace vbd {

inline constexpr const char* kGeneratorVersion = "vbd-datagen/1.0";

/// Relative Gaussian observation noise. obs = max(0, I * (1 + sigma * z)).
struct NoiseConfig {
  double sigma_diabetic = 0.15;
  double sigma_nondiabetic = 0.20;
  std::uint64_t seed = 42;

  friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;
};

void validate(const NoiseConfig& noise);

/// Independent generator for observation column `stream`. Stream k is a
/// 64-bit Mersenne Twister seeded with splitmix64(seed + k). Column 0 is
/// obs_I_MD, column 1 is obs_I_M.
std::mt19937_64 noise_stream(std::uint64_t seed, std::uint64_t stream);

/// splitmix64 finalizer, exposed for seeding derived generators.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

struct DatasetRow {
  double time = 0.0;
  SystemState model;
  double obs_i_md = 0.0;
  double obs_i_m = 0.0;

  friend bool operator==(const DatasetRow&, const DatasetRow&) = default;
};

struct DatasetProvenance {
  ModelParams params;
  SystemState initial;
  double duration_days = 0.0;
  NoiseConfig noise;
  std::string generator_version = kGeneratorVersion;
  /// Rows outside the reference variable ranges, per column. Informational.
  std::map<std::string, std::size_t> range_exceedances;
};

struct Dataset {
  std::vector<DatasetRow> rows;
  std::optional<DatasetProvenance> provenance;

  std::size_t size() const noexcept { return rows.size(); }
  bool empty() const noexcept { return rows.empty(); }
  std::vector<double> times() const;
  std::vector<double> observed_i_md() const;
  std::vector<double> observed_i_m() const;
};

/// CSV header, in column order.
inline constexpr std::array<const char*, 9> kDatasetColumns = {
    "time", "S_D", "I_MD", "S_ND", "I_M", "S_V", "I_V", "obs_I_MD", "obs_I_M"};

/// Noisy observations of an existing trajectory (every stored sample).
Dataset observe(const Trajectory& traj, const NoiseConfig& noise);

/// Integrates for duration_days, samples daily and adds observation noise.
/// Throws std::invalid_argument for duration_days < 1; integration errors
/// propagate.
Dataset generate_dataset(const ModelParams& params, const SystemState& initial,
                         double duration_days, const NoiseConfig& noise,
                         const IntegratorConfig& config = {});

/// Counts rows falling outside the reference variable ranges.
std::map<std::string, std::size_t> reference_range_exceedances(const Dataset& dataset);

/// Rebuilds the noiseless trajectory held in the model columns.
Trajectory to_trajectory(const Dataset& dataset);

void write_csv(const Dataset& dataset, std::ostream& out);
void write_csv(const Dataset& dataset, const std::filesystem::path& path);

/// Strict reader: header must match kDatasetColumns exactly, cells must be
/// numeric and time strictly increasing. Throws csv::ParseError.
Dataset read_csv(std::istream& in);
Dataset read_csv(const std::filesystem::path& path);

/// `<stem>.meta.json` next to a dataset CSV path.
std::filesystem::path meta_path_for(const std::filesystem::path& csv_path);

}  // namespace vbd
