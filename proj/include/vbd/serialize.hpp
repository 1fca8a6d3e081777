#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "vbd/analysis.hpp"
#include "vbd/calibrate.hpp"
#include "vbd/datagen.hpp"
#include "vbd/model.hpp"
#include "vbd/reproduction.hpp"

namespace vbd {

using Json = nlohmann::ordered_json;

/// Field names as in ModelParams. Keys absent from `j` keep the reference
/// defaults; unknown keys and non-numeric values throw InvalidParameter
/// naming the key. The result is validated.
ModelParams params_from_json(const Json& j);
Json params_to_json(const ModelParams& params);

ModelParams load_params(const std::filesystem::path& path);

Json state_to_json(const SystemState& state);
Json noise_to_json(const NoiseConfig& noise);

/// Sibling metadata of a dataset CSV. `timestamp` is only written when set.
Json dataset_meta_to_json(const DatasetProvenance& provenance,
                          const std::optional<std::string>& timestamp = std::nullopt);

Json fit_result_to_json(const FitResult& fit);
Json report_to_json(const AnalysisReport& report);

struct R0Report {
  double a = 0.0;
  EffectiveParams effective;
  R0Effective r0_effective;
  double r0_ngm = 0.0;
  SeasonalR0Series seasonal;
};

R0Report make_r0_report(const ModelParams& params, double t0 = 0.0, double t_end = 364.0,
                        double step = 1.0);
Json r0_report_to_json(const R0Report& report);

/// Pretty-printed with two-space indent and trailing newline.
void write_json(const Json& j, const std::filesystem::path& path);

}  // namespace vbd
