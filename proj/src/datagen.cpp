#include "vbd/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "vbd/csv.hpp"

namespace vbd {

namespace {

struct ReferenceRange {
  const char* column;
  double lo;
  double hi;
};

// Variable ranges of the reference synthetic dataset.
constexpr std::array<ReferenceRange, 8> kReferenceRanges = {{
    {"S_D", 75'000, 80'000},
    {"I_MD", 0, 5'000},
    {"S_ND", 870'000, 920'000},
    {"I_M", 0, 50'000},
    {"S_V", 1'900'000, 2'000'000},
    {"I_V", 0, 100'000},
    {"obs_I_MD", 0, 5'000},
    {"obs_I_M", 0, 50'000},
}};

std::array<double, 8> value_columns(const DatasetRow& r) {
  return {r.model.s_d, r.model.i_md, r.model.s_nd, r.model.i_m,
          r.model.s_v, r.model.i_v,  r.obs_i_md,   r.obs_i_m};
}

}  // namespace

void validate(const NoiseConfig& noise) {
  if (!(noise.sigma_diabetic >= 0.0 && noise.sigma_diabetic < 1.0))
    throw InvalidParameter("sigma_diabetic", "must lie in [0, 1)");
  if (!(noise.sigma_nondiabetic >= 0.0 && noise.sigma_nondiabetic < 1.0))
    throw InvalidParameter("sigma_nondiabetic", "must lie in [0, 1)");
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 noise_stream(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(seed + stream));
}

std::vector<double> Dataset::times() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.time);
  return out;
}

std::vector<double> Dataset::observed_i_md() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.obs_i_md);
  return out;
}

std::vector<double> Dataset::observed_i_m() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.obs_i_m);
  return out;
}

Dataset observe(const Trajectory& traj, const NoiseConfig& noise) {
  validate(noise);
  auto rng_d = noise_stream(noise.seed, 0);
  auto rng_nd = noise_stream(noise.seed, 1);
  std::normal_distribution<double> z_d(0.0, 1.0), z_nd(0.0, 1.0);

  Dataset ds;
  ds.rows.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    DatasetRow row;
    row.time = traj.times()[i];
    row.model = clamp_non_negative(traj[i]);
    // Draw unconditionally so each stream advances once per row.
    const double zd = z_d(rng_d);
    const double znd = z_nd(rng_nd);
    row.obs_i_md = noise.sigma_diabetic == 0.0
                       ? row.model.i_md
                       : std::max(0.0, row.model.i_md * (1.0 + noise.sigma_diabetic * zd));
    row.obs_i_m = noise.sigma_nondiabetic == 0.0
                      ? row.model.i_m
                      : std::max(0.0, row.model.i_m * (1.0 + noise.sigma_nondiabetic * znd));
    ds.rows.push_back(row);
  }
  return ds;
}

Dataset generate_dataset(const ModelParams& params, const SystemState& initial,
                         double duration_days, const NoiseConfig& noise,
                         const IntegratorConfig& config) {
  if (!(duration_days >= 1.0)) throw std::invalid_argument("duration_days must be at least 1");
  validate(noise);
  const Trajectory traj = integrate(params, initial, 0.0, duration_days, config);
  Dataset ds = observe(traj, noise);
  DatasetProvenance prov;
  prov.params = params;
  prov.initial = initial;
  prov.duration_days = duration_days;
  prov.noise = noise;
  prov.range_exceedances = reference_range_exceedances(ds);
  ds.provenance = std::move(prov);
  return ds;
}

std::map<std::string, std::size_t> reference_range_exceedances(const Dataset& dataset) {
  std::map<std::string, std::size_t> counts;
  for (const auto& range : kReferenceRanges) counts[range.column] = 0;
  for (const auto& row : dataset.rows) {
    const auto values = value_columns(row);
    for (std::size_t c = 0; c < kReferenceRanges.size(); ++c)
      if (values[c] < kReferenceRanges[c].lo || values[c] > kReferenceRanges[c].hi)
        ++counts[kReferenceRanges[c].column];
  }
  return counts;
}

Trajectory to_trajectory(const Dataset& dataset) {
  std::vector<double> times;
  std::vector<SystemState> states;
  times.reserve(dataset.size());
  states.reserve(dataset.size());
  for (const auto& r : dataset.rows) {
    times.push_back(r.time);
    states.push_back(r.model);
  }
  return Trajectory(std::move(times), std::move(states));
}

void write_csv(const Dataset& dataset, std::ostream& out) {
  for (std::size_t i = 0; i < kDatasetColumns.size(); ++i) out << (i ? "," : "") << kDatasetColumns[i];
  out << '\n';
  std::vector<std::string> cells(kDatasetColumns.size());
  for (const auto& row : dataset.rows) {
    cells[0] = csv::format_number(row.time);
    const auto values = value_columns(row);
    for (std::size_t c = 0; c < values.size(); ++c) cells[c + 1] = csv::format_number(values[c]);
    csv::write_row(out, cells);
  }
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_csv(dataset, out);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw csv::ParseError("missing header row", 1, "");
  const auto header = csv::split_row(line);
  if (header.size() != kDatasetColumns.size())
    throw csv::ParseError("header has " + std::to_string(header.size()) + " columns, expected " +
                              std::to_string(kDatasetColumns.size()),
                          1, "");
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] != kDatasetColumns[c])
      throw csv::ParseError("header column " + std::to_string(c + 1) + " is '" +
                                std::string(header[c]) + "', expected '" + kDatasetColumns[c] + "'",
                            1, kDatasetColumns[c]);
  }

  Dataset ds;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = csv::split_row(line);
    if (cells.size() != kDatasetColumns.size())
      throw csv::ParseError("row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                                " cells",
                            row_no, "");
    std::array<double, 9> v{};
    for (std::size_t c = 0; c < cells.size(); ++c) {
      try {
        v[c] = csv::parse_number(cells[c]);
      } catch (const std::invalid_argument& e) {
        throw csv::ParseError("row " + std::to_string(row_no) + ", column " + kDatasetColumns[c] +
                                  ": " + e.what(),
                              row_no, kDatasetColumns[c]);
      }
    }
    if (!ds.rows.empty() && !(v[0] > ds.rows.back().time))
      throw csv::ParseError("row " + std::to_string(row_no) + ": time is not strictly increasing",
                            row_no, "time");
    DatasetRow r;
    r.time = v[0];
    r.model = {v[1], v[2], v[3], v[4], v[5], v[6]};
    r.obs_i_md = v[7];
    r.obs_i_m = v[8];
    ds.rows.push_back(r);
  }
  return ds;
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  return read_csv(in);
}

std::filesystem::path meta_path_for(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

}  // namespace vbd
