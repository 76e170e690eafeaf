#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "specsense/detectors.hpp"
#include "specsense/featurize.hpp"
#include "specsense/nn/architecture.hpp"
#include "specsense/nn/network.hpp"
#include "specsense/rng.hpp"
#include "specsense/sigsynth.hpp"

namespace specsense {

enum class Split { train, test, calibration, validation };
std::string_view to_string(Split split) noexcept;
std::optional<Split> parse_split(std::string_view name) noexcept;
SeedDomain seed_domain(Split split) noexcept;

enum class Profile { desk, paper };
std::string_view to_string(Profile profile) noexcept;
std::optional<Profile> parse_profile(std::string_view name) noexcept;

struct LabeledExample {
  ComplexFrame frame;
  nn::Label label = nn::Label::noise;
  std::optional<ModulationKind> modulation;  // present iff label == signal
  std::optional<int> snr_db;                 // present iff label == signal
  NoiseKind noise_kind = NoiseKind::white;
  std::uint64_t seed = 0;

  bool operator==(const LabeledExample& o) const;
};

/// One (label, modulation, snr, noise kind) cell with its frame count.
struct DatasetCell {
  nn::Label label = nn::Label::noise;
  std::optional<ModulationKind> modulation;
  std::optional<int> snr_db;
  NoiseKind noise_kind = NoiseKind::white;
  std::size_t count = 0;

  bool operator==(const DatasetCell&) const = default;
};

struct DatasetManifest {
  Split split = Split::train;
  std::uint64_t master_seed = 0;
  SynthesisConfig synthesis;
  double noise_power = 1.0;
  double uncertainty_factor = 1.0;
  std::vector<DatasetCell> cells;

  std::size_t total() const noexcept;
  std::size_t signal_total() const noexcept;
  /// Modulations with at least one frame.
  std::vector<ModulationKind> modulations() const;
  /// Throws ConfigError on duplicate cells, label/metadata inconsistencies or off-grid SNRs.
  void validate() const;

  nlohmann::json to_json() const;
  static DatasetManifest from_json(const nlohmann::json& j);
};

/// -20, -18, ..., 20 dB.
std::vector<int> standard_snr_grid();

struct ProfileCounts {
  std::size_t train_per_cell;
  std::size_t test_per_cell;
  std::size_t validation_per_cell;
  std::size_t calibration_white;
  std::size_t calibration_pink;
};
ProfileCounts profile_counts(Profile profile) noexcept;

/// Signal cells for every (kind, snr) plus an equal number of noise frames. Within each cell a
/// fraction `pink_fraction` of frames (rounded) uses pink noise. Calibration splits hold noise only.
DatasetManifest make_manifest(Profile profile, Split split, std::uint64_t master_seed, double pink_fraction = 0.25,
                              std::span<const ModulationKind> kinds = trained_kinds());
/// Same layout with an explicit per-cell count.
DatasetManifest make_manifest(Split split, std::uint64_t master_seed, std::size_t per_cell, double pink_fraction,
                              std::span<const ModulationKind> kinds, std::span<const int> snr_grid);

/// Seed of example `index` in `cell`: a pure function of the manifest seed, split and cell identity.
std::uint64_t example_seed(const DatasetManifest& m, const DatasetCell& cell, std::size_t index) noexcept;
LabeledExample generate_example(const DatasetManifest& m, const DatasetCell& cell, std::size_t index);

struct Dataset {
  DatasetManifest manifest;
  std::vector<LabeledExample> examples;
};

Dataset build_dataset(const DatasetManifest& manifest);

/// Container: 8-byte magic, u32 version, u64 header length, JSON header, little-endian f32 payload.
void write_dataset(const std::string& path, const Dataset& data);
Dataset read_dataset(const std::string& path);
std::vector<std::uint8_t> encode_dataset(const Dataset& data);
Dataset decode_dataset(std::span<const std::uint8_t> bytes);

/// Feature matrix (n x 512) and labels for training or scoring.
struct FeatureSet {
  std::vector<float> features;
  std::vector<nn::Label> labels;
  std::size_t size() const noexcept { return labels.size(); }
};
FeatureSet featurize_dataset(const Dataset& data, FeatureConvention conv = {});

struct SavedModel {
  nn::ArchitectureSpec architecture;
  nn::ModelParams params;
  FeatureConvention features;
  nlohmann::json training = nlohmann::json::object();  // training manifest and hyperparameters
};

void save_model(const std::string& path, const SavedModel& model);
SavedModel load_model(const std::string& path);
std::vector<std::uint8_t> encode_model(const SavedModel& model);
SavedModel decode_model(std::span<const std::uint8_t> bytes);

/// Modulations listed in a model's training manifest (empty when none recorded).
std::vector<ModulationKind> training_modulations(const SavedModel& model);

nlohmann::json threshold_to_json(const Threshold& th);
Threshold threshold_from_json(const nlohmann::json& j);
void save_thresholds(const std::string& path, const std::vector<Threshold>& thresholds);
std::vector<Threshold> load_thresholds(const std::string& path);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);
void write_text(const std::string& path, const std::string& text);

}  // namespace specsense
