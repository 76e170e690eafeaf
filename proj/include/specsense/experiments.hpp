#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specsense/datastore.hpp"
#include "specsense/detectors.hpp"
#include "specsense/nn/train.hpp"
#include "specsense/stats.hpp"

namespace specsense {

struct ResultPoint {
  double snr_db = 0.0;
  double pd = 0.0;
  stats::Interval ci;  // Wilson 95% interval of pd
  double pf_target = 0.0;
  double pf_empirical = 0.0;
  stats::Interval pf_ci;
  std::size_t n_trials = 0;
  std::size_t detections = 0;
  std::size_t n_noise_trials = 0;
  std::size_t false_alarms = 0;
};

struct ResultCurve {
  std::string experiment;
  std::string series;  // e.g. modulation, noise factor, before/after
  DetectorId detector = DetectorId::cnn;
  NoiseKind noise_kind = NoiseKind::white;
  double pf_target = 0.0;
  std::uint64_t seed = 0;
  std::vector<ResultPoint> points;
};

inline constexpr std::size_t kDefaultTrials = 2000;

struct CurveSpec {
  std::string experiment = "curve";
  std::string series;
  std::vector<ModulationKind> kinds;  // trial i uses kinds[i % kinds.size()]; empty means the trained kinds
  std::vector<double> snr_grid;       // empty means -20..20 dB in 2 dB steps
  NoiseSpec noise;
  std::size_t n_trials = kDefaultTrials;
  std::optional<std::size_t> n_noise_trials;  // defaults to n_trials
  SynthesisConfig synthesis;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;  // separates evaluation streams under one seed
};

std::vector<double> default_snr_grid();

/// Pd at every SNR from fresh signal-plus-noise frames and Pf from fresh noise-only frames, all in the
/// evaluation seed domain. Frames depend only on (seed, stream, snr, trial), so curves for different
/// detectors or models see identical inputs. Throws StateError for an uncalibrated threshold.
ResultCurve run_curve(Detector& det, const Threshold& th, const CurveSpec& spec);

/// Held-out 8PSK, 8FSK, 64QAM curves plus matched QPSK, 4FSK, 32QAM curves.
/// Throws ValidityError when any held-out kind appears among the training modulations.
std::vector<ResultCurve> run_generalization(Detector& cnn, const Threshold& th,
                                            std::span<const ModulationKind> training_kinds, const CurveSpec& base);

/// One curve per noise-uncertainty factor a (realized noise power uniform in dB over [P/a, aP]).
std::vector<ResultCurve> run_noise_uncertainty(Detector& det, const Threshold& th, std::span<const double> a_values,
                                               const CurveSpec& base);

struct ColoredEntry {
  Detector* detector = nullptr;
  Threshold white;                // calibrated on white noise
  std::optional<Threshold> pink;  // calibrated on pink noise
};

/// Under pink noise, per detector: a curve with the pink-recalibrated threshold ("pink-threshold") and
/// one reusing the white-calibrated threshold ("white-threshold"). Throws StateError when a pink
/// calibration is missing.
std::vector<ResultCurve> run_colored(std::span<ColoredEntry> entries, const CurveSpec& base);

struct TransferSpec {
  ModulationKind surrogate = ModulationKind::msk;
  std::size_t n_examples = 1000;  // half signal, half noise; even indices train, odd indices test
  nn::FinetuneHyper hyper;
  double target_pf = 0.01;
  std::size_t calibration_frames = 10000;
  CurveSpec curve;
  std::uint64_t seed = 0;
};

struct TransferResult {
  ResultCurve before;
  ResultCurve after;
  Threshold threshold_before;
  Threshold threshold_after;
  SavedModel tuned;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  double test_accuracy_before = 0.0;
  double test_accuracy_after = 0.0;
};

/// Surrogate examples for fine-tuning: signals cycle through the SNR grid, noise mixes white and pink.
Dataset surrogate_dataset(const TransferSpec& spec, const SynthesisConfig& synthesis);

/// Fine-tunes on the surrogate train half, recalibrates each model on white noise and evaluates both
/// on identical frames. Throws ValidityError when the surrogate kind was part of base training.
TransferResult run_transfer(const SavedModel& base, const TransferSpec& spec);

struct TrainingRun {
  Profile profile = Profile::desk;
  std::uint64_t seed = 1;
  nn::TrainingHyper hyper;
  double pink_fraction = 0.25;
  std::optional<std::size_t> train_per_cell;  // overrides the profile count
  std::optional<std::size_t> validation_per_cell;
  std::optional<std::size_t> test_per_cell;
  nn::ArchitectureSpec architecture = nn::ArchitectureSpec::residual_detector();
  FeatureConvention features;

  DatasetManifest manifest(Split split) const;
  nlohmann::json to_json() const;
};

struct TrainingOutcome {
  SavedModel model;
  std::vector<nn::HistoryPoint> history;
  std::int64_t iterations = 0;
  std::int64_t best_iteration = 0;
  double test_accuracy = 0.0;
  double balanced_test_accuracy = 0.0;
};

/// Builds the train, validation and test splits, trains, and scores the selected snapshot on test.
TrainingOutcome train_model(const TrainingRun& run, const nn::ProgressFn& progress = {});

struct AccuracyReport {
  double accuracy = 0.0;
  double balanced = 0.0;  // mean of signal recall and noise recall
  double signal_recall = 0.0;
  double noise_recall = 0.0;
};
AccuracyReport score(nn::Network<float>& net, const nn::ModelParams& params, const FeatureSet& data);

/// Columns: experiment, detector, noise_kind, snr_db, pf_target, pf_empirical, pd, ci_low, ci_high,
/// n_trials, seed. Numbers use the shortest text that parses back to the same double.
std::string results_csv(std::span<const ResultCurve> curves);
void export_results(std::span<const ResultCurve> curves, const std::string& path);
std::string format_number(double v);

}  // namespace specsense
