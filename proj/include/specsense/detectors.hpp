#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "specsense/featurize.hpp"
#include "specsense/nn/network.hpp"
#include "specsense/sigsynth.hpp"

namespace specsense {

enum class DetectorId { cnn, mme, entropy };
std::string_view to_string(DetectorId id) noexcept;
std::optional<DetectorId> parse_detector(std::string_view name) noexcept;

/// Oriented so that larger always means "signal present".
struct DetectorStatistic {
  double value = 0.0;
  DetectorId detector = DetectorId::cnn;
};

struct Threshold {
  DetectorId detector = DetectorId::cnn;
  double gamma = 0.0;
  double target_pf = 0.0;
  std::size_t calibration_size = 0;
  NoiseKind noise_kind = NoiseKind::white;
  std::uint64_t seed = 0;
  bool calibrated = false;
};

enum class Hypothesis { H0, H1 };

struct Verdict {
  Hypothesis hypothesis = Hypothesis::H0;
  DetectorStatistic statistic;
  double gamma = 0.0;
};

inline constexpr int kDefaultSmoothing = 10;
inline constexpr int kDefaultEntropyBins = 15;

/// Signal-class softmax output, i.e. 1 - t_noise.
double cnn_value(const nn::ConfidencePair& p) noexcept;
DetectorStatistic cnn_statistic(nn::Network<float>& net, const nn::ModelParams& params, const PowerSpectrumVector& x);

/// Sample covariance (L x L, row-major) of the overlapping length-L windows of the frame.
std::vector<std::complex<double>> sample_covariance(const ComplexFrame& frame, int smoothing);
/// lambda_max / lambda_min of the smoothed covariance. Throws NumericError when ill-conditioned.
DetectorStatistic mme_statistic(const ComplexFrame& frame, int smoothing = kDefaultSmoothing);

/// Shannon entropy (bits) of the histogram of values over `bins` equal cells spanning [0, max].
double histogram_entropy(std::span<const double> values, int bins);
/// Negated entropy of the spectral-magnitude histogram.
DetectorStatistic entropy_statistic(const ComplexFrame& frame, int bins = kDefaultEntropyBins);

/// Uniform handle over the three detectors; evaluates statistics for batches of frames.
class Detector {
 public:
  static Detector cnn(const nn::ArchitectureSpec& arch, nn::ModelParams params, FeatureConvention features = {});
  static Detector mme(int smoothing = kDefaultSmoothing);
  static Detector entropy(int bins = kDefaultEntropyBins);

  Detector(Detector&&) noexcept;
  Detector& operator=(Detector&&) noexcept;
  ~Detector();

  DetectorId id() const noexcept { return id_; }
  int smoothing() const noexcept { return smoothing_; }
  int bins() const noexcept { return bins_; }
  const nn::ModelParams* model_params() const noexcept;

  DetectorStatistic statistic(const ComplexFrame& frame);
  std::vector<double> statistics(std::span<const ComplexFrame> frames);

 private:
  Detector() = default;
  struct Model;
  DetectorId id_ = DetectorId::mme;
  int smoothing_ = kDefaultSmoothing;
  int bins_ = kDefaultEntropyBins;
  std::unique_ptr<Model> model_;
};

/// Statistics of n frames produced by make(i), generated and scored in bounded chunks.
std::vector<double> statistics_of(Detector& det, std::size_t n, const std::function<ComplexFrame(std::size_t)>& make);

/// gamma = order statistic of rank ceil((1 - pf) n). Throws CalibrationError when n < 100 / pf.
Threshold threshold_from_statistics(DetectorId id, std::vector<double> noise_statistics, double target_pf);

/// Scores n_frames noise-only frames drawn from `noise` in the calibration seed domain.
Threshold calibrate_threshold(Detector& det, const NoiseSpec& noise, double target_pf, std::size_t n_frames,
                              std::uint64_t seed);

/// H1 iff statistic > gamma. Throws DomainError on detector mismatch, StateError when uncalibrated.
Verdict decide(const DetectorStatistic& stat, const Threshold& th);

}  // namespace specsense
