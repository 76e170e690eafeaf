#include "specsense/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specsense/error.hpp"
#include "specsense/fft.hpp"
#include "specsense/hermitian_eig.hpp"
#include "specsense/parallel.hpp"
#include "specsense/rng.hpp"
#include "specsense/stats.hpp"

namespace specsense {

std::string_view to_string(DetectorId id) noexcept {
  switch (id) {
    case DetectorId::cnn: return "cnn";
    case DetectorId::mme: return "mme";
    case DetectorId::entropy: return "entropy";
  }
  return "?";
}

std::optional<DetectorId> parse_detector(std::string_view name) noexcept {
  for (DetectorId id : {DetectorId::cnn, DetectorId::mme, DetectorId::entropy})
    if (to_string(id) == name) return id;
  return std::nullopt;
}

double cnn_value(const nn::ConfidencePair& p) noexcept { return p.signal; }

DetectorStatistic cnn_statistic(nn::Network<float>& net, const nn::ModelParams& params, const PowerSpectrumVector& x) {
  if (x.bins.size() != static_cast<std::size_t>(net.spec().input_length))
    throw DomainError("feature length " + std::to_string(x.bins.size()) + " does not match the network input");
  net.forward(params, x.bins, 1, nn::Mode::infer);
  return {cnn_value(net.confidences()[0]), DetectorId::cnn};
}

std::vector<std::complex<double>> sample_covariance(const ComplexFrame& frame, int smoothing) {
  if (smoothing < 1 || smoothing > 32) throw DomainError("smoothing factor must lie in [1, 32]");
  const std::size_t L = static_cast<std::size_t>(smoothing);
  const std::size_t n = frame.size();
  if (n < 4 * L) throw DomainError("frame shorter than four smoothing windows");
  const std::size_t windows = n - L + 1;
  std::vector<std::complex<double>> x(frame.samples.begin(), frame.samples.end());
  std::vector<std::complex<double>> r(L * L);
  // R[i][j] = mean over windows of x[t+i] conj(x[t+j]); the upper triangle is filled and mirrored
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = i; j < L; ++j) {
      std::complex<double> acc = 0.0;
      for (std::size_t t = 0; t < windows; ++t) acc += x[t + i] * std::conj(x[t + j]);
      acc /= static_cast<double>(windows);
      r[i * L + j] = acc;
      r[j * L + i] = std::conj(acc);
    }
  }
  return r;
}

DetectorStatistic mme_statistic(const ComplexFrame& frame, int smoothing) {
  const auto r = sample_covariance(frame, smoothing);
  const std::size_t L = static_cast<std::size_t>(smoothing);
  if (L == 1) {
    if (!(r[0].real() > 0.0)) throw DegenerateInputError("zero frame has no covariance");
    return {1.0, DetectorId::mme};
  }
  const auto eig = linalg::hermitian_eigenvalues(r, L);
  const double lmax = eig.back();
  const double lmin = eig.front();
  if (!(lmax > 0.0)) throw DegenerateInputError("zero frame has no covariance");
  if (lmin < 1e-15 * lmax) throw NumericError("ill-conditioned covariance: lambda_min below 1e-15 lambda_max");
  return {lmax / lmin, DetectorId::mme};
}

double histogram_entropy(std::span<const double> values, int bins) {
  if (bins < 2) throw DomainError("entropy histogram needs at least two bins");
  if (values.empty()) throw DegenerateInputError("entropy of an empty sample");
  const double top = *std::max_element(values.begin(), values.end());
  if (!(top > 0.0)) throw DegenerateInputError("all-zero spectrum");
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    const double u = v / top;
    const auto cell = std::min<std::size_t>(static_cast<std::size_t>(u * bins), static_cast<std::size_t>(bins - 1));
    ++counts[cell];
  }
  double h = 0.0;
  const double n = static_cast<double>(values.size());
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

DetectorStatistic entropy_statistic(const ComplexFrame& frame, int bins) {
  if (bins < 2) throw DomainError("entropy histogram needs at least two bins");
  const auto spec = fft::forward(frame.samples);
  std::vector<double> mags(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) mags[k] = std::abs(spec[k]);
  return {-histogram_entropy(mags, bins), DetectorId::entropy};
}

// ---------------------------------------------------------------- Detector

struct Detector::Model {
  Model(const nn::ArchitectureSpec& arch, nn::ModelParams p, FeatureConvention f)
      : net(arch), params(std::move(p)), features(f) {
    net.check_compatible(params);
  }
  nn::Network<float> net;
  nn::ModelParams params;
  FeatureConvention features;
};

Detector::Detector(Detector&&) noexcept = default;
Detector& Detector::operator=(Detector&&) noexcept = default;
Detector::~Detector() = default;

Detector Detector::cnn(const nn::ArchitectureSpec& arch, nn::ModelParams params, FeatureConvention features) {
  Detector d;
  d.id_ = DetectorId::cnn;
  d.model_ = std::make_unique<Model>(arch, std::move(params), features);
  return d;
}

Detector Detector::mme(int smoothing) {
  if (smoothing < 1 || smoothing > 32) throw DomainError("smoothing factor must lie in [1, 32]");
  Detector d;
  d.id_ = DetectorId::mme;
  d.smoothing_ = smoothing;
  return d;
}

Detector Detector::entropy(int bins) {
  if (bins < 2) throw DomainError("entropy histogram needs at least two bins");
  Detector d;
  d.id_ = DetectorId::entropy;
  d.bins_ = bins;
  return d;
}

const nn::ModelParams* Detector::model_params() const noexcept { return model_ ? &model_->params : nullptr; }

DetectorStatistic Detector::statistic(const ComplexFrame& frame) {
  switch (id_) {
    case DetectorId::cnn:
      return cnn_statistic(model_->net, model_->params, featurize(frame, model_->features));
    case DetectorId::mme:
      return mme_statistic(frame, smoothing_);
    case DetectorId::entropy:
      return entropy_statistic(frame, bins_);
  }
  throw DomainError("unknown detector");
}

std::vector<double> Detector::statistics(std::span<const ComplexFrame> frames) {
  std::vector<double> out(frames.size());
  if (id_ == DetectorId::cnn) {
    const std::size_t len = static_cast<std::size_t>(model_->net.spec().input_length);
    std::vector<float> feats(frames.size() * len);
    parallel_for(frames.size(), [&](std::size_t i) {
      if (frames[i].size() != len) throw DomainError("frame length does not match the network input");
      featurize_into(frames[i], model_->features, feats.data() + i * len);
    });
    const auto conf = nn::infer(model_->net, model_->params, feats);
    for (std::size_t i = 0; i < conf.size(); ++i) out[i] = cnn_value(conf[i]);
    return out;
  }
  parallel_for(frames.size(), [&](std::size_t i) {
    out[i] = id_ == DetectorId::mme ? mme_statistic(frames[i], smoothing_).value : entropy_statistic(frames[i], bins_).value;
  });
  return out;
}

std::vector<double> statistics_of(Detector& det, std::size_t n, const std::function<ComplexFrame(std::size_t)>& make) {
  constexpr std::size_t kChunk = 2048;
  std::vector<double> out;
  out.reserve(n);
  std::vector<ComplexFrame> frames;
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t m = std::min(kChunk, n - start);
    frames.assign(m, ComplexFrame{});
    parallel_for(m, [&](std::size_t i) { frames[i] = make(start + i); });
    const auto s = det.statistics(frames);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

Threshold threshold_from_statistics(DetectorId id, std::vector<double> noise_statistics, double target_pf) {
  if (!(target_pf > 0.0 && target_pf < 1.0)) throw DomainError("false-alarm target must lie in (0, 1)");
  const std::size_t n = noise_statistics.size();
  if (static_cast<double>(n) < 100.0 / target_pf - 1e-9)
    throw CalibrationError("calibration at pf " + std::to_string(target_pf) + " needs at least " +
                           std::to_string(static_cast<std::size_t>(std::ceil(100.0 / target_pf - 1e-9))) +
                           " noise frames, got " + std::to_string(n));
  const std::size_t k = stats::quantile_rank(n, target_pf);
  std::nth_element(noise_statistics.begin(), noise_statistics.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   noise_statistics.end());
  Threshold th;
  th.detector = id;
  th.gamma = noise_statistics[k - 1];
  th.target_pf = target_pf;
  th.calibration_size = n;
  th.calibrated = true;
  return th;
}

Threshold calibrate_threshold(Detector& det, const NoiseSpec& noise, double target_pf, std::size_t n_frames,
                              std::uint64_t seed) {
  if (static_cast<double>(n_frames) < 100.0 / target_pf - 1e-9)
    throw CalibrationError("calibration at pf " + std::to_string(target_pf) + " needs at least " +
                           std::to_string(static_cast<std::size_t>(std::ceil(100.0 / target_pf - 1e-9))) +
                           " noise frames, got " + std::to_string(n_frames));
  auto stats = statistics_of(det, n_frames, [&](std::size_t i) {
    return gen_noise(noise, kFeatureLength, derive_seed(seed, SeedDomain::calibration_data, {i}));
  });
  Threshold th = threshold_from_statistics(det.id(), std::move(stats), target_pf);
  th.noise_kind = noise.kind;
  th.seed = seed;
  return th;
}

Verdict decide(const DetectorStatistic& stat, const Threshold& th) {
  if (!th.calibrated) throw StateError("threshold has not been calibrated");
  if (stat.detector != th.detector)
    throw DomainError(std::string("statistic from ") + std::string(to_string(stat.detector)) +
                      " detector against a " + std::string(to_string(th.detector)) + " threshold");
  return {stat.value > th.gamma ? Hypothesis::H1 : Hypothesis::H0, stat, th.gamma};
}

}  // namespace specsense
