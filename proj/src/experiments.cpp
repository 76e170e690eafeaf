#include "specsense/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "specsense/error.hpp"
#include "specsense/rng.hpp"

namespace specsense {
namespace {

using nlohmann::json;

constexpr std::uint64_t kNoiseOnlyTag = 0;
constexpr std::uint64_t kSignalTag = 1;

std::uint64_t snr_key(double snr_db) { return static_cast<std::uint64_t>(std::llround(snr_db * 1000.0) + 1000000); }

std::vector<double> noise_only_statistics(Detector& det, const CurveSpec& spec) {
  const std::size_t n = spec.n_noise_trials.value_or(spec.n_trials);
  const auto len = static_cast<std::size_t>(spec.synthesis.frame_len);
  return statistics_of(det, n, [&](std::size_t i) {
    return gen_noise(spec.noise, len, derive_seed(spec.seed, SeedDomain::evaluation, {spec.stream, kNoiseOnlyTag, i}));
  });
}

std::size_t count_above(const std::vector<double>& stats, double gamma) {
  return static_cast<std::size_t>(std::count_if(stats.begin(), stats.end(), [&](double s) { return s > gamma; }));
}

ResultCurve curve_with_noise_stats(Detector& det, const Threshold& th, const CurveSpec& spec,
                                   const std::vector<double>& noise_stats) {
  const std::vector<ModulationKind> kinds =
      spec.kinds.empty() ? std::vector<ModulationKind>(trained_kinds().begin(), trained_kinds().end()) : spec.kinds;
  const std::vector<double> grid = spec.snr_grid.empty() ? default_snr_grid() : spec.snr_grid;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw DomainError("SNR grid must be strictly increasing");
  const auto len = static_cast<std::size_t>(spec.synthesis.frame_len);

  ResultCurve curve;
  curve.experiment = spec.experiment;
  curve.series = spec.series;
  curve.detector = det.id();
  curve.noise_kind = spec.noise.kind;
  curve.pf_target = th.target_pf;
  curve.seed = spec.seed;

  const std::size_t fa = count_above(noise_stats, th.gamma);
  const double pf = noise_stats.empty() ? 0.0 : static_cast<double>(fa) / static_cast<double>(noise_stats.size());
  const stats::Interval pf_ci = stats::wilson(fa, noise_stats.size());

  for (double snr : grid) {
    const auto stats = statistics_of(det, spec.n_trials, [&](std::size_t i) {
      const std::uint64_t s = derive_seed(spec.seed, SeedDomain::evaluation, {spec.stream, kSignalTag, snr_key(snr), i});
      const ComplexFrame sig = modulate(kinds[i % kinds.size()], spec.synthesis, derive_seed(s, {1}));
      const ComplexFrame w = gen_noise(spec.noise, len, derive_seed(s, {2}));
      return mix(sig, w, snr);
    });
    ResultPoint p;
    p.snr_db = snr;
    p.n_trials = spec.n_trials;
    p.detections = count_above(stats, th.gamma);
    p.pd = spec.n_trials ? static_cast<double>(p.detections) / static_cast<double>(spec.n_trials) : 0.0;
    p.ci = stats::wilson(p.detections, spec.n_trials);
    p.pf_target = th.target_pf;
    p.pf_empirical = pf;
    p.pf_ci = pf_ci;
    p.n_noise_trials = noise_stats.size();
    p.false_alarms = fa;
    curve.points.push_back(p);
  }
  return curve;
}

void check_threshold(const Detector& det, const Threshold& th) {
  if (!th.calibrated) throw StateError("threshold for " + std::string(to_string(th.detector)) + " is not calibrated");
  if (th.detector != det.id())
    throw DomainError("threshold belongs to " + std::string(to_string(th.detector)) + ", detector is " +
                      std::string(to_string(det.id())));
}

nn::LabeledView view_of(const FeatureSet& fs) { return {fs.features, fs.labels}; }

FeatureSet build_features(const DatasetManifest& m, FeatureConvention conv) {
  return featurize_dataset(build_dataset(m), conv);
}

json hyper_to_json(const nn::TrainingHyper& h) {
  return {{"batch_size", h.batch_size},       {"momentum", h.momentum}, {"initial_lr", h.initial_lr},
          {"lr_decay", h.lr_decay},           {"decay_every", h.decay_every}, {"epochs", h.epochs},
          {"validation_interval", h.validation_interval}, {"bn_momentum", h.bn_momentum}};
}

}  // namespace

std::vector<double> default_snr_grid() {
  std::vector<double> g;
  for (int s : standard_snr_grid()) g.push_back(s);
  return g;
}

ResultCurve run_curve(Detector& det, const Threshold& th, const CurveSpec& spec) {
  check_threshold(det, th);
  return curve_with_noise_stats(det, th, spec, noise_only_statistics(det, spec));
}

std::vector<ResultCurve> run_generalization(Detector& cnn, const Threshold& th,
                                            std::span<const ModulationKind> training_kinds, const CurveSpec& base) {
  check_threshold(cnn, th);
  for (ModulationKind k : held_out_kinds())
    if (std::find(training_kinds.begin(), training_kinds.end(), k) != training_kinds.end())
      throw ValidityError("model was trained on held-out modulation " + std::string(to_string(k)));
  const std::array<ModulationKind, 6> kinds = {ModulationKind::psk8, ModulationKind::fsk8,  ModulationKind::qam64,
                                               ModulationKind::qpsk, ModulationKind::fsk4, ModulationKind::qam32};
  const auto noise_stats = noise_only_statistics(cnn, base);
  std::vector<ResultCurve> out;
  for (ModulationKind k : kinds) {
    CurveSpec c = base;
    c.kinds = {k};
    c.series = std::string(to_string(k));
    out.push_back(curve_with_noise_stats(cnn, th, c, noise_stats));
  }
  return out;
}

std::vector<ResultCurve> run_noise_uncertainty(Detector& det, const Threshold& th, std::span<const double> a_values,
                                               const CurveSpec& base) {
  check_threshold(det, th);
  for (double a : a_values)
    if (!(a >= 1.0)) throw DomainError("noise uncertainty factor must be at least 1");
  std::vector<ResultCurve> out;
  for (double a : a_values) {
    CurveSpec c = base;
    c.noise.uncertainty_factor = a;
    c.series = "a=" + format_number(a);
    out.push_back(run_curve(det, th, c));
  }
  return out;
}

std::vector<ResultCurve> run_colored(std::span<ColoredEntry> entries, const CurveSpec& base) {
  for (const auto& e : entries) {
    if (!e.detector) throw DomainError("colored-noise entry without a detector");
    if (!e.pink || !e.pink->calibrated || e.pink->noise_kind != NoiseKind::pink)
      throw StateError("missing pink-noise calibration for " + std::string(to_string(e.detector->id())));
    check_threshold(*e.detector, e.white);
    check_threshold(*e.detector, *e.pink);
  }
  CurveSpec c = base;
  c.noise.kind = NoiseKind::pink;
  std::vector<ResultCurve> out;
  for (auto& e : entries) {
    const auto noise_stats = noise_only_statistics(*e.detector, c);
    CurveSpec recal = c;
    recal.series = "pink-threshold";
    out.push_back(curve_with_noise_stats(*e.detector, *e.pink, recal, noise_stats));
    CurveSpec reuse = c;
    reuse.series = "white-threshold";
    out.push_back(curve_with_noise_stats(*e.detector, e.white, reuse, noise_stats));
  }
  return out;
}

Dataset surrogate_dataset(const TransferSpec& spec, const SynthesisConfig& synthesis) {
  DatasetManifest m;
  m.split = Split::train;
  m.master_seed = derive_seed(spec.seed, SeedDomain::surrogate, {static_cast<std::uint64_t>(spec.surrogate)});
  m.synthesis = synthesis;
  const std::size_t signals = spec.n_examples / 2;
  const std::size_t noises = spec.n_examples - signals;
  const auto grid = standard_snr_grid();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const std::size_t count = signals / grid.size() + (j < signals % grid.size() ? 1 : 0);
    if (count > 0) m.cells.push_back({nn::Label::signal, spec.surrogate, grid[j], NoiseKind::white, count});
  }
  const auto pink = static_cast<std::size_t>(std::llround(static_cast<double>(noises) * 0.25));
  if (noises - pink > 0) m.cells.push_back({nn::Label::noise, std::nullopt, std::nullopt, NoiseKind::white, noises - pink});
  if (pink > 0) m.cells.push_back({nn::Label::noise, std::nullopt, std::nullopt, NoiseKind::pink, pink});
  return build_dataset(m);
}

TransferResult run_transfer(const SavedModel& base, const TransferSpec& spec) {
  const auto trained = training_modulations(base);
  if (std::find(trained.begin(), trained.end(), spec.surrogate) != trained.end())
    throw ValidityError("surrogate " + std::string(to_string(spec.surrogate)) + " was part of base training");

  const Dataset all = surrogate_dataset(spec, spec.curve.synthesis);
  Dataset train_half, test_half;
  train_half.manifest = test_half.manifest = all.manifest;
  for (std::size_t i = 0; i < all.examples.size(); ++i) (i % 2 == 0 ? train_half : test_half).examples.push_back(all.examples[i]);
  const FeatureSet train_fs = featurize_dataset(train_half, base.features);
  const FeatureSet test_fs = featurize_dataset(test_half, base.features);

  TransferResult r;
  r.train_size = train_fs.size();
  r.test_size = test_fs.size();
  nn::Network<float> net(base.architecture);
  r.tuned = base;
  r.tuned.params = nn::finetune(net, base.params, view_of(train_fs), spec.hyper, derive_seed(spec.seed, {11}));
  r.tuned.training["finetune"] = {{"surrogate", std::string(to_string(spec.surrogate))},
                                  {"learning_rate", spec.hyper.learning_rate},
                                  {"epochs", spec.hyper.epochs},
                                  {"batch_size", spec.hyper.batch_size},
                                  {"momentum", spec.hyper.momentum},
                                  {"train_size", r.train_size},
                                  {"manifest", all.manifest.to_json()}};
  if (test_fs.size() > 0) {
    r.test_accuracy_before = score(net, base.params, test_fs).accuracy;
    r.test_accuracy_after = score(net, r.tuned.params, test_fs).accuracy;
  }

  Detector before = Detector::cnn(base.architecture, base.params, base.features);
  Detector after = Detector::cnn(r.tuned.architecture, r.tuned.params, r.tuned.features);
  const NoiseSpec white{NoiseKind::white, spec.curve.noise.power, 1.0};
  const std::uint64_t cal_seed = derive_seed(spec.seed, {12});
  r.threshold_before = calibrate_threshold(before, white, spec.target_pf, spec.calibration_frames, cal_seed);
  r.threshold_after = calibrate_threshold(after, white, spec.target_pf, spec.calibration_frames, cal_seed);

  CurveSpec c = spec.curve;
  c.kinds = {spec.surrogate};
  c.experiment = "fig6";
  c.series = "before";
  r.before = run_curve(before, r.threshold_before, c);
  c.series = "after";
  r.after = run_curve(after, r.threshold_after, c);
  return r;
}

// ---------------------------------------------------------------- training

DatasetManifest TrainingRun::manifest(Split split) const {
  const ProfileCounts pc = profile_counts(profile);
  std::size_t per_cell = pc.train_per_cell;
  if (split == Split::train) per_cell = train_per_cell.value_or(pc.train_per_cell);
  if (split == Split::validation) per_cell = validation_per_cell.value_or(pc.validation_per_cell);
  if (split == Split::test) per_cell = test_per_cell.value_or(pc.test_per_cell);
  if (split == Split::calibration) return make_manifest(profile, split, seed, pink_fraction);
  const auto grid = standard_snr_grid();
  return make_manifest(split, seed, per_cell, pink_fraction, trained_kinds(), grid);
}

nlohmann::json TrainingRun::to_json() const {
  return {{"profile", std::string(specsense::to_string(profile))},
          {"seed", seed},
          {"hyper", hyper_to_json(hyper)},
          {"pink_fraction", pink_fraction},
          {"train_per_cell", train_per_cell.value_or(profile_counts(profile).train_per_cell)},
          {"validation_per_cell", validation_per_cell.value_or(profile_counts(profile).validation_per_cell)},
          {"test_per_cell", test_per_cell.value_or(profile_counts(profile).test_per_cell)},
          {"architecture", architecture.to_json()}};
}

AccuracyReport score(nn::Network<float>& net, const nn::ModelParams& params, const FeatureSet& data) {
  if (data.size() == 0) throw DomainError("cannot score an empty set");
  const auto conf = nn::infer(net, params, data.features);
  std::size_t sig = 0, sig_hit = 0, noi = 0, noi_hit = 0;
  for (std::size_t i = 0; i < conf.size(); ++i) {
    const bool says_signal = conf[i].signal > conf[i].noise;
    if (data.labels[i] == nn::Label::signal) {
      ++sig;
      sig_hit += says_signal;
    } else {
      ++noi;
      noi_hit += !says_signal;
    }
  }
  AccuracyReport r;
  r.accuracy = static_cast<double>(sig_hit + noi_hit) / static_cast<double>(conf.size());
  r.signal_recall = sig ? static_cast<double>(sig_hit) / static_cast<double>(sig) : 0.0;
  r.noise_recall = noi ? static_cast<double>(noi_hit) / static_cast<double>(noi) : 0.0;
  r.balanced = 0.5 * (r.signal_recall + r.noise_recall);
  return r;
}

TrainingOutcome train_model(const TrainingRun& run, const nn::ProgressFn& progress) {
  const DatasetManifest train_m = run.manifest(Split::train);
  const DatasetManifest val_m = run.manifest(Split::validation);
  const DatasetManifest test_m = run.manifest(Split::test);
  const FeatureSet train_fs = build_features(train_m, run.features);
  const FeatureSet val_fs = build_features(val_m, run.features);

  nn::Network<float> net(run.architecture);
  nn::ModelParams init = net.initialize(derive_seed(run.seed, SeedDomain::init));
  nn::TrainingResult result = nn::train(net, std::move(init), view_of(train_fs), view_of(val_fs), run.hyper,
                                        run.seed, progress);

  const FeatureSet test_fs = build_features(test_m, run.features);
  const AccuracyReport rep = score(net, result.params, test_fs);

  TrainingOutcome out;
  out.history = result.history;
  out.iterations = result.iterations;
  out.best_iteration = result.best_iteration;
  out.test_accuracy = rep.accuracy;
  out.balanced_test_accuracy = rep.balanced;
  out.model.architecture = run.architecture;
  out.model.params = std::move(result.params);
  out.model.features = run.features;
  out.model.training = {{"manifest", train_m.to_json()},
                        {"validation_manifest", val_m.to_json()},
                        {"test_manifest", test_m.to_json()},
                        {"hyper", hyper_to_json(run.hyper)},
                        {"seed", run.seed},
                        {"iterations", result.iterations},
                        {"best_iteration", result.best_iteration},
                        {"best_validation_accuracy", result.best_validation_accuracy},
                        {"test_accuracy", rep.accuracy},
                        {"balanced_test_accuracy", rep.balanced}};
  return out;
}

// ---------------------------------------------------------------- export

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string results_csv(std::span<const ResultCurve> curves) {
  std::ostringstream os;
  os << "experiment,detector,noise_kind,snr_db,pf_target,pf_empirical,pd,ci_low,ci_high,n_trials,seed\n";
  for (const auto& c : curves) {
    const std::string tag = c.series.empty() ? c.experiment : c.experiment + ":" + c.series;
    for (const auto& p : c.points)
      os << tag << ',' << to_string(c.detector) << ',' << to_string(c.noise_kind) << ',' << format_number(p.snr_db) << ','
         << format_number(p.pf_target) << ',' << format_number(p.pf_empirical) << ',' << format_number(p.pd) << ','
         << format_number(p.ci.low) << ',' << format_number(p.ci.high) << ',' << p.n_trials << ',' << c.seed << '\n';
  }
  return os.str();
}

void export_results(std::span<const ResultCurve> curves, const std::string& path) {
  write_text(path, results_csv(curves));
}

}  // namespace specsense
