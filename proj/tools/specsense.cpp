// specsense: dataset generation, training, calibration, evaluation, fine-tuning and detection.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "specsense/datastore.hpp"
#include "specsense/detectors.hpp"
#include "specsense/error.hpp"
#include "specsense/experiments.hpp"
#include "specsense/nn/train.hpp"
#include "specsense/parallel.hpp"
#include "specsense/simd/kernels.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace specsense;

namespace {

constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kUsage = 2, kFormat = 3, kState = 4, kNumeric = 5, kH1 = 10 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::domain:
    case ErrorKind::calibration:
    case ErrorKind::io:
      return kUsage;
    case ErrorKind::format:
      return kFormat;
    case ErrorKind::state:
    case ErrorKind::validity:
      return kState;
    case ErrorKind::numeric:
    case ErrorKind::degenerate:
      return kNumeric;
  }
  return 1;
}

struct Common {
  std::string config;
  std::uint64_t seed = 1;
  std::string out = ".";
  unsigned threads = 0;
  std::string profile = "desk";
};

Profile profile_or_throw(const std::string& name) {
  const auto p = parse_profile(name);
  if (!p) throw ConfigError("unknown profile " + name + " (expected desk or paper)");
  return *p;
}

DetectorId detector_or_throw(const std::string& name) {
  const auto d = parse_detector(name);
  if (!d) throw ConfigError("unknown detector " + name + " (expected cnn, mme or entropy)");
  return *d;
}

NoiseKind noise_or_throw(const std::string& name) {
  const auto n = parse_noise_kind(name);
  if (!n) throw ConfigError("unknown noise kind " + name + " (expected white or pink)");
  return *n;
}

std::string option_key(const CLI::Option* opt) {
  std::string key = opt->get_single_name();
  for (char& c : key)
    if (c == '-') c = '_';
  return key;
}

/// Config-file values fill options the command line left unset.
void apply_config(CLI::App* app, const json& cfg) {
  for (CLI::Option* opt : app->get_options()) {
    if (opt->count() > 0 || opt->get_single_name().empty()) continue;
    std::string key = option_key(opt);
    if (!cfg.contains(key)) {
      key = opt->get_single_name();
      if (!cfg.contains(key)) continue;
    }
    const json& v = cfg.at(key);
    auto text = [](const json& x) { return x.is_string() ? x.get<std::string>() : x.dump(); };
    if (v.is_array()) {
      for (const auto& e : v) opt->add_result(text(e));
    } else {
      opt->add_result(text(v));
    }
    opt->run_callback();
  }
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  const auto bytes = read_file(path);
  try {
    json j = json::parse(bytes.begin(), bytes.end());
    if (!j.is_object()) throw ConfigError("config file " + path + " must hold a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory (" + ec.message() + ")", dir);
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write_record(const Common& c, const std::string& subcommand, const std::vector<std::string>& argv, json resolved,
                  const std::vector<std::string>& outputs, json extra = json::object()) {
  json record = {{"tool", "specsense"},
                 {"version", kToolVersion},
                 {"subcommand", subcommand},
                 {"argv", argv},
                 {"config_file", c.config},
                 {"seed", c.seed},
                 {"profile", c.profile},
                 {"threads", thread_limit()},
                 {"isa", std::string(simd::to_string(simd::active_isa()))},
                 {"resolved", std::move(resolved)},
                 {"outputs", outputs}};
  for (auto it = extra.begin(); it != extra.end(); ++it) record[it.key()] = it.value();
  write_text(join(c.out, "record.json"), record.dump(2) + "\n");
}

Detector make_detector(DetectorId id, const std::string& model_path, int smoothing, int bins,
                       std::optional<SavedModel>* loaded = nullptr) {
  switch (id) {
    case DetectorId::cnn: {
      if (model_path.empty()) throw ConfigError("the cnn detector needs --model");
      SavedModel m = load_model(model_path);
      Detector d = Detector::cnn(m.architecture, m.params, m.features);
      if (loaded) *loaded = std::move(m);
      return d;
    }
    case DetectorId::mme: return Detector::mme(smoothing);
    case DetectorId::entropy: return Detector::entropy(bins);
  }
  throw ConfigError("unknown detector");
}

const Threshold& find_threshold(const std::vector<Threshold>& all, DetectorId id, double pf, NoiseKind noise) {
  for (const auto& t : all)
    if (t.detector == id && std::abs(t.target_pf - pf) < 1e-12 && t.noise_kind == noise && t.calibrated) return t;
  throw StateError("no calibrated " + std::string(to_string(id)) + " threshold for pf " + format_number(pf) + " on " +
                   std::string(to_string(noise)) + " noise; run calibrate first");
}

std::string history_csv(const std::vector<nn::HistoryPoint>& h) {
  std::ostringstream os;
  os << "iteration,epoch,learning_rate,train_loss,validation_accuracy,validation_loss\n";
  for (const auto& p : h)
    os << p.iteration << ',' << p.epoch << ',' << format_number(p.learning_rate) << ',' << format_number(p.train_loss)
       << ',' << format_number(p.validation_accuracy) << ',' << format_number(p.validation_loss) << '\n';
  return os.str();
}

FeatureSet load_features(const std::string& path, FeatureConvention conv) {
  return featurize_dataset(read_dataset(path), conv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectrum sensing with a residual CNN detector and classical baselines"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kToolVersion);
  Common c;
  app.add_option("--config", c.config, "JSON file whose keys fill options not given on the command line");
  app.add_option("--seed", c.seed, "Master seed")->capture_default_str();
  app.add_option("--out", c.out, "Output directory")->capture_default_str();
  app.add_option("--threads", c.threads, "Thread cap for parallel sections (0 = all cores)")->capture_default_str();
  app.add_option("--profile", c.profile, "Dataset scale: desk or paper")->capture_default_str();

  // generate
  auto* gen = app.add_subcommand("generate", "Write train, validation, test and calibration datasets");
  double pink_fraction = 0.25;
  std::vector<std::string> splits = {"train", "validation", "test", "calibration"};
  std::optional<std::size_t> per_cell;
  gen->add_option("--pink-fraction", pink_fraction, "Fraction of frames using pink noise")->capture_default_str();
  gen->add_option("--splits", splits, "Splits to write")->capture_default_str();
  gen->add_option("--per-cell", per_cell, "Override the per-(modulation, SNR) frame count");

  // train
  auto* tr = app.add_subcommand("train", "Train the residual CNN on a generated dataset directory");
  std::string data_dir;
  nn::TrainingHyper hyper;
  tr->add_option("--data", data_dir, "Directory holding train.ssd (validation.ssd and test.ssd optional)")->required();
  tr->add_option("--epochs", hyper.epochs)->capture_default_str();
  tr->add_option("--lr", hyper.initial_lr)->capture_default_str();
  tr->add_option("--batch", hyper.batch_size)->capture_default_str();
  tr->add_option("--momentum", hyper.momentum)->capture_default_str();
  tr->add_option("--decay-every", hyper.decay_every)->capture_default_str();
  tr->add_option("--validation-interval", hyper.validation_interval)->capture_default_str();

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Set detector thresholds from noise-only frames");
  std::vector<std::string> detectors = {"cnn", "mme", "entropy"};
  std::vector<double> pfs = {0.1, 0.01};
  std::vector<std::string> noises = {"white"};
  std::size_t frames = 10000;
  std::string model_path;
  int smoothing = kDefaultSmoothing;
  int bins = kDefaultEntropyBins;
  cal->add_option("--detector", detectors)->capture_default_str();
  cal->add_option("--pf", pfs, "Target false-alarm probabilities")->capture_default_str();
  cal->add_option("--noise", noises, "Noise kinds to calibrate on")->capture_default_str();
  cal->add_option("--frames", frames, "Noise frames per calibration")->capture_default_str();
  cal->add_option("--model", model_path, "Model file (cnn detector)");
  cal->add_option("--smoothing", smoothing, "MME smoothing factor")->capture_default_str();
  cal->add_option("--bins", bins, "Entropy histogram bins")->capture_default_str();

  // eval
  auto* ev = app.add_subcommand("eval", "Run a Monte-Carlo experiment and write results.csv");
  std::string experiment;
  std::string thresholds_path;
  double pf = 0.01;
  std::size_t trials = kDefaultTrials;
  std::vector<double> snr_grid;
  std::vector<double> a_values = {1.0, std::pow(10.0, 0.1), std::pow(10.0, 0.2)};
  std::vector<std::string> eval_detectors = {"cnn", "mme", "entropy"};
  ev->add_option("--experiment", experiment, "fig3, fig4, fig5, fig6 or fig7")
      ->required()
      ->check(CLI::IsMember({"fig3", "fig4", "fig5", "fig6", "fig7"}));
  ev->add_option("--model", model_path, "Model file");
  ev->add_option("--thresholds", thresholds_path, "Threshold file from calibrate");
  ev->add_option("--pf", pf)->capture_default_str();
  ev->add_option("--detector", eval_detectors)->capture_default_str();
  ev->add_option("--trials", trials, "Trials per SNR point")->capture_default_str();
  ev->add_option("--snr", snr_grid, "SNR grid in dB (default -20..20 step 2)");
  ev->add_option("--a", a_values, "Noise-uncertainty factors (fig5)");
  ev->add_option("--smoothing", smoothing)->capture_default_str();
  ev->add_option("--bins", bins)->capture_default_str();
  ev->add_option("--frames", frames, "Calibration frames for fig6 recalibration")->capture_default_str();

  // finetune
  auto* ft = app.add_subcommand("finetune", "Fine-tune a model on surrogate or external frames");
  nn::FinetuneHyper fhyper;
  std::string ft_data;
  std::string surrogate = "MSK";
  ft->add_option("--model", model_path, "Base model file")->required();
  ft->add_option("--data", ft_data, "Dataset file with labeled frames (default: generated surrogate train half)");
  ft->add_option("--surrogate", surrogate, "Surrogate modulation when --data is absent")->capture_default_str();
  ft->add_option("--lr", fhyper.learning_rate)->capture_default_str();
  ft->add_option("--epochs", fhyper.epochs)->capture_default_str();
  ft->add_option("--batch", fhyper.batch_size)->capture_default_str();

  // detect
  auto* dt = app.add_subcommand("detect", "Decide H0/H1 for one frame; exit 0 for H0, 10 for H1");
  std::string frame_path;
  std::size_t frame_index = 0;
  std::string detector_name = "cnn";
  std::optional<double> gamma;
  std::string noise_name = "white";
  dt->add_option("--frame", frame_path, "Dataset container holding the frame")->required();
  dt->add_option("--index", frame_index, "Example index inside the container")->capture_default_str();
  dt->add_option("--detector", detector_name)->capture_default_str();
  dt->add_option("--model", model_path, "Model file (cnn detector)");
  dt->add_option("--gamma", gamma, "Threshold value (overrides --thresholds)");
  dt->add_option("--thresholds", thresholds_path, "Threshold file from calibrate");
  dt->add_option("--pf", pf)->capture_default_str();
  dt->add_option("--noise", noise_name, "Noise kind the threshold was calibrated on")->capture_default_str();
  dt->add_option("--smoothing", smoothing)->capture_default_str();
  dt->add_option("--bins", bins)->capture_default_str();

  // init
  auto* in = app.add_subcommand("init", "Write a freshly initialized (untrained) model");
  bool symmetric = false;
  in->add_flag("--symmetric", symmetric, "Zero the output layer so both classes get confidence 0.5");

  const std::vector<std::string> args(argv, argv + argc);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    const json cfg = load_config(c.config);
    apply_config(&app, cfg);
    for (CLI::App* sub : app.get_subcommands()) apply_config(sub, cfg);
    set_thread_limit(c.threads);
    const Profile profile = profile_or_throw(c.profile);
    ensure_dir(c.out);

    if (gen->parsed()) {
      std::vector<std::string> outputs;
      json counts = json::object();
      for (const auto& name : splits) {
        const auto split = parse_split(name);
        if (!split) throw ConfigError("unknown split " + name);
        DatasetManifest m;
        if (per_cell && *split != Split::calibration) {
          const auto grid = standard_snr_grid();
          m = make_manifest(*split, c.seed, *per_cell, pink_fraction, trained_kinds(), grid);
        } else {
          m = make_manifest(profile, *split, c.seed, pink_fraction);
        }
        const std::string path = join(c.out, name + ".ssd");
        write_dataset(path, build_dataset(m));
        outputs.push_back(path);
        counts[name] = {{"total", m.total()}, {"signal", m.signal_total()}, {"noise", m.total() - m.signal_total()}};
        std::cout << name << ": " << m.total() << " frames (" << m.signal_total() << " signal) -> " << path << "\n";
      }
      write_record(c, "generate", args, {{"pink_fraction", pink_fraction}, {"splits", splits}}, outputs,
                   {{"counts", counts}});
      return kOk;
    }

    if (tr->parsed()) {
      if (!fs::is_directory(data_dir)) throw IoError("dataset directory does not exist", data_dir);
      const std::string train_path = join(data_dir, "train.ssd");
      const Dataset train_ds = read_dataset(train_path);
      const FeatureConvention conv{};
      const FeatureSet train_fs = featurize_dataset(train_ds, conv);
      FeatureSet val_fs;
      if (fs::exists(join(data_dir, "validation.ssd"))) val_fs = load_features(join(data_dir, "validation.ssd"), conv);
      nn::Network<float> net(nn::ArchitectureSpec::residual_detector());
      nn::ModelParams init = net.initialize(derive_seed(c.seed, SeedDomain::init));
      const auto result = nn::train(net, std::move(init), {train_fs.features, train_fs.labels},
                                    {val_fs.features, val_fs.labels}, hyper, c.seed, [](const nn::HistoryPoint& h) {
                                      std::cout << "iter " << h.iteration << " epoch " << h.epoch << " lr "
                                                << h.learning_rate << " loss " << h.train_loss << " val_acc "
                                                << h.validation_accuracy << std::endl;
                                    });
      SavedModel model;
      model.architecture = net.spec();
      model.params = result.params;
      model.features = conv;
      model.training = {{"manifest", train_ds.manifest.to_json()},
                        {"seed", c.seed},
                        {"iterations", result.iterations},
                        {"best_iteration", result.best_iteration},
                        {"best_validation_accuracy", result.best_validation_accuracy}};
      json extra = json::object();
      if (fs::exists(join(data_dir, "test.ssd"))) {
        const FeatureSet test_fs = load_features(join(data_dir, "test.ssd"), conv);
        const AccuracyReport rep = score(net, model.params, test_fs);
        model.training["test_accuracy"] = rep.accuracy;
        model.training["balanced_test_accuracy"] = rep.balanced;
        extra["test_accuracy"] = rep.accuracy;
        extra["balanced_test_accuracy"] = rep.balanced;
        std::cout << "test accuracy " << rep.accuracy << " balanced " << rep.balanced << "\n";
      }
      const std::string model_out = join(c.out, "model.ssm");
      const std::string hist_out = join(c.out, "history.csv");
      save_model(model_out, model);
      write_text(hist_out, history_csv(result.history));
      write_record(c, "train", args,
                   {{"data", data_dir},
                    {"epochs", hyper.epochs},
                    {"lr", hyper.initial_lr},
                    {"batch", hyper.batch_size},
                    {"momentum", hyper.momentum},
                    {"decay_every", hyper.decay_every},
                    {"validation_interval", hyper.validation_interval}},
                   {model_out, hist_out}, extra);
      return kOk;
    }

    if (cal->parsed()) {
      std::vector<Threshold> out;
      json details = json::array();
      for (const auto& dname : detectors) {
        Detector det = make_detector(detector_or_throw(dname), model_path, smoothing, bins);
        for (const auto& nname : noises) {
          const NoiseSpec noise{noise_or_throw(nname), 1.0, 1.0};
          const std::uint64_t seed = derive_seed(c.seed, {static_cast<std::uint64_t>(noise.kind)});
          auto stats = statistics_of(det, frames, [&](std::size_t i) {
            return gen_noise(noise, kFeatureLength, derive_seed(seed, SeedDomain::calibration_data, {i}));
          });
          std::vector<double> sorted = stats;
          std::sort(sorted.begin(), sorted.end());
          // lower median: the order statistic of rank ceil(n / 2)
          const double median = sorted.empty() ? 0.0 : sorted[(sorted.size() + 1) / 2 - 1];
          for (double p : pfs) {
            Threshold th = threshold_from_statistics(det.id(), stats, p);
            th.noise_kind = noise.kind;
            th.seed = seed;
            out.push_back(th);
            details.push_back({{"detector", dname}, {"noise", nname}, {"pf", p}, {"gamma", th.gamma},
                               {"median_statistic", median}, {"frames", frames}});
            std::cout << dname << " " << nname << " pf " << p << " gamma " << format_number(th.gamma) << "\n";
          }
        }
      }
      const std::string path = join(c.out, "thresholds.json");
      save_thresholds(path, out);
      write_record(c, "calibrate", args,
                   {{"detector", detectors}, {"pf", pfs}, {"noise", noises}, {"frames", frames}, {"model", model_path},
                    {"smoothing", smoothing}, {"bins", bins}},
                   {path}, {{"thresholds", details}});
      return kOk;
    }

    if (ev->parsed()) {
      std::vector<Threshold> ths;
      if (experiment != "fig6") {
        if (thresholds_path.empty()) throw StateError("eval needs --thresholds from calibrate");
        ths = load_thresholds(thresholds_path);
      }
      CurveSpec base;
      base.experiment = experiment;
      base.snr_grid = snr_grid;
      base.n_trials = trials;
      base.seed = c.seed;
      std::vector<ResultCurve> curves;
      json extra = json::object();
      if (experiment == "fig3") {
        for (const auto& dname : eval_detectors) {
          const DetectorId id = detector_or_throw(dname);
          const Threshold& th = find_threshold(ths, id, pf, NoiseKind::white);
          Detector det = make_detector(id, model_path, smoothing, bins);
          CurveSpec cs = base;
          cs.series = dname;
          curves.push_back(run_curve(det, th, cs));
        }
      } else if (experiment == "fig4") {
        std::optional<SavedModel> m;
        Detector det = make_detector(DetectorId::cnn, model_path, smoothing, bins, &m);
        const auto kinds = training_modulations(*m);
        curves = run_generalization(det, find_threshold(ths, DetectorId::cnn, pf, NoiseKind::white), kinds, base);
      } else if (experiment == "fig5") {
        for (const auto& dname : eval_detectors) {
          const DetectorId id = detector_or_throw(dname);
          Detector det = make_detector(id, model_path, smoothing, bins);
          auto cs = run_noise_uncertainty(det, find_threshold(ths, id, pf, NoiseKind::white), a_values, base);
          curves.insert(curves.end(), cs.begin(), cs.end());
        }
      } else if (experiment == "fig6") {
        if (model_path.empty()) throw ConfigError("fig6 needs --model");
        TransferSpec ts;
        ts.target_pf = pf;
        ts.calibration_frames = frames;
        ts.curve = base;
        ts.seed = c.seed;
        const TransferResult r = run_transfer(load_model(model_path), ts);
        curves = {r.before, r.after};
        const std::string tuned = join(c.out, "model_tuned.ssm");
        save_model(tuned, r.tuned);
        extra = {{"gamma_before", r.threshold_before.gamma},
                 {"gamma_after", r.threshold_after.gamma},
                 {"surrogate_test_accuracy_before", r.test_accuracy_before},
                 {"surrogate_test_accuracy_after", r.test_accuracy_after},
                 {"tuned_model", tuned}};
      } else {
        std::vector<Detector> dets;
        std::vector<ColoredEntry> entries;
        dets.reserve(eval_detectors.size());
        for (const auto& dname : eval_detectors) dets.push_back(make_detector(detector_or_throw(dname), model_path, smoothing, bins));
        for (auto& d : dets) {
          ColoredEntry e;
          e.detector = &d;
          e.white = find_threshold(ths, d.id(), pf, NoiseKind::white);
          e.pink = find_threshold(ths, d.id(), pf, NoiseKind::pink);
          entries.push_back(e);
        }
        curves = run_colored(entries, base);
      }
      const std::string path = join(c.out, "results.csv");
      export_results(curves, path);
      write_record(c, "eval", args,
                   {{"experiment", experiment}, {"model", model_path}, {"thresholds", thresholds_path}, {"pf", pf},
                    {"detector", eval_detectors}, {"trials", trials}, {"snr", snr_grid}, {"a", a_values}},
                   {path}, extra);
      std::cout << "wrote " << path << "\n";
      return kOk;
    }

    if (ft->parsed()) {
      const SavedModel base = load_model(model_path);
      FeatureSet data;
      json source;
      if (!ft_data.empty()) {
        data = load_features(ft_data, base.features);
        source = ft_data;
      } else {
        TransferSpec ts;
        const auto kind = parse_modulation(surrogate);
        if (!kind) throw ConfigError("unknown modulation " + surrogate);
        ts.surrogate = *kind;
        ts.seed = c.seed;
        const Dataset all = surrogate_dataset(ts, SynthesisConfig{});
        Dataset half;
        half.manifest = all.manifest;
        for (std::size_t i = 0; i < all.examples.size(); i += 2) half.examples.push_back(all.examples[i]);
        data = featurize_dataset(half, base.features);
        source = all.manifest.to_json();
      }
      nn::Network<float> net(base.architecture);
      SavedModel tuned = base;
      tuned.params = nn::finetune(net, base.params, {data.features, data.labels}, fhyper, derive_seed(c.seed, {11}));
      tuned.training["finetune"] = {{"learning_rate", fhyper.learning_rate}, {"epochs", fhyper.epochs},
                                    {"batch_size", fhyper.batch_size}, {"source", source}};
      const std::string path = join(c.out, "model_tuned.ssm");
      save_model(path, tuned);
      write_record(c, "finetune", args,
                   {{"model", model_path}, {"data", ft_data}, {"surrogate", surrogate}, {"lr", fhyper.learning_rate},
                    {"epochs", fhyper.epochs}, {"batch", fhyper.batch_size}},
                   {path}, {{"examples", data.size()}});
      return kOk;
    }

    if (dt->parsed()) {
      const Dataset ds = read_dataset(frame_path);
      if (frame_index >= ds.examples.size())
        throw DomainError("frame index " + std::to_string(frame_index) + " outside container of " +
                          std::to_string(ds.examples.size()));
      const DetectorId id = detector_or_throw(detector_name);
      Detector det = make_detector(id, model_path, smoothing, bins);
      Threshold th;
      if (gamma) {
        th.detector = id;
        th.gamma = *gamma;
        th.calibrated = true;
      } else {
        if (thresholds_path.empty()) throw StateError("detect needs --gamma or --thresholds");
        th = find_threshold(load_thresholds(thresholds_path), id, pf, noise_or_throw(noise_name));
      }
      const Verdict v = decide(det.statistic(ds.examples[frame_index].frame), th);
      const bool h1 = v.hypothesis == Hypothesis::H1;
      std::cout << "verdict " << (h1 ? "H1" : "H0") << " statistic " << format_number(v.statistic.value) << " gamma "
                << format_number(v.gamma) << "\n";
      write_record(c, "detect", args,
                   {{"frame", frame_path}, {"index", frame_index}, {"detector", detector_name}, {"model", model_path},
                    {"gamma", th.gamma}},
                   {}, {{"verdict", h1 ? "H1" : "H0"}, {"statistic", v.statistic.value}});
      return h1 ? kH1 : kOk;
    }

    if (in->parsed()) {
      SavedModel m;
      m.architecture = nn::ArchitectureSpec::residual_detector();
      nn::Network<float> net(m.architecture);
      m.params = net.initialize(derive_seed(c.seed, SeedDomain::init));
      if (symmetric) {
        // the output layer is the last weight/bias pair
        const std::size_t n = m.params.size();
        std::fill(m.params.values[n - 1].begin(), m.params.values[n - 1].end(), 0.0F);
        std::fill(m.params.values[n - 2].begin(), m.params.values[n - 2].end(), 0.0F);
      }
      const std::string path = join(c.out, "model.ssm");
      save_model(path, m);
      write_record(c, "init", args, {{"symmetric", symmetric}}, {path});
      return kOk;
    }
    (void)profile;
  } catch (const TrainingFailure& e) {
    std::cerr << "training failed: " << e.what() << "\n";
    return kNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kUsage;
}
