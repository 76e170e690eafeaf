#include <doctest.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "specsense/datastore.hpp"
#include "specsense/error.hpp"
#include "specsense/experiments.hpp"
#include "specsense/stats.hpp"

using namespace specsense;

namespace {

CurveSpec small_curve(std::uint64_t seed = 17) {
  CurveSpec c;
  c.experiment = "unit";
  c.snr_grid = {-10.0, 0.0, 20.0};
  c.n_trials = 200;
  c.seed = seed;
  return c;
}

Threshold calibrated(Detector& det, NoiseKind kind = NoiseKind::white, double pf = 0.1, std::size_t n = 2000) {
  return calibrate_threshold(det, NoiseSpec{kind, 1.0, 1.0}, pf, n, 31);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s) {
  double v = std::numeric_limits<double>::quiet_NaN();
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

SavedModel untrained_model(std::uint64_t seed = 3) {
  SavedModel m;
  m.architecture = nn::ArchitectureSpec::residual_detector();
  nn::Network<float> net(m.architecture);
  m.params = net.initialize(seed);
  m.training = {{"manifest", make_manifest(Split::train, 1, 1, 0.0, trained_kinds(), standard_snr_grid()).to_json()}};
  return m;
}

}  // namespace

TEST_CASE("default snr grid") {
  const auto g = default_snr_grid();
  REQUIRE(g.size() == 21);
  CHECK(g.front() == -20.0);
  CHECK(g.back() == 20.0);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] - g[i - 1] == 2.0);
}

TEST_CASE("run_curve points carry counts and intervals") {
  auto det = Detector::entropy();
  const auto th = calibrated(det);
  const auto curve = run_curve(det, th, small_curve());
  CHECK(curve.detector == DetectorId::entropy);
  CHECK(curve.pf_target == 0.1);
  CHECK(curve.experiment == "unit");
  REQUIRE(curve.points.size() == 3);
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& p = curve.points[i];
    if (i > 0) CHECK(p.snr_db > curve.points[i - 1].snr_db);
    CHECK(p.n_trials == 200);
    CHECK(p.n_noise_trials == 200);
    CHECK(p.pd >= 0.0);
    CHECK(p.pd <= 1.0);
    CHECK(p.ci.low <= p.pd);
    CHECK(p.pd <= p.ci.high);
    CHECK(p.pd == double(p.detections) / double(p.n_trials));
    CHECK(p.pf_empirical == double(p.false_alarms) / double(p.n_noise_trials));
    CHECK(p.pf_ci.low <= p.pf_empirical);
    CHECK(p.pf_empirical <= p.pf_ci.high);
    CHECK(p.pf_target == 0.1);
  }
  CHECK(curve.points.back().pd >= 0.99);
}

TEST_CASE("run_curve is deterministic and detector independent in its inputs") {
  auto ent = Detector::entropy();
  const auto th = calibrated(ent);
  const auto a = run_curve(ent, th, small_curve(5));
  const auto b = run_curve(ent, th, small_curve(5));
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].detections == b.points[i].detections);
    CHECK(a.points[i].false_alarms == b.points[i].false_alarms);
  }
  auto other_stream = small_curve(5);
  other_stream.stream = 1;
  const auto c = run_curve(ent, th, other_stream);
  CHECK(c.points.size() == a.points.size());

  // an identical twin detector sees the same frames
  auto twin = Detector::entropy();
  const auto d = run_curve(twin, th, small_curve(5));
  for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].detections == d.points[i].detections);
}

TEST_CASE("degenerate threshold gives zero pd and pf") {
  auto det = Detector::mme();
  Threshold th;
  th.detector = DetectorId::mme;
  th.gamma = std::numeric_limits<double>::max();
  th.target_pf = 0.01;
  th.calibration_size = 10000;
  th.calibrated = true;
  auto spec = small_curve();
  spec.n_trials = 50;
  const auto curve = run_curve(det, th, spec);
  for (const auto& p : curve.points) {
    CHECK(p.pd == 0.0);
    CHECK(p.pf_empirical == 0.0);
    CHECK(p.ci.low == 0.0);
  }
}

TEST_CASE("run_curve preconditions") {
  auto det = Detector::entropy();
  Threshold th;
  th.detector = DetectorId::entropy;
  CHECK_THROWS_AS(run_curve(det, th, small_curve()), StateError);
  auto mme = Detector::mme();
  const auto mme_th = calibrated(mme, NoiseKind::white, 0.1, 1000);
  CHECK_THROWS_AS(run_curve(det, mme_th, small_curve()), DomainError);
  auto th_ok = calibrated(det, NoiseKind::white, 0.1, 1000);
  auto bad_grid = small_curve();
  bad_grid.snr_grid = {0.0, 0.0};
  CHECK_THROWS_AS(run_curve(det, th_ok, bad_grid), DomainError);
}

TEST_CASE("noise-only false alarms track the target") {
  auto det = Detector::entropy();
  const auto th = calibrated(det, NoiseKind::white, 0.1, 5000);
  auto spec = small_curve(71);
  spec.snr_grid = {0.0};
  spec.n_trials = 10;
  spec.n_noise_trials = 4000;
  const auto curve = run_curve(det, th, spec);
  // calibration noise plus fresh-noise binomial: 99.9% region of the beta-binomial predictive
  const auto region = stats::calibrated_exceedance_interval(5000, 0.1, 4000, 0.999);
  const auto fa = curve.points.front().false_alarms;
  CHECK(fa >= region.low);
  CHECK(fa <= region.high);
}

TEST_CASE("curves rise with snr") {
  auto det = Detector::entropy();
  const auto th = calibrated(det);
  auto spec = small_curve(9);
  spec.snr_grid = {-12.0, -8.0, -4.0, 0.0, 4.0, 8.0};
  spec.n_trials = 300;
  const auto curve = run_curve(det, th, spec);
  std::vector<double> pd, w;
  double pooled = 0.0;
  for (const auto& p : curve.points) {
    pd.push_back(p.pd);
    w.push_back(1.0);
    pooled = std::max(pooled, p.ci.high - p.ci.low);
  }
  const auto fit = stats::isotonic_nondecreasing(pd, w);
  for (std::size_t i = 0; i < pd.size(); ++i) CHECK(std::abs(fit[i] - pd[i]) <= pooled);
  CHECK(pd.back() > pd.front());
}

TEST_CASE("generalization guard and layout") {
  auto det = Detector::entropy();
  const auto th = calibrated(det, NoiseKind::white, 0.1, 1000);
  auto spec = small_curve();
  spec.n_trials = 20;
  const std::vector<ModulationKind> leaked{ModulationKind::bpsk, ModulationKind::psk8};
  CHECK_THROWS_AS(run_generalization(det, th, leaked, spec), ValidityError);
  const auto curves = run_generalization(det, th, trained_kinds(), spec);
  REQUIRE(curves.size() == 6);
  const std::vector<std::string> names{"8PSK", "8FSK", "64QAM", "QPSK", "4FSK", "32QAM"};
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(parse_modulation(curves[i].series) == parse_modulation(names[i]));
    CHECK(curves[i].points.size() == 3);
    CHECK(curves[i].points.front().false_alarms == curves[0].points.front().false_alarms);
  }
}

TEST_CASE("noise uncertainty sweep") {
  auto det = Detector::entropy();
  const auto th = calibrated(det, NoiseKind::white, 0.1, 1000);
  auto spec = small_curve(4);
  spec.n_trials = 100;
  const std::vector<double> bad{1.0, 0.9};
  CHECK_THROWS_AS(run_noise_uncertainty(det, th, bad, spec), DomainError);
  const std::vector<double> as{1.0, std::pow(10.0, 0.2)};
  const auto curves = run_noise_uncertainty(det, th, as, spec);
  REQUIRE(curves.size() == 2);
  CHECK(curves[0].series == "a=1");
  // a = 1 reproduces the plain curve
  const auto plain = run_curve(det, th, spec);
  for (std::size_t i = 0; i < plain.points.size(); ++i) {
    CHECK(curves[0].points[i].detections == plain.points[i].detections);
    CHECK(curves[0].points[i].false_alarms == plain.points[i].false_alarms);
  }
}

TEST_CASE("colored noise study needs pink calibrations") {
  auto ent = Detector::entropy();
  const auto white = calibrated(ent, NoiseKind::white, 0.1, 1000);
  std::vector<ColoredEntry> entries{{&ent, white, std::nullopt}};
  auto spec = small_curve();
  spec.n_trials = 30;
  CHECK_THROWS_AS(run_colored(entries, spec), StateError);
  entries[0].pink = white;
  CHECK_THROWS_AS(run_colored(entries, spec), StateError);
  entries[0].pink = calibrated(ent, NoiseKind::pink, 0.1, 1000);
  const auto curves = run_colored(entries, spec);
  REQUIRE(curves.size() == 2);
  CHECK(curves[0].series == "pink-threshold");
  CHECK(curves[1].series == "white-threshold");
  for (const auto& c : curves) CHECK(c.noise_kind == NoiseKind::pink);
  CHECK(curves[0].points.front().n_noise_trials == curves[1].points.front().n_noise_trials);
}

TEST_CASE("surrogate dataset splits evenly") {
  TransferSpec spec;
  spec.seed = 8;
  const auto d = surrogate_dataset(spec, SynthesisConfig{});
  REQUIRE(d.examples.size() == 1000);
  std::size_t train_sig = 0, train = 0, test = 0;
  for (std::size_t i = 0; i < d.examples.size(); ++i) {
    const auto& e = d.examples[i];
    if (e.label == nn::Label::signal) CHECK(e.modulation == ModulationKind::msk);
    if (i % 2 == 0) {
      ++train;
      train_sig += e.label == nn::Label::signal;
    } else {
      ++test;
    }
  }
  CHECK(train == 500);
  CHECK(test == 500);
  CHECK(train_sig == 250);
  CHECK(d.manifest.signal_total() == 500);
}

TEST_CASE("transfer guard and zero-example fine-tuning") {
  auto base = untrained_model();
  TransferSpec spec;
  spec.seed = 2;
  spec.target_pf = 0.1;
  spec.calibration_frames = 1000;
  spec.curve = small_curve();
  spec.curve.snr_grid = {0.0, 10.0};
  spec.curve.n_trials = 40;
  spec.curve.n_noise_trials = 100;

  auto leaked = base;
  leaked.training["manifest"] =
      make_manifest(Split::train, 1, 1, 0.0, std::vector<ModulationKind>{ModulationKind::msk}, standard_snr_grid())
          .to_json();
  CHECK_THROWS_AS(run_transfer(leaked, spec), ValidityError);

  spec.n_examples = 0;
  const auto r = run_transfer(base, spec);
  CHECK(r.train_size == 0);
  CHECK(r.test_size == 0);
  CHECK(r.tuned.params.values == base.params.values);
  CHECK(r.threshold_before.gamma == r.threshold_after.gamma);
  REQUIRE(r.before.points.size() == r.after.points.size());
  for (std::size_t i = 0; i < r.before.points.size(); ++i) {
    CHECK(r.before.points[i].detections == r.after.points[i].detections);
    CHECK(r.before.points[i].false_alarms == r.after.points[i].false_alarms);
  }
  CHECK(r.before.series == "before");
  CHECK(r.after.series == "after");
  CHECK(r.tuned.training.contains("finetune"));
}

TEST_CASE("training run manifests") {
  TrainingRun run;
  run.seed = 12;
  run.train_per_cell = 2;
  run.test_per_cell = 1;
  CHECK(run.manifest(Split::train).signal_total() == 8 * 21 * 2);
  CHECK(run.manifest(Split::test).signal_total() == 8 * 21);
  CHECK(run.manifest(Split::validation).signal_total() == 8 * 21 * 20);
  CHECK(run.manifest(Split::calibration).signal_total() == 0);
  const auto j = run.to_json();
  CHECK(j.at("seed") == 12);
  CHECK(j.at("train_per_cell") == 2);
  CHECK(j.at("profile") == "desk");
}

TEST_CASE("score counts recalls") {
  auto m = untrained_model();
  for (const char* name : {"l12.fc.weight", "l12.fc.bias"}) {
    auto& v = m.params.values[m.params.index_of(name)];
    std::fill(v.begin(), v.end(), 0.0F);
  }
  // bias towards signal
  m.params.values[m.params.index_of("l12.fc.bias")][0] = 1.0F;
  nn::Network<float> net(m.architecture);
  const auto d = build_dataset(make_manifest(Split::test, 4, 1, 0.0,
                                             std::vector<ModulationKind>{ModulationKind::bpsk}, std::vector<int>{0, 2}));
  const auto fs = featurize_dataset(d);
  const auto rep = score(net, m.params, fs);
  CHECK(rep.signal_recall == 1.0);
  CHECK(rep.noise_recall == 0.0);
  CHECK(rep.accuracy == 0.5);
  CHECK(rep.balanced == 0.5);
  CHECK_THROWS_AS(score(net, m.params, FeatureSet{}), DomainError);
}

TEST_CASE("empty curve set gives a header-only csv") {
  const std::vector<ResultCurve> none;
  const auto text = results_csv(none);
  CHECK(text == "experiment,detector,noise_kind,snr_db,pf_target,pf_empirical,pd,ci_low,ci_high,n_trials,seed\n");
}

TEST_CASE("csv rows and numeric roundtrip") {
  std::vector<ResultCurve> curves(2);
  curves[0].experiment = "fig3";
  curves[0].detector = DetectorId::mme;
  curves[0].pf_target = 0.01;
  curves[0].seed = 18446744073709551615ULL;
  curves[1].experiment = "fig7";
  curves[1].series = "white-threshold";
  curves[1].noise_kind = NoiseKind::pink;
  for (int i = 0; i < 3; ++i) {
    ResultPoint p;
    p.snr_db = -20 + 2 * i;
    p.pd = 1.0 / 3.0 + i * 0.1;
    p.ci = {0.1 / 7.0, 0.9 - 1e-17 * i};
    p.pf_target = 0.01;
    p.pf_empirical = 0.0123456789012345678;
    p.n_trials = 2000;
    curves[0].points.push_back(p);
  }
  curves[1].points.push_back(curves[0].points.front());

  const auto path = (std::filesystem::temp_directory_path() / "specsense_results.csv").string();
  export_results(curves, path);
  const auto bytes = read_file(path);
  std::filesystem::remove(path);
  const std::string text(bytes.begin(), bytes.end());
  CHECK(text == results_csv(curves));

  std::stringstream ss(text);
  std::string line;
  std::getline(ss, line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(ss, line)) rows.push_back(split_line(line));
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) CHECK(r.size() == 11);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& p = curves[0].points[i];
    CHECK(rows[i][0] == "fig3");
    CHECK(rows[i][1] == "mme");
    CHECK(rows[i][2] == "white");
    CHECK(parse_double(rows[i][3]) == p.snr_db);
    CHECK(parse_double(rows[i][4]) == p.pf_target);
    CHECK(parse_double(rows[i][5]) == p.pf_empirical);
    CHECK(parse_double(rows[i][6]) == p.pd);
    CHECK(parse_double(rows[i][7]) == p.ci.low);
    CHECK(parse_double(rows[i][8]) == p.ci.high);
    CHECK(rows[i][9] == "2000");
    CHECK(rows[i][10] == "18446744073709551615");
  }
  CHECK(rows[3][0] == "fig7:white-threshold");
  CHECK(rows[3][2] == "pink");
  CHECK_THROWS_AS(export_results(curves, "/nonexistent-dir/x.csv"), Error);
}

TEST_CASE("format_number is the shortest exact text") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-20.0) == "-20");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
  for (double v : {1e-300, 0.5, 2000.0, 0.023659309051256394}) CHECK(parse_double(format_number(v)) == v);
}
