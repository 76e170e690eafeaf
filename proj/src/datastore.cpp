#include "specsense/datastore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <tuple>

#include "specsense/error.hpp"
#include "specsense/parallel.hpp"

namespace specsense {
namespace {

using nlohmann::json;

constexpr std::array<char, 8> kDatasetMagic = {'S', 'P', 'S', 'N', 'D', 'A', 'T', 'A'};
constexpr std::array<char, 8> kModelMagic = {'S', 'P', 'S', 'N', 'M', 'O', 'D', 'L'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kPreamble = 8 + 4 + 8;

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename U>
U get_le(const std::uint8_t* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
  return v;
}

void put_f32(std::vector<std::uint8_t>& out, float f) { put_le(out, std::bit_cast<std::uint32_t>(f)); }
float get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_le<std::uint32_t>(p)); }

std::vector<std::uint8_t> start_container(const std::array<char, 8>& magic, const json& header) {
  const std::string text = header.dump();
  std::vector<std::uint8_t> out;
  out.insert(out.end(), magic.begin(), magic.end());
  put_le(out, kVersion);
  put_le(out, static_cast<std::uint64_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  return out;
}

struct Container {
  json header;
  std::size_t payload_offset;
};

Container open_container(std::span<const std::uint8_t> bytes, const std::array<char, 8>& magic, const char* what) {
  if (bytes.size() < kPreamble)
    throw FormatError(std::string(what) + " preamble truncated: expected " + std::to_string(kPreamble) +
                          " bytes, found " + std::to_string(bytes.size()),
                      bytes.size());
  for (std::size_t i = 0; i < magic.size(); ++i)
    if (bytes[i] != static_cast<std::uint8_t>(magic[i])) throw FormatError(std::string("bad ") + what + " magic", i);
  const auto version = get_le<std::uint32_t>(bytes.data() + 8);
  if (version != kVersion)
    throw FormatError("unsupported " + std::string(what) + " version " + std::to_string(version), 8);
  const auto hlen = get_le<std::uint64_t>(bytes.data() + 12);
  if (hlen > bytes.size() - kPreamble)
    throw FormatError(std::string(what) + " header truncated: expected " + std::to_string(hlen) + " bytes, found " +
                          std::to_string(bytes.size() - kPreamble),
                      kPreamble);
  Container c;
  try {
    c.header = json::parse(bytes.begin() + kPreamble, bytes.begin() + static_cast<std::ptrdiff_t>(kPreamble + hlen));
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + " header is not valid JSON: " + e.what(), kPreamble);
  }
  c.payload_offset = kPreamble + static_cast<std::size_t>(hlen);
  return c;
}

void check_payload(std::span<const std::uint8_t> bytes, std::size_t offset, std::size_t expected, const char* what) {
  const std::size_t actual = bytes.size() - offset;
  if (actual != expected)
    throw FormatError(std::string(what) + " payload length mismatch: expected " + std::to_string(expected) +
                          " bytes, found " + std::to_string(actual),
                      offset + std::min(actual, expected));
}

json synthesis_to_json(const SynthesisConfig& c) {
  return {{"frame_len", c.frame_len},
          {"symbols_per_frame", c.symbols_per_frame},
          {"oversampling", c.oversampling},
          {"rc_rolloff", c.rc_rolloff},
          {"rc_span_symbols", c.rc_span_symbols},
          {"cfo_min", c.cfo_min},
          {"cfo_max", c.cfo_max},
          {"fsk_tone_spacing", c.fsk_tone_spacing},
          {"random_phase", c.random_phase},
          {"msk_oversampling", c.msk_oversampling}};
}

SynthesisConfig synthesis_from_json(const json& j) {
  SynthesisConfig c;
  c.frame_len = j.value("frame_len", c.frame_len);
  c.symbols_per_frame = j.value("symbols_per_frame", c.symbols_per_frame);
  c.oversampling = j.value("oversampling", c.oversampling);
  c.rc_rolloff = j.value("rc_rolloff", c.rc_rolloff);
  c.rc_span_symbols = j.value("rc_span_symbols", c.rc_span_symbols);
  c.cfo_min = j.value("cfo_min", c.cfo_min);
  c.cfo_max = j.value("cfo_max", c.cfo_max);
  c.fsk_tone_spacing = j.value("fsk_tone_spacing", c.fsk_tone_spacing);
  c.random_phase = j.value("random_phase", c.random_phase);
  c.msk_oversampling = j.value("msk_oversampling", c.msk_oversampling);
  return c;
}

std::string label_name(nn::Label l) { return l == nn::Label::signal ? "signal" : "noise"; }

nn::Label parse_label(const std::string& s) {
  if (s == "signal") return nn::Label::signal;
  if (s == "noise") return nn::Label::noise;
  throw ConfigError("unknown label " + s);
}

ModulationKind parse_kind_or_throw(const std::string& s) {
  const auto k = parse_modulation(s);
  if (!k) throw ConfigError("unknown modulation " + s);
  return *k;
}

NoiseKind parse_noise_or_throw(const std::string& s) {
  const auto k = parse_noise_kind(s);
  if (!k) throw ConfigError("unknown noise kind " + s);
  return *k;
}

json feature_to_json(const FeatureConvention& f) {
  return {{"scale", std::string(to_string(f.scale))}, {"shifted", f.shifted}, {"length", kFeatureLength}};
}

FeatureConvention feature_from_json(const json& j) {
  FeatureConvention f;
  const std::string scale = j.at("scale").get<std::string>();
  if (scale == "linear") f.scale = SpectrumScale::linear;
  else if (scale == "db") f.scale = SpectrumScale::db;
  else throw ConfigError("unknown spectrum scale " + scale);
  f.shifted = j.at("shifted").get<bool>();
  return f;
}

std::string role_name(nn::TensorRole r) {
  switch (r) {
    case nn::TensorRole::weight: return "weight";
    case nn::TensorRole::bias: return "bias";
    case nn::TensorRole::norm_scale: return "norm_scale";
    case nn::TensorRole::norm_shift: return "norm_shift";
    case nn::TensorRole::running_mean: return "running_mean";
    case nn::TensorRole::running_var: return "running_var";
  }
  return "?";
}

}  // namespace

// ---------------------------------------------------------------- enums

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::train: return "train";
    case Split::test: return "test";
    case Split::calibration: return "calibration";
    case Split::validation: return "validation";
  }
  return "?";
}

std::optional<Split> parse_split(std::string_view name) noexcept {
  for (Split s : {Split::train, Split::test, Split::calibration, Split::validation})
    if (to_string(s) == name) return s;
  return std::nullopt;
}

SeedDomain seed_domain(Split split) noexcept {
  switch (split) {
    case Split::train: return SeedDomain::train_data;
    case Split::test: return SeedDomain::test_data;
    case Split::calibration: return SeedDomain::calibration_data;
    case Split::validation: return SeedDomain::validation_data;
  }
  return SeedDomain::train_data;
}

std::string_view to_string(Profile profile) noexcept { return profile == Profile::desk ? "desk" : "paper"; }

std::optional<Profile> parse_profile(std::string_view name) noexcept {
  if (name == "desk") return Profile::desk;
  if (name == "paper") return Profile::paper;
  return std::nullopt;
}

bool LabeledExample::operator==(const LabeledExample& o) const {
  return frame.samples == o.frame.samples && frame.nominal_power == o.frame.nominal_power && label == o.label &&
         modulation == o.modulation && snr_db == o.snr_db && noise_kind == o.noise_kind && seed == o.seed;
}

// ---------------------------------------------------------------- manifest

std::size_t DatasetManifest::total() const noexcept {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.count;
  return n;
}

std::size_t DatasetManifest::signal_total() const noexcept {
  std::size_t n = 0;
  for (const auto& c : cells)
    if (c.label == nn::Label::signal) n += c.count;
  return n;
}

std::vector<ModulationKind> DatasetManifest::modulations() const {
  std::vector<ModulationKind> out;
  for (const auto& c : cells)
    if (c.modulation && c.count > 0 && std::find(out.begin(), out.end(), *c.modulation) == out.end())
      out.push_back(*c.modulation);
  return out;
}

void DatasetManifest::validate() const {
  synthesis.validate();
  if (!(noise_power > 0.0)) throw ConfigError("noise power must be positive");
  if (!(uncertainty_factor >= 1.0)) throw ConfigError("noise uncertainty factor must be at least 1");
  std::set<std::tuple<int, int, int, int>> seen;
  for (const auto& c : cells) {
    if (c.label == nn::Label::signal) {
      if (!c.modulation || !c.snr_db) throw ConfigError("signal cell without modulation or SNR");
      if (*c.snr_db < -20 || *c.snr_db > 20 || *c.snr_db % 2 != 0)
        throw ConfigError("SNR " + std::to_string(*c.snr_db) + " dB is off the -20..20 dB, 2 dB grid");
    } else if (c.modulation || c.snr_db) {
      throw ConfigError("noise cell must not carry modulation or SNR");
    }
    const auto key = std::make_tuple(static_cast<int>(c.label), c.modulation ? static_cast<int>(*c.modulation) : -1,
                                     c.snr_db.value_or(0), static_cast<int>(c.noise_kind));
    if (!seen.insert(key).second) throw ConfigError("duplicate dataset cell");
  }
}

json DatasetManifest::to_json() const {
  json cs = json::array();
  for (const auto& c : cells) {
    json e = {{"label", label_name(c.label)}, {"noise_kind", std::string(specsense::to_string(c.noise_kind))},
              {"count", c.count}};
    if (c.modulation) e["modulation"] = std::string(specsense::to_string(*c.modulation));
    if (c.snr_db) e["snr_db"] = *c.snr_db;
    cs.push_back(std::move(e));
  }
  return {{"split", std::string(specsense::to_string(split))},
          {"master_seed", master_seed},
          {"synthesis", synthesis_to_json(synthesis)},
          {"noise_power", noise_power},
          {"uncertainty_factor", uncertainty_factor},
          {"cells", cs}};
}

DatasetManifest DatasetManifest::from_json(const json& j) {
  try {
    DatasetManifest m;
    const auto split = parse_split(j.at("split").get<std::string>());
    if (!split) throw ConfigError("unknown split " + j.at("split").get<std::string>());
    m.split = *split;
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("synthesis")) m.synthesis = synthesis_from_json(j.at("synthesis"));
    m.noise_power = j.value("noise_power", 1.0);
    m.uncertainty_factor = j.value("uncertainty_factor", 1.0);
    for (const auto& e : j.at("cells")) {
      DatasetCell c;
      c.label = parse_label(e.at("label").get<std::string>());
      c.noise_kind = parse_noise_or_throw(e.at("noise_kind").get<std::string>());
      c.count = e.at("count").get<std::size_t>();
      if (e.contains("modulation")) c.modulation = parse_kind_or_throw(e.at("modulation").get<std::string>());
      if (e.contains("snr_db")) c.snr_db = e.at("snr_db").get<int>();
      m.cells.push_back(c);
    }
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed dataset manifest: ") + e.what());
  }
}

std::vector<int> standard_snr_grid() {
  std::vector<int> g;
  for (int s = -20; s <= 20; s += 2) g.push_back(s);
  return g;
}

ProfileCounts profile_counts(Profile profile) noexcept {
  if (profile == Profile::paper) return {1000, 500, 100, 100000, 10000};
  return {200, 100, 20, 10000, 10000};
}

DatasetManifest make_manifest(Split split, std::uint64_t master_seed, std::size_t per_cell, double pink_fraction,
                              std::span<const ModulationKind> kinds, std::span<const int> snr_grid) {
  if (!(pink_fraction >= 0.0 && pink_fraction <= 1.0)) throw ConfigError("pink fraction must lie in [0, 1]");
  DatasetManifest m;
  m.split = split;
  m.master_seed = master_seed;
  auto split_count = [&](std::size_t n) {
    const auto pink = static_cast<std::size_t>(std::llround(static_cast<double>(n) * pink_fraction));
    return std::make_pair(n - pink, pink);
  };
  std::size_t signals = 0;
  for (ModulationKind k : kinds) {
    for (int snr : snr_grid) {
      const auto [white, pink] = split_count(per_cell);
      if (white > 0) m.cells.push_back({nn::Label::signal, k, snr, NoiseKind::white, white});
      if (pink > 0) m.cells.push_back({nn::Label::signal, k, snr, NoiseKind::pink, pink});
      signals += per_cell;
    }
  }
  const auto [white, pink] = split_count(signals);
  if (white > 0) m.cells.push_back({nn::Label::noise, std::nullopt, std::nullopt, NoiseKind::white, white});
  if (pink > 0) m.cells.push_back({nn::Label::noise, std::nullopt, std::nullopt, NoiseKind::pink, pink});
  m.validate();
  return m;
}

DatasetManifest make_manifest(Profile profile, Split split, std::uint64_t master_seed, double pink_fraction,
                              std::span<const ModulationKind> kinds) {
  const ProfileCounts pc = profile_counts(profile);
  if (split == Split::calibration) {
    DatasetManifest m;
    m.split = split;
    m.master_seed = master_seed;
    m.cells.push_back({nn::Label::noise, std::nullopt, std::nullopt, NoiseKind::white, pc.calibration_white});
    m.cells.push_back({nn::Label::noise, std::nullopt, std::nullopt, NoiseKind::pink, pc.calibration_pink});
    m.validate();
    return m;
  }
  const std::size_t per_cell = split == Split::train  ? pc.train_per_cell
                               : split == Split::test ? pc.test_per_cell
                                                      : pc.validation_per_cell;
  const auto grid = standard_snr_grid();
  return make_manifest(split, master_seed, per_cell, pink_fraction, kinds, grid);
}

// ---------------------------------------------------------------- generation

std::uint64_t example_seed(const DatasetManifest& m, const DatasetCell& cell, std::size_t index) noexcept {
  const std::uint64_t kind = cell.modulation ? static_cast<std::uint64_t>(*cell.modulation) : 255;
  const auto snr = static_cast<std::uint64_t>(cell.snr_db.value_or(0) + 1000);
  return derive_seed(m.master_seed, seed_domain(m.split),
                     {static_cast<std::uint64_t>(cell.label), kind, snr, static_cast<std::uint64_t>(cell.noise_kind),
                      static_cast<std::uint64_t>(index)});
}

LabeledExample generate_example(const DatasetManifest& m, const DatasetCell& cell, std::size_t index) {
  LabeledExample ex;
  ex.label = cell.label;
  ex.modulation = cell.modulation;
  ex.snr_db = cell.snr_db;
  ex.noise_kind = cell.noise_kind;
  ex.seed = example_seed(m, cell, index);
  const NoiseSpec noise{cell.noise_kind, m.noise_power, m.uncertainty_factor};
  const auto len = static_cast<std::size_t>(m.synthesis.frame_len);
  ComplexFrame w = gen_noise(noise, len, derive_seed(ex.seed, {2}));
  if (cell.label == nn::Label::signal) {
    const ComplexFrame s = modulate(*cell.modulation, m.synthesis, derive_seed(ex.seed, {1}));
    ex.frame = mix(s, w, *cell.snr_db);
  } else {
    ex.frame = std::move(w);
  }
  return ex;
}

Dataset build_dataset(const DatasetManifest& manifest) {
  manifest.validate();
  Dataset d;
  d.manifest = manifest;
  std::vector<std::pair<const DatasetCell*, std::size_t>> jobs;
  jobs.reserve(manifest.total());
  for (const auto& c : manifest.cells)
    for (std::size_t i = 0; i < c.count; ++i) jobs.emplace_back(&c, i);
  d.examples.resize(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) { d.examples[i] = generate_example(manifest, *jobs[i].first, jobs[i].second); });
  return d;
}

// ---------------------------------------------------------------- dataset container

std::vector<std::uint8_t> encode_dataset(const Dataset& data) {
  const std::size_t len = static_cast<std::size_t>(data.manifest.synthesis.frame_len);
  json labels = json::array(), mods = json::array(), snrs = json::array(), noises = json::array(),
       seeds = json::array(), powers = json::array();
  for (const auto& e : data.examples) {
    if (e.frame.size() != len)
      throw DomainError("example frame length " + std::to_string(e.frame.size()) + " differs from manifest " +
                        std::to_string(len));
    labels.push_back(label_name(e.label));
    mods.push_back(e.modulation ? json(std::string(to_string(*e.modulation))) : json(nullptr));
    snrs.push_back(e.snr_db ? json(*e.snr_db) : json(nullptr));
    noises.push_back(std::string(to_string(e.noise_kind)));
    seeds.push_back(e.seed);
    powers.push_back(e.frame.nominal_power);
  }
  const json header = {{"kind", "dataset"},
                       {"manifest", data.manifest.to_json()},
                       {"frame_length", len},
                       {"count", data.examples.size()},
                       {"sample_format", "f32le interleaved re,im"},
                       {"columns",
                        {{"label", labels},
                         {"modulation", mods},
                         {"snr_db", snrs},
                         {"noise_kind", noises},
                         {"seed", seeds},
                         {"nominal_power", powers}}}};
  auto out = start_container(kDatasetMagic, header);
  out.reserve(out.size() + data.examples.size() * len * 8);
  for (const auto& e : data.examples)
    for (const cfloat& z : e.frame.samples) {
      put_f32(out, z.real());
      put_f32(out, z.imag());
    }
  return out;
}

Dataset decode_dataset(std::span<const std::uint8_t> bytes) {
  const Container c = open_container(bytes, kDatasetMagic, "dataset");
  Dataset d;
  std::size_t count = 0, len = 0;
  try {
    if (c.header.at("kind").get<std::string>() != "dataset") throw FormatError("container is not a dataset", kPreamble);
    d.manifest = DatasetManifest::from_json(c.header.at("manifest"));
    count = c.header.at("count").get<std::size_t>();
    len = c.header.at("frame_length").get<std::size_t>();
    const json& cols = c.header.at("columns");
    for (const char* name : {"label", "modulation", "snr_db", "noise_kind", "seed", "nominal_power"})
      if (cols.at(name).size() != count)
        throw FormatError(std::string("column ") + name + " has " + std::to_string(cols.at(name).size()) +
                              " entries, expected " + std::to_string(count),
                          kPreamble);
    d.examples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      LabeledExample& e = d.examples[i];
      e.label = parse_label(cols["label"][i].get<std::string>());
      if (!cols["modulation"][i].is_null()) e.modulation = parse_kind_or_throw(cols["modulation"][i].get<std::string>());
      if (!cols["snr_db"][i].is_null()) e.snr_db = cols["snr_db"][i].get<int>();
      e.noise_kind = parse_noise_or_throw(cols["noise_kind"][i].get<std::string>());
      e.seed = cols["seed"][i].get<std::uint64_t>();
      e.frame.nominal_power = cols["nominal_power"][i].get<double>();
    }
  } catch (const json::exception& ex) {
    throw FormatError(std::string("malformed dataset header: ") + ex.what(), kPreamble);
  } catch (const ConfigError& ex) {
    throw FormatError(std::string("malformed dataset header: ") + ex.what(), kPreamble);
  }
  check_payload(bytes, c.payload_offset, count * len * 8, "dataset");
  const std::uint8_t* p = bytes.data() + c.payload_offset;
  for (auto& e : d.examples) {
    e.frame.samples.resize(len);
    for (auto& z : e.frame.samples) {
      z = {get_f32(p), get_f32(p + 4)};
      p += 8;
    }
  }
  return d;
}

void write_dataset(const std::string& path, const Dataset& data) { write_file(path, encode_dataset(data)); }

Dataset read_dataset(const std::string& path) { return decode_dataset(read_file(path)); }

FeatureSet featurize_dataset(const Dataset& data, FeatureConvention conv) {
  FeatureSet fs;
  fs.features.resize(data.examples.size() * kFeatureLength);
  fs.labels.resize(data.examples.size());
  parallel_for(data.examples.size(), [&](std::size_t i) {
    featurize_into(data.examples[i].frame, conv, fs.features.data() + i * kFeatureLength);
    fs.labels[i] = data.examples[i].label;
  });
  return fs;
}

// ---------------------------------------------------------------- model container

std::vector<std::uint8_t> encode_model(const SavedModel& model) {
  nn::Network<float> net(model.architecture);
  net.check_compatible(model.params);
  json tensors = json::array();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    const auto& t = model.params.info[i];
    tensors.push_back({{"name", t.name},
                       {"shape", t.shape},
                       {"role", role_name(t.role)},
                       {"fan_in", t.fan_in},
                       {"offset", offset},
                       {"count", t.count()}});
    offset += t.count() * 4;
  }
  const json header = {{"kind", "model"},
                       {"architecture", model.architecture.to_json()},
                       {"features", feature_to_json(model.features)},
                       {"tensors", tensors},
                       {"training", model.training}};
  auto out = start_container(kModelMagic, header);
  for (const auto& v : model.params.values)
    for (float f : v) put_f32(out, f);
  return out;
}

SavedModel decode_model(std::span<const std::uint8_t> bytes) {
  const Container c = open_container(bytes, kModelMagic, "model");
  SavedModel m;
  std::size_t expected = 0;
  try {
    if (c.header.at("kind").get<std::string>() != "model") throw FormatError("container is not a model", kPreamble);
    m.architecture = nn::ArchitectureSpec::from_json(c.header.at("architecture"));
    m.features = feature_from_json(c.header.at("features"));
    if (c.header.contains("training")) m.training = c.header.at("training");
    nn::Network<float> net(m.architecture);
    const auto& want = net.tensors();
    const json& table = c.header.at("tensors");
    if (table.size() != want.size())
      throw FormatError("model lists " + std::to_string(table.size()) + " tensors, architecture has " +
                            std::to_string(want.size()),
                        kPreamble);
    m.params.info = want;
    for (std::size_t i = 0; i < want.size(); ++i) {
      const json& t = table[i];
      const auto offset = t.at("offset").get<std::size_t>();
      const auto count = t.at("count").get<std::size_t>();
      if (t.at("name").get<std::string>() != want[i].name || t.at("shape").get<std::vector<int>>() != want[i].shape ||
          t.at("role").get<std::string>() != role_name(want[i].role) || count != want[i].count())
        throw FormatError("tensor " + t.at("name").get<std::string>() + " does not match architecture tensor " +
                              want[i].name,
                          c.payload_offset + offset);
      if (offset != expected)
        throw FormatError("tensor " + want[i].name + " offset " + std::to_string(offset) + ", expected " +
                              std::to_string(expected),
                          c.payload_offset + offset);
      expected += count * 4;
    }
  } catch (const json::exception& ex) {
    throw FormatError(std::string("malformed model header: ") + ex.what(), kPreamble);
  } catch (const ConfigError& ex) {
    throw FormatError(std::string("model architecture rejected: ") + ex.what(), kPreamble);
  }
  check_payload(bytes, c.payload_offset, expected, "model");
  const std::uint8_t* p = bytes.data() + c.payload_offset;
  for (const auto& t : m.params.info) {
    std::vector<float> v(t.count());
    for (auto& f : v) {
      f = get_f32(p);
      p += 4;
    }
    m.params.values.push_back(std::move(v));
  }
  return m;
}

void save_model(const std::string& path, const SavedModel& model) { write_file(path, encode_model(model)); }

SavedModel load_model(const std::string& path) { return decode_model(read_file(path)); }

std::vector<ModulationKind> training_modulations(const SavedModel& model) {
  if (!model.training.is_object() || !model.training.contains("manifest")) return {};
  return DatasetManifest::from_json(model.training.at("manifest")).modulations();
}

// ---------------------------------------------------------------- thresholds

json threshold_to_json(const Threshold& th) {
  return {{"detector", std::string(to_string(th.detector))},
          {"gamma", th.gamma},
          {"target_pf", th.target_pf},
          {"calibration_size", th.calibration_size},
          {"noise_kind", std::string(to_string(th.noise_kind))},
          {"seed", th.seed},
          {"calibrated", th.calibrated}};
}

Threshold threshold_from_json(const json& j) {
  try {
    Threshold th;
    const auto id = parse_detector(j.at("detector").get<std::string>());
    if (!id) throw ConfigError("unknown detector " + j.at("detector").get<std::string>());
    th.detector = *id;
    th.gamma = j.at("gamma").get<double>();
    th.target_pf = j.at("target_pf").get<double>();
    th.calibration_size = j.at("calibration_size").get<std::size_t>();
    th.noise_kind = parse_noise_or_throw(j.at("noise_kind").get<std::string>());
    th.seed = j.value("seed", std::uint64_t{0});
    th.calibrated = j.value("calibrated", false);
    return th;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed threshold record: ") + e.what());
  }
}

void save_thresholds(const std::string& path, const std::vector<Threshold>& thresholds) {
  json arr = json::array();
  for (const auto& t : thresholds) arr.push_back(threshold_to_json(t));
  write_text(path, json{{"kind", "thresholds"}, {"thresholds", arr}}.dump(2) + "\n");
}

std::vector<Threshold> load_thresholds(const std::string& path) {
  const auto bytes = read_file(path);
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw FormatError(std::string("threshold file is not valid JSON: ") + e.what(), 0);
  }
  if (!j.is_object() || !j.contains("thresholds")) throw FormatError("threshold file lacks a thresholds array", 0);
  std::vector<Threshold> out;
  for (const auto& t : j.at("thresholds")) out.push_back(threshold_from_json(t));
  return out;
}

// ---------------------------------------------------------------- files

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading", path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed", path);
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing", path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed", path);
}

void write_text(const std::string& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace specsense
