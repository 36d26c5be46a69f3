// prediagnose: synthetic data, training, prediction, evaluation and report
// assembly for the clot, cardio and skin pipelines.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "prediag/config.hpp"
#include "prediag/dataset.hpp"
#include "prediag/error.hpp"
#include "prediag/eval.hpp"
#include "prediag/fileio.hpp"
#include "prediag/image_io.hpp"
#include "prediag/parallel.hpp"
#include "prediag/persist.hpp"
#include "prediag/pipeline.hpp"
#include "prediag/synthcardio.hpp"
#include "prediag/synththermal.hpp"

namespace fs = std::filesystem;
using namespace prediag;
using pipeline::PipelineKind;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kTraining = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr const char* kSkinReportName = "skin STAND-IN (HOG+SVM, not a CNN)";

std::string numbered(const char* prefix, std::size_t i, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%04zu%s", prefix, i, suffix);
  return buf;
}

unsigned resolve_threads(const std::optional<unsigned>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("PREDIAGNOSE_THREADS"); env && *env) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end != '\0' || v == 0 || v > 1024) throw UsageError("PREDIAGNOSE_THREADS must be an integer in [1, 1024]");
    return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

pipeline::PipelineConfig load_config_file(const std::string& path) {
  if (path.empty()) return {};
  return pipeline::load_config(io::read_text(path));
}

std::vector<Label> shuffled_labels(std::size_t n, double positive_fraction, Rng& rng) {
  if (n == 0) throw UsageError("--n must be positive");
  const auto positives = static_cast<std::size_t>(std::llround(static_cast<double>(n) * positive_fraction));
  std::vector<Label> labels(n, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(positives), 1);
  for (std::size_t i = n; i-- > 1;) std::swap(labels[i], labels[rng.below(i + 1)]);
  return labels;
}

// ---- datasets -------------------------------------------------------------

struct ImageItem {
  std::vector<GrayImage> frames; ///< one frame for plain images
  bool sequence = false;
  Label label = 0;
};

std::vector<ImageItem> load_images(const fs::path& dir, unsigned threads) {
  const auto entries = data::read_manifest(dir);
  std::vector<ImageItem> items(entries.size());
  parallel_for(entries.size(), threads, [&](std::size_t i) {
    const fs::path p = dir / entries[i].filename;
    items[i].label = entries[i].label;
    if (fs::is_directory(p)) {
      items[i].sequence = true;
      for (const auto& f : data::sorted_files(p)) items[i].frames.push_back(img::read_image(f));
      if (items[i].frames.empty()) throw DataError("sequence directory " + p.string() + " holds no frames");
    } else {
      items[i].frames.push_back(img::read_image(p));
    }
  });
  return items;
}

std::vector<pipeline::LabeledRecording> load_recordings(const fs::path& dir, unsigned threads) {
  const auto entries = data::read_manifest(dir);
  std::vector<pipeline::LabeledRecording> recs(entries.size());
  parallel_for(entries.size(), threads, [&](std::size_t i) {
    recs[i].signal = audio::read_wav(dir / entries[i].filename);
    recs[i].label = entries[i].label;
  });
  for (const auto& r : recs)
    if (r.signal.sample_rate != recs.front().signal.sample_rate) {
      std::cerr << "warning: recordings in " << dir << " use mixed sample rates\n";
      break;
    }
  return recs;
}

std::vector<pipeline::LabeledImage> flatten(const std::vector<ImageItem>& items) {
  std::vector<pipeline::LabeledImage> out;
  for (const auto& it : items)
    for (const auto& f : it.frames) out.push_back({f, it.label});
  return out;
}

// ---- models ---------------------------------------------------------------

struct LoadedModel {
  PipelineKind kind = PipelineKind::Clot;
  pipeline::PipelineConfig cfg;
  persist::ModelEnvelope envelope;
  std::optional<int> sample_rate;
};

json::Json config_json(const pipeline::PipelineConfig& cfg, PipelineKind kind) {
  json::Json out = json::Json::object();
  for (const auto& [section, keys] : pipeline::snapshot(cfg, kind)) {
    json::Json s = json::Json::object();
    for (const auto& [k, v] : keys) s[k] = v;
    out[section] = std::move(s);
  }
  return out;
}

LoadedModel load_model(const std::string& path, PipelineKind expected) {
  LoadedModel m;
  m.envelope = persist::load_model_file(path);
  const auto& cw = m.envelope.created_with;
  if (!cw.contains("pipeline") || !cw["pipeline"].is_string())
    throw DataError("model " + path + " does not record its pipeline ($.created_with.pipeline)");
  m.kind = pipeline::parse_pipeline_kind(cw["pipeline"].get<std::string>());
  if (m.kind != expected)
    throw DataError("model " + path + " was trained for the " + std::string(pipeline::to_string(m.kind)) +
                    " pipeline, not " + std::string(pipeline::to_string(expected)));
  const auto want = m.kind == PipelineKind::Cardio ? persist::ModelKind::Forest : persist::ModelKind::Svm;
  if (m.envelope.kind() != want) throw DataError("model " + path + " holds the wrong model kind for its pipeline");
  if (cw.contains("config")) {
    if (!cw["config"].is_object()) throw DataError("$.created_with.config must be an object");
    pipeline::IniSections sections;
    for (const auto& [section, keys] : cw["config"].items()) {
      if (!keys.is_object()) throw DataError("$.created_with.config." + section + " must be an object");
      for (const auto& [k, v] : keys.items()) {
        if (!v.is_string()) throw DataError("$.created_with.config." + section + "." + k + " must be a string");
        sections[section][k] = v.get<std::string>();
      }
    }
    pipeline::apply_ini(m.cfg, sections);
    m.cfg.clot.validate();
    m.cfg.cardio.validate();
    m.cfg.skin.validate();
  }
  if (cw.contains("sample_rate") && cw["sample_rate"].is_number_integer()) m.sample_rate = cw["sample_rate"].get<int>();
  return m;
}

persist::ModelEnvelope make_envelope(PipelineKind kind, const pipeline::PipelineConfig& cfg, std::size_t dimension,
                                     std::optional<int> sample_rate) {
  persist::ModelEnvelope env;
  env.created_with["pipeline"] = std::string(pipeline::to_string(kind));
  env.created_with["config"] = config_json(cfg, kind);
  env.created_with["feature_dimension"] = dimension;
  if (sample_rate) env.created_with["sample_rate"] = *sample_rate;
  return env;
}

// Per-sample predictions for any pipeline; scores feed the ROC sweep.
struct Scored {
  std::vector<Label> labels;
  std::vector<Label> predictions;
  std::vector<double> scores;
};

void predict_images(const LoadedModel& m, const std::vector<ImageItem>& items, const std::vector<std::size_t>& idx,
                    Scored& out, unsigned threads) {
  const auto& svm = std::get<ml::SvmModel>(m.envelope.payload);
  parallel_for(idx.size(), threads, [&](std::size_t k) {
    const auto& item = items[idx[k]];
    ml::Prediction p;
    if (m.kind == PipelineKind::Skin) {
      p = pipeline::skin_standin_classify(svm, item.frames.front(), m.cfg.skin);
    } else if (item.sequence) {
      const auto seq = pipeline::clot_predict_sequence(svm, item.frames, m.cfg.clot);
      p = {seq.score, seq.label};
    } else {
      p = pipeline::clot_predict_frame(svm, item.frames.front(), m.cfg.clot);
    }
    out.labels[idx[k]] = item.label;
    out.predictions[idx[k]] = p.label;
    out.scores[idx[k]] = p.score;
  });
}

void predict_recordings(const LoadedModel& m, const std::vector<pipeline::LabeledRecording>& recs,
                        const std::vector<std::size_t>& idx, Scored& out, unsigned threads) {
  const auto& forest = std::get<ml::ForestModel>(m.envelope.payload);
  parallel_for(idx.size(), threads, [&](std::size_t k) {
    const auto& r = recs[idx[k]];
    const auto p = pipeline::cardio_predict(forest, r.signal, m.cfg.cardio);
    out.labels[idx[k]] = r.label;
    out.predictions[idx[k]] = p.label;
    out.scores[idx[k]] = p.score;
  });
}

std::string report_name(const LoadedModel& m) {
  switch (m.kind) {
    case PipelineKind::Clot: return "clot";
    case PipelineKind::Cardio: return "cardio-" + std::string(pipeline::to_string(m.cfg.cardio.task));
    case PipelineKind::Skin: return kSkinReportName;
  }
  return {};
}

json::Json report_json(const eval::EvalReport& report, PipelineKind kind) {
  auto j = eval::report_to_json(report);
  if (kind == PipelineKind::Skin) j["stand_in"] = true;
  return j;
}

// ---- commands -------------------------------------------------------------

struct SynthThermalArgs {
  std::string out, config;
  std::size_t n = 0;
  double positive_frac = 0.5;
  std::uint64_t seed = 0;
  std::size_t frames = 0;
};

int cmd_synth_thermal(const SynthThermalArgs& a, unsigned threads) {
  const auto cfg = load_config_file(a.config);
  fs::create_directories(a.out);
  std::vector<data::ManifestEntry> manifest;
  Rng rng(a.seed);
  if (a.frames == 0) {
    if (a.n == 0) throw UsageError("--n must be positive");
    const auto samples = thermal::generate_dataset(cfg.clot.thermal, a.n, a.positive_frac, rng, threads);
    parallel_for(samples.size(), threads, [&](std::size_t i) {
      img::write_pgm(fs::path(a.out) / numbered("sample_", i, ".pgm"), img::to_byte_range(samples[i].image));
    });
    for (std::size_t i = 0; i < samples.size(); ++i)
      manifest.push_back({numbered("sample_", i, ".pgm"), samples[i].label, samples[i].seed});
  } else {
    cfg.clot.thermal.validate();
    const auto labels = shuffled_labels(a.n, a.positive_frac, rng);
    std::vector<std::uint64_t> seeds(a.n);
    for (auto& s : seeds) s = rng.next_u64();
    parallel_for(a.n, threads, [&](std::size_t i) {
      Rng local(seeds[i]);
      const auto frames = thermal::generate_frame_sequence(cfg.clot.thermal, labels[i], a.frames, local);
      const fs::path dir = fs::path(a.out) / numbered("seq_", i, "");
      fs::create_directories(dir);
      for (std::size_t f = 0; f < frames.size(); ++f) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%02zu.pgm", f);
        img::write_pgm(dir / name, img::to_byte_range(frames[f]));
      }
    });
    for (std::size_t i = 0; i < a.n; ++i) manifest.push_back({numbered("seq_", i, ""), labels[i], seeds[i]});
  }
  data::write_manifest(a.out, manifest);
  return kOk;
}

struct SynthCardioArgs {
  std::string task = "heart", out;
  std::size_t n = 0;
  double positive_frac = 0.5;
  std::uint64_t seed = 0;
  int rate = 4000;
  double duration = 5.0;
};

int cmd_synth_cardio(const SynthCardioArgs& a, unsigned threads) {
  if (a.n == 0) throw UsageError("--n must be positive");
  if (a.rate != 4000 && a.rate != 8000) throw UsageError("--rate must be 4000 or 8000");
  if (!(a.duration >= 2.0)) throw UsageError("--duration must be at least 2 seconds");
  fs::create_directories(a.out);
  Rng rng(a.seed);
  const auto samples = pipeline::generate_cardio_dataset(pipeline::parse_task(a.task), a.n, a.positive_frac,
                                                         a.duration, a.rate, rng, threads);
  std::vector<data::ManifestEntry> manifest;
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    audio::write_wav(fs::path(a.out) / numbered("rec_", i, ".wav"), samples[i].signal);
  });
  for (std::size_t i = 0; i < samples.size(); ++i)
    manifest.push_back({numbered("rec_", i, ".wav"), samples[i].label, samples[i].seed});
  data::write_manifest(a.out, manifest);
  return kOk;
}

struct TrainArgs {
  std::string data, config, out;
};

// Trains one pipeline on in-memory data. Shared by `train` and k-fold `eval`.
persist::ModelEnvelope train_images(PipelineKind kind, const pipeline::PipelineConfig& cfg,
                                    const std::vector<pipeline::LabeledImage>& train, unsigned threads) {
  if (kind == PipelineKind::Clot) {
    auto model = pipeline::clot_train(train, cfg.clot, threads);
    auto env = make_envelope(kind, cfg, model.dimension(), std::nullopt);
    env.payload = std::move(model);
    return env;
  }
  auto model = pipeline::skin_train(train, cfg.skin, threads);
  auto env = make_envelope(kind, cfg, model.dimension(), std::nullopt);
  env.payload = std::move(model);
  return env;
}

persist::ModelEnvelope train_recordings(const pipeline::PipelineConfig& cfg,
                                        const std::vector<pipeline::LabeledRecording>& train, unsigned threads) {
  auto model = pipeline::cardio_train(train, cfg.cardio, threads);
  auto env = make_envelope(PipelineKind::Cardio, cfg, model.n_features, train.front().signal.sample_rate);
  env.payload = std::move(model);
  return env;
}

LoadedModel as_loaded(PipelineKind kind, const pipeline::PipelineConfig& cfg, persist::ModelEnvelope env) {
  LoadedModel m;
  m.kind = kind;
  m.cfg = cfg;
  m.envelope = std::move(env);
  return m;
}

std::vector<std::size_t> iota_n(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

int cmd_train(PipelineKind kind, const TrainArgs& a, unsigned threads) {
  const auto cfg = load_config_file(a.config);
  LoadedModel m;
  Scored s;
  if (kind == PipelineKind::Cardio) {
    const auto recs = load_recordings(a.data, threads);
    m = as_loaded(kind, cfg, train_recordings(cfg, recs, threads));
    s = {std::vector<Label>(recs.size()), std::vector<Label>(recs.size()), std::vector<double>(recs.size())};
    predict_recordings(m, recs, iota_n(recs.size()), s, threads);
  } else {
    auto items = load_images(a.data, threads);
    m = as_loaded(kind, cfg, train_images(kind, cfg, flatten(items), threads));
    // Training metrics are per frame.
    std::vector<ImageItem> frames;
    for (const auto& it : items)
      for (const auto& f : it.frames) frames.push_back({{f}, false, it.label});
    s = {std::vector<Label>(frames.size()), std::vector<Label>(frames.size()), std::vector<double>(frames.size())};
    predict_images(m, frames, iota_n(frames.size()), s, threads);
  }
  persist::save_model_file(a.out, m.envelope);
  json::Json out = json::Json::object();
  out["model"] = a.out;
  out["pipeline"] = std::string(pipeline::to_string(kind));
  out["feature_dimension"] = m.envelope.created_with["feature_dimension"];
  out["training"] = report_json(eval::make_report(report_name(m) + " (training)", s.labels, s.predictions, s.scores),
                                kind);
  std::cout << json::dump(out);
  return kOk;
}

struct PredictArgs {
  std::string model, input, sequence;
  std::optional<std::size_t> window;
};

int cmd_predict(PipelineKind kind, const PredictArgs& a, unsigned threads) {
  if (a.input.empty() == a.sequence.empty()) throw UsageError("give exactly one of --input or --sequence");
  if (!a.sequence.empty() && kind != PipelineKind::Clot) throw UsageError("--sequence applies to clot only");
  auto m = load_model(a.model, kind);
  if (a.window) {
    if (*a.window == 0 || *a.window % 2 == 0) throw UsageError("--window must be a positive odd integer");
    m.cfg.clot.window = *a.window;
  }
  json::Json out = json::Json::object();
  const auto start = std::chrono::steady_clock::now();
  if (kind == PipelineKind::Cardio) {
    const auto signal = audio::read_wav(a.input);
    if (m.sample_rate && *m.sample_rate != signal.sample_rate)
      std::cerr << "warning: input sample rate " << signal.sample_rate << " Hz differs from training rate "
                << *m.sample_rate << " Hz\n";
    const auto p = pipeline::cardio_predict(std::get<ml::ForestModel>(m.envelope.payload), signal, m.cfg.cardio);
    out["prob"] = p.score;
    out["label"] = p.label;
  } else if (!a.sequence.empty()) {
    std::vector<GrayImage> frames;
    for (const auto& f : data::sorted_files(a.sequence)) frames.push_back(img::read_image(f));
    if (frames.empty()) throw DataError("sequence directory " + a.sequence + " holds no frames");
    const auto seq =
        pipeline::clot_predict_sequence(std::get<ml::SvmModel>(m.envelope.payload), frames, m.cfg.clot, threads);
    out["score"] = seq.score;
    out["label"] = seq.label;
    out["frames"] = frames.size();
    out["window"] = m.cfg.clot.window;
  } else {
    const auto image = img::read_image(a.input);
    const auto& svm = std::get<ml::SvmModel>(m.envelope.payload);
    const auto p = kind == PipelineKind::Clot ? pipeline::clot_predict_frame(svm, image, m.cfg.clot)
                                              : pipeline::skin_standin_classify(svm, image, m.cfg.skin);
    out["score"] = p.score;
    out["label"] = p.label;
    if (kind == PipelineKind::Skin) out["classifier"] = "STAND-IN";
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  out["latency_ms"] = std::round(ms * 1000.0) / 1000.0;
  std::cout << json::dump_line(out) << "\n";
  return kOk;
}

struct EvalArgs {
  std::string model, data, roc_csv;
  std::size_t kfold = 0;
  std::uint64_t seed = 0;
};

int cmd_eval(const EvalArgs& a, unsigned threads) {
  // The model names its own pipeline; peek before validating against it.
  const auto env = persist::load_model_file(a.model);
  const auto& cw = env.created_with;
  if (!cw.contains("pipeline") || !cw["pipeline"].is_string())
    throw DataError("model " + a.model + " does not record its pipeline ($.created_with.pipeline)");
  const auto m = load_model(a.model, pipeline::parse_pipeline_kind(cw["pipeline"].get<std::string>()));
  if (a.kfold == 1) throw UsageError("--kfold needs at least 2 folds");

  std::vector<ImageItem> items;
  std::vector<pipeline::LabeledRecording> recs;
  std::vector<Label> labels;
  if (m.kind == PipelineKind::Cardio) {
    recs = load_recordings(a.data, threads);
    for (const auto& r : recs) labels.push_back(r.label);
  } else {
    items = load_images(a.data, threads);
    for (const auto& it : items) labels.push_back(it.label);
  }
  const std::size_t n = labels.size();
  Scored s{std::vector<Label>(n), std::vector<Label>(n), std::vector<double>(n)};
  auto run = [&](const LoadedModel& model, const std::vector<std::size_t>& idx) {
    if (model.kind == PipelineKind::Cardio) predict_recordings(model, recs, idx, s, threads);
    else predict_images(model, items, idx, s, threads);
  };

  std::string name = report_name(m);
  if (a.kfold == 0) {
    run(m, iota_n(n));
  } else {
    // Cross-validation retrains the model's pipeline and config on each fold.
    Rng rng(a.seed);
    for (const auto& fold : eval::stratified_kfold(labels, a.kfold, rng)) {
      persist::ModelEnvelope fenv;
      if (m.kind == PipelineKind::Cardio) {
        std::vector<pipeline::LabeledRecording> train;
        for (auto i : fold.train) train.push_back(recs[i]);
        fenv = train_recordings(m.cfg, train, threads);
      } else {
        std::vector<ImageItem> train;
        for (auto i : fold.train) train.push_back(items[i]);
        fenv = train_images(m.kind, m.cfg, flatten(train), threads);
      }
      run(as_loaded(m.kind, m.cfg, std::move(fenv)), fold.test);
    }
    name += " (" + std::to_string(a.kfold) + "-fold)";
  }
  const auto report = eval::make_report(name, s.labels, s.predictions, s.scores);
  if (!a.roc_csv.empty()) io::write_atomic(a.roc_csv, eval::roc_csv(report.roc_points));
  std::cout << json::dump(report_json(report, m.kind));
  std::cerr << eval::report_table(report);
  return kOk;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_path) {
  json::Json out = json::Json::object();
  out["format_version"] = 1;
  json::Json modules = json::Json::array();
  for (const auto& path : inputs) {
    json::Json j;
    try {
      j = json::Json::parse(io::read_text(path));
    } catch (const json::Json::parse_error& e) {
      throw DataError(path + ": " + e.what());
    }
    if (!j.is_object()) throw DataError(path + ": expected a JSON object");
    json::Json entry = json::Json::object();
    entry["source"] = fs::path(path).filename().string();
    entry["result"] = std::move(j);
    modules.push_back(std::move(entry));
  }
  out["modules"] = std::move(modules);
  io::write_atomic(out_path, json::dump(out));
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal pre-diagnostic toolkit: thermal clot, cardiopulmonary audio, skin stand-in"};
  app.require_subcommand(1);
  std::optional<unsigned> threads_flag;
  app.add_option("--threads", threads_flag, "Worker threads (default: PREDIAGNOSE_THREADS or all cores)")
      ->check(CLI::Range(1u, 1024u));

  auto* synth = app.add_subcommand("synth", "Generate synthetic datasets");
  synth->require_subcommand(1);
  SynthThermalArgs st;
  auto* synth_thermal = synth->add_subcommand("thermal", "Thermal images (PGM) plus manifest.csv");
  synth_thermal->add_option("--out", st.out, "Output directory")->required();
  synth_thermal->add_option("--n", st.n, "Number of samples or sequences")->required();
  synth_thermal->add_option("--positive-frac", st.positive_frac, "Fraction of clot samples")
      ->check(CLI::Range(0.0, 1.0));
  synth_thermal->add_option("--seed", st.seed, "Random seed")->required();
  synth_thermal->add_option("--frames", st.frames, "Frames per sequence; writes seq_NNNN directories");
  synth_thermal->add_option("--config", st.config, "INI config ([thermal] section)");

  SynthCardioArgs sc;
  auto* synth_cardio = synth->add_subcommand("cardio", "Heart or lung recordings (WAV) plus manifest.csv");
  synth_cardio->add_option("--task", sc.task, "lung or heart")->check(CLI::IsMember({"lung", "heart"}));
  synth_cardio->add_option("--out", sc.out, "Output directory")->required();
  synth_cardio->add_option("--n", sc.n, "Number of recordings")->required();
  synth_cardio->add_option("--positive-frac", sc.positive_frac, "Fraction of abnormal recordings")
      ->check(CLI::Range(0.0, 1.0));
  synth_cardio->add_option("--seed", sc.seed, "Random seed")->required();
  synth_cardio->add_option("--rate", sc.rate, "Sample rate, 4000 or 8000");
  synth_cardio->add_option("--duration", sc.duration, "Seconds per recording (>= 2)");

  const std::vector<std::pair<std::string, PipelineKind>> kinds = {
      {"clot", PipelineKind::Clot}, {"cardio", PipelineKind::Cardio}, {"skin", PipelineKind::Skin}};

  auto* train = app.add_subcommand("train", "Train a pipeline model");
  train->require_subcommand(1);
  TrainArgs ta;
  std::vector<std::pair<CLI::App*, PipelineKind>> train_cmds;
  for (const auto& [name, kind] : kinds) {
    auto* sub = train->add_subcommand(name, "Train the " + name + " pipeline");
    sub->add_option("--data", ta.data, "Dataset directory with manifest.csv")->required();
    sub->add_option("--config", ta.config, "INI config file");
    sub->add_option("--out", ta.out, "Output model (.pdmodel.json)")->required();
    train_cmds.emplace_back(sub, kind);
  }

  auto* predict = app.add_subcommand("predict", "Classify one sample");
  predict->require_subcommand(1);
  PredictArgs pa;
  std::vector<std::pair<CLI::App*, PipelineKind>> predict_cmds;
  for (const auto& [name, kind] : kinds) {
    auto* sub = predict->add_subcommand(name, "Predict with a " + name + " model");
    sub->add_option("--model", pa.model, "Model file")->required();
    sub->add_option("--input", pa.input, "Input image or recording");
    if (kind == PipelineKind::Clot) {
      sub->add_option("--sequence", pa.sequence, "Directory of frames, classified by sliding-window vote");
      sub->add_option("--window", pa.window, "Voting window (odd)");
    }
    predict_cmds.emplace_back(sub, kind);
  }

  EvalArgs ea;
  auto* evalc = app.add_subcommand("eval", "Evaluate a model on a labeled dataset");
  evalc->add_option("--model", ea.model, "Model file")->required();
  evalc->add_option("--data", ea.data, "Dataset directory with manifest.csv")->required();
  evalc->add_option("--kfold", ea.kfold, "Stratified k-fold cross-validation with the model's config");
  evalc->add_option("--seed", ea.seed, "Fold assignment seed");
  evalc->add_option("--roc-csv", ea.roc_csv, "Write ROC points (fpr,tpr)");

  std::vector<std::string> report_inputs;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Concatenate per-module results into one report");
  report->add_option("--inputs", report_inputs, "Result JSON files")->required();
  report->add_option("--out", report_out, "Output report file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    const unsigned threads = resolve_threads(threads_flag);
    if (synth_thermal->parsed()) return cmd_synth_thermal(st, threads);
    if (synth_cardio->parsed()) return cmd_synth_cardio(sc, threads);
    for (const auto& [sub, kind] : train_cmds)
      if (sub->parsed()) return cmd_train(kind, ta, threads);
    for (const auto& [sub, kind] : predict_cmds)
      if (sub->parsed()) return cmd_predict(kind, pa, threads);
    if (evalc->parsed()) return cmd_eval(ea, threads);
    if (report->parsed()) return cmd_report(report_inputs, report_out);
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const TrainingError& e) {
    std::cerr << "training failed: " << e.what() << "\n";
    return kTraining;
  } catch (const std::exception& e) {
    // Bad files, schema violations and inputs that do not fit the model.
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
}
