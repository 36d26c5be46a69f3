// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Criteria 7-11 drive the prediagnose executable end to end.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli_runner.hpp"
#include "golden_models.hpp"
#include "oracles.hpp"
#include "prediag/audioproc.hpp"
#include "prediag/core.hpp"
#include "prediag/dataset.hpp"
#include "prediag/eval.hpp"
#include "prediag/fileio.hpp"
#include "prediag/forest.hpp"
#include "prediag/image_io.hpp"
#include "prediag/json_util.hpp"
#include "prediag/persist.hpp"
#include "prediag/svm.hpp"

namespace fs = std::filesystem;
using namespace prediag;
using json::Json;

namespace {

const fs::path kCli = PREDIAG_CLI;
const fs::path kGolden = PREDIAG_GOLDEN_DIR;
const fs::path kWork = PREDIAG_WORK_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- running the CLI -------------------------------------------------------

using cli_runner::quote;

cli_runner::Run cli(const fs::path& cwd, const std::string& args, unsigned threads = 1) {
  return cli_runner::run(kCli, cwd, "--threads " + std::to_string(threads) + " " + args, kWork / "cli_stderr.log");
}

Json cli_json(const fs::path& cwd, const std::string& args, unsigned threads = 1) {
  const auto r = cli(cwd, args, threads);
  if (r.code != 0) throw std::runtime_error("prediagnose " + args + " exited with " + std::to_string(r.code));
  return r.out.empty() ? Json::object() : Json::parse(r.out);
}

void fresh(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
}

// Frames of every sequence listed as standalone samples.
void write_frame_manifest(const fs::path& seq_dir, const fs::path& out_dir) {
  fresh(out_dir);
  std::vector<data::ManifestEntry> frames;
  for (const auto& e : data::read_manifest(seq_dir))
    for (const auto& f : data::sorted_files(seq_dir / e.filename))
      frames.push_back({fs::relative(f, out_dir).string(), e.label, std::nullopt});
  data::write_manifest(out_dir, frames);
}

// Subset of an existing dataset, referring back to its files.
void write_split(const fs::path& src, const fs::path& out_dir, std::size_t begin, std::size_t end) {
  fresh(out_dir);
  const auto all = data::read_manifest(src);
  std::vector<data::ManifestEntry> part;
  for (std::size_t i = begin; i < end && i < all.size(); ++i)
    part.push_back({fs::relative(src / all[i].filename, out_dir).string(), all[i].label, all[i].seed});
  data::write_manifest(out_dir, part);
}

// Synthetic dermoscopy-like images: dark lesion, ragged border when malignant.
void write_skin_set(const fs::path& dir, std::size_t n) {
  fresh(dir);
  Rng rng(21);
  std::vector<data::ManifestEntry> entries;
  for (std::size_t i = 0; i < n; ++i) {
    const bool ragged = i % 2 == 1;
    GrayImage img(120, 120, 190.0 + 20.0 * rng.uniform());
    const double r0 = 22.0 + 8.0 * rng.uniform();
    const double phase = 6.283 * rng.uniform();
    for (std::size_t y = 0; y < 120; ++y)
      for (std::size_t x = 0; x < 120; ++x) {
        const double dx = static_cast<double>(x) - 60.0, dy = static_cast<double>(y) - 60.0;
        const double r = ragged ? r0 * (1.0 + 0.3 * std::sin(6.0 * std::atan2(dy, dx) + phase)) : r0;
        if (std::hypot(dx, dy) < r) img.at(x, y) = 50.0 + 40.0 * rng.uniform();
      }
    char name[32];
    std::snprintf(name, sizeof name, "lesion_%02zu.pgm", i);
    img::write_pgm(dir / name, img);
    entries.push_back({name, static_cast<Label>(ragged ? 1 : 0), std::nullopt});
  }
  data::write_manifest(dir, entries);
}

// ---- in-process criteria ---------------------------------------------------

Outcome fft_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1);
  double worst_bin = 0.0, worst_parseval = 0.0;
  for (std::size_t n : {8u, 64u, 1024u}) {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<std::complex<double>> x(n);
      for (auto& v : x) v = {2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
      const auto fast = audio::fft(x);
      const auto slow = oracle::naive_dft(x);
      double time_energy = 0.0, freq_energy = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        worst_bin = std::max(worst_bin, std::abs(fast[k] - slow[k]));
        time_energy += std::norm(x[k]);
        freq_energy += std::norm(fast[k]);
      }
      worst_parseval = std::max(worst_parseval, std::abs(freq_energy / static_cast<double>(n) - time_energy) / time_energy);
    }
  }
  const double secs = seconds_since(t0);
  return {worst_bin < 1e-9 && worst_parseval < 1e-9 && secs < 5.0,
          "300 signals, max bin error " + fmt("%.2e", worst_bin) + ", Parseval rel " + fmt("%.2e", worst_parseval) +
              ", " + fmt("%.2f", secs) + " s"};
}

Outcome dwt_round_trip() {
  Rng rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> x(64);
    for (double& v : x) v = 2.0 * rng.uniform() - 1.0;
    const std::size_t levels = 1 + static_cast<std::size_t>(trial % 4);
    const auto back = audio::dwt_inverse(audio::dwt_forward(x, levels));
    if (back.size() != x.size()) return {false, "length changed"};
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(back[i] - x[i]));
  }
  return {worst < 1e-10, "1000 signals, levels 1-4, max error " + fmt("%.2e", worst)};
}

std::vector<std::vector<double>> gram(const LabeledDataset& d, double gamma) {
  std::vector<std::vector<double>> k(d.size(), std::vector<double>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j) {
      double dist = 0.0;
      for (std::size_t f = 0; f < d.dimension(); ++f) dist += std::pow(d.features(i)[f] - d.features(j)[f], 2);
      k[i][j] = std::exp(-gamma * dist);
    }
  return k;
}

std::vector<double> signs(const LabeledDataset& d) {
  std::vector<double> y;
  for (auto l : d.labels()) y.push_back(l == 1 ? 1.0 : -1.0);
  return y;
}

Outcome smo_correctness() {
  std::ostringstream detail;
  bool ok = true;

  LabeledDataset two;
  two.add({-1.0}, 0);
  two.add({1.0}, 1);
  ml::SmoParams p2;
  p2.c = 10.0;
  p2.gamma = 0.5;
  const auto r2 = ml::train_svm_smo_detailed(two, p2);
  const double expected = 1.0 / (1.0 - std::exp(-2.0));
  const double alpha_err = std::max(std::abs(r2.alphas[0] - expected), std::abs(r2.alphas[1] - expected));
  ok &= alpha_err < 1e-3;
  detail << "2-point alpha error " << fmt("%.1e", alpha_err);

  double worst_kkt = 0.0;
  std::size_t misfit = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    LabeledDataset d;
    while (d.size() < 20) {
      const double x = 4.0 * rng.uniform() - 2.0, y = 4.0 * rng.uniform() - 2.0;
      if (std::abs(x + y) < 0.5) continue;
      d.add({x, y}, x + y > 0 ? 1 : 0);
    }
    if (d.positives() == 0 || d.positives() == d.size()) continue;
    ml::SmoParams p;
    p.c = 10.0;
    p.gamma = 0.5;
    const auto r = ml::train_svm_smo_detailed(d, p);
    const auto y = signs(d);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double a = r.alphas[i];
      const double m = y[i] * ml::svm_decision(r.model, d.features(i));
      double violation = 0.0;
      if (a <= 1e-8) violation = std::max(0.0, 1.0 - m);
      else if (a >= p.c) violation = std::max(0.0, m - 1.0);
      else violation = std::abs(m - 1.0);
      worst_kkt = std::max(worst_kkt, violation);
      misfit += ml::svm_predict(r.model, d.features(i)).label != d.label(i);
    }
    ok &= worst_kkt <= p.tol;
  }
  ok &= misfit == 0;
  detail << "; 20 separable sets, max KKT violation " << fmt("%.1e", worst_kkt) << ", training errors " << misfit;

  Rng rng(77);
  double worst_gap = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.below(3);
    LabeledDataset d;
    for (std::size_t i = 0; i < n; ++i)
      d.add({2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0}, static_cast<Label>(i % 2));
    ml::SmoParams p;
    p.c = trial % 2 == 0 ? 1.0 : 5.0;
    p.gamma = 1.0;
    const auto r = ml::train_svm_smo_detailed(d, p);
    const auto k = gram(d, p.gamma);
    worst_gap = std::max(worst_gap, std::abs(oracle::dual_objective(k, signs(d), r.alphas) -
                                             oracle::dual_grid_optimum(k, signs(d), p.c)));
  }
  ok &= worst_gap < 1e-3;
  detail << "; dual gap vs grid (30 problems, <= 4 points) " << fmt("%.1e", worst_gap);
  return {ok, detail.str()};
}

Outcome forest_split_oracle() {
  Rng rng(2024);
  const std::vector<std::size_t> features{0, 1, 2};
  std::size_t agree = 0;
  for (int trial = 0; trial < 200; ++trial) {
    LabeledDataset d;
    const std::size_t levels = trial % 2 == 0 ? 4 : 12;
    for (int i = 0; i < 20; ++i) {
      FeatureVector x(3);
      for (double& v : x) v = static_cast<double>(rng.below(levels)) * 0.5;
      d.add(std::move(x), static_cast<Label>(rng.below(2)));
    }
    std::vector<std::size_t> rows(20);
    for (std::size_t i = 0; i < 20; ++i) rows[i] = i;
    const auto got = ml::best_split(d, rows, features, 1);
    const auto ref = oracle::brute_force_split(d.all_features(), d.labels(), features, 1);
    agree += got.valid == ref.valid && (!ref.valid || (got.feature == ref.feature && got.threshold == ref.threshold));
  }
  return {agree == 200, std::to_string(agree) + "/200 datasets choose the exhaustive optimum"};
}

Outcome auc_oracle() {
  Rng rng(31);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(60);
    std::vector<Label> labels(n);
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = static_cast<Label>(rng.below(2));
      scores[i] = static_cast<double>(rng.below(8)) / 8.0;
    }
    labels[0] = 0;
    labels[1] = 1;
    worst = std::max(worst, std::abs(eval::roc_auc(labels, scores).auc - oracle::concordance_auc(labels, scores)));
  }
  const double hand = eval::roc_auc(std::vector<Label>{1, 1, 0, 0}, std::vector<double>{0.8, 0.4, 0.6, 0.2}).auc;
  return {worst < 1e-9 && hand == 0.75,
          "max |trapezoid - concordance| " + fmt("%.1e", worst) + " on 100 tied sets; hand case " + fmt("%.17g", hand)};
}

eval::ConfusionMatrix realize(std::size_t p, std::size_t r) {
  eval::ConfusionMatrix cm;
  cm.tp = p * r;
  cm.fp = r * 1000 - cm.tp;
  cm.fn = p * 1000 - cm.tp;
  cm.tn = 500000;
  return cm;
}

Outcome reported_f1() {
  const auto lung = eval::metrics(realize(861, 857));
  const auto heart = eval::metrics(realize(838, 840));
  const double l2 = std::round(lung.f1 * 100.0) / 100.0;
  const double h2 = std::round(heart.f1 * 100.0) / 100.0;
  return {l2 == 0.86 && h2 == 0.84,
          "lung P 0.861 R 0.857 -> F1 " + fmt("%.4f", lung.f1) + "; heart P 0.838 R 0.840 -> F1 " + fmt("%.4f", heart.f1)};
}

// ---- CLI criteria ----------------------------------------------------------

Outcome clot_benchmark() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = kWork / "clot";
  fresh(dir);
  cli_json(dir, "synth thermal --out train --n 500 --positive-frac 0.5 --seed 7");
  cli_json(dir, "synth thermal --out test --n 200 --positive-frac 0.5 --seed 8");
  cli_json(dir, "train clot --data train --out clot.pdmodel.json");
  const auto rep = cli_json(dir, "eval --model clot.pdmodel.json --data test --roc-csv roc.csv");
  const double acc = rep["accuracy"].get<double>();
  const double auc = rep["auc"].get<double>();
  const double secs = seconds_since(t0);
  return {acc >= 0.85 && auc >= 0.85 && secs < 600.0,
          "held-out accuracy " + fmt("%.3f", acc) + ", AUC " + fmt("%.3f", auc) + " (both >= 0.85), " +
              fmt("%.0f", secs) + " s"};
}

Outcome cardio_benchmark() {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream detail;
  bool ok = true;
  for (const std::string task : {"heart", "lung"}) {
    const fs::path dir = kWork / ("cardio_" + task);
    fresh(dir);
    io::write_atomic(dir / "cardio.ini", "[cardio]\ntask = " + task + "\n");
    // One seed-11 stream: the first 200 recordings train, the last 100 test.
    cli_json(dir, "synth cardio --task " + task + " --out all --n 300 --positive-frac 0.5 --seed 11 --rate 4000 --duration 5");
    write_split(dir / "all", dir / "train", 0, 200);
    write_split(dir / "all", dir / "test", 200, 300);
    cli_json(dir, "train cardio --data train --config cardio.ini --out cardio.pdmodel.json");
    const auto rep = cli_json(dir, "eval --model cardio.pdmodel.json --data test");
    const double acc = rep["accuracy"].get<double>();
    ok &= acc >= 0.90;
    detail << (task == "heart" ? "" : "; ") << task << " held-out accuracy " << fmt("%.3f", acc);
  }
  detail << " (>= 0.90), " << fmt("%.0f", seconds_since(t0)) << " s";
  return {ok, detail.str()};
}

Outcome temporal_voting() {
  const fs::path dir = kWork / "voting";
  fresh(dir);
  const auto model = (kWork / "clot" / "clot.pdmodel.json").string();
  cli_json(dir, "synth thermal --out seq --n 100 --positive-frac 0.5 --frames 10 --seed 13");
  write_frame_manifest(dir / "seq", dir / "frames");
  const auto seq = cli_json(dir, "eval --model " + quote(model) + " --data seq");
  const auto frames = cli_json(dir, "eval --model " + quote(model) + " --data frames");
  const double seq_acc = seq["accuracy"].get<double>();
  const double frame_acc = frames["accuracy"].get<double>();
  return {seq_acc >= frame_acc, "50+50 sequences of 10 frames: sequence accuracy " + fmt("%.3f", seq_acc) +
                                    " vs frame accuracy " + fmt("%.3f", frame_acc)};
}

Outcome latency() {
  const fs::path dir = kWork / "latency";
  fresh(dir);
  write_skin_set(dir / "skin", 12);
  cli_json(dir, "train skin --data skin --out skin.pdmodel.json");
  struct Case {
    std::string name, args;
  };
  const std::vector<Case> cases{
      {"clot", "predict clot --model ../clot/clot.pdmodel.json --input ../clot/test/sample_0000.pgm"},
      {"cardio", "predict cardio --model ../cardio_heart/cardio.pdmodel.json --input ../cardio_heart/all/rec_0200.wav"},
      {"skin", "predict skin --model skin.pdmodel.json --input skin/lesion_03.pgm"}};
  bool ok = true;
  std::ostringstream detail;
  for (const auto& c : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto out = cli_json(dir, c.args);
    const double wall = seconds_since(t0) * 1000.0;
    const double ms = out["latency_ms"].get<double>();
    ok &= ms < 2000.0;
    detail << (c.name == "clot" ? "" : "; ") << c.name << " " << fmt("%.1f", ms) << " ms (process "
           << fmt("%.0f", wall) << " ms" << (ms < 200.0 ? "" : ", over 200 ms target") << ")";
  }
  detail << "; limit 2000 ms";
  return {ok, detail.str()};
}

// Every command once, in a fresh directory, with relative paths so outputs are comparable.
std::map<std::string, std::string> determinism_run(const fs::path& dir, unsigned threads) {
  fresh(dir);
  std::map<std::string, std::string> out;
  auto step = [&](const std::string& key, const std::string& args) {
    const auto r = cli(dir, args, threads);
    if (r.code != 0) throw std::runtime_error("prediagnose " + args + " exited with " + std::to_string(r.code));
    std::string text = r.out;
    if (!text.empty() && text.front() == '{') {
      auto j = Json::parse(text);
      j.erase("latency_ms");
      text = j.dump();
    }
    out["stdout " + key] = text;
    return r.out;
  };
  step("synth thermal", "synth thermal --out th --n 30 --positive-frac 0.5 --seed 3");
  step("synth sequences", "synth thermal --out seq --n 4 --frames 5 --seed 4");
  step("synth cardio", "synth cardio --task heart --out hc --n 24 --seed 5 --duration 2");
  step("train clot", "train clot --data th --out clot.pdmodel.json");
  step("train cardio", "train cardio --data hc --out cardio.pdmodel.json");
  step("train skin", "train skin --data ../skin --out skin.pdmodel.json");
  step("predict clot", "predict clot --model clot.pdmodel.json --input th/sample_0001.pgm");
  step("predict sequence", "predict clot --model clot.pdmodel.json --sequence seq/seq_0000 --window 3");
  step("predict cardio", "predict cardio --model cardio.pdmodel.json --input hc/rec_0000.wav");
  step("predict skin", "predict skin --model skin.pdmodel.json --input ../skin/lesion_01.pgm");
  io::write_atomic(dir / "eval_clot.json",
                   step("eval clot", "eval --model clot.pdmodel.json --data th --kfold 3 --seed 2 --roc-csv roc.csv"));
  io::write_atomic(dir / "eval_cardio.json", step("eval cardio", "eval --model cardio.pdmodel.json --data hc"));
  step("eval sequences", "eval --model clot.pdmodel.json --data seq");
  step("report", "report --inputs eval_clot.json eval_cardio.json --out report.json");
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file()) out["file " + fs::relative(entry.path(), dir).string()] = io::read_text(entry.path());
  return out;
}

Outcome determinism() {
  const fs::path dir = kWork / "determinism";
  fresh(dir);
  write_skin_set(dir / "skin", 8);
  const auto a = determinism_run(dir / "t1", 1);
  const auto b = determinism_run(dir / "t4", 4);
  const auto c = determinism_run(dir / "t4_again", 4);
  std::vector<std::string> differing;
  for (const auto& [key, value] : a) {
    const auto ib = b.find(key), ic = c.find(key);
    if (ib == b.end() || ic == c.end() || ib->second != value || ic->second != value) differing.push_back(key);
  }
  if (b.size() != a.size() || c.size() != a.size()) differing.push_back("(different output sets)");
  std::string detail = "14 commands x {threads 1, 4, 4}: " + std::to_string(a.size()) + " outputs compared";
  if (!differing.empty()) detail += ", differing: " + differing.front() + (differing.size() > 1 ? " and more" : "");
  return {differing.empty(), detail};
}

Outcome persistence() {
  std::ostringstream detail;
  bool ok = true;
  const auto svm_golden = persist::save_model(golden::envelope(golden::small_svm()));
  const auto forest_golden = persist::save_model(golden::envelope(golden::small_forest()));
  ok &= svm_golden == io::read_text(kGolden / "svm.pdmodel.json");
  ok &= forest_golden == io::read_text(kGolden / "forest.pdmodel.json");
  ok &= persist::save_model(persist::load_model(svm_golden)) == svm_golden;
  ok &= persist::save_model(persist::load_model(forest_golden)) == forest_golden;
  detail << "golden files " << (ok ? "match" : "differ");

  // Models trained by the CLI above.
  const auto svm_text = io::read_text(kWork / "clot" / "clot.pdmodel.json");
  const auto forest_text = io::read_text(kWork / "cardio_heart" / "cardio.pdmodel.json");
  const auto svm_env = persist::load_model(svm_text);
  const auto forest_env = persist::load_model(forest_text);
  ok &= persist::save_model(svm_env) == svm_text && persist::save_model(forest_env) == forest_text;
  const auto& svm = std::get<ml::SvmModel>(svm_env.payload);
  const auto& forest = std::get<ml::ForestModel>(forest_env.payload);
  const auto svm_back = std::get<ml::SvmModel>(persist::load_model(persist::save_model(svm_env)).payload);
  const auto forest_back = std::get<ml::ForestModel>(persist::load_model(persist::save_model(forest_env)).payload);
  Rng rng(12);
  std::size_t same = 0;
  for (int i = 0; i < 100; ++i) {
    FeatureVector xs(svm.dimension()), xf(forest.n_features);
    for (double& v : xs) v = rng.uniform() * 0.4;
    for (double& v : xf) v = 20.0 * rng.gaussian();
    same += ml::svm_decision(svm_back, xs) == ml::svm_decision(svm, xs) &&
            ml::forest_predict(forest_back, xf).score == ml::forest_predict(forest, xf).score;
  }
  ok &= same == 100;
  detail << "; trained svm and forest re-save byte-identically; " << same << "/100 random inputs score bit-identically";
  return {ok, detail.str()};
}

} // namespace

int main() {
  fs::create_directories(kWork);
  fs::remove(kWork / "cli_stderr.log");
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"FFT matches naive DFT", fft_oracle},
      {"db4 round trip", dwt_round_trip},
      {"SMO correctness", smo_correctness},
      {"forest split oracle", forest_split_oracle},
      {"AUC oracle", auc_oracle},
      {"F1 from reported precision and recall", reported_f1},
      {"clot benchmark", clot_benchmark},
      {"cardio benchmark", cardio_benchmark},
      {"temporal voting", temporal_voting},
      {"predict latency", latency},
      {"determinism", determinism},
      {"persistence", persistence},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1 < 10 ? " " : "") << i + 1 << " " << criteria[i].first
              << ": " << o.detail << std::endl;
  }
  std::cout << criteria.size() - static_cast<std::size_t>(failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
