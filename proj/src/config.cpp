#include "prediag/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

#include "prediag/error.hpp"
#include "prediag/fileio.hpp"

namespace prediag::pipeline {

namespace {

constexpr unsigned kClot = 1u << 0;
constexpr unsigned kCardio = 1u << 1;
constexpr unsigned kSkin = 1u << 2;

struct Field {
  std::string section;
  std::string key;
  unsigned pipelines;
  std::function<std::string()> get;
  std::function<void(std::string_view)> set;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(std::string_view text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) throw DataError("expected a real number");
  return v;
}

template <class Int>
Int parse_int(std::string_view text) {
  Int v{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw DataError("expected a non-negative integer");
  return v;
}

bool parse_bool(std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw DataError("expected true or false");
}

Field real(std::string section, std::string key, unsigned pipelines, double& target) {
  return {std::move(section), std::move(key), pipelines, [&target] { return io::format_shortest(target); },
          [&target](std::string_view v) { target = parse_real(v); }};
}

template <class Int>
Field integer(std::string section, std::string key, unsigned pipelines, Int& target) {
  return {std::move(section), std::move(key), pipelines, [&target] { return std::to_string(target); },
          [&target](std::string_view v) { target = parse_int<Int>(v); }};
}

Field flag(std::string section, std::string key, unsigned pipelines, bool& target) {
  return {std::move(section), std::move(key), pipelines, [&target] { return std::string(target ? "true" : "false"); },
          [&target](std::string_view v) { target = parse_bool(v); }};
}

void add_svm(std::vector<Field>& f, const std::string& section, unsigned p, SvmSettings& svm) {
  f.push_back(real(section, "c", p, svm.c));
  f.push_back(real(section, "gamma", p, svm.gamma));
  f.push_back(real(section, "tol", p, svm.tol));
  f.push_back(integer(section, "max_passes", p, svm.max_passes));
}

std::vector<Field> bind(PipelineConfig& cfg) {
  std::vector<Field> f;
  auto& t = cfg.clot.thermal;
  f.push_back(integer("thermal", "width", kClot, t.width));
  f.push_back(integer("thermal", "height", kClot, t.height));
  f.push_back(real("thermal", "vessel_width", kClot, t.vessel_width));
  f.push_back(real("thermal", "base_temp", kClot, t.base_temp));
  f.push_back(real("thermal", "axial_gradient", kClot, t.axial_gradient));
  f.push_back(real("thermal", "clot_amplitude", kClot, t.clot_amplitude));
  f.push_back(real("thermal", "clot_sigma", kClot, t.clot_sigma));
  f.push_back(real("thermal", "noise_sigma", kClot, t.noise_sigma));
  f.push_back(real("thermal", "clot_margin", kClot, t.clot_margin));
  f.push_back(real("thermal", "background", kClot, t.background));
  f.push_back(real("canny", "sigma", kClot, cfg.clot.canny.sigma));
  f.push_back(real("canny", "low", kClot, cfg.clot.canny.low));
  f.push_back(real("canny", "high", kClot, cfg.clot.canny.high));
  f.push_back(integer("hog", "cell_size", kClot, cfg.clot.hog.cell_size));
  f.push_back(integer("hog", "block_size", kClot, cfg.clot.hog.block_size));
  f.push_back(integer("hog", "bins", kClot, cfg.clot.hog.bins));
  f.push_back(flag("hog", "signed", kClot, cfg.clot.hog.signed_orientation));
  add_svm(f, "svm", kClot, cfg.clot.svm);
  f.push_back(integer("clot", "image_size", kClot, cfg.clot.image_size));
  f.push_back(integer("clot", "window", kClot, cfg.clot.window));
  f.push_back(real("clot", "intensity_blur", kClot, cfg.clot.intensity_blur));
  f.push_back({"clot", "view", kClot, [&cfg] { return std::string(to_string(cfg.clot.view)); },
               [&cfg](std::string_view v) { cfg.clot.view = parse_hog_view(v); }});

  auto& m = cfg.cardio.mfcc;
  f.push_back(real("mfcc", "frame_len", kCardio, m.frame_len));
  f.push_back(real("mfcc", "hop", kCardio, m.hop));
  f.push_back(real("mfcc", "pre_emphasis", kCardio, m.pre_emphasis));
  f.push_back(integer("mfcc", "n_filters", kCardio, m.n_filters));
  f.push_back(integer("mfcc", "n_coeffs", kCardio, m.n_coeffs));
  f.push_back(real("mfcc", "log_floor", kCardio, m.log_floor));
  f.push_back(integer("denoise", "levels", kCardio, cfg.cardio.denoise_levels));
  auto& fp = cfg.cardio.forest;
  f.push_back(integer("forest", "n_trees", kCardio, fp.n_trees));
  f.push_back(integer("forest", "max_depth", kCardio, fp.max_depth));
  f.push_back(integer("forest", "min_samples_leaf", kCardio, fp.min_samples_leaf));
  f.push_back(integer("forest", "mtry", kCardio, fp.mtry));
  f.push_back(integer("forest", "seed", kCardio, fp.seed));
  f.push_back({"cardio", "task", kCardio, [&cfg] { return std::string(to_string(cfg.cardio.task)); },
               [&cfg](std::string_view v) { cfg.cardio.task = parse_task(v); }});
  f.push_back({"cardio", "aggregation", kCardio,
               [&cfg] { return std::string(cfg.cardio.aggregation == Aggregation::Recording ? "recording" : "segment-vote"); },
               [&cfg](std::string_view v) {
                 if (v == "recording") {
                   cfg.cardio.aggregation = Aggregation::Recording;
                 } else if (v == "segment-vote") {
                   cfg.cardio.aggregation = Aggregation::SegmentVote;
                 } else {
                   throw DataError("expected recording or segment-vote");
                 }
               }});
  f.push_back(real("cardio", "segment_seconds", kCardio, cfg.cardio.segment_seconds));

  f.push_back(integer("skin", "image_size", kSkin, cfg.skin.image_size));
  f.push_back(integer("skin", "cell_size", kSkin, cfg.skin.hog.cell_size));
  f.push_back(integer("skin", "block_size", kSkin, cfg.skin.hog.block_size));
  f.push_back(integer("skin", "bins", kSkin, cfg.skin.hog.bins));
  add_svm(f, "skin", kSkin, cfg.skin.svm);
  f.push_back({"skin", "augment", kSkin,
               [&cfg] {
                 std::string out;
                 for (const auto& spec : cfg.skin.augment) out += (out.empty() ? "" : ",") + img::to_string(spec);
                 return out;
               },
               [&cfg](std::string_view v) {
                 cfg.skin.augment.clear();
                 while (!v.empty()) {
                   const auto comma = v.find(',');
                   const auto item = trim(v.substr(0, comma));
                   if (!item.empty()) cfg.skin.augment.push_back(img::parse_augment(item));
                   v = comma == std::string_view::npos ? std::string_view{} : v.substr(comma + 1);
                 }
               }});
  return f;
}

unsigned mask(PipelineKind kind) {
  switch (kind) {
  case PipelineKind::Clot: return kClot;
  case PipelineKind::Cardio: return kCardio;
  case PipelineKind::Skin: return kSkin;
  }
  return 0;
}

} // namespace

void ClotPipelineConfig::validate() const {
  thermal.validate();
  hog.validate();
  if (!(canny.sigma > 0.0) || !(canny.low > 0.0) || !(canny.low < canny.high))
    throw InvalidArgument("Canny parameters require sigma > 0 and 0 < low < high");
  if (image_size < 3 || image_size % hog.cell_size != 0)
    throw InvalidArgument("clot image_size must be divisible by the HOG cell size");
  if (window == 0 || window % 2 == 0) throw InvalidArgument("clot voting window must be odd");
  if (!(intensity_blur > 0.0)) throw InvalidArgument("clot intensity_blur must be positive");
  if (!(svm.c > 0.0) || !(svm.gamma >= 0.0) || !(svm.tol > 0.0) || svm.max_passes < 1)
    throw InvalidArgument("invalid SVM settings");
}

void CardioPipelineConfig::validate() const {
  mfcc.validate();
  if (denoise_levels < 1 || denoise_levels > 16) throw InvalidArgument("denoise levels must lie in [1, 16]");
  if (forest.n_trees == 0 || forest.min_samples_leaf == 0) throw InvalidArgument("invalid forest settings");
  if (!(segment_seconds >= mfcc.frame_len)) throw InvalidArgument("segment_seconds must cover one MFCC frame");
}

void SkinPipelineConfig::validate() const {
  hog.validate();
  if (image_size < 3 || image_size % hog.cell_size != 0)
    throw InvalidArgument("skin image_size must be divisible by the HOG cell size");
  if (!(svm.c > 0.0) || !(svm.gamma >= 0.0) || !(svm.tol > 0.0) || svm.max_passes < 1)
    throw InvalidArgument("invalid SVM settings");
}

std::string_view to_string(PipelineKind kind) {
  switch (kind) {
  case PipelineKind::Clot: return "clot";
  case PipelineKind::Cardio: return "cardio";
  case PipelineKind::Skin: return "skin";
  }
  return "?";
}

PipelineKind parse_pipeline_kind(std::string_view text) {
  if (text == "clot") return PipelineKind::Clot;
  if (text == "cardio") return PipelineKind::Cardio;
  if (text == "skin") return PipelineKind::Skin;
  throw DataError("unknown pipeline '" + std::string(text) + "'");
}

std::string_view to_string(CardioTask task) { return task == CardioTask::Lung ? "lung" : "heart"; }

CardioTask parse_task(std::string_view text) {
  if (text == "lung") return CardioTask::Lung;
  if (text == "heart") return CardioTask::Heart;
  throw DataError("expected lung or heart, got '" + std::string(text) + "'");
}

std::string_view to_string(HogView view) {
  switch (view) {
  case HogView::Edge: return "edge";
  case HogView::Intensity: return "intensity";
  case HogView::Both: return "both";
  }
  return "?";
}

HogView parse_hog_view(std::string_view text) {
  if (text == "edge") return HogView::Edge;
  if (text == "intensity") return HogView::Intensity;
  if (text == "both") return HogView::Both;
  throw DataError("expected edge, intensity or both");
}

IniSections parse_ini(std::string_view text) {
  IniSections out;
  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw DataError(where + "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw DataError(where + "empty section name");
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw DataError(where + "expected key = value");
    if (section.empty()) throw DataError(where + "key outside of any section");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw DataError(where + "empty key");
    if (!out[section].emplace(key, std::string(trim(line.substr(eq + 1)))).second)
      throw DataError(where + "duplicate key '" + section + "." + key + "'");
  }
  return out;
}

void apply_ini(PipelineConfig& cfg, const IniSections& sections) {
  auto fields = bind(cfg);
  for (const auto& [section, keys] : sections) {
    for (const auto& [key, value] : keys) {
      auto it = std::find_if(fields.begin(), fields.end(),
                             [&](const Field& f) { return f.section == section && f.key == key; });
      if (it == fields.end()) throw DataError("unknown config key '" + section + "." + key + "'");
      try {
        it->set(value);
      } catch (const std::exception& e) {
        throw DataError("config key '" + section + "." + key + "': " + e.what());
      }
    }
  }
}

PipelineConfig load_config(std::string_view ini_text) {
  PipelineConfig cfg;
  apply_ini(cfg, parse_ini(ini_text));
  try {
    cfg.clot.validate();
    cfg.cardio.validate();
    cfg.skin.validate();
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

IniSections snapshot(const PipelineConfig& cfg, PipelineKind kind) {
  PipelineConfig copy = cfg;
  IniSections out;
  for (const auto& f : bind(copy))
    if (f.pipelines & mask(kind)) out[f.section][f.key] = f.get();
  return out;
}

std::string to_ini(const PipelineConfig& cfg) {
  PipelineConfig copy = cfg;
  std::ostringstream out;
  std::string section;
  for (const auto& f : bind(copy)) {
    if (f.section != section) {
      out << (section.empty() ? "" : "\n") << "[" << f.section << "]\n";
      section = f.section;
    }
    out << f.key << " = " << f.get() << "\n";
  }
  return out.str();
}

} // namespace prediag::pipeline
