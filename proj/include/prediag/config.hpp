#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "prediag/audioproc.hpp"
#include "prediag/forest.hpp"
#include "prediag/imageproc.hpp"
#include "prediag/synththermal.hpp"

namespace prediag::pipeline {

enum class HogView { Edge, Intensity, Both };
enum class CardioTask { Lung, Heart };
enum class Aggregation { Recording, SegmentVote };

struct SvmSettings {
  double c = 10.0;
  double gamma = 0.0; ///< 0 selects 1 / (d * Var(features))
  double tol = 1e-3;
  int max_passes = 10;
};

struct ClotPipelineConfig {
  thermal::ThermalConfig thermal;
  img::CannyParams canny;
  img::HogConfig hog;
  SvmSettings svm;
  std::size_t image_size = 128;
  std::size_t window = 5;
  HogView view = HogView::Both;
  double intensity_blur = 3.0; ///< sigma of the blur feeding the intensity HOG view

  void validate() const;
};

struct CardioPipelineConfig {
  audio::MfccConfig mfcc;
  std::size_t denoise_levels = 4;
  ml::ForestParams forest;
  CardioTask task = CardioTask::Heart;
  Aggregation aggregation = Aggregation::Recording;
  double segment_seconds = 1.0;

  void validate() const;
};

struct SkinPipelineConfig {
  std::size_t image_size = 224;
  img::HogConfig hog{16, 2, 9, false};
  SvmSettings svm;
  /// Applied to each training image: the ends of the rotation, zoom and
  /// brightness ranges plus a horizontal flip.
  std::vector<img::AugmentSpec> augment{img::aug::FlipH{},          img::aug::Rotate{-20.0},
                                        img::aug::Rotate{20.0},     img::aug::Zoom{1.2},
                                        img::aug::Brightness{0.8},  img::aug::Brightness{1.2}};

  void validate() const;
};

struct PipelineConfig {
  ClotPipelineConfig clot;
  CardioPipelineConfig cardio;
  SkinPipelineConfig skin;
};

enum class PipelineKind { Clot, Cardio, Skin };

std::string_view to_string(PipelineKind kind);
PipelineKind parse_pipeline_kind(std::string_view text);
std::string_view to_string(CardioTask task);
CardioTask parse_task(std::string_view text);
std::string_view to_string(HogView view);
HogView parse_hog_view(std::string_view text);

using IniSections = std::map<std::string, std::map<std::string, std::string>>;

/// Parses "[section]" headers and "key = value" lines; '#' and ';' start
/// comments. Duplicate keys and text outside a section are errors.
IniSections parse_ini(std::string_view text);

/// Applies every key to `cfg`. Unknown sections or keys are errors.
void apply_ini(PipelineConfig& cfg, const IniSections& sections);

PipelineConfig load_config(std::string_view ini_text);

/// Canonical key/value snapshot of the sections that drive one pipeline.
IniSections snapshot(const PipelineConfig& cfg, PipelineKind kind);

/// Canonical INI text for every section.
std::string to_ini(const PipelineConfig& cfg);

} // namespace prediag::pipeline
