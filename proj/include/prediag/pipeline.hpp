#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prediag/config.hpp"
#include "prediag/core.hpp"
#include "prediag/forest.hpp"
#include "prediag/svm.hpp"

namespace prediag::pipeline {

struct LabeledImage {
  GrayImage image; ///< raw intensities in [0,255]
  Label label = 0;
};

struct LabeledRecording {
  AudioSignal signal;
  Label label = 0;
};

/// Resize, normalize, Canny, then HOG of the edge map and/or of the
/// blurred intensity image.
FeatureVector clot_features(const GrayImage& image, const ClotPipelineConfig& cfg);

ml::SvmModel clot_train(std::span<const LabeledImage> train, const ClotPipelineConfig& cfg, unsigned threads = 1);
ml::SvmModel train_svm_on(const LabeledDataset& data, const SvmSettings& settings, unsigned threads = 1);

ml::Prediction clot_predict_frame(const ml::SvmModel& model, const GrayImage& image, const ClotPipelineConfig& cfg);

struct SequencePrediction {
  std::vector<ml::Prediction> frames;
  Label label = 0;
  double score = 0.0; ///< fraction of window decisions (or frames) voting 1
};

SequencePrediction clot_predict_sequence(const ml::SvmModel& model, std::span<const GrayImage> frames,
                                         const ClotPipelineConfig& cfg, unsigned threads = 1);

/// Denoise, MFCC, mean+std aggregation over the whole recording.
FeatureVector cardio_features(const AudioSignal& signal, const CardioPipelineConfig& cfg);

/// Denoised recording split into segment_seconds pieces (trailing partial
/// piece dropped unless it is the only one), each aggregated separately.
std::vector<FeatureVector> cardio_segment_features(const AudioSignal& signal, const CardioPipelineConfig& cfg);

ml::ForestModel cardio_train(std::span<const LabeledRecording> train, const CardioPipelineConfig& cfg,
                             unsigned threads = 1);

ml::Prediction cardio_predict(const ml::ForestModel& model, const AudioSignal& signal, const CardioPipelineConfig& cfg);

/// Resize, normalize, then the original plus one copy per augmentation.
std::vector<GrayImage> skin_preprocess(const GrayImage& image, std::span<const img::AugmentSpec> augment);

/// Stand-in skin features: HOG over the preprocessed image.
FeatureVector skin_features(const GrayImage& preprocessed, const SkinPipelineConfig& cfg);

/// Stand-in benign/malignant SVM. Not a substitute for a trained CNN.
ml::SvmModel skin_train(std::span<const LabeledImage> train, const SkinPipelineConfig& cfg, unsigned threads = 1);

ml::Prediction skin_standin_classify(const ml::SvmModel& model, const GrayImage& image, const SkinPipelineConfig& cfg);

} // namespace prediag::pipeline
