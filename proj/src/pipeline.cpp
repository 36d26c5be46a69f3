#include "prediag/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prediag/audioproc.hpp"
#include "prediag/error.hpp"
#include "prediag/imageproc.hpp"
#include "prediag/parallel.hpp"
#include "prediag/vote.hpp"

namespace prediag::pipeline {

namespace {

void require_both_classes(std::size_t positives, std::size_t total, const char* what) {
  if (total < 2) throw TrainingError(std::string(what) + " needs at least two samples");
  if (positives == 0 || positives == total) throw TrainingError(std::string(what) + " data contains a single class");
}

void append(FeatureVector& out, const FeatureVector& part) { out.insert(out.end(), part.begin(), part.end()); }

void check_dimension(std::size_t expected, std::size_t actual) {
  if (expected != actual)
    throw InvalidArgument("feature dimension " + std::to_string(actual) + " does not match the model's " +
                          std::to_string(expected));
}

} // namespace

FeatureVector clot_features(const GrayImage& image, const ClotPipelineConfig& cfg) {
  const GrayImage prepared = img::normalize_image(img::resize_bilinear(image, cfg.image_size, cfg.image_size));
  FeatureVector out;
  if (cfg.view != HogView::Intensity) append(out, img::hog(img::canny(prepared, cfg.canny).to_image(), cfg.hog));
  if (cfg.view != HogView::Edge) append(out, img::hog(img::gaussian_blur(prepared, cfg.intensity_blur), cfg.hog));
  return out;
}

ml::SvmModel train_svm_on(const LabeledDataset& data, const SvmSettings& settings, unsigned threads) {
  ml::SmoParams params;
  params.c = settings.c;
  params.gamma = settings.gamma > 0.0 ? settings.gamma : ml::scale_gamma(data);
  params.tol = settings.tol;
  params.max_passes = settings.max_passes;
  params.threads = threads;
  return ml::train_svm_smo_detailed(data, params).model;
}

ml::SvmModel clot_train(std::span<const LabeledImage> train, const ClotPipelineConfig& cfg, unsigned threads) {
  cfg.validate();
  std::size_t positives = 0;
  for (const auto& s : train) {
    require_binary_label(s.label);
    positives += static_cast<std::size_t>(s.label);
  }
  require_both_classes(positives, train.size(), "clot training");
  std::vector<FeatureVector> features(train.size());
  parallel_for(train.size(), threads, [&](std::size_t i) { features[i] = clot_features(train[i].image, cfg); });
  std::vector<Label> labels;
  for (const auto& s : train) labels.push_back(s.label);
  return train_svm_on(LabeledDataset(std::move(features), std::move(labels)), cfg.svm, threads);
}

ml::Prediction clot_predict_frame(const ml::SvmModel& model, const GrayImage& image, const ClotPipelineConfig& cfg) {
  const auto features = clot_features(image, cfg);
  check_dimension(model.dimension(), features.size());
  return ml::svm_predict(model, features);
}

SequencePrediction clot_predict_sequence(const ml::SvmModel& model, std::span<const GrayImage> frames,
                                         const ClotPipelineConfig& cfg, unsigned threads) {
  if (frames.empty()) throw InvalidArgument("cannot classify an empty frame sequence");
  SequencePrediction out;
  out.frames.resize(frames.size());
  parallel_for(frames.size(), threads,
               [&](std::size_t i) { out.frames[i] = clot_predict_frame(model, frames[i], cfg); });
  std::vector<Label> labels;
  for (const auto& p : out.frames) labels.push_back(p.label);
  const auto decisions = labels.size() < cfg.window ? labels : ml::sliding_window_vote(labels, cfg.window);
  out.label = ml::majority_vote(decisions);
  out.score = static_cast<double>(std::count(decisions.begin(), decisions.end(), 1)) /
              static_cast<double>(decisions.size());
  return out;
}

FeatureVector cardio_features(const AudioSignal& signal, const CardioPipelineConfig& cfg) {
  const auto denoised = audio::wavelet_denoise(signal, cfg.denoise_levels);
  return audio::aggregate_features(audio::mfcc(denoised, cfg.mfcc));
}

std::vector<FeatureVector> cardio_segment_features(const AudioSignal& signal, const CardioPipelineConfig& cfg) {
  const auto denoised = audio::wavelet_denoise(signal, cfg.denoise_levels);
  const auto seg_len = static_cast<std::size_t>(std::llround(cfg.segment_seconds * signal.sample_rate));
  const std::size_t count = std::max<std::size_t>(1, denoised.samples.size() / std::max<std::size_t>(1, seg_len));
  std::vector<FeatureVector> out;
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t begin = s * seg_len;
    const std::size_t end = count == 1 ? denoised.samples.size() : begin + seg_len;
    AudioSignal piece{{denoised.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                       denoised.samples.begin() + static_cast<std::ptrdiff_t>(end)},
                      signal.sample_rate};
    out.push_back(audio::aggregate_features(audio::mfcc(piece, cfg.mfcc)));
  }
  return out;
}

ml::ForestModel cardio_train(std::span<const LabeledRecording> train, const CardioPipelineConfig& cfg,
                             unsigned threads) {
  cfg.validate();
  std::size_t positives = 0;
  std::string too_short;
  for (std::size_t i = 0; i < train.size(); ++i) {
    require_binary_label(train[i].label);
    positives += static_cast<std::size_t>(train[i].label);
    const auto& sig = train[i].signal;
    if (sig.sample_rate < 1 || sig.samples.size() < cfg.mfcc.frame_samples(sig.sample_rate))
      too_short += (too_short.empty() ? "" : ", ") + std::to_string(i);
  }
  if (!too_short.empty()) throw InvalidArgument("recordings shorter than one MFCC frame: " + too_short);
  require_both_classes(positives, train.size(), "cardio training");

  std::vector<std::vector<FeatureVector>> per_recording(train.size());
  parallel_for(train.size(), threads, [&](std::size_t i) {
    if (cfg.aggregation == Aggregation::Recording) {
      per_recording[i] = {cardio_features(train[i].signal, cfg)};
    } else {
      per_recording[i] = cardio_segment_features(train[i].signal, cfg);
    }
  });
  LabeledDataset data;
  for (std::size_t i = 0; i < train.size(); ++i)
    for (auto& fv : per_recording[i]) data.add(std::move(fv), train[i].label);
  return ml::train_random_forest(data, cfg.forest, threads);
}

ml::Prediction cardio_predict(const ml::ForestModel& model, const AudioSignal& signal, const CardioPipelineConfig& cfg) {
  if (cfg.aggregation == Aggregation::Recording) {
    const auto features = cardio_features(signal, cfg);
    check_dimension(model.n_features, features.size());
    return ml::forest_predict(model, features);
  }
  std::vector<Label> votes;
  for (const auto& fv : cardio_segment_features(signal, cfg)) {
    check_dimension(model.n_features, fv.size());
    votes.push_back(ml::forest_predict(model, fv).label);
  }
  const double frac = static_cast<double>(std::count(votes.begin(), votes.end(), 1)) / static_cast<double>(votes.size());
  return {frac, ml::majority_vote(votes)};
}

std::vector<GrayImage> skin_preprocess(const GrayImage& image, std::span<const img::AugmentSpec> augment) {
  constexpr std::size_t kSide = 224;
  const GrayImage base = img::normalize_image(img::resize_bilinear(image, kSide, kSide));
  std::vector<GrayImage> out{base};
  for (const auto& spec : augment) {
    GrayImage aug = img::augment(base, spec);
    if (aug.width() != kSide || aug.height() != kSide) aug = img::resize_bilinear(aug, kSide, kSide);
    for (double& p : aug.pixels()) p = std::clamp(p, 0.0, 1.0);
    out.push_back(std::move(aug));
  }
  return out;
}

FeatureVector skin_features(const GrayImage& preprocessed, const SkinPipelineConfig& cfg) {
  const GrayImage sized = preprocessed.width() == cfg.image_size && preprocessed.height() == cfg.image_size
                              ? preprocessed
                              : img::resize_bilinear(preprocessed, cfg.image_size, cfg.image_size);
  return img::hog(sized, cfg.hog);
}

ml::SvmModel skin_train(std::span<const LabeledImage> train, const SkinPipelineConfig& cfg, unsigned threads) {
  cfg.validate();
  std::size_t positives = 0;
  for (const auto& s : train) {
    require_binary_label(s.label);
    positives += static_cast<std::size_t>(s.label);
  }
  require_both_classes(positives, train.size(), "skin training");
  std::vector<std::vector<FeatureVector>> per_image(train.size());
  parallel_for(train.size(), threads, [&](std::size_t i) {
    for (const auto& view : skin_preprocess(train[i].image, cfg.augment)) per_image[i].push_back(skin_features(view, cfg));
  });
  LabeledDataset data;
  for (std::size_t i = 0; i < train.size(); ++i)
    for (auto& fv : per_image[i]) data.add(std::move(fv), train[i].label);
  return train_svm_on(data, cfg.svm, threads);
}

ml::Prediction skin_standin_classify(const ml::SvmModel& model, const GrayImage& image, const SkinPipelineConfig& cfg) {
  const auto features = skin_features(skin_preprocess(image, {}).front(), cfg);
  check_dimension(model.dimension(), features.size());
  return ml::svm_predict(model, features);
}

} // namespace prediag::pipeline
