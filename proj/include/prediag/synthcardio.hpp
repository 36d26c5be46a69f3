#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "prediag/config.hpp"
#include "prediag/core.hpp"

namespace prediag::pipeline {

/// Unnormalized parts of one synthetic recording. The abnormal part is
/// exactly zero outside its support.
struct CardioComponents {
  std::vector<double> base;
  std::vector<double> abnormal;
  int sample_rate = 0;
};

/// Heart: S1/S2 tone bursts (< 150 Hz) at 72 bpm with beat jitter over a
/// pink-like floor; the abnormal part is a 150-400 Hz murmur between S1 and
/// S2. Lung: band-limited breath noise under a 0.25 Hz envelope; the
/// abnormal part is a 400 Hz expiratory wheeze plus sparse crackles.
/// Both labels consume the rng identically.
CardioComponents synth_cardio_components(CardioTask task, double duration_s, int sample_rate, Rng& rng);

/// base (+ abnormal when label is 1), scaled to peak |amplitude| 0.9.
AudioSignal synth_cardio_sample(CardioTask task, Label label, double duration_s, int sample_rate, Rng& rng);

struct CardioSample {
  AudioSignal signal;
  Label label = 0;
  std::uint64_t seed = 0;
};

/// Exactly round(n * positive_fraction) positives in rng-shuffled order,
/// each rendered from its own seed.
std::vector<CardioSample> generate_cardio_dataset(CardioTask task, std::size_t n, double positive_fraction,
                                                  double duration_s, int sample_rate, Rng& rng,
                                                  unsigned threads = 1);

} // namespace prediag::pipeline
