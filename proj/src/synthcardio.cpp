#include "prediag/synthcardio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "prediag/error.hpp"
#include "prediag/parallel.hpp"

namespace prediag::pipeline {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPeak = 0.9;

/// Sum of one-pole low-passed white noises with octave-spaced corners.
std::vector<double> pinkish_noise(std::size_t n, int rate, Rng& rng) {
  constexpr double corners[] = {20.0, 80.0, 320.0};
  std::vector<double> out(n, 0.0);
  for (double corner : corners) {
    const double a = std::exp(-kTwoPi * corner / rate);
    const double gain = std::sqrt(1.0 - a * a);
    double state = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      state = a * state + gain * rng.gaussian();
      out[i] += state / 3.0;
    }
  }
  return out;
}

/// Band-limited noise as a random-phase multisine over [lo, hi] Hz.
std::vector<double> multisine(std::size_t n, int rate, double lo, double hi, std::size_t tones, Rng& rng) {
  std::vector<double> freq(tones), phase(tones);
  for (std::size_t k = 0; k < tones; ++k) {
    freq[k] = lo + (hi - lo) * rng.uniform();
    phase[k] = kTwoPi * rng.uniform();
  }
  std::vector<double> out(n, 0.0);
  const double norm = 1.0 / std::sqrt(static_cast<double>(tones));
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    double v = 0.0;
    for (std::size_t k = 0; k < tones; ++k) v += std::sin(kTwoPi * freq[k] * t + phase[k]);
    out[i] = v * norm;
  }
  return out;
}

/// sin^2 bump over [start, end), zero elsewhere.
double bump(double t, double start, double end) {
  if (t <= start || t >= end) return 0.0;
  const double s = std::sin(std::numbers::pi * (t - start) / (end - start));
  return s * s;
}

CardioComponents heart(std::size_t n, int rate, Rng& rng, Rng& abnormal_rng) {
  CardioComponents c{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), rate};
  const double nominal = 60.0 / 72.0;
  const double duration = static_cast<double>(n) / rate;

  struct Beat {
    double s1, s2, f1, f2, a1, a2;
  };
  std::vector<Beat> beats;
  for (double t = 0.05 + 0.15 * rng.uniform(); t < duration;) {
    const double period = nominal * (1.0 + 0.05 * (2.0 * rng.uniform() - 1.0));
    beats.push_back({t, t + 0.36 * period, 45.0 + 25.0 * rng.uniform(), 65.0 + 30.0 * rng.uniform(),
                     0.8 + 0.4 * rng.uniform(), 0.5 + 0.3 * rng.uniform()});
    t += period;
  }
  const auto floor_noise = pinkish_noise(n, rate, rng);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    double v = 0.04 * floor_noise[i];
    for (const auto& b : beats) {
      const double d1 = t - b.s1;
      const double d2 = t - b.s2;
      if (std::abs(d1) < 0.1) v += b.a1 * std::exp(-d1 * d1 / (2.0 * 0.018 * 0.018)) * std::sin(kTwoPi * b.f1 * d1);
      if (std::abs(d2) < 0.1) v += b.a2 * std::exp(-d2 * d2 / (2.0 * 0.014 * 0.014)) * std::sin(kTwoPi * b.f2 * d2);
    }
    c.base[i] = v;
  }

  const double murmur_gain = 0.25 + 0.15 * abnormal_rng.uniform();
  const auto murmur = multisine(n, rate, 150.0, 400.0, 24, abnormal_rng);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    double env = 0.0;
    for (const auto& b : beats) env += bump(t, b.s1 + 0.06, b.s2 - 0.04);
    c.abnormal[i] = murmur_gain * env * murmur[i];
  }
  return c;
}

CardioComponents lung(std::size_t n, int rate, Rng& rng, Rng& abnormal_rng) {
  CardioComponents c{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), rate};
  const double cycle = 4.0; // 0.25 Hz breathing
  const double inspiration = 0.4 * cycle;
  const double offset = cycle * rng.uniform();
  const double gain = 0.25 + 0.1 * rng.uniform();

  // Breath noise: difference of two one-pole low-passes (~100-800 Hz band).
  const double a_hi = std::exp(-kTwoPi * 800.0 / rate);
  const double a_lo = std::exp(-kTwoPi * 100.0 / rate);
  double s_hi = 0.0, s_lo = 0.0;
  auto phase_of = [&](double t) { return std::fmod(t + offset, cycle); };
  for (std::size_t i = 0; i < n; ++i) {
    const double w = rng.gaussian();
    s_hi = a_hi * s_hi + (1.0 - a_hi) * w;
    s_lo = a_lo * s_lo + (1.0 - a_lo) * w;
    const double t = static_cast<double>(i) / rate;
    const double ph = phase_of(t);
    const double env = ph < inspiration ? bump(ph, 0.0, inspiration) : 0.6 * bump(ph, inspiration, cycle);
    c.base[i] = gain * env * (s_hi - s_lo) * 4.0 + 0.01 * rng.gaussian();
  }

  const double wheeze_gain = 0.2 + 0.1 * abnormal_rng.uniform();
  const double wheeze_phase = kTwoPi * abnormal_rng.uniform();
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double ph = phase_of(t);
    const double env = ph >= inspiration ? bump(ph, inspiration, cycle) : 0.0;
    c.abnormal[i] = wheeze_gain * env * std::sin(kTwoPi * 400.0 * t + wheeze_phase);
  }
  // Crackles: short damped bursts at Poisson-like times, about 5 per second.
  const double duration = static_cast<double>(n) / rate;
  const auto length = static_cast<std::size_t>(0.015 * rate);
  for (double t = -std::log(1.0 - abnormal_rng.uniform()) / 5.0; t < duration;
       t += -std::log(1.0 - abnormal_rng.uniform()) / 5.0) {
    const double freq = 500.0 + 400.0 * abnormal_rng.uniform();
    const double amp = 0.3 + 0.3 * abnormal_rng.uniform();
    const auto start = static_cast<std::size_t>(t * rate);
    for (std::size_t k = 1; k < length && start + k < n; ++k) {
      const double dt = static_cast<double>(k) / rate;
      c.abnormal[start + k] += amp * std::exp(-dt / 0.003) * std::sin(kTwoPi * freq * dt);
    }
  }
  return c;
}

} // namespace

CardioComponents synth_cardio_components(CardioTask task, double duration_s, int sample_rate, Rng& rng) {
  if (!(duration_s >= 2.0) || !std::isfinite(duration_s)) throw InvalidArgument("synthetic recordings need at least 2 s");
  if (sample_rate != 4000 && sample_rate != 8000) throw InvalidArgument("synthetic sample rate must be 4000 or 8000 Hz");
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  Rng abnormal_rng(rng.next_u64());
  return task == CardioTask::Heart ? heart(n, sample_rate, rng, abnormal_rng) : lung(n, sample_rate, rng, abnormal_rng);
}

AudioSignal synth_cardio_sample(CardioTask task, Label label, double duration_s, int sample_rate, Rng& rng) {
  require_binary_label(label);
  auto parts = synth_cardio_components(task, duration_s, sample_rate, rng);
  AudioSignal out{std::move(parts.base), sample_rate};
  if (label == 1)
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += parts.abnormal[i];
  double peak = 0.0;
  for (double v : out.samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : out.samples) v *= kPeak / peak;
  return out;
}

std::vector<CardioSample> generate_cardio_dataset(CardioTask task, std::size_t n, double positive_fraction,
                                                  double duration_s, int sample_rate, Rng& rng, unsigned threads) {
  if (n == 0) throw InvalidArgument("dataset size must be positive");
  if (!(positive_fraction >= 0.0 && positive_fraction <= 1.0))
    throw InvalidArgument("positive fraction must lie in [0, 1]");
  const auto positives = static_cast<std::size_t>(std::llround(static_cast<double>(n) * positive_fraction));
  std::vector<Label> labels(n, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(positives), 1);
  for (std::size_t i = n; i-- > 1;) std::swap(labels[i], labels[rng.below(i + 1)]);

  std::vector<CardioSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].label = labels[i];
    out[i].seed = rng.next_u64();
  }
  parallel_for(n, threads, [&](std::size_t i) {
    Rng local(out[i].seed);
    out[i].signal = synth_cardio_sample(task, out[i].label, duration_s, sample_rate, local);
  });
  return out;
}

} // namespace prediag::pipeline
