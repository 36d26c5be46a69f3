#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "prediag/core.hpp"

namespace prediag::audio {

struct MfccConfig {
  double frame_len = 0.025; ///< seconds
  double hop = 0.010;       ///< seconds
  double pre_emphasis = 0.97;
  std::size_t n_filters = 26;
  std::size_t n_coeffs = 13;
  double log_floor = 1e-10;

  void validate() const;
  std::size_t frame_samples(int sample_rate) const;
  std::size_t hop_samples(int sample_rate) const;
  /// Next power of two >= frame_samples.
  std::size_t fft_size(int sample_rate) const;
};

/// Per-frame cepstral coefficients, row-major.
struct FrameMatrix {
  std::size_t n_frames = 0;
  std::size_t n_coeffs = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t frame) const {
    return {values.data() + frame * n_coeffs, n_coeffs};
  }
};

/// Filterbank energies before the log, captured for inspection.
struct MfccTrace {
  std::vector<std::vector<double>> filter_energies;
};

struct MelFilterbank {
  std::vector<double> center_hz;
  std::vector<std::vector<double>> weights; ///< n_filters rows of fft_size/2+1
};

/// Decodes RIFF/WAVE PCM16. Multi-channel input is averaged to mono.
AudioSignal decode_wav(std::span<const std::uint8_t> bytes);
/// Encodes mono PCM16; samples are clipped to the representable range.
std::vector<std::uint8_t> encode_wav(const AudioSignal& signal);
AudioSignal read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const AudioSignal& signal);

AudioSignal pre_emphasis(const AudioSignal& signal, double alpha);

/// In-place radix-2 FFT. The inverse scales by 1/N.
void fft_inplace(std::vector<std::complex<double>>& data, bool inverse = false);
std::vector<std::complex<double>> fft(std::vector<std::complex<double>> data, bool inverse = false);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular filters equally spaced in mel between 0 and sample_rate/2.
MelFilterbank mel_filterbank(std::size_t n_filters, std::size_t fft_size, int sample_rate);

FrameMatrix mfcc(const AudioSignal& signal, const MfccConfig& cfg = {}, MfccTrace* trace = nullptr);

/// Per-coefficient mean followed by per-coefficient population std.
FeatureVector aggregate_features(const FrameMatrix& frames);

/// One row per frame, 17 significant digits.
std::string frames_to_csv(const FrameMatrix& frames);

struct WaveletPyramid {
  std::vector<double> approximation;          ///< deepest level
  std::vector<std::vector<double>> details;   ///< details[0] is the finest band
};

/// Daubechies-4 (8-tap) decomposition filter, low-pass.
std::span<const double> db4_lowpass();

/// Periodized db4 analysis. Length must be divisible by 2^levels.
WaveletPyramid dwt_forward(std::span<const double> signal, std::size_t levels);
std::vector<double> dwt_inverse(const WaveletPyramid& pyramid);

double soft_threshold(double value, double threshold);

/// Universal-threshold soft shrinkage of all detail bands.
AudioSignal wavelet_denoise(const AudioSignal& signal, std::size_t levels = 4);

} // namespace prediag::audio
