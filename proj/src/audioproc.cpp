#include "prediag/audioproc.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "prediag/error.hpp"
#include "prediag/fileio.hpp"

namespace prediag::audio {

namespace {

constexpr std::array<double, 8> kDb4Lowpass = {
    0.23037781330885523, 0.71484657055254153, 0.63088076792959036, -0.027983769416983849,
    -0.18703481171888114, 0.030841381835986965, 0.032883011666982945, -0.010597401784997278};

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::equal(tag, tag + 4, b.begin() + static_cast<std::ptrdiff_t>(at));
}

double highpass_tap(std::size_t m) {
  // g[m] = (-1)^m h[7-m]
  const double h = kDb4Lowpass[kDb4Lowpass.size() - 1 - m];
  return (m % 2 == 0) ? h : -h;
}

double median(std::vector<double> values) {
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

} // namespace

void MfccConfig::validate() const {
  if (!(frame_len > 0.0) || !(hop > 0.0) || hop > frame_len)
    throw InvalidArgument("MFCC requires 0 < hop <= frame_len");
  if (n_filters < 1 || n_coeffs < 1 || n_coeffs > n_filters)
    throw InvalidArgument("MFCC requires 1 <= n_coeffs <= n_filters");
  if (!(pre_emphasis >= 0.0 && pre_emphasis < 1.0))
    throw InvalidArgument("pre-emphasis coefficient must lie in [0, 1)");
  if (!(log_floor > 0.0)) throw InvalidArgument("MFCC log floor must be positive");
}

std::size_t MfccConfig::frame_samples(int sample_rate) const {
  return static_cast<std::size_t>(std::lround(frame_len * sample_rate));
}

std::size_t MfccConfig::hop_samples(int sample_rate) const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(hop * sample_rate)));
}

std::size_t MfccConfig::fft_size(int sample_rate) const {
  return std::bit_ceil(std::max<std::size_t>(2, frame_samples(sample_rate)));
}

AudioSignal decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF")) throw DataError("missing RIFF header");
  if (!tag_is(bytes, 8, "WAVE")) throw DataError("missing WAVE form type");

  std::size_t pos = 12;
  int channels = 0;
  int sample_rate = 0;
  bool have_fmt = false;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (tag_is(bytes, pos, "fmt ")) {
      if (size < 16 || body + 16 > bytes.size()) throw DataError("truncated fmt chunk");
      const std::uint16_t format = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      sample_rate = static_cast<int>(read_u32(bytes, body + 4));
      const std::uint16_t bits = read_u16(bytes, body + 14);
      if (format != 1) throw DataError("unsupported WAV format code " + std::to_string(format));
      if (bits != 16) throw DataError("unsupported WAV bit depth " + std::to_string(bits));
      if (channels < 1 || sample_rate < 1) throw DataError("invalid WAV channel count or sample rate");
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      if (!have_fmt) throw DataError("WAV data chunk precedes fmt chunk");
      if (body + size > bytes.size()) throw DataError("truncated WAV data chunk");
      const std::size_t frame_bytes = 2 * static_cast<std::size_t>(channels);
      if (size % frame_bytes != 0) throw DataError("WAV data chunk is not a whole number of frames");
      const std::size_t frames = size / frame_bytes;
      AudioSignal out{std::vector<double>(frames), sample_rate};
      for (std::size_t f = 0; f < frames; ++f) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
          const auto raw = static_cast<std::int16_t>(read_u16(bytes, body + f * frame_bytes + 2 * static_cast<std::size_t>(c)));
          acc += raw;
        }
        out.samples[f] = acc / channels / 32768.0;
      }
      return out;
    }
    pos = body + size + (size & 1u);
  }
  throw DataError(have_fmt ? "WAV file has no data chunk" : "WAV file has no fmt chunk");
}

std::vector<std::uint8_t> encode_wav(const AudioSignal& signal) {
  const auto data_bytes = static_cast<std::uint32_t>(signal.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  for (char c : std::string_view("RIFF")) out.push_back(static_cast<std::uint8_t>(c));
  put_u32(out, 36 + data_bytes);
  for (char c : std::string_view("WAVEfmt ")) out.push_back(static_cast<std::uint8_t>(c));
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  for (char c : std::string_view("data")) out.push_back(static_cast<std::uint8_t>(c));
  put_u32(out, data_bytes);
  for (double s : signal.samples) {
    const long v = std::clamp(std::lround(s * 32768.0), -32768L, 32767L);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  return out;
}

AudioSignal read_wav(const std::filesystem::path& path) {
  try {
    return decode_wav(io::read_bytes(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_wav(const std::filesystem::path& path, const AudioSignal& signal) {
  io::write_atomic(path, encode_wav(signal));
}

AudioSignal pre_emphasis(const AudioSignal& signal, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidArgument("pre-emphasis coefficient must lie in [0, 1)");
  AudioSignal out = signal;
  for (std::size_t n = signal.samples.size(); n-- > 1;)
    out.samples[n] = signal.samples[n] - alpha * signal.samples[n - 1];
  return out;
}

void fft_inplace(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  if (n == 0 || !std::has_single_bit(n)) throw InvalidArgument("FFT length must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double step = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> w = std::polar(1.0, step * static_cast<double>(k));
        const auto even = data[start + k];
        const auto odd = data[start + k + len / 2] * w;
        data[start + k] = even + odd;
        data[start + k + len / 2] = even - odd;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : data) v *= scale;
  }
}

std::vector<std::complex<double>> fft(std::vector<std::complex<double>> data, bool inverse) {
  fft_inplace(data, inverse);
  return data;
}

double hz_to_mel(double hz) {
  if (!(hz >= 0.0)) throw InvalidArgument("frequency must be non-negative");
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double mel_to_hz(double mel) {
  if (!(mel >= 0.0)) throw InvalidArgument("mel value must be non-negative");
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterbank mel_filterbank(std::size_t n_filters, std::size_t fft_size, int sample_rate) {
  if (n_filters < 1 || fft_size < 2 || sample_rate < 1) throw InvalidArgument("invalid filterbank geometry");
  const double top = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(n_filters + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(n_filters + 1));

  const std::size_t n_bins = fft_size / 2 + 1;
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(fft_size);
  MelFilterbank bank;
  bank.center_hz.assign(edges.begin() + 1, edges.end() - 1);
  bank.weights.assign(n_filters, std::vector<double>(n_bins, 0.0));
  for (std::size_t m = 0; m < n_filters; ++m) {
    const double lo = edges[m];
    const double mid = edges[m + 1];
    const double hi = edges[m + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      if (f > lo && f <= mid) {
        bank.weights[m][k] = (f - lo) / (mid - lo);
      } else if (f > mid && f < hi) {
        bank.weights[m][k] = (hi - f) / (hi - mid);
      }
    }
  }
  return bank;
}

FrameMatrix mfcc(const AudioSignal& signal, const MfccConfig& cfg, MfccTrace* trace) {
  cfg.validate();
  if (signal.sample_rate < 1) throw InvalidArgument("sample rate must be positive");
  const std::size_t frame = cfg.frame_samples(signal.sample_rate);
  const std::size_t hop = cfg.hop_samples(signal.sample_rate);
  if (frame < 2) throw InvalidArgument("MFCC frame is shorter than two samples");
  if (signal.samples.size() < frame)
    throw InvalidArgument("signal of " + std::to_string(signal.samples.size()) +
                          " samples is shorter than one MFCC frame (" + std::to_string(frame) + ")");

  const std::size_t nfft = cfg.fft_size(signal.sample_rate);
  const std::size_t n_bins = nfft / 2 + 1;
  const auto bank = mel_filterbank(cfg.n_filters, nfft, signal.sample_rate);
  const AudioSignal emphasized = pre_emphasis(signal, cfg.pre_emphasis);

  std::vector<double> window(frame);
  for (std::size_t n = 0; n < frame; ++n)
    window[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(frame - 1));

  const std::size_t n_filters = cfg.n_filters;
  std::vector<std::vector<double>> dct(cfg.n_coeffs, std::vector<double>(n_filters));
  for (std::size_t k = 0; k < cfg.n_coeffs; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n_filters));
    for (std::size_t m = 0; m < n_filters; ++m)
      dct[k][m] = scale * std::cos(std::numbers::pi * static_cast<double>(k) * (static_cast<double>(m) + 0.5) /
                                   static_cast<double>(n_filters));
  }

  FrameMatrix out;
  out.n_frames = 1 + (signal.samples.size() - frame) / hop;
  out.n_coeffs = cfg.n_coeffs;
  out.values.resize(out.n_frames * out.n_coeffs);
  std::vector<std::complex<double>> buffer(nfft);
  std::vector<double> power(n_bins);
  std::vector<double> log_energy(n_filters);
  for (std::size_t f = 0; f < out.n_frames; ++f) {
    const std::size_t start = f * hop;
    std::fill(buffer.begin(), buffer.end(), std::complex<double>{});
    for (std::size_t n = 0; n < frame; ++n) buffer[n] = emphasized.samples[start + n] * window[n];
    fft_inplace(buffer);
    for (std::size_t k = 0; k < n_bins; ++k) power[k] = std::norm(buffer[k]) / static_cast<double>(nfft);

    std::vector<double> energies(n_filters, 0.0);
    for (std::size_t m = 0; m < n_filters; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < n_bins; ++k) e += bank.weights[m][k] * power[k];
      energies[m] = e;
      log_energy[m] = std::log(std::max(e, cfg.log_floor));
    }
    if (trace) trace->filter_energies.push_back(std::move(energies));
    for (std::size_t k = 0; k < cfg.n_coeffs; ++k) {
      double c = 0.0;
      for (std::size_t m = 0; m < n_filters; ++m) c += dct[k][m] * log_energy[m];
      out.values[f * out.n_coeffs + k] = c;
    }
  }
  return out;
}

FeatureVector aggregate_features(const FrameMatrix& frames) {
  if (frames.n_frames == 0 || frames.n_coeffs == 0) throw InvalidArgument("cannot aggregate an empty frame matrix");
  const std::size_t c = frames.n_coeffs;
  FeatureVector out(2 * c, 0.0);
  for (std::size_t f = 0; f < frames.n_frames; ++f)
    for (std::size_t k = 0; k < c; ++k) out[k] += frames.values[f * c + k];
  const double n = static_cast<double>(frames.n_frames);
  for (std::size_t k = 0; k < c; ++k) out[k] /= n;
  for (std::size_t f = 0; f < frames.n_frames; ++f) {
    for (std::size_t k = 0; k < c; ++k) {
      const double d = frames.values[f * c + k] - out[k];
      out[c + k] += d * d;
    }
  }
  for (std::size_t k = 0; k < c; ++k) out[c + k] = std::sqrt(out[c + k] / n);
  return out;
}

std::string frames_to_csv(const FrameMatrix& frames) {
  std::ostringstream out;
  for (std::size_t f = 0; f < frames.n_frames; ++f) {
    const auto row = frames.row(f);
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << io::format_real(row[k]);
    out << '\n';
  }
  return out.str();
}

std::span<const double> db4_lowpass() { return kDb4Lowpass; }

WaveletPyramid dwt_forward(std::span<const double> signal, std::size_t levels) {
  if (levels < 1) throw InvalidArgument("wavelet decomposition needs at least one level");
  if (levels >= 63 || signal.empty() || signal.size() % (std::size_t{1} << levels) != 0)
    throw InvalidArgument("signal length " + std::to_string(signal.size()) + " is not divisible by 2^" +
                          std::to_string(levels));
  WaveletPyramid out;
  std::vector<double> current(signal.begin(), signal.end());
  for (std::size_t level = 0; level < levels; ++level) {
    const std::size_t n = current.size();
    std::vector<double> approx(n / 2), detail(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      double a = 0.0, d = 0.0;
      for (std::size_t m = 0; m < kDb4Lowpass.size(); ++m) {
        const double x = current[(2 * k + m) % n];
        a += kDb4Lowpass[m] * x;
        d += highpass_tap(m) * x;
      }
      approx[k] = a;
      detail[k] = d;
    }
    out.details.push_back(std::move(detail));
    current = std::move(approx);
  }
  out.approximation = std::move(current);
  return out;
}

std::vector<double> dwt_inverse(const WaveletPyramid& pyramid) {
  if (pyramid.details.empty()) throw InvalidArgument("wavelet pyramid has no detail bands");
  std::vector<double> current = pyramid.approximation;
  for (std::size_t level = pyramid.details.size(); level-- > 0;) {
    const auto& detail = pyramid.details[level];
    if (detail.size() != current.size()) throw InvalidArgument("inconsistent wavelet pyramid band sizes");
    const std::size_t n = current.size() * 2;
    std::vector<double> next(n, 0.0);
    for (std::size_t k = 0; k < current.size(); ++k) {
      for (std::size_t m = 0; m < kDb4Lowpass.size(); ++m) {
        next[(2 * k + m) % n] += kDb4Lowpass[m] * current[k] + highpass_tap(m) * detail[k];
      }
    }
    current = std::move(next);
  }
  return current;
}

double soft_threshold(double value, double threshold) {
  if (value > threshold) return value - threshold;
  if (value < -threshold) return value + threshold;
  return 0.0;
}

AudioSignal wavelet_denoise(const AudioSignal& signal, std::size_t levels) {
  if (signal.samples.empty()) throw InvalidArgument("cannot denoise an empty signal");
  if (levels < 1 || levels >= 63) throw InvalidArgument("wavelet decomposition needs at least one level");
  const std::size_t block = std::size_t{1} << levels;
  const std::size_t n = signal.samples.size();
  std::vector<double> padded(signal.samples);
  padded.resize((n + block - 1) / block * block, 0.0);

  auto pyramid = dwt_forward(padded, levels);
  std::vector<double> finest_abs(pyramid.details[0].size());
  std::transform(pyramid.details[0].begin(), pyramid.details[0].end(), finest_abs.begin(),
                 [](double d) { return std::abs(d); });
  const double sigma = median(std::move(finest_abs)) / 0.6745;
  const double threshold = sigma * std::sqrt(2.0 * std::log(static_cast<double>(n)));
  for (auto& band : pyramid.details)
    for (double& d : band) d = soft_threshold(d, threshold);

  auto restored = dwt_inverse(pyramid);
  restored.resize(n);
  return {std::move(restored), signal.sample_rate};
}

} // namespace prediag::audio
