#pragma once

#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pmfspoof/audio_io.hpp"

namespace pmfspoof {

enum class BankKind { gammatone, inverse_gammatone, mel };

std::string_view to_string(BankKind k);
BankKind parse_bank_kind(std::string_view text);

/// Glasberg-Moore ERB-rate: 21.4 * log10(4.37 f / 1000 + 1).
double erb_rate(double hz);
double erb_rate_to_hz(double erb);
/// Equivalent rectangular bandwidth: 24.7 * (4.37 f / 1000 + 1).
double erb_bandwidth(double hz);
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Second-order section, a0 normalized to 1.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;

  std::complex<double> response(double omega) const;
};

/// Cascade of second-order sections followed by a scalar gain.
struct BiquadCascade {
  std::vector<Biquad> sections;
  double gain = 1.0;

  std::complex<double> response(double omega) const;
};

/// Linear-phase FIR kernel.
struct FirKernel {
  std::vector<double> taps;

  std::complex<double> response(double omega) const;
};

struct ChannelFilter {
  int index = 1;  // 1-based; channel 1 is the "low" channel of its bank
  /// Effective passband center. For the inverse bank this is the mirror of
  /// the underlying gammatone center.
  double center_freq_hz = 0;
  std::variant<BiquadCascade, FirKernel> realization;

  /// Frequency response of the realization (before any spectral inversion).
  std::complex<double> response(double omega) const;
};

/// Design parameters; enough to rebuild an identical bank.
struct FilterBankSpec {
  BankKind kind = BankKind::gammatone;
  int n_channels = 10;
  double f_low_hz = 0;
  double f_high_hz = 8000;
  int sample_rate_hz = 16000;

  bool operator==(const FilterBankSpec&) const = default;
};

struct FilterBank {
  FilterBankSpec spec;
  std::vector<ChannelFilter> channels;

  BankKind kind() const { return spec.kind; }
  int sample_rate_hz() const { return spec.sample_rate_hz; }
  std::size_t size() const { return channels.size(); }
  /// Magnitude response of channel `index0` (0-based) at `hz`, including the
  /// frequency mirroring of the inverse bank.
  double magnitude(std::size_t index0, double hz) const;
};

struct MultichannelWaveform {
  std::vector<std::vector<double>> channels;
  std::string file_id;
};

/// 4th-order gammatone channels (four cascaded resonators per channel, Slaney
/// style), centers equispaced in ERB-rate with half-step margins from the band
/// edges, bandwidth 1.019 * ERB(fc), unity gain at fc.
FilterBank design_gammatone(int n_channels, double f_low_hz, double f_high_hz, int sample_rate_hz);

/// Gammatone bank applied under (-1)^n modulation, which mirrors every
/// passband about fs/4: f -> fs/2 - f. Channel i mirrors gammatone channel i.
FilterBank design_inverse_gammatone(int n_channels, double f_low_hz, double f_high_hz, int sample_rate_hz);

/// Triangular mel-spaced filters realized as 511-tap linear-phase FIR kernels
/// by frequency sampling.
FilterBank design_mel(int n_channels, double f_low_hz, double f_high_hz, int sample_rate_hz);

FilterBank design(const FilterBankSpec& spec);

inline constexpr std::size_t kMelTaps = 511;

/// Causal LTI filtering of `x` by one channel; output length equals input
/// length. Modulation for the inverse bank is applied here.
void apply_channel(const FilterBank& bank, std::size_t index0, std::span<const double> x, std::vector<double>& out);

MultichannelWaveform apply(const FilterBank& bank, const Waveform& w);

}  // namespace pmfspoof
