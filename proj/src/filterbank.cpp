#include "pmfspoof/filterbank.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "pmfspoof/error.hpp"

namespace pmfspoof {

namespace {

constexpr double kPi = std::numbers::pi;

void check_band(int n_channels, double f_low_hz, double f_high_hz, int sample_rate_hz) {
  if (n_channels < 1) throw ConfigError(fmt::format("filter-bank needs at least one channel, got {}", n_channels));
  if (sample_rate_hz <= 0) throw ConfigError(fmt::format("invalid sample rate {}", sample_rate_hz));
  const double nyquist = sample_rate_hz / 2.0;
  if (!(f_low_hz >= 0 && f_low_hz < f_high_hz && f_high_hz <= nyquist))
    throw ConfigError(fmt::format("invalid band edges [{}, {}] Hz for fs = {} Hz", f_low_hz, f_high_hz, sample_rate_hz));
}

// Centers at n points uniformly spaced in ERB-rate, half a step in from each edge.
std::vector<double> erb_centers(int n, double f_low_hz, double f_high_hz) {
  const double lo = erb_rate(f_low_hz);
  const double step = (erb_rate(f_high_hz) - lo) / n;
  std::vector<double> fc(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) fc[static_cast<std::size_t>(i)] = erb_rate_to_hz(lo + (i + 0.5) * step);
  return fc;
}

BiquadCascade gammatone_channel(double fc, int fs) {
  const double T = 1.0 / fs;
  const double B = 1.019 * 2 * kPi * erb_bandwidth(fc);
  const double arg = 2 * kPi * fc * T;
  const double decay = std::exp(-B * T);
  const double c = std::cos(arg) * decay;
  const double s = std::sin(arg) * decay;
  const double root_plus = std::sqrt(3 + std::pow(2.0, 1.5));
  const double root_minus = std::sqrt(3 - std::pow(2.0, 1.5));

  BiquadCascade out;
  for (double k : {root_plus, -root_plus, root_minus, -root_minus}) {
    Biquad q;
    q.b0 = 1.0;
    q.b1 = -(c + k * s);
    q.b2 = 0.0;
    q.a1 = -2 * c;
    q.a2 = decay * decay;
    out.sections.push_back(q);
  }
  out.gain = 1.0 / std::abs(out.response(arg));
  return out;
}

double triangle(double f, double lo, double mid, double hi) {
  if (f <= lo || f >= hi) return 0.0;
  return f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
}

}  // namespace

std::string_view to_string(BankKind k) {
  switch (k) {
    case BankKind::gammatone: return "gammatone";
    case BankKind::inverse_gammatone: return "inverse_gammatone";
    case BankKind::mel: return "mel";
  }
  return "gammatone";
}

BankKind parse_bank_kind(std::string_view text) {
  if (text == "gammatone") return BankKind::gammatone;
  if (text == "inverse_gammatone") return BankKind::inverse_gammatone;
  if (text == "mel") return BankKind::mel;
  throw ConfigError(fmt::format("unknown filter-bank kind '{}'", text));
}

double erb_rate(double hz) { return 21.4 * std::log10(4.37 * hz / 1000.0 + 1.0); }
double erb_rate_to_hz(double erb) { return (std::pow(10.0, erb / 21.4) - 1.0) * 1000.0 / 4.37; }
double erb_bandwidth(double hz) { return 24.7 * (4.37 * hz / 1000.0 + 1.0); }
double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::complex<double> Biquad::response(double omega) const {
  const auto z1 = std::polar(1.0, -omega);
  const auto z2 = z1 * z1;
  return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
}

std::complex<double> BiquadCascade::response(double omega) const {
  std::complex<double> h = gain;
  for (const auto& q : sections) h *= q.response(omega);
  return h;
}

std::complex<double> FirKernel::response(double omega) const {
  std::complex<double> h = 0;
  for (std::size_t n = 0; n < taps.size(); ++n) h += taps[n] * std::polar(1.0, -omega * static_cast<double>(n));
  return h;
}

std::complex<double> ChannelFilter::response(double omega) const {
  return std::visit([omega](const auto& r) { return r.response(omega); }, realization);
}

double FilterBank::magnitude(std::size_t index0, double hz) const {
  double omega = 2 * kPi * hz / spec.sample_rate_hz;
  if (spec.kind == BankKind::inverse_gammatone) omega = kPi - omega;
  return std::abs(channels.at(index0).response(omega));
}

FilterBank design_gammatone(int n_channels, double f_low_hz, double f_high_hz, int sample_rate_hz) {
  check_band(n_channels, f_low_hz, f_high_hz, sample_rate_hz);
  FilterBank bank{{BankKind::gammatone, n_channels, f_low_hz, f_high_hz, sample_rate_hz}, {}};
  const auto centers = erb_centers(n_channels, f_low_hz, f_high_hz);
  for (std::size_t i = 0; i < centers.size(); ++i)
    bank.channels.push_back({static_cast<int>(i + 1), centers[i], gammatone_channel(centers[i], sample_rate_hz)});
  return bank;
}

FilterBank design_inverse_gammatone(int n_channels, double f_low_hz, double f_high_hz, int sample_rate_hz) {
  auto bank = design_gammatone(n_channels, f_low_hz, f_high_hz, sample_rate_hz);
  bank.spec.kind = BankKind::inverse_gammatone;
  for (auto& ch : bank.channels) ch.center_freq_hz = sample_rate_hz / 2.0 - ch.center_freq_hz;
  return bank;
}

FilterBank design_mel(int n_channels, double f_low_hz, double f_high_hz, int sample_rate_hz) {
  check_band(n_channels, f_low_hz, f_high_hz, sample_rate_hz);
  FilterBank bank{{BankKind::mel, n_channels, f_low_hz, f_high_hz, sample_rate_hz}, {}};

  const double mel_lo = hz_to_mel(f_low_hz);
  const double mel_step = (hz_to_mel(f_high_hz) - mel_lo) / (n_channels + 1);
  std::vector<double> edges(static_cast<std::size_t>(n_channels + 2));
  for (std::size_t k = 0; k < edges.size(); ++k) edges[k] = mel_to_hz(mel_lo + static_cast<double>(k) * mel_step);

  constexpr std::size_t N = kMelTaps;
  constexpr std::size_t M = (N - 1) / 2;
  for (int c = 0; c < n_channels; ++c) {
    const auto i = static_cast<std::size_t>(c);
    std::vector<double> weights(M + 1);
    for (std::size_t k = 0; k <= M; ++k)
      weights[k] = triangle(static_cast<double>(k) * sample_rate_hz / N, edges[i], edges[i + 1], edges[i + 2]);
    FirKernel fir;
    fir.taps.resize(N);
    for (std::size_t n = 0; n < N; ++n) {
      double acc = weights[0];
      const double shift = static_cast<double>(n) - static_cast<double>(M);
      for (std::size_t k = 1; k <= M; ++k) acc += 2 * weights[k] * std::cos(2 * kPi * static_cast<double>(k) * shift / N);
      fir.taps[n] = acc / N;
    }
    bank.channels.push_back({c + 1, edges[i + 1], std::move(fir)});
  }
  return bank;
}

FilterBank design(const FilterBankSpec& s) {
  switch (s.kind) {
    case BankKind::gammatone: return design_gammatone(s.n_channels, s.f_low_hz, s.f_high_hz, s.sample_rate_hz);
    case BankKind::inverse_gammatone:
      return design_inverse_gammatone(s.n_channels, s.f_low_hz, s.f_high_hz, s.sample_rate_hz);
    case BankKind::mel: return design_mel(s.n_channels, s.f_low_hz, s.f_high_hz, s.sample_rate_hz);
  }
  throw ConfigError("unknown filter-bank kind");
}

namespace {

void run_cascade(const BiquadCascade& c, std::span<const double> x, std::vector<double>& y) {
  y.assign(x.begin(), x.end());
  for (const auto& q : c.sections) {
    // transposed direct form II
    double s1 = 0, s2 = 0;
    for (double& v : y) {
      const double in = v;
      const double out = q.b0 * in + s1;
      s1 = q.b1 * in - q.a1 * out + s2;
      s2 = q.b2 * in - q.a2 * out;
      v = out;
    }
  }
  for (double& v : y) v *= c.gain;
}

void run_fir(const FirKernel& k, std::span<const double> x, std::vector<double>& y) {
  y.assign(x.size(), 0.0);
  const std::size_t taps = k.taps.size();
  for (std::size_t n = 0; n < x.size(); ++n) {
    const std::size_t last = std::min(n + 1, taps);
    double acc = 0;
    for (std::size_t j = 0; j < last; ++j) acc += k.taps[j] * x[n - j];
    y[n] = acc;
  }
}

void modulate(std::vector<double>& v) {
  for (std::size_t n = 1; n < v.size(); n += 2) v[n] = -v[n];
}

}  // namespace

void apply_channel(const FilterBank& bank, std::size_t index0, std::span<const double> x, std::vector<double>& out) {
  const auto& ch = bank.channels.at(index0);
  if (bank.kind() == BankKind::inverse_gammatone) {
    std::vector<double> flipped(x.begin(), x.end());
    modulate(flipped);
    run_cascade(std::get<BiquadCascade>(ch.realization), flipped, out);
    modulate(out);
    return;
  }
  std::visit(
      [&](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, BiquadCascade>)
          run_cascade(r, x, out);
        else
          run_fir(r, x, out);
      },
      ch.realization);
}

MultichannelWaveform apply(const FilterBank& bank, const Waveform& w) {
  if (w.sample_rate_hz != bank.sample_rate_hz())
    throw DataError(fmt::format("{}: sample rate {} Hz does not match the {} bank's {} Hz", w.file_id, w.sample_rate_hz,
                                to_string(bank.kind()), bank.sample_rate_hz()));
  MultichannelWaveform out;
  out.file_id = w.file_id;
  out.channels.resize(bank.size());
  for (std::size_t i = 0; i < bank.size(); ++i) apply_channel(bank, i, w.samples, out.channels[i]);
  return out;
}

}  // namespace pmfspoof
