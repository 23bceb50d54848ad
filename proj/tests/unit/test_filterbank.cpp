#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pmfspoof/error.hpp"
#include "pmfspoof/filterbank.hpp"

using namespace pmfspoof;

namespace {

std::vector<double> impulse(std::size_t n) {
  std::vector<double> x(n, 0.0);
  x[0] = 1.0;
  return x;
}

double rms(const std::vector<double>& x, std::size_t skip = 0) {
  double s = 0;
  for (std::size_t i = skip; i < x.size(); ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(x.size() - skip));
}

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.1);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

}  // namespace

TEST(Scales, ErbRateAndMelFormulas) {
  EXPECT_NEAR(erb_rate(1000.0), 21.4 * std::log10(5.37), 1e-12);
  EXPECT_NEAR(erb_rate(1000.0), 15.62, 5e-3);
  EXPECT_EQ(erb_rate(0.0), 0.0);
  EXPECT_NEAR(erb_rate_to_hz(erb_rate(3210.0)), 3210.0, 1e-9);
  EXPECT_NEAR(erb_bandwidth(1000.0), 24.7 * 5.37, 1e-12);
  EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-12);
  EXPECT_NEAR(hz_to_mel(700.0), 781.2, 0.05);
  EXPECT_EQ(hz_to_mel(0.0), 0.0);
  EXPECT_NEAR(mel_to_hz(hz_to_mel(4321.0)), 4321.0, 1e-9);
}

TEST(Gammatone, TenChannelsOverFullBand) {
  const auto bank = design_gammatone(10, 0, 8000, 16000);
  ASSERT_EQ(bank.size(), 10u);
  for (std::size_t i = 0; i < bank.size(); ++i) {
    EXPECT_EQ(bank.channels[i].index, static_cast<int>(i + 1));
    EXPECT_GT(bank.channels[i].center_freq_hz, 0.0);
    EXPECT_LT(bank.channels[i].center_freq_hz, 8000.0);
    if (i > 0) EXPECT_GT(bank.channels[i].center_freq_hz, bank.channels[i - 1].center_freq_hz);
  }
}

TEST(Gammatone, CentersEquispacedInErbRateWithHalfStepMargins) {
  const auto bank = design_gammatone(10, 0, 8000, 16000);
  const double step = erb_rate(8000.0) / 10.0;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    EXPECT_NEAR(erb_rate(bank.channels[i].center_freq_hz), (static_cast<double>(i) + 0.5) * step, 1e-9 * step);
    if (i > 0) {
      const double d = erb_rate(bank.channels[i].center_freq_hz) - erb_rate(bank.channels[i - 1].center_freq_hz);
      EXPECT_NEAR(d, step, 1e-9 * step);
    }
  }
}

TEST(Gammatone, SingleChannelNarrowBand) {
  const auto bank = design_gammatone(1, 100.0, 100.001, 16000);
  ASSERT_EQ(bank.size(), 1u);
  EXPECT_NEAR(bank.channels[0].center_freq_hz, 100.0, 1e-3);
}

TEST(Gammatone, UnityGainAtCenterAndPolesInsideUnitCircle) {
  const auto bank = design_gammatone(10, 0, 8000, 16000);
  for (std::size_t i = 0; i < bank.size(); ++i) {
    EXPECT_NEAR(bank.magnitude(i, bank.channels[i].center_freq_hz), 1.0, 1e-9);
    const auto& c = std::get<BiquadCascade>(bank.channels[i].realization);
    EXPECT_EQ(c.sections.size(), 4u);
    for (const auto& q : c.sections) {
      // Poles of 1 + a1 z^-1 + a2 z^-2: |p|^2 = a2 for a complex pair.
      EXPECT_GT(q.a2, 0.0);
      EXPECT_LT(q.a2, 1.0);
      EXPECT_LT(q.a1 * q.a1, 4 * q.a2);
    }
  }
}

TEST(Gammatone, RejectsInvalidBands) {
  EXPECT_THROW(design_gammatone(0, 0, 8000, 16000), ConfigError);
  EXPECT_THROW(design_gammatone(10, 500, 500, 16000), ConfigError);
  EXPECT_THROW(design_gammatone(10, -1, 8000, 16000), ConfigError);
  EXPECT_THROW(design_gammatone(10, 0, 8001, 16000), ConfigError);
  EXPECT_THROW(design_mel(10, 4000, 1000, 16000), ConfigError);
}

TEST(Gammatone, TailEnergyBound) {
  for (auto kind : {BankKind::gammatone, BankKind::inverse_gammatone, BankKind::mel}) {
    const auto bank = design({kind, 10, 0, 8000, 16000});
    const auto x = impulse(1 << 16);
    std::vector<double> h;
    for (std::size_t i = 0; i < bank.size(); ++i) {
      apply_channel(bank, i, x, h);
      double total = 0, tail = 0;
      for (std::size_t n = 0; n < h.size(); ++n) (n < 4096 ? total : tail) += h[n] * h[n];
      total += tail;
      EXPECT_LT(tail, 1e-6 * total) << to_string(kind) << " channel " << i + 1;
    }
  }
}

TEST(Apply, ImpulseResponseMatchesDirectFormOracle) {
  const auto bank = design_gammatone(10, 0, 8000, 16000);
  const auto x = impulse(4096);
  std::vector<double> h;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const auto& c = std::get<BiquadCascade>(bank.channels[i].realization);
    std::vector<oracle::Section> s;
    for (const auto& q : c.sections) s.push_back({q.b0, q.b1, q.b2, q.a1, q.a2});
    const auto ref = oracle::direct_form_1(s, c.gain, x);
    apply_channel(bank, i, x, h);
    double peak = 0;
    for (double v : ref) peak = std::max(peak, std::abs(v));
    for (std::size_t n = 0; n < h.size(); ++n) ASSERT_NEAR(h[n], ref[n], 1e-12 * peak) << "channel " << i + 1;
  }
}

TEST(Apply, MelImpulseResponseIsTheKernel) {
  const auto bank = design_mel(10, 0, 8000, 16000);
  std::vector<double> h;
  apply_channel(bank, 3, impulse(600), h);
  const auto& taps = std::get<FirKernel>(bank.channels[3].realization).taps;
  ASSERT_EQ(taps.size(), kMelTaps);
  for (std::size_t n = 0; n < taps.size(); ++n) EXPECT_EQ(h[n], taps[n]);
  for (std::size_t n = taps.size(); n < h.size(); ++n) EXPECT_EQ(h[n], 0.0);
}

TEST(Apply, SineSelectivity) {
  const auto bank = design_gammatone(10, 0, 8000, 16000);
  const std::size_t n = 16000;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    Waveform w;
    const double f = bank.channels[i].center_freq_hz;
    for (std::size_t k = 0; k < n; ++k) w.samples.push_back(0.5 * std::sin(2 * std::numbers::pi * f * k / 16000.0));
    const auto out = apply(bank, w);
    const double own = rms(out.channels[i], 4000);
    for (std::size_t j = 0; j < bank.size(); ++j) {
      if (std::abs(static_cast<int>(j) - static_cast<int>(i)) < 3) continue;
      EXPECT_GT(own, rms(out.channels[j], 4000)) << "sine at channel " << i + 1 << " vs channel " << j + 1;
    }
  }
}

TEST(Apply, ZeroInLengthPreservedAndRateChecked) {
  const auto bank = design_gammatone(4, 0, 8000, 16000);
  Waveform w;
  w.samples.assign(777, 0.0);
  const auto out = apply(bank, w);
  ASSERT_EQ(out.channels.size(), 4u);
  for (const auto& ch : out.channels) {
    ASSERT_EQ(ch.size(), 777u);
    for (double v : ch) EXPECT_EQ(v, 0.0);
  }
  w.sample_rate_hz = 8000;
  EXPECT_THROW(apply(bank, w), DataError);
}

TEST(Apply, Linearity) {
  for (auto kind : {BankKind::gammatone, BankKind::inverse_gammatone, BankKind::mel}) {
    const auto bank = design({kind, 6, 0, 8000, 16000});
    const auto x = noise(3000, 1), y = noise(3000, 2);
    const double a = 0.7, b = -1.3;
    Waveform wx, wy, wc;
    wx.samples = x;
    wy.samples = y;
    for (std::size_t i = 0; i < x.size(); ++i) wc.samples.push_back(a * x[i] + b * y[i]);
    const auto ox = apply(bank, wx), oy = apply(bank, wy), oc = apply(bank, wc);
    for (std::size_t c = 0; c < bank.size(); ++c)
      for (std::size_t i = 0; i < x.size(); ++i)
        ASSERT_NEAR(oc.channels[c][i], a * ox.channels[c][i] + b * oy.channels[c][i], 1e-12);
  }
}

TEST(InverseGammatone, MirroredCenters) {
  const auto g = design_gammatone(10, 0, 8000, 16000);
  const auto inv = design_inverse_gammatone(10, 0, 8000, 16000);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_DOUBLE_EQ(inv.channels[i].center_freq_hz, 8000.0 - g.channels[i].center_freq_hz);
    for (double f : {100.0, 1234.5, 4000.0, 7000.0})
      EXPECT_NEAR(inv.magnitude(i, 8000.0 - f), g.magnitude(i, f), 1e-12);
  }
}

TEST(InverseGammatone, ChannelWithCenter500MirrorsTo7500) {
  // A one-channel bank over [f, f] centered at 500 Hz.
  const double lo = erb_rate_to_hz(erb_rate(500.0) - 0.25), hi = erb_rate_to_hz(erb_rate(500.0) + 0.25);
  const auto g = design_gammatone(1, lo, hi, 16000);
  EXPECT_NEAR(g.channels[0].center_freq_hz, 500.0, 1e-9);
  EXPECT_NEAR(design_inverse_gammatone(1, lo, hi, 16000).channels[0].center_freq_hz, 7500.0, 1e-9);
}

TEST(InverseGammatone, SpectralInversionIdentityIsSampleExact) {
  const auto g = design_gammatone(10, 0, 8000, 16000);
  const auto inv = design_inverse_gammatone(10, 0, 8000, 16000);
  auto x = noise(5000, 7);
  std::vector<double> flipped = x;
  for (std::size_t n = 0; n < flipped.size(); ++n)
    if (n % 2) flipped[n] = -flipped[n];
  std::vector<double> a, b;
  for (std::size_t i = 0; i < g.size(); ++i) {
    apply_channel(inv, i, x, a);
    apply_channel(g, i, flipped, b);
    for (std::size_t n = 0; n < b.size(); ++n)
      if (n % 2) b[n] = -b[n];
    ASSERT_EQ(a, b) << "channel " << i + 1;
  }
}

TEST(InverseGammatone, WhiteNoisePowerProfileMirrorsGammatone) {
  const auto g = design_gammatone(10, 0, 8000, 16000);
  const auto inv = design_inverse_gammatone(10, 0, 8000, 16000);
  const auto x = noise(std::size_t{1} << 21, 11);
  std::vector<double> a, b;
  for (std::size_t i = 0; i < g.size(); ++i) {
    apply_channel(g, i, x, a);
    apply_channel(inv, i, x, b);
    const double pg = rms(a, 4096), pi = rms(b, 4096);
    EXPECT_NEAR(pi * pi / (pg * pg), 1.0, 0.05) << "channel " << i + 1;
  }
}

TEST(Mel, CentersIncreasingAndTriangularPeaks) {
  const auto bank = design_mel(10, 0, 8000, 16000);
  ASSERT_EQ(bank.size(), 10u);
  for (std::size_t i = 1; i < bank.size(); ++i)
    EXPECT_GT(bank.channels[i].center_freq_hz, bank.channels[i - 1].center_freq_hz);
  const double step = hz_to_mel(8000.0) / 11.0;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    EXPECT_NEAR(hz_to_mel(bank.channels[i].center_freq_hz), step * static_cast<double>(i + 1), 1e-9);
    // Response at the center exceeds the response at the neighbouring centers.
    const double own = bank.magnitude(i, bank.channels[i].center_freq_hz);
    if (i + 1 < bank.size()) EXPECT_GT(own, bank.magnitude(i, bank.channels[i + 1].center_freq_hz));
    if (i > 0) EXPECT_GT(own, bank.magnitude(i, bank.channels[i - 1].center_freq_hz));
  }
}

TEST(Design, KindRoundTrip) {
  for (auto k : {BankKind::gammatone, BankKind::inverse_gammatone, BankKind::mel})
    EXPECT_EQ(parse_bank_kind(to_string(k)), k);
  EXPECT_THROW(parse_bank_kind("bark"), ConfigError);
}
