#pragma once

// Reference computations used as test oracles. They follow the textbook
// definitions directly and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// EER by brute-force enumeration of thresholds at every midpoint between
// consecutive distinct sorted scores, plus one below the minimum and one above
// the maximum. Returns the crossing of FPR - FNR, interpolated between the two
// neighbouring thresholds that bracket the minimum |FPR - FNR|.
inline double brute_force_eer(const std::vector<double>& scores, const std::vector<int>& is_spoof) {
  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<double> thresholds{sorted.front() - 1.0};
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) thresholds.push_back(0.5 * (sorted[i] + sorted[i + 1]));
  thresholds.push_back(sorted.back() + 1.0);

  std::vector<double> fpr, fnr;
  for (double th : thresholds) {
    double g = 0, s = 0, fa = 0, miss = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (is_spoof[i]) {
        ++s;
        if (scores[i] < th) ++miss;
      } else {
        ++g;
        if (scores[i] > th) ++fa;  // midpoints never coincide with a score
      }
    }
    fpr.push_back(fa / g);
    fnr.push_back(miss / s);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    if (std::abs(fpr[i] - fnr[i]) < std::abs(fpr[best] - fnr[best])) best = i;
  const double d = fpr[best] - fnr[best];
  if (d == 0) return fpr[best];
  // Neighbour on the other side of the sign change.
  const std::size_t other = d > 0 ? best + 1 : best - 1;
  const double d2 = fpr[other] - fnr[other];
  const double a = d / (d - d2);
  return fpr[best] + a * (fpr[other] - fpr[best]);
}

// Row-normalized Gaussian kernel, assembled entry by entry.
inline Eigen::MatrixXd markov_matrix(const Eigen::MatrixXd& x, double eps) {
  const auto n = x.rows();
  Eigen::MatrixXd p(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      double d2 = 0;
      for (Eigen::Index c = 0; c < x.cols(); ++c) d2 += (x(i, c) - x(j, c)) * (x(i, c) - x(j, c));
      p(i, j) = std::exp(-d2 / eps);
      row += p(i, j);
    }
    p.row(i) /= row;
  }
  return p;
}

// Squared diffusion distance D_t(i, j)^2 = sum_k (P^t(i,k) - P^t(j,k))^2 / phi0(k)
// with phi0 the stationary distribution, computed from explicit matrix powers.
inline Eigen::MatrixXd diffusion_distances(const Eigen::MatrixXd& x, double eps, int t) {
  const Eigen::MatrixXd p = markov_matrix(x, eps);
  Eigen::MatrixXd pt = Eigen::MatrixXd::Identity(p.rows(), p.cols());
  for (int i = 0; i < t; ++i) pt = pt * p;
  // Stationary distribution is proportional to the kernel degree.
  Eigen::VectorXd deg(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double s = 0;
    for (Eigen::Index j = 0; j < x.rows(); ++j) s += std::exp(-(x.row(i) - x.row(j)).squaredNorm() / eps);
    deg(i) = s;
  }
  const Eigen::VectorXd phi0 = deg / deg.sum();
  Eigen::MatrixXd d(x.rows(), x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.rows(); ++j)
      d(i, j) = ((pt.row(i) - pt.row(j)).array().square() / phi0.transpose().array()).sum();
  return d;
}

// Central finite-difference gradient.
template <typename F>
Eigen::VectorXd numeric_gradient(F f, const Eigen::VectorXd& theta, double h = 1e-6) {
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd a = theta, b = theta;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

// Direct-form I evaluation of a cascade of biquads on a sequence.
struct Section {
  double b0, b1, b2, a1, a2;
};
inline std::vector<double> direct_form_1(const std::vector<Section>& sections, double gain, std::vector<double> x) {
  for (const auto& s : sections) {
    std::vector<double> y(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
      double acc = s.b0 * x[n];
      if (n >= 1) acc += s.b1 * x[n - 1] - s.a1 * y[n - 1];
      if (n >= 2) acc += s.b2 * x[n - 2] - s.a2 * y[n - 2];
      y[n] = acc;
    }
    x = std::move(y);
  }
  for (auto& v : x) v *= gain;
  return x;
}

inline double excess_kurtosis(std::span<const double> x) {
  double m = 0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double m2 = 0, m4 = 0;
  for (double v : x) {
    const double d = (v - m) * (v - m);
    m2 += d;
    m4 += d * d;
  }
  m2 /= static_cast<double>(x.size());
  m4 /= static_cast<double>(x.size());
  return m4 / (m2 * m2) - 3.0;
}

// Hand-built 44-byte-header WAV image.
inline std::string wav_bytes(const std::vector<std::int16_t>& samples, int rate = 16000, int channels = 1,
                             int bits = 16, int format = 1) {
  std::string b;
  auto u16 = [&](unsigned v) {
    b.push_back(static_cast<char>(v & 0xff));
    b.push_back(static_cast<char>((v >> 8) & 0xff));
  };
  auto u32 = [&](std::uint32_t v) {
    u16(v & 0xffff);
    u16(v >> 16);
  };
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  b += "RIFF";
  u32(36 + data_bytes);
  b += "WAVEfmt ";
  u32(16);
  u16(static_cast<unsigned>(format));
  u16(static_cast<unsigned>(channels));
  u32(static_cast<std::uint32_t>(rate));
  u32(static_cast<std::uint32_t>(rate * channels * bits / 8));
  u16(static_cast<unsigned>(channels * bits / 8));
  u16(static_cast<unsigned>(bits));
  b += "data";
  u32(data_bytes);
  for (auto s : samples) u16(static_cast<std::uint16_t>(s));
  return b;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("pmfspoof_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace oracle
