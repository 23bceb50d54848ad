#include "pmfspoof/distances.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "pmfspoof/error.hpp"

namespace pmfspoof {

namespace {

constexpr std::array<std::string_view, 8> kNames{
    "quadratic_chi", "normalized_cross_correlation", "hellinger", "histogram_intersection",
    "jensen_shannon", "symmetric_kl", "kl_divergence", "modified_ks"};

double quadratic_chi(std::span<const double> p, std::span<const double> q) {
  double acc = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double s = p[i] + q[i];
    if (s > 0) {
      const double d = p[i] - q[i];
      acc += d * d / s;
    }
  }
  return 0.5 * acc;
}

double cross_correlation(std::span<const double> p, std::span<const double> q) {
  double pq = 0, pp = 0, qq = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    pq += p[i] * q[i];
    pp += p[i] * p[i];
    qq += q[i] * q[i];
  }
  if (pp == 0 || qq == 0) return 0;
  return pq / (std::sqrt(pp) * std::sqrt(qq));
}

// sqrt(1 - sum sqrt(p q)) written as sqrt(0.5 * sum (sqrt p - sqrt q)^2), which
// equals it for normalized inputs and is exactly zero when p == q.
double hellinger(std::span<const double> p, std::span<const double> q) {
  double acc = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
    acc += d * d;
  }
  return std::min(1.0, std::sqrt(0.5 * acc));
}

double intersection(std::span<const double> p, std::span<const double> q) {
  double acc = 0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::min(p[i], q[i]);
  return acc;
}

double jensen_shannon(std::span<const double> p, std::span<const double> q) {
  double acc = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0) acc += p[i] * std::log(p[i] / m);
    if (q[i] > 0) acc += q[i] * std::log(q[i] / m);
  }
  return std::clamp(0.5 * acc, 0.0, std::numbers::ln2);
}

double smoothed_kl(std::span<const double> p, std::span<const double> q, double eps) {
  const double norm = 1.0 + static_cast<double>(p.size()) * eps;
  double acc = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double ps = (p[i] + eps) / norm;
    const double qs = (q[i] + eps) / norm;
    if (ps > 0) acc += ps * std::log(ps / qs);
  }
  return acc;
}

double ks_statistic(std::span<const double> p, std::span<const double> q) {
  double cp = 0, cq = 0, best = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    cp += p[i];
    cq += q[i];
    best = std::max(best, std::abs(cp - cq));
  }
  return std::min(best, 1.0);
}

}  // namespace

int index_of(Measure m) { return static_cast<int>(m); }

Measure measure_from_index(int index) {
  if (index < 1 || index > 8) throw ConfigError(fmt::format("measure index must be in 1..8, got {}", index));
  return static_cast<Measure>(index);
}

std::string_view to_string(Measure m) { return kNames[static_cast<std::size_t>(index_of(m) - 1)]; }

Measure parse_measure(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == name) return static_cast<Measure>(i + 1);
  throw ConfigError(fmt::format("unknown measure '{}'", name));
}

bool is_similarity(Measure m) {
  return m == Measure::normalized_cross_correlation || m == Measure::histogram_intersection;
}

double similarity(Measure m, std::span<const double> p, std::span<const double> q, const MeasureOptions& opt) {
  if (p.size() != q.size())
    throw DataError(fmt::format("{}: bin count mismatch ({} vs {})", to_string(m), p.size(), q.size()));
  if (!(opt.smoothing > 0)) throw ConfigError("smoothing epsilon must be positive");
  switch (m) {
    case Measure::quadratic_chi: return quadratic_chi(p, q);
    case Measure::normalized_cross_correlation: return cross_correlation(p, q);
    case Measure::hellinger: return hellinger(p, q);
    case Measure::histogram_intersection: return intersection(p, q);
    case Measure::jensen_shannon: return jensen_shannon(p, q);
    case Measure::symmetric_kl: return smoothed_kl(p, q, opt.smoothing) + smoothed_kl(q, p, opt.smoothing);
    case Measure::kl_divergence: return smoothed_kl(p, q, opt.smoothing);
    case Measure::modified_ks: return ks_statistic(p, q);
  }
  throw ConfigError("unknown measure");
}

double similarity(Measure m, const PmfHistogram& p, const PmfHistogram& q, const MeasureOptions& opt) {
  return similarity(m, p.probabilities, q.probabilities, opt);
}

std::vector<double> cdf(std::span<const double> p) {
  std::vector<double> out(p.size());
  double acc = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    out[i] = acc;
  }
  return out;
}

}  // namespace pmfspoof
