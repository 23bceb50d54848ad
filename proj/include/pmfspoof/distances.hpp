#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "pmfspoof/pmf.hpp"

namespace pmfspoof {

/// The eight PMF comparison measures, numbered 1-8 in their fixed order.
enum class Measure : int {
  quadratic_chi = 1,
  normalized_cross_correlation = 2,
  hellinger = 3,
  histogram_intersection = 4,
  jensen_shannon = 5,
  symmetric_kl = 6,
  kl_divergence = 7,
  modified_ks = 8,
};

inline constexpr std::array<Measure, 8> kAllMeasures{
    Measure::quadratic_chi, Measure::normalized_cross_correlation, Measure::hellinger,
    Measure::histogram_intersection, Measure::jensen_shannon, Measure::symmetric_kl,
    Measure::kl_divergence, Measure::modified_ks};

inline constexpr double kDefaultSmoothing = 1e-10;

int index_of(Measure m);
Measure measure_from_index(int index);
std::string_view to_string(Measure m);
Measure parse_measure(std::string_view name);

/// True for measures that grow with similarity (2 and 4).
bool is_similarity(Measure m);

struct MeasureOptions {
  /// Additive smoothing for the KL family: x -> (x + eps) / (1 + B * eps).
  double smoothing = kDefaultSmoothing;
};

double similarity(Measure m, std::span<const double> p, std::span<const double> q, const MeasureOptions& opt = {});
double similarity(Measure m, const PmfHistogram& p, const PmfHistogram& q, const MeasureOptions& opt = {});

/// Running prefix sum.
std::vector<double> cdf(std::span<const double> p);

}  // namespace pmfspoof
