#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "pmfspoof/audio_io.hpp"

namespace pmfspoof {

// Spoofed is the positive class; a trial is called spoofed when its score is
// >= the threshold. FPR is the fraction of genuine trials called spoofed, FNR
// the fraction of spoofed trials called genuine.

struct EerResult {
  double eer = 0;        // fraction in [0, 1]
  double threshold = 0;  // interpolated crossing point
};

struct OperatingPoint {
  double threshold = 0;
  double fpr = 0;
  double fnr = 0;
};

/// Sweeps every distinct score as a threshold (plus +inf) and linearly
/// interpolates between the two adjacent thresholds where FPR - FNR changes
/// sign. Both classes must be present.
EerResult compute_eer(std::span<const double> scores, std::span<const Label> labels);

OperatingPoint rates_at(std::span<const double> scores, std::span<const Label> labels, double threshold);

/// One point per distinct score threshold, ascending, followed by the
/// (FPR = 0, FNR = 1) point at threshold +inf. The first point is (1, 0).
std::vector<OperatingPoint> det_points(std::span<const double> scores, std::span<const Label> labels);

/// Error percent per attack id at `threshold`: for "None" (genuine) the share
/// called spoofed, for each attack the share called genuine.
std::map<std::string, double> per_attack_error(std::span<const double> scores, std::span<const Label> labels,
                                               std::span<const std::string> attacks, double threshold);

struct EvalReport {
  std::string bucket;
  std::string split;
  double eer_percent = 0;
  double threshold_at_eer = 0;
  std::size_t n_genuine = 0;
  std::size_t n_spoofed = 0;
  std::map<std::string, double> per_attack_errors;
  std::vector<OperatingPoint> det;

  /// EER above 50% means the scores are worse than chance on this set.
  bool worse_than_chance() const { return eer_percent > 50.0; }
};

EvalReport evaluate(std::span<const double> scores, std::span<const Label> labels,
                    std::span<const std::string> attacks, std::string bucket, std::string split);

}  // namespace pmfspoof
