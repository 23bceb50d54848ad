#include "pmfspoof/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "pmfspoof/error.hpp"

namespace pmfspoof {

namespace {

struct Counts {
  std::size_t genuine = 0;
  std::size_t spoofed = 0;
};

Counts check_trials(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw DataError("metrics: score and label counts differ");
  Counts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw DataError("metrics: non-finite score");
    (labels[i] == Label::genuine ? c.genuine : c.spoofed)++;
  }
  if (c.genuine == 0 || c.spoofed == 0) throw DataError("metrics: both genuine and spoofed trials are required");
  return c;
}

// Operating points at each distinct score and at +inf, in ascending threshold order.
std::vector<OperatingPoint> sweep(std::span<const double> scores, std::span<const Label> labels, const Counts& c) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  std::vector<OperatingPoint> out;
  std::size_t genuine_below = 0, spoofed_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double theta = scores[order[i]];
    out.push_back({theta, static_cast<double>(c.genuine - genuine_below) / static_cast<double>(c.genuine),
                   static_cast<double>(spoofed_below) / static_cast<double>(c.spoofed)});
    for (; i < order.size() && scores[order[i]] == theta; ++i)
      (labels[order[i]] == Label::genuine ? genuine_below : spoofed_below)++;
  }
  out.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  return out;
}

}  // namespace

EerResult compute_eer(std::span<const double> scores, std::span<const Label> labels) {
  const auto c = check_trials(scores, labels);
  const auto pts = sweep(scores, labels, c);
  // pts.front() has FPR - FNR = 1 and pts.back() has -1.
  std::size_t j = 1;
  while (pts[j].fpr - pts[j].fnr > 0) ++j;
  const auto& hi = pts[j];
  const double d_hi = hi.fpr - hi.fnr;
  if (d_hi == 0) return {hi.fpr, hi.threshold};

  const auto& lo = pts[j - 1];
  const double d_lo = lo.fpr - lo.fnr;
  const double alpha = d_lo / (d_lo - d_hi);
  const double upper = std::isinf(hi.threshold) ? std::nextafter(lo.threshold, hi.threshold) : hi.threshold;
  return {lo.fpr + alpha * (hi.fpr - lo.fpr), lo.threshold + alpha * (upper - lo.threshold)};
}

OperatingPoint rates_at(std::span<const double> scores, std::span<const Label> labels, double threshold) {
  const auto c = check_trials(scores, labels);
  std::size_t false_alarms = 0, misses = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == Label::genuine && scores[i] >= threshold) ++false_alarms;
    if (labels[i] == Label::spoofed && scores[i] < threshold) ++misses;
  }
  return {threshold, static_cast<double>(false_alarms) / static_cast<double>(c.genuine),
          static_cast<double>(misses) / static_cast<double>(c.spoofed)};
}

std::vector<OperatingPoint> det_points(std::span<const double> scores, std::span<const Label> labels) {
  return sweep(scores, labels, check_trials(scores, labels));
}

std::map<std::string, double> per_attack_error(std::span<const double> scores, std::span<const Label> labels,
                                               std::span<const std::string> attacks, double threshold) {
  if (scores.size() != labels.size() || scores.size() != attacks.size())
    throw DataError("per_attack_error: input lengths differ");
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // errors, trials
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool genuine = labels[i] == Label::genuine;
    auto& t = tally[genuine ? std::string("None") : attacks[i]];
    ++t.second;
    if (genuine ? scores[i] >= threshold : scores[i] < threshold) ++t.first;
  }
  std::map<std::string, double> out;
  for (const auto& [name, t] : tally)
    out[name] = 100.0 * static_cast<double>(t.first) / static_cast<double>(t.second);
  return out;
}

EvalReport evaluate(std::span<const double> scores, std::span<const Label> labels, std::span<const std::string> attacks,
                    std::string bucket, std::string split) {
  const auto c = check_trials(scores, labels);
  const auto eer = compute_eer(scores, labels);
  EvalReport r;
  r.bucket = std::move(bucket);
  r.split = std::move(split);
  r.eer_percent = 100.0 * eer.eer;
  r.threshold_at_eer = eer.threshold;
  r.n_genuine = c.genuine;
  r.n_spoofed = c.spoofed;
  r.per_attack_errors = per_attack_error(scores, labels, attacks, eer.threshold);
  r.det = det_points(scores, labels);
  return r;
}

}  // namespace pmfspoof
