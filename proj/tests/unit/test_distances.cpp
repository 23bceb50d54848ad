#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pmfspoof/distances.hpp"
#include "pmfspoof/error.hpp"

using namespace pmfspoof;

namespace {

using V = std::vector<double>;

V random_pmf(std::size_t n, std::mt19937_64& rng, double zero_fraction = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  V p(n);
  double s = 0;
  for (auto& v : p) {
    v = u(rng) < zero_fraction ? 0.0 : u(rng);
    s += v;
  }
  if (s == 0) p[0] = s = 1;
  for (auto& v : p) v /= s;
  return p;
}

double d(Measure m, const V& p, const V& q, double eps = kDefaultSmoothing) { return similarity(m, p, q, {eps}); }

}  // namespace

TEST(Measures, IndicesAndNames) {
  for (int i = 1; i <= 8; ++i) {
    const auto m = measure_from_index(i);
    EXPECT_EQ(index_of(m), i);
    EXPECT_EQ(parse_measure(to_string(m)), m);
  }
  EXPECT_EQ(to_string(Measure::quadratic_chi), "quadratic_chi");
  EXPECT_EQ(to_string(Measure::modified_ks), "modified_ks");
  EXPECT_THROW(measure_from_index(0), ConfigError);
  EXPECT_THROW(measure_from_index(9), ConfigError);
  EXPECT_TRUE(is_similarity(Measure::normalized_cross_correlation));
  EXPECT_TRUE(is_similarity(Measure::histogram_intersection));
  EXPECT_FALSE(is_similarity(Measure::kl_divergence));
}

TEST(Measures, SelfSimilarity) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    const auto p = random_pmf(64, rng, rep % 2 ? 0.5 : 0.0);
    EXPECT_NEAR(d(Measure::kl_divergence, p, p), 0.0, 1e-12);
    EXPECT_NEAR(d(Measure::symmetric_kl, p, p), 0.0, 1e-12);
    EXPECT_NEAR(d(Measure::jensen_shannon, p, p), 0.0, 1e-12);
    EXPECT_NEAR(d(Measure::hellinger, p, p), 0.0, 1e-7);
    EXPECT_EQ(d(Measure::quadratic_chi, p, p), 0.0);
    EXPECT_EQ(d(Measure::modified_ks, p, p), 0.0);
    EXPECT_NEAR(d(Measure::histogram_intersection, p, p), 1.0, 1e-12);
    EXPECT_NEAR(d(Measure::normalized_cross_correlation, p, p), 1.0, 1e-12);
  }
}

TEST(Measures, DisjointSupports) {
  const V p{1, 0}, q{0, 1};
  EXPECT_DOUBLE_EQ(d(Measure::hellinger, p, q), 1.0);
  EXPECT_DOUBLE_EQ(d(Measure::histogram_intersection, p, q), 0.0);
  EXPECT_NEAR(d(Measure::jensen_shannon, p, q), std::numbers::ln2, 1e-12);
  EXPECT_DOUBLE_EQ(d(Measure::modified_ks, p, q), 1.0);
  EXPECT_DOUBLE_EQ(d(Measure::normalized_cross_correlation, p, q), 0.0);
  EXPECT_DOUBLE_EQ(d(Measure::quadratic_chi, p, q), 1.0);
  EXPECT_TRUE(std::isfinite(d(Measure::kl_divergence, p, q)));
  EXPECT_TRUE(std::isfinite(d(Measure::symmetric_kl, p, q)));
}

TEST(Measures, HandComputedExample) {
  const V p{0.5, 0.5}, q{0.25, 0.75};
  const double kl = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
  EXPECT_NEAR(kl, 0.14384, 1e-5);
  EXPECT_NEAR(d(Measure::kl_divergence, p, q), 0.14384, 1e-5);
  EXPECT_NEAR(d(Measure::kl_divergence, p, q), kl, 1e-9);
  EXPECT_DOUBLE_EQ(d(Measure::histogram_intersection, p, q), 0.75);
  // quadratic chi: 0.5 * (0.0625 / 0.75 + 0.0625 / 1.25)
  EXPECT_NEAR(d(Measure::quadratic_chi, p, q), 0.5 * (0.0625 / 0.75 + 0.0625 / 1.25), 1e-15);
  EXPECT_NEAR(d(Measure::normalized_cross_correlation, p, q), 0.5 / (std::sqrt(0.5) * std::sqrt(0.625)), 1e-15);
  EXPECT_NEAR(d(Measure::hellinger, p, q), std::sqrt(1 - std::sqrt(0.125) - std::sqrt(0.375)), 1e-12);
  EXPECT_DOUBLE_EQ(d(Measure::modified_ks, p, q), 0.25);
  const double klqp = 0.25 * std::log(0.5) + 0.75 * std::log(1.5);
  EXPECT_NEAR(d(Measure::symmetric_kl, p, q), kl + klqp, 1e-9);
  const V m{0.375, 0.625};
  const double js = 0.5 * (0.5 * std::log(0.5 / 0.375) + 0.5 * std::log(0.5 / 0.625)) +
                    0.5 * (0.25 * std::log(0.25 / 0.375) + 0.75 * std::log(0.75 / 0.625));
  EXPECT_NEAR(d(Measure::jensen_shannon, p, q), js, 1e-15);
}

TEST(Measures, SymmetryAndKlAsymmetry) {
  std::mt19937_64 rng(2);
  bool kl_asymmetric = false;
  for (int rep = 0; rep < 50; ++rep) {
    const auto p = random_pmf(100, rng, 0.3), q = random_pmf(100, rng, 0.3);
    for (int i : {1, 2, 3, 4, 5, 6, 8}) {
      const auto m = measure_from_index(i);
      EXPECT_NEAR(d(m, p, q), d(m, q, p), 1e-12) << to_string(m);
    }
    if (std::abs(d(Measure::kl_divergence, p, q) - d(Measure::kl_divergence, q, p)) > 1e-6) kl_asymmetric = true;
  }
  EXPECT_TRUE(kl_asymmetric);
}

TEST(Measures, Bounds) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    const auto p = random_pmf(32, rng, 0.4), q = random_pmf(32, rng, 0.4);
    const double in = d(Measure::histogram_intersection, p, q), he = d(Measure::hellinger, p, q),
                 js = d(Measure::jensen_shannon, p, q), nc = d(Measure::normalized_cross_correlation, p, q),
                 ks = d(Measure::modified_ks, p, q);
    EXPECT_GE(in, 0.0);
    EXPECT_LE(in, 1.0 + 1e-15);
    EXPECT_GE(he, 0.0);
    EXPECT_LE(he, 1.0);
    EXPECT_GE(js, 0.0);
    EXPECT_LE(js, std::numbers::ln2);
    EXPECT_GE(nc, 0.0);
    EXPECT_LE(nc, 1.0 + 1e-15);
    EXPECT_GE(ks, 0.0);
    EXPECT_LE(ks, 1.0 + 1e-15);
    EXPECT_GE(d(Measure::quadratic_chi, p, q), 0.0);
    EXPECT_GE(d(Measure::kl_divergence, p, q), -1e-12);
  }
}

TEST(Measures, IdentityOfIndiscernibles) {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    const auto p = random_pmf(50, rng);
    auto q = p;
    // Move a little mass between two bins.
    const double delta = 0.5 * std::min(q[3], q[7]);
    q[3] -= delta;
    q[7] += delta;
    for (int i : {1, 3, 5, 6, 7, 8}) EXPECT_GT(d(measure_from_index(i), p, q), 1e-9) << i;
    EXPECT_LT(d(Measure::histogram_intersection, p, q), 1.0 - 1e-9);
    EXPECT_LT(d(Measure::normalized_cross_correlation, p, q), 1.0 - 1e-9);
  }
}

TEST(Measures, SmoothingConsistencyOnPositivePmfs) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    // Bins bounded away from zero, so smoothing is a first-order B * eps effect.
    auto p = random_pmf(4096, rng), q = random_pmf(4096, rng);
    for (auto* v : {&p, &q})
      for (auto& x : *v) x = 0.5 * x + 0.5 / 4096;
    for (auto m : {Measure::kl_divergence, Measure::symmetric_kl}) {
      const double a = d(m, p, q, 1e-10), b = d(m, p, q, 5e-11);
      EXPECT_LT(std::abs(a - b), 1e-4 * a);
    }
  }
}

TEST(Measures, KlSmoothingFormula) {
  const V p{1.0, 0.0}, q{0.0, 1.0};
  const double e = 1e-10, z = 1 + 2 * e;
  const double ps0 = (1 + e) / z, ps1 = e / z;
  const double expected = ps0 * std::log(ps0 / ps1) + ps1 * std::log(ps1 / ps0);
  EXPECT_NEAR(d(Measure::kl_divergence, p, q), expected, 1e-9);
}

TEST(Measures, RejectsBinMismatch) {
  EXPECT_THROW(d(Measure::hellinger, V{1.0}, V{0.5, 0.5}), DataError);
}

TEST(Cdf, PrefixSums) {
  EXPECT_EQ(cdf(V{1, 0}), (V{1, 1}));
  EXPECT_EQ(cdf(V{0.25, 0.25, 0.5}), (V{0.25, 0.5, 1.0}));
  const std::size_t b = 64;
  const auto c = cdf(V(b, 1.0 / b));
  for (std::size_t i = 0; i < b; ++i) EXPECT_EQ(c[i], static_cast<double>(i + 1) / b);
  std::mt19937_64 rng(6);
  const auto r = cdf(random_pmf(1000, rng));
  EXPECT_NEAR(r.back(), 1.0, 1e-12);
  EXPECT_TRUE(std::is_sorted(r.begin(), r.end()));
}
