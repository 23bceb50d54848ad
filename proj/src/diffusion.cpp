#include "pmfspoof/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "pmfspoof/error.hpp"

namespace pmfspoof {

namespace {

constexpr double kMinEigenvalue = 1e-10;

void check_finite(const Eigen::MatrixXd& x, const char* what) {
  if (!x.allFinite()) throw DataError(fmt::format("{}: non-finite values in input", what));
}

// Scalar std::exp: Eigen's packet exp does not flush large negative
// arguments to zero.
Eigen::MatrixXd gaussian_kernel(const Eigen::MatrixXd& d2, double epsilon) {
  return d2.unaryExpr([epsilon](double v) { return std::exp(-v / epsilon); });
}

double power(double base, int exponent) {
  double r = 1.0;
  for (int i = 0; i < exponent; ++i) r *= base;
  return r;
}

void write_matrix(binio::Writer& w, const Eigen::MatrixXd& m) {
  w.u64(static_cast<std::uint64_t>(m.rows()));
  w.u64(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) w.f64(m(i, j));
}

Eigen::MatrixXd read_matrix(binio::Reader& r) {
  const auto rows = r.u64();
  const auto cols = r.u64();
  if (rows > (1u << 24) || cols > (1u << 24)) throw DataError(fmt::format("{}: implausible matrix shape", r.name()));
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.f64();
  return m;
}

}  // namespace

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols())
    throw DataError(fmt::format("dimension mismatch: {} vs {} columns", a.cols(), b.cols()));
  Eigen::MatrixXd d(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) d(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  return d;
}

double select_epsilon(const Eigen::MatrixXd& x, std::size_t max_points, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n < 2) throw DataError("select_epsilon: at least two points are required");
  check_finite(x, "select_epsilon");

  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  if (n > max_points) {
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(max_points);
    std::sort(idx.begin(), idx.end());
  }

  std::vector<double> d2;
  d2.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = i + 1; j < idx.size(); ++j) d2.push_back((x.row(idx[i]) - x.row(idx[j])).squaredNorm());

  const std::size_t mid = d2.size() / 2;
  std::nth_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(mid), d2.end());
  double median = d2[mid];
  if (d2.size() % 2 == 0) {
    const double lower = *std::max_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (lower + median);
  }
  if (!(median > 0)) throw NumericError("select_epsilon: zero distance scale (points are identical)");
  return median;
}

Eigen::MatrixXd transition_matrix(const Eigen::MatrixXd& x, double epsilon) {
  Eigen::MatrixXd k = gaussian_kernel(squared_distances(x, x), epsilon);
  const Eigen::VectorXd deg = k.rowwise().sum();
  return deg.cwiseInverse().asDiagonal() * k;
}

DiffusionModel fit(const Eigen::MatrixXd& x, int k, double epsilon, int t) {
  const Eigen::Index n = x.rows();
  if (k < 1) throw ConfigError(fmt::format("diffusion map dimension K must be >= 1, got {}", k));
  if (t < 1) throw ConfigError(fmt::format("diffusion time t must be >= 1, got {}", t));
  if (n < k + 1) throw DataError(fmt::format("diffusion map with K = {} needs at least {} points, got {}", k, k + 1, n));
  if (!(epsilon > 0) || !std::isfinite(epsilon))
    throw ConfigError(fmt::format("kernel scale epsilon must be positive and finite, got {}", epsilon));
  check_finite(x, "diffusion fit");

  Eigen::MatrixXd kernel = gaussian_kernel(squared_distances(x, x), epsilon);
  Eigen::VectorXd deg = kernel.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (deg(i) - kernel(i, i) < std::numeric_limits<double>::min())
      throw NumericError(fmt::format(
          "diffusion fit: point {} has no kernel mass to any other point at epsilon = {}; use a larger epsilon", i,
          epsilon));
  }

  const Eigen::VectorXd inv_sqrt = deg.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd s(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) s(i, j) = kernel(i, j) * (inv_sqrt(i) * inv_sqrt(j));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
  if (solver.info() != Eigen::Success) throw NumericError("diffusion fit: eigendecomposition did not converge");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto& values = solver.eigenvalues();
  // Solver output is ascending; walk it from the top so ties keep a fixed order.
  std::reverse(order.begin(), order.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(values(a)) > std::abs(values(b)); });

  DiffusionModel m;
  m.references = x;
  m.epsilon = epsilon;
  m.t = t;
  m.k = k;
  m.degrees = deg;
  m.eigenvalues.resize(k + 1);
  m.eigenvectors.resize(n, k + 1);
  const double volume = deg.sum();
  for (int c = 0; c <= k; ++c) {
    const Eigen::Index src = order[static_cast<std::size_t>(c)];
    m.eigenvalues(c) = values(src);
    Eigen::VectorXd psi = std::sqrt(volume) * inv_sqrt.cwiseProduct(solver.eigenvectors().col(src));
    Eigen::Index arg = 0;
    psi.cwiseAbs().maxCoeff(&arg);
    if (psi(arg) < 0) psi = -psi;
    m.eigenvectors.col(c) = psi;
  }
  return m;
}

Embedding embed(const DiffusionModel& m) {
  Embedding e;
  e.t = m.t;
  e.k = m.k;
  e.coordinates.resize(m.references.rows(), m.k);
  for (int c = 1; c <= m.k; ++c)
    e.coordinates.col(c - 1) = power(m.eigenvalues(c), m.t) * m.eigenvectors.col(c);
  return e;
}

Eigen::MatrixXd extend(const DiffusionModel& m, const Eigen::MatrixXd& x_new) {
  if (x_new.cols() != m.references.cols())
    throw DataError(fmt::format("Nystrom extension: point has {} dimensions, model has {}", x_new.cols(),
                                m.references.cols()));
  check_finite(x_new, "Nystrom extension");
  for (int c = 1; c <= m.k; ++c)
    if (std::abs(m.eigenvalues(c)) < kMinEigenvalue)
      throw NumericError(fmt::format("Nystrom extension: |lambda_{}| = {} is below {}; use a smaller K", c,
                                     std::abs(m.eigenvalues(c)), kMinEigenvalue));

  Eigen::MatrixXd weights = gaussian_kernel(squared_distances(x_new, m.references), m.epsilon);
  const Eigen::VectorXd mass = weights.rowwise().sum();
  for (Eigen::Index i = 0; i < mass.size(); ++i)
    if (mass(i) < std::numeric_limits<double>::min())
      throw NumericError(fmt::format(
          "Nystrom extension: point {} has zero kernel mass to every reference at epsilon = {}; use a larger epsilon",
          i, m.epsilon));

  // p(x', y) psi_k(y) summed over y, then scaled by lambda_k^t / lambda_k.
  Eigen::MatrixXd projected = mass.cwiseInverse().asDiagonal() * (weights * m.eigenvectors.rightCols(m.k));
  for (int c = 1; c <= m.k; ++c) projected.col(c - 1) *= power(m.eigenvalues(c), m.t - 1);
  return projected;
}

Eigen::VectorXd extend(const DiffusionModel& m, const Eigen::VectorXd& x_new) {
  const Eigen::MatrixXd row = x_new.transpose();
  return extend(m, row).row(0).transpose();
}

std::vector<std::size_t> subsample_training(std::span<const RowMeta> rows, std::size_t per_attack,
                                            std::size_t genuine_count, std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < rows.size(); ++i)
    buckets[rows[i].label == Label::genuine ? std::string("None") : rows[i].attack].push_back(i);

  std::vector<std::size_t> out;
  for (auto& [name, members] : buckets) {
    const bool genuine = name == "None";
    const std::size_t want = genuine ? genuine_count : per_attack;
    if (members.size() <= want) {
      if (members.size() < want)
        spdlog::warn("subsample: bucket '{}' has {} rows, fewer than the requested {}; taking all", name,
                     members.size(), want);
      out.insert(out.end(), members.begin(), members.end());
      continue;
    }
    std::mt19937_64 rng(binio::fnv1a(name, seed ^ 0x9e3779b97f4a7c15ULL));
    std::shuffle(members.begin(), members.end(), rng);
    out.insert(out.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(want));
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_diffusion(binio::Writer& w, const DiffusionModel& m) {
  w.f64(m.epsilon);
  w.i32(m.t);
  w.i32(m.k);
  write_matrix(w, m.references);
  write_matrix(w, m.eigenvalues);
  write_matrix(w, m.eigenvectors);
  write_matrix(w, m.degrees);
}

DiffusionModel read_diffusion(binio::Reader& r) {
  DiffusionModel m;
  m.epsilon = r.f64();
  m.t = r.i32();
  m.k = r.i32();
  m.references = read_matrix(r);
  m.eigenvalues = read_matrix(r);
  m.eigenvectors = read_matrix(r);
  m.degrees = read_matrix(r);
  const auto n = m.references.rows();
  if (m.k < 1 || m.t < 1 || m.eigenvalues.size() != m.k + 1 || m.eigenvectors.rows() != n ||
      m.eigenvectors.cols() != m.k + 1 || m.degrees.size() != n || !(m.epsilon > 0))
    throw DataError(fmt::format("{}: inconsistent diffusion model", r.name()));
  return m;
}

}  // namespace pmfspoof
