#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pmfspoof/binary_io.hpp"
#include "pmfspoof/table.hpp"

namespace pmfspoof {

/// Fitted diffusion map over a set of reference points.
///
/// The kernel is k(x, y) = exp(-|x - y|^2 / epsilon) and the Markov matrix is
/// its row normalization P = D^-1 K, D = diag(deg). Right eigenvectors are
/// scaled so that sum_i phi0(x_i) psi_k(x_i)^2 = 1 with phi0 = deg / sum(deg),
/// which makes psi_0 the all-ones vector and the Euclidean distance between
/// full-spectrum embeddings equal to the diffusion distance.
struct DiffusionModel {
  Eigen::MatrixXd references;    // N x D
  double epsilon = 1.0;
  Eigen::VectorXd eigenvalues;   // K + 1, descending magnitude, eigenvalues(0) = 1
  Eigen::MatrixXd eigenvectors;  // N x (K + 1), column k = psi_k
  Eigen::VectorXd degrees;       // N
  int t = 1;
  int k = 1;                     // embedding dimension

  std::size_t size() const { return static_cast<std::size_t>(references.rows()); }
};

struct Embedding {
  Eigen::MatrixXd coordinates;  // rows x K, column k-1 = lambda_k^t psi_k
  int t = 1;
  int k = 1;
};

/// Median of squared pairwise distances over at most `max_points` points
/// drawn uniformly without replacement (fixed seed).
double select_epsilon(const Eigen::MatrixXd& x, std::size_t max_points = 2000, std::uint64_t seed = 0x5eed);

/// Squared Euclidean distances between the rows of `a` and the rows of `b`.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Row-stochastic transition matrix P = D^-1 K (for tests and diagnostics).
Eigen::MatrixXd transition_matrix(const Eigen::MatrixXd& x, double epsilon);

/// Requires N >= K + 1 and epsilon > 0. Eigenpairs come from the symmetric
/// conjugate S = D^-1/2 K D^-1/2; eigenvector signs are fixed so the
/// largest-magnitude coordinate is positive.
DiffusionModel fit(const Eigen::MatrixXd& x, int k, double epsilon, int t = 1);

/// In-sample coordinates: (i, k) = lambda_k^t psi_k(x_i).
Embedding embed(const DiffusionModel& m);

/// Nystrom extension of one point:
///   psi_k(x') = (1 / lambda_k) sum_y p(x', y) psi_k(y),  coordinate = lambda_k^t psi_k(x').
Eigen::VectorXd extend(const DiffusionModel& m, const Eigen::VectorXd& x_new);

/// Row-wise extension of a batch.
Eigen::MatrixXd extend(const DiffusionModel& m, const Eigen::MatrixXd& x_new);

/// Training subset: up to `per_attack` rows from each attack bucket and up to
/// `genuine_count` genuine rows, sampled without replacement with a fixed
/// seed. Undersized buckets are taken whole with a warning. Returned indices
/// are ascending.
std::vector<std::size_t> subsample_training(std::span<const RowMeta> rows, std::size_t per_attack,
                                            std::size_t genuine_count, std::uint64_t seed);

/// Payload serialization inside a model container.
void write_diffusion(binio::Writer& w, const DiffusionModel& m);
DiffusionModel read_diffusion(binio::Reader& r);

}  // namespace pmfspoof
