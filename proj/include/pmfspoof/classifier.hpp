#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pmfspoof/binary_io.hpp"

namespace pmfspoof {

struct TrainingMeta {
  int iterations = 0;
  double final_loss = 0;
  double l2 = 0;
  double gradient_norm = 0;
  std::vector<double> loss_checkpoints;  // every `checkpoint_every` iterations, plus the final loss
};

struct LogisticModel {
  Eigen::VectorXd weights;
  double bias = 0;
  TrainingMeta meta;

  std::size_t dimension() const { return static_cast<std::size_t>(weights.size()); }
};

struct TrainOptions {
  double l2 = 1e-4;
  int max_iterations = 5000;
  double gradient_tolerance = 1e-8;
  /// Inverse class-frequency sample weights.
  bool balance_classes = true;
  int checkpoint_every = 50;
  /// Starting point as [w; b]; zeros when absent.
  std::optional<Eigen::VectorXd> initial;
};

/// Weighted mean binary cross-entropy plus (l2 / 2) |w|^2 over parameters
/// theta = [w; b]. The bias is not penalized.
class LogisticObjective {
 public:
  LogisticObjective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Eigen::VectorXd sample_weights, double l2);

  double value(const Eigen::VectorXd& theta, Eigen::VectorXd* gradient = nullptr) const;
  Eigen::Index parameters() const { return x_.cols() + 1; }

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  Eigen::VectorXd weights_;
  double l2_;
};

/// Sample weights N / (2 N_class); all ones when `balance` is false.
Eigen::VectorXd class_weights(const Eigen::VectorXd& y, bool balance);

/// Full-batch gradient descent with Armijo backtracking. Labels: genuine 0,
/// spoofed 1; both classes must be present.
LogisticModel train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TrainOptions& opt = {});

/// sigmoid(w . x + b)
double score(const LogisticModel& m, const Eigen::VectorXd& x);
Eigen::VectorXd score(const LogisticModel& m, const Eigen::MatrixXd& x);

double sigmoid(double z);

void write_logistic(binio::Writer& w, const LogisticModel& m);
LogisticModel read_logistic(binio::Reader& r);

}  // namespace pmfspoof
