#include "pmfspoof/classifier.hpp"

#include <cmath>

#include <fmt/format.h>

#include "pmfspoof/error.hpp"

namespace pmfspoof {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-30;

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LogisticObjective::LogisticObjective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Eigen::VectorXd sample_weights,
                                     double l2)
    : x_(x), y_(y), weights_(std::move(sample_weights)), l2_(l2) {
  if (x_.rows() != y_.size() || weights_.size() != y_.size())
    throw DataError("logistic objective: row counts of X, y and weights differ");
}

double LogisticObjective::value(const Eigen::VectorXd& theta, Eigen::VectorXd* gradient) const {
  const Eigen::Index d = x_.cols();
  const auto w = theta.head(d);
  const double b = theta(d);
  const Eigen::VectorXd z = (x_ * w).array() + b;
  const double n = static_cast<double>(x_.rows());

  double loss = 0;
  Eigen::VectorXd residual(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += weights_(i) * (softplus(z(i)) - y_(i) * z(i));
    residual(i) = weights_(i) * (sigmoid(z(i)) - y_(i));
  }
  loss = loss / n + 0.5 * l2_ * w.squaredNorm();

  if (gradient != nullptr) {
    gradient->resize(d + 1);
    gradient->head(d) = x_.transpose() * residual / n + l2_ * w;
    (*gradient)(d) = residual.sum() / n;
  }
  return loss;
}

Eigen::VectorXd class_weights(const Eigen::VectorXd& y, bool balance) {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(y.size());
  if (!balance) return w;
  const double n = static_cast<double>(y.size());
  const double n_pos = (y.array() > 0.5).count();
  const double n_neg = n - n_pos;
  for (Eigen::Index i = 0; i < y.size(); ++i) w(i) = n / (2.0 * (y(i) > 0.5 ? n_pos : n_neg));
  return w;
}

LogisticModel train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TrainOptions& opt) {
  if (x.rows() != y.size()) throw DataError("logistic regression: X and y row counts differ");
  if (x.rows() < 2) throw DataError("logistic regression: at least two samples are required");
  if (!x.allFinite()) throw DataError("logistic regression: non-finite features");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y(i) != 0.0 && y(i) != 1.0) throw DataError("logistic regression: labels must be 0 or 1");
  const auto n_pos = (y.array() > 0.5).count();
  if (n_pos == 0 || n_pos == y.size()) throw DataError("logistic regression: training data contains a single class");
  if (!(opt.l2 >= 0)) throw ConfigError("logistic regression: negative L2 strength");

  const LogisticObjective objective(x, y, class_weights(y, opt.balance_classes), opt.l2);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(objective.parameters());
  if (opt.initial) {
    if (opt.initial->size() != theta.size()) throw ConfigError("logistic regression: initial point has wrong size");
    theta = *opt.initial;
  }

  LogisticModel m;
  m.meta.l2 = opt.l2;
  Eigen::VectorXd grad;
  double loss = objective.value(theta, &grad);
  double step = 1.0;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (it % opt.checkpoint_every == 0) m.meta.loss_checkpoints.push_back(loss);
    const double gnorm2 = grad.squaredNorm();
    if (std::sqrt(gnorm2) < opt.gradient_tolerance) break;

    step = std::min(1e6, step * 2.0);
    Eigen::VectorXd candidate;
    double next = 0;
    while (true) {
      candidate = theta - step * grad;
      next = objective.value(candidate);
      if (next <= loss - kArmijo * step * gnorm2) break;
      step *= 0.5;
      if (step < kMinStep) break;
    }
    if (step < kMinStep) break;  // no further decrease representable
    theta = candidate;
    loss = objective.value(theta, &grad);
  }
  if (!theta.allFinite()) throw NumericError("logistic regression diverged");

  m.weights = theta.head(x.cols());
  m.bias = theta(x.cols());
  m.meta.iterations = it;
  m.meta.final_loss = loss;
  m.meta.gradient_norm = grad.norm();
  m.meta.loss_checkpoints.push_back(loss);
  return m;
}

double score(const LogisticModel& m, const Eigen::VectorXd& x) {
  if (x.size() != m.weights.size())
    throw DataError(fmt::format("score: input has {} dimensions, model has {}", x.size(), m.weights.size()));
  return sigmoid(m.weights.dot(x) + m.bias);
}

Eigen::VectorXd score(const LogisticModel& m, const Eigen::MatrixXd& x) {
  if (x.cols() != m.weights.size())
    throw DataError(fmt::format("score: input has {} dimensions, model has {}", x.cols(), m.weights.size()));
  const Eigen::VectorXd z = (x * m.weights).array() + m.bias;
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

void write_logistic(binio::Writer& w, const LogisticModel& m) {
  w.f64s(std::span<const double>(m.weights.data(), static_cast<std::size_t>(m.weights.size())));
  w.f64(m.bias);
  w.i32(m.meta.iterations);
  w.f64(m.meta.final_loss);
  w.f64(m.meta.l2);
  w.f64(m.meta.gradient_norm);
  w.f64s(m.meta.loss_checkpoints);
}

LogisticModel read_logistic(binio::Reader& r) {
  LogisticModel m;
  const auto weights = r.f64s();
  m.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  m.bias = r.f64();
  m.meta.iterations = r.i32();
  m.meta.final_loss = r.f64();
  m.meta.l2 = r.f64();
  m.meta.gradient_norm = r.f64();
  m.meta.loss_checkpoints = r.f64s();
  if (!m.weights.allFinite() || !std::isfinite(m.bias)) throw DataError(fmt::format("{}: non-finite classifier", r.name()));
  return m;
}

}  // namespace pmfspoof
