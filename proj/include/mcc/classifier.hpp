#pragma once

// Probabilistic base classifiers used at each link of a chain.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

namespace mcc {

// Contract: predict_distribution returns num_classes() non-negative entries
// summing to 1. Class c (1-based) has probability at index c-1.
class ProbabilisticClassifier {
 public:
  virtual ~ProbabilisticClassifier() = default;

  virtual int num_classes() const = 0;
  virtual std::size_t input_dim() const = 0;
  virtual std::vector<double> predict_distribution(std::span<const double> input) const = 0;
  virtual nlohmann::json to_json() const = 0;
};

using ClassifierPtr = std::shared_ptr<const ProbabilisticClassifier>;

// 1-based argmax, ties toward the lowest class.
int argmax_class(std::span<const double> distribution);

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  double frobenius_norm() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct TrainConfig {
  double learning_rate = 0.1;
  int max_epochs = 2000;
  double gradient_tolerance = 1e-6;
  double l2 = 1e-3;
  // Full-batch descent from zero weights has no random component; the seed is
  // carried so callers can derive streams (e.g. Monte Carlo marginals).
  std::uint64_t seed = 0;
};

// Multinomial logistic regression. weights is K x (dim + 1); the last column
// multiplies a constant-1 feature (the bias).
class SoftmaxModel final : public ProbabilisticClassifier {
 public:
  SoftmaxModel(int num_classes, std::size_t dim);
  explicit SoftmaxModel(Matrix weights);

  int num_classes() const override { return static_cast<int>(weights_.rows()); }
  std::size_t input_dim() const override { return weights_.cols() - 1; }
  std::vector<double> predict_distribution(std::span<const double> input) const override;
  nlohmann::json to_json() const override;

  static SoftmaxModel from_json(const nlohmann::json& j);

  const Matrix& weights() const noexcept { return weights_; }
  Matrix& weights() noexcept { return weights_; }

 private:
  Matrix weights_;
};

// Training rows for the softmax objective. Targets are 1-based.
struct Batch {
  std::span<const std::vector<double>> inputs;
  std::span<const int> targets;
};

// Mean negative log-likelihood plus (l2/2) * ||W||^2 over non-bias columns.
// An empty batch contributes no data term.
double objective(const SoftmaxModel& model, const Batch& batch, double l2);

// Analytic gradient of objective() with respect to the weights.
Matrix gradient(const SoftmaxModel& model, const Batch& batch, double l2);

struct FitReport {
  SoftmaxModel model;
  std::vector<double> loss_history;  // objective after each accepted epoch, [0] at init
  int epochs = 0;
  double final_gradient_norm = 0.0;
};

// Full-batch gradient descent from zero weights. A step that would raise the
// objective is retried with half the learning rate, so loss_history is
// non-increasing. Stops when ||gradient|| < gradient_tolerance or after
// max_epochs. Throws ArgumentError on empty input, ragged input or a target
// outside {1..num_classes}.
FitReport fit_report(std::span<const std::vector<double>> inputs, std::span<const int> targets,
                     int num_classes, const TrainConfig& config);

SoftmaxModel fit(std::span<const std::vector<double>> inputs, std::span<const int> targets,
                 int num_classes, const TrainConfig& config);

}  // namespace mcc
