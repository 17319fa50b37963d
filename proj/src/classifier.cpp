#include "mcc/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mcc/error.hpp"
#include "mcc/random.hpp"

namespace mcc {

std::size_t sample_categorical(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw ArgumentError("categorical weights must have a positive sum");
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (u < acc) return i;
  }
  // Rounding left u at or beyond the accumulated total.
  return last_positive;
}

int argmax_class(std::span<const double> distribution) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < distribution.size(); ++c) {
    if (distribution[c] > distribution[best]) best = c;
  }
  return static_cast<int>(best) + 1;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

SoftmaxModel::SoftmaxModel(int num_classes, std::size_t dim) : weights_(num_classes, dim + 1) {
  if (num_classes < 2) throw ArgumentError("softmax model needs at least 2 classes");
}

SoftmaxModel::SoftmaxModel(Matrix weights) : weights_(std::move(weights)) {
  if (weights_.rows() < 2 || weights_.cols() < 1) {
    throw ArgumentError("softmax weights must be K x (dim + 1) with K >= 2");
  }
  for (double w : weights_.data()) {
    if (!std::isfinite(w)) throw ArgumentError("softmax weights must be finite");
  }
}

namespace {

// Writes class probabilities for input into out (size K).
void softmax_into(const Matrix& w, std::span<const double> input, std::span<double> out) {
  const std::size_t dim = w.cols() - 1;
  double max_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < w.rows(); ++k) {
    const auto row = w.row(k);
    double score = row[dim];
    for (std::size_t d = 0; d < dim; ++d) score += row[d] * input[d];
    out[k] = score;
    max_score = std::max(max_score, score);
  }
  double total = 0.0;
  for (auto& v : out) {
    v = std::exp(v - max_score);
    total += v;
  }
  for (auto& v : out) v /= total;
}

void check_batch(const Batch& batch, const SoftmaxModel& model) {
  if (batch.inputs.size() != batch.targets.size()) {
    throw ArgumentError("inputs and targets differ in length");
  }
  for (std::size_t n = 0; n < batch.inputs.size(); ++n) {
    if (batch.inputs[n].size() != model.input_dim()) {
      throw ArgumentError("input " + std::to_string(n) + " has dimension " +
                          std::to_string(batch.inputs[n].size()) + ", expected " +
                          std::to_string(model.input_dim()));
    }
    if (batch.targets[n] < 1 || batch.targets[n] > model.num_classes()) {
      throw ArgumentError("target " + std::to_string(batch.targets[n]) + " outside 1.." +
                          std::to_string(model.num_classes()));
    }
  }
}

double l2_penalty(const Matrix& w, double l2) {
  if (l2 == 0.0) return 0.0;
  const std::size_t dim = w.cols() - 1;
  double s = 0.0;
  for (std::size_t k = 0; k < w.rows(); ++k) {
    for (std::size_t d = 0; d < dim; ++d) s += w(k, d) * w(k, d);
  }
  return 0.5 * l2 * s;
}

// Objective and gradient in one pass over the batch.
double objective_and_gradient(const Matrix& w, const Batch& batch, double l2, Matrix* grad) {
  const std::size_t K = w.rows();
  const std::size_t dim = w.cols() - 1;
  std::vector<double> p(K);
  double nll = 0.0;
  if (grad) *grad = Matrix(K, dim + 1);
  for (std::size_t n = 0; n < batch.inputs.size(); ++n) {
    const auto& x = batch.inputs[n];
    softmax_into(w, x, p);
    const auto target = static_cast<std::size_t>(batch.targets[n] - 1);
    nll -= std::log(std::max(p[target], std::numeric_limits<double>::min()));
    if (!grad) continue;
    for (std::size_t k = 0; k < K; ++k) {
      const double residual = p[k] - (k == target ? 1.0 : 0.0);
      auto row = grad->row(k);
      for (std::size_t d = 0; d < dim; ++d) row[d] += residual * x[d];
      row[dim] += residual;
    }
  }
  const double scale = batch.inputs.empty() ? 0.0 : 1.0 / static_cast<double>(batch.inputs.size());
  if (grad) {
    for (auto& g : grad->data()) g *= scale;
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t d = 0; d < dim; ++d) (*grad)(k, d) += l2 * w(k, d);
    }
  }
  return nll * scale + l2_penalty(w, l2);
}

}  // namespace

std::vector<double> SoftmaxModel::predict_distribution(std::span<const double> input) const {
  if (input.size() != input_dim()) {
    throw ArgumentError("input dimension " + std::to_string(input.size()) + ", model expects " +
                        std::to_string(input_dim()));
  }
  std::vector<double> p(weights_.rows());
  softmax_into(weights_, input, p);
  return p;
}

nlohmann::json SoftmaxModel::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < weights_.rows(); ++k) {
    const auto row = weights_.row(k);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"K", num_classes()}, {"dim", input_dim()}, {"weights", std::move(rows)}};
}

SoftmaxModel SoftmaxModel::from_json(const nlohmann::json& j) {
  const int K = j.at("K").get<int>();
  const auto dim = j.at("dim").get<std::size_t>();
  const auto& rows = j.at("weights");
  if (K < 2 || rows.size() != static_cast<std::size_t>(K)) {
    throw ParseError(0, "softmax model: weights must have K rows");
  }
  Matrix w(K, dim + 1);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != dim + 1) throw ParseError(0, "softmax model: weight row length != dim + 1");
    for (std::size_t d = 0; d <= dim; ++d) w(k, d) = rows[k][d].get<double>();
  }
  return SoftmaxModel(std::move(w));
}

double objective(const SoftmaxModel& model, const Batch& batch, double l2) {
  check_batch(batch, model);
  return objective_and_gradient(model.weights(), batch, l2, nullptr);
}

Matrix gradient(const SoftmaxModel& model, const Batch& batch, double l2) {
  check_batch(batch, model);
  Matrix g;
  objective_and_gradient(model.weights(), batch, l2, &g);
  return g;
}

FitReport fit_report(std::span<const std::vector<double>> inputs, std::span<const int> targets,
                     int num_classes, const TrainConfig& config) {
  if (inputs.empty()) throw ArgumentError("cannot fit on an empty training set");
  if (config.learning_rate <= 0.0 || config.max_epochs < 0 || config.l2 < 0.0) {
    throw ArgumentError("invalid training configuration");
  }
  FitReport report{SoftmaxModel(num_classes, inputs.front().size()), {}, 0, 0.0};
  const Batch batch{inputs, targets};
  check_batch(batch, report.model);

  Matrix& w = report.model.weights();
  Matrix g;
  double loss = objective_and_gradient(w, batch, config.l2, &g);
  report.loss_history.push_back(loss);

  double rate = config.learning_rate;
  Matrix candidate(w.rows(), w.cols());
  Matrix candidate_grad;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    if (g.frobenius_norm() < config.gradient_tolerance) break;
    bool accepted = false;
    // Halve the step until the objective does not increase.
    for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
      for (std::size_t i = 0; i < w.data().size(); ++i) {
        candidate.data()[i] = w.data()[i] - rate * g.data()[i];
      }
      const double candidate_loss = objective_and_gradient(candidate, batch, config.l2, &candidate_grad);
      if (candidate_loss <= loss) {
        std::swap(w, candidate);
        std::swap(g, candidate_grad);
        loss = candidate_loss;
        accepted = true;
      } else {
        rate *= 0.5;
      }
    }
    if (!accepted) break;
    report.loss_history.push_back(loss);
    ++report.epochs;
  }
  report.final_gradient_norm = g.frobenius_norm();
  return report;
}

SoftmaxModel fit(std::span<const std::vector<double>> inputs, std::span<const int> targets,
                 int num_classes, const TrainConfig& config) {
  return fit_report(inputs, targets, num_classes, config).model;
}

}  // namespace mcc
