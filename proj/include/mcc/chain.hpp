#pragma once

// Classifier chains: the chain-rule factorisation
//   p(y_s | x) = p(y_{s_1} | x) * prod_l p(y_{s_l} | x, y_{s_1}, ..., y_{s_{l-1}})
// together with its decoders (greedy, exhaustive, ancestral sampling), label
// marginals, and the independent-classifiers baseline.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mcc/classifier.hpp"
#include "mcc/core_data.hpp"
#include "mcc/random.hpp"

namespace mcc {

inline constexpr std::uint64_t kDefaultExhaustiveCap = std::uint64_t{1} << 20;
inline constexpr std::uint64_t kExactMarginalCap = 4096;

class ChainModel {
 public:
  // links[l] predicts label order[l] from x followed by one-hot encodings of
  // the labels at positions 0..l-1. Input dimensions and class counts are
  // checked against space and feature_dim.
  ChainModel(LabelSpace space, std::size_t feature_dim, LabelOrder order,
             std::vector<ClassifierPtr> links);

  const LabelSpace& space() const noexcept { return space_; }
  std::size_t feature_dim() const noexcept { return feature_dim_; }
  const LabelOrder& order() const noexcept { return order_; }
  std::size_t num_links() const noexcept { return links_.size(); }
  const ProbabilisticClassifier& link(std::size_t position) const { return *links_[position]; }
  const std::vector<ClassifierPtr>& links() const noexcept { return links_; }

  // Class count of the label at chain position l (0-based).
  int position_classes(std::size_t position) const {
    return space_.classes(static_cast<std::size_t>(order_[position] - 1));
  }

  nlohmann::json to_json() const;
  static ChainModel from_json(const nlohmann::json& j);

 private:
  LabelSpace space_;
  std::size_t feature_dim_;
  LabelOrder order_;
  std::vector<ClassifierPtr> links_;
};

// Input dimension of the link at chain position `position`.
std::size_t link_input_dim(const LabelSpace& space, std::size_t feature_dim,
                           const LabelOrder& order, std::size_t position);

// Reusable scratch buffer holding x followed by the one-hot prefix of a path.
// Walks the chain one position at a time without reallocating.
class LinkInput {
 public:
  LinkInput(const ChainModel& model, std::span<const double> x);

  // Input for the link at `position` (0-based); only the one-hot blocks of
  // positions < position are meaningful.
  std::span<const double> at(std::size_t position) const;
  // Records class c (1-based) at chain position `position`.
  void set(std::size_t position, int c);

 private:
  const ChainModel* model_;
  std::vector<std::size_t> offsets_;
  std::vector<int> current_;
  std::vector<double> buffer_;
};

// Product of the link conditionals along y (y in original label order).
double joint_density(const ChainModel& model, std::span<const double> x, const LabelVector& y);

// Per-link argmax conditioned on earlier argmaxes; ties to the lowest class.
LabelVector greedy_predict(const ChainModel& model, std::span<const double> x);

struct ScoredPrediction {
  LabelVector labels;
  double probability = 0.0;
};

// Exact argmax of joint_density over all label vectors; ties go to the
// lexicographically smallest vector. Throws IntractableError above cap.
ScoredPrediction exhaustive_predict(const ChainModel& model, std::span<const double> x,
                                    std::uint64_t cap = kDefaultExhaustiveCap);

// Ancestral sample, link by link. probability equals joint_density(labels).
ScoredPrediction sample_path(const ChainModel& model, std::span<const double> x, Rng& rng);

// Visits every label vector with its joint density. Throws above cap.
void enumerate_paths(const ChainModel& model, std::span<const double> x, std::uint64_t cap,
                     const std::function<void(const LabelVector&, double)>& visit);

enum class MarginalMode { Exact, MonteCarlo };

struct MarginalSpec {
  MarginalMode mode = MarginalMode::Exact;
  std::size_t samples = 1000;  // Monte Carlo only
};

// Distribution of the label at chain position `position` (0-based) given
// only x. Exact mode sums joint densities (requires total paths <= 4096,
// otherwise IntractableError); Monte Carlo mode uses class frequencies over
// sampled paths.
std::vector<double> marginal(const ChainModel& model, std::span<const double> x,
                             std::size_t position, const MarginalSpec& spec, Rng* rng = nullptr);

// Marginals of every label, indexed by original label (0-based), in one pass.
std::vector<std::vector<double>> label_marginals(const ChainModel& model,
                                                 std::span<const double> x,
                                                 const MarginalSpec& spec, Rng* rng = nullptr);

// Exact when the space has at most kExactMarginalCap paths, otherwise Monte
// Carlo with `mc_samples` draws from rng.
std::vector<std::vector<double>> auto_label_marginals(const ChainModel& model,
                                                      std::span<const double> x, Rng& rng,
                                                      std::size_t mc_samples = 1000);

// Trains every link of the chain on gold (not predicted) earlier labels.
ChainModel train_chain(const Dataset& train, const LabelOrder& order, const TrainConfig& config);

// Link at chain position prefix.size()-1 for the chain whose first positions
// hold `prefix`: predicts label prefix.back() from x and the earlier labels.
ClassifierPtr train_link(const Dataset& train, std::span<const int> prefix,
                         const TrainConfig& config);

// Independent classifiers: one model per label on x alone.
class ICModel {
 public:
  ICModel(LabelSpace space, std::size_t feature_dim, std::vector<ClassifierPtr> classifiers);

  const LabelSpace& space() const noexcept { return space_; }
  std::size_t feature_dim() const noexcept { return feature_dim_; }
  const ProbabilisticClassifier& classifier(std::size_t label) const { return *classifiers_[label]; }

  nlohmann::json to_json() const;
  static ICModel from_json(const nlohmann::json& j);

 private:
  LabelSpace space_;
  std::size_t feature_dim_;
  std::vector<ClassifierPtr> classifiers_;
};

ICModel train_ic(const Dataset& train, const TrainConfig& config);
LabelVector ic_predict(const ICModel& model, std::span<const double> x);
// Product of per-label probabilities.
double ic_joint_density(const ICModel& model, std::span<const double> x, const LabelVector& y);

// Restores a link from its JSON form (softmax weights or explicit table).
ClassifierPtr classifier_from_json(const nlohmann::json& j);

}  // namespace mcc
