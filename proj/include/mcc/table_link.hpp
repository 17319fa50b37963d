#pragma once

// Chain links given by explicit conditional probability tables. They ignore
// the feature part of their input and read the earlier labels from its
// one-hot tail, which makes hand-built chains with known joints possible.

#include <functional>
#include <span>
#include <vector>

#include "mcc/chain.hpp"
#include "mcc/classifier.hpp"

namespace mcc {

class TableLink final : public ProbabilisticClassifier {
 public:
  // Returns the distribution of this link's label given the earlier labels
  // (1-based classes, in chain order).
  using Conditional = std::function<std::vector<double>(std::span<const int> prefix)>;

  // feature_dim: length of the feature prefix of each input.
  // prefix_classes: class counts of the earlier labels in chain order.
  TableLink(int num_classes, std::size_t feature_dim, std::vector<int> prefix_classes,
            const Conditional& conditional);

  int num_classes() const override { return num_classes_; }
  std::size_t input_dim() const override { return input_dim_; }
  std::vector<double> predict_distribution(std::span<const double> input) const override;
  nlohmann::json to_json() const override;

  static TableLink from_json(const nlohmann::json& j);

 private:
  TableLink() = default;

  int num_classes_ = 0;
  std::size_t feature_dim_ = 0;
  std::size_t input_dim_ = 0;
  std::vector<int> prefix_classes_;
  // Row-major: one row of num_classes_ entries per prefix, mixed radix with
  // the first earlier label most significant.
  std::vector<double> table_;
};

// Chain whose link at each position is a TableLink built from
// conditional(position, prefix).
using PositionConditional =
    std::function<std::vector<double>(std::size_t position, std::span<const int> prefix)>;
ChainModel chain_from_conditionals(const LabelSpace& space, std::size_t feature_dim,
                                   const LabelOrder& order, const PositionConditional& conditional);

// Chain realising an explicit joint table exactly under any order. joint is
// indexed by label vectors in original order, mixed radix with label 1 most
// significant, and must sum to 1.
ChainModel chain_from_joint(const LabelSpace& space, std::size_t feature_dim,
                            const LabelOrder& order, std::span<const double> joint);

}  // namespace mcc
