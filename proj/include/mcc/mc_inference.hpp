#pragma once

// Test-time Monte Carlo decoding.
//
// mc_decode draws complete paths from the chain and keeps the best one seen
// (strict improvement only). population_decode repeatedly picks a chain from
// a weighted population and runs the same inner loop from the incumbent.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mcc/chain.hpp"
#include "mcc/core_data.hpp"
#include "mcc/random.hpp"

namespace mcc {

enum class InferenceGoal { ExactMatch, Hamming };

std::string_view to_string(InferenceGoal goal);
InferenceGoal parse_inference_goal(std::string_view text);

struct InferenceResult {
  LabelVector prediction;
  // Joint density for ExactMatch; sum of label marginals for Hamming.
  double score = 0.0;
  std::size_t samples_used = 0;
};

struct DecodeOptions {
  InferenceGoal goal = InferenceGoal::ExactMatch;
  long iterations = 100;  // T_y
  // Starting vector; greedy chain prediction when empty.
  std::optional<LabelVector> initial;
  // Start from a uniformly random label vector instead of the greedy one.
  bool random_initial = false;
  // Monte Carlo draws for label marginals beyond kExactMarginalCap paths.
  std::size_t marginal_samples = 1000;
};

InferenceResult mc_decode(const ChainModel& model, std::span<const double> x,
                          const DecodeOptions& options, Rng& rng);

// Hamming decoding by per-label argmax of the marginals.
InferenceResult hamming_direct_decode(const ChainModel& model, std::span<const double> x, Rng& rng,
                                      std::size_t marginal_samples = 1000);

struct WeightedChain {
  const ChainModel* model;
  double weight;
};

struct PopulationResult : InferenceResult {
  // Number of outer iterations that selected each population member.
  std::vector<std::size_t> selections;
};

// options.iterations is the inner T_y; outer_iterations is T_s. The initial
// vector defaults to the greedy prediction of the highest-weight chain. The
// incumbent is re-scored under each selected chain before its inner loop.
PopulationResult population_decode(std::span<const WeightedChain> population,
                                   std::span<const double> x, long outer_iterations,
                                   const DecodeOptions& options, Rng& rng);

struct PredictionRow {
  std::size_t index;
  InferenceResult result;
};

// CSV: index,labels,score,samples_used with labels space separated.
void write_predictions_csv(std::ostream& out, std::span<const PredictionRow> rows);

}  // namespace mcc
