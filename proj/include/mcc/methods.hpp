#pragma once

// The compared methods as train/predict pairs:
//   ic      independent classifiers
//   cc      classifier chain, greedy decoding
//   pcc     classifier chain, exhaustive decoding
//   mcc     classifier chain, Monte Carlo decoding
//   mscc    searched order (hill climb) + Monte Carlo decoding
//   pmscc   searched population of orders + population decoding
//   ptmscc  pmscc with the tempered proposal

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mcc/chain.hpp"
#include "mcc/mc_inference.hpp"
#include "mcc/order_search.hpp"
#include "mcc/payoff.hpp"

namespace mcc {

enum class Method { IC, CC, PCC, MCC, MsCC, PMsCC, PtMsCC };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);

struct MethodSpec {
  Method method = Method::CC;
  long ty = 100;                    // T_y
  long ts = 50;                     // T_s
  std::size_t population = 10;      // M
  double beta = 0.03;
  std::optional<long> tempering_start;  // T_p, defaults to ts / 2
  PayoffKind payoff = PayoffKind::EmSum;
  // Overrides the method's default proposal (uniform, tempered for ptmscc).
  std::optional<ProposalKind::Type> proposal;
  InferenceGoal goal = InferenceGoal::ExactMatch;
  TrainConfig train;
  std::uint64_t pcc_cap = kDefaultExhaustiveCap;
  double build_fraction = kDefaultBuildFraction;
  // Random (seeded) initial order for cc/pcc/mcc and the searches instead of
  // the dataset's own order.
  bool random_order = false;

  ProposalKind proposal_kind() const;
  long effective_tempering_start() const;
  // Throws ArgumentError on non-positive counts or beta.
  void validate() const;
};

nlohmann::json to_json(const MethodSpec& spec);

struct PopulationMember {
  ChainModel chain;
  double weight;
};

struct PopulationModel {
  std::vector<PopulationMember> members;
};

using TrainedModel = std::variant<ICModel, ChainModel, PopulationModel>;

struct TrainOutcome {
  TrainedModel model;
  std::optional<SearchTrace> trace;           // mscc
  std::optional<OrderPopulation> population;  // pmscc, ptmscc
};

// What the search methods start from: the payoff context on a build/validate
// split of train, a random initial order and the seed of the search rng.
struct SearchSetup {
  PayoffContext context;
  LabelOrder initial;
  std::uint64_t search_seed;
};

SearchSetup search_setup(const Dataset& train, const MethodSpec& spec, std::uint64_t seed);

// Trains the method on `train`. Search methods score orders on an internal
// build/validate split of `train` and then refit the chosen chains on all of
// `train`.
TrainOutcome fit_method(const Dataset& train, const MethodSpec& spec, std::uint64_t seed);

// Decodes one instance. rng feeds the Monte Carlo decoders only.
InferenceResult predict_with(const TrainedModel& model, const MethodSpec& spec,
                             std::span<const double> x, Rng& rng);

// Decodes every instance with rng streams derived from (seed, index).
std::vector<InferenceResult> predict_all(const TrainedModel& model, const MethodSpec& spec,
                                         const Dataset& data, std::uint64_t seed);

// Population weights turned into non-negative selection weights. Log-domain
// payoffs are exponentiated relative to their maximum.
std::vector<double> selection_weights(std::span<const double> payoffs, PayoffKind kind);

nlohmann::json to_json(const TrainedModel& model);
TrainedModel trained_model_from_json(const nlohmann::json& j);

}  // namespace mcc
