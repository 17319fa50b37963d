#include "mcc/methods.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mcc/error.hpp"

namespace mcc {

namespace {

// Stream tags for seeds derived from a method's master seed.
constexpr std::uint64_t kOrderStream = 1;
constexpr std::uint64_t kSearchStream = 2;
constexpr std::uint64_t kSplitStream = 3;
constexpr std::uint64_t kMarginalStream = 4;
constexpr std::uint64_t kPredictStream = 0x50524544;

bool is_search(Method m) {
  return m == Method::MsCC || m == Method::PMsCC || m == Method::PtMsCC;
}

bool is_population(Method m) { return m == Method::PMsCC || m == Method::PtMsCC; }

[[noreturn]] void mismatch(const MethodSpec& spec) {
  throw ArgumentError("trained model does not match method '" + std::string(to_string(spec.method)) + "'");
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::IC: return "ic";
    case Method::CC: return "cc";
    case Method::PCC: return "pcc";
    case Method::MCC: return "mcc";
    case Method::MsCC: return "mscc";
    case Method::PMsCC: return "pmscc";
    case Method::PtMsCC: return "ptmscc";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  for (auto m : {Method::IC, Method::CC, Method::PCC, Method::MCC, Method::MsCC, Method::PMsCC,
                 Method::PtMsCC}) {
    if (text == to_string(m)) return m;
  }
  throw ArgumentError("unknown method '" + std::string(text) +
                      "' (ic|cc|pcc|mcc|mscc|pmscc|ptmscc)");
}

long MethodSpec::effective_tempering_start() const {
  return tempering_start.value_or(ts / 2);
}

ProposalKind MethodSpec::proposal_kind() const {
  const auto type = proposal.value_or(method == Method::PtMsCC ? ProposalKind::Type::TemperedSwap
                                                               : ProposalKind::Type::UniformSwap);
  if (type == ProposalKind::Type::UniformSwap) return ProposalKind::uniform();
  return ProposalKind::tempered(static_cast<int>(effective_tempering_start()), beta);
}

void MethodSpec::validate() const {
  if (ty < 1) throw ArgumentError("T_y must be positive");
  if (ts < 1) throw ArgumentError("T_s must be positive");
  if (population < 1) throw ArgumentError("population size M must be positive");
  if (!(beta > 0.0)) throw ArgumentError("beta must be positive");
  if (tempering_start && *tempering_start < 0) throw ArgumentError("T_p must be non-negative");
  if (pcc_cap < 1) throw ArgumentError("exhaustive cap must be positive");
  if (is_population(method) && ts < static_cast<long>(population)) {
    throw ArgumentError("population methods need T_s >= M");
  }
}

nlohmann::json to_json(const MethodSpec& spec) {
  const auto proposal = spec.proposal_kind();
  return {{"method", to_string(spec.method)},
          {"ty", spec.ty},
          {"ts", spec.ts},
          {"pop", spec.population},
          {"beta", spec.beta},
          {"tp", spec.effective_tempering_start()},
          {"payoff", to_string(spec.payoff)},
          {"proposal", proposal.type == ProposalKind::Type::UniformSwap ? "swap" : "tempered"},
          {"goal", to_string(spec.goal)},
          {"pcc_cap", spec.pcc_cap},
          {"build_fraction", spec.build_fraction},
          {"random_order", spec.random_order},
          {"train",
           {{"learning_rate", spec.train.learning_rate},
            {"max_epochs", spec.train.max_epochs},
            {"gradient_tolerance", spec.train.gradient_tolerance},
            {"l2", spec.train.l2}}}};
}

std::vector<double> selection_weights(std::span<const double> payoffs, PayoffKind kind) {
  std::vector<double> w(payoffs.begin(), payoffs.end());
  if (w.empty()) return w;
  if (kind == PayoffKind::EmProd || kind == PayoffKind::HamProd) {
    const double top = *std::max_element(w.begin(), w.end());
    for (auto& v : w) v = std::exp(v - top);
  }
  return w;
}

SearchSetup search_setup(const Dataset& train, const MethodSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng order_rng(derive_seed(seed, kOrderStream));
  TrainConfig config = spec.train;
  config.seed = derive_seed(seed, kMarginalStream);
  return {make_context(train, spec.build_fraction, derive_seed(seed, kSplitStream), config),
          LabelOrder::random(train.space().num_labels(), order_rng),
          derive_seed(seed, kSearchStream)};
}

TrainOutcome fit_method(const Dataset& train, const MethodSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto L = train.space().num_labels();
  Rng order_rng(derive_seed(seed, kOrderStream));
  const bool random_start = spec.random_order || is_search(spec.method);
  const auto initial = random_start ? LabelOrder::random(L, order_rng) : LabelOrder::identity(L);

  TrainConfig config = spec.train;
  config.seed = derive_seed(seed, kMarginalStream);

  if (spec.method == Method::IC) return {train_ic(train, config), {}, {}};
  if (!is_search(spec.method)) return {train_chain(train, initial, config), {}, {}};

  auto setup = search_setup(train, spec, seed);
  Rng search_rng(setup.search_seed);
  if (spec.method == Method::MsCC) {
    auto found = search_order(setup.context, spec.payoff, spec.proposal_kind(), setup.initial,
                              spec.ts, search_rng);
    return {train_chain(train, found.order, config), std::move(found.trace), {}};
  }

  auto pop = search_population(setup.context, spec.payoff, spec.proposal_kind(), setup.initial,
                               spec.ts, spec.population, search_rng);
  const auto weights = selection_weights(pop.weights, spec.payoff);
  PopulationModel model;
  for (std::size_t i = 0; i < pop.orders.size(); ++i) {
    model.members.push_back({train_chain(train, pop.orders[i], config), weights[i]});
  }
  return {std::move(model), {}, std::move(pop)};
}

InferenceResult predict_with(const TrainedModel& model, const MethodSpec& spec,
                             std::span<const double> x, Rng& rng) {
  DecodeOptions options;
  options.goal = spec.goal;
  options.iterations = spec.ty;

  if (spec.method == Method::IC) {
    const auto* ic = std::get_if<ICModel>(&model);
    if (!ic) mismatch(spec);
    InferenceResult r;
    r.prediction = ic_predict(*ic, x);
    r.score = ic_joint_density(*ic, x, r.prediction);
    return r;
  }
  if (is_population(spec.method)) {
    const auto* pop = std::get_if<PopulationModel>(&model);
    if (!pop) mismatch(spec);
    std::vector<WeightedChain> members;
    for (const auto& m : pop->members) members.push_back({&m.chain, m.weight});
    return population_decode(members, x, spec.ts, options, rng);
  }
  const auto* chain = std::get_if<ChainModel>(&model);
  if (!chain) mismatch(spec);
  switch (spec.method) {
    case Method::CC: {
      InferenceResult r;
      r.prediction = greedy_predict(*chain, x);
      r.score = joint_density(*chain, x, r.prediction);
      return r;
    }
    case Method::PCC: {
      auto best = exhaustive_predict(*chain, x, spec.pcc_cap);
      InferenceResult r;
      r.prediction = std::move(best.labels);
      r.score = best.probability;
      return r;
    }
    default:
      return mc_decode(*chain, x, options, rng);
  }
}

std::vector<InferenceResult> predict_all(const TrainedModel& model, const MethodSpec& spec,
                                         const Dataset& data, std::uint64_t seed) {
  std::vector<InferenceResult> out;
  out.reserve(data.size());
  for (std::size_t n = 0; n < data.size(); ++n) {
    Rng rng(derive_seed(seed, kPredictStream, n));
    out.push_back(predict_with(model, spec, data[n].features, rng));
  }
  return out;
}

nlohmann::json to_json(const TrainedModel& model) {
  if (const auto* ic = std::get_if<ICModel>(&model)) return ic->to_json();
  if (const auto* chain = std::get_if<ChainModel>(&model)) return chain->to_json();
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : std::get<PopulationModel>(model).members) {
    members.push_back({{"weight", m.weight}, {"chain", m.chain.to_json()}});
  }
  return {{"population", std::move(members)}};
}

TrainedModel trained_model_from_json(const nlohmann::json& j) {
  if (j.contains("classifiers")) return ICModel::from_json(j);
  if (j.contains("links")) return ChainModel::from_json(j);
  if (j.contains("population")) {
    PopulationModel pop;
    for (const auto& m : j.at("population")) {
      pop.members.push_back({ChainModel::from_json(m.at("chain")), m.at("weight").get<double>()});
    }
    if (pop.members.empty()) throw ParseError(0, "population model has no members");
    return pop;
  }
  throw ParseError(0, "unrecognised model JSON");
}

}  // namespace mcc
