#include "mcc/mc_inference.hpp"

#include <algorithm>
#include <ostream>
#include <string>

#include "mcc/error.hpp"
#include "format.hpp"

namespace mcc {

std::string_view to_string(InferenceGoal goal) {
  return goal == InferenceGoal::ExactMatch ? "exact-match" : "hamming";
}

InferenceGoal parse_inference_goal(std::string_view text) {
  if (text == "exact-match" || text == "em") return InferenceGoal::ExactMatch;
  if (text == "hamming" || text == "ham") return InferenceGoal::Hamming;
  throw ArgumentError("unknown inference goal '" + std::string(text) + "'");
}

namespace {

using Marginals = std::vector<std::vector<double>>;

double hamming_score(const Marginals& marginals, const LabelVector& y) {
  double s = 0.0;
  for (std::size_t l = 0; l < y.size(); ++l) s += marginals[l][y[l] - 1];
  return s;
}

double score_of(const ChainModel& model, std::span<const double> x, InferenceGoal goal,
                const Marginals* marginals, const LabelVector& y) {
  return goal == InferenceGoal::ExactMatch ? joint_density(model, x, y)
                                           : hamming_score(*marginals, y);
}

LabelVector random_vector(const LabelSpace& space, Rng& rng) {
  std::vector<int> y(space.num_labels());
  for (std::size_t l = 0; l < y.size(); ++l) {
    y[l] = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(space.classes(l)))) + 1;
  }
  return LabelVector(std::move(y));
}

// Draws `iterations` paths and keeps the best strictly improving candidate,
// starting from `start`.
InferenceResult improve(const ChainModel& model, std::span<const double> x, InferenceGoal goal,
                        long iterations, const Marginals* marginals, LabelVector start, Rng& rng) {
  InferenceResult r;
  r.score = score_of(model, x, goal, marginals, start);
  r.prediction = std::move(start);
  for (long t = 0; t < iterations; ++t) {
    auto draw = sample_path(model, x, rng);
    const double s = goal == InferenceGoal::ExactMatch ? draw.probability
                                                       : hamming_score(*marginals, draw.labels);
    if (s > r.score) {
      r.score = s;
      r.prediction = std::move(draw.labels);
    }
  }
  r.samples_used = static_cast<std::size_t>(iterations);
  return r;
}

LabelVector starting_vector(const ChainModel& model, std::span<const double> x,
                            const DecodeOptions& options, Rng& rng) {
  if (options.initial) {
    model.space().validate(*options.initial);
    return *options.initial;
  }
  if (options.random_initial) return random_vector(model.space(), rng);
  return greedy_predict(model, x);
}

}  // namespace

InferenceResult mc_decode(const ChainModel& model, std::span<const double> x,
                          const DecodeOptions& options, Rng& rng) {
  if (options.iterations < 1) throw ArgumentError("Monte Carlo decoding needs T_y >= 1");
  auto start = starting_vector(model, x, options, rng);
  Marginals marginals;
  if (options.goal == InferenceGoal::Hamming) {
    marginals = auto_label_marginals(model, x, rng, options.marginal_samples);
  }
  return improve(model, x, options.goal, options.iterations, &marginals, std::move(start), rng);
}

InferenceResult hamming_direct_decode(const ChainModel& model, std::span<const double> x, Rng& rng,
                                      std::size_t marginal_samples) {
  const auto marginals = auto_label_marginals(model, x, rng, marginal_samples);
  std::vector<int> y(marginals.size());
  for (std::size_t l = 0; l < y.size(); ++l) y[l] = argmax_class(marginals[l]);
  InferenceResult r;
  r.prediction = LabelVector(std::move(y));
  r.score = hamming_score(marginals, r.prediction);
  return r;
}

PopulationResult population_decode(std::span<const WeightedChain> population,
                                   std::span<const double> x, long outer_iterations,
                                   const DecodeOptions& options, Rng& rng) {
  if (population.empty()) throw ArgumentError("population decoding needs at least one chain");
  if (outer_iterations < 1 || options.iterations < 1) {
    throw ArgumentError("population decoding needs T_s >= 1 and T_y >= 1");
  }
  std::vector<double> weights;
  double total = 0.0;
  for (const auto& member : population) {
    if (!member.model) throw ArgumentError("population member has no model");
    if (!(member.weight >= 0.0)) throw ArgumentError("population weights must be non-negative");
    weights.push_back(member.weight);
    total += member.weight;
  }
  if (!(total > 0.0)) throw ArgumentError("population weights must not all be zero");
  const auto& space = population.front().model->space();
  for (const auto& member : population) {
    if (!(member.model->space() == space)) throw StructuralError("population chains disagree on the label space");
  }

  const auto head = static_cast<std::size_t>(
      std::max_element(weights.begin(), weights.end()) - weights.begin());
  LabelVector incumbent = starting_vector(*population[head].model, x, options, rng);

  PopulationResult result;
  result.selections.assign(population.size(), 0);
  std::vector<Marginals> marginals(population.size());
  std::vector<bool> have_marginals(population.size(), false);

  for (long t = 0; t < outer_iterations; ++t) {
    const auto j = sample_categorical(weights, rng);
    ++result.selections[j];
    const ChainModel& model = *population[j].model;
    if (options.goal == InferenceGoal::Hamming && !have_marginals[j]) {
      marginals[j] = auto_label_marginals(model, x, rng, options.marginal_samples);
      have_marginals[j] = true;
    }
    // The incumbent is re-scored under the selected chain inside improve().
    auto r = improve(model, x, options.goal, options.iterations, &marginals[j],
                     std::move(incumbent), rng);
    incumbent = std::move(r.prediction);
    result.score = r.score;
    result.samples_used += r.samples_used;
  }
  result.prediction = std::move(incumbent);
  return result;
}

void write_predictions_csv(std::ostream& out, std::span<const PredictionRow> rows) {
  out << "index,labels,score,samples_used\n";
  for (const auto& row : rows) {
    out << row.index << ',';
    const auto& y = row.result.prediction;
    for (std::size_t l = 0; l < y.size(); ++l) out << (l ? " " : "") << y[l];
    out << ',' << detail::format_real(row.result.score) << ',' << row.result.samples_used << '\n';
  }
}

}  // namespace mcc
