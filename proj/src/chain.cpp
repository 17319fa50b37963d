#include "mcc/chain.hpp"

#include <algorithm>
#include <string>

#include "mcc/error.hpp"
#include "mcc/table_link.hpp"

namespace mcc {

namespace {

nlohmann::json space_to_json(const LabelSpace& space) {
  return {{"L", space.num_labels()}, {"K", space.class_counts()}};
}

LabelSpace space_from_json(const nlohmann::json& j) {
  auto ks = j.at("K").get<std::vector<int>>();
  if (j.contains("L") && j.at("L").get<std::size_t>() != ks.size()) {
    throw ParseError(0, "space: L does not match the number of K values");
  }
  return LabelSpace(std::move(ks));
}

void check_x(const ChainModel& model, std::span<const double> x) {
  if (x.size() != model.feature_dim()) {
    throw StructuralError("feature vector has dimension " + std::to_string(x.size()) +
                          ", model expects " + std::to_string(model.feature_dim()));
  }
}

std::uint64_t checked_paths(const LabelSpace& space, std::uint64_t cap, const char* what) {
  const auto total = space.total_paths(cap);
  if (!total) throw IntractableError(std::string(what) + ": label space has too many paths", cap);
  return *total;
}

}  // namespace

std::size_t link_input_dim(const LabelSpace& space, std::size_t feature_dim,
                           const LabelOrder& order, std::size_t position) {
  std::size_t dim = feature_dim;
  for (std::size_t k = 0; k < position; ++k) dim += space.classes(order[k] - 1);
  return dim;
}

ChainModel::ChainModel(LabelSpace space, std::size_t feature_dim, LabelOrder order,
                       std::vector<ClassifierPtr> links)
    : space_(std::move(space)),
      feature_dim_(feature_dim),
      order_(std::move(order)),
      links_(std::move(links)) {
  if (order_.size() != space_.num_labels() || links_.size() != space_.num_labels()) {
    throw StructuralError("chain needs exactly one link per label");
  }
  for (std::size_t pos = 0; pos < links_.size(); ++pos) {
    if (!links_[pos]) throw StructuralError("chain link is null");
    if (links_[pos]->num_classes() != position_classes(pos)) {
      throw StructuralError("link " + std::to_string(pos + 1) + " has the wrong class count");
    }
    if (links_[pos]->input_dim() != link_input_dim(space_, feature_dim_, order_, pos)) {
      throw StructuralError("link " + std::to_string(pos + 1) + " has the wrong input dimension");
    }
  }
}

nlohmann::json ChainModel::to_json() const {
  nlohmann::json links = nlohmann::json::array();
  for (const auto& link : links_) links.push_back(link->to_json());
  return {{"order", order_.perm()}, {"space", space_to_json(space_)}, {"links", std::move(links)}};
}

ChainModel ChainModel::from_json(const nlohmann::json& j) {
  LabelOrder order(j.at("order").get<std::vector<int>>());
  auto space = space_from_json(j.at("space"));
  std::vector<ClassifierPtr> links;
  for (const auto& lj : j.at("links")) links.push_back(classifier_from_json(lj));
  if (links.empty()) throw ParseError(0, "chain model has no links");
  const auto dim = links.front()->input_dim();
  return ChainModel(std::move(space), dim, std::move(order), std::move(links));
}

ClassifierPtr classifier_from_json(const nlohmann::json& j) {
  if (j.contains("weights")) return std::make_shared<SoftmaxModel>(SoftmaxModel::from_json(j));
  if (j.contains("table")) return std::make_shared<TableLink>(TableLink::from_json(j));
  throw ParseError(0, "unknown classifier JSON");
}

LinkInput::LinkInput(const ChainModel& model, std::span<const double> x)
    : model_(&model), offsets_(model.num_links() + 1), current_(model.num_links(), 0) {
  check_x(model, x);
  offsets_[0] = x.size();
  for (std::size_t pos = 0; pos < model.num_links(); ++pos) {
    offsets_[pos + 1] = offsets_[pos] + static_cast<std::size_t>(model.position_classes(pos));
  }
  buffer_.assign(offsets_.back(), 0.0);
  std::copy(x.begin(), x.end(), buffer_.begin());
}

std::span<const double> LinkInput::at(std::size_t position) const {
  return {buffer_.data(), offsets_[position]};
}

void LinkInput::set(std::size_t position, int c) {
  if (current_[position] > 0) buffer_[offsets_[position] + current_[position] - 1] = 0.0;
  buffer_[offsets_[position] + c - 1] = 1.0;
  current_[position] = c;
}

double joint_density(const ChainModel& model, std::span<const double> x, const LabelVector& y) {
  model.space().validate(y);
  LinkInput in(model, x);
  double prob = 1.0;
  for (std::size_t pos = 0; pos < model.num_links(); ++pos) {
    const int c = y[model.order()[pos] - 1];
    prob *= model.link(pos).predict_distribution(in.at(pos))[c - 1];
    in.set(pos, c);
  }
  return prob;
}

LabelVector greedy_predict(const ChainModel& model, std::span<const double> x) {
  LinkInput in(model, x);
  std::vector<int> y(model.num_links());
  for (std::size_t pos = 0; pos < model.num_links(); ++pos) {
    const int c = argmax_class(model.link(pos).predict_distribution(in.at(pos)));
    y[model.order()[pos] - 1] = c;
    in.set(pos, c);
  }
  return LabelVector(std::move(y));
}

ScoredPrediction sample_path(const ChainModel& model, std::span<const double> x, Rng& rng) {
  LinkInput in(model, x);
  std::vector<int> y(model.num_links());
  double prob = 1.0;
  for (std::size_t pos = 0; pos < model.num_links(); ++pos) {
    const auto p = model.link(pos).predict_distribution(in.at(pos));
    const auto idx = sample_categorical(p, rng);
    const int c = static_cast<int>(idx) + 1;
    prob *= p[idx];
    y[model.order()[pos] - 1] = c;
    in.set(pos, c);
  }
  return {LabelVector(std::move(y)), prob};
}

namespace {

// Depth-first walk of the label tree. visit(y, prob) at leaves; descend(prob)
// decides whether a partial path is worth expanding.
template <typename Visit, typename Descend>
void walk_tree(const ChainModel& model, LinkInput& in, std::vector<int>& y, std::size_t pos,
               double prob, Visit& visit, Descend& descend) {
  if (pos == model.num_links()) {
    visit(y, prob);
    return;
  }
  const auto p = model.link(pos).predict_distribution(in.at(pos));
  const auto label = static_cast<std::size_t>(model.order()[pos] - 1);
  for (std::size_t c = 0; c < p.size(); ++c) {
    const double next = prob * p[c];
    if (!descend(next)) continue;
    y[label] = static_cast<int>(c) + 1;
    in.set(pos, y[label]);
    walk_tree(model, in, y, pos + 1, next, visit, descend);
  }
}

}  // namespace

void enumerate_paths(const ChainModel& model, std::span<const double> x, std::uint64_t cap,
                     const std::function<void(const LabelVector&, double)>& visit) {
  checked_paths(model.space(), cap, "enumerate_paths");
  LinkInput in(model, x);
  std::vector<int> y(model.num_links(), 1);
  auto leaf = [&](const std::vector<int>& v, double prob) { visit(LabelVector(v), prob); };
  auto always = [](double) { return true; };
  walk_tree(model, in, y, 0, 1.0, leaf, always);
}

ScoredPrediction exhaustive_predict(const ChainModel& model, std::span<const double> x,
                                    std::uint64_t cap) {
  checked_paths(model.space(), cap, "exhaustive_predict");
  LinkInput in(model, x);
  std::vector<int> y(model.num_links(), 1);
  std::vector<int> best_y;
  double best = -1.0;
  auto leaf = [&](const std::vector<int>& v, double prob) {
    if (prob > best || (prob == best && v < best_y)) {
      best = prob;
      best_y = v;
    }
  };
  // Path probabilities only shrink with depth, so a partial path already
  // below the incumbent cannot win (equal ones may still tie).
  auto promising = [&](double prob) { return prob >= best; };
  walk_tree(model, in, y, 0, 1.0, leaf, promising);
  return {LabelVector(std::move(best_y)), best};
}

std::vector<std::vector<double>> label_marginals(const ChainModel& model,
                                                 std::span<const double> x,
                                                 const MarginalSpec& spec, Rng* rng) {
  const auto& space = model.space();
  std::vector<std::vector<double>> out(space.num_labels());
  for (std::size_t l = 0; l < out.size(); ++l) out[l].assign(space.classes(l), 0.0);

  if (spec.mode == MarginalMode::Exact) {
    if (!space.total_paths(kExactMarginalCap)) {
      throw IntractableError("exact marginals need at most 4096 paths; use Monte Carlo mode",
                             kExactMarginalCap);
    }
    LinkInput in(model, x);
    std::vector<int> y(model.num_links(), 1);
    auto leaf = [&](const std::vector<int>& v, double prob) {
      for (std::size_t l = 0; l < v.size(); ++l) out[l][v[l] - 1] += prob;
    };
    auto always = [](double) { return true; };
    walk_tree(model, in, y, 0, 1.0, leaf, always);
    return out;
  }

  if (!rng) throw ArgumentError("Monte Carlo marginals need a random engine");
  if (spec.samples == 0) throw ArgumentError("Monte Carlo marginals need at least one sample");
  for (std::size_t t = 0; t < spec.samples; ++t) {
    const auto draw = sample_path(model, x, *rng);
    for (std::size_t l = 0; l < draw.labels.size(); ++l) out[l][draw.labels[l] - 1] += 1.0;
  }
  const double inv = 1.0 / static_cast<double>(spec.samples);
  for (auto& dist : out) {
    for (auto& v : dist) v *= inv;
  }
  return out;
}

std::vector<double> marginal(const ChainModel& model, std::span<const double> x,
                             std::size_t position, const MarginalSpec& spec, Rng* rng) {
  if (position >= model.num_links()) throw ArgumentError("chain position out of range");
  if (position == 0) {
    check_x(model, x);
    return model.link(0).predict_distribution(x);
  }
  return label_marginals(model, x, spec, rng)[model.order()[position] - 1];
}

std::vector<std::vector<double>> auto_label_marginals(const ChainModel& model,
                                                      std::span<const double> x, Rng& rng,
                                                      std::size_t mc_samples) {
  MarginalSpec spec;
  if (!model.space().total_paths(kExactMarginalCap)) {
    spec.mode = MarginalMode::MonteCarlo;
    spec.samples = mc_samples;
  }
  return label_marginals(model, x, spec, &rng);
}

ClassifierPtr train_link(const Dataset& train, std::span<const int> prefix,
                         const TrainConfig& config) {
  if (train.empty()) throw ArgumentError("cannot train a chain link on an empty dataset");
  if (prefix.empty()) throw ArgumentError("link prefix must name at least the target label");
  const auto& space = train.space();
  const auto target_label = static_cast<std::size_t>(prefix.back() - 1);
  const auto earlier = prefix.first(prefix.size() - 1);

  std::size_t dim = train.dim();
  for (int label : earlier) dim += space.classes(label - 1);

  std::vector<std::vector<double>> inputs;
  std::vector<int> targets;
  inputs.reserve(train.size());
  targets.reserve(train.size());
  for (const auto& inst : train.instances()) {
    std::vector<double> in(dim, 0.0);
    std::copy(inst.features.begin(), inst.features.end(), in.begin());
    std::size_t offset = train.dim();
    for (int label : earlier) {
      in[offset + inst.labels[label - 1] - 1] = 1.0;
      offset += space.classes(label - 1);
    }
    inputs.push_back(std::move(in));
    targets.push_back(inst.labels[target_label]);
  }
  return std::make_shared<SoftmaxModel>(fit(inputs, targets, space.classes(target_label), config));
}

ChainModel train_chain(const Dataset& train, const LabelOrder& order, const TrainConfig& config) {
  if (order.size() != train.space().num_labels()) {
    throw StructuralError("order length != number of labels");
  }
  std::vector<ClassifierPtr> links;
  const std::span<const int> perm(order.perm());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    links.push_back(train_link(train, perm.first(pos + 1), config));
  }
  return ChainModel(train.space(), train.dim(), order, std::move(links));
}

ICModel::ICModel(LabelSpace space, std::size_t feature_dim, std::vector<ClassifierPtr> classifiers)
    : space_(std::move(space)), feature_dim_(feature_dim), classifiers_(std::move(classifiers)) {
  if (classifiers_.size() != space_.num_labels()) {
    throw StructuralError("IC model needs one classifier per label");
  }
  for (std::size_t l = 0; l < classifiers_.size(); ++l) {
    if (!classifiers_[l] || classifiers_[l]->num_classes() != space_.classes(l) ||
        classifiers_[l]->input_dim() != feature_dim_) {
      throw StructuralError("IC classifier " + std::to_string(l + 1) + " has the wrong shape");
    }
  }
}

nlohmann::json ICModel::to_json() const {
  nlohmann::json cls = nlohmann::json::array();
  for (const auto& c : classifiers_) cls.push_back(c->to_json());
  return {{"space", space_to_json(space_)}, {"classifiers", std::move(cls)}};
}

ICModel ICModel::from_json(const nlohmann::json& j) {
  auto space = space_from_json(j.at("space"));
  std::vector<ClassifierPtr> cls;
  for (const auto& cj : j.at("classifiers")) cls.push_back(classifier_from_json(cj));
  if (cls.empty()) throw ParseError(0, "IC model has no classifiers");
  const auto dim = cls.front()->input_dim();
  return ICModel(std::move(space), dim, std::move(cls));
}

ICModel train_ic(const Dataset& train, const TrainConfig& config) {
  if (train.empty()) throw ArgumentError("cannot train on an empty dataset");
  std::vector<std::vector<double>> inputs;
  inputs.reserve(train.size());
  for (const auto& inst : train.instances()) inputs.push_back(inst.features);
  std::vector<ClassifierPtr> cls;
  for (std::size_t l = 0; l < train.space().num_labels(); ++l) {
    std::vector<int> targets;
    targets.reserve(train.size());
    for (const auto& inst : train.instances()) targets.push_back(inst.labels[l]);
    cls.push_back(std::make_shared<SoftmaxModel>(
        fit(inputs, targets, train.space().classes(l), config)));
  }
  return ICModel(train.space(), train.dim(), std::move(cls));
}

LabelVector ic_predict(const ICModel& model, std::span<const double> x) {
  std::vector<int> y(model.space().num_labels());
  for (std::size_t l = 0; l < y.size(); ++l) {
    y[l] = argmax_class(model.classifier(l).predict_distribution(x));
  }
  return LabelVector(std::move(y));
}

double ic_joint_density(const ICModel& model, std::span<const double> x, const LabelVector& y) {
  model.space().validate(y);
  double prob = 1.0;
  for (std::size_t l = 0; l < y.size(); ++l) {
    prob *= model.classifier(l).predict_distribution(x)[y[l] - 1];
  }
  return prob;
}

}  // namespace mcc
