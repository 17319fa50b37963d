#include "mcc/table_link.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "mcc/error.hpp"

namespace mcc {

namespace {

std::size_t product(const std::vector<int>& counts) {
  std::size_t p = 1;
  for (int k : counts) p *= static_cast<std::size_t>(k);
  return p;
}

// Decodes a mixed-radix index into 1-based classes, first entry most significant.
void decode_index(std::size_t index, const std::vector<int>& counts, std::vector<int>& out) {
  out.resize(counts.size());
  for (std::size_t i = counts.size(); i-- > 0;) {
    out[i] = static_cast<int>(index % counts[i]) + 1;
    index /= counts[i];
  }
}

void check_distribution(const std::vector<double>& p, int num_classes) {
  if (p.size() != static_cast<std::size_t>(num_classes)) {
    throw ArgumentError("conditional has " + std::to_string(p.size()) + " entries, expected " +
                        std::to_string(num_classes));
  }
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ArgumentError("conditional entries must be >= 0");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ArgumentError("conditional does not sum to 1");
}

}  // namespace

TableLink::TableLink(int num_classes, std::size_t feature_dim, std::vector<int> prefix_classes,
                     const Conditional& conditional)
    : num_classes_(num_classes),
      feature_dim_(feature_dim),
      input_dim_(feature_dim + std::accumulate(prefix_classes.begin(), prefix_classes.end(), 0)),
      prefix_classes_(std::move(prefix_classes)) {
  if (num_classes_ < 2) throw ArgumentError("table link needs at least 2 classes");
  const std::size_t rows = product(prefix_classes_);
  table_.reserve(rows * num_classes_);
  std::vector<int> prefix;
  for (std::size_t r = 0; r < rows; ++r) {
    decode_index(r, prefix_classes_, prefix);
    const auto p = conditional(prefix);
    check_distribution(p, num_classes_);
    table_.insert(table_.end(), p.begin(), p.end());
  }
}

std::vector<double> TableLink::predict_distribution(std::span<const double> input) const {
  if (input.size() != input_dim_) {
    throw ArgumentError("input dimension " + std::to_string(input.size()) + ", link expects " +
                        std::to_string(input_dim_));
  }
  std::size_t row = 0;
  std::size_t offset = feature_dim_;
  for (int k : prefix_classes_) {
    int hot = -1;
    for (int c = 0; c < k; ++c) {
      if (input[offset + c] > 0.5) hot = c;
    }
    if (hot < 0) throw ArgumentError("table link input lacks a one-hot prefix block");
    row = row * k + static_cast<std::size_t>(hot);
    offset += k;
  }
  const auto* begin = table_.data() + row * num_classes_;
  return {begin, begin + num_classes_};
}

nlohmann::json TableLink::to_json() const {
  return {{"K", num_classes_},
          {"feature_dim", feature_dim_},
          {"prefix_classes", prefix_classes_},
          {"table", table_}};
}

TableLink TableLink::from_json(const nlohmann::json& j) {
  TableLink link;
  link.num_classes_ = j.at("K").get<int>();
  link.feature_dim_ = j.at("feature_dim").get<std::size_t>();
  link.prefix_classes_ = j.at("prefix_classes").get<std::vector<int>>();
  link.table_ = j.at("table").get<std::vector<double>>();
  link.input_dim_ = link.feature_dim_ + std::accumulate(link.prefix_classes_.begin(),
                                                        link.prefix_classes_.end(), 0);
  if (link.num_classes_ < 2 || link.table_.size() != product(link.prefix_classes_) * link.num_classes_) {
    throw ParseError(0, "table link: table size does not match its shape");
  }
  return link;
}

ChainModel chain_from_conditionals(const LabelSpace& space, std::size_t feature_dim,
                                   const LabelOrder& order, const PositionConditional& conditional) {
  if (order.size() != space.num_labels()) throw StructuralError("order length != number of labels");
  std::vector<ClassifierPtr> links;
  std::vector<int> prefix_classes;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const int K = space.classes(order[pos] - 1);
    links.push_back(std::make_shared<TableLink>(
        K, feature_dim, prefix_classes,
        [&](std::span<const int> prefix) { return conditional(pos, prefix); }));
    prefix_classes.push_back(K);
  }
  return ChainModel(space, feature_dim, order, std::move(links));
}

ChainModel chain_from_joint(const LabelSpace& space, std::size_t feature_dim,
                            const LabelOrder& order, std::span<const double> joint) {
  const auto& ks = space.class_counts();
  const std::size_t total = product(ks);
  if (joint.size() != total) throw StructuralError("joint table size != number of label vectors");
  check_distribution(std::vector<double>(joint.begin(), joint.end()), static_cast<int>(total));

  // p(y_{s_pos} = c | prefix) = P(prefix, c) / P(prefix), marginalising the
  // joint over the labels after position pos. Unreachable prefixes get a
  // uniform conditional.
  auto conditional = [&](std::size_t pos, std::span<const int> prefix) {
    const int K = ks[order[pos] - 1];
    std::vector<double> mass(K, 0.0);
    std::vector<int> y;
    for (std::size_t idx = 0; idx < total; ++idx) {
      decode_index(idx, ks, y);
      bool match = true;
      for (std::size_t i = 0; i < prefix.size() && match; ++i) match = y[order[i] - 1] == prefix[i];
      if (match) mass[y[order[pos] - 1] - 1] += joint[idx];
    }
    const double z = std::accumulate(mass.begin(), mass.end(), 0.0);
    for (auto& m : mass) m = z > 0.0 ? m / z : 1.0 / K;
    return mass;
  };
  return chain_from_conditionals(space, feature_dim, order, conditional);
}

}  // namespace mcc
