#pragma once

// Synthetic datasets, random stub models and brute-force oracles shared by
// the unit and acceptance tests. The oracles deliberately avoid the library's
// own enumeration and marginalisation code.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "mcc/chain.hpp"
#include "mcc/core_data.hpp"
#include "mcc/random.hpp"
#include "mcc/table_link.hpp"

namespace mcc::testing {

inline double gaussian(Rng& rng) {
  // Box-Muller on the library's portable uniforms.
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

// Every label vector of the space in lexicographic order (last label fastest).
inline std::vector<LabelVector> all_vectors(const LabelSpace& space) {
  std::vector<LabelVector> out;
  std::vector<int> y(space.num_labels(), 1);
  while (true) {
    out.emplace_back(y);
    std::size_t l = y.size();
    while (l > 0) {
      --l;
      if (y[l] < space.classes(l)) {
        ++y[l];
        break;
      }
      y[l] = 1;
      if (l == 0) return out;
    }
    if (y.empty()) return out;
  }
}

inline std::vector<double> random_distribution(int k, Rng& rng, double floor = 0.02) {
  std::vector<double> p(static_cast<std::size_t>(k));
  double total = 0.0;
  for (auto& v : p) {
    v = floor + uniform01(rng);
    total += v;
  }
  for (auto& v : p) v /= total;
  return p;
}

inline LabelSpace random_space(Rng& rng, std::size_t max_labels, int max_classes,
                               std::uint64_t max_paths) {
  while (true) {
    const std::size_t L = 1 + uniform_index(rng, max_labels);
    std::vector<int> k(L);
    for (auto& c : k) c = 2 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(max_classes - 1)));
    LabelSpace space(k);
    if (auto paths = space.total_paths(); paths && *paths <= max_paths) return space;
  }
}

// A stub chain with independently drawn conditional tables, together with an
// oracle density computed straight from those tables.
struct StubChain {
  LabelSpace space;
  LabelOrder order;
  // tables[position][prefix key] = distribution of the label at position.
  std::vector<std::map<std::vector<int>, std::vector<double>>> tables;
  ChainModel model;

  double density(const LabelVector& y) const {
    double p = 1.0;
    std::vector<int> prefix;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const int c = y[static_cast<std::size_t>(order[pos] - 1)];
      p *= tables[pos].at(prefix)[static_cast<std::size_t>(c - 1)];
      prefix.push_back(c);
    }
    return p;
  }
};

inline StubChain random_stub_chain(const LabelSpace& space, const LabelOrder& order, Rng& rng,
                                   std::size_t feature_dim = 2) {
  std::vector<std::map<std::vector<int>, std::vector<double>>> tables(order.size());
  auto conditional = [&](std::size_t pos, std::span<const int> prefix) {
    const int k = space.classes(static_cast<std::size_t>(order[pos] - 1));
    auto p = random_distribution(k, rng);
    tables[pos][std::vector<int>(prefix.begin(), prefix.end())] = p;
    return p;
  };
  auto model = chain_from_conditionals(space, feature_dim, order, conditional);
  return {space, order, std::move(tables), std::move(model)};
}

// Chain from fixed per-position tables, for hand-built examples.
inline ChainModel table_chain(const LabelSpace& space, const LabelOrder& order,
                              const std::function<std::vector<double>(std::size_t, std::vector<int>)>& f,
                              std::size_t feature_dim = 1) {
  return chain_from_conditionals(space, feature_dim, order,
                                 [&](std::size_t pos, std::span<const int> prefix) {
                                   return f(pos, std::vector<int>(prefix.begin(), prefix.end()));
                                 });
}

// Random joint table over the space (label 1 most significant).
inline std::vector<double> random_joint(const LabelSpace& space, Rng& rng) {
  const auto n = static_cast<int>(*space.total_paths());
  return random_distribution(n, rng, 0.0);
}

inline std::size_t joint_index(const LabelSpace& space, const LabelVector& y) {
  std::size_t idx = 0;
  for (std::size_t l = 0; l < y.size(); ++l) {
    idx = idx * static_cast<std::size_t>(space.classes(l)) + static_cast<std::size_t>(y[l] - 1);
  }
  return idx;
}

// Labels are noisy thresholds of random linear functions of x; later labels
// also depend on earlier ones through a random shift.
inline Dataset chain_synthetic(std::size_t num_labels, std::size_t dim, std::size_t n,
                               std::uint64_t seed, double noise = 0.5) {
  Rng rng(seed);
  std::vector<std::vector<double>> w(num_labels, std::vector<double>(dim));
  std::vector<std::vector<double>> dep(num_labels, std::vector<double>(num_labels, 0.0));
  for (std::size_t l = 0; l < num_labels; ++l) {
    for (auto& v : w[l]) v = gaussian(rng);
    for (std::size_t j = 0; j < l; ++j) dep[l][j] = 1.5 * gaussian(rng);
  }
  std::vector<Instance> rows;
  for (std::size_t i = 0; i < n; ++i) {
    Instance inst;
    inst.features.resize(dim);
    for (auto& v : inst.features) v = gaussian(rng);
    std::vector<int> y(num_labels);
    for (std::size_t l = 0; l < num_labels; ++l) {
      double a = noise * gaussian(rng);
      for (std::size_t d = 0; d < dim; ++d) a += w[l][d] * inst.features[d];
      for (std::size_t j = 0; j < l; ++j) a += dep[l][j] * (y[j] == 2 ? 1.0 : -1.0);
      y[l] = a > 0.0 ? 2 : 1;
    }
    inst.labels = LabelVector(std::move(y));
    rows.push_back(std::move(inst));
  }
  return Dataset(LabelSpace(std::vector<int>(num_labels, 2)), dim, std::move(rows));
}

// Every label is a linear threshold of x: learnable exactly by softmax links.
inline Dataset separable_synthetic(std::size_t num_labels, std::size_t dim, std::size_t n,
                                   std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> w(num_labels, std::vector<double>(dim));
  for (auto& row : w) {
    for (auto& v : row) v = gaussian(rng);
  }
  std::vector<Instance> rows;
  while (rows.size() < n) {
    Instance inst;
    inst.features.resize(dim);
    for (auto& v : inst.features) v = 3.0 * gaussian(rng);
    std::vector<int> y(num_labels);
    bool clear = true;
    for (std::size_t l = 0; l < num_labels; ++l) {
      double a = 0.0;
      for (std::size_t d = 0; d < dim; ++d) a += w[l][d] * inst.features[d];
      clear = clear && std::abs(a) > 0.5;  // keep a margin
      y[l] = a > 0.0 ? 2 : 1;
    }
    if (!clear) continue;
    inst.labels = LabelVector(std::move(y));
    rows.push_back(std::move(inst));
  }
  return Dataset(LabelSpace(std::vector<int>(num_labels, 2)), dim, std::move(rows));
}

// K = [4, 2], two features. y1 is the quadrant of x and y2 = 2 exactly when
// x lies in the first or third quadrant (an XOR of the signs). Points come in
// mirror-image groups of four, so no linear function of x predicts y2 better
// than chance, while y2 is a function of y1.
inline Dataset dependent_synthetic(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Instance> rows;
  while (rows.size() < n) {
    const double a = uniform(rng, 0.25, 3.0);
    const double b = uniform(rng, 0.25, 3.0);
    for (const auto& [sa, sb] : {std::pair{1.0, 1.0}, {-1.0, 1.0}, {-1.0, -1.0}, {1.0, -1.0}}) {
      if (rows.size() == n) break;
      const std::vector<double> x{sa * a, sb * b};
      const int y1 = x[0] > 0 ? (x[1] > 0 ? 1 : 4) : (x[1] > 0 ? 2 : 3);
      rows.push_back({x, LabelVector{y1, y1 == 1 || y1 == 3 ? 2 : 1}});
    }
  }
  return Dataset(LabelSpace({4, 2}), 2, std::move(rows));
}

// K = [2, 2]: y1 = [x > 0] + 1 and y2 = y1.
inline Dataset copy_synthetic(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Instance> rows;
  for (std::size_t i = 0; i < n; ++i) {
    double x = uniform(rng, -3.0, 3.0);
    if (std::abs(x) < 0.2) x = x < 0 ? -0.2 : 0.2;
    const int y1 = x > 0.0 ? 2 : 1;
    rows.push_back({{x}, LabelVector{y1, y1}});
  }
  return Dataset(LabelSpace({2, 2}), 1, std::move(rows));
}

// Four binary labels where the root labels are noisy linear thresholds of x
// and the others are AND/OR combinations of labels, so the quality of a
// chain depends strongly on which labels come first.
inline Dataset order_sensitive_synthetic(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Instance> rows;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(3);
    for (auto& v : x) v = gaussian(rng);
    const bool a = x[0] + 0.3 * gaussian(rng) > 0.0;
    const bool b = x[1] + 0.3 * gaussian(rng) > 0.0;
    const bool c = a && b;
    const bool d = (a || x[2] > 0.0) != (uniform01(rng) < 0.05);
    rows.push_back({x, LabelVector{c ? 2 : 1, d ? 2 : 1, a ? 2 : 1, b ? 2 : 1}});
  }
  return Dataset(LabelSpace({2, 2, 2, 2}), 3, std::move(rows));
}

}  // namespace mcc::testing
