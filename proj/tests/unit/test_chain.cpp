#include <doctest.h>

#include <cmath>
#include <map>

#include "mcc/chain.hpp"
#include "mcc/error.hpp"
#include "mcc/table_link.hpp"
#include "support/synthetic.hpp"

using namespace mcc;
using testing::all_vectors;
using testing::table_chain;

namespace {

const std::vector<double> kX{0.0};

// K = [2,3,2] stub whose best path [1,3,2] has probability 0.6^3.
ChainModel tree_stub() {
  return table_chain(LabelSpace({2, 3, 2}), LabelOrder::identity(3),
                     [](std::size_t pos, std::vector<int> prefix) -> std::vector<double> {
                       if (pos == 0) return {0.6, 0.4};
                       if (pos == 1) return prefix[0] == 1 ? std::vector{0.1, 0.3, 0.6}
                                                           : std::vector{0.5, 0.3, 0.2};
                       if (prefix == std::vector{1, 3}) return {0.4, 0.6};
                       return {0.5, 0.5};
                     });
}

// K = [2,4] stub where greedy commits to y1 = 1 (0.55) and ends at 0.18,
// while [2,1] has 0.22.
ChainModel greedy_trap() {
  return table_chain(LabelSpace({2, 4}), LabelOrder::identity(2),
                     [](std::size_t pos, std::vector<int> prefix) -> std::vector<double> {
                       if (pos == 0) return {0.55, 0.45};
                       if (prefix[0] == 1) return {0.18 / 0.55, 0.3, 0.2, 1.0 - 0.18 / 0.55 - 0.5};
                       return {0.22 / 0.45, 0.2, 0.2, 1.0 - 0.22 / 0.45 - 0.4};
                     });
}

ChainModel deterministic_stub(const LabelSpace& space, const LabelVector& target) {
  return table_chain(space, LabelOrder::identity(space.num_labels()),
                     [&](std::size_t pos, std::vector<int>) {
                       std::vector<double> p(static_cast<std::size_t>(space.classes(pos)), 0.0);
                       p[static_cast<std::size_t>(target[pos] - 1)] = 1.0;
                       return p;
                     });
}

double accuracy(const std::vector<LabelVector>& pred, const Dataset& data) {
  double ok = 0;
  for (std::size_t n = 0; n < data.size(); ++n) ok += pred[n] == data[n].labels;
  return ok / static_cast<double>(data.size());
}

}  // namespace

TEST_CASE("joint density is the product of conditionals") {
  auto m = table_chain(LabelSpace({2, 2}), LabelOrder::identity(2),
                       [](std::size_t pos, std::vector<int>) -> std::vector<double> {
                         return pos == 0 ? std::vector{0.6, 0.4} : std::vector{0.5, 0.5};
                       });
  CHECK(joint_density(m, kX, {1, 2}) == doctest::Approx(0.30).epsilon(1e-15));
  CHECK_THROWS_AS(joint_density(m, kX, {1}), StructuralError);
  CHECK_THROWS_AS(joint_density(m, std::vector<double>{0.0, 1.0}, {1, 1}), StructuralError);
}

TEST_CASE("random stub chains normalise and match the table oracle") {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto space = testing::random_space(rng, 5, 4, 600);
    const auto order = LabelOrder::random(space.num_labels(), rng);
    const auto stub = testing::random_stub_chain(space, order, rng);
    double total = 0.0;
    for (const auto& y : all_vectors(space)) {
      const double p = joint_density(stub.model, std::vector<double>(2, 0.0), y);
      CHECK(std::abs(p - stub.density(y)) < 1e-15);
      total += p;
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("tree stub: best path [1,3,2] at 0.216") {
  const auto m = tree_stub();
  CHECK(joint_density(m, kX, {1, 3, 2}) == doctest::Approx(0.216).epsilon(1e-12));
  LabelVector best;
  double best_p = -1.0;
  int paths = 0;
  for (const auto& y : all_vectors(m.space())) {
    ++paths;
    const double p = joint_density(m, kX, y);
    if (p > best_p) {
      best_p = p;
      best = y;
    }
  }
  CHECK(paths == 12);
  CHECK(best == LabelVector{1, 3, 2});
  const auto ex = exhaustive_predict(m, kX);
  CHECK(ex.labels == LabelVector{1, 3, 2});
  CHECK(ex.probability == doctest::Approx(0.216).epsilon(1e-12));
}

TEST_CASE("greedy decoding can miss the joint mode") {
  const auto m = greedy_trap();
  const auto g = greedy_predict(m, kX);
  CHECK(g == LabelVector{1, 1});
  CHECK(joint_density(m, kX, g) == doctest::Approx(0.18).epsilon(1e-12));
  const auto ex = exhaustive_predict(m, kX);
  CHECK(ex.labels == LabelVector{2, 1});
  CHECK(ex.probability == doctest::Approx(0.22).epsilon(1e-12));
}

TEST_CASE("deterministic links: greedy, exhaustive and sampling agree") {
  LabelSpace space({3, 2, 4});
  const LabelVector target{2, 1, 4};
  const auto m = deterministic_stub(space, target);
  CHECK(greedy_predict(m, kX) == target);
  CHECK(exhaustive_predict(m, kX).labels == target);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto s = sample_path(m, kX, rng);
    CHECK(s.labels == target);
    CHECK(s.probability == 1.0);
  }
}

TEST_CASE("uniform links: exhaustive ties go to [1,...,1]") {
  LabelSpace space({2, 3, 2, 2});
  const auto m = table_chain(space, LabelOrder{3, 1, 4, 2}, [&](std::size_t pos, std::vector<int>) {
    const int k = space.classes(static_cast<std::size_t>(LabelOrder{3, 1, 4, 2}[pos] - 1));
    return std::vector<double>(static_cast<std::size_t>(k), 1.0 / k);
  });
  CHECK(exhaustive_predict(m, kX).labels == LabelVector{1, 1, 1, 1});
}

TEST_CASE("exhaustive decoding dominates greedy and respects its cap") {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto space = testing::random_space(rng, 6, 3, 800);
    const auto stub = testing::random_stub_chain(space, LabelOrder::random(space.num_labels(), rng), rng);
    const std::vector<double> x(2, 0.0);
    const auto ex = exhaustive_predict(stub.model, x);
    CHECK(ex.probability >= joint_density(stub.model, x, greedy_predict(stub.model, x)));
    double best = 0.0;
    for (const auto& y : all_vectors(space)) best = std::max(best, stub.density(y));
    CHECK(ex.probability == doctest::Approx(best).epsilon(1e-12));
  }
  const auto m = tree_stub();
  try {
    exhaustive_predict(m, kX, 11);
    FAIL("expected IntractableError");
  } catch (const IntractableError& e) {
    CHECK(e.cap() == 11);
    CHECK(std::string(e.what()).find("11") != std::string::npos);
  }
}

TEST_CASE("samples report their own joint density and are reproducible") {
  Rng rng(3);
  const auto stub = testing::random_stub_chain(LabelSpace({2, 3, 2}), LabelOrder{2, 3, 1}, rng);
  const std::vector<double> x(2, 0.0);
  Rng a(77);
  Rng b(77);
  for (int i = 0; i < 100; ++i) {
    const auto s = sample_path(stub.model, x, a);
    CHECK(stub.model.space().contains(s.labels));
    CHECK(s.probability == doctest::Approx(stub.density(s.labels)).epsilon(1e-12));
    CHECK(sample_path(stub.model, x, b).labels == s.labels);
  }
}

TEST_CASE("path frequencies match the joint on K=[2,2]") {
  Rng rng(12);
  const auto stub = testing::random_stub_chain(LabelSpace({2, 2}), LabelOrder{2, 1}, rng);
  const std::vector<double> x(2, 0.0);
  std::map<LabelVector, int> counts;
  const int draws = 200000;
  Rng srng(99);
  for (int i = 0; i < draws; ++i) ++counts[sample_path(stub.model, x, srng).labels];
  for (const auto& y : all_vectors(stub.space)) {
    CHECK(std::abs(counts[y] / double(draws) - stub.density(y)) < 0.01);
  }
}

TEST_CASE("first-position marginal is the first link's distribution") {
  Rng rng(6);
  const auto stub = testing::random_stub_chain(LabelSpace({3, 2, 2}), LabelOrder{2, 1, 3}, rng);
  const std::vector<double> x(2, 0.0);
  const auto m = marginal(stub.model, x, 0, {});
  CHECK(m == stub.model.link(0).predict_distribution(LinkInput(stub.model, x).at(0)));
}

TEST_CASE("exact marginals equal grouped sums of the oracle joint") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto space = testing::random_space(rng, 4, 4, 200);
    const auto order = LabelOrder::random(space.num_labels(), rng);
    const auto stub = testing::random_stub_chain(space, order, rng);
    const std::vector<double> x(2, 0.0);
    const auto by_label = label_marginals(stub.model, x, {});
    for (std::size_t l = 0; l < space.num_labels(); ++l) {
      std::vector<double> oracle(static_cast<std::size_t>(space.classes(l)), 0.0);
      for (const auto& y : all_vectors(space)) oracle[static_cast<std::size_t>(y[l] - 1)] += stub.density(y);
      double sum = 0.0;
      for (std::size_t c = 0; c < oracle.size(); ++c) {
        CHECK(std::abs(by_label[l][c] - oracle[c]) < 1e-12);
        sum += by_label[l][c];
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
    // Per-position marginal is the marginal of the label at that position.
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const auto m = marginal(stub.model, x, pos, {});
      const auto& expected = by_label[static_cast<std::size_t>(order[pos] - 1)];
      for (std::size_t c = 0; c < m.size(); ++c) CHECK(std::abs(m[c] - expected[c]) < 1e-12);
    }
  }
}

TEST_CASE("Monte Carlo marginals converge to exact ones") {
  Rng rng(14);
  const auto stub = testing::random_stub_chain(LabelSpace({2, 3}), LabelOrder{1, 2}, rng);
  const std::vector<double> x(2, 0.0);
  Rng mc(5);
  for (std::size_t pos = 0; pos < 2; ++pos) {
    const auto exact = marginal(stub.model, x, pos, {});
    const auto approx = marginal(stub.model, x, pos, {MarginalMode::MonteCarlo, 100000}, &mc);
    for (std::size_t c = 0; c < exact.size(); ++c) CHECK(std::abs(exact[c] - approx[c]) < 0.01);
  }
  CHECK_THROWS_AS(marginal(stub.model, x, 1, {MarginalMode::MonteCarlo, 10}), ArgumentError);
}

TEST_CASE("exact marginals refuse large spaces") {
  Rng rng(1);
  const auto stub = testing::random_stub_chain(LabelSpace(std::vector<int>(13, 2)),
                                               LabelOrder::identity(13), rng);
  CHECK_THROWS_AS(marginal(stub.model, std::vector<double>(2, 0.0), 3, {}), IntractableError);
}

TEST_CASE("a chain built from one joint table is order independent") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto space = testing::random_space(rng, 4, 3, 100);
    const auto joint = testing::random_joint(space, rng);
    std::vector<int> perm(space.num_labels());
    std::iota(perm.begin(), perm.end(), 1);
    do {
      const auto m = chain_from_joint(space, 1, LabelOrder(perm), joint);
      for (const auto& y : all_vectors(space)) {
        CHECK(std::abs(joint_density(m, kX, y) - joint[testing::joint_index(space, y)]) < 1e-9);
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}

TEST_CASE("link input dimensions grow with the prefix") {
  LabelSpace space({2, 3, 4});
  const LabelOrder order{3, 1, 2};
  CHECK(link_input_dim(space, 5, order, 0) == 5);
  CHECK(link_input_dim(space, 5, order, 1) == 9);
  CHECK(link_input_dim(space, 5, order, 2) == 11);
}

TEST_CASE("a one-label chain is a single base classifier") {
  auto data = testing::chain_synthetic(1, 3, 60, 2);
  TrainConfig cfg;
  const auto chain = train_chain(data, LabelOrder::identity(1), cfg);
  std::vector<std::vector<double>> x;
  std::vector<int> t;
  for (const auto& inst : data.instances()) {
    x.push_back(inst.features);
    t.push_back(inst.labels[0]);
  }
  const auto base = fit(x, t, 2, cfg);
  const auto& link = dynamic_cast<const SoftmaxModel&>(chain.link(0));
  CHECK(link.weights() == base.weights());
  const auto ic = train_ic(data, cfg);
  CHECK(dynamic_cast<const SoftmaxModel&>(ic.classifier(0)).weights() == base.weights());
}

TEST_CASE("chain learns a copied label through its prefix") {
  const auto data = testing::copy_synthetic(80, 4);
  const auto chain = train_chain(data, LabelOrder{1, 2}, {});
  for (const auto& inst : data.instances()) {
    LinkInput in(chain, inst.features);
    in.set(0, inst.labels[0]);
    const auto p = chain.link(1).predict_distribution(in.at(1));
    CHECK(p[static_cast<std::size_t>(inst.labels[0] - 1)] > 0.95);
  }
}

TEST_CASE("training is deterministic down to the JSON") {
  const auto data = testing::chain_synthetic(3, 2, 40, 9);
  TrainConfig cfg;
  cfg.max_epochs = 200;
  const auto a = train_chain(data, LabelOrder{2, 3, 1}, cfg).to_json().dump();
  const auto b = train_chain(data, LabelOrder{2, 3, 1}, cfg).to_json().dump();
  CHECK(a == b);
}

TEST_CASE("chain JSON round-trips for softmax and table links") {
  const auto data = testing::chain_synthetic(3, 2, 40, 9);
  TrainConfig cfg;
  cfg.max_epochs = 100;
  const auto chain = train_chain(data, LabelOrder{3, 1, 2}, cfg);
  const auto j = chain.to_json();
  CHECK(j.at("order") == std::vector<int>{3, 1, 2});
  const auto back = ChainModel::from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.to_json().dump() == j.dump());
  for (const auto& inst : data.instances()) {
    CHECK(joint_density(back, inst.features, inst.labels) ==
          joint_density(chain, inst.features, inst.labels));
  }

  const auto stub = tree_stub();
  const auto sback = ChainModel::from_json(nlohmann::json::parse(stub.to_json().dump()));
  for (const auto& y : all_vectors(stub.space())) {
    CHECK(joint_density(sback, kX, y) == joint_density(stub, kX, y));
  }
}

TEST_CASE("IC joint density is normalised") {
  const auto data = testing::chain_synthetic(3, 2, 40, 1);
  TrainConfig cfg;
  cfg.max_epochs = 100;
  const auto ic = train_ic(data, cfg);
  const auto back = ICModel::from_json(nlohmann::json::parse(ic.to_json().dump()));
  for (std::size_t n = 0; n < 5; ++n) {
    double total = 0.0;
    for (const auto& y : all_vectors(data.space())) total += ic_joint_density(ic, data[n].features, y);
    CHECK(std::abs(total - 1.0) < 1e-9);
    CHECK(ic_predict(back, data[n].features) == ic_predict(ic, data[n].features));
  }
}

TEST_CASE("chain beats independent classifiers when a label depends on another") {
  const auto train = testing::dependent_synthetic(300, 1);
  const auto test = testing::dependent_synthetic(300, 2);
  const auto ic = train_ic(train, {});
  const auto cc = train_chain(train, LabelOrder{1, 2}, {});
  std::vector<LabelVector> ic_pred;
  std::vector<LabelVector> cc_pred;
  for (const auto& inst : test.instances()) {
    ic_pred.push_back(ic_predict(ic, inst.features));
    cc_pred.push_back(greedy_predict(cc, inst.features));
  }
  CHECK(std::abs(accuracy(ic_pred, test) - 0.5) < 0.1);
  CHECK(accuracy(cc_pred, test) > 0.9);
}
