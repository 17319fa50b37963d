#pragma once

// Validation payoffs J(s) used to rank label orders.
//
// For validation instances n with greedy chain predictions yhat^(n):
//   EM_sum   = sum_n p(yhat^(n) | x^(n))
//   Ham_sum  = sum_n sum_l p(yhat_l^(n) | x^(n))          (label marginals)
//   EM_prod  = sum_n log p(yhat^(n) | x^(n))              (log of the product)
//   Ham_prod = sum_n log sum_l p(yhat_l^(n) | x^(n))      (log of the product)
// None of them is normalised by the number of instances.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcc/chain.hpp"
#include "mcc/classifier.hpp"
#include "mcc/core_data.hpp"

namespace mcc {

enum class PayoffKind { EmSum, HamSum, EmProd, HamProd };

std::string_view to_string(PayoffKind kind);
// Accepts "em", "ham", "em-prod", "ham-prod".
PayoffKind parse_payoff_kind(std::string_view text);

struct PayoffValues {
  double em_sum = 0.0;
  double ham_sum = 0.0;
  double em_prod_log = 0.0;
  double ham_prod_log = 0.0;

  double get(PayoffKind kind) const;
};

// Produces the link for the chain position whose label is prefix.back(),
// conditioned on the earlier labels of prefix.
using LinkTrainer =
    std::function<ClassifierPtr(const Dataset& build, std::span<const int> prefix)>;

// Links keyed by the exact order prefix that determines them. Thread-safe.
class LinkCache {
 public:
  ClassifierPtr get_or_train(std::span<const int> prefix,
                             const std::function<ClassifierPtr()>& train);

  std::size_t size() const;
  void clear();

 private:
  mutable std::mutex mutex_;
  std::map<std::vector<int>, ClassifierPtr> links_;
};

class PayoffContext {
 public:
  PayoffContext(Dataset build, Dataset validate, TrainConfig config);

  const Dataset& build() const noexcept { return build_; }
  const Dataset& validate() const noexcept { return validate_; }
  const TrainConfig& config() const noexcept { return config_; }

  // Replaces softmax training of links (e.g. with explicit tables).
  void set_link_trainer(LinkTrainer trainer) { trainer_ = std::move(trainer); }
  void set_cache_enabled(bool enabled) { cache_enabled_ = enabled; }
  bool cache_enabled() const noexcept { return cache_enabled_; }

  // Chain for `order`, reusing cached links for every shared prefix.
  ChainModel chain_for(const LabelOrder& order) const;

  // Number of links trained (cache misses) since construction.
  std::size_t links_trained() const noexcept { return state_->links_trained.load(); }
  std::size_t cached_links() const { return state_->cache.size(); }

 private:
  Dataset build_;
  Dataset validate_;
  TrainConfig config_;
  LinkTrainer trainer_;
  bool cache_enabled_ = true;

  // Copies of a context share the cache and the counter.
  struct SharedState {
    LinkCache cache;
    std::atomic<std::size_t> links_trained{0};
  };
  std::shared_ptr<SharedState> state_;
};

inline constexpr double kDefaultBuildFraction = 0.67;

// Splits train into build/validate parts with core split().
PayoffContext make_context(const Dataset& train, double build_fraction, std::uint64_t seed,
                           const TrainConfig& config = {});

// Scores a fixed chain on a validation set. Label marginals for the Hamming
// payoffs are exact up to kExactMarginalCap paths, otherwise Monte Carlo with
// 1000 draws seeded from (seed, instance index). Throws ArgumentError when
// validate is empty.
PayoffValues score_chain(const ChainModel& chain, const Dataset& validate, std::uint64_t seed,
                         bool need_hamming = true);

double evaluate(const PayoffContext& ctx, const LabelOrder& order, PayoffKind kind);
PayoffValues evaluate_all(const PayoffContext& ctx, const LabelOrder& order);

}  // namespace mcc
