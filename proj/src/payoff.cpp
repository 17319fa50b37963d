#include "mcc/payoff.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mcc/error.hpp"
#include "mcc/random.hpp"

namespace mcc {

std::string_view to_string(PayoffKind kind) {
  switch (kind) {
    case PayoffKind::EmSum: return "em";
    case PayoffKind::HamSum: return "ham";
    case PayoffKind::EmProd: return "em-prod";
    case PayoffKind::HamProd: return "ham-prod";
  }
  return "?";
}

PayoffKind parse_payoff_kind(std::string_view text) {
  if (text == "em") return PayoffKind::EmSum;
  if (text == "ham") return PayoffKind::HamSum;
  if (text == "em-prod") return PayoffKind::EmProd;
  if (text == "ham-prod") return PayoffKind::HamProd;
  throw ArgumentError("unknown payoff '" + std::string(text) + "' (em|ham|em-prod|ham-prod)");
}

double PayoffValues::get(PayoffKind kind) const {
  switch (kind) {
    case PayoffKind::EmSum: return em_sum;
    case PayoffKind::HamSum: return ham_sum;
    case PayoffKind::EmProd: return em_prod_log;
    case PayoffKind::HamProd: return ham_prod_log;
  }
  return 0.0;
}

ClassifierPtr LinkCache::get_or_train(std::span<const int> prefix,
                                      const std::function<ClassifierPtr()>& train) {
  std::vector<int> key(prefix.begin(), prefix.end());
  {
    std::lock_guard lock(mutex_);
    if (auto it = links_.find(key); it != links_.end()) return it->second;
  }
  // Training happens outside the lock; a concurrent duplicate is identical
  // and the first insertion wins.
  auto link = train();
  std::lock_guard lock(mutex_);
  return links_.emplace(std::move(key), std::move(link)).first->second;
}

std::size_t LinkCache::size() const {
  std::lock_guard lock(mutex_);
  return links_.size();
}

void LinkCache::clear() {
  std::lock_guard lock(mutex_);
  links_.clear();
}

PayoffContext::PayoffContext(Dataset build, Dataset validate, TrainConfig config)
    : build_(std::move(build)),
      validate_(std::move(validate)),
      config_(config),
      state_(std::make_shared<SharedState>()) {
  if (!(build_.space() == validate_.space()) || build_.dim() != validate_.dim()) {
    throw StructuralError("build and validation sets describe different spaces");
  }
  trainer_ = [cfg = config_](const Dataset& data, std::span<const int> prefix) {
    return train_link(data, prefix, cfg);
  };
}

ChainModel PayoffContext::chain_for(const LabelOrder& order) const {
  if (order.size() != build_.space().num_labels()) {
    throw StructuralError("order length != number of labels");
  }
  const std::span<const int> perm(order.perm());
  std::vector<ClassifierPtr> links;
  links.reserve(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto prefix = perm.first(pos + 1);
    auto train = [&] {
      state_->links_trained.fetch_add(1);
      return trainer_(build_, prefix);
    };
    links.push_back(cache_enabled_ ? state_->cache.get_or_train(prefix, train) : train());
  }
  return ChainModel(build_.space(), build_.dim(), order, std::move(links));
}

PayoffContext make_context(const Dataset& train, double build_fraction, std::uint64_t seed,
                           const TrainConfig& config) {
  auto [build, validate] = split(train, build_fraction, seed);
  return PayoffContext(std::move(build), std::move(validate), config);
}

PayoffValues score_chain(const ChainModel& chain, const Dataset& validate, std::uint64_t seed,
                         bool need_hamming) {
  if (validate.empty()) throw ArgumentError("payoff needs a non-empty validation set");
  PayoffValues v;
  for (std::size_t n = 0; n < validate.size(); ++n) {
    const auto& x = validate[n].features;
    const auto yhat = greedy_predict(chain, x);
    const double p = joint_density(chain, x, yhat);
    v.em_sum += p;
    v.em_prod_log += std::log(std::max(p, std::numeric_limits<double>::min()));
    if (!need_hamming) continue;
    Rng rng(derive_seed(seed, 0x4d41524755ULL, n));
    const auto marginals = auto_label_marginals(chain, x, rng);
    double s = 0.0;
    for (std::size_t l = 0; l < yhat.size(); ++l) s += marginals[l][yhat[l] - 1];
    v.ham_sum += s;
    v.ham_prod_log += std::log(std::max(s, std::numeric_limits<double>::min()));
  }
  return v;
}

double evaluate(const PayoffContext& ctx, const LabelOrder& order, PayoffKind kind) {
  if (ctx.validate().empty()) throw ArgumentError("payoff needs a non-empty validation set");
  const bool hamming = kind == PayoffKind::HamSum || kind == PayoffKind::HamProd;
  return score_chain(ctx.chain_for(order), ctx.validate(), ctx.config().seed, hamming).get(kind);
}

PayoffValues evaluate_all(const PayoffContext& ctx, const LabelOrder& order) {
  if (ctx.validate().empty()) throw ArgumentError("payoff needs a non-empty validation set");
  return score_chain(ctx.chain_for(order), ctx.validate(), ctx.config().seed, true);
}

}  // namespace mcc
