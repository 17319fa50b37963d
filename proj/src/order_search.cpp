#include "mcc/order_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <string>

#include "mcc/error.hpp"
#include "format.hpp"

namespace mcc {

ProposalKind ProposalKind::tempered(int tempering_start, double beta) {
  if (!(beta > 0.0)) throw ArgumentError("tempered proposal needs beta > 0");
  if (tempering_start < 0) throw ArgumentError("tempered proposal needs tempering_start >= 0");
  return {Type::TemperedSwap, tempering_start, beta};
}

namespace {

bool is_tempering(const ProposalKind& kind, long t) {
  return kind.type == ProposalKind::Type::TemperedSwap && t > kind.tempering_start;
}

// Normalised weights base^(beta t / position) over the allowed positions,
// computed in the log domain; base < 1 so later positions dominate.
std::vector<double> tempered_weights(std::size_t num_labels, double base, double beta, long t,
                                     std::size_t excluded) {
  std::vector<double> logw(num_labels, -std::numeric_limits<double>::infinity());
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < num_labels; ++i) {
    if (i == excluded) continue;
    const double position = static_cast<double>(i + 1);
    logw[i] = beta * static_cast<double>(t) / position * std::log(base);
    max_log = std::max(max_log, logw[i]);
  }
  std::vector<double> p(num_labels, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < num_labels; ++i) {
    if (i == excluded) continue;
    p[i] = std::exp(logw[i] - max_log);
    total += p[i];
  }
  for (auto& v : p) v /= total;
  return p;
}

void require_swappable(std::size_t num_labels) {
  if (num_labels < 2) throw ArgumentError("a swap proposal needs at least 2 labels");
}

}  // namespace

std::vector<double> first_position_probabilities(std::size_t num_labels, const ProposalKind& kind,
                                                 long t) {
  require_swappable(num_labels);
  if (!is_tempering(kind, t)) return std::vector<double>(num_labels, 1.0 / num_labels);
  return tempered_weights(num_labels, 1.0 / num_labels, kind.beta, t, num_labels);
}

std::vector<double> second_position_probabilities(std::size_t num_labels, const ProposalKind& kind,
                                                  long t, std::size_t first) {
  require_swappable(num_labels);
  if (first >= num_labels) throw ArgumentError("first swap position out of range");
  if (!is_tempering(kind, t)) {
    std::vector<double> p(num_labels, 1.0 / static_cast<double>(num_labels - 1));
    p[first] = 0.0;
    return p;
  }
  return tempered_weights(num_labels, 1.0 / static_cast<double>(num_labels - 1), kind.beta, t,
                          first);
}

double swap_participation_probability(std::size_t num_labels, const ProposalKind& kind, long t,
                                      std::size_t position) {
  const auto first = first_position_probabilities(num_labels, kind, t);
  double p = first.at(position);
  for (std::size_t l = 0; l < num_labels; ++l) {
    if (l == position) continue;
    p += first[l] * second_position_probabilities(num_labels, kind, t, l)[position];
  }
  return p;
}

SwapPositions draw_swap_positions(std::size_t num_labels, const ProposalKind& kind, long t,
                                  Rng& rng) {
  const auto first = sample_categorical(first_position_probabilities(num_labels, kind, t), rng);
  const auto second =
      sample_categorical(second_position_probabilities(num_labels, kind, t, first), rng);
  return {first, second};
}

LabelOrder propose(const LabelOrder& s, const ProposalKind& kind, long t, Rng& rng) {
  const auto [i, j] = draw_swap_positions(s.size(), kind, t, rng);
  return s.swapped(i, j);
}

SearchResult search_order(const PayoffContext& ctx, PayoffKind kind, const ProposalKind& proposal,
                          const LabelOrder& initial, long iterations, Rng& rng) {
  if (iterations < 1) throw ArgumentError("order search needs at least one iteration");
  SearchResult result{initial, evaluate(ctx, initial, kind), {}};
  result.trace.accepted.push_back({0, initial, evaluate_all(ctx, initial)});
  if (initial.size() < 2) return result;

  for (long t = 1; t <= iterations; ++t) {
    auto candidate = propose(result.order, proposal, t, rng);
    const double payoff = evaluate(ctx, candidate, kind);
    if (payoff > result.payoff) {
      result.trace.accepted.push_back({t, candidate, evaluate_all(ctx, candidate)});
      result.order = std::move(candidate);
      result.payoff = payoff;
    }
  }
  return result;
}

OrderPopulation search_population(const PayoffContext& ctx, PayoffKind kind,
                                  const ProposalKind& proposal, const LabelOrder& initial,
                                  long iterations, std::size_t population_size, Rng& rng) {
  if (population_size < 1) throw ArgumentError("population size must be at least 1");
  if (iterations < static_cast<long>(population_size)) {
    throw ArgumentError("population search needs iterations >= population size");
  }
  LabelOrder current = initial;
  double current_payoff = evaluate(ctx, current, kind);

  // Weight recorded at every iteration; identical orders collapse to their
  // best weight.
  std::map<LabelOrder, double> visited;
  auto record = [&](const LabelOrder& s, double w) {
    auto [it, inserted] = visited.emplace(s, w);
    if (!inserted) it->second = std::max(it->second, w);
  };
  for (long t = 1; t <= iterations; ++t) {
    if (current.size() >= 2) {
      auto candidate = propose(current, proposal, t, rng);
      const double payoff = evaluate(ctx, candidate, kind);
      if (payoff >= current_payoff) {
        current = std::move(candidate);
        current_payoff = payoff;
      }
    }
    record(current, current_payoff);
  }

  std::vector<std::pair<LabelOrder, double>> ranked(visited.begin(), visited.end());
  // std::map iteration is lexicographic, so stable_sort leaves ties in
  // lexicographic order.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  OrderPopulation pop;
  pop.short_population = ranked.size() < population_size;
  for (std::size_t i = 0; i < std::min(population_size, ranked.size()); ++i) {
    pop.orders.push_back(ranked[i].first);
    pop.weights.push_back(ranked[i].second);
  }
  return pop;
}

SearchResult exhaustive_order_search(const PayoffContext& ctx, PayoffKind kind, std::uint64_t cap) {
  const std::size_t L = ctx.build().space().num_labels();
  std::uint64_t count = 1;
  for (std::size_t i = 2; i <= L; ++i) {
    if (count > cap / i) throw IntractableError("exhaustive order search over " + std::to_string(L) + "! orders", cap);
    count *= i;
  }
  if (count > cap) throw IntractableError("exhaustive order search", cap);

  std::vector<int> perm(L);
  std::iota(perm.begin(), perm.end(), 1);
  SearchResult best{LabelOrder(perm), -std::numeric_limits<double>::infinity(), {}};
  do {
    LabelOrder s(perm);
    const double payoff = evaluate(ctx, s, kind);
    if (payoff > best.payoff) {
      best.order = s;
      best.payoff = payoff;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  best.trace.accepted.push_back({0, best.order, evaluate_all(ctx, best.order)});
  return best;
}

void write_trace_csv(std::ostream& out, const SearchTrace& trace) {
  out << "t,s_t,J_EM,J_EM_prod_log,J_Ham\n";
  for (const auto& e : trace.accepted) {
    out << e.iteration << ',';
    for (std::size_t i = 0; i < e.order.size(); ++i) out << (i ? " " : "") << e.order[i];
    out << ',' << detail::format_real(e.payoffs.em_sum) << ','
        << detail::format_real(e.payoffs.em_prod_log) << ','
        << detail::format_real(e.payoffs.ham_sum) << '\n';
  }
}

void write_population_csv(std::ostream& out, const OrderPopulation& population) {
  out << "rank,s,weight\n";
  for (std::size_t r = 0; r < population.orders.size(); ++r) {
    const auto& s = population.orders[r];
    out << r + 1 << ',';
    for (std::size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
    out << ',' << detail::format_real(population.weights[r]) << '\n';
  }
}

}  // namespace mcc
