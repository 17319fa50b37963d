#pragma once

// Monte Carlo search over label orders.
//
// search_order is a hill climb that accepts a proposal only when it strictly
// improves the payoff. search_population accepts on ties as well, records the
// current weight at every iteration and returns the best distinct orders.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mcc/core_data.hpp"
#include "mcc/payoff.hpp"
#include "mcc/random.hpp"

namespace mcc {

struct ProposalKind {
  enum class Type { UniformSwap, TemperedSwap };

  Type type = Type::UniformSwap;
  // Tempered only: uniform for t <= tempering_start, sharpening afterwards.
  int tempering_start = 25;
  double beta = 0.03;

  static ProposalKind uniform() { return {}; }
  static ProposalKind tempered(int tempering_start, double beta);
};

// Selection probabilities of the first swap position (0-based index l holds
// position l+1) at iteration t: proportional to (1/L)^(beta t / position)
// once t > tempering_start, uniform before.
std::vector<double> first_position_probabilities(std::size_t num_labels, const ProposalKind& kind,
                                                 long t);

// Selection probabilities of the second position given the first (0-based),
// proportional to (1/(L-1))^(beta t / position) over the remaining positions.
std::vector<double> second_position_probabilities(std::size_t num_labels, const ProposalKind& kind,
                                                  long t, std::size_t first);

// Probability that chain position `position` (0-based) takes part in the
// swap at iteration t, i.e. is drawn first or second.
double swap_participation_probability(std::size_t num_labels, const ProposalKind& kind, long t,
                                      std::size_t position);

struct SwapPositions {
  std::size_t first;
  std::size_t second;
};

SwapPositions draw_swap_positions(std::size_t num_labels, const ProposalKind& kind, long t,
                                  Rng& rng);

// Swaps the contents of two distinct positions. Throws ArgumentError for L < 2.
LabelOrder propose(const LabelOrder& s, const ProposalKind& kind, long t, Rng& rng);

struct TraceEntry {
  long iteration = 0;
  LabelOrder order;
  PayoffValues payoffs;
};

struct SearchTrace {
  // Initial order (iteration 0) followed by every accepted proposal.
  std::vector<TraceEntry> accepted;
};

struct SearchResult {
  LabelOrder order;
  double payoff = 0.0;
  SearchTrace trace;
};

// Requires iterations >= 1.
SearchResult search_order(const PayoffContext& ctx, PayoffKind kind, const ProposalKind& proposal,
                          const LabelOrder& initial, long iterations, Rng& rng);

struct OrderPopulation {
  std::vector<LabelOrder> orders;
  std::vector<double> weights;  // payoffs, non-increasing
  // Fewer distinct orders were visited than requested.
  bool short_population = false;
};

// Requires iterations >= population_size >= 1.
OrderPopulation search_population(const PayoffContext& ctx, PayoffKind kind,
                                  const ProposalKind& proposal, const LabelOrder& initial,
                                  long iterations, std::size_t population_size, Rng& rng);

inline constexpr std::uint64_t kDefaultOrderCap = 5040;

// Best order over all permutations; ties go to the lexicographically smallest
// permutation. Throws IntractableError when L! exceeds cap.
SearchResult exhaustive_order_search(const PayoffContext& ctx, PayoffKind kind,
                                     std::uint64_t cap = kDefaultOrderCap);

// CSV with header t,s_t,J_EM,J_EM_prod_log,J_Ham; s_t space separated.
void write_trace_csv(std::ostream& out, const SearchTrace& trace);

// CSV with header rank,s,weight; one row per member, best first.
void write_population_csv(std::ostream& out, const OrderPopulation& population);

}  // namespace mcc
