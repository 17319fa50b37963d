#pragma once

// Losses, k-fold cross-validation and method comparison.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcc/core_data.hpp"
#include "mcc/methods.hpp"

namespace mcc {

// 1 iff any component differs.
int exact_match_loss(const LabelVector& truth, const LabelVector& predicted);
// Number of differing components.
int hamming_loss(const LabelVector& truth, const LabelVector& predicted);
double normalized_hamming_loss(const LabelVector& truth, const LabelVector& predicted);

// Fold index of every instance: seeded shuffle, contiguous blocks whose sizes
// differ by at most one. Requires 2 <= folds <= N.
std::vector<std::size_t> assign_folds(std::size_t num_instances, std::size_t folds,
                                      std::uint64_t seed);

struct FoldResult {
  std::size_t fold = 0;
  // Empty for a fold that could not be run (e.g. exhaustive decoding above
  // its cap); status then carries the reason.
  std::optional<double> exact_match;
  std::optional<double> hamming_score;
  double build_seconds = 0.0;
  double test_seconds = 0.0;
  std::string status = "ok";
};

struct Metrics {
  std::string method;
  std::vector<FoldResult> folds;
  // Over completed folds; std is the sample standard deviation.
  double exact_match_mean = 0.0;
  double exact_match_std = 0.0;
  double hamming_mean = 0.0;
  double hamming_std = 0.0;
  bool completed = true;
};

struct EvalOptions {
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

Metrics cross_validate(const Dataset& data, const MethodSpec& method, const EvalOptions& options);

struct ComparisonTable {
  std::string dataset;
  std::vector<Metrics> methods;
  // Competition ranks (ties share the lower rank), 1 = best; 0 marks a
  // method that did not complete.
  std::vector<int> exact_match_ranks;
  std::vector<int> hamming_ranks;
};

// Ranks values descending; equal values share the lower rank.
std::vector<int> competition_ranks(const std::vector<std::optional<double>>& values);

ComparisonTable compare(const Dataset& data, const std::string& dataset_name,
                        const std::vector<MethodSpec>& methods, const EvalOptions& options);

// Rows: dataset,method,fold,exact_match,hamming_score,build_seconds,test_seconds,status.
void write_results_csv(std::ostream& out, const ComparisonTable& table, bool include_timing);
// Array of per-fold objects with the same fields.
nlohmann::json results_json(const ComparisonTable& table, bool include_timing);
// Per-method means, standard deviations and ranks.
void write_summary_csv(std::ostream& out, const ComparisonTable& table);

}  // namespace mcc
