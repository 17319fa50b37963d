#include "mcc/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <ostream>
#include <thread>

#include "mcc/error.hpp"
#include "format.hpp"

namespace mcc {

namespace {

void require_same_length(const LabelVector& a, const LabelVector& b) {
  if (a.size() != b.size()) throw ArgumentError("label vectors have different lengths");
}

constexpr std::uint64_t kFoldStream = 0x464f4c44;

struct Task {
  std::size_t method;
  std::size_t fold;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool pcc_intractable(const LabelSpace& space, const MethodSpec& spec) {
  if (spec.method != Method::PCC) return false;
  const auto paths = space.total_paths();
  return !paths || *paths > spec.pcc_cap;
}

FoldResult run_fold(const Dataset& data, const std::vector<std::size_t>& assignment,
                    const MethodSpec& spec, std::size_t fold, std::uint64_t seed) {
  FoldResult r;
  r.fold = fold;
  if (pcc_intractable(data.space(), spec)) {
    r.status = "DNF:intractable";
    return r;
  }
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (std::size_t n = 0; n < assignment.size(); ++n) {
    (assignment[n] == fold ? test_idx : train_idx).push_back(n);
  }
  const auto train = data.subset(train_idx);
  const auto test = data.subset(test_idx);
  const auto fold_seed = derive_seed(seed, kFoldStream, fold);

  auto start = std::chrono::steady_clock::now();
  const auto outcome = fit_method(train, spec, fold_seed);
  r.build_seconds = seconds_since(start);

  start = std::chrono::steady_clock::now();
  std::vector<InferenceResult> predictions;
  try {
    predictions = predict_all(outcome.model, spec, test, fold_seed);
  } catch (const IntractableError&) {
    r.status = "DNF:intractable";
    return r;
  }
  r.test_seconds = seconds_since(start);

  double em_loss = 0.0;
  double ham_loss = 0.0;
  for (std::size_t n = 0; n < test.size(); ++n) {
    em_loss += exact_match_loss(test[n].labels, predictions[n].prediction);
    ham_loss += normalized_hamming_loss(test[n].labels, predictions[n].prediction);
  }
  const double count = static_cast<double>(test.size());
  r.exact_match = 1.0 - em_loss / count;
  r.hamming_score = 1.0 - ham_loss / count;
  return r;
}

void summarise(Metrics& m) {
  std::vector<double> em;
  std::vector<double> ham;
  for (const auto& f : m.folds) {
    if (f.exact_match) em.push_back(*f.exact_match);
    if (f.hamming_score) ham.push_back(*f.hamming_score);
  }
  m.completed = !m.folds.empty() && em.size() == m.folds.size();
  auto mean_std = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = sd = 0.0;
    if (v.empty()) return;
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() < 2) return;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  };
  mean_std(em, m.exact_match_mean, m.exact_match_std);
  mean_std(ham, m.hamming_mean, m.hamming_std);
}

// Runs every (method, fold) pair on `workers` threads. Results land in fixed
// slots so the outcome does not depend on scheduling.
std::vector<Metrics> run_all(const Dataset& data, const std::vector<MethodSpec>& methods,
                             const EvalOptions& options) {
  if (options.folds < 2) throw ArgumentError("cross-validation needs at least 2 folds");
  if (data.size() < options.folds) throw ArgumentError("fewer instances than folds");
  for (const auto& m : methods) m.validate();
  const auto assignment = assign_folds(data.size(), options.folds, options.seed);

  std::vector<Metrics> out(methods.size());
  std::vector<Task> tasks;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    out[m].method = std::string(to_string(methods[m].method));
    out[m].folds.resize(options.folds);
    for (std::size_t f = 0; f < options.folds; ++f) tasks.push_back({m, f});
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(tasks.size());
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
      const auto [m, f] = tasks[i];
      try {
        out[m].folds[f] = run_fold(data, assignment, methods[m], f, options.seed);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto workers = std::clamp<std::size_t>(options.workers, 1, tasks.size());
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (auto& m : out) summarise(m);
  return out;
}

}  // namespace

int exact_match_loss(const LabelVector& truth, const LabelVector& predicted) {
  require_same_length(truth, predicted);
  return truth == predicted ? 0 : 1;
}

int hamming_loss(const LabelVector& truth, const LabelVector& predicted) {
  require_same_length(truth, predicted);
  int d = 0;
  for (std::size_t l = 0; l < truth.size(); ++l) d += truth[l] != predicted[l];
  return d;
}

double normalized_hamming_loss(const LabelVector& truth, const LabelVector& predicted) {
  const int d = hamming_loss(truth, predicted);
  return truth.size() == 0 ? 0.0 : static_cast<double>(d) / static_cast<double>(truth.size());
}

std::vector<std::size_t> assign_folds(std::size_t num_instances, std::size_t folds,
                                      std::uint64_t seed) {
  if (folds < 2) throw ArgumentError("cross-validation needs at least 2 folds");
  if (num_instances < folds) throw ArgumentError("fewer instances than folds");
  std::vector<std::size_t> idx(num_instances);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = num_instances; i > 1; --i) {
    std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
  }
  std::vector<std::size_t> fold_of(num_instances);
  const std::size_t base = num_instances / folds;
  const std::size_t extra = num_instances % folds;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    for (std::size_t k = 0; k < size; ++k) fold_of[idx[pos++]] = f;
  }
  return fold_of;
}

Metrics cross_validate(const Dataset& data, const MethodSpec& method, const EvalOptions& options) {
  return run_all(data, {method}, options).front();
}

std::vector<int> competition_ranks(const std::vector<std::optional<double>>& values) {
  std::vector<int> ranks(values.size(), 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i]) continue;
    int better = 0;
    for (const auto& v : values) better += v && *v > *values[i];
    ranks[i] = better + 1;
  }
  return ranks;
}

ComparisonTable compare(const Dataset& data, const std::string& dataset_name,
                        const std::vector<MethodSpec>& methods, const EvalOptions& options) {
  ComparisonTable table;
  table.dataset = dataset_name;
  table.methods = run_all(data, methods, options);
  std::vector<std::optional<double>> em;
  std::vector<std::optional<double>> ham;
  for (const auto& m : table.methods) {
    em.push_back(m.completed ? std::optional(m.exact_match_mean) : std::nullopt);
    ham.push_back(m.completed ? std::optional(m.hamming_mean) : std::nullopt);
  }
  table.exact_match_ranks = competition_ranks(em);
  table.hamming_ranks = competition_ranks(ham);
  return table;
}

namespace {

std::string optional_real(const std::optional<double>& v) {
  return v ? detail::format_real(*v) : std::string();
}

}  // namespace

void write_results_csv(std::ostream& out, const ComparisonTable& table, bool include_timing) {
  out << "dataset,method,fold,exact_match,hamming_score,build_seconds,test_seconds,status\n";
  for (const auto& m : table.methods) {
    for (const auto& f : m.folds) {
      out << table.dataset << ',' << m.method << ',' << f.fold << ',' << optional_real(f.exact_match)
          << ',' << optional_real(f.hamming_score) << ','
          << detail::format_real(include_timing ? f.build_seconds : 0.0) << ','
          << detail::format_real(include_timing ? f.test_seconds : 0.0) << ',' << f.status << '\n';
    }
  }
}

nlohmann::json results_json(const ComparisonTable& table, bool include_timing) {
  auto rows = nlohmann::json::array();
  for (const auto& m : table.methods) {
    for (const auto& f : m.folds) {
      nlohmann::json row = {{"dataset", table.dataset},
                            {"method", m.method},
                            {"fold", f.fold},
                            {"exact_match", nullptr},
                            {"hamming_score", nullptr},
                            {"build_seconds", include_timing ? f.build_seconds : 0.0},
                            {"test_seconds", include_timing ? f.test_seconds : 0.0},
                            {"status", f.status}};
      if (f.exact_match) row["exact_match"] = *f.exact_match;
      if (f.hamming_score) row["hamming_score"] = *f.hamming_score;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const ComparisonTable& table) {
  out << "dataset,method,exact_match_mean,exact_match_std,exact_match_rank,hamming_mean,"
         "hamming_std,hamming_rank,completed\n";
  for (std::size_t i = 0; i < table.methods.size(); ++i) {
    const auto& m = table.methods[i];
    out << table.dataset << ',' << m.method << ',' << detail::format_real(m.exact_match_mean) << ','
        << detail::format_real(m.exact_match_std) << ',' << table.exact_match_ranks[i] << ','
        << detail::format_real(m.hamming_mean) << ',' << detail::format_real(m.hamming_std) << ','
        << table.hamming_ranks[i] << ',' << (m.completed ? "yes" : "no") << '\n';
  }
}

}  // namespace mcc
