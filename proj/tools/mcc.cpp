// mcc: train, search, predict and evaluate classifier chains from the shell.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mcc/core_data.hpp"
#include "mcc/error.hpp"
#include "mcc/evaluation.hpp"
#include "mcc/methods.hpp"
#include "mcc/order_search.hpp"
#include "mcc/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Thrown for bad flag values and missing inputs; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::vector<std::string> data;
  std::vector<std::string> methods{"cc"};
  long ty = 100;
  long ts = 50;
  std::size_t pop = 10;
  double beta = 0.03;
  std::optional<long> tp;
  std::string payoff = "em";
  std::optional<std::string> proposal;
  std::string goal = "em";
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::uint64_t pcc_cap = mcc::kDefaultExhaustiveCap;
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  int epochs = 2000;
  double build_fraction = mcc::kDefaultBuildFraction;
  bool random_order = false;
  bool timing = false;
  bool oracle = false;
  std::string model;
};

void add_method_options(CLI::App& cmd, RunConfig& c) {
  cmd.add_option("--ty", c.ty, "Monte Carlo decoding iterations")->capture_default_str();
  cmd.add_option("--ts", c.ts, "order search iterations")->capture_default_str();
  cmd.add_option("--pop", c.pop, "population size M")->capture_default_str();
  cmd.add_option("--beta", c.beta, "tempering rate")->capture_default_str();
  cmd.add_option("--tp", c.tp, "tempering start (default ts/2)");
  cmd.add_option("--payoff", c.payoff, "order payoff")
      ->check(CLI::IsMember({"em", "ham", "em-prod", "ham-prod"}))
      ->capture_default_str();
  cmd.add_option("--proposal", c.proposal, "proposal kind")->check(CLI::IsMember({"swap", "tempered"}));
  cmd.add_option("--goal", c.goal, "decoding goal")->check(CLI::IsMember({"em", "ham"}))->capture_default_str();
  cmd.add_option("--pcc-cap", c.pcc_cap, "path cap for exhaustive decoding")->capture_default_str();
  cmd.add_option("--epochs", c.epochs, "maximum training epochs per link")->capture_default_str();
  cmd.add_option("--build-fraction", c.build_fraction, "build share of the order-search split")
      ->capture_default_str();
  cmd.add_flag("--random-order", c.random_order, "start cc/pcc/mcc from a seeded random order");
  cmd.add_option("--seed", c.seed, "master seed")->required();
  cmd.add_option("--out", c.out, "output directory")->capture_default_str();
}

mcc::MethodSpec method_spec(const RunConfig& c, const std::string& name) {
  mcc::MethodSpec s;
  s.method = mcc::parse_method(name);
  s.ty = c.ty;
  s.ts = c.ts;
  s.population = c.pop;
  s.beta = c.beta;
  s.tempering_start = c.tp;
  s.payoff = mcc::parse_payoff_kind(c.payoff);
  if (c.proposal) {
    s.proposal = *c.proposal == "tempered" ? mcc::ProposalKind::Type::TemperedSwap
                                           : mcc::ProposalKind::Type::UniformSwap;
  }
  s.goal = mcc::parse_inference_goal(c.goal);
  s.pcc_cap = c.pcc_cap;
  s.train.max_epochs = c.epochs;
  s.build_fraction = c.build_fraction;
  s.random_order = c.random_order;
  s.validate();
  return s;
}

mcc::Dataset load(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("dataset not found: " + path);
  return mcc::load_dataset(path);
}

fs::path out_dir(const RunConfig& c) {
  fs::path dir(c.out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const json& j) { open_out(path) << j.dump(2) << '\n'; }

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& c,
                    const std::vector<mcc::MethodSpec>& specs, const std::vector<std::string>& outputs) {
  json methods = json::array();
  for (const auto& s : specs) methods.push_back(mcc::to_json(s));
  json j{{"version", mcc::kVersion},
         {"command", command},
         {"seed", c.seed},
         {"data", c.data},
         {"methods", methods},
         {"outputs", outputs}};
  if (command == "evaluate") {
    j["folds"] = c.folds;
    j["workers"] = c.workers;
    j["timing"] = c.timing;
  }
  if (command == "predict") j["model"] = c.model;
  if (command == "search") j["oracle"] = c.oracle;
  write_json(dir / "manifest.json", j);
}

std::string order_text(const mcc::LabelOrder& s) {
  std::string t;
  for (std::size_t i = 0; i < s.size(); ++i) t += (i ? " " : "") + std::to_string(s[i]);
  return t;
}

int cmd_train(const RunConfig& c) {
  const auto spec = method_spec(c, c.methods.at(0));
  const auto data = load(c.data.at(0));
  const auto dir = out_dir(c);
  const auto outcome = mcc::fit_method(data, spec, c.seed);
  std::vector<std::string> outputs{"model.json"};
  write_json(dir / "model.json", mcc::to_json(outcome.model));
  if (outcome.trace) {
    auto out = open_out(dir / "trace.csv");
    mcc::write_trace_csv(out, *outcome.trace);
    outputs.push_back("trace.csv");
  }
  if (outcome.population) {
    auto out = open_out(dir / "population.csv");
    mcc::write_population_csv(out, *outcome.population);
    outputs.push_back("population.csv");
    if (outcome.population->short_population) {
      std::cerr << "warning: only " << outcome.population->orders.size()
                << " distinct orders visited, fewer than M = " << spec.population << '\n';
    }
  }
  write_manifest(dir, "train", c, {spec}, outputs);
  std::cout << "model written to " << (dir / "model.json").string() << '\n';
  return 0;
}

int cmd_predict(const RunConfig& c) {
  const auto spec = method_spec(c, c.methods.at(0));
  const auto data = load(c.data.at(0));
  if (!fs::exists(c.model)) throw UsageError("model not found: " + c.model);
  std::ifstream in(c.model);
  const auto model = mcc::trained_model_from_json(json::parse(in));
  const auto dir = out_dir(c);
  const auto results = mcc::predict_all(model, spec, data, c.seed);

  std::vector<mcc::PredictionRow> rows;
  double em = 0.0;
  double ham = 0.0;
  for (std::size_t n = 0; n < results.size(); ++n) {
    rows.push_back({n, results[n]});
    em += 1.0 - mcc::exact_match_loss(data[n].labels, results[n].prediction);
    ham += 1.0 - mcc::normalized_hamming_loss(data[n].labels, results[n].prediction);
  }
  auto out = open_out(dir / "predictions.csv");
  mcc::write_predictions_csv(out, rows);
  write_manifest(dir, "predict", c, {spec}, {"predictions.csv"});
  const double n = static_cast<double>(std::max<std::size_t>(1, data.size()));
  std::cout << "exact_match=" << em / n << " hamming_score=" << ham / n << '\n';
  return 0;
}

int cmd_search(const RunConfig& c, bool method_given) {
  const auto spec = method_spec(c, method_given ? c.methods.at(0) : "mscc");
  if (spec.method != mcc::Method::MsCC && spec.method != mcc::Method::PMsCC &&
      spec.method != mcc::Method::PtMsCC) {
    throw UsageError("search needs --method mscc, pmscc or ptmscc");
  }
  const auto data = load(c.data.at(0));
  const auto dir = out_dir(c);
  auto setup = mcc::search_setup(data, spec, c.seed);
  mcc::Rng rng(setup.search_seed);

  json report;
  std::vector<std::string> outputs{"search.json"};
  if (spec.method == mcc::Method::MsCC) {
    const auto found = mcc::search_order(setup.context, spec.payoff, spec.proposal_kind(),
                                         setup.initial, spec.ts, rng);
    auto out = open_out(dir / "trace.csv");
    mcc::write_trace_csv(out, found.trace);
    outputs.push_back("trace.csv");
    report["order"] = found.order.perm();
    report["payoff"] = found.payoff;
  } else {
    const auto pop = mcc::search_population(setup.context, spec.payoff, spec.proposal_kind(),
                                            setup.initial, spec.ts, spec.population, rng);
    auto out = open_out(dir / "population.csv");
    mcc::write_population_csv(out, pop);
    outputs.push_back("population.csv");
    if (pop.short_population) {
      std::cerr << "warning: only " << pop.orders.size() << " distinct orders visited, fewer than M = "
                << spec.population << '\n';
    }
    report["order"] = pop.orders.front().perm();
    report["payoff"] = pop.weights.front();
    report["short_population"] = pop.short_population;
  }
  report["payoff_kind"] = mcc::to_string(spec.payoff);
  if (c.oracle) {
    const auto best = mcc::exhaustive_order_search(setup.context, spec.payoff);
    report["oracle_order"] = best.order.perm();
    report["oracle_payoff"] = best.payoff;
    report["matches_oracle"] = report["payoff"].get<double>() == best.payoff;
  }
  write_json(dir / "search.json", report);
  write_manifest(dir, "search", c, {spec}, outputs);
  std::cout << "order=" << order_text(mcc::LabelOrder(report["order"].get<std::vector<int>>()));
  if (c.oracle) std::cout << " matches_oracle=" << (report["matches_oracle"].get<bool>() ? "yes" : "no");
  std::cout << '\n';
  return 0;
}

int cmd_evaluate(const RunConfig& c) {
  std::vector<mcc::MethodSpec> specs;
  for (const auto& m : c.methods) specs.push_back(method_spec(c, m));
  std::vector<std::pair<std::string, mcc::Dataset>> datasets;
  for (const auto& path : c.data) datasets.emplace_back(fs::path(path).stem().string(), load(path));
  const auto dir = out_dir(c);

  mcc::EvalOptions opts;
  opts.folds = c.folds;
  opts.seed = c.seed;
  opts.workers = c.workers;

  std::vector<mcc::ComparisonTable> tables;
  for (const auto& [name, data] : datasets) tables.push_back(mcc::compare(data, name, specs, opts));

  // Each table writes its own header; keep only the first one.
  auto concat = [&](auto write) {
    std::string text;
    for (std::size_t i = 0; i < tables.size(); ++i) {
      std::ostringstream part;
      write(part, tables[i]);
      auto s = part.str();
      if (i > 0) s = s.substr(s.find('\n') + 1);
      text += s;
    }
    return text;
  };
  open_out(dir / "results.csv")
      << concat([&](std::ostream& o, const auto& t) { mcc::write_results_csv(o, t, c.timing); });
  open_out(dir / "summary.csv")
      << concat([&](std::ostream& o, const auto& t) { mcc::write_summary_csv(o, t); });
  json rows = json::array();
  for (const auto& t : tables) {
    for (auto& row : mcc::results_json(t, c.timing)) rows.push_back(std::move(row));
  }
  write_json(dir / "results.json", rows);
  write_manifest(dir, "evaluate", c, specs, {"results.csv", "results.json", "summary.csv"});

  for (const auto& t : tables) {
    for (std::size_t i = 0; i < t.methods.size(); ++i) {
      const auto& m = t.methods[i];
      std::cout << t.dataset << ' ' << m.method;
      if (m.completed) {
        std::cout << " exact_match=" << m.exact_match_mean << " hamming_score=" << m.hamming_mean;
      } else {
        std::cout << " DNF";
      }
      std::cout << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classifier chains with Monte Carlo order search and inference"};
  app.set_version_flag("--version", mcc::kVersion);
  app.set_config("--config", "", "TOML/INI file with option values; flags override it");
  app.require_subcommand(1);

  RunConfig c;

  auto* train = app.add_subcommand("train", "fit a method and write model.json");
  train->add_option("--data", c.data, "training dataset")->required()->expected(1);
  train->add_option("--method", c.methods, "method key")->expected(1)->capture_default_str();
  add_method_options(*train, c);

  auto* search = app.add_subcommand("search", "search for a label order or population of orders");
  search->add_option("--data", c.data, "dataset")->required()->expected(1);
  search->add_option("--method", c.methods, "mscc, pmscc or ptmscc")->expected(1);
  search->add_flag("--oracle", c.oracle, "also run the exhaustive order search");
  add_method_options(*search, c);

  auto* predict = app.add_subcommand("predict", "decode a dataset with a trained model");
  predict->add_option("--data", c.data, "dataset")->required()->expected(1);
  predict->add_option("--model", c.model, "model.json from train")->required();
  predict->add_option("--method", c.methods, "method the model was trained with")->expected(1);
  add_method_options(*predict, c);

  auto* evaluate = app.add_subcommand("evaluate", "k-fold comparison of methods");
  evaluate->add_option("--data", c.data, "one or more datasets")->required();
  evaluate->add_option("--method", c.methods, "comma-separated method keys")->delimiter(',');
  evaluate->add_option("--folds", c.folds, "number of folds")->capture_default_str();
  evaluate->add_option("--workers", c.workers, "worker threads (default: logical cores)");
  evaluate->add_flag("--timing", c.timing, "record wall-clock times in the results");
  add_method_options(*evaluate, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (c.workers == 0) throw UsageError("--workers must be at least 1");
    if (*train) return cmd_train(c);
    if (*search) return cmd_search(c, search->count("--method") > 0);
    if (*predict) return cmd_predict(c);
    return cmd_evaluate(c);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const mcc::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
