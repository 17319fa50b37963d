// Python bindings for the main operations: datasets, method specs, training,
// prediction, order search and cross-validation.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "mcc/core_data.hpp"
#include "mcc/error.hpp"
#include "mcc/evaluation.hpp"
#include "mcc/methods.hpp"
#include "mcc/order_search.hpp"
#include "mcc/version.hpp"

namespace py = pybind11;
using namespace mcc;

namespace {

Dataset make_dataset(const std::vector<int>& classes, const std::vector<std::vector<double>>& features,
                     const std::vector<std::vector<int>>& labels) {
  if (features.size() != labels.size()) throw ArgumentError("features and labels differ in length");
  std::vector<Instance> rows;
  rows.reserve(features.size());
  for (std::size_t n = 0; n < features.size(); ++n) rows.push_back({features[n], LabelVector(labels[n])});
  const std::size_t dim = features.empty() ? 0 : features[0].size();
  return Dataset(LabelSpace(classes), dim, std::move(rows));
}

MethodSpec make_spec(const std::string& method, long ty, long ts, std::size_t population, double beta,
                     std::optional<long> tp, const std::string& payoff, std::optional<std::string> proposal,
                     const std::string& goal, int epochs, std::uint64_t pcc_cap, double build_fraction,
                     bool random_order) {
  MethodSpec s;
  s.method = parse_method(method);
  s.ty = ty;
  s.ts = ts;
  s.population = population;
  s.beta = beta;
  s.tempering_start = tp;
  s.payoff = parse_payoff_kind(payoff);
  if (proposal) {
    if (*proposal == "tempered") {
      s.proposal = ProposalKind::Type::TemperedSwap;
    } else if (*proposal == "swap") {
      s.proposal = ProposalKind::Type::UniformSwap;
    } else {
      throw ArgumentError("unknown proposal: " + *proposal);
    }
  }
  s.goal = parse_inference_goal(goal);
  s.train.max_epochs = epochs;
  s.pcc_cap = pcc_cap;
  s.build_fraction = build_fraction;
  s.random_order = random_order;
  s.validate();
  return s;
}

struct Model {
  TrainedModel model;
  MethodSpec spec;
  std::optional<SearchTrace> trace;
  std::optional<OrderPopulation> population;
};

py::dict prediction(const InferenceResult& r) {
  py::dict d;
  d["labels"] = r.prediction.values();
  d["score"] = r.score;
  d["samples_used"] = r.samples_used;
  return d;
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["method"] = m.method;
  d["exact_match_mean"] = m.exact_match_mean;
  d["exact_match_std"] = m.exact_match_std;
  d["hamming_mean"] = m.hamming_mean;
  d["hamming_std"] = m.hamming_std;
  d["completed"] = m.completed;
  py::list folds;
  for (const auto& f : m.folds) {
    py::dict row;
    row["fold"] = f.fold;
    row["exact_match"] = f.exact_match;
    row["hamming_score"] = f.hamming_score;
    row["status"] = f.status;
    folds.append(row);
  }
  d["folds"] = folds;
  return d;
}

}  // namespace

PYBIND11_MODULE(_mcchain, m) {
  m.doc() = "Classifier chains with Monte Carlo order search and inference";
  m.attr("__version__") = kVersion;

  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<IntractableError>(m, "IntractableError", PyExc_RuntimeError);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("classes"), py::arg("features"), py::arg("labels"))
      .def("__len__", &Dataset::size)
      .def_property_readonly("dim", &Dataset::dim)
      .def_property_readonly("classes", [](const Dataset& d) { return d.space().class_counts(); })
      .def_property_readonly("features", [](const Dataset& d) {
        std::vector<std::vector<double>> out;
        for (const auto& inst : d.instances()) out.push_back(inst.features);
        return out;
      })
      .def_property_readonly("labels", [](const Dataset& d) {
        std::vector<std::vector<int>> out;
        for (const auto& inst : d.instances()) out.push_back(inst.labels.values());
        return out;
      })
      .def("split", [](const Dataset& d, double fraction, std::uint64_t seed) { return split(d, fraction, seed); },
           py::arg("fraction"), py::arg("seed"));

  m.def("load_dataset", [](const std::filesystem::path& p) { return load_dataset(p); }, py::arg("path"));
  m.def("save_dataset", [](const std::filesystem::path& p, const Dataset& d) { save_dataset(p, d); },
        py::arg("path"), py::arg("data"));

  py::class_<MethodSpec>(m, "MethodSpec")
      .def(py::init(&make_spec), py::arg("method") = "cc", py::arg("ty") = 100, py::arg("ts") = 50,
           py::arg("population") = 10, py::arg("beta") = 0.03, py::arg("tp") = py::none(),
           py::arg("payoff") = "em", py::arg("proposal") = py::none(), py::arg("goal") = "em",
           py::arg("epochs") = 2000, py::arg("pcc_cap") = kDefaultExhaustiveCap,
           py::arg("build_fraction") = kDefaultBuildFraction, py::arg("random_order") = false)
      .def_property_readonly("method", [](const MethodSpec& s) { return std::string(to_string(s.method)); })
      .def("to_json", [](const MethodSpec& s) { return to_json(s).dump(); });

  py::class_<Model>(m, "Model")
      .def_property_readonly("spec", [](const Model& md) { return md.spec; })
      .def("predict",
           [](const Model& md, const Dataset& data, std::uint64_t seed) {
             std::vector<InferenceResult> results;
             {
               py::gil_scoped_release release;
               results = predict_all(md.model, md.spec, data, seed);
             }
             py::list out;
             for (const auto& r : results) out.append(prediction(r));
             return out;
           },
           py::arg("data"), py::arg("seed"))
      .def("predict_one",
           [](const Model& md, const std::vector<double>& x, std::uint64_t seed) {
             Rng rng(seed);
             return prediction(predict_with(md.model, md.spec, x, rng));
           },
           py::arg("x"), py::arg("seed"))
      .def("to_json", [](const Model& md) { return to_json(md.model).dump(); })
      .def_property_readonly("trace", [](const Model& md) -> py::object {
        if (!md.trace) return py::none();
        py::list rows;
        for (const auto& e : md.trace->accepted) {
          py::dict row;
          row["t"] = e.iteration;
          row["order"] = e.order.perm();
          row["em"] = e.payoffs.em_sum;
          row["em_prod_log"] = e.payoffs.em_prod_log;
          row["ham"] = e.payoffs.ham_sum;
          rows.append(row);
        }
        return rows;
      })
      .def_property_readonly("population", [](const Model& md) -> py::object {
        if (!md.population) return py::none();
        py::list rows;
        for (std::size_t i = 0; i < md.population->orders.size(); ++i) {
          rows.append(py::make_tuple(md.population->orders[i].perm(), md.population->weights[i]));
        }
        return rows;
      });

  m.def("fit",
        [](const Dataset& data, const MethodSpec& spec, std::uint64_t seed) {
          py::gil_scoped_release release;
          auto out = fit_method(data, spec, seed);
          return Model{std::move(out.model), spec, std::move(out.trace), std::move(out.population)};
        },
        py::arg("data"), py::arg("spec"), py::arg("seed"));

  m.def("model_from_json",
        [](const std::string& text, const MethodSpec& spec) {
          return Model{trained_model_from_json(nlohmann::json::parse(text)), spec, {}, {}};
        },
        py::arg("text"), py::arg("spec"));

  m.def("search_order",
        [](const Dataset& data, const MethodSpec& spec, std::uint64_t seed, bool oracle) {
          py::dict d;
          std::optional<SearchResult> best;
          std::optional<SearchResult> result;
          {
            py::gil_scoped_release release;
            auto setup = search_setup(data, spec, seed);
            Rng rng(setup.search_seed);
            result = mcc::search_order(setup.context, spec.payoff, spec.proposal_kind(), setup.initial, spec.ts, rng);
            if (oracle) best = exhaustive_order_search(setup.context, spec.payoff);
          }
          d["order"] = result->order.perm();
          d["payoff"] = result->payoff;
          if (best) {
            d["oracle_order"] = best->order.perm();
            d["oracle_payoff"] = best->payoff;
          }
          return d;
        },
        py::arg("data"), py::arg("spec"), py::arg("seed"), py::arg("oracle") = false,
        "Hill-climb order search on an internal build/validate split of data.");

  m.def("cross_validate",
        [](const Dataset& data, const MethodSpec& spec, std::size_t folds, std::uint64_t seed,
           std::size_t workers) {
          EvalOptions opts;
          opts.folds = folds;
          opts.seed = seed;
          opts.workers = workers;
          Metrics result;
          {
            py::gil_scoped_release release;
            result = mcc::cross_validate(data, spec, opts);
          }
          return metrics_dict(result);
        },
        py::arg("data"), py::arg("spec"), py::arg("folds") = 5, py::arg("seed") = 0, py::arg("workers") = 1);
}
