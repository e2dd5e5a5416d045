#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "thor/bench.hpp"
#include "thor/data.hpp"
#include "thor/gradcheck.hpp"
#include "thor/trainer.hpp"

namespace py = pybind11;
using namespace thor;

namespace {

std::vector<RankLabel> to_ranks(const std::vector<int>& v) {
  std::vector<RankLabel> out;
  out.reserve(v.size());
  for (int x : v) out.emplace_back(x);
  return out;
}

std::vector<int> to_ints(const std::vector<RankLabel>& v) {
  std::vector<int> out;
  out.reserve(v.size());
  for (RankLabel r : v) out.push_back(r.value);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Threshold-based ordinal regression";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<InvalidPair>(m, "InvalidPair", base.ptr());
  py::register_exception<UncoverableClass>(m, "UncoverableClass", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<InfeasibleMargin>(m, "InfeasibleMargin", base.ptr());
  py::register_exception<StaleTape>(m, "StaleTape", base.ptr());
  py::register_exception<NumericFault>(m, "NumericFault", base.ptr());

  py::enum_<Method>(m, "Method")
      .value("THOR", Method::kThor)
      .value("ORCNN", Method::kOrcnn)
      .value("CORAL", Method::kCoral)
      .value("CNNPOR", Method::kCnnpor)
      .value("HYBRID", Method::kHybrid);
  py::enum_<Activation>(m, "Activation")
      .value("RELU", Activation::kRelu)
      .value("TANH", Activation::kTanh)
      .value("IDENTITY", Activation::kIdentity);
  py::enum_<InferenceHead>(m, "InferenceHead")
      .value("DEFAULT", InferenceHead::kDefault)
      .value("CLASSIFICATION", InferenceHead::kClassification)
      .value("REGRESSION", InferenceHead::kRegression);
  py::enum_<SelectOn>(m, "SelectOn").value("MAE", SelectOn::kMae).value("ACCURACY", SelectOn::kAccuracy);

  m.def("parse_method", [](const std::string& s) { return parse_method(s); });
  m.def("method_name", [](Method x) { return std::string(method_name(x)); });

  py::class_<Boundaries>(m, "Boundaries")
      .def(py::init<std::vector<double>, double>(), py::arg("thresholds"), py::arg("margin") = 0.0)
      .def_property_readonly("k", &Boundaries::k)
      .def_property_readonly("margin", &Boundaries::margin)
      .def_property_readonly("thresholds", &Boundaries::thresholds)
      .def("margin_feasible", &Boundaries::margin_feasible)
      .def("__eq__", [](const Boundaries& a, const Boundaries& b) { return a == b; });
  m.def(
      "default_boundaries", [](int k, double margin) { return default_boundaries(k).with_margin(margin); },
      py::arg("k"), py::arg("margin") = 0.5);

  m.def("infer_rank_threshold", [](double f, const Boundaries& b) { return infer_rank_threshold(f, b).value; },
        py::arg("score"), py::arg("boundaries"));
  m.def("encode_extended_binary",
        [](int y, int k) { return encode_extended_binary(RankLabel(y), k).bits(); }, py::arg("y"), py::arg("k"));
  m.def("infer_rank_binary", [](const std::vector<int>& d) { return infer_rank_binary(d).value; },
        py::arg("decisions"));

  m.def(
      "thor_pair_loss",
      [](double fi, double fj, int i, const Boundaries& b) {
        const auto r = thor_pair_loss(fi, fj, RankLabel(i), b);
        return py::make_tuple(r.value, r.d_outputs[0](0), r.d_outputs[1](0));
      },
      py::arg("fi"), py::arg("fj"), py::arg("i"), py::arg("boundaries"),
      "Returns (loss, dloss/dfi, dloss/dfj).");
  m.def(
      "thor_violation_count",
      [](double fi, double fj, int i, const Boundaries& b) { return thor_violation_count(fi, fj, RankLabel(i), b); },
      py::arg("fi"), py::arg("fj"), py::arg("i"), py::arg("boundaries"));

  py::class_<OrdinalDataset>(m, "OrdinalDataset")
      .def(py::init([](Eigen::MatrixXd f, const std::vector<int>& y, int k) {
             return OrdinalDataset(std::move(f), to_ranks(y), k);
           }),
           py::arg("features"), py::arg("labels"), py::arg("k"))
      .def_property_readonly("k", &OrdinalDataset::k)
      .def_property_readonly("dim", &OrdinalDataset::dim)
      .def_property_readonly("features", &OrdinalDataset::features)
      .def_property_readonly("labels", [](const OrdinalDataset& d) { return to_ints(d.labels()); })
      .def("__len__", &OrdinalDataset::size);

  m.def(
      "generate_synthetic",
      [](int k, int per_class, int d, double noise, std::uint64_t seed, double label_noise) {
        SyntheticSpec s;
        s.k = k;
        s.per_class = per_class;
        s.d = d;
        s.noise = noise;
        s.transform_seed = seed;
        s.label_noise = label_noise;
        return generate_synthetic(s);
      },
      py::arg("k") = 5, py::arg("per_class") = 200, py::arg("d") = 8, py::arg("noise") = 0.5,
      py::arg("seed") = 42, py::arg("label_noise") = 0.0);
  m.def("load_csv", &load_csv, py::arg("path"), py::arg("k"), py::arg("has_header") = false);
  m.def("write_csv", &write_csv, py::arg("path"), py::arg("dataset"), py::arg("header") = true);

  py::class_<DatasetSplits>(m, "DatasetSplits")
      .def_readonly("train", &DatasetSplits::train)
      .def_readonly("val", &DatasetSplits::val)
      .def_readonly("test", &DatasetSplits::test);
  m.def(
      "split",
      [](const OrdinalDataset& ds, double train, double val, double test, std::uint64_t seed) {
        return split(ds, SplitRatios{train, val, test}, seed);
      },
      py::arg("dataset"), py::arg("train") = 0.6, py::arg("val") = 0.2, py::arg("test") = 0.2, py::arg("seed") = 42);

  m.def("accuracy", [](const std::vector<int>& p, const std::vector<int>& y) {
    return accuracy(to_ranks(p), to_ranks(y));
  });
  m.def("mae", [](const std::vector<int>& p, const std::vector<int>& y) { return mae(to_ranks(p), to_ranks(y)); });
  m.def("inconsistency_count", [](const std::vector<std::vector<int>>& d) {
    const auto c = inconsistency_count(d);
    return py::make_tuple(c.count, c.rate);
  });

  py::class_<MetricsReport>(m, "MetricsReport")
      .def_readonly("accuracy", &MetricsReport::accuracy)
      .def_readonly("mae", &MetricsReport::mae)
      .def_readonly("n", &MetricsReport::n)
      .def_readonly("inconsistency_rate", &MetricsReport::inconsistency_rate)
      .def("__repr__", &format_metrics);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("method", &TrainConfig::method)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("lr", &TrainConfig::lr)
      .def_readwrite("gamma", &TrainConfig::gamma)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("thresholds", &TrainConfig::thresholds)
      .def_readwrite("hidden", &TrainConfig::hidden)
      .def_readwrite("activation", &TrainConfig::activation)
      .def_readwrite("select_on", &TrainConfig::select_on)
      .def_readwrite("hybrid_c", &TrainConfig::hybrid_c)
      .def_readwrite("hybrid_head", &TrainConfig::hybrid_head)
      .def_readwrite("allow_infeasible_margin", &TrainConfig::allow_infeasible_margin)
      .def_readwrite("out_dir", &TrainConfig::out_dir)
      .def_property(
          "cnnpor_c", [](const TrainConfig& c) { return c.cnnpor.c; }, [](TrainConfig& c, double v) { c.cnnpor.c = v; })
      .def_property(
          "pair_margin", [](const TrainConfig& c) { return c.cnnpor.pair_margin; },
          [](TrainConfig& c, double v) { c.cnnpor.pair_margin = v; })
      .def("validate", &TrainConfig::validate);

  py::class_<Predictor>(m, "Predictor")
      .def_readonly("method", &Predictor::method)
      .def_readonly("boundaries", &Predictor::boundaries)
      .def_property_readonly("k", &Predictor::k)
      .def_property_readonly("coral_biases", [](const Predictor& p) { return p.coral.biases; })
      .def(
          "predict",
          [](const Predictor& p, const OrdinalDataset& ds, InferenceHead h) { return to_ints(predict_ranks(p, ds, h).ranks); },
          py::arg("dataset"), py::arg("head") = InferenceHead::kDefault)
      .def(
          "evaluate", [](const Predictor& p, const OrdinalDataset& ds, InferenceHead h) { return evaluate(p, ds, h); },
          py::arg("dataset"), py::arg("head") = InferenceHead::kDefault)
      .def("save", [](const Predictor& p, const std::filesystem::path& path) { save_predictor(path, p); })
      .def_static("load", &load_predictor);

  py::class_<EpochRecord>(m, "EpochRecord")
      .def_readonly("train_loss", &EpochRecord::train_loss)
      .def_readonly("val_mae", &EpochRecord::val_mae)
      .def_readonly("val_acc", &EpochRecord::val_acc);
  py::class_<TrainReport>(m, "TrainReport")
      .def_readonly("epochs", &TrainReport::epochs)
      .def_readonly("best_epoch", &TrainReport::best_epoch)
      .def_readonly("best_checkpoint", &TrainReport::best_checkpoint)
      .def_readonly("best", &TrainReport::best);

  m.def("train", &train, py::arg("train_set"), py::arg("val_set"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<ComparisonRow>(m, "ComparisonRow")
      .def_readonly("label", &ComparisonRow::label)
      .def_readonly("method", &ComparisonRow::method)
      .def_readonly("metrics", &ComparisonRow::metrics);
  py::class_<ComparisonTable>(m, "ComparisonTable")
      .def_readonly("rows", &ComparisonTable::rows)
      .def("csv", &comparison_csv)
      .def("text", &comparison_text);
  m.def("compare", &compare, py::arg("methods"), py::arg("splits"), py::arg("config"), py::arg("jobs") = 1,
        py::call_guard<py::gil_scoped_release>());

  py::class_<SweepPoint>(m, "SweepPoint")
      .def_readonly("gamma", &SweepPoint::gamma)
      .def_readonly("accuracy", &SweepPoint::accuracy)
      .def_readonly("mae", &SweepPoint::mae);
  m.def("sweep_gamma", &sweep_gamma, py::arg("gammas"), py::arg("splits"), py::arg("config"),
        py::arg("allow_infeasible") = false, py::arg("jobs") = 1, py::call_guard<py::gil_scoped_release>());

  py::class_<GradcheckResult>(m, "GradcheckResult")
      .def_readonly("max_rel_error", &GradcheckResult::max_rel_error)
      .def_readonly("checked", &GradcheckResult::checked)
      .def_readonly("passed", &GradcheckResult::passed)
      .def_readonly("excluded_pairs", &GradcheckResult::excluded_pairs)
      .def("pass_fraction", &GradcheckResult::pass_fraction);
  m.def(
      "gradcheck", [](Method method, std::uint64_t seed) { return gradcheck_method(method, seed); },
      py::arg("method"), py::arg("seed") = 1);
}
