#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "kanids/error.hpp"
#include "kanids/json_io.hpp"
#include "kanids/metrics.hpp"
#include "kanids/models.hpp"
#include "kanids/spline.hpp"
#include "kanids/train.hpp"

namespace py = pybind11;
using namespace kanids;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Labels = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& x) {
    if (x.ndim() != 2) throw Error(ErrorKind::ShapeMismatch, "expected a 2-d array");
    const auto rows = static_cast<std::size_t>(x.shape(0)), cols = static_cast<std::size_t>(x.shape(1));
    return Tensor({rows, cols}, std::vector<double>(x.data(), x.data() + rows * cols));
}

Array to_array(const Tensor& t) {
    std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
    Array out(shape);
    std::copy(t.values().begin(), t.values().end(), out.mutable_data());
    return out;
}

DatasetSplit to_split(const Array& x, const Labels& y) {
    DatasetSplit s;
    s.features = to_tensor(x);
    s.labels.assign(y.data(), y.data() + y.size());
    for (std::size_t i = 0; i < s.features.dim(1); ++i) s.feature_names.push_back("f" + std::to_string(i));
    if (s.labels.size() != s.features.dim(0))
        throw Error(ErrorKind::LengthMismatch, "features and labels disagree on row count");
    return s;
}

py::dict metrics_dict(const Metrics& m) {
    py::dict d;
    d["accuracy"] = m.accuracy;
    d["precision"] = m.precision;
    d["recall"] = m.recall;
    d["f1"] = m.f1;
    return d;
}

}  // namespace

PYBIND11_MODULE(_kanids, m) {
    m.doc() = "B-spline KAN layers and intrusion-detection baselines";

    py::register_exception<Error>(m, "KanidsError", PyExc_RuntimeError);

    m.def(
        "basis",
        [](double lo, double hi, int grid_size, int degree, double x) {
            const BasisEval b = eval_basis(make_grid(lo, hi, grid_size, degree), x);
            return py::make_tuple(py::array(py::cast(b.values)), py::array(py::cast(b.derivs)));
        },
        py::arg("lo"), py::arg("hi"), py::arg("grid_size"), py::arg("degree"), py::arg("x"),
        "Basis values and derivatives at x.");

    m.def(
        "metrics",
        [](std::uint64_t tp, std::uint64_t tn, std::uint64_t fp, std::uint64_t fn, bool macro) {
            const Confusion c{tp, tn, fp, fn};
            return metrics_dict(macro ? macro_metrics(c) : metrics(c));
        },
        py::arg("tp"), py::arg("tn"), py::arg("fp"), py::arg("fn"), py::arg("macro") = false);

    m.def("model_kinds", [] {
        std::vector<std::string> out;
        for (ModelKind k : kAllModelKinds) out.emplace_back(to_token(k));
        return out;
    });

    py::class_<Model>(m, "Model")
        .def(py::init([](const std::string& spec_json) {
                 return build(model_spec_from_json(nlohmann::json::parse(spec_json)));
             }),
             py::arg("spec_json"))
        .def_property_readonly("name", &Model::name)
        .def_property_readonly("spec_json", [](const Model& self) { return to_json(self.spec()).dump(); })
        .def_property_readonly("parameter_count", &Model::parameter_count)
        .def_property_readonly("layer_kinds", &Model::layer_kinds)
        .def("forward", [](Model& self, const Array& x) { return to_array(self.forward(to_tensor(x))); })
        .def(
            "predict",
            [](Model& self, const Array& x, double threshold) {
                const auto labels = self.predict(to_tensor(x), threshold);
                return py::array(py::cast(labels));
            },
            py::arg("x"), py::arg("threshold") = 0.5)
        .def("flat_parameters", [](const Model& self) { return py::array(py::cast(self.flat_parameters())); })
        .def("save", [](Model& self, const std::filesystem::path& path) { save_model(self, path); })
        .def_static("load", [](const std::filesystem::path& path) { return load_model(path); });

    m.def(
        "train",
        [](Model& model, const Array& x, const Labels& y, const std::string& config_json,
           std::optional<Array> x_test, std::optional<Labels> y_test) {
            const DatasetSplit train = to_split(x, y);
            DatasetSplit test;
            if (x_test && y_test) test = to_split(*x_test, *y_test);
            RunReport r;
            {
                py::gil_scoped_release release;
                r = train_model(model, train, test, train_config_from_json(nlohmann::json::parse(config_json)));
            }
            return to_json(r, true).dump();
        },
        py::arg("model"), py::arg("x"), py::arg("y"), py::arg("config_json") = "{}", py::arg("x_test") = py::none(),
        py::arg("y_test") = py::none(), "Trains in place and returns the run report as JSON text.");
}
