#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tensorfda/archive.hpp"
#include "tensorfda/errors.hpp"
#include "tensorfda/imaging.hpp"
#include "tensorfda/io.hpp"
#include "tensorfda/pipeline.hpp"

namespace py = pybind11;
using namespace tensorfda;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ImageGrid image_from(const Array& a) {
    if (a.ndim() != 2) throw InputError("expected a 2D array");
    const auto h = static_cast<std::size_t>(a.shape(0));
    const auto w = static_cast<std::size_t>(a.shape(1));
    return ImageGrid(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

Array image_to(const ImageGrid& img) {
    Array out({img.height, img.width});
    std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
    return out;
}

nlohmann::json to_nlohmann(const py::object& obj) {
    const std::string text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
    return nlohmann::json::parse(text);
}

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spline bases, knot densities, topology transforms and the FPCA classifier";

    static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
    static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
    static py::exception<FormatError> format_error(m, "FormatError", base.ptr());
    static py::exception<VersionError> version_error(m, "VersionError", format_error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            PyErr_SetString(config_error.ptr(), e.what());
        } catch (const VersionError& e) {
            PyErr_SetString(version_error.ptr(), e.what());
        } catch (const FormatError& e) {
            PyErr_SetString(format_error.ptr(), e.what());
        } catch (const Error& e) {
            PyErr_SetString(base.ptr(), e.what());
        }
    });

    py::enum_<Boundary>(m, "Boundary").value("zero", Boundary::zero).value("free", Boundary::free);

    py::class_<OrthonormalBasis>(m, "OrthonormalBasis")
        .def(py::init([](std::vector<double> knots, int degree, Boundary boundary) {
                 return orthonormalize(BasisSpec(KnotVector(std::move(knots)), degree, boundary));
             }),
             py::arg("knots"), py::arg("degree") = 3, py::arg("boundary") = Boundary::free)
        .def_static(
            "uniform",
            [](double a, double b, std::size_t interior, int degree, Boundary boundary) {
                return orthonormalize(BasisSpec(KnotVector::uniform(a, b, interior), degree, boundary));
            },
            py::arg("a"), py::arg("b"), py::arg("interior"), py::arg("degree") = 3,
            py::arg("boundary") = Boundary::free)
        .def_property_readonly("dimension", &OrthonormalBasis::dimension)
        .def_property_readonly("change_of_basis", &OrthonormalBasis::change_of_basis)
        .def(
            "evaluate", [](const OrthonormalBasis& b, std::vector<double> xs) { return b.evaluation_matrix(xs); },
            "Matrix with one row per point and one column per basis function.")
        .def(
            "project",
            [](const OrthonormalBasis& b, std::vector<double> xs, std::vector<double> ys) {
                return Eigen::VectorXd(project_1d(xs, ys, b).coefficients());
            },
            "Orthonormal coefficients of the piecewise-linear interpolant of (xs, ys).");

    py::class_<HilbertMap>(m, "HilbertMap")
        .def(py::init<int>(), py::arg("order"))
        .def_property_readonly("side", &HilbertMap::size)
        .def_property_readonly("length", &HilbertMap::length)
        .def("forward", [](const HilbertMap& h, std::uint32_t i, std::uint32_t j) { return h.forward(Cell{i, j}); })
        .def("backward", [](const HilbertMap& h, std::uint64_t t) {
            const Cell c = h.backward(t);
            return py::make_tuple(c.i, c.j);
        });

    m.def("gradient_image", [](const Array& a) { return image_to(gradient_image(image_from(a))); });
    m.def("hilbert_sequence", [](const Array& a) {
        const ImageGrid img = image_from(a);
        return image_to_sequence(img, hilbert_map(hilbert_order_for(img))).values;
    });

    m.def(
        "run_pipeline",
        [](const py::object& config, std::optional<std::filesystem::path> out_dir) {
            const PipelineConfig c = parse_config(config.is_none() ? nlohmann::json::object() : to_nlohmann(config));
            const PipelineReport r = run_pipeline(c, out_dir);
            return to_python(r.metrics);
        },
        py::arg("config") = py::none(), py::arg("out_dir") = py::none(),
        "Runs every stage from a config dict and returns the metrics dict.");
    m.def("default_config", [] { return to_python(config_to_json(PipelineConfig{})); });

    m.def(
        "classify",
        [](const std::filesystem::path& model, std::vector<double> xs, std::vector<double> ys) {
            const ModelArchive a = load_model(model);
            const ClassificationResult r = classify(make_sample(std::move(xs), std::move(ys)), a.model);
            return py::make_tuple(r.label, r.residuals);
        },
        py::arg("model"), py::arg("xs"), py::arg("ys"), "Label and per-class residuals of one 1D curve.");

    m.def("read_csv_curves", [](const std::filesystem::path& p) {
        const CurveTable t = read_csv_table(p);
        py::dict out;
        if (!t.samples.empty()) out["x"] = t.samples.front().axes[0];
        for (std::size_t i = 0; i < t.samples.size(); ++i) out[py::str(t.names[i])] = t.samples[i].values;
        return out;
    });
}
