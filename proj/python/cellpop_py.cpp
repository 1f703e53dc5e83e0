// Python bindings. Configs and models cross the boundary as JSON text; the
// package wrapper in cellpop/__init__.py turns them into dicts.
#include "cellpop/config_json.hpp"
#include "cellpop/error.hpp"
#include "cellpop/ingest.hpp"
#include "cellpop/raster.hpp"
#include "cellpop/render.hpp"
#include "cellpop/stats.hpp"
#include "cellpop/svg.hpp"
#include "cellpop/transform.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace cellpop;
using nlohmann::json;

namespace {

ViewConfig config_from(const Dataset& d, const std::string& config_json) {
    const auto patch = config_json.empty() ? json::object() : json::parse(config_json);
    auto config = merge_config(default_config(d), patch);
    auto violations = validate_config(d, config);
    if (!violations.empty()) throw ConfigError(std::move(violations));
    return config;
}

RenderModel model_for(const Dataset& d, const std::string& config_json) {
    const auto config = config_from(d, config_json);
    return build_render_model(apply_view(d, config), config);
}

json view_json(const DisplayedView& v) {
    std::vector<CountsMatrix::Count> raw(v.raw.values().begin(), v.raw.values().end());
    return json{{"rows", v.row_order},
                {"cols", v.col_order},
                {"values", v.values.values},
                {"raw", raw},
                {"row_axis", to_string(v.row_axis)},
                {"grouped", v.grouped},
                {"warnings", v.warnings}};
}

} // namespace

PYBIND11_MODULE(_cellpop, m) {
    m.doc() = "Cell-population heatmap engine";

    static py::exception<Error> error(m, "CellpopError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = error;
            py::object instance = exc(e.what());
            instance.attr("code") = std::string(to_string(e.code()));
            if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) {
                py::list violations;
                for (const auto& v : ce->violations()) violations.append(py::make_tuple(v.field, v.reason));
                instance.attr("violations") = violations;
            }
            PyErr_SetObject(error.ptr(), instance.ptr());
        } catch (const json::exception& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    py::class_<Dataset, std::shared_ptr<Dataset>>(m, "Dataset")
        .def_property_readonly("name", &Dataset::name)
        .def_property_readonly("samples", [](const Dataset& d) { return d.counts().row_ids(); })
        .def_property_readonly("cell_types", [](const Dataset& d) { return d.counts().col_ids(); })
        .def_property_readonly("counts",
                               [](const Dataset& d) {
                                   const auto& c = d.counts();
                                   std::vector<std::vector<CountsMatrix::Count>> rows(c.rows());
                                   for (std::size_t r = 0; r < c.rows(); ++r)
                                       for (std::size_t k = 0; k < c.cols(); ++k) rows[r].push_back(c.at(r, k));
                                   return rows;
                               })
        .def("__repr__", [](const Dataset& d) {
            return "<Dataset " + d.name() + ": " + std::to_string(d.counts().rows()) + " samples x " +
                   std::to_string(d.counts().cols()) + " cell types>";
        });

    m.def(
        "load_dataset", [](const std::filesystem::path& p) { return std::make_shared<Dataset>(load_dataset(p).dataset); },
        py::arg("path"), "Load a dataset directory or file.");
    m.def("discover_datasets", &discover_datasets, py::arg("data_dir"));
    m.def(
        "dataset_from_counts_csv",
        [](const std::string& text, const std::string& name) {
            return std::make_shared<Dataset>(assemble_dataset(parse_counts_csv(text), std::nullopt, std::nullopt, name));
        },
        py::arg("text"), py::arg("name") = "dataset");

    m.def(
        "default_config", [](const Dataset& d) { return to_json(default_config(d)).dump(); }, py::arg("dataset"));
    m.def(
        "apply_view", [](const Dataset& d, const std::string& cfg) { return view_json(apply_view(d, config_from(d, cfg))).dump(); },
        py::arg("dataset"), py::arg("config_json") = "");
    m.def(
        "render_model", [](const Dataset& d, const std::string& cfg) { return to_json(model_for(d, cfg)).dump(); },
        py::arg("dataset"), py::arg("config_json") = "");
    m.def(
        "render_svg",
        [](const Dataset& d, const std::string& cfg, int w, int h) { return render_svg(model_for(d, cfg), w, h); },
        py::arg("dataset"), py::arg("config_json") = "", py::arg("width") = kPngBaseWidth,
        py::arg("height") = kPngBaseHeight);
    m.def(
        "render_png",
        [](const Dataset& d, const std::string& cfg, int scale) {
            const auto bytes = render_png(model_for(d, cfg), scale);
            return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        },
        py::arg("dataset"), py::arg("config_json") = "", py::arg("scale") = 2);
    m.def(
        "preset_stacked_bars", [](const Dataset& d) { return to_json(preset_stacked_bars(default_config(d))).dump(); },
        py::arg("dataset"));

    m.def(
        "kde",
        [](const std::vector<double>& values, std::size_t grid_size) {
            const auto c = kde(values, grid_size);
            return py::dict(py::arg("grid") = c.grid, py::arg("density") = c.density, py::arg("bandwidth") = c.bandwidth,
                            py::arg("n") = c.n);
        },
        py::arg("values"), py::arg("grid_size") = 128);
    m.def(
        "unique_type_summary",
        [](const std::vector<std::shared_ptr<Dataset>>& datasets) {
            std::vector<const Dataset*> ptrs;
            for (const auto& d : datasets) ptrs.push_back(d.get());
            return summary_csv(unique_type_summary(ptrs));
        },
        py::arg("datasets"), "CSV text: one line per dataset plus a trailing mean row.");
}
