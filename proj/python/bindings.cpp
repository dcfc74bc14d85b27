#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "suptask/demand.hpp"
#include "suptask/errors.hpp"
#include "suptask/features.hpp"
#include "suptask/forest.hpp"
#include "suptask/geojson.hpp"
#include "suptask/geometry.hpp"
#include "suptask/identify.hpp"
#include "suptask/pipeline.hpp"
#include "suptask/raster.hpp"
#include "suptask/typology.hpp"

namespace py = pybind11;
using namespace suptask;

namespace {

using PyRing = std::vector<std::pair<double, double>>;

Ring to_ring(const PyRing& pts) {
    Ring ring;
    ring.reserve(pts.size());
    for (const auto& [x, y] : pts) ring.push_back(Point{x, y});
    return ring;
}

PyRing from_ring(const Ring& ring) {
    PyRing out;
    out.reserve(ring.size());
    for (const Point& p : ring) out.emplace_back(p.x, p.y);
    return out;
}

Polygon make_polygon(const PyRing& exterior, const std::vector<PyRing>& holes) {
    std::vector<Ring> hole_rings;
    hole_rings.reserve(holes.size());
    for (const auto& h : holes) hole_rings.push_back(to_ring(h));
    return Polygon(to_ring(exterior), std::move(hole_rings));
}

Connectivity connectivity_from(const std::string& s) {
    if (s == "four") return Connectivity::Four;
    if (s == "eight") return Connectivity::Eight;
    throw InvalidParams("connectivity must be 'four' or 'eight'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Residential supply tasks from building masks and footprints";

    py::register_exception<Error>(m, "SuptaskError");

    py::class_<Polygon>(m, "Polygon")
        .def(py::init(&make_polygon), py::arg("exterior"),
             py::arg("holes") = std::vector<PyRing>{})
        .def_property_readonly(
            "exterior", [](const Polygon& p) { return from_ring(p.exterior()); })
        .def_property_readonly("holes",
                               [](const Polygon& p) {
                                   std::vector<PyRing> out;
                                   for (const Ring& h : p.holes()) {
                                       out.push_back(from_ring(h));
                                   }
                                   return out;
                               })
        .def("area", &polygon_area)
        .def("perimeter", &polygon_perimeter)
        .def("centroid",
             [](const Polygon& p) {
                 const Point c = polygon_centroid(p);
                 return std::make_pair(c.x, c.y);
             })
        .def("contains", [](const Polygon& p, double x, double y) {
            return point_in_polygon(Point{x, y}, p);
        });

    py::class_<Footprint>(m, "Footprint")
        .def(py::init([](std::uint64_t id, const Polygon& geometry,
                         const std::string& source) {
                 return make_footprint(id, geometry,
                                       source == "imported"
                                           ? FootprintSource::Imported
                                           : FootprintSource::MaskDerived);
             }),
             py::arg("id"), py::arg("geometry"), py::arg("source") = "imported")
        .def_readonly("id", &Footprint::id)
        .def_readonly("geometry", &Footprint::geometry)
        .def_readonly("area_m2", &Footprint::area_m2)
        .def_property_readonly("source", [](const Footprint& fp) {
            return fp.source == FootprintSource::MaskDerived
                       ? std::string("mask")
                       : std::string("imported");
        });

    m.def("polygon_area", &polygon_area);
    m.def("convex_hull", [](const Polygon& p) { return convex_hull(p); });
    m.def("oriented_bbox", [](const Polygon& p) {
        const OrientedBBox box = oriented_bbox(p);
        return py::make_tuple(box.width, box.height, box.angle);
    });
    m.def("simplify", &simplify, py::arg("polygon"), py::arg("tolerance"));
    m.def("merge_contiguous", &merge_contiguous, py::arg("footprints"),
          py::arg("gap_tolerance") = 0.0);

    py::class_<GeoGrid>(m, "GeoGrid")
        .def_readonly("width", &GeoGrid::width)
        .def_readonly("height", &GeoGrid::height)
        .def_readonly("origin_x", &GeoGrid::origin_x)
        .def_readonly("origin_y", &GeoGrid::origin_y)
        .def_readonly("pixel_size", &GeoGrid::pixel_size)
        .def("occupied_count", &GeoGrid::occupied_count);

    m.def("parse_grid", &parse_grid);
    m.def("emit_grid", &emit_grid);
    m.def(
        "connected_component_count",
        [](const GeoGrid& g, const std::string& conn) {
            return connected_components(g, connectivity_from(conn)).count;
        },
        py::arg("grid"), py::arg("connectivity") = "eight");
    m.def(
        "identify_buildings",
        [](const GeoGrid& g, double min_area_m2,
           std::optional<double> simplify_tolerance_m,
           const std::string& connectivity, double merge_gap_m) {
            IdentificationConfig cfg;
            cfg.min_area_m2 = min_area_m2;
            cfg.simplify_tolerance_m = simplify_tolerance_m;
            cfg.connectivity = connectivity_from(connectivity);
            cfg.merge_gap_m = merge_gap_m;
            return identify_buildings(g, cfg);
        },
        py::arg("grid"), py::arg("min_area_m2") = 25.0,
        py::arg("simplify_tolerance_m") = std::nullopt,
        py::arg("connectivity") = "eight", py::arg("merge_gap_m") = 0.0);
    m.def("import_footprints", &import_footprints);

    py::class_<GeometryFeatures>(m, "GeometryFeatures")
        .def_readonly("area_m2", &GeometryFeatures::area_m2)
        .def_readonly("perimeter_m", &GeometryFeatures::perimeter_m)
        .def_readonly("convexity", &GeometryFeatures::convexity)
        .def_readonly("elongation", &GeometryFeatures::elongation)
        .def_readonly("rectangularity", &GeometryFeatures::rectangularity)
        .def_readonly("compactness", &GeometryFeatures::compactness)
        .def("to_list", [](const GeometryFeatures& f) {
            const auto a = f.to_array();
            return std::vector<double>(a.begin(), a.end());
        });

    m.def("extract_features", &extract_features);
    m.def("feature_names", [] {
        const auto& names = feature_names();
        return std::vector<std::string>(names.begin(), names.end());
    });

    py::enum_<SizeClass>(m, "SizeClass")
        .value("DetachedSingle", SizeClass::DetachedSingle)
        .value("RowHouse", SizeClass::RowHouse)
        .value("PerimeterBlock", SizeClass::PerimeterBlock);

    py::class_<ForestModel>(m, "ForestModel")
        .def_readonly("oob_accuracy", &ForestModel::oob_accuracy)
        .def_property_readonly(
            "n_trees", [](const ForestModel& f) { return f.trees.size(); })
        .def("predict", [](const ForestModel& model,
                           const std::array<double, kFeatureCount>& f) {
            return predict(model, FeatureArray(f));
        });

    m.def(
        "train_forest",
        [](const std::vector<std::array<double, kFeatureCount>>& features,
           const std::vector<SizeClass>& labels, int n_trees, int max_depth,
           int min_samples_leaf, int feature_subsample, bool bootstrap,
           std::uint64_t seed, int threads) {
            TrainParams params;
            params.n_trees = n_trees;
            params.max_depth = max_depth;
            params.min_samples_leaf = min_samples_leaf;
            params.feature_subsample = feature_subsample;
            params.bootstrap = bootstrap;
            params.seed = seed;
            params.n_threads = threads;
            std::vector<FeatureArray> rows(features.begin(), features.end());
            return train_forest(rows, labels, params);
        },
        py::arg("features"), py::arg("labels"), py::arg("n_trees") = 100,
        py::arg("max_depth") = 12, py::arg("min_samples_leaf") = 2,
        py::arg("feature_subsample") = 2, py::arg("bootstrap") = true,
        py::arg("seed") = 0, py::arg("threads") = 1);
    m.def("save_forest", &save_forest);
    m.def("load_forest", &load_forest);
    m.def(
        "classify_hybrid",
        [](const std::vector<Footprint>& fps, const ForestModel& model,
           const std::map<std::uint64_t, SizeClass>& external) {
            const HybridResult r = classify_hybrid(fps, model, external);
            return py::make_tuple(r.labels, r.forest_predictions);
        },
        py::arg("footprints"), py::arg("model"),
        py::arg("external") = std::map<std::uint64_t, SizeClass>{});

    py::class_<YearBand>(m, "YearBand")
        .def_readonly("label", &YearBand::label)
        .def_readonly("lower", &YearBand::lower)
        .def_readonly("upper", &YearBand::upper);

    py::class_<AgeDistribution>(m, "AgeDistribution")
        .def_property_readonly("bands", &AgeDistribution::bands)
        .def_property_readonly("weights", &AgeDistribution::weights);

    py::class_<ResidentialBuildingType>(m, "ResidentialBuildingType")
        .def_readonly("type_id", &ResidentialBuildingType::type_id)
        .def_readonly("size_class", &ResidentialBuildingType::size_class)
        .def_readonly("year_band", &ResidentialBuildingType::year_band)
        .def_readonly("reference_area_m2",
                      &ResidentialBuildingType::reference_area_m2)
        .def_readonly("households", &ResidentialBuildingType::households);

    py::class_<TypologyTable>(m, "TypologyTable")
        .def_property_readonly("rows", &TypologyTable::rows);

    m.def("load_age_distribution", [](const std::string& text) {
        return age_distribution_from_config(Config::parse(text));
    });
    m.def("load_typology", [](const std::string& text) {
        return typology_from_config(Config::parse(text));
    });
    m.def("sample_year_band", &sample_year_band, py::arg("distribution"),
          py::arg("building_id"), py::arg("seed"),
          py::return_value_policy::copy);
    m.def("assign_type", &assign_type, py::arg("table"), py::arg("size_class"),
          py::arg("band"), py::return_value_policy::copy);

    m.def(
        "building_demand",
        [](double area_m2, double reference_area_m2, int households,
           double household_annual_kwh) {
            ResidentialBuildingType rbt;
            rbt.type_id = "inline";
            rbt.reference_area_m2 = reference_area_m2;
            rbt.households = households;
            DemandParams params{household_annual_kwh};
            return building_demand(area_m2, rbt, params);
        },
        py::arg("area_m2"), py::arg("reference_area_m2"), py::arg("households"),
        py::arg("household_annual_kwh"));

    m.def(
        "compare_to_reference",
        [](const std::vector<std::pair<std::string, double>>& presented,
           const std::vector<std::pair<std::string, double>>& reference) {
            std::vector<ZoneDemand> pres;
            pres.reserve(presented.size());
            for (const auto& [zone_id, kwh] : presented) {
                pres.push_back(ZoneDemand{zone_id, 0, kwh});
            }
            const DeviationReport rep = compare_to_reference(pres, reference);
            py::dict zones;
            for (const ZoneDeviation& z : rep.zones) {
                py::dict entry;
                entry["reference_kwh"] = z.reference_kwh;
                entry["presented_kwh"] = z.presented_kwh;
                entry["deviation"] =
                    z.deviation ? py::cast(*z.deviation) : py::none();
                zones[py::str(z.zone_id)] = entry;
            }
            py::dict out;
            out["zones"] = zones;
            out["overall_deviation"] = rep.overall_deviation
                                           ? py::cast(*rep.overall_deviation)
                                           : py::none();
            out["missing_in_presented"] = rep.missing_in_presented;
            out["missing_in_reference"] = rep.missing_in_reference;
            return out;
        },
        py::arg("presented"), py::arg("reference"));

    m.def("parse_geojson_count", [](const std::string& text) {
        return parse_geojson(text).size();
    });

    m.def(
        "run_pipeline",
        [](std::optional<std::string> grid_text,
           std::optional<std::string> footprints_geojson,
           const std::string& config_text,
           std::optional<std::string> typology_text,
           std::optional<std::string> model_text,
           const std::map<std::uint64_t, SizeClass>& external_labels,
           std::optional<std::string> zones_geojson,
           std::optional<std::string> reference_csv, std::uint64_t seed,
           int threads) {
            PipelineInputs inputs;
            inputs.grid_text = std::move(grid_text);
            inputs.footprints_geojson = std::move(footprints_geojson);
            inputs.config_text = config_text;
            inputs.typology_text = std::move(typology_text);
            inputs.model_text = std::move(model_text);
            inputs.external_labels = external_labels;
            inputs.zones_geojson = std::move(zones_geojson);
            inputs.reference_csv = std::move(reference_csv);
            inputs.seed = seed;
            inputs.threads = threads;
            const PipelineResult result = run_pipeline(inputs);
            py::dict files;
            for (const auto& [name, content] : result.files) {
                files[py::str(name)] = py::bytes(content);
            }
            py::dict out;
            out["files"] = files;
            out["forest_predictions"] = result.forest_predictions;
            out["n_footprints"] = result.footprints.size();
            return out;
        },
        py::arg("grid_text") = std::nullopt,
        py::arg("footprints_geojson") = std::nullopt, py::arg("config_text"),
        py::arg("typology_text") = std::nullopt,
        py::arg("model_text") = std::nullopt,
        py::arg("external_labels") = std::map<std::uint64_t, SizeClass>{},
        py::arg("zones_geojson") = std::nullopt,
        py::arg("reference_csv") = std::nullopt, py::arg("seed") = 0,
        py::arg("threads") = 1);

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
