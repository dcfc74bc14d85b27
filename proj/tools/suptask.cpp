// suptask: building masks / footprints -> residential electricity supply
// task. Subcommands cover each stage plus a one-shot pipeline; outputs are
// byte-identical across runs for the same inputs, config and seed.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "suptask/errors.hpp"
#include "suptask/geojson.hpp"
#include "suptask/pipeline.hpp"
#include "suptask/raster.hpp"

namespace fs = std::filesystem;
using namespace suptask;

namespace {

bool g_json_errors = false;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open input file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    const fs::path p(path);
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open output file: " + path);
    }
    out << content;
    if (!out) {
        throw Error("failed writing output file: " + path);
    }
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (c == '\n') {
            out += "\\n";
        } else {
            out += c;
        }
    }
    return out;
}

void report_error(const char* kind, const std::string& message) {
    if (g_json_errors) {
        std::cerr << "{\"error\":\"" << kind << "\",\"message\":\""
                  << json_escape(message) << "\"}\n";
    } else {
        std::cerr << "suptask: error: " << message << "\n";
    }
}

Config load_config_opt(const std::optional<std::string>& path) {
    if (!path) return Config::parse("");
    return Config::parse(read_file(*path));
}

struct ForestFlags {
    std::optional<int> trees, max_depth, min_samples_leaf, feature_subsample;
    std::optional<int> threads;

    TrainParams resolve(const Config& cfg, std::uint64_t seed) const {
        TrainParams tp = train_params_from_config(cfg, seed);
        if (trees) tp.n_trees = *trees;
        if (max_depth) tp.max_depth = *max_depth;
        if (min_samples_leaf) tp.min_samples_leaf = *min_samples_leaf;
        if (feature_subsample) tp.feature_subsample = *feature_subsample;
        if (threads) tp.n_threads = *threads;
        return tp;
    }
};

std::vector<Footprint> plain_footprints(
    const std::vector<AnnotatedFootprint>& fps) {
    std::vector<Footprint> out;
    out.reserve(fps.size());
    for (const auto& afp : fps) out.push_back(afp.footprint);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Residential supply tasks from building masks and footprints"};
    app.require_subcommand(1);
    app.add_flag("--json-errors", g_json_errors,
                 "report errors as JSON on stderr");

    // --- identify ---
    auto* cmd_identify = app.add_subcommand(
        "identify", "Mask grid -> cleaned building footprints (GeoJSON)");
    std::string id_grid, id_out;
    std::optional<std::string> id_config;
    std::optional<double> id_min_area, id_tolerance, id_merge_gap;
    std::optional<std::string> id_connectivity;
    cmd_identify->add_option("--grid", id_grid, "ASCII mask grid")->required();
    cmd_identify->add_option("--config", id_config, "config file");
    cmd_identify->add_option("--out", id_out, "output GeoJSON")->required();
    cmd_identify->add_option("--min-area", id_min_area,
                             "minimum footprint area in m^2");
    cmd_identify->add_option("--simplify-tolerance", id_tolerance,
                             "simplification tolerance in m");
    cmd_identify->add_option("--connectivity", id_connectivity,
                             "four or eight");
    cmd_identify->add_option("--merge-gap", id_merge_gap,
                             "merge gap tolerance in m");

    // --- import ---
    auto* cmd_import = app.add_subcommand(
        "import", "External GeoJSON -> normalized footprints");
    std::string im_in, im_out;
    cmd_import->add_option("--geojson", im_in, "input FeatureCollection")
        ->required();
    cmd_import->add_option("--out", im_out, "output GeoJSON")->required();

    // --- features ---
    auto* cmd_features = app.add_subcommand(
        "features", "Footprints -> geometry feature vectors (CSV)");
    std::string fe_in, fe_out;
    cmd_features->add_option("--footprints", fe_in, "footprints GeoJSON")
        ->required();
    cmd_features->add_option("--out", fe_out, "output CSV")->required();

    // --- train ---
    auto* cmd_train = app.add_subcommand(
        "train", "Train the size-class forest on labeled footprints");
    std::string tr_fps, tr_labels, tr_out;
    std::optional<std::string> tr_config;
    std::uint64_t tr_seed = 0;
    ForestFlags tr_flags;
    cmd_train->add_option("--footprints", tr_fps, "footprints GeoJSON")
        ->required();
    cmd_train->add_option("--labels", tr_labels, "labels CSV (id,size_class)")
        ->required();
    cmd_train->add_option("--out", tr_out, "output model file")->required();
    cmd_train->add_option("--config", tr_config, "config file");
    cmd_train->add_option("--seed", tr_seed, "training seed");
    cmd_train->add_option("--trees", tr_flags.trees, "number of trees");
    cmd_train->add_option("--max-depth", tr_flags.max_depth, "tree depth cap");
    cmd_train->add_option("--min-samples-leaf", tr_flags.min_samples_leaf,
                          "minimum samples per leaf");
    cmd_train->add_option("--feature-subsample", tr_flags.feature_subsample,
                          "candidate features per split");
    cmd_train->add_option("--threads", tr_flags.threads, "training threads");

    // --- classify ---
    auto* cmd_classify = app.add_subcommand(
        "classify", "Assign size classes (external labels take precedence)");
    std::string cl_fps, cl_out;
    std::optional<std::string> cl_model, cl_external;
    cmd_classify->add_option("--footprints", cl_fps, "footprints GeoJSON")
        ->required();
    cmd_classify->add_option("--model", cl_model, "trained model file");
    cmd_classify->add_option("--external-labels", cl_external,
                             "labels CSV overriding the forest");
    cmd_classify->add_option("--out", cl_out, "output GeoJSON")->required();

    // --- assign-typology ---
    auto* cmd_typology = app.add_subcommand(
        "assign-typology",
        "Sample construction-year bands and resolve building types");
    std::string ty_fps, ty_table, ty_out;
    std::uint64_t ty_seed = 0;
    cmd_typology
        ->add_option("--footprints", ty_fps, "classified footprints GeoJSON")
        ->required();
    cmd_typology->add_option("--typology", ty_table, "typology config file")
        ->required();
    cmd_typology->add_option("--seed", ty_seed, "sampling seed");
    cmd_typology->add_option("--out", ty_out, "output GeoJSON")->required();

    // --- demand ---
    auto* cmd_demand = app.add_subcommand(
        "demand", "Per-building annual electricity demand");
    std::string de_fps, de_out;
    std::optional<std::string> de_config, de_csv;
    std::optional<double> de_kwh;
    cmd_demand->add_option("--footprints", de_fps, "typed footprints GeoJSON")
        ->required();
    cmd_demand->add_option("--config", de_config,
                           "config file with [demand] household_annual_kwh");
    cmd_demand->add_option("--household-kwh", de_kwh,
                           "average household demand in kWh/a");
    cmd_demand->add_option("--out", de_out, "output GeoJSON")->required();
    cmd_demand->add_option("--csv", de_csv, "also write a per-building CSV");

    // --- aggregate ---
    auto* cmd_aggregate = app.add_subcommand(
        "aggregate", "Sum building demands per zone polygon");
    std::string ag_demand, ag_zones, ag_out;
    std::optional<std::string> ag_geojson;
    cmd_aggregate->add_option("--demand", ag_demand, "demand GeoJSON")
        ->required();
    cmd_aggregate->add_option("--zones", ag_zones, "zones GeoJSON")->required();
    cmd_aggregate->add_option("--out", ag_out, "output CSV")->required();
    cmd_aggregate->add_option("--geojson-out", ag_geojson,
                              "also write zones GeoJSON with totals");

    // --- compare ---
    auto* cmd_compare = app.add_subcommand(
        "compare", "Signed relative deviation against a reference dataset");
    std::string co_presented, co_reference, co_out;
    cmd_compare
        ->add_option("--presented", co_presented, "zone totals CSV (aggregate)")
        ->required();
    cmd_compare->add_option("--reference", co_reference, "reference CSV")
        ->required();
    cmd_compare->add_option("--out", co_out, "output deviation CSV")
        ->required();

    // --- pipeline ---
    auto* cmd_pipeline = app.add_subcommand(
        "pipeline", "Run every stage with one config and one seed");
    std::optional<std::string> pl_grid, pl_fps, pl_typology, pl_model,
        pl_external, pl_zones, pl_reference;
    std::string pl_config, pl_out_dir;
    std::uint64_t pl_seed = 0;
    int pl_threads = 1;
    cmd_pipeline->add_option("--grid", pl_grid, "ASCII mask grid");
    cmd_pipeline->add_option("--footprints", pl_fps,
                             "imported footprints GeoJSON (instead of a grid)");
    cmd_pipeline->add_option("--config", pl_config, "config file")->required();
    cmd_pipeline->add_option("--typology", pl_typology,
                             "typology config (defaults to --config)");
    cmd_pipeline->add_option("--model", pl_model, "trained model file");
    cmd_pipeline->add_option("--external-labels", pl_external, "labels CSV");
    cmd_pipeline->add_option("--zones", pl_zones, "zones GeoJSON");
    cmd_pipeline->add_option("--reference", pl_reference, "reference CSV");
    cmd_pipeline->add_option("--out-dir", pl_out_dir, "output directory")
        ->required();
    cmd_pipeline->add_option("--seed", pl_seed, "global seed");
    cmd_pipeline->add_option("--threads", pl_threads, "worker cap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the usage diagnostic
        return 2;     // bad invocation is an input error
    }

    try {
        if (*cmd_identify) {
            const Config cfg = load_config_opt(id_config);
            IdentificationConfig ic = identification_from_config(cfg);
            if (id_min_area) ic.min_area_m2 = *id_min_area;
            if (id_tolerance) ic.simplify_tolerance_m = *id_tolerance;
            if (id_merge_gap) ic.merge_gap_m = *id_merge_gap;
            if (id_connectivity) {
                if (*id_connectivity == "four") {
                    ic.connectivity = Connectivity::Four;
                } else if (*id_connectivity == "eight") {
                    ic.connectivity = Connectivity::Eight;
                } else {
                    throw InvalidParams("connectivity must be 'four' or 'eight'");
                }
            }
            const GeoGrid grid = parse_grid(read_file(id_grid));
            const auto footprints = identify_buildings(grid, ic);
            std::vector<AnnotatedFootprint> annotated;
            for (const Footprint& fp : footprints) {
                annotated.push_back(AnnotatedFootprint{fp, {}, {}, {}, {}, {}, {}});
            }
            write_file(id_out, emit_footprints_geojson(annotated));
            std::cerr << "identified " << footprints.size() << " footprints\n";
        } else if (*cmd_import) {
            const auto footprints = import_footprints(read_file(im_in));
            std::vector<AnnotatedFootprint> annotated;
            for (const Footprint& fp : footprints) {
                annotated.push_back(AnnotatedFootprint{fp, {}, {}, {}, {}, {}, {}});
            }
            write_file(im_out, emit_footprints_geojson(annotated));
            std::cerr << "imported " << footprints.size() << " footprints\n";
        } else if (*cmd_features) {
            const auto fps = load_footprints_geojson(read_file(fe_in));
            std::vector<std::pair<std::uint64_t, GeometryFeatures>> rows;
            for (const auto& afp : fps) {
                rows.emplace_back(afp.footprint.id,
                                  extract_features(afp.footprint));
            }
            write_file(fe_out, emit_features_csv(rows));
        } else if (*cmd_train) {
            const auto fps = load_footprints_geojson(read_file(tr_fps));
            const auto labels = parse_labels_csv(read_file(tr_labels));
            for (const auto& [id, cls] : labels) {
                (void)cls;
                const bool known =
                    std::any_of(fps.begin(), fps.end(), [id = id](const auto& a) {
                        return a.footprint.id == id;
                    });
                if (!known) throw UnknownFootprintId(id);
            }
            std::vector<FeatureArray> features;
            std::vector<SizeClass> classes;
            for (const auto& afp : fps) {
                const auto it = labels.find(afp.footprint.id);
                if (it == labels.end()) continue;
                features.push_back(extract_features(afp.footprint).to_array());
                classes.push_back(it->second);
            }
            const Config cfg = load_config_opt(tr_config);
            const TrainParams params = tr_flags.resolve(cfg, tr_seed);
            const ForestModel model = train_forest(features, classes, params);
            write_file(tr_out, save_forest(model));
            std::cerr << "trained " << model.trees.size() << " trees on "
                      << features.size() << " samples";
            if (std::isfinite(model.oob_accuracy)) {
                std::cerr << ", oob accuracy " << model.oob_accuracy;
            }
            std::cerr << "\n";
        } else if (*cmd_classify) {
            auto fps = load_footprints_geojson(read_file(cl_fps));
            std::map<std::uint64_t, SizeClass> external;
            if (cl_external) external = parse_labels_csv(read_file(*cl_external));
            std::optional<ForestModel> model;
            if (cl_model) model = load_forest(read_file(*cl_model));
            if (!model) {
                for (const auto& afp : fps) {
                    if (!external.count(afp.footprint.id)) {
                        throw InvalidParams(
                            "no --model given and footprint " +
                            std::to_string(afp.footprint.id) +
                            " has no external label");
                    }
                }
                model = ForestModel{{DecisionTree({TreeNode{}})}, 0, {}, 0.0};
            }
            const HybridResult result =
                classify_hybrid(plain_footprints(fps), *model, external);
            for (auto& afp : fps) {
                afp.size_class = result.labels.at(afp.footprint.id);
            }
            write_file(cl_out, emit_footprints_geojson(fps));
            std::cerr << "classified " << fps.size() << " footprints ("
                      << result.forest_predictions << " by forest)\n";
        } else if (*cmd_typology) {
            auto fps = load_footprints_geojson(read_file(ty_fps));
            const Config cfg = Config::parse(read_file(ty_table));
            const AgeDistribution dist = age_distribution_from_config(cfg);
            const TypologyTable table = typology_from_config(cfg);
            for (auto& afp : fps) {
                if (!afp.size_class) {
                    throw InvalidParams("footprint " +
                                        std::to_string(afp.footprint.id) +
                                        " has no size_class; run classify first");
                }
                const YearBand& band =
                    sample_year_band(dist, afp.footprint.id, ty_seed);
                const ResidentialBuildingType& rbt =
                    assign_type(table, *afp.size_class, band);
                afp.year_band = band.label;
                afp.type_id = rbt.type_id;
                afp.reference_area_m2 = rbt.reference_area_m2;
                afp.households = rbt.households;
            }
            write_file(ty_out, emit_footprints_geojson(fps));
        } else if (*cmd_demand) {
            auto fps = load_footprints_geojson(read_file(de_fps));
            DemandParams params;
            if (de_kwh) {
                params.household_annual_kwh = *de_kwh;
            } else if (de_config) {
                params = demand_params_from_config(Config::parse(read_file(*de_config)));
            } else {
                throw InvalidParams("demand needs --household-kwh or --config");
            }
            for (auto& afp : fps) {
                if (!afp.type_id || !afp.reference_area_m2 || !afp.households ||
                    !afp.size_class || !afp.year_band) {
                    throw InvalidParams("footprint " +
                                        std::to_string(afp.footprint.id) +
                                        " has no building type; run "
                                        "assign-typology first");
                }
                ResidentialBuildingType rbt;
                rbt.type_id = *afp.type_id;
                rbt.size_class = *afp.size_class;
                rbt.reference_area_m2 = *afp.reference_area_m2;
                rbt.households = *afp.households;
                afp.annual_kwh =
                    building_demand(afp.footprint.area_m2, rbt, params);
            }
            write_file(de_out, emit_footprints_geojson(fps));
            if (de_csv) write_file(*de_csv, emit_buildings_csv(fps));
        } else if (*cmd_aggregate) {
            const auto fps = load_footprints_geojson(read_file(ag_demand));
            const auto zones = load_zones_geojson(read_file(ag_zones));
            std::vector<BuildingDemand> demands;
            for (const auto& afp : fps) {
                if (!afp.annual_kwh) {
                    throw InvalidParams("footprint " +
                                        std::to_string(afp.footprint.id) +
                                        " has no annual_kwh; run demand first");
                }
                BuildingDemand d;
                d.footprint_id = afp.footprint.id;
                d.area_m2 = afp.footprint.area_m2;
                if (afp.type_id) d.type_id = *afp.type_id;
                if (afp.reference_area_m2) d.reference_area_m2 = *afp.reference_area_m2;
                if (afp.households) d.households = *afp.households;
                d.annual_kwh = *afp.annual_kwh;
                demands.push_back(std::move(d));
            }
            const ZoneAggregation agg =
                aggregate_by_zone(demands, plain_footprints(fps), zones);
            write_file(ag_out, emit_zone_demands_csv(agg));
            if (ag_geojson) {
                write_file(*ag_geojson, emit_zones_geojson(zones, agg, nullptr));
            }
        } else if (*cmd_compare) {
            const auto presented_rows =
                parse_zone_demands_csv(read_file(co_presented));
            std::vector<ZoneDemand> presented;
            for (const ZoneDemand& z : presented_rows) {
                if (z.zone_id == "unassigned") continue;  // pipeline bucket
                presented.push_back(z);
            }
            const auto reference = parse_reference_csv(read_file(co_reference));
            const DeviationReport report =
                compare_to_reference(presented, reference);
            write_file(co_out, emit_deviation_csv(report));
            if (report.overall_deviation) {
                std::cerr << "overall deviation " << *report.overall_deviation
                          << "\n";
            }
        } else if (*cmd_pipeline) {
            PipelineInputs inputs;
            if (pl_grid) inputs.grid_text = read_file(*pl_grid);
            if (pl_fps) inputs.footprints_geojson = read_file(*pl_fps);
            inputs.config_text = read_file(pl_config);
            if (pl_typology) inputs.typology_text = read_file(*pl_typology);
            if (pl_model) inputs.model_text = read_file(*pl_model);
            if (pl_external) {
                inputs.external_labels = parse_labels_csv(read_file(*pl_external));
            }
            if (pl_zones) inputs.zones_geojson = read_file(*pl_zones);
            if (pl_reference) inputs.reference_csv = read_file(*pl_reference);
            inputs.seed = pl_seed;
            inputs.threads = pl_threads;
            const PipelineResult result = run_pipeline(inputs);
            for (const auto& [name, content] : result.files) {
                write_file((fs::path(pl_out_dir) / name).string(), content);
            }
            std::cerr << "pipeline wrote " << result.files.size()
                      << " files to " << pl_out_dir << "\n";
        }
    } catch (const Error& e) {
        report_error("input", e.what());
        return 2;
    } catch (const std::exception& e) {
        report_error("internal", e.what());
        return 1;
    }
    return 0;
}
