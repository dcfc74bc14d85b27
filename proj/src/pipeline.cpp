#include "suptask/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "suptask/errors.hpp"
#include "suptask/geojson.hpp"
#include "suptask/csv.hpp"
#include "suptask/raster.hpp"

namespace suptask {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_strict_double(const std::string& s, const std::string& what,
                           std::size_t line) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
        throw CsvError(what + " '" + s + "' is not a finite number", line);
    }
    return v;
}

std::uint64_t parse_strict_id(const std::string& s, std::size_t line) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw CsvError("id '" + s + "' is not an unsigned integer", line);
    }
    return v;
}

const double* find_number(const PropertyMap& props, const char* key) {
    const auto it = props.find(key);
    if (it == props.end()) return nullptr;
    return std::get_if<double>(&it->second);
}

const std::string* find_string(const PropertyMap& props, const char* key) {
    const auto it = props.find(key);
    if (it == props.end()) return nullptr;
    return std::get_if<std::string>(&it->second);
}

}  // namespace

std::string emit_footprints_geojson(const std::vector<AnnotatedFootprint>& fps) {
    std::vector<FeatureRecord> records;
    records.reserve(fps.size());
    for (const AnnotatedFootprint& afp : fps) {
        FeatureRecord rec;
        rec.parts.push_back(afp.footprint.geometry);
        rec.properties.emplace("id",
                               static_cast<double>(afp.footprint.id));
        rec.properties.emplace("area_m2", afp.footprint.area_m2);
        rec.properties.emplace(
            "source", afp.footprint.source == FootprintSource::MaskDerived
                          ? std::string("mask")
                          : std::string("imported"));
        if (afp.size_class) {
            rec.properties.emplace("size_class", to_string(*afp.size_class));
        }
        if (afp.year_band) rec.properties.emplace("year_band", *afp.year_band);
        if (afp.type_id) rec.properties.emplace("type_id", *afp.type_id);
        if (afp.reference_area_m2) {
            rec.properties.emplace("reference_area_m2", *afp.reference_area_m2);
        }
        if (afp.households) {
            rec.properties.emplace("households",
                                   static_cast<double>(*afp.households));
        }
        if (afp.annual_kwh) rec.properties.emplace("annual_kwh", *afp.annual_kwh);
        records.push_back(std::move(rec));
    }
    return emit_geojson(records);
}

std::vector<AnnotatedFootprint> load_footprints_geojson(
    const std::string& text) {
    const auto records = parse_geojson(text);
    std::vector<AnnotatedFootprint> fps;
    fps.reserve(records.size());
    std::set<std::uint64_t> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const FeatureRecord& rec = records[i];
        if (rec.multi || rec.parts.size() != 1) {
            throw GeoJsonError("footprint must be a single Polygon", i);
        }
        const double* id = find_number(rec.properties, "id");
        const double* area = find_number(rec.properties, "area_m2");
        const std::string* source = find_string(rec.properties, "source");
        if (!id || *id < 0 || *id != std::floor(*id)) {
            throw GeoJsonError("missing or invalid 'id' property", i);
        }
        if (!area) {
            throw GeoJsonError("missing 'area_m2' property", i);
        }
        if (!source || (*source != "mask" && *source != "imported")) {
            throw GeoJsonError("missing or invalid 'source' property", i);
        }
        AnnotatedFootprint afp{
            Footprint{static_cast<std::uint64_t>(*id), rec.parts[0], *area,
                      *source == "mask" ? FootprintSource::MaskDerived
                                        : FootprintSource::Imported},
            {}, {}, {}, {}, {}, {}};
        const double computed = polygon_area(afp.footprint.geometry);
        if (std::abs(computed - *area) > 1e-9 * std::max(1.0, computed)) {
            throw GeoJsonError("'area_m2' does not match the geometry", i);
        }
        if (!seen.insert(afp.footprint.id).second) {
            throw GeoJsonError("duplicate footprint id " +
                                   std::to_string(afp.footprint.id),
                               i);
        }
        if (const std::string* sc = find_string(rec.properties, "size_class")) {
            afp.size_class = size_class_from_string(*sc);
        }
        if (const std::string* yb = find_string(rec.properties, "year_band")) {
            afp.year_band = *yb;
        }
        if (const std::string* ti = find_string(rec.properties, "type_id")) {
            afp.type_id = *ti;
        }
        if (const double* ra = find_number(rec.properties, "reference_area_m2")) {
            afp.reference_area_m2 = *ra;
        }
        if (const double* hh = find_number(rec.properties, "households")) {
            afp.households = static_cast<int>(*hh);
        }
        if (const double* kwh = find_number(rec.properties, "annual_kwh")) {
            afp.annual_kwh = *kwh;
        }
        fps.push_back(std::move(afp));
    }
    std::sort(fps.begin(), fps.end(),
              [](const AnnotatedFootprint& a, const AnnotatedFootprint& b) {
                  return a.footprint.id < b.footprint.id;
              });
    return fps;
}

std::map<std::uint64_t, SizeClass> parse_labels_csv(const std::string& text) {
    const CsvTable table = parse_csv(text);
    if (table.header != std::vector<std::string>{"id", "size_class"}) {
        throw CsvError("labels header must be 'id,size_class'", 1);
    }
    std::map<std::uint64_t, SizeClass> labels;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const std::size_t line = i + 2;
        const std::uint64_t id = parse_strict_id(table.rows[i][0], line);
        SizeClass cls;
        try {
            cls = size_class_from_string(table.rows[i][1]);
        } catch (const Error& e) {
            throw CsvError(e.what(), line);
        }
        if (!labels.emplace(id, cls).second) {
            throw CsvError("duplicate id " + std::to_string(id), line);
        }
    }
    return labels;
}

std::string emit_labels_csv(const std::map<std::uint64_t, SizeClass>& labels) {
    CsvTable table;
    table.header = {"id", "size_class"};
    for (const auto& [id, cls] : labels) {
        table.rows.push_back({std::to_string(id), to_string(cls)});
    }
    return emit_csv(table);
}

std::string emit_features_csv(
    const std::vector<std::pair<std::uint64_t, GeometryFeatures>>& rows) {
    CsvTable table;
    table.header.push_back("id");
    for (const std::string& name : feature_names()) table.header.push_back(name);
    for (const auto& [id, f] : rows) {
        std::vector<std::string> row{std::to_string(id)};
        for (double v : f.to_array()) row.push_back(g17(v));
        table.rows.push_back(std::move(row));
    }
    return emit_csv(table);
}

std::vector<Zone> load_zones_geojson(const std::string& text) {
    const auto records = parse_geojson(text);
    std::vector<Zone> zones;
    zones.reserve(records.size());
    std::set<std::string> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const FeatureRecord& rec = records[i];
        if (rec.multi || rec.parts.size() != 1) {
            throw GeoJsonError("zone must be a single Polygon", i);
        }
        std::string zone_id;
        if (const std::string* s = find_string(rec.properties, "zone_id")) {
            zone_id = *s;
        } else if (const double* d = find_number(rec.properties, "zone_id")) {
            zone_id = g17(*d);
        } else {
            throw GeoJsonError("missing 'zone_id' property", i);
        }
        if (!seen.insert(zone_id).second) {
            throw GeoJsonError("duplicate zone_id '" + zone_id + "'", i);
        }
        zones.push_back(Zone{std::move(zone_id), rec.parts[0]});
    }
    return zones;
}

std::vector<std::pair<std::string, double>> parse_reference_csv(
    const std::string& text) {
    const CsvTable table = parse_csv(text);
    if (table.header != std::vector<std::string>{"zone_id", "annual_kwh"}) {
        throw CsvError("reference header must be 'zone_id,annual_kwh'", 1);
    }
    std::vector<std::pair<std::string, double>> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const std::size_t line = i + 2;
        const std::string& zone_id = table.rows[i][0];
        if (!seen.insert(zone_id).second) {
            throw CsvError("duplicate zone_id '" + zone_id + "'", line);
        }
        out.emplace_back(zone_id,
                         parse_strict_double(table.rows[i][1], "annual_kwh",
                                             line));
    }
    return out;
}

std::string emit_buildings_csv(const std::vector<AnnotatedFootprint>& fps) {
    CsvTable table;
    table.header = {"id",        "area_m2", "size_class",
                    "year_band", "type_id", "reference_area_m2",
                    "households", "annual_kwh"};
    for (const AnnotatedFootprint& afp : fps) {
        if (!afp.size_class || !afp.year_band || !afp.type_id ||
            !afp.reference_area_m2 || !afp.households || !afp.annual_kwh) {
            throw InvalidParams("footprint " +
                                std::to_string(afp.footprint.id) +
                                " is not fully annotated");
        }
        table.rows.push_back({std::to_string(afp.footprint.id),
                              g17(afp.footprint.area_m2),
                              to_string(*afp.size_class), *afp.year_band,
                              *afp.type_id, g17(*afp.reference_area_m2),
                              std::to_string(*afp.households),
                              g17(*afp.annual_kwh)});
    }
    return emit_csv(table);
}

std::string emit_zone_demands_csv(const ZoneAggregation& agg) {
    CsvTable table;
    table.header = {"zone_id", "building_count", "total_kwh"};
    for (const ZoneDemand& z : agg.zones) {
        table.rows.push_back(
            {z.zone_id, std::to_string(z.building_count), g17(z.total_kwh)});
    }
    table.rows.push_back({agg.unassigned.zone_id,
                          std::to_string(agg.unassigned.building_count),
                          g17(agg.unassigned.total_kwh)});
    return emit_csv(table);
}

std::vector<ZoneDemand> parse_zone_demands_csv(const std::string& text) {
    const CsvTable table = parse_csv(text);
    if (table.header !=
        std::vector<std::string>{"zone_id", "building_count", "total_kwh"}) {
        throw CsvError("zone totals header must be "
                       "'zone_id,building_count,total_kwh'",
                       1);
    }
    std::vector<ZoneDemand> out;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const std::size_t line = i + 2;
        ZoneDemand z;
        z.zone_id = table.rows[i][0];
        z.building_count = static_cast<std::size_t>(
            parse_strict_id(table.rows[i][1], line));
        z.total_kwh = parse_strict_double(table.rows[i][2], "total_kwh", line);
        out.push_back(std::move(z));
    }
    return out;
}

std::string emit_deviation_csv(const DeviationReport& report) {
    CsvTable table;
    table.header = {"zone_id", "reference_kwh", "presented_kwh", "deviation",
                    "status"};
    for (const ZoneDeviation& z : report.zones) {
        table.rows.push_back({z.zone_id, g17(z.reference_kwh),
                              g17(z.presented_kwh),
                              z.deviation ? g17(*z.deviation) : "",
                              z.deviation ? "ok" : "zero_reference"});
    }
    for (const std::string& zone_id : report.missing_in_presented) {
        table.rows.push_back({zone_id, "", "", "", "missing_in_presented"});
    }
    for (const std::string& zone_id : report.missing_in_reference) {
        table.rows.push_back({zone_id, "", "", "", "missing_in_reference"});
    }
    table.rows.push_back(
        {"OVERALL", "", "",
         report.overall_deviation ? g17(*report.overall_deviation) : "",
         report.overall_deviation ? "ok" : "zero_reference"});
    return emit_csv(table);
}

std::string emit_zones_geojson(const std::vector<Zone>& zones,
                               const ZoneAggregation& agg,
                               const DeviationReport* report) {
    std::vector<const Zone*> sorted;
    sorted.reserve(zones.size());
    for (const Zone& z : zones) sorted.push_back(&z);
    std::sort(sorted.begin(), sorted.end(),
              [](const Zone* a, const Zone* b) { return a->zone_id < b->zone_id; });
    std::vector<FeatureRecord> records;
    records.reserve(sorted.size());
    for (const Zone* z : sorted) {
        FeatureRecord rec;
        rec.parts.push_back(z->geometry);
        rec.properties.emplace("zone_id", z->zone_id);
        for (const ZoneDemand& zd : agg.zones) {
            if (zd.zone_id == z->zone_id) {
                rec.properties.emplace("building_count",
                                       static_cast<double>(zd.building_count));
                rec.properties.emplace("total_kwh", zd.total_kwh);
                break;
            }
        }
        if (report) {
            for (const ZoneDeviation& dz : report->zones) {
                if (dz.zone_id == z->zone_id && dz.deviation) {
                    rec.properties.emplace("deviation", *dz.deviation);
                    break;
                }
            }
        }
        records.push_back(std::move(rec));
    }
    return emit_geojson(records);
}

IdentificationConfig identification_from_config(const Config& cfg) {
    IdentificationConfig ic;
    if (auto v = cfg.get_double("identification", "min_area_m2")) {
        ic.min_area_m2 = *v;
    }
    if (auto v = cfg.get_double("identification", "simplify_tolerance_m")) {
        ic.simplify_tolerance_m = *v;
    }
    if (auto v = cfg.get_double("identification", "merge_gap_m")) {
        ic.merge_gap_m = *v;
    }
    if (auto v = cfg.get_string("identification", "connectivity")) {
        if (*v == "four") {
            ic.connectivity = Connectivity::Four;
        } else if (*v == "eight") {
            ic.connectivity = Connectivity::Eight;
        } else {
            throw InvalidParams("connectivity must be 'four' or 'eight', got '" +
                                *v + "'");
        }
    }
    if (ic.min_area_m2 < 0.0 || ic.merge_gap_m < 0.0 ||
        (ic.simplify_tolerance_m && *ic.simplify_tolerance_m < 0.0)) {
        throw InvalidParams("identification thresholds must be >= 0");
    }
    return ic;
}

TrainParams train_params_from_config(const Config& cfg,
                                     std::uint64_t default_seed) {
    TrainParams tp;
    tp.seed = default_seed;
    if (auto v = cfg.get_int("forest", "n_trees")) {
        tp.n_trees = static_cast<int>(*v);
    }
    if (auto v = cfg.get_int("forest", "max_depth")) {
        tp.max_depth = static_cast<int>(*v);
    }
    if (auto v = cfg.get_int("forest", "min_samples_leaf")) {
        tp.min_samples_leaf = static_cast<int>(*v);
    }
    if (auto v = cfg.get_int("forest", "feature_subsample")) {
        tp.feature_subsample = static_cast<int>(*v);
    }
    if (auto v = cfg.get_int("forest", "bootstrap")) {
        tp.bootstrap = *v != 0;
    }
    return tp;
}

DemandParams demand_params_from_config(const Config& cfg) {
    DemandParams dp;
    const auto v = cfg.get_double("demand", "household_annual_kwh");
    if (!v) {
        throw InvalidParams(
            "config needs household_annual_kwh in the [demand] section");
    }
    dp.household_annual_kwh = *v;
    if (!(dp.household_annual_kwh > 0.0)) {
        throw InvalidParams("household_annual_kwh must be > 0");
    }
    return dp;
}

PipelineResult run_pipeline(const PipelineInputs& inputs) {
    if (inputs.grid_text.has_value() == inputs.footprints_geojson.has_value()) {
        throw InvalidParams(
            "pipeline needs exactly one of a grid or a footprints file");
    }
    const Config cfg = Config::parse(inputs.config_text);
    const Config typology_cfg = inputs.typology_text
                                    ? Config::parse(*inputs.typology_text)
                                    : cfg;
    const AgeDistribution age_dist =
        age_distribution_from_config(typology_cfg);
    const TypologyTable typology = typology_from_config(typology_cfg);
    const DemandParams demand_params = demand_params_from_config(cfg);
    const IdentificationConfig id_config = identification_from_config(cfg);
    std::optional<ForestModel> model;
    if (inputs.model_text) model = load_forest(*inputs.model_text);

    // Fail-fast: every referenced input parses before any stage runs.
    std::optional<GeoGrid> grid;
    if (inputs.grid_text) grid = parse_grid(*inputs.grid_text);
    std::optional<std::vector<Zone>> zones;
    if (inputs.zones_geojson) zones = load_zones_geojson(*inputs.zones_geojson);
    std::optional<std::vector<std::pair<std::string, double>>> reference;
    if (inputs.reference_csv) reference = parse_reference_csv(*inputs.reference_csv);

    PipelineResult result;

    // Stage 1: identification.
    std::vector<Footprint> footprints;
    if (grid) {
        footprints = identify_buildings(*grid, id_config);
    } else {
        footprints = import_footprints(*inputs.footprints_geojson);
    }
    result.footprints.reserve(footprints.size());
    for (const Footprint& fp : footprints) {
        result.footprints.push_back(AnnotatedFootprint{fp, {}, {}, {}, {}, {}, {}});
    }
    result.files.emplace_back("footprints.geojson",
                              emit_footprints_geojson(result.footprints));

    // Features, exported for inspection.
    std::vector<std::pair<std::uint64_t, GeometryFeatures>> features;
    features.reserve(footprints.size());
    for (const Footprint& fp : footprints) {
        features.emplace_back(fp.id, extract_features(fp));
    }
    result.files.emplace_back("features.csv", emit_features_csv(features));

    // Stage 2: size classes (external labels first, forest for the rest),
    // then construction years and typology rows.
    if (!model) {
        // Without a model every footprint must be externally labeled.
        for (const Footprint& fp : footprints) {
            if (!inputs.external_labels.count(fp.id)) {
                throw InvalidParams(
                    "no model given and footprint " + std::to_string(fp.id) +
                    " has no external label");
            }
        }
    }
    const ForestModel empty_model{{DecisionTree({TreeNode{}})}, 0, {}, 0.0};
    const HybridResult hybrid = classify_hybrid(
        footprints, model ? *model : empty_model, inputs.external_labels);
    result.forest_predictions = hybrid.forest_predictions;
    for (AnnotatedFootprint& afp : result.footprints) {
        afp.size_class = hybrid.labels.at(afp.footprint.id);
    }
    result.files.emplace_back("classified.geojson",
                              emit_footprints_geojson(result.footprints));

    for (AnnotatedFootprint& afp : result.footprints) {
        const YearBand& band =
            sample_year_band(age_dist, afp.footprint.id, inputs.seed);
        const ResidentialBuildingType& rbt =
            assign_type(typology, *afp.size_class, band);
        afp.year_band = band.label;
        afp.type_id = rbt.type_id;
        afp.reference_area_m2 = rbt.reference_area_m2;
        afp.households = rbt.households;
    }
    result.files.emplace_back("typed.geojson",
                              emit_footprints_geojson(result.footprints));

    // Stage 3: demand.
    std::vector<BuildingDemand> demands;
    demands.reserve(result.footprints.size());
    for (AnnotatedFootprint& afp : result.footprints) {
        const ResidentialBuildingType* rbt =
            typology.find_by_type_id(*afp.type_id);
        const BuildingDemand d = make_building_demand(
            afp.footprint.id, afp.footprint.area_m2, *rbt, demand_params);
        afp.annual_kwh = d.annual_kwh;
        demands.push_back(d);
    }
    result.files.emplace_back("demand.geojson",
                              emit_footprints_geojson(result.footprints));
    result.files.emplace_back("buildings.csv",
                              emit_buildings_csv(result.footprints));

    if (zones) {
        result.aggregation = aggregate_by_zone(demands, footprints, *zones);
        result.files.emplace_back("zones.csv",
                                  emit_zone_demands_csv(*result.aggregation));
        if (reference) {
            result.deviation =
                compare_to_reference(result.aggregation->zones, *reference);
            result.files.emplace_back("deviation.csv",
                                      emit_deviation_csv(*result.deviation));
        }
        result.files.emplace_back(
            "zones.geojson",
            emit_zones_geojson(*zones, *result.aggregation,
                               result.deviation ? &*result.deviation : nullptr));
    }
    return result;
}

}  // namespace suptask
