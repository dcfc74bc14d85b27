#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "suptask/config.hpp"
#include "suptask/demand.hpp"
#include "suptask/features.hpp"
#include "suptask/forest.hpp"
#include "suptask/identify.hpp"
#include "suptask/typology.hpp"

namespace suptask {

// A footprint plus whatever downstream stages have attached so far. This
// is the record carried through the stage GeoJSON files.
struct AnnotatedFootprint {
    Footprint footprint;
    std::optional<SizeClass> size_class;
    std::optional<std::string> year_band;  // band label
    std::optional<std::string> type_id;
    std::optional<double> reference_area_m2;
    std::optional<int> households;
    std::optional<double> annual_kwh;
};

// Stage GeoJSON: one Polygon feature per footprint with properties id,
// area_m2, source and any annotations present. Deterministic byte output.
std::string emit_footprints_geojson(const std::vector<AnnotatedFootprint>& fps);
std::vector<AnnotatedFootprint> load_footprints_geojson(const std::string& text);

// Labels CSV: header `id,size_class`.
std::map<std::uint64_t, SizeClass> parse_labels_csv(const std::string& text);
std::string emit_labels_csv(const std::map<std::uint64_t, SizeClass>& labels);

// Feature CSV: header `id,<feature names>`, one row per footprint id.
std::string emit_features_csv(
    const std::vector<std::pair<std::uint64_t, GeometryFeatures>>& rows);

// Zones GeoJSON: Polygon features with a `zone_id` property.
std::vector<Zone> load_zones_geojson(const std::string& text);

// Reference CSV: header `zone_id,annual_kwh`.
std::vector<std::pair<std::string, double>> parse_reference_csv(
    const std::string& text);

// Per-building summary CSV (id, area, class, band, type, reference values,
// demand); requires fully annotated footprints.
std::string emit_buildings_csv(const std::vector<AnnotatedFootprint>& fps);

// Zone totals CSV: header `zone_id,building_count,total_kwh`; zones in
// ascending zone_id order with the `unassigned` bucket last.
std::string emit_zone_demands_csv(const ZoneAggregation& agg);
std::vector<ZoneDemand> parse_zone_demands_csv(const std::string& text);

// Deviation CSV: `zone_id,reference_kwh,presented_kwh,deviation,status`
// with joined zones first, then zones missing on either side, then an
// OVERALL row.
std::string emit_deviation_csv(const DeviationReport& report);

// Zones GeoJSON with aggregation results (and deviations when available).
std::string emit_zones_geojson(const std::vector<Zone>& zones,
                               const ZoneAggregation& agg,
                               const DeviationReport* report);

// --- config sections ---

IdentificationConfig identification_from_config(const Config& cfg);
TrainParams train_params_from_config(const Config& cfg,
                                     std::uint64_t default_seed);
DemandParams demand_params_from_config(const Config& cfg);

// --- whole-pipeline orchestration ---

struct PipelineInputs {
    std::optional<std::string> grid_text;           // mask path ...
    std::optional<std::string> footprints_geojson;  // ... or imported vectors
    std::string config_text;
    std::optional<std::string> typology_text;  // defaults to config_text
    std::optional<std::string> model_text;     // trained forest
    std::map<std::uint64_t, SizeClass> external_labels;
    std::optional<std::string> zones_geojson;
    std::optional<std::string> reference_csv;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct PipelineResult {
    std::vector<AnnotatedFootprint> footprints;
    std::optional<ZoneAggregation> aggregation;
    std::optional<DeviationReport> deviation;
    std::size_t forest_predictions = 0;
    // Stage outputs by file name, byte-identical for identical inputs.
    std::vector<std::pair<std::string, std::string>> files;
};

PipelineResult run_pipeline(const PipelineInputs& inputs);

}  // namespace suptask
