#include <map>
#include <string>

#include "doctest.h"
#include "suptask/errors.hpp"
#include "suptask/pipeline.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace suptask;
using testsupport::rect_ring;

namespace {

const char* kConfig =
    "[identification]\n"
    "min_area_m2 = 25.0\n"
    "simplify_tolerance_m = 0.0\n"
    "[forest]\n"
    "n_trees = 40\n"
    "[demand]\n"
    "household_annual_kwh = 3000\n"
    "[age_distribution]\n"
    "old = 1800 1978 0.5\n"
    "new = 1979 2030 0.5\n"
    "[typology]\n"
    "SFH_OLD = DetachedSingle old 120 1\n"
    "SFH_NEW = DetachedSingle new 140 1\n"
    "ROW_OLD = RowHouse old 420 5\n"
    "ROW_NEW = RowHouse new 450 5\n"
    "BLOCK_OLD = PerimeterBlock old 1600 24\n"
    "BLOCK_NEW = PerimeterBlock new 1800 24\n";

std::string tiny_grid() {
    // Two 10x10 blocks and a 3x3 shed on a 40x20 grid.
    std::string rows;
    for (int r = 0; r < 20; ++r) {
        for (int c = 0; c < 40; ++c) {
            const bool a = r >= 2 && r <= 11 && c >= 2 && c <= 11;
            const bool b = r >= 5 && r <= 14 && c >= 20 && c <= 29;
            const bool shed = r >= 16 && r <= 18 && c >= 35 && c <= 37;
            rows += (a || b || shed) ? '1' : '0';
            rows += c + 1 < 40 ? " " : "";
        }
        rows += '\n';
    }
    return "width 40\nheight 20\norigin_x 0\norigin_y 20\npixel_size 1\ndata\n" +
           rows;
}

const char* kZones =
    R"({"type":"FeatureCollection","features":[)"
    R"({"type":"Feature","geometry":{"type":"Polygon",)"
    R"("coordinates":[[[0,0],[15,0],[15,20],[0,20],[0,0]]]},)"
    R"("properties":{"zone_id":"west"}},)"
    R"({"type":"Feature","geometry":{"type":"Polygon",)"
    R"("coordinates":[[[15,0],[40,0],[40,20],[15,20],[15,0]]]},)"
    R"("properties":{"zone_id":"east"}}]})";

}  // namespace

TEST_CASE("stage footprints geojson round-trips annotations") {
    std::vector<AnnotatedFootprint> fps;
    AnnotatedFootprint a{make_footprint(4, Polygon(rect_ring(0, 0, 12, 9)),
                                        FootprintSource::MaskDerived),
                         SizeClass::RowHouse,
                         std::string("old"),
                         std::string("ROW_OLD"),
                         420.0,
                         5,
                         3214.2857142857142};
    fps.push_back(a);
    const std::string text = emit_footprints_geojson(fps);
    const auto back = load_footprints_geojson(text);
    REQUIRE(back.size() == 1);
    CHECK(back[0].footprint.id == 4);
    CHECK(back[0].footprint.area_m2 == 108.0);
    CHECK(back[0].footprint.source == FootprintSource::MaskDerived);
    CHECK(back[0].size_class == SizeClass::RowHouse);
    CHECK(back[0].year_band == "old");
    CHECK(back[0].type_id == "ROW_OLD");
    CHECK(back[0].reference_area_m2 == 420.0);
    CHECK(back[0].households == 5);
    CHECK(back[0].annual_kwh == a.annual_kwh);
    CHECK(emit_footprints_geojson(back) == text);
}

TEST_CASE("stage loader rejects inconsistent records") {
    // Area not matching the polygon.
    const std::string bad =
        R"({"type":"FeatureCollection","features":[{"type":"Feature",)"
        R"("geometry":{"type":"Polygon","coordinates":[[[0,0],[2,0],[2,2],[0,2],[0,0]]]},)"
        R"("properties":{"id":1,"area_m2":9.5,"source":"mask"}}]})";
    CHECK_THROWS_AS(load_footprints_geojson(bad), GeoJsonError);
    // Missing id.
    const std::string no_id =
        R"({"type":"FeatureCollection","features":[{"type":"Feature",)"
        R"("geometry":{"type":"Polygon","coordinates":[[[0,0],[2,0],[2,2],[0,2],[0,0]]]},)"
        R"("properties":{"area_m2":4,"source":"mask"}}]})";
    CHECK_THROWS_AS(load_footprints_geojson(no_id), GeoJsonError);
}

TEST_CASE("labels csv round-trips") {
    std::map<std::uint64_t, SizeClass> labels = {
        {1, SizeClass::DetachedSingle},
        {5, SizeClass::PerimeterBlock},
        {9, SizeClass::RowHouse}};
    const std::string text = emit_labels_csv(labels);
    CHECK(parse_labels_csv(text) == labels);
    CHECK_THROWS_AS(parse_labels_csv("id,klass\n1,RowHouse\n"), CsvError);
    CHECK_THROWS_AS(parse_labels_csv("id,size_class\n1,Mansion\n"), CsvError);
    CHECK_THROWS_AS(parse_labels_csv("id,size_class\n1,RowHouse\n1,RowHouse\n"),
                    CsvError);
}

TEST_CASE("config section loaders") {
    const Config cfg = Config::parse(kConfig);
    const IdentificationConfig ic = identification_from_config(cfg);
    CHECK(ic.min_area_m2 == 25.0);
    CHECK(ic.simplify_tolerance_m == 0.0);
    const TrainParams tp = train_params_from_config(cfg, 17);
    CHECK(tp.n_trees == 40);
    CHECK(tp.seed == 17);
    CHECK(demand_params_from_config(cfg).household_annual_kwh == 3000.0);
    CHECK_THROWS_AS(demand_params_from_config(Config::parse("")),
                    InvalidParams);
}

TEST_CASE("run_pipeline end to end with external labels") {
    PipelineInputs inputs;
    inputs.grid_text = tiny_grid();
    inputs.config_text = kConfig;
    inputs.zones_geojson = kZones;
    inputs.reference_csv = "zone_id,annual_kwh\nwest,3000\neast,2500\n";
    inputs.seed = 11;
    // Two surviving components, ids 1 and 2 by scan order.
    inputs.external_labels = {{1, SizeClass::DetachedSingle},
                              {2, SizeClass::DetachedSingle}};
    const PipelineResult result = run_pipeline(inputs);

    CHECK(result.footprints.size() == 2);
    CHECK(result.forest_predictions == 0);
    REQUIRE(result.aggregation.has_value());
    REQUIRE(result.deviation.has_value());

    std::map<std::string, std::string> files(result.files.begin(),
                                             result.files.end());
    for (const char* name :
         {"footprints.geojson", "features.csv", "classified.geojson",
          "typed.geojson", "demand.geojson", "buildings.csv", "zones.csv",
          "deviation.csv", "zones.geojson"}) {
        CHECK(files.count(name) == 1);
    }

    // Demand follows directly from the sampled bands.
    double expected_total = 0.0;
    for (const AnnotatedFootprint& afp : result.footprints) {
        CHECK(afp.footprint.area_m2 == 100.0);
        const double ref = *afp.reference_area_m2;
        expected_total += 100.0 / ref * 1 * 3000.0;
    }
    const double got_total = result.aggregation->zones[0].total_kwh +
                             result.aggregation->zones[1].total_kwh +
                             result.aggregation->unassigned.total_kwh;
    CHECK(got_total == doctest::Approx(expected_total).epsilon(1e-12));

    // Deterministic bytes across runs.
    const PipelineResult again = run_pipeline(inputs);
    REQUIRE(again.files.size() == result.files.size());
    for (std::size_t i = 0; i < result.files.size(); ++i) {
        CHECK(again.files[i].first == result.files[i].first);
        CHECK(again.files[i].second == result.files[i].second);
    }
}

TEST_CASE("run_pipeline classifies with a trained model") {
    std::vector<FeatureArray> features;
    std::vector<SizeClass> labels;
    SplitMix64 gen(1);
    testsupport::gaussian_clusters(gen, 40, features, labels);
    TrainParams params;
    params.n_trees = 30;
    params.seed = 5;
    const std::string model_text =
        save_forest(train_forest(features, labels, params));

    PipelineInputs inputs;
    inputs.grid_text = tiny_grid();
    inputs.config_text = kConfig;
    inputs.model_text = model_text;
    inputs.seed = 3;
    const PipelineResult result = run_pipeline(inputs);
    CHECK(result.forest_predictions == 2);
    for (const AnnotatedFootprint& afp : result.footprints) {
        // 10x10 compact blocks look like detached singles.
        CHECK(*afp.size_class == SizeClass::DetachedSingle);
    }
}

TEST_CASE("run_pipeline accepts imported vector footprints") {
    const std::string two_buildings =
        R"({"type":"FeatureCollection","features":[)"
        R"({"type":"Feature","geometry":{"type":"Polygon",)"
        R"("coordinates":[[[0,0],[12,0],[12,9],[0,9],[0,0]]]},"properties":{}},)"
        R"({"type":"Feature","geometry":{"type":"Polygon",)"
        R"("coordinates":[[[30,0],[66,0],[66,8],[30,8],[30,0]]]},"properties":{}}]})";
    PipelineInputs inputs;
    inputs.footprints_geojson = two_buildings;
    inputs.config_text = kConfig;
    inputs.external_labels = {{1, SizeClass::DetachedSingle},
                              {2, SizeClass::RowHouse}};
    inputs.seed = 4;
    const PipelineResult result = run_pipeline(inputs);
    REQUIRE(result.footprints.size() == 2);
    CHECK(result.footprints[0].footprint.source == FootprintSource::Imported);
    CHECK(result.footprints[0].footprint.area_m2 == 108.0);
    CHECK(result.footprints[1].footprint.area_m2 == 288.0);
    CHECK(result.footprints[1].annual_kwh.has_value());
}

TEST_CASE("run_pipeline validates its inputs up front") {
    PipelineInputs inputs;
    inputs.config_text = kConfig;
    CHECK_THROWS_AS(run_pipeline(inputs), InvalidParams);  // no grid, no fps
    inputs.grid_text = tiny_grid();
    inputs.footprints_geojson = "{}";
    CHECK_THROWS_AS(run_pipeline(inputs), InvalidParams);  // both given
    inputs.footprints_geojson.reset();
    // No model and no labels.
    CHECK_THROWS_AS(run_pipeline(inputs), InvalidParams);
    // Broken zones file fails before any stage output exists.
    inputs.external_labels = {{1, SizeClass::DetachedSingle},
                              {2, SizeClass::DetachedSingle}};
    inputs.zones_geojson = "{broken";
    CHECK_THROWS_AS(run_pipeline(inputs), JsonSyntaxError);
}
