#include "suptask/typology.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "suptask/errors.hpp"
#include "suptask/rng.hpp"

namespace suptask {

AgeDistribution::AgeDistribution(std::vector<YearBand> bands,
                                 std::vector<double> weights)
    : bands_(std::move(bands)), weights_(std::move(weights)) {
    if (bands_.empty() || bands_.size() != weights_.size()) {
        throw InvalidParams("age distribution needs one weight per band");
    }
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw InvalidParams("band weights must be finite and >= 0");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw InvalidParams("band weights must sum to 1, got " +
                            std::to_string(total));
    }
    for (std::size_t i = 0; i < bands_.size(); ++i) {
        if (bands_[i].lower > bands_[i].upper) {
            throw InvalidParams("band '" + bands_[i].label +
                                "' has lower > upper");
        }
        if (i > 0 && bands_[i].lower <= bands_[i - 1].upper) {
            throw InvalidParams("bands must be disjoint and ordered ('" +
                                bands_[i - 1].label + "' overlaps '" +
                                bands_[i].label + "')");
        }
    }
}

TypologyTable::TypologyTable(std::vector<ResidentialBuildingType> rows)
    : rows_(std::move(rows)) {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const auto& row = rows_[i];
        if (!(row.reference_area_m2 > 0.0) ||
            !std::isfinite(row.reference_area_m2)) {
            throw InvalidParams("type '" + row.type_id +
                                "' needs reference_area_m2 > 0");
        }
        if (row.households < 1) {
            throw InvalidParams("type '" + row.type_id +
                                "' needs households >= 1");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (rows_[j].size_class == row.size_class &&
                rows_[j].year_band.label == row.year_band.label) {
                throw InvalidParams("duplicate typology row for (" +
                                    to_string(row.size_class) + ", " +
                                    row.year_band.label + ")");
            }
            if (rows_[j].type_id == row.type_id) {
                throw InvalidParams("duplicate type_id '" + row.type_id + "'");
            }
        }
    }
}

const ResidentialBuildingType* TypologyTable::find_by_type_id(
    const std::string& id) const {
    for (const auto& row : rows_) {
        if (row.type_id == id) return &row;
    }
    return nullptr;
}

const YearBand& sample_year_band(const AgeDistribution& dist,
                                 std::uint64_t building_id,
                                 std::uint64_t seed) {
    // Per-building stream: two mixing rounds decorrelate seed and id.
    const std::uint64_t stream =
        mix64(mix64(seed) ^ (building_id + 0x9e3779b97f4a7c15ull));
    const double u = static_cast<double>(stream >> 11) * 0x1.0p-53;
    double cumulative = 0.0;
    const auto& weights = dist.weights();
    for (std::size_t i = 0; i < weights.size(); ++i) {
        cumulative += weights[i];
        if (u < cumulative) return dist.bands()[i];
    }
    return dist.bands().back();  // float-sum slack
}

const ResidentialBuildingType& assign_type(const TypologyTable& table,
                                           SizeClass size_class,
                                           const YearBand& band) {
    for (const auto& row : table.rows()) {
        if (row.size_class == size_class && row.year_band.label == band.label) {
            return row;
        }
    }
    throw MissingTypologyRow("no typology row for (" + to_string(size_class) +
                             ", " + band.label + ")");
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double to_double(const std::string& s, const char* what, std::size_t line) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
        throw ConfigError(std::string(what) + " is not a finite number", line);
    }
    return v;
}

long long to_int(const std::string& s, const char* what, std::size_t line) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw ConfigError(std::string(what) + " is not an integer", line);
    }
    return v;
}

}  // namespace

AgeDistribution age_distribution_from_config(const Config& cfg) {
    const Config::Section* sec = cfg.section("age_distribution");
    if (!sec) {
        throw InvalidParams("config has no [age_distribution] section");
    }
    std::vector<YearBand> bands;
    std::vector<double> weights;
    for (const auto& entry : sec->entries) {
        const auto toks = split_ws(entry.value);
        if (toks.size() != 3) {
            throw ConfigError("band '" + entry.key +
                                  "' must be 'lower upper weight'",
                              entry.line);
        }
        YearBand band;
        band.label = entry.key;
        band.lower = static_cast<int>(to_int(toks[0], "band lower", entry.line));
        band.upper = static_cast<int>(to_int(toks[1], "band upper", entry.line));
        bands.push_back(band);
        weights.push_back(to_double(toks[2], "band weight", entry.line));
    }
    // Entries may appear in any order in the file.
    std::vector<std::size_t> order(bands.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return bands[a].lower < bands[b].lower;
    });
    std::vector<YearBand> sorted_bands;
    std::vector<double> sorted_weights;
    for (std::size_t i : order) {
        sorted_bands.push_back(bands[i]);
        sorted_weights.push_back(weights[i]);
    }
    return AgeDistribution(std::move(sorted_bands), std::move(sorted_weights));
}

TypologyTable typology_from_config(const Config& cfg) {
    const Config::Section* sec = cfg.section("typology");
    if (!sec) {
        throw InvalidParams("config has no [typology] section");
    }
    const AgeDistribution dist = age_distribution_from_config(cfg);
    std::vector<ResidentialBuildingType> rows;
    for (const auto& entry : sec->entries) {
        const auto toks = split_ws(entry.value);
        if (toks.size() != 4) {
            throw ConfigError(
                "type '" + entry.key +
                    "' must be 'size_class band_label reference_area households'",
                entry.line);
        }
        ResidentialBuildingType row;
        row.type_id = entry.key;
        try {
            row.size_class = size_class_from_string(toks[0]);
        } catch (const Error& e) {
            throw ConfigError(e.what(), entry.line);
        }
        const auto band_it =
            std::find_if(dist.bands().begin(), dist.bands().end(),
                         [&](const YearBand& b) { return b.label == toks[1]; });
        if (band_it == dist.bands().end()) {
            throw ConfigError("type '" + entry.key + "' references unknown band '" +
                                  toks[1] + "'",
                              entry.line);
        }
        row.year_band = *band_it;
        row.reference_area_m2 =
            to_double(toks[2], "reference_area", entry.line);
        row.households =
            static_cast<int>(to_int(toks[3], "households", entry.line));
        rows.push_back(std::move(row));
    }
    return TypologyTable(std::move(rows));
}

}  // namespace suptask
