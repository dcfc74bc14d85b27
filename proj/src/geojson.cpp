#include "suptask/geojson.hpp"

#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "suptask/errors.hpp"

namespace suptask {

namespace {

using nlohmann::json;

constexpr int kMaxNesting = 256;

void check_nesting(const std::string& text) {
    int depth = 0;
    bool in_string = false, escaped = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '[' || c == '{') {
            if (++depth > kMaxNesting) {
                throw JsonSyntaxError("nesting too deep", i);
            }
        } else if (c == ']' || c == '}') {
            --depth;
        }
    }
}

Ring parse_ring(const json& jring, std::size_t idx) {
    if (!jring.is_array() || jring.size() < 4) {
        throw GeoJsonError("ring must be an array of at least 4 positions", idx);
    }
    Ring ring;
    ring.reserve(jring.size());
    for (const json& pos : jring) {
        if (!pos.is_array() || pos.size() != 2 || !pos[0].is_number() ||
            !pos[1].is_number()) {
            throw GeoJsonError("position must be [x, y]", idx);
        }
        const double x = pos[0].get<double>();
        const double y = pos[1].get<double>();
        if (!std::isfinite(x) || !std::isfinite(y)) {
            throw GeoJsonError("coordinates must be finite", idx);
        }
        ring.push_back(Point{x, y});
    }
    if (!(ring.front() == ring.back())) {
        throw GeoJsonError("ring is not closed (first != last)", idx);
    }
    ring.pop_back();
    return ring;
}

Polygon parse_polygon_coords(const json& jcoords, std::size_t idx) {
    if (!jcoords.is_array() || jcoords.empty()) {
        throw GeoJsonError("Polygon coordinates must be a non-empty array", idx);
    }
    Ring exterior = parse_ring(jcoords[0], idx);
    std::vector<Ring> holes;
    for (std::size_t i = 1; i < jcoords.size(); ++i) {
        holes.push_back(parse_ring(jcoords[i], idx));
    }
    try {
        return Polygon(std::move(exterior), std::move(holes));
    } catch (const InvalidPolygon& e) {
        throw GeoJsonError(std::string("invalid polygon: ") + e.what(), idx);
    }
}

PropertyMap parse_properties(const json& jprops, std::size_t idx) {
    PropertyMap props;
    if (jprops.is_null()) return props;
    if (!jprops.is_object()) {
        throw GeoJsonError("properties must be an object or null", idx);
    }
    for (auto it = jprops.begin(); it != jprops.end(); ++it) {
        const json& v = it.value();
        if (v.is_string()) {
            props.emplace(it.key(), v.get<std::string>());
        } else if (v.is_boolean()) {
            props.emplace(it.key(), v.get<bool>());
        } else if (v.is_number()) {
            const double d = v.get<double>();
            if (!std::isfinite(d)) {
                throw GeoJsonError("property '" + it.key() + "' is not finite",
                                   idx);
            }
            props.emplace(it.key(), d);
        } else {
            throw GeoJsonError("property '" + it.key() +
                                   "' must be a string, number or bool",
                               idx);
        }
    }
    return props;
}

}  // namespace

std::vector<FeatureRecord> parse_geojson(const std::string& text) {
    check_nesting(text);
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw JsonSyntaxError(e.what(), e.byte);
    }
    if (!root.is_object() || root.value("type", "") != "FeatureCollection") {
        throw GeoJsonError("root must be a FeatureCollection", 0);
    }
    if (!root.contains("features") || !root["features"].is_array()) {
        throw GeoJsonError("missing 'features' array", 0);
    }
    std::vector<FeatureRecord> records;
    std::size_t idx = 0;
    for (const json& jf : root["features"]) {
        if (!jf.is_object() || jf.value("type", "") != "Feature") {
            throw GeoJsonError("entry is not a Feature", idx);
        }
        if (!jf.contains("geometry") || !jf["geometry"].is_object()) {
            throw GeoJsonError("feature has no geometry object", idx);
        }
        const json& geom = jf["geometry"];
        const std::string gtype = geom.value("type", "");
        if (!geom.contains("coordinates")) {
            throw GeoJsonError("geometry has no coordinates", idx);
        }
        FeatureRecord rec;
        if (gtype == "Polygon") {
            rec.parts.push_back(parse_polygon_coords(geom["coordinates"], idx));
        } else if (gtype == "MultiPolygon") {
            const json& jparts = geom["coordinates"];
            if (!jparts.is_array() || jparts.empty()) {
                throw GeoJsonError("MultiPolygon must have at least one part",
                                   idx);
            }
            rec.multi = true;
            for (const json& part : jparts) {
                rec.parts.push_back(parse_polygon_coords(part, idx));
            }
        } else {
            throw GeoJsonError("unsupported geometry type '" + gtype + "'", idx);
        }
        rec.properties = parse_properties(
            jf.contains("properties") ? jf["properties"] : json(nullptr), idx);
        records.push_back(std::move(rec));
        ++idx;
    }
    return records;
}

namespace {

void append_number(std::string& out, double v) {
    if (!std::isfinite(v)) {
        throw Error("cannot emit non-finite number");
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

void append_json_string(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

void append_ring(std::string& out, const Ring& ring) {
    out += '[';
    for (std::size_t i = 0; i <= ring.size(); ++i) {
        const Point& p = ring[i % ring.size()];  // re-close explicitly
        if (i) out += ',';
        out += '[';
        append_number(out, p.x);
        out += ',';
        append_number(out, p.y);
        out += ']';
    }
    out += ']';
}

void append_polygon_coords(std::string& out, const Polygon& poly) {
    out += '[';
    append_ring(out, poly.exterior());
    for (const Ring& h : poly.holes()) {
        out += ',';
        append_ring(out, h);
    }
    out += ']';
}

}  // namespace

std::string emit_geojson(const std::vector<FeatureRecord>& records) {
    std::string out = "{\"type\":\"FeatureCollection\",\"features\":[";
    bool first = true;
    for (const FeatureRecord& rec : records) {
        if (!first) out += ',';
        first = false;
        out += "{\"type\":\"Feature\",\"geometry\":{\"type\":\"";
        if (rec.multi) {
            out += "MultiPolygon\",\"coordinates\":[";
            for (std::size_t i = 0; i < rec.parts.size(); ++i) {
                if (i) out += ',';
                append_polygon_coords(out, rec.parts[i]);
            }
            out += ']';
        } else {
            out += "Polygon\",\"coordinates\":";
            append_polygon_coords(out, rec.parts.at(0));
        }
        out += "},\"properties\":{";
        bool first_prop = true;
        for (const auto& [key, value] : rec.properties) {
            if (!first_prop) out += ',';
            first_prop = false;
            append_json_string(out, key);
            out += ':';
            if (std::holds_alternative<std::string>(value)) {
                append_json_string(out, std::get<std::string>(value));
            } else if (std::holds_alternative<bool>(value)) {
                out += std::get<bool>(value) ? "true" : "false";
            } else {
                append_number(out, std::get<double>(value));
            }
        }
        out += "}}";
    }
    out += "]}";
    return out;
}

bool operator==(const FeatureRecord& a, const FeatureRecord& b) {
    if (a.multi != b.multi || a.parts.size() != b.parts.size() ||
        a.properties != b.properties) {
        return false;
    }
    auto ring_eq = [](const Ring& x, const Ring& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!(x[i] == y[i])) return false;
        }
        return true;
    };
    for (std::size_t i = 0; i < a.parts.size(); ++i) {
        if (!ring_eq(a.parts[i].exterior(), b.parts[i].exterior())) return false;
        if (a.parts[i].holes().size() != b.parts[i].holes().size()) return false;
        for (std::size_t j = 0; j < a.parts[i].holes().size(); ++j) {
            if (!ring_eq(a.parts[i].holes()[j], b.parts[i].holes()[j])) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace suptask
