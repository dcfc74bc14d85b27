#include "suptask/raster.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>

#include "cell_trace.hpp"
#include "suptask/errors.hpp"

namespace suptask {

std::size_t GeoGrid::occupied_count() const {
    std::size_t n = 0;
    for (std::uint8_t v : data) n += (v != 0);
    return n;
}

namespace {

struct Cursor {
    const std::string& text;
    std::size_t pos = 0;
    std::size_t line = 1;

    bool eof() const { return pos >= text.size(); }

    // Next non-comment, non-blank line; trailing '\r' stripped for
    // tolerance, everything else is taken verbatim.
    std::optional<std::string> next_line() {
        while (!eof()) {
            std::size_t end = text.find('\n', pos);
            if (end == std::string::npos) end = text.size();
            std::string ln = text.substr(pos, end - pos);
            pos = end + 1;
            const std::size_t this_line = line++;
            if (!ln.empty() && ln.back() == '\r') ln.pop_back();
            std::size_t i = ln.find_first_not_of(" \t");
            if (i == std::string::npos) continue;
            if (ln[i] == '#') continue;
            current_line = this_line;
            return ln;
        }
        return std::nullopt;
    }
    std::size_t current_line = 0;
};

double parse_double_token(const std::string& tok, std::size_t line,
                          std::size_t col) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw ParseError("invalid number '" + tok + "'", line, col);
    }
    return v;
}

std::vector<std::pair<std::string, std::size_t>> split_tokens(const std::string& ln) {
    std::vector<std::pair<std::string, std::size_t>> out;
    std::size_t i = 0;
    while (i < ln.size()) {
        while (i < ln.size() && (ln[i] == ' ' || ln[i] == '\t')) ++i;
        if (i >= ln.size()) break;
        std::size_t j = i;
        while (j < ln.size() && ln[j] != ' ' && ln[j] != '\t') ++j;
        out.emplace_back(ln.substr(i, j - i), i + 1);
        i = j;
    }
    return out;
}

}  // namespace

GeoGrid parse_grid(const std::string& text) {
    Cursor cur{text};
    std::map<std::string, double> header;
    bool saw_data = false;
    while (auto ln = cur.next_line()) {
        const auto toks = split_tokens(*ln);
        if (toks.empty()) continue;
        if (toks[0].first == "data") {
            if (toks.size() != 1) {
                throw ParseError("unexpected tokens after 'data'",
                                 cur.current_line, toks[1].second);
            }
            saw_data = true;
            break;
        }
        if (toks.size() != 2) {
            throw ParseError("expected 'key value'", cur.current_line,
                             toks.size() > 2 ? toks[2].second : 1);
        }
        const std::string& key = toks[0].first;
        if (key != "width" && key != "height" && key != "origin_x" &&
            key != "origin_y" && key != "pixel_size") {
            throw HeaderError("unknown header key '" + key + "' (line " +
                              std::to_string(cur.current_line) + ")");
        }
        if (header.count(key)) {
            throw HeaderError("duplicate header key '" + key + "' (line " +
                              std::to_string(cur.current_line) + ")");
        }
        header[key] = parse_double_token(toks[1].first, cur.current_line,
                                         toks[1].second);
    }
    for (const char* key : {"width", "height", "origin_x", "origin_y",
                            "pixel_size"}) {
        if (!header.count(key)) {
            throw HeaderError(std::string("missing header key '") + key + "'");
        }
    }
    if (!saw_data) throw HeaderError("missing 'data' section");

    const double wd = header["width"], hd = header["height"];
    if (wd < 1 || wd != std::floor(wd) || wd > 1e8) {
        throw HeaderError("width must be a positive integer");
    }
    if (hd < 1 || hd != std::floor(hd) || hd > 1e8) {
        throw HeaderError("height must be a positive integer");
    }
    GeoGrid g;
    g.width = static_cast<int>(wd);
    g.height = static_cast<int>(hd);
    g.origin_x = header["origin_x"];
    g.origin_y = header["origin_y"];
    g.pixel_size = header["pixel_size"];
    if (!(g.pixel_size > 0.0) || !std::isfinite(g.pixel_size)) {
        throw HeaderError("pixel_size must be > 0");
    }
    if (!std::isfinite(g.origin_x) || !std::isfinite(g.origin_y)) {
        throw HeaderError("origin must be finite");
    }

    g.data.assign(static_cast<std::size_t>(g.width) * g.height, 0);
    for (int row = 0; row < g.height; ++row) {
        auto ln = cur.next_line();
        if (!ln) {
            throw DimensionMismatch("expected " + std::to_string(g.height) +
                                        " data rows, got " + std::to_string(row),
                                    cur.current_line);
        }
        const auto toks = split_tokens(*ln);
        if (static_cast<int>(toks.size()) != g.width) {
            throw DimensionMismatch(
                "row has " + std::to_string(toks.size()) + " values, expected " +
                    std::to_string(g.width),
                cur.current_line);
        }
        for (int col = 0; col < g.width; ++col) {
            const auto& [tok, tok_col] = toks[col];
            if (tok == "0") continue;
            if (tok == "1") {
                g.data[static_cast<std::size_t>(row) * g.width + col] = 1;
            } else {
                throw ParseError("grid values must be 0 or 1, got '" + tok + "'",
                                 cur.current_line, tok_col);
            }
        }
    }
    if (auto extra = cur.next_line()) {
        throw DimensionMismatch("unexpected content after data rows",
                                cur.current_line);
    }
    return g;
}

std::string emit_grid(const GeoGrid& g) {
    char buf[64];
    std::string out;
    out.reserve(g.data.size() * 2 + 128);
    auto put = [&](const char* key, double v, bool integer) {
        out += key;
        out += ' ';
        if (integer) {
            std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
        } else {
            std::snprintf(buf, sizeof buf, "%.17g", v);
        }
        out += buf;
        out += '\n';
    };
    put("width", g.width, true);
    put("height", g.height, true);
    put("origin_x", g.origin_x, false);
    put("origin_y", g.origin_y, false);
    put("pixel_size", g.pixel_size, false);
    out += "data\n";
    for (int row = 0; row < g.height; ++row) {
        for (int col = 0; col < g.width; ++col) {
            if (col) out += ' ';
            out += g.at(row, col) ? '1' : '0';
        }
        out += '\n';
    }
    return out;
}

ComponentLabeling connected_components(const GeoGrid& g, Connectivity conn) {
    ComponentLabeling cl;
    cl.connectivity = conn;
    cl.labels.assign(g.data.size(), 0);
    if (g.data.empty()) return cl;

    // First pass: provisional labels + union-find over neighbor conflicts.
    std::vector<std::int32_t> parent(1, 0);  // parent[0] unused
    auto find = [&](std::int32_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    };
    auto unite = [&](std::int32_t a, std::int32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };

    std::int32_t next = 1;
    for (int r = 0; r < g.height; ++r) {
        for (int c = 0; c < g.width; ++c) {
            if (!g.at(r, c)) continue;
            const std::size_t idx = static_cast<std::size_t>(r) * g.width + c;
            std::int32_t lab = 0;
            auto consider = [&](int rr, int cc) {
                if (rr < 0 || cc < 0 || cc >= g.width) return;
                const std::int32_t nb =
                    cl.labels[static_cast<std::size_t>(rr) * g.width + cc];
                if (nb == 0) return;
                if (lab == 0)
                    lab = nb;
                else
                    unite(lab, nb);
            };
            consider(r, c - 1);
            consider(r - 1, c);
            if (conn == Connectivity::Eight) {
                consider(r - 1, c - 1);
                consider(r - 1, c + 1);
            }
            if (lab == 0) {
                lab = next++;
                parent.push_back(lab);
            }
            cl.labels[idx] = lab;
        }
    }

    // Second pass: renumber by first pixel in row-major order.
    std::vector<std::int32_t> dense(next, 0);
    std::int32_t count = 0;
    for (std::int32_t& lab : cl.labels) {
        if (lab == 0) continue;
        const std::int32_t root = find(lab);
        if (dense[root] == 0) dense[root] = ++count;
        lab = dense[root];
    }
    cl.count = count;
    return cl;
}

std::vector<PixelBox> component_bounds(const GeoGrid& g,
                                       const ComponentLabeling& labeling) {
    std::vector<PixelBox> boxes(labeling.count,
                                PixelBox{g.height, g.width, -1, -1});
    for (int r = 0; r < g.height; ++r) {
        for (int c = 0; c < g.width; ++c) {
            const std::int32_t lab =
                labeling.labels[static_cast<std::size_t>(r) * g.width + c];
            if (lab == 0) continue;
            PixelBox& b = boxes[lab - 1];
            b.r0 = std::min(b.r0, r);
            b.r1 = std::max(b.r1, r);
            b.c0 = std::min(b.c0, c);
            b.c1 = std::max(b.c1, c);
        }
    }
    return boxes;
}

Polygon polygonize(const GeoGrid& g, const ComponentLabeling& labeling,
                   std::int32_t component) {
    if (component < 1 || component > labeling.count) {
        throw UnknownComponent("component " + std::to_string(component) +
                               " out of range 1.." +
                               std::to_string(labeling.count));
    }
    return polygonize(g, labeling, component,
                      component_bounds(g, labeling)[component - 1]);
}

Polygon polygonize(const GeoGrid& g, const ComponentLabeling& labeling,
                   std::int32_t component, const PixelBox& bounds) {
    if (component < 1 || component > labeling.count) {
        throw UnknownComponent("component " + std::to_string(component) +
                               " out of range 1.." +
                               std::to_string(labeling.count));
    }
    const int r0 = bounds.r0, r1 = bounds.r1, c0 = bounds.c0, c1 = bounds.c1;
    if (r1 < r0) {
        throw UnknownComponent("component " + std::to_string(component) +
                               " has no pixels");
    }
    const int rows = r1 - r0 + 1, cols = c1 - c0 + 1;
    const auto loops = detail::trace_cells(
        rows, cols,
        [&](int r, int c) {
            return labeling.labels[static_cast<std::size_t>(r + r0) * g.width +
                                   (c + c0)] == component;
        },
        labeling.connectivity == Connectivity::Eight);
    if (loops.outer.size() != 1) {
        throw InvalidPolygon("component traced to " +
                             std::to_string(loops.outer.size()) +
                             " outer rings");
    }
    // Index space row i corresponds to grid row r0 + i; world y decreases
    // with the grid row.
    auto to_ring = [&](const detail::IndexRing& ir) {
        Ring ring;
        ring.reserve(ir.size());
        for (const auto& gp : ir) {
            ring.push_back(Point{g.origin_x + (c0 + gp.c) * g.pixel_size,
                                 g.origin_y - (r0 + gp.r) * g.pixel_size});
        }
        return ring;
    };
    std::vector<Ring> holes;
    holes.reserve(loops.holes.size());
    for (const auto& h : loops.holes) holes.push_back(to_ring(h));
    return Polygon(to_ring(loops.outer[0]), std::move(holes));
}

}  // namespace suptask
