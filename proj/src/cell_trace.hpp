#pragma once

// Internal: boundary tracing over a grid of cells. Used by raster
// polygonization (uniform pixel grid) and by the rectilinear footprint
// union (non-uniform grid spanned by the members' vertex coordinates).

#include <cstdint>
#include <vector>

namespace suptask::detail {

struct GridPos {
    int c = 0;  // corner column index, 0..cols
    int r = 0;  // corner row index, 0..rows
};

using IndexRing = std::vector<GridPos>;

struct CellLoops {
    std::vector<IndexRing> outer;  // positive signed area in (c, r) space
    std::vector<IndexRing> holes;  // negative
};

// Walks the boundary edges of the occupied cell set with occupied cells on
// the left, producing closed corner loops with collinear runs compressed.
//
// At saddle corners (exactly the two diagonal cells occupied) the walk
// crosses to the other cell when eight_connected and bounces back onto the
// same cell otherwise; this reproduces 8/4-connectivity of the foreground
// and the dual connectivity of the background, so holes come out right.
// Loops are classified by signed shoelace area in index space. Output is
// deterministic: loops start at the first boundary edge in scan order.
template <class Occupied>
CellLoops trace_cells(int rows, int cols, const Occupied& occupied,
                      bool eight_connected) {
    // Directions in index space: 0=E (+c), 1=N (+r), 2=W (-c), 3=S (-r).
    static constexpr int kDc[4] = {1, 0, -1, 0};
    static constexpr int kDr[4] = {0, 1, 0, -1};

    const int cw = cols + 1;  // corners per row
    auto corner_id = [cw](const GridPos& p) {
        return static_cast<std::size_t>(p.r) * cw + p.c;
    };

    struct Edge {
        GridPos from;
        std::int8_t dir = 0;
        int support_r = 0, support_c = 0;  // occupied cell on the left
        bool used = false;
    };

    std::vector<Edge> edges;
    const std::size_t n_corners = static_cast<std::size_t>(cw) * (rows + 1);
    // At most two outgoing edges per corner (only at saddles).
    std::vector<std::int32_t> out_first(n_corners, -1);
    std::vector<std::int32_t> out_second(n_corners, -1);

    auto add_edge = [&](int c, int r, int dir, int sr, int sc) {
        const GridPos from{c, r};
        const auto id = corner_id(from);
        if (out_first[id] < 0)
            out_first[id] = static_cast<std::int32_t>(edges.size());
        else
            out_second[id] = static_cast<std::int32_t>(edges.size());
        edges.push_back(Edge{from, static_cast<std::int8_t>(dir), sr, sc, false});
    };

    auto occ = [&](int r, int c) {
        return r >= 0 && r < rows && c >= 0 && c < cols && occupied(r, c);
    };

    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (!occ(r, c)) continue;
            // Cell (r, c) spans [c, c+1] x [r, r+1] in index space.
            if (!occ(r - 1, c)) add_edge(c, r, 0, r, c);          // bottom, E
            if (!occ(r, c + 1)) add_edge(c + 1, r, 1, r, c);      // right, N
            if (!occ(r + 1, c)) add_edge(c + 1, r + 1, 2, r, c);  // top, W
            if (!occ(r, c - 1)) add_edge(c, r + 1, 3, r, c);      // left, S
        }
    }

    CellLoops result;
    for (std::size_t start = 0; start < edges.size(); ++start) {
        if (edges[start].used) continue;
        IndexRing path;
        std::size_t cur = start;
        int prev_dir = -1;
        while (true) {
            Edge& e = edges[cur];
            e.used = true;
            if (e.dir != prev_dir) path.push_back(e.from);
            prev_dir = e.dir;
            const GridPos to{e.from.c + kDc[e.dir], e.from.r + kDr[e.dir]};
            const auto id = corner_id(to);
            const std::int32_t cand1 = out_first[id];
            const std::int32_t cand2 = out_second[id];
            std::int32_t chosen = -1;
            if (cand1 >= 0 && cand2 >= 0) {
                // Saddle. The two outgoing supports are the two occupied
                // diagonal cells, one of which supports the incoming edge.
                const bool same1 = edges[cand1].support_r == e.support_r &&
                                   edges[cand1].support_c == e.support_c;
                if (eight_connected)
                    chosen = same1 ? cand2 : cand1;  // cross to the other cell
                else
                    chosen = same1 ? cand1 : cand2;  // bounce back
            } else if (cand1 >= 0) {
                chosen = cand1;
            }
            if (chosen < 0 || edges[chosen].used) break;  // loop closed
            cur = static_cast<std::size_t>(chosen);
        }
        // Seam: the loop may have started mid-edge.
        if (path.size() >= 2 && edges[start].dir == prev_dir) {
            path.erase(path.begin());
        }
        long long a2 = 0;
        for (std::size_t i = 0; i < path.size(); ++i) {
            const auto& p = path[i];
            const auto& q = path[(i + 1) % path.size()];
            a2 += static_cast<long long>(p.c) * q.r -
                  static_cast<long long>(q.c) * p.r;
        }
        if (a2 > 0)
            result.outer.push_back(std::move(path));
        else
            result.holes.push_back(std::move(path));
    }
    return result;
}

}  // namespace suptask::detail
