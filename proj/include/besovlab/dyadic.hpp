// Dyadic cube geometry, finite index windows, cube families, quadrature grid.
//
// All cube boundaries are stored as integers in units of h/2, where h is the
// grid spacing of the governing window (midpoint nodes of the finest-level
// cubes, res per side). Grid nodes sit at odd multiples of h/2, so membership
// tests and measures are exact integer arithmetic, never floating-point fuzz.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace besovlab {

inline constexpr int kMaxDim = 3;

using Point = std::array<double, kMaxDim>;
using IVec = std::array<std::int64_t, kMaxDim>;

double pow2d(int e); // exact 2^e as double

// Q_{k,m} = 2^{-k}([0,1)^n + m). dim is carried by the window that produced it.
struct DyadicCube {
    int level = 0;
    IVec pos{};

    double side() const { return pow2d(-level); }
    double volume(int dim) const;
    double lo(int axis) const { return pos[axis] * side(); }
    bool contains(const Point& x, int dim) const;
    DyadicCube parent() const;
    bool contains_cube(const DyadicCube& finer, int dim) const;
    bool operator==(const DyadicCube& o) const { return level == o.level && pos == o.pos; }
};

// Truncation of the full index set: levels [level_min, level_max], cubes whose
// geometry lies inside [box_lo, box_hi)^dim, res midpoint nodes per finest
// cube side. The symmetric box [-L, L) is the common case.
struct IndexWindow {
    int dim = 1;
    std::int64_t box_lo = -1;
    std::int64_t box_hi = 1;
    int level_min = 0;
    int level_max = 0;
    int res = 2;

    void validate() const; // throws std::invalid_argument

    bool operator==(const IndexWindow& o) const = default;

    // position range [m_lo, m_hi) of in-box cubes at a level, same per axis
    std::int64_t pos_lo(int level) const;
    std::int64_t pos_hi(int level) const;
    std::int64_t cubes_per_axis(int level) const { return pos_hi(level) - pos_lo(level); }
    bool contains(const DyadicCube& q) const;
};

IndexWindow window_from_json(const std::string& json_text);
std::string window_to_json(const IndexWindow& w);

std::vector<DyadicCube> enumerate_cubes(const IndexWindow& w); // (level, lex pos) order
std::vector<DyadicCube> cubes_at_level(const IndexWindow& w, int level);

// unique Q_{k,m} containing x; throws std::domain_error if x is out of box
DyadicCube locate(const IndexWindow& w, const Point& x, int level);

// The shared evaluation grid: uniform midpoint nodes, spacing h = 2^-level_max/res.
struct GridSpec {
    int dim = 1;
    std::int64_t box_lo = -1;
    std::int64_t box_hi = 1;
    int level_max = 0;
    int res = 2;

    std::int64_t nodes_per_axis() const { return (box_hi - box_lo) * (std::int64_t(1) << level_max) * res; }
    std::int64_t node_count() const;
    double spacing() const { return 1.0 / (pow2d(level_max) * res); }
    double node_weight() const; // spacing^dim
    // u units (h/2) per coordinate unit
    std::int64_t units_per_coord() const { return (std::int64_t(1) << (level_max + 1)) * res; }
    std::int64_t axis_extent_u() const { return (box_hi - box_lo) * units_per_coord(); }

    double node_coord(std::int64_t i) const { return box_lo + (2 * i + 1) * 0.5 * spacing(); }
    void node_point(std::int64_t flat, Point& out) const;
    std::int64_t flat_index(const IVec& idx) const;
    void unflatten(std::int64_t flat, IVec& out) const;

    bool operator==(const GridSpec& o) const = default;
};

GridSpec grid_of(const IndexWindow& w);

// Axis-aligned cube in grid units relative to the box corner: [lo_u, lo_u+side_u) per axis.
struct Cube {
    IVec lo_u{};
    std::int64_t side_u = 0;

    double side(const GridSpec& g) const { return side_u * 0.5 * g.spacing(); }
    double volume(const GridSpec& g) const;
    double lo(const GridSpec& g, int axis) const { return g.box_lo + lo_u[axis] * 0.5 * g.spacing(); }
    // node index range [lo, hi) on one axis, clipped to the grid
    void axis_node_range(const GridSpec& g, int axis, std::int64_t& lo, std::int64_t& hi) const;
    std::int64_t node_count(const GridSpec& g) const;
    bool contains_node(const IVec& node_idx, int dim) const;
};

Cube cube_from_dyadic(const GridSpec& g, const DyadicCube& q);
// snaps center/side to grid-unit multiples; throws if the result leaves the box
Cube cube_from_center_side(const GridSpec& g, const Point& center, double side);

enum class FamilyTag { dyadic, shifted_dyadic, custom };

struct CubeFamily {
    GridSpec grid;
    FamilyTag tag = FamilyTag::custom;
    std::vector<Cube> cubes;

    static CubeFamily dyadic(const IndexWindow& w);
    // dyadic plus the 2^dim half-step translated families (in-box cubes only)
    static CubeFamily shifted(const IndexWindow& w);
    // shifted plus all finer dyadic levels down to single-node cells
    static CubeFamily enlarged(const IndexWindow& w);
    static CubeFamily custom(const GridSpec& g, const std::vector<std::pair<Point, double>>& center_side);
};

CubeFamily family_by_name(const IndexWindow& w, const std::string& name); // dyadic|shifted|enlarged

struct QuadNode {
    Point x{};
    double weight = 0;
};

// R^dim midpoint nodes of the cube itself, equal weights summing to |Q|.
// Coincides with the window grid on finest-level cubes.
std::vector<QuadNode> quadrature_nodes(const DyadicCube& q, int R, int dim);

// Visit grid nodes inside a cube: f(flat_index, point). Iteration order is
// row-major and deterministic.
template <typename F>
void for_nodes_in_cube(const GridSpec& g, const Cube& c, F&& f) {
    std::int64_t lo[kMaxDim], hi[kMaxDim];
    for (int a = 0; a < g.dim; ++a) {
        c.axis_node_range(g, a, lo[a], hi[a]);
        if (lo[a] >= hi[a]) return;
    }
    const std::int64_t n_axis = g.nodes_per_axis();
    IVec idx{};
    for (int a = 0; a < g.dim; ++a) idx[a] = lo[a];
    Point x{};
    while (true) {
        std::int64_t flat = 0;
        for (int a = 0; a < g.dim; ++a) flat = flat * n_axis + idx[a];
        for (int a = 0; a < g.dim; ++a) x[a] = g.node_coord(idx[a]);
        f(flat, x);
        int a = g.dim - 1;
        while (a >= 0) {
            if (++idx[a] < hi[a]) break;
            idx[a] = lo[a];
            --a;
        }
        if (a < 0) break;
    }
}

} // namespace besovlab
