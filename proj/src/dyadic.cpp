#include "besovlab/dyadic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace besovlab {

double pow2d(int e) { return std::ldexp(1.0, e); }

double DyadicCube::volume(int dim) const { return pow2d(-level * dim); }

bool DyadicCube::contains(const Point& x, int dim) const {
    const double s = side();
    for (int a = 0; a < dim; ++a) {
        const double lo = pos[a] * s;
        if (!(x[a] >= lo && x[a] < lo + s)) return false;
    }
    return true;
}

DyadicCube DyadicCube::parent() const {
    DyadicCube p;
    p.level = level - 1;
    for (int a = 0; a < kMaxDim; ++a) p.pos[a] = pos[a] >> 1; // floor(m/2), also for m < 0
    return p;
}

bool DyadicCube::contains_cube(const DyadicCube& finer, int dim) const {
    if (finer.level < level) return false;
    const int shift = finer.level - level;
    if (shift > 62) return false;
    for (int a = 0; a < dim; ++a)
        if ((finer.pos[a] >> shift) != pos[a]) return false;
    return true;
}

void IndexWindow::validate() const {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("window: dim must be in [1," + std::to_string(kMaxDim) + "]");
    if (box_lo >= box_hi) throw std::invalid_argument("window: box_lo must be < box_hi");
    if (level_min > level_max) throw std::invalid_argument("window: level_min > level_max");
    if (level_max < 0) throw std::invalid_argument("window: level_max must be >= 0");
    if (level_max > 24) throw std::invalid_argument("window: level_max too large");
    if (res < 2) throw std::invalid_argument("window: res must be >= 2");
    if (level_min < 0) {
        const std::int64_t d = std::int64_t(1) << (-level_min);
        if (box_lo % d != 0 || box_hi % d != 0)
            throw std::invalid_argument("window: box edges must align with level_min cubes");
    }
    if (cubes_per_axis(level_min) < 1) throw std::invalid_argument("window: no cubes at level_min");
    GridSpec g = grid_of(*this);
    if (g.nodes_per_axis() > (std::int64_t(1) << 22)) throw std::invalid_argument("window: grid axis too large");
    double total = 1;
    for (int a = 0; a < dim; ++a) total *= double(g.nodes_per_axis());
    if (total > double(std::int64_t(1) << 25)) throw std::invalid_argument("window: grid too large");
}

std::int64_t IndexWindow::pos_lo(int level) const {
    if (level >= 0) return box_lo * (std::int64_t(1) << level);
    return box_lo >> (-level); // validated to divide exactly
}

std::int64_t IndexWindow::pos_hi(int level) const {
    if (level >= 0) return box_hi * (std::int64_t(1) << level);
    return box_hi >> (-level);
}

bool IndexWindow::contains(const DyadicCube& q) const {
    if (q.level < level_min || q.level > level_max) return false;
    const std::int64_t lo = pos_lo(q.level), hi = pos_hi(q.level);
    for (int a = 0; a < dim; ++a)
        if (q.pos[a] < lo || q.pos[a] >= hi) return false;
    return true;
}

IndexWindow window_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    IndexWindow w;
    w.dim = j.at("n").get<int>();
    if (j.contains("box")) {
        w.box_lo = j["box"].at(0).get<std::int64_t>();
        w.box_hi = j["box"].at(1).get<std::int64_t>();
    } else {
        const std::int64_t L = j.at("L").get<std::int64_t>();
        w.box_lo = -L;
        w.box_hi = L;
    }
    w.level_min = j.at("k_min").get<int>();
    w.level_max = j.at("k_max").get<int>();
    w.res = j.at("R").get<int>();
    w.validate();
    return w;
}

std::string window_to_json(const IndexWindow& w) {
    nlohmann::json j;
    j["n"] = w.dim;
    if (w.box_lo == -w.box_hi)
        j["L"] = w.box_hi;
    else
        j["box"] = {w.box_lo, w.box_hi};
    j["k_min"] = w.level_min;
    j["k_max"] = w.level_max;
    j["R"] = w.res;
    return j.dump();
}

std::vector<DyadicCube> cubes_at_level(const IndexWindow& w, int level) {
    const std::int64_t lo = w.pos_lo(level), hi = w.pos_hi(level);
    std::vector<DyadicCube> out;
    if (hi <= lo) return out;
    const std::int64_t per_axis = hi - lo;
    std::int64_t total = 1;
    for (int a = 0; a < w.dim; ++a) total *= per_axis;
    out.reserve(size_t(total));
    DyadicCube q;
    q.level = level;
    IVec idx{};
    for (int a = 0; a < w.dim; ++a) idx[a] = lo;
    while (true) {
        q.pos = IVec{};
        for (int a = 0; a < w.dim; ++a) q.pos[a] = idx[a];
        out.push_back(q);
        int a = w.dim - 1;
        while (a >= 0) {
            if (++idx[a] < hi) break;
            idx[a] = lo;
            --a;
        }
        if (a < 0) break;
    }
    return out;
}

std::vector<DyadicCube> enumerate_cubes(const IndexWindow& w) {
    std::vector<DyadicCube> out;
    for (int k = w.level_min; k <= w.level_max; ++k) {
        auto lvl = cubes_at_level(w, k);
        out.insert(out.end(), lvl.begin(), lvl.end());
    }
    return out;
}

DyadicCube locate(const IndexWindow& w, const Point& x, int level) {
    for (int a = 0; a < w.dim; ++a)
        if (!(x[a] >= double(w.box_lo) && x[a] < double(w.box_hi)))
            throw std::domain_error("locate: point outside the window box");
    DyadicCube q;
    q.level = level;
    for (int a = 0; a < w.dim; ++a)
        q.pos[a] = std::int64_t(std::floor(std::ldexp(x[a], level)));
    return q;
}

std::int64_t GridSpec::node_count() const {
    std::int64_t n = 1;
    for (int a = 0; a < dim; ++a) n *= nodes_per_axis();
    return n;
}

double GridSpec::node_weight() const {
    double w = 1;
    for (int a = 0; a < dim; ++a) w *= spacing();
    return w;
}

void GridSpec::node_point(std::int64_t flat, Point& out) const {
    IVec idx{};
    unflatten(flat, idx);
    out = Point{};
    for (int a = 0; a < dim; ++a) out[a] = node_coord(idx[a]);
}

std::int64_t GridSpec::flat_index(const IVec& idx) const {
    const std::int64_t n = nodes_per_axis();
    std::int64_t f = 0;
    for (int a = 0; a < dim; ++a) f = f * n + idx[a];
    return f;
}

void GridSpec::unflatten(std::int64_t flat, IVec& out) const {
    const std::int64_t n = nodes_per_axis();
    out = IVec{};
    for (int a = dim - 1; a >= 0; --a) {
        out[a] = flat % n;
        flat /= n;
    }
}

GridSpec grid_of(const IndexWindow& w) {
    GridSpec g;
    g.dim = w.dim;
    g.box_lo = w.box_lo;
    g.box_hi = w.box_hi;
    g.level_max = w.level_max;
    g.res = w.res;
    return g;
}

double Cube::volume(const GridSpec& g) const {
    double v = 1;
    for (int a = 0; a < g.dim; ++a) v *= side(g);
    return v;
}

void Cube::axis_node_range(const GridSpec& g, int axis, std::int64_t& lo, std::int64_t& hi) const {
    // node i sits at u-offset 2i+1; include when lo_u <= 2i+1 < lo_u+side_u
    lo = lo_u[axis] >> 1;
    hi = (lo_u[axis] + side_u) >> 1;
    if (lo < 0) lo = 0;
    const std::int64_t n = g.nodes_per_axis();
    if (hi > n) hi = n;
}

std::int64_t Cube::node_count(const GridSpec& g) const {
    std::int64_t c = 1;
    for (int a = 0; a < g.dim; ++a) {
        std::int64_t lo, hi;
        axis_node_range(g, a, lo, hi);
        if (hi <= lo) return 0;
        c *= hi - lo;
    }
    return c;
}

bool Cube::contains_node(const IVec& node_idx, int dim) const {
    for (int a = 0; a < dim; ++a) {
        const std::int64_t u = 2 * node_idx[a] + 1;
        if (u < lo_u[a] || u >= lo_u[a] + side_u) return false;
    }
    return true;
}

Cube cube_from_dyadic(const GridSpec& g, const DyadicCube& q) {
    const std::int64_t upc = g.units_per_coord();
    std::int64_t side_u;
    if (q.level >= 0) {
        const std::int64_t d = std::int64_t(1) << q.level;
        if (upc % d != 0) throw std::invalid_argument("cube finer than the grid");
        side_u = upc / d;
    } else {
        side_u = upc << (-q.level);
    }
    Cube c;
    c.side_u = side_u;
    for (int a = 0; a < g.dim; ++a) c.lo_u[a] = q.pos[a] * side_u - g.box_lo * upc;
    return c;
}

Cube cube_from_center_side(const GridSpec& g, const Point& center, double side) {
    const double upc = double(g.units_per_coord());
    Cube c;
    c.side_u = std::llround(side * upc);
    if (c.side_u < 1) throw std::invalid_argument("custom cube smaller than the grid unit");
    const std::int64_t extent = g.axis_extent_u();
    for (int a = 0; a < g.dim; ++a) {
        c.lo_u[a] = std::llround((center[a] - side / 2 - double(g.box_lo)) * upc);
        if (c.lo_u[a] < 0 || c.lo_u[a] + c.side_u > extent)
            throw std::invalid_argument("custom cube leaves the window box");
    }
    return c;
}

namespace {

void append_level(std::vector<Cube>& out, const IndexWindow& w, const GridSpec& g, int level) {
    for (const DyadicCube& q : cubes_at_level(w, level)) out.push_back(cube_from_dyadic(g, q));
}

void append_shifted_level(std::vector<Cube>& out, const IndexWindow& w, const GridSpec& g, int level) {
    const std::int64_t extent = g.axis_extent_u();
    auto base = cubes_at_level(w, level);
    if (base.empty()) return;
    const std::int64_t side_u = cube_from_dyadic(g, base.front()).side_u;
    const std::int64_t half = side_u / 2;
    // all nonzero {0, half}^dim shift combinations
    for (int mask = 1; mask < (1 << w.dim); ++mask) {
        for (const DyadicCube& q : base) {
            Cube c = cube_from_dyadic(g, q);
            bool ok = true;
            for (int a = 0; a < w.dim; ++a) {
                if (mask & (1 << a)) c.lo_u[a] += half;
                if (c.lo_u[a] + c.side_u > extent) { ok = false; break; }
            }
            if (ok) out.push_back(c);
        }
    }
}

} // namespace

CubeFamily CubeFamily::dyadic(const IndexWindow& w) {
    w.validate();
    CubeFamily f;
    f.grid = grid_of(w);
    f.tag = FamilyTag::dyadic;
    for (int k = w.level_min; k <= w.level_max; ++k) append_level(f.cubes, w, f.grid, k);
    return f;
}

CubeFamily CubeFamily::shifted(const IndexWindow& w) {
    CubeFamily f = dyadic(w);
    f.tag = FamilyTag::shifted_dyadic;
    for (int k = w.level_min; k <= w.level_max; ++k) append_shifted_level(f.cubes, w, f.grid, k);
    return f;
}

CubeFamily CubeFamily::enlarged(const IndexWindow& w) {
    CubeFamily f = shifted(w);
    int r = 0;
    while ((1 << (r + 1)) <= w.res && (w.res % (1 << (r + 1))) == 0) ++r;
    if ((1 << r) == w.res) {
        // res is a power of two: the finer dyadic levels reach single-node cells
        IndexWindow fine = w;
        fine.level_max = w.level_max + r;
        fine.res = 1; // only used for geometry validity below this point
        for (int k = w.level_max + 1; k <= fine.level_max; ++k) append_level(f.cubes, fine, f.grid, k);
    } else {
        // fall back to one cell cube per node
        const std::int64_t n = f.grid.nodes_per_axis();
        IVec idx{};
        std::int64_t total = f.grid.node_count();
        for (std::int64_t flat = 0; flat < total; ++flat) {
            f.grid.unflatten(flat, idx);
            Cube c;
            c.side_u = 2;
            for (int a = 0; a < f.grid.dim; ++a) c.lo_u[a] = 2 * idx[a];
            f.cubes.push_back(c);
        }
        (void)n;
    }
    return f;
}

CubeFamily CubeFamily::custom(const GridSpec& g, const std::vector<std::pair<Point, double>>& center_side) {
    CubeFamily f;
    f.grid = g;
    f.tag = FamilyTag::custom;
    f.cubes.reserve(center_side.size());
    for (const auto& [c, s] : center_side) f.cubes.push_back(cube_from_center_side(g, c, s));
    return f;
}

CubeFamily family_by_name(const IndexWindow& w, const std::string& name) {
    if (name == "dyadic") return CubeFamily::dyadic(w);
    if (name == "shifted") return CubeFamily::shifted(w);
    if (name == "enlarged") return CubeFamily::enlarged(w);
    throw std::invalid_argument("unknown cube family: " + name);
}

std::vector<QuadNode> quadrature_nodes(const DyadicCube& q, int R, int dim) {
    if (R < 2) throw std::invalid_argument("quadrature_nodes: R must be >= 2");
    std::int64_t count = 1;
    for (int a = 0; a < dim; ++a) count *= R;
    std::vector<QuadNode> out;
    out.reserve(size_t(count));
    const double s = q.side();
    const double w = q.volume(dim) / double(count);
    IVec idx{};
    while (true) {
        QuadNode node;
        node.weight = w;
        for (int a = 0; a < dim; ++a) node.x[a] = s * (double(q.pos[a]) + (double(idx[a]) + 0.5) / double(R));
        out.push_back(node);
        int a = dim - 1;
        while (a >= 0) {
            if (++idx[a] < R) break;
            idx[a] = 0;
            --a;
        }
        if (a < 0) break;
    }
    return out;
}

} // namespace besovlab
