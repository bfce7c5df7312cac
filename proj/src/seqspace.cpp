#include "besovlab/seqspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace besovlab {

using nlohmann::json;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void CoeffField::set(int k, const IVec& m, std::complex<double> v) {
    DyadicCube q{k, m};
    if (!window.contains(q))
        throw std::out_of_range("coeff field: cube (k=" + std::to_string(k) + ") is outside the window");
    CubeKey key{k, m};
    if (v == std::complex<double>(0.0, 0.0))
        entries.erase(key);
    else
        entries[key] = v;
}

std::complex<double> CoeffField::get(int k, const IVec& m) const {
    auto it = entries.find(CubeKey{k, m});
    return it == entries.end() ? std::complex<double>(0.0, 0.0) : it->second;
}

CoeffField coeff_field_from_json(const IndexWindow& w, const std::string& json_text) {
    json j = json::parse(json_text);
    if (!j.is_array()) throw std::invalid_argument("coeff field: expected a JSON array of records");
    CoeffField c(w);
    for (const auto& rec : j) {
        int k = rec.at("k").get<int>();
        auto mv = rec.at("m").get<std::vector<std::int64_t>>();
        if (int(mv.size()) != w.dim) throw std::invalid_argument("coeff field: m length must equal window dim");
        IVec m{};
        for (int a = 0; a < w.dim; ++a) m[a] = mv[std::size_t(a)];
        c.set(k, m, {rec.value("re", 0.0), rec.value("im", 0.0)});
    }
    return c;
}

std::string coeff_field_to_json(const CoeffField& c) {
    json arr = json::array();
    for (const auto& [key, v] : c.entries) {
        std::vector<std::int64_t> mv;
        for (int a = 0; a < c.window.dim; ++a) mv.push_back(key.m[a]);
        arr.push_back({{"k", key.k}, {"m", mv}, {"re", v.real()}, {"im", v.imag()}});
    }
    return arr.dump();
}

void SpaceSpec::validate() const {
    if (!(q > 0) || std::isinf(q)) throw std::invalid_argument("space spec: q must be in (0, inf)");
    if (family != SpaceFamily::f_infinity) {
        if (!(p > 0) || std::isinf(p)) throw std::invalid_argument("space spec: p must be in (0, inf)");
    }
    if (!(weights.admissibility_p > 0)) throw std::invalid_argument("space spec: weight admissibility exponent");
}

const char* space_family_name(SpaceFamily f) {
    switch (f) {
    case SpaceFamily::b: return "b";
    case SpaceFamily::f: return "f";
    case SpaceFamily::f_infinity: return "f_infinity";
    }
    return "?";
}

SpaceFamily space_family_from_name(const std::string& name) {
    if (name == "b") return SpaceFamily::b;
    if (name == "f") return SpaceFamily::f;
    if (name == "f_infinity" || name == "finf" || name == "f_inf") return SpaceFamily::f_infinity;
    throw std::invalid_argument("space family: unknown name '" + name + "'");
}

LocalWeightTable build_local_weight_table(const WeightSequence& t, const IndexWindow& w, double exponent,
                                          double kappa) {
    if (!(exponent > 0) || std::isinf(exponent))
        throw std::invalid_argument("local weight table: exponent must be in (0, inf)");
    w.validate();
    const GridSpec g = grid_of(w);
    LocalWeightTable table;
    table.exponent = exponent;
    table.kappa = kappa;
    for (const DyadicCube& q : enumerate_cubes(w)) {
        const Cube c = cube_from_dyadic(g, q);
        double acc = 0;
        for_nodes_in_cube(g, c, [&](std::int64_t, const Point& x) {
            double v = t.eval(q.level, x, g.dim);
            if (!(v > 0) || !std::isfinite(v))
                throw std::domain_error("local weight table: nonpositive weight value at a grid node");
            acc += std::pow(v, exponent);
        });
        table.values[CubeKey{q.level, q.pos}] = std::pow(acc * g.node_weight(), 1.0 / exponent);
    }
    return table;
}

namespace {

double table_at(const LocalWeightTable& table, const CubeKey& key) {
    auto it = table.values.find(key);
    if (it == table.values.end())
        throw std::out_of_range("local weight table: missing entry for a populated cube");
    return it->second;
}

// integral over the cube of t_k^e on the grid
double cube_weight_integral(const GridSpec& g, const WeightSequence& t, int k, const Cube& c, double e) {
    double acc = 0;
    for_nodes_in_cube(g, c, [&](std::int64_t, const Point& x) {
        double v = t.eval(k, x, g.dim);
        if (!(v > 0) || !std::isfinite(v))
            throw std::domain_error("sequence norm: nonpositive weight value at a grid node");
        acc += std::pow(v, e);
    });
    return acc * g.node_weight();
}

} // namespace

double bnorm(const CoeffField& c, const SpaceSpec& spec) {
    spec.validate();
    if (spec.family != SpaceFamily::b) throw std::invalid_argument("bnorm: spec family must be b");
    const GridSpec g = grid_of(c.window);
    const double n = double(g.dim), p = spec.p, q = spec.q;
    double outer = 0;
    auto it = c.entries.begin();
    while (it != c.entries.end()) {
        const int k = it->first.k;
        double level_acc = 0; // sum over nodes of (t_k |lambda|)^p within this level
        for (; it != c.entries.end() && it->first.k == k; ++it) {
            const double a = std::abs(it->second);
            const Cube cube = cube_from_dyadic(g, DyadicCube{k, it->first.m});
            for_nodes_in_cube(g, cube, [&](std::int64_t, const Point& x) {
                level_acc += std::pow(spec.weights.eval(k, x, g.dim) * a, p);
            });
        }
        const double lp = std::pow(level_acc * g.node_weight(), 1.0 / p);
        outer += std::exp2(double(k) * n * q / 2.0) * std::pow(lp, q);
    }
    return std::pow(outer, 1.0 / q);
}

double fnorm(const CoeffField& c, const SpaceSpec& spec) {
    spec.validate();
    if (spec.family != SpaceFamily::f) throw std::invalid_argument("fnorm: spec family must be f");
    const GridSpec g = grid_of(c.window);
    const double n = double(g.dim), p = spec.p, q = spec.q;
    std::map<std::int64_t, double> node_sum; // q-th powers stacked per node
    for (const auto& [key, v] : c.entries) {
        const double aq = std::pow(std::abs(v), q);
        const double lvl = std::exp2(double(key.k) * n * q / 2.0);
        const Cube cube = cube_from_dyadic(g, DyadicCube{key.k, key.m});
        for_nodes_in_cube(g, cube, [&](std::int64_t flat, const Point& x) {
            node_sum[flat] += lvl * std::pow(spec.weights.eval(key.k, x, g.dim), q) * aq;
        });
    }
    double acc = 0;
    for (const auto& [flat, s] : node_sum) acc += std::pow(s, p / q);
    return std::pow(acc * g.node_weight(), 1.0 / p);
}

double bnorm_star(const CoeffField& c, const SpaceSpec& spec, const LocalWeightTable& table) {
    spec.validate();
    if (spec.family != SpaceFamily::b) throw std::invalid_argument("bnorm_star: spec family must be b");
    if (std::fabs(table.kappa - 1.0) > 1e-12 || std::fabs(table.exponent - spec.p) > 1e-9)
        throw std::invalid_argument("bnorm_star: table must be built with kappa = 1 at the spec's p");
    const double n = double(c.window.dim), p = spec.p, q = spec.q;
    double outer = 0;
    auto it = c.entries.begin();
    while (it != c.entries.end()) {
        const int k = it->first.k;
        double inner = 0; // sum_m |lambda|^p t_{k,m}^p
        for (; it != c.entries.end() && it->first.k == k; ++it)
            inner += std::pow(std::abs(it->second), p) * std::pow(table_at(table, it->first), p);
        outer += std::exp2(double(k) * n * q / 2.0) * std::pow(inner, q / p);
    }
    return std::pow(outer, 1.0 / q);
}

double fnorm_star(const CoeffField& c, const SpaceSpec& spec, const LocalWeightTable& table) {
    spec.validate();
    if (spec.family != SpaceFamily::f) throw std::invalid_argument("fnorm_star: spec family must be f");
    const double e = table.exponent; // kappa * p
    if (std::fabs(table.kappa * spec.p - e) > 1e-9)
        throw std::invalid_argument("fnorm_star: table exponent must equal kappa * p");
    const GridSpec g = grid_of(c.window);
    const double n = double(g.dim), p = spec.p, q = spec.q;
    std::map<std::int64_t, double> node_sum;
    for (const auto& [key, v] : c.entries) {
        const double s = std::exp2(double(key.k) * n * q * (0.5 + 1.0 / e)) *
                         std::pow(table_at(table, key), q) * std::pow(std::abs(v), q);
        const Cube cube = cube_from_dyadic(g, DyadicCube{key.k, key.m});
        for_nodes_in_cube(g, cube, [&](std::int64_t flat, const Point&) { node_sum[flat] += s; });
    }
    double acc = 0;
    for (const auto& [flat, sv] : node_sum) acc += std::pow(sv, p / q);
    return std::pow(acc * g.node_weight(), 1.0 / p);
}

namespace {

// shared sup-over-ancestors scaffold: per populated cube a nonnegative mass,
// spread to every window ancestor level, sup of (2^{ln} * mass_sum)^{1/q}
double sup_over_parents(const CoeffField& c, const GridSpec& g, double q,
                        const std::function<double(const CubeKey&, const Cube&)>& mass) {
    std::map<CubeKey, double> per_parent;
    for (const auto& [key, v] : c.entries) {
        const Cube cube = cube_from_dyadic(g, DyadicCube{key.k, key.m});
        const double m = mass(key, cube);
        for (int l = c.window.level_min; l <= key.k; ++l) {
            CubeKey parent{l, {}};
            for (int a = 0; a < g.dim; ++a) parent.m[a] = key.m[a] >> (key.k - l);
            per_parent[parent] += m;
        }
    }
    double sup = 0;
    for (const auto& [pk, s] : per_parent)
        sup = std::max(sup, std::exp2(double(pk.k) * double(g.dim)) * s);
    return std::pow(sup, 1.0 / q);
}

} // namespace

double finf_norm(const CoeffField& c, const SpaceSpec& spec) {
    spec.validate();
    if (spec.family != SpaceFamily::f_infinity) throw std::invalid_argument("finf_norm: spec family must be f_infinity");
    const GridSpec g = grid_of(c.window);
    const double n = double(g.dim), q = spec.q;
    return sup_over_parents(c, g, q, [&](const CubeKey& key, const Cube& cube) {
        const double iq = cube_weight_integral(g, spec.weights, key.k, cube, q);
        return std::exp2(double(key.k) * n * q / 2.0) * std::pow(std::abs(c.entries.at(key)), q) * iq;
    });
}

double finf_norm_local(const CoeffField& c, const SpaceSpec& spec, const LocalWeightTable& table) {
    spec.validate();
    if (spec.family != SpaceFamily::f_infinity)
        throw std::invalid_argument("finf_norm_local: spec family must be f_infinity");
    if (std::fabs(table.exponent - spec.q) > 1e-9)
        throw std::invalid_argument("finf_norm_local: table exponent must equal q");
    const GridSpec g = grid_of(c.window);
    const double n = double(g.dim), q = spec.q;
    return sup_over_parents(c, g, q, [&](const CubeKey& key, const Cube& cube) {
        const double vol = double(cube.node_count(g)) * g.node_weight();
        return std::exp2(double(key.k) * n * q * (0.5 + 1.0 / q)) * std::pow(table_at(table, key), q) *
               std::pow(std::abs(c.entries.at(key)), q) * vol;
    });
}

double finf_norm_esets(const CoeffField& c, const SpaceSpec& spec, const ESetMap& esets) {
    spec.validate();
    if (spec.family != SpaceFamily::f_infinity)
        throw std::invalid_argument("finf_norm_esets: spec family must be f_infinity");
    const GridSpec g = grid_of(c.window);
    const double n = double(g.dim), q = spec.q;
    std::map<std::int64_t, double> node_sum;
    for (const auto& [key, v] : c.entries) {
        const Cube cube = cube_from_dyadic(g, DyadicCube{key.k, key.m});
        const double iq = cube_weight_integral(g, spec.weights, key.k, cube, q); // = t_{k,m,q}^q
        const double s = std::exp2(double(key.k) * n * q * (0.5 + 1.0 / q)) * iq * std::pow(std::abs(v), q);
        auto eit = esets.find(key);
        if (eit == esets.end()) {
            // default: the full cube
            for_nodes_in_cube(g, cube, [&](std::int64_t flat, const Point&) { node_sum[flat] += s; });
            continue;
        }
        const std::vector<std::int64_t>& nodes = eit->second;
        const std::int64_t total = cube.node_count(g);
        if (2 * std::int64_t(nodes.size()) <= total)
            throw std::invalid_argument("finf_norm_esets: E-set measure must exceed |Q|/2");
        IVec idx{};
        for (std::int64_t flat : nodes) {
            g.unflatten(flat, idx);
            if (!cube.contains_node(idx, g.dim))
                throw std::invalid_argument("finf_norm_esets: E-set node outside its cube");
            node_sum[flat] += s;
        }
    }
    double sup = 0;
    for (const auto& [flat, sv] : node_sum) sup = std::max(sup, sv);
    return std::pow(sup, 1.0 / q);
}

WeightSequence holder_combine(const WeightSequence& t, const WeightSequence& w, double theta) {
    if (!(theta > 0) || !(theta < 1)) throw std::invalid_argument("holder combine: theta must be in (0,1)");
    const double p_out = 1.0 / ((1.0 - theta) / t.admissibility_p + theta / w.admissibility_p);
    auto level_of = [](const WeightSequence& s, int k) {
        if (s.kind == WeightSequence::Kind::geometric)
            return Weight::product({Weight::constant(std::exp2(double(k) * s.s)), s.base});
        const Weight* lw = s.level_weight(k);
        if (!lw) throw std::out_of_range("holder combine: missing level in per-level weight sequence");
        return *lw;
    };
    if (t.kind == WeightSequence::Kind::geometric && w.kind == WeightSequence::Kind::geometric) {
        Weight base = Weight::product({weight_pow(t.base, 1.0 - theta), weight_pow(w.base, theta)});
        return WeightSequence::geometric((1.0 - theta) * t.s + theta * w.s, std::move(base), p_out);
    }
    const std::map<int, Weight>& ref =
        t.kind == WeightSequence::Kind::per_level ? t.levels : w.levels;
    std::map<int, Weight> combined;
    for (const auto& [k, unused] : ref) {
        if (t.kind == WeightSequence::Kind::per_level && w.kind == WeightSequence::Kind::per_level &&
            !w.level_weight(k))
            continue; // combine over common levels only
        combined.emplace(k, Weight::product({weight_pow(level_of(t, k), 1.0 - theta),
                                             weight_pow(level_of(w, k), theta)}));
    }
    if (combined.empty()) throw std::invalid_argument("holder combine: no common levels");
    return WeightSequence::per_level(std::move(combined), p_out);
}

std::pair<double, double> holder_lemma_ratio(const GridSpec& g, const WeightSequence& t, const WeightSequence& w,
                                             double theta, double q0, double q1, int k, const Cube& Q,
                                             const std::vector<std::int64_t>& eset) {
    if (!(theta > 0) || !(theta < 1)) throw std::invalid_argument("holder lemma: theta must be in (0,1)");
    if (!(q0 > 0) || !(q1 > 0)) throw std::invalid_argument("holder lemma: exponents must be positive");
    if (eset.empty()) throw std::invalid_argument("holder lemma: empty E-set");
    const double q = 1.0 / ((1.0 - theta) / q0 + theta / q1);
    double acc_q = 0, acc0 = 0, acc1 = 0;
    Point x{};
    IVec idx{};
    for (std::int64_t flat : eset) {
        g.unflatten(flat, idx);
        if (!Q.contains_node(idx, g.dim)) throw std::invalid_argument("holder lemma: E-set node outside the cube");
        g.node_point(flat, x);
        const double tv = t.eval(k, x, g.dim);
        const double wv = w.eval(k, x, g.dim);
        if (!(tv > 0) || !(wv > 0)) throw std::domain_error("holder lemma: nonpositive weight value");
        acc_q += std::pow(std::pow(tv, 1.0 - theta) * std::pow(wv, theta), q);
        acc0 += std::pow(tv, q0);
        acc1 += std::pow(wv, q1);
    }
    const double nw = g.node_weight();
    const double lhs = std::pow(acc_q * nw, 1.0 / q);
    const double rhs = std::pow(acc0 * nw, (1.0 - theta) / q0) * std::pow(acc1 * nw, theta / q1);
    return {lhs, rhs};
}

double quasi_triangle_constant(double p, double q) {
    return std::max(1.0, std::exp2(1.0 / std::min(p, q) - 1.0));
}

} // namespace besovlab
