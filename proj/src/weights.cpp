#include "besovlab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace besovlab {

using nlohmann::json;

static double norm2(const Point& x, int dim) {
    double s = 0;
    for (int a = 0; a < dim; ++a) s += x[a] * x[a];
    return std::sqrt(s);
}

double Weight::eval(const Point& x, int dim) const {
    switch (kind) {
    case Kind::constant:
        return value;
    case Kind::power:
        return std::pow(norm2(x, dim), alpha);
    case Kind::shifted_power:
        return std::pow(1.0 + norm2(x, dim), alpha);
    case Kind::table: {
        const std::int64_t extent = (table_hi - table_lo) << table_level;
        std::int64_t flat = 0;
        for (int a = 0; a < table_dim; ++a) {
            double c = std::floor((x[a] - double(table_lo)) * pow2d(table_level));
            if (c < 0 || c >= double(extent)) return 1.0; // outside the table box
            flat = flat * extent + std::int64_t(c);
        }
        return table_values[std::size_t(flat)];
    }
    case Kind::product: {
        double v = 1.0;
        for (const auto& f : factors) v *= f.eval(x, dim);
        return v;
    }
    }
    return 1.0;
}

Weight Weight::constant(double c) {
    Weight w;
    w.kind = Kind::constant;
    w.value = c;
    return w;
}

Weight Weight::power(double a) {
    Weight w;
    w.kind = Kind::power;
    w.alpha = a;
    return w;
}

Weight Weight::shifted_power(double a) {
    Weight w;
    w.kind = Kind::shifted_power;
    w.alpha = a;
    return w;
}

Weight Weight::table(int level, std::int64_t lo, std::int64_t hi, std::vector<double> values, int dim) {
    if (hi <= lo) throw std::invalid_argument("weight table: box must be nonempty");
    if (level < 0 || level > 30) throw std::invalid_argument("weight table: level out of range");
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("weight table: dim out of range");
    const std::int64_t extent = (hi - lo) << level;
    std::int64_t expect = 1;
    for (int a = 0; a < dim; ++a) expect *= extent;
    if (std::int64_t(values.size()) != expect)
        throw std::invalid_argument("weight table: values size does not match box/level/dim");
    Weight w;
    w.kind = Kind::table;
    w.table_level = level;
    w.table_dim = dim;
    w.table_lo = lo;
    w.table_hi = hi;
    w.table_values = std::move(values);
    return w;
}

Weight Weight::product(std::vector<Weight> fs) {
    Weight w;
    w.kind = Kind::product;
    w.factors = std::move(fs);
    return w;
}

Weight weight_pow(const Weight& w, double e) {
    Weight r = w;
    switch (w.kind) {
    case Weight::Kind::constant:
        r.value = std::pow(w.value, e);
        break;
    case Weight::Kind::power:
    case Weight::Kind::shifted_power:
        r.alpha = w.alpha * e;
        break;
    case Weight::Kind::table:
        for (auto& v : r.table_values) v = std::pow(v, e);
        break;
    case Weight::Kind::product:
        for (std::size_t i = 0; i < w.factors.size(); ++i) r.factors[i] = weight_pow(w.factors[i], e);
        break;
    }
    return r;
}

// ---- JSON (tagged unions) ----

static json weight_to_obj(const Weight& w) {
    switch (w.kind) {
    case Weight::Kind::constant:
        return json{{"const", w.value}};
    case Weight::Kind::power:
        return json{{"power", {{"alpha", w.alpha}}}};
    case Weight::Kind::shifted_power:
        return json{{"shifted_power", {{"alpha", w.alpha}}}};
    case Weight::Kind::table:
        return json{{"table",
                     {{"level", w.table_level},
                      {"dim", w.table_dim},
                      {"box", {w.table_lo, w.table_hi}},
                      {"values", w.table_values}}}};
    case Weight::Kind::product: {
        json arr = json::array();
        for (const auto& f : w.factors) arr.push_back(weight_to_obj(f));
        return json{{"product", arr}};
    }
    }
    return json{{"const", 1.0}};
}

static Weight weight_from_obj(const json& j) {
    if (!j.is_object() || j.size() != 1)
        throw std::invalid_argument("weight: expected a single-key tagged object");
    const auto it = j.begin();
    const std::string& tag = it.key();
    const json& body = it.value();
    if (tag == "const") return Weight::constant(body.get<double>());
    if (tag == "power") return Weight::power(body.at("alpha").get<double>());
    if (tag == "shifted_power") return Weight::shifted_power(body.at("alpha").get<double>());
    if (tag == "table") {
        if (body.is_array()) {
            // shorthand: 2^l values on [0,1), one dimension
            auto values = body.get<std::vector<double>>();
            int level = 0;
            while ((std::size_t(1) << level) < values.size()) ++level;
            if ((std::size_t(1) << level) != values.size())
                throw std::invalid_argument("weight table shorthand: size must be a power of two");
            return Weight::table(level, 0, 1, std::move(values));
        }
        auto box = body.at("box").get<std::vector<std::int64_t>>();
        if (box.size() != 2) throw std::invalid_argument("weight table: box must be [lo, hi]");
        int level = body.at("level").get<int>();
        int dim = body.value("dim", 1);
        auto values = body.at("values").get<std::vector<double>>();
        return Weight::table(level, box[0], box[1], std::move(values), dim);
    }
    if (tag == "product") {
        std::vector<Weight> fs;
        for (const auto& e : body) fs.push_back(weight_from_obj(e));
        return Weight::product(std::move(fs));
    }
    throw std::invalid_argument("weight: unknown tag '" + tag + "'");
}

Weight weight_from_json(const std::string& json_text) {
    return weight_from_obj(json::parse(json_text));
}

std::string weight_to_json(const Weight& w) { return weight_to_obj(w).dump(); }

static std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t weight_descriptor_hash(const Weight& w) { return fnv1a(weight_to_json(w)); }

double WeightSequence::eval(int k, const Point& x, int dim) const {
    if (kind == Kind::geometric) return std::exp2(double(k) * s) * base.eval(x, dim);
    auto it = levels.find(k);
    if (it == levels.end()) throw std::out_of_range("weight sequence: no weight stored for level " + std::to_string(k));
    return it->second.eval(x, dim);
}

const Weight* WeightSequence::level_weight(int k) const {
    auto it = levels.find(k);
    return it == levels.end() ? nullptr : &it->second;
}

WeightSequence WeightSequence::geometric(double s, Weight base, double p) {
    WeightSequence t;
    t.kind = Kind::geometric;
    t.s = s;
    t.base = std::move(base);
    t.admissibility_p = p;
    return t;
}

WeightSequence WeightSequence::per_level(std::map<int, Weight> levels, double p) {
    WeightSequence t;
    t.kind = Kind::per_level;
    t.levels = std::move(levels);
    t.admissibility_p = p;
    return t;
}

static json weight_seq_to_obj(const WeightSequence& t) {
    json j;
    j["p"] = t.admissibility_p;
    if (t.kind == WeightSequence::Kind::geometric) {
        j["geometric"] = {{"s", t.s}, {"base", weight_to_obj(t.base)}};
    } else {
        json tbl = json::object();
        for (const auto& [k, w] : t.levels) tbl[std::to_string(k)] = weight_to_obj(w);
        j["per_level"] = tbl;
    }
    return j;
}

WeightSequence weight_seq_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    if (!j.is_object()) throw std::invalid_argument("weight sequence: expected an object");
    double p = j.value("p", 1.0);
    if (!(p > 0)) throw std::invalid_argument("weight sequence: admissibility p must be positive");
    if (j.contains("geometric")) {
        const json& g = j["geometric"];
        return WeightSequence::geometric(g.at("s").get<double>(), weight_from_obj(g.at("base")), p);
    }
    if (j.contains("per_level")) {
        std::map<int, Weight> levels;
        for (const auto& [key, val] : j["per_level"].items()) levels.emplace(std::stoi(key), weight_from_obj(val));
        if (levels.empty()) throw std::invalid_argument("weight sequence: per_level table is empty");
        return WeightSequence::per_level(std::move(levels), p);
    }
    throw std::invalid_argument("weight sequence: expected 'geometric' or 'per_level'");
}

std::string weight_seq_to_json(const WeightSequence& t) { return weight_seq_to_obj(t).dump(); }

std::uint64_t weight_seq_descriptor_hash(const WeightSequence& t) { return fnv1a(weight_seq_to_json(t)); }

double conjugate_exponent(double p) {
    if (p < 1) throw std::invalid_argument("conjugate exponent: p must be >= 1");
    if (p == 1) return std::numeric_limits<double>::infinity();
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

// ---- cube averages ----

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename F>
double power_mean(const GridSpec& g, const Cube& c, double r, F&& f) {
    if (!(r > 0)) throw std::invalid_argument("cube average: exponent r must be in (0, inf]");
    double acc = 0, vmax = 0;
    std::int64_t count = 0;
    for_nodes_in_cube(g, c, [&](std::int64_t, const Point& x) {
        double v = f(x);
        if (!(v > 0) || !std::isfinite(v))
            throw std::domain_error("cube average: nonpositive or non-finite weight value at a grid node");
        if (std::isinf(r))
            vmax = std::max(vmax, v);
        else
            acc += (r == 1.0) ? v : std::pow(v, r);
        ++count;
    });
    if (count == 0) throw std::invalid_argument("cube average: cube contains no grid nodes");
    if (std::isinf(r)) return vmax;
    double m = acc / double(count);
    return (r == 1.0) ? m : std::pow(m, 1.0 / r);
}

} // namespace

double cube_average(const GridSpec& g, const Cube& c, double r, const std::function<double(const Point&)>& f) {
    return power_mean(g, c, r, f);
}

double cube_average(const GridSpec& g, const Cube& c, double r, const Weight& w) {
    return power_mean(g, c, r, [&](const Point& x) { return w.eval(x, g.dim); });
}

// ---- Muckenhoupt constants ----

ApEstimate estimate_ap_constant(const Weight& gamma, double p, const CubeFamily& cubes) {
    if (p < 1) throw std::invalid_argument("ap estimate: p must be >= 1");
    if (cubes.cubes.empty()) throw std::invalid_argument("ap estimate: empty cube family");
    const GridSpec& g = cubes.grid;
    const double r2 = (p == 1) ? kInf : 1.0 / (p - 1.0); // p'/p

    ApEstimate est;
    est.p = p;
    est.value = 0;
    std::map<std::int64_t, double> by_side; // side_u -> per-scale sup
    for (const Cube& c : cubes.cubes) {
        double v;
        if (p == 1) {
            double mean = 0, vmin = kInf;
            std::int64_t count = 0;
            for_nodes_in_cube(g, c, [&](std::int64_t, const Point& x) {
                double w = gamma.eval(x, g.dim);
                if (!(w > 0) || !std::isfinite(w))
                    throw std::domain_error("ap estimate: nonpositive or non-finite weight value at a grid node");
                mean += w;
                vmin = std::min(vmin, w);
                ++count;
            });
            if (count == 0) throw std::invalid_argument("ap estimate: cube contains no grid nodes");
            v = (mean / double(count)) / vmin;
        } else {
            double s1 = 0, s2 = 0;
            std::int64_t count = 0;
            for_nodes_in_cube(g, c, [&](std::int64_t, const Point& x) {
                double w = gamma.eval(x, g.dim);
                if (!(w > 0) || !std::isfinite(w))
                    throw std::domain_error("ap estimate: nonpositive or non-finite weight value at a grid node");
                s1 += w;
                s2 += std::pow(w, -r2);
                ++count;
            });
            if (count == 0) throw std::invalid_argument("ap estimate: cube contains no grid nodes");
            v = (s1 / double(count)) * std::pow(s2 / double(count), 1.0 / r2);
        }
        est.value = std::max(est.value, v);
        auto [it, fresh] = by_side.try_emplace(c.side_u, v);
        if (!fresh) it->second = std::max(it->second, v);
    }
    for (const auto& [side_u, sup] : by_side) est.trace.emplace_back(double(side_u) * 0.5 * g.spacing(), sup);
    est.verdict = (est.trace.back().second >= 2.0 * est.trace.front().second) ? "growing" : "stable";
    return est;
}

std::optional<double> find_stable_smaller_exponent(const Weight& gamma, double p, const CubeFamily& cubes,
                                                   int depth) {
    double prev = -1;
    for (int i = 1; i <= depth; ++i) {
        double cand = std::max(1.0, p * (1.0 - std::exp2(double(-i))));
        if (cand >= p || cand == prev) continue;
        prev = cand;
        if (estimate_ap_constant(gamma, cand, cubes).verdict == "stable") return cand;
    }
    return std::nullopt;
}

// ---- the two-index condition on {t_k} ----

double TyulenevReport::certificate1_at(double alpha) const {
    double c = 0;
    for (const auto& r : rows) c = std::max(c, r.sup_L1 * std::exp2(alpha * double(r.j - r.k)));
    return c;
}

double TyulenevReport::certificate2_at(double alpha) const {
    double c = 0;
    for (const auto& r : rows) c = std::max(c, r.sup_L2 * std::exp2(-alpha * double(r.j - r.k)));
    return c;
}

namespace {

// ordinary least squares slope of y over x (with intercept)
double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double xm = 0, ym = 0;
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        xm += x[i];
        ym += y[i];
    }
    xm /= double(n);
    ym /= double(n);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (x[i] - xm) * (y[i] - ym);
        den += (x[i] - xm) * (x[i] - xm);
    }
    return num / den;
}

} // namespace

TyulenevReport check_tyulenev(const WeightSequence& t, double sigma1, double sigma2, const IndexWindow& w) {
    if (!(sigma1 > 0) || !(sigma2 > 0))
        throw std::invalid_argument("tyulenev check: sigma exponents must be in (0, inf]");
    w.validate();
    const GridSpec g = grid_of(w);
    const double p = t.admissibility_p;
    const int kmin = w.level_min, kmax = w.level_max;
    const int nlev = kmax - kmin + 1;

    TyulenevReport rep;
    rep.p = p;
    rep.sigma1 = sigma1;
    rep.sigma2 = sigma2;

    // per-cube means for every level, then suprema per (k, j) pair
    const std::size_t nl = std::size_t(nlev);
    std::vector<std::vector<double>> sup1(nl), sup2(nl);
    for (std::size_t k = 0; k < nl; ++k) {
        sup1[k].assign(nl, 0.0);
        sup2[k].assign(nl, 0.0);
    }
    std::vector<double> mp(nl), minv(nl), msig2(nl);
    for (const DyadicCube& q : enumerate_cubes(w)) {
        const Cube c = cube_from_dyadic(g, q);
        for (int k = kmin; k <= kmax; ++k) {
            auto tk = [&](const Point& x) { return t.eval(k, x, g.dim); };
            mp[std::size_t(k - kmin)] = power_mean(g, c, p, tk);
            minv[std::size_t(k - kmin)] = power_mean(g, c, sigma1, [&](const Point& x) { return 1.0 / tk(x); });
            msig2[std::size_t(k - kmin)] = power_mean(g, c, sigma2, tk);
        }
        for (int k = 0; k < nlev; ++k)
            for (int j = k; j < nlev; ++j) {
                double L1 = mp[std::size_t(k)] * minv[std::size_t(j)];
                double L2 = msig2[std::size_t(j)] / mp[std::size_t(k)];
                sup1[std::size_t(k)][std::size_t(j)] = std::max(sup1[std::size_t(k)][std::size_t(j)], L1);
                sup2[std::size_t(k)][std::size_t(j)] = std::max(sup2[std::size_t(k)][std::size_t(j)], L2);
            }
    }

    std::vector<double> gap_sup1(nl, 0.0), gap_sup2(nl, 0.0);
    for (int k = 0; k < nlev; ++k)
        for (int j = k; j < nlev; ++j) {
            rep.rows.push_back({k + kmin, j + kmin, sup1[std::size_t(k)][std::size_t(j)],
                                sup2[std::size_t(k)][std::size_t(j)]});
            gap_sup1[std::size_t(j - k)] = std::max(gap_sup1[std::size_t(j - k)], sup1[std::size_t(k)][std::size_t(j)]);
            gap_sup2[std::size_t(j - k)] = std::max(gap_sup2[std::size_t(j - k)], sup2[std::size_t(k)][std::size_t(j)]);
        }

    if (nlev == 1) {
        rep.degenerate = true;
        rep.alpha1 = rep.alpha2 = 0;
        rep.C1 = gap_sup1[0];
        rep.C2 = gap_sup2[0];
        return rep;
    }
    std::vector<double> gs(nl), y1(nl), y2(nl);
    for (int gidx = 0; gidx < nlev; ++gidx) {
        gs[std::size_t(gidx)] = double(gidx);
        y1[std::size_t(gidx)] = std::log2(gap_sup1[std::size_t(gidx)]);
        y2[std::size_t(gidx)] = std::log2(gap_sup2[std::size_t(gidx)]);
    }
    rep.alpha1 = -lsq_slope(gs, y1); // L1 <= C1 * 2^{-alpha1 * gap}
    rep.alpha2 = lsq_slope(gs, y2);  // L2 <= C2 * 2^{+alpha2 * gap}
    double c1 = -kInf, c2 = -kInf;
    for (int gidx = 0; gidx < nlev; ++gidx) {
        c1 = std::max(c1, y1[std::size_t(gidx)] + rep.alpha1 * double(gidx));
        c2 = std::max(c2, y2[std::size_t(gidx)] - rep.alpha2 * double(gidx));
    }
    rep.C1 = std::exp2(c1);
    rep.C2 = std::exp2(c2);
    return rep;
}

ApUniformity weights_ap_uniformity(const WeightSequence& t, double weight_power, double ap_exponent,
                                   const CubeFamily& cubes, int level_min, int level_max) {
    if (!(weight_power > 0)) throw std::invalid_argument("ap uniformity: weight power must be positive");
    if (level_min > level_max) throw std::invalid_argument("ap uniformity: empty level range");
    ApUniformity u;
    double vmax = 0, vmin = kInf;
    for (int k = level_min; k <= level_max; ++k) {
        Weight wk;
        if (t.kind == WeightSequence::Kind::geometric) {
            wk = Weight::product({Weight::constant(std::exp2(double(k) * t.s)), t.base});
        } else {
            const Weight* lw = t.level_weight(k);
            if (!lw) throw std::out_of_range("ap uniformity: no weight stored for level " + std::to_string(k));
            wk = *lw;
        }
        double a = estimate_ap_constant(weight_pow(wk, weight_power), ap_exponent, cubes).value;
        u.per_level.emplace_back(k, a);
        vmax = std::max(vmax, a);
        vmin = std::min(vmin, a);
    }
    u.spread = (vmax > 0) ? (vmax - vmin) / vmax : 0.0;
    u.same_constant = u.spread <= 0.1;
    return u;
}

} // namespace besovlab
