#include "besovlab/maximal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace besovlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SampledField SampledField::zeros(const GridSpec& g) {
    SampledField f;
    f.grid = g;
    f.values.assign(std::size_t(g.node_count()), 0.0);
    return f;
}

SampledField SampledField::constant(const GridSpec& g, double c) {
    SampledField f = zeros(g);
    for (auto& v : f.values) v = c;
    return f;
}

SampledField sample_field(const GridSpec& g, const std::function<double(const Point&)>& f) {
    SampledField out = SampledField::zeros(g);
    Point x{};
    for (std::int64_t flat = 0; flat < g.node_count(); ++flat) {
        g.node_point(flat, x);
        out.values[std::size_t(flat)] = f(x);
    }
    return out;
}

double grid_lp_norm(const SampledField& f, double p) {
    if (!(p > 0)) throw std::invalid_argument("grid norm: p must be in (0, inf]");
    if (std::isinf(p)) {
        double m = 0;
        for (double v : f.values) m = std::max(m, std::fabs(v));
        return m;
    }
    double acc = 0;
    for (double v : f.values) acc += std::pow(std::fabs(v), p);
    return std::pow(acc * f.grid.node_weight(), 1.0 / p);
}

void FieldStack::insert(int k, SampledField f) {
    if (!fields.empty() && !(f.grid == fields.begin()->second.grid))
        throw std::invalid_argument("field stack: all members must share one grid");
    fields.insert_or_assign(k, std::move(f));
}

const GridSpec& FieldStack::grid() const {
    if (fields.empty()) throw std::logic_error("field stack: empty");
    return fields.begin()->second.grid;
}

SampledField hl_maximal(const SampledField& f, const CubeFamily& cubes) {
    if (!(f.grid == cubes.grid)) throw std::invalid_argument("maximal: field and family grids differ");
    if (cubes.cubes.empty()) throw std::invalid_argument("maximal: empty cube family");
    SampledField out = SampledField::zeros(f.grid);
    std::vector<double>& mv = out.values;
    mv.assign(mv.size(), -1.0); // coverage sentinel: |f| means are >= 0
    for (const Cube& c : cubes.cubes) {
        double sum = 0;
        std::int64_t count = 0;
        for_nodes_in_cube(f.grid, c, [&](std::int64_t flat, const Point&) {
            sum += std::fabs(f.values[std::size_t(flat)]);
            ++count;
        });
        if (count == 0) continue;
        const double mean = sum / double(count);
        for_nodes_in_cube(f.grid, c, [&](std::int64_t flat, const Point&) {
            if (mean > mv[std::size_t(flat)]) mv[std::size_t(flat)] = mean;
        });
    }
    for (double v : mv)
        if (v < 0) throw std::domain_error("maximal: a grid node is covered by no family cube");
    return out;
}

SampledField power_maximal(const SampledField& f, double sigma, const CubeFamily& cubes) {
    if (!(sigma > 0)) throw std::invalid_argument("power maximal: sigma must be positive");
    if (sigma == 1.0) return hl_maximal(f, cubes);
    SampledField powered = f;
    for (auto& v : powered.values) v = std::pow(std::fabs(v), sigma);
    SampledField m = hl_maximal(powered, cubes);
    for (auto& v : m.values) v = std::pow(v, 1.0 / sigma);
    return m;
}

namespace {

// || (sum_k c_k(x) g_k(x)^q)^(1/q) ||_p with per-node coefficient tables;
// q = inf takes the nodewise sup of c_k^(1/q)... which degenerates to sup_k g_k
// with unit coefficients, so the weighted variant keeps q finite.
double stack_lpq_norm(const GridSpec& g, const std::vector<std::vector<double>>& terms_q, double p, double q) {
    const std::size_t n = std::size_t(g.node_count());
    std::vector<double> env(n, 0.0);
    for (const auto& t : terms_q)
        for (std::size_t i = 0; i < n; ++i) env[i] = std::isinf(q) ? std::max(env[i], t[i]) : env[i] + t[i];
    double acc = 0, m = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = std::isinf(q) ? env[i] : std::pow(env[i], 1.0 / q);
        if (std::isinf(p))
            m = std::max(m, e);
        else
            acc += std::pow(e, p);
    }
    return std::isinf(p) ? m : std::pow(acc * g.node_weight(), 1.0 / p);
}

} // namespace

double fefferman_stein_ratio(const FieldStack& fs, double p, double q, double sigma, const CubeFamily& cubes) {
    if (fs.fields.empty()) throw std::invalid_argument("fefferman-stein: empty stack");
    if (!(p > 0) || std::isinf(p)) throw std::invalid_argument("fefferman-stein: need 0 < p < inf");
    if (!(q > 0)) throw std::invalid_argument("fefferman-stein: need q > 0");
    if (!(sigma > 0) || !(sigma < std::min(p, q)))
        throw std::invalid_argument("fefferman-stein: need 0 < sigma < min(p, q)");
    const GridSpec& g = fs.grid();
    const std::size_t n = std::size_t(g.node_count());
    std::vector<std::vector<double>> num_terms, den_terms;
    for (const auto& [k, f] : fs.fields) {
        SampledField m = power_maximal(f, sigma, cubes);
        std::vector<double> tq(n), dq(n);
        for (std::size_t i = 0; i < n; ++i) {
            tq[i] = std::isinf(q) ? m.values[i] : std::pow(m.values[i], q);
            double a = std::fabs(f.values[i]);
            dq[i] = std::isinf(q) ? a : std::pow(a, q);
        }
        num_terms.push_back(std::move(tq));
        den_terms.push_back(std::move(dq));
    }
    double den = stack_lpq_norm(g, den_terms, p, q);
    if (den == 0) throw std::domain_error("fefferman-stein: zero denominator");
    return stack_lpq_norm(g, num_terms, p, q) / den;
}

double weighted_maximal_ratio(const FieldStack& fs, const WeightSequence& t, double p, double q,
                              const CubeFamily& cubes, double theta, ApUniformity* advisory) {
    if (fs.fields.empty()) throw std::invalid_argument("weighted maximal: empty stack");
    if (!(p > 1) || std::isinf(p) || !(q > 1) || std::isinf(q))
        throw std::invalid_argument("weighted maximal: need 1 < p, q < inf");
    const GridSpec& g = fs.grid();
    const std::size_t n = std::size_t(g.node_count());
    if (advisory) {
        const int kmin = fs.fields.begin()->first;
        const int kmax = fs.fields.rbegin()->first;
        *advisory = weights_ap_uniformity(t, p, p / theta, cubes, kmin, kmax);
    }
    std::vector<std::vector<double>> num_terms, den_terms;
    Point x{};
    for (const auto& [k, f] : fs.fields) {
        SampledField m = hl_maximal(f, cubes);
        std::vector<double> tq(n), dq(n);
        for (std::int64_t flat = 0; flat < g.node_count(); ++flat) {
            g.node_point(flat, x);
            double w = std::pow(t.eval(k, x, g.dim), q);
            std::size_t i = std::size_t(flat);
            tq[i] = w * std::pow(m.values[i], q);
            dq[i] = w * std::pow(std::fabs(f.values[i]), q);
        }
        num_terms.push_back(std::move(tq));
        den_terms.push_back(std::move(dq));
    }
    double den = stack_lpq_norm(g, den_terms, p, q);
    if (den == 0) throw std::domain_error("weighted maximal: zero denominator");
    return stack_lpq_norm(g, num_terms, p, q) / den;
}

} // namespace besovlab
