#include "besovlab/calderon.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace besovlab {

namespace {

using nlohmann::json;

double norm_at(const LocalWeightTable& table, const CubeKey& key) {
    auto it = table.values.find(key);
    if (it == table.values.end())
        throw std::out_of_range("per-cube weight norm missing for a populated cube");
    if (!(it->second > 0.0))
        throw std::domain_error("per-cube weight norm must be positive on a populated cube");
    return it->second;
}

// g = (sum over populated cubes of factor * chi_E)^{1/q} sampled on the grid
std::vector<double> stacked_g(const CoeffField& c, const InterpolationSetup& setup,
                              const ESetMap* esets) {
    const GridSpec g = grid_of(c.window);
    const double enorm = setup.kappa * setup.p; // kappa = 1 outside the f_infinity variant
    std::vector<double> acc(std::size_t(g.node_count()), 0.0);
    for (const auto& [key, val] : c.entries) {
        const double a = std::abs(val);
        if (a == 0.0) continue;
        const double wn = norm_at(setup.omega_norms, key);
        const double factor =
            std::exp2(double(key.k) * g.dim * (1.0 / enorm + 0.5) * setup.q) *
            std::pow(wn, setup.q) * std::pow(a, setup.q);
        const Cube cq = cube_from_dyadic(g, DyadicCube{key.k, key.m});
        const ESetMap::const_iterator eit = esets ? esets->find(key) : ESetMap::const_iterator{};
        if (esets && eit != esets->end()) {
            std::int64_t total = cq.node_count(g);
            if (2 * std::int64_t(eit->second.size()) <= total)
                throw std::invalid_argument("an E-set must cover more than half of its cube");
            IVec idx{};
            for (std::int64_t flat : eit->second) {
                if (flat < 0 || flat >= g.node_count())
                    throw std::invalid_argument("E-set node outside its cube");
                g.unflatten(flat, idx);
                if (!cq.contains_node(idx, g.dim))
                    throw std::invalid_argument("E-set node outside its cube");
                acc[std::size_t(flat)] += factor;
            }
        } else {
            for_nodes_in_cube(g, cq, [&](std::int64_t flat, const Point&) {
                acc[std::size_t(flat)] += factor;
            });
        }
    }
    for (double& x : acc) x = x > 0.0 ? std::pow(x, 1.0 / setup.q) : 0.0;
    return acc;
}

LevelSets build_level_sets(const CoeffField& c, const InterpolationSetup& setup, bool swap,
                           const ESetMap* esets) {
    LevelSets out;
    const GridSpec g = grid_of(c.window);
    const std::vector<double> gv = stacked_g(c, setup, esets);
    double gmax = 0.0, gmin_pos = 0.0;
    for (double x : gv) {
        if (x <= 0.0) continue;
        gmax = std::max(gmax, x);
        gmin_pos = gmin_pos == 0.0 ? x : std::min(gmin_pos, x);
    }
    if (gmax == 0.0) return out; // empty field: nothing to decompose

    // one slot below the floor so constant g (a power of two) still crosses
    out.l_lo = int(std::floor(std::log2(gmin_pos))) - 1;
    out.l_hi = int(std::ceil(std::log2(gmax)));
    for (int l = out.l_lo; l <= out.l_hi; ++l) {
        const double thr = std::exp2(double(l));
        std::vector<std::int64_t> nodes;
        for (std::int64_t flat = 0; flat < g.node_count(); ++flat)
            if (gv[std::size_t(flat)] > thr) nodes.push_back(flat);
        out.a_sets.emplace(l, std::move(nodes));
    }

    for (const auto& [key, val] : c.entries) {
        if (std::abs(val) == 0.0) continue;
        const Cube cq = cube_from_dyadic(g, DyadicCube{key.k, key.m});
        std::vector<double> cubeg;
        for_nodes_in_cube(g, cq, [&](std::int64_t flat, const Point&) {
            cubeg.push_back(gv[std::size_t(flat)]);
        });
        const std::int64_t total = std::int64_t(cubeg.size());
        auto count_above = [&](int l) {
            const double thr = std::exp2(double(l));
            std::int64_t n = 0;
            for (double x : cubeg)
                if (x > thr) ++n;
            return n;
        };
        bool found = false;
        std::int64_t ca = count_above(out.l_lo);
        for (int l = out.l_lo; l <= out.l_hi && !found; ++l) {
            const std::int64_t cb = count_above(l + 1);
            // node counts stand in for measures: all node weights are equal
            const bool hit = swap ? (2 * ca >= total && 2 * cb < total)
                                  : (2 * ca > total && 2 * cb <= total);
            if (hit) {
                out.assignment.emplace(key, l);
                found = true;
            }
            ca = cb;
        }
        if (!found) {
            // cannot happen with a monotone count profile; keep the run alive anyway
            out.assignment.emplace(key, out.l_lo);
            ++out.forced;
        }
    }
    return out;
}

void require_same_window(const CoeffField& lambda, const InterpolationSetup& setup) {
    if (!(lambda.window == setup.window))
        throw std::invalid_argument("coefficient field and setup use different windows");
}

FactorBranch gamma_branch(double gamma, bool finf) {
    if (gamma > 0.0) return finf ? FactorBranch::finf_gamma_positive : FactorBranch::gamma_positive;
    if (gamma < 0.0) return finf ? FactorBranch::finf_gamma_negative : FactorBranch::gamma_negative;
    return finf ? FactorBranch::finf_gamma_zero : FactorBranch::gamma_zero;
}

// shared core of the f and f_infinity factorizations: only the exponent pack
// in the setup differs
Factorization factorize_level_split(const CoeffField& lambda, const InterpolationSetup& setup,
                                    const ESetMap* esets) {
    const bool finf = setup.variant == SpaceFamily::f_infinity;
    Factorization out(lambda.window);
    out.branch = gamma_branch(setup.gamma, finf);
    LevelSets ls;
    const bool use_levels = setup.gamma != 0.0;
    if (use_levels) ls = build_level_sets(lambda, setup, setup.gamma < 0.0, esets);
    for (const auto& [key, val] : lambda.entries) {
        const double a = std::abs(val);
        if (a == 0.0) continue;
        double l0 = setup.theta_factor(key) * std::exp2(double(key.k) * setup.u);
        double l1 = setup.eps_factor(key) * std::exp2(double(key.k) * setup.v);
        if (use_levels) {
            const int l = ls.assignment.at(key);
            l0 *= std::exp2(double(l) * setup.gamma);
            l1 *= std::exp2(double(l) * setup.delta);
            out.level_trace.emplace(key, l);
        }
        l0 *= std::pow(a, setup.q / setup.space0.q);
        l1 *= std::pow(a, setup.q / setup.space1.q);
        out.lambda0.set(key.k, key.m, l0);
        out.lambda1.set(key.k, key.m, l1);
    }
    out.forced = ls.forced;

    if (finf) {
        // reproduce the proof's E-choice for the lambda1 norm check:
        // E = Q \cap A_{l+1}^c, swapped to Q \cap A_l when gamma < 0
        ESetMap echeck;
        if (use_levels) {
            const GridSpec g = grid_of(lambda.window);
            for (const auto& [key, l] : out.level_trace) {
                const int pick = setup.gamma < 0.0 ? l : l + 1;
                auto ait = ls.a_sets.find(pick);
                const std::vector<std::int64_t>* aset =
                    ait == ls.a_sets.end() ? nullptr : &ait->second;
                const Cube cq = cube_from_dyadic(g, DyadicCube{key.k, key.m});
                std::vector<std::int64_t> e;
                std::int64_t total = 0;
                for_nodes_in_cube(g, cq, [&](std::int64_t flat, const Point&) {
                    ++total;
                    const bool in_a =
                        aset && std::binary_search(aset->begin(), aset->end(), flat);
                    const bool keep = setup.gamma < 0.0 ? in_a : !in_a;
                    if (keep) e.push_back(flat);
                });
                if (2 * std::int64_t(e.size()) > total) echeck.emplace(key, std::move(e));
                // otherwise fall back to the full cube for this entry
            }
        }
        out.lambda1_eset_bound = finf_norm_esets(out.lambda1, setup.space1, echeck);
    }
    return out;
}

} // namespace

double InterpolationSetup::theta_factor(const CubeKey& key) const {
    const double tn = norm_at(t_norms, key);
    const double wn = norm_at(w_norms, key);
    if (variant == SpaceFamily::b)
        return std::pow(wn, theta * p / space0.p) * std::pow(tn, -theta * p / space1.p);
    return std::pow(wn, theta * q / space0.q) * std::pow(tn, -theta * q / space1.q);
}

double InterpolationSetup::eps_factor(const CubeKey& key) const {
    const double tn = norm_at(t_norms, key);
    const double wn = norm_at(w_norms, key);
    if (variant == SpaceFamily::b)
        return std::pow(tn, (1.0 - theta) * p / space1.p) *
               std::pow(wn, -(1.0 - theta) * p / space0.p);
    return std::pow(tn, (1.0 - theta) * q / space1.q) *
           std::pow(wn, -(1.0 - theta) * q / space0.q);
}

InterpolationSetup InterpolationSetup::make(double theta, const SpaceSpec& s0, const SpaceSpec& s1,
                                            const IndexWindow& window) {
    if (!(theta > 0.0 && theta < 1.0))
        throw std::invalid_argument("interpolation parameter must lie strictly between 0 and 1");
    window.validate();
    s0.validate();
    s1.validate();

    InterpolationSetup su;
    su.theta = theta;
    su.space0 = s0;
    su.space1 = s1;
    su.window = window;
    if (s0.family == SpaceFamily::f && s1.family == SpaceFamily::f)
        su.variant = SpaceFamily::f;
    else if (s0.family == SpaceFamily::b && s1.family == SpaceFamily::b)
        su.variant = SpaceFamily::b;
    else if (s0.family == SpaceFamily::f && s1.family == SpaceFamily::f_infinity)
        su.variant = SpaceFamily::f_infinity;
    else
        throw std::invalid_argument("family combination must be (f,f), (b,b) or (f,f_infinity)");

    const bool finf = su.variant == SpaceFamily::f_infinity;
    const double p0 = s0.p, q0 = s0.q, q1 = s1.q;
    if (p0 < 1.0 || q0 < 1.0 || q1 < 1.0 || (!finf && s1.p < 1.0))
        throw std::invalid_argument("exponents below 1 are outside this construction");
    su.hypotheses_strict = p0 > 1.0 && q0 > 1.0 && q1 > 1.0 && (finf || s1.p > 1.0);

    const int n = window.dim;
    su.q = 1.0 / ((1.0 - theta) / q0 + theta / q1);
    if (finf) {
        su.p = p0 / (1.0 - theta);
        su.kappa = 1.0 / (su.p * ((1.0 - theta) / p0 + theta / q1));
        su.gamma = su.p / p0 - su.q / q0;
        su.delta = -su.q / q1;
        su.u = n * (su.q / (q0 * su.kappa * su.p) - 1.0 / p0) + 0.5 * n * (su.q / q0 - 1.0);
        su.v = n * (su.q / (q1 * su.kappa * su.p) - 1.0 / q1) + 0.5 * n * (su.q / q1 - 1.0);
    } else {
        const double p1 = s1.p;
        su.p = 1.0 / ((1.0 - theta) / p0 + theta / p1);
        su.kappa = 1.0;
        su.gamma = su.p / p0 - su.q / q0;
        su.delta = su.p / p1 - su.q / q1;
        if (su.variant == SpaceFamily::f) {
            su.u = n * (su.q / (q0 * su.p) - 1.0 / p0) + 0.5 * n * (su.q / q0 - 1.0);
            su.v = n * (su.q / (q1 * su.p) - 1.0 / p1) + 0.5 * n * (su.q / q1 - 1.0);
        } else {
            su.u = 0.5 * n * (su.q / q0 - 1.0);
            su.v = 0.5 * n * (su.q / q1 - 1.0);
        }
    }
    // reciprocal-of-reciprocal rounding leaves ~1e-16 dust on gamma and delta
    // when the spaces coincide; snap it so the branch dichotomy sees exact zero
    if (std::abs(su.gamma) < 1e-13) su.gamma = 0.0;
    if (std::abs(su.delta) < 1e-13) su.delta = 0.0;

    su.omega = holder_combine(s0.weights, s1.weights, theta);
    su.t_norms = build_local_weight_table(s0.weights, window, p0, 1.0);
    su.w_norms = build_local_weight_table(s1.weights, window, finf ? q1 : s1.p, 1.0);
    su.omega_norms = build_local_weight_table(su.omega, window, su.kappa * su.p, su.kappa);

    if (std::abs((1.0 - theta) * su.u + theta * su.v) > 1e-12 ||
        std::abs((1.0 - theta) * su.gamma + theta * su.delta) > 1e-12)
        throw std::logic_error("exponent bookkeeping failed");
    return su;
}

LevelSets level_sets(const CoeffField& lambda, const InterpolationSetup& setup,
                     SpaceFamily g_kind) {
    if (g_kind == SpaceFamily::b)
        throw std::invalid_argument("the stacked function g exists for f and f_infinity only");
    if (g_kind != setup.variant)
        throw std::invalid_argument("g kind must match the setup variant");
    require_same_window(lambda, setup);
    return build_level_sets(lambda, setup, false, nullptr);
}

std::string factor_branch_name(FactorBranch b) {
    switch (b) {
    case FactorBranch::gamma_positive: return "gamma_positive";
    case FactorBranch::gamma_negative: return "gamma_negative";
    case FactorBranch::gamma_zero: return "gamma_zero";
    case FactorBranch::b_variant: return "b_variant";
    case FactorBranch::finf_gamma_positive: return "finf_gamma_positive";
    case FactorBranch::finf_gamma_negative: return "finf_gamma_negative";
    case FactorBranch::finf_gamma_zero: return "finf_gamma_zero";
    }
    throw std::logic_error("unknown branch");
}

Factorization factorize_f(const CoeffField& lambda, const InterpolationSetup& setup) {
    if (setup.variant != SpaceFamily::f)
        throw std::invalid_argument("factorize_f needs an (f, f) setup");
    require_same_window(lambda, setup);
    return factorize_level_split(lambda, setup, nullptr);
}

Factorization factorize_finf(const CoeffField& lambda, const InterpolationSetup& setup,
                             const ESetMap& esets) {
    if (setup.variant != SpaceFamily::f_infinity)
        throw std::invalid_argument("factorize_finf needs an (f, f_infinity) setup");
    require_same_window(lambda, setup);
    return factorize_level_split(lambda, setup, esets.empty() ? nullptr : &esets);
}

Factorization factorize_b(const CoeffField& lambda, const InterpolationSetup& setup) {
    if (setup.variant != SpaceFamily::b)
        throw std::invalid_argument("factorize_b needs a (b, b) setup");
    require_same_window(lambda, setup);
    Factorization out(lambda.window);
    out.branch = FactorBranch::b_variant;
    const double p0 = setup.space0.p, p1 = setup.space1.p;
    const double mu = setup.q / setup.space0.q - setup.p / p0;
    const double tau = setup.q / setup.space1.q - setup.p / p1;
    std::map<int, double> level_sum; // sum_h |lambda_{k,h}|^p t_{k,h}^p
    for (const auto& [key, val] : lambda.entries) {
        const double a = std::abs(val);
        if (a == 0.0) continue;
        level_sum[key.k] += std::pow(a, setup.p) * std::pow(norm_at(setup.t_norms, key), setup.p);
    }
    for (const auto& [key, val] : lambda.entries) {
        const double a = std::abs(val);
        if (a == 0.0) continue;
        const double s = level_sum.at(key.k);
        if (!(s > 0.0)) throw std::domain_error("vanishing level sum on a populated level");
        const double l0 = setup.theta_factor(key) * std::exp2(double(key.k) * setup.u) *
                          std::pow(a, setup.p / p0) * std::pow(s, mu / setup.p);
        const double l1 = setup.eps_factor(key) * std::exp2(double(key.k) * setup.v) *
                          std::pow(a, setup.p / p1) * std::pow(s, tau / setup.p);
        out.lambda0.set(key.k, key.m, l0);
        out.lambda1.set(key.k, key.m, l1);
    }
    return out;
}

ProductBounds product_norm_bounds(const CoeffField& lambda, const InterpolationSetup& setup) {
    require_same_window(lambda, setup);
    ProductBounds out;
    const double th = setup.theta;
    switch (setup.variant) {
    case SpaceFamily::f: {
        const Factorization fac = factorize_f(lambda, setup);
        const SpaceSpec interp{SpaceFamily::f, setup.p, setup.q, setup.omega};
        out.lower = fnorm(lambda, interp);
        out.upper = std::pow(fnorm(fac.lambda0, setup.space0), 1.0 - th) *
                    std::pow(fnorm(fac.lambda1, setup.space1), th);
        break;
    }
    case SpaceFamily::b: {
        const Factorization fac = factorize_b(lambda, setup);
        const SpaceSpec interp{SpaceFamily::b, setup.p, setup.q, setup.omega};
        out.lower = bnorm(lambda, interp);
        out.upper = std::pow(bnorm(fac.lambda0, setup.space0), 1.0 - th) *
                    std::pow(bnorm(fac.lambda1, setup.space1), th);
        break;
    }
    case SpaceFamily::f_infinity: {
        const Factorization fac = factorize_finf(lambda, setup);
        // every link of this chain is a constant-one inequality on the same
        // E-sets (full cubes), so the ordering below is exact
        const SpaceSpec interp{SpaceFamily::f, setup.p, setup.q, setup.omega};
        out.lower = fnorm_star(lambda, interp, setup.omega_norms);
        out.upper = std::pow(fnorm_star(fac.lambda0, setup.space0, setup.t_norms), 1.0 - th) *
                    std::pow(finf_norm_esets(fac.lambda1, setup.space1, {}), th);
        break;
    }
    }
    if (!(out.lower <= out.upper * (1.0 + 1e-9)))
        throw std::logic_error("certified bound ordering violated");
    return out;
}

std::string factorization_to_json(const Factorization& f) {
    json j;
    j["M"] = f.scale;
    j["branch"] = factor_branch_name(f.branch);
    j["lambda0"] = json::parse(coeff_field_to_json(f.lambda0));
    j["lambda1"] = json::parse(coeff_field_to_json(f.lambda1));
    json as = json::array();
    for (const auto& [key, l] : f.level_trace) {
        json e;
        e["k"] = key.k;
        e["m"] = std::vector<std::int64_t>(key.m.begin(), key.m.begin() + f.lambda0.window.dim);
        e["l"] = l;
        as.push_back(e);
    }
    j["assignments"] = as;
    if (f.lambda1_eset_bound) j["lambda1_eset_bound"] = *f.lambda1_eset_bound;
    return j.dump();
}

} // namespace besovlab
