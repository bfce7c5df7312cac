#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>

#include <json.hpp>

#include "besovlab/calderon.hpp"
#include "besovlab/rng.hpp"

using namespace besovlab;

namespace {

IndexWindow make_window(int dim, int lmin, int lmax, int res, std::int64_t L = 1) {
    IndexWindow w;
    w.dim = dim;
    w.box_lo = -L;
    w.box_hi = L;
    w.level_min = lmin;
    w.level_max = lmax;
    w.res = res;
    return w;
}

SpaceSpec spec_of(SpaceFamily fam, double p, double q, WeightSequence t) {
    return SpaceSpec{fam, p, q, std::move(t)};
}

WeightSequence unit_weights() { return WeightSequence::geometric(0.0, Weight::constant(1.0), 2.0); }

CoeffField random_field(Rng& rng, const IndexWindow& w, int count) {
    CoeffField c(w);
    for (int i = 0; i < count; ++i) {
        int k = int(rng.uniform_int(w.level_min, w.level_max));
        IVec m{};
        for (int a = 0; a < w.dim; ++a) m[a] = rng.uniform_int(w.pos_lo(k), w.pos_hi(k) - 1);
        double mag = rng.uniform(0.25, 4.0);
        c.set(k, m, {mag * (rng.uniform() < 0.5 ? -1.0 : 1.0), 0.0});
    }
    return c;
}

SpaceSpec random_f_spec(Rng& rng) {
    auto t = WeightSequence::geometric(rng.uniform(-0.5, 0.8),
                                       Weight::shifted_power(rng.uniform(-0.5, 0.6)), 2.0);
    return spec_of(SpaceFamily::f, rng.uniform(1.1, 3.5), rng.uniform(1.1, 3.5), t);
}

// reconstruction |lambda| = M (lambda0)^{1-theta} (lambda1)^theta, entrywise
void check_reconstruction(const CoeffField& lambda, const Factorization& fac, double theta) {
    REQUIRE(fac.lambda0.entries.size() == lambda.entries.size());
    REQUIRE(fac.lambda1.entries.size() == lambda.entries.size());
    for (const auto& [key, v] : lambda.entries) {
        const double a = std::abs(v);
        const double rebuilt = fac.scale *
                               std::pow(std::abs(fac.lambda0.get(key.k, key.m)), 1.0 - theta) *
                               std::pow(std::abs(fac.lambda1.get(key.k, key.m)), theta);
        CHECK(rebuilt == doctest::Approx(a).epsilon(1e-12));
    }
}

} // namespace

TEST_CASE("setup derivation and validation") {
    IndexWindow w = make_window(1, 0, 2, 2);
    auto t = WeightSequence::geometric(0.3, Weight::shifted_power(0.4), 2.0);
    auto ww = WeightSequence::geometric(-0.2, Weight::constant(2.0), 2.0);

    auto su = InterpolationSetup::make(0.4, spec_of(SpaceFamily::f, 1.5, 1.2, t),
                                       spec_of(SpaceFamily::f, 3.0, 2.5, ww), w);
    CHECK(std::abs(1.0 / su.p - (0.6 / 1.5 + 0.4 / 3.0)) < 1e-15);
    CHECK(std::abs(1.0 / su.q - (0.6 / 1.2 + 0.4 / 2.5)) < 1e-15);
    CHECK(std::abs((1 - su.theta) * su.gamma + su.theta * su.delta) < 1e-12);
    CHECK(std::abs((1 - su.theta) * su.u + su.theta * su.v) < 1e-12);
    CHECK(su.hypotheses_strict);
    // omega is the geometric combination of the two weight sequences
    Point x{0.3, 0, 0};
    CHECK(su.omega.eval(1, x, 1) ==
          doctest::Approx(std::pow(t.eval(1, x, 1), 0.6) * std::pow(ww.eval(1, x, 1), 0.4))
              .epsilon(1e-13));

    // the f_infinity variant: kappa identity and the v bookkeeping line
    for (int dim : {1, 2}) {
        IndexWindow wn = make_window(dim, 0, 2, 2);
        auto si = InterpolationSetup::make(0.35, spec_of(SpaceFamily::f, 1.7, 1.4, t),
                                           spec_of(SpaceFamily::f_infinity, 0.0, 2.2, ww), wn);
        const double n = dim;
        CHECK(std::abs(1.0 / (si.kappa * si.p) - (0.65 / 1.7 + 0.35 / 2.2)) < 1e-14);
        CHECK(si.kappa > 0.0);
        CHECK(si.kappa < 1.0);
        CHECK(std::abs(si.v + n / 2.2 + n / 2 - (n * si.q / 2.2) * (1.0 / (si.kappa * si.p) + 0.5)) <
              1e-12);
        CHECK(std::abs((1 - si.theta) * si.u + si.theta * si.v) < 1e-12);
        CHECK(std::abs((1 - si.theta) * si.gamma + si.theta * si.delta) < 1e-12);
    }

    auto sb = InterpolationSetup::make(0.5, spec_of(SpaceFamily::b, 1.0, 1.5, t),
                                       spec_of(SpaceFamily::b, 2.0, 2.0, ww), w);
    CHECK_FALSE(sb.hypotheses_strict); // p0 = 1 runs but sits outside the proof hypotheses

    CHECK_THROWS_AS(InterpolationSetup::make(0.0, spec_of(SpaceFamily::f, 2, 2, t),
                                             spec_of(SpaceFamily::f, 2, 2, ww), w),
                    std::invalid_argument);
    CHECK_THROWS_AS(InterpolationSetup::make(1.0, spec_of(SpaceFamily::f, 2, 2, t),
                                             spec_of(SpaceFamily::f, 2, 2, ww), w),
                    std::invalid_argument);
    CHECK_THROWS_AS(InterpolationSetup::make(0.5, spec_of(SpaceFamily::f, 2, 2, t),
                                             spec_of(SpaceFamily::b, 2, 2, ww), w),
                    std::invalid_argument);
    CHECK_THROWS_AS(InterpolationSetup::make(0.5, spec_of(SpaceFamily::f, 0.9, 2, t),
                                             spec_of(SpaceFamily::f, 2, 2, ww), w),
                    std::invalid_argument);
}

TEST_CASE("level sets: single coefficient lands in the predicted slot") {
    IndexWindow w = make_window(1, 0, 3, 2);
    auto ones = unit_weights();
    auto su = InterpolationSetup::make(0.5, spec_of(SpaceFamily::f, 2, 2, ones),
                                       spec_of(SpaceFamily::f, 2, 2, ones), w);
    for (double a : {4.0, 3.0, 0.5, 1.0, 1.7}) {
        CoeffField c(w);
        c.set(0, IVec{0, 0, 0}, a);
        // g is the constant 2^{kn(1/p+1/2)} omega_{k,m} a = |Q|^{1/2} a = a on the cube
        const double gval = a;
        const double lg = std::log2(gval);
        const bool pow2 = std::abs(gval - std::exp2(std::round(lg))) < 1e-12 * gval;
        const int expected = pow2 ? int(std::lround(lg)) - 1 : int(std::floor(lg));
        LevelSets ls = level_sets(c, su, SpaceFamily::f);
        REQUIRE(ls.assignment.size() == 1);
        CHECK(ls.assignment.begin()->second == expected);
        CHECK(ls.forced == 0);
        // A_l for l < log2(g) holds every node of the cube, above it none
        const GridSpec g = grid_of(w);
        const Cube cq = cube_from_dyadic(g, DyadicCube{0, {0, 0, 0}});
        CHECK(std::int64_t(ls.a_sets.at(expected).size()) == cq.node_count(g));
        auto top = ls.a_sets.find(ls.l_hi);
        REQUIRE(top != ls.a_sets.end());
        CHECK(top->second.empty());
    }

    CoeffField empty(w);
    LevelSets ls = level_sets(empty, su, SpaceFamily::f);
    CHECK(ls.a_sets.empty());
    CHECK(ls.assignment.empty());
    CHECK(ls.l_hi < ls.l_lo);

    CHECK_THROWS_AS(level_sets(empty, su, SpaceFamily::b), std::invalid_argument);
    CHECK_THROWS_AS(level_sets(empty, su, SpaceFamily::f_infinity), std::invalid_argument);
}

TEST_CASE("level sets: brute force over every slot agrees") {
    Rng rng(61);
    for (int dim : {1, 2}) {
        IndexWindow w = make_window(dim, 0, dim == 1 ? 3 : 2, 2);
        GridSpec g = grid_of(w);
        auto t = WeightSequence::geometric(0.3, Weight::shifted_power(0.4), 2.0);
        auto ww = WeightSequence::geometric(-0.1, Weight::constant(1.5), 2.0);
        auto su = InterpolationSetup::make(0.4, spec_of(SpaceFamily::f, 1.5, 1.3, t),
                                           spec_of(SpaceFamily::f, 2.5, 3.0, ww), w);
        for (int trial = 0; trial < 10; ++trial) {
            CoeffField c = random_field(rng, w, 6);
            // nested pair so parent/child cubes compete
            c.set(1, IVec{0, 0, 0}, rng.uniform(0.25, 4.0));
            c.set(2, IVec{1, 0, 0}, rng.uniform(0.25, 4.0));

            std::vector<double> gv(std::size_t(g.node_count()), 0.0);
            for (const auto& [key, v] : c.entries) {
                const double wn = su.omega_norms.values.at(key);
                const double f = std::exp2(double(key.k) * dim * (1.0 / su.p + 0.5) * su.q) *
                                 std::pow(wn, su.q) * std::pow(std::abs(v), su.q);
                for_nodes_in_cube(g, cube_from_dyadic(g, DyadicCube{key.k, key.m}),
                                  [&](std::int64_t flat, const Point&) { gv[std::size_t(flat)] += f; });
            }
            for (double& x : gv) x = x > 0 ? std::pow(x, 1.0 / su.q) : 0.0;

            LevelSets ls = level_sets(c, su, SpaceFamily::f);
            CHECK(ls.forced == 0);
            for (const auto& [key, v] : c.entries) {
                std::vector<double> cg;
                for_nodes_in_cube(g, cube_from_dyadic(g, DyadicCube{key.k, key.m}),
                                  [&](std::int64_t flat, const Point&) {
                                      cg.push_back(gv[std::size_t(flat)]);
                                  });
                const std::int64_t total = std::int64_t(cg.size());
                std::optional<int> hit;
                int matches = 0;
                for (int l = -80; l <= 80; ++l) {
                    std::int64_t na = 0, nb = 0;
                    for (double x : cg) {
                        if (x > std::exp2(double(l))) ++na;
                        if (x > std::exp2(double(l + 1))) ++nb;
                    }
                    if (2 * na > total && 2 * nb <= total) {
                        hit = l;
                        ++matches;
                    }
                }
                REQUIRE(matches == 1); // the dichotomy picks exactly one slot
                CHECK(ls.assignment.at(key) == *hit);
            }
        }
    }
}

TEST_CASE("factorize_f: identical spaces collapse") {
    IndexWindow w = make_window(1, 0, 3, 2);
    auto t = WeightSequence::geometric(0.4, Weight::shifted_power(0.3), 2.0);
    auto sp = spec_of(SpaceFamily::f, 1.8, 1.4, t);
    auto su = InterpolationSetup::make(0.5, sp, sp, w);
    CHECK(su.gamma == 0.0);
    Rng rng(7);
    CoeffField c = random_field(rng, w, 12);
    Factorization fac = factorize_f(c, su);
    CHECK(fac.branch == FactorBranch::gamma_zero);
    for (const auto& [key, v] : c.entries) {
        CHECK(std::abs(fac.lambda0.get(key.k, key.m)) == doctest::Approx(std::abs(v)).epsilon(1e-13));
        CHECK(std::abs(fac.lambda1.get(key.k, key.m)) == doctest::Approx(std::abs(v)).epsilon(1e-13));
    }
    ProductBounds pb = product_norm_bounds(c, su);
    const double direct = fnorm(c, sp);
    CHECK(pb.lower == doctest::Approx(direct).epsilon(1e-12));
    CHECK(pb.upper == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("factorize_f: exact reconstruction and certified bounds on random inputs") {
    Rng rng(42);
    IndexWindow w = make_window(1, 0, 3, 2);
    for (int round = 0; round < 6; ++round) {
        auto s0 = random_f_spec(rng);
        auto s1 = random_f_spec(rng);
        const double theta = rng.uniform(0.2, 0.8);
        auto su = InterpolationSetup::make(theta, s0, s1, w);
        for (int trial = 0; trial < 5; ++trial) {
            CoeffField c = random_field(rng, w, 10);
            Factorization fac = factorize_f(c, su);
            check_reconstruction(c, fac, theta);
            CHECK(fac.scale == 1.0);
            if (su.gamma > 0) CHECK(fac.branch == FactorBranch::gamma_positive);
            if (su.gamma < 0) CHECK(fac.branch == FactorBranch::gamma_negative);
            ProductBounds pb = product_norm_bounds(c, su);
            CHECK(pb.lower <= pb.upper * (1 + 1e-12));
            CHECK(pb.lower > 0);
        }
    }
}

TEST_CASE("factorize_f: single coefficient closed form") {
    IndexWindow w = make_window(1, 0, 3, 2);
    auto t = WeightSequence::geometric(0.5, Weight::shifted_power(0.6), 2.0);
    auto ww = WeightSequence::geometric(-0.3, Weight::constant(2.0), 2.0);
    auto su = InterpolationSetup::make(0.4, spec_of(SpaceFamily::f, 1.5, 1.2, t),
                                       spec_of(SpaceFamily::f, 3.0, 2.5, ww), w);
    CoeffField c(w);
    CubeKey key{2, {1, 0, 0}};
    c.set(key.k, key.m, 1.7);
    ProductBounds pb = product_norm_bounds(c, su);
    // lower = 2^{kn/2} a omega_{k,m}; upper = 2^{kn/2} a t_{k,m}^{1-theta} w_{k,m}^theta
    const double tn = su.t_norms.values.at(key);
    const double wn = su.w_norms.values.at(key);
    const double on = su.omega_norms.values.at(key);
    CHECK(pb.lower == doctest::Approx(std::exp2(1.0) * 1.7 * on).epsilon(1e-12));
    CHECK(pb.upper ==
          doctest::Approx(std::exp2(1.0) * 1.7 * std::pow(tn, 0.6) * std::pow(wn, 0.4)).epsilon(1e-12));
    CHECK(pb.lower <= pb.upper * (1 + 1e-12)); // per-cube Hoelder, never reversed
}

TEST_CASE("factorize_b: identical collapse, reconstruction, closed form") {
    IndexWindow w = make_window(1, 0, 3, 2);
    auto t = WeightSequence::geometric(0.4, Weight::shifted_power(0.3), 2.0);
    auto sp = spec_of(SpaceFamily::b, 1.8, 1.4, t);
    auto su = InterpolationSetup::make(0.5, sp, sp, w);
    Rng rng(11);
    CoeffField c = random_field(rng, w, 12);
    Factorization fac = factorize_b(c, su);
    CHECK(fac.branch == FactorBranch::b_variant);
    for (const auto& [key, v] : c.entries)
        CHECK(std::abs(fac.lambda0.get(key.k, key.m)) == doctest::Approx(std::abs(v)).epsilon(1e-13));
    ProductBounds pb = product_norm_bounds(c, su);
    CHECK(pb.lower == doctest::Approx(bnorm(c, sp)).epsilon(1e-12));
    CHECK(pb.upper == doctest::Approx(pb.lower).epsilon(1e-12));

    auto ww = WeightSequence::geometric(-0.3, Weight::constant(2.0), 2.0);
    for (double theta : {0.3, 0.5, 0.7}) {
        auto mix = InterpolationSetup::make(theta, spec_of(SpaceFamily::b, 1.5, 1.2, t),
                                            spec_of(SpaceFamily::b, 3.0, 2.5, ww), w);
        for (int trial = 0; trial < 5; ++trial) {
            CoeffField r = random_field(rng, w, 10);
            check_reconstruction(r, factorize_b(r, mix), theta);
            ProductBounds b2 = product_norm_bounds(r, mix);
            CHECK(b2.lower <= b2.upper * (1 + 1e-12));
        }
        // single coefficient: both bounds in closed form
        CoeffField one(w);
        CubeKey key{1, {-1, 0, 0}};
        one.set(key.k, key.m, 2.3);
        ProductBounds pb1 = product_norm_bounds(one, mix);
        const double tn = mix.t_norms.values.at(key);
        const double wn = mix.w_norms.values.at(key);
        const double on = mix.omega_norms.values.at(key);
        CHECK(pb1.lower == doctest::Approx(std::exp2(0.5) * 2.3 * on).epsilon(1e-12));
        CHECK(pb1.upper == doctest::Approx(std::exp2(0.5) * 2.3 * std::pow(tn, 1 - theta) *
                                           std::pow(wn, theta))
                               .epsilon(1e-12));
    }
}

TEST_CASE("factorize_finf: reconstruction, scale behavior, eset bound") {
    IndexWindow w = make_window(1, 0, 3, 2);
    auto t = WeightSequence::geometric(0.35, Weight::shifted_power(0.4), 2.0);
    auto ww = WeightSequence::geometric(-0.25, Weight::constant(1.7), 2.0);
    Rng rng(29);
    for (double theta : {0.3, 0.6}) {
        auto su = InterpolationSetup::make(theta, spec_of(SpaceFamily::f, 1.6, 1.3, t),
                                           spec_of(SpaceFamily::f_infinity, 0.0, 2.4, ww), w);
        for (int trial = 0; trial < 5; ++trial) {
            CoeffField c = random_field(rng, w, 10);
            Factorization fac = factorize_finf(c, su);
            check_reconstruction(c, fac, theta);
            REQUIRE(fac.lambda1_eset_bound.has_value());
            CHECK(*fac.lambda1_eset_bound > 0);
            CHECK(std::isfinite(*fac.lambda1_eset_bound));
            ProductBounds pb = product_norm_bounds(c, su);
            CHECK(pb.lower <= pb.upper * (1 + 1e-12));
        }

        // dyadic rescaling shifts the slots exactly: lambda1 is invariant and
        // the lambda0 norm scales by |c|^{p/p0}
        CoeffField one(w);
        one.set(1, IVec{0, 0, 0}, 1.3);
        Factorization base = factorize_finf(one, su);
        const double n1 = finf_norm(base.lambda1, su.space1);
        const double n0 = fnorm(base.lambda0, su.space0);
        for (int j : {-3, 3, 6}) {
            CoeffField scaled(w);
            scaled.set(1, IVec{0, 0, 0}, 1.3 * std::exp2(double(j)));
            Factorization fs = factorize_finf(scaled, su);
            CHECK(finf_norm(fs.lambda1, su.space1) == doctest::Approx(n1).epsilon(1e-10));
            CHECK(fnorm(fs.lambda0, su.space0) ==
                  doctest::Approx(n0 * std::exp2(double(j) * su.p / su.space0.p)).epsilon(1e-10));
        }
    }

    // explicit E-sets must cover more than half of their cube
    auto su = InterpolationSetup::make(0.5, spec_of(SpaceFamily::f, 1.6, 1.3, t),
                                       spec_of(SpaceFamily::f_infinity, 0.0, 2.4, ww), w);
    CoeffField c(w);
    c.set(2, IVec{0, 0, 0}, 1.0);
    GridSpec g = grid_of(w);
    Cube cq = cube_from_dyadic(g, DyadicCube{2, {0, 0, 0}});
    std::int64_t lo, hi;
    cq.axis_node_range(g, 0, lo, hi);
    ESetMap bad;
    bad[CubeKey{2, {0, 0, 0}}] = {lo};
    CHECK_THROWS_AS(factorize_finf(c, su, bad), std::invalid_argument);
}

TEST_CASE("branch continuity near gamma = 0") {
    IndexWindow w = make_window(1, 0, 3, 2);
    auto t = WeightSequence::geometric(0.3, Weight::shifted_power(0.4), 2.0);
    auto ww = WeightSequence::geometric(-0.2, Weight::constant(2.0), 2.0);
    auto setup_for = [&](double ghat) {
        const double q0 = 2.0;
        const double q1 = ghat == 0.0 ? q0 : q0 * (1.0 - ghat) / (1.0 + ghat);
        return InterpolationSetup::make(0.5, spec_of(SpaceFamily::f, 2.0, q0, t),
                                        spec_of(SpaceFamily::f, 2.0, q1, ww), w);
    };
    auto plus = setup_for(1e-4);
    auto zero = setup_for(0.0);
    auto minus = setup_for(-1e-4);
    CHECK(plus.gamma > 0);
    CHECK(zero.gamma == 0.0);
    CHECK(minus.gamma < 0);

    CoeffField c(w);
    c.set(1, IVec{0, 0, 0}, 1.3);
    Factorization fp = factorize_f(c, plus);
    Factorization fz = factorize_f(c, zero);
    Factorization fm = factorize_f(c, minus);
    CHECK(fp.branch == FactorBranch::gamma_positive);
    CHECK(fz.branch == FactorBranch::gamma_zero);
    CHECK(fm.branch == FactorBranch::gamma_negative);
    const double a0 = std::abs(fz.lambda0.get(1, IVec{0, 0, 0}));
    CHECK(std::abs(fp.lambda0.get(1, IVec{0, 0, 0})) == doctest::Approx(a0).epsilon(1e-3));
    CHECK(std::abs(fm.lambda0.get(1, IVec{0, 0, 0})) == doctest::Approx(a0).epsilon(1e-3));

    ProductBounds bp = product_norm_bounds(c, plus);
    ProductBounds bz = product_norm_bounds(c, zero);
    ProductBounds bm = product_norm_bounds(c, minus);
    CHECK(bp.upper == doctest::Approx(bz.upper).epsilon(1e-3));
    CHECK(bm.upper == doctest::Approx(bz.upper).epsilon(1e-3));
    CHECK(bp.lower == doctest::Approx(bz.lower).epsilon(1e-3));
    CHECK(bm.lower == doctest::Approx(bz.lower).epsilon(1e-3));
}

TEST_CASE("scale equivariance of the product bounds") {
    IndexWindow w = make_window(1, 0, 3, 2);
    auto t = WeightSequence::geometric(0.4, Weight::shifted_power(0.5), 2.0);
    auto ww = WeightSequence::geometric(-0.2, Weight::constant(1.6), 2.0);
    Rng rng(83);
    CoeffField c = random_field(rng, w, 10);

    auto suf = InterpolationSetup::make(0.4, spec_of(SpaceFamily::f, 1.4, 1.2, t),
                                        spec_of(SpaceFamily::f, 2.6, 3.1, ww), w);
    CoeffField c8(w);
    for (const auto& [key, v] : c.entries) c8.set(key.k, key.m, 8.0 * v);
    ProductBounds b1 = product_norm_bounds(c, suf);
    ProductBounds b8 = product_norm_bounds(c8, suf);
    CHECK(b8.lower == doctest::Approx(8.0 * b1.lower).epsilon(1e-12));
    CHECK(b8.upper == doctest::Approx(8.0 * b1.upper).epsilon(1e-12));

    // the b variant has no slot granularity, so any factor works
    auto sub = InterpolationSetup::make(0.4, spec_of(SpaceFamily::b, 1.4, 1.2, t),
                                        spec_of(SpaceFamily::b, 2.6, 3.1, ww), w);
    CoeffField c37(w);
    for (const auto& [key, v] : c.entries) c37.set(key.k, key.m, 3.7 * v);
    ProductBounds d1 = product_norm_bounds(c, sub);
    ProductBounds d37 = product_norm_bounds(c37, sub);
    CHECK(d37.lower == doctest::Approx(3.7 * d1.lower).epsilon(1e-12));
    CHECK(d37.upper == doctest::Approx(3.7 * d1.upper).epsilon(1e-12));
}

TEST_CASE("Hoelder direction holds for arbitrary feasible pairs") {
    IndexWindow w = make_window(1, 0, 3, 2);
    Rng rng(97);
    for (int round = 0; round < 4; ++round) {
        auto s0 = random_f_spec(rng);
        auto s1 = random_f_spec(rng);
        const double theta = rng.uniform(0.2, 0.8);
        auto su = InterpolationSetup::make(theta, s0, s1, w);
        for (int trial = 0; trial < 5; ++trial) {
            CoeffField l0 = random_field(rng, w, 10);
            CoeffField l1 = random_field(rng, w, 10);
            CoeffField prod(w);
            for (const auto& [key, v] : l0.entries) {
                const std::complex<double> v1 = l1.get(key.k, key.m);
                if (std::abs(v1) == 0.0) continue;
                prod.set(key.k, key.m,
                         std::pow(std::abs(v), 1.0 - theta) * std::pow(std::abs(v1), theta));
            }
            if (prod.entries.empty()) continue;
            const SpaceSpec interp{SpaceFamily::f, su.p, su.q, su.omega};
            const double lhs = fnorm(prod, interp);
            const double rhs =
                std::pow(fnorm(l0, s0), 1.0 - theta) * std::pow(fnorm(l1, s1), theta);
            CHECK(lhs <= rhs * (1 + 1e-12));
        }
    }
}

TEST_CASE("factorization serializes") {
    IndexWindow w = make_window(1, 0, 3, 2);
    auto t = WeightSequence::geometric(0.5, Weight::shifted_power(0.6), 2.0);
    auto ww = WeightSequence::geometric(-0.3, Weight::constant(2.0), 2.0);
    auto su = InterpolationSetup::make(0.4, spec_of(SpaceFamily::f, 1.5, 1.2, t),
                                       spec_of(SpaceFamily::f, 3.0, 2.5, ww), w);
    REQUIRE(su.gamma != 0.0);
    CoeffField c(w);
    c.set(1, IVec{0, 0, 0}, 1.5);
    c.set(2, IVec{1, 0, 0}, 0.7);
    Factorization fac = factorize_f(c, su);
    auto j = nlohmann::json::parse(factorization_to_json(fac));
    CHECK(j["M"] == 1.0);
    CHECK(j["branch"].is_string());
    CHECK(j["lambda0"].size() == 2);
    CHECK(j["lambda1"].size() == 2);
    CHECK(j["assignments"].size() == 2);
    CHECK(j["assignments"][0].contains("l"));
}

TEST_CASE("mismatched inputs are rejected") {
    IndexWindow w = make_window(1, 0, 2, 2);
    IndexWindow other = make_window(1, 0, 3, 2);
    auto t = unit_weights();
    auto su = InterpolationSetup::make(0.5, spec_of(SpaceFamily::f, 2, 2, t),
                                       spec_of(SpaceFamily::f, 2, 2, t), w);
    CoeffField c(other);
    c.set(0, IVec{0, 0, 0}, 1.0);
    CHECK_THROWS_AS(factorize_f(c, su), std::invalid_argument);
    CoeffField ok(w);
    ok.set(0, IVec{0, 0, 0}, 1.0);
    CHECK_THROWS_AS(factorize_b(ok, su), std::invalid_argument);
    CHECK_THROWS_AS(factorize_finf(ok, su), std::invalid_argument);
}
