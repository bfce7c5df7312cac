#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>

#include "besovlab/rng.hpp"
#include "besovlab/seqspace.hpp"

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

SpaceSpec make_spec(SpaceFamily fam, double p, double q, WeightSequence t) {
    SpaceSpec s;
    s.family = fam;
    s.p = p;
    s.q = q;
    s.weights = std::move(t);
    return s;
}

WeightSequence unit_weights() { return WeightSequence::geometric(0.0, Weight::constant(1.0), 2.0); }

CoeffField random_field(Rng& rng, const IndexWindow& w, int count) {
    CoeffField c(w);
    for (int i = 0; i < count; ++i) {
        int k = int(rng.uniform_int(w.level_min, w.level_max));
        IVec m{};
        for (int a = 0; a < w.dim; ++a) m[a] = rng.uniform_int(w.pos_lo(k), w.pos_hi(k) - 1);
        c.set(k, m, {rng.normal(), rng.normal()});
    }
    return c;
}

// independent evaluation of the f_inf sup: enumerate every window cube P and
// integrate nodewise
double finf_brute(const CoeffField& c, const SpaceSpec& spec) {
    const GridSpec g = grid_of(c.window);
    double sup = 0;
    for (const DyadicCube& P : enumerate_cubes(c.window)) {
        const Cube pc = cube_from_dyadic(g, P);
        double integral = 0;
        for (const auto& [key, v] : c.entries) {
            if (key.k < P.level) continue;
            DyadicCube qk{key.k, key.m};
            if (!P.contains_cube(qk, c.window.dim)) continue;
            const Cube qc = cube_from_dyadic(g, qk);
            double acc = 0;
            for_nodes_in_cube(g, qc, [&](std::int64_t, const Point& x) {
                acc += std::pow(spec.weights.eval(key.k, x, g.dim), spec.q);
            });
            integral += std::exp2(double(key.k) * g.dim * spec.q / 2.0) *
                        std::pow(std::abs(v), spec.q) * acc * g.node_weight();
        }
        double vol = double(pc.node_count(g)) * g.node_weight();
        if (integral > 0) sup = std::max(sup, integral / vol);
    }
    return std::pow(sup, 1.0 / spec.q);
}

} // namespace

TEST_CASE("closed forms: single unit coefficient") {
    IndexWindow w = make_window(1, 0, 3, 2, 2);
    CoeffField c(w);
    c.set(0, IVec{0, 0, 0}, 1.0);
    for (auto [p, q] : {std::pair{1.0, 1.0}, {2.0, 3.0}, {0.5, 0.7}}) {
        CHECK(bnorm(c, make_spec(SpaceFamily::b, p, q, unit_weights())) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(fnorm(c, make_spec(SpaceFamily::f, p, q, unit_weights())) == doctest::Approx(1.0).epsilon(1e-13));
    }

    CoeffField c2(w);
    c2.set(2, IVec{0, 0, 0}, 1.0);
    // 2^{kn(1/2 - 1/p)}: k=2, n=1, p=1 -> 0.5
    CHECK(bnorm(c2, make_spec(SpaceFamily::b, 1.0, 2.0, unit_weights())) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(fnorm(c2, make_spec(SpaceFamily::f, 1.0, 7.0, unit_weights())) == doctest::Approx(0.5).epsilon(1e-13));
    // p=4 -> 2^{2(1/2-1/4)} = 2^{1/2}
    CHECK(bnorm(c2, make_spec(SpaceFamily::b, 4.0, 2.0, unit_weights())) ==
          doctest::Approx(std::exp2(0.5)).epsilon(1e-13));

    IndexWindow w2 = make_window(2, 0, 2, 2);
    CoeffField d(w2);
    d.set(1, IVec{0, 0, 0}, 1.0);
    // n=2, k=1, p=2 -> 2^{2(1/2-1/2)} = 1; p=1 -> 2^{2(1/2-1)} = 0.5
    CHECK(bnorm(d, make_spec(SpaceFamily::b, 2.0, 2.0, unit_weights())) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(bnorm(d, make_spec(SpaceFamily::b, 1.0, 2.0, unit_weights())) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("homogeneity and the p=q collapse") {
    IndexWindow w = make_window(1, -1, 3, 2, 2);
    Rng rng(19);
    auto t = WeightSequence::geometric(0.4, Weight::shifted_power(-0.3), 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        CoeffField c = random_field(rng, w, 12);
        auto bs = make_spec(SpaceFamily::b, 1.7, 1.7, t);
        auto fs = make_spec(SpaceFamily::f, 1.7, 1.7, t);
        double bn = bnorm(c, bs), fn = fnorm(c, fs);
        CHECK(fn == doctest::Approx(bn).epsilon(1e-12));

        CoeffField scaled = c;
        for (auto& [key, v] : scaled.entries) v *= std::complex<double>(3.0, 4.0);
        CHECK(bnorm(scaled, bs) == doctest::Approx(5.0 * bn).epsilon(1e-12));
        CHECK(fnorm(scaled, fs) == doctest::Approx(5.0 * fn).epsilon(1e-12));
    }
}

TEST_CASE("starred b-norm: unit weights agree exactly, closed form holds") {
    IndexWindow w = make_window(1, 0, 3, 2, 2);
    auto t = unit_weights();
    auto table = build_local_weight_table(t, w, 2.0, 1.0); // e = p = 2
    // t == 1: t_{k,m} = |Q|^{1/p} = 2^{-k/2}; single coefficient matches 2^{kn(1/2-1/p)}
    CHECK(table.values.at(CubeKey{2, {0, 0, 0}}) == doctest::Approx(0.5).epsilon(1e-13));
    CoeffField c(w);
    c.set(3, IVec{1, 0, 0}, 1.0);
    auto spec = make_spec(SpaceFamily::b, 2.0, 1.3, t);
    CHECK(bnorm_star(c, spec, table) == doctest::Approx(bnorm(c, spec)).epsilon(1e-13));

    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        CoeffField r = random_field(rng, w, 15);
        CHECK(bnorm_star(r, spec, table) == doctest::Approx(bnorm(r, spec)).epsilon(1e-12));
    }

    // wrong table exponent / kappa rejected
    auto bad = build_local_weight_table(t, w, 1.0, 1.0);
    CHECK_THROWS_AS(bnorm_star(c, spec, bad), std::invalid_argument);
    auto badk = build_local_weight_table(t, w, 2.0, 0.5);
    CHECK_THROWS_AS(bnorm_star(c, spec, badk), std::invalid_argument);
}

TEST_CASE("starred f-norm: unit weights cancel for every kappa") {
    IndexWindow w = make_window(1, 0, 3, 2, 2);
    auto t = unit_weights();
    Rng rng(9);
    for (double kappa : {1.0, 0.5, 0.25}) {
        auto spec = make_spec(SpaceFamily::f, 2.0, 1.5, t);
        auto table = build_local_weight_table(t, w, kappa * spec.p, kappa);
        for (int trial = 0; trial < 5; ++trial) {
            CoeffField c = random_field(rng, w, 12);
            CHECK(fnorm_star(c, spec, table) == doctest::Approx(fnorm(c, spec)).epsilon(1e-12));
        }
    }
    // nonconstant weights: ratio is positive and finite, and the kappa metadata is enforced
    auto tw = WeightSequence::geometric(0.3, Weight::power(0.2), 2.0);
    auto spec = make_spec(SpaceFamily::f, 2.0, 1.5, tw);
    auto table = build_local_weight_table(tw, w, 1.0, 0.5);
    CoeffField c = random_field(rng, w, 12);
    double ratio = fnorm_star(c, spec, table) / fnorm(c, spec);
    CHECK(ratio > 0);
    CHECK(std::isfinite(ratio));
    auto mismatched = build_local_weight_table(tw, w, 1.5, 0.5);
    CHECK_THROWS_AS(fnorm_star(c, spec, mismatched), std::invalid_argument);
}

TEST_CASE("f_inf norm: frozen values and brute-force oracle") {
    IndexWindow w = make_window(1, 0, 3, 2, 1);
    CoeffField c(w);
    c.set(0, IVec{0, 0, 0}, 1.0);
    auto spec = make_spec(SpaceFamily::f_infinity, 2.0, 2.0, unit_weights());
    CHECK(finf_norm(c, spec) == doctest::Approx(1.0).epsilon(1e-13));

    // single-level support with unit weights: sup = 2^{kn/2} max |lambda|
    CoeffField lvl(w);
    lvl.set(2, IVec{0, 0, 0}, 0.25);
    lvl.set(2, IVec{1, 0, 0}, 1.5);
    lvl.set(2, IVec{-2, 0, 0}, 0.5);
    CHECK(finf_norm(lvl, spec) == doctest::Approx(std::exp2(1.0) * 1.5).epsilon(1e-12));
    CHECK(finf_norm(lvl, spec) == doctest::Approx(finf_brute(lvl, spec)).epsilon(1e-12));

    Rng rng(23);
    for (int trial = 0; trial < 12; ++trial) {
        CoeffField r = random_field(rng, w, 10);
        for (double q : {0.8, 2.0, 3.5}) {
            auto s = make_spec(SpaceFamily::f_infinity, 2.0, q,
                               WeightSequence::geometric(0.35, Weight::shifted_power(0.4), q));
            CHECK(finf_norm(r, s) == doctest::Approx(finf_brute(r, s)).epsilon(1e-11));
        }
    }

    // two dimensions
    IndexWindow w2 = make_window(2, 0, 2, 2);
    Rng rng2(31);
    for (int trial = 0; trial < 5; ++trial) {
        CoeffField r = random_field(rng2, w2, 8);
        auto s = make_spec(SpaceFamily::f_infinity, 2.0, 1.4,
                           WeightSequence::geometric(-0.2, Weight::constant(2.0), 1.4));
        CHECK(finf_norm(r, s) == doctest::Approx(finf_brute(r, s)).epsilon(1e-11));
    }
}

TEST_CASE("f_inf rewrite identity: local table form equals the direct form") {
    IndexWindow w = make_window(1, -1, 3, 2, 2);
    Rng rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        double q = rng.uniform(0.7, 3.5);
        double s = rng.uniform(-0.6, 0.8);
        Weight base = (trial % 2 == 0) ? Weight::shifted_power(rng.uniform(-0.5, 0.5))
                                       : Weight::power(rng.uniform(0.1, 0.4));
        auto t = WeightSequence::geometric(s, base, q);
        auto spec = make_spec(SpaceFamily::f_infinity, 2.0, q, t);
        auto table = build_local_weight_table(t, w, q);
        CoeffField c = random_field(rng, w, 14);
        double direct = finf_norm(c, spec);
        double local = finf_norm_local(c, spec, table);
        CHECK(local == doctest::Approx(direct).epsilon(1e-10));
    }
    // wrong table exponent rejected
    auto t = unit_weights();
    auto spec = make_spec(SpaceFamily::f_infinity, 2.0, 2.0, t);
    auto table = build_local_weight_table(t, w, 1.0);
    CoeffField c(w);
    c.set(0, IVec{0, 0, 0}, 1.0);
    CHECK_THROWS_AS(finf_norm_local(c, spec, table), std::invalid_argument);
}

TEST_CASE("f_inf E-set variant") {
    IndexWindow w = make_window(1, 0, 2, 4, 1);
    GridSpec g = grid_of(w);
    auto t = WeightSequence::geometric(0.2, Weight::shifted_power(0.3), 1.8);
    auto spec = make_spec(SpaceFamily::f_infinity, 2.0, 1.8, t);
    Rng rng(13);
    CoeffField c = random_field(rng, w, 8);

    // full cubes (defaulted) dominate the averaged sup
    auto table = build_local_weight_table(t, w, spec.q);
    double esets_full = finf_norm_esets(c, spec, {});
    CHECK(esets_full >= finf_norm_local(c, spec, table) * (1 - 1e-12));

    // single coefficient: any admissible E gives the same nodewise max
    CoeffField one(w);
    one.set(1, IVec{0, 0, 0}, 2.0);
    Cube q10 = cube_from_dyadic(g, DyadicCube{1, {0, 0, 0}});
    std::vector<std::int64_t> half_plus;
    std::int64_t lo, hi;
    q10.axis_node_range(g, 0, lo, hi);
    for (std::int64_t i = lo; i < lo + (hi - lo) / 2 + 1; ++i) half_plus.push_back(i);
    ESetMap em;
    em[CubeKey{1, {0, 0, 0}}] = half_plus;
    double with_e = finf_norm_esets(one, spec, em);
    double full = finf_norm_esets(one, spec, {});
    CHECK(with_e == doctest::Approx(full).epsilon(1e-13));
    CHECK(with_e <= full * std::exp2(1.0 / spec.q) + 1e-12);
    CHECK(with_e >= full / std::exp2(1.0 / spec.q) - 1e-12);

    // half-or-less E-sets are rejected
    std::vector<std::int64_t> half(half_plus.begin(), half_plus.end() - 1);
    em[CubeKey{1, {0, 0, 0}}] = half;
    CHECK_THROWS_AS(finf_norm_esets(one, spec, em), std::invalid_argument);
    // nodes outside the cube are rejected
    std::vector<std::int64_t> outside = half_plus;
    outside.back() = hi; // first node past the cube
    em[CubeKey{1, {0, 0, 0}}] = outside;
    CHECK_THROWS_AS(finf_norm_esets(one, spec, em), std::invalid_argument);
}

TEST_CASE("holder combine") {
    auto t4 = WeightSequence::geometric(0.0, Weight::constant(4.0), 2.0);
    auto w1 = WeightSequence::geometric(0.0, Weight::constant(1.0), 2.0);
    auto half = holder_combine(t4, w1, 0.5);
    Point x{0.3, 0, 0};
    CHECK(half.eval(0, x, 1) == doctest::Approx(2.0).epsilon(1e-14));

    auto tk = WeightSequence::geometric(1.0, Weight::constant(1.0), 2.0);
    auto wk = WeightSequence::geometric(3.0, Weight::constant(1.0), 2.0);
    auto mid = holder_combine(tk, wk, 0.5);
    CHECK(mid.eval(3, x, 1) == doctest::Approx(std::exp2(6.0)).epsilon(1e-13)); // omega_k = 2^{2k}

    // theta -> 0 recovers t
    auto tpow = WeightSequence::geometric(0.7, Weight::power(0.4), 2.0);
    auto near = holder_combine(tpow, wk, 1e-6);
    for (int k : {-1, 0, 2}) {
        CHECK(near.eval(k, x, 1) == doctest::Approx(tpow.eval(k, x, 1)).epsilon(1e-4));
    }

    // mixed kinds combine on the per-level support
    auto pl = WeightSequence::per_level({{0, Weight::constant(2.0)}, {1, Weight::constant(8.0)}}, 2.0);
    auto mixed = holder_combine(pl, tk, 0.5);
    CHECK(mixed.eval(1, x, 1) == doctest::Approx(std::sqrt(8.0 * 2.0)).epsilon(1e-13));
    CHECK_THROWS_AS(mixed.eval(5, x, 1), std::out_of_range);

    CHECK_THROWS_AS(holder_combine(t4, w1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(holder_combine(t4, w1, 1.0), std::invalid_argument);
}

TEST_CASE("holder lemma ratio: unit case, inequality direction, refinement stability") {
    auto ones = unit_weights();
    for (int res : {2, 4}) {
        IndexWindow w = make_window(1, 0, 2, res, 1);
        GridSpec g = grid_of(w);
        Cube q = cube_from_dyadic(g, DyadicCube{1, {0, 0, 0}});
        std::vector<std::int64_t> full;
        std::int64_t lo, hi;
        q.axis_node_range(g, 0, lo, hi);
        for (std::int64_t i = lo; i < hi; ++i) full.push_back(i);
        auto [lhs, rhs] = holder_lemma_ratio(g, ones, ones, 0.5, 1.0, 2.0, 0, q, full);
        // q = 4/3 and |Q| = 1/2: both sides are |Q|^{1/q}
        CHECK(lhs == doctest::Approx(std::pow(0.5, 0.75)).epsilon(1e-13));
        CHECK(rhs == doctest::Approx(lhs).epsilon(1e-13));
    }

    Rng rng(5);
    IndexWindow w = make_window(1, 0, 2, 4, 1);
    GridSpec g = grid_of(w);
    auto t = WeightSequence::geometric(0.5, Weight::shifted_power(0.6), 2.0);
    auto ww = WeightSequence::geometric(-0.3, Weight::power(0.25), 2.0);
    for (int trial = 0; trial < 30; ++trial) {
        double theta = rng.uniform(0.1, 0.9);
        double q0 = rng.uniform(0.5, 3.0), q1 = rng.uniform(0.5, 3.0);
        Cube q = cube_from_dyadic(g, DyadicCube{1, {rng.uniform_int(-2, 1), 0, 0}});
        std::int64_t lo, hi;
        q.axis_node_range(g, 0, lo, hi);
        std::vector<std::int64_t> e;
        for (std::int64_t i = lo; i < hi; ++i)
            if (rng.uniform() < 0.8) e.push_back(i);
        if (2 * std::int64_t(e.size()) <= hi - lo) continue;
        auto [lhs, rhs] = holder_lemma_ratio(g, t, ww, theta, q0, q1, 1, q, e);
        CHECK(lhs <= rhs * (1 + 1e-12));
        CHECK(lhs > 0);
    }
    CHECK_THROWS_AS(holder_lemma_ratio(g, t, ww, 0.5, 1.0, 1.0, 0, Cube{{0, 0, 0}, 8}, {}),
                    std::invalid_argument);
}

TEST_CASE("quasi-norm axioms across the norm ops") {
    IndexWindow w = make_window(1, 0, 3, 2, 1);
    Rng rng(101);
    auto t = WeightSequence::geometric(0.25, Weight::shifted_power(-0.2), 2.0);
    for (int trial = 0; trial < 15; ++trial) {
        double p = rng.uniform(0.5, 3.0), q = rng.uniform(0.5, 3.0);
        auto bspec = make_spec(SpaceFamily::b, p, q, t);
        auto fspec = make_spec(SpaceFamily::f, p, q, t);
        auto ispec = make_spec(SpaceFamily::f_infinity, p, q, t);
        CoeffField a = random_field(rng, w, 10);
        CoeffField b = random_field(rng, w, 10);
        CoeffField sum(w);
        for (const auto& [key, v] : a.entries) sum.set(key.k, key.m, v);
        for (const auto& [key, v] : b.entries) sum.set(key.k, key.m, sum.get(key.k, key.m) + v);
        const double K = quasi_triangle_constant(p, q);
        auto check_op = [&](auto&& op) {
            double na = op(a), nb = op(b), ns = op(sum);
            CHECK(na > 0);
            CHECK(ns <= K * (na + nb) * (1 + 1e-12));
            CoeffField shrunk = a;
            for (auto& [key, v] : shrunk.entries) v *= rng.uniform(0.0, 1.0);
            CHECK(op(shrunk) <= na * (1 + 1e-15));
            CoeffField empty(w);
            CHECK(op(empty) == 0.0);
        };
        check_op([&](const CoeffField& x) { return bnorm(x, bspec); });
        check_op([&](const CoeffField& x) { return fnorm(x, fspec); });
        check_op([&](const CoeffField& x) { return finf_norm(x, ispec); });
        auto btable = build_local_weight_table(t, w, p, 1.0);
        check_op([&](const CoeffField& x) { return bnorm_star(x, bspec, btable); });
        auto ftable = build_local_weight_table(t, w, 0.5 * p, 0.5);
        check_op([&](const CoeffField& x) { return fnorm_star(x, fspec, ftable); });
    }
    CHECK(quasi_triangle_constant(2.0, 2.0) == 1.0);
    CHECK(quasi_triangle_constant(0.5, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("coefficient field basics and serialization") {
    IndexWindow w = make_window(2, 0, 2, 2);
    CoeffField c(w);
    c.set(1, IVec{1, -2, 0}, {1.5, -0.5});
    c.set(2, IVec{3, 3, 0}, 2.0);
    CHECK(c.get(1, IVec{1, -2, 0}) == std::complex<double>(1.5, -0.5));
    CHECK(c.get(0, IVec{0, 0, 0}) == std::complex<double>(0.0, 0.0));
    c.set(1, IVec{1, -2, 0}, 0.0); // zero erases
    CHECK(c.entries.size() == 1);
    CHECK_THROWS_AS(c.set(5, IVec{0, 0, 0}, 1.0), std::out_of_range);  // level outside
    CHECK_THROWS_AS(c.set(1, IVec{7, 0, 0}, 1.0), std::out_of_range);  // position outside

    c.set(0, IVec{-1, 0, 0}, {0.25, 0.75});
    std::string s = coeff_field_to_json(c);
    CoeffField back = coeff_field_from_json(w, s);
    CHECK(back.entries.size() == c.entries.size());
    CHECK(coeff_field_to_json(back) == s);
    CHECK(back.get(0, IVec{-1, 0, 0}) == std::complex<double>(0.25, 0.75));

    CHECK_THROWS_AS(coeff_field_from_json(w, R"([{"k":0,"m":[0],"re":1}])"), std::invalid_argument);
    CHECK_THROWS_AS(coeff_field_from_json(w, R"({"k":0})"), std::invalid_argument);
}

TEST_CASE("missing table entries surface as errors") {
    IndexWindow narrow = make_window(1, 0, 1, 2, 1);
    IndexWindow wide = make_window(1, 0, 2, 2, 1);
    auto t = unit_weights();
    auto table = build_local_weight_table(t, narrow, 2.0, 1.0);
    CoeffField c(wide);
    c.set(2, IVec{0, 0, 0}, 1.0);
    auto spec = make_spec(SpaceFamily::b, 2.0, 2.0, t);
    CHECK_THROWS_AS(bnorm_star(c, spec, table), std::out_of_range);
}
