#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "besovlab/maximal.hpp"
#include "besovlab/rng.hpp"

using namespace besovlab;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

IndexWindow make_window(std::int64_t lo, std::int64_t hi, int lmax, int res, int lmin = 0) {
    IndexWindow w;
    w.dim = 1;
    w.box_lo = lo;
    w.box_hi = hi;
    w.level_min = lmin;
    w.level_max = lmax;
    w.res = res;
    return w;
}

// piecewise-constant random field on the level-`level` cells of the window box;
// a grid-independent object so refinement comparisons are meaningful
struct CellField {
    std::int64_t lo, hi;
    int level;
    std::vector<double> vals;

    static CellField gaussian(Rng& rng, std::int64_t lo, std::int64_t hi, int level, double spike_mag) {
        CellField c{lo, hi, level, {}};
        std::int64_t n = (hi - lo) << level;
        for (std::int64_t i = 0; i < n; ++i) c.vals.push_back(rng.normal());
        if (spike_mag > 0) {
            std::int64_t at = rng.uniform_int(0, n - 1);
            c.vals[std::size_t(at)] = (rng.uniform() < 0.5 ? -1 : 1) * spike_mag;
        }
        return c;
    }

    double operator()(const Point& x) const {
        double c = std::floor((x[0] - double(lo)) * pow2d(level));
        std::int64_t i = std::int64_t(c);
        return vals[std::size_t(std::clamp<std::int64_t>(i, 0, std::int64_t(vals.size()) - 1))];
    }
};

FieldStack random_stack(Rng& rng, const GridSpec& g, std::int64_t lo, std::int64_t hi, int level, int kmin,
                        int kmax) {
    FieldStack fs;
    for (int k = kmin; k <= kmax; ++k) {
        CellField cf = CellField::gaussian(rng, lo, hi, level, k == kmax ? 8.0 : 0.0);
        fs.insert(k, sample_field(g, [cf](const Point& x) { return cf(x); }));
    }
    return fs;
}

} // namespace

TEST_CASE("maximal of a constant is the constant") {
    IndexWindow w = make_window(-1, 1, 3, 2);
    GridSpec g = grid_of(w);
    auto fam = CubeFamily::dyadic(w);
    SampledField one = SampledField::constant(g, 1.0);
    SampledField m = hl_maximal(one, fam);
    for (double v : m.values) CHECK(v == 1.0);
    SampledField p2 = power_maximal(one, 2.0, fam);
    for (double v : p2.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("indicator seen from outside: value 1/(2+h) at x just past 2") {
    for (int res : {4, 8}) {
        IndexWindow w = make_window(0, 4, 0, res);
        GridSpec g = grid_of(w);
        const double h = g.spacing();
        CubeFamily fam = CubeFamily::custom(
            g, {{Point{(2.0 + h) / 2.0, 0, 0}, 2.0 + h}, {Point{2.0, 0, 0}, 4.0}});
        SampledField chi = sample_field(g, [](const Point& x) { return x[0] < 1.0 ? 1.0 : 0.0; });
        SampledField m = hl_maximal(chi, fam);
        // first node beyond x = 2 sits at 2 + h/2
        std::int64_t idx = 2 * res;
        CHECK(m.values[std::size_t(idx)] == doctest::Approx(1.0 / (2.0 + h)).epsilon(1e-14));
        CHECK(m.values[std::size_t(idx)] < 0.5);
    }
    // refinement pushes the value up toward 1/2: 4/9 < 8/17
    CHECK(4.0 / 9.0 < 8.0 / 17.0);
}

TEST_CASE("homogeneity, pointwise lower bound, sublinearity, family monotonicity") {
    IndexWindow w = make_window(-1, 1, 3, 4);
    GridSpec g = grid_of(w);
    auto dy = CubeFamily::dyadic(w);
    auto sh = CubeFamily::shifted(w);
    auto en = CubeFamily::enlarged(w);
    Rng rng(11);
    CellField cf = CellField::gaussian(rng, -1, 1, 3, 6.0);
    SampledField f = sample_field(g, [&](const Point& x) { return cf(x); });
    CellField cg = CellField::gaussian(rng, -1, 1, 3, 0.0);
    SampledField f2 = sample_field(g, [&](const Point& x) { return cg(x); });

    SampledField mf = hl_maximal(f, sh);
    // exact homogeneity for a power-of-two factor
    SampledField scaled = f;
    for (auto& v : scaled.values) v *= -2.0;
    SampledField ms = hl_maximal(scaled, sh);
    for (std::size_t i = 0; i < mf.values.size(); ++i) CHECK(ms.values[i] == 2.0 * mf.values[i]);

    // enlarged family contains each node's own cell, so M f >= |f| exactly
    SampledField me = hl_maximal(f, en);
    for (std::size_t i = 0; i < me.values.size(); ++i) CHECK(me.values[i] >= std::fabs(f.values[i]));

    // sublinearity nodewise
    SampledField sum = f;
    for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += f2.values[i];
    SampledField msum = hl_maximal(sum, sh);
    SampledField mf2 = hl_maximal(f2, sh);
    for (std::size_t i = 0; i < msum.values.size(); ++i)
        CHECK(msum.values[i] <= (mf.values[i] + mf2.values[i]) * (1 + 1e-12));

    // growing the family never decreases the maximal function
    SampledField md = hl_maximal(f, dy);
    for (std::size_t i = 0; i < md.values.size(); ++i) {
        CHECK(hl_maximal(f, sh).values[i] >= md.values[i]);
        CHECK(me.values[i] >= hl_maximal(f, sh).values[i]);
    }
}

TEST_CASE("power maximal: sigma 1 shortcut, large sigma approaches local sup") {
    IndexWindow w = make_window(-1, 1, 2, 2);
    GridSpec g = grid_of(w);
    auto fam = CubeFamily::shifted(w);
    Rng rng(3);
    SampledField f = sample_field(g, [&](const Point&) { return rng.uniform(0.5, 3.0); });
    SampledField a = power_maximal(f, 1.0, fam);
    SampledField b = hl_maximal(f, fam);
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);

    SampledField two = sample_field(g, [](const Point& x) { return x[0] < 0 ? 1.0 : 2.0; });
    SampledField big = power_maximal(two, 64.0, fam);
    for (double v : big.values) {
        CHECK(v <= 2.0 + 1e-12);
    }
    // at a node on the right half the top cube contains value 2
    CHECK(big.values[big.values.size() - 1] > 1.9);
    CHECK_THROWS_AS(power_maximal(two, 0.0, fam), std::invalid_argument);
}

TEST_CASE("coverage error when a node lies in no family cube") {
    IndexWindow w = make_window(0, 2, 1, 2);
    GridSpec g = grid_of(w);
    CubeFamily fam = CubeFamily::custom(g, {{Point{0.25, 0, 0}, 0.5}});
    SampledField f = SampledField::constant(g, 1.0);
    CHECK_THROWS_AS(hl_maximal(f, fam), std::domain_error);
}

TEST_CASE("fefferman-stein ratio: constants, indicators, validation") {
    IndexWindow w = make_window(-1, 1, 3, 2);
    GridSpec g = grid_of(w);
    auto fam = CubeFamily::enlarged(w);
    FieldStack one;
    one.insert(0, SampledField::constant(g, 1.0));
    CHECK(fefferman_stein_ratio(one, 2.0, 2.0, 0.5, fam) == doctest::Approx(1.0).epsilon(1e-14));

    FieldStack ind;
    ind.insert(0, sample_field(g, [](const Point& x) { return (x[0] >= 0 && x[0] < 0.5) ? 1.0 : 0.0; }));
    CHECK(fefferman_stein_ratio(ind, 2.0, 2.0, 0.5, fam) >= 1.0 - 1e-12);

    CHECK_THROWS_AS(fefferman_stein_ratio(one, 2.0, 2.0, 2.5, fam), std::invalid_argument);
    CHECK_THROWS_AS(fefferman_stein_ratio(one, kInf, 2.0, 0.5, fam), std::invalid_argument);
    FieldStack zero;
    zero.insert(0, SampledField::zeros(g));
    CHECK_THROWS_AS(fefferman_stein_ratio(zero, 2.0, 2.0, 0.5, fam), std::domain_error);
}

TEST_CASE("fefferman-stein ratio: bounded and stable under grid refinement") {
    const int trials = 20;
    double max_coarse = 0, max_fine = 0;
    for (int pass = 0; pass < 2; ++pass) {
        int res = pass == 0 ? 2 : 4;
        IndexWindow w = make_window(-1, 1, 3, res);
        GridSpec g = grid_of(w);
        auto fam = CubeFamily::enlarged(w);
        double worst = 0;
        for (int tr = 0; tr < trials; ++tr) {
            Rng rng = Rng::stream(2024, std::uint64_t(tr));
            FieldStack fs = random_stack(rng, g, -1, 1, 3, 0, 3);
            double r = fefferman_stein_ratio(fs, 2.0, 2.0, 0.5, fam);
            CHECK(r >= 1.0 - 1e-12);
            worst = std::max(worst, r);
        }
        (pass == 0 ? max_coarse : max_fine) = worst;
    }
    CHECK(std::fabs(max_fine - max_coarse) / max_coarse < 0.10);
}

TEST_CASE("weighted maximal ratio: reduction, constants, advisory") {
    IndexWindow w = make_window(-1, 1, 3, 2);
    GridSpec g = grid_of(w);
    auto fam = CubeFamily::enlarged(w);
    Rng rng(5);
    FieldStack fs = random_stack(rng, g, -1, 1, 3, 0, 3);

    // t == 1 reduces to the unweighted ratio at sigma = 1
    auto ones = WeightSequence::geometric(0.0, Weight::constant(1.0), 2.0);
    double wr = weighted_maximal_ratio(fs, ones, 2.0, 2.0, fam);
    double fr = fefferman_stein_ratio(fs, 2.0, 2.0, 1.0, fam);
    CHECK(wr == doctest::Approx(fr).epsilon(1e-13));

    FieldStack single;
    single.insert(0, SampledField::constant(g, 3.0));
    CHECK(weighted_maximal_ratio(single, ones, 2.0, 2.0, fam) == doctest::Approx(1.0).epsilon(1e-13));

    // geometric weights: advisory must certify equal per-level constants
    auto t = WeightSequence::geometric(0.5, Weight::power(0.3), 2.0);
    ApUniformity adv;
    double r = weighted_maximal_ratio(fs, t, 2.0, 2.0, fam, 0.5, &adv);
    CHECK(r >= 1.0 - 1e-12);
    CHECK(adv.same_constant);
    CHECK(adv.per_level.size() == 4);

    // deviant per-level weights: advisory flags it, the ratio still computes
    auto bad = WeightSequence::per_level({{0, Weight::constant(1.0)},
                                          {1, Weight::constant(1.0)},
                                          {2, Weight::table(1, 0, 1, {16.0, 0.0625})},
                                          {3, Weight::constant(1.0)}},
                                         2.0);
    ApUniformity adv2;
    double r2 = weighted_maximal_ratio(fs, bad, 2.0, 2.0, fam, 0.5, &adv2);
    CHECK(r2 > 0);
    CHECK_FALSE(adv2.same_constant);

    CHECK_THROWS_AS(weighted_maximal_ratio(fs, ones, 1.0, 2.0, fam), std::invalid_argument);
}

TEST_CASE("field stack grid mismatch is rejected") {
    IndexWindow w1 = make_window(-1, 1, 3, 2);
    IndexWindow w2 = make_window(-1, 1, 3, 4);
    FieldStack fs;
    fs.insert(0, SampledField::zeros(grid_of(w1)));
    CHECK_THROWS_AS(fs.insert(1, SampledField::zeros(grid_of(w2))), std::invalid_argument);
}
