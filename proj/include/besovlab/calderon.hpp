#pragma once
// Products of two weighted sequence spaces and their constructive
// factorizations: a coefficient field lambda is split into lambda0, lambda1
// with |lambda| = |lambda0|^{1-theta} |lambda1|^theta exactly, and the pair
// certifies a two-sided bound on the product quasi-norm.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "besovlab/seqspace.hpp"

namespace besovlab {

// The variant is read off the two families: (f,f), (b,b) or (f,f_infinity).
struct InterpolationSetup {
    double theta = 0.5;
    SpaceSpec space0;
    SpaceSpec space1;
    IndexWindow window;

    SpaceFamily variant = SpaceFamily::f;
    double p = 0;    // 1/p = (1-theta)/p0 + theta/p1, or (1-theta)/p0 when space1 is f_infinity
    double q = 0;    // 1/q = (1-theta)/q0 + theta/q1
    double kappa = 1; // f_infinity only: 1/(kappa p) = (1-theta)/p0 + theta/q1
    WeightSequence omega; // t^{1-theta} w^theta
    double gamma = 0; // p/p0 - q/q0
    double delta = 0; // p/p1 - q/q1, or -q/q1 when space1 is f_infinity
    double u = 0;
    double v = 0;
    bool hypotheses_strict = true; // all relevant exponents strictly inside (1, inf)

    // per-cube weight norms over the window
    LocalWeightTable t_norms;     // of t, at L_{p0}
    LocalWeightTable w_norms;     // of w, at L_{p1} (L_{q1} for f_infinity)
    LocalWeightTable omega_norms; // of omega, at L_p (L_{kappa p} for f_infinity)

    // per-cube coefficients multiplying lambda0 resp. lambda1
    double theta_factor(const CubeKey& key) const;
    double eps_factor(const CubeKey& key) const;

    static InterpolationSetup make(double theta, const SpaceSpec& s0, const SpaceSpec& s1,
                                   const IndexWindow& window);
};

// Superlevel decomposition of the stacked cube function g. Each populated
// cube lands in exactly one slot l: more than half its nodes lie in A_l and
// no more than half in A_{l+1}.
struct LevelSets {
    std::map<int, std::vector<std::int64_t>> a_sets; // l -> node flats where g > 2^l
    std::map<CubeKey, int> assignment;
    int l_lo = 0;
    int l_hi = -1; // scanned range is empty when l_hi < l_lo
    int forced = 0; // cubes assigned by the fallback rule (none in exact arithmetic)
};

LevelSets level_sets(const CoeffField& lambda, const InterpolationSetup& setup,
                     SpaceFamily g_kind);

enum class FactorBranch {
    gamma_positive,
    gamma_negative,
    gamma_zero,
    b_variant,
    finf_gamma_positive,
    finf_gamma_negative,
    finf_gamma_zero,
};
std::string factor_branch_name(FactorBranch b);

struct Factorization {
    CoeffField lambda0;
    CoeffField lambda1;
    double scale = 1.0; // the M in |lambda| = M (lambda0)^{1-theta} (lambda1)^theta
    std::map<CubeKey, int> level_trace;
    FactorBranch branch = FactorBranch::gamma_zero;
    int forced = 0;
    // f_infinity runs only: E-set norm of lambda1 with E = Q \cap A_{l+1}^c
    // (full cube when that set is not strictly more than half of Q)
    std::optional<double> lambda1_eset_bound;

    explicit Factorization(const IndexWindow& w) : lambda0(w), lambda1(w) {}
};

Factorization factorize_f(const CoeffField& lambda, const InterpolationSetup& setup);
Factorization factorize_b(const CoeffField& lambda, const InterpolationSetup& setup);
Factorization factorize_finf(const CoeffField& lambda, const InterpolationSetup& setup,
                             const ESetMap& esets = {});

struct ProductBounds {
    double lower = 0;
    double upper = 0;
};

// lower: norm of lambda in the interpolated space; upper: product of the
// factor norms. lower <= upper always; a violation throws std::logic_error.
ProductBounds product_norm_bounds(const CoeffField& lambda, const InterpolationSetup& setup);

std::string factorization_to_json(const Factorization& f);

} // namespace besovlab
