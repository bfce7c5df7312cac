// Sequence-space quasi-norms over a truncated dyadic window: the b / f / f_inf
// families, their starred (local-weight) equivalents, the E-set variant of the
// f_inf norm, and the Holder building blocks used by the product factorizations.
#pragma once

#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "besovlab/dyadic.hpp"
#include "besovlab/weights.hpp"

namespace besovlab {

struct CubeKey {
    int k = 0;
    IVec m{};

    friend bool operator<(const CubeKey& a, const CubeKey& b) {
        if (a.k != b.k) return a.k < b.k;
        return a.m < b.m;
    }
    friend bool operator==(const CubeKey& a, const CubeKey& b) { return a.k == b.k && a.m == b.m; }
};

// sparse complex coefficients on window cubes; absent keys are zero
struct CoeffField {
    IndexWindow window;
    std::map<CubeKey, std::complex<double>> entries;

    CoeffField() = default;
    explicit CoeffField(IndexWindow w) : window(w) { window.validate(); }

    void set(int k, const IVec& m, std::complex<double> v); // throws when (k,m) is outside the window
    std::complex<double> get(int k, const IVec& m) const;
};

// serialization: array of records {k, m: [...], re, im}
CoeffField coeff_field_from_json(const IndexWindow& w, const std::string& json_text);
std::string coeff_field_to_json(const CoeffField& c);

enum class SpaceFamily { b, f, f_infinity };

struct SpaceSpec {
    SpaceFamily family = SpaceFamily::f;
    double p = 2;  // ignored for f_infinity
    double q = 2;
    WeightSequence weights;

    void validate() const; // exponent ranges; q < inf throughout
};

const char* space_family_name(SpaceFamily f);
SpaceFamily space_family_from_name(const std::string& name);

// t_{k,m,kappa} = ||t_k | L_e(Q_{k,m})|| with e the stored exponent (kappa*p for
// the starred norms, q for the f_inf local table); grid-restricted integral
struct LocalWeightTable {
    double exponent = 1;
    double kappa = 1;
    std::map<CubeKey, double> values;
};

LocalWeightTable build_local_weight_table(const WeightSequence& t, const IndexWindow& w, double exponent,
                                          double kappa = 1);

// (sum_k 2^{knq/2} || sum_m t_k lambda chi ||_{L_p}^q)^{1/q}
double bnorm(const CoeffField& c, const SpaceSpec& spec);

// || (sum_k sum_m 2^{knq/2} t_k^q |lambda|^q chi)^{1/q} ||_{L_p}
double fnorm(const CoeffField& c, const SpaceSpec& spec);

// (sum_k 2^{knq/2} (sum_m |lambda|^p t_{k,m}^p)^{q/p})^{1/q}; table must carry kappa=1, e=p
double bnorm_star(const CoeffField& c, const SpaceSpec& spec, const LocalWeightTable& table);

// || (sum_k sum_m 2^{knq(1/2+1/(kappa p))} t_{k,m,kappa}^q |lambda|^q chi)^{1/q} ||_{L_p}
double fnorm_star(const CoeffField& c, const SpaceSpec& spec, const LocalWeightTable& table);

// sup over window dyadic P of ((1/|P|) int_P sum_{k >= level(P)} sum_m 2^{knq/2} t_k^q |lambda|^q chi)^{1/q}
double finf_norm(const CoeffField& c, const SpaceSpec& spec);

// same sup with integrand sum 2^{knq(1/2+1/q)} t_{k,m,q}^q |lambda|^q chi; equals
// finf_norm exactly on the shared grid (table exponent must be q)
double finf_norm_local(const CoeffField& c, const SpaceSpec& spec, const LocalWeightTable& table);

// E-sets are node-flat-index subsets of each cube with grid measure > |Q|/2;
// keys absent from the map default to the full cube
using ESetMap = std::map<CubeKey, std::vector<std::int64_t>>;
double finf_norm_esets(const CoeffField& c, const SpaceSpec& spec, const ESetMap& esets);

// pointwise omega_k = t_k^{1-theta} w_k^theta, exact on descriptors; the result's
// admissibility exponent combines harmonically
WeightSequence holder_combine(const WeightSequence& t, const WeightSequence& w, double theta);

// LHS = (int_E omega_k^q)^{1/q}, RHS = (int_E t_k^{q0})^{(1-theta)/q0} (int_E w_k^{q1})^{theta/q1}
// with 1/q = (1-theta)/q0 + theta/q1; LHS <= RHS by discrete Holder
std::pair<double, double> holder_lemma_ratio(const GridSpec& g, const WeightSequence& t, const WeightSequence& w,
                                             double theta, double q0, double q1, int k, const Cube& Q,
                                             const std::vector<std::int64_t>& eset);

// K = max(1, 2^{1/min(p,q) - 1})
double quasi_triangle_constant(double p, double q);

} // namespace besovlab
