// Weights, weight sequences, Muckenhoupt constants, and the two-index
// growth/decay condition on {t_k}.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "besovlab/dyadic.hpp"

namespace besovlab {

// Descriptor tree with an evaluator. Positivity is enforced where values are
// consumed (cube averages), since only grid nodes matter.
struct Weight {
    enum class Kind { constant, power, shifted_power, table, product };
    Kind kind = Kind::constant;
    double value = 1.0;  // constant
    double alpha = 0.0;  // power |x|^alpha, shifted_power (1+|x|)^alpha
    // piecewise-constant table on the cells of [box_lo, box_hi)^table_dim at
    // table_level, constant in any remaining coordinates; 1 outside the box
    int table_level = 0;
    int table_dim = 1;
    std::int64_t table_lo = 0, table_hi = 0;
    std::vector<double> table_values;
    std::vector<Weight> factors; // product

    double eval(const Point& x, int dim) const;

    static Weight constant(double c);
    static Weight power(double a);
    static Weight shifted_power(double a);
    static Weight table(int level, std::int64_t lo, std::int64_t hi, std::vector<double> values, int dim = 1);
    static Weight product(std::vector<Weight> fs);
};

Weight weight_from_json(const std::string& json_text);
std::string weight_to_json(const Weight& w);
std::uint64_t weight_descriptor_hash(const Weight& w);

// descriptor-level pointwise power w^e (exact on the descriptor tree)
Weight weight_pow(const Weight& w, double e);

// {t_k}: geometric 2^{ks} * base(x), or an explicit per-level table.
struct WeightSequence {
    enum class Kind { geometric, per_level };
    Kind kind = Kind::geometric;
    double s = 0.0;
    Weight base;
    std::map<int, Weight> levels;
    double admissibility_p = 1.0;

    double eval(int k, const Point& x, int dim) const;
    const Weight* level_weight(int k) const; // per_level only, null if missing

    static WeightSequence geometric(double s, Weight base, double p);
    static WeightSequence per_level(std::map<int, Weight> levels, double p);
};

WeightSequence weight_seq_from_json(const std::string& json_text);
std::string weight_seq_to_json(const WeightSequence& t);
std::uint64_t weight_seq_descriptor_hash(const WeightSequence& t);

double conjugate_exponent(double p); // 1/p + 1/p' = 1; 1 -> inf, inf -> 1

// ((1/|Q|) int_Q f^r)^(1/r) over the grid nodes in the cube; r = inf -> node max.
// Throws std::domain_error on a nonpositive node value, std::invalid_argument
// on an empty cube.
double cube_average(const GridSpec& g, const Cube& c, double r, const std::function<double(const Point&)>& f);
double cube_average(const GridSpec& g, const Cube& c, double r, const Weight& w);

struct ApEstimate {
    double p = 2;
    double value = 1;                             // sup over the family
    std::vector<std::pair<double, double>> trace; // (cube side, per-scale sup), ascending side
    std::string verdict;                          // "stable" | "growing" (heuristic flag)
};

// p>1: sup_Q M_Q(gamma) * M_{Q,p'/p}(gamma^-1); p=1: sup_Q M_Q(gamma) / min_Q gamma.
// Verdict is "growing" when the per-scale sup rises by a factor >= 2 from the
// smallest to the largest cube side in the family.
ApEstimate estimate_ap_constant(const Weight& gamma, double p, const CubeFamily& cubes);

// Smallest exponent on the grid {p/2, 3p/4, 7p/8, ...} (clamped to >= 1) with a
// stable verdict; nullopt when every tested exponent grows.
std::optional<double> find_stable_smaller_exponent(const Weight& gamma, double p, const CubeFamily& cubes,
                                                   int depth = 4);

struct TyulenevRow {
    int k = 0, j = 0;    // level pair, k <= j
    double sup_L1 = 0;   // sup over cubes of M_{Q,p}(t_k) * M_{Q,s1}(t_j^-1)
    double sup_L2 = 0;   // sup over cubes of M_{Q,s2}(t_j) / M_{Q,p}(t_k)
};

struct TyulenevReport {
    double p = 1, sigma1 = 1, sigma2 = 1;
    double alpha1 = 0, alpha2 = 0; // fitted rates
    double C1 = 1, C2 = 1;         // exp2 of max positive residual: certified on the window
    bool degenerate = false;       // single level, no slope information
    std::vector<TyulenevRow> rows; // per-(k,j) suprema

    // certified constants when the rate is forced to a given alpha
    double certificate1_at(double alpha) const;
    double certificate2_at(double alpha) const;
};

TyulenevReport check_tyulenev(const WeightSequence& t, double sigma1, double sigma2, const IndexWindow& w);

// Per-level Muckenhoupt constants of t_k^weight_power at exponent ap_exponent;
// "same constant" tolerance is spread <= 0.1. The two hypothesis styles are
// (weight_power = p, ap_exponent = p/theta) and (weight_power = 1, ap_exponent = p).
struct ApUniformity {
    std::vector<std::pair<int, double>> per_level;
    double spread = 0; // (max - min) / max
    bool same_constant = true;
};
ApUniformity weights_ap_uniformity(const WeightSequence& t, double weight_power, double ap_exponent,
                                   const CubeFamily& cubes, int level_min, int level_max);

} // namespace besovlab
