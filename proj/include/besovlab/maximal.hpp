// Discrete Hardy-Littlewood maximal operator over a finite cube family, the
// power variant, and the vector-valued maximal-inequality ratios.
#pragma once

#include <functional>
#include <map>
#include <vector>

#include "besovlab/dyadic.hpp"
#include "besovlab/weights.hpp"

namespace besovlab {

// real values on the shared grid, one per node, row-major
struct SampledField {
    GridSpec grid;
    std::vector<double> values;

    static SampledField zeros(const GridSpec& g);
    static SampledField constant(const GridSpec& g, double c);
};

SampledField sample_field(const GridSpec& g, const std::function<double(const Point&)>& f);

// quadrature L_p norm with the grid's uniform node weights; p = inf is the nodewise max
double grid_lp_norm(const SampledField& f, double p);

// the sequence {f_k}, all on one grid
struct FieldStack {
    std::map<int, SampledField> fields;

    void insert(int k, SampledField f); // throws on grid mismatch
    const GridSpec& grid() const;       // throws when empty
};

// At each node: max over family cubes containing the node of the cube mean of |f|.
// An under-approximation of the true maximal function; throws std::domain_error
// when some node lies in no family cube.
SampledField hl_maximal(const SampledField& f, const CubeFamily& cubes);

// (hl_maximal(|f|^sigma))^(1/sigma); sigma = 1 is hl_maximal exactly
SampledField power_maximal(const SampledField& f, double sigma, const CubeFamily& cubes);

// || (sum_k M_sigma(f_k)^q)^(1/q) ||_p  /  || (sum_k |f_k|^q)^(1/q) ||_p
// Requires 0 < sigma < min(p,q), p < inf; q = inf uses the nodewise sup over k.
double fefferman_stein_ratio(const FieldStack& fs, double p, double q, double sigma, const CubeFamily& cubes);

// || (sum_k t_k^q M(f_k)^q)^(1/q) ||_p  /  || (sum_k t_k^q |f_k|^q)^(1/q) ||_p
// When advisory is non-null it is filled with the per-level Muckenhoupt
// uniformity of t_k^p at exponent p/theta (reported, never fatal).
double weighted_maximal_ratio(const FieldStack& fs, const WeightSequence& t, double p, double q,
                              const CubeFamily& cubes, double theta = 0.5, ApUniformity* advisory = nullptr);

} // namespace besovlab
