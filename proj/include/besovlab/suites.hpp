#pragma once
// Named verification suites. A suite draws seeded trials, computes the
// contracted metrics, grades them against its declared tolerance, and packs
// everything into a Report. Reports serialize deterministically: identical
// (config, seed) give byte-identical JSON; wall-clock data never enters.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "besovlab/dyadic.hpp"
#include "besovlab/weights.hpp"

namespace besovlab {

// one refinement rung: grid resolution multiplier, window growth per side
struct RefineStep {
    int res_scale = 2;
    int pad_levels = 1;
};

struct ExperimentConfig {
    std::string suite;
    std::uint64_t seed = 0;
    int trials = 0; // 0 picks the suite default

    IndexWindow window;
    bool has_window = false; // false: suite default applied at resolve time

    std::vector<WeightSequence> weights; // optional; suites draw their own otherwise

    // two-space (interpolation) parameters
    double theta = 0.5;
    double p0 = 2, q0 = 2, p1 = 2, q1 = 2;
    bool finf = false;

    // single-space parameters
    std::string family = "f";
    double p = 2, q = 2;

    std::vector<double> alphas; // ap-constant probes
    double sigma = 1.0;         // maximal power exponent
    double sigma1 = 1.5, sigma2 = 1.5;
    std::string cube_family = "dyadic";
    std::string profile = "bump";
    std::int64_t signal_n = 0; // transform grid size, suite default when 0
    std::vector<RefineStep> refine;

    std::string echo_json; // normalized config with defaults and derived exponents
};

// parses, validates (schema 1, known suite, mandatory seed), resolves suite
// defaults, and fills echo_json; throws std::invalid_argument
ExperimentConfig config_from_json(const std::string& text);

struct TrialRow {
    int trial = 0;
    std::string inputs_hash; // hash of the trial's generated inputs
    std::string space;       // family or variant label
    double p = 0, q = 0;
    std::string metric;
    double value = 0;
    double lower = 0, upper = 0; // NaN when not applicable
    std::string branch;
    bool ok = true;
    std::map<std::string, double> extra; // carried in JSON only
};

struct ReportSummary {
    double value_min = 0, value_median = 0, value_max = 0;
    std::map<std::string, double> deltas; // refinement stability, reported not assumed
    std::string tolerance;                // the declared contract
    bool passed = false;
};

struct Report {
    std::string suite;
    std::string config_json;
    std::vector<TrialRow> rows;
    ReportSummary summary;
};

Report run_suite(const ExperimentConfig& cfg);

std::vector<std::string> list_suites();
// the verified property and its tolerance contract; throws on unknown suite
std::string explain_suite(const std::string& suite);

// deterministic emission; timestamps live only in caller-written sidecars
std::string report_to_json(const Report& r);
Report report_from_json(const std::string& text);
std::string report_to_csv(const Report& r); // one row per trial, fixed columns
std::string report_to_svg(const Report& r); // histogram of the metric values

} // namespace besovlab
