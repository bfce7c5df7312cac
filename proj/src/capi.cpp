#include "besovlab/capi.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "besovlab/seqspace.hpp"
#include "besovlab/suites.hpp"

struct bsv_report {
    besovlab::Report rep;
};

namespace {

thread_local std::string g_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) {
        g_error = "out of memory";
        return nullptr;
    }
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename F>
char* string_call(F&& f) {
    try {
        g_error.clear();
        return dup_string(f());
    } catch (const std::exception& e) {
        g_error = e.what();
        return nullptr;
    }
}

} // namespace

extern "C" {

const char* bsv_last_error(void) { return g_error.c_str(); }

void bsv_string_free(char* s) { std::free(s); }

char* bsv_list_suites(void) {
    return string_call([] {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& name : besovlab::list_suites()) arr.push_back(name);
        return arr.dump();
    });
}

char* bsv_explain_suite(const char* suite) {
    return string_call([&] {
        if (!suite) throw std::invalid_argument("suite name is NULL");
        return besovlab::explain_suite(suite);
    });
}

bsv_report* bsv_run_suite(const char* config_json) {
    try {
        g_error.clear();
        if (!config_json) throw std::invalid_argument("config is NULL");
        const besovlab::ExperimentConfig cfg = besovlab::config_from_json(config_json);
        return new bsv_report{besovlab::run_suite(cfg)};
    } catch (const std::exception& e) {
        g_error = e.what();
        return nullptr;
    }
}

int bsv_report_passed(const bsv_report* rep) {
    return rep && rep->rep.summary.passed ? 1 : 0;
}

char* bsv_report_json(const bsv_report* rep) {
    return string_call([&] {
        if (!rep) throw std::invalid_argument("report is NULL");
        return besovlab::report_to_json(rep->rep);
    });
}

char* bsv_report_csv(const bsv_report* rep) {
    return string_call([&] {
        if (!rep) throw std::invalid_argument("report is NULL");
        return besovlab::report_to_csv(rep->rep);
    });
}

char* bsv_report_plot_svg(const bsv_report* rep) {
    return string_call([&] {
        if (!rep) throw std::invalid_argument("report is NULL");
        return besovlab::report_to_svg(rep->rep);
    });
}

void bsv_report_free(bsv_report* rep) { delete rep; }

int bsv_sequence_norm(const char* space_json, const char* field_json, double* out) {
    try {
        g_error.clear();
        if (!space_json || !field_json || !out)
            throw std::invalid_argument("NULL argument");
        const nlohmann::json sj = nlohmann::json::parse(space_json);
        if (!sj.contains("window")) throw std::invalid_argument("space: window required");
        const besovlab::IndexWindow w = besovlab::window_from_json(sj.at("window").dump());

        besovlab::SpaceSpec spec;
        spec.family = besovlab::space_family_from_name(sj.value("family", std::string("f")));
        spec.p = sj.value("p", 2.0);
        spec.q = sj.value("q", 2.0);
        spec.weights = sj.contains("weights")
                           ? besovlab::weight_seq_from_json(sj.at("weights").dump())
                           : besovlab::WeightSequence::geometric(
                                 0.0, besovlab::Weight::constant(1.0), spec.p);
        spec.validate();

        const besovlab::CoeffField c = besovlab::coeff_field_from_json(w, field_json);
        switch (spec.family) {
            case besovlab::SpaceFamily::b:
                *out = besovlab::bnorm(c, spec);
                break;
            case besovlab::SpaceFamily::f:
                *out = besovlab::fnorm(c, spec);
                break;
            case besovlab::SpaceFamily::f_infinity:
                *out = besovlab::finf_norm(c, spec);
                break;
        }
        return 0;
    } catch (const std::exception& e) {
        g_error = e.what();
        return 1;
    }
}

} // extern "C"
