#include "besovlab/suites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace besovlab {
namespace {

using nlohmann::json;

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string csv_cell(double v) { return std::isnan(v) ? std::string() : fmt17(v); }

double num_or_nan(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return kNaN;
    return j[key].get<double>();
}

} // namespace

std::string report_to_json(const Report& rep) {
    json j;
    j["schema"] = 1;
    j["suite"] = rep.suite;
    j["config"] = json::parse(rep.config_json.empty() ? "{}" : rep.config_json);
    json rows = json::array();
    for (const auto& r : rep.rows) {
        json rj;
        rj["trial"] = r.trial;
        rj["inputs_hash"] = r.inputs_hash;
        rj["space"] = r.space;
        rj["p"] = r.p;
        rj["q"] = r.q;
        rj["metric"] = r.metric;
        rj["value"] = r.value;
        rj["lower"] = r.lower;
        rj["upper"] = r.upper;
        rj["branch"] = r.branch;
        rj["ok"] = r.ok;
        if (!r.extra.empty()) {
            json ej;
            for (const auto& [k, v] : r.extra) ej[k] = v;
            rj["extra"] = ej;
        }
        rows.push_back(std::move(rj));
    }
    j["rows"] = rows;
    json s;
    s["value_min"] = rep.summary.value_min;
    s["value_median"] = rep.summary.value_median;
    s["value_max"] = rep.summary.value_max;
    json dj = json::object();
    for (const auto& [k, v] : rep.summary.deltas) dj[k] = v;
    s["deltas"] = dj;
    s["tolerance"] = rep.summary.tolerance;
    s["passed"] = rep.summary.passed;
    j["summary"] = s;
    return j.dump(2);
}

Report report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("report: malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("schema") || j["schema"] != 1)
        throw std::invalid_argument("report: schema must be 1");
    Report rep;
    rep.suite = j.value("suite", std::string());
    rep.config_json = j.contains("config") ? j["config"].dump() : std::string("{}");
    for (const auto& rj : j.value("rows", json::array())) {
        TrialRow r;
        r.trial = rj.value("trial", 0);
        r.inputs_hash = rj.value("inputs_hash", std::string());
        r.space = rj.value("space", std::string());
        r.p = num_or_nan(rj, "p");
        r.q = num_or_nan(rj, "q");
        r.metric = rj.value("metric", std::string());
        r.value = num_or_nan(rj, "value");
        r.lower = num_or_nan(rj, "lower");
        r.upper = num_or_nan(rj, "upper");
        r.branch = rj.value("branch", std::string());
        r.ok = rj.value("ok", false);
        if (rj.contains("extra"))
            for (const auto& [k, v] : rj["extra"].items())
                r.extra[k] = v.is_null() ? kNaN : v.get<double>();
        rep.rows.push_back(std::move(r));
    }
    if (j.contains("summary")) {
        const json& s = j["summary"];
        rep.summary.value_min = num_or_nan(s, "value_min");
        rep.summary.value_median = num_or_nan(s, "value_median");
        rep.summary.value_max = num_or_nan(s, "value_max");
        if (s.contains("deltas"))
            for (const auto& [k, v] : s["deltas"].items())
                rep.summary.deltas[k] = v.is_null() ? kNaN : v.get<double>();
        rep.summary.tolerance = s.value("tolerance", std::string());
        rep.summary.passed = s.value("passed", false);
    }
    return rep;
}

std::string report_to_csv(const Report& rep) {
    std::string out = "suite,trial,inputs_hash,space,p,q,metric,value,lower,upper,branch,ok\n";
    for (const auto& r : rep.rows) {
        out += rep.suite;
        out += ',' + std::to_string(r.trial);
        out += ',' + r.inputs_hash;
        out += ',' + r.space;
        out += ',' + csv_cell(r.p);
        out += ',' + csv_cell(r.q);
        out += ',' + r.metric;
        out += ',' + csv_cell(r.value);
        out += ',' + csv_cell(r.lower);
        out += ',' + csv_cell(r.upper);
        out += ',' + r.branch;
        out += r.ok ? ",true\n" : ",false\n";
    }
    return out;
}

std::string report_to_svg(const Report& rep) {
    constexpr int kW = 640, kH = 360, kBins = 16;
    constexpr int kLeft = 50, kRight = 20, kTop = 40, kBottom = 40;

    std::vector<double> vals;
    for (const auto& r : rep.rows)
        if (std::isfinite(r.value)) vals.push_back(r.value);

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kW) +
         "\" height=\"" + std::to_string(kH) + "\" viewBox=\"0 0 " + std::to_string(kW) + " " +
         std::to_string(kH) + "\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(kW) + "\" height=\"" +
         std::to_string(kH) + "\" fill=\"white\" stroke=\"none\"/>\n";
    s += "<text x=\"" + std::to_string(kW / 2) +
         "\" y=\"24\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">" +
         rep.suite + ": value histogram (" + std::to_string(vals.size()) + " trials)</text>\n";

    if (vals.empty()) {
        s += "<text x=\"" + std::to_string(kW / 2) + "\" y=\"" + std::to_string(kH / 2) +
             "\" font-family=\"monospace\" font-size=\"16\" text-anchor=\"middle\">no data</text>\n";
        s += "</svg>\n";
        return s;
    }

    const auto [mn_it, mx_it] = std::minmax_element(vals.begin(), vals.end());
    const double lo = *mn_it;
    double hi = *mx_it;
    if (hi == lo) hi = lo + 1.0;
    std::vector<int> bins(kBins, 0);
    for (double v : vals) {
        int b = int((v - lo) / (hi - lo) * kBins);
        if (b >= kBins) b = kBins - 1;
        if (b < 0) b = 0;
        ++bins[b];
    }
    const int peak = *std::max_element(bins.begin(), bins.end());
    const double plot_w = kW - kLeft - kRight;
    const double plot_h = kH - kTop - kBottom;
    for (int b = 0; b < kBins; ++b) {
        const double h = peak ? plot_h * bins[b] / peak : 0.0;
        const double x = kLeft + plot_w * b / kBins;
        const double y = kTop + plot_h - h;
        s += "<rect x=\"" + fmt6(x) + "\" y=\"" + fmt6(y) + "\" width=\"" +
             fmt6(plot_w / kBins - 2.0) + "\" height=\"" + fmt6(h) +
             "\" fill=\"#4878a8\" stroke=\"none\"/>\n";
    }
    s += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + fmt6(kTop + plot_h) + "\" x2=\"" +
         std::to_string(kW - kRight) + "\" y2=\"" + fmt6(kTop + plot_h) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + std::to_string(kLeft) + "\" y=\"" + std::to_string(kH - 16) +
         "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"start\">" + fmt6(lo) +
         "</text>\n";
    s += "<text x=\"" + std::to_string(kW - kRight) + "\" y=\"" + std::to_string(kH - 16) +
         "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">" + fmt6(*mx_it) +
         "</text>\n";
    s += "<text x=\"16\" y=\"" + std::to_string(kTop + 8) +
         "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"start\">" +
         std::to_string(peak) + "</text>\n";
    s += "</svg>\n";
    return s;
}

} // namespace besovlab
