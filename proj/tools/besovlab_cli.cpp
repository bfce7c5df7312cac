// Command-line front end. Talks to the library exclusively through the C API.
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "besovlab/capi.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitToleranceFailure = 1;
constexpr int kExitConfigError = 2;

std::string take(char* s) {
    if (!s) return {};
    std::string out(s);
    bsv_string_free(s);
    return out;
}

std::optional<std::string> read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool write_file(const fs::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out << body;
    return bool(out);
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int cmd_run(const std::string& config_path, std::optional<long long> seed,
            std::optional<int> trials, const std::string& out_dir, const std::string& format,
            bool plots) {
    const auto raw = read_file(config_path);
    if (!raw) {
        std::cerr << "error: cannot read config file: " << config_path << "\n";
        return kExitConfigError;
    }
    json cfg;
    try {
        cfg = json::parse(*raw);
    } catch (const json::parse_error& e) {
        std::cerr << "error: malformed config JSON: " << e.what() << "\n";
        return kExitConfigError;
    }
    if (seed) cfg["seed"] = *seed;
    if (trials) cfg["trials"] = *trials;

    bsv_report* rep = bsv_run_suite(cfg.dump().c_str());
    if (!rep) {
        std::cerr << "error: " << bsv_last_error() << "\n";
        return kExitConfigError;
    }
    const std::string suite = cfg.value("suite", std::string("report"));
    const bool passed = bsv_report_passed(rep) == 1;

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        std::cerr << "error: cannot create output directory: " << out_dir << "\n";
        bsv_report_free(rep);
        return kExitConfigError;
    }

    const fs::path report_path =
        fs::path(out_dir) / (suite + (format == "csv" ? ".csv" : ".json"));
    const std::string body =
        format == "csv" ? take(bsv_report_csv(rep)) : take(bsv_report_json(rep));
    if (body.empty() || !write_file(report_path, body)) {
        std::cerr << "error: cannot write report: " << report_path.string() << "\n";
        bsv_report_free(rep);
        return kExitConfigError;
    }

    json meta;
    meta["suite"] = suite;
    meta["written_at_utc"] = utc_now(); // timestamps live here, never in the report
    meta["report"] = report_path.string();
    std::size_t trial_rows = 0;
    {
        const std::string csv = take(bsv_report_csv(rep));
        for (char ch : csv)
            if (ch == '\n') ++trial_rows;
        if (trial_rows > 0) --trial_rows; // header
    }
    meta["trials"] = trial_rows;
    meta["passed"] = passed;

    if (plots) {
        const fs::path plot_path = fs::path(out_dir) / (suite + ".svg");
        const std::string svg = take(bsv_report_plot_svg(rep));
        if (svg.empty() || !write_file(plot_path, svg)) {
            std::cerr << "error: cannot write plot: " << plot_path.string() << "\n";
            bsv_report_free(rep);
            return kExitConfigError;
        }
        meta["plot"] = plot_path.string();
    }

    const fs::path meta_path = fs::path(out_dir) / (suite + ".meta.json");
    if (!write_file(meta_path, meta.dump(2) + "\n")) {
        std::cerr << "error: cannot write sidecar: " << meta_path.string() << "\n";
        bsv_report_free(rep);
        return kExitConfigError;
    }
    bsv_report_free(rep);

    std::cout << suite << ": " << trial_rows << " trials, "
              << (passed ? "passed" : "TOLERANCE FAILURE") << "\n"
              << "report: " << report_path.string() << "\n";
    return passed ? kExitPass : kExitToleranceFailure;
}

int cmd_list() {
    const std::string text = take(bsv_list_suites());
    if (text.empty()) {
        std::cerr << "error: " << bsv_last_error() << "\n";
        return kExitConfigError;
    }
    for (const auto& name : json::parse(text)) std::cout << name.get<std::string>() << "\n";
    return kExitPass;
}

int cmd_explain(const std::string& suite) {
    char* doc = bsv_explain_suite(suite.c_str());
    if (!doc) {
        std::cerr << "error: " << bsv_last_error() << "\n";
        return kExitConfigError;
    }
    std::cout << take(doc) << "\n";
    return kExitPass;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sequence-space experiment runner"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", format = "json", suite;
    long long seed_val = 0;
    int trials_val = 0;
    bool plots = false;

    CLI::App* run = app.add_subcommand("run", "run one experiment suite from a JSON config");
    run->add_option("--config", config_path, "path to the config JSON")->required();
    CLI::Option* seed_opt = run->add_option("--seed", seed_val, "override the RNG seed");
    CLI::Option* trials_opt = run->add_option("--trials", trials_val, "override the trial count");
    run->add_option("--out", out_dir, "output directory (default: current)");
    run->add_option("--format", format, "report format")
        ->check(CLI::IsMember({"csv", "json"}));
    run->add_flag("--plots", plots, "also emit a static SVG histogram");

    CLI::App* list = app.add_subcommand("list-suites", "print available suite names");
    CLI::App* explain = app.add_subcommand("explain", "describe one suite's contract");
    explain->add_option("suite", suite, "suite name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kExitConfigError : kExitPass;
    }

    if (run->parsed())
        return cmd_run(config_path,
                       seed_opt->count() ? std::optional<long long>(seed_val) : std::nullopt,
                       trials_opt->count() ? std::optional<int>(trials_val) : std::nullopt,
                       out_dir, format, plots);
    if (list->parsed()) return cmd_list();
    if (explain->parsed()) return cmd_explain(suite);
    return kExitConfigError;
}
