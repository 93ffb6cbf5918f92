// algebroid-lab: batch verification runner over the example zoo.
//
//   algebroid-lab <axioms|compat|redef|fields|suite>
//       --example NAME --seed N --points N --tol X
//       [--dt 1e-2,1e-3,1e-4] [--lambda-seed N] [--output PATH|-] [--json]
//
// Exit codes: 0 all checks pass, 1 any check fails, 2 usage/config error.
// Reports are deterministic for a fixed configuration (no timestamps).

#include <CLI11.hpp>
#include <json.hpp>

#include "cymh/suites.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr const char* kVersion = "0.1.0";

using ordered_json = nlohmann::ordered_json;

ordered_json report_json(const cymh::SuiteReport& rep) {
    ordered_json j;
    j["suite"] = rep.suite;
    j["example"] = rep.example;
    j["seed"] = rep.seed;
    j["pass"] = rep.pass();
    ordered_json checks = ordered_json::array();
    for (const auto& c : rep.checks) {
        ordered_json jc;
        jc["id"] = c.id;
        jc["ref"] = c.ref;
        jc["points"] = c.points;
        jc["max_residual"] = c.max_residual;
        jc["tolerance"] = c.tol;
        jc["pass"] = c.pass;
        jc["note"] = c.note;
        checks.push_back(std::move(jc));
    }
    j["checks"] = std::move(checks);
    return j;
}

std::string render_json(const std::vector<cymh::SuiteReport>& reps, unsigned seed) {
    ordered_json top;
    top["version"] = kVersion;
    top["seed"] = seed;
    ordered_json suites = ordered_json::array();
    for (const auto& rep : reps) suites.push_back(report_json(rep));
    top["suites"] = std::move(suites);
    return top.dump(2) + "\n";
}

std::string render_text(const std::vector<cymh::SuiteReport>& reps) {
    std::ostringstream out;
    out.setf(std::ios::scientific);
    out.precision(3);
    for (const auto& rep : reps) {
        out << "== " << rep.suite << " / " << rep.example
            << (rep.pass() ? "  [PASS]" : "  [FAIL]") << "\n";
        for (const auto& c : rep.checks) {
            out << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.id
                << "  max_residual=" << c.max_residual << "  tol=" << c.tol << "  ("
                << c.ref << ")";
            if (!c.note.empty()) out << "  -- " << c.note;
            out << "\n";
        }
    }
    return out.str();
}

int emit(const std::string& body, const std::string& path) {
    if (path == "-") {
        std::cout << body;
        return 0;
    }
    std::ofstream f(path);
    if (!f) {
        std::cerr << "algebroid-lab: cannot write to '" << path << "'\n";
        return 2;
    }
    f << body;
    if (!f.good()) {
        std::cerr << "algebroid-lab: write to '" << path << "' failed\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chart-level verification suites for Lie algebroid gauge data"};
    app.require_subcommand(1);

    cymh::SuiteConfig cfg;
    double tol = -1.0;
    std::string dt_list = "1e-2,1e-3,1e-4";
    std::string output = "-";
    bool json = false;

    std::vector<CLI::App*> subs;
    for (const char* name : {"axioms", "compat", "redef", "fields", "suite"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--example", cfg.example, "example name");
        sub->add_option("--seed", cfg.seed, "base RNG seed");
        sub->add_option("--points", cfg.points, "sample-point budget");
        sub->add_option("--tol", tol, "override the per-check tolerances");
        sub->add_option("--dt", dt_list, "comma-separated flow step sizes");
        sub->add_option("--lambda-seed", cfg.lambda_seed,
                        "seed of the redefinition parameter draws");
        sub->add_option("--lambda-count", cfg.lambda_count,
                        "number of redefinition parameter draws");
        sub->add_option("--output", output, "report path, or - for stdout");
        sub->add_flag("--json", json, "emit the JSON report schema");
        subs.push_back(sub);
    }
    CLI::App* suite_cmd = subs.back();
    // `suite` covers the whole zoo unless an example is pinned explicitly
    cfg.example.clear();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (cfg.points < 1) {
        std::cerr << "algebroid-lab: --points must be at least 1\n";
        return 2;
    }
    if (tol != -1.0) {
        if (tol <= 0.0) {
            std::cerr << "algebroid-lab: --tol must be positive\n";
            return 2;
        }
        cfg.tol = tol;
    }
    if (cfg.lambda_count < 1) {
        std::cerr << "algebroid-lab: --lambda-count must be at least 1\n";
        return 2;
    }
    cfg.dts.clear();
    {
        std::stringstream ss(dt_list);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                size_t used = 0;
                double v = std::stod(item, &used);
                if (used != item.size() || v <= 0.0) throw std::invalid_argument(item);
                cfg.dts.push_back(v);
            } catch (const std::exception&) {
                std::cerr << "algebroid-lab: bad --dt entry '" << item << "'\n";
                return 2;
            }
        }
        if (cfg.dts.size() < 2) {
            std::cerr << "algebroid-lab: --dt needs at least two step sizes\n";
            return 2;
        }
    }

    std::vector<cymh::SuiteReport> reps;
    try {
        if (app.got_subcommand(suite_cmd)) {
            if (cfg.example.empty()) {
                reps = cymh::run_everything(cfg);
            } else {
                cymh::ExampleInfo info = cymh::get_example(cfg.example);
                reps.push_back(cymh::run_axioms(cfg));
                if (info.compat) reps.push_back(cymh::run_compat(cfg));
                if (info.redef) reps.push_back(cymh::run_redef(cfg));
                if (info.fields) reps.push_back(cymh::run_fields(cfg));
            }
        } else {
            if (cfg.example.empty()) cfg.example = "su2";
            if (app.got_subcommand(subs[0])) reps.push_back(cymh::run_axioms(cfg));
            if (app.got_subcommand(subs[1])) reps.push_back(cymh::run_compat(cfg));
            if (app.got_subcommand(subs[2])) reps.push_back(cymh::run_redef(cfg));
            if (app.got_subcommand(subs[3])) reps.push_back(cymh::run_fields(cfg));
        }
    } catch (const cymh::UsageError& e) {
        std::cerr << "algebroid-lab: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "algebroid-lab: error: " << e.what() << "\n";
        return 2;
    }

    std::string body = json ? render_json(reps, cfg.seed) : render_text(reps);
    int ecode = emit(body, output);
    if (ecode != 0) return ecode;

    for (const auto& rep : reps)
        if (!rep.pass()) return 1;
    return 0;
}
