#pragma once

// Reusable verification suites over the example zoo, shared by the CLI and
// the acceptance runner: axiom checks, compatibility reports, the full
// field-redefinition invariant battery, and the field-theory flow checks.

#include "cymh/fields.hpp"
#include "cymh/octonion.hpp"

namespace cymh {

/// A registered example: gauge data plus flags for which suites apply.
struct ExampleInfo {
    std::string name;
    GaugeData data;
    bool compat = false;  // data satisfies the full compatibility conditions
    bool redef = false;   // included in the redefinition suite
    bool fields = false;  // included in the field-theory suite
    bool heavy = false;   // high-rank: reduced point budgets, compactified
};

/// Names accepted by get_example, in registry order ("corrupted" is a
/// deliberate negative fixture and is excluded from run_everything).
std::vector<std::string> example_names();
/// Throws UsageError for unknown names.
ExampleInfo get_example(const std::string& name);

struct CheckRecord {
    std::string id;
    std::string ref;  // descriptive label of the verified identity
    int points = 0;
    double max_residual = 0.0;
    double tol = 0.0;
    bool pass = false;
    std::string note;  // e.g. "lower bound" or a skip warning
};

struct SuiteReport {
    std::string suite;
    std::string example;
    unsigned seed = 0;
    std::vector<CheckRecord> checks;
    bool pass() const;
};

struct SuiteConfig {
    std::string example = "su2";
    unsigned seed = 7;
    int points = 20;
    double tol = 0.0;  // 0 keeps the per-check pinned tolerances
    std::vector<double> dts = {1e-2, 1e-3, 1e-4};
    unsigned lambda_seed = 101;
    int lambda_count = 5;
};

SuiteReport run_axioms(const SuiteConfig& cfg);
SuiteReport run_compat(const SuiteConfig& cfg);
SuiteReport run_redef(const SuiteConfig& cfg);
SuiteReport run_fields(const SuiteConfig& cfg);

/// Every applicable suite on every registered example (cfg.example ignored).
std::vector<SuiteReport> run_everything(const SuiteConfig& cfg);

/// Parallelism cap: hardware concurrency clamped by ALGEBROID_LAB_THREADS.
int thread_budget();

/// Deterministic field configuration for an example: phi maps the spacetime
/// sample region into the interior of the base chart, off-centre so that
/// metrics that degenerate at the origin stay regular.
FieldConfig suite_field_config(const AlgebroidPtr& E, int d, unsigned seed);

}  // namespace cymh
