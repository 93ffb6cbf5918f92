#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cymh/suites.hpp"

#include <algorithm>

using namespace cymh;

TEST_CASE("the example registry knows its names and rejects the rest") {
    auto names = example_names();
    CHECK(names.size() == 8);
    for (const auto& name : names) {
        ExampleInfo info = get_example(name);
        CHECK(info.name == name);
        CHECK(info.data.E != nullptr);
    }
    CHECK_THROWS_AS(get_example("so8"), UsageError);

    CHECK(get_example("octonion-s7").heavy);
    CHECK(get_example("extension").compat == false);
    CHECK(get_example("corrupted").compat);
}

TEST_CASE("the axiom suite passes on su2 and fails on the corrupted fixture") {
    SuiteConfig cfg;
    cfg.example = "su2";
    cfg.points = 10;
    SuiteReport rep = run_axioms(cfg);
    CHECK(rep.suite == "axioms");
    CHECK(rep.checks.size() == 3);
    CHECK(rep.pass());

    cfg.example = "corrupted";
    SuiteReport bad = run_axioms(cfg);
    CHECK(!bad.pass());
}

TEST_CASE("the compat suite covers the zoo and records the extra invariants") {
    SuiteConfig cfg;
    cfg.points = 4;

    for (const char* name : {"su2", "electroweak", "tangent-flat"}) {
        cfg.example = name;
        SuiteReport rep = run_compat(cfg);
        CHECK(rep.pass());
        CHECK(rep.checks.size() == 4);
    }

    cfg.example = "lab-nonclassical";
    SuiteReport lab = run_compat(cfg);
    CHECK(lab.pass());
    CHECK(lab.checks.size() == 7);
    bool found = false;
    for (const auto& c : lab.checks)
        if (c.id == "obstruction-norm") {
            found = true;
            CHECK(c.max_residual >= 0.5);
        }
    CHECK(found);

    cfg.example = "product-tn-lab";
    SuiteReport prod = run_compat(cfg);
    CHECK(prod.pass());
    CHECK(prod.checks.size() == 6);

    cfg.example = "extension";
    SuiteReport ext = run_compat(cfg);
    CHECK(ext.pass());
    CHECK(ext.checks.size() == 1);
    CHECK(ext.checks[0].id == "compat-not-applicable");

    cfg.example = "corrupted";
    CHECK(!run_compat(cfg).pass());
}

TEST_CASE("the redefinition suite passes on the canonical bundle data") {
    SuiteConfig cfg;
    cfg.example = "lab-nonclassical";
    cfg.points = 4;
    cfg.lambda_count = 2;
    SuiteReport rep = run_redef(cfg);
    CHECK(rep.pass());
    CHECK(rep.checks.size() >= 10);
    for (const auto& c : rep.checks) CHECK(c.pass);
}

TEST_CASE("the redefinition suite passes on the electroweak data") {
    SuiteConfig cfg;
    cfg.example = "electroweak";
    cfg.points = 4;
    cfg.lambda_count = 2;
    SuiteReport rep = run_redef(cfg);
    CHECK(rep.pass());
}

TEST_CASE("the field-theory suite passes on su2 and the flat tangent data") {
    SuiteConfig cfg;
    cfg.points = 3;
    for (const char* name : {"su2", "tangent-flat"}) {
        cfg.example = name;
        SuiteReport rep = run_fields(cfg);
        CHECK(rep.pass());
        CHECK(rep.checks.size() == 5);
    }

    cfg.example = "lab-nonclassical";
    SuiteReport lab = run_fields(cfg);
    CHECK(lab.pass());
    CHECK(lab.checks.size() == 6);  // includes the Bianchi record

    cfg.example = "octonion-s7";
    SuiteReport skip = run_fields(cfg);
    CHECK(skip.pass());
    CHECK(skip.checks.size() == 1);
}

TEST_CASE("suite runs are deterministic") {
    SuiteConfig cfg;
    cfg.example = "su2";
    cfg.points = 4;
    SuiteReport a = run_fields(cfg);
    SuiteReport b = run_fields(cfg);
    REQUIRE(a.checks.size() == b.checks.size());
    for (size_t k = 0; k < a.checks.size(); ++k) {
        CHECK(a.checks[k].id == b.checks[k].id);
        CHECK(a.checks[k].max_residual == b.checks[k].max_residual);
    }
}
