#include <catch2/catch_amalgamated.hpp>

#include <bvcert/json_io.hpp>

#include "oracle.hpp"

#include <cstdio>
#include <string>

using bvcert::json;
using testkit::cli_result;
using testkit::data_file;
using testkit::run_cli;

namespace {

json parse(const cli_result& res) {
    return bvcert::parse_json_text(res.out, "cli output");
}

} // namespace

TEST_CASE("info summarizes a document") {
    cli_result res = run_cli({"info", data_file("s2.json")});
    REQUIRE(res.code == 0);
    json j = parse(res);
    REQUIRE(j["points"] == 2);
    REQUIRE(j["metric"] == "graph");
    REQUIRE(j["diameter"] == 1.0);
}

TEST_CASE("maximal values and radius parsing") {
    cli_result at_point =
        run_cli({"maximal", data_file("s2.json"), "--function", "u", "--R", "2", "--x", "0"});
    REQUIRE(at_point.code == 0);
    REQUIRE(parse(at_point)["value"] == 1.0);

    cli_result field = run_cli({"maximal", data_file("s2.json"), "--measure", "spike", "--R", "inf"});
    REQUIRE(field.code == 0);
    json j = parse(field);
    REQUIRE(j["values"][0] == 3.0);
    REQUIRE(j["values"][1] == 1.5);

    REQUIRE(run_cli({"maximal", data_file("s2.json"), "--function", "u", "--R", "-1"}).code == 1);
    REQUIRE(run_cli({"maximal", data_file("s2.json"), "--R", "1"}).code == 1); // nothing to maximize
    REQUIRE(run_cli({"maximal", data_file("s2.json"), "--function", "u", "--measure", "nu", "--R",
                     "1"})
                .code == 1);
    REQUIRE(run_cli({"maximal", data_file("s2.json"), "--function", "ghost", "--R", "1"}).code == 1);
}

TEST_CASE("doubling reports constants and witness") {
    cli_result res = run_cli({"doubling", data_file("s2.json")});
    REQUIRE(res.code == 0);
    json j = parse(res);
    REQUIRE(j["constant"] == 2.0);
    REQUIRE(j["dimension"] == 1.0);
    REQUIRE(j["covering"] == 2.0);
    REQUIRE(j["witness"]["radius"] == 1.0);
}

TEST_CASE("geometry finds geodesic witnesses") {
    cli_result found = run_cli({"geometry", data_file("path11.json"), "--x0", "0", "--R", "0.55",
                                "--x", "5", "--r", "0.4", "--slack", "0"});
    REQUIRE(found.code == 0);
    json j = parse(found);
    REQUIRE(j["found"] == true);
    REQUIRE(j["witness"] == 3);
    REQUIRE(j["members"] == json::array({2, 3, 4}));
    REQUIRE(j["small_ball"]["holds"] == true);

    // two points with nothing in between: no witness, exit 2
    cli_result missing = run_cli({"geometry", data_file("square4.json"), "--x0", "0", "--R", "1.2",
                                  "--x", "1", "--r", "1.0", "--slack", "0"});
    REQUIRE(missing.code == 2);
    REQUIRE(parse(missing)["found"] == false);

    // precondition violations are input errors, not failures
    REQUIRE(run_cli({"geometry", data_file("path11.json"), "--x0", "0", "--R", "0.55", "--x", "9",
                     "--r", "0.4", "--slack", "0"})
                .code == 1);
}

TEST_CASE("geometry resolves length metrics and audits dimension") {
    cli_result res = run_cli({"geometry", data_file("square4.json"), "--resolve-length"});
    REQUIRE(res.code == 0);
    json doc = parse(res);
    REQUIRE(doc["metric"]["type"] == "graph");

    cli_result audit = run_cli({"geometry", data_file("path11.json"), "--audit-dimension", "1.5"});
    REQUIRE(audit.code == 0);
    json aj = parse(audit);
    REQUIRE(aj["dimension_audit"]["s"] == 1.5);
    REQUIRE(aj["quasiconvexity"] == 1.0);
}

TEST_CASE("variation emits measures and checks gradients") {
    cli_result res = run_cli({"variation", data_file("s2.json"), "--function", "u"});
    REQUIRE(res.code == 0);
    json j = parse(res);
    REQUIRE(j["total"] == 2.0);
    REQUIRE(j["values"] == json::array({1.0, 1.0}));

    cli_result pass =
        run_cli({"variation", data_file("path3.json"), "--function", "u", "--gradient", "g"});
    REQUIRE(pass.code == 0);
    REQUIRE(parse(pass)["passed"] == true);

    cli_result fail =
        run_cli({"variation", data_file("path3.json"), "--function", "u", "--gradient", "g09"});
    REQUIRE(fail.code == 2);
    json fj = parse(fail);
    REQUIRE(fj["passed"] == false);
    REQUIRE(fj["witness"]["path"] == json::array({0, 1}));

    REQUIRE(run_cli({"variation", data_file("s2.json"), "--function", "u", "--mode", "grid"}).code ==
            1);
}

TEST_CASE("poincare sweep exit codes") {
    cli_result res = run_cli({"poincare", data_file("s2.json"), "--function", "u", "--measure",
                              "nu", "--eta", "1"});
    REQUIRE(res.code == 0);
    json j = parse(res);
    REQUIRE(j["minimal_constant"] == 2.0 / 3.0);
    REQUIRE(j["worst_index"] == 1);

    cli_result inf = run_cli({"poincare", data_file("s2.json"), "--function", "u", "--measure",
                              "zero", "--eta", "1"});
    REQUIRE(inf.code == 2);
}

TEST_CASE("pointwise checks both forms") {
    cli_result ms = run_cli({"pointwise", data_file("s2.json"), "--function", "u", "--measure",
                             "nu", "--sigma", "1"});
    REQUIRE(ms.code == 0);
    REQUIRE(parse(ms)["c0_minimal"] == 1.0);

    cli_result fail = run_cli({"pointwise", data_file("s2.json"), "--function", "u", "--measure",
                               "nu", "--sigma", "1", "--c0", "0.5"});
    REQUIRE(fail.code == 2);

    cli_result zero = run_cli({"pointwise", data_file("s2.json"), "--function", "u", "--measure",
                               "zero", "--sigma", "1"});
    REQUIRE(zero.code == 2);

    cli_result grad = run_cli({"pointwise", data_file("path3.json"), "--function", "u",
                               "--gradient", "g", "--p", "inf", "--sigma", "1"});
    REQUIRE(grad.code == 0);
    REQUIRE(parse(grad)["c0_minimal"] == 0.5);

    // the two forms are mutually exclusive and c0 belongs to the measure form
    REQUIRE(run_cli({"pointwise", data_file("s2.json"), "--function", "u", "--measure", "nu",
                     "--gradient", "flat", "--sigma", "1"})
                .code == 1);
    REQUIRE(run_cli({"pointwise", data_file("path3.json"), "--function", "u", "--gradient", "g",
                     "--sigma", "1", "--c0", "1"})
                .code == 1);
}

TEST_CASE("characterize and audit form a closed loop") {
    std::string cert_path = "cli_s2_cert.json";
    cli_result made = run_cli({"characterize", data_file("s2.json"), "--function", "u",
                               "--measure", "nu", "--sigma", "1", "--c0", "1", "--output",
                               cert_path});
    REQUIRE(made.code == 0);

    cli_result audited = run_cli({"audit", cert_path});
    REQUIRE(audited.code == 0);
    REQUIRE(parse(audited)["ok"] == true);

    // identical reruns are byte-identical
    std::string again_path = "cli_s2_cert_again.json";
    REQUIRE(run_cli({"characterize", data_file("s2.json"), "--function", "u", "--measure", "nu",
                     "--sigma", "1", "--c0", "1", "--output", again_path})
                .code == 0);
    REQUIRE(bvcert::read_text_file(cert_path) == bvcert::read_text_file(again_path));

    // a failing constant still writes the report but signals the violation
    cli_result failing = run_cli({"characterize", data_file("s2.json"), "--function", "u",
                                  "--measure", "nu", "--sigma", "1", "--c0", "0.5"});
    REQUIRE(failing.code == 2);

    SECTION("tampered value") {
        json j = bvcert::parse_json_file(cert_path);
        j["traces"][1]["a_k0"] = 2.25;
        std::string mutated = "cli_s2_cert_mutated.json";
        bvcert::write_text_file(mutated, bvcert::dump_json(j));
        cli_result res = run_cli({"audit", mutated});
        REQUIRE(res.code == 2);
        REQUIRE(parse(res)["ok"] == false);
        std::remove(mutated.c_str());
    }

    SECTION("truncated file") {
        std::string text = bvcert::read_text_file(cert_path);
        std::string broken = "cli_s2_cert_broken.json";
        bvcert::write_text_file(broken, text.substr(0, text.size() / 2));
        REQUIRE(run_cli({"audit", broken}).code == 1);
        std::remove(broken.c_str());
    }

    std::remove(cert_path.c_str());
    std::remove(again_path.c_str());
}

TEST_CASE("command level failures exit with 1") {
    REQUIRE(run_cli({"unknown-command"}).code == 1);
    REQUIRE(run_cli({"info", "no-such-file.json"}).code == 1);
    REQUIRE(run_cli({"poincare", data_file("s2.json"), "--function", "u", "--measure", "nu",
                     "--eta", "0.5"})
                .code == 1);
    cli_result help = run_cli({"--help"});
    REQUIRE(help.code == 0);
}
