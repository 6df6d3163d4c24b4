#include <doctest.h>

#include <filesystem>
#include <functional>

#include "fixtures.hpp"
#include "shelljudge/errors.hpp"
#include "shelljudge/pack.hpp"
#include "shelljudge/util.hpp"

using namespace shelljudge;
namespace fs = std::filesystem;

namespace {

Ec code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ContestError& e) {
        return e.code;
    }
    FAIL("expected a ContestError");
    return Ec::internal;
}

} // namespace

TEST_SUITE("pack") {

TEST_CASE("loads a well-formed pack in manifest order with defaults") {
    auto dir = fixtures::write_mini_pack(fixtures::fresh_dir("pack-ok"));
    ContestPack pack = load_pack(dir);

    CHECK(pack.config.name == "mini fixture contest");
    CHECK(pack.config.duration_min == 120);
    CHECK(pack.config.wrong_attempt_penalty_min == 10);
    CHECK(pack.config.hint_penalty_min == 15);
    CHECK(pack.config.output_limit == 1 << 20);
    REQUIRE(pack.problems.size() == 3);
    CHECK(pack.problems[0].id == "p1");
    CHECK(pack.problems[1].id == "p2");
    CHECK(pack.problems[2].id == "p3");
    CHECK(pack.problems[0].time_limit_ms == 3000); // problem.json override
    CHECK(pack.problems[0].compare == CompareMode::NewlineTolerant);
    CHECK(pack.problems[0].hints.size() == 2);
    CHECK(pack.problems[0].hints[0].index == 1);
    REQUIRE(pack.problems[0].hidden_cases.size() == 2);
    CHECK(pack.problems[0].hidden_cases[0].id == "01");
    CHECK(pack.problems[0].hidden_cases[0].argv ==
          std::vector<std::string>{"HIDDEN_ARG_p1_01"});
    fs::remove_all(dir);
}

TEST_CASE("problem without problem.json gets the documented defaults") {
    auto dir = fixtures::write_mini_pack(fixtures::fresh_dir("pack-defaults"), 1);
    fs::remove(dir / "problems/p1/problem.json");
    ContestPack pack = load_pack(dir);
    CHECK(pack.problems[0].time_limit_ms == 5000);
    CHECK(pack.problems[0].compare == CompareMode::NewlineTolerant);
    CHECK(pack.problems[0].title == "p1");
    fs::remove_all(dir);
}

TEST_CASE("missing manifest") {
    auto dir = fixtures::fresh_dir("pack-nomanifest");
    CHECK(code_of([&] { load_pack(dir); }) == Ec::missing_manifest);
    CHECK(code_of([&] { load_pack(dir / "nope"); }) == Ec::missing_manifest);
    fs::remove_all(dir);
}

TEST_CASE("malformed manifest reports field and reason") {
    auto dir = fixtures::write_mini_pack(fixtures::fresh_dir("pack-malformed"), 1);

    util::write_file(dir / "contest.json", "{not json");
    CHECK(code_of([&] { load_pack(dir); }) == Ec::malformed_manifest);

    util::write_file(dir / "contest.json", "{\"name\":\"x\",\"problem_order\":[\"p1\"]}");
    try {
        load_pack(dir);
        FAIL("expected malformed_manifest");
    } catch (const ContestError& e) {
        CHECK(e.code == Ec::malformed_manifest);
        CHECK(std::string(e.what()).find("duration_minutes") != std::string::npos);
    }

    util::write_file(dir / "contest.json",
                     "{\"name\":\"x\",\"duration_minutes\":0,\"problem_order\":[\"p1\"]}");
    CHECK(code_of([&] { load_pack(dir); }) == Ec::malformed_manifest);

    util::write_file(dir / "contest.json",
                     "{\"name\":\"x\",\"duration_minutes\":60,\"problem_order\":[]}");
    CHECK(code_of([&] { load_pack(dir); }) == Ec::malformed_manifest);

    util::write_file(dir / "contest.json",
                     "{\"name\":\"x\",\"duration_minutes\":60,\"problem_order\":[\"p1\",\"p1\"]}");
    CHECK(code_of([&] { load_pack(dir); }) == Ec::malformed_manifest);
    fs::remove_all(dir);
}

TEST_CASE("problem_order id without directory") {
    auto dir = fixtures::write_mini_pack(fixtures::fresh_dir("pack-missing-problem"), 2);
    fs::remove_all(dir / "problems/p2");
    try {
        load_pack(dir);
        FAIL("expected missing_problem");
    } catch (const ContestError& e) {
        CHECK(e.code == Ec::missing_problem);
        CHECK(std::string(e.what()).find("p2") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("empty hidden directory") {
    auto dir = fixtures::write_mini_pack(fixtures::fresh_dir("pack-nohidden"), 2);
    for (const auto& e : fs::directory_iterator(dir / "problems/p2/hidden")) fs::remove(e);
    try {
        load_pack(dir);
        FAIL("expected missing_hidden_cases");
    } catch (const ContestError& e) {
        CHECK(e.code == Ec::missing_hidden_cases);
        CHECK(std::string(e.what()).find("p2") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("hidden case lacking its .out file") {
    auto dir = fixtures::write_mini_pack(fixtures::fresh_dir("pack-noout"), 1);
    fs::remove(dir / "problems/p1/hidden/02.out");
    CHECK(code_of([&] { load_pack(dir); }) == Ec::missing_hidden_cases);
    fs::remove_all(dir);
}

TEST_CASE("hint gap") {
    auto dir = fixtures::write_mini_pack(fixtures::fresh_dir("pack-hintgap"), 1);
    fs::rename(dir / "problems/p1/hints/2.txt", dir / "problems/p1/hints/3.txt");
    try {
        load_pack(dir);
        FAIL("expected hint_gap");
    } catch (const ContestError& e) {
        CHECK(e.code == Ec::hint_gap);
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("empty statement is rejected") {
    auto dir = fixtures::write_mini_pack(fixtures::fresh_dir("pack-emptystmt"), 1);
    util::write_file(dir / "problems/p1/statement.txt", "");
    CHECK(code_of([&] { load_pack(dir); }) == Ec::malformed_pack);
    fs::remove_all(dir);
}

TEST_CASE("loading is deterministic") {
    auto dir = fixtures::write_listing1_pack(fixtures::fresh_dir("pack-det"));
    ContestPack a = load_pack(dir);
    ContestPack b = load_pack(dir);
    CHECK(a.digest == b.digest);
    CHECK(a.digest.size() == 64);
    REQUIRE(a.problems.size() == b.problems.size());
    CHECK(a.problems[0].statement == b.problems[0].statement);
    CHECK(a.problems[0].hidden_cases.size() == b.problems[0].hidden_cases.size());

    // digest moves when content moves
    util::write_file(dir / "problems/login-analysis/hints/2.txt", "edited\n");
    ContestPack c = load_pack(dir);
    CHECK(c.digest != a.digest);
    fs::remove_all(dir);
}

TEST_CASE("listing1 fixture reconstructs the published example problem") {
    auto dir = fixtures::write_listing1_pack(fixtures::fresh_dir("pack-listing1"));
    ContestPack pack = load_pack(dir);
    REQUIRE(pack.problems.size() == 1);
    const Problem& p = pack.problems[0];
    CHECK(p.hints.size() == 2);
    CHECK(p.compare == CompareMode::NewlineTolerant);
    REQUIRE(p.public_cases.size() == 1);
    CHECK(p.public_cases[0].argv ==
          std::vector<std::string>{"7", "{FILES}/intentos_acceso.txt"});
    CHECK(p.public_cases[0].expected_stdout == fixtures::kListing1PublicBlock);
    CHECK(p.hidden_cases.size() == 5);
    CHECK_FALSE(pack.shared_files.empty());
    fs::remove_all(dir);
}

TEST_CASE("tally oracle reproduces the published output block") {
    // independent tally over the synthetic log with the published counts
    std::string log = fixtures::make_lastb_log({{"root", 41},
                                                {"pi", 18},
                                                {"admin", 9},
                                                {"NL5xUDpV2xRa", 8},
                                                {"craft", 7},
                                                {"guest", 3},
                                                {"ubnt", 2},
                                                {"oracle", 1}},
                                               1001);
    CHECK(fixtures::tally_expected(log, 7) == fixtures::kListing1PublicBlock);
}

TEST_CASE("tally oracle breaks ties reverse-alphabetically") {
    std::string log =
        fixtures::make_lastb_log({{"alpha", 5}, {"beta", 5}, {"zeta", 5}, {"root", 9}}, 1);
    CHECK(fixtures::tally_expected(log, 5) == "9 root\n5 zeta\n5 beta\n5 alpha\n");
}

TEST_CASE("validate_pack: well-formed pack, no reference solutions -> empty report") {
    auto dir = fixtures::write_mini_pack(fixtures::fresh_dir("pack-validate-ok"));
    ContestPack pack = load_pack(dir);
    ValidationReport report = validate_pack(pack);
    CHECK(report.ok());
    CHECK(report.to_string() == "pack ok\n");
    fs::remove_all(dir);
}

TEST_CASE("validate_pack: correct reference confirms all hidden outputs") {
    auto dir = fixtures::write_listing1_pack(fixtures::fresh_dir("pack-validate-ref"));
    ContestPack pack = load_pack(dir);
    ValidationReport report =
        validate_pack(pack, {{"login-analysis", fixtures::listing1_reference()}});
    CHECK(report.ok());
    fs::remove_all(dir);
}

TEST_CASE("validate_pack: ascending-order reference mismatches every hidden case") {
    auto dir = fixtures::write_listing1_pack(fixtures::fresh_dir("pack-validate-bad"));
    ContestPack pack = load_pack(dir);
    ValidationReport report =
        validate_pack(pack, {{"login-analysis", fixtures::listing1_wrong_ascending()}});
    CHECK(report.findings.size() == pack.problems[0].hidden_cases.size());
    for (const auto& f : report.findings) CHECK(f.problem == "login-analysis");
    fs::remove_all(dir);
}

TEST_CASE("validate_pack flags a problem without public cases") {
    auto dir = fixtures::write_mini_pack(fixtures::fresh_dir("pack-validate-nopub"), 1);
    fs::remove_all(dir / "problems/p1/public");
    ContestPack pack = load_pack(dir);
    ValidationReport report = validate_pack(pack);
    REQUIRE(report.findings.size() == 1);
    CHECK(report.findings[0].problem == "p1");
    fs::remove_all(dir);
}

} // TEST_SUITE
