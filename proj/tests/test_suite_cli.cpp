#include <catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "support.hpp"

using namespace affinor;
using Catch::Matchers::ContainsSubstring;

namespace {

namespace fs = std::filesystem;

std::vector<std::string> ids(const std::vector<CheckReport>& rs) {
    std::vector<std::string> out;
    for (const auto& r : rs) out.push_back(r.check_id);
    return out;
}

std::vector<CheckReport> suite_of(const std::string& fixture, SuiteOptions o = {}) {
    const auto& e = get_fixture(fixture);
    return run_suite(*e.manifold, e.submanifold ? &*e.submanifold : nullptr, o);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch() {
    fs::path p = fs::temp_directory_path() / "affinor_cli_test";
    fs::create_directories(p);
    return p;
}

int run_cli(const std::string& args, const std::string& env = {}) {
    const std::string cmd = env + (env.empty() ? "" : " ") + "\"" + AFFINOR_CLI + "\" " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("suite order on a manifold without submanifold") {
    CHECK(ids(suite_of("kaehler_r4")) == std::vector<std::string>{"eq_1_1_compatibility", "def_1_1_nondegeneracy",
                                                                  "prop_1_3_fundamental_form", "eq_4_1_parallel",
                                                                  "ex_1_2_family"});
}

TEST_CASE("suite covers every check on a submanifold fixture") {
    const auto rs = suite_of("flat_cr_r3_in_c2");
    const auto got = ids(rs);
    for (const char* id : {"frames_orthonormal", "eq_1_4_duality", "h_symmetry", "totally_geodesic",
                           "def_2_1_i_D_invariant", "eq_2_6_projectors", "prop_2_5_iv_phi_structure", "cor_2_6_eq_2_8",
                           "def_2_1_classification", "thm_3_1", "thm_3_3", "eq_3_8_two_path", "prop_4_2",
                           "thm_4_4_dperp_integrable", "thm_4_6", "eq_4_10_two_path", "thm_4_8", "eq_4_14_chain",
                           "thm_4_10"})
        CHECK(std::find(got.begin(), got.end(), id) != got.end());
    for (const auto& r : rs) {
        INFO(r.check_id);
        CHECK(r.status == Status::pass);
    }
    CHECK(exit_code(rs) == kExitOk);
}

TEST_CASE("check filter selects by prefix") {
    SuiteOptions o;
    o.checks = {"thm_3_1"};
    const auto rs = suite_of("s3_in_c2", o);
    REQUIRE_FALSE(rs.empty());
    for (const auto& r : rs) CHECK(r.check_id.rfind("thm_3_1", 0) == 0);
    CHECK(rs.back().check_id == "thm_3_1");
    CHECK(rs.back().detail.rfind("verdict=none-hold", 0) == 0);

    o.checks = {"nothing_matches"};
    const auto none = suite_of("s3_in_c2", o);
    CHECK(none.empty());
    CHECK(format_json(none) == R"({"version":1,"checks":[]})");
    CHECK(exit_code(none) == kExitOk);
}

TEST_CASE("catalog expectations hold") {
    for (const auto& f : list_fixtures()) {
        const auto& e = get_fixture(f.name);
        const auto rs = suite_of(f.name);
        INFO(f.name);
        for (const auto& r : rs) CHECK(r.status != Status::mismatch);
        for (const auto& want : e.expected.checks) {
            auto it = std::find_if(rs.begin(), rs.end(), [&](const CheckReport& r) { return r.check_id == want.id; });
            INFO(want.id);
            REQUIRE(it != rs.end());
            CHECK(it->status == want.status);
            if (!want.detail.empty()) CHECK_THAT(it->detail, ContainsSubstring(want.detail));
        }
    }
}

TEST_CASE("exit codes") {
    CheckReport pass{"a", Status::pass, 0.0, 1.0, std::nullopt, ""};
    CheckReport fail = pass, ind = pass, mis = pass, amb = pass, na = pass;
    fail.status = Status::fail;
    ind.status = Status::indeterminate;
    mis.status = Status::mismatch;
    amb.status = Status::rank_ambiguous;
    na.status = Status::inapplicable;
    CHECK(exit_code({pass, na}) == kExitOk);
    CHECK(exit_code({pass, ind}) == kExitUnresolved);
    CHECK(exit_code({amb}) == kExitUnresolved);
    CHECK(exit_code({ind, fail}) == kExitFail);
    CHECK(exit_code({mis}) == kExitFail);
    CHECK(exit_code(suite_of("s3_in_c2")) == kExitFail);  // not totally geodesic
}

TEST_CASE("report formats") {
    CheckReport r{"x", Status::rank_ambiguous, 0.25, 1e-8, testing_support::vec({0.5, -1.0}), "ratio 3"};
    CHECK(format_text({r}) == "x RANK-AMBIGUOUS residual=0.25 thr=1e-08 | ratio 3\n");
    r.detail.clear();
    CHECK(format_text({r}) == "x RANK-AMBIGUOUS residual=0.25 thr=1e-08\n");
    const auto j = nlohmann::json::parse(format_json({r}));
    CHECK(j["version"] == 1);
    CHECK(j["checks"][0]["status"] == "rank-ambiguous");
    CHECK(j["checks"][0]["witness"][1] == -1.0);
    CHECK(j["checks"][0]["threshold"] == 1e-8);
    r.witness.reset();
    CHECK(nlohmann::json::parse(format_json({r}))["checks"][0]["witness"].is_null());

    ReportHeader h;
    h.fixture = "kaehler_r4";
    h.options = SuiteOptions{};
    const auto jh = nlohmann::json::parse(format_json({}, h));
    CHECK(jh["fixture"] == "kaehler_r4");
    CHECK(jh["options"]["points"] == kDefaultPoints);
    CHECK(jh["options"]["seed"] == kDefaultSeed);

    std::ostringstream out;
    emit_report({}, ReportFormat::json, out);
    CHECK(out.str() == "{\"version\":1,\"checks\":[]}\n");
}

TEST_CASE("options are validated and tolerance scales thresholds") {
    const auto& e = get_fixture("kaehler_r4");
    SuiteOptions o;
    o.points = 0;
    CHECK_THROWS_AS(run_suite(*e.manifold, nullptr, o), PreconditionError);
    o.points = 5;
    o.tol = 0.0;
    CHECK_THROWS_AS(run_suite(*e.manifold, nullptr, o), PreconditionError);
    o.tol = 10.0;
    const auto loose = run_suite(*e.manifold, nullptr, o);
    o.tol = 1.0;
    const auto base = run_suite(*e.manifold, nullptr, o);
    CHECK(loose[0].threshold == Catch::Approx(10.0 * base[0].threshold));
    CHECK(scaled(1.0) == 1.0);  // scope restored
}

TEST_CASE("reports are deterministic and thread-count independent") {
    SuiteOptions o;
    o.points = 20;
    const auto a = format_json(suite_of("s3_in_c2", o));
    const auto b = format_json(suite_of("s3_in_c2", o));
    CHECK(a == b);
    o.seed = 7;
    CHECK(format_json(suite_of("s3_in_c2", o)) != a);
}

TEST_CASE("command line interface") {
    const fs::path dir = scratch();
    const std::string spec = (dir / "s3.spec").string();
    CHECK(run_cli("list") == 0);
    REQUIRE(run_cli("export s3_in_c2 \"" + spec + "\"") == 0);
    REQUIRE(fs::exists(spec));
    CHECK(run_cli("export no_such \"" + spec + ".x\"") == 2);

    const std::string j1 = (dir / "one.json").string(), j2 = (dir / "two.json").string();
    CHECK(run_cli("verify \"" + spec + "\" --points 20 --format json -o \"" + j1 + "\"", "AFFINOR_THREADS=1") == 1);
    CHECK(run_cli("verify \"" + spec + "\" --points 20 --format json -o \"" + j2 + "\"", "AFFINOR_THREADS=3") == 1);
    const std::string r1 = slurp(j1);
    CHECK_FALSE(r1.empty());
    CHECK(r1 == slurp(j2));
    const auto parsed = nlohmann::json::parse(r1);
    CHECK(parsed["options"]["points"] == 20);
    CHECK(parsed["checks"].size() > 20);

    const std::string flat = (dir / "flat.spec").string();
    REQUIRE(run_cli("export flat_cr_r3_in_c2 \"" + flat + "\"") == 0);
    CHECK(run_cli("verify \"" + flat + "\" --points 10") == 0);
    CHECK(run_cli("verify --fixture flat_cr_r3_in_c2 --points 10 --checks thm_3,eq_3_8") == 0);
    CHECK(run_cli("verify --fixture contact_slice_r5 --points 10 --checks thm_4_6") == 0);

    // --sub attaches a submanifold file to a manifold-only spec.
    const std::string k = (dir / "k.spec").string(), sub = (dir / "sub.spec").string();
    REQUIRE(run_cli("export kaehler_r4 \"" + k + "\"") == 0);
    {
        std::ofstream out(sub);
        out << format_submanifold(*get_fixture("totally_real_plane").submanifold);
    }
    CHECK(run_cli("verify \"" + k + "\" --sub \"" + sub + "\" --points 10") == 0);

    // Input errors.
    const std::string bad = (dir / "bad.spec").string();
    {
        std::ofstream out(bad);
        out << "[manifold]\nname = x\ndim = 2\nmu = 2\ndomain = [-1,1] [-1,1]\n"
               "metric = row(\"1\",\"0\") row(\"0\",\"1\")\naffinor = row(\"0\",\"-1\") row(\"1\",\"0\")\n";
    }
    CHECK(run_cli("verify \"" + bad + "\"") == 2);
    CHECK(run_cli("verify \"" + (dir / "missing.spec").string() + "\"") == 2);
    CHECK(run_cli("verify --fixture kaehler_r4 --points -3") == 2);
    CHECK(run_cli("verify --fixture kaehler_r4 --format yaml") == 2);
    CHECK(run_cli("frobnicate") == 2);
    fs::remove_all(dir);
}
