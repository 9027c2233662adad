#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "support.hpp"

using namespace affinor;
using Catch::Matchers::ContainsSubstring;

namespace {

const std::string kPlane = R"([manifold]
name = plane   # rotation by a right angle
dim = 2
mu = +1
domain = [-1,1] [-1,1]
metric = row("1","0") row("0","1")
affinor = row("0","-1") row("1","0")
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto at = s.find(from);
    REQUIRE(at != std::string::npos);
    return s.replace(at, from.size(), to);
}

std::string temp_path(const std::string& stem) {
    return (std::filesystem::temp_directory_path() / ("affinor_test_" + stem + ".spec")).string();
}

}  // namespace

TEST_CASE("catalog listing and lookup") {
    const auto fixtures = list_fixtures();
    REQUIRE(fixtures.size() == 9);
    CHECK(fixtures.front().name == "kaehler_r4");
    for (const auto& f : fixtures) {
        const FixtureEntry& e = get_fixture(f.name);
        CHECK(e.name == f.name);
        CHECK_FALSE(f.description.empty());
        REQUIRE(e.manifold);
        if (e.submanifold) {
            CHECK(e.submanifold->name.size() > 0);
            CHECK(e.submanifold->ambient == e.manifold);
            CHECK_FALSE(e.expected.label.empty());
        }
    }
    CHECK_THROWS_AS(get_fixture("no_such_thing"), UnknownFixture);
    CHECK_THROWS_WITH(get_fixture("no_such_thing"), "unknown fixture 'no_such_thing'");
}

TEST_CASE("catalog entries validate") {
    for (const auto& f : list_fixtures()) {
        const auto& e = get_fixture(f.name);
        INFO(f.name);
        CHECK_NOTHROW(validate_manifold(*e.manifold));
        if (e.submanifold) CHECK_NOTHROW(validate_submanifold(*e.submanifold));
    }
}

TEST_CASE("parse a minimal spec") {
    SpecDocument doc = parse_spec(kPlane);
    REQUIRE(doc.manifold);
    CHECK_FALSE(doc.submanifold);
    CHECK(doc.manifold->name == "plane");
    CHECK(doc.manifold->dim == 2);
    CHECK(doc.manifold->mu == 1);
    CHECK(affinor_at(*doc.manifold, testing_support::vec({0.1, 0.2}))(1, 0) == 1.0);
    // Comments and blank lines are ignored; '#' inside quotes is not a comment.
    CHECK(same_spec(*doc.manifold, *parse_spec("\n# header\n" + kPlane + "\n\n").manifold));
}

TEST_CASE("spec errors name the offending line") {
    CHECK_THROWS_WITH(parse_spec(replace(kPlane, "mu = +1", "mu = 2")), "line 4: mu must be -1 or +1");
    CHECK_THROWS_WITH(parse_spec(replace(kPlane, "row(\"1\",\"0\") row(\"0\",\"1\")", "row(\"1\",\"0.5\") row(\"0\",\"1\")")),
                      ContainsSubstring("metric is not symmetric"));
    CHECK_THROWS_WITH(parse_spec(replace(kPlane, "dim = 2", "dim = 3")), ContainsSubstring("line 6"));
    CHECK_THROWS_WITH(parse_spec(kPlane + "colour = red\n"), ContainsSubstring("line 8"));
    CHECK_THROWS_WITH(parse_spec(kPlane + "colour = red\n"), ContainsSubstring("colour"));
    CHECK_THROWS_WITH(parse_spec(replace(kPlane, "\"-1\"", "\"x1 +* 2\"")), ContainsSubstring("line 7"));
    CHECK_THROWS_WITH(parse_spec(replace(kPlane, "\"-1\"", "\"x1 +* 2\"")), ContainsSubstring("offset"));
    CHECK_THROWS_WITH(parse_spec(replace(kPlane, "\"-1\"", "\"x3\"")), ContainsSubstring("line 7"));
    CHECK_THROWS_WITH(parse_spec(replace(kPlane, "[manifold]", "[manifld]")), "line 1: unknown section [manifld]");
    CHECK_THROWS_WITH(parse_spec(replace(kPlane, "domain = [-1,1] [-1,1]", "domain = [1,-1] [-1,1]")),
                      ContainsSubstring("line 5"));
    CHECK_THROWS_AS(parse_spec(""), SpecError);
    CHECK_THROWS_WITH(parse_spec(replace(kPlane, "mu = +1\n", "")), ContainsSubstring("mu"));
    CHECK_THROWS_AS(load_spec("/nonexistent/dir/x.spec"), SpecError);

    // A metric that is not positive definite is caught at load time.
    CHECK_THROWS_WITH(parse_spec(replace(kPlane, "row(\"0\",\"1\")\naffinor", "row(\"0\",\"-1\")\naffinor")),
                      ContainsSubstring("positive definite"));
}

TEST_CASE("submanifold sections") {
    const std::string sub = R"([submanifold]
name = line
dim = 1
domain = [-0.5,0.5]
embedding = "u1" "0.3*u1^2"
)";
    SpecDocument doc = parse_spec(kPlane + "\n" + sub);
    REQUIRE(doc.submanifold);
    CHECK(doc.submanifold->ambient == doc.manifold);
    CHECK(doc.submanifold->embedding.size() == 2);

    // Standalone submanifold file against a separately supplied ambient.
    SpecDocument alone = parse_spec(sub, doc.manifold);
    REQUIRE(alone.submanifold);
    CHECK_FALSE(alone.manifold);
    CHECK(same_spec(*alone.submanifold, *doc.submanifold));

    CHECK_THROWS_WITH(parse_spec(sub), ContainsSubstring("needs an ambient"));
    CHECK_THROWS_WITH(parse_spec(kPlane + replace(sub, "dim = 1", "dim = 2")), ContainsSubstring("0 < n < m"));
    CHECK_THROWS_WITH(parse_spec(kPlane + replace(sub, " \"0.3*u1^2\"", "")), ContainsSubstring("2 components"));
    CHECK_THROWS_WITH(parse_spec(kPlane + replace(sub, "\"u1\"", "\"x1\"")), ContainsSubstring("line 12"));
    // Singular immersion (zero tangent) is a structural error.
    CHECK_THROWS_AS(parse_spec(kPlane + replace(replace(sub, "\"u1\"", "\"0\""), "0.3*u1^2", "0")), StructuralError);
}

TEST_CASE("export and reload reproduces every fixture") {
    for (const auto& f : list_fixtures()) {
        const auto& e = get_fixture(f.name);
        const std::string path = temp_path(f.name);
        save_spec(path, *e.manifold, e.submanifold ? &*e.submanifold : nullptr);
        SpecDocument doc = load_spec(path);
        std::remove(path.c_str());
        INFO(f.name);
        REQUIRE(doc.manifold);
        CHECK(same_spec(*doc.manifold, *e.manifold));
        CHECK(doc.submanifold.has_value() == e.submanifold.has_value());
        if (doc.submanifold) CHECK(same_spec(*doc.submanifold, *e.submanifold));
        // Evaluated values agree exactly as well.
        for (const Vec& x : sample_points(e.manifold->domain, 5, 7)) {
            CHECK(metric_at(*doc.manifold, x) == metric_at(*e.manifold, x));
            CHECK(affinor_at(*doc.manifold, x) == affinor_at(*e.manifold, x));
        }
        // Printing is a fixed point.
        CHECK(format_spec(*doc.manifold, doc.submanifold ? &*doc.submanifold : nullptr) ==
              format_spec(*e.manifold, e.submanifold ? &*e.submanifold : nullptr));
    }
}

TEST_CASE("frame_D survives a round trip") {
    SubmanifoldSpec S = testing_support::fixture_sub("flat_cr_r3_in_c2");
    S.frame_D = {{parse("1", 3, 'u'), parse("0", 3, 'u'), parse("0", 3, 'u')},
                 {parse("0", 3, 'u'), parse("1", 3, 'u'), parse("0", 3, 'u')}};
    SpecDocument doc = parse_spec(format_spec(S.M(), &S));
    REQUIRE(doc.submanifold);
    CHECK(doc.submanifold->frame_D.size() == 2);
    CHECK(format_submanifold(*doc.submanifold) == format_submanifold(S));
}
