#include <doctest.h>

#include "pparab/config.hpp"
#include "pparab/errors.hpp"

using namespace pparab;
using namespace pparab::config;

TEST_CASE("config parsing") {
    const char* text = R"(
# scenario smoke file
schema_version = 1
[scenario]
name = "smoke"   # trailing comment
output_dir = "out/smoke"
[problem]
p = 4.0
n_cells = 64
t_end = 1e-3
[analyses]
waterfall = true
levels = [0.02, 0.05, 0.1]
)";
    const Document doc = parse_string(text, "test");
    CHECK(doc.integer("", "schema_version") == 1);
    CHECK(doc.text("scenario", "name") == "smoke");
    CHECK(doc.text("scenario", "output_dir") == "out/smoke");
    CHECK(doc.number("problem", "p") == 4.0);
    CHECK(doc.integer("problem", "n_cells") == 64);
    CHECK(doc.number("problem", "t_end") == 1e-3);
    CHECK(doc.boolean_or("analyses", "waterfall", false));
    CHECK(doc.boolean_or("analyses", "missing", true));
    const auto levels = doc.array("analyses", "levels");
    REQUIRE(levels.size() == 3);
    CHECK(levels[1] == 0.05);
    CHECK(doc.number_or("problem", "absent", 7.5) == 7.5);
    CHECK_FALSE(doc.has("problem", "absent"));
}

TEST_CASE("config parse errors") {
    CHECK_THROWS_AS(parse_string("novalue\n", "t"), ConfigError);
    CHECK_THROWS_AS(parse_string("x = \"unterminated\n", "t"), ConfigError);
    CHECK_THROWS_AS(parse_string("x = 12abc\n", "t"), ConfigError);
    CHECK_THROWS_AS(parse_string("[sec\nx = 1\n", "t"), ConfigError);
    CHECK_THROWS_AS(parse_string("x = [1, , 2]\n", "t"), ConfigError);
    CHECK_THROWS_AS(parse_string("x = [1, 2\n", "t"), ConfigError);
    CHECK_THROWS_AS(parse_file("/nonexistent/definitely_missing.toml"), ConfigError);
    // wrong-kind access
    const Document doc = parse_string("x = 1.5\ns = \"v\"\n", "t");
    CHECK_THROWS_AS(doc.text("", "x"), ConfigError);
    CHECK_THROWS_AS(doc.number("", "s"), ConfigError);
    CHECK_THROWS_AS(doc.integer("", "x"), ConfigError);
    CHECK_THROWS_AS(doc.number("", "missing"), ConfigError);
}

TEST_CASE("config overrides") {
    Document doc = parse_string("[problem]\np = 4.0\n", "t");
    apply_override(doc, "problem.p=3.5");
    CHECK(doc.number("problem", "p") == 3.5);
    apply_override(doc, "problem.initial=\"barenblatt\"");
    CHECK(doc.text("problem", "initial") == "barenblatt");
    apply_override(doc, "analyses.levels=[0.1,0.2]");
    CHECK(doc.array("analyses", "levels").size() == 2);
    apply_override(doc, "schema_version=1");
    CHECK(doc.integer("", "schema_version") == 1);
    CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, ".key=1"), ConfigError);
}

TEST_CASE("canonical serialization is order independent") {
    const Document a = parse_string("[b]\ny = 2\nx = 1\n[a]\nz = \"s\"\n", "t");
    const Document b = parse_string("[a]\nz = \"s\"\n[b]\nx = 1\ny = 2\n", "t");
    CHECK(canonical_serialize(a) == canonical_serialize(b));
    const Document c = parse_string("[b]\ny = 3\nx = 1\n[a]\nz = \"s\"\n", "t");
    CHECK(canonical_serialize(a) != canonical_serialize(c));
}

TEST_CASE("scalar promotes to a one-element array") {
    const Document doc = parse_string("[s]\nv = 0.25\n", "t");
    const auto arr = doc.array("s", "v");
    REQUIRE(arr.size() == 1);
    CHECK(arr[0] == 0.25);
}
