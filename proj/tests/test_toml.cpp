#include "msg/toml.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace msg;

TEST_CASE("scalar values and comments") {
    auto tbl = toml::parse(R"(
# a comment
name = "rosenbrock"   # trailing comment
n = 2
tau = 1e-3
flag = true
neg = -4.5
)");
    CHECK(tbl.at("name").as_string() == "rosenbrock");
    CHECK(tbl.at("n").as_int() == 2);
    CHECK(tbl.at("tau").as_double() == Catch::Approx(1e-3));
    CHECK(tbl.at("flag").as_bool());
    CHECK(tbl.at("neg").as_double() == -4.5);
    CHECK(tbl.get_int("n", 7) == 2);
    CHECK(tbl.get_int("missing", 7) == 7);
}

TEST_CASE("arrays, nested and multi-line") {
    auto tbl = toml::parse(R"(
x0 = [-1.2, 1.0]
Q = [[1.0, 0.5],
     [0.5, 2.0]]
)");
    auto x0 = tbl.at("x0").as_double_array();
    REQUIRE(x0.size() == 2);
    CHECK(x0[0] == -1.2);
    CHECK(x0[1] == 1.0);

    const auto& rows = tbl.at("Q").as_array();
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].as_double_array()[0] == 0.5);
    CHECK(rows[1].as_double_array()[1] == 2.0);
}

TEST_CASE("tables and arrays of tables") {
    auto tbl = toml::parse(R"(
budget_multiplier = 1000
[h]
family = "max_quad"
[[h.selection]]
z = [0.0, 0.0]
b = 0.0
[[h.selection]]
z = [1.0, 2.0]
b = -1.5
)");
    CHECK(tbl.at("budget_multiplier").as_int() == 1000);
    const auto& h = tbl.table("h");
    CHECK(h.at("family").as_string() == "max_quad");
    const auto& sel = h.table_array("selection");
    REQUIRE(sel.size() == 2);
    CHECK(sel[1].at("b").as_double() == -1.5);
    CHECK(sel[1].at("z").as_double_array()[1] == 2.0);
}

TEST_CASE("ints promote to double, doubles do not demote") {
    auto tbl = toml::parse("a = 3\nb = 3.5\n");
    CHECK(tbl.at("a").as_double() == 3.0);
    CHECK(tbl.at("b").as_double() == 3.5);
    CHECK_THROWS_AS(tbl.at("b").as_int(), toml::ParseError);
}

TEST_CASE("malformed input raises") {
    CHECK_THROWS_AS(toml::parse("key value-without-equals"), toml::ParseError);
    CHECK_THROWS_AS(toml::parse("a = [1, 2"), toml::ParseError);
    CHECK_THROWS_AS(toml::parse("a = \"unterminated"), toml::ParseError);
    CHECK_THROWS_AS(toml::parse("a = 12x"), toml::ParseError);
    CHECK_THROWS_AS(toml::parse_file("/nonexistent/file.toml"), toml::ParseError);
}

TEST_CASE("strings with escapes") {
    auto tbl = toml::parse(R"(s = "a\"b\\c")");
    CHECK(tbl.at("s").as_string() == "a\"b\\c");
}
