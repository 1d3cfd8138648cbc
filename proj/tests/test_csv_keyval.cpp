#include "doctest.h"

#include <cmath>
#include <sstream>

#include "stratrand/csv.hpp"
#include "stratrand/errors.hpp"
#include "stratrand/keyval.hpp"

using namespace stratrand;
using doctest::Contains;

TEST_CASE("csv parses quoting, escapes and embedded breaks") {
    std::istringstream in(
        "name,note,x\r\n"
        "plain,hello,1\n"
        "\"comma, inside\",\"say \"\"hi\"\"\",2\r\n"
        "\"multi\nline\",trail ,3\n");
    const auto t = csv_read(in, "demo");
    REQUIRE(t.header == std::vector<std::string>{"name", "note", "x"});
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[0] == std::vector<std::string>{"plain", "hello", "1"});
    CHECK(t.rows[1][0] == "comma, inside");
    CHECK(t.rows[1][1] == "say \"hi\"");
    CHECK(t.rows[2][0] == "multi\nline");
    CHECK(t.rows[2][1] == "trail ");   // unquoted spaces are preserved

    CHECK(t.column("note") == 1);
    CHECK(t.column("absent") == -1);
    CHECK(t.require_column("x") == 2);
    CHECK_THROWS_WITH_AS((void)t.require_column("arm"), Contains("arm"), DataError);
}

TEST_CASE("csv round-trips through write and read") {
    CsvTable t;
    t.header = {"a", "b"};
    t.rows = {{"1,5", "two\nlines"}, {"quote\"mid", ""}, {" pad ", "z"}};
    std::ostringstream out;
    csv_write(out, t);
    std::istringstream back(out.str());
    const auto r = csv_read(back, "round-trip");
    CHECK(r.header == t.header);
    CHECK(r.rows == t.rows);
}

TEST_CASE("csv rejects ragged rows with their position") {
    std::istringstream in("a,b\n1,2\n3\n");
    CHECK_THROWS_WITH_AS((void)csv_read(in, "ragged"), Contains("row 3"), DataError);
    std::istringstream wide("a,b\n1,2,3\n");
    CHECK_THROWS_AS((void)csv_read(wide, "ragged"), DataError);
    std::istringstream empty("");
    CHECK_THROWS_AS((void)csv_read(empty, "empty"), DataError);
}

TEST_CASE("numeric rendering") {
    CHECK(fmt_g17(0.1) == "0.10000000000000001");
    CHECK(fmt_g17(1.0) == "1");
    const double v = 0.123456789012345678;
    CHECK(std::stod(fmt_g17(v)) == v);   // bit-exact round trip
    CHECK(fmt_fixed(1.23456, 4) == "1.2346");
    CHECK(fmt_fixed(-0.5, 2) == "-0.50");
    CHECK(fmt_fixed(std::nan(""), 4) == "--");
}

TEST_CASE("keyval parsing and overrides") {
    const auto kv = KeyVal::from_text(
        "# comment line\n"
        "case = I\n"
        "reps= 2000   # trailing comment\n"
        "\n"
        "  workers =8\n"
        "flag = true\n"
        "seed = 18446744073709551615\n"
        "ratio = 1:2:2\n"
        "list = a, b ,c\n",
        "demo");
    CHECK(kv.require("case") == "I");
    CHECK(kv.get_int("reps", 0) == 2000);
    CHECK(kv.get_int("workers", 0) == 8);
    CHECK(kv.get_bool("flag", false));
    CHECK(kv.get_u64("seed", 0) == 18446744073709551615ULL);
    CHECK(kv.get("ratio") == "1:2:2");
    CHECK(kv.get_list("list") == std::vector<std::string>{"a", "b", "c"});
    CHECK(kv.get("missing", "dflt") == "dflt");
    CHECK(kv.get_double("missing", 2.5) == 2.5);
    CHECK(kv.get_list("missing").empty());

    KeyVal over = kv;
    over.set("reps", "5");
    CHECK(over.get_int("reps", 0) == 5);

    CHECK_THROWS_WITH_AS((void)kv.require("absent"), Contains("absent"), ConfigError);
    CHECK_THROWS_WITH_AS((void)kv.get_int("case", 0), Contains("case"), ConfigError);
    CHECK_THROWS_AS((void)kv.get_bool("ratio", false), ConfigError);
    CHECK_THROWS_AS((void)kv.require_list("absent"), ConfigError);
}

TEST_CASE("keyval flags malformed lines with their number") {
    CHECK_THROWS_WITH_AS((void)KeyVal::from_text("a = 1\nbroken line\n", "bad"),
                         Contains("line 2"), ConfigError);
    CHECK_THROWS_AS((void)KeyVal::from_text("= novalue\n", "bad"), ConfigError);
    // repeated keys follow last-wins file semantics
    const auto dup = KeyVal::from_text("dup = 1\ndup = 2\n", "bad");
    CHECK(dup.get_int("dup", 0) == 2);
}

TEST_CASE("keyval tracks unread keys") {
    const auto kv = KeyVal::from_text("used = 1\nmistyped = 2\n", "demo");
    (void)kv.get_int("used", 0);
    const auto unused = kv.unused_keys();
    REQUIRE(unused.size() == 1);
    CHECK(unused[0] == "mistyped");
}

TEST_CASE("trim") {
    CHECK(trim("  x y\t") == "x y");
    CHECK(trim("\r\n") == "");
    CHECK(trim("z") == "z");
}
