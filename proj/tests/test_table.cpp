#include <catch2/catch.hpp>

#include <sstream>

#include "qrep/table.hpp"

using namespace qrep;

namespace {

Table sample_table() {
    Table t;
    t.columns = {"level", "value", "label"};
    auto& r1 = t.add_row();
    r1.push_back(Cell::integer(1));
    r1.push_back(Cell::real(0.5));
    r1.push_back(Cell::text("plain"));
    auto& r2 = t.add_row();
    r2.push_back(Cell::integer(-3));
    r2.push_back(Cell::null());
    r2.push_back(Cell::text("a,b \"q\""));
    return t;
}

std::string csv_of(const Table& t) {
    std::ostringstream os;
    write_csv(t, os);
    return os.str();
}

}  // namespace

TEST_CASE("csv format: 12 significant digits, empty nulls, quoting") {
    CHECK(csv_of(sample_table()) ==
          "level,value,label\n"
          "1,5.00000000000e-01,plain\n"
          "-3,,\"a,b \"\"q\"\"\"\n");
}

TEST_CASE("real formatting is fixed-width scientific") {
    CHECK(detail::format_real(1.0) == "1.00000000000e+00");
    CHECK(detail::format_real(0.09312) == "9.31200000000e-02");
    CHECK(detail::format_real(-2.5e-13) == "-2.50000000000e-13");
    CHECK(detail::format_real(12345.6789) == "1.23456789000e+04");
}

TEST_CASE("json format: meta first, fixed key order, nulls") {
    std::ostringstream os;
    write_json(sample_table(), Meta{{"tool", "qrep"}, {"n", "2"}}, os);
    CHECK(os.str() ==
          "{\n"
          "\"meta\": {\"tool\": \"qrep\", \"n\": \"2\"},\n"
          "\"columns\": [\"level\", \"value\", \"label\"],\n"
          "\"rows\": [\n"
          "[1, 5.00000000000e-01, \"plain\"],\n"
          "[-3, null, \"a,b \\\"q\\\"\"]\n"
          "]\n"
          "}\n");
}

TEST_CASE("writers reject ragged rows") {
    Table t;
    t.columns = {"a", "b"};
    t.add_row().push_back(Cell::integer(1));
    std::ostringstream os;
    CHECK_THROWS_AS(write_csv(t, os), std::invalid_argument);
    CHECK_THROWS_AS(write_json(t, {}, os), std::invalid_argument);
}

TEST_CASE("identical tables serialize to identical bytes") {
    const auto a = csv_of(sample_table());
    const auto b = csv_of(sample_table());
    CHECK(a == b);
}
