#pragma once

// Tabular output shared by the sweep functions and the CLI.
//
// Both writers are byte-deterministic: reals are always printed as fixed
// scientific notation with 12 significant digits, integers in plain decimal,
// JSON keys in insertion order.  CSV uses a header row, ',' delimiter, '.'
// decimal point and empty fields for nulls; JSON is one object with "meta",
// "columns" and "rows".

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qrep {

struct Cell {
    enum class Kind { null, integer, real, text };

    Kind kind = Kind::null;
    std::int64_t i = 0;
    double d = 0.0;
    std::string s;

    static Cell null() { return Cell{}; }
    static Cell integer(std::int64_t v) { return Cell{Kind::integer, v, 0.0, {}}; }
    static Cell real(double v) { return Cell{Kind::real, 0, v, {}}; }
    static Cell text(std::string v) { return Cell{Kind::text, 0, 0.0, std::move(v)}; }
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    std::vector<Cell>& add_row() {
        rows.emplace_back();
        rows.back().reserve(columns.size());
        return rows.back();
    }
};

/// Resolved configuration echoed into JSON output; insertion order is kept.
using Meta = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.11e", v);
    return buf;
}

inline std::string escape_json(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

inline std::string escape_csv(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace detail

inline void write_csv(const Table& table, std::ostream& os) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) os << ',';
        os << detail::escape_csv(table.columns[c]);
    }
    os << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size())
            throw std::invalid_argument("write_csv: row width does not match header");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) os << ',';
            switch (row[c].kind) {
                case Cell::Kind::null: break;
                case Cell::Kind::integer: os << row[c].i; break;
                case Cell::Kind::real: os << detail::format_real(row[c].d); break;
                case Cell::Kind::text: os << detail::escape_csv(row[c].s); break;
            }
        }
        os << '\n';
    }
}

inline void write_json(const Table& table, const Meta& meta, std::ostream& os) {
    os << "{\n\"meta\": {";
    for (std::size_t i = 0; i < meta.size(); ++i) {
        if (i) os << ", ";
        os << '"' << detail::escape_json(meta[i].first) << "\": \""
           << detail::escape_json(meta[i].second) << '"';
    }
    os << "},\n\"columns\": [";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) os << ", ";
        os << '"' << detail::escape_json(table.columns[c]) << '"';
    }
    os << "],\n\"rows\": [";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != table.columns.size())
            throw std::invalid_argument("write_json: row width does not match header");
        os << (r ? ",\n" : "\n") << '[';
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) os << ", ";
            switch (row[c].kind) {
                case Cell::Kind::null: os << "null"; break;
                case Cell::Kind::integer: os << row[c].i; break;
                case Cell::Kind::real: os << detail::format_real(row[c].d); break;
                case Cell::Kind::text:
                    os << '"' << detail::escape_json(row[c].s) << '"';
                    break;
            }
        }
        os << ']';
    }
    os << "\n]\n}\n";
}

}  // namespace qrep
