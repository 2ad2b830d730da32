#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aircast/errors.hpp"
#include "aircast/schema.hpp"
#include "aircast/timestamp.hpp"

namespace aircast {

struct RawColumn {
    std::string name;
    std::vector<std::optional<double>> values;
};

// Raw merged observations: strictly increasing timestamps (sub-daily allowed)
// with one optional value per column and row.
struct RawTable {
    std::vector<std::int64_t> timestamps;  // epoch seconds
    std::vector<RawColumn> columns;

    std::size_t n_rows() const { return timestamps.size(); }

    bool empty() const { return timestamps.empty() && columns.empty(); }

    const RawColumn* find(std::string_view name) const {
        for (const auto& c : columns)
            if (c.name == name) return &c;
        return nullptr;
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

inline bool is_absent_cell(const std::string& cell) {
    return cell.empty() || cell == "NA" || cell == "NaN";
}

inline std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

// Parses one agency CSV export. The header must contain a `timestamp` column
// plus any subset of the schema names; unknown columns are skipped with a
// warning on `diag`. Absent cells are empty, "NA" or "NaN".
inline RawTable parse_source_csv(const std::string& path,
                                 const std::vector<VariableSchema>& schema,
                                 std::ostream& diag = std::cerr) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot read file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw data_error("empty file: " + path);
    const auto header = detail::split_csv_line(line);

    std::size_t ts_index = header.size();
    std::vector<std::size_t> cell_to_column(header.size(), header.size());
    RawTable table;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name = detail::trim(header[i]);
        if (name == "timestamp") {
            if (ts_index != header.size()) throw data_error(path + ": duplicate timestamp column");
            ts_index = i;
        } else if (find_variable(schema, name) != nullptr) {
            if (table.find(name) != nullptr)
                throw data_error(path + ": duplicate column in header: " + name);
            cell_to_column[i] = table.columns.size();
            table.columns.push_back({name, {}});
        } else {
            diag << "warning: " << path << ": ignoring unknown column '" << name << "'\n";
        }
    }
    if (ts_index == header.size()) throw data_error(path + ": missing required column 'timestamp'");

    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw data_error(path + ": row " + std::to_string(row) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        const std::int64_t ts = parse_timestamp(detail::trim(cells[ts_index]));
        if (!table.timestamps.empty() && ts <= table.timestamps.back())
            throw data_error(path + ": non-monotonic timestamp at row " + std::to_string(row));
        table.timestamps.push_back(ts);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (cell_to_column[i] == header.size()) continue;
            auto& column = table.columns[cell_to_column[i]];
            const std::string cell = detail::trim(cells[i]);
            if (detail::is_absent_cell(cell)) {
                column.values.push_back(std::nullopt);
            } else {
                char* end = nullptr;
                const double v = std::strtod(cell.c_str(), &end);
                if (end == cell.c_str() || *end != '\0')
                    throw data_error(path + ": non-numeric cell '" + cell + "' in column " +
                                     column.name + " at row " + std::to_string(row));
                column.values.push_back(v);
            }
        }
    }
    return table;
}

// Union of two tables with disjoint column sets over the union of their
// timestamps; cells with no source value stay absent.
inline RawTable merge_tables(const RawTable& a, const RawTable& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    for (const auto& c : b.columns)
        if (a.find(c.name) != nullptr) throw data_error("duplicate column: " + c.name);

    RawTable merged;
    std::set_union(a.timestamps.begin(), a.timestamps.end(), b.timestamps.begin(),
                   b.timestamps.end(), std::back_inserter(merged.timestamps));

    auto place = [&](const RawTable& src) {
        std::vector<std::size_t> row_of(src.timestamps.size());
        std::size_t j = 0;
        for (std::size_t i = 0; i < src.timestamps.size(); ++i) {
            while (merged.timestamps[j] != src.timestamps[i]) ++j;
            row_of[i] = j;
        }
        for (const auto& c : src.columns) {
            RawColumn out{c.name, std::vector<std::optional<double>>(merged.n_rows())};
            for (std::size_t i = 0; i < c.values.size(); ++i) out.values[row_of[i]] = c.values[i];
            merged.columns.push_back(std::move(out));
        }
    };
    place(a);
    place(b);
    return merged;
}

struct ColumnQuality {
    std::string name;
    double absent_fraction = 0.0;
    std::size_t out_of_range = 0;
};

struct ValidationReport {
    std::vector<std::string> missing_columns;
    std::vector<ColumnQuality> columns;
    std::vector<std::string> issues;  // empty for a complete conforming table

    bool ok() const { return issues.empty(); }
};

// Reporting only; never throws. Flags missing schema columns and physically
// impossible values (relative humidity outside [0,100], wind direction
// outside [0,360)).
inline ValidationReport validate_schema(const RawTable& t,
                                        const std::vector<VariableSchema>& schema) {
    ValidationReport report;
    for (const auto& v : schema) {
        const RawColumn* col = t.find(v.name);
        if (col == nullptr) {
            report.missing_columns.push_back(v.name);
            report.issues.push_back("missing column: " + v.name);
            continue;
        }
        ColumnQuality q;
        q.name = v.name;
        std::size_t absent = 0;
        for (const auto& cell : col->values) {
            if (!cell.has_value()) {
                ++absent;
                continue;
            }
            const double x = *cell;
            const bool bad_humidity = v.name == "relative_humidity_pct" && (x < 0.0 || x > 100.0);
            const bool bad_direction = v.name == "wind_direction_deg" && (x < 0.0 || x >= 360.0);
            if (bad_humidity || bad_direction) ++q.out_of_range;
        }
        q.absent_fraction =
            col->values.empty() ? 0.0
                                : static_cast<double>(absent) / static_cast<double>(col->values.size());
        if (q.out_of_range > 0)
            report.issues.push_back("out-of-range values in " + v.name + ": " +
                                    std::to_string(q.out_of_range));
        report.columns.push_back(q);
    }
    return report;
}

inline std::string render_validation(const ValidationReport& report) {
    std::ostringstream os;
    os << "status: " << (report.ok() ? "ok" : "issues") << "\n";
    for (const auto& issue : report.issues) os << "issue: " << issue << "\n";
    for (const auto& c : report.columns)
        os << "column " << c.name << ": absent_fraction=" << c.absent_fraction
           << " out_of_range=" << c.out_of_range << "\n";
    return os.str();
}

// Serializes with 17 significant digits so parse(write(parse(f))) is a fixed
// point for 64-bit values.
inline void write_raw_csv(const RawTable& t, std::ostream& out) {
    out << "timestamp";
    for (const auto& c : t.columns) out << "," << c.name;
    out << "\n";
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        out << format_timestamp(t.timestamps[r]);
        for (const auto& c : t.columns) {
            out << ",";
            if (c.values[r].has_value()) out << detail::format_value(*c.values[r]);
        }
        out << "\n";
    }
}

inline void write_raw_csv(const RawTable& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write file: " + path);
    write_raw_csv(t, out);
}

}  // namespace aircast
