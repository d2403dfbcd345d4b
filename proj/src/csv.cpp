#include "shiftlab/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "shiftlab/errors.hpp"

namespace shiftlab {

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

namespace {

// One CSV record, honoring quoted fields (which may span lines).
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int c;
    while ((c = in.get()) != EOF) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field += '"';
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line_no;
                field += static_cast<char>(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            // swallow; handled with the following newline if any
        } else if (c == '\n') {
            ++line_no;
            fields.push_back(std::move(field));
            return true;
        } else {
            field += static_cast<char>(c);
        }
    }
    if (in_quotes) {
        throw validation_error("ParseError",
                               "line " + std::to_string(line_no) + ": unterminated quote");
    }
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

}  // namespace

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw validation_error("ParseError", "cannot open '" + path + "'");
    }
    CsvTable table;
    std::size_t line_no = 1;
    std::vector<std::string> fields;
    if (!read_record(in, fields, line_no)) {
        throw validation_error("ParseError", "'" + path + "' is empty");
    }
    table.header = fields;
    while (read_record(in, fields, line_no)) {
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank trailing line
        table.rows.push_back(fields);
    }
    return table;
}

void write_csv_file(const std::string& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw validation_error("ParseError", "cannot write '" + path + "'");
    }
    auto write_row = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << csv_escape(row[i]);
        }
        out << '\n';
    };
    write_row(table.header);
    for (const auto& row : table.rows) write_row(row);
}

SampleSet load_dataset(const std::string& path) {
    const CsvTable table = read_csv_file(path);
    const std::vector<std::string> expected{"period", "x", "y1", "y2"};
    if (table.header != expected) {
        throw validation_error("SchemaViolation",
                               "'" + path + "' must start with header period,x,y1,y2");
    }
    SampleSet out;
    out.rows.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const std::size_t line = i + 2;  // header is line 1
        const auto& row = table.rows[i];
        if (row.size() != 4) {
            throw validation_error("ParseError",
                                   "line " + std::to_string(line) + ": expected 4 fields");
        }
        int period = 0;
        const auto& ps = row[0];
        auto [ptr, ec] = std::from_chars(ps.data(), ps.data() + ps.size(), period);
        if (ec != std::errc{} || ptr != ps.data() + ps.size()) {
            throw validation_error("ParseError",
                                   "line " + std::to_string(line) + ": bad period '" + ps + "'");
        }
        if (period > 0) {
            throw validation_error("SchemaViolation",
                                   "line " + std::to_string(line) + ": period must be <= 0");
        }
        const bool want_y1 = period <= -1;
        const bool want_y2 = period <= -2;
        if (row[2].empty() == want_y1) {
            throw validation_error("SchemaViolation",
                                   "line " + std::to_string(line) + ": y1 must be " +
                                       (want_y1 ? "present" : "empty") + " in period " + ps);
        }
        if (row[3].empty() == want_y2) {
            throw validation_error("SchemaViolation",
                                   "line " + std::to_string(line) + ": y2 must be " +
                                       (want_y2 ? "present" : "empty") + " in period " + ps);
        }
        SampleRow r;
        r.period = period;
        r.x = row[1];
        if (!row[2].empty()) r.y1 = row[2];
        if (!row[3].empty()) r.y2 = row[3];
        out.rows.push_back(std::move(r));
    }
    return out;
}

void save_dataset(const SampleSet& samples, const std::string& path) {
    CsvTable table;
    table.header = {"period", "x", "y1", "y2"};
    table.rows.reserve(samples.rows.size());
    for (const auto& r : samples.rows) {
        table.rows.push_back({std::to_string(r.period), r.x, r.y1.value_or(""),
                              r.y2.value_or("")});
    }
    write_csv_file(path, table);
}

}  // namespace shiftlab
