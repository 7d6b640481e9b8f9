#include "gldual/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gldual/errors.hpp"

namespace gldual {

namespace {

std::string json_string(const std::string& s) {
    std::string out = "\"";
    for (const char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(c));
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out + "\"";
}

std::string json_cell(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) return format_double(*d);
    return json_string(std::get<std::string>(c));
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

template <class Pairs, class F>
void json_object(std::ostringstream& os, const Pairs& pairs, F value) {
    os << "{";
    bool first = true;
    for (const auto& [k, v] : pairs) {
        os << (first ? "" : ",") << "\n    " << json_string(k) << ": " << value(v);
        first = false;
    }
    os << (first ? "}" : "\n  }");
}

}  // namespace

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
        throw Error(ErrorKind::DimensionMismatch, "table row has " + std::to_string(row.size()) +
                                                      " cells, expected " + std::to_string(columns.size()));
    }
    rows.push_back(std::move(row));
}

void Report::check(std::string name, double margin, std::string message) {
    verdicts.push_back({std::move(name), margin >= 0.0, margin, std::move(message)});
}

void Report::fail(std::string name, std::string message) {
    verdicts.push_back({std::move(name), false, -INFINITY, std::move(message)});
}

bool Report::all_pass() const {
    for (const Verdict& v : verdicts) {
        if (!v.pass) return false;
    }
    return true;
}

std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string to_json(const Report& report) {
    std::ostringstream os;
    os << "{\n  \"scenario\": ";
    json_object(os, report.scenario, json_string);
    os << ",\n  \"scalars\": ";
    json_object(os, report.scalars, format_double);
    os << ",\n  \"labels\": ";
    json_object(os, report.labels, json_string);
    os << ",\n  \"verdicts\": [";
    for (std::size_t i = 0; i < report.verdicts.size(); ++i) {
        const Verdict& v = report.verdicts[i];
        os << (i ? "," : "") << "\n    {\"name\": " << json_string(v.name)
           << ", \"pass\": " << (v.pass ? "true" : "false") << ", \"margin\": " << format_double(v.margin)
           << ", \"message\": " << json_string(v.message) << "}";
    }
    os << (report.verdicts.empty() ? "]" : "\n  ]");
    os << ",\n  \"table\": {\"columns\": [";
    for (std::size_t i = 0; i < report.table.columns.size(); ++i) {
        os << (i ? ", " : "") << json_string(report.table.columns[i]);
    }
    os << "], \"rows\": [";
    for (std::size_t r = 0; r < report.table.rows.size(); ++r) {
        os << (r ? "," : "") << "\n    [";
        const auto& row = report.table.rows[r];
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? ", " : "") << json_cell(row[c]);
        os << "]";
    }
    os << (report.table.rows.empty() ? "]}" : "\n  ]}");
    os << ",\n  \"status\": " << json_string(report.all_pass() ? "pass" : "fail") << "\n}\n";
    return os.str();
}

std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out += (i ? "," : "") + csv_field(table.columns[i]);
    }
    out += "\r\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            const Cell& c = row[i];
            out += i ? "," : "";
            out += std::holds_alternative<double>(c) ? format_double(std::get<double>(c))
                                                     : csv_field(std::get<std::string>(c));
        }
        out += "\r\n";
    }
    return out;
}

void emit(const Report& report, Format format, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
    out << (format == Format::Json ? to_json(report) : to_csv(report.table));
    out.flush();
    if (!out) throw Error(ErrorKind::IoError, "write to " + path + " failed");
}

}  // namespace gldual
