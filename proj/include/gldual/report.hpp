#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace gldual {

/// A pass/fail outcome together with the number that decided it. By
/// convention margin >= 0 means pass, so margins read as "room to spare".
struct Verdict {
    std::string name;
    bool pass = false;
    double margin = 0.0;
    std::string message;
};

using Cell = std::variant<double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
};

struct Report {
    std::vector<std::pair<std::string, std::string>> scenario;
    std::vector<std::pair<std::string, double>> scalars;
    std::vector<std::pair<std::string, std::string>> labels;
    std::vector<Verdict> verdicts;
    Table table;

    void scalar(std::string key, double value) { scalars.emplace_back(std::move(key), value); }
    void label(std::string key, std::string value) { labels.emplace_back(std::move(key), std::move(value)); }
    /// Records a verdict that passes when margin >= 0.
    void check(std::string name, double margin, std::string message = {});
    void fail(std::string name, std::string message);

    bool all_pass() const;
};

enum class Format { Csv, Json };

/// 17 significant digits; non-finite values become "null".
std::string format_double(double v);

std::string to_json(const Report& report);
/// Header row then one row per table entry, RFC 4180 quoting.
std::string to_csv(const Table& table);

/// Writes the report (JSON) or its table (CSV). Throws IoError.
void emit(const Report& report, Format format, const std::string& path);

}  // namespace gldual
