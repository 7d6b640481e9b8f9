#include "gldual/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "gldual/report.hpp"

namespace gldual {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& s, int line, const std::string& key) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ParseError(ErrorKind::ParseError, line, "bad number for " + key + ": '" + s + "'");
    }
    return v;
}

long long parse_integer(const std::string& s, int line, const std::string& key) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError(ErrorKind::ParseError, line, "bad integer for " + key + ": '" + s + "'");
    }
    return v;
}

void require_positive(double v, int line, const std::string& key) {
    if (!(v > 0.0)) throw ParseError(ErrorKind::ParseError, line, key + " must be positive");
}

bool valid_field_spec(const std::string& s) {
    return s.starts_with("const:") || s.starts_with("sin:") || s.starts_with("file:");
}

}  // namespace

std::string_view to_string(Task t) {
    switch (t) {
        case Task::SolvePrimal: return "solve-primal";
        case Task::VerifyThm1: return "verify-thm1";
        case Task::VerifyThm2: return "verify-thm2";
        case Task::VerifyThm3: return "verify-thm3";
        case Task::VerifyThm4: return "verify-thm4";
        case Task::NaiveDualDiag: return "naive-dual-diag";
        case Task::Sweep: return "sweep";
    }
    return "unknown";
}

std::optional<Task> parse_task(std::string_view s) {
    for (Task t : {Task::SolvePrimal, Task::VerifyThm1, Task::VerifyThm2, Task::VerifyThm3, Task::VerifyThm4,
                   Task::NaiveDualDiag, Task::Sweep}) {
        if (to_string(t) == s) return t;
    }
    return std::nullopt;
}

Scenario parse_config(const std::string& text, const std::string& base_dir) {
    Scenario s;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string content = trim(raw);
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos) {
            throw ParseError(ErrorKind::ParseError, line, "expected key=value, got '" + content + "'");
        }
        const std::string key = trim(std::string_view(content).substr(0, eq));
        const std::string value = trim(std::string_view(content).substr(eq + 1));
        if (key.empty() || value.empty()) throw ParseError(ErrorKind::ParseError, line, "empty key or value");
        if (!seen.insert(key).second) throw ParseError(ErrorKind::ParseError, line, "duplicate key " + key);

        if (key == "dim") {
            s.grid.dimension = static_cast<int>(parse_integer(value, line, key));
            if (s.grid.dimension < 1 || s.grid.dimension > 3) {
                throw ParseError(ErrorKind::ParseError, line, "dim must be 1, 2 or 3");
            }
        } else if (key == "extent") {
            s.grid.extent = parse_number(value, line, key);
            require_positive(s.grid.extent, line, key);
        } else if (key == "nodes") {
            s.grid.nodes_per_axis = static_cast<int>(parse_integer(value, line, key));
            require_positive(s.grid.nodes_per_axis, line, key);
        } else if (key == "gamma" || key == "alpha" || key == "beta" || key == "K" || key == "eps" ||
                   key == "K12") {
            const double v = parse_number(value, line, key);
            require_positive(v, line, key);
            double& slot = key == "gamma"  ? s.params.gamma
                           : key == "alpha" ? s.params.alpha
                           : key == "beta"  ? s.params.beta
                           : key == "K"     ? s.params.K
                           : key == "eps"   ? s.params.eps
                                            : s.params.K12;
            slot = v;
        } else if (key == "f" || key == "init") {
            if (!valid_field_spec(value)) {
                throw ParseError(ErrorKind::ParseError, line, "field spec must be const:, sin: or file:");
            }
            (key == "f" ? s.f_spec : s.init_spec) = value;
        } else if (key == "task") {
            const auto t = parse_task(value);
            if (!t) throw ParseError(ErrorKind::UnknownKey, line, "unknown task '" + value + "'");
            s.task = *t;
        } else if (key == "tol") {
            s.tol = parse_number(value, line, key);
            require_positive(s.tol, line, key);
        } else if (key == "maxit" || key == "nsamples" || key == "ndirs" || key == "nstarts") {
            const long long v = parse_integer(value, line, key);
            require_positive(static_cast<double>(v), line, key);
            (key == "maxit" ? s.maxit : key == "nsamples" ? s.nsamples : key == "ndirs" ? s.ndirs : s.nstarts) =
                static_cast<int>(v);
        } else if (key == "seed") {
            const long long v = parse_integer(value, line, key);
            if (v < 0) throw ParseError(ErrorKind::ParseError, line, "seed must be non-negative");
            s.seed = static_cast<std::uint64_t>(v);
        } else if (key == "radius") {
            if (value == "auto") {
                s.radius.reset();
            } else {
                s.radius = parse_number(value, line, key);
                require_positive(*s.radius, line, key);
            }
        } else if (key == "sweep_param") {
            if (value != "K" && value != "eps") {
                throw ParseError(ErrorKind::ParseError, line, "sweep_param must be K or eps");
            }
            s.sweep_param = value;
        } else if (key == "sweep_values") {
            std::istringstream items(value);
            std::string item;
            while (std::getline(items, item, ',')) {
                const double v = parse_number(trim(item), line, key);
                require_positive(v, line, key);
                s.sweep_values.push_back(v);
            }
        } else {
            throw ParseError(ErrorKind::UnknownKey, line, "unknown key '" + key + "'");
        }
    }
    for (const char* key : {"gamma", "alpha", "beta"}) {
        if (!seen.contains(key)) {
            throw ParseError(ErrorKind::MissingRequired, line, std::string("missing required key ") + key);
        }
    }
    if (s.task == Task::Sweep && s.sweep_values.empty()) {
        throw ParseError(ErrorKind::MissingRequired, line, "sweep task needs sweep_values");
    }
    s.base_dir = base_dir;
    const Grid grid = build_grid(s.grid);
    try {
        s.params.f = parse_field(s.f_spec, grid, base_dir);
        initial_guess(s, grid);
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(e.kind(), line, e.what());
    }
    return s;
}

Scenario load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot read config " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), std::filesystem::path(path).parent_path().string());
}

Field initial_guess(const Scenario& s, const Grid& grid) {
    return parse_field(s.init_spec, grid, s.base_dir);
}

Field parse_field(const std::string& spec, const Grid& grid, const std::string& base_dir) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
    if (kind == "const") return grid.constant(parse_number(arg, 0, "const"));
    if (kind == "sin") {
        const double a = parse_number(arg, 0, "sin");
        Field out(grid.node_count(), a);
        for (std::size_t i = 0; i < out.size(); ++i) {
            for (int ax = 0; ax < grid.dimension(); ++ax) {
                out[i] *= std::sin(std::numbers::pi * grid.coordinate(i, ax) / grid.spec().extent);
            }
        }
        return out;
    }
    if (kind == "file") {
        std::filesystem::path p(arg);
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        std::ifstream in(p);
        if (!in) throw Error(ErrorKind::IoError, "cannot read field file " + p.string());
        std::vector<double> values;
        std::string row;
        int line = 0;
        while (std::getline(in, row)) {
            ++line;
            const std::string v = trim(row);
            if (!v.empty()) values.push_back(parse_number(v, line, p.string()));
        }
        if (values.size() != grid.node_count()) {
            throw Error(ErrorKind::DimensionMismatch, "field file " + p.string() + " has " +
                                                          std::to_string(values.size()) + " values, grid has " +
                                                          std::to_string(grid.node_count()));
        }
        return Field(std::move(values));
    }
    throw ParseError(ErrorKind::ParseError, 0, "unknown field spec '" + spec + "'");
}

std::vector<std::pair<std::string, std::string>> describe(const Scenario& s) {
    std::vector<std::pair<std::string, std::string>> out = {
        {"task", std::string(to_string(s.task))},
        {"dim", std::to_string(s.grid.dimension)},
        {"extent", format_double(s.grid.extent)},
        {"nodes", std::to_string(s.grid.nodes_per_axis)},
        {"gamma", format_double(s.params.gamma)},
        {"alpha", format_double(s.params.alpha)},
        {"beta", format_double(s.params.beta)},
        {"K", format_double(s.params.K)},
        {"eps", format_double(s.params.eps)},
        {"K12", format_double(s.params.K12)},
        {"f", s.f_spec},
        {"init", s.init_spec},
        {"tol", format_double(s.tol)},
        {"maxit", std::to_string(s.maxit)},
        {"seed", std::to_string(s.seed)},
        {"radius", s.radius ? format_double(*s.radius) : "auto"},
        {"nsamples", std::to_string(s.nsamples)},
        {"ndirs", std::to_string(s.ndirs)},
        {"nstarts", std::to_string(s.nstarts)},
    };
    if (s.task == Task::Sweep) {
        std::string values;
        for (std::size_t i = 0; i < s.sweep_values.size(); ++i) {
            values += (i ? "," : "") + format_double(s.sweep_values[i]);
        }
        out.emplace_back("sweep_param", s.sweep_param);
        out.emplace_back("sweep_values", values);
    }
    return out;
}

}  // namespace gldual
