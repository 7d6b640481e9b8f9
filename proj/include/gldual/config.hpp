#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gldual/model.hpp"

namespace gldual {

enum class Task { SolvePrimal, VerifyThm1, VerifyThm2, VerifyThm3, VerifyThm4, NaiveDualDiag, Sweep };

std::string_view to_string(Task t);
std::optional<Task> parse_task(std::string_view s);

struct Scenario {
    GridSpec grid;
    ModelParams params;  // params.f is filled from f_spec
    std::string f_spec = "const:0";
    std::string init_spec = "const:0";  // Newton start for tasks that need a critical point
    Task task = Task::SolvePrimal;
    double tol = 1e-10;
    int maxit = 200;
    std::uint64_t seed = 42;
    std::optional<double> radius;  // empty means the default ball radius
    int nsamples = 100;
    int ndirs = 5;
    int nstarts = 10;
    std::string sweep_param = "K";
    std::vector<double> sweep_values;
    std::string base_dir;  // directory that relative file: specs resolve against
};

/// Flat `key=value` lines with `#` comments. Field specs use `const:<v>`,
/// `sin:<a>` (a * prod sin(pi x_i / extent)) or `file:<path>`; relative
/// paths resolve against `base_dir`.
/// Throws ParseError (ParseError, UnknownKey or MissingRequired kinds).
Scenario parse_config(const std::string& text, const std::string& base_dir = {});

/// Reads and parses a config file. Throws IoError if it cannot be read.
Scenario load_config(const std::string& path);

/// Initial Newton guess from init_spec.
Field initial_guess(const Scenario& s, const Grid& grid);

/// Evaluates a field spec on a grid.
Field parse_field(const std::string& spec, const Grid& grid, const std::string& base_dir = {});

/// Canonical key=value echo of a scenario, in a fixed order.
std::vector<std::pair<std::string, std::string>> describe(const Scenario& s);

}  // namespace gldual
