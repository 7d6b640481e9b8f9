#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gldual/acceptance.hpp"
#include "gldual/config.hpp"
#include "gldual/scenario.hpp"

namespace {

int write_outputs(const gldual::Report& report, const std::string& out, const std::string& csv) {
    if (out.empty()) {
        std::cout << gldual::to_json(report);
    } else {
        gldual::emit(report, gldual::Format::Json, out);
    }
    if (!csv.empty()) gldual::emit(report, gldual::Format::Csv, csv);
    for (const auto& v : report.verdicts) {
        if (!v.pass) std::cerr << "FAIL " << v.name << " (margin " << gldual::format_double(v.margin) << ") "
                               << v.message << "\n";
    }
    return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Proximal and tensor dual verification for Ginzburg-Landau energies"};
    app.require_subcommand(1);

    std::string config_path, out_path, csv_path;
    std::optional<std::uint64_t> seed;

    auto* run = app.add_subcommand("run", "run the scenario described by a config file");
    run->add_option("config", config_path, "config file (key=value lines)")->required();
    run->add_option("--out", out_path, "write the JSON report here instead of stdout");
    run->add_option("--csv", csv_path, "write the report table as CSV");
    run->add_option("--seed", seed, "override the config seed");

    std::string sweep_param = "K";
    std::vector<double> sweep_values;
    auto* sweep = app.add_subcommand("sweep", "sweep K or eps at a fixed critical point");
    sweep->add_option("config", config_path, "config file (key=value lines)")->required();
    sweep->add_option("--param", sweep_param, "K or eps")->check(CLI::IsMember({"K", "eps"}));
    sweep->add_option("--values", sweep_values, "comma separated values")->delimiter(',')->required();
    sweep->add_option("--out", out_path, "write the JSON report here instead of stdout");
    sweep->add_option("--csv", csv_path, "write the sweep table as CSV");
    sweep->add_option("--seed", seed, "override the config seed");

    auto* check = app.add_subcommand("check", "run the built-in acceptance suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) {
            const auto results = gldual::run_acceptance(std::cout);
            for (const auto& r : results) {
                if (!r.pass) return 1;
            }
            return 0;
        }
        gldual::Scenario s = gldual::load_config(config_path);
        if (seed) s.seed = *seed;
        if (sweep->parsed()) {
            s.task = gldual::Task::Sweep;
            s.sweep_param = sweep_param;
            s.sweep_values = sweep_values;
            for (double v : sweep_values) {
                if (!(v > 0.0)) throw gldual::Error(gldual::ErrorKind::InvalidArgument, "sweep values must be positive");
            }
        }
        return write_outputs(gldual::run_scenario(s), out_path, csv_path);
    } catch (const gldual::Error& e) {
        std::cerr << "error (" << gldual::to_string(e.kind()) << "): " << e.what() << "\n";
        return 2;
    }
}
