// fsev: run powertrain scenarios, audit CAN logs against the rule limits and
// validate message databases.
//
// Exit codes: 0 clean, 1 usage/input error, 2 rule violations.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fsev/config.hpp"
#include "fsev/rules.hpp"
#include "fsev/scenario.hpp"
#include "fsev/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitViolation = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fsev::Error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// The msgdb path in the config is relative to the config file's directory.
fsev::MessageDb load_db_for_config(const std::string& config_path,
                                   const fsev::VehicleConfig& cfg) {
    namespace fs = std::filesystem;
    fs::path db_path{cfg.sim.msgdb_path};
    if (db_path.is_relative())
        db_path = fs::path(config_path).parent_path() / db_path;
    return fsev::load_message_db(read_file(db_path.string()));
}

int cmd_run(const std::string& scenario_path, const std::string& config_path,
            const std::string& out_dir, unsigned seed) {
    const fsev::VehicleConfig cfg = fsev::parse_config(read_file(config_path));
    const fsev::MessageDb db = load_db_for_config(config_path, cfg);
    const fsev::Scenario scn = fsev::parse_scenario(read_file(scenario_path));

    fsev::SimOptions opts;
    opts.out_dir = out_dir;
    opts.seed = seed;
    const fsev::SimReport report = fsev::run_scenario(scn, cfg, db, opts);
    std::cout << fsev::format_report_text(report);
    return report.violations.empty() ? kExitOk : kExitViolation;
}

int cmd_check_rules(const std::string& log_path, const std::string& config_path) {
    const fsev::VehicleConfig cfg = fsev::parse_config(read_file(config_path));
    const fsev::MessageDb db = load_db_for_config(config_path, cfg);
    const fsev::LogAudit audit = fsev::check_rules(read_file(log_path), db, cfg);

    if (!audit.has_data) std::cout << "warning: no accumulator data in log\n";
    std::printf("samples: %zu\n", audit.sample_count);
    std::printf("max power: %.1f W at t=%.6f (limit %.1f W)\n", audit.max_power_w,
                audit.max_power_t, cfg.control.power_cap_w);
    std::printf("max pack voltage: %.2f V at t=%.6f (limit 600 V)\n",
                audit.max_voltage_v, audit.max_voltage_t);
    for (const auto& check : audit.report.checks)
        std::printf("%s: %.1f vs limit %.1f -> %s\n", check.name.c_str(), check.value,
                    check.limit, check.pass ? "pass" : "FAIL");
    for (const auto& f : audit.failures) std::printf("%s\n", f.c_str());
    std::printf("verdict: %s\n", audit.pass() ? "pass" : "FAIL");
    return audit.pass() ? kExitOk : kExitViolation;
}

int cmd_db(const std::string& path) {
    const fsev::MessageDb db = fsev::load_message_db(read_file(path));
    std::cout << fsev::serialize_message_db(db);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Formula Student EV powertrain simulator"};
    app.require_subcommand(1);

    std::string scenario_path, config_path, out_dir = "out", log_path, db_path;
    unsigned seed = 0;

    auto* run = app.add_subcommand("run", "run a scenario and audit it");
    run->add_option("--scenario", scenario_path, "scenario file")->required();
    run->add_option("--config", config_path, "vehicle config file")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed, "noise seed (noise is an opt-in config flag)");

    auto* check = app.add_subcommand("check-rules", "audit a CAN log against the limits");
    check->add_option("--log", log_path, "can.log file")->required();
    check->add_option("--config", config_path, "vehicle config file")->required();

    auto* db = app.add_subcommand("db", "validate a message database");
    db->add_option("--validate", db_path, "message db file")->required();

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(scenario_path, config_path, out_dir, seed);
        if (check->parsed()) return cmd_check_rules(log_path, config_path);
        if (db->parsed()) return cmd_db(db_path);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInputError;
    } catch (const fsev::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
