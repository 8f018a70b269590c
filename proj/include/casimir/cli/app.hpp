#ifndef CASIMIR_CLI_APP_HPP
#define CASIMIR_CLI_APP_HPP

// Command-line entry point: `casimir_cli <command> [table] [flags]`.
// Flags override keys read from --config.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "casimir/cli/run.hpp"

namespace casimir::cli {

/// Runs the command line; returns the process exit status.
inline int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Casimir interaction energies of spheres, mirrors and 1D scatterers"};
    std::string command;
    std::string table;
    std::string config_path;
    std::string format;
    std::string out_path;
    std::optional<int> l0;
    std::optional<int> nodes;
    std::optional<int> workers;
    bool extended = false;
    bool no_timing = false;
    app.add_option("command", command, "energy | sweep | converge | reproduce");
    app.add_option("table", table, "table id for reproduce (also accepted as table=<id>)");
    app.add_option("--config", config_path, "configuration document (INI)");
    app.add_option("--format", format, "csv | json");
    app.add_option("--out", out_path, "output file (default: stdout)");
    app.add_option("--l0", l0, "truncation order (j0 for EM)");
    app.add_option("--nodes", nodes, "Gauss-Legendre nodes of the frequency integral");
    app.add_option("--workers", workers, "worker threads");
    app.add_flag("--extended", extended, "include short-distance table rows");
    app.add_flag("--no-timing", no_timing, "write 0 in the seconds column");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    }

    RunSpec spec;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ParseError("--config", "cannot open '" + config_path + "'");
            std::stringstream text;
            text << in.rdbuf();
            spec = read_config(text.str());
        }
        if (!command.empty()) spec.command = parse_command(command, "command");
        if (!table.empty()) {
            spec.table_id = table.rfind("table=", 0) == 0 ? table.substr(6) : table;
        }
        if (!format.empty()) spec.format = parse_format(format, "--format");
        if (l0) {
            spec.l0 = *l0;
            spec.l0_explicit = true;
        }
        if (nodes) spec.nodes = *nodes;
        if (workers) spec.workers = *workers;
        if (extended) spec.extended = true;
        if (no_timing) spec.timing = false;
        if (!out_path.empty()) spec.out_path = out_path;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    }

    if (spec.out_path.empty()) return run(spec, out, err);
    std::ostringstream buffer;
    const int status = run(spec, buffer, err);
    if (status != exit_ok) return status;
    std::ofstream file(spec.out_path, std::ios::binary);
    if (!file) {
        err << "error: --out: cannot write '" << spec.out_path << "'\n";
        return exit_validation;
    }
    file << buffer.str();
    return exit_ok;
}

}  // namespace casimir::cli

#endif  // CASIMIR_CLI_APP_HPP
