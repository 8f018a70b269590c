#ifndef CASIMIR_CLI_RUN_HPP
#define CASIMIR_CLI_RUN_HPP

// Run specifications, the INI-style configuration document, and the
// dispatcher that turns a RunSpec into CSV or JSON rows.
//
// Document layout (flat keys plus one section per body):
//
//   command = energy          ; energy | sweep | converge | reproduce
//   field = scalar            ; scalar | em
//   separation = 4
//   l0 = 10
//   [body_a]
//   kind = dirichlet          ; dirichlet | dielectric | conducting | mirror
//   radius = 1
//   [body_b]
//   kind = mirror
//   flavor = neumann          ; dirichlet | neumann | conducting | permeable

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "casimir/cli/tables.hpp"
#include "casimir/configuration.hpp"
#include "casimir/energy.hpp"
#include "casimir/errors.hpp"

namespace casimir::cli {

enum class Command { energy, sweep, converge, reproduce };
enum class Format { csv, json };

struct SweepRange {
    double a_min = 0.0;
    double a_max = 0.0;
    int steps = 0;
};

struct RunSpec {
    Command command = Command::energy;
    Configuration config;
    bool has_config = false;  // bodies and separation were supplied
    int l0 = 10;
    bool l0_explicit = false;  // overrides per-row truncations of `reproduce`
    int nodes = 64;
    int workers = 1;
    std::optional<SweepRange> sweep;
    std::optional<std::string> table_id;
    std::vector<int> l0_list{4, 6, 8, 10};
    Format format = Format::csv;
    std::string out_path;
    bool extended = false;
    bool timing = true;  // false writes 0 in the seconds column
};

inline const char* command_name(Command c) {
    switch (c) {
        case Command::energy: return "energy";
        case Command::sweep: return "sweep";
        case Command::converge: return "converge";
        case Command::reproduce: return "reproduce";
    }
    return "?";
}

inline Command parse_command(const std::string& s, const std::string& key = "command") {
    if (s == "energy") return Command::energy;
    if (s == "sweep") return Command::sweep;
    if (s == "converge") return Command::converge;
    if (s == "reproduce") return Command::reproduce;
    throw ParseError(key, "unknown command '" + s + "' (expected energy, sweep, converge or reproduce)");
}

inline Format parse_format(const std::string& s, const std::string& key = "format") {
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    throw ParseError(key, "unknown format '" + s + "' (expected csv or json)");
}

namespace detail {

using boost::property_tree::ptree;

inline double number(const ptree& node, const std::string& key, const std::string& path) {
    const auto raw = node.get<std::string>(key);
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ParseError(path, "expected a number, got '" + raw + "'");
    }
}

inline int integer(const ptree& node, const std::string& key, const std::string& path) {
    const auto raw = node.get<std::string>(key);
    try {
        std::size_t used = 0;
        const int v = std::stoi(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ParseError(path, "expected an integer, got '" + raw + "'");
    }
}

inline bool boolean(const ptree& node, const std::string& key, const std::string& path) {
    const auto raw = node.get<std::string>(key);
    if (raw == "true" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "0" || raw == "no") return false;
    throw ParseError(path, "expected true or false, got '" + raw + "'");
}

inline std::vector<int> integer_list(const std::string& raw, const std::string& path) {
    std::vector<int> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw ParseError(path, "empty list entry");
        item = item.substr(b, e - b + 1);
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ParseError(path, "expected a comma separated list of integers, got '" + raw + "'");
        }
    }
    return out;
}

inline void reject_unknown(const ptree& node, const std::set<std::string>& allowed, const std::string& prefix) {
    for (const auto& [key, child] : node) {
        if (!allowed.count(key)) throw ParseError(prefix + key, "unknown key");
    }
}

inline Scatterer parse_body(const ptree& node, const std::string& name) {
    reject_unknown(node, {"kind", "radius", "epsilon", "flavor"}, name + ".");
    if (!node.count("kind")) throw ParseError(name + ".kind", "missing");
    const auto kind = node.get<std::string>("kind");
    const auto radius = [&] {
        if (!node.count("radius")) throw ParseError(name + ".radius", "missing");
        const double r = number(node, "radius", name + ".radius");
        if (!(r > 0.0)) throw ParseError(name + ".radius", "must be positive");
        return r;
    };
    if (kind == "dirichlet") return DirichletSphere{radius()};
    if (kind == "conducting") return ConductingSphere{radius()};
    if (kind == "dielectric") {
        const double r = radius();
        if (!node.count("epsilon")) throw ParseError(name + ".epsilon", "missing");
        const double eps = number(node, "epsilon", name + ".epsilon");
        if (!(eps > 1.0)) throw ParseError(name + ".epsilon", "must exceed 1");
        return DielectricSphere{r, eps, {}};
    }
    if (kind == "mirror") {
        if (!node.count("flavor")) throw ParseError(name + ".flavor", "missing");
        const auto f = node.get<std::string>("flavor");
        if (f == "dirichlet") return Mirror{MirrorFlavor::scalar_dirichlet};
        if (f == "neumann") return Mirror{MirrorFlavor::scalar_neumann};
        if (f == "conducting") return Mirror{MirrorFlavor::em_conducting};
        if (f == "permeable") return Mirror{MirrorFlavor::em_permeable};
        throw ParseError(name + ".flavor", "unknown mirror flavor '" + f + "'");
    }
    throw ParseError(name + ".kind", "unknown body kind '" + kind + "'");
}

}  // namespace detail

/// Checks the RunSpec invariants and, when bodies are present, the geometry.
/// Throws ParseError or ConfigurationError.
inline void validate(const RunSpec& s) {
    if (s.command == Command::sweep && !s.sweep) throw ParseError("a_min", "sweep needs a_min, a_max and steps");
    if (s.command != Command::sweep && s.sweep) throw ParseError("a_min", "sweep range given for a non-sweep command");
    if (s.command == Command::reproduce && !s.table_id) throw ParseError("table", "reproduce needs a table id");
    if (s.command != Command::reproduce && s.table_id) throw ParseError("table", "table id given for a non-reproduce command");
    if (s.table_id && !find_table(*s.table_id)) throw ParseError("table", "unknown table id '" + *s.table_id + "'");
    if (s.l0 < 0 || s.l0 > 100) throw ParseError("l0", "must lie in [0, 100]");
    if (s.nodes < 2 || s.nodes > 4096) throw ParseError("nodes", "must lie in [2, 4096]");
    if (s.workers < 1) throw ParseError("workers", "must be at least 1");
    if (s.sweep) {
        if (s.sweep->steps < 1) throw ParseError("steps", "must be at least 1");
        if (!(s.sweep->a_max >= s.sweep->a_min)) throw ParseError("a_max", "must not be below a_min");
    }
    if (s.command == Command::converge) {
        if (s.l0_list.size() < 3) throw ParseError("l0_list", "needs at least three values");
        for (std::size_t i = 1; i < s.l0_list.size(); ++i) {
            if (s.l0_list[i] <= s.l0_list[i - 1]) throw ParseError("l0_list", "must ascend");
        }
    }
    if (s.command != Command::reproduce) {
        if (!s.has_config) throw ParseError("body_a", "the " + std::string(command_name(s.command)) + " command needs bodies");
        Configuration c = s.config;
        if (s.sweep) c.separation = s.sweep->a_min;
        casimir::validate(c);
        if (s.sweep) {
            c.separation = s.sweep->a_max;
            casimir::validate(c);
        }
    }
}

/// Reads the document without the cross-key checks of validate(), so that
/// command-line flags can still be layered on top.
inline RunSpec read_config(const std::string& text) {
    using detail::ptree;
    ptree root;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, root);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ParseError("line " + std::to_string(e.line()), e.message());
    }
    detail::reject_unknown(root,
                           {"command", "field", "mode", "separation", "r_ref", "units", "l0", "nodes", "workers",
                            "a_min", "a_max", "steps", "l0_list", "table", "format", "extended", "timing", "body_a",
                            "body_b"},
                           "");
    RunSpec s;
    if (root.count("command")) s.command = parse_command(root.get<std::string>("command"));
    if (root.count("format")) s.format = parse_format(root.get<std::string>("format"));
    if (root.count("l0")) {
        s.l0 = detail::integer(root, "l0", "l0");
        s.l0_explicit = true;
    }
    if (root.count("nodes")) s.nodes = detail::integer(root, "nodes", "nodes");
    if (root.count("workers")) s.workers = detail::integer(root, "workers", "workers");
    if (root.count("extended")) s.extended = detail::boolean(root, "extended", "extended");
    if (root.count("timing")) s.timing = detail::boolean(root, "timing", "timing");
    if (root.count("table")) s.table_id = root.get<std::string>("table");
    if (root.count("l0_list")) s.l0_list = detail::integer_list(root.get<std::string>("l0_list"), "l0_list");
    if (root.count("a_min") || root.count("a_max") || root.count("steps")) {
        for (const char* k : {"a_min", "a_max", "steps"}) {
            if (!root.count(k)) throw ParseError(k, "missing (sweep ranges need a_min, a_max and steps)");
        }
        s.sweep = SweepRange{detail::number(root, "a_min", "a_min"), detail::number(root, "a_max", "a_max"),
                             detail::integer(root, "steps", "steps")};
    }

    Configuration& c = s.config;
    if (root.count("field")) {
        const auto f = root.get<std::string>("field");
        if (f == "scalar") {
            c.field = FieldKind::scalar;
        } else if (f == "em") {
            c.field = FieldKind::em;
        } else {
            throw ParseError("field", "unknown field '" + f + "' (expected scalar or em)");
        }
    }
    const bool has_a = root.get_child_optional("body_a").has_value();
    const bool has_b = root.get_child_optional("body_b").has_value();
    if (has_a != has_b) throw ParseError(has_a ? "body_b" : "body_a", "both bodies must be given");
    if (has_a) {
        s.has_config = true;
        c.body_a = detail::parse_body(root.get_child("body_a"), "body_a");
        c.body_b = detail::parse_body(root.get_child("body_b"), "body_b");
        c.mode = std::holds_alternative<Mirror>(c.body_b) ? GeometryMode::sphere_mirror : GeometryMode::two_body;
        if (root.count("mode")) {
            const auto m = root.get<std::string>("mode");
            if (m == "two-body") {
                c.mode = GeometryMode::two_body;
            } else if (m == "sphere-mirror") {
                c.mode = GeometryMode::sphere_mirror;
            } else {
                throw ParseError("mode", "unknown mode '" + m + "' (expected two-body or sphere-mirror)");
            }
        }
        if (root.count("separation")) {
            c.separation = detail::number(root, "separation", "separation");
        } else if (!s.sweep) {
            throw ParseError("separation", "missing");
        }
        for (const char* k : {"r_ref", "units"}) {
            if (root.count(k)) {
                c.r_ref = detail::number(root, k, k);
                if (!(c.r_ref > 0.0)) throw ParseError(k, "must be positive");
            }
        }
    }
    return s;
}

/// Parses and validates the configuration document. Defaults: l0 = 10,
/// nodes = 64, R_ref = max radius.
inline RunSpec parse_config(const std::string& text) {
    RunSpec s = read_config(text);
    validate(s);
    return s;
}

namespace detail {

inline std::string format_number(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct Row {
    double a_over_r = 0.0;
    int l0 = 0;
    double energy = 0.0;
    std::vector<double> per_m;
    double error_estimate = 0.0;
    double seconds = 0.0;
    // converge
    std::optional<double> extrapolated;
    std::optional<double> rate;
    // reproduce
    std::optional<std::string> quantity;
    std::optional<double> epsilon;
    std::optional<double> value;
    std::optional<double> paper_value;
    std::optional<double> rel_dev;
};

class Clock {
public:
    explicit Clock(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        if (!enabled_) return 0.0;
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    bool enabled_;
    std::chrono::steady_clock::time_point start_;
};

inline QuadratureSpec quadrature(const RunSpec& s) {
    QuadratureSpec q;
    q.nodes = s.nodes;
    q.workers = s.workers;
    return q;
}

inline Row energy_row(const Configuration& c, int l0, const RunSpec& s) {
    const Clock clock(s.timing);
    const auto r = casimir_energy(c, l0, quadrature(s));
    Row row;
    row.a_over_r = c.separation / c.reference_length();
    row.l0 = l0;
    row.energy = r.energy;
    row.per_m = r.per_m;
    row.error_estimate = r.truncation_error_estimate;
    row.seconds = clock.seconds();
    return row;
}

// E_S for equal scalar spheres, E_s for EM spheres, E otherwise.
inline std::string row_label(const Table& t, const TableRow& tr) {
    if (tr.quantity != Quantity::two_body) return quantity_name(tr.quantity);
    if (t.field == FieldKind::em) return "E_s";
    return t.r1 == t.r2 ? "E_S" : "E";
}

inline Row reproduce_row(const Table& t, const TableRow& tr, const RunSpec& s) {
    const Configuration c = row_configuration(t, tr);
    const int l0 = s.l0_explicit ? s.l0 : tr.l0;
    const Clock clock(s.timing);
    Row row;
    row.quantity = row_label(t, tr);
    if (!std::isnan(tr.epsilon)) row.epsilon = tr.epsilon;
    row.a_over_r = c.separation / c.reference_length();
    row.l0 = l0;
    if (tr.quantity == Quantity::convergence_rate) {
        const auto fit = convergence_study(c, {l0 - 2, l0 - 1, l0}, quadrature(s));
        const auto& last = fit.results.back();
        row.energy = last.energy;
        row.per_m = last.per_m;
        row.error_estimate = last.truncation_error_estimate;
        row.extrapolated = fit.e_inf;
        row.rate = fit.c;
        row.value = fit.c;
    } else {
        const auto r = casimir_energy(c, l0, quadrature(s));
        row.energy = r.energy;
        row.per_m = r.per_m;
        row.error_estimate = r.truncation_error_estimate;
        row.value = r.energy;
    }
    row.paper_value = tr.paper_value;
    row.rel_dev = (*row.value - tr.paper_value) / std::abs(tr.paper_value);
    row.seconds = clock.seconds();
    return row;
}

inline void write_csv(std::ostream& os, const RunSpec& s, double r_ref, const std::vector<Row>& rows) {
    std::size_t n_m = 0;
    for (const auto& r : rows) n_m = std::max(n_m, r.per_m.size());
    os << "# command=" << command_name(s.command) << " r_ref=" << format_number(r_ref)
       << " units=hbar*c/r_ref nodes=" << s.nodes;
    if (s.table_id) os << " table=" << *s.table_id << " source=\"" << find_table(*s.table_id)->source << '"';
    os << '\n';
    os << "a_over_R,l0,energy";
    for (std::size_t m = 0; m < n_m; ++m) os << ",per_m_" << m;
    os << ",error_estimate,seconds";
    if (s.command == Command::converge) os << ",extrapolated_energy,c";
    if (s.command == Command::reproduce) os << ",quantity,epsilon,value,paper_value,rel_dev";
    os << '\n';
    for (const auto& r : rows) {
        os << format_number(r.a_over_r) << ',' << r.l0 << ',' << format_number(r.energy);
        for (std::size_t m = 0; m < n_m; ++m) os << ',' << (m < r.per_m.size() ? format_number(r.per_m[m]) : "");
        os << ',' << format_number(r.error_estimate) << ',' << format_number(r.seconds);
        if (s.command == Command::converge) {
            os << ',' << format_number(r.extrapolated.value_or(NAN)) << ',' << format_number(r.rate.value_or(NAN));
        }
        if (s.command == Command::reproduce) {
            os << ',' << r.quantity.value_or("") << ',' << format_number(r.epsilon.value_or(NAN)) << ','
               << format_number(r.value.value_or(NAN)) << ',' << format_number(r.paper_value.value_or(NAN)) << ','
               << format_number(r.rel_dev.value_or(NAN));
        }
        os << '\n';
    }
}

inline void write_json(std::ostream& os, const RunSpec& s, double r_ref, const std::vector<Row>& rows) {
    using nlohmann::json;
    const auto num = [](double v) -> json {
        if (std::isnan(v)) return nullptr;
        if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        return v;
    };
    json doc;
    doc["v"] = 1;
    doc["command"] = command_name(s.command);
    doc["r_ref"] = r_ref;
    doc["units"] = "hbar*c/r_ref";
    doc["nodes"] = s.nodes;
    if (s.table_id) {
        doc["table"] = *s.table_id;
        doc["source"] = find_table(*s.table_id)->source;
    }
    doc["rows"] = json::array();
    for (const auto& r : rows) {
        json j;
        j["a_over_R"] = r.a_over_r;
        j["l0"] = r.l0;
        j["energy"] = r.energy;
        j["per_m"] = r.per_m;
        j["error_estimate"] = r.error_estimate;
        j["seconds"] = r.seconds;
        if (r.extrapolated) j["extrapolated_energy"] = *r.extrapolated;
        if (r.rate) j["c"] = *r.rate;
        if (r.quantity) j["quantity"] = *r.quantity;
        if (r.epsilon) j["epsilon"] = num(*r.epsilon);
        if (r.value) j["value"] = *r.value;
        if (r.paper_value) j["paper_value"] = *r.paper_value;
        if (r.rel_dev) j["rel_dev"] = *r.rel_dev;
        doc["rows"].push_back(std::move(j));
    }
    os << doc.dump(2) << '\n';
}

}  // namespace detail

/// Exit statuses of run().
enum ExitStatus { exit_ok = 0, exit_validation = 2, exit_nonconvergence = 3 };

/// Executes the RunSpec and writes the artifact to `out`. Errors become a single
/// line on `err` and the matching exit status.
inline int run(const RunSpec& s, std::ostream& out, std::ostream& err) {
    try {
        validate(s);
        std::vector<detail::Row> rows;
        double r_ref = s.has_config ? s.config.reference_length() : 1.0;
        switch (s.command) {
            case Command::energy:
                rows.push_back(detail::energy_row(s.config, s.l0, s));
                break;
            case Command::sweep: {
                const auto& sw = *s.sweep;
                for (int i = 0; i < sw.steps; ++i) {
                    Configuration c = s.config;
                    c.separation = sw.steps == 1 ? sw.a_min
                                                 : sw.a_min + (sw.a_max - sw.a_min) * i / (sw.steps - 1.0);
                    rows.push_back(detail::energy_row(c, s.l0, s));
                }
                break;
            }
            case Command::converge: {
                const detail::Clock clock(s.timing);
                const auto fit = convergence_study(s.config, s.l0_list, detail::quadrature(s));
                const double seconds = clock.seconds();
                for (const auto& r : fit.results) {
                    detail::Row row;
                    row.a_over_r = s.config.separation / s.config.reference_length();
                    row.l0 = r.l0;
                    row.energy = r.energy;
                    row.per_m = r.per_m;
                    row.error_estimate = r.truncation_error_estimate;
                    row.seconds = seconds;
                    row.extrapolated = fit.e_inf;
                    row.rate = fit.c;
                    rows.push_back(std::move(row));
                }
                break;
            }
            case Command::reproduce: {
                const Table& t = *find_table(*s.table_id);
                r_ref = t.r1;
                for (const auto& tr : t.rows) {
                    if (tr.extended && !s.extended) continue;
                    rows.push_back(detail::reproduce_row(t, tr, s));
                }
                break;
            }
        }
        if (s.format == Format::json) {
            detail::write_json(out, s, r_ref, rows);
        } else {
            detail::write_csv(out, s, r_ref, rows);
        }
        out.flush();
        return exit_ok;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const ConfigurationError& e) {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_nonconvergence;
    }
}

}  // namespace casimir::cli

#endif  // CASIMIR_CLI_RUN_HPP
