#ifndef CASIMIR_CLI_TABLES_HPP
#define CASIMIR_CLI_TABLES_HPP

// Built-in reference tables for `reproduce`. Values are published results,
// copied verbatim. Lengths are in units of the table's reference radius.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "casimir/configuration.hpp"

namespace casimir::cli {

enum class Quantity {
    two_body,        // E_S, E, E_s
    dirichlet_mirror,
    neumann_mirror,
    conducting_mirror,
    permeable_mirror,
    convergence_rate,  // fitted c
};

inline const char* quantity_name(Quantity q) {
    switch (q) {
        case Quantity::two_body: return "E";
        case Quantity::dirichlet_mirror: return "E_D";
        case Quantity::neumann_mirror: return "E_N";
        case Quantity::conducting_mirror: return "E_e";
        case Quantity::permeable_mirror: return "E_m";
        case Quantity::convergence_rate: return "c";
    }
    return "?";
}

struct TableRow {
    Quantity quantity = Quantity::two_body;
    double a = 0.0;  // center distance over the reference radius
    double epsilon = std::numeric_limits<double>::quiet_NaN();  // dielectric rows only; inf is the Dirichlet limit
    int l0 = 10;
    bool extended = false;
    double paper_value = 0.0;
};

enum class TableBodies { dirichlet, dielectric, conducting };

struct Table {
    std::string id;
    std::string source;
    FieldKind field = FieldKind::scalar;
    TableBodies bodies = TableBodies::dirichlet;
    double r1 = 1.0;
    double r2 = 1.0;
    std::vector<TableRow> rows;
};

namespace detail {

inline Table equal_spheres() {
    Table t{"scalar-equal-spheres", "scalar Dirichlet spheres: sphere-mirror E_D, E_N and two-sphere E_S",
            FieldKind::scalar, TableBodies::dirichlet, 1.0, 1.0, {}};
    // The mirror gap is half the two-sphere gap, so mirror rows may need a larger l0.
    struct Line {
        double a, ed, en, es;
        int l0, mirror_l0;
    };
    const Line lines[] = {
        {2.1, -8.75, 7.66, -1.0939, 72, 72},
        {2.2, -2.2129, 1.9382, -0.27477, 40, 40},
        {2.35, -0.739, 0.6488, -0.0902822, 24, 24},
        {2.5, -0.3688, 0.3245, -0.0443005, 10, 22},
        {2.75, -0.1679, 0.1483, -0.0195891, 10, 10},
        {3, -0.09703, 0.08613, -0.0108937, 10, 10},
        {3.5, -0.044981, 0.0403034, -0.00467768, 10, 10},
        {4, -0.0261973, 0.0236767, -0.00252067, 10, 10},
        {5, -0.0123048, 0.0112853, -0.00101948, 10, 10},
        {7, -0.00477708, 0.00447243, -0.000304649, 10, 10},
        {10, -0.00199796, 0.00190445, -0.0000935083, 10, 10},
        {13, -0.0011022, 0.00106165, -0.0000405423, 10, 10},
        {16, -0.000700129, 0.000678957, -0.000021172, 10, 10},
    };
    for (const auto& l : lines) {
        const bool ext = l.a <= 2.35;
        t.rows.push_back({Quantity::dirichlet_mirror, l.a, std::numeric_limits<double>::quiet_NaN(), l.mirror_l0, ext, l.ed});
        t.rows.push_back({Quantity::neumann_mirror, l.a, std::numeric_limits<double>::quiet_NaN(), l.mirror_l0, ext, l.en});
        t.rows.push_back({Quantity::two_body, l.a, std::numeric_limits<double>::quiet_NaN(), l.l0, ext, l.es});
    }
    return t;
}

inline Table unequal_spheres() {
    Table t{"scalar-unequal-spheres", "scalar Dirichlet spheres of radii R0 and 2R0, energy in hbar c / R0",
            FieldKind::scalar, TableBodies::dirichlet, 1.0, 2.0, {}};
    struct Line {
        double a, e;
        int l0;
        bool ext;
    };
    const Line lines[] = {
        {3.1, -1.4554, 72, true},        {3.2, -0.367535, 40, true},     {3.3, -0.164591, 24, true},
        {3.4, -0.0931057, 20, true},     {3.5, -0.0598295, 16, false},   {3.67, -0.0334525, 14, false},
        {3.83, -0.021821, 12, false},    {4, -0.01501511, 10, false},    {5, -0.00362365, 10, false},
        {6, -0.00151965948, 10, false},  {8, -0.00047970126, 10, false}, {10, -0.00021536976316, 10, false},
        {14, -0.0000696380241, 10, false}, {18, -0.00003103693506, 10, false},
        {22, -0.0000164921322, 10, false},
    };
    for (const auto& l : lines) {
        t.rows.push_back({Quantity::two_body, l.a, std::numeric_limits<double>::quiet_NaN(), l.l0, l.ext, l.e});
    }
    return t;
}

inline Table dielectric_spheres() {
    Table t{"scalar-dielectric", "scalar dielectric spheres of radii R0 and 2R0 at a = 4R0 versus epsilon",
            FieldKind::scalar, TableBodies::dielectric, 1.0, 2.0, {}};
    const double inf = std::numeric_limits<double>::infinity();
    const std::pair<double, double> lines[] = {
        {64, -0.003092},  {100, -0.003927}, {900, -0.00829}, {1e3, -0.0084835}, {1e4, -0.01184},
        {1e5, -0.01364},  {1e6, -0.01447},  {1e7, -0.01483}, {1e8, -0.01495},   {inf, -0.01501511},
    };
    for (const auto& [eps, e] : lines) t.rows.push_back({Quantity::two_body, 4.0, eps, 10, false, e});
    return t;
}

inline Table em_conducting() {
    Table t{"em-conducting", "perfectly conducting spheres (EM): sphere-mirror E_e, E_m and two-sphere E_s",
            FieldKind::em, TableBodies::conducting, 1.0, 1.0, {}};
    struct Line {
        double a, ee, em, es;
        int j0;
        int mirror_j0;
    };
    const Line lines[] = {
        {2.1, -16.15, 14.5, -1.662, 60, 60},
        {2.2, -3.82, 3.48, -0.337635, 40, 40},
        {2.35, -1.157, 1.073, -8.356e-2, 20, 20},
        {2.5, -0.53, 0.50, -3.18e-2, 10, 20},
        {2.75, -0.211, 0.201, -9.595e-3, 10, 10},
        {3, -0.1074, 0.1036, -3.787e-3, 10, 10},
        {3.5, -3.97e-2, 3.88e-2, -8.917e-4, 10, 10},
        {4, -1.89e-2, 1.86e-2, -2.864e-4, 10, 10},
        {5, -6.24e-3, 6.19e-3, -4.887e-5, 10, 10},
        {7, -1.38e-3, 1.37e-3, -3.965e-6, 10, 10},
        {10, -3.06e-4, 3.06e-4, -3.032e-7, 10, 10},
        {13, -1.04e-4, 1.04e-4, -4.703e-8, 10, 10},
        {16, -4.47e-5, 4.47e-5, -1.085e-8, 10, 10},
    };
    for (const auto& l : lines) {
        const bool ext = l.a <= 2.35;
        t.rows.push_back({Quantity::conducting_mirror, l.a, std::numeric_limits<double>::quiet_NaN(), l.mirror_j0, ext, l.ee});
        t.rows.push_back({Quantity::permeable_mirror, l.a, std::numeric_limits<double>::quiet_NaN(), l.mirror_j0, ext, l.em});
        t.rows.push_back({Quantity::two_body, l.a, std::numeric_limits<double>::quiet_NaN(), l.j0, ext, l.es});
    }
    return t;
}

// l0 is the largest truncation of the fit; the fit uses l0-2, l0-1, l0.
inline Table convergence_rate() {
    Table t{"convergence-c", "rate c of E(l0) -> E for equal scalar Dirichlet spheres", FieldKind::scalar,
            TableBodies::dirichlet, 1.0, 1.0, {}};
    struct Line {
        double a, c;
        int l0;
    };
    const Line lines[] = {
        {2.1, 0.18, 40}, {2.2, 0.34, 24}, {2.35, 0.57, 14}, {2.5, 0.78, 10}, {2.75, 1.06, 10},
        {3, 1.33, 10},   {3.5, 1.78, 10}, {4, 2.14, 8},     {5, 2.75, 6},    {7, 3.44, 4},
    };
    for (const auto& l : lines) {
        t.rows.push_back({Quantity::convergence_rate, l.a, std::numeric_limits<double>::quiet_NaN(), l.l0, l.a <= 2.35,
                          l.c});
    }
    return t;
}

}  // namespace detail

inline const std::vector<Table>& table_registry() {
    static const std::vector<Table> tables{detail::equal_spheres(), detail::unequal_spheres(),
                                           detail::dielectric_spheres(), detail::em_conducting(),
                                           detail::convergence_rate()};
    return tables;
}

inline const Table* find_table(const std::string& id) {
    for (const auto& t : table_registry()) {
        if (t.id == id) return &t;
    }
    return nullptr;
}

/// Configuration of one table row; energies come out in units of hbar c / r1.
inline Configuration row_configuration(const Table& t, const TableRow& row) {
    const auto sphere = [&](double r) -> Scatterer {
        switch (t.bodies) {
            case TableBodies::dirichlet: return DirichletSphere{r};
            case TableBodies::conducting: return ConductingSphere{r};
            case TableBodies::dielectric:
                if (std::isinf(row.epsilon)) return DirichletSphere{r};
                return DielectricSphere{r, row.epsilon, {}};
        }
        return DirichletSphere{r};
    };
    Configuration c;
    switch (row.quantity) {
        case Quantity::dirichlet_mirror:
            c = Configuration::sphere_and_mirror(t.field, sphere(t.r1), MirrorFlavor::scalar_dirichlet, row.a);
            break;
        case Quantity::neumann_mirror:
            c = Configuration::sphere_and_mirror(t.field, sphere(t.r1), MirrorFlavor::scalar_neumann, row.a);
            break;
        case Quantity::conducting_mirror:
            c = Configuration::sphere_and_mirror(t.field, sphere(t.r1), MirrorFlavor::em_conducting, row.a);
            break;
        case Quantity::permeable_mirror:
            c = Configuration::sphere_and_mirror(t.field, sphere(t.r1), MirrorFlavor::em_permeable, row.a);
            break;
        case Quantity::two_body:
        case Quantity::convergence_rate:
            c = Configuration::two_spheres(t.field, sphere(t.r1), sphere(t.r2), row.a);
            break;
    }
    c.r_ref = t.r1;
    return c;
}

}  // namespace casimir::cli

#endif  // CASIMIR_CLI_TABLES_HPP
