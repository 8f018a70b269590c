#ifndef CASIMIR_TMATRIX_HPP
#define CASIMIR_TMATRIX_HPP

// Imaginary-frequency T-matrix elements of the supported scatterers.
//
// Sphere rows are delivered renormalized: t~_l = t_l / z_l^2 with
// z_l^2 = I_{l+1/2}(x)/K_{l+1/2}(x), the same z the translation matrices use.
// For a Dirichlet sphere this makes every t~ exactly pi/2.

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "casimir/angular.hpp"
#include "casimir/errors.hpp"
#include "casimir/specfun.hpp"

namespace casimir {

struct DirichletSphere {
    double radius = 1.0;
};

/// Scalar sphere with constant permittivity, or a frequency dependent one
/// when `permittivity` is set (evaluated at the imaginary frequency omega).
struct DielectricSphere {
    double radius = 1.0;
    double epsilon = 2.0;
    std::function<double(double)> permittivity;

    double epsilon_at(double omega) const { return permittivity ? permittivity(omega) : epsilon; }
};

struct ConductingSphere {
    double radius = 1.0;
};

enum class MirrorFlavor { scalar_dirichlet, scalar_neumann, em_conducting, em_permeable };

struct Mirror {
    MirrorFlavor flavor = MirrorFlavor::scalar_dirichlet;
};

/// Ideal 1D reflector: r = -1 for a Dirichlet wall, +1 for a Neumann wall.
struct PerfectMirror1D {
    int sign = -1;
};

/// 1D delta potential lambda * delta(x).
struct DeltaPotential1D {
    double strength = 1.0;
};

using Reflector1D = std::variant<PerfectMirror1D, DeltaPotential1D>;

struct OneD {
    Reflector1D model;
};

using Scatterer = std::variant<DirichletSphere, DielectricSphere, ConductingSphere, Mirror, OneD>;

/// Radius of a sphere variant; empty for mirrors and 1D bodies.
inline std::optional<double> sphere_radius(const Scatterer& s) {
    if (const auto* d = std::get_if<DirichletSphere>(&s)) return d->radius;
    if (const auto* e = std::get_if<DielectricSphere>(&s)) return e->radius;
    if (const auto* c = std::get_if<ConductingSphere>(&s)) return c->radius;
    return std::nullopt;
}

/// Whether a compact scatterer can couple to the given field.
inline bool compatible(const Scatterer& s, FieldKind kind) {
    if (std::holds_alternative<DirichletSphere>(s) || std::holds_alternative<DielectricSphere>(s)) {
        return kind == FieldKind::scalar;
    }
    if (std::holds_alternative<ConductingSphere>(s)) return kind == FieldKind::em;
    if (const auto* m = std::get_if<Mirror>(&s)) {
        const bool scalar_flavor =
            m->flavor == MirrorFlavor::scalar_dirichlet || m->flavor == MirrorFlavor::scalar_neumann;
        return scalar_flavor == (kind == FieldKind::scalar);
    }
    return false;
}

/// Parameter checks: R > 0, epsilon > 1, lambda > 0.
inline void validate(const Scatterer& s) {
    if (auto r = sphere_radius(s); r && !(*r > 0.0)) {
        throw ConfigurationError("sphere radius must be positive, got " + std::to_string(*r));
    }
    if (const auto* e = std::get_if<DielectricSphere>(&s); e && !e->permittivity && !(e->epsilon > 1.0)) {
        throw ConfigurationError("dielectric constant must exceed 1, got " + std::to_string(e->epsilon));
    }
    if (const auto* o = std::get_if<OneD>(&s)) {
        if (const auto* d = std::get_if<DeltaPotential1D>(&o->model); d && !(d->strength > 0.0)) {
            throw ConfigurationError("delta potential strength must be positive");
        }
    }
}

}  // namespace casimir

namespace casimir::tmatrix {

/// Renormalized T-matrix row of one sphere at x = omega R.
struct TRow {
    double x = 0.0;
    std::vector<ModeIndex> modes;
    std::vector<double> scaled;  // t~ per mode
    std::vector<double> log_z;   // ln z per mode

    /// t = t~ z^2. May overflow for large l x; meant for small arguments and tests.
    double unscaled(std::size_t i) const { return scaled[i] * std::exp(2.0 * log_z[i]); }
};

namespace detail {

inline void require_positive(double x, const char* who) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError(std::string(who) + ": x must be positive, got " + std::to_string(x));
    }
}

inline std::vector<double> log_z_from_row(const specfun::LogBesselRow& row) {
    std::vector<double> out(row.log_i.size());
    for (std::size_t l = 0; l < out.size(); ++l) out[l] = row.x + 0.5 * (row.log_i[l] - row.log_k[l]);
    return out;
}

}  // namespace detail

/// t_l = (pi/2) I_{l+1/2}(x)/K_{l+1/2}(x), l = 0..l0.
inline TRow t_scalar_dirichlet(int l0, double x) {
    detail::require_positive(x, "t_scalar_dirichlet");
    if (l0 < 0) throw DomainError("t_scalar_dirichlet: negative l0");
    const auto row = specfun::bessel_ik_half_log(l0, x);
    const auto log_z = detail::log_z_from_row(row);
    TRow out;
    out.x = x;
    for (int l = 0; l <= l0; ++l) {
        out.modes.push_back({l, Polarization::te});
        out.scaled.push_back(std::numbers::pi / 2.0);
        out.log_z.push_back(log_z[static_cast<std::size_t>(l)]);
    }
    return out;
}

/// Scalar sphere of permittivity eps: interior solution i_l(sqrt(eps) x), phi and phi'
/// continuous at r = R. In ratio form
///     t~_l = (pi/2) (n q_l(n x) - q_l(x)) / (n q_l(n x) + rho_l(x)),  n = sqrt(eps),
/// with q_l = I_{l+3/2}/I_{l+1/2} and rho_l = K_{l+3/2}/K_{l+1/2}.
inline TRow t_scalar_dielectric(int l0, double x, double eps) {
    detail::require_positive(x, "t_scalar_dielectric");
    if (!(eps > 1.0) || !std::isfinite(eps)) {
        throw DomainError("t_scalar_dielectric: eps must exceed 1, got " + std::to_string(eps));
    }
    if (l0 < 0) throw DomainError("t_scalar_dielectric: negative l0");
    const double n = std::sqrt(eps);
    const auto outside = specfun::bessel_ik_half_log(l0, x);
    const auto inside = specfun::bessel_ik_half_log(l0, n * x);
    const auto log_z = detail::log_z_from_row(outside);
    TRow out;
    out.x = x;
    for (int l = 0; l <= l0; ++l) {
        const auto ul = static_cast<std::size_t>(l);
        const double nq = n * inside.i_ratio[ul];
        out.modes.push_back({l, Polarization::te});
        out.scaled.push_back(std::numbers::pi / 2.0 * (nq - outside.i_ratio[ul]) / (nq + outside.k_ratio[ul]));
        out.log_z.push_back(log_z[ul]);
    }
    return out;
}

/// Perfectly conducting sphere, j = 1..j0, TE before TM at each j.
///
/// TE: (pi/2) I/K. TM: -(pi/2) [sqrt(x) I]'/[sqrt(x) K]', which in ratio form is
/// (pi/2)(I/K) (q_j + (j+1)/x)/(K_{j-1/2}/K_{j+1/2} + j/x).
inline TRow t_em_conducting(int j0, double x) {
    detail::require_positive(x, "t_em_conducting");
    if (j0 < 1) throw DomainError("t_em_conducting: j0 must be at least 1");
    const auto row = specfun::bessel_ik_half_log(j0, x);
    const auto log_z = detail::log_z_from_row(row);
    TRow out;
    out.x = x;
    for (int j = 1; j <= j0; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        const double tm = std::numbers::pi / 2.0 * (row.i_ratio[uj] + (j + 1.0) / x) /
                          (1.0 / row.k_ratio[uj - 1] + static_cast<double>(j) / x);
        out.modes.push_back({j, Polarization::te});
        out.scaled.push_back(std::numbers::pi / 2.0);
        out.log_z.push_back(log_z[uj]);
        out.modes.push_back({j, Polarization::tm});
        out.scaled.push_back(tm);
        out.log_z.push_back(log_z[uj]);
    }
    return out;
}

/// Row for any sphere variant at frequency omega; l0 is j0 for EM.
inline TRow t_row(const Scatterer& body, int l0, double omega) {
    if (const auto* d = std::get_if<DirichletSphere>(&body)) return t_scalar_dirichlet(l0, omega * d->radius);
    if (const auto* e = std::get_if<DielectricSphere>(&body)) {
        return t_scalar_dielectric(l0, omega * e->radius, e->epsilon_at(omega));
    }
    if (const auto* c = std::get_if<ConductingSphere>(&body)) return t_em_conducting(l0, omega * c->radius);
    throw ConfigurationError("T-matrix row requested for a body that is not a sphere");
}

/// Position of a mode inside a full TRow (scalar rows start at l = 0, EM rows at j = 1).
inline std::size_t row_position(FieldKind kind, const ModeIndex& mode) {
    if (kind == FieldKind::scalar) return static_cast<std::size_t>(mode.l);
    return 2 * static_cast<std::size_t>(mode.l - 1) + (mode.pol == Polarization::tm ? 1 : 0);
}

/// Imaginary-axis reflection coefficient of a 1D scatterer.
inline double reflection_1d(const Reflector1D& model, double omega) {
    if (const auto* p = std::get_if<PerfectMirror1D>(&model)) return p->sign < 0 ? -1.0 : 1.0;
    const auto& d = std::get<DeltaPotential1D>(model);
    if (std::isinf(d.strength)) return -1.0;
    return -d.strength / (d.strength + 2.0 * omega);
}

}  // namespace casimir::tmatrix

#endif  // CASIMIR_TMATRIX_HPP
