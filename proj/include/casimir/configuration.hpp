#ifndef CASIMIR_CONFIGURATION_HPP
#define CASIMIR_CONFIGURATION_HPP

#include <algorithm>
#include <string>

#include "casimir/angular.hpp"
#include "casimir/errors.hpp"
#include "casimir/tmatrix.hpp"

namespace casimir {

enum class GeometryMode { two_body, sphere_mirror };

/// Two bodies on the z axis.
///
/// `separation` is the center-to-center distance a. In sphere_mirror mode
/// body_b is a Mirror, the mirror plane sits a/2 from the center of body_a,
/// and a is the distance between the sphere and its image.
struct Configuration {
    FieldKind field = FieldKind::scalar;
    Scatterer body_a = DirichletSphere{1.0};
    Scatterer body_b = DirichletSphere{1.0};
    double separation = 4.0;
    GeometryMode mode = GeometryMode::two_body;
    double r_ref = 0.0;  // energies are reported in hbar c / r_ref; 0 selects the largest radius

    static Configuration two_spheres(FieldKind field, Scatterer a, Scatterer b, double separation) {
        Configuration c;
        c.field = field;
        c.body_a = std::move(a);
        c.body_b = std::move(b);
        c.separation = separation;
        c.mode = GeometryMode::two_body;
        return c;
    }

    static Configuration sphere_and_mirror(FieldKind field, Scatterer sphere, MirrorFlavor flavor,
                                           double separation) {
        Configuration c;
        c.field = field;
        c.body_a = std::move(sphere);
        c.body_b = Mirror{flavor};
        c.separation = separation;
        c.mode = GeometryMode::sphere_mirror;
        return c;
    }

    double radius_a() const { return sphere_radius(body_a).value_or(0.0); }

    double radius_b() const {
        return mode == GeometryMode::sphere_mirror ? radius_a() : sphere_radius(body_b).value_or(0.0);
    }

    double reference_length() const {
        if (r_ref > 0.0) return r_ref;
        return std::max(radius_a(), radius_b());
    }

    /// Closest surface-to-surface distance between the sphere(s) and the image, if any.
    double gap() const { return separation - radius_a() - radius_b(); }
};

/// Throws ConfigurationError for overlapping bodies, non-sphere bodies where a
/// sphere is required, or scatterers that do not couple to the field.
inline void validate(const Configuration& c) {
    validate(c.body_a);
    validate(c.body_b);
    if (!sphere_radius(c.body_a)) throw ConfigurationError("body_a must be a sphere");
    if (!compatible(c.body_a, c.field)) throw ConfigurationError("body_a does not match the field kind");
    if (!compatible(c.body_b, c.field)) throw ConfigurationError("body_b does not match the field kind");
    if (c.mode == GeometryMode::two_body) {
        if (!sphere_radius(c.body_b)) throw ConfigurationError("two-body mode needs two spheres");
        if (!(c.separation > c.radius_a() + c.radius_b())) {
            throw ConfigurationError("bodies overlap: separation " + std::to_string(c.separation) +
                                     " must exceed R1 + R2 = " + std::to_string(c.radius_a() + c.radius_b()));
        }
    } else {
        if (!std::holds_alternative<Mirror>(c.body_b)) {
            throw ConfigurationError("sphere-mirror mode needs a mirror as body_b");
        }
        if (!(c.separation / 2.0 > c.radius_a())) {
            throw ConfigurationError("sphere intersects the mirror: a/2 = " + std::to_string(c.separation / 2.0) +
                                     " must exceed R = " + std::to_string(c.radius_a()));
        }
    }
}

}  // namespace casimir

#endif  // CASIMIR_CONFIGURATION_HPP
