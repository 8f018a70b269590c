#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/bessel_prime.hpp>
#include <gtest/gtest.h>

#include "casimir/tmatrix.hpp"

using namespace casimir;
using namespace casimir::tmatrix;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// i_l(y) and k_l(y) with a common normalization I, K / sqrt(y); t only sees their ratio.
double sph_i(int l, double y) { return boost::math::cyl_bessel_i(l + 0.5, y) / std::sqrt(y); }
double sph_k(int l, double y) { return boost::math::cyl_bessel_k(l + 0.5, y) / std::sqrt(y); }
double sph_i_prime(int l, double y) {
    return boost::math::cyl_bessel_i_prime(l + 0.5, y) / std::sqrt(y) - 0.5 * sph_i(l, y) / y;
}
double sph_k_prime(int l, double y) {
    return boost::math::cyl_bessel_k_prime(l + 0.5, y) / std::sqrt(y) - 0.5 * sph_k(l, y) / y;
}

// Interior/exterior matching written directly in modified spherical Bessel functions.
double dielectric_oracle(int l, double x, double eps) {
    const double n = std::sqrt(eps);
    const double num = n * sph_i_prime(l, n * x) * sph_i(l, x) - sph_i(l, n * x) * sph_i_prime(l, x);
    const double den = n * sph_i_prime(l, n * x) * sph_k(l, x) - sph_i(l, n * x) * sph_k_prime(l, x);
    return kPi / 2.0 * num / den;
}

// First Born term: chi * int_0^x y^2 i_l(y)^2 dy with i_0(y) = sinh(y)/y.
double born_oracle(int l, double x, double chi) {
    const auto f = [l](double y) {
        const double i = std::sqrt(kPi / (2.0 * y)) * boost::math::cyl_bessel_i(l + 0.5, y);
        return y * y * i * i;
    };
    return chi * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, x, 10, 1e-14);
}

// Delta potential on the real axis: psi = e^{ikx} + r e^{-ikx} left, t e^{ikx} right,
// psi continuous and psi' jumping by lambda psi(0); then k = i omega.
double delta_reflection_oracle(double lambda, double omega) {
    using c = std::complex<double>;
    const c k(0.0, omega);
    const c i(0.0, 1.0);
    Eigen::Matrix2cd a;
    Eigen::Vector2cd b;
    // unknowns (r, t)
    a << 1.0, -1.0, i * k, i * k - lambda;
    b << -1.0, i * k;
    const Eigen::Vector2cd sol = a.partialPivLu().solve(b);
    EXPECT_LT(std::abs(sol(0).imag()), 1e-14);
    return sol(0).real();
}

}  // namespace

TEST(DirichletSphere, MonopoleClosedForm) {
    const auto row = t_scalar_dirichlet(0, 1.0);
    EXPECT_LT(rel(row.unscaled(0), std::sinh(1.0) * std::exp(1.0)), 1e-14);
    EXPECT_NEAR(row.unscaled(0), 3.1945280, 1e-7);
    EXPECT_EQ(row.scaled[0], kPi / 2.0);
}

TEST(DirichletSphere, SmallArgumentMatchesScatteringLength) {
    for (double x : {1e-3, 1e-5}) {
        const auto row = t_scalar_dirichlet(0, x);
        EXPECT_LT(rel(row.unscaled(0), x), 2.0 * x);  // t_0 = x + x^2 + ...
    }
}

TEST(DirichletSphere, PositiveAndFiniteEverywhere) {
    for (double x : {1e-3, 0.5, 2.0, 40.0, 500.0}) {
        const auto row = t_scalar_dirichlet(4, x);
        for (std::size_t l = 0; l < row.scaled.size(); ++l) {
            EXPECT_GT(row.scaled[l], 0.0);
            EXPECT_TRUE(std::isfinite(row.log_z[l]));
            if (x <= 2.0) EXPECT_GT(row.unscaled(l), 0.0);
        }
    }
    const auto row = t_scalar_dirichlet(4, 2.0);
    for (std::size_t l = 0; l <= 4; ++l) {
        const double nu = l + 0.5;
        const double expected = kPi / 2.0 * boost::math::cyl_bessel_i(nu, 2.0) / boost::math::cyl_bessel_k(nu, 2.0);
        EXPECT_LT(rel(row.unscaled(l), expected), 1e-13);
    }
}

TEST(DirichletSphere, DomainErrors) {
    EXPECT_THROW(t_scalar_dirichlet(2, 0.0), DomainError);
    EXPECT_THROW(t_scalar_dirichlet(2, -1.0), DomainError);
    EXPECT_THROW(t_scalar_dirichlet(-1, 1.0), DomainError);
}

TEST(DielectricSphere, MatchesMatchingFormulaOracle) {
    for (int l = 0; l <= 4; ++l) {
        for (double x : {0.3, 1.3, 4.0}) {
            for (double eps : {1.5, 10.0, 1e3}) {
                const auto row = t_scalar_dielectric(4, x, eps);
                EXPECT_LT(rel(row.unscaled(static_cast<std::size_t>(l)), dielectric_oracle(l, x, eps)), 1e-10)
                    << "l=" << l << " x=" << x << " eps=" << eps;
            }
        }
    }
}

TEST(DielectricSphere, VanishesLinearlyAsEpsilonApproachesOne) {
    for (std::size_t l = 0; l <= 2; ++l) {
        const double a = t_scalar_dielectric(2, 1.3, 1.0 + 1e-4).unscaled(l) / 1e-4;
        const double b = t_scalar_dielectric(2, 1.3, 1.0 + 1e-5).unscaled(l) / 1e-5;
        EXPECT_LT(rel(a, b), 1e-3) << l;
        EXPECT_GT(b, 0.0);
    }
}

TEST(DielectricSphere, DirichletLimit) {
    const auto d = t_scalar_dirichlet(2, 1.3);
    const auto e = t_scalar_dielectric(2, 1.3, 1e8);
    for (std::size_t l = 0; l <= 2; ++l) EXPECT_LT(rel(e.scaled[l], d.scaled[l]), 1e-3) << l;
}

TEST(DielectricSphere, FirstBornTermOracle) {
    // The derivative at eps = 1 is exactly the first Born term.
    for (int l = 0; l <= 2; ++l) {
        const double delta = 1e-7;
        const double slope = t_scalar_dielectric(2, 0.7, 1.0 + delta).unscaled(static_cast<std::size_t>(l)) / delta;
        EXPECT_LT(rel(slope, born_oracle(l, 0.7, 1.0)), 1e-5) << l;
    }
    // At eps = 1.05 the first term is already within a few percent.
    const double t0 = t_scalar_dielectric(0, 0.7, 1.05).unscaled(0);
    EXPECT_LT(rel(t0, born_oracle(0, 0.7, 0.05)), 0.05);
}

TEST(DielectricSphere, MonotoneInEpsilon) {
    const double grid[] = {1.01, 1.5, 2.0, 10.0, 100.0, 1e4, 1e6, 1e8};
    for (double x : {0.1, 1.0, 5.0}) {
        double previous[5] = {0, 0, 0, 0, 0};
        for (double eps : grid) {
            const auto row = t_scalar_dielectric(4, x, eps);
            for (std::size_t l = 0; l <= 4; ++l) {
                EXPECT_GT(row.scaled[l], previous[l]) << "x=" << x << " eps=" << eps << " l=" << l;
                previous[l] = row.scaled[l];
            }
        }
    }
}

TEST(DielectricSphere, DistanceToDirichletShrinksWithEpsilon) {
    for (double x : {0.3, 1.3, 6.0}) {
        const auto d = t_scalar_dirichlet(6, x);
        double last = std::numeric_limits<double>::infinity();
        for (int k = 2; k <= 8; ++k) {
            const auto e = t_scalar_dielectric(6, x, std::pow(10.0, k));
            double sup = 0.0;
            for (std::size_t l = 0; l <= 6; ++l) sup = std::max(sup, std::abs(e.scaled[l] - d.scaled[l]));
            EXPECT_LT(sup, last) << "x=" << x << " k=" << k;
            last = sup;
        }
    }
}

TEST(DielectricSphere, DomainErrors) {
    EXPECT_THROW(t_scalar_dielectric(2, 1.0, 1.0), DomainError);
    EXPECT_THROW(t_scalar_dielectric(2, 1.0, 0.5), DomainError);
    EXPECT_THROW(t_scalar_dielectric(2, 0.0, 2.0), DomainError);
    EXPECT_THROW(t_scalar_dielectric(2, 1.0, std::numeric_limits<double>::infinity()), DomainError);
}

TEST(ConductingSphere, TransverseElectricEqualsScalar) {
    for (double x : {0.01, 1.0, 7.0, 120.0}) {
        const auto em = t_em_conducting(8, x);
        const auto sc = t_scalar_dirichlet(8, x);
        for (int j = 1; j <= 8; ++j) {
            const std::size_t p = row_position(FieldKind::em, {j, Polarization::te});
            EXPECT_EQ(em.scaled[p], sc.scaled[static_cast<std::size_t>(j)]);
            EXPECT_EQ(em.log_z[p], sc.log_z[static_cast<std::size_t>(j)]);
        }
    }
}

TEST(ConductingSphere, TransverseMagneticOracleAndSign) {
    for (int j = 1; j <= 5; ++j) {
        for (double x : {0.2, 1.0, 3.0}) {
            const double nu = j + 0.5;
            const double di = boost::math::cyl_bessel_i(nu, x) / (2.0 * std::sqrt(x)) +
                              std::sqrt(x) * boost::math::cyl_bessel_i_prime(nu, x);
            const double dk = boost::math::cyl_bessel_k(nu, x) / (2.0 * std::sqrt(x)) +
                              std::sqrt(x) * boost::math::cyl_bessel_k_prime(nu, x);
            EXPECT_GT(di, 0.0);
            EXPECT_LT(dk, 0.0);  // sqrt(x) K decreases
            const auto row = t_em_conducting(5, x);
            const std::size_t p = row_position(FieldKind::em, {j, Polarization::tm});
            EXPECT_GT(row.unscaled(p), 0.0);
            EXPECT_LT(rel(row.unscaled(p), -kPi / 2.0 * di / dk), 1e-12) << j << ' ' << x;
        }
    }
}

TEST(ConductingSphere, TransverseMagneticSmallArgumentPower) {
    for (int j = 1; j <= 2; ++j) {
        const std::size_t p = row_position(FieldKind::em, {j, Polarization::tm});
        const double a = t_em_conducting(2, 0.01).unscaled(p);
        const double b = t_em_conducting(2, 0.005).unscaled(p);
        EXPECT_LT(rel(a / b, std::pow(2.0, 2 * j + 1)), 1e-3) << j;
    }
    EXPECT_THROW(t_em_conducting(0, 1.0), DomainError);
}

TEST(TRowDispatch, VariantsAndPositions) {
    EXPECT_EQ(t_row(DirichletSphere{2.0}, 3, 0.5).x, 1.0);
    EXPECT_EQ(t_row(DielectricSphere{1.0, 4.0, {}}, 3, 0.5).scaled, t_scalar_dielectric(3, 0.5, 4.0).scaled);
    const DielectricSphere dispersive{1.0, 2.0, [](double w) { return 1.0 + 3.0 / (1.0 + w); }};
    EXPECT_EQ(t_row(dispersive, 3, 1.0).scaled, t_scalar_dielectric(3, 1.0, 2.5).scaled);
    EXPECT_EQ(t_row(ConductingSphere{1.0}, 3, 0.5).modes.size(), 6u);
    EXPECT_THROW(t_row(Mirror{}, 3, 0.5), ConfigurationError);
    EXPECT_EQ(row_position(FieldKind::scalar, {3, Polarization::te}), 3u);
    EXPECT_EQ(row_position(FieldKind::em, {1, Polarization::tm}), 1u);
    EXPECT_EQ(row_position(FieldKind::em, {3, Polarization::te}), 4u);
}

TEST(ScattererChecks, ValidateAndCompatibility) {
    EXPECT_THROW(casimir::validate(Scatterer{DirichletSphere{0.0}}), ConfigurationError);
    EXPECT_THROW(casimir::validate(Scatterer{DielectricSphere{1.0, 1.0, {}}}), ConfigurationError);
    EXPECT_THROW(casimir::validate(Scatterer{OneD{DeltaPotential1D{-1.0}}}), ConfigurationError);
    EXPECT_NO_THROW(casimir::validate(Scatterer{ConductingSphere{1.0}}));
    EXPECT_TRUE(compatible(DirichletSphere{}, FieldKind::scalar));
    EXPECT_FALSE(compatible(DirichletSphere{}, FieldKind::em));
    EXPECT_TRUE(compatible(ConductingSphere{}, FieldKind::em));
    EXPECT_TRUE(compatible(Mirror{MirrorFlavor::em_permeable}, FieldKind::em));
    EXPECT_FALSE(compatible(Mirror{MirrorFlavor::scalar_neumann}, FieldKind::em));
}

TEST(Reflection1D, PerfectMirrorsAndDelta) {
    EXPECT_EQ(reflection_1d(PerfectMirror1D{-1}, 0.3), -1.0);
    EXPECT_EQ(reflection_1d(PerfectMirror1D{+1}, 0.3), 1.0);
    EXPECT_EQ(reflection_1d(DeltaPotential1D{std::numeric_limits<double>::infinity()}, 1.0), -1.0);
    EXPECT_NEAR(reflection_1d(DeltaPotential1D{1.0}, 1.0), -1.0 / 3.0, 1e-15);
}

TEST(Reflection1D, DeltaMatchesMatchingConditions) {
    for (double lambda : {0.1, 1.0, 7.0}) {
        for (double omega : {0.01, 1.0, 30.0}) {
            const double r = reflection_1d(DeltaPotential1D{lambda}, omega);
            EXPECT_NEAR(r, delta_reflection_oracle(lambda, omega), 1e-14);
            EXPECT_LT(std::abs(r), 1.0);
        }
    }
}
