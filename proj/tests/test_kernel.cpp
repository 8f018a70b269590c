#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include "casimir/kernel.hpp"

using namespace casimir;
using namespace casimir::kernel;

namespace {

constexpr double kPi = std::numbers::pi;

Configuration dirichlet_pair(double r1, double r2, double a) {
    return Configuration::two_spheres(FieldKind::scalar, DirichletSphere{r1}, DirichletSphere{r2}, a);
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

// s-wave closed form: g_00 t_0 = -e^{-a w} sinh(w R) e^{w R} / (a w).
double s_wave(double a, double r, double w) { return -std::exp(-a * w) * std::sinh(w * r) * std::exp(w * r) / (a * w); }

}  // namespace

TEST(AssembleBlock, SWaveClosedForm) {
    for (double w : {0.05, 0.7, 3.0}) {
        for (auto r : {Renormalization::production, Renormalization::unit}) {
            const auto b = assemble_block(dirichlet_pair(1.0, 1.0, 3.0), 0, w, 0, r);
            ASSERT_EQ(b.entries.rows(), 1);
            const double expected = std::pow(s_wave(3.0, 1.0, w), 2);
            EXPECT_NEAR(b.entries(0, 0), expected, 1e-14 * expected) << w;
            EXPECT_EQ(b.kind, BlockKind::full_k);
            EXPECT_EQ(b.omega, w);
        }
    }
}

TEST(AssembleKTilde, SWaveClosedFormForMirror) {
    const auto mirror = Configuration::sphere_and_mirror(FieldKind::scalar, DirichletSphere{1.0},
                                                         MirrorFlavor::scalar_dirichlet, 3.0);
    const double w = 0.4;
    const auto t = assemble_ktilde(mirror, 0, w, 0);
    EXPECT_NEAR(t.entries(0, 0), s_wave(3.0, 1.0, w), 1e-15);
    EXPECT_EQ(t.kind, BlockKind::k_tilde);
    // Dirichlet mirror: ln det(1 + K~), carried as the full block -K~.
    const auto full = assemble_block(mirror, 0, w, 0);
    EXPECT_EQ(full.entries(0, 0), -t.entries(0, 0));
    auto neumann = mirror;
    neumann.body_b = Mirror{MirrorFlavor::scalar_neumann};
    EXPECT_EQ(assemble_block(neumann, 0, w, 0).entries(0, 0), t.entries(0, 0));
}

TEST(AssembleBlock, EvenInM) {
    const Configuration configs[] = {
        dirichlet_pair(1.0, 2.0, 4.0),
        Configuration::two_spheres(FieldKind::em, ConductingSphere{1.0}, ConductingSphere{1.0}, 2.5),
        Configuration::two_spheres(FieldKind::scalar, DielectricSphere{1.0, 3.0, {}}, DirichletSphere{0.5}, 2.0)};
    for (const auto& c : configs) {
        for (int m = 1; m <= 3; ++m) {
            const auto plus = assemble_block(c, m, 0.8, 6);
            const auto minus = assemble_block(c, -m, 0.8, 6);
            EXPECT_TRUE(plus.entries == minus.entries);
            EXPECT_TRUE(plus.entries.allFinite());
        }
    }
    const auto mirror = Configuration::sphere_and_mirror(FieldKind::em, ConductingSphere{1.0},
                                                         MirrorFlavor::em_conducting, 3.0);
    EXPECT_TRUE(assemble_ktilde(mirror, 2, 0.3, 5).entries == assemble_ktilde(mirror, -2, 0.3, 5).entries);
}

// Dilute spheres: K assembled from first-order Born T-matrices and the bare
// translation matrix agrees with the exact block up to O(chi) corrections.
TEST(AssembleBlock, DiluteBlockMatchesBornConstruction) {
    const double chi = 0.01, a = 3.0, w = 0.6, r = 1.0;
    const int l0 = 4, m = 1;
    const auto config = Configuration::two_spheres(FieldKind::scalar, DielectricSphere{r, 1.0 + chi, {}},
                                                   DielectricSphere{r, 1.0 + chi, {}}, a);
    const auto exact = assemble_block(config, m, w, l0, Renormalization::unit);
    const auto g = angular::scalar_translation(m, l0, a * w, angular::ScaleSpec::identity()).entries;
    Eigen::VectorXd t(g.rows());
    for (int l = m; l <= l0; ++l) {
        const auto f = [l](double y) {
            const double i = std::sqrt(kPi / (2.0 * y)) * boost::math::cyl_bessel_i(l + 0.5, y);
            return y * y * i * i;
        };
        t(l - m) = chi * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, w * r, 10, 1e-14);
    }
    const Eigen::MatrixXd born = g * t.asDiagonal() * g.transpose() * t.asDiagonal();
    const double scale = max_abs(born);
    for (Eigen::Index i = 0; i < born.rows(); ++i) {
        for (Eigen::Index j = 0; j < born.cols(); ++j) {
            EXPECT_NEAR(exact.entries(i, j), born(i, j), 3.0 * chi * scale) << i << ' ' << j;
        }
    }
    EXPECT_LT((exact.entries - born).norm(), 2.0 * chi * born.norm());
}

TEST(AssembleKTilde, SquareEqualsFullBlock) {
    const Configuration configs[] = {
        dirichlet_pair(1.0, 1.0, 2.4),
        Configuration::two_spheres(FieldKind::em, ConductingSphere{1.0}, ConductingSphere{1.0}, 3.0),
        Configuration::two_spheres(FieldKind::scalar, DielectricSphere{0.7, 9.0, {}}, DielectricSphere{0.7, 9.0, {}},
                                   2.0)};
    for (const auto& c : configs) {
        for (int m : {0, 1, 3}) {
            for (double w : {0.1, 1.0, 4.0}) {
                const auto k = assemble_block(c, m, w, 8);
                const auto kt = assemble_ktilde(c, m, w, 8);
                const Eigen::MatrixXd sq = kt.entries * kt.entries;
                EXPECT_LE(max_abs(sq - k.entries), 1e-12 * std::max(1.0, max_abs(k.entries))) << m << ' ' << w;
            }
        }
    }
}

TEST(AssembleKTilde, RejectsAsymmetricPairs) {
    EXPECT_THROW(assemble_ktilde(dirichlet_pair(1.0, 2.0, 4.0), 0, 1.0, 3), ConfigurationError);
    const auto mixed =
        Configuration::two_spheres(FieldKind::scalar, DirichletSphere{1.0}, DielectricSphere{1.0, 5.0, {}}, 3.0);
    EXPECT_THROW(assemble_ktilde(mixed, 0, 1.0, 3), ConfigurationError);
    const auto eps =
        Configuration::two_spheres(FieldKind::scalar, DielectricSphere{1.0, 4.0, {}}, DielectricSphere{1.0, 5.0, {}}, 3.0);
    EXPECT_THROW(assemble_ktilde(eps, 0, 1.0, 3), ConfigurationError);
}

TEST(AssembleBlock, RejectsInvalidInput) {
    EXPECT_THROW(assemble_block(dirichlet_pair(1.0, 1.0, 2.0), 0, 1.0, 3), ConfigurationError);
    EXPECT_THROW(assemble_block(dirichlet_pair(1.0, 1.0, 3.0), 0, 0.0, 3), DomainError);
    EXPECT_THROW(assemble_block(dirichlet_pair(1.0, 1.0, 3.0), 4, 1.0, 3), DomainError);
    const auto wrong_field = Configuration::two_spheres(FieldKind::em, DirichletSphere{1.0}, DirichletSphere{1.0}, 3.0);
    EXPECT_THROW(assemble_block(wrong_field, 0, 1.0, 3), ConfigurationError);
    const auto touching_mirror = Configuration::sphere_and_mirror(FieldKind::scalar, DirichletSphere{1.0},
                                                                  MirrorFlavor::scalar_dirichlet, 2.0);
    EXPECT_THROW(assemble_block(touching_mirror, 0, 1.0, 3), ConfigurationError);
}

TEST(LogDet, Examples) {
    EXPECT_EQ(logdet_one_minus(Eigen::MatrixXd::Zero(3, 3)), 0.0);
    EXPECT_NEAR(logdet_one_minus(Eigen::MatrixXd::Constant(1, 1, 0.5)), std::log(0.5), 1e-16);
    EXPECT_NEAR(logdet_one_minus(Eigen::MatrixXd::Constant(1, 1, 0.5)), -0.6931472, 1e-7);
    EXPECT_NEAR(logdet_one_minus(Eigen::MatrixXd::Constant(1, 1, 0.5), -1), std::log(1.5), 1e-16);
}

TEST(LogDet, MatchesEigenvalueSumForRandomContractions) {
    std::mt19937 rng(99);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + trial % 9;
        Eigen::MatrixXd a(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
        }
        Eigen::MatrixXd s = 0.5 * (a + a.transpose());
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
        s *= 0.95 / solver.eigenvalues().cwiseAbs().maxCoeff();
        const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s).eigenvalues();
        const double expected = (1.0 - ev.array()).log().sum();
        EXPECT_NEAR(logdet_one_minus(s), expected, 1e-10);
    }
}

TEST(LogDet, SingularAndIndefiniteInputs) {
    EXPECT_THROW(signed_log_det(Eigen::MatrixXd::Zero(2, 2)), SingularityError);
    EXPECT_THROW(logdet_one_minus(Eigen::MatrixXd::Identity(2, 2)), SingularityError);
    EXPECT_THROW(logdet_one_minus(Eigen::MatrixXd::Constant(1, 1, 2.0)), SingularityError);  // det = -1
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
    bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(logdet_one_minus(bad), DomainError);
    EXPECT_THROW(signed_log_det(Eigen::MatrixXd::Zero(2, 3)), DomainError);
    Eigen::Matrix2d swap;
    swap << 0.0, 2.0, 3.0, 0.0;
    const auto d = signed_log_det(swap);
    EXPECT_EQ(d.sign, -1);
    EXPECT_NEAR(d.log_abs, std::log(6.0), 1e-15);
}

TEST(Spectrum, DirichletBlocksAreContractions) {
    for (double a : {2.05, 2.5, 4.0}) {
        for (int m : {0, 1, 4}) {
            for (double w : {0.01, 0.5, 3.0}) {
                const auto r = spectral_check(assemble_block(dirichlet_pair(1.0, 1.0, a), m, w, 12));
                EXPECT_FALSE(r.violation) << a << ' ' << m << ' ' << w;
                EXPECT_GE(r.min_eigenvalue, -1e-9);
                EXPECT_LT(r.max_eigenvalue, 1.0);
            }
        }
    }
}

TEST(Spectrum, FarApartBlocksVanish) {
    const auto r = spectral_check(assemble_block(dirichlet_pair(1.0, 1.0, 200.0), 0, 0.01, 4));
    EXPECT_LT(r.max_eigenvalue, 1e-3);
    const auto near = spectral_check(assemble_block(dirichlet_pair(1.0, 1.0, 200.0), 0, 0.001, 4));
    EXPECT_LT(near.max_eigenvalue, 1e-3);
}

TEST(Spectrum, NearContactApproachesButStaysBelowOne) {
    double previous = 0.0;
    for (double a : {2.5, 2.2, 2.05, 2.01}) {
        const auto r = spectral_check(assemble_block(dirichlet_pair(1.0, 1.0, a), 0, 0.05, 40));
        EXPECT_GT(r.max_eigenvalue, previous) << a;
        EXPECT_LT(r.max_eigenvalue, 1.0) << a;
        previous = r.max_eigenvalue;
    }
    EXPECT_GT(previous, 0.5);
}

TEST(Spectrum, ViolationFlag) {
    EXPECT_TRUE(spectral_check(Eigen::MatrixXd::Constant(1, 1, 1.0)).violation);
    EXPECT_TRUE(spectral_check(Eigen::MatrixXd::Constant(1, 1, -0.1)).violation);
    EXPECT_FALSE(spectral_check(Eigen::MatrixXd::Constant(1, 1, 0.3)).violation);
}

TEST(Renormalization, LogDetIsInvariant) {
    const Configuration configs[] = {
        dirichlet_pair(1.0, 2.0, 4.0),
        Configuration::two_spheres(FieldKind::em, ConductingSphere{1.0}, ConductingSphere{1.0}, 3.0),
        Configuration::two_spheres(FieldKind::scalar, DielectricSphere{1.0, 7.0, {}}, DirichletSphere{1.0}, 2.5)};
    for (const auto& c : configs) {
        for (int m : {0, 1, 2}) {
            for (double w : {0.05, 0.5, 2.0}) {
                const double scaled = logdet_one_minus(assemble_block(c, m, w, 6));
                const double unit = logdet_one_minus(assemble_block(c, m, w, 6, Renormalization::unit));
                EXPECT_NEAR(scaled, unit, 1e-10 * std::max(1.0, std::abs(unit))) << m << ' ' << w;
            }
        }
    }
}

TEST(Determinant, InUnitIntervalAndSplits) {
    const Configuration configs[] = {
        dirichlet_pair(1.0, 1.0, 2.1),
        Configuration::two_spheres(FieldKind::em, ConductingSphere{1.0}, ConductingSphere{1.0}, 2.2),
        Configuration::two_spheres(FieldKind::scalar, DielectricSphere{1.0, 50.0, {}}, DielectricSphere{1.0, 50.0, {}},
                                   2.3)};
    for (const auto& c : configs) {
        for (int m : {0, 1, 5}) {
            for (double w : {0.02, 0.3, 1.5, 6.0}) {
                const double full = logdet_one_minus(assemble_block(c, m, w, 14));
                EXPECT_LE(full, 0.0);
                EXPECT_GT(std::exp(full), 0.0);
                const auto kt = assemble_ktilde(c, m, w, 14);
                const double split = logdet_one_minus(kt, -1) + logdet_one_minus(kt, +1);
                EXPECT_NEAR(full, split, 1e-10) << m << ' ' << w;
            }
        }
    }
}

TEST(BlockDump, RoundTrip) {
    const auto b = assemble_block(dirichlet_pair(1.0, 1.5, 3.0), 1, 0.37, 5);
    std::stringstream s;
    dump_block(s, b);
    const auto back = read_block(s);
    EXPECT_EQ(back.m, b.m);
    EXPECT_EQ(back.omega, b.omega);
    EXPECT_EQ(back.l0, b.l0);
    EXPECT_EQ(back.kind, b.kind);
    EXPECT_TRUE(back.entries == b.entries);
    std::stringstream header_only("1 0.5 3 k-tilde\n");
    EXPECT_EQ(read_block(header_only).kind, BlockKind::k_tilde);
    std::stringstream bad_kind("1 0.5 3 other\n");
    EXPECT_THROW(read_block(bad_kind), ParseError);
    std::stringstream ragged("0 1 1 full-K\n1 2\n3\n");
    EXPECT_THROW(read_block(ragged), ParseError);
}
