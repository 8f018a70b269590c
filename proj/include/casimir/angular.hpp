#ifndef CASIMIR_ANGULAR_HPP
#define CASIMIR_ANGULAR_HPP

// Wigner 3j symbols and the translation matrices g^{(m)} that re-expand the
// free imaginary-frequency propagator between spherical bases centered on
// the two bodies. The separation vector is always taken along +z, so only
// the m'' = 0 harmonic of the addition theorem survives and the matrices
// decouple by azimuthal number m.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "casimir/errors.hpp"
#include "casimir/specfun.hpp"

namespace casimir {

enum class FieldKind { scalar, em };

enum class Polarization { te = 0, tm = 1 };

/// One basis state inside an m block: angular momentum l (j for EM) and polarization.
/// Scalar blocks always carry Polarization::te.
struct ModeIndex {
    int l = 0;
    Polarization pol = Polarization::te;

    friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
};

/// Ordered basis of the m block truncated at l0: ascending l, TE before TM at each j.
inline std::vector<ModeIndex> basis_modes(FieldKind kind, int m, int l0) {
    std::vector<ModeIndex> modes;
    const int am = std::abs(m);
    if (kind == FieldKind::scalar) {
        for (int l = am; l <= l0; ++l) modes.push_back({l, Polarization::te});
    } else {
        for (int j = std::max(1, am); j <= l0; ++j) {
            modes.push_back({j, Polarization::te});
            modes.push_back({j, Polarization::tm});
        }
    }
    return modes;
}

}  // namespace casimir

namespace casimir::angular {

struct ThreeJArgs {
    int j1 = 0, j2 = 0, j3 = 0;
    int m1 = 0, m2 = 0, m3 = 0;
};

namespace detail {

inline bool triangle(int a, int b, int c) { return c >= std::abs(a - b) && c <= a + b; }

inline double parity_sign(int n) { return (n % 2 == 0) ? 1.0 : -1.0; }

}  // namespace detail

/// Row of 3j(j1 j2 J; m1 m2 -m1-m2) for J = j_min..j1+j2.
struct ThreeJRow {
    int j_min = 0;
    std::vector<double> values;

    double at(int j) const {
        const int k = j - j_min;
        return (k < 0 || k >= static_cast<int>(values.size())) ? 0.0 : values[static_cast<std::size_t>(k)];
    }
};

/// Whole row in J by the three-term Schulten-Gordon recursion.
///
/// Forward from the lower end and backward from the upper end, each in its
/// growing direction, matched inside the classically allowed region and
/// normalized by sum (2J+1) f^2 = 1. Accurate to a few ulps of the row's
/// largest entry at any order; an empty row means the symbol vanishes for all J.
inline ThreeJRow wigner3j_row(int j1, int j2, int m1, int m2) {
    ThreeJRow row;
    const int m3 = -m1 - m2;
    if (j1 < 0 || j2 < 0 || std::abs(m1) > j1 || std::abs(m2) > j2) return row;
    const int lo = std::max(std::abs(j1 - j2), std::abs(m3));
    const int hi = j1 + j2;
    row.j_min = lo;
    if (lo > hi) return row;
    const auto n = static_cast<std::size_t>(hi - lo + 1);
    row.values.assign(n, 0.0);
    const double sign_top = detail::parity_sign(j1 - j2 - m3);
    if (n == 1) {
        row.values[0] = sign_top / std::sqrt(2.0 * lo + 1.0);
        return row;
    }

    const double c12 = j1 * (j1 + 1.0) - j2 * (j2 + 1.0);
    const auto a_coef = [&](double j) {
        const double d = static_cast<double>(j1 - j2);
        const double s = j1 + j2 + 1.0;
        return std::sqrt(std::max(0.0, (j * j - d * d) * (s * s - j * j) * (j * j - double(m3) * m3)));
    };
    const auto b_coef = [&](double j) { return -(2.0 * j + 1.0) * (c12 * m3 - j * (j + 1.0) * (m2 - m1)); };
    const auto idx = [&](int j) { return static_cast<std::size_t>(j - lo); };

    // Middle of the region where the recursion oscillates.
    int first_allowed = -1, last_allowed = -1;
    for (int j = lo + 1; j < hi; ++j) {
        const double b = b_coef(j);
        if (b * b < 4.0 * j * (j + 1.0) * a_coef(j) * a_coef(j + 1.0)) {
            if (first_allowed < 0) first_allowed = j;
            last_allowed = j;
        }
    }
    const int mid = first_allowed < 0 ? (lo + hi) / 2 : (first_allowed + last_allowed) / 2;
    const int fwd_end = std::min(hi, mid + 1);
    const int bwd_end = std::max(lo, mid - 1);
    constexpr double big = 1e100;

    std::vector<double> fwd(n, 0.0);
    fwd[0] = 1.0;
    if (fwd_end > lo) {
        if (lo == 0) {
            // j1 = j2, m3 = 0: both ends of the two-term start vanish.
            fwd[1] = m1 / std::sqrt(j1 * (j1 + 1.0));
        } else {
            fwd[1] = -b_coef(lo) / (lo * a_coef(lo + 1.0));
        }
        for (int j = lo + 1; j < fwd_end; ++j) {
            fwd[idx(j + 1)] = -(b_coef(j) * fwd[idx(j)] + (j + 1.0) * a_coef(j) * fwd[idx(j - 1)]) /
                              (j * a_coef(j + 1.0));
            if (std::abs(fwd[idx(j + 1)]) > big) {
                for (int k = lo; k <= j + 1; ++k) fwd[idx(k)] /= big;
            }
        }
    }

    std::vector<double> bwd(n, 0.0);
    bwd[idx(hi)] = 1.0;
    for (int j = hi; j > bwd_end; --j) {
        const double next = j < hi ? bwd[idx(j + 1)] : 0.0;
        bwd[idx(j - 1)] = -(b_coef(j) * bwd[idx(j)] + j * a_coef(j + 1.0) * next) / ((j + 1.0) * a_coef(j));
        if (std::abs(bwd[idx(j - 1)]) > big) {
            for (int k = j - 1; k <= hi; ++k) bwd[idx(k)] /= big;
        }
    }

    // Least-squares scale on the overlap bwd_end..fwd_end.
    double num = 0.0, den = 0.0;
    for (int j = bwd_end; j <= fwd_end; ++j) {
        num += fwd[idx(j)] * bwd[idx(j)];
        den += bwd[idx(j)] * bwd[idx(j)];
    }
    const double scale = num / den;
    for (int j = lo; j <= hi; ++j) row.values[idx(j)] = j <= mid ? fwd[idx(j)] : scale * bwd[idx(j)];

    double norm = 0.0;
    for (int j = lo; j <= hi; ++j) norm += (2.0 * j + 1.0) * row.values[idx(j)] * row.values[idx(j)];
    const double factor = (row.values[idx(hi)] < 0.0 ? -sign_top : sign_top) / std::sqrt(norm);
    for (double& v : row.values) v *= factor;
    return row;
}

/// Wigner 3j symbol by the Racah single sum.
///
/// Factorials enter through log_factorial; the alternating sum is accumulated
/// with Neumaier compensation in long double. When the terms cancel by more
/// than three orders of magnitude the value is taken from wigner3j_row instead,
/// since the double-precision log-factorials then limit the sum. Any violated
/// selection rule yields exactly 0.
inline double wigner3j(const ThreeJArgs& a) {
    const auto [j1, j2, j3, m1, m2, m3] = a;
    if (j1 < 0 || j2 < 0 || j3 < 0) return 0.0;
    if (m1 + m2 + m3 != 0) return 0.0;
    if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m3) > j3) return 0.0;
    if (!detail::triangle(j1, j2, j3)) return 0.0;
    // (j1 j2 j3; 0 0 0) vanishes for odd j1+j2+j3.
    if (m1 == 0 && m2 == 0 && m3 == 0 && (j1 + j2 + j3) % 2 != 0) return 0.0;

    using specfun::log_factorial;
    const long double log_prefactor =
        0.5L * (static_cast<long double>(log_factorial(j1 + j2 - j3)) + log_factorial(j1 - j2 + j3) +
                log_factorial(-j1 + j2 + j3) - log_factorial(j1 + j2 + j3 + 1) +
                log_factorial(j1 + m1) + log_factorial(j1 - m1) + log_factorial(j2 + m2) +
                log_factorial(j2 - m2) + log_factorial(j3 + m3) + log_factorial(j3 - m3));

    const int k_min = std::max({0, j2 - j3 - m1, j1 - j3 + m2});
    const int k_max = std::min({j1 + j2 - j3, j1 - m1, j2 + m2});
    if (k_min > k_max) return 0.0;

    std::vector<long double> log_terms;
    log_terms.reserve(static_cast<std::size_t>(k_max - k_min + 1));
    long double largest = -std::numeric_limits<long double>::infinity();
    for (int k = k_min; k <= k_max; ++k) {
        const long double log_den = static_cast<long double>(log_factorial(k)) +
                                    log_factorial(j3 - j2 + k + m1) + log_factorial(j3 - j1 + k - m2) +
                                    log_factorial(j1 + j2 - j3 - k) + log_factorial(j1 - k - m1) +
                                    log_factorial(j2 - k + m2);
        log_terms.push_back(log_prefactor - log_den);
        largest = std::max(largest, log_terms.back());
    }

    // Terms are summed relative to the largest one and rescaled at the end.
    long double sum = 0.0L;
    long double compensation = 0.0L;
    for (int k = k_min; k <= k_max; ++k) {
        const long double term = ((k % 2 == 0) ? 1.0L : -1.0L) *
                                 std::exp(log_terms[static_cast<std::size_t>(k - k_min)] - largest);
        const long double t = sum + term;
        if (std::abs(sum) >= std::abs(term)) {
            compensation += (sum - t) + term;
        } else {
            compensation += (term - t) + sum;
        }
        sum = t;
    }
    const long double reduced = sum + compensation;
    if (std::abs(reduced) < 1e-3L) return wigner3j_row(j1, j2, m1, m2).at(j3);
    return static_cast<double>(detail::parity_sign(j1 - j2 - m3) * reduced * std::exp(largest));
}

/// Angular overlap  \int dOmega Y_{j3 m3} (Y^{(a1)*}_{j1 m1} . Y^{(a2)}_{j2 m2})  of two
/// transverse vector harmonics, with Y^{(0)} = L Y_{jm}/sqrt(j(j+1)) (TE) and
/// i Y^{(1)} = rhat x Y^{(0)} (TM).
///
/// Equal polarizations couple only for even j1+j2+j3, opposite ones only for odd.
namespace detail {

// Shared body of em_dot_integral given its three 3j factors.
inline double em_dot_from(int j1, int m1, Polarization a1, int j2, Polarization a2, int j3, double azimuthal,
                          double w000, double w1m10) {
    if (azimuthal == 0.0) return 0.0;
    const int parity = (j1 + j2 + j3) % 2;
    const double norm =
        std::sqrt((2.0 * j1 + 1.0) * (2.0 * j2 + 1.0) * (2.0 * j3 + 1.0) / (4.0 * std::numbers::pi));
    const double phase = parity_sign(m1);
    if (a1 == a2) {
        if (parity != 0) return 0.0;
        const double c1 = j1 * (j1 + 1.0);
        const double c2 = j2 * (j2 + 1.0);
        const double c3 = j3 * (j3 + 1.0);
        const double angular = (c1 + c2 - c3) / (2.0 * std::sqrt(c1 * c2));
        return phase * angular * norm * w000 * azimuthal;
    }
    if (parity != 1) return 0.0;
    return -phase * norm * w1m10 * azimuthal;
}

}  // namespace detail

inline double em_dot_integral(int j1, int m1, Polarization a1, int j2, int m2, Polarization a2, int j3,
                              int m3) {
    if (j1 < 1 || j2 < 1) throw DomainError("em_dot_integral: EM multipoles need j >= 1");
    if (j3 < 0) throw DomainError("em_dot_integral: negative j3");
    const double azimuthal = wigner3j({j1, j2, j3, -m1, m2, m3});
    if (azimuthal == 0.0) return 0.0;
    return detail::em_dot_from(j1, m1, a1, j2, a2, j3, azimuthal, wigner3j({j1, j2, j3, 0, 0, 0}),
                               wigner3j({j1, j2, j3, 1, -1, 0}));
}

/// How the z factors are chosen when a translation matrix is renormalized.
///
/// unit: g is returned as is. bodies: rows carry z_l(row_x), columns z_l(col_x)
/// with z_l(y)^2 = I_{l+1/2}(y)/K_{l+1/2}(y), y = omega R of the respective body.
struct ScaleSpec {
    bool unit = true;
    double row_x = 0.0;
    double col_x = 0.0;

    static ScaleSpec identity() { return {}; }
    static ScaleSpec bodies(double row_x, double col_x) { return {false, row_x, col_x}; }
};

/// ln z_l for l = 0..l_max at argument y = omega R.
inline std::vector<double> log_scale_factors(int l_max, double y) {
    const auto row = specfun::bessel_ik_half_log(l_max, y);
    std::vector<double> out(row.log_i.size());
    for (std::size_t l = 0; l < out.size(); ++l) out[l] = y + 0.5 * (row.log_i[l] - row.log_k[l]);
    return out;
}

struct TranslationTable {
    FieldKind field_kind = FieldKind::scalar;
    int m = 0;
    double x = 0.0;
    int l0 = 0;
    std::vector<ModeIndex> modes;
    Eigen::MatrixXd entries;          // z_row[p] z_col[q] g_{pq}
    std::vector<double> log_z_row;    // per mode, 0 for unit scaling
    std::vector<double> log_z_col;
};

/// The frequency-independent part of g^{(m)}: for each matrix element a short
/// list of (l, c) pairs with  g_{pq}(x) = sum_l c * K_{l+1/2}(x) / sqrt(x).
///
/// Built once per (field, |m|, l0) and reused for every quadrature node.
class TranslationCoefficients {
public:
    struct Term {
        int l;
        double c;
    };

    TranslationCoefficients(FieldKind kind, int m, int l0) : kind_(kind), m_(std::abs(m)), l0_(l0) {
        const int min_l = kind == FieldKind::scalar ? m_ : std::max(1, m_);
        if (l0 < min_l) {
            throw DomainError("translation matrix: truncation l0=" + std::to_string(l0) +
                              " leaves no modes for m=" + std::to_string(m));
        }
        modes_ = basis_modes(kind, m_, l0);
        const std::size_t n = modes_.size();
        terms_.resize(n * n);
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p; q < n; ++q) {
                auto list = kind == FieldKind::scalar ? scalar_terms(modes_[p].l, modes_[q].l)
                                                      : em_terms(modes_[p], modes_[q]);
                terms_[q * n + p] = list;
                terms_[p * n + q] = std::move(list);
            }
        }
    }

    FieldKind field_kind() const { return kind_; }
    int m() const { return m_; }
    int l0() const { return l0_; }
    const std::vector<ModeIndex>& modes() const { return modes_; }
    std::size_t size() const { return modes_.size(); }
    const std::vector<Term>& terms(std::size_t p, std::size_t q) const { return terms_[p * size() + q]; }

    /// Highest Bessel order needed.
    int max_order() const { return 2 * l0_; }

    /// Renormalized entries z_row[p] z_col[q] g_{pq}(x) given the log row of K at x
    /// and per-mode ln z (indexed by the mode's l; empty vectors mean unit scaling).
    Eigen::MatrixXd evaluate(const specfun::LogBesselRow& separation_row, const std::vector<double>& log_z_row,
                             const std::vector<double>& log_z_col) const {
        const std::size_t n = size();
        const double x = separation_row.x;
        // ln(K_{l+1/2}(x)/sqrt(x)) per order.
        std::vector<double> log_kernel(separation_row.log_k.size());
        for (std::size_t l = 0; l < log_kernel.size(); ++l) {
            log_kernel[l] = separation_row.log_k[l] - x - 0.5 * std::log(x);
        }
        Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t p = 0; p < n; ++p) {
            const double zr = log_z_row.empty() ? 0.0 : log_z_row[static_cast<std::size_t>(modes_[p].l)];
            for (std::size_t q = 0; q < n; ++q) {
                const double zc = log_z_col.empty() ? 0.0 : log_z_col[static_cast<std::size_t>(modes_[q].l)];
                double sum = 0.0;
                for (const Term& t : terms(p, q)) {
                    sum += t.c * std::exp(zr + zc + log_kernel[static_cast<std::size_t>(t.l)]);
                }
                out(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = sum;
            }
        }
        return out;
    }

private:
    std::vector<Term> scalar_terms(int l1, int l2) const {
        // (-1)^{m+1} sqrt((2l1+1)(2l2+1)) (2l+1) sqrt(2/pi) (l2 l1 l; 0 0 0)(l2 l1 l; m -m 0)
        std::vector<Term> out;
        const double sign = detail::parity_sign(m_ + 1);
        const double outer = sign * std::sqrt((2.0 * l1 + 1.0) * (2.0 * l2 + 1.0)) *
                             std::sqrt(2.0 / std::numbers::pi);
        const ThreeJRow zero = wigner3j_row(l2, l1, 0, 0);
        const ThreeJRow shifted = wigner3j_row(l2, l1, m_, -m_);
        for (int l = std::abs(l1 - l2); l <= l1 + l2; l += 2) {
            const double w0 = zero.at(l);
            const double wm = shifted.at(l);
            if (w0 == 0.0 || wm == 0.0) continue;
            out.push_back({l, outer * (2.0 * l + 1.0) * w0 * wm});
        }
        return out;
    }

    std::vector<Term> em_terms(const ModeIndex& a, const ModeIndex& b) const {
        // sqrt(8 (2l+1)) \int Y_{l0} (Y^{(a)*}_{jm} . Y^{(b)}_{j'm})
        std::vector<Term> out;
        const ThreeJRow azimuthal = wigner3j_row(a.l, b.l, -m_, m_);
        const ThreeJRow zero = wigner3j_row(a.l, b.l, 0, 0);
        const ThreeJRow flip = wigner3j_row(a.l, b.l, 1, -1);
        for (int l = std::abs(a.l - b.l); l <= a.l + b.l; ++l) {
            const double overlap =
                detail::em_dot_from(a.l, m_, a.pol, b.l, b.pol, l, azimuthal.at(l), zero.at(l), flip.at(l));
            if (overlap == 0.0) continue;
            out.push_back({l, std::sqrt(8.0 * (2.0 * l + 1.0)) * overlap});
        }
        return out;
    }

    FieldKind kind_;
    int m_;
    int l0_;
    std::vector<ModeIndex> modes_;
    std::vector<std::vector<Term>> terms_;
};

namespace detail {

inline TranslationTable build_table(FieldKind kind, int m, int l0, double x, const ScaleSpec& scaling) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("translation matrix: x must be positive, got " + std::to_string(x));
    }
    const TranslationCoefficients coeffs(kind, m, l0);
    TranslationTable table;
    table.field_kind = kind;
    table.m = m;
    table.x = x;
    table.l0 = l0;
    table.modes = coeffs.modes();
    std::vector<double> zr, zc;
    if (!scaling.unit) {
        zr = log_scale_factors(l0, scaling.row_x);
        zc = log_scale_factors(l0, scaling.col_x);
    }
    table.entries = coeffs.evaluate(specfun::bessel_ik_half_log(coeffs.max_order(), x), zr, zc);
    for (const auto& mode : table.modes) {
        table.log_z_row.push_back(zr.empty() ? 0.0 : zr[static_cast<std::size_t>(mode.l)]);
        table.log_z_col.push_back(zc.empty() ? 0.0 : zc[static_cast<std::size_t>(mode.l)]);
    }
    return table;
}

}  // namespace detail

/// Scalar translation block g^{(m)}_{l1 l2}(x), x = a omega, l1, l2 = |m|..l0.
inline TranslationTable scalar_translation(int m, int l0, double x, const ScaleSpec& scaling) {
    return detail::build_table(FieldKind::scalar, m, l0, x, scaling);
}

/// EM translation block over (j, polarization), j = max(1,|m|)..l0, TE before TM.
inline TranslationTable em_translation(int m, int l0, double x, const ScaleSpec& scaling) {
    return detail::build_table(FieldKind::em, m, l0, x, scaling);
}

}  // namespace casimir::angular

#endif  // CASIMIR_ANGULAR_HPP
