#ifndef CASIMIR_SPECFUN_HPP
#define CASIMIR_SPECFUN_HPP

// Modified Bessel functions of half-integer order on the positive real axis.
//
// Only exponentially scaled values e^{-x} I_{l+1/2}(x) and e^{x} K_{l+1/2}(x)
// (or their logarithms) are ever formed. K comes from the upward recurrence
// of the ratio K_{l+3/2}/K_{l+1/2}, which is stable. The ratio
// I_{l+3/2}/I_{l+1/2} is seeded at the top order and recurred downward, and
// I itself is recovered from the Wronskian
//     I_{l+1/2} K_{l+3/2} + I_{l+3/2} K_{l+1/2} = 1/x,
// so no term involves a cancellation for any x. The elementary closed forms
// for half-integer orders are not used except as test oracles.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "casimir/errors.hpp"

namespace casimir::specfun {

/// e^{-x} I_{l+1/2}(x) and e^{x} K_{l+1/2}(x) for l = 0..max_order.
struct ScaledBesselRow {
    double x = 0.0;
    int max_order = 0;
    std::vector<double> i_scaled;
    std::vector<double> k_scaled;
};

/// Logarithmic form of ScaledBesselRow plus the adjacent-order ratios.
///
/// log_i[l] = ln(e^{-x} I_{l+1/2}(x)), log_k[l] = ln(e^{x} K_{l+1/2}(x)),
/// i_ratio[l] = I_{l+3/2}/I_{l+1/2}, k_ratio[l] = K_{l+3/2}/K_{l+1/2}.
/// Never overflows; this is what the kernel consumes.
struct LogBesselRow {
    double x = 0.0;
    int max_order = 0;
    std::vector<double> log_i;
    std::vector<double> log_k;
    std::vector<double> i_ratio;
    std::vector<double> k_ratio;
};

namespace detail {

inline void require_positive_argument(double x, const char* who) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError(std::string(who) + ": argument must be positive and finite, got x=" +
                          std::to_string(x));
    }
}

// Terminating large-argument series S_l(z) with
// e^{-z} I_{l+1/2}(z) = S_l(z)/sqrt(2 pi z) + O(e^{-2z}).
inline double hankel_series(int l, double z) {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 0; k < l; ++k) {
        term *= -static_cast<double>(l + k + 1) * static_cast<double>(l - k) /
                (static_cast<double>(k + 1) * 2.0 * z);
        sum += term;
    }
    return sum;
}

inline bool use_hankel_seed(int order, double x) {
    const double threshold =
        std::max(1000.0, 4.0 * static_cast<double>(order + 1) * static_cast<double>(order + 2));
    return x >= threshold;
}

// I_{l+3/2}(x)/I_{l+1/2}(x) by the modified Lentz evaluation of
// 1/(b_1 + 1/(b_2 + ...)), b_k = (2l + 1 + 2k)/x.
inline double i_ratio_continued_fraction(int l, double x) {
    if (use_hankel_seed(l, x)) {
        return hankel_series(l + 1, x) / hankel_series(l, x);
    }
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    constexpr int max_iterations = 200000;
    const double nu = l + 0.5;
    double f = tiny;
    double c = f;
    double d = 0.0;
    for (int k = 1; k <= max_iterations; ++k) {
        const double b = 2.0 * (nu + k) / x;
        d = b + d;
        if (d == 0.0) d = tiny;
        c = b + 1.0 / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < eps) return f;
    }
    throw DomainError("bessel ratio continued fraction did not converge for l=" +
                      std::to_string(l) + ", x=" + std::to_string(x));
}

}  // namespace detail

/// Logarithms of the scaled rows together with order ratios, l = 0..l_max.
inline LogBesselRow bessel_ik_half_log(int l_max, double x) {
    detail::require_positive_argument(x, "bessel_ik_half_log");
    if (l_max < 0) throw DomainError("bessel_ik_half_log: negative maximum order");

    LogBesselRow row;
    row.x = x;
    row.max_order = l_max;
    const auto n = static_cast<std::size_t>(l_max) + 1;
    row.log_k.resize(n);
    row.log_i.resize(n);
    row.k_ratio.resize(n);
    row.i_ratio.resize(n);

    // e^{x} K_{1/2}(x) = sqrt(pi/(2x)), K_{3/2} = K_{1/2} (1 + 1/x).
    row.log_k[0] = 0.5 * std::log(std::numbers::pi / (2.0 * x));
    row.k_ratio[0] = 1.0 + 1.0 / x;
    for (std::size_t l = 1; l < n; ++l) {
        row.k_ratio[l] = 1.0 / row.k_ratio[l - 1] + (2.0 * static_cast<double>(l) + 1.0) / x;
        row.log_k[l] = row.log_k[l - 1] + std::log(row.k_ratio[l - 1]);
    }

    row.i_ratio[n - 1] = detail::i_ratio_continued_fraction(l_max, x);
    for (std::size_t l = n - 1; l > 0; --l) {
        row.i_ratio[l - 1] = 1.0 / ((2.0 * static_cast<double>(l) + 1.0) / x + row.i_ratio[l]);
    }

    const double log_x = std::log(x);
    for (std::size_t l = 0; l < n; ++l) {
        row.log_i[l] = -log_x - row.log_k[l] - std::log(row.i_ratio[l] + row.k_ratio[l]);
    }
    return row;
}

/// e^{-x} I_{l+1/2}(x) and e^{x} K_{l+1/2}(x) for l = 0..l_max.
///
/// Throws DomainError for x <= 0 and OverflowError when a scaled value
/// itself leaves the double range (very small x with large l).
inline ScaledBesselRow bessel_ik_half_scaled(int l_max, double x) {
    const LogBesselRow logs = bessel_ik_half_log(l_max, x);
    ScaledBesselRow row;
    row.x = x;
    row.max_order = l_max;
    row.i_scaled.reserve(logs.log_i.size());
    row.k_scaled.reserve(logs.log_k.size());
    for (std::size_t l = 0; l < logs.log_i.size(); ++l) {
        const double i = std::exp(logs.log_i[l]);
        const double k = std::exp(logs.log_k[l]);
        if (!std::isfinite(k) || !std::isfinite(i) || i == 0.0 || k == 0.0) {
            throw OverflowError("scaled Bessel value out of double range at l=" + std::to_string(l) +
                                ", x=" + std::to_string(x));
        }
        row.i_scaled.push_back(i);
        row.k_scaled.push_back(k);
    }
    return row;
}

/// (e^{-x} d/dx[sqrt(x) I_{l+1/2}(x)], e^{x} d/dx[sqrt(x) K_{l+1/2}(x)]).
///
/// Uses d/dx[sqrt(x) Z_{l+1/2}] = sqrt(x) Z_{l+1/2} ((l+1)/x +- Z_{l+3/2}/Z_{l+1/2});
/// the K combination is rewritten as -(K_{l-1/2}/K_{l+1/2} + l/x) so it has no cancellation.
inline std::pair<double, double> bessel_sqrtx_deriv_scaled(int l, double x) {
    detail::require_positive_argument(x, "bessel_sqrtx_deriv_scaled");
    if (l < 0) throw DomainError("bessel_sqrtx_deriv_scaled: negative order");
    const LogBesselRow row = bessel_ik_half_log(l, x);
    const auto ul = static_cast<std::size_t>(l);
    const double sqrt_x = std::sqrt(x);
    const double i_factor = row.i_ratio[ul] + (l + 1.0) / x;
    const double k_factor = l == 0 ? 1.0 : 1.0 / row.k_ratio[ul - 1] + static_cast<double>(l) / x;
    const double di = sqrt_x * std::exp(row.log_i[ul]) * i_factor;
    const double dk = -sqrt_x * std::exp(row.log_k[ul]) * k_factor;
    return {di, dk};
}

/// ln(n!) for 0 <= n <= 10^6.
inline double log_factorial(int n) {
    constexpr int table_size = 257;
    if (n < 0) throw DomainError("log_factorial: negative argument " + std::to_string(n));
    if (n > 1000000) throw DomainError("log_factorial: argument above 10^6");
    static const std::array<double, table_size> table = [] {
        std::array<double, table_size> t{};
        long double acc = 0.0L;
        t[0] = 0.0;
        for (int k = 1; k < table_size; ++k) {
            acc += std::log(static_cast<long double>(k));
            t[static_cast<std::size_t>(k)] = static_cast<double>(acc);
        }
        return t;
    }();
    if (n < table_size) return table[static_cast<std::size_t>(n)];
    return std::lgamma(static_cast<double>(n) + 1.0);
}

}  // namespace casimir::specfun

#endif  // CASIMIR_SPECFUN_HPP
