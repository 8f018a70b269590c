#ifndef CASIMIR_ENERGY_HPP
#define CASIMIR_ENERGY_HPP

// Frequency integration and m summation of ln det(1 - K).
//
// The imaginary frequency is mapped as omega = u / ((1 - u) d) with d the
// surface gap (a - R1 - R2, or a - 2R for a sphere facing its image), and
// u in (0, 1) is integrated by Gauss-Legendre. No node sits on omega = 0.
// Work over (m, node) is a pure map; the reduction runs in a fixed order, so
// results do not depend on the worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "casimir/configuration.hpp"
#include "casimir/errors.hpp"
#include "casimir/kernel.hpp"
#include "casimir/tmatrix.hpp"

namespace casimir {

struct GaussRule {
    std::vector<double> nodes;    // ascending in (-1, 1)
    std::vector<double> weights;
};

namespace detail {

// (P_n(x), P_{n-1}(x)) by the three-term recurrence.
inline std::pair<double, double> legendre_pair(int n, double x) {
    double p0 = 1.0;
    double p1 = x;
    if (n == 0) return {1.0, 0.0};
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return {p1, p0};
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
inline GaussRule gauss_legendre(int n) {
    if (n < 1) throw DomainError("gauss_legendre: need at least one node");
    GaussRule r;
    r.nodes.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    const auto derivative = [n](double x) {
        const auto [p, q] = detail::legendre_pair(n, x);
        return n * (x * p - q) / (x * x - 1.0);
    };
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const double dx = detail::legendre_pair(n, x).first / derivative(x);
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = derivative(x);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        r.nodes[lo] = -x;
        r.nodes[hi] = x;
        r.weights[lo] = w;
        r.weights[hi] = w;
    }
    return r;
}

struct QuadratureSpec {
    int nodes = 64;
    bool check_doubling = false;  // also integrate with 2*nodes and compare
    double tolerance = 1e-7;      // relative, for check_doubling
    int workers = 1;
    bool estimate_truncation = true;  // rerun the sum at l0-1 from leading sub-blocks
};

struct EnergyResult {
    double energy = 0.0;               // hbar c / R_ref
    std::vector<double> per_m;         // m = 0..l0, same units, not doubled
    int l0 = 0;
    int nodes = 0;
    std::string transform = "gauss-legendre omega=u/((1-u)d)";
    double truncation_error_estimate = 0.0;
    std::optional<double> convergence_rate_c;
    double r_ref = 1.0;
};

namespace detail {

// ln det(1 - s K) for the selected integrand.
enum class Integrand { full, tilde_plus, tilde_minus };

struct Grid {
    std::vector<double> omega;
    std::vector<double> weight;  // includes d omega / du and 1/(2 pi)
};

inline Grid frequency_grid(double gap, int n) {
    if (!(gap > 0.0)) throw ConfigurationError("frequency grid needs a positive surface gap");
    const GaussRule rule = gauss_legendre(n);
    Grid g;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double u = 0.5 * (rule.nodes[k] + 1.0);
        const double one_minus_u = 0.5 * (1.0 - rule.nodes[k]);
        g.omega.push_back(u / (one_minus_u * gap));
        g.weight.push_back(0.5 * rule.weights[k] / (gap * one_minus_u * one_minus_u) / (2.0 * std::numbers::pi));
    }
    return g;
}

inline double gap_of(const Configuration& c) { return c.separation - c.radius_a() - c.radius_b(); }

// Runs task(i) for i in [0, count) on up to `workers` threads; rethrows the first failure.
inline void parallel_for(int count, int workers, const std::function<void(int)>& task) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    task(i);
                } catch (...) {
                    const std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

inline Eigen::Index leading_modes(FieldKind kind, int m, int l0) {
    return static_cast<Eigen::Index>(basis_modes(kind, m, l0).size());
}

inline int min_l(FieldKind kind, int m) { return kind == FieldKind::scalar ? m : std::max(1, m); }

// per_m[t][m] for every truncation l0_list[t], from one pass at the largest l0.
// `value(pieces, n)` is the integrand for the leading n modes of an m block.
inline std::vector<std::vector<double>> integrate_per_m(
    const Configuration& config, const std::vector<int>& l0_list, int nodes, int workers,
    const std::function<double(const kernel::BlockPieces&, Eigen::Index)>& value) {
    const int l0 = l0_list.back();
    const Grid grid = frequency_grid(gap_of(config), nodes);
    std::vector<kernel::FrequencyData> freq(grid.omega.size());
    parallel_for(static_cast<int>(freq.size()), workers, [&](int k) {
        freq[static_cast<std::size_t>(k)] = kernel::frequency_data(config, l0, grid.omega[static_cast<std::size_t>(k)]);
    });

    std::vector<std::vector<double>> out(l0_list.size(), std::vector<double>(static_cast<std::size_t>(l0) + 1, 0.0));
    parallel_for(l0 + 1, workers, [&](int m) {
        if (min_l(config.field, m) > l0) return;
        const kernel::BlockAssembler assembler(config, m, l0);
        std::vector<double> sums(l0_list.size(), 0.0);
        for (std::size_t k = 0; k < freq.size(); ++k) {
            const auto pieces = assembler.pieces(freq[k]);
            for (std::size_t t = 0; t < l0_list.size(); ++t) {
                if (min_l(config.field, m) > l0_list[t]) continue;
                const auto n = leading_modes(config.field, m, l0_list[t]);
                sums[t] += grid.weight[k] * value(pieces, n);
            }
        }
        for (std::size_t t = 0; t < l0_list.size(); ++t) out[t][static_cast<std::size_t>(m)] = sums[t];
    });
    return out;
}

inline double sum_over_m(const std::vector<double>& per_m) {
    double e = 0.0;
    for (std::size_t m = per_m.size(); m-- > 1;) e += 2.0 * per_m[m];
    return e + (per_m.empty() ? 0.0 : per_m[0]);
}

inline void require_l0(int l0, FieldKind kind) {
    const int lo = kind == FieldKind::em ? 1 : 0;
    if (l0 < lo || l0 > 100) {
        throw DomainError("truncation l0 must lie in [" + std::to_string(lo) + ", 100], got " + std::to_string(l0));
    }
}

inline std::function<double(const kernel::BlockPieces&, Eigen::Index)> integrand(const Configuration& config,
                                                                                Integrand which) {
    if (which == Integrand::full) {
        if (config.mode == GeometryMode::sphere_mirror) {
            const double s = kernel::detail::mirror_sign(std::get<Mirror>(config.body_b).flavor);
            return [s](const kernel::BlockPieces& p, Eigen::Index n) {
                return kernel::logdet_one_minus(kernel::compose_tilde(p, n), static_cast<int>(s));
            };
        }
        return [](const kernel::BlockPieces& p, Eigen::Index n) {
            return kernel::logdet_one_minus(kernel::compose_full(p, n));
        };
    }
    const int s = which == Integrand::tilde_plus ? -1 : 1;  // det(1 + K~) is ln det(1 - (-1) K~)
    return [s](const kernel::BlockPieces& p, Eigen::Index n) {
        return kernel::logdet_one_minus(kernel::compose_tilde(p, n), s);
    };
}

inline EnergyResult run(const Configuration& config, int l0, const QuadratureSpec& quad, Integrand which) {
    validate(config);
    require_l0(l0, config.field);
    if (which != Integrand::full && !kernel::BlockAssembler(config, 0, l0).symmetric()) {
        throw ConfigurationError("the K-tilde split needs a sphere-mirror geometry or two identical spheres");
    }
    const double scale = config.reference_length();
    const auto f = integrand(config, which);
    std::vector<int> l0_list{l0};
    const bool with_lower = quad.estimate_truncation && l0 > (config.field == FieldKind::em ? 1 : 0);
    if (with_lower) l0_list.insert(l0_list.begin(), l0 - 1);
    const auto per = integrate_per_m(config, l0_list, quad.nodes, quad.workers, f);

    EnergyResult r;
    r.l0 = l0;
    r.nodes = quad.nodes;
    r.r_ref = scale;
    r.per_m = per.back();
    for (double& v : r.per_m) v *= scale;
    r.energy = sum_over_m(r.per_m);
    if (with_lower) r.truncation_error_estimate = std::abs(r.energy - scale * sum_over_m(per.front()));

    if (quad.check_doubling) {
        const auto fine = integrate_per_m(config, {l0}, 2 * quad.nodes, quad.workers, f);
        const double e2 = scale * sum_over_m(fine.front());
        if (std::abs(e2 - r.energy) > quad.tolerance * std::abs(e2)) {
            throw NonConvergenceError("doubling the node count from " + std::to_string(quad.nodes) +
                                      " moved the energy from " + std::to_string(r.energy) + " to " +
                                      std::to_string(e2));
        }
    }
    return r;
}

}  // namespace detail

/// E = sum_m int_0^inf d omega / 2 pi ln det(1 - K^{(m)}(i omega)) in hbar c / R_ref.
/// For a sphere-mirror configuration the integrand is the mirror's det(1 -+ K~).
inline EnergyResult casimir_energy(const Configuration& config, int l0, const QuadratureSpec& quad = {}) {
    return detail::run(config, l0, quad, detail::Integrand::full);
}

/// Sphere facing a mirror a/2 from its center: Dirichlet and conducting mirrors
/// give ln det(1 + K~), Neumann and permeable mirrors ln det(1 - K~).
inline EnergyResult mirror_energy(const Configuration& config, int l0, const QuadratureSpec& quad = {}) {
    if (config.mode != GeometryMode::sphere_mirror) throw ConfigurationError("mirror_energy needs sphere-mirror mode");
    const auto flavor = std::get<Mirror>(config.body_b).flavor;
    const bool plus = flavor == MirrorFlavor::scalar_dirichlet || flavor == MirrorFlavor::em_conducting;
    return detail::run(config, l0, quad, plus ? detail::Integrand::tilde_plus : detail::Integrand::tilde_minus);
}

/// Same sphere, other mirror flavor.
inline EnergyResult mirror_energy(const Configuration& config, MirrorFlavor flavor, int l0,
                                  const QuadratureSpec& quad = {}) {
    Configuration c = config;
    c.body_b = Mirror{flavor};
    return mirror_energy(c, l0, quad);
}

struct ConvergenceFit {
    std::vector<int> l0_list;
    std::vector<double> energies;
    std::vector<EnergyResult> results;
    double e_inf = 0.0;
    double amplitude = 0.0;
    double c = 0.0;
};

/// Exact fit of E(l) = E_inf - A exp(-c l) through three points with l1 < l2 < l3.
/// Throws FitError unless the two successive differences share a sign and shrink.
inline ConvergenceFit fit_exponential(int l1, int l2, int l3, double e1, double e2, double e3) {
    const double d1 = e2 - e1;
    const double d2 = e3 - e2;
    if (!(l1 < l2 && l2 < l3)) throw FitError("truncation orders must ascend");
    if (d1 == 0.0 || d2 == 0.0 || (d1 > 0.0) != (d2 > 0.0) || !(std::abs(d2) < std::abs(d1))) {
        std::ostringstream msg;
        msg << std::setprecision(3) << "energy differences are not monotone and shrinking: " << d1 << ", " << d2;
        throw FitError(msg.str());
    }
    const double ratio = d2 / d1;
    // h(c) = (e^{-c l3} - e^{-c l2}) / (e^{-c l2} - e^{-c l1}) falls from (l3-l2)/(l2-l1) to 0.
    const auto h = [&](double c) {
        return std::exp(-c * (l2 - l1)) * std::expm1(-c * (l3 - l2)) / std::expm1(-c * (l2 - l1));
    };
    const double h0 = static_cast<double>(l3 - l2) / (l2 - l1);
    if (!(ratio < h0)) throw FitError("energy differences do not shrink fast enough for an exponential fit");
    double lo = 1e-12;
    double hi = 1.0;
    while (h(hi) > ratio) {
        hi *= 2.0;
        if (hi > 1e4) throw FitError("fitted rate diverges");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) > ratio ? lo : hi) = mid;
    }
    ConvergenceFit f;
    f.c = 0.5 * (lo + hi);
    // e2 - e1 = A (e^{-c l1} - e^{-c l2})
    f.amplitude = d1 / (std::exp(-f.c * l1) - std::exp(-f.c * l2));
    f.e_inf = e3 + f.amplitude * std::exp(-f.c * l3);
    return f;
}

/// E(l0) for every l0 in the ascending list, from leading sub-blocks of one pass
/// at the largest l0, and the exponential fit through the last three points.
inline ConvergenceFit convergence_study(const Configuration& config, const std::vector<int>& l0_list,
                                       const QuadratureSpec& quad = {}) {
    validate(config);
    if (l0_list.size() < 3) throw DomainError("convergence_study needs at least three truncation orders");
    for (std::size_t i = 0; i < l0_list.size(); ++i) {
        detail::require_l0(l0_list[i], config.field);
        if (i && l0_list[i] <= l0_list[i - 1]) throw DomainError("truncation orders must ascend");
    }
    const double scale = config.reference_length();
    const auto per = detail::integrate_per_m(config, l0_list, quad.nodes, quad.workers,
                                             detail::integrand(config, detail::Integrand::full));
    std::vector<double> energies;
    std::vector<EnergyResult> results;
    for (std::size_t t = 0; t < l0_list.size(); ++t) {
        EnergyResult r;
        r.l0 = l0_list[t];
        r.nodes = quad.nodes;
        r.r_ref = scale;
        r.per_m.assign(per[t].begin(), per[t].begin() + l0_list[t] + 1);
        for (double& v : r.per_m) v *= scale;
        r.energy = detail::sum_over_m(r.per_m);
        if (t) r.truncation_error_estimate = std::abs(r.energy - energies.back());
        energies.push_back(r.energy);
        results.push_back(std::move(r));
    }
    const std::size_t n = l0_list.size();
    ConvergenceFit fit = fit_exponential(l0_list[n - 3], l0_list[n - 2], l0_list[n - 1], energies[n - 3],
                                         energies[n - 2], energies[n - 1]);
    for (auto& r : results) r.convergence_rate_c = fit.c;
    fit.l0_list = l0_list;
    fit.energies = std::move(energies);
    fit.results = std::move(results);
    return fit;
}

struct BornResult {
    double energy = 0.0;
    double spectral_radius_estimate = 0.0;  // max over (m, omega) of sqrt(Tr K^2), an upper bound
    bool warning = false;                   // estimate above 0.5: the series is of no use
};

/// Trace series -sum_{n <= n_max} Tr(K^n)/n in place of ln det(1 - K).
inline BornResult born_energy(const Configuration& config, int n_max, int l0, const QuadratureSpec& quad = {}) {
    validate(config);
    detail::require_l0(l0, config.field);
    if (n_max < 1) throw DomainError("born_energy: n_max must be at least 1");
    std::mutex radius_mutex;
    double radius = 0.0;
    const auto value = [&](const kernel::BlockPieces& p, Eigen::Index n) {
        const Eigen::MatrixXd k =
            config.mode == GeometryMode::sphere_mirror
                ? Eigen::MatrixXd(kernel::detail::mirror_sign(std::get<Mirror>(config.body_b).flavor) *
                                  kernel::compose_tilde(p, n))
                : kernel::compose_full(p, n);
        const Eigen::MatrixXd k2 = k * k;
        {
            const std::lock_guard lock(radius_mutex);
            radius = std::max(radius, std::sqrt(std::abs(k2.trace())));
        }
        double sum = -k.trace();
        Eigen::MatrixXd power = k;
        for (int j = 2; j <= n_max; ++j) {
            power = j == 2 ? k2 : Eigen::MatrixXd(power * k);
            sum -= power.trace() / j;
        }
        return sum;
    };
    const auto per = detail::integrate_per_m(config, {l0}, quad.nodes, quad.workers, value);
    BornResult r;
    r.energy = config.reference_length() * detail::sum_over_m(per.front());
    r.spectral_radius_estimate = radius;
    r.warning = radius > 0.5;
    return r;
}

/// Large-distance series for two Dirichlet spheres, partial sum of the first `order` (1..4) terms.
inline double asymptotic_series(double r1, double r2, double a, int order = 4) {
    if (order < 1 || order > 4) throw DomainError("asymptotic_series: order must be 1..4");
    const double pi = std::numbers::pi;
    const double p = r1 * r2;
    const double terms[4] = {
        -p / (4.0 * pi * std::pow(a, 3)),
        -p * (r1 + r2) / (8.0 * pi * std::pow(a, 4)),
        -p * (34.0 * r1 * r1 + 9.0 * r1 * r2 + 34.0 * r2 * r2) / (48.0 * pi * std::pow(a, 5)),
        -p * (r1 + r2) * (2.0 * r1 * r1 + 21.0 * r1 * r2 + 2.0 * r2 * r2) / (36.0 * pi * std::pow(a, 6)),
    };
    double e = 0.0;
    for (int i = 0; i < order; ++i) e += terms[i];
    return e;
}

/// Scalar Casimir-Polder limit -lambda_A lambda_B / (4 pi a^3) with s-wave lengths lambda = R.
inline double casimir_polder(double r1, double r2, double a) { return asymptotic_series(r1, r2, a, 1); }

namespace detail {

// ln|r(i omega)| and sign of r for a 1D reflector.
inline std::pair<double, double> log_reflection(const Reflector1D& model, double omega) {
    if (const auto* p = std::get_if<PerfectMirror1D>(&model)) return {0.0, p->sign < 0 ? -1.0 : 1.0};
    const auto& d = std::get<DeltaPotential1D>(model);
    if (std::isinf(d.strength)) return {0.0, -1.0};
    return {-std::log1p(2.0 * omega / d.strength), -1.0};
}

}  // namespace detail

/// E = int_0^inf d omega / 2 pi ln(1 - e^{-2 a omega} r_A r_B) for two 1D reflectors a apart.
/// Uses double-exponential quadrature, which absorbs the logarithmic endpoint
/// singularity of two perfect mirrors.
inline double energy_1d(const Reflector1D& ra, const Reflector1D& rb, double a, double tolerance = 1e-13) {
    if (!(a > 0.0)) throw DomainError("energy_1d: separation must be positive");
    for (const auto* r : {&ra, &rb}) {
        if (const auto* d = std::get_if<DeltaPotential1D>(r); d && !(d->strength > 0.0)) {
            throw DomainError("energy_1d: delta strength must be positive");
        }
    }
    const auto f = [&](double omega) {
        const auto [la, sa] = detail::log_reflection(ra, omega);
        const auto [lb, sb] = detail::log_reflection(rb, omega);
        const double log_q = -2.0 * a * omega + la + lb;
        if (sa * sb > 0.0) return std::log(-std::expm1(log_q));
        return std::log1p(std::exp(log_q));
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate(f, tolerance) / (2.0 * std::numbers::pi);
}

}  // namespace casimir

#endif  // CASIMIR_ENERGY_HPP
