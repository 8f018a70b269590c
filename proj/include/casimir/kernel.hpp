#ifndef CASIMIR_KERNEL_HPP
#define CASIMIR_KERNEL_HPP

// Truncated round-trip blocks K^{(m)}(i omega) and their log-determinants.
//
// Every block is assembled from renormalized pieces: g~ = z^B g z^A (rows on
// body B, columns on body A) and t~ = t / z^2, so K = g~ t~A g~^T t~B is
// similar to the unscaled product and no exponential is ever materialized.
// Blocks are built from |m|, which makes K^{(-m)} = K^{(m)} hold entrywise.

#include <cmath>
#include <complex>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "casimir/angular.hpp"
#include "casimir/configuration.hpp"
#include "casimir/errors.hpp"
#include "casimir/specfun.hpp"
#include "casimir/tmatrix.hpp"

namespace casimir::kernel {

enum class BlockKind { full_k, k_tilde };

inline const char* to_string(BlockKind k) { return k == BlockKind::full_k ? "full-K" : "k-tilde"; }

/// production: z_l^2 = I_{l+1/2}(omega R)/K_{l+1/2}(omega R) per body.
/// unit: z = 1, i.e. the raw product; overflows for large omega R or l0.
enum class Renormalization { production, unit };

struct BlockMatrix {
    int m = 0;
    double omega = 0.0;
    int l0 = 0;
    FieldKind field = FieldKind::scalar;
    BlockKind kind = BlockKind::full_k;
    std::vector<ModeIndex> modes;
    Eigen::MatrixXd entries;
};

/// Everything at one frequency that does not depend on m.
struct FrequencyData {
    double omega = 0.0;
    specfun::LogBesselRow separation_row;  // K orders 0..2 l0 at a omega
    std::vector<double> t_a, t_b;          // per row position (see tmatrix::row_position)
    std::vector<double> log_z_a, log_z_b;  // indexed by l; empty when unit
};

namespace detail {

inline std::vector<double> t_values(const tmatrix::TRow& row, Renormalization r) {
    std::vector<double> out(row.scaled.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = r == Renormalization::unit ? row.unscaled(i) : row.scaled[i];
    return out;
}

// Sign s with ln det(1 - s K~) the mirror energy integrand.
inline double mirror_sign(MirrorFlavor f) {
    return (f == MirrorFlavor::scalar_dirichlet || f == MirrorFlavor::em_conducting) ? -1.0 : 1.0;
}

}  // namespace detail

/// Bessel rows and T-matrix rows shared by all m at frequency omega.
inline FrequencyData frequency_data(const Configuration& config, int l0, double omega,
                                    Renormalization r = Renormalization::production) {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        throw DomainError("frequency must be positive, got " + std::to_string(omega));
    }
    FrequencyData f;
    f.omega = omega;
    f.separation_row = specfun::bessel_ik_half_log(2 * l0, config.separation * omega);
    const auto row_a = tmatrix::t_row(config.body_a, l0, omega);
    f.t_a = detail::t_values(row_a, r);
    if (r == Renormalization::production) f.log_z_a = angular::log_scale_factors(l0, omega * config.radius_a());
    if (config.mode == GeometryMode::sphere_mirror) {
        f.t_b = f.t_a;
        f.log_z_b = f.log_z_a;
    } else {
        f.t_b = detail::t_values(tmatrix::t_row(config.body_b, l0, omega), r);
        if (r == Renormalization::production) {
            f.log_z_b = angular::log_scale_factors(l0, omega * config.radius_b());
        }
    }
    return f;
}

/// Renormalized ingredients of one m block: K = g t_a g^T t_b, K~ = (-1)^m g t_a.
struct BlockPieces {
    int m = 0;
    Eigen::MatrixXd g;  // rows on body B, columns on body A
    Eigen::VectorXd t_a;
    Eigen::VectorXd t_b;
};

/// Full block restricted to the leading n modes (n = all modes by default).
/// Leading sub-blocks are exactly the blocks of a smaller truncation.
inline Eigen::MatrixXd compose_full(const BlockPieces& p, Eigen::Index n = -1) {
    if (n < 0) n = p.g.rows();
    const auto g = p.g.topLeftCorner(n, n);
    return g * p.t_a.head(n).asDiagonal() * g.transpose() * p.t_b.head(n).asDiagonal();
}

inline Eigen::MatrixXd compose_tilde(const BlockPieces& p, Eigen::Index n = -1) {
    if (n < 0) n = p.g.rows();
    const double phase = (p.m % 2 == 0) ? 1.0 : -1.0;
    return phase * p.g.topLeftCorner(n, n) * p.t_a.head(n).asDiagonal();
}

/// Frequency-independent state for one |m|: the translation coefficient table.
/// Immutable after construction; one per worker and m.
class BlockAssembler {
public:
    BlockAssembler(const Configuration& config, int m, int l0)
        : config_(config), m_(std::abs(m)), l0_(l0), coeffs_(config.field, m, l0) {}

    int m() const { return m_; }
    int l0() const { return l0_; }
    const std::vector<ModeIndex>& modes() const { return coeffs_.modes(); }

    BlockPieces pieces(const FrequencyData& f) const {
        BlockPieces p;
        p.m = m_;
        p.g = coeffs_.evaluate(f.separation_row, f.log_z_b, f.log_z_a);
        const auto n = static_cast<Eigen::Index>(modes().size());
        p.t_a.resize(n);
        p.t_b.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto pos = tmatrix::row_position(config_.field, modes()[static_cast<std::size_t>(i)]);
            p.t_a(i) = f.t_a[pos];
            p.t_b(i) = f.t_b[pos];
        }
        return p;
    }

    /// Two-body: K. Sphere-mirror: s K~ with s fixed by the mirror flavor,
    /// so that ln det(1 - K) is the energy integrand in either mode.
    BlockMatrix full(const FrequencyData& f) const {
        const auto p = pieces(f);
        BlockMatrix b = header(f, BlockKind::full_k);
        if (config_.mode == GeometryMode::sphere_mirror) {
            b.entries = detail::mirror_sign(std::get<Mirror>(config_.body_b).flavor) * compose_tilde(p);
        } else {
            b.entries = compose_full(p);
        }
        return b;
    }

    BlockMatrix tilde(const FrequencyData& f) const {
        require_symmetric();
        BlockMatrix b = header(f, BlockKind::k_tilde);
        b.entries = compose_tilde(pieces(f));
        return b;
    }

    /// Whether K~ is defined: sphere-mirror, or two identical spheres.
    bool symmetric() const {
        if (config_.mode == GeometryMode::sphere_mirror) return true;
        if (config_.radius_a() != config_.radius_b()) return false;
        if (config_.body_a.index() != config_.body_b.index()) return false;
        const auto* ea = std::get_if<DielectricSphere>(&config_.body_a);
        const auto* eb = std::get_if<DielectricSphere>(&config_.body_b);
        if (ea && eb) return !ea->permittivity && !eb->permittivity && ea->epsilon == eb->epsilon;
        return true;
    }

private:
    void require_symmetric() const {
        if (!symmetric()) {
            throw ConfigurationError("K-tilde needs a sphere-mirror geometry or two identical spheres");
        }
    }

    BlockMatrix header(const FrequencyData& f, BlockKind kind) const {
        BlockMatrix b;
        b.m = m_;
        b.omega = f.omega;
        b.l0 = l0_;
        b.field = config_.field;
        b.kind = kind;
        b.modes = modes();
        return b;
    }

    Configuration config_;
    int m_;
    int l0_;
    angular::TranslationCoefficients coeffs_;
};

/// K^{(m)}(i omega) truncated at l0. Validates the configuration.
inline BlockMatrix assemble_block(const Configuration& config, int m, double omega, int l0,
                                  Renormalization r = Renormalization::production) {
    validate(config);
    const BlockAssembler assembler(config, m, l0);
    return assembler.full(frequency_data(config, l0, omega, r));
}

/// K~^{(m)}(i omega) = (-1)^m g~ t~ for a sphere-mirror geometry or two identical spheres.
inline BlockMatrix assemble_ktilde(const Configuration& config, int m, double omega, int l0,
                                   Renormalization r = Renormalization::production) {
    validate(config);
    const BlockAssembler assembler(config, m, l0);
    return assembler.tilde(frequency_data(config, l0, omega, r));
}

struct SignedLogDet {
    double log_abs = 0.0;
    int sign = 1;
};

/// ln|det A| and sign(det A) by LU with partial pivoting.
/// Throws SingularityError when a pivot falls below 1e-300 in magnitude.
inline SignedLogDet signed_log_det(Eigen::MatrixXd a) {
    if (a.rows() != a.cols()) throw DomainError("log-determinant of a non-square matrix");
    const Eigen::Index n = a.rows();
    SignedLogDet out;
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index pivot_row = k;
        a.col(k).tail(n - k).cwiseAbs().maxCoeff(&pivot_row);
        pivot_row += k;
        const double pivot = a(pivot_row, k);
        if (!(std::abs(pivot) >= 1e-300)) {
            throw SingularityError("vanishing pivot at column " + std::to_string(k));
        }
        if (pivot_row != k) {
            a.row(k).swap(a.row(pivot_row));
            out.sign = -out.sign;
        }
        if (pivot < 0.0) out.sign = -out.sign;
        out.log_abs += std::log(std::abs(pivot));
        if (k + 1 < n) {
            a.col(k).tail(n - k - 1) /= pivot;
            a.bottomRightCorner(n - k - 1, n - k - 1).noalias() -=
                a.col(k).tail(n - k - 1) * a.row(k).tail(n - k - 1);
        }
    }
    return out;
}

/// ln det(1 - sign * entries). Requires a positive determinant.
inline double logdet_one_minus(const Eigen::MatrixXd& entries, int sign = 1) {
    if (!entries.allFinite()) throw DomainError("log-determinant of a block with non-finite entries");
    const auto n = entries.rows();
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - static_cast<double>(sign) * entries;
    const auto d = signed_log_det(a);
    if (d.sign < 0) throw SingularityError("det(1 - K) is negative");
    return d.log_abs;
}

inline double logdet_one_minus(const BlockMatrix& block, int sign = 1) {
    return logdet_one_minus(block.entries, sign);
}

struct SpectralReport {
    double min_eigenvalue = 0.0;  // real parts
    double max_eigenvalue = 0.0;
    double max_imaginary = 0.0;
    bool violation = false;       // some eigenvalue < -1e-9 or >= 1
};

inline SpectralReport spectral_check(const Eigen::MatrixXd& entries) {
    SpectralReport r;
    if (entries.rows() == 0) return r;
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(entries, false);
    const auto& ev = solver.eigenvalues();
    r.min_eigenvalue = std::numeric_limits<double>::infinity();
    r.max_eigenvalue = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        r.min_eigenvalue = std::min(r.min_eigenvalue, ev(i).real());
        r.max_eigenvalue = std::max(r.max_eigenvalue, ev(i).real());
        r.max_imaginary = std::max(r.max_imaginary, std::abs(ev(i).imag()));
    }
    r.violation = r.min_eigenvalue < -1e-9 || r.max_eigenvalue >= 1.0;
    return r;
}

inline SpectralReport spectral_check(const BlockMatrix& block) { return spectral_check(block.entries); }

/// Plain-text dump: a header line `m omega l0 kind`, then one matrix row per line.
inline void dump_block(std::ostream& os, const BlockMatrix& b) {
    std::ostringstream s;
    s.precision(17);
    s << b.m << ' ' << b.omega << ' ' << b.l0 << ' ' << to_string(b.kind) << '\n';
    for (Eigen::Index i = 0; i < b.entries.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.entries.cols(); ++j) {
            if (j) s << ' ';
            s << b.entries(i, j);
        }
        s << '\n';
    }
    os << s.str();
}

/// Inverse of dump_block; modes and field are not recorded and stay default.
inline BlockMatrix read_block(std::istream& is) {
    BlockMatrix b;
    std::string header;
    if (!std::getline(is, header)) throw ParseError("block", "missing header line");
    std::istringstream h(header);
    std::string kind;
    if (!(h >> b.m >> b.omega >> b.l0 >> kind)) throw ParseError("block.header", "expected `m omega l0 kind`");
    if (kind == "full-K") {
        b.kind = BlockKind::full_k;
    } else if (kind == "k-tilde") {
        b.kind = BlockKind::k_tilde;
    } else {
        throw ParseError("block.header.kind", "unknown kind '" + kind + "'");
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) break;
        std::istringstream ls(line);
        std::vector<double> row;
        double v = 0.0;
        while (ls >> v) row.push_back(v);
        rows.push_back(std::move(row));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    b.entries.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n) {
            throw ParseError("block.row" + std::to_string(i), "matrix is not square");
        }
        for (Eigen::Index j = 0; j < n; ++j) b.entries(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return b;
}

}  // namespace casimir::kernel

#endif  // CASIMIR_KERNEL_HPP
