#pragma once

// Executable constructions over matricial ranges: star centers, corner
// compressions, deflated solves producing A-orthogonal witnesses, the
// explicit segment witness, block families, the Tverberg lift and the
// finite-truncation essential-range estimator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "matrange/feasibility.hpp"
#include "matrange/linalg.hpp"
#include "matrange/point.hpp"
#include "matrange/ranges.hpp"
#include "matrange/tverberg.hpp"

namespace matrange {

// ---------------------------------------------------------------------------
// Corners

/// Y in V_r^perp: an n x (n - r) isometry onto the complement of an
/// r-dimensional subspace.
struct CornerSpec {
    int r = 0;
    Isometry basis;

    CornerSpec() = default;
    CornerSpec(int removed, Isometry y) : r(removed), basis(std::move(y)) {
        if (basis.k() != basis.n() - r)
            throw DimensionError("CornerSpec: basis has " + std::to_string(basis.k()) + " columns, expected n - r = " +
                                 std::to_string(basis.n() - r));
    }

    /// The r-dimensional subspace the corner removes.
    Matrix removed() const { return complement_basis(basis.matrix(), basis.n()).matrix(); }
};

inline CornerSpec random_corner(int n, int r, std::uint64_t seed) {
    if (r < 0 || r > n) throw DimensionError("random_corner: r out of range");
    return CornerSpec(r, random_isometry(n, n - r, seed));
}

/// Corner removing the span of the given columns.
inline CornerSpec corner_avoiding(const Matrix& subspace, int n) {
    const Matrix q = range_basis(subspace);
    return CornerSpec(static_cast<int>(q.cols()), complement_basis(q, n));
}

inline HermitianTuple corner_compress(const HermitianTuple& a, const CornerSpec& spec) {
    if (spec.basis.n() != a.n())
        throw DimensionError("corner_compress: corner lives in dimension " + std::to_string(spec.basis.n()) +
                             ", tuple has n = " + std::to_string(a.n()));
    return compress(a, spec.basis);
}

/// Lifts a certificate for compress(A, Y) to one for A with witness Y X.
inline Certificate lift_certificate(const HermitianTuple& a, const Matrix& y, const Certificate& inner) {
    return make_certificate(a, y * inner.witness.matrix(), inner.p, inner.point);
}

/// Re-certifies a Lambda_{p,q}(A) certificate in Lambda_{p-qr,q}(Y* A Y):
/// combinations sum_j f_j X_j of the witness blocks annihilated by the
/// removed subspace keep the block structure, with orthonormal f.
inline Certificate corner_recertify(const HermitianTuple& a, const Certificate& cert, const CornerSpec& corner) {
    const int q = cert.point.q();
    const int p = cert.p;
    const int p_new = p - q * corner.r;
    if (p_new < 1)
        throw ValueError("corner_recertify: need qr < p (q = " + std::to_string(q) + ", r = " + std::to_string(corner.r) +
                         ", p = " + std::to_string(p) + ")");
    const Matrix& x = cert.witness.matrix();
    const HermitianTuple inner = corner_compress(a, corner);
    if (corner.r == 0) {
        return make_certificate(inner, corner.basis.matrix().adjoint() * x, p, cert.point);
    }
    const Matrix u = corner.removed();
    const int rows = q * corner.r;
    Matrix nmat(rows, p);
    for (int j = 0; j < p; ++j) {
        const Matrix blk = u.adjoint() * x.middleCols(j * q, q);  // r x q
        nmat.col(j) = Eigen::Map<const Vector>(blk.data(), rows);
    }
    const auto eig = herm_eig(nmat.adjoint() * nmat);
    const Matrix f = eig.vectors.rightCols(p_new);  // smallest eigenvalues: the null space
    Matrix xhat = Matrix::Zero(x.rows(), p_new * q);
    for (int a_idx = 0; a_idx < p_new; ++a_idx)
        for (int j = 0; j < p; ++j) xhat.middleCols(a_idx * q, q) += f(j, a_idx) * x.middleCols(j * q, q);
    const Matrix local = detail::qf(corner.basis.matrix().adjoint() * xhat);
    return make_certificate(inner, local, p_new, cert.point);
}

// ---------------------------------------------------------------------------
// Star centers

struct StarCenter {
    MatPoint center;           // (c_j I_q) or a general star center
    Certificate certificate;   // membership at the higher level
    int level = 0;             // k = pq(m+2), or p~ for the matrix variant
    bool below_sufficiency_bound = false;
};

using StarCenterResult = std::variant<StarCenter, Rejection>;

/// Dimension at which Lambda_{pq(m+2)}(A) is guaranteed non-empty.
inline long sufficiency_bound(int m, int p, int q) {
    const long k = static_cast<long>(p) * q * (m + 2);
    return (k - 1) * (m + 1) * (m + 1);
}

/// (c_1 I_q, ..., c_m I_q) with c in Lambda_{pq(m+2)}(A), a star center of Lambda_{p,q}(A).
inline StarCenterResult star_center_scalar(const HermitianTuple& a, int p, int q, const SolverOptions& opts = {}) {
    const int k = p * q * (a.m() + 2);
    if (k > a.n())
        throw StructuralError("star_center_scalar: level pq(m+2) = " + std::to_string(k) + " exceeds n = " +
                              std::to_string(a.n()));
    auto r = find_scalar_point(a, k, opts);
    if (auto* rej = std::get_if<Rejection>(&r)) return *rej;
    auto& sc = std::get<ScalarCertificate>(r);
    std::vector<double> c(sc.point.data(), sc.point.data() + sc.point.size());
    return StarCenter{MatPoint::scalar(c, q), std::move(sc.certificate), k, a.n() < sufficiency_bound(a.m(), p, q)};
}

inline int matrix_star_level(int m, int p, int q) { return p * (q * q * (m + 1) + 1); }

/// Any member of Lambda_{p~,q}(A), p~ = p(q^2(m+1)+1), is a star center of Lambda_{p,q}(A).
inline StarCenterResult star_center_matrix(const HermitianTuple& a, int p, int q, const SolverOptions& opts = {}) {
    const int level = matrix_star_level(a.m(), p, q);
    if (level * q > a.n())
        throw StructuralError("star_center_matrix: p~ q = " + std::to_string(level * q) + " exceeds n = " +
                              std::to_string(a.n()));
    auto r = solve_free(a, level, q, opts);
    if (auto* rej = std::get_if<Rejection>(&r)) return *rej;
    auto& cert = std::get<Certificate>(r);
    MatPoint center = cert.point;
    return StarCenter{std::move(center), std::move(cert), level, false};
}

/// Complex tuples: embed as (H_1, G_1, ..., H_m, G_m); the scalar level
/// becomes pq(2m+2) = 2pq(m+1).
inline StarCenterResult star_center_complex(const std::vector<Matrix>& tuple, int p, int q,
                                            const SolverOptions& opts = {}) {
    return star_center_scalar(hermitian_embed(tuple), p, q, opts);
}

// ---------------------------------------------------------------------------
// Deflation

/// max(||X1* X2||_F, max_j ||X1* A_j X2||_F)
inline double cross_norm(const HermitianTuple& a, const Matrix& x1, const Matrix& x2) {
    double c = (x1.adjoint() * x2).norm();
    for (const auto& aj : a.members()) c = std::max(c, (x1.adjoint() * aj * x2).norm());
    return c;
}

/// Orthonormal basis of L = span{W, A_1 W, ..., A_m W} for the stacked prior witnesses W.
inline Matrix deflation_subspace(const HermitianTuple& a, const std::vector<Matrix>& prior) {
    int cols = 0;
    for (const auto& w : prior) cols += static_cast<int>(w.cols());
    Matrix gen(a.n(), cols * (a.m() + 1));
    int c = 0;
    for (const auto& w : prior) {
        gen.middleCols(c, w.cols()) = w;
        c += static_cast<int>(w.cols());
    }
    for (const auto& aj : a.members())
        for (const auto& w : prior) {
            gen.middleCols(c, w.cols()) = aj * w;
            c += static_cast<int>(w.cols());
        }
    return range_basis(gen, 1e-10);
}

/// Solves inside the corner orthogonal to L, so the result is orthogonal and
/// A-orthogonal to every prior witness. `target` fixes B; nullopt is free mode.
inline SolveResult deflated_solve(const HermitianTuple& a, const std::vector<Matrix>& prior, int p, int q,
                                  const std::optional<MatPoint>& target, const SolverOptions& opts = {}) {
    if (prior.empty()) return target ? membership(a, *target, p, opts) : solve_free(a, p, q, opts);
    int prior_cols = 0;
    for (const auto& w : prior) {
        if (w.rows() != a.n()) throw DimensionError("deflated_solve: prior witness rows do not match n");
        prior_cols += static_cast<int>(w.cols());
    }
    const Matrix l = deflation_subspace(a, prior);
    const int room = a.n() - static_cast<int>(l.cols());
    if (room < p * q)
        throw StructuralError("deflated_solve: subspace L has dimension " + std::to_string(l.cols()) + ", leaving " +
                              std::to_string(room) + " < pq = " + std::to_string(p * q) + "; requires n >= " +
                              std::to_string(prior_cols * (a.m() + 1) + p * q));
    const Isometry y = complement_basis(l, a.n());
    const HermitianTuple inner = compress(a, y);
    auto r = target ? membership(inner, *target, p, opts) : solve_free(inner, p, q, opts);
    if (auto* cert = std::get_if<Certificate>(&r)) return lift_certificate(a, y.matrix(), *cert);
    return r;
}

// ---------------------------------------------------------------------------
// Segment witness

inline constexpr double kSegmentCrossTol = 1e-8;

/// Certificate for t B + (1-t) C with witness sqrt(t) X_B + sqrt(1-t) X_C,
/// valid when X_C is orthogonal and A-orthogonal to X_B.
inline Certificate segment_witness(const HermitianTuple& a, const Certificate& cert_b, const Certificate& cert_c,
                                   double t) {
    if (t < 0.0 || t > 1.0) throw ValueError("segment_witness: t must lie in [0, 1]");
    if (cert_b.p != cert_c.p || cert_b.point.q() != cert_c.point.q() || cert_b.point.m() != cert_c.point.m())
        throw DimensionError("segment_witness: certificates differ in p, q or m");
    const Matrix& x1 = cert_b.witness.matrix();
    const Matrix& x2 = cert_c.witness.matrix();
    if (x1.rows() != a.n() || x2.rows() != a.n()) throw DimensionError("segment_witness: witness rows do not match n");
    const double cross = cross_norm(a, x1, x2);
    if (cross > kSegmentCrossTol)
        throw ValueError("segment_witness: witnesses are not orthogonal and A-orthogonal (cross norm " +
                         std::to_string(cross) + "); re-solve the second point with deflated_solve");
    const Matrix xt = std::sqrt(t) * x1 + std::sqrt(1.0 - t) * x2;
    return make_certificate(a, xt, cert_b.p, cert_b.point.blend(cert_c.point, t));
}

// ---------------------------------------------------------------------------
// Block families

struct BlockFamily {
    int q = 1;
    std::vector<Isometry> witnesses;  // n x q each
    std::vector<MatPoint> points;
    std::vector<double> residuals;
    double cross_tol = 1e-10;

    int count() const { return static_cast<int>(witnesses.size()); }

    std::vector<Matrix> witness_matrices() const {
        std::vector<Matrix> out;
        for (const auto& w : witnesses) out.push_back(w.matrix());
        return out;
    }

    /// Largest cross term ||X_r* X_s|| or ||X_r* A_j X_s|| over r != s.
    double max_cross(const HermitianTuple& a) const {
        double c = 0.0;
        for (std::size_t r = 0; r < witnesses.size(); ++r)
            for (std::size_t s = r + 1; s < witnesses.size(); ++s)
                c = std::max(c, cross_norm(a, witnesses[r].matrix(), witnesses[s].matrix()));
        return c;
    }
};

/// d mutually orthogonal, A-orthogonal q-dimensional compressions. With
/// `fixed` every block certifies that point (a finite prefix of I_inf (x) C);
/// otherwise each block is a free point of W(q : A).
inline BlockFamily orthogonal_block_family(const HermitianTuple& a, int q, int d, const std::optional<MatPoint>& fixed,
                                           const SolverOptions& opts = {}) {
    if (d < 1) throw ValueError("orthogonal_block_family: d must be >= 1");
    if (fixed && fixed->q() != q) throw DimensionError("orthogonal_block_family: fixed point has the wrong q");
    BlockFamily fam;
    fam.q = q;
    for (int stage = 0; stage < d; ++stage) {
        SolverOptions o = opts;
        o.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(stage));
        auto r = deflated_solve(a, fam.witness_matrices(), 1, q, fixed, o);
        if (auto* rej = std::get_if<Rejection>(&r))
            throw SearchError("orthogonal_block_family: stage " + std::to_string(stage) +
                              " failed, best residual " + std::to_string(rej->best_residual));
        auto& cert = std::get<Certificate>(r);
        fam.witnesses.push_back(cert.witness);
        fam.points.push_back(cert.point);
        fam.residuals.push_back(cert.residual);
    }
    return fam;
}

// ---------------------------------------------------------------------------
// Tverberg lift

/// Number of blocks that always admits a p-part Tverberg partition in R^{q^2 m}.
inline int tverberg_block_count(int m, int q, int p) { return (p - 1) * (q * q * m + 1) + 1; }

struct TverbergLift {
    Certificate certificate;
    BlockFamily family;
    PartitionResult partition;
    int d = 0;
};

/// Builds d free A-orthogonal blocks, partitions their points into p parts
/// with intersecting hulls, and assembles X = [X_1 .. X_p] with
/// X_l = sum_{r in I_l} sqrt(lambda_r) X_r, so X_l* A_j X_l = sum lambda_r B_j^(r) = C_j.
inline TverbergLift tverberg_lift(const HermitianTuple& a, int q, int p, const SolverOptions& opts = {}) {
    if (p < 1 || q < 1) throw ValueError("tverberg_lift: p and q must be >= 1");
    const int d = tverberg_block_count(a.m(), q, p);
    const int need = d * q * (a.m() + 1) + q;
    if (a.n() < need)
        throw StructuralError("tverberg_lift: d = " + std::to_string(d) + " deflated blocks need n >= " +
                              std::to_string(need) + ", got " + std::to_string(a.n()));
    TverbergLift out;
    out.d = d;
    out.family = orthogonal_block_family(a, q, d, std::nullopt, opts);
    RealPointSet pts;
    pts.dim = flat_dim(a.m(), q);
    for (const auto& b : out.family.points) pts.points.push_back(flatten(b));
    out.partition = tverberg_partition(pts, p, opts.threads);

    Matrix x = Matrix::Zero(a.n(), p * q);
    for (int l = 0; l < p; ++l) {
        const auto& part = out.partition.parts[static_cast<std::size_t>(l)];
        const auto& w = out.partition.weights[static_cast<std::size_t>(l)];
        for (std::size_t i = 0; i < part.size(); ++i)
            x.middleCols(l * q, q) += std::sqrt(std::max(0.0, w[i])) * out.family.witnesses[static_cast<std::size_t>(part[i])].matrix();
    }
    out.certificate = make_certificate(a, x, p, unflatten(out.partition.common_point, a.m(), q));
    return out;
}

// ---------------------------------------------------------------------------
// Essential range estimator

/// Deterministic unit directions in R^D: the 2D signed axes, then Box-Muller
/// images of a Halton sequence, deduplicated.
inline std::vector<RealVector> support_directions(int dim, int count = 64) {
    static constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
                                     73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151};
    auto halton = [](int index, int base) {
        double f = 1.0, r = 0.0;
        for (int i = index; i > 0; i /= base) {
            f /= base;
            r += f * (i % base);
        }
        return r;
    };
    std::vector<RealVector> dirs;
    auto push = [&](RealVector v) {
        v /= v.norm();
        for (const auto& d : dirs)
            if ((d - v).norm() < 1e-12) return;
        dirs.push_back(std::move(v));
    };
    for (int i = 0; i < dim && static_cast<int>(dirs.size()) < count; ++i) {
        push(RealVector::Unit(dim, i));
        push(-RealVector::Unit(dim, i));
    }
    const int max_dim = static_cast<int>(std::size(primes)) / 2;
    for (int idx = 1; static_cast<int>(dirs.size()) < count && idx < 64 * count; ++idx) {
        RealVector v(dim);
        for (int c = 0; c < dim; ++c) {
            const int pc = c % max_dim;
            const double u1 = std::max(halton(idx, primes[2 * pc]), 1e-12);
            const double u2 = halton(idx, primes[2 * pc + 1]);
            v(c) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        }
        if (v.norm() > 1e-12) push(std::move(v));
    }
    return dirs;
}

/// n x k isometry with X* H X = lambda_k(H) I_k, pairing eigenvectors i and
/// n+1-i for i < k around lambda_k. Requires n >= 2k - 1.
inline Matrix extremal_rank_k_isometry(const Matrix& h, int k) {
    const int n = static_cast<int>(h.rows());
    if (k < 1 || 2 * k - 1 > n) throw DimensionError("extremal_rank_k_isometry: need n >= 2k - 1");
    const auto eig = herm_eig(h);
    const double target = eig.values(k - 1);
    Matrix x(n, k);
    x.col(0) = eig.vectors.col(k - 1);
    for (int i = 0; i < k - 1; ++i) {
        const double hi = eig.values(i);
        const double lo = eig.values(n - 1 - i);
        const double gap = hi - lo;
        const double alpha2 = gap > 0.0 ? std::clamp((target - lo) / gap, 0.0, 1.0) : 1.0;
        x.col(i + 1) = std::sqrt(alpha2) * eig.vectors.col(i) + std::sqrt(1.0 - alpha2) * eig.vectors.col(n - 1 - i);
    }
    return x;
}

struct EssentialEstimate {
    int q = 1;
    std::vector<RealVector> directions;
    std::vector<PointCloud> clouds;                  // index r-1
    std::vector<std::vector<double>> support;        // per r: cloud support per direction
    std::vector<std::vector<double>> intersection;   // per r: min over r' <= r
    std::vector<int> empty_levels;                   // r with empty clouds

    /// Final intersection summary (last non-empty prefix).
    const std::vector<double>& summary() const { return intersection.back(); }
};

struct EssentialOptions {
    int points_per_level = 16;
    int directions = 64;
};

/// Per-level clouds of Lambda_{r,q}(A), r = 1..r_max, and the support-function
/// intersection over r. For q = 1 each cloud also gets one directed point per
/// direction, polished from the eigenvector-pairing start for sum u_j A_j.
inline EssentialEstimate essential_estimate(const HermitianTuple& a, int q, int r_max, const SolverOptions& opts = {},
                                            const EssentialOptions& eopts = {}) {
    if (q < 1 || r_max < 1) throw ValueError("essential_estimate: q and r_max must be >= 1");
    if (2 * r_max * q > a.n())
        throw StructuralError("essential_estimate: r_max q = " + std::to_string(r_max * q) + " exceeds n/2 = " +
                              std::to_string(a.n() / 2.0));
    EssentialEstimate est;
    est.q = q;
    est.directions = support_directions(flat_dim(a.m(), q), eopts.directions);
    for (int r = 1; r <= r_max; ++r) {
        SolverOptions o = opts;
        o.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(r));
        PointCloud cloud = sample_range(a, r, q, eopts.points_per_level, o);
        if (q == 1) {
            std::vector<std::optional<Certificate>> directed(est.directions.size());
            parallel_for(est.directions.size(), opts.threads, [&](std::size_t i) {
                const Matrix x0 = extremal_rank_k_isometry(linear_combination(a, est.directions[i]), r);
                auto res = descend(a, x0, r, std::nullopt, o);
                if (res.residual <= o.accept_tol) directed[i] = make_certificate(a, res.x, r, res.point);
            });
            for (auto& c : directed)
                if (c) {
                    cloud.points.push_back(flatten(c->point));
                    cloud.certificates.push_back(std::move(c));
                }
        }
        std::vector<double> sup;
        for (const auto& u : est.directions) sup.push_back(cloud.support(u));
        if (cloud.empty()) est.empty_levels.push_back(r);
        std::vector<double> inter = sup;
        if (!est.intersection.empty()) {
            // an empty level is reported, not folded in: keep the prefix summary
            if (cloud.empty()) inter = est.intersection.back();
            for (std::size_t i = 0; i < inter.size(); ++i) inter[i] = std::min(inter[i], est.intersection.back()[i]);
        }
        est.clouds.push_back(std::move(cloud));
        est.support.push_back(std::move(sup));
        est.intersection.push_back(std::move(inter));
    }
    return est;
}

/// For m q^2 = 1 estimates: the interval [-h(-1), h(+1)] at level index r-1.
inline Interval essential_interval(const EssentialEstimate& est, std::size_t level) {
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < est.directions.size(); ++i) {
        if (est.directions[i].size() != 1) throw DimensionError("essential_interval: estimate is not one-dimensional");
        if (est.directions[i](0) > 0)
            hi = est.intersection[level][i];
        else
            lo = -est.intersection[level][i];
    }
    return Interval{lo, hi, hi < lo};
}

}  // namespace matrange
