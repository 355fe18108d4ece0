#pragma once

// Numerical membership in the (p,q)-matricial range
//
//   Lambda_{p,q}(A) = { (B_1..B_m) : X* A_j X = I_p (x) B_j, X in V_{pq} }.
//
// The defect f(X, B) = sum_j ||X* A_j X - I_p (x) B_j||_F^2 is minimized over
// the Stiefel manifold by Armijo-backtracked Riemannian gradient steps with a
// QR retraction. In free mode B is eliminated in closed form (best_block), and
// by the envelope theorem the partial gradient in X is the gradient of the
// reduced objective.
//
// The search is heuristic. An accepted Certificate is a proof up to its
// residual; a Rejection only reports the best residual that was found.
// Points on the boundary of the range may only be reachable to about
// accept_tol, so accepted sets are effectively accept_tol-fattened.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "matrange/linalg.hpp"
#include "matrange/parallel.hpp"
#include "matrange/point.hpp"

namespace matrange {

struct SolverOptions {
    double accept_tol = 1e-8;
    int max_restarts = 50;
    int max_iters = 2000;
    double initial_step = 1.0;
    double shrink = 0.5;
    double armijo_c = 1e-4;
    int max_backtracks = 60;
    int stall_window = 50;
    double stall_tol = 1e-16;
    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const {
        if (!(accept_tol > 0.0)) throw ValueError("SolverOptions: accept_tol must be > 0");
        if (max_restarts < 1) throw ValueError("SolverOptions: max_restarts must be >= 1");
        if (max_iters < 0) throw ValueError("SolverOptions: max_iters must be >= 0");
        if (!(shrink > 0.0 && shrink < 1.0)) throw ValueError("SolverOptions: shrink must lie in (0, 1)");
    }
};

/// Advisory negative answer: no restart reached accept_tol.
struct Rejection {
    double best_residual = std::numeric_limits<double>::infinity();
    int restarts = 0;
};

using SolveResult = std::variant<Certificate, Rejection>;

inline bool accepted(const SolveResult& r) { return std::holds_alternative<Certificate>(r); }

/// splitmix64, used to derive independent seeds from (seed, index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace detail {

inline void check_point_shape(const HermitianTuple& a, const Matrix& x, int p, const MatPoint& b) {
    if (b.m() != a.m())
        throw DimensionError("tuple has m = " + std::to_string(a.m()) + " but point has m = " + std::to_string(b.m()));
    if (x.rows() != a.n()) throw DimensionError("witness rows do not match n");
    if (x.cols() != p * b.q())
        throw DimensionError("witness has " + std::to_string(x.cols()) + " columns, expected p*q = " +
                             std::to_string(p * b.q()));
}

inline void check_structure(int n, int p, int q) {
    if (p < 1 || q < 1) throw ValueError("p and q must be >= 1");
    if (p * q > n)
        throw StructuralError("pq = " + std::to_string(p * q) + " exceeds n = " + std::to_string(n) +
                              ": no isometry in V_pq exists");
}

inline std::vector<Matrix> block_averages(const std::vector<Matrix>& compressed, int p) {
    const Eigen::Index k = compressed.empty() ? 0 : compressed.front().rows();
    const Eigen::Index q = k / p;
    std::vector<Matrix> out;
    for (const auto& c : compressed) {
        Matrix b = Matrix::Zero(q, q);
        for (int i = 0; i < p; ++i) b += c.block(i * q, i * q, q, q);
        out.push_back(hermitize(b / static_cast<double>(p)));
    }
    return out;
}

/// Evaluation state at one X.
struct Eval {
    std::vector<Matrix> ax;        // A_j X
    std::vector<Matrix> residual;  // X* A_j X - I_p (x) B_j
    std::vector<Matrix> blocks;    // B_j used
    double f = 0.0;
};

inline Eval evaluate(const HermitianTuple& a, const Matrix& x, int p, const std::optional<MatPoint>& target) {
    Eval e;
    std::vector<Matrix> comp;
    for (const auto& aj : a.members()) {
        e.ax.push_back(aj * x);
        comp.push_back(hermitize(x.adjoint() * e.ax.back()));
    }
    e.blocks = target ? target->blocks() : block_averages(comp, p);
    for (std::size_t j = 0; j < comp.size(); ++j) {
        e.residual.push_back(comp[j] - kron_identity(p, e.blocks[j]));
        e.f += e.residual.back().squaredNorm();
    }
    return e;
}

inline Matrix qf(const Matrix& m) {
    Matrix q = m;
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
        q.col(j) /= q.col(j).norm();
    }
    return q;
}

}  // namespace detail

/// sqrt(sum_j ||X* A_j X - I_p (x) B_j||_F^2)
inline double residual(const HermitianTuple& a, const Matrix& x, int p, const MatPoint& b) {
    detail::check_point_shape(a, x, p, b);
    double s = 0.0;
    for (int j = 0; j < a.m(); ++j) s += (x.adjoint() * a[j] * x - kron_identity(p, b[j])).squaredNorm();
    return std::sqrt(s);
}

/// Least-squares optimal B for fixed X: the average of the p diagonal q x q
/// blocks of X* A_j X.
inline MatPoint best_block(const HermitianTuple& a, const Matrix& x, int p) {
    if (p < 1 || x.cols() % p != 0)
        throw DimensionError("best_block: k = " + std::to_string(x.cols()) + " is not divisible by p = " + std::to_string(p));
    if (x.rows() != a.n()) throw DimensionError("best_block: witness rows do not match n");
    std::vector<Matrix> comp;
    for (const auto& aj : a.members()) comp.push_back(hermitize(x.adjoint() * aj * x));
    return MatPoint(detail::block_averages(comp, p));
}

inline Certificate make_certificate(const HermitianTuple& a, const Matrix& x, int p, MatPoint b) {
    Isometry iso(x);
    const double r = residual(a, x, p, b);
    return Certificate{std::move(b), p, std::move(iso), r};
}

struct CertificateCheck {
    bool ok = false;
    double isometry_defect = 0.0;
    double recomputed_residual = 0.0;
    std::string diagnostic;
};

/// Re-validates a certificate against its tuple: isometry defect <= 1e-10,
/// stored residual matches recomputation within 1e-12 (relative), and the
/// residual is within `accept_tol` when given.
inline CertificateCheck validate_certificate(const HermitianTuple& a, const Certificate& c,
                                             std::optional<double> accept_tol = std::nullopt) {
    CertificateCheck out;
    out.isometry_defect = c.witness.defect();
    out.recomputed_residual = residual(a, c.witness.matrix(), c.p, c.point);
    const double drift = std::abs(out.recomputed_residual - c.residual);
    if (out.isometry_defect > kIsometryTol)
        out.diagnostic = "isometry defect " + std::to_string(out.isometry_defect);
    else if (drift > 1e-12 * rel_scale(c.residual))
        out.diagnostic = "stored residual differs from recomputation by " + std::to_string(drift);
    else if (accept_tol && c.residual > *accept_tol)
        out.diagnostic = "residual " + std::to_string(c.residual) + " exceeds accept_tol";
    else
        out.ok = true;
    return out;
}

struct DescentResult {
    Matrix x;
    MatPoint point;
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

/// Riemannian descent from a given isometry. `target` fixes B; otherwise B is
/// re-optimized at every X.
inline DescentResult descend(const HermitianTuple& a, Matrix x, int p, const std::optional<MatPoint>& target,
                             const SolverOptions& opts) {
    const double goal = 0.1 * opts.accept_tol;
    auto e = detail::evaluate(a, x, p, target);
    std::vector<double> history;
    history.reserve(static_cast<std::size_t>(opts.max_iters) + 1);
    history.push_back(e.f);
    double step = opts.initial_step;
    int it = 0;
    for (; it < opts.max_iters; ++it) {
        if (std::sqrt(e.f) <= goal) break;
        Matrix g = Matrix::Zero(x.rows(), x.cols());
        for (std::size_t j = 0; j < e.ax.size(); ++j) g += e.ax[j] * e.residual[j];
        g *= 4.0;
        const Matrix xg = x.adjoint() * g;
        const Matrix grad = g - x * ((xg + xg.adjoint()) * 0.5);
        const double gnorm2 = grad.squaredNorm();
        if (gnorm2 <= 1e-300) break;

        bool moved = false;
        double t = step;
        for (int bt = 0; bt < opts.max_backtracks; ++bt) {
            Matrix xn = detail::qf(x - t * grad);
            auto en = detail::evaluate(a, xn, p, target);
            if (en.f <= e.f - opts.armijo_c * t * gnorm2) {
                x = std::move(xn);
                e = std::move(en);
                moved = true;
                break;
            }
            t *= opts.shrink;
        }
        if (!moved) break;
        step = std::min(2.0 * t, 1e6);
        history.push_back(e.f);
        const std::size_t w = static_cast<std::size_t>(opts.stall_window);
        if (history.size() > w && history[history.size() - 1 - w] - e.f < opts.stall_tol) break;
    }
    DescentResult out{x, target ? *target : MatPoint(e.blocks), 0.0, it};
    out.residual = residual(a, out.x, p, out.point);
    return out;
}

namespace detail {

/// Restarts from Haar-random isometries (seed + restart index), in waves of
/// opts.threads. The smallest qualifying restart index wins.
inline SolveResult restart_search(const HermitianTuple& a, int p, int q, const std::optional<MatPoint>& target,
                                  const SolverOptions& opts) {
    opts.validate();
    check_structure(a.n(), p, q);
    Rejection rej;
    const int wave = std::max(1, opts.threads);
    for (int base = 0; base < opts.max_restarts; base += wave) {
        const int count = std::min(wave, opts.max_restarts - base);
        std::vector<std::optional<DescentResult>> slots(static_cast<std::size_t>(count));
        parallel_for(static_cast<std::size_t>(count), opts.threads, [&](std::size_t i) {
            const int r = base + static_cast<int>(i);
            Matrix x0 = random_isometry(a.n(), p * q, opts.seed + static_cast<std::uint64_t>(r)).matrix();
            slots[i] = descend(a, std::move(x0), p, target, opts);
        });
        for (int i = 0; i < count; ++i) {
            auto& s = *slots[static_cast<std::size_t>(i)];
            rej.restarts = base + i + 1;
            rej.best_residual = std::min(rej.best_residual, s.residual);
            if (s.residual <= opts.accept_tol) return make_certificate(a, s.x, p, std::move(s.point));
        }
    }
    return rej;
}

}  // namespace detail

/// Is B in Lambda_{p,q}(A)? Certificate on success; Rejection(best residual)
/// otherwise, which does not prove non-membership.
inline SolveResult membership(const HermitianTuple& a, const MatPoint& b, int p, const SolverOptions& opts = {}) {
    if (b.m() != a.m())
        throw DimensionError("membership: tuple has m = " + std::to_string(a.m()) + ", point has m = " +
                             std::to_string(b.m()));
    return detail::restart_search(a, p, b.q(), b, opts);
}

/// Finds some member of Lambda_{p,q}(A).
inline SolveResult solve_free(const HermitianTuple& a, int p, int q, const SolverOptions& opts = {}) {
    return detail::restart_search(a, p, q, std::nullopt, opts);
}

struct ScalarCertificate {
    RealVector point;  // (b_1..b_m)
    Certificate certificate;
};

using ScalarResult = std::variant<ScalarCertificate, Rejection>;

/// A point of the joint rank-k numerical range Lambda_k(A).
inline ScalarResult find_scalar_point(const HermitianTuple& a, int k, const SolverOptions& opts = {}) {
    auto r = solve_free(a, k, 1, opts);
    if (auto* rej = std::get_if<Rejection>(&r)) return *rej;
    auto& cert = std::get<Certificate>(r);
    RealVector pt = flatten(cert.point);
    return ScalarCertificate{std::move(pt), std::move(cert)};
}

/// Repeated free solves from independent seeds; every emitted point carries
/// its certificate. Attempts stop after n_points acceptances or 4 n_points tries.
inline PointCloud sample_range(const HermitianTuple& a, int p, int q, int n_points, const SolverOptions& opts = {}) {
    opts.validate();
    detail::check_structure(a.n(), p, q);
    PointCloud cloud;
    cloud.m = a.m();
    cloud.p = p;
    cloud.q = q;
    cloud.dim = flat_dim(a.m(), q);
    cloud.provenance.seed = opts.seed;
    cloud.provenance.accept_tol = opts.accept_tol;
    cloud.provenance.generator = "sample_range";
    const int max_attempts = 4 * std::max(0, n_points);
    int attempts = 0;
    SolverOptions inner = opts;
    inner.threads = 1;
    const int wave = std::max(1, opts.threads);
    while (static_cast<int>(cloud.size()) < n_points && attempts < max_attempts) {
        const int count = std::min(wave, max_attempts - attempts);
        std::vector<std::optional<SolveResult>> slots(static_cast<std::size_t>(count));
        parallel_for(static_cast<std::size_t>(count), opts.threads, [&](std::size_t i) {
            SolverOptions o = inner;
            o.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(attempts) + i);
            slots[i] = solve_free(a, p, q, o);
        });
        for (auto& s : slots) {
            if (static_cast<int>(cloud.size()) >= n_points) break;
            ++attempts;
            if (auto* c = std::get_if<Certificate>(&*s)) {
                cloud.points.push_back(flatten(c->point));
                cloud.certificates.emplace_back(std::move(*c));
            }
        }
    }
    cloud.provenance.attempts = attempts;
    cloud.provenance.acceptance_rate =
        attempts ? static_cast<double>(cloud.size()) / static_cast<double>(attempts) : 0.0;
    return cloud;
}

}  // namespace matrange
