#pragma once

// Dense complex linear algebra used throughout matrange: Hermitian
// eigendecomposition (cyclic Jacobi), orthonormalization, Haar isometries,
// compressions and block assembly.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "matrange/errors.hpp"

namespace matrange {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kIsometryTol = 1e-10;

inline double rel_scale(double norm) { return std::max(1.0, norm); }

inline bool all_finite(const Matrix& a) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const cplx z = a.data()[i];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    return true;
}

inline double hermitian_defect(const Matrix& a) {
    return (a - a.adjoint()).norm();
}

inline bool is_hermitian(const Matrix& a, double tol = kHermitianTol) {
    return a.rows() == a.cols() && hermitian_defect(a) <= tol * rel_scale(a.norm());
}

/// Symmetrize exactly: (A + A*)/2.
inline Matrix hermitize(const Matrix& a) { return (a + a.adjoint()) * 0.5; }

// ---------------------------------------------------------------------------
// Seeded random numbers. Gaussian draws use Box-Muller on top of mt19937_64
// so that streams are bit-stable independent of the standard library's
// distribution implementations.

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() {
        // 53 random mantissa bits in [0, 1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    cplx complex_normal() {
        const double re = normal();
        const double im = normal();
        return {re * M_SQRT1_2, im * M_SQRT1_2};
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Matrix g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = rng.complex_normal();
    return g;
}

// ---------------------------------------------------------------------------
// Strong types

/// n x n Hermitian matrix. Construction validates Hermiticity and stores the
/// exactly symmetrized matrix.
class HermitianMatrix {
public:
    HermitianMatrix() = default;

    explicit HermitianMatrix(const Matrix& a, double tol = kHermitianTol) {
        if (a.rows() != a.cols())
            throw DimensionError("HermitianMatrix: matrix is " + std::to_string(a.rows()) + "x" +
                                 std::to_string(a.cols()) + ", expected square");
        if (!all_finite(a)) throw ValueError("HermitianMatrix: non-finite entry");
        if (!is_hermitian(a, tol))
            throw ValueError("HermitianMatrix: ||A - A*||_F = " + std::to_string(hermitian_defect(a)) +
                             " exceeds tolerance");
        a_ = hermitize(a);
    }

    static HermitianMatrix diagonal(const std::vector<double>& d) {
        RealVector v = Eigen::Map<const RealVector>(d.data(), static_cast<Eigen::Index>(d.size()));
        return HermitianMatrix(Matrix(v.cast<cplx>().asDiagonal()));
    }

    int n() const { return static_cast<int>(a_.rows()); }
    const Matrix& matrix() const { return a_; }
    operator const Matrix&() const { return a_; }

private:
    Matrix a_;
};

/// An m-tuple of n x n Hermitian matrices.
class HermitianTuple {
public:
    HermitianTuple() = default;

    explicit HermitianTuple(std::vector<Matrix> members, double tol = kHermitianTol) {
        if (members.empty()) throw ValueError("HermitianTuple: m must be >= 1");
        const Eigen::Index n = members.front().rows();
        for (std::size_t j = 0; j < members.size(); ++j) {
            const Matrix& a = members[j];
            if (a.rows() != n || a.cols() != n)
                throw DimensionError("HermitianTuple: member " + std::to_string(j) + " is " +
                                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                     ", expected " + std::to_string(n) + "x" + std::to_string(n));
            if (!all_finite(a)) throw ValueError("HermitianTuple: non-finite entry in member " + std::to_string(j));
            if (!is_hermitian(a, tol))
                throw ValueError("HermitianTuple: member " + std::to_string(j) + " is not Hermitian");
            members_.push_back(hermitize(a));
        }
    }

    HermitianTuple(std::initializer_list<Matrix> members)
        : HermitianTuple(std::vector<Matrix>(members)) {}

    int m() const { return static_cast<int>(members_.size()); }
    int n() const { return members_.empty() ? 0 : static_cast<int>(members_.front().rows()); }
    const Matrix& operator[](int j) const { return members_[static_cast<std::size_t>(j)]; }
    const std::vector<Matrix>& members() const { return members_; }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& a : members_) s += a.squaredNorm();
        return std::sqrt(s);
    }

    /// Scalar tuple (c_1 I_n, ..., c_m I_n).
    static HermitianTuple scalar(const std::vector<double>& c, int n) {
        std::vector<Matrix> ms;
        for (double v : c) ms.push_back(Matrix::Identity(n, n) * v);
        return HermitianTuple(std::move(ms));
    }

private:
    std::vector<Matrix> members_;
};

/// n x k matrix with orthonormal columns.
class Isometry {
public:
    Isometry() = default;

    explicit Isometry(Matrix x, double tol = kIsometryTol) : x_(std::move(x)) {
        if (x_.cols() > x_.rows())
            throw DimensionError("Isometry: k = " + std::to_string(x_.cols()) + " exceeds n = " +
                                 std::to_string(x_.rows()));
        if (!all_finite(x_)) throw ValueError("Isometry: non-finite entry");
        const double d = defect();
        if (d > tol) throw ValueError("Isometry: ||X*X - I||_F = " + std::to_string(d) + " exceeds tolerance");
    }

    static Isometry identity(int n) { return Isometry(Matrix::Identity(n, n)); }

    /// Columns `first .. first+k-1` of I_n.
    static Isometry coordinate(int n, int first, int k) {
        Matrix x = Matrix::Zero(n, k);
        for (int i = 0; i < k; ++i) x(first + i, i) = 1.0;
        return Isometry(std::move(x));
    }

    int n() const { return static_cast<int>(x_.rows()); }
    int k() const { return static_cast<int>(x_.cols()); }
    const Matrix& matrix() const { return x_; }
    operator const Matrix&() const { return x_; }

    double defect() const {
        return (x_.adjoint() * x_ - Matrix::Identity(x_.cols(), x_.cols())).norm();
    }

private:
    Matrix x_;
};

// ---------------------------------------------------------------------------
// Eigendecomposition

struct EigenDecomposition {
    RealVector values;  // descending
    Matrix vectors;     // unitary, columns match values
};

/// Cyclic Jacobi for Hermitian matrices. Each rotation is a phase change that
/// makes a_pq real followed by a real plane rotation zeroing it.
inline EigenDecomposition herm_eig(const Matrix& input, int max_sweeps = 30) {
    if (input.rows() != input.cols()) throw DimensionError("herm_eig: matrix is not square");
    const Eigen::Index n = input.rows();
    Matrix a = hermitize(input);
    Matrix v = Matrix::Identity(n, n);
    const double scale = a.norm();
    const double stop = 1e-12 * scale;

    auto off_norm = [&]() {
        double s = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                if (i != j) s += std::norm(a(i, j));
        return std::sqrt(s);
    };

    int sweep = 0;
    double off = off_norm();
    while (off > stop) {
        if (sweep == max_sweeps)
            throw ConvergenceError("herm_eig: no convergence after " + std::to_string(max_sweeps) +
                                   " sweeps, off-diagonal norm " + std::to_string(off));
        ++sweep;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq_abs = std::abs(a(p, q));
                if (apq_abs == 0.0) continue;
                const cplx phase = a(p, q) / apq_abs;  // e^{i phi}
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double tau = (aqq - app) / (2.0 * apq_abs);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const cplx ph_conj = std::conj(phase);

                // A <- A G with G = diag(1, e^{-i phi}) [[c, s], [-s, c]] on (p, q)
                for (Eigen::Index i = 0; i < n; ++i) {
                    const cplx aip = a(i, p);
                    const cplx aiq = a(i, q) * ph_conj;
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                    const cplx vip = v(i, p);
                    const cplx viq = v(i, q) * ph_conj;
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
                // A <- G* A
                for (Eigen::Index j = 0; j < n; ++j) {
                    const cplx apj = a(p, j);
                    const cplx aqj = a(q, j) * phase;
                    a(p, j) = c * apj - s * aqj;
                    a(q, j) = s * apj + c * aqj;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
        }
        off = off_norm();
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() > a(j, j).real(); });
    EigenDecomposition out{RealVector(n), Matrix(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]).real();
        out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

inline RealVector eigenvalues(const Matrix& a) { return herm_eig(a).values; }

inline double lambda_max(const Matrix& a) {
    const auto v = eigenvalues(a);
    return v.size() ? v(0) : 0.0;
}

// ---------------------------------------------------------------------------
// Orthonormalization

/// Modified Gram-Schmidt with one reorthogonalization pass. Returns Q with
/// positive R diagonal; throws RankDeficientError naming the failing column.
inline Isometry orthonormalize(const Matrix& m, double rank_tol = 1e-12) {
    if (m.cols() > m.rows())
        throw RankDeficientError(static_cast<int>(m.rows()),
                                 "orthonormalize: more columns than rows, column " + std::to_string(m.rows()) +
                                     " cannot be independent");
    Matrix q = m;
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        const double original = q.col(j).norm();
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index i = 0; i < j; ++i) {
                const cplx r = q.col(i).dot(q.col(j));  // conj(q_i) . q_j
                q.col(j) -= r * q.col(i);
            }
        const double nrm = q.col(j).norm();
        if (!(nrm > rank_tol * rel_scale(original)) || nrm == 0.0)
            throw RankDeficientError(static_cast<int>(j), "orthonormalize: column " + std::to_string(j) +
                                                              " is numerically dependent (residual norm " +
                                                              std::to_string(nrm) + ")");
        q.col(j) /= nrm;
    }
    return Isometry(std::move(q));
}

/// Orthonormal basis of the span of the columns of `m`, skipping columns whose
/// residual after projection is below `rel_tol` times the largest column norm.
inline Matrix range_basis(const Matrix& m, double rel_tol = 1e-10) {
    double scale = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) scale = std::max(scale, m.col(j).norm());
    Matrix q(m.rows(), 0);
    if (scale == 0.0) return q;
    std::vector<Vector> cols;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        Vector v = m.col(j);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& c : cols) v -= c.dot(v) * c;
        const double nrm = v.norm();
        if (nrm > rel_tol * scale) cols.push_back(v / nrm);
    }
    q.resize(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) q.col(static_cast<Eigen::Index>(j)) = cols[j];
    return q;
}

/// Orthonormal basis of the orthogonal complement of span(basis), where
/// `basis` has orthonormal columns. Uses the eigenvectors of I - QQ*.
inline Isometry complement_basis(const Matrix& basis, Eigen::Index n) {
    const Eigen::Index l = basis.cols();
    if (l >= n) return Isometry(Matrix(n, 0));
    const Matrix proj = Matrix::Identity(n, n) - basis * basis.adjoint();
    const auto eig = herm_eig(proj);
    Matrix y = eig.vectors.leftCols(n - l);
    // A second Gram-Schmidt pass removes rounding drift toward span(basis).
    for (Eigen::Index j = 0; j < y.cols(); ++j) y.col(j) -= basis * (basis.adjoint() * y.col(j));
    return orthonormalize(y);
}

/// Haar-distributed n x k isometry: QR of a complex Gaussian matrix with
/// positive R diagonal.
inline Isometry random_isometry(int n, int k, std::uint64_t seed) {
    if (k > n || k < 0 || n < 0)
        throw DimensionError("random_isometry: k = " + std::to_string(k) + " must satisfy 0 <= k <= n = " +
                             std::to_string(n));
    Rng rng(seed);
    for (;;) {
        Matrix g = gaussian_matrix(n, k, rng);
        try {
            return orthonormalize(g);
        } catch (const RankDeficientError&) {
            // probability zero; draw again from the same stream
        }
    }
}

inline Isometry random_unitary(int n, std::uint64_t seed) { return random_isometry(n, n, seed); }

/// GUE-normalized random Hermitian: Gaussian entries, Hermitized, scaled by 1/sqrt(n).
inline Matrix random_hermitian(int n, Rng& rng) {
    Matrix g = gaussian_matrix(n, n, rng);
    return hermitize(g) * (n > 0 ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0);
}

inline HermitianTuple random_hermitian_tuple(int m, int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Matrix> ms;
    for (int j = 0; j < m; ++j) ms.push_back(random_hermitian(n, rng));
    return HermitianTuple(std::move(ms));
}

// ---------------------------------------------------------------------------
// Compressions and block assembly

inline HermitianTuple compress(const HermitianTuple& a, const Matrix& x) {
    if (x.rows() != a.n())
        throw DimensionError("compress: isometry has " + std::to_string(x.rows()) + " rows, tuple has n = " +
                             std::to_string(a.n()));
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(a.m()));
    for (const auto& aj : a.members()) out.push_back(hermitize(x.adjoint() * aj * x));
    return HermitianTuple(std::move(out));
}

inline HermitianTuple compress(const HermitianTuple& a, const Isometry& x) { return compress(a, x.matrix()); }

/// I_p (x) B as a dense matrix.
inline Matrix kron_identity(int p, const Matrix& b) {
    const Eigen::Index q = b.rows();
    Matrix out = Matrix::Zero(p * q, p * q);
    for (int i = 0; i < p; ++i) out.block(i * q, i * q, q, q) = b;
    return out;
}

inline HermitianTuple kron_block(int p, const HermitianTuple& b) {
    if (p < 1) throw ValueError("kron_block: p must be >= 1");
    std::vector<Matrix> out;
    for (const auto& bj : b.members()) out.push_back(kron_identity(p, bj));
    return HermitianTuple(std::move(out));
}

inline Matrix block_diag(const Matrix& a, const Matrix& b) {
    Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

inline HermitianTuple direct_sum(const HermitianTuple& a, const HermitianTuple& b) {
    if (a.m() != b.m())
        throw DimensionError("direct_sum: m mismatch (" + std::to_string(a.m()) + " vs " + std::to_string(b.m()) + ")");
    std::vector<Matrix> out;
    for (int j = 0; j < a.m(); ++j) out.push_back(block_diag(a[j], b[j]));
    return HermitianTuple(std::move(out));
}

}  // namespace matrange
