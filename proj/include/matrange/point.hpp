#pragma once

// Matrix-tuple points, certificates and point clouds shared by the range,
// solver and construction modules.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "matrange/linalg.hpp"

namespace matrange {

/// Tag recorded in cloud files for the Hermitian flattening below.
inline const std::string kFlatteningTag = "herm-diag-sqrt2-offdiag-rowmajor";
// points of an affine image are plain R^k vectors, not flattenings
inline const std::string kAffineImageTag = "affine-image";

/// An m-tuple of q x q Hermitian matrices. q = 1 gives a scalar joint-range point.
class MatPoint {
public:
    MatPoint() = default;

    explicit MatPoint(std::vector<Matrix> blocks, double tol = kHermitianTol) {
        if (blocks.empty()) throw ValueError("MatPoint: m must be >= 1");
        const Eigen::Index q = blocks.front().rows();
        for (std::size_t j = 0; j < blocks.size(); ++j) {
            const Matrix& b = blocks[j];
            if (b.rows() != q || b.cols() != q)
                throw DimensionError("MatPoint: block " + std::to_string(j) + " has the wrong shape");
            if (!is_hermitian(b, tol)) throw ValueError("MatPoint: block " + std::to_string(j) + " is not Hermitian");
            blocks_.push_back(hermitize(b));
        }
    }

    /// (c_1 I_q, ..., c_m I_q)
    static MatPoint scalar(const std::vector<double>& c, int q) {
        std::vector<Matrix> bs;
        for (double v : c) bs.push_back(Matrix::Identity(q, q) * v);
        return MatPoint(std::move(bs));
    }

    int m() const { return static_cast<int>(blocks_.size()); }
    int q() const { return blocks_.empty() ? 0 : static_cast<int>(blocks_.front().rows()); }
    const Matrix& operator[](int j) const { return blocks_[static_cast<std::size_t>(j)]; }
    const std::vector<Matrix>& blocks() const { return blocks_; }

    /// t * this + (1 - t) * other
    MatPoint blend(const MatPoint& other, double t) const {
        if (other.m() != m() || other.q() != q()) throw DimensionError("MatPoint::blend: shape mismatch");
        std::vector<Matrix> out;
        for (int j = 0; j < m(); ++j) out.push_back(t * (*this)[j] + (1.0 - t) * other[j]);
        return MatPoint(std::move(out));
    }

    double distance(const MatPoint& other) const {
        double s = 0.0;
        for (int j = 0; j < m(); ++j) s += ((*this)[j] - other[j]).squaredNorm();
        return std::sqrt(s);
    }

private:
    std::vector<Matrix> blocks_;
};

// Flattening: per block, q diagonal reals, then for i < j (row-major) the
// pair (sqrt2 Re b_ij, sqrt2 Im b_ij). Isometric to the Frobenius inner product.

inline int flat_dim(int m, int q) { return m * q * q; }

inline RealVector flatten(const MatPoint& b) {
    const int q = b.q();
    RealVector out(flat_dim(b.m(), q));
    Eigen::Index k = 0;
    for (int j = 0; j < b.m(); ++j) {
        const Matrix& blk = b[j];
        for (int i = 0; i < q; ++i) out(k++) = blk(i, i).real();
        for (int i = 0; i < q; ++i)
            for (int l = i + 1; l < q; ++l) {
                out(k++) = M_SQRT2 * blk(i, l).real();
                out(k++) = M_SQRT2 * blk(i, l).imag();
            }
    }
    return out;
}

inline MatPoint unflatten(const RealVector& v, int m, int q) {
    if (v.size() != flat_dim(m, q))
        throw DimensionError("unflatten: vector has length " + std::to_string(v.size()) + ", expected " +
                             std::to_string(flat_dim(m, q)));
    std::vector<Matrix> blocks;
    Eigen::Index k = 0;
    for (int j = 0; j < m; ++j) {
        Matrix blk = Matrix::Zero(q, q);
        for (int i = 0; i < q; ++i) blk(i, i) = v(k++);
        for (int i = 0; i < q; ++i)
            for (int l = i + 1; l < q; ++l) {
                const double re = v(k++) * M_SQRT1_2;
                const double im = v(k++) * M_SQRT1_2;
                blk(i, l) = cplx(re, im);
                blk(l, i) = cplx(re, -im);
            }
        blocks.push_back(std::move(blk));
    }
    return MatPoint(std::move(blocks));
}

/// Witness that `point` lies in Lambda_{p,q}(A): X* A_j X = I_p (x) B_j up to `residual`.
struct Certificate {
    MatPoint point;
    int p = 1;
    Isometry witness;
    double residual = 0.0;
};

/// Affine map x -> L x + offset on flattened coordinates.
struct AffineMap {
    RealMatrix linear;
    RealVector offset;
};

struct Provenance {
    std::uint64_t seed = 0;
    double accept_tol = 0.0;
    std::string generator;
    int attempts = 0;
    double acceptance_rate = 1.0;
};

/// A finite sample of range points. `points` are flattened coordinates; after
/// an affine image they live in R^dim and `transform` records the map.
struct PointCloud {
    int m = 0;
    int p = 1;
    int q = 1;
    int dim = 0;
    std::string flattening = kFlatteningTag;
    std::vector<RealVector> points;
    std::vector<std::optional<Certificate>> certificates;  // empty or parallel to points
    Provenance provenance;
    std::optional<AffineMap> transform;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }

    MatPoint mat_point(std::size_t i) const { return unflatten(points[i], m, q); }

    /// max_i <u, points_i>; -inf for an empty cloud.
    double support(const RealVector& u) const {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& x : points) best = std::max(best, u.dot(x));
        return best;
    }
};

}  // namespace matrange
