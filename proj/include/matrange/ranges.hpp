#pragma once

// Classical and joint numerical ranges, single-matrix rank-k intervals,
// tuple reductions and affine images of point clouds.

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "matrange/linalg.hpp"
#include "matrange/point.hpp"

namespace matrange {

// ---------------------------------------------------------------------------
// Tuple reductions

/// (A_1..A_m) -> (H_1, G_1, ..., H_m, G_m) with A_j = H_j + i G_j.
inline HermitianTuple hermitian_embed(const std::vector<Matrix>& tuple) {
    if (tuple.empty()) throw ValueError("hermitian_embed: empty tuple");
    const Eigen::Index n = tuple.front().rows();
    std::vector<Matrix> out;
    for (std::size_t j = 0; j < tuple.size(); ++j) {
        const Matrix& a = tuple[j];
        if (a.rows() != a.cols() || a.rows() != n)
            throw DimensionError("hermitian_embed: member " + std::to_string(j) + " is not " + std::to_string(n) +
                                 "x" + std::to_string(n));
        out.push_back((a + a.adjoint()) * 0.5);
        out.push_back((a - a.adjoint()) * cplx(0.0, -0.5));
    }
    return HermitianTuple(std::move(out));
}

inline void check_transform(const RealMatrix& t, int m) {
    if (t.rows() != m || t.cols() != m)
        throw DimensionError("tuple transform must be " + std::to_string(m) + "x" + std::to_string(m));
    const double scale = rel_scale(t.norm());
    if (std::abs(t.determinant()) <= 1e-12 * std::pow(scale, m))
        throw ValueError("tuple transform is singular");
}

/// B_j = sum_i t_ij A_i for nonsingular real T.
inline HermitianTuple tuple_linear_transform(const HermitianTuple& a, const RealMatrix& t) {
    check_transform(t, a.m());
    std::vector<Matrix> out;
    for (int j = 0; j < a.m(); ++j) {
        Matrix b = Matrix::Zero(a.n(), a.n());
        for (int i = 0; i < a.m(); ++i) b += t(i, j) * a[i];
        out.push_back(std::move(b));
    }
    return HermitianTuple(std::move(out));
}

/// Z_j = sum_i t_ij Y_i, the matching map on range points.
inline MatPoint transform_point(const MatPoint& y, const RealMatrix& t) {
    check_transform(t, y.m());
    std::vector<Matrix> out;
    for (int j = 0; j < y.m(); ++j) {
        Matrix z = Matrix::Zero(y.q(), y.q());
        for (int i = 0; i < y.m(); ++i) z += t(i, j) * y[i];
        out.push_back(std::move(z));
    }
    return MatPoint(std::move(out));
}

// ---------------------------------------------------------------------------
// Classical numerical range W(A)

enum class BoundaryShape { Polygon, Segment, Point };

inline const char* to_string(BoundaryShape s) {
    switch (s) {
        case BoundaryShape::Polygon: return "polygon";
        case BoundaryShape::Segment: return "segment";
        case BoundaryShape::Point: return "point";
    }
    return "polygon";
}

/// Inner polygon (vertices in W(A)) and outer half-planes
/// Re(e^{-i theta} z) <= offsets[i] for the same angle grid.
struct Boundary2D {
    std::vector<double> angles;
    std::vector<cplx> vertices;
    std::vector<double> offsets;
    std::vector<Vector> witnesses;  // unit vectors with <A x, x> = vertex
    BoundaryShape shape = BoundaryShape::Polygon;

    /// True when z satisfies every supporting half-plane inflated by tol.
    bool outer_contains(cplx z, double tol) const {
        for (std::size_t i = 0; i < angles.size(); ++i) {
            const cplx rot = std::polar(1.0, -angles[i]);
            if ((rot * z).real() > offsets[i] + tol) return false;
        }
        return true;
    }
};

inline double polygon_area(const std::vector<cplx>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const cplx a = v[i];
        const cplx b = v[(i + 1) % v.size()];
        s += a.real() * b.imag() - b.real() * a.imag();
    }
    return 0.5 * std::abs(s);
}

/// Supporting-line method: the top eigenvector of Re(e^{-i theta} A) is a
/// unit vector whose Rayleigh quotient lies on the boundary of W(A).
inline Boundary2D numrange_boundary(const Matrix& a, int n_angles) {
    if (a.rows() != a.cols()) throw DimensionError("numrange_boundary: matrix is not square");
    if (a.rows() == 0) throw DimensionError("numrange_boundary: empty matrix");
    if (n_angles < 8) throw ValueError("numrange_boundary: need at least 8 angles");
    Boundary2D out;
    for (int i = 0; i < n_angles; ++i) {
        const double theta = 2.0 * M_PI * i / n_angles;
        const cplx rot = std::polar(1.0, -theta);
        const Matrix h = (rot * a + std::conj(rot) * a.adjoint()) * 0.5;
        const auto eig = herm_eig(h);
        const Vector x = eig.vectors.col(0);
        out.angles.push_back(theta);
        out.offsets.push_back(eig.values(0));
        out.vertices.push_back(x.dot(a * x));
        out.witnesses.push_back(x);
    }
    double diam = 0.0;
    for (const auto& u : out.vertices)
        for (const auto& v : out.vertices) diam = std::max(diam, std::abs(u - v));
    if (diam <= 1e-12 * rel_scale(a.norm()))
        out.shape = BoundaryShape::Point;
    else if (polygon_area(out.vertices) < 1e-12 * diam * diam)
        out.shape = BoundaryShape::Segment;
    return out;
}

inline double point_segment_distance(cplx z, cplx a, cplx b) {
    const cplx d = b - a;
    const double len2 = std::norm(d);
    if (len2 == 0.0) return std::abs(z - a);
    const double t = std::clamp(((z - a) * std::conj(d)).real() / len2, 0.0, 1.0);
    return std::abs(z - (a + t * d));
}

/// Hausdorff distance between the outer polygon (intersection of consecutive
/// supporting lines) and the inner vertex polygon.
inline double hausdorff_gap(const Boundary2D& b) {
    double gap = 0.0;
    const std::size_t n = b.angles.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        const cplx ni = std::polar(1.0, b.angles[i]);
        const cplx nj = std::polar(1.0, b.angles[j]);
        const double det = ni.real() * nj.imag() - ni.imag() * nj.real();
        if (std::abs(det) < 1e-14) continue;
        // Solve Re(conj(n) z) = offset for both lines.
        const double x = (b.offsets[i] * nj.imag() - b.offsets[j] * ni.imag()) / det;
        const double y = (ni.real() * b.offsets[j] - nj.real() * b.offsets[i]) / det;
        gap = std::max(gap, point_segment_distance({x, y}, b.vertices[i], b.vertices[j]));
    }
    return gap;
}

// ---------------------------------------------------------------------------
// Joint numerical range W(A) for Hermitian tuples

inline Vector random_unit_vector(int n, Rng& rng) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = rng.complex_normal();
    return x / x.norm();
}

inline RealVector joint_point(const HermitianTuple& a, const Vector& x) {
    RealVector out(a.m());
    for (int j = 0; j < a.m(); ++j) out(j) = x.dot(a[j] * x).real();
    return out;
}

/// Haar-uniform unit vectors x, emitting (<A_j x, x>)_j. With
/// `attach_certificates` each point carries its witness x (p = q = 1).
inline PointCloud joint_numrange_sample(const HermitianTuple& a, int count, std::uint64_t seed,
                                        bool attach_certificates = false) {
    if (count < 1) throw ValueError("joint_numrange_sample: count must be >= 1");
    PointCloud cloud;
    cloud.m = a.m();
    cloud.dim = a.m();
    cloud.provenance.seed = seed;
    cloud.provenance.generator = "joint_numrange_sample";
    cloud.provenance.attempts = count;
    Rng rng(seed);
    for (int s = 0; s < count; ++s) {
        const Vector x = random_unit_vector(a.n(), rng);
        RealVector pt = joint_point(a, x);
        if (attach_certificates) {
            std::vector<double> vals(pt.data(), pt.data() + pt.size());
            Certificate cert{MatPoint::scalar(vals, 1), 1, Isometry(Matrix(x)), 0.0};
            double r2 = 0.0;
            for (int j = 0; j < a.m(); ++j) r2 += std::norm(x.dot(a[j] * x) - vals[static_cast<std::size_t>(j)]);
            cert.residual = std::sqrt(r2);
            cloud.certificates.emplace_back(std::move(cert));
        }
        cloud.points.push_back(std::move(pt));
    }
    return cloud;
}

inline Matrix linear_combination(const HermitianTuple& a, const RealVector& u) {
    if (u.size() != a.m()) throw DimensionError("direction length does not match m");
    Matrix h = Matrix::Zero(a.n(), a.n());
    for (int j = 0; j < a.m(); ++j) h += u(j) * a[j];
    return h;
}

/// Support function of conv W(A): lambda_max(sum_j u_j A_j).
inline double support_value(const HermitianTuple& a, const RealVector& u) {
    if (u.norm() == 0.0) throw ValueError("support_value: zero direction");
    return lambda_max(linear_combination(a, u));
}

// ---------------------------------------------------------------------------
// Rank-k interval of a single Hermitian matrix

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool empty = false;

    bool contains(double x, double tol = 0.0) const { return !empty && x >= lo - tol && x <= hi + tol; }
};

/// Lambda_k(A) = [a_{n-k+1}, a_k] with eigenvalues descending; empty when a_k < a_{n-k+1}.
inline Interval rank_k_interval(const Matrix& a, int k) {
    const int n = static_cast<int>(a.rows());
    if (k < 1 || k > n) throw ValueError("rank_k_interval: k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    const RealVector ev = eigenvalues(a);
    Interval out{ev(n - k), ev(k - 1), false};
    if (out.hi < out.lo) out.empty = true;
    return out;
}

// ---------------------------------------------------------------------------
// Affine images of clouds

inline PointCloud affine_image(const PointCloud& cloud, const AffineMap& map) {
    if (map.linear.cols() != cloud.dim)
        throw DimensionError("affine_image: map expects dimension " + std::to_string(map.linear.cols()) +
                             ", cloud has " + std::to_string(cloud.dim));
    if (map.offset.size() != map.linear.rows()) throw DimensionError("affine_image: offset length mismatch");
    PointCloud out;
    out.m = cloud.m;
    out.p = cloud.p;
    out.q = cloud.q;
    out.dim = static_cast<int>(map.linear.rows());
    out.flattening = kAffineImageTag;
    out.provenance = cloud.provenance;
    for (const auto& x : cloud.points) out.points.push_back(map.linear * x + map.offset);
    if (cloud.transform)
        out.transform = AffineMap{map.linear * cloud.transform->linear, map.linear * cloud.transform->offset + map.offset};
    else
        out.transform = map;
    return out;
}

/// (B_1..B_m) -> (tr B_1, ..., tr B_m) in flattened coordinates.
inline AffineMap trace_map(int m, int q) {
    const int per = q * q;
    AffineMap map{RealMatrix::Zero(m, flat_dim(m, q)), RealVector::Zero(m)};
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < q; ++i) map.linear(j, j * per + i) = 1.0;
    return map;
}

/// (B_1..B_m) -> (tr(C B_1), ..., tr(C B_m)) for Hermitian C.
inline AffineMap c_trace_map(const Matrix& c, int m) {
    if (!is_hermitian(c)) throw ValueError("c_trace_map: C must be Hermitian");
    const int q = static_cast<int>(c.rows());
    const int per = q * q;
    AffineMap map{RealMatrix::Zero(m, flat_dim(m, q)), RealVector::Zero(m)};
    for (int j = 0; j < m; ++j) {
        int k = j * per;
        for (int i = 0; i < q; ++i) map.linear(j, k++) = c(i, i).real();
        for (int i = 0; i < q; ++i)
            for (int l = i + 1; l < q; ++l) {
                map.linear(j, k++) = M_SQRT2 * c(i, l).real();
                map.linear(j, k++) = M_SQRT2 * c(i, l).imag();
            }
    }
    return map;
}

}  // namespace matrange
