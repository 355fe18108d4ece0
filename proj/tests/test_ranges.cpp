#include <gtest/gtest.h>

#include <cmath>
#include <variant>

#include "matrange/feasibility.hpp"
#include "matrange/ranges.hpp"

using namespace matrange;

namespace {

HermitianTuple pauli() {
    Matrix sx(2, 2), sy(2, 2), sz(2, 2);
    sx << 0, 1, 1, 0;
    sy << 0, cplx(0, -1), cplx(0, 1), 0;
    sz << 1, 0, 0, -1;
    return HermitianTuple{sx, sy, sz};
}

}  // namespace

TEST(HermitianEmbed, Cases) {
    const Matrix h = random_hermitian_tuple(1, 3, 1)[0];
    const HermitianTuple e = hermitian_embed({h});
    ASSERT_EQ(e.m(), 2);
    EXPECT_LE((e[0] - h).norm(), 1e-15);
    EXPECT_LE(e[1].norm(), 1e-15);

    const HermitianTuple ii = hermitian_embed({Matrix(cplx(0, 1) * Matrix::Identity(2, 2))});
    EXPECT_LE(ii[0].norm(), 1e-15);
    EXPECT_LE((ii[1] - Matrix::Identity(2, 2)).norm(), 1e-15);

    Rng rng(4);
    const Matrix a = gaussian_matrix(5, 5, rng);
    const HermitianTuple r = hermitian_embed({a});
    EXPECT_LE((r[0] + cplx(0, 1) * r[1] - a).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_THROW(hermitian_embed({Matrix(2, 3)}), DimensionError);
}

TEST(TupleTransform, IdentityAndSwap) {
    const HermitianTuple a = random_hermitian_tuple(2, 3, 2);
    const HermitianTuple same = tuple_linear_transform(a, RealMatrix::Identity(2, 2));
    EXPECT_LE((same[0] - a[0]).norm() + (same[1] - a[1]).norm(), 0.0);
    RealMatrix swap(2, 2);
    swap << 0, 1, 1, 0;
    const HermitianTuple sw = tuple_linear_transform(a, swap);
    EXPECT_LE((sw[0] - a[1]).norm() + (sw[1] - a[0]).norm(), 0.0);
    EXPECT_THROW(tuple_linear_transform(a, RealMatrix::Ones(2, 2)), ValueError);
    EXPECT_THROW(tuple_linear_transform(a, RealMatrix::Identity(3, 3)), DimensionError);
}

TEST(TupleTransform, MembershipCovariance) {
    const HermitianTuple a = random_hermitian_tuple(2, 6, 3);
    RealMatrix t(2, 2);
    t << 2.0, 0.5, -1.0, 1.0;
    const HermitianTuple b = tuple_linear_transform(a, t);
    SolverOptions opts;
    opts.seed = 1;
    const PointCloud cloud = sample_range(a, 2, 1, 3, opts);
    ASSERT_EQ(cloud.size(), 3u);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Certificate& c = *cloud.certificates[i];
        const MatPoint z = transform_point(c.point, t);
        // the witness carries over
        EXPECT_LE(residual(b, c.witness.matrix(), 2, z), 1e-8);
        // and the solver finds Z in Lambda(B) and Y back in Lambda(A) independently
        EXPECT_TRUE(accepted(membership(b, z, 2, opts)));
        EXPECT_TRUE(accepted(membership(a, transform_point(z, t.inverse()), 2, opts)));
    }
}

TEST(NumrangeBoundary, NormalMatrixSegment) {
    const Boundary2D b = numrange_boundary(HermitianMatrix::diagonal({0, 1}).matrix(), 32);
    EXPECT_EQ(b.shape, BoundaryShape::Segment);
    for (const auto& v : b.vertices) {
        EXPECT_NEAR(v.imag(), 0.0, 1e-12);
        EXPECT_GE(v.real(), -1e-12);
        EXPECT_LE(v.real(), 1.0 + 1e-12);
    }
}

TEST(NumrangeBoundary, JordanBlockCircle) {
    Matrix j(2, 2);
    j << 0, 2, 0, 0;
    const Boundary2D b = numrange_boundary(j, 64);
    EXPECT_EQ(b.shape, BoundaryShape::Polygon);
    for (std::size_t i = 0; i < b.vertices.size(); ++i) {
        EXPECT_NEAR(std::abs(b.vertices[i]), 1.0, 1e-8);
        // vertex witnessed by its unit vector
        const Vector& x = b.witnesses[i];
        EXPECT_NEAR(x.norm(), 1.0, 1e-12);
        EXPECT_NEAR(std::abs(x.dot(j * x) - b.vertices[i]), 0.0, 1e-12);
    }
    // sampling oracle: |<Jx,x>| over many random unit vectors stays within and approaches radius 1
    Rng rng(17);
    double best = 0.0;
    for (int s = 0; s < 1000000; ++s) {
        const Vector x = random_unit_vector(2, rng);
        best = std::max(best, std::abs(x.dot(j * x)));
    }
    EXPECT_LE(best, 1.0 + 1e-12);
    EXPECT_GE(best, 1.0 - 1e-3);
}

TEST(NumrangeBoundary, IdentityIsPoint) {
    const Boundary2D b = numrange_boundary(Matrix::Identity(3, 3), 16);
    EXPECT_EQ(b.shape, BoundaryShape::Point);
    for (const auto& v : b.vertices) EXPECT_NEAR(std::abs(v - 1.0), 0.0, 1e-12);
    EXPECT_THROW(numrange_boundary(Matrix::Identity(3, 3), 4), ValueError);
}

TEST(NumrangeBoundary, RefinementShrinksGap) {
    Rng rng(8);
    const Matrix a = gaussian_matrix(6, 6, rng);
    double prev = std::numeric_limits<double>::infinity();
    for (int n : {8, 16, 32, 64, 128, 256}) {
        const double gap = hausdorff_gap(numrange_boundary(a, n));
        EXPECT_LT(gap, prev) << "angles = " << n;
        prev = gap;
    }
}

TEST(JointSample, Cases) {
    const HermitianTuple sc{Matrix::Identity(3, 3), Matrix(2.0 * Matrix::Identity(3, 3))};
    for (const auto& x : joint_numrange_sample(sc, 20, 1).points) {
        EXPECT_NEAR(x(0), 1.0, 1e-14);
        EXPECT_NEAR(x(1), 2.0, 1e-14);
    }
    const PointCloud pc = joint_numrange_sample(pauli(), 10000, 2);
    for (const auto& x : pc.points) ASSERT_NEAR(x.norm(), 1.0, 1e-10);
    for (const auto& x : joint_numrange_sample(HermitianTuple{HermitianMatrix::diagonal({0, 1}).matrix()}, 100, 3).points) {
        EXPECT_GE(x(0), -1e-15);
        EXPECT_LE(x(0), 1.0 + 1e-15);
    }
    const PointCloud a = joint_numrange_sample(pauli(), 5, 9, true);
    const PointCloud b = joint_numrange_sample(pauli(), 5, 9, true);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(a.points[i], b.points[i]);
        EXPECT_LE(a.certificates[i]->residual, 1e-14);
    }
}

TEST(SupportValue, Cases) {
    RealVector u1(1);
    u1 << 1.0;
    EXPECT_NEAR(support_value(HermitianTuple{HermitianMatrix::diagonal({0, 1}).matrix()}, u1), 1.0, 1e-14);
    u1 << -1.0;
    EXPECT_NEAR(support_value(HermitianTuple{Matrix::Identity(2, 2)}, u1), -1.0, 1e-14);
    Rng rng(5);
    for (int i = 0; i < 10; ++i) {
        RealVector u(3);
        u << rng.normal(), rng.normal(), rng.normal();
        u.normalize();
        EXPECT_NEAR(support_value(pauli(), u), 1.0, 1e-12);
    }
    EXPECT_THROW(support_value(pauli(), RealVector::Zero(3)), ValueError);
}

TEST(RankKInterval, DiagonalAgainstBruteForce) {
    const Matrix d = HermitianMatrix::diagonal({1, 2, 3, 4}).matrix();
    const Interval iv = rank_k_interval(d, 2);
    EXPECT_DOUBLE_EQ(iv.lo, 2.0);
    EXPECT_DOUBLE_EQ(iv.hi, 3.0);
    // b in Lambda_2 needs lambda_min(X*DX) <= b <= lambda_max(X*DX) with equality of both;
    // the extreme feasible values are sup lambda_min and inf lambda_max over 4x2 isometries
    double sup_min = -1e9, inf_max = 1e9;
    for (std::uint64_t s = 0; s < 100000; ++s) {
        const Matrix x = random_isometry(4, 2, s).matrix();
        const RealVector ev = eigenvalues(x.adjoint() * d * x);
        sup_min = std::max(sup_min, ev(1));
        inf_max = std::min(inf_max, ev(0));
    }
    EXPECT_LE(sup_min, iv.hi + 1e-12);
    EXPECT_GE(inf_max, iv.lo - 1e-12);
    EXPECT_GE(sup_min, iv.hi - 0.05);
    EXPECT_LE(inf_max, iv.lo + 0.05);
}

TEST(RankKInterval, Cases) {
    const Matrix a = random_hermitian_tuple(1, 5, 6)[0];
    const RealVector ev = eigenvalues(a);
    const Interval one = rank_k_interval(a, 1);
    EXPECT_DOUBLE_EQ(one.lo, ev(4));
    EXPECT_DOUBLE_EQ(one.hi, ev(0));
    const Interval id = rank_k_interval(Matrix::Identity(4, 4), 3);
    EXPECT_FALSE(id.empty);
    EXPECT_DOUBLE_EQ(id.lo, 1.0);
    EXPECT_DOUBLE_EQ(id.hi, 1.0);
    EXPECT_TRUE(rank_k_interval(HermitianMatrix::diagonal({1, 2, 3}).matrix(), 3).empty);
    EXPECT_THROW(rank_k_interval(a, 0), ValueError);
    EXPECT_THROW(rank_k_interval(a, 6), ValueError);
}

TEST(AffineImage, IdentityTraceAndCTrace) {
    const HermitianTuple a = random_hermitian_tuple(2, 6, 7);
    SolverOptions opts;
    const PointCloud cloud = sample_range(a, 1, 2, 4, opts);
    ASSERT_EQ(cloud.dim, 8);
    const int dim = cloud.dim;
    const PointCloud same = affine_image(cloud, {RealMatrix::Identity(dim, dim), RealVector::Zero(dim)});
    for (std::size_t i = 0; i < cloud.size(); ++i) EXPECT_EQ(same.points[i], cloud.points[i]);

    const PointCloud tr = affine_image(cloud, trace_map(2, 2));
    Matrix c(2, 2);
    c << 1.5, cplx(0.3, -0.7), cplx(0.3, 0.7), -0.2;
    const PointCloud ct = affine_image(cloud, c_trace_map(c, 2));
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const MatPoint b = cloud.mat_point(i);
        for (int j = 0; j < 2; ++j) {
            EXPECT_NEAR(tr.points[i](j), b[j].trace().real(), 1e-12);
            EXPECT_NEAR(ct.points[i](j), (c * b[j]).trace().real(), 1e-12);
        }
    }
    EXPECT_THROW(affine_image(cloud, trace_map(2, 1)), DimensionError);
}

TEST(Flatten, RoundTripAndIsometry) {
    Rng rng(12);
    std::vector<Matrix> blocks{random_hermitian(3, rng), random_hermitian(3, rng)};
    const MatPoint b(blocks);
    const RealVector f = flatten(b);
    ASSERT_EQ(f.size(), flat_dim(2, 3));
    const MatPoint back = unflatten(f, 2, 3);
    EXPECT_LE(back.distance(b), 1e-15);
    // Frobenius norm is preserved
    EXPECT_NEAR(f.norm(), std::sqrt(blocks[0].squaredNorm() + blocks[1].squaredNorm()), 1e-13);
}
