#include <gtest/gtest.h>

#include <filesystem>

#include "matrange/io.hpp"

using namespace matrange;
namespace fs = std::filesystem;

namespace {

std::string tmp(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "matrange_test_io";
    fs::create_directories(dir);
    return (dir / name).string();
}

}  // namespace

TEST(TupleFile, CanonicalIdentity) {
    const std::string text =
        "{\"hermitian\":true,\"m\":1,\"matrices\":[[[1.0,0.0],[0.0,0.0],[0.0,0.0],[1.0,0.0]]],\"n\":2,\"schema_version\":\"1\"}\n";
    io::write_file(tmp("id.json"), text);
    const HermitianTuple a = io::load_tuple(tmp("id.json"));
    EXPECT_EQ(a.m(), 1);
    EXPECT_LE((a[0] - Matrix::Identity(2, 2)).norm(), 0.0);
    EXPECT_EQ(io::dump(io::tuple_json(a)), text);
}

TEST(TupleFile, HermiticityViolationNamesEntry) {
    const std::string text =
        "{\"hermitian\":true,\"m\":2,\"matrices\":[[[1.0,0.0]],[[0.0,0.0],[1.0,0.0],[0.5,0.0],[0.0,0.0]]],\"n\":2,\"schema_version\":\"1\"}";
    // first member has the wrong length
    EXPECT_THROW(io::tuple_file_from_json(io::parse_text(text)), DimensionError);
    const std::string bad =
        "{\"hermitian\":true,\"m\":2,\"matrices\":[[[1.0,0.0],[0.0,0.0],[0.0,0.0],[1.0,0.0]],[[0.0,0.0],[1.0,0.0],[0.5,0.0],[0.0,0.0]]],\"n\":2,\"schema_version\":\"1\"}";
    try {
        io::tuple_file_from_json(io::parse_text(bad));
        FAIL() << "expected ValueError";
    } catch (const ValueError& e) {
        EXPECT_NE(std::string(e.what()).find("matrix 1"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("(0, 1)"), std::string::npos) << e.what();
    }
}

TEST(TupleFile, NonHermitianNeedsExplicitEmbedding) {
    Rng rng(1);
    io::TupleFile tf;
    tf.hermitian = false;
    tf.matrices.push_back(gaussian_matrix(3, 3, rng));
    io::save_tuple(tf, tmp("cx.json"));
    const io::TupleFile back = io::load_tuple_file(tmp("cx.json"));
    EXPECT_FALSE(back.hermitian);
    EXPECT_EQ(back.matrices[0], tf.matrices[0]);
    EXPECT_THROW(io::load_tuple(tmp("cx.json")), ValueError);
    EXPECT_EQ(io::load_tuple(tmp("cx.json"), true).m(), 2);
}

TEST(TupleFile, RoundTripIsByteIdentical) {
    const HermitianTuple a = random_hermitian_tuple(3, 5, 2);
    io::save_tuple(a, tmp("rt1.json"));
    io::save_tuple(io::load_tuple(tmp("rt1.json")), tmp("rt2.json"));
    EXPECT_EQ(io::read_file(tmp("rt1.json")), io::read_file(tmp("rt2.json")));
    // and values survive exactly
    const HermitianTuple b = io::load_tuple(tmp("rt1.json"));
    for (int j = 0; j < 3; ++j) EXPECT_EQ(a[j], b[j]);
}

TEST(TupleFile, SchemaAndValueErrors) {
    EXPECT_THROW(io::tuple_file_from_json(io::parse_text("{\"schema_version\":\"2\"}")), ParseError);
    EXPECT_THROW(io::tuple_file_from_json(io::parse_text("{\"schema_version\":\"1\",\"m\":1}")), ParseError);
    EXPECT_THROW(io::tuple_file_from_json(io::parse_text(
                     "{\"hermitian\":true,\"m\":1,\"matrices\":[[[1.0,0.0]]],\"n\":1,\"schema_version\":\"1\",\"x\":[1e999]}")),
                 ParseError);
    EXPECT_THROW(io::load_tuple(tmp("missing.json")), ParseError);
}

TEST(CloudFile, EmptyCloud) {
    PointCloud c;
    c.m = 2;
    c.dim = 2;
    io::save_cloud(c, tmp("empty.json"));
    const io::LoadedCloud back = io::load_cloud(tmp("empty.json"));
    EXPECT_TRUE(back.cloud.empty());
    EXPECT_FALSE(back.source.has_value());
}

TEST(CloudFile, CertificateRevalidatedOnLoad) {
    const HermitianTuple a = random_hermitian_tuple(2, 6, 3);
    SolverOptions opts;
    const PointCloud cloud = sample_range(a, 2, 1, 1, opts);
    io::save_cloud(cloud, tmp("one.json"), a);
    const io::LoadedCloud back = io::load_cloud(tmp("one.json"));
    ASSERT_TRUE(back.source.has_value());
    const Certificate& c = *back.cloud.certificates[0];
    EXPECT_NEAR(residual(*back.source, c.witness.matrix(), c.p, c.point), c.residual, 1e-12);
    io::save_cloud(back.cloud, tmp("one2.json"), back.source);
    EXPECT_EQ(io::read_file(tmp("one.json")), io::read_file(tmp("one2.json")));

    // a tampered residual is caught
    io::json j = io::parse_text(io::read_file(tmp("one.json")));
    j["certificates"][0]["residual"] = 0.5;
    EXPECT_THROW(io::cloud_from_json(j), ValueError);
}

TEST(CloudFile, TruncatedFileReportsOffset) {
    const HermitianTuple a = random_hermitian_tuple(1, 4, 4);
    io::save_cloud(sample_range(a, 1, 1, 2), tmp("full.json"), a);
    const std::string text = io::read_file(tmp("full.json"));
    io::write_file(tmp("trunc.json"), text.substr(0, text.size() / 2));
    try {
        io::load_cloud(tmp("trunc.json"));
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_GT(e.offset(), 0u);
        EXPECT_LE(e.offset(), text.size() / 2 + 1);
    }
}

TEST(CloudFile, AffineImageKeepsTransform) {
    const HermitianTuple a = random_hermitian_tuple(2, 6, 5);
    const PointCloud img = affine_image(sample_range(a, 1, 2, 3), trace_map(2, 2));
    const io::LoadedCloud back = io::cloud_from_json(io::cloud_json(img));
    ASSERT_TRUE(back.cloud.transform.has_value());
    EXPECT_EQ(back.cloud.transform->linear, img.transform->linear);
    EXPECT_EQ(back.cloud.points, img.points);
}

TEST(Report, RoundTrip) {
    SuiteReport r;
    r.name = "bounds";
    r.trials = 3;
    r.passes = 2;
    r.failures.push_back({123456789012345ULL, "no point found"});
    r.tolerances = {{"accept_tol", 1e-8}, {"n", 9}};
    r.notes = {"a note"};
    r.wall_time_s = 0.25;
    const std::string s1 = io::dump(io::report_json(r));
    const SuiteReport back = io::report_from_json(io::parse_text(s1));
    EXPECT_EQ(io::dump(io::report_json(back)), s1);
    EXPECT_EQ(back.failures[0].seed, 123456789012345ULL);
}

TEST(Config, FlagsAndUnknownKeys) {
    const SolverOptions o = io::apply_config(io::parse_text("{\"seed\":7,\"restarts\":9,\"accept_tol\":1e-9}"), {});
    EXPECT_EQ(o.seed, 7u);
    EXPECT_EQ(o.max_restarts, 9);
    EXPECT_DOUBLE_EQ(o.accept_tol, 1e-9);
    EXPECT_THROW(io::apply_config(io::parse_text("{\"colour\":1}"), {}), ParseError);
    EXPECT_THROW(io::apply_config(io::parse_text("{\"accept_tol\":0}"), {}), ValueError);
}

TEST(Svg, FixedViewBox) {
    const std::string s = io::boundary_svg(numrange_boundary(HermitianMatrix::diagonal({0, 1}).matrix(), 8));
    EXPECT_NE(s.find("viewBox=\"0 0 400 400\""), std::string::npos);
    EXPECT_NE(s.find("<polygon"), std::string::npos);
}
