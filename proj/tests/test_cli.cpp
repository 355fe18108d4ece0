#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "matrange/io.hpp"

using namespace matrange;
namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "matrange_test_cli";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

int run(const std::string& args) {
    const std::string cmd = std::string(NRANGE_EXE) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string save(const HermitianTuple& a, const std::string& name) {
    io::save_tuple(a, path(name));
    return path(name);
}

HermitianTuple diag(std::vector<double> d) { return HermitianTuple{HermitianMatrix::diagonal(d).matrix()}; }

}  // namespace

TEST(Cli, NumrangeSegmentAndCircle) {
    const std::string seg = save(diag({0, 1}), "d01.json");
    ASSERT_EQ(run("compute numrange --input " + seg + " --angles 16 --svg " + path("d01.svg") + " -o " + path("d01.out")), 0);
    const io::json j = io::parse_text(io::read_file(path("d01.out")));
    EXPECT_EQ(j["shape"], "segment");
    EXPECT_NE(io::read_file(path("d01.svg")).find("<polygon"), std::string::npos);

    io::TupleFile jt;
    jt.hermitian = false;
    Matrix jb(2, 2);
    jb << 0, 2, 0, 0;
    jt.matrices.push_back(jb);
    io::save_tuple(jt, path("jordan.json"));
    ASSERT_EQ(run("compute numrange --input " + path("jordan.json") + " --angles 32 -o " + path("jordan.out")), 0);
    const io::json c = io::parse_text(io::read_file(path("jordan.out")));
    for (const auto& v : c["vertices"]) EXPECT_NEAR(std::hypot(v[0].get<double>(), v[1].get<double>()), 1.0, 1e-6);
}

TEST(Cli, SamplePq) {
    const std::string d = save(diag({1, 2, 3, 4}), "d1234.json");
    ASSERT_EQ(run("sample pq --input " + d + " --p 2 --q 1 --count 6 --seed 3 -o " + path("s1.json")), 0);
    const io::LoadedCloud cl = io::load_cloud(path("s1.json"));
    ASSERT_EQ(cl.cloud.size(), 6u);
    for (const auto& x : cl.cloud.points) {
        EXPECT_GE(x(0), 2.0 - 1e-6);
        EXPECT_LE(x(0), 3.0 + 1e-6);
    }
    const std::string sc = save(HermitianTuple::scalar({0.5}, 3), "scalar.json");
    ASSERT_EQ(run("sample pq --input " + sc + " --count 4 -o " + path("s2.json")), 0);
    for (const auto& x : io::load_cloud(path("s2.json")).cloud.points) EXPECT_NEAR(x(0), 0.5, 1e-10);
    EXPECT_EQ(run("sample pq --input " + d + " --p 3 --q 2 -o " + path("s3.json")), 3);
}

TEST(Cli, ExitCodes) {
    io::write_file(path("broken.json"), "{\"schema_version\":\"1\",");
    EXPECT_EQ(run("compute numrange --input " + path("broken.json")), 2);
    const std::string bad =
        "{\"hermitian\":true,\"m\":1,\"matrices\":[[[0.0,0.0],[1.0,0.0],[0.0,0.0],[0.0,0.0]]],\"n\":2,\"schema_version\":\"1\"}";
    io::write_file(path("nonherm.json"), bad);
    EXPECT_EQ(run("sample pq --input " + path("nonherm.json")), 2);
    EXPECT_EQ(run("compute numrange --input " + save(random_hermitian_tuple(2, 3, 1), "two.json")), 3);
    EXPECT_EQ(run("bogus"), 2);
    // full rank: X* A X = b I_3 forces A scalar
    EXPECT_EQ(run("construct star-center --input " + save(diag({1, 2, 3}), "d123.json") + " --restarts 3 -o " + path("rej.json")), 4);
    EXPECT_EQ(run("construct star-center --input " + save(diag({1, 2}), "d12.json")), 3);
}

TEST(Cli, Constructions) {
    const std::string d12 = save(diag({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}), "d12x.json");
    ASSERT_EQ(run("construct tverberg --input " + d12 + " --p 2 --q 1 -o " + path("tv.json")), 0);
    const io::json tv = io::parse_text(io::read_file(path("tv.json")));
    EXPECT_LE(tv["certificate"]["residual"].get<double>(), 1e-8);
    const Certificate c = io::certificate_from_json(tv["certificate"]);
    EXPECT_LE(residual(diag({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}), c.witness.matrix(), c.p, c.point), 1e-8);

    ASSERT_EQ(run("construct star-center --input " + save(HermitianTuple::scalar({2.0, 3.0}, 8), "sc8.json") + " -o " +
                  path("star.json")),
              0);
    const MatPoint center = io::mat_point_from_json(io::parse_text(io::read_file(path("star.json")))["center"]);
    EXPECT_LE(center.distance(MatPoint::scalar({2.0, 3.0}, 1)), 1e-12);

    const std::string spiked = save(diag({5, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0}), "spiked.json");
    ASSERT_EQ(run("construct essential --input " + spiked + " --r-max 6 -o " + path("ess.json")), 0);
    const io::json ess = io::parse_text(io::read_file(path("ess.json")));
    const io::json& last = ess["intervals"].back();
    EXPECT_NEAR(last["lo"].get<double>(), 0.0, 1e-6);
    EXPECT_NEAR(last["hi"].get<double>(), 1.0, 1e-6);

    ASSERT_EQ(run("construct segment --input " + save(random_hermitian_tuple(2, 10, 3), "r10.json") + " --t 0.3 -o " +
                  path("seg.json")),
              0);
    EXPECT_LE(io::parse_text(io::read_file(path("seg.json")))["certificate"]["residual"].get<double>(), 1e-8);
}

TEST(Cli, VerifySuites) {
    EXPECT_EQ(run("verify bounds --m 2 --k 2 --trials 10 -o " + path("vb.json")), 0);
    EXPECT_EQ(io::report_from_json(io::parse_text(io::read_file(path("vb.json")))).tolerances.at("n"), 9);
    EXPECT_EQ(run("verify convexity --ensemble pauli --trials 3 -o " + path("vc.json")), 0);
    EXPECT_EQ(run("verify star --planted --trials 3 -o " + path("vs.json")), 0);
    EXPECT_EQ(run("verify inclusions --interval --n 9 --k 3 --r 1 --trials 20 -o " + path("vi.json")), 0);
    EXPECT_EQ(run("verify perturbation --trials 4 -o " + path("vp.json")), 0);
    // an unreachable threshold still writes the report
    EXPECT_EQ(run("verify convexity --ensemble gue --trials 4 --accept-tol 1e-300 --restarts 1 -o " + path("vg.json")), 5);
    EXPECT_TRUE(fs::exists(path("vg.json")));
}
