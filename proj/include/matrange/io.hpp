#pragma once

// JSON file formats. Canonical form: object keys sorted, no whitespace,
// numbers in shortest round-trip decimal, one trailing newline. Complex
// entries are [re, im] pairs, matrices are row-major.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "matrange/constructions.hpp"
#include "matrange/errors.hpp"
#include "matrange/feasibility.hpp"
#include "matrange/point.hpp"
#include "matrange/ranges.hpp"
#include "matrange/tverberg.hpp"
#include "matrange/verify.hpp"

namespace matrange::io {

using json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

// ---------------------------------------------------------------------------
// Text and files

inline std::string dump(const json& j) { return j.dump() + "\n"; }

inline json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what(), e.byte);
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValueError("cannot write " + path);
    out << text;
    if (!out) throw ValueError("write failed for " + path);
}

namespace detail {

inline const json& field(const json& j, const char* key) {
    if (!j.is_object()) throw ParseError(std::string("schema: expected an object holding '") + key + "'");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("schema: missing key '") + key + "'");
    return *it;
}

inline int count_field(const json& j, const char* key) {
    const json& v = field(j, key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ParseError(std::string("schema: '") + key + "' must be a non-negative integer");
    return v.get<int>();
}

inline double number(const json& v, const char* what) {
    if (!v.is_number()) throw ParseError(std::string("schema: ") + what + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ValueError(std::string(what) + " is not finite");
    return x;
}

inline void check_version(const json& j) {
    const json& v = field(j, "schema_version");
    if (!v.is_string() || v.get<std::string>() != kSchemaVersion)
        throw ParseError("schema: unsupported schema_version (expected \"1\")");
}

inline double finite(double x, const char* what) {
    if (!std::isfinite(x)) throw ValueError(std::string("cannot serialize non-finite ") + what);
    return x;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Numbers, vectors, matrices

inline json complex_json(cplx z) { return json::array({detail::finite(z.real(), "real part"), detail::finite(z.imag(), "imaginary part")}); }

inline cplx complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ParseError("schema: complex entry must be a [re, im] pair");
    return {detail::number(j[0], "real part"), detail::number(j[1], "imaginary part")};
}

inline json real_vector_json(const RealVector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(detail::finite(v(i), "coordinate"));
    return out;
}

inline RealVector real_vector_from_json(const json& j) {
    if (!j.is_array()) throw ParseError("schema: expected an array of reals");
    RealVector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = detail::number(j[i], "coordinate");
    return v;
}

/// Flat row-major list of [re, im] pairs.
inline json entries_json(const Matrix& a) {
    json out = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index k = 0; k < a.cols(); ++k) out.push_back(complex_json(a(i, k)));
    return out;
}

inline Matrix entries_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
    if (!j.is_array() || j.size() != static_cast<std::size_t>(rows * cols))
        throw DimensionError("matrix has " + std::to_string(j.is_array() ? j.size() : 0) + " entries, expected " +
                             std::to_string(rows * cols));
    Matrix a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index k = 0; k < cols; ++k) a(i, k) = complex_from_json(j[static_cast<std::size_t>(i * cols + k)]);
    return a;
}

inline json matrix_json(const Matrix& a) {
    return {{"rows", a.rows()}, {"cols", a.cols()}, {"entries", entries_json(a)}};
}

inline Matrix matrix_from_json(const json& j) {
    return entries_from_json(detail::field(j, "entries"), detail::count_field(j, "rows"), detail::count_field(j, "cols"));
}

// ---------------------------------------------------------------------------
// Tuple files

struct TupleFile {
    bool hermitian = true;
    std::vector<Matrix> matrices;

    int m() const { return static_cast<int>(matrices.size()); }
    int n() const { return matrices.empty() ? 0 : static_cast<int>(matrices.front().rows()); }
};

inline json tuple_json(const std::vector<Matrix>& ms, bool hermitian) {
    json mats = json::array();
    for (const auto& a : ms) mats.push_back(entries_json(a));
    return {{"schema_version", kSchemaVersion},
            {"m", ms.size()},
            {"n", ms.empty() ? 0 : ms.front().rows()},
            {"hermitian", hermitian},
            {"matrices", mats}};
}

inline json tuple_json(const HermitianTuple& a) { return tuple_json(a.members(), true); }

/// First entry with |a_{i i'} - conj(a_{i' i})| above tolerance, reported by (j, i, i').
inline void check_hermitian_entries(const std::vector<Matrix>& ms) {
    for (std::size_t j = 0; j < ms.size(); ++j) {
        const Matrix& a = ms[j];
        const double tol = kHermitianTol * rel_scale(a.norm());
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index k = i; k < a.cols(); ++k)
                if (std::abs(a(i, k) - std::conj(a(k, i))) > tol)
                    throw ValueError("matrix " + std::to_string(j) + " is not Hermitian at entry (" + std::to_string(i) +
                                     ", " + std::to_string(k) + ")");
    }
}

inline TupleFile tuple_file_from_json(const json& j) {
    detail::check_version(j);
    const int m = detail::count_field(j, "m");
    const int n = detail::count_field(j, "n");
    const json& h = detail::field(j, "hermitian");
    if (!h.is_boolean()) throw ParseError("schema: 'hermitian' must be a boolean");
    const json& mats = detail::field(j, "matrices");
    if (!mats.is_array()) throw ParseError("schema: 'matrices' must be an array");
    if (mats.size() != static_cast<std::size_t>(m))
        throw DimensionError("tuple file declares m = " + std::to_string(m) + " but holds " + std::to_string(mats.size()) +
                             " matrices");
    TupleFile tf;
    tf.hermitian = h.get<bool>();
    for (const auto& mj : mats) tf.matrices.push_back(entries_from_json(mj, n, n));
    if (tf.hermitian) check_hermitian_entries(tf.matrices);
    return tf;
}

inline TupleFile load_tuple_file(const std::string& path) { return tuple_file_from_json(parse_text(read_file(path))); }

/// Hermitian view of a tuple file. Non-Hermitian files are routed through
/// hermitian_embed only when `embed` is set.
inline HermitianTuple to_hermitian(const TupleFile& tf, bool embed = false) {
    if (tf.matrices.empty()) throw ValueError("tuple file holds no matrices");
    if (tf.hermitian) return HermitianTuple(tf.matrices);
    if (!embed) throw ValueError("tuple file is not flagged hermitian; request the Hermitian embedding explicitly");
    return hermitian_embed(tf.matrices);
}

inline HermitianTuple load_tuple(const std::string& path, bool embed = false) {
    return to_hermitian(load_tuple_file(path), embed);
}

inline void save_tuple(const HermitianTuple& a, const std::string& path) { write_file(path, dump(tuple_json(a))); }

inline void save_tuple(const TupleFile& tf, const std::string& path) {
    write_file(path, dump(tuple_json(tf.matrices, tf.hermitian)));
}

// ---------------------------------------------------------------------------
// Points and certificates

inline json mat_point_json(const MatPoint& b) {
    json blocks = json::array();
    for (const auto& blk : b.blocks()) blocks.push_back(entries_json(blk));
    return {{"m", b.m()}, {"q", b.q()}, {"blocks", blocks}};
}

inline MatPoint mat_point_from_json(const json& j) {
    const int m = detail::count_field(j, "m");
    const int q = detail::count_field(j, "q");
    const json& blocks = detail::field(j, "blocks");
    if (!blocks.is_array() || blocks.size() != static_cast<std::size_t>(m))
        throw DimensionError("point declares m = " + std::to_string(m) + " blocks");
    std::vector<Matrix> out;
    for (const auto& bj : blocks) out.push_back(entries_from_json(bj, q, q));
    return MatPoint(std::move(out));
}

inline json certificate_json(const Certificate& c) {
    return {{"p", c.p},
            {"point", mat_point_json(c.point)},
            {"witness", matrix_json(c.witness.matrix())},
            {"residual", detail::finite(c.residual, "residual")}};
}

inline Certificate certificate_from_json(const json& j) {
    Certificate c;
    c.p = detail::count_field(j, "p");
    c.point = mat_point_from_json(detail::field(j, "point"));
    c.witness = Isometry(matrix_from_json(detail::field(j, "witness")));
    c.residual = detail::number(detail::field(j, "residual"), "residual");
    return c;
}

/// Stored residual must agree with a recomputation within `agree_tol` and,
/// when `accept_tol` is positive, lie below it.
inline void revalidate(const HermitianTuple& a, const Certificate& c, double accept_tol, double agree_tol = 1e-12) {
    const double r = residual(a, c.witness.matrix(), c.p, c.point);
    if (std::abs(r - c.residual) > agree_tol)
        throw ValueError("certificate residual " + std::to_string(c.residual) + " does not match recomputed " +
                         std::to_string(r));
    if (accept_tol > 0.0 && r > accept_tol)
        throw ValueError("certificate residual " + std::to_string(r) + " exceeds accept_tol " + std::to_string(accept_tol));
}

inline json rejection_json(const Rejection& r) {
    return {{"rejected", true}, {"best_residual", r.best_residual}, {"restarts", r.restarts}};
}

// ---------------------------------------------------------------------------
// Point clouds

inline json affine_json(const AffineMap& map) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < map.linear.rows(); ++i) rows.push_back(real_vector_json(map.linear.row(i).transpose()));
    return {{"linear", rows}, {"offset", real_vector_json(map.offset)}};
}

inline AffineMap affine_from_json(const json& j) {
    AffineMap map;
    map.offset = real_vector_from_json(detail::field(j, "offset"));
    const json& rows = detail::field(j, "linear");
    if (!rows.is_array()) throw ParseError("schema: 'linear' must be an array of rows");
    map.linear = RealMatrix(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const RealVector r = real_vector_from_json(rows[i]);
        if (r.size() != map.linear.cols()) throw DimensionError("affine map rows differ in length");
        map.linear.row(static_cast<Eigen::Index>(i)) = r.transpose();
    }
    return map;
}

inline json provenance_json(const Provenance& p) {
    return {{"seed", p.seed},
            {"accept_tol", p.accept_tol},
            {"generator", p.generator},
            {"attempts", p.attempts},
            {"acceptance_rate", p.acceptance_rate}};
}

inline Provenance provenance_from_json(const json& j) {
    Provenance p;
    const json& s = detail::field(j, "seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
        throw ParseError("schema: provenance seed must be a non-negative integer");
    p.seed = s.get<std::uint64_t>();
    p.accept_tol = detail::number(detail::field(j, "accept_tol"), "accept_tol");
    const json& g = detail::field(j, "generator");
    if (!g.is_string()) throw ParseError("schema: provenance generator must be a string");
    p.generator = g.get<std::string>();
    p.attempts = detail::count_field(j, "attempts");
    p.acceptance_rate = detail::number(detail::field(j, "acceptance_rate"), "acceptance_rate");
    return p;
}

/// Cloud file. `source` embeds the tuple the certificates refer to.
inline json cloud_json(const PointCloud& cloud, const std::optional<HermitianTuple>& source = std::nullopt) {
    json pts = json::array();
    for (const auto& x : cloud.points) pts.push_back(real_vector_json(x));
    json certs = json::array();
    for (const auto& c : cloud.certificates) certs.push_back(c ? certificate_json(*c) : json(nullptr));
    return {{"schema_version", kSchemaVersion},
            {"m", cloud.m},
            {"p", cloud.p},
            {"q", cloud.q},
            {"dim", cloud.dim},
            {"flattening", cloud.flattening},
            {"points", pts},
            {"certificates", certs},
            {"provenance", provenance_json(cloud.provenance)},
            {"transform", cloud.transform ? affine_json(*cloud.transform) : json(nullptr)},
            {"source", source ? tuple_json(*source) : json(nullptr)}};
}

struct LoadedCloud {
    PointCloud cloud;
    std::optional<HermitianTuple> source;
};

inline LoadedCloud cloud_from_json(const json& j) {
    detail::check_version(j);
    LoadedCloud out;
    PointCloud& c = out.cloud;
    c.m = detail::count_field(j, "m");
    c.p = detail::count_field(j, "p");
    c.q = detail::count_field(j, "q");
    c.dim = detail::count_field(j, "dim");
    const json& flat = detail::field(j, "flattening");
    if (!flat.is_string()) throw ParseError("schema: 'flattening' must be a string");
    c.flattening = flat.get<std::string>();
    if (c.flattening != kFlatteningTag && c.flattening != kAffineImageTag)
        throw ParseError("schema: unknown flattening convention '" + c.flattening + "'");
    c.provenance = provenance_from_json(detail::field(j, "provenance"));
    const json& tr = detail::field(j, "transform");
    if (!tr.is_null()) c.transform = affine_from_json(tr);
    if (c.transform.has_value() != (c.flattening == kAffineImageTag))
        throw ParseError("schema: 'transform' must be present exactly for affine-image clouds");
    const int expected = c.transform ? c.dim : flat_dim(c.m, c.q);
    if (!c.transform && c.dim != expected)
        throw DimensionError("cloud dim " + std::to_string(c.dim) + " differs from m q^2 = " + std::to_string(expected));
    const json& pts = detail::field(j, "points");
    if (!pts.is_array()) throw ParseError("schema: 'points' must be an array");
    for (const auto& pj : pts) {
        RealVector x = real_vector_from_json(pj);
        if (x.size() != expected)
            throw DimensionError("point has " + std::to_string(x.size()) + " coordinates, expected " + std::to_string(expected));
        c.points.push_back(std::move(x));
    }
    const json& certs = detail::field(j, "certificates");
    if (!certs.is_array()) throw ParseError("schema: 'certificates' must be an array");
    if (!certs.empty() && certs.size() != c.points.size())
        throw DimensionError("cloud holds " + std::to_string(certs.size()) + " certificates for " +
                             std::to_string(c.points.size()) + " points");
    for (const auto& cj : certs) {
        if (cj.is_null())
            c.certificates.emplace_back(std::nullopt);
        else
            c.certificates.emplace_back(certificate_from_json(cj));
    }
    const json& src = detail::field(j, "source");
    if (!src.is_null()) out.source = to_hermitian(tuple_file_from_json(src));
    if (out.source)
        for (const auto& cert : c.certificates)
            if (cert) revalidate(*out.source, *cert, c.provenance.accept_tol);
    return out;
}

inline void save_cloud(const PointCloud& cloud, const std::string& path,
                       const std::optional<HermitianTuple>& source = std::nullopt) {
    write_file(path, dump(cloud_json(cloud, source)));
}

inline LoadedCloud load_cloud(const std::string& path) { return cloud_from_json(parse_text(read_file(path))); }

// ---------------------------------------------------------------------------
// Reports

inline json report_json(const SuiteReport& r) {
    json failures = json::array();
    for (const auto& f : r.failures) failures.push_back({{"seed", f.seed}, {"diagnostic", f.diagnostic}});
    json tol = json::object();
    for (const auto& [k, v] : r.tolerances) tol[k] = v;
    return {{"schema_version", kSchemaVersion},
            {"name", r.name},
            {"trials", r.trials},
            {"passes", r.passes},
            {"pass_rate", r.pass_rate()},
            {"threshold", r.threshold},
            {"threshold_met", r.threshold_met()},
            {"expected_failure", r.expected_failure},
            {"failures", failures},
            {"tolerances", tol},
            {"notes", r.notes},
            {"wall_time_s", r.wall_time_s}};
}

inline SuiteReport report_from_json(const json& j) {
    detail::check_version(j);
    SuiteReport r;
    r.name = detail::field(j, "name").get<std::string>();
    r.trials = detail::count_field(j, "trials");
    r.passes = detail::count_field(j, "passes");
    r.threshold = detail::number(detail::field(j, "threshold"), "threshold");
    r.expected_failure = detail::field(j, "expected_failure").get<bool>();
    for (const auto& f : detail::field(j, "failures"))
        r.failures.push_back({detail::field(f, "seed").get<std::uint64_t>(), detail::field(f, "diagnostic").get<std::string>()});
    for (const auto& [k, v] : detail::field(j, "tolerances").items()) r.tolerances[k] = detail::number(v, "tolerance");
    r.notes = detail::field(j, "notes").get<std::vector<std::string>>();
    r.wall_time_s = detail::number(detail::field(j, "wall_time_s"), "wall_time_s");
    return r;
}

// ---------------------------------------------------------------------------
// Other results

inline json boundary_json(const Boundary2D& b) {
    json verts = json::array();
    for (const auto& v : b.vertices) verts.push_back(complex_json(v));
    json wit = json::array();
    for (const auto& w : b.witnesses) wit.push_back(entries_json(w));
    return {{"schema_version", kSchemaVersion},
            {"shape", to_string(b.shape)},
            {"angles", b.angles},
            {"offsets", b.offsets},
            {"vertices", verts},
            {"witnesses", wit},
            {"area", polygon_area(b.vertices)},
            {"hausdorff_gap", hausdorff_gap(b)}};
}

inline json interval_json(const Interval& iv) {
    if (iv.empty) return {{"empty", true}};
    return {{"empty", false}, {"lo", iv.lo}, {"hi", iv.hi}};
}

inline json partition_json(const PartitionResult& r) {
    return {{"parts", r.parts},
            {"common_point", real_vector_json(r.common_point)},
            {"weights", r.weights},
            {"partitions_scanned", r.partitions_scanned}};
}

inline json tverberg_lift_json(const TverbergLift& t, const HermitianTuple& a) {
    json pts = json::array();
    for (const auto& b : t.family.points) pts.push_back(mat_point_json(b));
    return {{"schema_version", kSchemaVersion},
            {"d", t.d},
            {"certificate", certificate_json(t.certificate)},
            {"isometry_defect", t.certificate.witness.defect()},
            {"block_points", pts},
            {"block_residuals", t.family.residuals},
            {"max_cross", t.family.max_cross(a)},
            {"partition", partition_json(t.partition)}};
}

inline json essential_json(const EssentialEstimate& e) {
    json dirs = json::array();
    for (const auto& u : e.directions) dirs.push_back(real_vector_json(u));
    json sizes = json::array();
    for (const auto& c : e.clouds) sizes.push_back(c.size());
    json out = {{"schema_version", kSchemaVersion},
                {"q", e.q},
                {"r_max", e.clouds.size()},
                {"directions", dirs},
                {"cloud_sizes", sizes},
                {"support", e.support},
                {"intersection", e.intersection},
                {"empty_levels", e.empty_levels}};
    if (!e.directions.empty() && e.directions.front().size() == 1) {
        json ivs = json::array();
        for (std::size_t r = 0; r < e.intersection.size(); ++r) ivs.push_back(interval_json(essential_interval(e, r)));
        out["intervals"] = ivs;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Solver configuration file: {"seed", "accept_tol", "restarts", "max_iters", "threads"}, all optional.

inline SolverOptions apply_config(const json& j, SolverOptions opts) {
    if (!j.is_object()) throw ParseError("config: expected an object");
    for (const auto& [key, v] : j.items()) {
        if (key == "seed")
            opts.seed = v.get<std::uint64_t>();
        else if (key == "accept_tol")
            opts.accept_tol = detail::number(v, "accept_tol");
        else if (key == "restarts")
            opts.max_restarts = v.get<int>();
        else if (key == "max_iters")
            opts.max_iters = v.get<int>();
        else if (key == "threads")
            opts.threads = v.get<int>();
        else
            throw ParseError("config: unknown key '" + key + "'");
    }
    opts.validate();
    return opts;
}

// ---------------------------------------------------------------------------
// SVG: flat polylines and points in a fixed 400 x 400 viewBox.

namespace detail {

struct Frame {
    double x0, y0, scale;
    double px(double x) const { return 20.0 + (x - x0) * scale; }
    double py(double y) const { return 380.0 - (y - y0) * scale; }
};

inline Frame frame_for(const std::vector<std::pair<double, double>>& pts) {
    double xlo = 0, xhi = 0, ylo = 0, yhi = 0;
    if (!pts.empty()) {
        xlo = xhi = pts[0].first;
        ylo = yhi = pts[0].second;
    }
    for (const auto& [x, y] : pts) {
        xlo = std::min(xlo, x), xhi = std::max(xhi, x);
        ylo = std::min(ylo, y), yhi = std::max(yhi, y);
    }
    const double span = std::max({xhi - xlo, yhi - ylo, 1e-12});
    return {xlo, ylo, 360.0 / span};
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace detail

inline std::string boundary_svg(const Boundary2D& b) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& v : b.vertices) pts.emplace_back(v.real(), v.imag());
    const auto f = detail::frame_for(pts);
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 400 400\">\n<polygon fill=\"none\" stroke=\"black\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) s += ' ';
        s += detail::fmt(f.px(pts[i].first)) + "," + detail::fmt(f.py(pts[i].second));
    }
    s += "\"/>\n</svg>\n";
    return s;
}

/// First two coordinates of each point.
inline std::string cloud_svg(const PointCloud& cloud) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& x : cloud.points) pts.emplace_back(x.size() > 0 ? x(0) : 0.0, x.size() > 1 ? x(1) : 0.0);
    const auto f = detail::frame_for(pts);
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 400 400\">\n";
    for (const auto& [x, y] : pts)
        s += "<circle cx=\"" + detail::fmt(f.px(x)) + "\" cy=\"" + detail::fmt(f.py(y)) + "\" r=\"2\"/>\n";
    s += "</svg>\n";
    return s;
}

}  // namespace matrange::io
