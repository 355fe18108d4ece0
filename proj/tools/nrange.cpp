// nrange: command-line front end for the matrange library.
//
// Exit codes: 0 ok, 1 internal/search failure, 2 bad input or usage,
// 3 dimension or structural error, 4 rejection, 5 suite threshold missed.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <variant>

#include "matrange/constructions.hpp"
#include "matrange/feasibility.hpp"
#include "matrange/io.hpp"
#include "matrange/ranges.hpp"
#include "matrange/verify.hpp"

using namespace matrange;
using io::json;

namespace {

enum Exit { kOk = 0, kInternal = 1, kInput = 2, kStructural = 3, kRejected = 4, kThreshold = 5 };

struct Globals {
    std::uint64_t seed = 0;
    double accept_tol = 1e-8;
    int restarts = 50;
    int threads = 1;
    std::string config;
    std::string output;
    bool record_time = false;

    CLI::Option* seed_opt = nullptr;
    CLI::Option* tol_opt = nullptr;
    CLI::Option* restarts_opt = nullptr;
    CLI::Option* threads_opt = nullptr;
};

// defaults < config file < flags
SolverOptions solver_options(const Globals& g, std::optional<int> default_restarts = std::nullopt) {
    SolverOptions o;
    if (default_restarts) o.max_restarts = *default_restarts;
    if (!g.config.empty()) o = io::apply_config(io::parse_text(io::read_file(g.config)), o);
    if (g.seed_opt->count()) o.seed = g.seed;
    if (g.tol_opt->count()) o.accept_tol = g.accept_tol;
    if (g.restarts_opt->count()) o.max_restarts = g.restarts;
    if (g.threads_opt->count()) o.threads = g.threads;
    o.validate();
    if (o.threads < 1) throw ValueError("--threads must be >= 1");
    return o;
}

void emit(const Globals& g, const std::string& text) {
    if (g.output.empty())
        std::cout << text;
    else
        io::write_file(g.output, text);
}

int emit_report(const Globals& g, SuiteReport rep) {
    if (!g.record_time) rep.wall_time_s = 0.0;
    emit(g, io::dump(io::report_json(rep)));
    std::cerr << rep.name << ": " << rep.passes << "/" << rep.trials << " passed\n";
    return rep.threshold_met() ? kOk : kThreshold;
}

json star_center_json(const StarCenter& sc) {
    return {{"schema_version", io::kSchemaVersion},
            {"center", io::mat_point_json(sc.center)},
            {"level", sc.level},
            {"below_sufficiency_bound", sc.below_sufficiency_bound},
            {"certificate", io::certificate_json(sc.certificate)}};
}

int emit_rejection(const Globals& g, const Rejection& r) {
    json j = io::rejection_json(r);
    j["schema_version"] = io::kSchemaVersion;
    emit(g, io::dump(j));
    std::cerr << "rejected: best residual " << r.best_residual << "\n";
    return kRejected;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical ranges, matricial ranges and their certificates"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    Globals g;
    g.seed_opt = app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
    g.tol_opt = app.add_option("--accept-tol", g.accept_tol, "certificate acceptance tolerance")->capture_default_str();
    g.restarts_opt = app.add_option("--restarts", g.restarts, "random restarts per solve")->capture_default_str();
    g.threads_opt = app.add_option("--threads", g.threads, "worker threads")->capture_default_str();
    app.add_option("--config", g.config, "JSON solver config (flags win)");
    app.add_option("-o,--output", g.output, "output file (default stdout)");
    app.add_flag("--record-time", g.record_time, "keep wall-clock times in reports");

    std::string input;
    bool embed = false;
    int p = 1, q = 1;

    // compute numrange
    auto* compute = app.add_subcommand("compute", "compute a range")->require_subcommand(1);
    auto* numrange = compute->add_subcommand("numrange", "boundary of W(A) for one complex matrix");
    int angles = 256;
    std::string svg;
    numrange->add_option("--input", input, "tuple file with one matrix")->required();
    numrange->add_option("--angles", angles, "number of support directions")->capture_default_str();
    numrange->add_option("--svg", svg, "write an SVG polygon here");

    // sample
    auto* sample = app.add_subcommand("sample", "sample a range")->require_subcommand(1);
    auto* pq = sample->add_subcommand("pq", "certified points of Lambda_{p,q}(A)");
    int count = 10;
    pq->add_option("--input", input)->required();
    pq->add_option("--p", p)->capture_default_str();
    pq->add_option("--q", q)->capture_default_str();
    pq->add_option("--count", count)->capture_default_str();
    pq->add_flag("--embed", embed, "Hermitian embedding for non-Hermitian input");
    pq->add_option("--svg", svg, "scatter of the first two coordinates");
    auto* joint = sample->add_subcommand("joint", "joint numerical range samples");
    joint->add_option("--input", input)->required();
    joint->add_option("--count", count)->capture_default_str();
    joint->add_flag("--embed", embed);
    joint->add_option("--svg", svg);

    // construct
    auto* construct = app.add_subcommand("construct", "explicit constructions")->require_subcommand(1);
    bool matrix_center = false;
    double t = 0.5;
    int r_max = 4, directions = 64, per_level = 16;
    auto* star = construct->add_subcommand("star-center", "star center of Lambda_{p,q}(A)");
    star->add_option("--input", input)->required();
    star->add_option("--p", p)->capture_default_str();
    star->add_option("--q", q)->capture_default_str();
    star->add_flag("--matrix", matrix_center, "general center from level p(q^2(m+1)+1)");
    star->add_flag("--embed", embed, "route non-Hermitian input through the Hermitian embedding");
    auto* segment = construct->add_subcommand("segment", "segment witness between two A-orthogonal points");
    segment->add_option("--input", input)->required();
    segment->add_option("--p", p)->capture_default_str();
    segment->add_option("--q", q)->capture_default_str();
    segment->add_option("--t", t)->capture_default_str();
    auto* tverberg = construct->add_subcommand("tverberg", "Tverberg lift to a p-fold block point");
    tverberg->add_option("--input", input)->required();
    tverberg->add_option("--p", p)->capture_default_str();
    tverberg->add_option("--q", q)->capture_default_str();
    auto* essential = construct->add_subcommand("essential", "intersection of Lambda_{r,q} over r");
    essential->add_option("--input", input)->required();
    essential->add_option("--q", q)->capture_default_str();
    essential->add_option("--r-max", r_max)->capture_default_str();
    essential->add_option("--directions", directions)->capture_default_str();
    essential->add_option("--points-per-level", per_level)->capture_default_str();

    // verify
    auto* verify = app.add_subcommand("verify", "randomized property suites")->require_subcommand(1);
    int trials = 20, m = 2, n = 0, k = 2, r = 1, corners = 5, rank = 2;
    bool planted = false, refined = false, interval = false;
    std::string ensemble = "gue";
    auto* vstar = verify->add_subcommand("star", "segments to the scalar star center");
    vstar->add_option("--trials", trials, "sampled points")->capture_default_str();
    vstar->add_option("--input", input);
    vstar->add_option("--m", m)->capture_default_str();
    vstar->add_option("--n", n, "default: the sufficiency bound");
    vstar->add_option("--p", p)->capture_default_str();
    vstar->add_option("--q", q)->capture_default_str();
    vstar->add_flag("--planted", planted, "planted block-diagonal instances");
    auto* vbounds = verify->add_subcommand("bounds", "non-emptiness of Lambda_k at the bound dimension");
    vbounds->add_option("--trials", trials)->capture_default_str();
    vbounds->add_option("--m", m)->capture_default_str();
    vbounds->add_option("--k", k)->capture_default_str();
    vbounds->add_flag("--refined", refined, "use (m+1)k - m, m <= 2");
    auto* vincl = verify->add_subcommand("inclusions", "re-certification under random corners");
    vincl->add_option("--trials", trials, "certified points")->capture_default_str();
    vincl->add_option("--input", input);
    vincl->add_option("--m", m)->capture_default_str();
    vincl->add_option("--n", n, "default 10");
    vincl->add_option("--p", p)->capture_default_str();
    vincl->add_option("--q", q)->capture_default_str();
    vincl->add_option("--r", r)->capture_default_str();
    vincl->add_option("--k", k, "rank for --interval")->capture_default_str();
    vincl->add_option("--corners", corners, "corners per point")->capture_default_str();
    vincl->add_flag("--interval", interval, "diagonal m = 1 case against the interval oracle");
    auto* vconv = verify->add_subcommand("convexity", "midpoints of certified points");
    vconv->add_option("--trials", trials, "pairs")->capture_default_str();
    vconv->add_option("--ensemble", ensemble, "gue or pauli")->check(CLI::IsMember({"gue", "pauli"}))->capture_default_str();
    vconv->add_option("--n", n, "matrix size for gue (default 6)");
    auto* vpert = verify->add_subcommand("perturbation", "corner certificates under finite-rank perturbations");
    vpert->add_option("--trials", trials)->capture_default_str();
    vpert->add_option("--input", input);
    vpert->add_option("--m", m)->capture_default_str();
    vpert->add_option("--n", n, "default 10");
    vpert->add_option("--p", p)->capture_default_str();
    vpert->add_option("--q", q)->capture_default_str();
    vpert->add_option("--rank", rank)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInput;
    }

    try {
        if (*numrange) {
            const io::TupleFile tf = io::load_tuple_file(input);
            if (tf.m() != 1) throw DimensionError("compute numrange expects exactly one matrix, got m = " + std::to_string(tf.m()));
            const Boundary2D b = numrange_boundary(tf.matrices.front(), angles);
            emit(g, io::dump(io::boundary_json(b)));
            if (!svg.empty()) io::write_file(svg, io::boundary_svg(b));
            return kOk;
        }
        if (*pq) {
            const HermitianTuple a = io::load_tuple(input, embed);
            const PointCloud cloud = sample_range(a, p, q, count, solver_options(g));
            emit(g, io::dump(io::cloud_json(cloud, a)));
            if (!svg.empty()) io::write_file(svg, io::cloud_svg(cloud));
            if (cloud.size() < static_cast<std::size_t>(count))
                std::cerr << "certified " << cloud.size() << " of " << count << " points\n";
            return cloud.empty() ? kRejected : kOk;
        }
        if (*joint) {
            const HermitianTuple a = io::load_tuple(input, embed);
            const PointCloud cloud = joint_numrange_sample(a, count, solver_options(g).seed, true);
            emit(g, io::dump(io::cloud_json(cloud, a)));
            if (!svg.empty()) io::write_file(svg, io::cloud_svg(cloud));
            return kOk;
        }
        if (*star) {
            const SolverOptions o = solver_options(g);
            StarCenterResult res;
            const io::TupleFile tf = io::load_tuple_file(input);
            if (!tf.hermitian && embed)
                res = star_center_complex(tf.matrices, p, q, o);
            else if (matrix_center)
                res = star_center_matrix(io::to_hermitian(tf), p, q, o);
            else
                res = star_center_scalar(io::to_hermitian(tf), p, q, o);
            if (auto* rej = std::get_if<Rejection>(&res)) return emit_rejection(g, *rej);
            emit(g, io::dump(star_center_json(std::get<StarCenter>(res))));
            return kOk;
        }
        if (*segment) {
            const SolverOptions o = solver_options(g);
            const HermitianTuple a = io::load_tuple(input);
            auto rb = solve_free(a, p, q, o);
            if (auto* rej = std::get_if<Rejection>(&rb)) return emit_rejection(g, *rej);
            const Certificate& cb = std::get<Certificate>(rb);
            SolverOptions o2 = o;
            o2.seed = derive_seed(o.seed, 1);
            auto rc = deflated_solve(a, {cb.witness.matrix()}, p, q, std::nullopt, o2);
            if (auto* rej = std::get_if<Rejection>(&rc)) return emit_rejection(g, *rej);
            const Certificate& cc = std::get<Certificate>(rc);
            const Certificate seg = segment_witness(a, cb, cc, t);
            json j = {{"schema_version", io::kSchemaVersion},
                      {"t", t},
                      {"cross_norm", cross_norm(a, cb.witness.matrix(), cc.witness.matrix())},
                      {"endpoint_b", io::certificate_json(cb)},
                      {"endpoint_c", io::certificate_json(cc)},
                      {"certificate", io::certificate_json(seg)}};
            emit(g, io::dump(j));
            return seg.residual <= o.accept_tol ? kOk : kRejected;
        }
        if (*tverberg) {
            const HermitianTuple a = io::load_tuple(input);
            const TverbergLift lift = tverberg_lift(a, q, p, solver_options(g));
            emit(g, io::dump(io::tverberg_lift_json(lift, a)));
            return kOk;
        }
        if (*essential) {
            const HermitianTuple a = io::load_tuple(input);
            EssentialOptions eo;
            eo.directions = directions;
            eo.points_per_level = per_level;
            const EssentialEstimate est = essential_estimate(a, q, r_max, solver_options(g), eo);
            emit(g, io::dump(io::essential_json(est)));
            return kOk;
        }
        if (*vstar) {
            const SolverOptions o = solver_options(g);
            if (planted) return emit_report(g, check_star_shaped_planted(m, p, q, trials, {0.0, 0.25, 0.5, 0.75, 1.0}, o.seed));
            HermitianTuple a;
            if (!input.empty())
                a = io::load_tuple(input);
            else
                a = random_hermitian_tuple(m, n > 0 ? n : static_cast<int>(sufficiency_bound(m, p, q)), o.seed);
            return emit_report(g, check_star_shaped(a, p, q, trials, {0.25, 0.5, 0.75}, o));
        }
        if (*vbounds) {
            const SolverOptions o = solver_options(g);
            return emit_report(g, check_nonempty_bounds(m, k, trials, o, refined ? NonemptyBound::Refined : NonemptyBound::General));
        }
        if (*vincl) {
            const SolverOptions o = solver_options(g);
            if (interval) return emit_report(g, check_corner_inclusions_interval(n > 0 ? n : 10, k, r, trials, o.seed));
            const HermitianTuple a = input.empty() ? random_hermitian_tuple(m, n > 0 ? n : 10, o.seed) : io::load_tuple(input);
            if (!vincl->get_option("--p")->count()) p = q * r + 1;
            return emit_report(g, check_corner_inclusions(a, p, q, r, trials, corners, o));
        }
        if (*vconv) {
            if (ensemble == "pauli") {
                const SolverOptions o = solver_options(g, 200);
                const PointCloud cloud = pauli_antipodal_cloud(trials, o.seed);
                std::vector<std::pair<std::size_t, std::size_t>> pairs;
                for (std::size_t i = 0; i < static_cast<std::size_t>(trials); ++i) pairs.emplace_back(2 * i, 2 * i + 1);
                return emit_report(g, check_convexity(cloud, pauli_triple(), 1, 1, pairs, o, {true, 0.5}));
            }
            const SolverOptions o = solver_options(g);
            const int size = n > 0 ? n : 6;
            Rng rng(o.seed);
            const Matrix c = gaussian_matrix(size, size, rng) / std::sqrt(2.0 * size);
            const HermitianTuple a = hermitian_embed({c});
            const PointCloud cloud = joint_numrange_sample(a, 2 * trials, derive_seed(o.seed, 1), true);
            const auto pairs = random_pairs(cloud.size(), trials, derive_seed(o.seed, 2));
            return emit_report(g, check_convexity(cloud, a, 1, 1, pairs, o));
        }
        if (*vpert) {
            const SolverOptions o = solver_options(g);
            const HermitianTuple a = input.empty() ? random_hermitian_tuple(m, n > 0 ? n : 10, o.seed) : io::load_tuple(input);
            return emit_report(g, check_perturbation_equivalence(a, p, q, trials, rank, o));
        }
    } catch (const ParseError& e) {
        std::cerr << "parse error";
        if (e.offset()) std::cerr << " at byte " << e.offset();
        std::cerr << ": " << e.what() << "\n";
        return kInput;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kInput;
    } catch (const ValueError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kInput;
    } catch (const RankDeficientError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kInput;
    } catch (const DimensionError& e) {
        std::cerr << "dimension error: " << e.what() << "\n";
        return kStructural;
    } catch (const StructuralError& e) {
        std::cerr << "structural error: " << e.what() << "\n";
        return kStructural;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternal;
    }
    return kInternal;
}
