#pragma once

// Randomized pass/fail suites for the structural properties of matricial
// ranges. Each suite is a stochastic surrogate for an exact statement: pass
// rates are compared with a threshold and every failure keeps its seed for
// replay. Hypotheses that quantify over all corners are tested on finitely
// many random corners.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "matrange/constructions.hpp"
#include "matrange/feasibility.hpp"
#include "matrange/parallel.hpp"
#include "matrange/ranges.hpp"

namespace matrange {

struct SuiteFailure {
    std::uint64_t seed = 0;
    std::string diagnostic;
};

struct SuiteReport {
    std::string name;
    int trials = 0;
    int passes = 0;
    std::vector<SuiteFailure> failures;
    std::map<std::string, double> tolerances;
    double threshold = 0.95;
    bool expected_failure = false;  // passes count certified negative outcomes
    double wall_time_s = 0.0;
    std::vector<std::string> notes;

    double pass_rate() const { return trials ? static_cast<double>(passes) / trials : 1.0; }
    bool threshold_met() const { return trials == 0 || passes >= threshold * trials; }
};

namespace detail {

struct TrialOutcome {
    bool pass = false;
    std::uint64_t seed = 0;
    std::string diagnostic;
};

inline void collect(SuiteReport& rep, const std::vector<TrialOutcome>& outcomes) {
    rep.trials = static_cast<int>(outcomes.size());
    for (const auto& o : outcomes) {
        if (o.pass)
            ++rep.passes;
        else
            rep.failures.push_back({o.seed, o.diagnostic});
    }
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline SolverOptions single_threaded(const SolverOptions& opts, std::uint64_t seed) {
    SolverOptions o = opts;
    o.threads = 1;
    o.seed = seed;
    return o;
}

inline std::string residual_text(const SolveResult& r) {
    if (auto* c = std::get_if<Certificate>(&r)) return std::to_string(c->residual);
    return std::to_string(std::get<Rejection>(r).best_residual);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Star-shapedness

/// Segments from sampled points of Lambda_{p,q}(A) to a scalar star center.
/// Each segment point is tried by direct membership first, then by the
/// explicit construction: deflated re-solve of the center against the
/// point's witness followed by segment_witness.
inline SuiteReport check_star_shaped(const HermitianTuple& a, int p, int q, int n_points,
                                     const std::vector<double>& t_grid, const SolverOptions& opts = {},
                                     double threshold = 0.95) {
    detail::Stopwatch clock;
    SuiteReport rep;
    rep.name = "star";
    rep.threshold = threshold;
    rep.tolerances = {{"accept_tol", opts.accept_tol}, {"restarts", static_cast<double>(opts.max_restarts)}};

    auto center = star_center_scalar(a, p, q, detail::single_threaded(opts, derive_seed(opts.seed, 0)));
    if (auto* rej = std::get_if<Rejection>(&center))
        throw SearchError("check_star_shaped: no star center found, best residual " + std::to_string(rej->best_residual));
    const auto& sc = std::get<StarCenter>(center);
    if (sc.below_sufficiency_bound)
        rep.notes.push_back("n = " + std::to_string(a.n()) + " is below the sufficiency bound " +
                            std::to_string(sufficiency_bound(a.m(), p, q)));

    const PointCloud cloud = sample_range(a, p, q, n_points, detail::single_threaded(opts, derive_seed(opts.seed, 1)));
    const std::size_t tcount = t_grid.size();
    std::vector<detail::TrialOutcome> out(cloud.size() * tcount);
    parallel_for(out.size(), opts.threads, [&](std::size_t idx) {
        const std::size_t i = idx / tcount;
        const double t = t_grid[idx % tcount];
        const std::uint64_t seed = derive_seed(opts.seed, 100 + idx);
        const MatPoint b = cloud.mat_point(i);
        const MatPoint target = b.blend(sc.center, t);
        const SolverOptions o = detail::single_threaded(opts, seed);
        auto r = membership(a, target, p, o);
        if (accepted(r)) {
            out[idx] = {true, seed, ""};
            return;
        }
        std::string diag = "membership best residual " + detail::residual_text(r);
        try {
            const Certificate& cb = *cloud.certificates[i];
            auto rc = deflated_solve(a, {cb.witness.matrix()}, p, q, sc.center, o);
            if (auto* cc = std::get_if<Certificate>(&rc)) {
                const Certificate seg = segment_witness(a, cb, *cc, t);
                if (seg.residual <= opts.accept_tol) {
                    out[idx] = {true, seed, ""};
                    return;
                }
                diag += "; segment witness residual " + std::to_string(seg.residual);
            } else {
                diag += "; deflated center best residual " + detail::residual_text(rc);
            }
        } catch (const std::exception& e) {
            diag += std::string("; construction: ") + e.what();
        }
        out[idx] = {false, seed, diag};
    });
    detail::collect(rep, out);
    rep.wall_time_s = clock.seconds();
    return rep;
}

/// Planted instances A = (I_p (x) B0) + (I_p (x) C0) + junk with coordinate
/// witnesses; every segment point must certify exactly through segment_witness.
inline SuiteReport check_star_shaped_planted(int m, int p, int q, int trials, const std::vector<double>& t_grid,
                                             std::uint64_t seed, double tol = 1e-9) {
    detail::Stopwatch clock;
    SuiteReport rep;
    rep.name = "star-planted";
    rep.threshold = 1.0;
    rep.tolerances = {{"residual_tol", tol}};
    std::vector<detail::TrialOutcome> out;
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(trial));
        Rng rng(s);
        std::vector<Matrix> b0, c0, junk;
        for (int j = 0; j < m; ++j) {
            b0.push_back(random_hermitian(q, rng));
            c0.push_back(random_hermitian(q, rng));
            junk.push_back(random_hermitian(3, rng));
        }
        const HermitianTuple a = direct_sum(direct_sum(kron_block(p, HermitianTuple(b0)), kron_block(p, HermitianTuple(c0))),
                                            HermitianTuple(junk));
        const int n = a.n();
        const Certificate cb = make_certificate(a, Isometry::coordinate(n, 0, p * q).matrix(), p, MatPoint(b0));
        const Certificate cc = make_certificate(a, Isometry::coordinate(n, p * q, p * q).matrix(), p, MatPoint(c0));
        for (double t : t_grid) {
            const Certificate seg = segment_witness(a, cb, cc, t);
            const bool ok = seg.residual <= tol;
            out.push_back({ok, s, ok ? "" : "t = " + std::to_string(t) + " residual " + std::to_string(seg.residual)});
        }
    }
    detail::collect(rep, out);
    rep.wall_time_s = clock.seconds();
    return rep;
}

// ---------------------------------------------------------------------------
// Non-emptiness bounds

enum class NonemptyBound { General, Refined };

/// n at which Lambda_k(A) is non-empty: (k-1)(m+1)^2, or (m+1)k - m for m <= 2.
inline int nonempty_dimension(int m, int k, NonemptyBound bound) {
    if (bound == NonemptyBound::Refined) {
        if (m > 2) throw ValueError("refined non-emptiness bound only holds for m <= 2");
        return (m + 1) * k - m;
    }
    return std::max(k, (k - 1) * (m + 1) * (m + 1));
}

/// Random GUE tuples at the bound dimension; find_scalar_point must succeed.
/// For m = 1 the found point is also checked against the interval oracle.
inline SuiteReport check_nonempty_bounds(int m, int k, int trials, const SolverOptions& opts = {},
                                         NonemptyBound bound = NonemptyBound::General, double threshold = 0.95) {
    detail::Stopwatch clock;
    SuiteReport rep;
    rep.name = "bounds";
    rep.threshold = threshold;
    rep.tolerances = {{"accept_tol", opts.accept_tol}, {"restarts", static_cast<double>(opts.max_restarts)}};
    if (m == 0) {
        rep.notes.push_back("m = 0: empty tuple, vacuous pass");
        rep.wall_time_s = clock.seconds();
        return rep;
    }
    if (k < 1) throw ValueError("check_nonempty_bounds: k must be >= 1");
    const int n = nonempty_dimension(m, k, bound);
    rep.tolerances["n"] = n;
    std::vector<detail::TrialOutcome> out(static_cast<std::size_t>(trials));
    parallel_for(out.size(), opts.threads, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(opts.seed, i);
        const HermitianTuple a = random_hermitian_tuple(m, n, seed);
        auto r = find_scalar_point(a, k, detail::single_threaded(opts, seed));
        if (auto* rej = std::get_if<Rejection>(&r)) {
            out[i] = {false, seed, "no point found, best residual " + std::to_string(rej->best_residual)};
            return;
        }
        const auto& sc = std::get<ScalarCertificate>(r);
        if (m == 1) {
            const Interval iv = rank_k_interval(a[0], k);
            if (!iv.contains(sc.point(0), 1e-6)) {
                out[i] = {false, seed, "point " + std::to_string(sc.point(0)) + " outside the interval oracle"};
                return;
            }
        }
        out[i] = {true, seed, ""};
    });
    detail::collect(rep, out);
    rep.wall_time_s = clock.seconds();
    return rep;
}

// ---------------------------------------------------------------------------
// Corner inclusions

/// Certified points of Lambda_{p,q}(A) re-certified in Lambda_{p-qr,q}(Y* A Y)
/// for random corners Y of rank r: first by the explicit annihilating
/// combination of witness blocks, then by the solver.
inline SuiteReport check_corner_inclusions(const HermitianTuple& a, int p, int q, int r, int n_points,
                                           int corners_per_point, const SolverOptions& opts = {},
                                           double threshold = 0.95) {
    if (r < 0 || q * r >= p || p * q > a.n())
        throw ValueError("check_corner_inclusions: need 0 <= qr < p and pq <= n");
    detail::Stopwatch clock;
    SuiteReport rep;
    rep.name = "inclusions";
    rep.threshold = threshold;
    rep.tolerances = {{"accept_tol", opts.accept_tol}};
    const PointCloud cloud = sample_range(a, p, q, n_points, detail::single_threaded(opts, derive_seed(opts.seed, 0)));
    if (static_cast<int>(cloud.size()) < n_points)
        rep.notes.push_back("only " + std::to_string(cloud.size()) + " of " + std::to_string(n_points) + " points certified");
    const std::size_t per = static_cast<std::size_t>(corners_per_point);
    std::vector<detail::TrialOutcome> out(cloud.size() * per);
    parallel_for(out.size(), opts.threads, [&](std::size_t idx) {
        const std::uint64_t seed = derive_seed(opts.seed, 1000 + idx);
        const Certificate& cert = *cloud.certificates[idx / per];
        const CornerSpec corner = random_corner(a.n(), r, seed);
        const Certificate rc = corner_recertify(a, cert, corner);
        if (rc.residual <= opts.accept_tol) {
            out[idx] = {true, seed, ""};
            return;
        }
        auto sr = membership(corner_compress(a, corner), cert.point, p - q * r, detail::single_threaded(opts, seed));
        if (accepted(sr)) {
            out[idx] = {true, seed, ""};
            return;
        }
        out[idx] = {false, seed,
                    "explicit residual " + std::to_string(rc.residual) + ", solver " + detail::residual_text(sr)};
    });
    detail::collect(rep, out);
    rep.wall_time_s = clock.seconds();
    return rep;
}

/// m = 1 diagonal case against the interval oracle: Lambda_k(D) is contained
/// in Lambda_{k-r} of every principal submatrix of size n - r.
inline SuiteReport check_corner_inclusions_interval(int n, int k, int r, int trials, std::uint64_t seed) {
    if (r < 0 || r >= k || 2 * k - 1 > n) throw ValueError("check_corner_inclusions_interval: need 0 <= r < k, n >= 2k-1");
    detail::Stopwatch clock;
    SuiteReport rep;
    rep.name = "inclusions-interval";
    rep.threshold = 1.0;
    rep.tolerances = {{"interval_tol", 1e-12}};
    std::vector<detail::TrialOutcome> out;
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(trial));
        Rng rng(s);
        std::vector<double> d(static_cast<std::size_t>(n));
        for (auto& v : d) v = rng.normal();
        std::vector<int> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        for (int i = n - 1; i > 0; --i) std::swap(idx[static_cast<std::size_t>(i)], idx[rng.next_u64() % static_cast<std::uint64_t>(i + 1)]);
        std::vector<double> sub;
        for (int i = r; i < n; ++i) sub.push_back(d[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])]);
        const Interval big = rank_k_interval(HermitianMatrix::diagonal(d).matrix(), k);
        const Interval small = rank_k_interval(HermitianMatrix::diagonal(sub).matrix(), k - r);
        const bool ok = !big.empty && !small.empty && small.lo <= big.lo + 1e-12 && big.hi <= small.hi + 1e-12;
        out.push_back({ok, s, ok ? "" : "interval not contained"});
    }
    detail::collect(rep, out);
    rep.wall_time_s = clock.seconds();
    return rep;
}

// ---------------------------------------------------------------------------
// Convexity

inline std::vector<std::pair<std::size_t, std::size_t>> random_pairs(std::size_t size, int count, std::uint64_t seed) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (size < 2) return out;
    Rng rng(seed);
    for (int i = 0; i < count; ++i) {
        const std::size_t a = rng.next_u64() % size;
        std::size_t b = rng.next_u64() % (size - 1);
        if (b >= a) ++b;
        out.emplace_back(a, b);
    }
    return out;
}

struct ConvexityExpectation {
    bool expect_failure = false;
    double min_best_residual = 0.0;  // lower bound asserted on rejections
};

/// Midpoints of certified cloud points re-certified by membership. In
/// expected-failure mode a pair passes when membership is rejected with best
/// residual at least `min_best_residual`.
inline SuiteReport check_convexity(const PointCloud& cloud, const HermitianTuple& a, int p, int q,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                   const SolverOptions& opts = {}, ConvexityExpectation expect = {},
                                   double threshold = 0.95) {
    detail::Stopwatch clock;
    SuiteReport rep;
    rep.name = "convexity";
    rep.threshold = expect.expect_failure ? 1.0 : threshold;
    rep.expected_failure = expect.expect_failure;
    rep.tolerances = {{"accept_tol", opts.accept_tol}, {"restarts", static_cast<double>(opts.max_restarts)}};
    if (expect.expect_failure) rep.tolerances["min_best_residual"] = expect.min_best_residual;
    std::vector<detail::TrialOutcome> out(pairs.size());
    parallel_for(out.size(), opts.threads, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(opts.seed, i);
        const MatPoint mid = cloud.mat_point(pairs[i].first).blend(cloud.mat_point(pairs[i].second), 0.5);
        auto r = membership(a, mid, p, detail::single_threaded(opts, seed));
        if (!expect.expect_failure) {
            out[i] = {accepted(r), seed, accepted(r) ? "" : "midpoint best residual " + detail::residual_text(r)};
            return;
        }
        if (accepted(r)) {
            out[i] = {false, seed, "midpoint unexpectedly certified"};
            return;
        }
        const double best = std::get<Rejection>(r).best_residual;
        const bool ok = best >= expect.min_best_residual;
        out[i] = {ok, seed, ok ? "" : "best residual " + std::to_string(best) + " below the asserted lower bound"};
    });
    (void)q;
    detail::collect(rep, out);
    rep.wall_time_s = clock.seconds();
    return rep;
}

inline HermitianTuple pauli_triple() {
    Matrix sx(2, 2), sy(2, 2), sz(2, 2);
    sx << 0, 1, 1, 0;
    sy << 0, cplx(0, -1), cplx(0, 1), 0;
    sz << 1, 0, 0, -1;
    return HermitianTuple{sx, sy, sz};
}

/// Joint-range samples of the Pauli triple in antipodal pairs: x and the
/// orthogonal state (-conj x_2, conj x_1), whose Bloch vectors are opposite.
inline PointCloud pauli_antipodal_cloud(int pairs, std::uint64_t seed) {
    const HermitianTuple a = pauli_triple();
    PointCloud cloud;
    cloud.m = 3;
    cloud.dim = 3;
    cloud.provenance.seed = seed;
    cloud.provenance.generator = "pauli_antipodal_cloud";
    Rng rng(seed);
    for (int i = 0; i < pairs; ++i) {
        const Vector x = random_unit_vector(2, rng);
        Vector y(2);  // orthogonal state
        y << -std::conj(x(1)), std::conj(x(0));
        for (const Vector* v : std::initializer_list<const Vector*>{&x, &y}) {
            RealVector pt = joint_point(a, *v);
            std::vector<double> vals(pt.data(), pt.data() + 3);
            cloud.certificates.emplace_back(make_certificate(a, *v, 1, MatPoint::scalar(vals, 1)));
            cloud.points.push_back(std::move(pt));
        }
    }
    cloud.provenance.attempts = 2 * pairs;
    return cloud;
}

// ---------------------------------------------------------------------------
// Finite-rank perturbations

/// For random F of the given rank supported on span(V), the corner Y onto
/// span(V)^perp annihilates F; points certified in Lambda_{p,q}(Y* A Y)
/// re-certify in Lambda_{p,q}(A + F) with witness Y X.
inline SuiteReport check_perturbation_equivalence(const HermitianTuple& a, int p, int q, int trials, int rank = 2,
                                                  const SolverOptions& opts = {}, double threshold = 0.95) {
    if (rank < 0 || rank + p * q > a.n()) throw ValueError("check_perturbation_equivalence: rank too large for n");
    detail::Stopwatch clock;
    SuiteReport rep;
    rep.name = "perturbation";
    rep.threshold = threshold;
    rep.tolerances = {{"accept_tol", opts.accept_tol}, {"rank", static_cast<double>(rank)}};
    std::vector<detail::TrialOutcome> out(static_cast<std::size_t>(trials));
    parallel_for(out.size(), opts.threads, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(opts.seed, i);
        Rng rng(seed);
        std::vector<Matrix> perturbed;
        CornerSpec corner(0, Isometry::identity(a.n()));
        if (rank > 0) {
            const Matrix v = random_isometry(a.n(), rank, seed ^ 0x5bd1e995ULL).matrix();
            for (const auto& aj : a.members()) perturbed.push_back(aj + v * random_hermitian(rank, rng) * v.adjoint());
            corner = corner_avoiding(v, a.n());
        } else {
            perturbed = a.members();
        }
        const HermitianTuple apf(perturbed);
        auto r = solve_free(corner_compress(a, corner), p, q, detail::single_threaded(opts, seed));
        if (auto* c = std::get_if<Certificate>(&r)) {
            const Certificate lifted = lift_certificate(apf, corner.basis.matrix(), *c);
            const bool ok = lifted.residual <= opts.accept_tol;
            out[i] = {ok, seed, ok ? "" : "lifted residual " + std::to_string(lifted.residual)};
        } else {
            out[i] = {false, seed, "corner point not found, best residual " + detail::residual_text(r)};
        }
    });
    detail::collect(rep, out);
    rep.wall_time_s = clock.seconds();
    return rep;
}

}  // namespace matrange
