#pragma once

// Convex-hull intersection by phase-1 simplex, Tverberg partitions by
// lexicographic enumeration of set partitions, and hull membership.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "matrange/errors.hpp"
#include "matrange/linalg.hpp"
#include "matrange/parallel.hpp"

namespace matrange {

struct RealPointSet {
    int dim = 0;
    std::vector<RealVector> points;

    RealPointSet() = default;
    RealPointSet(int d, std::vector<RealVector> pts) : dim(d), points(std::move(pts)) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (points[i].size() != d)
                throw DimensionError("RealPointSet: point " + std::to_string(i) + " has length " +
                                     std::to_string(points[i].size()) + ", expected " + std::to_string(d));
            if (!points[i].allFinite()) throw ValueError("RealPointSet: point " + std::to_string(i) + " is not finite");
        }
    }

    std::size_t size() const { return points.size(); }
};

// ---------------------------------------------------------------------------
// Dense phase-1 simplex

struct PhaseOneResult {
    RealVector x;          // primal point (valid when objective ~ 0)
    double objective = 0;  // sum of artificials at optimum
    int iterations = 0;
};

/// Minimizes the sum of artificials for A x = b, x >= 0 with Bland's rule.
/// Throws ConvergenceError when the pivot cap is exceeded.
inline PhaseOneResult phase_one(RealMatrix a, RealVector b) {
    const Eigen::Index rows = a.rows();
    const Eigen::Index vars = a.cols();
    for (Eigen::Index i = 0; i < rows; ++i)
        if (b(i) < 0) {
            a.row(i) *= -1.0;
            b(i) *= -1.0;
        }
    const Eigen::Index cols = vars + rows;
    RealMatrix t = RealMatrix::Zero(rows + 1, cols + 1);
    t.topLeftCorner(rows, vars) = a;
    t.block(0, vars, rows, rows).setIdentity();
    t.topRightCorner(rows, 1) = b;
    // Reduced costs of min sum(artificials): -(column sums) on structural columns.
    for (Eigen::Index j = 0; j < vars; ++j) t(rows, j) = -a.col(j).sum();
    t(rows, cols) = -b.sum();
    std::vector<Eigen::Index> basis(static_cast<std::size_t>(rows));
    for (Eigen::Index i = 0; i < rows; ++i) basis[static_cast<std::size_t>(i)] = vars + i;

    const double eps = 1e-12;
    const int cap = 50 * static_cast<int>(rows + cols) + 100;
    int it = 0;
    for (;; ++it) {
        if (it > cap) throw ConvergenceError("phase_one: pivot cap exceeded");
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < cols; ++j)
            if (t(rows, j) < -1e-11) {
                enter = j;
                break;
            }
        if (enter < 0) break;
        Eigen::Index leave = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double piv = t(i, enter);
            if (piv > eps) {
                const double ratio = t(i, cols) / piv;
                if (ratio < best - 1e-15 ||
                    (std::abs(ratio - best) <= 1e-15 && basis[static_cast<std::size_t>(i)] <
                                                            basis[static_cast<std::size_t>(leave)])) {
                    best = ratio;
                    leave = i;
                }
            }
        }
        if (leave < 0) break;  // unbounded direction cannot occur in phase 1
        t.row(leave) /= t(leave, enter);
        for (Eigen::Index i = 0; i <= rows; ++i)
            if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
        basis[static_cast<std::size_t>(leave)] = enter;
    }
    PhaseOneResult out{RealVector::Zero(vars), 0.0, it};
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Eigen::Index v = basis[static_cast<std::size_t>(i)];
        const double val = std::max(0.0, t(i, cols));
        if (v < vars)
            out.x(v) = val;
        else
            out.objective += val;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hull intersection

struct PartitionResult {
    std::vector<std::vector<int>> parts;
    RealVector common_point;
    std::vector<std::vector<double>> weights;  // per part, aligned with parts
    int partitions_scanned = 0;
};

struct Infeasible {
    double gap = 0.0;        // phase-1 optimum, relative to the point scale
    bool certified = false;  // gap > 1e-7
};

using HullIntersection = std::variant<PartitionResult, Infeasible>;

inline constexpr double kLpFeasibleTol = 1e-9;
inline constexpr double kLpInfeasibleTol = 1e-7;

inline double point_scale(const std::vector<const RealPointSet*>& sets) {
    double s = 0.0;
    for (const auto* ps : sets)
        for (const auto& x : ps->points) s = std::max(s, x.norm());
    return s > 0.0 ? s : 1.0;
}

/// A point common to conv(parts[0]) .. conv(parts[p-1]). The LP works on
/// points divided by the largest point norm, so decisions are scale-free.
inline HullIntersection lp_common_point(const std::vector<RealPointSet>& parts) {
    if (parts.size() < 2) throw ValueError("lp_common_point: need at least 2 parts");
    const int d = parts.front().dim;
    std::vector<const RealPointSet*> ptrs;
    int vars = 0;
    for (const auto& ps : parts) {
        if (ps.points.empty()) throw ValueError("lp_common_point: empty part");
        if (ps.dim != d) throw DimensionError("lp_common_point: parts have different dimensions");
        ptrs.push_back(&ps);
        vars += static_cast<int>(ps.size());
    }
    const double scale = point_scale(ptrs);
    const int np = static_cast<int>(parts.size());
    const int rows = np + (np - 1) * d;
    RealMatrix a = RealMatrix::Zero(rows, vars);
    RealVector b = RealVector::Zero(rows);
    std::vector<int> offset(static_cast<std::size_t>(np));
    int col = 0;
    for (int l = 0; l < np; ++l) {
        offset[static_cast<std::size_t>(l)] = col;
        for (std::size_t i = 0; i < parts[static_cast<std::size_t>(l)].size(); ++i) a(l, col + static_cast<int>(i)) = 1.0;
        b(l) = 1.0;
        col += static_cast<int>(parts[static_cast<std::size_t>(l)].size());
    }
    for (int l = 1; l < np; ++l) {
        const int r0 = np + (l - 1) * d;
        for (std::size_t i = 0; i < parts[0].size(); ++i)
            a.block(r0, static_cast<Eigen::Index>(i), d, 1) = parts[0].points[i] / scale;
        for (std::size_t i = 0; i < parts[static_cast<std::size_t>(l)].size(); ++i)
            a.block(r0, offset[static_cast<std::size_t>(l)] + static_cast<Eigen::Index>(i), d, 1) =
                -parts[static_cast<std::size_t>(l)].points[i] / scale;
    }
    const auto sol = phase_one(a, b);
    if (sol.objective > kLpFeasibleTol) return Infeasible{sol.objective, sol.objective > kLpInfeasibleTol};

    PartitionResult out;
    out.common_point = RealVector::Zero(d);
    for (int l = 0; l < np; ++l) {
        const auto& ps = parts[static_cast<std::size_t>(l)];
        std::vector<double> w(ps.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            w[i] = sol.x(offset[static_cast<std::size_t>(l)] + static_cast<Eigen::Index>(i));
            sum += w[i];
        }
        for (auto& v : w) v /= sum;
        if (l == 0)
            for (std::size_t i = 0; i < ps.size(); ++i) out.common_point += w[i] * ps.points[i];
        out.weights.push_back(std::move(w));
    }
    return out;
}

/// Largest deviation between per-part weighted sums and the common point.
inline double weight_reconstruction_error(const PartitionResult& r, const RealPointSet& s) {
    double err = 0.0;
    for (std::size_t l = 0; l < r.parts.size(); ++l) {
        RealVector acc = RealVector::Zero(s.dim);
        for (std::size_t i = 0; i < r.parts[l].size(); ++i)
            acc += r.weights[l][i] * s.points[static_cast<std::size_t>(r.parts[l][i])];
        err = std::max(err, (acc - r.common_point).norm());
    }
    return err;
}

// ---------------------------------------------------------------------------
// Set partitions

inline constexpr int kMaxPartitionPoints = 14;

/// Restricted growth strings of length n with exactly `blocks` blocks, in
/// lexicographic order. Calls visit(labels); stops when visit returns false.
template <class Visit>
void for_each_partition(int n, int blocks, Visit&& visit) {
    if (blocks < 1 || blocks > n) return;
    std::vector<int> label(static_cast<std::size_t>(n), 0);
    // Recursive generation keeps the ordering obvious.
    bool stop = false;
    auto rec = [&](auto&& self, int i, int used) -> void {
        if (stop) return;
        if (n - i < blocks - used) return;  // not enough elements left to open the remaining blocks
        if (i == n) {
            if (used == blocks && !visit(label)) stop = true;
            return;
        }
        for (int b = 0; b <= std::min(used, blocks - 1); ++b) {
            label[static_cast<std::size_t>(i)] = b;
            self(self, i + 1, std::max(used, b + 1));
            if (stop) return;
        }
    };
    rec(rec, 0, 0);
}

inline std::vector<std::vector<int>> labels_to_parts(const std::vector<int>& label, int blocks) {
    std::vector<std::vector<int>> parts(static_cast<std::size_t>(blocks));
    for (std::size_t i = 0; i < label.size(); ++i) parts[static_cast<std::size_t>(label[i])].push_back(static_cast<int>(i));
    return parts;
}

/// First partition of S into p parts (lexicographic restricted-growth order)
/// whose hulls intersect. Guaranteed to exist when |S| >= (p-1)(D+1)+1.
inline PartitionResult tverberg_partition(const RealPointSet& s, int p, int threads = 1) {
    const int d = static_cast<int>(s.size());
    if (p < 1) throw ValueError("tverberg_partition: p must be >= 1");
    if (d < p) throw ValueError("tverberg_partition: need at least p points");
    if (p == 1) {
        PartitionResult out;
        out.parts.emplace_back();
        out.common_point = RealVector::Zero(s.dim);
        std::vector<double> w(static_cast<std::size_t>(d), 1.0 / d);
        for (int i = 0; i < d; ++i) {
            out.parts[0].push_back(i);
            out.common_point += w[static_cast<std::size_t>(i)] * s.points[static_cast<std::size_t>(i)];
        }
        out.weights.push_back(std::move(w));
        out.partitions_scanned = 1;
        return out;
    }
    if (d > kMaxPartitionPoints)
        throw ValueError("tverberg_partition: " + std::to_string(d) + " points exceeds the enumeration cap of " +
                         std::to_string(kMaxPartitionPoints));

    auto solve = [&](const std::vector<std::vector<int>>& parts) -> std::optional<PartitionResult> {
        std::vector<RealPointSet> sets;
        for (const auto& idx : parts) {
            RealPointSet ps;
            ps.dim = s.dim;
            for (int i : idx) ps.points.push_back(s.points[static_cast<std::size_t>(i)]);
            sets.push_back(std::move(ps));
        }
        auto r = lp_common_point(sets);
        if (auto* pr = std::get_if<PartitionResult>(&r)) {
            pr->parts = parts;
            return std::move(*pr);
        }
        return std::nullopt;
    };

    const std::size_t wave = static_cast<std::size_t>(std::max(1, threads));
    std::vector<std::vector<std::vector<int>>> batch;
    std::optional<PartitionResult> found;
    int scanned = 0;
    auto flush = [&]() {
        std::vector<std::optional<PartitionResult>> slots(batch.size());
        parallel_for(batch.size(), threads, [&](std::size_t i) { slots[i] = solve(batch[i]); });
        for (auto& sl : slots) {
            ++scanned;
            if (sl) {
                found = std::move(sl);
                break;
            }
        }
        batch.clear();
    };
    for_each_partition(d, p, [&](const std::vector<int>& label) {
        batch.push_back(labels_to_parts(label, p));
        if (batch.size() == wave) flush();
        return !found;
    });
    if (!found && !batch.empty()) flush();
    if (!found)
        throw SearchError("tverberg_partition: no feasible partition among " + std::to_string(scanned) +
                          " scanned (below the Tverberg bound or degenerate numerics)");
    found->partitions_scanned = scanned;
    return std::move(*found);
}

struct HullMembership {
    bool inside = false;
    std::vector<double> weights;
    double gap = 0.0;
};

/// x = sum_i w_i s_i with w >= 0, sum w = 1?
inline HullMembership hull_membership(const RealVector& x, const RealPointSet& s) {
    if (x.size() != s.dim) throw DimensionError("hull_membership: dimension mismatch");
    HullMembership out;
    if (s.points.empty()) {
        out.gap = 1.0;
        return out;
    }
    std::vector<const RealPointSet*> ptrs{&s};
    const double scale = std::max(point_scale(ptrs), x.norm());
    const int n = static_cast<int>(s.size());
    RealMatrix a(s.dim + 1, n);
    RealVector b(s.dim + 1);
    for (int i = 0; i < n; ++i) {
        a.block(0, i, s.dim, 1) = s.points[static_cast<std::size_t>(i)] / scale;
        a(s.dim, i) = 1.0;
    }
    b.head(s.dim) = x / scale;
    b(s.dim) = 1.0;
    const auto sol = phase_one(a, b);
    out.gap = sol.objective;
    if (sol.objective <= kLpFeasibleTol) {
        out.inside = true;
        const double sum = sol.x.sum();
        for (int i = 0; i < n; ++i) out.weights.push_back(sol.x(i) / sum);
    }
    return out;
}

}  // namespace matrange
