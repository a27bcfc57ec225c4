#pragma once

#include <optional>
#include <vector>

#include "maccanon/linalg.hpp"

namespace maccanon {

/// Candidate rate vectors, each tagged with the decoding order that
/// produced it (tags may be empty for synthetic sets).
struct VertexSet {
    std::vector<rvec> points;
    std::vector<std::vector<int>> orders;

    size_t size() const { return points.size(); }
};

/// Phase-1 simplex feasibility for A x = b, x >= 0 (b may have any sign).
/// Returns a feasible x, or nullopt when certified infeasible. Bland's rule
/// guards against cycling.
std::optional<rvec> simplex_phase1(const rmat& a, const rvec& b, double tol = 1e-9);

/// Time-sharing recovery: alpha >= 0, sum alpha = 1,
/// sum_k alpha_k b_k >= b_min - 1e-9 componentwise.
std::optional<rvec> timeshare_lp(const VertexSet& v, const rvec& b_min);

struct MembershipResult {
    bool inside = false;
    rvec weights;     // convex weights over the vertex set
    double distance;  // Euclidean distance of the final iterate to the target
};

/// Frank-Wolfe projection of target onto conv(V); inside iff the distance
/// is at most tol * (1 + ||target||).
MembershipResult fw_membership(const VertexSet& v, const rvec& target, double tol);

}  // namespace maccanon
