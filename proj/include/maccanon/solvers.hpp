#pragma once

#include <optional>
#include <vector>

#include "maccanon/model.hpp"
#include "maccanon/ratecalc.hpp"

namespace maccanon {

/// flag semantics: 0 = infeasible, 1 = single decoding order, 2 = time-sharing.
struct SolveReport {
    int flag = 1;
    CovariancePlan plan;
    std::vector<RateAllocation> rates;  // one per ordering used
    rvec energies;
    rvec w;      // energy multipliers (dual of maxRMAC / input of minPMAC)
    rvec theta;  // rate weights (input of maxRMAC / dual of minPMAC)
    rvec alpha;  // time-sharing fractions over `rates`, sums to 1
    std::vector<double> trace;  // outer stop metric per iteration
    int outer_iterations = 0;
    double objective = 0.0;  // weighted rate or weighted energy

    /// Time-shared per-user rate totals, sum_k alpha_k b_k.
    rvec combined_rates() const;
};

struct NonConvergenceError : std::runtime_error {
    SolveReport best;
    NonConvergenceError(std::string msg, SolveReport b)
        : std::runtime_error(std::move(msg)), best(std::move(b)) {}
};

struct SolverOptions {
    int workers = 1;
    double eps_out_rel = 1e-6;
    int max_outer_per_u2 = 500;       // cap = this * U^2
    double tau_cluster = 1e-3;        // relative clustering tolerance
    int ordering_cap = 5040;          // 7!
    std::optional<rvec> warm_dual;    // initial ellipsoid center
};

/// Weighted sum-rate maximization under per-user energy budgets.
SolveReport max_rmac(const ChannelSet& ch, const rvec& energies, const rvec& theta,
                     const SolverOptions& opts = {});

/// Minimum weighted energy supporting target per-user rates, with decoding
/// order selection and time-sharing recovery.
SolveReport min_pmac(const ChannelSet& ch, const rvec& b_min, const rvec& w,
                     const SolverOptions& opts = {});

/// Weighted sum-rate maximization under a total energy budget (scalar dual,
/// geometric-mean bisection).
SolveReport max_resmac(const ChannelSet& ch, double total_energy, const rvec& theta,
                       const SolverOptions& opts = {});

/// Single-linkage clustering of users by theta, clusters ordered by
/// descending theta.
std::vector<std::vector<int>> cluster_users(const rvec& theta, double tau = 1e-3);

/// All decoding orders consistent with the clustering: inter-cluster order
/// fixed (ascending theta decoded first), within-cluster permutations
/// enumerated up to `cap` (sampled beyond it).
std::vector<std::vector<int>> cluster_orderings(const std::vector<std::vector<int>>& clusters,
                                                int cap = 5040, std::uint64_t seed = 1);

}  // namespace maccanon
