#pragma once

#include "maccanon/hull.hpp"
#include "maccanon/model.hpp"
#include "maccanon/ratecalc.hpp"

namespace maccanon {
namespace oracle {

struct WaterfillResult {
    rvec powers;       // per eigenmode, aligned with gains
    rvec gains;        // eigenvalues of H^H H
    double level = 0;  // water level mu
    double rate = 0;
};

/// Closed-form single-user waterfilling over the eigenmodes of H^H H.
WaterfillResult waterfill(const cmat& h, double energy, int cb);

/// Waterfilling over an explicit list of mode gains.
WaterfillResult waterfill_gains(rvec gains, double energy, int cb);

/// Single-user multi-tone capacity: pools the eigenmodes of every tone.
double waterfill_channel(const ChannelSet& ch, double energy);

/// Exact hull membership: feasibility of sum alpha_k v_k = target,
/// sum alpha = 1, alpha >= 0 with equality rows (independent of the
/// inequality formulation in timeshare_lp).
bool exact_membership(const VertexSet& v, const rvec& target, double tol = 1e-9);

struct BruteOptions {
    int restarts = 50;
    int max_iterations = 20000;
    double stall_tol = 1e-13;
    int workers = 1;
};

/// Reference weighted sum-rate maximizer for tiny instances: projected
/// gradient ascent directly on the covariances with PSD eigenvalue clipping
/// and per-user energy scaling. Returns the best objective over restarts.
double brute_solve_maxrate(const ChannelSet& ch, const rvec& energies, const rvec& theta,
                           const BruteOptions& opts = {});

}  // namespace oracle
}  // namespace maccanon
