#pragma once

#include "maccanon/solvers.hpp"

namespace maccanon {

struct UndecidedError : std::runtime_error {
    rvec gap;    // b_v - b at the last round
    rvec theta;  // final weight iterate, usable as a warm start
    UndecidedError(std::string msg, rvec g, rvec th = rvec())
        : std::runtime_error(std::move(msg)), gap(std::move(g)), theta(std::move(th)) {}
};

struct AdmissionOptions {
    SolverOptions solver;
    int max_rounds = 100;
    double eta = 0.5;  // multiplicative deficit step for the weight update
    std::optional<rvec> warm_theta;
};

/// Tests whether target rates b lie in the capacity region under per-user
/// energies. flag 0 carries the separating hyperplane in `theta`.
SolveReport adm_mac(const ChannelSet& ch, const rvec& b, const rvec& energies,
                    const AdmissionOptions& opts = {});

struct BoundaryPoint {
    double b1 = 0.0;
    double b2 = 0.0;
};

/// Largest feasible b2 for the given b1, bisected to `tol` bits with adm_mac
/// as the feasibility oracle.
double boundary_b2(const ChannelSet& ch, const rvec& energies, double b1,
                   double b2_hint, double tol = 1e-3,
                   const AdmissionOptions& opts = {});

/// Uniform b1 grid from 0 to the user-1 single-user capacity; returns
/// grid_points boundary points.
std::vector<BoundaryPoint> trace_region_2user(const ChannelSet& ch, const rvec& energies,
                                              int grid_points,
                                              const AdmissionOptions& opts = {});

}  // namespace maccanon
