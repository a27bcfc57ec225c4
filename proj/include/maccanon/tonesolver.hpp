#pragma once

#include <optional>
#include <vector>

#include "maccanon/ratecalc.hpp"

namespace maccanon {

struct UnboundedToneError : std::runtime_error {
    int user;
    explicit UnboundedToneError(int u)
        : std::runtime_error("unbounded tone subproblem (user " + std::to_string(u) +
                             " has zero energy price but positive rate weight)"),
          user(u) {}
};

/// One tone's dualized maximization: channel slices, telescoped rate weights
/// and per-user energy multipliers.
struct ToneProblem {
    std::vector<cmat> H;      // per user
    std::vector<int> sorted;  // users by descending theta
    rvec delta;               // weight differences, aligned with sorted
    rvec w;                   // energy multipliers, indexed by user
    int cb = 1;

    ToneProblem() = default;
    ToneProblem(const ChannelSet& ch, int tone, const WeightVector& theta, rvec w_in);

    int num_users() const { return static_cast<int>(H.size()); }
    /// Packed real dimension 2 * sum_u L_x[u]^2.
    int packed_dim() const;
};

/// Packs factors B_u into interleaved (Re, Im) real coordinates, per-user
/// blocks in user-index order.
rvec pack_factors(const std::vector<cmat>& B);
std::vector<cmat> unpack_factors(const rvec& z, const ToneProblem& p);

/// Per-tone Lagrangian value at factors z.
double tone_objective(const ToneProblem& p, const rvec& z);

/// Analytic gradient of the Lagrangian in packed factor coordinates.
rvec tone_gradient(const ToneProblem& p, const rvec& z);

struct ToneSolution {
    std::vector<cmat> B;
    std::vector<cmat> R;
    double value = 0.0;
    int iterations = 0;
};

struct ToneSolverOptions {
    int memory = 10;
    double armijo_c1 = 1e-4;
    double backtrack = 0.5;
    int max_iterations = 200;
    double tol = 1e-7;
    double w_floor = 1e-12;
};

ToneSolution solve_tone(const ToneProblem& p, const std::optional<rvec>& warm = std::nullopt,
                        const ToneSolverOptions& opts = {});

}  // namespace maccanon
