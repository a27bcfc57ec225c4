#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maccanon/linalg.hpp"

namespace maccanon {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Per-tone, per-user noise-whitened channel matrices for a MIMO MAC.
struct ChannelSet {
    int num_users = 0;
    int rx_antennas = 0;
    std::vector<int> tx_antennas;  // per user
    int num_tones = 0;
    int cb = 1;  // 1 = complex baseband, 2 = real
    std::vector<std::vector<cmat>> H;  // [tone][user], rx_antennas x tx_antennas[u]

    int total_tx() const {
        int s = 0;
        for (int t : tx_antennas) s += t;
        return s;
    }
    void validate() const;
};

enum class FadingModel { IidRayleigh, KroneckerExponential };

struct ChannelSpec {
    int num_users = 4;
    int rx_antennas = 4;
    std::vector<int> tx_antennas{2, 2, 2, 2};
    int num_tones = 16;
    int cb = 1;
    FadingModel model = FadingModel::IidRayleigh;
    double rho_tx = 0.0;
    double rho_rx = 0.0;
    int taps = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Transmit covariances per tone and user, optionally with factors R = B B^H.
struct CovariancePlan {
    std::vector<std::vector<cmat>> R;  // [tone][user]
    std::vector<std::vector<cmat>> B;  // optional, same layout; empty if absent

    double user_energy(int u) const {
        double e = 0.0;
        for (const auto& tone : R) e += std::real(tone[static_cast<size_t>(u)].trace());
        return e;
    }
    rvec energies(int num_users) const {
        rvec e(num_users);
        for (int u = 0; u < num_users; ++u) e(u) = user_energy(u);
        return e;
    }
    void validate(const ChannelSet& ch) const;
    static CovariancePlan zero(const ChannelSet& ch);
};

/// Per-tone rates under one SIC decoding order, plus per-user totals.
struct RateAllocation {
    rmat b;                  // num_tones x num_users
    rvec totals;             // per user, exact tone sums
    std::vector<int> order;  // decode order, order[0] decoded first (0-based)
};

/// Dual MAC->BC channel: per-user receive dimensions vary, transmit side is
/// the common L_y of the originating MAC.
struct BcChannelSet {
    int num_users = 0;
    std::vector<int> rx_antennas;  // per user
    int tx_antennas = 0;
    int num_tones = 0;
    int cb = 1;
    std::vector<std::vector<cmat>> H;  // [tone][user], rx_antennas[u] x tx_antennas
};

ChannelSet generate_channel(const ChannelSpec& spec);

/// Returns noise_cov^{-1/2} * H_raw via Hermitian eigendecomposition.
cmat whiten(const cmat& H_raw, const cmat& noise_cov);

BcChannelSet dual_bc_channel(const ChannelSet& mac);
ChannelSet dual_bc_channel(const BcChannelSet& bc);

}  // namespace maccanon
