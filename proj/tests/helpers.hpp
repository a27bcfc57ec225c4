#pragma once

#include <random>

#include "maccanon/model.hpp"

namespace testutil {

using namespace maccanon;

inline double unif(std::mt19937_64& eng) {
    return (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53;
}

inline cplx gauss(std::mt19937_64& eng) {
    double r = std::sqrt(-std::log(unif(eng)));
    double phi = 2.0 * 3.141592653589793 * unif(eng);
    return {r * std::cos(phi), r * std::sin(phi)};
}

inline cmat random_cmat(int rows, int cols, std::mt19937_64& eng) {
    cmat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = gauss(eng);
    return m;
}

inline cmat random_psd(int dim, std::mt19937_64& eng) {
    cmat b = random_cmat(dim, dim, eng);
    return b * b.adjoint();
}

inline ChannelSet random_channel(int users, int ly, int lx, int tones, std::uint64_t seed) {
    ChannelSet ch;
    ch.num_users = users;
    ch.rx_antennas = ly;
    ch.tx_antennas.assign(static_cast<size_t>(users), lx);
    ch.num_tones = tones;
    ch.cb = 1;
    std::mt19937_64 eng(seed);
    ch.H.resize(static_cast<size_t>(tones));
    for (auto& tone : ch.H) {
        tone.clear();
        for (int u = 0; u < users; ++u) tone.push_back(random_cmat(ly, lx, eng));
    }
    return ch;
}

inline CovariancePlan random_plan(const ChannelSet& ch, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 eng(seed);
    CovariancePlan p;
    p.R.resize(static_cast<size_t>(ch.num_tones));
    for (auto& tone : p.R)
        for (int u = 0; u < ch.num_users; ++u)
            tone.push_back(scale * random_psd(ch.tx_antennas[static_cast<size_t>(u)], eng));
    return p;
}

/// 1x1 scalar channel set: U users, h[u] on a single tone.
inline ChannelSet scalar_channel(const std::vector<double>& h) {
    ChannelSet ch;
    ch.num_users = static_cast<int>(h.size());
    ch.rx_antennas = 1;
    ch.tx_antennas.assign(h.size(), 1);
    ch.num_tones = 1;
    ch.cb = 1;
    ch.H.resize(1);
    for (double v : h) {
        cmat m(1, 1);
        m(0, 0) = v;
        ch.H[0].push_back(m);
    }
    return ch;
}

inline CovariancePlan scalar_plan(const std::vector<double>& p) {
    CovariancePlan plan;
    plan.R.resize(1);
    for (double v : p) {
        cmat m(1, 1);
        m(0, 0) = v;
        plan.R[0].push_back(m);
    }
    return plan;
}

}  // namespace testutil
