#include "maccanon/model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace maccanon {

namespace {

bool all_finite(const cmat& m) {
    return m.allFinite();
}

std::string at(int tone, int user) {
    std::ostringstream os;
    os << " at (tone " << tone << ", user " << user << ")";
    return os.str();
}

}  // namespace

void ChannelSet::validate() const {
    if (num_users <= 0) throw ValidationError("ChannelSet: num_users must be positive");
    if (rx_antennas <= 0) throw ValidationError("ChannelSet: rx_antennas must be positive");
    if (num_tones <= 0) throw ValidationError("ChannelSet: num_tones must be positive");
    if (cb != 1 && cb != 2) throw ValidationError("ChannelSet: c_b must be 1 or 2");
    if (static_cast<int>(tx_antennas.size()) != num_users)
        throw ValidationError("ChannelSet: tx_antennas size mismatch");
    for (int t : tx_antennas)
        if (t <= 0) throw ValidationError("ChannelSet: tx_antennas entries must be positive");
    if (static_cast<int>(H.size()) != num_tones)
        throw ValidationError("ChannelSet: tone count mismatch in H");
    for (int n = 0; n < num_tones; ++n) {
        if (static_cast<int>(H[n].size()) != num_users)
            throw ValidationError("ChannelSet: user count mismatch in H at tone " + std::to_string(n));
        for (int u = 0; u < num_users; ++u) {
            const cmat& h = H[n][u];
            if (h.rows() != rx_antennas || h.cols() != tx_antennas[static_cast<size_t>(u)])
                throw ValidationError("ChannelSet: matrix shape mismatch" + at(n, u));
            if (!all_finite(h))
                throw ValidationError("ChannelSet: non-finite entry" + at(n, u));
        }
    }
}

void ChannelSpec::validate() const {
    if (num_users <= 0 || rx_antennas <= 0 || num_tones <= 0)
        throw ValidationError("ChannelSpec: dimensions must be positive");
    if (cb != 1 && cb != 2) throw ValidationError("ChannelSpec: c_b must be 1 or 2");
    if (static_cast<int>(tx_antennas.size()) != num_users)
        throw ValidationError("ChannelSpec: tx_antennas size mismatch");
    for (int t : tx_antennas)
        if (t <= 0) throw ValidationError("ChannelSpec: tx_antennas entries must be positive");
    if (rho_tx < 0.0 || rho_tx >= 1.0) throw ValidationError("ChannelSpec: rho_tx must be in [0,1)");
    if (rho_rx < 0.0 || rho_rx >= 1.0) throw ValidationError("ChannelSpec: rho_rx must be in [0,1)");
    if (taps < 1) throw ValidationError("ChannelSpec: taps must be >= 1");
    if (taps > num_tones) throw ValidationError("ChannelSpec: taps must not exceed num_tones");
}

void CovariancePlan::validate(const ChannelSet& ch) const {
    if (static_cast<int>(R.size()) != ch.num_tones)
        throw ValidationError("CovariancePlan: tone count mismatch");
    for (int n = 0; n < ch.num_tones; ++n) {
        if (static_cast<int>(R[n].size()) != ch.num_users)
            throw ValidationError("CovariancePlan: user count mismatch at tone " + std::to_string(n));
        for (int u = 0; u < ch.num_users; ++u) {
            const cmat& r = R[n][u];
            int lx = ch.tx_antennas[static_cast<size_t>(u)];
            if (r.rows() != lx || r.cols() != lx)
                throw ValidationError("CovariancePlan: shape mismatch" + at(n, u));
            if (!is_hermitian(r, 1e-10))
                throw ValidationError("CovariancePlan: not Hermitian" + at(n, u));
            double tr = std::real(r.trace());
            if (min_eigenvalue_hermitian(r) < -1e-9 * std::max(tr, 0.0) / lx - 1e-300)
                throw ValidationError("CovariancePlan: not PSD" + at(n, u));
        }
    }
}

CovariancePlan CovariancePlan::zero(const ChannelSet& ch) {
    CovariancePlan p;
    p.R.resize(static_cast<size_t>(ch.num_tones));
    for (auto& tone : p.R) {
        tone.reserve(static_cast<size_t>(ch.num_users));
        for (int u = 0; u < ch.num_users; ++u)
            tone.push_back(cmat::Zero(ch.tx_antennas[static_cast<size_t>(u)],
                                      ch.tx_antennas[static_cast<size_t>(u)]));
    }
    return p;
}

namespace {

// Deterministic complex standard normal (unit variance, 1/2 per component)
// via Box-Muller on mt19937_64 uniforms. std::normal_distribution is
// implementation-defined, so it is avoided here.
class ComplexGaussian {
public:
    explicit ComplexGaussian(std::uint64_t seed) : eng_(seed) {}

    cplx operator()() {
        double u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-std::log(u1));  // Rayleigh with E[r^2] = 1
        double phi = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(phi), r * std::sin(phi)};
    }

private:
    double uniform01() {
        // in (0, 1], never 0 so log is safe
        return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    }
    std::mt19937_64 eng_;
};

// Exponential correlation [R]_ij = rho^|i-j| and its Hermitian square root.
cmat exp_corr_sqrt(int dim, double rho) {
    if (rho == 0.0) return cmat::Identity(dim, dim);
    cmat r(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            r(i, j) = std::pow(rho, std::abs(i - j));
    Eigen::SelfAdjointEigenSolver<cmat> es(r);
    rvec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

ChannelSet generate_channel(const ChannelSpec& spec) {
    spec.validate();
    ChannelSet ch;
    ch.num_users = spec.num_users;
    ch.rx_antennas = spec.rx_antennas;
    ch.tx_antennas = spec.tx_antennas;
    ch.num_tones = spec.num_tones;
    ch.cb = spec.cb;

    ComplexGaussian gauss(spec.seed);
    cmat rx_sqrt = exp_corr_sqrt(spec.rx_antennas, spec.rho_rx);
    bool kron = spec.model == FadingModel::KroneckerExponential;

    // Tap-domain draws per user, then a variance-preserving DFT to tones:
    // each tone entry is (1/sqrt(nu)) * sum_t g_t exp(-i 2 pi n t / N).
    ch.H.assign(static_cast<size_t>(spec.num_tones), {});
    for (auto& tone : ch.H) tone.resize(static_cast<size_t>(spec.num_users));

    for (int u = 0; u < spec.num_users; ++u) {
        int lx = spec.tx_antennas[static_cast<size_t>(u)];
        cmat tx_sqrt = exp_corr_sqrt(lx, spec.rho_tx);
        std::vector<cmat> taps(static_cast<size_t>(spec.taps));
        for (int t = 0; t < spec.taps; ++t) {
            cmat g(spec.rx_antennas, lx);
            for (int i = 0; i < spec.rx_antennas; ++i)
                for (int j = 0; j < lx; ++j) g(i, j) = gauss();
            taps[static_cast<size_t>(t)] = kron ? cmat(rx_sqrt * g * tx_sqrt) : g;
        }
        double scale = 1.0 / std::sqrt(static_cast<double>(spec.taps));
        for (int n = 0; n < spec.num_tones; ++n) {
            cmat h = cmat::Zero(spec.rx_antennas, lx);
            for (int t = 0; t < spec.taps; ++t) {
                double phase = -2.0 * std::numbers::pi * n * t / spec.num_tones;
                h += taps[static_cast<size_t>(t)] * cplx(std::cos(phase), std::sin(phase));
            }
            ch.H[static_cast<size_t>(n)][static_cast<size_t>(u)] = scale * h;
        }
    }
    ch.validate();
    return ch;
}

cmat whiten(const cmat& H_raw, const cmat& noise_cov) {
    if (noise_cov.rows() != noise_cov.cols() || noise_cov.rows() != H_raw.rows())
        throw ValidationError("whiten: noise covariance shape mismatch");
    if (!is_hermitian(noise_cov, 1e-10))
        throw ValidationError("whiten: noise covariance not Hermitian");
    Eigen::SelfAdjointEigenSolver<cmat> es(noise_cov);
    const rvec& ev = es.eigenvalues();
    if (ev.minCoeff() <= 1e-12 * ev.maxCoeff())
        throw ValidationError("whiten: noise covariance not positive definite");
    cmat inv_sqrt = es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
                    es.eigenvectors().adjoint();
    return inv_sqrt * H_raw;
}

BcChannelSet dual_bc_channel(const ChannelSet& mac) {
    mac.validate();
    BcChannelSet bc;
    bc.num_users = mac.num_users;
    bc.tx_antennas = mac.rx_antennas;
    bc.num_tones = mac.num_tones;
    bc.cb = mac.cb;
    bc.rx_antennas.resize(static_cast<size_t>(mac.num_users));
    for (int u = 0; u < mac.num_users; ++u)
        bc.rx_antennas[static_cast<size_t>(u)] =
            mac.tx_antennas[static_cast<size_t>(mac.num_users - 1 - u)];
    bc.H.resize(static_cast<size_t>(mac.num_tones));
    for (int n = 0; n < mac.num_tones; ++n) {
        bc.H[static_cast<size_t>(n)].resize(static_cast<size_t>(mac.num_users));
        for (int u = 0; u < mac.num_users; ++u)
            bc.H[static_cast<size_t>(n)][static_cast<size_t>(u)] =
                mac.H[static_cast<size_t>(n)][static_cast<size_t>(mac.num_users - 1 - u)].adjoint();
    }
    return bc;
}

ChannelSet dual_bc_channel(const BcChannelSet& bc) {
    ChannelSet mac;
    mac.num_users = bc.num_users;
    mac.rx_antennas = bc.tx_antennas;
    mac.num_tones = bc.num_tones;
    mac.cb = bc.cb;
    mac.tx_antennas.resize(static_cast<size_t>(bc.num_users));
    for (int u = 0; u < bc.num_users; ++u)
        mac.tx_antennas[static_cast<size_t>(u)] =
            bc.rx_antennas[static_cast<size_t>(bc.num_users - 1 - u)];
    mac.H.resize(static_cast<size_t>(bc.num_tones));
    for (int n = 0; n < bc.num_tones; ++n) {
        mac.H[static_cast<size_t>(n)].resize(static_cast<size_t>(bc.num_users));
        for (int u = 0; u < bc.num_users; ++u)
            mac.H[static_cast<size_t>(n)][static_cast<size_t>(u)] =
                bc.H[static_cast<size_t>(n)][static_cast<size_t>(bc.num_users - 1 - u)].adjoint();
    }
    mac.validate();
    return mac;
}

}  // namespace maccanon
