#include "maccanon/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "maccanon/parallel.hpp"

namespace maccanon {
namespace oracle {

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

WaterfillResult waterfill_gains(rvec gains, double energy, int cb) {
    if (energy <= 0.0) throw ValidationError("waterfill: energy must be positive");
    WaterfillResult res;
    res.gains = gains;
    res.powers = rvec::Zero(gains.size());

    std::vector<int> active;
    for (int i = 0; i < gains.size(); ++i)
        if (gains(i) > 1e-300) active.push_back(i);
    if (active.empty()) return res;  // all-zero channel

    // sort inverse gains ascending; fill the best modes first
    std::sort(active.begin(), active.end(),
              [&](int a, int b) { return gains(a) > gains(b); });
    double inv_sum = 0.0;
    double mu = 0.0;
    int used = 0;
    for (size_t m = 0; m < active.size(); ++m) {
        inv_sum += 1.0 / gains(active[m]);
        double level = (energy + inv_sum) / static_cast<double>(m + 1);
        if (m + 1 < active.size() && level > 1.0 / gains(active[m + 1])) continue;
        mu = level;
        used = static_cast<int>(m + 1);
        break;
    }
    res.level = mu;
    for (int m = 0; m < used; ++m) {
        int i = active[static_cast<size_t>(m)];
        res.powers(i) = mu - 1.0 / gains(i);
        res.rate += std::log2(mu * gains(i));
    }
    res.rate /= cb;
    return res;
}

WaterfillResult waterfill(const cmat& h, double energy, int cb) {
    Eigen::SelfAdjointEigenSolver<cmat> es(cmat(h.adjoint() * h), Eigen::EigenvaluesOnly);
    return waterfill_gains(es.eigenvalues().cwiseMax(0.0), energy, cb);
}

double waterfill_channel(const ChannelSet& ch, double energy) {
    if (ch.num_users != 1) throw ValidationError("waterfill_channel: single-user only");
    std::vector<double> gains;
    for (int n = 0; n < ch.num_tones; ++n) {
        const cmat& h = ch.H[static_cast<size_t>(n)][0];
        Eigen::SelfAdjointEigenSolver<cmat> es(cmat(h.adjoint() * h), Eigen::EigenvaluesOnly);
        for (int i = 0; i < es.eigenvalues().size(); ++i)
            gains.push_back(std::max(0.0, es.eigenvalues()(i)));
    }
    rvec g = Eigen::Map<rvec>(gains.data(), static_cast<Eigen::Index>(gains.size()));
    return waterfill_gains(g, energy, ch.cb).rate;
}

bool exact_membership(const VertexSet& v, const rvec& target, double tol) {
    if (v.points.empty()) throw std::invalid_argument("exact_membership: empty vertex set");
    int k = static_cast<int>(v.points.size());
    int m = static_cast<int>(target.size());
    rmat a(m + 1, k);
    rvec rhs(m + 1);
    for (int u = 0; u < m; ++u) {
        for (int j = 0; j < k; ++j) a(u, j) = v.points[static_cast<size_t>(j)](u);
        rhs(u) = target(u);
    }
    a.row(m).setOnes();
    rhs(m) = 1.0;
    return simplex_phase1(a, rhs, tol).has_value();
}

namespace {

// One projected-gradient-ascent run on covariances for fixed weights and
// budgets. Objective is the summation-by-parts form of the weighted rate.
class BruteRun {
public:
    BruteRun(const ChannelSet& ch, const rvec& energies, const WeightVector& wv)
        : ch_(ch), e_(energies), wv_(wv) {}

    double run(std::uint64_t seed, const BruteOptions& opts) {
        init(seed);
        double f = objective(r_);
        int stall = 0;
        for (int it = 0; it < opts.max_iterations; ++it) {
            auto g = gradient(r_);
            double t = step_;
            double f_new = f;
            std::vector<std::vector<cmat>> cand;
            bool accepted = false;
            for (int ls = 0; ls < 40; ++ls) {
                cand = project(advance(r_, g, t));
                f_new = objective(cand);
                if (f_new > f + 1e-16) {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) break;
            step_ = std::min(4.0 * t, 1e3);  // allow the step to grow back
            if (f_new - f < opts.stall_tol * (1.0 + std::abs(f))) {
                if (++stall > 50) {
                    f = f_new;
                    r_ = std::move(cand);
                    break;
                }
            } else {
                stall = 0;
            }
            f = f_new;
            r_ = std::move(cand);
        }
        return f;
    }

private:
    void init(std::uint64_t seed) {
        std::mt19937_64 eng(seed);
        auto unif = [&] { return (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53; };
        r_.assign(static_cast<size_t>(ch_.num_tones), {});
        for (auto& tone : r_) {
            for (int u = 0; u < ch_.num_users; ++u) {
                int lx = ch_.tx_antennas[static_cast<size_t>(u)];
                cmat m(lx, lx);
                for (int i = 0; i < lx; ++i)
                    for (int j = 0; j < lx; ++j)
                        m(i, j) = cplx(unif() - 0.5, unif() - 0.5);
                tone.push_back(m * m.adjoint());
            }
        }
        r_ = project(r_);
        step_ = 1.0;
    }

    std::vector<std::vector<cmat>> advance(const std::vector<std::vector<cmat>>& r,
                                           const std::vector<std::vector<cmat>>& g,
                                           double t) const {
        auto out = r;
        for (size_t n = 0; n < out.size(); ++n)
            for (size_t u = 0; u < out[n].size(); ++u) out[n][u] += t * g[n][u];
        return out;
    }

    std::vector<std::vector<cmat>> project(std::vector<std::vector<cmat>> r) const {
        // Exact Euclidean projection per user onto {PSD, total trace <= E_u}:
        // clip(eigenvalues - lambda) with a common shift lambda >= 0 found by
        // bisection across all of the user's tones.
        int tones = ch_.num_tones;
        for (int u = 0; u < ch_.num_users; ++u) {
            std::vector<Eigen::SelfAdjointEigenSolver<cmat>> es(static_cast<size_t>(tones));
            double top = 0.0;
            for (int n = 0; n < tones; ++n) {
                cmat& m = r[static_cast<size_t>(n)][static_cast<size_t>(u)];
                m = 0.5 * (m + m.adjoint());
                es[static_cast<size_t>(n)].compute(m);
                top = std::max(top, es[static_cast<size_t>(n)].eigenvalues().maxCoeff());
            }
            auto trace_at = [&](double lambda) {
                double tr = 0.0;
                for (int n = 0; n < tones; ++n)
                    tr += (es[static_cast<size_t>(n)].eigenvalues().array() - lambda)
                              .max(0.0)
                              .sum();
                return tr;
            };
            double lambda = 0.0;
            if (trace_at(0.0) > e_(u)) {
                double lo = 0.0, hi = top;
                for (int b = 0; b < 200 && hi - lo > 1e-16 * (1.0 + hi); ++b) {
                    double mid = 0.5 * (lo + hi);
                    (trace_at(mid) > e_(u) ? lo : hi) = mid;
                }
                lambda = 0.5 * (lo + hi);
            }
            for (int n = 0; n < tones; ++n) {
                const auto& e = es[static_cast<size_t>(n)];
                r[static_cast<size_t>(n)][static_cast<size_t>(u)] =
                    e.eigenvectors() *
                    (e.eigenvalues().array() - lambda).max(0.0).matrix().asDiagonal() *
                    e.eigenvectors().adjoint();
            }
        }
        return r;
    }

    double objective(const std::vector<std::vector<cmat>>& r) const {
        double obj = 0.0;
        for (int n = 0; n < ch_.num_tones; ++n) {
            cmat s = cmat::Identity(ch_.rx_antennas, ch_.rx_antennas);
            for (int k = 0; k < ch_.num_users; ++k) {
                int u = wv_.sorted[static_cast<size_t>(k)];
                const cmat& h = ch_.H[static_cast<size_t>(n)][static_cast<size_t>(u)];
                s += h * r[static_cast<size_t>(n)][static_cast<size_t>(u)] * h.adjoint();
                if (wv_.delta(k) != 0.0) obj += wv_.delta(k) * log2_det_hpd(s);
            }
        }
        return obj / ch_.cb;
    }

    std::vector<std::vector<cmat>> gradient(const std::vector<std::vector<cmat>>& r) const {
        std::vector<std::vector<cmat>> g(r.size());
        for (int n = 0; n < ch_.num_tones; ++n) {
            std::vector<cmat> s(static_cast<size_t>(ch_.num_users));
            cmat acc = cmat::Identity(ch_.rx_antennas, ch_.rx_antennas);
            for (int k = 0; k < ch_.num_users; ++k) {
                int u = wv_.sorted[static_cast<size_t>(k)];
                const cmat& h = ch_.H[static_cast<size_t>(n)][static_cast<size_t>(u)];
                acc += h * r[static_cast<size_t>(n)][static_cast<size_t>(u)] * h.adjoint();
                s[static_cast<size_t>(k)] = acc;
            }
            cmat csum = cmat::Zero(ch_.rx_antennas, ch_.rx_antennas);
            std::vector<cmat> c(static_cast<size_t>(ch_.num_users));
            for (int k = ch_.num_users - 1; k >= 0; --k) {
                if (wv_.delta(k) != 0.0) csum += wv_.delta(k) * inv_hpd(s[static_cast<size_t>(k)]);
                c[static_cast<size_t>(k)] = csum;
            }
            g[static_cast<size_t>(n)].resize(static_cast<size_t>(ch_.num_users));
            for (int k = 0; k < ch_.num_users; ++k) {
                int u = wv_.sorted[static_cast<size_t>(k)];
                const cmat& h = ch_.H[static_cast<size_t>(n)][static_cast<size_t>(u)];
                g[static_cast<size_t>(n)][static_cast<size_t>(u)] =
                    (1.0 / (ch_.cb * kLn2)) * (h.adjoint() * c[static_cast<size_t>(k)] * h);
            }
        }
        return g;
    }

    const ChannelSet& ch_;
    rvec e_;
    WeightVector wv_;
    std::vector<std::vector<cmat>> r_;
    double step_ = 1.0;
};

}  // namespace

double brute_solve_maxrate(const ChannelSet& ch, const rvec& energies, const rvec& theta,
                           const BruteOptions& opts) {
    WeightVector wv(theta);
    std::vector<double> values(static_cast<size_t>(opts.restarts), -1e300);
    parallel_for(opts.restarts, opts.workers, [&](int r) {
        BruteRun run(ch, energies, wv);
        values[static_cast<size_t>(r)] = run.run(0x9e3779b97f4a7c15ull * (r + 1), opts);
    });
    return *std::max_element(values.begin(), values.end());
}

}  // namespace oracle
}  // namespace maccanon
