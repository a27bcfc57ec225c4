#include "maccanon/ratecalc.hpp"

#include <algorithm>
#include <numeric>

namespace maccanon {

namespace {

constexpr double kRateClamp = 1e-12;

cmat received_cov(const ChannelSet& ch, const CovariancePlan& plan, int tone, int user) {
    const cmat& h = ch.H[static_cast<size_t>(tone)][static_cast<size_t>(user)];
    const cmat& r = plan.R[static_cast<size_t>(tone)][static_cast<size_t>(user)];
    return h * r * h.adjoint();
}

}  // namespace

WeightVector::WeightVector(rvec th) : theta(std::move(th)) {
    int u = static_cast<int>(theta.size());
    for (int i = 0; i < u; ++i)
        if (!(theta(i) >= 0.0))
            throw ValidationError("WeightVector: weights must be nonnegative");
    sorted.resize(static_cast<size_t>(u));
    std::iota(sorted.begin(), sorted.end(), 0);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [&](int a, int b) { return theta(a) > theta(b); });
    delta.resize(u);
    for (int k = 0; k < u; ++k) {
        double next = (k + 1 < u) ? theta(sorted[static_cast<size_t>(k) + 1]) : 0.0;
        delta(k) = theta(sorted[static_cast<size_t>(k)]) - next;
    }
}

rvec sic_rates(const ChannelSet& ch, const CovariancePlan& plan,
               const std::vector<int>& order, int tone) {
    int u = ch.num_users;
    if (static_cast<int>(order.size()) != u)
        throw ValidationError("sic_rates: order is not a permutation of the users");
    rvec rates = rvec::Zero(u);
    // Suffix accumulation: user at position k sees interference from j > k.
    cmat s = cmat::Identity(ch.rx_antennas, ch.rx_antennas);
    double prev = 0.0;  // log2 det of I + suffix starting at k+1
    for (int k = u - 1; k >= 0; --k) {
        int user = order[static_cast<size_t>(k)];
        const cmat& r = plan.R[static_cast<size_t>(tone)][static_cast<size_t>(user)];
        if (min_eigenvalue_hermitian(r) <
            -1e-9 * std::max(std::real(r.trace()), 0.0) / r.rows() - 1e-300)
            throw ValidationError("sic_rates: covariance not PSD");
        s += received_cov(ch, plan, tone, user);
        double cur = log2_det_hpd(s);
        double rate = (cur - prev) / ch.cb;
        rates(user) = rate < kRateClamp ? 0.0 : rate;
        prev = cur;
    }
    return rates;
}

double polymatroid_bound(const ChannelSet& ch, const CovariancePlan& plan,
                         const std::vector<int>& subset, int tone) {
    if (subset.empty()) throw ValidationError("polymatroid_bound: empty subset");
    cmat s = cmat::Identity(ch.rx_antennas, ch.rx_antennas);
    for (int u : subset) s += received_cov(ch, plan, tone, u);
    return log2_det_hpd(s) / ch.cb;
}

std::vector<int> greedy_order(const WeightVector& w) {
    std::vector<int> order(static_cast<size_t>(w.theta.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return w.theta(a) < w.theta(b); });
    return order;
}

std::pair<double, double> weighted_rate_identity(const ChannelSet& ch,
                                                 const CovariancePlan& plan,
                                                 const WeightVector& w, int tone) {
    rvec rates = sic_rates(ch, plan, greedy_order(w), tone);
    double lhs = w.theta.dot(rates);

    double rhs = 0.0;
    cmat s = cmat::Identity(ch.rx_antennas, ch.rx_antennas);
    for (int k = 0; k < ch.num_users; ++k) {
        s += received_cov(ch, plan, tone, w.sorted[static_cast<size_t>(k)]);
        if (w.delta(k) != 0.0) rhs += w.delta(k) * log2_det_hpd(s);
    }
    rhs /= ch.cb;
    return {lhs, rhs};
}

RateAllocation rates_for_order(const ChannelSet& ch, const CovariancePlan& plan,
                               const std::vector<int>& order) {
    RateAllocation a;
    a.order = order;
    a.b.resize(ch.num_tones, ch.num_users);
    for (int n = 0; n < ch.num_tones; ++n) a.b.row(n) = sic_rates(ch, plan, order, n).transpose();
    a.totals = rvec::Zero(ch.num_users);
    for (int n = 0; n < ch.num_tones; ++n) a.totals += a.b.row(n).transpose();
    return a;
}

}  // namespace maccanon
