#pragma once

#include <utility>
#include <vector>

#include "maccanon/model.hpp"

namespace maccanon {

/// Rate weights with the derived descending-theta permutation and the
/// telescoping weight differences delta_k = theta_(k) - theta_(k+1).
struct WeightVector {
    rvec theta;
    std::vector<int> sorted;  // user indices by descending theta, ties by ascending index
    rvec delta;               // delta[k] >= 0, sum = max theta

    WeightVector() = default;
    explicit WeightVector(rvec th);
};

/// SIC rates on one tone under the given decoding order (order[0] first).
rvec sic_rates(const ChannelSet& ch, const CovariancePlan& plan,
               const std::vector<int>& order, int tone);

/// (1/c_b) log2 det(I + sum_{u in subset} Q_u) on one tone.
double polymatroid_bound(const ChannelSet& ch, const CovariancePlan& plan,
                         const std::vector<int>& subset, int tone);

/// Decode order maximizing sum theta_u b_u: ascending theta, ties by
/// ascending user index.
std::vector<int> greedy_order(const WeightVector& w);

/// Both sides of the summation-by-parts identity on one tone.
std::pair<double, double> weighted_rate_identity(const ChannelSet& ch,
                                                 const CovariancePlan& plan,
                                                 const WeightVector& w, int tone);

/// Rates on all tones plus totals under one decoding order.
RateAllocation rates_for_order(const ChannelSet& ch, const CovariancePlan& plan,
                               const std::vector<int>& order);

}  // namespace maccanon
