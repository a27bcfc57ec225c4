#pragma once

#include "maccanon/linalg.hpp"

namespace maccanon {

struct EllipsoidBreakdown : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Ellipsoid-method state over R^U. For U = 1 the shape matrix degenerates
/// to the squared interval radius and cuts bisect the interval.
class Ellipsoid {
public:
    Ellipsoid(rvec center, double radius);

    const rvec& center() const { return x_; }
    const rmat& shape() const { return a_; }
    int iterations() const { return iters_; }
    int dim() const { return static_cast<int>(x_.size()); }

    /// Central cut with subgradient g: retains {y : g^T (y - x) <= 0}.
    void step(const rvec& g);

    /// Cuts with g = -e_u until the center coordinate is nonnegative.
    /// Throws after 50 consecutive cuts.
    void constraint_cut(int coordinate);

    /// sqrt(g^T A g), the dual suboptimality scale.
    double stop_metric(const rvec& g) const;

private:
    rvec x_;
    rmat a_;
    int iters_ = 0;
    bool repaired_ = false;
};

}  // namespace maccanon
