#include "maccanon/ellipsoid.hpp"

namespace maccanon {

Ellipsoid::Ellipsoid(rvec center, double radius) : x_(std::move(center)) {
    if (radius <= 0.0) throw EllipsoidBreakdown("ellipsoid: radius must be positive");
    int u = dim();
    a_ = radius * radius * rmat::Identity(u, u);
}

void Ellipsoid::step(const rvec& g) {
    int u = dim();
    if (g.norm() == 0.0) throw EllipsoidBreakdown("ellipsoid: zero cut vector");

    double quad = g.dot(a_ * g);
    if (quad <= 0.0) {
        if (repaired_) throw EllipsoidBreakdown("ellipsoid: shape matrix lost definiteness");
        // one-shot repair: symmetrize and floor the spectrum
        repaired_ = true;
        a_ = 0.5 * (a_ + a_.transpose());
        Eigen::SelfAdjointEigenSolver<rmat> es(a_);
        double floor = 1e-14 * std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
        a_ = es.eigenvectors() * es.eigenvalues().cwiseMax(floor).asDiagonal() *
             es.eigenvectors().transpose();
        quad = g.dot(a_ * g);
        if (quad <= 0.0) throw EllipsoidBreakdown("ellipsoid: shape matrix lost definiteness");
    }

    if (u == 1) {
        // interval bisection: keep the half on the side opposite g
        double r = std::sqrt(a_(0, 0));
        x_(0) += (g(0) > 0.0 ? -0.5 : 0.5) * r;
        a_(0, 0) = 0.25 * r * r;
        ++iters_;
        return;
    }

    rvec gt = g / std::sqrt(quad);
    rvec agt = a_ * gt;
    x_ -= agt / (u + 1.0);
    double uu = static_cast<double>(u) * u;
    a_ = (uu / (uu - 1.0)) * (a_ - (2.0 / (u + 1.0)) * (agt * agt.transpose()));
    a_ = 0.5 * (a_ + a_.transpose());
    ++iters_;
}

void Ellipsoid::constraint_cut(int coordinate) {
    rvec g = rvec::Zero(dim());
    g(coordinate) = -1.0;
    for (int c = 0; c < 50; ++c) {
        if (x_(coordinate) >= 0.0) return;
        step(g);
    }
    if (x_(coordinate) < 0.0)
        throw EllipsoidBreakdown("ellipsoid collapsed outside feasible orthant");
}

double Ellipsoid::stop_metric(const rvec& g) const {
    double quad = g.dot(a_ * g);
    return quad <= 0.0 ? 0.0 : std::sqrt(quad);
}

}  // namespace maccanon
