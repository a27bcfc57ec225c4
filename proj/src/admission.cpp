#include "maccanon/admission.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "maccanon/hull.hpp"

namespace maccanon {

namespace {

struct RoundVertices {
    std::vector<RateAllocation> allocations;
    VertexSet vertices;
};

RoundVertices vertices_for_orders(const ChannelSet& ch, const CovariancePlan& plan,
                                  const std::vector<std::vector<int>>& orders) {
    RoundVertices out;
    for (const auto& o : orders) {
        RateAllocation ra = rates_for_order(ch, plan, o);
        out.vertices.points.push_back(ra.totals);
        out.vertices.orders.push_back(o);
        out.allocations.push_back(std::move(ra));
    }
    return out;
}

struct VertexCache {
    VertexSet vertices;
    std::vector<RateAllocation> allocations;

    void insert(RateAllocation ra) {
        for (const auto& q : vertices.points)
            if ((ra.totals - q).cwiseAbs().maxCoeff() <= 1e-9) return;
        vertices.points.push_back(ra.totals);
        vertices.orders.push_back(ra.order);
        allocations.push_back(std::move(ra));
    }
};

// Per-cluster Frank-Wolfe membership with free disposal: vertices clipped to
// the target are added so points below the dominant face still register.
bool cluster_fw_inside(const VertexSet& full, const std::vector<int>& cluster,
                       const rvec& target, double tol) {
    Eigen::Index m = static_cast<Eigen::Index>(cluster.size());
    rvec tc(m);
    for (Eigen::Index i = 0; i < m; ++i) tc(i) = target(cluster[static_cast<size_t>(i)]);

    if (m == 1) {
        for (const auto& p : full.points)
            if (p(cluster[0]) >= tc(0) - tol * (1.0 + tc(0))) return true;
        return false;
    }
    VertexSet vc;
    for (const auto& p : full.points) {
        rvec r(m);
        for (Eigen::Index i = 0; i < m; ++i) r(i) = p(cluster[static_cast<size_t>(i)]);
        vc.points.push_back(r.cwiseMin(tc));
        vc.points.push_back(std::move(r));
    }
    return fw_membership(vc, tc, tol).inside;
}

}  // namespace

SolveReport adm_mac(const ChannelSet& ch, const rvec& b, const rvec& energies,
                    const AdmissionOptions& opts) {
    ch.validate();
    int nu = ch.num_users;
    if (b.size() != nu || (b.array() < 0.0).any())
        throw ValidationError("adm_mac: target rates must be nonnegative");
    if (energies.size() != nu || (energies.array() <= 0.0).any())
        throw ValidationError("adm_mac: energies must be positive");

    double eps_adm = 1e-6 * (1.0 + b.norm());
    rvec theta = opts.warm_theta && opts.warm_theta->size() == nu
                     ? opts.warm_theta->cwiseMax(1e-6)
                     : rvec(rvec::Ones(nu));
    theta /= theta.maxCoeff();

    VertexCache cache;
    std::optional<rvec> warm_w;
    rvec gap;
    // Slow-start step control: while the same users stay in deficit the
    // multiplicative step doubles, so a weight ratio of any size is reachable
    // in logarithmically many rounds; any change in the deficit set resets it.
    double eta = opts.eta;
    std::vector<bool> last_deficit;
    rvec prev_theta;

    for (int round = 0; round < opts.max_rounds; ++round) {
        SolverOptions so = opts.solver;
        so.warm_dual = warm_w;
        SolveReport vertex = max_rmac(ch, energies, theta, so);
        warm_w = vertex.w;
        const rvec& b_v = vertex.rates[0].totals;
        gap = b_v - b;

        if (theta.dot(gap) < -eps_adm) {  // separating hyperplane
            SolveReport rep = std::move(vertex);
            rep.flag = 0;
            rep.theta = theta;
            rep.alpha = rvec();
            rep.objective = theta.dot(b_v);
            return rep;
        }
        if ((gap.array() >= -1e-12 * (1.0 + b.array())).all()) {
            SolveReport rep = std::move(vertex);
            rep.flag = 1;
            rep.theta = theta;
            rep.objective = theta.dot(b_v);
            return rep;
        }

        // Use the plan's full polymatroid vertex set when the user count
        // permits: time-sharing targets between vertices are then certified
        // from any nearby weight iterate, not only from exact ties.
        auto clusters = cluster_users(theta, opts.solver.tau_cluster);
        double perms = 1.0;
        for (int u = 2; u <= nu; ++u) perms *= u;
        if (perms <= opts.solver.ordering_cap) {
            clusters.assign(1, std::vector<int>(static_cast<size_t>(nu)));
            std::iota(clusters[0].begin(), clusters[0].end(), 0);
        }
        auto orders = cluster_orderings(clusters, opts.solver.ordering_cap);
        RoundVertices rv = vertices_for_orders(ch, vertex.plan, orders);
        for (const auto& ra : rv.allocations) cache.insert(ra);

        bool fw_inside = true;
        for (const auto& c : clusters)
            if (!cluster_fw_inside(rv.vertices, c, b, 1e-6)) {
                fw_inside = false;
                break;
            }
        // The time-sharing LP is the exact (free-disposal) certificate and
        // also yields the fractions; Frank-Wolfe above is the per-cluster
        // screen.
        auto alpha = timeshare_lp(rv.vertices, b);
        (void)fw_inside;
        if (alpha) {
            SolveReport rep;
            rep.flag = ((alpha->array() > 1e-12).count() > 1) ? 2 : 1;
            rep.plan = vertex.plan;
            rep.theta = theta;
            rep.w = vertex.w;
            rep.energies = vertex.energies;
            rep.trace = vertex.trace;
            rep.outer_iterations = round + 1;
            std::vector<double> av;
            for (Eigen::Index k = 0; k < alpha->size(); ++k) {
                if ((*alpha)(k) <= 1e-12) continue;
                rep.rates.push_back(rv.allocations[static_cast<size_t>(k)]);
                av.push_back((*alpha)(k));
            }
            rep.alpha = Eigen::Map<rvec>(av.data(), static_cast<Eigen::Index>(av.size()));
            rep.alpha /= rep.alpha.sum();
            rep.objective = theta.dot(rep.combined_rates());
            return rep;
        }

        // steer the next vertex toward deficit users; the step is normalized
        // by the worst relative deficit so tiny margins near the boundary
        // still move the weights, doubled while the deficit set is stable and
        // damped when it flips (slow start with backoff)
        std::vector<bool> deficit_set(static_cast<size_t>(nu));
        rvec deficit = rvec::Zero(nu);
        for (int u = 0; u < nu; ++u) {
            deficit(u) = std::max(0.0, (b(u) - b_v(u)) / std::max(b(u), 1e-12));
            deficit_set[static_cast<size_t>(u)] = gap(u) < -1e-12 * (1.0 + b(u));
        }
        bool flipped = !last_deficit.empty() && deficit_set != last_deficit;
        // backoff must be allowed below the initial step: near the supporting
        // weights the certification window is far narrower than one eta_0 step
        eta = flipped ? std::max(0.25 * eta, 1e-5)
                      : (last_deficit.empty() ? eta : std::min(2.0 * eta, 1e6));
        last_deficit = std::move(deficit_set);
        if (flipped && prev_theta.size() == nu) {
            // overshot the supporting weights: bisect back in log space
            rvec mid = (theta.array() * prev_theta.array()).sqrt();
            prev_theta = theta;
            theta = std::move(mid);
        } else {
            prev_theta = theta;
            double dmax = deficit.maxCoeff();
            if (dmax > 0.0)
                for (int u = 0; u < nu; ++u) theta(u) *= 1.0 + eta * deficit(u) / dmax;
        }
        theta /= theta.maxCoeff();
        theta = theta.cwiseMax(1e-15);
    }
    throw UndecidedError("adm_mac: round cap reached without a verdict", std::move(gap), theta);
}

namespace {

double single_user_capacity(const ChannelSet& ch, int user, double energy,
                            const SolverOptions& so) {
    ChannelSet one;
    one.num_users = 1;
    one.rx_antennas = ch.rx_antennas;
    one.tx_antennas = {ch.tx_antennas[static_cast<size_t>(user)]};
    one.num_tones = ch.num_tones;
    one.cb = ch.cb;
    one.H.resize(static_cast<size_t>(ch.num_tones));
    for (int n = 0; n < ch.num_tones; ++n)
        one.H[static_cast<size_t>(n)] = {ch.H[static_cast<size_t>(n)][static_cast<size_t>(user)]};
    rvec e(1), th(1);
    e << energy;
    th << 1.0;
    return max_rmac(one, e, th, so).rates[0].totals(0);
}

}  // namespace

namespace {

double boundary_b2_impl(const ChannelSet& ch, const rvec& energies, double b1, double b2_hint,
                        double tol, AdmissionOptions& ao) {
    auto feasible = [&](double b2) {
        rvec target(2);
        target << b1, std::max(b2, 0.0);
        try {
            SolveReport rep = adm_mac(ch, target, energies, ao);
            ao.warm_theta = rep.theta;  // warm the next probe from any verdict
            return rep.flag != 0;
        } catch (const UndecidedError&) {
            // the warm start can steer the weight search into a corner; give
            // the probe one cold retry before treating it as outside
            AdmissionOptions cold = ao;
            cold.warm_theta.reset();
            try {
                SolveReport rep = adm_mac(ch, target, energies, cold);
                ao.warm_theta = rep.theta;
                return rep.flag != 0;
            } catch (const UndecidedError& e) {
                if (e.theta.size() == 2) ao.warm_theta = e.theta;
                return false;  // borderline within dual tolerance
            }
        }
    };

    double lo = 0.0;
    if (!feasible(lo)) return 0.0;
    double hi = std::max(b2_hint, 4.0 * tol);
    for (int grow = 0; feasible(hi); ++grow) {
        if (grow > 60) throw std::runtime_error("boundary_b2: no infeasible upper bound found");
        lo = hi;
        hi = 1.5 * hi + 1.0;
    }
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace

double boundary_b2(const ChannelSet& ch, const rvec& energies, double b1, double b2_hint,
                   double tol, const AdmissionOptions& opts) {
    if (ch.num_users != 2) throw ValidationError("boundary_b2: two-user channels only");
    AdmissionOptions ao = opts;
    return boundary_b2_impl(ch, energies, b1, b2_hint, tol, ao);
}

std::vector<BoundaryPoint> trace_region_2user(const ChannelSet& ch, const rvec& energies,
                                              int grid_points, const AdmissionOptions& opts) {
    if (ch.num_users != 2) throw ValidationError("trace_region_2user: two-user channels only");
    if (grid_points < 2) throw ValidationError("trace_region_2user: need at least 2 grid points");

    double b1_max = single_user_capacity(ch, 0, energies(0), opts.solver);
    double b2_max = single_user_capacity(ch, 1, energies(1), opts.solver);

    std::vector<BoundaryPoint> pts(static_cast<size_t>(grid_points));
    double tol = 1e-3;
    double hint = b2_max + 2.0 * tol;
    AdmissionOptions ao = opts;  // warm state persists across columns
    for (int i = 0; i < grid_points; ++i) {
        double b1 = b1_max * i / (grid_points - 1);
        double b2 = boundary_b2_impl(ch, energies, b1, hint, tol, ao);
        pts[static_cast<size_t>(i)] = {b1, b2};
        hint = b2 + 2.0 * tol;  // boundary is non-increasing in b1
    }
    return pts;
}

}  // namespace maccanon
