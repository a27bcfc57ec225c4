#include "maccanon/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "maccanon/ellipsoid.hpp"
#include "maccanon/hull.hpp"
#include "maccanon/parallel.hpp"
#include "maccanon/tonesolver.hpp"

namespace maccanon {

rvec SolveReport::combined_rates() const {
    if (rates.empty()) return rvec();
    rvec c = rvec::Zero(rates[0].totals.size());
    for (size_t k = 0; k < rates.size(); ++k) {
        double a = alpha.size() ? alpha(static_cast<Eigen::Index>(k)) : 1.0;
        c += a * rates[k].totals;
    }
    return c;
}

namespace {

// Solves every tone's Lagrangian for the given weights/multipliers, reusing
// per-tone warm starts. Results land in index-ordered slots, so the outcome
// is independent of worker count.
struct ToneBank {
    const ChannelSet& ch;
    int workers;
    std::vector<std::optional<rvec>> warm;
    std::vector<ToneSolution> sols;

    explicit ToneBank(const ChannelSet& c, int wk)
        : ch(c), workers(wk), warm(static_cast<size_t>(c.num_tones)),
          sols(static_cast<size_t>(c.num_tones)) {}

    void solve(const WeightVector& wv, const rvec& w) {
        parallel_for(ch.num_tones, workers, [&](int n) {
            ToneProblem p(ch, n, wv, w);
            ToneSolution s = solve_tone(p, warm[static_cast<size_t>(n)]);
            warm[static_cast<size_t>(n)] = pack_factors(s.B);
            sols[static_cast<size_t>(n)] = std::move(s);
        });
    }

    CovariancePlan plan() const {
        CovariancePlan p;
        p.R.resize(sols.size());
        p.B.resize(sols.size());
        for (size_t n = 0; n < sols.size(); ++n) {
            p.R[n] = sols[n].R;
            p.B[n] = sols[n].B;
        }
        return p;
    }

    rvec energies() const {
        rvec e = rvec::Zero(ch.num_users);
        for (const auto& s : sols)
            for (int u = 0; u < ch.num_users; ++u)
                e(u) += std::real(s.R[static_cast<size_t>(u)].trace());
        return e;
    }

    double total_value() const {
        double v = 0.0;
        for (const auto& s : sols) v += s.value;
        return v;
    }
};

CovariancePlan rescale_per_user(CovariancePlan plan, const rvec& target, const rvec& actual) {
    for (int u = 0; u < target.size(); ++u) {
        if (actual(u) <= 1e-12 * target(u)) continue;  // slack zero-energy user
        double s = target(u) / actual(u);
        for (auto& tone : plan.R) tone[static_cast<size_t>(u)] *= s;
        for (auto& tone : plan.B) tone[static_cast<size_t>(u)] *= std::sqrt(s);
    }
    return plan;
}

CovariancePlan scale_all(CovariancePlan plan, double s) {
    for (auto& tone : plan.R)
        for (auto& m : tone) m *= s;
    for (auto& tone : plan.B)
        for (auto& m : tone) m *= std::sqrt(s);
    return plan;
}

constexpr double kMultiplierFloor = 1e-12;

}  // namespace

SolveReport max_rmac(const ChannelSet& ch, const rvec& energies, const rvec& theta,
                     const SolverOptions& opts) {
    ch.validate();
    int nu = ch.num_users;
    if (energies.size() != nu || (energies.array() <= 0.0).any())
        throw ValidationError("max_rmac: energies must be positive per user");
    if (theta.size() != nu || (theta.array() < 0.0).any() || theta.maxCoeff() <= 0.0)
        throw ValidationError("max_rmac: weights must be nonnegative, not all zero");

    WeightVector wv(theta);
    std::vector<int> order = greedy_order(wv);
    double max_theta = theta.maxCoeff();
    rvec w0 = opts.warm_dual && opts.warm_dual->size() == nu
                  ? opts.warm_dual->cwiseMax(0.0)
                  : rvec(rvec::Constant(nu, max_theta));
    Ellipsoid ell(w0, 100.0 * max_theta);
    double eps = opts.eps_out_rel * energies.norm();
    int cap = opts.max_outer_per_u2 * nu * nu;

    ToneBank bank(ch, opts.workers);
    SolveReport best;
    best.theta = theta;
    double best_obj = -1.0;
    bool converged = false;
    std::vector<double> trace;

    int iter = 0;
    for (; iter < cap; ++iter) {
        for (int u = 0; u < nu; ++u)
            if (ell.center()(u) < 0.0) ell.constraint_cut(u);

        // A zero multiplier with a positive rate weight makes the tone
        // subproblem unbounded: cut that coordinate upward instead.
        {
            int bad = -1;
            for (int u = 0; u < nu; ++u)
                if (theta(u) > 0.0 && ell.center()(u) <= kMultiplierFloor) {
                    bad = u;
                    break;
                }
            if (bad >= 0) {
                rvec g = rvec::Zero(nu);
                g(bad) = -1.0;
                ell.step(g);
                continue;
            }
        }

        rvec w = ell.center().cwiseMax(0.0);
        bank.solve(wv, w);
        rvec actual = bank.energies();
        rvec g = energies - actual;
        double metric = ell.stop_metric(g);
        trace.push_back(metric);

        // primal candidate: rescaled covariances are always budget-feasible
        CovariancePlan plan = rescale_per_user(bank.plan(), energies, actual);
        RateAllocation ra = rates_for_order(ch, plan, order);
        double obj = theta.dot(ra.totals);
        if (obj > best_obj) {
            best_obj = obj;
            best.plan = std::move(plan);
            best.rates = {std::move(ra)};
            best.w = w;
            best.energies = best.plan.energies(nu);
        }

        if (metric <= eps) {
            converged = true;
            ++iter;
            break;
        }
        if (g.norm() == 0.0) {  // budgets met exactly; dual optimum
            converged = true;
            ++iter;
            break;
        }
        ell.step(g);
    }

    best.flag = 1;
    best.alpha = rvec::Ones(1);
    best.trace = std::move(trace);
    best.outer_iterations = iter;
    best.objective = best_obj;
    if (!converged)
        throw NonConvergenceError("max_rmac: outer iteration cap exceeded", std::move(best));
    return best;
}

std::vector<std::vector<int>> cluster_users(const rvec& theta, double tau) {
    int nu = static_cast<int>(theta.size());
    std::vector<int> idx(static_cast<size_t>(nu));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return theta(a) > theta(b); });

    double tol = tau * (1.0 + (nu ? theta.maxCoeff() : 0.0));
    std::vector<std::vector<int>> clusters;
    for (int i = 0; i < nu; ++i) {
        // single-linkage on the sorted line: chain ties merge
        if (clusters.empty() ||
            theta(idx[static_cast<size_t>(i) - 1]) - theta(idx[static_cast<size_t>(i)]) > tol)
            clusters.emplace_back();
        clusters.back().push_back(idx[static_cast<size_t>(i)]);
    }
    for (auto& c : clusters) std::sort(c.begin(), c.end());
    return clusters;
}

std::vector<std::vector<int>> cluster_orderings(const std::vector<std::vector<int>>& clusters,
                                                int cap, std::uint64_t seed) {
    double count = 1.0;
    for (const auto& c : clusters) {
        for (size_t i = 2; i <= c.size(); ++i) count *= static_cast<double>(i);
        if (count > 1e9) break;
    }

    // decode lowest-theta cluster first: iterate clusters in reverse
    std::vector<std::vector<int>> rev(clusters.rbegin(), clusters.rend());

    std::vector<std::vector<int>> orders;
    if (count <= cap) {
        std::vector<std::vector<std::vector<int>>> perms;  // per cluster
        for (const auto& c : rev) {
            std::vector<std::vector<int>> p;
            std::vector<int> cur = c;
            do {
                p.push_back(cur);
            } while (std::next_permutation(cur.begin(), cur.end()));
            perms.push_back(std::move(p));
        }
        std::vector<size_t> pick(perms.size(), 0);
        for (;;) {
            std::vector<int> full;
            for (size_t c = 0; c < perms.size(); ++c)
                full.insert(full.end(), perms[c][pick[c]].begin(), perms[c][pick[c]].end());
            orders.push_back(std::move(full));
            size_t c = 0;
            for (; c < perms.size(); ++c) {
                if (++pick[c] < perms[c].size()) break;
                pick[c] = 0;
            }
            if (c == perms.size()) break;
        }
    } else {
        std::fprintf(stderr,
                     "maccanon: ordering count exceeds %d; sampling random orderings\n", cap);
        std::mt19937_64 eng(seed);
        for (int k = 0; k < cap; ++k) {
            std::vector<int> full;
            for (const auto& c : rev) {
                std::vector<int> perm = c;
                for (size_t i = perm.size(); i > 1; --i)
                    std::swap(perm[i - 1], perm[eng() % i]);
                full.insert(full.end(), perm.begin(), perm.end());
            }
            orders.push_back(std::move(full));
        }
    }
    return orders;
}

namespace {

struct OrderVertices {
    std::vector<RateAllocation> allocations;
    VertexSet vertices;
};

OrderVertices vertices_for_orders(const ChannelSet& ch, const CovariancePlan& plan,
                                  const std::vector<std::vector<int>>& orders) {
    OrderVertices out;
    for (const auto& o : orders) {
        RateAllocation ra = rates_for_order(ch, plan, o);
        out.vertices.points.push_back(ra.totals);
        out.vertices.orders.push_back(o);
        out.allocations.push_back(std::move(ra));
    }
    return out;
}

}  // namespace

SolveReport min_pmac(const ChannelSet& ch, const rvec& b_min, const rvec& w,
                     const SolverOptions& opts) {
    ch.validate();
    int nu = ch.num_users;
    if (b_min.size() != nu || (b_min.array() < 0.0).any())
        throw ValidationError("min_pmac: target rates must be nonnegative");
    if (w.size() != nu || (w.array() <= 0.0).any())
        throw ValidationError("min_pmac: energy weights must be strictly positive");

    SolveReport rep;
    rep.w = w;
    if (b_min.maxCoeff() <= 0.0) {
        rep.flag = 1;
        rep.plan = CovariancePlan::zero(ch);
        std::vector<int> id(static_cast<size_t>(nu));
        std::iota(id.begin(), id.end(), 0);
        rep.rates = {rates_for_order(ch, rep.plan, id)};
        rep.energies = rvec::Zero(nu);
        rep.theta = rvec::Zero(nu);
        rep.alpha = rvec::Ones(1);
        rep.objective = 0.0;
        return rep;
    }

    double max_w = w.maxCoeff();
    rvec th0 = opts.warm_dual && opts.warm_dual->size() == nu
                   ? opts.warm_dual->cwiseMax(0.0)
                   : rvec(rvec::Constant(nu, max_w));
    Ellipsoid ell(th0, 100.0 * max_w);
    double eps = opts.eps_out_rel * b_min.norm();
    int cap = opts.max_outer_per_u2 * nu * nu;

    ToneBank bank(ch, opts.workers);
    double best_dual = -1e300;
    rvec best_theta;
    CovariancePlan best_plan;
    bool converged = false;
    std::vector<double> trace;

    int iter = 0;
    for (; iter < cap; ++iter) {
        for (int u = 0; u < nu; ++u)
            if (ell.center()(u) < 0.0) ell.constraint_cut(u);
        rvec theta = ell.center().cwiseMax(0.0);
        WeightVector wv(theta);
        bank.solve(wv, w);

        CovariancePlan plan = bank.plan();
        rvec b_star = rates_for_order(ch, plan, greedy_order(wv)).totals;
        rvec g = b_star - b_min;
        double metric = ell.stop_metric(g);
        trace.push_back(metric);

        // dual value q(theta) = theta^T b_min - sum_n l_n^*
        double dual = theta.dot(b_min) - bank.total_value();
        if (dual > best_dual) {
            best_dual = dual;
            best_theta = theta;
            best_plan = std::move(plan);
        }

        if (metric <= eps) {
            converged = true;
            ++iter;
            break;
        }
        ell.step(g);
    }

    rep.theta = best_theta;
    rep.trace = std::move(trace);
    rep.outer_iterations = iter;
    if (!converged)
        throw NonConvergenceError("min_pmac: outer iteration cap exceeded", std::move(rep));

    auto clusters = cluster_users(best_theta, opts.tau_cluster);
    auto orders = cluster_orderings(clusters, opts.ordering_cap);

    // Feasibility at scale t: either one ordering dominates the targets or
    // the time-sharing LP over the ordering vertices admits them.
    auto evaluate = [&](double t) {
        return vertices_for_orders(ch, scale_all(best_plan, t), orders);
    };
    auto feasible = [&](const OrderVertices& ov) {
        for (const auto& p : ov.vertices.points)
            if (((p - b_min).array() >= -1e-9).all()) return true;
        // the LP's feasibility tolerance scales with the targets; demand that
        // the realized mixture itself dominates to an absolute margin
        auto a = timeshare_lp(ov.vertices, b_min);
        if (!a) return false;
        rvec mix = rvec::Zero(b_min.size());
        for (Eigen::Index k = 0; k < a->size(); ++k)
            mix += (*a)(k)*ov.vertices.points[static_cast<size_t>(k)];
        return ((mix - b_min).array() >= -1e-9).all();
    };

    // The dual converges to tolerance, not exactly; a minimal covariance
    // scale-up restores primal feasibility when the targets sit on the
    // boundary of the achieved polymatroid.
    double t = 1.0;
    OrderVertices ov = evaluate(t);
    if (!feasible(ov)) {
        double lo = 1.0, hi = 1.0 + 1e-8;
        bool found = false;
        while (hi <= 2.0) {
            ov = evaluate(hi);
            if (feasible(ov)) {
                found = true;
                break;
            }
            lo = hi;
            hi = 1.0 + 2.0 * (hi - 1.0);
        }
        if (!found) {
            rep.flag = 0;
            rep.plan = best_plan;
            rep.energies = best_plan.energies(nu);
            rep.alpha = rvec();
            rep.objective = 0.0;
            return rep;
        }
        while (hi - lo > 1e-12 * hi) {
            double mid = 0.5 * (lo + hi);
            OrderVertices mv = evaluate(mid);
            if (feasible(mv)) {
                hi = mid;
                ov = std::move(mv);
            } else {
                lo = mid;
            }
        }
        t = hi;
        ov = evaluate(t);
    }

    rep.plan = scale_all(best_plan, t);
    rep.energies = rep.plan.energies(nu);
    rep.objective = w.dot(rep.energies);

    // prefer a single dominating order
    int best_order = -1;
    double best_margin = -1e300;
    for (size_t k = 0; k < ov.vertices.points.size(); ++k) {
        double margin = (ov.vertices.points[k] - b_min).minCoeff();
        if (margin > best_margin) {
            best_margin = margin;
            best_order = static_cast<int>(k);
        }
    }
    if (best_margin >= -1e-9) {
        rep.flag = 1;
        rep.rates = {ov.allocations[static_cast<size_t>(best_order)]};
        rep.alpha = rvec::Ones(1);
        return rep;
    }

    auto alpha = timeshare_lp(ov.vertices, b_min);
    if (!alpha) {  // should not happen after the repair loop
        rep.flag = 0;
        return rep;
    }
    std::vector<RateAllocation> used;
    std::vector<double> av;
    for (Eigen::Index k = 0; k < alpha->size(); ++k) {
        if ((*alpha)(k) <= 1e-12) continue;
        used.push_back(ov.allocations[static_cast<size_t>(k)]);
        av.push_back((*alpha)(k));
    }
    rep.flag = used.size() > 1 ? 2 : 1;  // one surviving vertex is not time-sharing
    rep.rates = std::move(used);
    rep.alpha = Eigen::Map<rvec>(av.data(), static_cast<Eigen::Index>(av.size()));
    rep.alpha /= rep.alpha.sum();
    return rep;
}

SolveReport max_resmac(const ChannelSet& ch, double total_energy, const rvec& theta,
                       const SolverOptions& opts) {
    ch.validate();
    int nu = ch.num_users;
    if (!(total_energy > 0.0)) throw ValidationError("max_resmac: total energy must be positive");
    if (theta.size() != nu || (theta.array() < 0.0).any() || theta.maxCoeff() <= 0.0)
        throw ValidationError("max_resmac: weights must be nonnegative, not all zero");

    WeightVector wv(theta);
    std::vector<int> order = greedy_order(wv);
    ToneBank bank(ch, opts.workers);
    std::vector<std::pair<double, double>> probes;  // (lambda, total energy)
    std::vector<double> trace;

    auto total_at = [&](double lam) {
        bank.solve(wv, rvec::Constant(nu, lam));
        double e = bank.energies().sum();
        // total energy must be non-increasing in lambda
        for (const auto& [l, v] : probes) {
            double slack = 1e-6 * (1.0 + std::max(v, e));
            if ((lam > l && e > v + slack) || (lam < l && e < v - slack))
                throw std::runtime_error("max_resmac: energy not monotone in lambda");
        }
        probes.emplace_back(lam, e);
        return e;
    };

    double lo = 1e-8, hi = 10.0;
    double e_lo = total_at(lo);
    int expand = 0;
    while (e_lo < total_energy) {
        if (++expand > 60 || lo / 10.0 <= kMultiplierFloor)
            throw std::runtime_error("max_resmac: bracket expansion failed at lambda_min");
        lo /= 10.0;
        e_lo = total_at(lo);
    }
    double e_hi = total_at(hi);
    expand = 0;
    while (e_hi > total_energy) {
        if (++expand > 60)
            throw std::runtime_error("max_resmac: bracket expansion failed at lambda_max");
        hi *= 10.0;
        e_hi = total_at(hi);
    }

    double lam = hi, e_hat = e_hi;
    while (std::log(hi / lo) > 1e-10) {
        lam = std::sqrt(lo * hi);
        e_hat = total_at(lam);
        trace.push_back(std::abs(e_hat - total_energy) / total_energy);
        if (std::abs(e_hat - total_energy) <= 1e-4 * total_energy) break;
        if (e_hat > total_energy)
            lo = lam;
        else
            hi = lam;
    }

    SolveReport rep;
    rep.flag = 1;
    rep.plan = scale_all(bank.plan(), e_hat > 0.0 ? total_energy / e_hat : 1.0);
    rep.rates = {rates_for_order(ch, rep.plan, order)};
    rep.energies = rep.plan.energies(nu);
    rep.w = rvec::Constant(nu, lam);
    rep.theta = theta;
    rep.alpha = rvec::Ones(1);
    rep.trace = std::move(trace);
    rep.outer_iterations = static_cast<int>(probes.size());
    rep.objective = theta.dot(rep.rates[0].totals);
    return rep;
}

}  // namespace maccanon
