#include "maccanon/tonesolver.hpp"

#include <cmath>
#include <cstring>
#include <deque>
#include <limits>

namespace maccanon {

ToneProblem::ToneProblem(const ChannelSet& ch, int tone, const WeightVector& theta, rvec w_in)
    : H(ch.H[static_cast<size_t>(tone)]), sorted(theta.sorted), delta(theta.delta),
      w(std::move(w_in)), cb(ch.cb) {
    if (static_cast<int>(w.size()) != ch.num_users)
        throw ValidationError("ToneProblem: multiplier count mismatch");
    for (int u = 0; u < ch.num_users; ++u)
        if (!(w(u) >= 0.0)) throw ValidationError("ToneProblem: multipliers must be nonnegative");
}

int ToneProblem::packed_dim() const {
    int d = 0;
    for (const auto& h : H) d += 2 * static_cast<int>(h.cols() * h.cols());
    return d;
}

rvec pack_factors(const std::vector<cmat>& B) {
    int d = 0;
    for (const auto& b : B) d += 2 * static_cast<int>(b.size());
    rvec z(d);
    double* out = z.data();
    for (const auto& b : B) {
        // std::complex<double> is layout-compatible with double[2]
        std::memcpy(out, b.data(), sizeof(cplx) * static_cast<size_t>(b.size()));
        out += 2 * b.size();
    }
    return z;
}

std::vector<cmat> unpack_factors(const rvec& z, const ToneProblem& p) {
    std::vector<cmat> B;
    B.reserve(p.H.size());
    const double* in = z.data();
    for (const auto& h : p.H) {
        Eigen::Index lx = h.cols();
        cmat b(lx, lx);
        std::memcpy(b.data(), in, sizeof(cplx) * static_cast<size_t>(lx * lx));
        in += 2 * lx * lx;
        B.push_back(std::move(b));
    }
    return B;
}

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Cumulative covariances S_k = I + sum_{j<=k} Q_(j) in descending-theta order.
std::vector<cmat> cumulative_covs(const ToneProblem& p, const std::vector<cmat>& B) {
    int u = p.num_users();
    Eigen::Index ly = p.H.empty() ? 0 : p.H[0].rows();
    std::vector<cmat> s(static_cast<size_t>(u));
    cmat acc = cmat::Identity(ly, ly);
    for (int k = 0; k < u; ++k) {
        int user = p.sorted[static_cast<size_t>(k)];
        cmat hb = p.H[static_cast<size_t>(user)] * B[static_cast<size_t>(user)];
        acc += hb * hb.adjoint();
        s[static_cast<size_t>(k)] = acc;
    }
    return s;
}

// Per-user gradients with respect to the covariances, dL/dR_u (including the
// -w_u I term), evaluated at R = B B^H.
std::vector<cmat> covariance_gradients(const ToneProblem& p, const std::vector<cmat>& B) {
    int nu = p.num_users();
    std::vector<cmat> s = cumulative_covs(p, B);

    // C_k = sum_{j >= k} delta_j S_j^{-1}, accumulated from the back
    Eigen::Index ly = p.H.empty() ? 0 : p.H[0].rows();
    std::vector<cmat> c(static_cast<size_t>(nu));
    cmat acc = cmat::Zero(ly, ly);
    for (int k = nu - 1; k >= 0; --k) {
        if (p.delta(k) != 0.0) acc += p.delta(k) * inv_hpd(s[static_cast<size_t>(k)]);
        c[static_cast<size_t>(k)] = acc;
    }

    std::vector<cmat> grads(static_cast<size_t>(nu));
    for (int k = 0; k < nu; ++k) {
        int user = p.sorted[static_cast<size_t>(k)];
        const cmat& h = p.H[static_cast<size_t>(user)];
        cmat dR = (1.0 / (p.cb * kLn2)) * (h.adjoint() * c[static_cast<size_t>(k)] * h);
        dR.diagonal().array() -= p.w(user);
        grads[static_cast<size_t>(user)] = std::move(dR);
    }
    return grads;
}

}  // namespace

double tone_objective(const ToneProblem& p, const rvec& z) {
    std::vector<cmat> B = unpack_factors(z, p);
    std::vector<cmat> s = cumulative_covs(p, B);
    double obj = 0.0;
    for (int k = 0; k < p.num_users(); ++k)
        if (p.delta(k) != 0.0) obj += p.delta(k) * log2_det_hpd(s[static_cast<size_t>(k)]);
    obj /= p.cb;
    for (int u = 0; u < p.num_users(); ++u)
        obj -= p.w(u) * B[static_cast<size_t>(u)].squaredNorm();
    return obj;
}

rvec tone_gradient(const ToneProblem& p, const rvec& z) {
    std::vector<cmat> B = unpack_factors(z, p);
    std::vector<cmat> grads = covariance_gradients(p, B);
    for (size_t u = 0; u < grads.size(); ++u) grads[u] = 2.0 * (grads[u] * B[u]);
    return pack_factors(grads);
}

ToneSolution solve_tone(const ToneProblem& p, const std::optional<rvec>& warm,
                        const ToneSolverOptions& opts) {
    int nu = p.num_users();
    // Effective rate weight of user at sorted position k is theta_(k) = sum_{j>=k} delta_j.
    {
        double tail = 0.0;
        for (int k = nu - 1; k >= 0; --k) {
            tail += p.delta(k);
            int user = p.sorted[static_cast<size_t>(k)];
            if (tail > 0.0 && p.w(user) <= opts.w_floor) throw UnboundedToneError(user);
        }
    }

    rvec z;
    if (warm && warm->size() == p.packed_dim()) {
        z = *warm;
    } else {
        std::vector<cmat> B0;
        B0.reserve(p.H.size());
        for (const auto& h : p.H)
            B0.push_back(0.1 * cmat::Identity(h.cols(), h.cols()));
        z = pack_factors(B0);
    }

    // minimize f = -objective with L-BFGS two-loop recursion + Armijo backtracking;
    // overflowed trial points can fail the Cholesky inside the objective, which
    // must read as "infinitely bad", not abort the solve
    auto fval = [&](const rvec& x) {
        try {
            return -tone_objective(p, x);
        } catch (const std::runtime_error&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    auto fgrad = [&](const rvec& x) { return rvec(-tone_gradient(p, x)); };

    double f = fval(z);
    if (!std::isfinite(f) && warm) {  // unusable warm start: restart cold
        std::vector<cmat> B0;
        B0.reserve(p.H.size());
        for (const auto& h : p.H) B0.push_back(0.1 * cmat::Identity(h.cols(), h.cols()));
        z = pack_factors(B0);
        f = fval(z);
    }
    rvec g = fgrad(z);
    std::deque<rvec> ss, ys;
    std::deque<double> rhos;

    int it = 0;
    int total_it = 0;
    // Outer escape loop: B = 0 blocks are stationary for the factored problem
    // (grad is 2 dL/dR B) even when dL/dR has positive curvature left; after
    // each converged inner run, verify the covariance-space KKT conditions and
    // reopen any user whose dL/dR still has a positive eigenvalue.
    for (int attempt = 0; attempt < 1 + 4 * nu; ++attempt) {
        it = 0;
        for (; it < opts.max_iterations; ++it) {
            if (g.norm() <= opts.tol * (1.0 + std::abs(f))) break;

            // two-loop recursion
            rvec q = g;
            std::vector<double> alphas(ss.size());
            for (int i = static_cast<int>(ss.size()) - 1; i >= 0; --i) {
                alphas[static_cast<size_t>(i)] =
                    rhos[static_cast<size_t>(i)] * ss[static_cast<size_t>(i)].dot(q);
                q -= alphas[static_cast<size_t>(i)] * ys[static_cast<size_t>(i)];
            }
            if (!ss.empty()) {
                const rvec& y = ys.back();
                q *= ss.back().dot(y) / y.squaredNorm();
            }
            for (size_t i = 0; i < ss.size(); ++i) {
                double beta = rhos[i] * ys[i].dot(q);
                q += (alphas[i] - beta) * ss[i];
            }
            rvec dir = -q;
            double slope = g.dot(dir);
            if (slope >= 0.0) {  // not a descent direction; reset
                dir = -g;
                slope = -g.squaredNorm();
            }

            double t = 1.0;
            if (ss.empty()) {
                double gn = g.norm();
                if (gn > 1.0) t = 1.0 / gn;  // conservative first step
            }
            double f_new = f;
            rvec z_new;
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                z_new = z + t * dir;
                f_new = fval(z_new);
                if (std::isfinite(f_new) && f_new <= f + opts.armijo_c1 * t * slope) {
                    accepted = true;
                    break;
                }
                t *= opts.backtrack;
            }
            if (!accepted) break;  // step collapsed; treat current point as converged

            rvec g_new = fgrad(z_new);
            rvec s = z_new - z;
            rvec y = g_new - g;
            double sy = s.dot(y);
            if (sy > 1e-14 * s.norm() * y.norm()) {
                ss.push_back(s);
                ys.push_back(y);
                rhos.push_back(1.0 / sy);
                if (static_cast<int>(ss.size()) > opts.memory) {
                    ss.pop_front();
                    ys.pop_front();
                    rhos.pop_front();
                }
            }
            z = std::move(z_new);
            f = f_new;
            g = std::move(g_new);
        }
        total_it += it;

        // KKT in covariance space: dL/dR_u must be negative semidefinite
        std::vector<cmat> B = unpack_factors(z, p);
        std::vector<cmat> dR = covariance_gradients(p, B);
        bool escaped = false;
        for (int u = 0; u < nu && !escaped; ++u) {
            Eigen::SelfAdjointEigenSolver<cmat> es(dR[static_cast<size_t>(u)]);
            Eigen::Index top = es.eigenvalues().size() - 1;
            double lmax = es.eigenvalues()(top);
            if (lmax <= 1e-8 * (1.0 + p.w(u))) continue;

            // ascend along the top eigenvector of dL/dR_u, backtracking on s
            cvec v = es.eigenvectors().col(top);
            cmat r_u = B[static_cast<size_t>(u)] * B[static_cast<size_t>(u)].adjoint();
            for (double s = 1.0; s > 1e-12; s *= 0.25) {
                cmat r_try = r_u + s * (v * v.adjoint());
                Eigen::SelfAdjointEigenSolver<cmat> sq(r_try);
                cmat b_try = sq.eigenvectors() *
                             sq.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                             sq.eigenvectors().adjoint();
                std::vector<cmat> b_all = B;
                b_all[static_cast<size_t>(u)] = b_try;
                rvec z_try = pack_factors(b_all);
                double f_try = fval(z_try);
                if (std::isfinite(f_try) && f_try < f - 1e-16) {
                    z = std::move(z_try);
                    f = f_try;
                    escaped = true;
                    break;
                }
            }
        }
        if (!escaped) break;
        g = fgrad(z);
        ss.clear();
        ys.clear();
        rhos.clear();
    }

    ToneSolution sol;
    sol.B = unpack_factors(z, p);
    sol.R.reserve(sol.B.size());
    for (const auto& b : sol.B) sol.R.push_back(b * b.adjoint());
    sol.value = -f;
    sol.iterations = total_it;
    return sol;
}

}  // namespace maccanon
