#include "maccanon/hull.hpp"

#include <cmath>
#include <numeric>

namespace maccanon {

std::optional<rvec> simplex_phase1(const rmat& a, const rvec& b, double tol) {
    int m = static_cast<int>(a.rows());
    int n = static_cast<int>(a.cols());

    // tableau: [structural | artificial | rhs], artificials form the basis
    rmat t(m, n + m + 1);
    for (int i = 0; i < m; ++i) {
        double sign = b(i) < 0.0 ? -1.0 : 1.0;
        t.row(i).head(n) = sign * a.row(i);
        t.row(i).segment(n, m).setZero();
        t(i, n + i) = 1.0;
        t(i, n + m) = sign * b(i);
    }
    std::vector<int> basis(static_cast<size_t>(m));
    std::iota(basis.begin(), basis.end(), n);

    // reduced costs for min sum(artificials): d_j = c_j - sum over rows with
    // artificial basis of t(i,j)
    rvec d = rvec::Zero(n + m);
    d.segment(n, m).setOnes();
    for (int i = 0; i < m; ++i) d -= t.row(i).head(n + m).transpose();
    double obj = -t.col(n + m).sum();  // negative phase-1 objective

    auto pivot = [&](int row, int col) {
        t.row(row) /= t(row, col);
        for (int i = 0; i < m; ++i)
            if (i != row && t(i, col) != 0.0) t.row(i) -= t(i, col) * t.row(row);
        double dc = d(col);
        if (dc != 0.0) {
            d -= dc * t.row(row).head(n + m).transpose();
            obj -= dc * t(row, n + m);
        }
        basis[static_cast<size_t>(row)] = col;
    };

    for (;;) {
        // Bland: smallest-index entering variable with negative reduced cost
        int enter = -1;
        for (int j = 0; j < n + m; ++j)
            if (d(j) < -tol) {
                enter = j;
                break;
            }
        if (enter < 0) break;

        int leave = -1;
        double best = 0.0;
        for (int i = 0; i < m; ++i) {
            if (t(i, enter) <= tol) continue;
            double ratio = t(i, n + m) / t(i, enter);
            if (leave < 0 || ratio < best - 1e-15 ||
                (std::abs(ratio - best) <= 1e-15 &&
                 basis[static_cast<size_t>(i)] < basis[static_cast<size_t>(leave)])) {
                leave = i;
                best = ratio;
            }
        }
        if (leave < 0) break;  // unbounded column; cannot reduce further
        pivot(leave, enter);
    }

    double scale = 1.0 + b.cwiseAbs().maxCoeff();
    if (-obj > tol * scale) return std::nullopt;  // artificials remain positive

    rvec x = rvec::Zero(n);
    for (int i = 0; i < m; ++i)
        if (basis[static_cast<size_t>(i)] < n)
            x(basis[static_cast<size_t>(i)]) = std::max(0.0, t(i, n + m));
    return x;
}

std::optional<rvec> timeshare_lp(const VertexSet& v, const rvec& b_min) {
    if (v.points.empty()) throw std::invalid_argument("timeshare_lp: empty vertex set");
    int k = static_cast<int>(v.points.size());
    int m = static_cast<int>(b_min.size());

    // variables: alpha (k), surplus s (m)
    // sum_j alpha_j b_j,u - s_u = b_min_u - 1e-9 ; sum alpha = 1
    rmat a = rmat::Zero(m + 1, k + m);
    rvec rhs(m + 1);
    for (int u = 0; u < m; ++u) {
        for (int j = 0; j < k; ++j) a(u, j) = v.points[static_cast<size_t>(j)](u);
        a(u, k + u) = -1.0;
        rhs(u) = b_min(u) - 1e-9;
    }
    a.row(m).head(k).setOnes();
    rhs(m) = 1.0;

    auto x = simplex_phase1(a, rhs);
    if (!x) return std::nullopt;
    rvec alpha = x->head(k).cwiseMax(0.0);
    alpha /= alpha.sum();
    return alpha;
}

MembershipResult fw_membership(const VertexSet& v, const rvec& target, double tol) {
    if (v.points.empty()) throw std::invalid_argument("fw_membership: empty vertex set");
    int k = static_cast<int>(v.points.size());

    // Fully corrective Frank-Wolfe (Wolfe's min-norm-point scheme) on the
    // shifted points q_j = v_j - target: the linear minimization oracle adds
    // one vertex per outer step, then the affine minor loop re-solves the
    // projection exactly over the active set. Finite termination for this
    // quadratic, unlike the plain 2/(t+2) schedule, which stalls far above
    // tol on skinny hulls.
    const double gap_tol = (tol / 4.0) * (tol / 4.0);
    std::vector<rvec> q;
    q.reserve(static_cast<size_t>(k));
    for (const auto& p : v.points) q.push_back(p - target);

    std::vector<int> active{0};
    for (int j = 1; j < k; ++j)
        if (q[static_cast<size_t>(j)].squaredNorm() < q[static_cast<size_t>(active[0])].squaredNorm())
            active[0] = j;
    rvec w = rvec::Ones(1);
    rvec x = q[static_cast<size_t>(active[0])];

    auto affine_solve = [&]() {
        // min ||Q u||^2 s.t. 1^T u = 1 over the active set (u unrestricted)
        int s = static_cast<int>(active.size());
        rmat kkt = rmat::Zero(s + 1, s + 1);
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j)
                kkt(i, j) = q[static_cast<size_t>(active[static_cast<size_t>(i)])].dot(
                    q[static_cast<size_t>(active[static_cast<size_t>(j)])]);
        kkt.row(s).head(s).setOnes();
        kkt.col(s).head(s).setOnes();
        rvec rhs = rvec::Zero(s + 1);
        rhs(s) = 1.0;
        rvec sol = kkt.fullPivLu().solve(rhs);
        return rvec(sol.head(s));
    };

    for (int outer = 0; outer < 4 * k + 16; ++outer) {
        // oracle: most-improving vertex for the gradient x
        int best = -1;
        double best_ip = x.squaredNorm() - gap_tol;
        for (int j = 0; j < k; ++j) {
            double ip = x.dot(q[static_cast<size_t>(j)]);
            if (ip < best_ip) {
                best_ip = ip;
                best = j;
            }
        }
        if (best < 0) break;  // x^T x <= min_j x^T q_j + gap_tol: optimal
        bool have = false;
        for (int a : active) have = have || a == best;
        if (!have) {
            active.push_back(best);
            w.conservativeResize(w.size() + 1);
            w(w.size() - 1) = 0.0;
        }

        for (int minor = 0; minor < 4 * k + 16; ++minor) {
            rvec u = affine_solve();
            if (u.minCoeff() > 1e-12) {
                w = u;
                break;
            }
            // step from w toward u until the first weight hits zero, drop it
            double theta = 1.0;
            for (int i = 0; i < u.size(); ++i)
                if (u(i) <= 1e-12 && w(i) - u(i) > 0.0)
                    theta = std::min(theta, w(i) / (w(i) - u(i)));
            w += theta * (u - w);
            for (int i = static_cast<int>(w.size()) - 1; i >= 0; --i) {
                if (w(i) > 1e-12) continue;
                active.erase(active.begin() + i);
                for (int j = i; j + 1 < w.size(); ++j) w(j) = w(j + 1);
                w.conservativeResize(w.size() - 1);
            }
            if (w.size() == 0) {  // numerical corner: restart from best vertex
                active = {best};
                w = rvec::Ones(1);
                break;
            }
        }
        w /= w.sum();
        x = rvec::Zero(target.size());
        for (size_t i = 0; i < active.size(); ++i)
            x += w(static_cast<Eigen::Index>(i)) * q[static_cast<size_t>(active[i])];
    }

    MembershipResult res;
    res.weights = rvec::Zero(k);
    for (size_t i = 0; i < active.size(); ++i)
        res.weights(active[i]) = w(static_cast<Eigen::Index>(i));
    res.distance = x.norm();
    res.inside = res.distance <= tol * (1.0 + target.norm());
    return res;
}

}  // namespace maccanon
