#include "psos/trust_region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "psos/errors.hpp"

namespace psos {

namespace {

// Unit vector inside span(basis columns), as close to `hint` as possible.
Eigen::VectorXd eigenspace_direction(const Eigen::MatrixXd& basis, const Eigen::VectorXd& hint) {
    if (hint.size() == basis.rows()) {
        Eigen::VectorXd proj = basis * (basis.transpose() * hint);
        const double norm = proj.norm();
        if (norm > 1e-12) return proj / norm;
    }
    Eigen::VectorXd u = basis.col(0);
    Eigen::Index k = 0;
    u.cwiseAbs().maxCoeff(&k);
    return u(k) < 0 ? Eigen::VectorXd(-u) : u;
}

}  // namespace

SphereQuadraticSolution maximize_on_sphere(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                                           const Eigen::VectorXd& hint) {
    const Eigen::Index r = g.size();
    if (H.rows() != r || H.cols() != r || r == 0) throw DimensionError("sphere subproblem size mismatch");
    if (!H.allFinite() || !g.allFinite()) throw StructureError("non-finite sphere subproblem input");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    const Eigen::VectorXd d = eig.eigenvalues();  // ascending
    const Eigen::MatrixXd& Q = eig.eigenvectors();
    const Eigen::VectorXd gamma = Q.transpose() * g;

    const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
    const double gnorm = g.norm();
    const double dmin = d(0);

    Eigen::Index bottom = 1;
    while (bottom < r && d(bottom) - dmin <= 1e-12 * scale) ++bottom;

    double bottom_sq = 0.0;
    for (Eigen::Index i = 0; i < bottom; ++i) bottom_sq += gamma(i) * gamma(i);

    SphereQuadraticSolution out;

    // Hard case: g (numerically) orthogonal to the bottom eigenspace.
    if (std::sqrt(bottom_sq) <= 1e-13 * std::max(1.0, gnorm)) {
        Eigen::VectorXd rest = Eigen::VectorXd::Zero(r);
        for (Eigen::Index i = bottom; i < r; ++i) rest += (gamma(i) / (d(i) - dmin)) * Q.col(i);
        const double rest_sq = rest.squaredNorm();
        if (rest_sq <= 1.0) {
            const Eigen::MatrixXd basis = Q.leftCols(bottom);
            Eigen::VectorXd u = eigenspace_direction(basis, hint);
            const double tau = std::sqrt(std::max(0.0, 1.0 - rest_sq));
            if (hint.size() == r && u.dot(hint) < 0.0) u = -u;
            out.x = rest + tau * u;
            out.multiplier = -dmin;
            out.secular_residual = std::abs(out.x.norm() - 1.0);
            out.hard_case = true;
            out.x.normalize();
            return out;
        }
    }

    auto norm_at = [&](double mu) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < r; ++i) {
            const double q = gamma(i) / (d(i) + mu);
            s += q * q;
        }
        return std::sqrt(s);
    };

    // phi(lo) >= 1 >= phi(hi) with phi(mu) = ||x(mu)||.
    double lo = -dmin + std::sqrt(bottom_sq);
    double hi = -dmin + gnorm;
    double mu = hi;
    double xn = norm_at(mu);
    for (int iter = 0; iter < 200; ++iter) {
        if (std::abs(xn - 1.0) <= 1e-14) break;
        if (xn > 1.0) {
            lo = mu;
        } else {
            hi = mu;
        }
        if (hi - lo <= 1e-15 * std::max(1.0, std::abs(mu))) break;
        // Newton on psi(mu) = 1/||x(mu)|| - 1, which is close to linear in mu.
        double dsum = 0.0;
        for (Eigen::Index i = 0; i < r; ++i) {
            const double den = d(i) + mu;
            dsum += gamma(i) * gamma(i) / (den * den * den);
        }
        const double psi = 1.0 / xn - 1.0;
        const double dpsi = dsum / (xn * xn * xn);
        double next = dpsi > 0.0 ? mu - psi / dpsi : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        mu = next;
        xn = norm_at(mu);
    }

    Eigen::VectorXd y(r);
    for (Eigen::Index i = 0; i < r; ++i) y(i) = gamma(i) / (d(i) + mu);
    out.x = Q * y;
    out.multiplier = mu;
    out.secular_residual = std::abs(out.x.norm() - 1.0);
    out.x.normalize();
    return out;
}

}  // namespace psos
