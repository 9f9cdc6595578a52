#ifndef MSG_TRSTEP_HPP
#define MSG_TRSTEP_HPP

#include "msg/core.hpp"
#include "msg/models.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace msg {

enum class StepSource { subproblem, fallback };

struct StepCandidate {
    Vector step;
    double predicted_decrease = 0.0;  // <M(x) - M(x+s), d>, model values only
    StepSource source = StepSource::subproblem;
};

/// Scaled steepest-descent step -delta * g / ||g||.
inline Vector fallback_step(const Vector& g, double delta) {
    double nrm = g.norm();
    if (!(nrm > 0)) throw ContractViolation("fallback_step: zero gradient");
    if (!(delta > 0)) throw ContractViolation("fallback_step: radius must be positive");
    return (-delta / nrm) * g;
}

namespace detail {

// Minimize g's + 0.5 s'Hs over ||s|| <= delta via the secular equation on the
// eigenbasis of H. Exact to root-finder tolerance, hard case included.
inline Vector quadratic_tr_step(const Matrix& H, const Vector& g, double delta) {
    const int n = static_cast<int>(g.size());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(H);
    const Vector lam = eig.eigenvalues();
    const Matrix Q = eig.eigenvectors();
    const Vector a = Q.transpose() * g;
    const double lam_min = lam[0];

    auto coeffs_for = [&](double mu) {
        Vector c(n);
        for (int i = 0; i < n; ++i) {
            double denom = lam[i] + mu;
            c[i] = denom != 0.0 ? -a[i] / denom : 0.0;
        }
        return c;
    };

    // interior solution when H is positive definite
    if (lam_min > 0) {
        Vector c = coeffs_for(0.0);
        if (c.norm() <= delta) return Q * c;
    }

    const double mu_floor = std::max(0.0, -lam_min);
    const double scale = std::max({1.0, std::abs(lam_min), std::abs(lam[n - 1])});

    // hard case: no gradient mass on the leftmost eigenspace and the
    // pseudo-step at the floor is interior
    bool leftmost_clear = true;
    for (int i = 0; i < n; ++i)
        if (lam[i] <= lam_min + 1e-10 * scale && std::abs(a[i]) > 1e-10 * g.norm())
            leftmost_clear = false;
    if (lam_min <= 0 && leftmost_clear) {
        Vector c(n);
        for (int i = 0; i < n; ++i) {
            double denom = lam[i] + mu_floor;
            c[i] = std::abs(denom) > 1e-14 * scale ? -a[i] / denom : 0.0;
        }
        double nrm = c.norm();
        if (nrm <= delta) {
            double tau = std::sqrt(std::max(0.0, delta * delta - nrm * nrm));
            return Q * c + tau * Q.col(0);
        }
    }

    // secular iteration on phi(mu) = 1/||s(mu)|| - 1/delta, safeguarded Newton
    double lo = mu_floor, hi = mu_floor + std::max(1.0, std::abs(lam_min)) ;
    while (coeffs_for(hi).norm() > delta && hi < 1e300) {
        lo = hi;
        hi *= 4.0;
    }
    double mu = 0.5 * (lo + hi);
    Vector c = coeffs_for(mu);
    for (int iter = 0; iter < 200; ++iter) {
        double nrm = c.norm();
        if (std::abs(nrm - delta) <= 1e-13 * delta) break;
        if (nrm > delta)
            lo = mu;
        else
            hi = mu;
        // Newton update on 1/||s||, fall back to bisection outside the bracket
        double dnorm_dmu = 0.0;
        for (int i = 0; i < n; ++i) {
            double denom = lam[i] + mu;
            if (denom != 0.0) dnorm_dmu += a[i] * a[i] / (denom * denom * denom);
        }
        dnorm_dmu = -dnorm_dmu / std::max(nrm, 1e-300);
        double phi = 1.0 / std::max(nrm, 1e-300) - 1.0 / delta;
        double dphi = -dnorm_dmu / std::max(nrm * nrm, 1e-300);
        double mu_newton = dphi != 0.0 ? mu - phi / dphi : mu;
        mu = (mu_newton > lo && mu_newton < hi) ? mu_newton : 0.5 * (lo + hi);
        c = coeffs_for(mu);
    }
    return Q * c;
}

} // namespace detail

/// Trial step for the trust-region subproblem on the master model. Linear
/// master models get the closed-form boundary step; quadratic ones get the
/// secular-equation solve. Never worse than the boundary Cauchy point.
inline Vector solve_subproblem(const MasterModel& mm, double delta) {
    if (!(delta > 0)) throw ContractViolation("solve_subproblem: radius must be positive");
    const Vector& g = mm.gradient_at_center;
    const int n = static_cast<int>(g.size());
    const double gnorm = g.norm();

    Matrix H = master_model_hessian(mm);
    const bool curved = mm.base->has_curvature() && H.lpNorm<Eigen::Infinity>() > 0;

    if (!curved) {
        if (gnorm == 0.0) return Vector::Zero(n);
        return fallback_step(g, delta);
    }
    if (gnorm == 0.0 && H.lpNorm<Eigen::Infinity>() == 0.0) return Vector::Zero(n);

    Vector s = detail::quadratic_tr_step(H, g, delta);
    if (s.norm() > delta) s *= delta / s.norm();

    if (gnorm > 0) {
        auto q = [&](const Vector& v) { return g.dot(v) + 0.5 * v.dot(H * v); };
        Vector cauchy = fallback_step(g, delta);
        if (q(cauchy) < q(s)) s = cauchy;
    }
    return s;
}

/// The decrease test on the d-weighted model values:
///   <M(x) - M(x+s), d> >= (kappa_d / 2) ||g|| min{delta, ||g|| / (L_h kappa_H)}.
inline bool sufficient_decrease_ok(const Vector& M_at_center, const Vector& M_at_trial,
                                   const Vector& d, double g_norm, double delta, double kappa_d,
                                   double lh_kappa_h) {
    if (!(kappa_d > 0 && kappa_d < 1))
        throw ContractViolation("sufficient_decrease_ok: kappa_d must lie in (0,1)");
    if (!(lh_kappa_h > 0))
        throw ContractViolation("sufficient_decrease_ok: L_h kappa_H estimate must be positive");
    double lhs = (M_at_center - M_at_trial).dot(d);
    double rhs = 0.5 * kappa_d * g_norm * std::min(delta, g_norm / lh_kappa_h);
    return lhs >= rhs;
}

} // namespace msg

#endif // MSG_TRSTEP_HPP
