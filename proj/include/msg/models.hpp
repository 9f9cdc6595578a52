#ifndef MSG_MODELS_HPP
#define MSG_MODELS_HPP

#include "msg/core.hpp"
#include "msg/oracle.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace msg {

/// Local models m^{F_i}, i = 1..p, sharing one interpolation set around a
/// common center. Hessians empty means every model is linear.
struct ComponentModelSet {
    Vector center;
    double radius = 0.0;
    Vector constants;               // p
    Matrix gradients;               // n x p, column i holds the gradient of model i
    std::vector<Matrix> hessians;   // p symmetric n x n blocks, or empty
    std::vector<Vector> interpolation_points;

    int dim_in() const { return static_cast<int>(center.size()); }
    int dim_out() const { return static_cast<int>(constants.size()); }
    bool has_curvature() const { return !hessians.empty(); }

    double value(int i, const Vector& x) const {
        Vector s = x - center;
        double v = constants[i] + gradients.col(i).dot(s);
        if (has_curvature()) v += 0.5 * s.dot(hessians[i] * s);
        return v;
    }

    /// M(x): all component model values.
    Vector value_all(const Vector& x) const {
        Vector out(dim_out());
        for (int i = 0; i < dim_out(); ++i) out[i] = value(i, x);
        return out;
    }
};

struct ModelBuildOptions {
    double pivot_threshold = 1e-4;  // on radius-normalized pivots
    bool quadratic = false;         // min-Frobenius-norm curvature when points allow
};

namespace detail {

// Residual of v against an orthonormal list (modified Gram-Schmidt pass).
inline Vector orth_residual(const std::vector<Vector>& basis, Vector v) {
    for (const Vector& q : basis) v -= q.dot(v) * q;
    return v;
}

struct PoisedSet {
    std::vector<Vector> directions;  // unit-radius coordinates, size n
    std::vector<Vector> points;      // the actual interpolation points (excluding center)
};

// Greedy pivoted selection: best in-ball history directions first, coordinate
// steps of length radius when no candidate clears the pivot threshold.
inline PoisedSet select_points(BlackBoxMap& map, const Vector& center, double radius,
                               double threshold) {
    const int n = map.dimension_in();
    std::vector<Vector> candidates;
    for (const auto& [y, Fy] : map.history()) {
        double dist = (y - center).norm();
        if (dist > 0.0 && dist <= radius) candidates.push_back(y);
    }
    std::vector<bool> used(candidates.size(), false);

    PoisedSet out;
    std::vector<Vector> basis;  // orthonormal span of chosen directions
    for (int slot = 0; slot < n; ++slot) {
        int best = -1;
        double best_pivot = threshold;
        Vector best_res;
        for (size_t c = 0; c < candidates.size(); ++c) {
            if (used[c]) continue;
            Vector v = (candidates[c] - center) / radius;
            Vector r = orth_residual(basis, v);
            double pivot = r.norm();
            if (pivot > best_pivot) {
                best_pivot = pivot;
                best = static_cast<int>(c);
                best_res = r;
            }
        }
        if (best >= 0) {
            used[best] = true;
            out.directions.push_back((candidates[best] - center) / radius);
            out.points.push_back(candidates[best]);
            basis.push_back(best_res / best_res.norm());
            continue;
        }
        // coordinate completion
        int best_j = -1;
        double best_sign = 1.0;
        double best_cpivot = 0.0;
        Vector best_cres;
        for (int j = 0; j < n; ++j) {
            for (double sign : {1.0, -1.0}) {
                Vector v = Vector::Zero(n);
                v[j] = sign;
                Vector r = orth_residual(basis, v);
                double pivot = r.norm();
                if (pivot > best_cpivot + 1e-15) {
                    best_cpivot = pivot;
                    best_j = j;
                    best_sign = sign;
                    best_cres = r;
                }
            }
        }
        if (best_j < 0 || best_cpivot < threshold)
            throw ModelBuildFault("build_models: cannot complete an affinely independent set");
        Vector v = Vector::Zero(n);
        v[best_j] = best_sign;
        Vector y = center + radius * v;
        if ((y - center).norm() == 0.0)
            throw ModelBuildFault("build_models: radius below representable resolution");
        out.directions.push_back(v);
        out.points.push_back(y);
        basis.push_back(best_cres / best_cres.norm());
    }
    return out;
}

// Minimum-Frobenius-norm quadratic fit through the given points (center first).
// Returns false when the KKT system is too ill conditioned to trust.
inline bool mfn_fit(const Vector& center, double radius, const std::vector<Vector>& points,
                    const std::vector<Vector>& values, ComponentModelSet& cm) {
    const int n = static_cast<int>(center.size());
    const int p = static_cast<int>(values[0].size());
    const int q = static_cast<int>(points.size());

    Matrix U(q, n);  // scaled displacements
    for (int t = 0; t < q; ++t) U.row(t) = (points[t] - center).transpose() / radius;

    Matrix Phi(q, q);
    for (int s = 0; s < q; ++s)
        for (int t = 0; t < q; ++t) {
            double dot = U.row(s).dot(U.row(t));
            Phi(s, t) = 0.5 * dot * dot;
        }
    Matrix L(q, n + 1);
    L.col(0).setOnes();
    L.rightCols(n) = U;

    Matrix KKT = Matrix::Zero(q + n + 1, q + n + 1);
    KKT.topLeftCorner(q, q) = Phi;
    KKT.topRightCorner(q, n + 1) = L;
    KKT.bottomLeftCorner(n + 1, q) = L.transpose();

    Eigen::FullPivLU<Matrix> lu(KKT);
    if (!lu.isInvertible()) return false;

    cm.constants.resize(p);
    cm.gradients.resize(n, p);
    cm.hessians.assign(p, Matrix::Zero(n, n));
    for (int i = 0; i < p; ++i) {
        Vector rhs = Vector::Zero(q + n + 1);
        for (int t = 0; t < q; ++t) rhs[t] = values[t][i];
        Vector sol = lu.solve(rhs);
        if (!all_finite(sol)) return false;
        cm.constants[i] = sol[q];
        cm.gradients.col(i) = sol.segment(q + 1, n) / radius;
        Matrix H = Matrix::Zero(n, n);
        for (int t = 0; t < q; ++t) H += sol[t] * (U.row(t).transpose() * U.row(t));
        cm.hessians[i] = H / (radius * radius);
    }
    return true;
}

} // namespace detail

/// Builds p interpolation models of the components of F on B(center; radius),
/// reusing ledger points inside the ball and spending fresh evaluations of F
/// only to complete the geometry. All components share one interpolation set.
inline ComponentModelSet build_models(BlackBoxMap& map, const Vector& center, double radius,
                                      const ModelBuildOptions& options = {}) {
    if (!(radius > 0)) throw ContractViolation("build_models: radius must be positive");
    const int n = map.dimension_in();
    const int p = map.dimension_out();

    ComponentModelSet cm;
    cm.center = center;
    cm.radius = radius;

    Vector f_center = map.evaluate(center);
    detail::PoisedSet ps = detail::select_points(map, center, radius, options.pivot_threshold);

    Matrix A(n, n);  // rows are the unit-radius directions
    Matrix B(n, p);
    for (int t = 0; t < n; ++t) {
        A.row(t) = ps.directions[t].transpose();
        Vector f_t = map.evaluate(ps.points[t]);
        B.row(t) = (f_t - f_center).transpose();
    }
    Eigen::PartialPivLU<Matrix> lu(A);
    Matrix gradients = lu.solve(B) / radius;  // n x p
    if (!all_finite(gradients)) throw ModelBuildFault("build_models: singular interpolation system");

    cm.constants = f_center;
    cm.gradients = gradients;
    cm.interpolation_points.push_back(center);
    for (const Vector& y : ps.points) cm.interpolation_points.push_back(y);

    if (options.quadratic) {
        // gather every cached in-ball point not already used, capped at the
        // quadratic-basis size
        std::vector<Vector> pts = cm.interpolation_points;
        std::vector<Vector> vals;
        vals.push_back(f_center);
        for (const Vector& y : ps.points) vals.push_back(map.evaluate(y));
        const size_t cap = static_cast<size_t>((n + 1) * (n + 2) / 2);
        for (const auto& [y, Fy] : map.history()) {
            if (pts.size() >= cap) break;
            if ((y - center).norm() > radius) continue;
            bool dup = false;
            for (const Vector& q : pts)
                if ((q - y).norm() == 0.0) {
                    dup = true;
                    break;
                }
            if (!dup) {
                pts.push_back(y);
                vals.push_back(Fy);
            }
        }
        if (pts.size() >= static_cast<size_t>(n + 2)) {
            ComponentModelSet quad = cm;
            if (detail::mfn_fit(center, radius, pts, vals, quad)) {
                quad.interpolation_points = pts;
                for (Matrix& H : quad.hessians) H = 0.5 * (H + H.transpose());
                return quad;
            }
        }
    }
    return cm;
}

/// Gradient matrix at the center: column i is the gradient of model i.
inline Matrix model_jacobian(const ComponentModelSet& cm) { return cm.gradients; }

/// Sum of model Hessian spectral norms; zero for linear model sets.
inline double hessian_bound(const ComponentModelSet& cm) {
    if (!cm.has_curvature()) return 0.0;
    double total = 0.0;
    for (const Matrix& H : cm.hessians) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
        total += eig.eigenvalues().cwiseAbs().maxCoeff();
    }
    return total;
}

/// Weighted combination sum_i d_i m^{F_i} of one model set; its gradient at
/// the center is the generator-hull element the weights came from.
struct MasterModel {
    Vector weights;                     // d
    const ComponentModelSet* base = nullptr;
    Vector gradient_at_center;          // gradients * d
};

inline MasterModel make_master_model(const ComponentModelSet& cm, const Vector& d) {
    if (d.size() != cm.dim_out())
        throw ContractViolation("make_master_model: weight length must equal p");
    MasterModel mm;
    mm.weights = d;
    mm.base = &cm;
    mm.gradient_at_center = cm.gradients * d;
    return mm;
}

inline double master_model_value(const MasterModel& mm, const Vector& x) {
    double v = 0.0;
    for (int i = 0; i < mm.base->dim_out(); ++i) v += mm.weights[i] * mm.base->value(i, x);
    return v;
}

/// sum_i d_i H_i; zero matrix for linear model sets.
inline Matrix master_model_hessian(const MasterModel& mm) {
    const int n = mm.base->dim_in();
    Matrix H = Matrix::Zero(n, n);
    if (mm.base->has_curvature())
        for (int i = 0; i < mm.base->dim_out(); ++i) H += mm.weights[i] * mm.base->hessians[i];
    return H;
}

} // namespace msg

#endif // MSG_MODELS_HPP
