#ifndef MSG_MINNORM_HPP
#define MSG_MINNORM_HPP

#include "msg/core.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <vector>

namespace msg {

/// Output of the simplex-constrained projection of the origin onto co{columns of G}.
struct ProjectionResult {
    Vector lambda;   // simplex weights, length m
    Vector g;        // G * lambda
    Vector d;        // D * lambda
    double norm_g = 0.0;
};

namespace detail {

// Affine minimizer of ||V w|| over sum(w) = 1 restricted to the support columns.
// Solves (ee' + V'V) z = e, then normalizes; singular systems get a small ridge.
inline Vector affine_weights(const Matrix& V) {
    const int k = static_cast<int>(V.cols());
    Matrix A = Matrix::Ones(k, k) + V.transpose() * V;
    Vector e = Vector::Ones(k);
    Vector z = A.ldlt().solve(e);
    double s = z.sum();
    if (!all_finite(z) || std::abs(s) < 1e-300) {
        A.diagonal().array() += 1e-14;
        z = A.ldlt().solve(e);
        s = z.sum();
        if (!all_finite(z) || std::abs(s) < 1e-300)
            throw ContractViolation("project_origin: degenerate affine subproblem");
    }
    return z / s;
}

} // namespace detail

/// Exact (to tol) projection of the origin onto the convex hull of the
/// columns of G, by the Wolfe min-norm-point active-set method. Also maps the
/// optimal weights through D. Deterministic: ties pick the smallest index.
inline ProjectionResult project_origin(const Matrix& G, const Matrix& D, double tol = 1e-12) {
    const int n = static_cast<int>(G.rows());
    const int m = static_cast<int>(G.cols());
    if (m < 1) throw ContractViolation("project_origin: need at least one generator column");
    if (D.cols() != m) throw ContractViolation("project_origin: G and D column counts differ");
    if (!all_finite(G) || !all_finite(D))
        throw ContractViolation("project_origin: non-finite entries");

    double scale2 = 0.0;
    for (int i = 0; i < m; ++i) scale2 = std::max(scale2, G.col(i).squaredNorm());
    // entry tolerance: requested tol plus a machine-level floor at this scale
    const double eps_entry = 0.5 * tol + 64.0 * std::numeric_limits<double>::epsilon() * scale2;
    const double eps_weight = 1e-12;

    // start from the shortest column
    int start = 0;
    for (int i = 1; i < m; ++i)
        if (G.col(i).squaredNorm() < G.col(start).squaredNorm()) start = i;

    std::vector<int> support{start};
    std::vector<double> weights{1.0};
    Vector x = G.col(start);

    const long max_major = 1000 + 100L * m;
    for (long iter = 0; iter < max_major; ++iter) {
        // entering column: most violating vertex of the variational inequality
        const double xx = x.squaredNorm();
        int enter = 0;
        double best = kInf;
        for (int i = 0; i < m; ++i) {
            double dot = x.dot(G.col(i));
            if (dot < best) {
                best = dot;
                enter = i;
            }
        }
        if (best >= xx - eps_entry) break;
        if (std::find(support.begin(), support.end(), enter) != support.end()) break;

        support.push_back(enter);
        weights.push_back(0.0);

        const double xx_before = xx;

        // minor cycle: pull x to the min-norm point of the current corral
        for (;;) {
            Matrix V(n, support.size());
            for (size_t i = 0; i < support.size(); ++i) V.col(i) = G.col(support[i]);
            Vector alpha = detail::affine_weights(V);

            if (alpha.minCoeff() > eps_weight) {
                weights.assign(alpha.data(), alpha.data() + alpha.size());
                x = V * alpha;
                break;
            }

            // step toward alpha until the first weight hits zero
            double theta = 1.0;
            size_t hit = support.size();
            for (size_t i = 0; i < support.size(); ++i) {
                if (alpha[i] <= eps_weight) {
                    double t = weights[i] / (weights[i] - alpha[i]);
                    if (t < theta) {
                        theta = t;
                        hit = i;
                    }
                }
            }
            for (size_t i = 0; i < support.size(); ++i)
                weights[i] = (1.0 - theta) * weights[i] + theta * alpha[i];
            if (hit < support.size()) weights[hit] = 0.0;

            for (size_t i = support.size(); i-- > 0;) {
                if (weights[i] <= 0.0) {
                    support.erase(support.begin() + i);
                    weights.erase(weights.begin() + i);
                }
            }
            if (support.size() == 1) {
                x = G.col(support[0]);
                weights[0] = 1.0;
                break;
            }
        }

        if (x.squaredNorm() >= xx_before * (1.0 - 1e-15)) break;  // numeric stall
    }

    ProjectionResult out;
    out.lambda = Vector::Zero(m);
    for (size_t i = 0; i < support.size(); ++i) out.lambda[support[i]] = weights[i];
    // renormalize the simplex weights exactly
    double sum = out.lambda.sum();
    if (sum > 0) out.lambda /= sum;
    out.g = G * out.lambda;
    out.d = D * out.lambda;
    out.norm_g = out.g.norm();
    return out;
}

/// Checks simplex feasibility of lambda, consistency g = G*lambda, and the
/// projection-theorem inequality g'(v - g) >= -tol for every column v.
inline bool verify_projection(const ProjectionResult& result, const Matrix& G, double tol = 1e-12) {
    const int m = static_cast<int>(G.cols());
    if (result.lambda.size() != m) return false;
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
        if (result.lambda[i] < -tol) return false;
        sum += result.lambda[i];
    }
    if (std::abs(sum - 1.0) > std::max(tol, 1e-12)) return false;

    double col_scale = 0.0;
    for (int i = 0; i < m; ++i) col_scale = std::max(col_scale, G.col(i).norm());
    if ((result.g - G * result.lambda).lpNorm<Eigen::Infinity>() > tol * (1.0 + col_scale))
        return false;

    const double gg = result.g.squaredNorm();
    for (int i = 0; i < m; ++i)
        if (result.g.dot(G.col(i)) - gg < -tol) return false;
    return true;
}

} // namespace msg

#endif // MSG_MINNORM_HPP
