#ifndef MSG_SAMPLING_HPP
#define MSG_SAMPLING_HPP

#include "msg/core.hpp"
#include "msg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace msg {

/// Sample-set strategy: current image only, or current image plus all cached
/// in-ball images.
enum class Variant { MSG1, MSG2 };

/// Slack applied to the strict pair-search and obtuseness inequalities.
inline double pair_tolerance(double h_fx, double h_fxs) {
    return 1e-10 * (1.0 + std::abs(h_fx) + std::abs(h_fxs));
}

/// Sample set Z with per-sample active index sets and the assembled
/// generator matrices. Column order: sample insertion order, then ascending
/// selection index.
struct GeneratorState {
    std::vector<Vector> samples;
    std::vector<std::vector<int>> active_sets;
    std::vector<double> alphas;  // segment parameter a sample was taken at; NaN for direct images
    Matrix D;                    // p x m, gradients of active selections
    Matrix G;                    // n x m, jac * D
    std::vector<std::pair<int, int>> pair_index;  // column -> (sample position, selection index)

    bool contains(const Vector& z) const {
        for (const Vector& s : samples)
            if (s.size() == z.size() && (s - z).norm() == 0.0) return true;
        return false;
    }

    /// Deduplicated insert; computes the sample's active set on entry.
    bool add_sample(const SelectionOracle& oracle, const Vector& z, const ActivityQuery& q,
                    double alpha = kNaN) {
        if (contains(z)) return false;
        samples.push_back(z);
        active_sets.push_back(active_indices(oracle, z, q));
        alphas.push_back(alpha);
        return true;
    }

    /// Union of active indices over all samples, ascending.
    std::vector<int> active_union() const {
        std::vector<int> out;
        for (const auto& a : active_sets) out.insert(out.end(), a.begin(), a.end());
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    bool has_active(int j) const {
        for (const auto& a : active_sets)
            if (std::find(a.begin(), a.end(), j) != a.end()) return true;
        return false;
    }
};

/// Starting sample set: {F(x^k)} for MSG1; MSG2 adds every cached image of a
/// point within delta of the center.
inline GeneratorState init_samples(Variant strategy, const Vector& Fxk, double delta,
                                   const BlackBoxMap& history, const Vector& xk,
                                   const SelectionOracle& oracle, const ActivityQuery& q) {
    GeneratorState state;
    state.add_sample(oracle, Fxk, q);
    if (strategy == Variant::MSG2) {
        for (const auto& [y, Fy] : history.history())
            if ((y - xk).norm() <= delta) state.add_sample(oracle, Fy, q);
    }
    return state;
}

/// Fills D, G and the column index from the stored active sets.
inline void assemble_generators(GeneratorState& state, const SelectionOracle& oracle,
                                const Matrix& jac) {
    const int p = oracle.dimension();
    if (jac.cols() != p)
        throw ContractViolation("assemble_generators: jacobian/selection dimension mismatch");
    state.pair_index.clear();
    for (size_t s = 0; s < state.samples.size(); ++s)
        for (int j : state.active_sets[s]) state.pair_index.emplace_back(static_cast<int>(s), j);

    const int m = static_cast<int>(state.pair_index.size());
    state.D.resize(p, m);
    for (int c = 0; c < m; ++c) {
        auto [s, j] = state.pair_index[c];
        state.D.col(c) = oracle.gradient_of(j, state.samples[s]);
    }
    state.G = jac * state.D;
}

/// A (z, j) pair certifying that the linearization of selection j at z
/// overestimates the h decrease along the current trial step.
struct PairCertificate {
    Vector z;
    int j = 0;
    double alpha = 0.0;  // z = alpha * F(x) + (1 - alpha) * F(x + s)
};

namespace detail {

// Tests the overestimation inequality at z; among passing indices returns the
// one maximizing grad' (Fxs - Fx), smallest index on ties.
inline std::optional<int> certifying_index(const SelectionOracle& oracle, const Vector& z,
                                           const ActivityQuery& q, const Vector& Fx,
                                           const Vector& Fxs, double h_fx, double h_fxs,
                                           double tol) {
    const Vector diff = Fx - Fxs;
    const double bound = h_fx - h_fxs + tol;
    std::optional<int> best;
    double best_score = -kInf;
    for (int j : active_indices(oracle, z, q)) {
        double directional = oracle.gradient_of(j, z).dot(diff);
        if (directional <= bound && -directional > best_score) {
            best_score = -directional;
            best = j;
        }
    }
    return best;
}

} // namespace detail

/// Dyadic grid search along the segment from F(x+s) to F(x); endpoints first.
/// Finite termination is guaranteed under the selection assumptions.
inline PairCertificate grid_search_pair(const SelectionOracle& oracle, const Vector& Fx,
                                        const Vector& Fxs, const ActivityQuery& q,
                                        int max_level = 30) {
    const double h_fx = oracle.combined_value(Fx);
    const double h_fxs = oracle.combined_value(Fxs);
    const double tol = pair_tolerance(h_fx, h_fxs);

    if (auto j = detail::certifying_index(oracle, Fx, q, Fx, Fxs, h_fx, h_fxs, tol))
        return {Fx, *j, 1.0};
    if (auto j = detail::certifying_index(oracle, Fxs, q, Fx, Fxs, h_fx, h_fxs, tol))
        return {Fxs, *j, 0.0};

    for (int level = 1; level <= max_level; ++level) {
        const std::int64_t count = std::int64_t{1} << (level - 1);
        const double denom = std::pow(2.0, level);
        for (std::int64_t k = 1; k <= count; ++k) {
            double alpha = (2.0 * k - 1.0) / denom;
            Vector z = alpha * Fx + (1.0 - alpha) * Fxs;
            if (auto j = detail::certifying_index(oracle, z, q, Fx, Fxs, h_fx, h_fxs, tol))
                return {z, *j, alpha};
        }
    }
    throw PairSearchExhausted("grid_search_pair: no certificate within the level budget");
}

/// Bisection variant: faster in practice, no finite-termination guarantee.
/// Callers should fall back to the grid search when this throws.
inline PairCertificate bisection_search_pair(const SelectionOracle& oracle, const Vector& Fx,
                                             const Vector& Fxs, const ActivityQuery& q,
                                             int max_iter = 100) {
    const double h_fx = oracle.combined_value(Fx);
    const double h_fxs = oracle.combined_value(Fxs);
    const double tol = pair_tolerance(h_fx, h_fxs);

    if (auto j = detail::certifying_index(oracle, Fx, q, Fx, Fxs, h_fx, h_fxs, tol))
        return {Fx, *j, 1.0};
    if (auto j = detail::certifying_index(oracle, Fxs, q, Fx, Fxs, h_fx, h_fxs, tol))
        return {Fxs, *j, 0.0};

    double lo = 0.0, hi = 1.0;
    for (int iter = 0; iter < max_iter; ++iter) {
        double mid = 0.5 * (lo + hi);
        Vector z = mid * Fx + (1.0 - mid) * Fxs;
        if (auto j = detail::certifying_index(oracle, z, q, Fx, Fxs, h_fx, h_fxs, tol))
            return {z, *j, mid};
        // keep the side where h pokes above the chord through the endpoint values
        if (oracle.combined_value(z) > mid * h_fx + (1.0 - mid) * h_fxs)
            hi = mid;
        else
            lo = mid;
    }
    throw PairSearchExhausted("bisection_search_pair: no certificate within the iteration budget");
}

/// Independent recheck of a certificate via fresh oracle calls.
inline bool verify_pair_certificate(const SelectionOracle& oracle, const PairCertificate& cert,
                                    const Vector& Fx, const Vector& Fxs, const ActivityQuery& q) {
    const double h_fx = oracle.combined_value(Fx);
    const double h_fxs = oracle.combined_value(Fxs);
    const double tol = pair_tolerance(h_fx, h_fxs);
    auto active = active_indices(oracle, cert.z, q);
    if (std::find(active.begin(), active.end(), cert.j) == active.end()) return false;
    return oracle.gradient_of(cert.j, cert.z).dot(Fx - Fxs) <= h_fx - h_fxs + tol;
}

/// Searches the sample set for z' carrying index j whose generator makes an
/// obtuse angle with the step: s' jac (grad h_j(z') - d) <= tol. Uses the
/// assembled D columns. Returns the sample position.
inline std::optional<int> obtuse_witness(const GeneratorState& state, int j, const Vector& s,
                                         const Matrix& jac, const Vector& d, double tol = 1e-10) {
    const Vector jts = jac.transpose() * s;  // p-vector
    for (size_t c = 0; c < state.pair_index.size(); ++c) {
        if (state.pair_index[c].second != j) continue;
        if (jts.dot(state.D.col(static_cast<int>(c)) - d) <= tol)
            return state.pair_index[c].first;
    }
    return std::nullopt;
}

} // namespace msg

#endif // MSG_SAMPLING_HPP
