#ifndef MSG_ORACLE_HPP
#define MSG_ORACLE_HPP

#include "msg/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <utility>
#include <vector>

namespace msg {

/// Counted, cached evaluation of the smooth black box F: R^n -> R^p.
///
/// Every distinct point ever passed to the underlying evaluator is kept, in
/// invocation order, in a run-scoped ledger. Repeat queries are served from
/// the ledger. Cache keys compare the raw coordinate bit patterns, so two
/// points hit the same entry only if they are bitwise identical.
class BlackBoxMap {
public:
    using Evaluator = std::function<Vector(const Vector&)>;

    BlackBoxMap(int dimension_in, int dimension_out, Evaluator evaluator)
        : n_(dimension_in), p_(dimension_out), evaluator_(std::move(evaluator)) {
        if (n_ <= 0 || p_ <= 0) throw ContractViolation("BlackBoxMap: dimensions must be positive");
        if (!evaluator_) throw ContractViolation("BlackBoxMap: null evaluator");
    }

    int dimension_in() const { return n_; }
    int dimension_out() const { return p_; }
    long eval_count() const { return static_cast<long>(history_.size()); }

    /// Ledger of (x, F(x)) pairs in evaluator-invocation order (the set Y).
    const std::vector<std::pair<Vector, Vector>>& history() const { return history_; }

    bool is_cached(const Vector& x) const { return index_.count(key_of(x)) > 0; }

    const Vector& evaluate(const Vector& x) {
        if (x.size() != n_ || !all_finite(x))
            throw ContractViolation("BlackBoxMap: query point must be finite with length n");
        auto key = key_of(x);
        auto it = index_.find(key);
        if (it != index_.end()) return history_[it->second].second;

        Vector value = evaluator_(x);
        if (value.size() != p_)
            throw EvaluationFault("BlackBoxMap: evaluator returned wrong dimension", x);
        if (!all_finite(value))
            throw EvaluationFault("BlackBoxMap: evaluator returned non-finite values", x);
        index_.emplace(std::move(key), history_.size());
        history_.emplace_back(x, std::move(value));
        return history_.back().second;
    }

private:
    using Key = std::vector<std::uint64_t>;
    static Key key_of(const Vector& x) {
        Key k(x.size());
        static_assert(sizeof(double) == sizeof(std::uint64_t));
        std::memcpy(k.data(), x.data(), sizeof(double) * x.size());
        return k;
    }

    int n_, p_;
    Evaluator evaluator_;
    std::vector<std::pair<Vector, Vector>> history_;
    std::map<Key, std::size_t> index_;
};

inline const Vector& evaluate_map(BlackBoxMap& map, const Vector& x) { return map.evaluate(x); }

/// Near-activity tolerances of the index test |h(z) - h_j(z)| <= min(sigma, delta).
struct ActivityQuery {
    double sigma = 0.0;
    double delta = kInf;
};

/// A continuous selection h with computable selection values and gradients.
/// Selection indices are 0-based. Immutable after construction.
class SelectionOracle {
public:
    virtual ~SelectionOracle() = default;

    virtual int dimension() const = 0;        // p
    virtual int selection_count() const = 0;  // l = |H|

    virtual double value_of(int j, const Vector& z) const = 0;
    virtual Vector gradient_of(int j, const Vector& z) const = 0;

    /// h(z); default is the pointwise max over selections.
    virtual double combined_value(const Vector& z) const {
        double best = -kInf;
        for (int j = 0; j < selection_count(); ++j) best = std::max(best, value_of(j, z));
        return best;
    }

protected:
    void check_index(int j) const {
        if (j < 0 || j >= selection_count())
            throw ContractViolation("SelectionOracle: selection index out of range");
    }
};

/// A_{sigma,delta}(z): indices within min(sigma, delta) of the attained value.
/// The index realizing h(z) is always a member, so the set is never empty.
inline std::vector<int> active_indices(const SelectionOracle& oracle, const Vector& z,
                                       const ActivityQuery& q) {
    if (q.sigma < 0 || q.delta < 0)
        throw ContractViolation("ActivityQuery: tolerances must be nonnegative");
    if (!all_finite(z)) throw ContractViolation("active_indices: z must be finite");
    const double tol = std::min(q.sigma, q.delta);
    const double h = oracle.combined_value(z);
    std::vector<int> out;
    int nearest = 0;
    double nearest_gap = kInf;
    for (int j = 0; j < oracle.selection_count(); ++j) {
        double gap = std::abs(h - oracle.value_of(j, z));
        if (gap <= tol) out.push_back(j);
        if (gap < nearest_gap) {
            nearest_gap = gap;
            nearest = j;
        }
    }
    if (out.empty()) out.push_back(nearest);
    return out;
}

inline std::vector<std::pair<int, Vector>> selection_gradients(const SelectionOracle& oracle,
                                                               const Vector& z,
                                                               const std::vector<int>& indices) {
    std::vector<std::pair<int, Vector>> out;
    out.reserve(indices.size());
    for (int j : indices) {
        if (j < 0 || j >= oracle.selection_count())
            throw ContractViolation("selection_gradients: index out of range");
        out.emplace_back(j, oracle.gradient_of(j, z));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Built-in selection families

/// h(z) = max_j (z - z_j)' Q_j (z - z_j) + b_j with symmetric Q_j.
class MaxQuadraticSelection final : public SelectionOracle {
public:
    MaxQuadraticSelection(std::vector<Matrix> Q, std::vector<Vector> centers, std::vector<double> b)
        : Q_(std::move(Q)), centers_(std::move(centers)), b_(std::move(b)) {
        if (Q_.empty() || Q_.size() != centers_.size() || Q_.size() != b_.size())
            throw ContractViolation("MaxQuadraticSelection: inconsistent parameter lists");
        p_ = static_cast<int>(centers_[0].size());
        for (size_t j = 0; j < Q_.size(); ++j) {
            if (centers_[j].size() != p_ || Q_[j].rows() != p_ || Q_[j].cols() != p_)
                throw ContractViolation("MaxQuadraticSelection: dimension mismatch");
            Q_[j] = 0.5 * (Q_[j] + Q_[j].transpose());  // enforce symmetry
        }
    }

    int dimension() const override { return p_; }
    int selection_count() const override { return static_cast<int>(Q_.size()); }

    double value_of(int j, const Vector& z) const override {
        check_index(j);
        Vector d = z - centers_[j];
        return d.dot(Q_[j] * d) + b_[j];
    }
    Vector gradient_of(int j, const Vector& z) const override {
        check_index(j);
        return 2.0 * (Q_[j] * (z - centers_[j]));
    }

    const Matrix& quadratic(int j) const { return Q_[j]; }
    const Vector& center(int j) const { return centers_[j]; }
    double offset(int j) const { return b_[j]; }

private:
    std::vector<Matrix> Q_;
    std::vector<Vector> centers_;
    std::vector<double> b_;
    int p_ = 0;
};

/// h(z) = max_j c_j' z + b_j.
class MaxAffineSelection final : public SelectionOracle {
public:
    MaxAffineSelection(std::vector<Vector> slopes, std::vector<double> offsets)
        : c_(std::move(slopes)), b_(std::move(offsets)) {
        if (c_.empty() || c_.size() != b_.size())
            throw ContractViolation("MaxAffineSelection: inconsistent parameter lists");
        p_ = static_cast<int>(c_[0].size());
        for (const Vector& c : c_)
            if (c.size() != p_) throw ContractViolation("MaxAffineSelection: dimension mismatch");
    }

    int dimension() const override { return p_; }
    int selection_count() const override { return static_cast<int>(c_.size()); }
    double value_of(int j, const Vector& z) const override {
        check_index(j);
        return c_[j].dot(z) + b_[j];
    }
    Vector gradient_of(int j, const Vector& z) const override {
        check_index(j);
        (void)z;
        return c_[j];
    }

private:
    std::vector<Vector> c_;
    std::vector<double> b_;
    int p_ = 0;
};

/// h(z) = ||z||_1 encoded as the 2^p signed affine selections s' z.
/// Sign patterns are enumerated from index bits, so nothing is stored.
class SignedL1Selection final : public SelectionOracle {
public:
    explicit SignedL1Selection(int p) : p_(p) {
        if (p <= 0 || p > 20)
            throw ContractViolation("SignedL1Selection: p must be in [1, 20]");
    }

    int dimension() const override { return p_; }
    int selection_count() const override { return 1 << p_; }
    double value_of(int j, const Vector& z) const override {
        check_index(j);
        double v = 0;
        for (int i = 0; i < p_; ++i) v += sign_bit(j, i) * z[i];
        return v;
    }
    Vector gradient_of(int j, const Vector& z) const override {
        check_index(j);
        (void)z;
        Vector g(p_);
        for (int i = 0; i < p_; ++i) g[i] = sign_bit(j, i);
        return g;
    }
    double combined_value(const Vector& z) const override { return z.lpNorm<1>(); }

private:
    static double sign_bit(int j, int i) { return (j >> i) & 1 ? -1.0 : 1.0; }
    int p_;
};

/// Single smooth selection h(z) = c' z + b (l = 1).
class LinearSelection final : public SelectionOracle {
public:
    explicit LinearSelection(Vector c, double b = 0.0) : c_(std::move(c)), b_(b) {}
    int dimension() const override { return static_cast<int>(c_.size()); }
    int selection_count() const override { return 1; }
    double value_of(int j, const Vector& z) const override {
        check_index(j);
        return c_.dot(z) + b_;
    }
    Vector gradient_of(int j, const Vector& z) const override {
        check_index(j);
        (void)z;
        return c_;
    }

private:
    Vector c_;
    double b_;
};

/// Single smooth selection h(z) = ||z||^2 (l = 1).
class SumSquaresSelection final : public SelectionOracle {
public:
    explicit SumSquaresSelection(int p) : p_(p) {
        if (p <= 0) throw ContractViolation("SumSquaresSelection: p must be positive");
    }
    int dimension() const override { return p_; }
    int selection_count() const override { return 1; }
    double value_of(int j, const Vector& z) const override {
        check_index(j);
        return z.squaredNorm();
    }
    Vector gradient_of(int j, const Vector& z) const override {
        check_index(j);
        return 2.0 * z;
    }

private:
    int p_;
};

/// |z| on R^1, as the two affine selections {z, -z}.
inline std::shared_ptr<SelectionOracle> make_abs_selection() {
    Vector plus(1), minus(1);
    plus << 1.0;
    minus << -1.0;
    return std::make_shared<MaxAffineSelection>(std::vector<Vector>{plus, minus},
                                                std::vector<double>{0.0, 0.0});
}

} // namespace msg

#endif // MSG_ORACLE_HPP
