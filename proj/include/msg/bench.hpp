#ifndef MSG_BENCH_HPP
#define MSG_BENCH_HPP

#include "msg/core.hpp"
#include "msg/driver.hpp"
#include "msg/minnorm.hpp"
#include "msg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace msg {

// ---------------------------------------------------------------------------
// Smooth test maps with closed-form gradients

struct RegistryMap {
    std::string name;
    int n = 0, p = 0;
    Vector x0;
    std::function<Vector(const Vector&)> value;
    std::function<Matrix(const Vector&)> grad_matrix;  // n x p, column i holds grad F_i
};

inline const std::vector<RegistryMap>& registry_maps() {
    static const std::vector<RegistryMap> maps = [] {
        std::vector<RegistryMap> out;

        {
            RegistryMap m;
            m.name = "rosenbrock";
            m.n = m.p = 2;
            m.x0 = Vector::Zero(2);
            m.x0 << -1.2, 1.0;
            m.value = [](const Vector& x) {
                Vector F(2);
                F << 10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0];
                return F;
            };
            m.grad_matrix = [](const Vector& x) {
                Matrix J(2, 2);
                J << -20.0 * x[0], -1.0, 10.0, 0.0;
                return J;
            };
            out.push_back(m);
        }
        {
            RegistryMap m;
            m.name = "linear_full_rank";
            m.n = m.p = 3;
            m.x0 = Vector::Ones(3);
            // F = (I - (2/n) ee') x - e
            m.value = [](const Vector& x) {
                double s = x.sum();
                Vector F = x.array() - 2.0 * s / 3.0 - 1.0;
                return F;
            };
            m.grad_matrix = [](const Vector&) {
                Matrix J = Matrix::Identity(3, 3).array() - 2.0 / 3.0;
                return Matrix(J);
            };
            out.push_back(m);
        }
        {
            RegistryMap m;
            m.name = "powell_badly_scaled";
            m.n = m.p = 2;
            m.x0 = Vector::Zero(2);
            m.x0 << 0.0, 1.0;
            m.value = [](const Vector& x) {
                Vector F(2);
                F << 1e4 * x[0] * x[1] - 1.0, std::exp(-x[0]) + std::exp(-x[1]) - 1.0001;
                return F;
            };
            m.grad_matrix = [](const Vector& x) {
                Matrix J(2, 2);
                J << 1e4 * x[1], -std::exp(-x[0]), 1e4 * x[0], -std::exp(-x[1]);
                return J;
            };
            out.push_back(m);
        }
        {
            RegistryMap m;
            m.name = "freudenstein_roth";
            m.n = m.p = 2;
            m.x0 = Vector::Zero(2);
            m.x0 << 0.5, -2.0;
            m.value = [](const Vector& x) {
                Vector F(2);
                F << -13.0 + x[0] + ((5.0 - x[1]) * x[1] - 2.0) * x[1],
                    -29.0 + x[0] + ((x[1] + 1.0) * x[1] - 14.0) * x[1];
                return F;
            };
            m.grad_matrix = [](const Vector& x) {
                Matrix J(2, 2);
                J << 1.0, 1.0, 10.0 * x[1] - 3.0 * x[1] * x[1] - 2.0,
                    3.0 * x[1] * x[1] + 2.0 * x[1] - 14.0;
                return J;
            };
            out.push_back(m);
        }
        {
            RegistryMap m;
            m.name = "brown_almost_linear";
            m.n = m.p = 3;
            m.x0 = Vector::Constant(3, 0.5);
            m.value = [](const Vector& x) {
                const int n = 3;
                double s = x.sum();
                Vector F(n);
                for (int i = 0; i < n - 1; ++i) F[i] = x[i] + s - (n + 1);
                F[n - 1] = x.prod() - 1.0;
                return F;
            };
            m.grad_matrix = [](const Vector& x) {
                const int n = 3;
                Matrix J(n, n);
                for (int i = 0; i < n - 1; ++i)
                    for (int r = 0; r < n; ++r) J(r, i) = (r == i) ? 2.0 : 1.0;
                for (int r = 0; r < n; ++r) {
                    double prod = 1.0;
                    for (int t = 0; t < n; ++t)
                        if (t != r) prod *= x[t];
                    J(r, n - 1) = prod;
                }
                return J;
            };
            out.push_back(m);
        }
        {
            RegistryMap m;
            m.name = "trigonometric";
            m.n = m.p = 4;
            m.x0 = Vector::Constant(4, 0.25);
            m.value = [](const Vector& x) {
                const int n = 4;
                double c = x.array().cos().sum();
                Vector F(n);
                for (int i = 0; i < n; ++i)
                    F[i] = n - c + (i + 1) * (1.0 - std::cos(x[i])) - std::sin(x[i]);
                return F;
            };
            m.grad_matrix = [](const Vector& x) {
                const int n = 4;
                Matrix J(n, n);
                for (int i = 0; i < n; ++i)
                    for (int r = 0; r < n; ++r) {
                        J(r, i) = std::sin(x[r]);
                        if (r == i) J(r, i) += (i + 1) * std::sin(x[i]) - std::cos(x[i]);
                    }
                return J;
            };
            out.push_back(m);
        }
        {
            RegistryMap m;
            m.name = "identity1";
            m.n = m.p = 1;
            m.x0 = Vector::Ones(1);
            m.value = [](const Vector& x) { return x; };
            m.grad_matrix = [](const Vector&) { return Matrix::Identity(1, 1); };
            out.push_back(m);
        }
        {
            RegistryMap m;
            m.name = "identity2";
            m.n = m.p = 2;
            m.x0 = Vector::Ones(2);
            m.value = [](const Vector& x) { return x; };
            m.grad_matrix = [](const Vector&) { return Matrix::Identity(2, 2); };
            out.push_back(m);
        }
        return out;
    }();
    return maps;
}

inline const RegistryMap& find_map(const std::string& name) {
    for (const RegistryMap& m : registry_maps())
        if (m.name == name) return m;
    throw ContractViolation("find_map: unknown map '" + name + "'");
}

// ---------------------------------------------------------------------------
// Piecewise-quadratic instance generator

/// max_j (z - z_j)' Q_j (z - z_j) + b_j with Q_1 positive definite and the
/// remaining Q_j negative definite; b_1 pins h to zero at every z_j, j >= 2.
struct PiecewiseQuadraticSpec {
    int l = 0;
    std::uint64_t seed = 0;
    std::vector<Vector> centers;  // z_j = F(y_j)
    std::vector<Matrix> Q;
    std::vector<double> b;

    std::shared_ptr<MaxQuadraticSelection> make_oracle() const {
        return std::make_shared<MaxQuadraticSelection>(Q, centers, b);
    }
};

inline PiecewiseQuadraticSpec generate_instance(const std::function<Vector(const Vector&)>& F,
                                                const Vector& x0, int l, std::uint64_t seed) {
    if (l < 2) throw ContractViolation("generate_instance: need at least two selections");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> box(-20.0, 20.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const int n = static_cast<int>(x0.size());
    PiecewiseQuadraticSpec spec;
    spec.l = l;
    spec.seed = seed;

    for (int j = 0; j < l; ++j) {
        Vector y(n);
        for (int i = 0; i < n; ++i) y[i] = x0[i] + box(rng);
        spec.centers.push_back(F(y));
    }
    const int p = static_cast<int>(spec.centers[0].size());
    for (int j = 0; j < l; ++j) {
        Matrix A(p, p);
        for (int r = 0; r < p; ++r)
            for (int c = 0; c < p; ++c) A(r, c) = gauss(rng);
        Matrix Q = A.transpose() * A + Matrix::Identity(p, p);
        spec.Q.push_back(j == 0 ? Q : Matrix(-Q));
    }
    spec.b.assign(l, 0.0);
    double worst = 0.0;
    for (int j = 1; j < l; ++j) {
        Vector diff = spec.centers[j] - spec.centers[0];
        worst = std::max(worst, diff.dot(spec.Q[0] * diff));
    }
    spec.b[0] = -2.0 * worst;
    return spec;
}

// ---------------------------------------------------------------------------
// Convergence tests and data profiles

/// f(x0) - f(xt) >= (1 - tau) (f(x0) - f*)
inline bool f_converged(double f0, double ft, double fstar, double tau) {
    if (f0 < fstar) throw ContractViolation("f_converged: fstar must not exceed f0");
    return (f0 - ft) >= (1.0 - tau) * (f0 - fstar);
}

struct StationarityProbe {
    int sample_count = 50;
    double radius = 1e-5;
    std::uint64_t seed = 0;
};

/// Sampled Clarke-stationarity surrogate: min-norm element of the convex hull
/// of true composite gradients collected over a tiny ball around xt, using
/// exact active sets and the closed-form gradient matrix.
inline double gamma_measure(const Vector& xt, const StationarityProbe& probe,
                            const SelectionOracle& oracle,
                            const std::function<Vector(const Vector&)>& F,
                            const std::function<Matrix(const Vector&)>& grad_matrix) {
    if (probe.sample_count < 1 || !(probe.radius > 0))
        throw ContractViolation("gamma_measure: bad probe parameters");
    std::mt19937_64 rng(probe.seed);
    const ActivityQuery exact{0.0, kInf};

    std::vector<Vector> bundle;
    for (int t = 0; t < probe.sample_count; ++t) {
        Vector s = sample_in_ball(rng, xt, probe.radius);
        Vector Fs = F(s);
        Matrix J = grad_matrix(s);
        for (int j : active_indices(oracle, Fs, exact)) bundle.push_back(J * oracle.gradient_of(j, Fs));
    }
    const int n = static_cast<int>(xt.size());
    Matrix G(n, static_cast<int>(bundle.size()));
    for (size_t c = 0; c < bundle.size(); ++c) G.col(static_cast<int>(c)) = bundle[c];
    return project_origin(G, G).norm_g;
}

struct ProfileTable {
    struct Row {
        std::string problem_id;
        std::string method;
        int n = 0;
        bool solved = false;
        long t = -1;  // evaluations of F at first solve
    };
    std::vector<Row> rows;
};

/// Cumulative fraction of problems solved by budget alpha (in units of n+1
/// evaluations), per method. Step functions sampled on the given grid.
inline std::map<std::string, std::vector<std::pair<double, double>>> data_profile(
    const ProfileTable& table, const std::vector<double>& budget_grid) {
    std::vector<std::string> problems;
    std::vector<std::string> methods;
    for (const auto& r : table.rows) {
        if (std::find(problems.begin(), problems.end(), r.problem_id) == problems.end())
            problems.push_back(r.problem_id);
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
            methods.push_back(r.method);
    }
    const double denom = problems.empty() ? 1.0 : static_cast<double>(problems.size());

    std::map<std::string, std::vector<std::pair<double, double>>> curves;
    for (const std::string& method : methods) {
        auto& curve = curves[method];
        for (double alpha : budget_grid) {
            int solved = 0;
            for (const auto& r : table.rows)
                if (r.method == method && r.solved &&
                    static_cast<double>(r.t) / (r.n + 1.0) <= alpha)
                    ++solved;
            curve.emplace_back(alpha, solved / denom);
        }
    }
    return curves;
}

// ---------------------------------------------------------------------------
// Desk-scale suite

struct SuiteEntry {
    std::string map;
    int l = 2;
    std::uint64_t seed = 0;
};

struct SuiteManifest {
    std::vector<SuiteEntry> entries;
    long budget_multiplier = 1000;  // budget = multiplier * (n + 1)
    double tau = 1e-3;
};

struct SuiteResultRow {
    std::string problem_id;
    std::string method;
    int n = 0;
    long budget_used = 0;
    double final_f = kNaN;
    double final_gamma = kNaN;
    long solved_at_f = -1;      // -1 when unsolved
    long solved_at_gamma = -1;
};

inline std::string variant_name(Variant v) { return v == Variant::MSG1 ? "msg1" : "msg2"; }

inline Problem make_generated_problem(const SuiteEntry& entry) {
    const RegistryMap& map = find_map(entry.map);
    PiecewiseQuadraticSpec spec = generate_instance(map.value, map.x0, entry.l, entry.seed);
    Problem prob;
    prob.name = entry.map + "_l" + std::to_string(entry.l) + "_s" + std::to_string(entry.seed);
    prob.n = map.n;
    prob.p = map.p;
    prob.F = map.value;
    prob.grad_matrix = map.grad_matrix;
    prob.h = spec.make_oracle();
    prob.x0 = map.x0;
    return prob;
}

/// Runs every manifest entry under every method and scores both convergence
/// tests in postprocessing. f* per problem is the best value seen by any
/// method, evaluated points included.
inline std::vector<SuiteResultRow> run_suite(const SuiteManifest& manifest,
                                             const std::vector<Variant>& methods,
                                             const SolverConfig& base_config) {
    std::vector<SuiteResultRow> rows;
    for (const SuiteEntry& entry : manifest.entries) {
        const std::string entry_id =
            entry.map + "_l" + std::to_string(entry.l) + "_s" + std::to_string(entry.seed);
        try {
        Problem prob = make_generated_problem(entry);
        const long budget = manifest.budget_multiplier * (prob.n + 1);

        struct PerMethod {
            SolveOutcome outcome;
            std::vector<double> f_history;
        };
        std::vector<PerMethod> runs;
        double fstar = kInf;
        double f0 = kInf;
        for (Variant v : methods) {
            SolverConfig cfg = base_config;
            cfg.variant = v;
            cfg.budget = budget;
            PerMethod pm;
            pm.outcome = solve(prob, cfg);
            for (const auto& [y, Fy] : pm.outcome.evaluations) {
                double f = prob.h->combined_value(Fy);
                pm.f_history.push_back(f);
                fstar = std::min(fstar, f);
            }
            if (!pm.f_history.empty()) f0 = pm.f_history.front();
            runs.push_back(std::move(pm));
        }

        for (size_t mi = 0; mi < methods.size(); ++mi) {
            const PerMethod& pm = runs[mi];
            SuiteResultRow row;
            row.problem_id = prob.name;
            row.method = variant_name(methods[mi]);
            row.n = prob.n;
            row.budget_used = pm.outcome.evals;
            row.final_f = pm.outcome.best_f;

            double running = kInf;
            for (size_t t = 0; t < pm.f_history.size(); ++t) {
                running = std::min(running, pm.f_history[t]);
                if (f_converged(f0, running, fstar, manifest.tau)) {
                    row.solved_at_f = static_cast<long>(t) + 1;
                    break;
                }
            }
            for (size_t t = 0; t < pm.outcome.evaluations.size(); ++t) {
                StationarityProbe probe;
                probe.seed = mix_seed(entry.seed, t);
                double gamma = gamma_measure(pm.outcome.evaluations[t].first, probe, *prob.h,
                                             prob.F, prob.grad_matrix);
                if (gamma <= manifest.tau) {
                    row.solved_at_gamma = static_cast<long>(t) + 1;
                    break;
                }
            }
            StationarityProbe final_probe;
            final_probe.seed = mix_seed(entry.seed, 0xA11CEULL);
            row.final_gamma = gamma_measure(pm.outcome.best_x, final_probe, *prob.h, prob.F,
                                            prob.grad_matrix);
            rows.push_back(std::move(row));
        }
        } catch (const Fault&) {
            // record the problem as unsolved for every method and move on
            for (Variant v : methods) {
                SuiteResultRow row;
                row.problem_id = entry_id;
                row.method = variant_name(v);
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

/// Convenience: the profile table for one metric out of suite results.
inline ProfileTable profile_from_results(const std::vector<SuiteResultRow>& rows,
                                         const std::string& metric) {
    if (metric != "f" && metric != "gamma")
        throw ContractViolation("profile_from_results: metric must be 'f' or 'gamma'");
    ProfileTable table;
    for (const auto& r : rows) {
        ProfileTable::Row row;
        row.problem_id = r.problem_id;
        row.method = r.method;
        row.n = r.n;
        long t = metric == "f" ? r.solved_at_f : r.solved_at_gamma;
        row.solved = t >= 0;
        row.t = t;
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace msg

#endif // MSG_BENCH_HPP
