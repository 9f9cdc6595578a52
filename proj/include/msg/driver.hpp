#ifndef MSG_DRIVER_HPP
#define MSG_DRIVER_HPP

#include "msg/core.hpp"
#include "msg/minnorm.hpp"
#include "msg/models.hpp"
#include "msg/oracle.hpp"
#include "msg/sampling.hpp"
#include "msg/trstep.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace msg {

struct SolverConfig {
    double eta1 = 0.01;               // success threshold on rho
    double eta2 = 1e4;                // acceptability: delta < eta2 * ||g||
    double kappa_d = 1e-4;            // sufficient-decrease fraction
    double gamma_dec = 0.5;
    double gamma_inc = 2.0;
    double delta0 = 1.0;
    double delta_max = 1e8;
    double g_tol = 1e-13;
    double delta_min = 1e-13;
    double sigma = 1e-8;              // near-activity tolerance
    long budget = 100000;             // max evaluations of F
    long max_iterations = 1000000;
    Variant variant = Variant::MSG2;
    double rho_grow_threshold = 0.5;  // radius grows only past this rho
    bool quadratic_models = false;

    void validate() const {
        if (!(eta1 > 0 && eta1 < 1)) throw ContractViolation("SolverConfig: eta1 must be in (0,1)");
        if (!(eta2 > 0)) throw ContractViolation("SolverConfig: eta2 must be positive");
        if (!(kappa_d > 0 && kappa_d < 1))
            throw ContractViolation("SolverConfig: kappa_d must be in (0,1)");
        if (!(gamma_dec > 0 && gamma_dec < 1))
            throw ContractViolation("SolverConfig: gamma_dec must be in (0,1)");
        if (!(gamma_inc >= 1)) throw ContractViolation("SolverConfig: gamma_inc must be >= 1");
        if (!(delta0 > 0)) throw ContractViolation("SolverConfig: delta0 must be positive");
        if (!(delta_max >= delta0))
            throw ContractViolation("SolverConfig: delta_max must be >= delta0");
        if (!(g_tol >= 0 && delta_min >= 0 && sigma >= 0))
            throw ContractViolation("SolverConfig: tolerances must be nonnegative");
        if (budget < 0) throw ContractViolation("SolverConfig: budget must be nonnegative");
    }
};

enum class Verdict { successful, unsuccessful, acceptable_rejected, unacceptable };
enum class Termination { gtol_and_delta, budget, maxiter, fault };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::successful: return "successful";
        case Verdict::unsuccessful: return "unsuccessful";
        case Verdict::acceptable_rejected: return "acceptable-rejected";
        case Verdict::unacceptable: return "unacceptable";
    }
    return "?";
}
inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::gtol_and_delta: return "gtol_and_delta";
        case Termination::budget: return "budget";
        case Termination::maxiter: return "maxiter";
        case Termination::fault: return "fault";
    }
    return "?";
}

/// One completed outer iteration: the incumbent after the update, the entry
/// radius, and the final inner-loop quantities.
struct IterationRecord {
    long k = 0;
    Vector x;            // incumbent at the end of the iteration
    double delta = 0.0;  // trust-region radius the iteration ran with
    double g_norm = kNaN;
    std::optional<double> rho;
    Verdict verdict = Verdict::unsuccessful;
    int loop_count = 0;
    long evals = 0;      // cumulative F evaluations
    double f_value = kNaN;
};

struct SolveOutcome {
    Vector best_x;
    double best_f = kNaN;
    std::vector<IterationRecord> records;
    Termination termination = Termination::maxiter;
    std::string fault_message;
    long evals = 0;
    std::vector<std::pair<Vector, Vector>> evaluations;  // full ledger, for profiling
};

/// A composite minimization instance h(F(x)).
struct Problem {
    std::string name;
    int n = 0, p = 0;
    std::function<Vector(const Vector&)> F;
    std::function<Matrix(const Vector&)> grad_matrix;  // closed-form, optional (postprocessing)
    std::shared_ptr<const SelectionOracle> h;
    Vector x0;
};

/// Ratio of d-weighted actual decrease in F to d-weighted predicted decrease in M.
inline double rho_ratio(const Vector& Fx, const Vector& Fxs, const Vector& Mx, const Vector& Mxs,
                        const Vector& d) {
    double denom = (Mx - Mxs).dot(d);
    if (denom == 0.0 || std::isnan(denom))
        throw RhoUndefined("rho_ratio: zero predicted decrease");
    return (Fx - Fxs).dot(d) / denom;
}

namespace detail {

struct BudgetExhausted {};

struct RunState {
    RunState(const Problem& problem, const SolverConfig& cfg)
        : config(cfg),
          oracle(problem.h),
          map(problem.n, problem.p,
              [this, F = problem.F](const Vector& y) {
                  if (map.eval_count() >= config.budget) throw BudgetExhausted{};
                  return F(y);
              }),
          x(problem.x0),
          delta(cfg.delta0) {}

    SolverConfig config;
    std::shared_ptr<const SelectionOracle> oracle;
    BlackBoxMap map;
    Vector x;
    Vector Fx;
    double fx = kNaN;
    double delta = 0.0;
    long k = 0;
};

struct IterationOutput {
    IterationRecord record;
    std::optional<Termination> stop;
};

// One pass of Algorithm 1's body: models, manifold sampling loop,
// classification, radius update.
inline IterationOutput msg_iteration(RunState& rs) {
    const SolverConfig& cfg = rs.config;
    const SelectionOracle& h = *rs.oracle;
    const double delta_k = rs.delta;
    ModelBuildOptions mopts;
    mopts.quadratic = cfg.quadratic_models;

    IterationOutput out;
    IterationRecord& rec = out.record;
    rec.k = rs.k;
    rec.delta = delta_k;

    ComponentModelSet models = build_models(rs.map, rs.x, delta_k, mopts);
    long evals_at_build = rs.map.eval_count();

    const ActivityQuery query{cfg.sigma, delta_k};
    GeneratorState state = init_samples(cfg.variant, rs.Fx, delta_k, rs.map, rs.x, h, query);

    const int l = h.selection_count();
    bool acceptable = false;
    std::optional<double> rho;
    bool rho_defined = false;
    Vector step, F_trial;
    double f_trial = kNaN;
    double g_norm = kNaN;

    for (;;) {
        ++rec.loop_count;
        if (rec.loop_count > 10 * l + 10)
            throw Fault("msg_iteration: manifold sampling loop exceeded its bound");

        Matrix jac = model_jacobian(models);
        assemble_generators(state, h, jac);
        ProjectionResult proj = project_origin(state.G, state.D);
        g_norm = proj.norm_g;

        if (g_norm <= cfg.g_tol && delta_k <= cfg.delta_min) {
            out.stop = Termination::gtol_and_delta;
            rec.verdict = Verdict::unacceptable;
            rec.g_norm = g_norm;
            rec.x = rs.x;
            rec.f_value = rs.fx;
            rec.evals = rs.map.eval_count();
            return out;
        }

        if (!(delta_k < cfg.eta2 * g_norm)) {
            rec.verdict = Verdict::unacceptable;
            break;
        }

        // trial step: subproblem solution, explicitly checked, else Lemma-4.4 step
        MasterModel mm = make_master_model(models, proj.d);
        Vector s = solve_subproblem(mm, delta_k);
        Vector M_center = models.value_all(rs.x);
        Vector M_trial = models.value_all(rs.x + s);

        double lh_hat = 1e-8;
        for (int c = 0; c < state.D.cols(); ++c)
            lh_hat = std::max(lh_hat, state.D.col(c).norm());
        double kh_hat = std::max(1e-8, hessian_bound(models));
        if (!sufficient_decrease_ok(M_center, M_trial, proj.d, g_norm, delta_k, cfg.kappa_d,
                                    lh_hat * kh_hat)) {
            s = fallback_step(proj.g, delta_k);
            M_trial = models.value_all(rs.x + s);
        }

        Vector Fxs = rs.map.evaluate(rs.x + s);
        double h_trial = h.combined_value(Fxs);

        auto search = [&](const Vector& trial_image) {
            try {
                return bisection_search_pair(h, rs.Fx, trial_image, query);
            } catch (const PairSearchExhausted&) {
                return grid_search_pair(h, rs.Fx, trial_image, query);
            }
        };
        PairCertificate cert = search(Fxs);

        if (state.has_active(cert.j)) {
            double tol = pair_tolerance(rs.fx, h_trial);
            if (!obtuse_witness(state, cert.j, s, jac, proj.d, tol)) {
                // steepest-descent replacement makes the witness test pass by
                // the projection theorem, for any sample carrying cert.j
                s = fallback_step(proj.g, delta_k);
                M_trial = models.value_all(rs.x + s);
                Fxs = rs.map.evaluate(rs.x + s);
                h_trial = h.combined_value(Fxs);
                cert = search(Fxs);
            }
        }

        if (state.has_active(cert.j)) {
            // acceptable iteration: score the step
            double pred = (M_center - M_trial).dot(proj.d);
            if (pred > 0) {
                rho = (rs.Fx - Fxs).dot(proj.d) / pred;
                rho_defined = std::isfinite(*rho);
                if (!rho_defined) rho.reset();
            }
            step = s;
            F_trial = Fxs;
            f_trial = h_trial;
            acceptable = true;
            break;
        }

        // grow the sample set and go around
        state.add_sample(h, cert.z, query, cert.alpha);
        if (cfg.variant == Variant::MSG2) {
            for (const auto& [y, Fy] : rs.map.history())
                if ((y - rs.x).norm() <= delta_k) state.add_sample(h, Fy, query);
        }
        if (rs.map.eval_count() > evals_at_build) {
            models = build_models(rs.map, rs.x, delta_k, mopts);
            evals_at_build = rs.map.eval_count();
        }
    }

    if (acceptable) {
        bool success = rho_defined && *rho > cfg.eta1 && f_trial < rs.fx;
        if (success) {
            rs.x = rs.x + step;
            rs.Fx = F_trial;
            rs.fx = f_trial;
            if (*rho > cfg.rho_grow_threshold)
                rs.delta = std::min(cfg.gamma_inc * delta_k, cfg.delta_max);
            rec.verdict = Verdict::successful;
        } else {
            rs.delta = cfg.gamma_dec * delta_k;
            rec.verdict = Verdict::acceptable_rejected;
        }
        rec.rho = rho;
    } else {
        rs.delta = cfg.gamma_dec * delta_k;
    }

    rec.g_norm = g_norm;
    rec.x = rs.x;
    rec.f_value = rs.fx;
    rec.evals = rs.map.eval_count();
    return out;
}

} // namespace detail

/// Runs the manifold sampling iteration until the gradient/radius test or the
/// evaluation budget fires. Deterministic for a fixed problem and config.
inline SolveOutcome solve(const Problem& problem, const SolverConfig& config) {
    config.validate();
    if (!problem.F || !problem.h) throw ContractViolation("solve: problem must define F and h");
    if (problem.x0.size() != problem.n || !all_finite(problem.x0))
        throw ContractViolation("solve: x0 must be finite with length n");
    if (problem.h->dimension() != problem.p)
        throw ContractViolation("solve: selection oracle dimension must equal p");

    detail::RunState rs(problem, config);
    SolveOutcome outcome;
    outcome.best_x = problem.x0;
    outcome.termination = Termination::maxiter;

    try {
        rs.Fx = rs.map.evaluate(rs.x);
        rs.fx = problem.h->combined_value(rs.Fx);
    } catch (const detail::BudgetExhausted&) {
        outcome.termination = Termination::budget;
        return outcome;
    } catch (const Fault& f) {
        outcome.termination = Termination::fault;
        outcome.fault_message = f.what();
        return outcome;
    }

    for (rs.k = 0; rs.k < config.max_iterations; ++rs.k) {
        if (rs.map.eval_count() >= config.budget) {
            outcome.termination = Termination::budget;
            break;
        }
        try {
            detail::IterationOutput it = detail::msg_iteration(rs);
            outcome.records.push_back(it.record);
            if (it.stop) {
                outcome.termination = *it.stop;
                break;
            }
        } catch (const detail::BudgetExhausted&) {
            IterationRecord rec;
            rec.k = rs.k;
            rec.x = rs.x;
            rec.delta = rs.delta;
            rec.verdict = Verdict::unsuccessful;
            rec.loop_count = 0;
            rec.evals = rs.map.eval_count();
            rec.f_value = rs.fx;
            outcome.records.push_back(rec);
            outcome.termination = Termination::budget;
            break;
        } catch (const Fault& f) {
            IterationRecord rec;
            rec.k = rs.k;
            rec.x = rs.x;
            rec.delta = rs.delta;
            rec.verdict = Verdict::unsuccessful;
            rec.evals = rs.map.eval_count();
            rec.f_value = rs.fx;
            outcome.records.push_back(rec);
            outcome.termination = Termination::fault;
            outcome.fault_message = f.what();
            break;
        }
    }

    outcome.best_x = rs.x;
    outcome.best_f = rs.fx;
    outcome.evals = rs.map.eval_count();
    outcome.evaluations = rs.map.history();
    return outcome;
}

} // namespace msg

#endif // MSG_DRIVER_HPP
