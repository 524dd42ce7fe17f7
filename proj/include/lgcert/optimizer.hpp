#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lgcert/bounds.hpp"
#include "lgcert/qubit_core.hpp"
#include "lgcert/rng.hpp"

// Numerical verification of the closed-form bounds: direct maximization of
// outcome probabilities over strategy space subject to LGI = 1 + alpha and
// the three NSIT conditions (optionally relaxed to a common tolerance v).
//
// The search runs over an 11-parameter unconstrained vector; the mapping to
// Strategy keeps every iterate physical, so the only constraints left are
// the four equalities, handled by quadratic penalty with escalating weight.
// Each restart additionally polishes feasibility from its end point and the
// result reported is the best point seen anywhere that meets the constraint
// tolerance exactly — penalized iterates that drift off the manifold can
// never inflate best_value.

namespace lgcert {

struct OutcomeTarget {
    Pair pair;
    int a; // +1 / -1
    int b;
};

/// One constrained maximization instance.
struct OptProblem {
    Alpha alpha;
    double nsit_tolerance = 0.0; // v; each NSIT value is constrained to equal v
    EntropyMode objective = EntropyMode::joint;
    std::optional<OutcomeTarget> target; // empty: max over all 12 outcomes

    OptProblem(Alpha a, double v, EntropyMode obj,
               std::optional<OutcomeTarget> tgt = std::nullopt)
        : alpha(a), nsit_tolerance(v), objective(obj), target(tgt) {
        if (!(v >= 0.0) || v >= 0.5)
            throw std::invalid_argument("NSIT tolerance v must lie in [0, 0.5)");
    }
};

struct SolverOptions {
    int restarts = 64;
    double penalty_start = 1e2;
    double penalty_factor = 10.0;
    int penalty_stages = 4;
    int simplex_max_iter = 1200;
    double simplex_tol = 1e-12;
    double constraint_tol = 1e-6;
    int polish_max_iter = 2000;
};

struct OptResult {
    double best_value = -1.0;
    Strategy best_strategy;
    // (LGI - (1 + alpha), NSIT_1 - v, NSIT_2 - v, NSIT_3 - v) at best_strategy.
    std::array<double, 4> residuals{};
    int restarts_used = 0;
    bool converged = false;
};

/// Constraint residuals of a strategy for the exact program:
/// (LGI - (1 + alpha), NSIT_1, NSIT_2, NSIT_3).
inline std::array<double, 4> residuals(const Strategy& s, Alpha alpha) {
    const ProbabilityTable tb = probability_table(s);
    return {tb.lgi - (1.0 + alpha.value), tb.nsit[0], tb.nsit[1], tb.nsit[2]};
}

namespace detail {

inline constexpr int n_params = 11;
using ParamVec = std::array<double, n_params>;

// Parameter layout: [r, theta, phi, x1, y1, z1, x2, y2, z2, theta_b, a_raw].
// r clamps to [0,1]; b = sin^2(theta_b); a = clamp(a_raw,-1,1) * (1 - b).
// Every vector maps to a valid Strategy, so local search is unconstrained.
inline Strategy strategy_from_params(const ParamVec& p) {
    const double r = std::clamp(p[0], 0.0, 1.0);
    const double st = std::sin(p[1]), ct = std::cos(p[1]);
    Strategy s;
    s.state = BlochVector(r * st * std::cos(p[2]), r * st * std::sin(p[2]), r * ct);
    s.u1 = UnitaryParams(p[3], p[4], p[5]);
    s.u2 = UnitaryParams(p[6], p[7], p[8]);
    const double b = std::sin(p[9]) * std::sin(p[9]);
    const double a = std::clamp(p[10], -1.0, 1.0) * (1.0 - b);
    s.povm = PovmParams(a, b);
    return s;
}

inline ParamVec params_from_strategy(const Strategy& s) {
    ParamVec p{};
    const double r = std::sqrt(s.state.norm2());
    p[0] = r;
    p[1] = r > 1e-15 ? std::acos(std::clamp(s.state.nz / r, -1.0, 1.0)) : 0.0;
    p[2] = std::atan2(s.state.ny, s.state.nx);
    p[3] = s.u1.x; p[4] = s.u1.y; p[5] = s.u1.z;
    p[6] = s.u2.x; p[7] = s.u2.y; p[8] = s.u2.z;
    p[9] = std::asin(std::sqrt(std::clamp(s.povm.b, 0.0, 1.0)));
    p[10] = s.povm.b < 1.0 - 1e-15 ? s.povm.a / (1.0 - s.povm.b) : 0.0;
    return p;
}

inline ParamVec random_params(SplitMix64& rng) {
    const double pi = std::numbers::pi;
    ParamVec p;
    p[0] = rng.uniform();
    p[1] = rng.uniform(0.0, pi);
    p[2] = rng.uniform(-pi, pi);
    for (int i = 3; i < 9; ++i) p[static_cast<std::size_t>(i)] = rng.uniform(-pi, pi);
    p[9] = rng.uniform(0.0, 0.5 * pi);
    p[10] = rng.uniform(-1.0, 1.0);
    return p;
}

/// Scalar objective evaluated on the strategy and its probability table.
using StrategyObjective = std::function<double(const Strategy&, const ProbabilityTable&)>;

struct FeasibleBest {
    double value = -std::numeric_limits<double>::infinity();
    ParamVec params{};
    bool found = false;
};

struct PenaltyEval {
    const StrategyObjective& objective;
    double alpha;
    double v;
    double weight;              // current penalty weight
    double constraint_tol;
    FeasibleBest* tracker;      // best feasible point seen across the restart

    double constraint_sq(const ProbabilityTable& tb, double* max_abs = nullptr) const {
        const std::array<double, 4> c{tb.lgi - (1.0 + alpha), tb.nsit[0] - v,
                                      tb.nsit[1] - v, tb.nsit[2] - v};
        double sq = 0.0, mx = 0.0;
        for (double ci : c) {
            sq += ci * ci;
            mx = std::max(mx, std::abs(ci));
        }
        if (max_abs) *max_abs = mx;
        return sq;
    }

    /// Negated penalized objective (the simplex minimizes).
    double operator()(const ParamVec& p) const {
        const Strategy s = strategy_from_params(p);
        const ProbabilityTable tb = probability_table(s);
        double max_abs = 0.0;
        const double sq = constraint_sq(tb, &max_abs);
        const double f = objective(s, tb);
        if (tracker && max_abs <= constraint_tol && f > tracker->value) {
            tracker->value = f;
            tracker->params = p;
            tracker->found = true;
        }
        return -(f - weight * sq);
    }
};

/// Standard Nelder-Mead on n_params dimensions. Returns the best vertex.
template <typename F>
inline ParamVec nelder_mead(F&& f, const ParamVec& start, double step, int max_iter,
                            double tol) {
    constexpr int n = n_params;
    std::array<ParamVec, n + 1> x;
    std::array<double, n + 1> fx;
    x[0] = start;
    fx[0] = f(x[0]);
    for (int i = 0; i < n; ++i) {
        x[static_cast<std::size_t>(i + 1)] = start;
        x[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(i)] += step;
        fx[static_cast<std::size_t>(i + 1)] = f(x[static_cast<std::size_t>(i + 1)]);
    }

    std::array<int, n + 1> order;
    for (int it = 0; it < max_iter; ++it) {
        for (int i = 0; i <= n; ++i) order[static_cast<std::size_t>(i)] = i;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return fx[static_cast<std::size_t>(a)] < fx[static_cast<std::size_t>(b)]; });
        const int best = order[0], worst = order[n], second_worst = order[n - 1];
        if (std::abs(fx[static_cast<std::size_t>(worst)] - fx[static_cast<std::size_t>(best)]) <=
            tol * (std::abs(fx[static_cast<std::size_t>(best)]) + tol))
            break;

        ParamVec centroid{};
        for (int i = 0; i <= n; ++i) {
            if (order[static_cast<std::size_t>(i)] == worst) continue;
            for (int d = 0; d < n; ++d)
                centroid[static_cast<std::size_t>(d)] +=
                    x[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])][static_cast<std::size_t>(d)];
        }
        for (double& c : centroid) c /= n;

        auto blend = [&](double coef) {
            ParamVec p;
            for (int d = 0; d < n; ++d)
                p[static_cast<std::size_t>(d)] =
                    centroid[static_cast<std::size_t>(d)] +
                    coef * (x[static_cast<std::size_t>(worst)][static_cast<std::size_t>(d)] -
                            centroid[static_cast<std::size_t>(d)]);
            return p;
        };

        const ParamVec refl = blend(-1.0);
        const double f_refl = f(refl);
        if (f_refl < fx[static_cast<std::size_t>(best)]) {
            const ParamVec exp_ = blend(-2.0);
            const double f_exp = f(exp_);
            if (f_exp < f_refl) {
                x[static_cast<std::size_t>(worst)] = exp_;
                fx[static_cast<std::size_t>(worst)] = f_exp;
            } else {
                x[static_cast<std::size_t>(worst)] = refl;
                fx[static_cast<std::size_t>(worst)] = f_refl;
            }
            continue;
        }
        if (f_refl < fx[static_cast<std::size_t>(second_worst)]) {
            x[static_cast<std::size_t>(worst)] = refl;
            fx[static_cast<std::size_t>(worst)] = f_refl;
            continue;
        }
        const ParamVec contr = blend(f_refl < fx[static_cast<std::size_t>(worst)] ? -0.5 : 0.5);
        const double f_contr = f(contr);
        if (f_contr < std::min(f_refl, fx[static_cast<std::size_t>(worst)])) {
            x[static_cast<std::size_t>(worst)] = contr;
            fx[static_cast<std::size_t>(worst)] = f_contr;
            continue;
        }
        // Shrink toward the best vertex.
        for (int i = 0; i <= n; ++i) {
            const int idx = order[static_cast<std::size_t>(i)];
            if (idx == best) continue;
            for (int d = 0; d < n; ++d)
                x[static_cast<std::size_t>(idx)][static_cast<std::size_t>(d)] =
                    x[static_cast<std::size_t>(best)][static_cast<std::size_t>(d)] +
                    0.5 * (x[static_cast<std::size_t>(idx)][static_cast<std::size_t>(d)] -
                           x[static_cast<std::size_t>(best)][static_cast<std::size_t>(d)]);
            fx[static_cast<std::size_t>(idx)] = f(x[static_cast<std::size_t>(idx)]);
        }
    }

    int best = 0;
    for (int i = 1; i <= n; ++i)
        if (fx[static_cast<std::size_t>(i)] < fx[static_cast<std::size_t>(best)]) best = i;
    return x[static_cast<std::size_t>(best)];
}

/// One restart: penalty stages, then a pure-feasibility polish whose end
/// point (if it meets the tolerance) competes in the feasible tracker.
inline void run_restart(const StrategyObjective& objective, double alpha, double v,
                        const SolverOptions& opts, const ParamVec& start,
                        FeasibleBest& tracker) {
    ParamVec p = start;
    double weight = opts.penalty_start;
    PenaltyEval eval{objective, alpha, v, weight, opts.constraint_tol, &tracker};
    for (int stage = 0; stage < opts.penalty_stages; ++stage) {
        eval.weight = weight;
        p = nelder_mead(eval, p, stage == 0 ? 0.35 : 0.08, opts.simplex_max_iter,
                        opts.simplex_tol);
        weight *= opts.penalty_factor;
    }

    // Feasibility polish: minimize the squared residuals alone. The feasible
    // tracker keeps scoring the points the polish walks through.
    auto feas = [&](const ParamVec& q) {
        const Strategy s = strategy_from_params(q);
        const ProbabilityTable tb = probability_table(s);
        double max_abs = 0.0;
        const double sq = eval.constraint_sq(tb, &max_abs);
        if (max_abs <= opts.constraint_tol) {
            const double f = objective(s, tb);
            if (f > tracker.value) {
                tracker.value = f;
                tracker.params = q;
                tracker.found = true;
            }
        }
        return sq;
    };
    nelder_mead(feas, p, 0.02, opts.polish_max_iter, 1e-18);
}

/// Multi-start maximization of a scalar strategy objective subject to
/// LGI = 1 + alpha and NSIT_j = v. Deterministic in (seed, opts): restart
/// seeds derive from the master seed and the reduction prefers higher value,
/// then lower restart index.
inline OptResult maximize_objective(const StrategyObjective& objective, Alpha alpha, double v,
                                    const SolverOptions& opts, std::uint64_t seed) {
    FeasibleBest tracker;
    const Strategy canonical = canonical_strategy(alpha);

    for (int r = 0; r < opts.restarts; ++r) {
        ParamVec start;
        if (r == 0) {
            // Guaranteed-feasible start when v = 0; still a good anchor otherwise.
            start = params_from_strategy(canonical);
        } else {
            SplitMix64 rng(rng::at(seed, static_cast<std::uint64_t>(r), 0));
            start = random_params(rng);
        }
        run_restart(objective, alpha.value, v, opts, start, tracker);
    }

    OptResult res;
    res.restarts_used = opts.restarts;
    if (tracker.found) {
        res.best_strategy = strategy_from_params(tracker.params);
        const ProbabilityTable tb = probability_table(res.best_strategy);
        res.best_value = objective(res.best_strategy, tb);
        res.residuals = {tb.lgi - (1.0 + alpha.value), tb.nsit[0] - v, tb.nsit[1] - v,
                         tb.nsit[2] - v};
        res.converged = true;
        for (double c : res.residuals)
            if (std::abs(c) > opts.constraint_tol) res.converged = false;
    }
    return res;
}

inline StrategyObjective outcome_objective(EntropyMode mode, OutcomeTarget target) {
    const auto pi = static_cast<std::size_t>(target.pair);
    const auto ia = static_cast<std::size_t>(outcome_index(target.a));
    const auto ib = static_cast<std::size_t>(outcome_index(target.b));
    if (mode == EntropyMode::joint)
        return [=](const Strategy&, const ProbabilityTable& tb) { return tb.joint[pi][ia][ib]; };
    const auto marg_idx = static_cast<std::size_t>(first_time(target.pair) - 1);
    return [=](const Strategy&, const ProbabilityTable& tb) {
        const double marginal = tb.singles[marg_idx][ia];
        // Vanishing conditioning outcome: heavily penalized, never an error.
        if (marginal < 1e-6) return -1.0;
        return tb.joint[pi][ia][ib] / marginal;
    };
}

} // namespace detail

/// Maximize the problem's objective. Without a specific target this is the
/// exact definition of P* / Pbar*: the max over the 12 separate per-outcome
/// maximizations, never a smoothed surrogate.
inline OptResult maximize(const OptProblem& problem, const SolverOptions& opts = {},
                          std::uint64_t seed = 0) {
    if (problem.target) {
        return detail::maximize_objective(
            detail::outcome_objective(problem.objective, *problem.target), problem.alpha,
            problem.nsit_tolerance, opts, seed);
    }
    OptResult best;
    bool any = false;
    int outcome_id = 0;
    for (Pair pr : all_pairs) {
        for (int a : {+1, -1}) {
            for (int b : {+1, -1}) {
                const OptResult r = detail::maximize_objective(
                    detail::outcome_objective(problem.objective, {pr, a, b}), problem.alpha,
                    problem.nsit_tolerance, opts,
                    rng::at(seed, static_cast<std::uint64_t>(outcome_id), 1));
                ++outcome_id;
                if (!r.converged && !any) {
                    if (r.best_value > best.best_value) best = r;
                    continue;
                }
                if (r.converged && (!any || r.best_value > best.best_value)) {
                    best = r;
                    any = true;
                }
            }
        }
    }
    best.restarts_used = opts.restarts;
    best.converged = any;
    return best;
}

/// Convenience wrapper used by tests: maximize an arbitrary scalar function
/// of the strategy over the same feasible set.
inline OptResult maximize_scalar(const std::function<double(const Strategy&)>& fn, Alpha alpha,
                                 double v = 0.0, const SolverOptions& opts = {},
                                 std::uint64_t seed = 0) {
    return detail::maximize_objective(
        [&fn](const Strategy& s, const ProbabilityTable&) { return fn(s); }, alpha, v, opts,
        seed);
}

struct NsitCurveRow {
    double alpha;
    double v;
    double bits;
    bool converged;
};

/// bits(alpha, v) = -log2 of the maximal conditional outcome probability
/// subject to LGI = 1 + alpha and all NSIT values equal to v. The v = 0
/// column reproduces entropy_conditional within solver noise.
inline std::vector<NsitCurveRow> randomness_vs_nsit_curve(std::span<const double> alphas,
                                                          std::span<const double> v_values,
                                                          std::uint64_t seed = 0,
                                                          const SolverOptions& opts = {}) {
    if (alphas.empty() || v_values.empty())
        throw std::invalid_argument("randomness_vs_nsit_curve: empty grid");
    std::vector<NsitCurveRow> rows;
    rows.reserve(alphas.size() * v_values.size());
    std::uint64_t cell = 0;
    for (double a : alphas) {
        for (double v : v_values) {
            const OptProblem problem(Alpha(a), v, EntropyMode::conditional);
            const OptResult r = maximize(problem, opts, rng::at(seed, cell++, 2));
            const double bits = r.best_value > 0.0 ? -std::log2(r.best_value) : 0.0;
            rows.push_back({a, v, bits, r.converged});
        }
    }
    return rows;
}

} // namespace lgcert
