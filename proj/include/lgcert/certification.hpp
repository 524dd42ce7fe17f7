#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lgcert/bounds.hpp"
#include "lgcert/qubit_core.hpp"
#include "lgcert/settings.hpp"

// Finite-statistics certification with memory effects. Device behavior may
// depend on everything that happened in earlier rounds, so instead of i.i.d.
// confidence intervals the LGI estimate carries an Azuma-Hoeffding radius:
// the per-round scores minus their conditional means form a martingale with
// increments bounded by 1/q + Iq, which gives
//
//   delta = exp(-n eps^2 / (2 (1/q + Iq)^2)),
//
// i.e. the true average violation is below (I_hat - eps) with probability at
// most delta. Certified bits follow by plugging (I_hat - eps - 1) into the
// entropy bound; sub-threshold inputs clamp to zero bits rather than error.

namespace lgcert {

/// Per-trial scoring coefficients for the LGI estimator and the three NSIT
/// estimators, tied to the settings distribution they were built for.
///
/// LGI coefficients follow c = sign(pair) * a * b / P(pair), with sign +1 for
/// (1,2), (2,3) and -1 for (1,3). P(pair) is the settings probability
/// conditioned on a pair setting being chosen, so that averaging the scores
/// over pair-setting trials alone stays exactly unbiased even when part of
/// the distribution's mass sits on the x = 0 audit settings. For pair-only
/// distributions this is the raw P(x,y).
///
/// NSIT coefficient blocks difference a no-first-measurement frequency
/// against the matching marginal of a pair setting:
///   N1: P(+ | (0,2)) - P(b=+ | (1,2)),
///   N2: P(+ | (0,3)) - P(b=+ | (1,3)),
///   N3: P(+ | (0,3)) - P(b=+ | (2,3)).
struct EstimatorSpec {
    SettingsDistribution dist;
    // c[setting][ia][ib]; zero on the x = 0 settings.
    std::array<std::array<std::array<double, 2>, 2>, 5> c{};
    // m[j][setting][ia][ib]; ia = 2 means "a absent" (x = 0 settings).
    std::array<std::array<std::array<std::array<double, 2>, 3>, 5>, 3> m{};

    /// Score of one pair-setting trial under the LGI coefficients.
    double lgi_score(const TrialRecord& t) const {
        t.validate();
        if (t.x == 0) return 0.0;
        const auto si = static_cast<std::size_t>(setting_index(t.setting()));
        return c[si][static_cast<std::size_t>(outcome_index(*t.a))]
                [static_cast<std::size_t>(outcome_index(t.b))];
    }
};

inline double lgi_pair_sign(Pair p) { return p == Pair::q13 ? -1.0 : +1.0; }

inline EstimatorSpec default_estimator(const SettingsDistribution& dist) {
    dist.validate();
    if (!dist.has_all_pairs())
        throw std::invalid_argument("estimator requires positive probability on all three pairs");

    EstimatorSpec spec;
    spec.dist = dist;
    const double pair_mass = dist.pair_mass();
    for (Pair pr : all_pairs) {
        const auto si = static_cast<std::size_t>(setting_index(setting_of_pair(pr)));
        const double p_cond = dist.p[si] / pair_mass;
        for (int ia = 0; ia < 2; ++ia)
            for (int ib = 0; ib < 2; ++ib) {
                const double a = ia == 0 ? 1.0 : -1.0;
                const double b = ib == 0 ? 1.0 : -1.0;
                spec.c[si][static_cast<std::size_t>(ia)][static_cast<std::size_t>(ib)] =
                    lgi_pair_sign(pr) * a * b / p_cond;
            }
    }

    // NSIT j: +[b=+]/P(single setting) on (0,y_j), -[b=+]/P(pair) on pair_j.
    const std::array<std::pair<int, Pair>, 3> nsit_parts{
        {{setting_index({0, 2}), Pair::q12},
         {setting_index({0, 3}), Pair::q13},
         {setting_index({0, 3}), Pair::q23}}};
    for (int j = 0; j < 3; ++j) {
        const auto [single_idx, pr] = nsit_parts[static_cast<std::size_t>(j)];
        const auto pair_idx = setting_index(setting_of_pair(pr));
        const double p_single = dist.p[static_cast<std::size_t>(single_idx)];
        const double p_pair = dist.p[static_cast<std::size_t>(pair_idx)];
        auto& mj = spec.m[static_cast<std::size_t>(j)];
        if (p_single > 0.0)
            mj[static_cast<std::size_t>(single_idx)][2][0] = 1.0 / p_single;
        for (int ia = 0; ia < 2; ++ia)
            mj[static_cast<std::size_t>(pair_idx)][static_cast<std::size_t>(ia)][0] =
                -1.0 / p_pair;
    }
    return spec;
}

/// Exact expectation of the LGI estimator under (strategy, spec.dist),
/// computed from the closed-form probability table, never by sampling.
inline double expected_lgi(const EstimatorSpec& spec, const Strategy& s) {
    const ProbabilityTable tb = probability_table(s);
    const double pair_mass = spec.dist.pair_mass();
    double e = 0.0;
    for (Pair pr : all_pairs) {
        const auto si = static_cast<std::size_t>(setting_index(setting_of_pair(pr)));
        const double p_cond = spec.dist.p[si] / pair_mass;
        for (int ia = 0; ia < 2; ++ia)
            for (int ib = 0; ib < 2; ++ib)
                e += p_cond *
                     spec.c[si][static_cast<std::size_t>(ia)][static_cast<std::size_t>(ib)] *
                     tb.joint[static_cast<std::size_t>(pr)][static_cast<std::size_t>(ia)]
                             [static_cast<std::size_t>(ib)];
    }
    return e;
}

/// Exact expectations of the three NSIT estimators (per-round score form,
/// averaged over the full distribution). The estimators difference against
/// the no-first-measurement settings, so those must carry probability.
inline std::array<double, 3> expected_nsit(const EstimatorSpec& spec, const Strategy& s) {
    if (spec.dist.p[0] <= 0.0 || spec.dist.p[1] <= 0.0)
        throw std::invalid_argument(
            "NSIT estimators need positive probability on the x = 0 settings");
    const ProbabilityTable tb = probability_table(s);
    std::array<double, 3> e{};
    for (int j = 0; j < 3; ++j) {
        double acc = 0.0;
        for (int si = 0; si < 5; ++si) {
            const Setting st = all_settings[static_cast<std::size_t>(si)];
            const double ps = spec.dist.p[static_cast<std::size_t>(si)];
            if (ps == 0.0) continue;
            const auto& mj = spec.m[static_cast<std::size_t>(j)][static_cast<std::size_t>(si)];
            if (st.x == 0) {
                for (int ib = 0; ib < 2; ++ib)
                    acc += ps * mj[2][static_cast<std::size_t>(ib)] *
                           tb.singles[static_cast<std::size_t>(st.y - 1)][static_cast<std::size_t>(ib)];
            } else {
                const auto pr = static_cast<std::size_t>(pair_of_setting(st));
                for (int ia = 0; ia < 2; ++ia)
                    for (int ib = 0; ib < 2; ++ib)
                        acc += ps * mj[static_cast<std::size_t>(ia)][static_cast<std::size_t>(ib)] *
                               tb.joint[pr][static_cast<std::size_t>(ia)][static_cast<std::size_t>(ib)];
            }
        }
        e[static_cast<std::size_t>(j)] = acc;
    }
    return e;
}

/// I_hat: mean LGI score over the pair-setting trials. Trials with x = 0 are
/// used only by the NSIT estimators and are excluded here.
inline double lgi_estimate(std::span<const TrialRecord> trials, const EstimatorSpec& spec) {
    double sum = 0.0;
    std::uint64_t n_pairs = 0;
    for (const TrialRecord& t : trials) {
        if (spec.dist.prob(t.setting()) <= 0.0)
            throw std::invalid_argument("trial uses a setting with zero probability");
        if (t.x == 0) continue;
        sum += spec.lgi_score(t);
        ++n_pairs;
    }
    if (n_pairs == 0) throw std::invalid_argument("no pair-setting trials to estimate from");
    return sum / static_cast<double>(n_pairs);
}

/// Frequency-difference NSIT estimates:
///   N1 = freq(b=+ | (0,2)) - freq(b=+ | (1,2)), and analogously
///   N2 with (0,3) vs (1,3), N3 with (0,3) vs (2,3).
inline std::array<double, 3> nsit_estimates(std::span<const TrialRecord> trials,
                                            const EstimatorSpec& spec) {
    std::array<std::uint64_t, 5> count{};
    std::array<std::uint64_t, 5> plus{};
    for (const TrialRecord& t : trials) {
        t.validate();
        if (spec.dist.prob(t.setting()) <= 0.0)
            throw std::invalid_argument("trial uses a setting with zero probability");
        const auto si = static_cast<std::size_t>(setting_index(t.setting()));
        ++count[si];
        if (t.b == +1) ++plus[si];
    }
    const auto freq = [&](const Setting& s) {
        const auto si = static_cast<std::size_t>(setting_index(s));
        if (count[si] == 0) throw std::invalid_argument("nsit_estimates: missing setting in trials");
        return static_cast<double>(plus[si]) / static_cast<double>(count[si]);
    };
    return {freq({0, 2}) - freq({1, 2}),
            freq({0, 3}) - freq({1, 3}),
            freq({0, 3}) - freq({2, 3})};
}

// ---------------------------------------------------------------------------
// Concentration bounds
// ---------------------------------------------------------------------------

/// Azuma-Hoeffding radius at failure probability delta:
/// eps = (1/q + Iq) sqrt(2 ln(1/delta) / n).
inline double epsilon_from_delta(std::uint64_t n, double delta, double q,
                                 double Iq = quantum_lgi_max) {
    if (n < 1) throw std::invalid_argument("n must be at least 1");
    if (!(delta > 0.0) || !(delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
    if (!(q > 0.0) || q > 1.0) throw std::invalid_argument("q must lie in (0,1]");
    if (!(Iq > 0.0)) throw std::invalid_argument("Iq must be positive");
    return (1.0 / q + Iq) * std::sqrt(2.0 * std::log(1.0 / delta) / static_cast<double>(n));
}

/// Azuma-Hoeffding radii for the three NSIT estimates. The increment bound
/// is 1 + Nq per condition, squared inside the exponent:
/// eps_j = (1 + Nq_j) sqrt(2 ln(1/delta) / n).
inline std::array<double, 3> nsit_deviation(std::uint64_t n, double delta,
                                            std::array<double, 3> Nq = {0.5, 0.5, 0.5}) {
    if (n < 1) throw std::invalid_argument("n must be at least 1");
    if (!(delta > 0.0) || delta > 1.0) throw std::invalid_argument("delta must lie in (0,1]");
    const double root = std::sqrt(2.0 * std::log(1.0 / delta) / static_cast<double>(n));
    return {(1.0 + Nq[0]) * root, (1.0 + Nq[1]) * root, (1.0 + Nq[2]) * root};
}

struct CertificationReport {
    std::uint64_t n = 0;
    double q = 0.0;
    double delta = 0.0;
    double I_hat = 0.0;
    double epsilon = 0.0;   // 0 when memory accounting is disabled
    double alpha_eff = 0.0; // I_hat - epsilon - 1
    EntropyMode mode = EntropyMode::conditional;
    double bits_per_round = 0.0;
    std::uint64_t total_bits = 0; // floor(n * bits_per_round)
    std::optional<std::array<double, 3>> nsit_hat; // filled when trials were given
    std::array<double, 3> nsit_epsilon{};
    double Iq = quantum_lgi_max;
};

/// Certified min-entropy accounting for an observed violation I_hat over n
/// rounds. `memory` selects the martingale radius (the default); without it
/// epsilon is 0 and the bound is the i.i.d. one. alpha_eff above 0.5 (only
/// possible for inputs beyond the quantum ceiling) is clamped to 0.5.
inline CertificationReport certify(double I_hat, std::uint64_t n,
                                   const SettingsDistribution& dist, double delta,
                                   EntropyMode mode = EntropyMode::conditional,
                                   bool memory = true) {
    if (!(I_hat >= -3.0) || !(I_hat <= 3.0))
        throw std::invalid_argument("I_hat outside plausible range [-3, 3]");
    dist.validate();
    if (!dist.has_all_pairs())
        throw std::invalid_argument("certification requires positive probability on all three pairs");

    CertificationReport r;
    r.n = n;
    r.q = dist.q();
    r.delta = delta;
    r.I_hat = I_hat;
    r.mode = mode;
    r.epsilon = memory ? epsilon_from_delta(n, delta, r.q) : 0.0;
    if (!memory && (!(delta > 0.0) || !(delta < 1.0)))
        throw std::invalid_argument("delta must lie in (0,1)");
    r.alpha_eff = I_hat - r.epsilon - 1.0;
    if (r.alpha_eff > 0.0) {
        const Alpha a(std::min(r.alpha_eff, 0.5));
        r.bits_per_round = mode == EntropyMode::conditional ? entropy_conditional(a)
                                                            : entropy_joint(a);
        r.total_bits = static_cast<std::uint64_t>(
            std::floor(static_cast<double>(n) * r.bits_per_round));
    }
    r.nsit_epsilon = nsit_deviation(n, delta);
    return r;
}

struct MemoryCurveRow {
    std::uint64_t n;
    std::uint64_t total_bits;
    EntropyMode mode;
};

struct MemoryCurve {
    std::vector<MemoryCurveRow> rows;
    /// Smallest grid n with total_bits > 0, when any.
    std::optional<std::uint64_t> first_positive_n;
};

inline MemoryCurve memory_curve(double I_hat, double delta, const SettingsDistribution& dist,
                                std::span<const std::uint64_t> n_grid,
                                EntropyMode mode = EntropyMode::conditional,
                                bool memory = true) {
    if (n_grid.empty()) throw std::invalid_argument("memory_curve: empty n grid");
    MemoryCurve curve;
    curve.rows.reserve(n_grid.size());
    for (std::uint64_t n : n_grid) {
        const CertificationReport r = certify(I_hat, n, dist, delta, mode, memory);
        curve.rows.push_back({n, r.total_bits, mode});
        if (!curve.first_positive_n && r.total_bits > 0) curve.first_positive_n = n;
    }
    return curve;
}

/// Smallest n for which the confidence radius drops below the observed
/// excess, i.e. alpha_eff = I_hat - eps(n) - 1 turns positive. Rounds with
/// n at or below the crossing certify zero bits. Empty when I_hat <= 1.
inline std::optional<std::uint64_t> epsilon_crossing(double I_hat, double delta, double q,
                                                     double Iq = quantum_lgi_max) {
    if (I_hat <= 1.0) return std::nullopt;
    const double c = 1.0 / q + Iq;
    const double excess = I_hat - 1.0;
    const double n_star = 2.0 * c * c * std::log(1.0 / delta) / (excess * excess);
    // First integer strictly beyond the crossing (equality still gives 0 bits).
    return static_cast<std::uint64_t>(std::floor(n_star)) + 1;
}

} // namespace lgcert
