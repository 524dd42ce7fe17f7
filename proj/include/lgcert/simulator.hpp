#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lgcert/qubit_core.hpp"
#include "lgcert/rng.hpp"
#include "lgcert/settings.hpp"

// Reproducible Monte Carlo generation of trial streams from a strategy,
// optionally drifting over rounds to exercise the memory-effect analysis,
// plus conversion of trials into per-configuration bit strings.

namespace lgcert {

/// Which scalar of the strategy a drift rule perturbs.
enum class DriftParam { none, nx, ny, nz, x1, y1, z1, x2, y2, z2, a, b };

/// Base strategy plus an optional sinusoidal per-round perturbation:
/// param(i) = base + amplitude * sin(2 pi i / period). Realized strategies
/// are clamped back into the valid region, so every round stays physical.
struct DriftSchedule {
    Strategy base;
    DriftParam param = DriftParam::none;
    double amplitude = 0.0;
    double period = 1.0;

    static DriftSchedule fixed(const Strategy& s) { return {s, DriftParam::none, 0.0, 1.0}; }

    bool drifting() const { return param != DriftParam::none && amplitude != 0.0; }

    Strategy at(std::uint64_t round) const {
        if (!drifting()) return base;
        const double shift =
            amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(round) / period);
        Strategy s = base;
        double nx = s.state.nx, ny = s.state.ny, nz = s.state.nz;
        double a = s.povm.a, b = s.povm.b;
        switch (param) {
        case DriftParam::nx: nx += shift; break;
        case DriftParam::ny: ny += shift; break;
        case DriftParam::nz: nz += shift; break;
        case DriftParam::x1: s.u1 = UnitaryParams(s.u1.x + shift, s.u1.y, s.u1.z); break;
        case DriftParam::y1: s.u1 = UnitaryParams(s.u1.x, s.u1.y + shift, s.u1.z); break;
        case DriftParam::z1: s.u1 = UnitaryParams(s.u1.x, s.u1.y, s.u1.z + shift); break;
        case DriftParam::x2: s.u2 = UnitaryParams(s.u2.x + shift, s.u2.y, s.u2.z); break;
        case DriftParam::y2: s.u2 = UnitaryParams(s.u2.x, s.u2.y + shift, s.u2.z); break;
        case DriftParam::z2: s.u2 = UnitaryParams(s.u2.x, s.u2.y, s.u2.z + shift); break;
        case DriftParam::a: a += shift; break;
        case DriftParam::b: b += shift; break;
        case DriftParam::none: break;
        }
        b = std::clamp(b, 0.0, 1.0);
        a = std::clamp(a, -(1.0 - b), 1.0 - b);
        const double norm = std::sqrt(nx * nx + ny * ny + nz * nz);
        if (norm > 1.0) {
            nx /= norm;
            ny /= norm;
            nz /= norm;
        }
        s.state = BlochVector(nx, ny, nz);
        s.povm = PovmParams(a, b);
        return s;
    }
};

namespace detail {

/// Draws one trial for the given round. Draw 0 picks the setting, draw 1 the
/// outcomes; both are pure functions of (seed, round), so streams are
/// independent of generation order and chunking.
inline TrialRecord sample_one(const ProbabilityTable& tb, const SettingsDistribution& dist,
                              std::uint64_t round, std::uint64_t seed) {
    TrialRecord t;
    t.index = round;

    const double u_setting = rng::uniform(seed, round, 0);
    double acc = 0.0;
    int si = 4;
    for (int i = 0; i < 5; ++i) {
        acc += dist.p[static_cast<std::size_t>(i)];
        if (u_setting < acc) {
            si = i;
            break;
        }
    }
    const Setting st = all_settings[static_cast<std::size_t>(si)];
    t.x = st.x;
    t.y = st.y;

    const double u_outcome = rng::uniform(seed, round, 1);
    if (st.x == 0) {
        t.a.reset();
        t.b = u_outcome < tb.singles[static_cast<std::size_t>(st.y - 1)][0] ? +1 : -1;
    } else {
        const auto& block = tb.joint[static_cast<std::size_t>(pair_of_setting(st))];
        // Cumulative order (+,+), (+,-), (-,+), (-,-).
        if (u_outcome < block[0][0]) {
            t.a = +1; t.b = +1;
        } else if (u_outcome < block[0][0] + block[0][1]) {
            t.a = +1; t.b = -1;
        } else if (u_outcome < block[0][0] + block[0][1] + block[1][0]) {
            t.a = -1; t.b = +1;
        } else {
            t.a = -1; t.b = -1;
        }
    }
    return t;
}

} // namespace detail

/// Rounds [first, first + count): the chunked form of sample_trials. Streams
/// assembled from chunks are byte-identical to a single full run.
inline std::vector<TrialRecord> sample_trials_chunk(const DriftSchedule& schedule,
                                                    const SettingsDistribution& dist,
                                                    std::uint64_t first, std::uint64_t count,
                                                    std::uint64_t seed) {
    dist.validate();
    schedule.base.validate();
    std::vector<TrialRecord> out;
    out.reserve(count);
    if (!schedule.drifting()) {
        const ProbabilityTable tb = probability_table(schedule.base);
        for (std::uint64_t i = first; i < first + count; ++i)
            out.push_back(detail::sample_one(tb, dist, i, seed));
    } else {
        for (std::uint64_t i = first; i < first + count; ++i)
            out.push_back(detail::sample_one(probability_table(schedule.at(i)), dist, i, seed));
    }
    return out;
}

inline std::vector<TrialRecord> sample_trials(const DriftSchedule& schedule,
                                              const SettingsDistribution& dist, std::uint64_t n,
                                              std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_trials: n must be at least 1");
    return sample_trials_chunk(schedule, dist, 0, n, seed);
}

/// Frequency-filled table plus the underlying counts. LGI and NSIT fields are
/// computed from the frequencies; singles for Q2/Q3 need the x = 0 audit
/// settings and are NaN (as are the NSIT entries) when those are absent.
struct EmpiricalTable {
    ProbabilityTable table;
    std::array<std::uint64_t, 5> setting_counts{};
    std::uint64_t n_total = 0;
    std::uint64_t n_pairs = 0;
};

inline EmpiricalTable empirical_table(std::span<const TrialRecord> trials) {
    EmpiricalTable e;
    std::array<std::array<std::array<std::uint64_t, 2>, 2>, 3> joint_counts{};
    std::array<std::uint64_t, 5> plus{};
    std::array<std::uint64_t, 2> q1_counts{}; // a outcomes over x = 1 settings

    for (const TrialRecord& t : trials) {
        t.validate();
        const auto si = static_cast<std::size_t>(setting_index(t.setting()));
        ++e.setting_counts[si];
        ++e.n_total;
        if (t.b == +1) ++plus[si];
        if (t.x == 0) continue;
        ++e.n_pairs;
        const auto pr = static_cast<std::size_t>(pair_of_setting(t.setting()));
        ++joint_counts[pr][static_cast<std::size_t>(outcome_index(*t.a))]
                      [static_cast<std::size_t>(outcome_index(t.b))];
        if (t.x == 1) ++q1_counts[static_cast<std::size_t>(outcome_index(*t.a))];
    }

    for (Pair pr : all_pairs) {
        const auto pi = static_cast<std::size_t>(pr);
        const auto si = static_cast<std::size_t>(setting_index(setting_of_pair(pr)));
        if (e.setting_counts[si] == 0)
            throw std::invalid_argument("empirical_table: pair setting never observed");
        const double n = static_cast<double>(e.setting_counts[si]);
        for (int ia = 0; ia < 2; ++ia)
            for (int ib = 0; ib < 2; ++ib)
                e.table.joint[pi][static_cast<std::size_t>(ia)][static_cast<std::size_t>(ib)] =
                    static_cast<double>(
                        joint_counts[pi][static_cast<std::size_t>(ia)][static_cast<std::size_t>(ib)]) /
                    n;
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::uint64_t q1_n = q1_counts[0] + q1_counts[1];
    e.table.singles[0] = {q1_n ? static_cast<double>(q1_counts[0]) / static_cast<double>(q1_n) : nan,
                          q1_n ? static_cast<double>(q1_counts[1]) / static_cast<double>(q1_n) : nan};
    for (int y = 2; y <= 3; ++y) {
        const auto si = static_cast<std::size_t>(setting_index({0, y}));
        const std::uint64_t c = e.setting_counts[si];
        const double fp = c ? static_cast<double>(plus[si]) / static_cast<double>(c) : nan;
        e.table.singles[static_cast<std::size_t>(y - 1)] = {fp, 1.0 - fp};
    }

    auto correlator = [](const std::array<std::array<double, 2>, 2>& j) {
        return j[0][0] - j[0][1] - j[1][0] + j[1][1];
    };
    e.table.corr12 = correlator(e.table.joint[0]);
    e.table.corr13 = correlator(e.table.joint[1]);
    e.table.corr23 = correlator(e.table.joint[2]);
    e.table.lgi = e.table.corr12 + e.table.corr23 - e.table.corr13;

    auto marginal_b_plus = [&](Pair pr) {
        const auto pi = static_cast<std::size_t>(pr);
        return e.table.joint[pi][0][0] + e.table.joint[pi][1][0];
    };
    e.table.nsit = {e.table.singles[1][0] - marginal_b_plus(Pair::q12),
                    e.table.singles[2][0] - marginal_b_plus(Pair::q13),
                    e.table.singles[2][0] - marginal_b_plus(Pair::q23)};
    return e;
}

/// Bit strings keyed by configuration (x, y, a); a = 0 stands for "no first
/// measurement". Outcome b = +1 emits '0', b = -1 emits '1', one bit per
/// trial, mirroring how detector coincidences map to bits.
struct BitOutput {
    struct Group {
        int x = 0, y = 0, a = 0;
        std::string bits;
    };
    std::vector<Group> groups; // ordered by (x, y, a descending: +1 before -1)
    std::uint64_t total_bits = 0;
    double rounds_per_second = 3865.0;

    double bits_per_second() const { return rounds_per_second; }
};

inline BitOutput bits_from_trials(std::span<const TrialRecord> trials,
                                  double rounds_per_second = 3865.0) {
    BitOutput out;
    out.rounds_per_second = rounds_per_second;
    std::map<std::array<int, 3>, std::string> grouped;
    for (const TrialRecord& t : trials) {
        t.validate();
        const int a = t.a ? *t.a : 0;
        grouped[{t.x, t.y, -a}].push_back(t.b == +1 ? '0' : '1');
        ++out.total_bits;
    }
    for (auto& [key, bits] : grouped)
        out.groups.push_back({key[0], key[1], -key[2], std::move(bits)});
    return out;
}

} // namespace lgcert
