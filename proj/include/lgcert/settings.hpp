#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "lgcert/qubit_core.hpp"

namespace lgcert {

/// One measurement-time configuration: x in {0,1,2}, y in {2,3}, x < y.
/// x = 0 means no earlier measurement (the run measures only at time y).
struct Setting {
    int x = 1;
    int y = 2;

    friend bool operator==(const Setting&, const Setting&) = default;
};

/// Canonical setting order used for array indexing and for sampling CDFs.
inline constexpr std::array<Setting, 5> all_settings{{{0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

inline int setting_index(const Setting& s) {
    for (int i = 0; i < 5; ++i)
        if (all_settings[static_cast<std::size_t>(i)] == s) return i;
    throw std::invalid_argument("invalid setting: x in {0,1,2}, y in {2,3}, x < y");
}

inline bool is_pair_setting(const Setting& s) { return s.x != 0; }

inline Pair pair_of_setting(const Setting& s) {
    if (s.x == 1 && s.y == 2) return Pair::q12;
    if (s.x == 1 && s.y == 3) return Pair::q13;
    if (s.x == 2 && s.y == 3) return Pair::q23;
    throw std::invalid_argument("setting is not a measurement pair");
}

inline Setting setting_of_pair(Pair p) {
    switch (p) {
    case Pair::q12: return {1, 2};
    case Pair::q13: return {1, 3};
    case Pair::q23: return {2, 3};
    }
    throw std::invalid_argument("invalid pair");
}

/// Probability distribution over the five settings. The three LGI pairs must
/// all have positive probability whenever certification is requested; the
/// x = 0 settings exist for NSIT auditing and may have zero mass.
struct SettingsDistribution {
    // p[i] follows the all_settings order: (0,2), (0,3), (1,2), (1,3), (2,3).
    std::array<double, 5> p{0.0, 0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

    void validate() const {
        double sum = 0.0;
        for (double v : p) {
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("setting probabilities must be nonnegative");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("setting probabilities must sum to 1");
    }

    double prob(const Setting& s) const { return p[static_cast<std::size_t>(setting_index(s))]; }
    double prob_pair(Pair pr) const { return prob(setting_of_pair(pr)); }

    /// Total mass on the three measurement pairs.
    double pair_mass() const { return p[2] + p[3] + p[4]; }

    /// q = min over the three pair settings of their (raw) probability.
    double q() const { return std::min(p[2], std::min(p[3], p[4])); }

    bool has_all_pairs() const { return p[2] > 0.0 && p[3] > 0.0 && p[4] > 0.0; }

    static SettingsDistribution uniform_pairs() { return {}; }

    /// Pairs only, with the stated probabilities (must sum to 1).
    static SettingsDistribution pairs(double p12, double p13, double p23) {
        SettingsDistribution d;
        d.p = {0.0, 0.0, p12, p13, p23};
        d.validate();
        return d;
    }

    /// Rescales `base`'s pair masses by (1 - audit_mass) and puts audit_mass,
    /// split evenly, on the no-first-measurement settings (0,2) and (0,3).
    static SettingsDistribution with_audit(const SettingsDistribution& base, double audit_mass) {
        if (!(audit_mass >= 0.0) || audit_mass >= 1.0)
            throw std::invalid_argument("audit mass must lie in [0, 1)");
        SettingsDistribution d;
        const double keep = 1.0 - audit_mass;
        d.p = {0.5 * audit_mass + keep * base.p[0], 0.5 * audit_mass + keep * base.p[1],
               keep * base.p[2], keep * base.p[3], keep * base.p[4]};
        d.validate();
        return d;
    }
};

/// One experimental round: which times were measured and what came out.
/// `a` is the outcome at time x (absent when x = 0), `b` the outcome at y.
struct TrialRecord {
    std::uint64_t index = 0;
    int x = 1;
    int y = 2;
    std::optional<int> a; // +1 / -1, engaged iff x != 0
    int b = +1;           // +1 / -1

    Setting setting() const { return {x, y}; }

    void validate() const {
        setting_index({x, y});
        if (a.has_value() != (x != 0))
            throw std::invalid_argument("trial outcome a must be present iff x != 0");
        if (a && *a != 1 && *a != -1) throw std::invalid_argument("outcome a must be +1 or -1");
        if (b != 1 && b != -1) throw std::invalid_argument("outcome b must be +1 or -1");
    }
};

} // namespace lgcert
