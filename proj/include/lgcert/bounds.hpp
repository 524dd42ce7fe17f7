#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "lgcert/qubit_core.hpp"

// Closed-form certified-randomness bounds as a function of the LGI excess
// alpha (LGI = 1 + alpha), together with the strategy family that attains
// them. Everything here is a total closed-form evaluation; no iteration.

namespace lgcert {

/// LGI excess above the classical bound: LGI = 1 + alpha, alpha in (0, 0.5].
struct Alpha {
    double value;

    explicit Alpha(double v) : value(v) {
        if (!(v > 0.0) || v > 0.5 + 1e-15 || !std::isfinite(v))
            throw std::domain_error("alpha must lie in (0, 0.5]");
        if (value > 0.5) value = 0.5;
    }
};

enum class EntropyMode { joint, conditional };

inline const char* to_string(EntropyMode m) {
    return m == EntropyMode::joint ? "joint" : "conditional";
}

/// Largest joint outcome probability compatible with LGI = 1 + alpha under
/// exact NSIT: P* = (1 + alpha + sqrt(1 - 2 alpha)) / 4.
inline double pstar_joint(Alpha alpha) {
    const double a = alpha.value;
    return 0.25 * (1.0 + a + std::sqrt(std::max(0.0, 1.0 - 2.0 * a)));
}

/// Conditional counterpart, securing against adversarial state preparation:
/// Pbar* = 2 P*.
inline double pstar_conditional(Alpha alpha) {
    return 2.0 * pstar_joint(alpha);
}

/// Guaranteed bits per round from the joint-probability bound.
inline double entropy_joint(Alpha alpha) {
    return -std::log2(pstar_joint(alpha));
}

/// Guaranteed bits per round from the conditional-probability bound.
inline double entropy_conditional(Alpha alpha) {
    return -std::log2(pstar_conditional(alpha));
}

/// The strategy family saturating both bounds at every violation level:
/// a = n = 0, b = 1, t = 0, cos 2z1 = cos 2z2 = (1 - sqrt(1 - 2 alpha)) / 2.
/// It satisfies all three NSIT conditions exactly, has LGI = 1 + alpha, and
/// its P(+,-|Q1,Q3) equals pstar_joint(alpha).
inline Strategy canonical_strategy(Alpha alpha) {
    const double c = 0.5 * (1.0 - std::sqrt(std::max(0.0, 1.0 - 2.0 * alpha.value)));
    const double z = 0.5 * std::acos(c);
    Strategy s;
    s.state = BlochVector(0.0, 0.0, 0.0);
    s.u1 = UnitaryParams(0.0, 0.0, z);
    s.u2 = UnitaryParams(0.0, 0.0, z);
    s.povm = PovmParams(0.0, 1.0);
    return s;
}

struct BoundRow {
    double alpha;
    double bits;
    EntropyMode mode;
};

/// Tabulates the chosen entropy bound over a grid of alpha values.
/// alpha = 0 is accepted as a limit row (1 bit joint, 0 bits conditional);
/// the certification entry points themselves reject alpha = 0.
inline std::vector<BoundRow> bound_curve(std::span<const double> grid, EntropyMode mode) {
    if (grid.empty()) throw std::invalid_argument("bound_curve: empty alpha grid");
    std::vector<BoundRow> rows;
    rows.reserve(grid.size());
    for (double a : grid) {
        double bits;
        if (a == 0.0) {
            bits = mode == EntropyMode::joint ? 1.0 : 0.0;
        } else {
            const Alpha alpha(a);
            bits = mode == EntropyMode::joint ? entropy_joint(alpha)
                                              : entropy_conditional(alpha);
        }
        rows.push_back({a, bits, mode});
    }
    return rows;
}

} // namespace lgcert
