#include "qkd/optimize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "qkd/report.hpp"

namespace qkd {

namespace {

constexpr double kMargin = 1e-6;  // keeps strict inequalities strict
constexpr double kGolden = 0.6180339887498949;

struct Knobs {
    double u, v, p_u, p_v, qz;
};

void apply(const Knobs& k, ProtocolParams& p) {
    p.intensity.u = k.u;
    p.intensity.v = k.v;
    p.prob.p_u = k.p_u;
    p.prob.p_v = k.p_v;
    p.prob.p_w = 1.0 - k.p_u - k.p_v;
    p.prob.qz_alice = k.qz;
    p.prob.qz_bob = k.qz;
}

struct Interval {
    double lo, hi;
    bool usable() const { return lo < hi; }
};

/// Feasible range of one coordinate given the current values of the others.
Interval feasible(int coord, const Knobs& k, const OptimizeBox& box, double w) {
    switch (coord) {
        case 0: return {std::max(box.u_min, k.v + w + kMargin), box.u_max};
        case 1:
            return {std::max(box.v_min, w + kMargin),
                    std::min(box.v_max, k.u - w - kMargin)};
        case 2:
            return {box.p_u_min, std::min(box.p_u_max, 1.0 - k.p_v - kMargin)};
        case 3:
            return {box.p_v_min, std::min(box.p_v_max, 1.0 - k.p_u - kMargin)};
        default:
            return {std::clamp(box.qz_min, kMargin, 1.0 - kMargin),
                    std::clamp(box.qz_max, kMargin, 1.0 - kMargin)};
    }
}

double& coord_ref(Knobs& k, int coord) {
    switch (coord) {
        case 0: return k.u;
        case 1: return k.v;
        case 2: return k.p_u;
        case 3: return k.p_v;
        default: return k.qz;
    }
}

}  // namespace

OptimizeResult optimize_params(const ProtocolParams& base, const OptimizeBox& box,
                               const OptimizeOptions& options) {
    const double w = base.intensity.w;

    auto clamp_knobs = [&](Knobs k) {
        for (int c = 0; c < 5; ++c) {
            Interval iv = feasible(c, k, box, w);
            if (!iv.usable()) return std::pair{k, false};
            coord_ref(k, c) = std::clamp(coord_ref(k, c), iv.lo, iv.hi);
        }
        return std::pair{k, true};
    };

    OptimizeResult result;
    result.key_rate_bps = -1.0;

    auto rate_of = [&](const Knobs& k) {
        ProtocolParams p = base;
        apply(k, p);
        if (!p.validate().empty()) return 0.0;
        ++result.evaluations;
        try {
            return evaluate_expectation(p).v2.key_rate_bps;
        } catch (const std::exception&) {
            return 0.0;  // unusable corner of the box, not a fatal condition
        }
    };

    const Knobs mid{(box.u_min + box.u_max) / 2, (box.v_min + box.v_max) / 2,
                    (box.p_u_min + box.p_u_max) / 2, (box.p_v_min + box.p_v_max) / 2,
                    (box.qz_min + box.qz_max) / 2};
    const Knobs spread{box.u_min + 0.75 * (box.u_max - box.u_min),
                       box.v_min + 0.25 * (box.v_max - box.v_min),
                       box.p_u_min + 0.75 * (box.p_u_max - box.p_u_min),
                       box.p_v_min + 0.25 * (box.p_v_max - box.p_v_min),
                       (box.qz_min + box.qz_max) / 2};
    const Knobs from_base{base.intensity.u, base.intensity.v, base.prob.p_u,
                          base.prob.p_v, base.prob.qz_alice};
    const std::array<Knobs, 3> starts{from_base, mid, spread};

    bool any_start = false;
    for (const Knobs& start : starts) {
        auto [k, ok] = clamp_knobs(start);
        if (!ok) continue;
        any_start = true;

        double best = rate_of(k);
        int pass = 0;
        for (; pass < options.max_passes; ++pass) {
            const double before = best;
            for (int c = 0; c < 5; ++c) {
                Interval iv = feasible(c, k, box, w);
                if (!iv.usable()) continue;

                // Golden-section line search for the maximum on [lo, hi].
                double a = iv.lo, b = iv.hi;
                double x1 = b - kGolden * (b - a);
                double x2 = a + kGolden * (b - a);
                Knobs k1 = k, k2 = k;
                coord_ref(k1, c) = x1;
                coord_ref(k2, c) = x2;
                double f1 = rate_of(k1), f2 = rate_of(k2);
                for (int it = 0; it < options.golden_iterations; ++it) {
                    if (f1 < f2) {
                        a = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = a + kGolden * (b - a);
                        Knobs kt = k;
                        coord_ref(kt, c) = x2;
                        f2 = rate_of(kt);
                    } else {
                        b = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = b - kGolden * (b - a);
                        Knobs kt = k;
                        coord_ref(kt, c) = x1;
                        f1 = rate_of(kt);
                    }
                }
                const double x_best = f1 >= f2 ? x1 : x2;
                const double f_best = std::max(f1, f2);
                if (f_best > best) {
                    best = f_best;
                    coord_ref(k, c) = x_best;
                }
            }
            if (best <= before * (1.0 + options.min_gain_per_pass)) {
                ++pass;
                break;
            }
        }

        if (best > result.key_rate_bps) {
            result.key_rate_bps = best;
            result.passes = pass;
            ProtocolParams p = base;
            apply(k, p);
            result.params = p;
        }
    }

    if (!any_start) {
        throw std::runtime_error("optimization box admits no valid parameter set");
    }
    if (result.key_rate_bps < 0.0) result.key_rate_bps = 0.0;
    return result;
}

}  // namespace qkd
