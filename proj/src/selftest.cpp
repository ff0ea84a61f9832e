#include "qkd/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "qkd/channel.hpp"
#include "qkd/decoy_lp.hpp"
#include "qkd/finitekey.hpp"

namespace qkd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Smallest slack over all inequality rows and bounds (negative when one is
/// violated) and the largest equality residual, for feasibility judgments.
struct FeasibilityMargin {
    double min_slack = kInf;
    double eq_residual = 0.0;

    bool within(double tol) const { return eq_residual <= tol && min_slack >= -tol; }
    bool robust(double margin) const {
        return eq_residual <= 1e-9 && min_slack >= margin;
    }
};

FeasibilityMargin margin_of(const LinearProgram& lp, const std::vector<double>& x) {
    FeasibilityMargin m;
    for (const LpRow& row : lp.rows) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) lhs += row.coeffs[j] * x[j];
        if (row.rel == Rel::LE) m.min_slack = std::min(m.min_slack, row.rhs - lhs);
        if (row.rel == Rel::GE) m.min_slack = std::min(m.min_slack, lhs - row.rhs);
        if (row.rel == Rel::EQ) {
            m.eq_residual = std::max(m.eq_residual, std::abs(lhs - row.rhs));
        }
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!lp.lower.empty()) m.min_slack = std::min(m.min_slack, x[j] - lp.lower[j]);
        if (!lp.upper.empty()) m.min_slack = std::min(m.min_slack, lp.upper[j] - x[j]);
    }
    return m;
}

/// Solve an n x n linear system in-place; false when numerically singular.
bool solve_square(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t i = col + 1; i < n; ++i) {
            if (std::abs(a[i * n + col]) > std::abs(a[pivot * n + col])) pivot = i;
        }
        if (std::abs(a[pivot * n + col]) < 1e-10) return false;
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[col * n + j], a[pivot * n + j]);
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col) continue;
            const double factor = a[i * n + col] / a[col * n + col];
            if (factor == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) a[i * n + j] -= factor * a[col * n + j];
            b[i] -= factor * b[col];
        }
    }
    for (std::size_t i = 0; i < n; ++i) b[i] /= a[i * n + i];
    return true;
}

struct Hyperplane {
    std::vector<double> coeffs;
    double rhs;
};

}  // namespace

LpSolution solve_lp_by_vertex_enumeration(const LinearProgram& lp, double tol) {
    const std::size_t n = lp.num_vars();
    if (n == 0) throw std::invalid_argument("linear program has no variables");
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = lp.lower.empty() ? 0.0 : lp.lower[j];
        const double hi = lp.upper.empty() ? kInf : lp.upper[j];
        if (!std::isfinite(lo) || !std::isfinite(hi)) {
            throw std::invalid_argument("vertex enumeration needs finite variable boxes");
        }
    }

    std::vector<Hyperplane> planes;
    for (const LpRow& row : lp.rows) planes.push_back({row.coeffs, row.rhs});
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> unit(n, 0.0);
        unit[j] = 1.0;
        planes.push_back({unit, lp.lower.empty() ? 0.0 : lp.lower[j]});
        planes.push_back({unit, lp.upper[j]});
    }

    LpSolution best;
    best.status = LpStatus::Infeasible;
    const double sign = lp.sense == Sense::Minimize ? 1.0 : -1.0;
    double best_value = kInf;

    // Walk every n-subset of hyperplanes; each non-singular intersection is
    // a vertex candidate.
    std::vector<std::size_t> pick(n, 0);
    std::function<void(std::size_t, std::size_t)> visit = [&](std::size_t start,
                                                              std::size_t depth) {
        if (depth == n) {
            std::vector<double> a(n * n);
            std::vector<double> b(n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) a[i * n + j] = planes[pick[i]].coeffs[j];
                b[i] = planes[pick[i]].rhs;
            }
            if (!solve_square(a, b, n)) return;
            if (!margin_of(lp, b).within(tol)) return;

            double value = 0.0;
            for (std::size_t j = 0; j < n; ++j) value += lp.objective[j] * b[j];
            if (sign * value < best_value) {
                best_value = sign * value;
                best.status = LpStatus::Optimal;
                best.x = b;
                best.objective = value;
            }
            return;
        }
        for (std::size_t i = start; i + (n - depth) <= planes.size(); ++i) {
            pick[depth] = i;
            visit(i + 1, depth + 1);
        }
    };
    visit(0, 0);
    return best;
}

SelftestOutcome lp_cross_check(int cases, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> var_count(2, 5);
    std::uniform_int_distribution<int> row_count(1, 5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    SelftestOutcome outcome;
    for (int c = 0; c < cases; ++c) {
        ++outcome.cases;

        const std::size_t n = static_cast<std::size_t>(var_count(rng));
        const std::size_t m = static_cast<std::size_t>(row_count(rng));

        LinearProgram lp;
        lp.sense = unit(rng) < 0.5 ? Sense::Minimize : Sense::Maximize;
        lp.objective.resize(n);
        lp.lower.resize(n);
        lp.upper.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            lp.objective[j] = -2.0 + 4.0 * unit(rng);
            lp.lower[j] = -3.0 * unit(rng);
            lp.upper[j] = lp.lower[j] + 0.5 + 3.5 * unit(rng);
        }

        // A known interior point keeps a share of the cases feasible on
        // purpose; the rest take their chances.
        std::vector<double> anchor(n);
        for (std::size_t j = 0; j < n; ++j) {
            anchor[j] = lp.lower[j] + unit(rng) * (lp.upper[j] - lp.lower[j]);
        }
        const bool anchored = unit(rng) < 0.4;

        for (std::size_t i = 0; i < m; ++i) {
            LpRow row;
            row.coeffs.resize(n);
            for (std::size_t j = 0; j < n; ++j) {
                row.coeffs[j] = unit(rng) < 0.2 ? 0.0 : -3.0 + 6.0 * unit(rng);
            }
            const double pick_rel = unit(rng);
            row.rel = pick_rel < 0.4 ? Rel::LE : pick_rel < 0.75 ? Rel::GE : Rel::EQ;
            if (anchored) {
                double at_anchor = 0.0;
                for (std::size_t j = 0; j < n; ++j) at_anchor += row.coeffs[j] * anchor[j];
                const double slack = 2.0 * unit(rng);
                if (row.rel == Rel::LE) row.rhs = at_anchor + slack;
                if (row.rel == Rel::GE) row.rhs = at_anchor - slack;
                if (row.rel == Rel::EQ) row.rhs = at_anchor;
            } else {
                row.rhs = -4.0 + 9.0 * unit(rng);
            }
            lp.rows.push_back(std::move(row));
        }

        const LpSolution fast = solve_lp(lp);
        const LpSolution slow = solve_lp_by_vertex_enumeration(lp);

        auto fail = [&](const std::string& why) {
            ++outcome.failures;
            if (outcome.notes.size() < 10) {
                std::ostringstream note;
                note << "case " << c << ": " << why;
                outcome.notes.push_back(note.str());
            }
        };

        if (fast.status == LpStatus::Optimal && slow.status == LpStatus::Optimal) {
            const double scale = std::max({1.0, std::abs(fast.objective),
                                           std::abs(slow.objective)});
            if (std::abs(fast.objective - slow.objective) > 1e-6 * scale) {
                std::ostringstream why;
                why << "objectives differ: " << fast.objective << " vs "
                    << slow.objective;
                fail(why.str());
            } else if (!margin_of(lp, fast.x).within(1e-6)) {
                fail("simplex point violates a constraint");
            }
        } else if (fast.status == LpStatus::Optimal) {
            // The enumerator can miss a vertex only through a singular
            // system; accept when the simplex point is genuinely feasible.
            if (!margin_of(lp, fast.x).within(1e-7)) {
                fail("simplex claims optimal with an infeasible point");
            }
        } else if (slow.status == LpStatus::Optimal) {
            // Marginally feasible programs may round either way; only a
            // robustly feasible vertex proves the simplex wrong.
            if (margin_of(lp, slow.x).robust(1e-6)) {
                fail("simplex claims infeasible, reference found a robust vertex");
            }
        } else if (fast.status != slow.status) {
            std::ostringstream why;
            why << "status mismatch: " << to_string(fast.status) << " vs "
                << to_string(slow.status);
            fail(why.str());
        }
    }
    return outcome;
}

SelftestOutcome bounds_sandwich_check(int cases, std::uint64_t seed,
                                      const ProtocolParams& params) {
    SelftestOutcome outcome;
    for (int c = 0; c < cases; ++c) {
        ++outcome.cases;
        const SessionCounts counts =
            simulate_session_stochastic(params, seed + static_cast<std::uint64_t>(c));

        auto truth = [&](Basis basis, bool errors, int n, bool signal_only) {
            const int b = static_cast<int>(basis);
            long long total = 0;
            for (int k = 0; k < kIntensityCount; ++k) {
                if (signal_only && k != 0) continue;
                const auto& v = errors ? counts.errors_by_photon_number[b][k]
                                       : counts.by_photon_number[b][k];
                total += v[static_cast<std::size_t>(n)];
            }
            return static_cast<double>(total);
        };

        std::vector<std::string> broken;
        auto expect = [&](bool ok, const char* what) {
            if (!ok) broken.push_back(what);
        };

        auto check_bounds = [&](const DecoyBounds& bounds, bool signal_only,
                                const char* tag) {
            const double z0 = truth(Basis::Z, false, 0, signal_only);
            const double z1 = truth(Basis::Z, false, 1, signal_only);
            const double x1 = truth(Basis::X, false, 1, signal_only);
            const double x1e = truth(Basis::X, true, 1, signal_only);
            const double slop = 1e-6;

            expect(bounds.n0_low <= z0 + slop, tag);
            expect(bounds.n1_low <= z1 + slop, tag);
            expect(bounds.n1_up >= z1 - slop, tag);
            expect(bounds.s_x1_low <= x1 + slop, tag);
            expect(bounds.v_x1_up >= x1e - slop, tag);
            if (x1 > 0.0 && bounds.eph_up < 0.5) {
                expect(bounds.eph_up >= x1e / x1 - slop, tag);
            }
        };

        try {
            check_bounds(decoy_bounds_analytic(counts, params), false, "analytic");
            check_bounds(decoy_bounds_lp(counts, params), true, "solver");
        } catch (const std::exception& err) {
            broken.push_back(err.what());
        }

        if (!broken.empty()) {
            ++outcome.failures;
            if (outcome.notes.size() < 10) {
                std::ostringstream note;
                note << "case " << c << ": " << broken.size()
                     << " bound(s) missed the truth (" << broken.front() << ")";
                outcome.notes.push_back(note.str());
            }
        }
    }
    return outcome;
}

}  // namespace qkd
