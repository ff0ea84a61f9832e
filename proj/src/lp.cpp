#include "qkd/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qkd {

const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        case LpStatus::IterationLimit: return "iteration_limit";
    }
    return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

/// How an original variable maps into the non-negative standard form.
struct VarMap {
    int col = -1;      // shifted variable, or its positive part
    int neg_col = -1;  // negative part when the variable has no finite lower bound
    double shift = 0.0;
};

class SimplexTableau {
public:
    SimplexTableau(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), cells_((rows + 1) * (cols + 1), 0.0),
          basis_(rows, -1) {}

    double& at(std::size_t i, std::size_t j) { return cells_[i * (cols_ + 1) + j]; }
    double at(std::size_t i, std::size_t j) const { return cells_[i * (cols_ + 1) + j]; }
    double& rhs(std::size_t i) { return at(i, cols_); }
    double rhs(std::size_t i) const { return at(i, cols_); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    int basis(std::size_t i) const { return basis_[i]; }
    void set_basis(std::size_t i, int col) { basis_[i] = static_cast<int>(col); }

    void pivot(std::size_t pr, std::size_t pc) {
        const double inv = 1.0 / at(pr, pc);
        for (std::size_t j = 0; j <= cols_; ++j) at(pr, j) *= inv;
        at(pr, pc) = 1.0;
        for (std::size_t i = 0; i <= rows_; ++i) {
            if (i == pr) continue;
            const double factor = at(i, pc);
            if (factor == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) at(i, j) -= factor * at(pr, j);
            at(i, pc) = 0.0;
        }
        basis_[pr] = static_cast<int>(pc);
    }

    /// Bland-rule pivoting until the objective row has no improving column
    /// among the first `usable_cols` columns.  Returns the phase outcome.
    LpStatus run(std::size_t usable_cols, double tol, long long max_iterations,
                 long long& iterations) {
        while (true) {
            if (iterations >= max_iterations) return LpStatus::IterationLimit;
            ++iterations;

            int enter = -1;
            for (std::size_t j = 0; j < usable_cols; ++j) {
                if (at(rows_, j) < -tol) {
                    enter = static_cast<int>(j);
                    break;
                }
            }
            if (enter < 0) return LpStatus::Optimal;

            // Minimum-ratio test; ties go to the smallest basis index so
            // that, combined with the smallest-entering-index rule above,
            // cycling is impossible.
            int leave = -1;
            double best = kInf;
            for (std::size_t i = 0; i < rows_; ++i) {
                const double a = at(i, enter);
                if (a <= tol) continue;
                const double ratio = rhs(i) / a;
                if (ratio < best - 1e-12 ||
                    (ratio < best + 1e-12 &&
                     (leave < 0 || basis_[i] < basis_[leave]))) {
                    best = std::min(best, ratio);
                    leave = static_cast<int>(i);
                }
            }
            if (leave < 0) return LpStatus::Unbounded;
            pivot(static_cast<std::size_t>(leave), static_cast<std::size_t>(enter));
        }
    }

private:
    std::size_t rows_, cols_;
    std::vector<double> cells_;
    std::vector<int> basis_;
};

struct StdRow {
    std::vector<double> coeffs;  // over structural columns
    Rel rel;
    double rhs;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options) {
    const std::size_t n = lp.num_vars();
    require(n > 0, "linear program has no variables");
    require(lp.lower.empty() || lp.lower.size() == n, "lower bound count mismatch");
    require(lp.upper.empty() || lp.upper.size() == n, "upper bound count mismatch");
    for (double c : lp.objective) require(std::isfinite(c), "objective must be finite");
    for (const LpRow& row : lp.rows) {
        require(row.coeffs.size() == n, "row coefficient count mismatch");
        require(std::isfinite(row.rhs), "row rhs must be finite");
        for (double a : row.coeffs) require(std::isfinite(a), "row coefficient must be finite");
    }

    LpSolution sol;

    auto lower_of = [&](std::size_t j) { return lp.lower.empty() ? 0.0 : lp.lower[j]; };
    auto upper_of = [&](std::size_t j) { return lp.upper.empty() ? kInf : lp.upper[j]; };
    for (std::size_t j = 0; j < n; ++j) {
        require(!std::isnan(lower_of(j)) && !std::isnan(upper_of(j)),
                "variable bounds must not be NaN");
        require(lower_of(j) < kInf && upper_of(j) > -kInf,
                "variable bounds must leave room on the finite side");
        if (upper_of(j) < lower_of(j)) return sol;  // trivially infeasible
    }

    // Minimize internally.
    std::vector<double> cost(lp.objective);
    if (lp.sense == Sense::Maximize) {
        for (double& c : cost) c = -c;
    }

    // Shift finite lower bounds to zero; split free variables in two.
    std::vector<VarMap> vmap(n);
    int next_col = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (std::isfinite(lower_of(j))) {
            vmap[j].col = next_col++;
            vmap[j].shift = lower_of(j);
        } else {
            vmap[j].col = next_col++;
            vmap[j].neg_col = next_col++;
        }
    }
    const std::size_t structural = static_cast<std::size_t>(next_col);

    // The constant term picked up by shifting is ignored here; the reported
    // objective is recomputed from the original program at the end.
    std::vector<double> std_cost(structural, 0.0);

    auto expand = [&](const std::vector<double>& coeffs, std::vector<double>& out) {
        out.assign(structural, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            out[vmap[j].col] += coeffs[j];
            if (vmap[j].neg_col >= 0) out[vmap[j].neg_col] -= coeffs[j];
        }
    };
    expand(cost, std_cost);

    std::vector<StdRow> rows;
    rows.reserve(lp.rows.size() + n);
    for (const LpRow& row : lp.rows) {
        StdRow srow;
        srow.rel = row.rel;
        srow.rhs = row.rhs;
        for (std::size_t j = 0; j < n; ++j) srow.rhs -= row.coeffs[j] * vmap[j].shift;
        expand(row.coeffs, srow.coeffs);
        rows.push_back(std::move(srow));
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(upper_of(j))) continue;
        StdRow srow;
        srow.rel = Rel::LE;
        srow.rhs = upper_of(j) - vmap[j].shift;
        srow.coeffs.assign(structural, 0.0);
        srow.coeffs[vmap[j].col] = 1.0;
        if (vmap[j].neg_col >= 0) srow.coeffs[vmap[j].neg_col] = -1.0;
        rows.push_back(std::move(srow));
    }

    const std::size_t m = rows.size();
    const std::size_t n_slack =
        static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const StdRow& r) {
            return r.rel != Rel::EQ;
        }));

    // A row whose slack ends up with coefficient +1 can start with that
    // slack basic; only the remaining rows need an artificial.  Keeping the
    // artificial population small keeps the phase-1 objective small, which
    // matters when some rows carry large right-hand sides.
    std::size_t n_artificial = 0;
    for (const StdRow& row : rows) {
        const bool le_like = (row.rel == Rel::LE) == (row.rhs >= 0.0);
        if (row.rel == Rel::EQ || !le_like) ++n_artificial;
    }
    const std::size_t total = structural + n_slack + n_artificial;

    SimplexTableau tab(m, total);

    // Row equilibration keeps wildly different row magnitudes from fighting
    // over one shared tolerance.
    std::size_t slack_at = structural;
    std::size_t artificial_at = structural + n_slack;
    std::vector<bool> has_artificial(m, false);
    for (std::size_t i = 0; i < m; ++i) {
        StdRow& row = rows[i];
        double scale = 0.0;
        for (double a : row.coeffs) scale = std::max(scale, std::abs(a));
        if (scale > 0.0) {
            for (double& a : row.coeffs) a /= scale;
            row.rhs /= scale;
        }

        double slack_coeff = 0.0;
        if (row.rel == Rel::LE) slack_coeff = 1.0;
        if (row.rel == Rel::GE) slack_coeff = -1.0;

        const double sign = row.rhs < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < structural; ++j) tab.at(i, j) = sign * row.coeffs[j];
        tab.rhs(i) = sign * row.rhs;

        std::size_t slack_col = 0;
        if (slack_coeff != 0.0) {
            slack_col = slack_at++;
            tab.at(i, slack_col) = sign * slack_coeff;
        }

        if (slack_coeff != 0.0 && sign * slack_coeff > 0.0) {
            tab.set_basis(i, static_cast<int>(slack_col));
        } else {
            const std::size_t art_col = artificial_at++;
            tab.at(i, art_col) = 1.0;
            tab.set_basis(i, static_cast<int>(art_col));
            has_artificial[i] = true;
        }
    }

    long long max_iterations = options.max_iterations > 0
                                   ? options.max_iterations
                                   : 10000LL * static_cast<long long>(total + m);
    sol.iterations = 0;

    if (n_artificial > 0) {
        // Phase 1: minimize the artificial total.  Price it through the
        // starting basis: cost 1 on artificial columns, minus every row
        // that starts with its artificial basic.
        for (std::size_t j = structural + n_slack; j < total; ++j) tab.at(m, j) = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (!has_artificial[i]) continue;
            for (std::size_t j = 0; j <= total; ++j) tab.at(m, j) -= tab.at(i, j);
        }

        LpStatus phase1 = tab.run(total, options.tol, max_iterations, sol.iterations);
        if (phase1 == LpStatus::IterationLimit) {
            sol.status = phase1;
            return sol;
        }
        if (-tab.rhs(m) > options.tol) {
            sol.status = LpStatus::Infeasible;
            return sol;
        }
    }

    // Kick leftover artificials out of the basis where possible; rows that
    // offer no real pivot are redundant and stay parked at zero.
    for (std::size_t i = 0; i < m; ++i) {
        if (static_cast<std::size_t>(tab.basis(i)) < structural + n_slack) continue;
        for (std::size_t j = 0; j < structural + n_slack; ++j) {
            if (std::abs(tab.at(i, j)) > options.tol) {
                tab.pivot(i, j);
                break;
            }
        }
    }

    // Phase 2: price the real objective through the current basis.
    for (std::size_t j = 0; j <= total; ++j) tab.at(m, j) = 0.0;
    for (std::size_t j = 0; j < structural; ++j) tab.at(m, j) = std_cost[j];
    for (std::size_t i = 0; i < m; ++i) {
        const int bj = tab.basis(i);
        if (bj < 0 || static_cast<std::size_t>(bj) >= structural) continue;
        const double cb = std_cost[bj];
        if (cb == 0.0) continue;
        for (std::size_t j = 0; j <= total; ++j) tab.at(m, j) -= cb * tab.at(i, j);
    }

    LpStatus phase2 =
        tab.run(structural + n_slack, options.tol, max_iterations, sol.iterations);
    if (phase2 != LpStatus::Optimal) {
        sol.status = phase2;
        return sol;
    }

    std::vector<double> x_std(structural, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const int bj = tab.basis(i);
        if (bj >= 0 && static_cast<std::size_t>(bj) < structural) {
            x_std[bj] = std::max(tab.rhs(i), 0.0);
        }
    }

    sol.x.assign(n, 0.0);
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double value = vmap[j].shift + x_std[vmap[j].col];
        if (vmap[j].neg_col >= 0) value -= x_std[vmap[j].neg_col];
        sol.x[j] = value;
        sol.objective += lp.objective[j] * value;
    }
    sol.status = LpStatus::Optimal;
    return sol;
}

}  // namespace qkd
