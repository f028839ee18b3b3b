// Bounded revised dual simplex with an explicit dense basis inverse, plus
// depth-first branch-and-bound.
//
// Every structural column is boxed (infinite bounds are replaced by a large
// artificial box), so the all-slack basis with each column parked on the
// bound favoured by its cost sign is dual feasible. The dual simplex then
// only has to restore primal feasibility, and a bound change keeps the
// current basis dual feasible, which gives cheap warm starts between nodes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "agemp/lp.hpp"

namespace agemp::lp {
namespace {

constexpr double kArtificialBound = 1e7;
constexpr int kReinvertInterval = 200;

using Clock = std::chrono::steady_clock;

struct Entry {
    int index;
    double value;
};

struct SparseProblem {
    explicit SparseProblem(const Model& model);

    const Model& model;
    int m = 0;
    int n = 0;
    int ncol = 0;
    std::vector<std::vector<Entry>> rows;  // structural part of each row
    std::vector<std::vector<Entry>> cols;  // structural columns
    std::vector<double> b;
    std::vector<double> cost;  // ncol, slacks carry zero cost
    std::vector<double> lb, ub;
    std::vector<char> artificial;
};

SparseProblem::SparseProblem(const Model& mdl)
    : model(mdl),
      m(mdl.num_constraints()),
      n(mdl.num_variables()),
      ncol(n + m),
      rows(static_cast<std::size_t>(m)),
      cols(static_cast<std::size_t>(n)),
      b(static_cast<std::size_t>(m)),
      cost(static_cast<std::size_t>(ncol), 0.0),
      lb(static_cast<std::size_t>(ncol)),
      ub(static_cast<std::size_t>(ncol)),
      artificial(static_cast<std::size_t>(n), 0) {
    for (int j = 0; j < n; ++j) {
        cost[j] = mdl.cost(j);
        lb[j] = mdl.lower(j);
        ub[j] = mdl.upper(j);
        if (std::isinf(lb[j])) {
            lb[j] = -kArtificialBound;
            artificial[j] = 1;
        }
        if (std::isinf(ub[j])) {
            ub[j] = kArtificialBound;
            artificial[j] = 1;
        }
    }
    for (int i = 0; i < m; ++i) {
        auto& row = rows[i];
        for (const Term& t : mdl.row(i)) {
            auto it = std::find_if(row.begin(), row.end(), [&](const Entry& e) { return e.index == t.var; });
            if (it == row.end()) {
                row.push_back({t.var, t.coef});
            } else {
                it->value += t.coef;
            }
        }
        for (const Entry& e : row) cols[e.index].push_back({i, e.value});
        b[i] = mdl.rhs(i);
        const int s = n + i;
        switch (mdl.sense(i)) {
            case Sense::LessEqual: lb[s] = 0.0; ub[s] = kInf; break;
            case Sense::GreaterEqual: lb[s] = -kInf; ub[s] = 0.0; break;
            case Sense::Equal: lb[s] = 0.0; ub[s] = 0.0; break;
        }
    }
}

struct State {
    std::vector<double> binv;  // m x m, row-major
    std::vector<double> x;
    std::vector<double> d;
    std::vector<int> head;
    std::vector<int> row_of;
    std::vector<char> at_upper;
    std::vector<double> lb, ub;
};

enum class LpOutcome { Optimal, Infeasible, IterationLimit, TimeLimit, NumericalError };

class DualSimplex {
public:
    DualSimplex(const SparseProblem& p, const Options& o, Clock::time_point deadline)
        : p_(p), opt_(o), deadline_(deadline), alpha_row_(p.ncol), alpha_col_(p.m) {
        limit_ = o.iteration_limit > 0 ? o.iteration_limit : 50LL * (p.ncol + p.m) + 1000;
    }

    State initial_state() const;
    LpOutcome run(State& s);
    void set_bounds(State& s, int j, double lb, double ub) const;
    double objective(const State& s) const;
    /// Row r of B^-1 [A I].
    void tableau_row(const State& s, int r, std::vector<double>& out) const;

    std::int64_t iterations() const { return total_iterations_; }
    int infeasible_row() const { return infeasible_row_; }

private:
    bool reinvert(State& s) const;
    double max_residual(const State& s) const;
    void pivot(State& s, int r, int q, double target, bool to_lower);

    const SparseProblem& p_;
    const Options& opt_;
    Clock::time_point deadline_;
    std::int64_t limit_ = 0;
    std::int64_t total_iterations_ = 0;
    int since_reinvert_ = 0;
    int infeasible_row_ = -1;
    std::vector<double> alpha_row_;
    std::vector<double> alpha_col_;
};

State DualSimplex::initial_state() const {
    const int m = p_.m, n = p_.n, ncol = p_.ncol;
    State s;
    s.binv.assign(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) s.binv[static_cast<std::size_t>(i) * m + i] = 1.0;
    s.x.assign(ncol, 0.0);
    s.d = p_.cost;
    s.head.resize(m);
    s.row_of.assign(ncol, -1);
    s.at_upper.assign(ncol, 0);
    s.lb = p_.lb;
    s.ub = p_.ub;
    for (int j = 0; j < n; ++j) {
        const bool up = p_.cost[j] < 0.0 && s.lb[j] != s.ub[j];
        s.at_upper[j] = up ? 1 : 0;
        s.x[j] = up ? s.ub[j] : s.lb[j];
    }
    for (int i = 0; i < m; ++i) {
        double act = 0.0;
        for (const Entry& e : p_.rows[i]) act += e.value * s.x[e.index];
        s.head[i] = n + i;
        s.row_of[n + i] = i;
        s.x[n + i] = p_.b[i] - act;
    }
    return s;
}

void DualSimplex::set_bounds(State& s, int j, double lb, double ub) const {
    s.lb[j] = lb;
    s.ub[j] = ub;
    if (s.row_of[j] >= 0) return;
    // Park on the bound matching the reduced-cost sign so the basis stays dual feasible.
    const bool up = lb != ub && s.d[j] < 0.0;
    s.at_upper[j] = up ? 1 : 0;
    const double target = up ? ub : lb;
    const double delta = target - s.x[j];
    if (delta == 0.0) return;
    const int m = p_.m;
    // x_B -= B^-1 a_j * delta
    if (j < p_.n) {
        for (const Entry& e : p_.cols[j]) {
            const double f = e.value * delta;
            for (int i = 0; i < m; ++i) s.x[s.head[i]] -= s.binv[static_cast<std::size_t>(i) * m + e.index] * f;
        }
    } else {
        const int c = j - p_.n;
        for (int i = 0; i < m; ++i) s.x[s.head[i]] -= s.binv[static_cast<std::size_t>(i) * m + c] * delta;
    }
    s.x[j] = target;
}

double DualSimplex::objective(const State& s) const {
    double obj = p_.model.objective_offset();
    for (int j = 0; j < p_.n; ++j) obj += p_.cost[j] * s.x[j];
    return obj;
}

void DualSimplex::tableau_row(const State& s, int r, std::vector<double>& out) const {
    const int m = p_.m, n = p_.n;
    out.assign(p_.ncol, 0.0);
    const double* rho = &s.binv[static_cast<std::size_t>(r) * m];
    for (int i = 0; i < m; ++i) {
        const double ri = rho[i];
        if (ri == 0.0) continue;
        for (const Entry& e : p_.rows[i]) out[e.index] += ri * e.value;
        out[n + i] = ri;
    }
}

void DualSimplex::pivot(State& s, int r, int q, double target, bool to_lower) {
    const int m = p_.m;
    // Entering column in the current basis: B^-1 a_q.
    std::fill(alpha_col_.begin(), alpha_col_.end(), 0.0);
    if (q < p_.n) {
        for (const Entry& e : p_.cols[q]) {
            for (int i = 0; i < m; ++i) alpha_col_[i] += s.binv[static_cast<std::size_t>(i) * m + e.index] * e.value;
        }
    } else {
        const int c = q - p_.n;
        for (int i = 0; i < m; ++i) alpha_col_[i] = s.binv[static_cast<std::size_t>(i) * m + c];
    }
    const double alpha = alpha_col_[r];
    const int leaving = s.head[r];

    const double delta = (s.x[leaving] - target) / alpha;
    for (int i = 0; i < m; ++i) s.x[s.head[i]] -= alpha_col_[i] * delta;
    s.x[q] += delta;
    s.x[leaving] = target;

    const double theta = s.d[q] / alpha;
    for (int j = 0; j < p_.ncol; ++j) {
        if (s.row_of[j] < 0 && alpha_row_[j] != 0.0) s.d[j] -= theta * alpha_row_[j];
    }
    s.d[leaving] = -theta;
    s.d[q] = 0.0;

    double* prow = &s.binv[static_cast<std::size_t>(r) * m];
    const double inv = 1.0 / alpha;
    thread_local std::vector<int> nz;
    nz.clear();
    for (int k = 0; k < m; ++k) {
        if (prow[k] != 0.0) {
            prow[k] *= inv;
            nz.push_back(k);
        }
    }
    for (int i = 0; i < m; ++i) {
        if (i == r) continue;
        const double f = alpha_col_[i];
        if (f == 0.0) continue;
        double* row = &s.binv[static_cast<std::size_t>(i) * m];
        for (int k : nz) row[k] -= f * prow[k];
    }

    s.head[r] = q;
    s.row_of[q] = r;
    s.row_of[leaving] = -1;
    s.at_upper[leaving] = to_lower ? 0 : 1;
}

double DualSimplex::max_residual(const State& s) const {
    double worst = 0.0;
    for (int i = 0; i < p_.m; ++i) {
        double act = s.x[p_.n + i];
        for (const Entry& e : p_.rows[i]) act += e.value * s.x[e.index];
        worst = std::max(worst, std::abs(act - p_.b[i]) / (1.0 + std::abs(p_.b[i])));
    }
    return worst;
}

bool DualSimplex::reinvert(State& s) const {
    const int m = p_.m, n = p_.n;
    // Gauss-Jordan on [B | I] with partial pivoting.
    std::vector<double> work(static_cast<std::size_t>(m) * 2 * m, 0.0);
    const auto at = [&](int i, int j) -> double& {
        return work[static_cast<std::size_t>(i) * 2 * m + j];
    };
    for (int k = 0; k < m; ++k) {
        const int col = s.head[k];
        if (col < n) {
            for (const Entry& e : p_.cols[col]) at(e.index, k) = e.value;
        } else {
            at(col - n, k) = 1.0;
        }
        at(k, m + k) = 1.0;
    }
    for (int k = 0; k < m; ++k) {
        int best = k;
        for (int i = k + 1; i < m; ++i) {
            if (std::abs(at(i, k)) > std::abs(at(best, k))) best = i;
        }
        if (std::abs(at(best, k)) < 1e-12) return false;
        if (best != k) {
            for (int j = 0; j < 2 * m; ++j) std::swap(at(k, j), at(best, j));
        }
        const double inv = 1.0 / at(k, k);
        for (int j = 0; j < 2 * m; ++j) at(k, j) *= inv;
        for (int i = 0; i < m; ++i) {
            if (i == k) continue;
            const double f = at(i, k);
            if (f == 0.0) continue;
            for (int j = k; j < 2 * m; ++j) at(i, j) -= f * at(k, j);
        }
    }
    for (int k = 0; k < m; ++k) {
        std::copy_n(&work[static_cast<std::size_t>(k) * 2 * m + m], m, &s.binv[static_cast<std::size_t>(k) * m]);
    }
    // x_B = B^-1 (b - N x_N)
    std::vector<double> rhs(p_.b);
    for (int i = 0; i < m; ++i) {
        for (const Entry& e : p_.rows[i]) {
            if (s.row_of[e.index] < 0) rhs[i] -= e.value * s.x[e.index];
        }
        if (s.row_of[n + i] < 0) rhs[i] -= s.x[n + i];
    }
    for (int k = 0; k < m; ++k) {
        const double* row = &s.binv[static_cast<std::size_t>(k) * m];
        double xb = 0.0;
        for (int i = 0; i < m; ++i) xb += row[i] * rhs[i];
        s.x[s.head[k]] = xb;
    }
    // d = c - (c_B^T B^-1) [A I]
    std::vector<double> y(m, 0.0);
    for (int k = 0; k < m; ++k) {
        const double cb = p_.cost[s.head[k]];
        if (cb == 0.0) continue;
        const double* row = &s.binv[static_cast<std::size_t>(k) * m];
        for (int i = 0; i < m; ++i) y[i] += cb * row[i];
    }
    for (int j = 0; j < p_.ncol; ++j) s.d[j] = p_.cost[j];
    for (int i = 0; i < m; ++i) {
        if (y[i] == 0.0) continue;
        for (const Entry& e : p_.rows[i]) s.d[e.index] -= y[i] * e.value;
        s.d[n + i] -= y[i];
    }
    for (int k = 0; k < m; ++k) s.d[s.head[k]] = 0.0;
    return true;
}

LpOutcome DualSimplex::run(State& s) {
    const int m = p_.m, ncol = p_.ncol;
    const double ptol = opt_.primal_tolerance;
    const double dtol = opt_.dual_tolerance;
    const double pivtol = opt_.pivot_tolerance;
    std::int64_t iter = 0;
    int reinversions = 0;
    infeasible_row_ = -1;

    for (;;) {
        int r = -1;
        double worst = 0.0;
        bool to_lower = true;
        for (int i = 0; i < m; ++i) {
            const int j = s.head[i];
            const double xv = s.x[j];
            const double tol = ptol * (1.0 + std::abs(xv));
            if (xv < s.lb[j] - tol && s.lb[j] - xv > worst) {
                worst = s.lb[j] - xv;
                r = i;
                to_lower = true;
            } else if (xv > s.ub[j] + tol && xv - s.ub[j] > worst) {
                worst = xv - s.ub[j];
                r = i;
                to_lower = false;
            }
        }
        if (r < 0) {
            if (max_residual(s) > 1e-9 && reinversions < 3) {
                ++reinversions;
                if (!reinvert(s)) return LpOutcome::NumericalError;
                since_reinvert_ = 0;
                continue;
            }
            return LpOutcome::Optimal;
        }

        if (++iter > limit_) return LpOutcome::IterationLimit;
        ++total_iterations_;
        if ((iter & 63) == 0 && Clock::now() > deadline_) return LpOutcome::TimeLimit;
        if (++since_reinvert_ >= kReinvertInterval) {
            if (!reinvert(s)) return LpOutcome::NumericalError;
            since_reinvert_ = 0;
            continue;
        }

        tableau_row(s, r, alpha_row_);
        const double side = to_lower ? -1.0 : 1.0;

        // Harris two-pass ratio test.
        double theta_max = kInf;
        for (int j = 0; j < ncol; ++j) {
            if (s.row_of[j] >= 0 || s.lb[j] == s.ub[j]) continue;
            const double alpha = alpha_row_[j];
            const double dir = s.at_upper[j] ? -1.0 : 1.0;
            if (side * dir * alpha <= pivtol) continue;
            const double dj = std::max(0.0, dir * s.d[j]);
            theta_max = std::min(theta_max, (dj + dtol) / std::abs(alpha));
        }
        if (theta_max == kInf) {
            infeasible_row_ = r;
            return LpOutcome::Infeasible;
        }
        int q = -1;
        double best_alpha = 0.0;
        for (int j = 0; j < ncol; ++j) {
            if (s.row_of[j] >= 0 || s.lb[j] == s.ub[j]) continue;
            const double alpha = alpha_row_[j];
            const double dir = s.at_upper[j] ? -1.0 : 1.0;
            if (side * dir * alpha <= pivtol) continue;
            const double dj = std::max(0.0, dir * s.d[j]);
            if (dj / std::abs(alpha) <= theta_max && std::abs(alpha) > best_alpha) {
                best_alpha = std::abs(alpha);
                q = j;
            }
        }
        const int leaving = s.head[r];
        const double target = to_lower ? s.lb[leaving] : s.ub[leaving];
        pivot(s, r, q, target, to_lower);
    }
}

std::vector<std::string> certificate_families(const SparseProblem& p, const DualSimplex& simplex,
                                              const State& s, int r) {
    std::set<std::string> fams;
    const auto family_of = [&](int j) -> const std::string& {
        return j < p.n ? p.model.variable_family(j) : p.model.row_family(j - p.n);
    };
    fams.insert(family_of(s.head[r]));
    std::vector<double> row;
    simplex.tableau_row(s, r, row);
    for (int j = 0; j < p.ncol; ++j) {
        if (s.row_of[j] < 0 && std::abs(row[j]) > 1e-9) fams.insert(family_of(j));
    }
    fams.erase(std::string{});
    return {fams.begin(), fams.end()};
}

Status to_status(LpOutcome o) {
    switch (o) {
        case LpOutcome::Optimal: return Status::Optimal;
        case LpOutcome::Infeasible: return Status::Infeasible;
        case LpOutcome::IterationLimit: return Status::IterationLimit;
        case LpOutcome::TimeLimit: return Status::TimeLimit;
        case LpOutcome::NumericalError: return Status::NumericalError;
    }
    return Status::NumericalError;
}

class DenseDualSimplexSolver final : public Solver {
public:
    std::string_view name() const override { return "dense-dual-simplex"; }
    Solution solve(const Model& model, const Options& options) const override;
};

Solution DenseDualSimplexSolver::solve(const Model& model, const Options& options) const {
    const auto start = Clock::now();
    const auto deadline =
        start + std::chrono::duration_cast<Clock::duration>(
                    std::chrono::duration<double>(options.time_limit_seconds));
    SparseProblem problem(model);
    DualSimplex simplex(problem, options, deadline);

    Solution out;
    const auto extract = [&](const State& s) {
        std::vector<double> v(s.x.begin(), s.x.begin() + problem.n);
        for (int j = 0; j < problem.n; ++j) {
            v[j] = std::clamp(v[j], model.lower(j), model.upper(j));
            if (model.is_integer(j)) v[j] = std::round(v[j]);
        }
        return v;
    };
    const auto hits_artificial = [&](const State& s) {
        for (int j = 0; j < problem.n; ++j) {
            if (problem.artificial[j] && std::abs(s.x[j]) >= kArtificialBound * (1.0 - 1e-9)) return true;
        }
        return false;
    };

    State work = simplex.initial_state();
    const LpOutcome root_outcome = simplex.run(work);
    out.nodes = 1;
    if (root_outcome != LpOutcome::Optimal) {
        out.status = to_status(root_outcome);
        if (root_outcome == LpOutcome::Infeasible) {
            out.infeasible_families = certificate_families(problem, simplex, work, simplex.infeasible_row());
        }
        out.iterations = simplex.iterations();
        return out;
    }
    if (hits_artificial(work)) {
        out.status = Status::Unbounded;
        out.iterations = simplex.iterations();
        return out;
    }

    const double int_tol = options.integrality_tolerance;
    const auto most_fractional = [&](const State& s) {
        int best = -1;
        double best_frac = int_tol;
        for (int j = 0; j < problem.n; ++j) {
            if (!model.is_integer(j)) continue;
            const double frac = std::abs(s.x[j] - std::round(s.x[j]));
            if (frac > best_frac) {
                best_frac = frac;
                best = j;
            }
        }
        return best;
    };

    // Nodes carry the bounds of every integer column; the working state is
    // re-bounded and warm-started from the previous node's basis.
    std::vector<int> int_cols;
    for (int j = 0; j < problem.n; ++j) {
        if (model.is_integer(j)) int_cols.push_back(j);
    }
    struct Node {
        std::vector<double> lb, ub;
        double bound;
    };

    bool have_incumbent = false;
    double incumbent_obj = kInf;
    std::vector<double> incumbent;
    double open_bound = kInf;  // smallest bound among nodes dropped by limits
    Status limit_status = Status::Optimal;

    const auto prune_threshold = [&]() {
        if (!have_incumbent) return kInf;
        const double gap = std::max(options.mip_absolute_gap,
                                    options.mip_relative_gap * std::max(1.0, std::abs(incumbent_obj)));
        return incumbent_obj - gap;
    };
    std::vector<double> candidate;
    const auto try_heuristic = [&](const State& s) {
        if (!options.heuristic) return;
        candidate.clear();
        const std::span<const double> relaxed(s.x.data(), static_cast<std::size_t>(problem.n));
        if (!options.heuristic(relaxed, candidate)) return;
        if (candidate.size() != static_cast<std::size_t>(problem.n)) return;
        for (int j : int_cols) {
            if (std::abs(candidate[j] - std::round(candidate[j])) > int_tol) return;
        }
        if (model.max_violation(candidate) > 1e-7) return;
        const double obj = model.evaluate(candidate);
        if (obj < incumbent_obj) {
            incumbent_obj = obj;
            incumbent = candidate;
            have_incumbent = true;
        }
    };

    std::vector<Node> stack;
    const auto expand = [&](double obj) {
        const int j = most_fractional(work);
        if (j < 0) {
            if (obj < incumbent_obj) {
                incumbent_obj = obj;
                incumbent = extract(work);
                have_incumbent = true;
            }
            return;
        }
        try_heuristic(work);
        if (obj >= prune_threshold()) return;
        Node down{{}, {}, obj};
        for (int c : int_cols) {
            down.lb.push_back(work.lb[c]);
            down.ub.push_back(work.ub[c]);
        }
        Node up = down;
        const auto k = static_cast<std::size_t>(
            std::lower_bound(int_cols.begin(), int_cols.end(), j) - int_cols.begin());
        const double v = work.x[j];
        down.ub[k] = std::floor(v);
        up.lb[k] = std::ceil(v);
        // Explore the nearer rounding first.
        if (v - down.ub[k] < up.lb[k] - v) {
            stack.push_back(std::move(up));
            stack.push_back(std::move(down));
        } else {
            stack.push_back(std::move(down));
            stack.push_back(std::move(up));
        }
    };

    expand(simplex.objective(work));
    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();
        if (node.bound >= prune_threshold()) continue;
        if (out.nodes >= options.node_limit) {
            limit_status = Status::NodeLimit;
            open_bound = std::min(open_bound, node.bound);
            continue;
        }
        if (Clock::now() > deadline) {
            limit_status = Status::TimeLimit;
            open_bound = std::min(open_bound, node.bound);
            continue;
        }
        for (std::size_t k = 0; k < int_cols.size(); ++k) {
            const int c = int_cols[k];
            if (work.lb[c] != node.lb[k] || work.ub[c] != node.ub[k]) {
                simplex.set_bounds(work, c, node.lb[k], node.ub[k]);
            }
        }
        ++out.nodes;
        const LpOutcome outcome = simplex.run(work);
        if (outcome == LpOutcome::Infeasible) continue;
        if (outcome != LpOutcome::Optimal) {
            limit_status = to_status(outcome);
            open_bound = std::min(open_bound, node.bound);
            if (outcome == LpOutcome::NumericalError) break;
            continue;
        }
        const double obj = simplex.objective(work);
        if (obj >= prune_threshold()) continue;
        expand(obj);
    }

    out.iterations = simplex.iterations();
    if (!have_incumbent) {
        out.status = limit_status == Status::Optimal ? Status::Infeasible : limit_status;
        return out;
    }
    out.values = std::move(incumbent);
    out.objective = model.evaluate(out.values);
    out.best_bound = std::min(open_bound, out.objective);
    out.status = limit_status;
    return out;
}

}  // namespace

std::unique_ptr<Solver> make_default_solver() { return std::make_unique<DenseDualSimplexSolver>(); }

std::unique_ptr<Solver> make_solver(std::string_view name) {
    if (name == "dense-dual-simplex" || name == "default") return make_default_solver();
    throw std::invalid_argument("unknown LP backend: " + std::string(name));
}

}  // namespace agemp::lp
