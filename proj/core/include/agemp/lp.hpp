#pragma once

/**
 * @file lp.hpp
 * @brief Minimal linear / mixed-integer modelling interface.
 *
 * A Model collects bounded variables, linear rows and a linear objective
 * (always minimised). A Solver turns a Model into a Solution. One backend is
 * bundled: a bounded revised dual simplex with an explicit dense basis
 * inverse, driven by depth-first branch-and-bound for the integer columns. It targets the small, boxed
 * problems the horizon scheduler produces (a few hundred columns).
 */

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agemp::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, GreaterEqual, Equal };

enum class Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NodeLimit,
    TimeLimit,
    NumericalError,
};

std::string_view to_string(Status s);

struct Term {
    int var = 0;
    double coef = 0.0;
};

class Model {
public:
    /// Adds a column; `family` tags it for infeasibility reports.
    int add_variable(double lb, double ub, double cost, bool integer = false,
                     std::string_view family = {});
    int add_constraint(std::span<const Term> terms, Sense sense, double rhs,
                       std::string_view family = {});
    int add_constraint(std::initializer_list<Term> terms, Sense sense, double rhs,
                       std::string_view family = {}) {
        return add_constraint(std::span<const Term>(terms.begin(), terms.size()), sense, rhs,
                              family);
    }

    void set_cost(int var, double cost) { cost_.at(var) = cost; }
    void add_cost(int var, double cost) { cost_.at(var) += cost; }
    void set_bounds(int var, double lb, double ub);
    void set_objective_offset(double offset) { offset_ = offset; }

    int num_variables() const { return static_cast<int>(cost_.size()); }
    int num_constraints() const { return static_cast<int>(rhs_.size()); }
    int num_integer() const;

    double lower(int var) const { return lb_[var]; }
    double upper(int var) const { return ub_[var]; }
    double cost(int var) const { return cost_[var]; }
    bool is_integer(int var) const { return integer_[var] != 0; }
    const std::string& variable_family(int var) const { return var_family_[var]; }

    std::span<const Term> row(int r) const;
    Sense sense(int r) const { return sense_[r]; }
    double rhs(int r) const { return rhs_[r]; }
    const std::string& row_family(int r) const { return row_family_[r]; }
    double objective_offset() const { return offset_; }

    /// Objective value (offset included) at `x`.
    double evaluate(std::span<const double> x) const;
    /// Largest bound or row violation at `x`.
    double max_violation(std::span<const double> x) const;

private:
    std::vector<double> lb_, ub_, cost_;
    std::vector<char> integer_;
    std::vector<std::string> var_family_;
    std::vector<Term> terms_;
    std::vector<std::size_t> row_start_{0};
    std::vector<Sense> sense_;
    std::vector<double> rhs_;
    std::vector<std::string> row_family_;
    double offset_ = 0.0;
};

struct Options {
    double primal_tolerance = 1e-9;
    double dual_tolerance = 1e-11;
    double pivot_tolerance = 1e-9;
    double integrality_tolerance = 1e-7;
    double mip_relative_gap = 1e-6;
    double mip_absolute_gap = 1e-9;
    double time_limit_seconds = 60.0;
    std::int64_t node_limit = 200000;
    std::int64_t iteration_limit = 0;  ///< 0: automatic, scaled with problem size
    /// Optional primal heuristic called with fractional node solutions. It may
    /// fill `candidate` with a full point; the solver verifies it before use.
    std::function<bool(std::span<const double> relaxed, std::vector<double>& candidate)> heuristic;
};

struct Solution {
    Status status = Status::NumericalError;
    double objective = 0.0;   ///< includes the model offset
    double best_bound = 0.0;  ///< lower bound proven by branch-and-bound
    std::vector<double> values;
    std::int64_t iterations = 0;
    std::int64_t nodes = 0;
    /// Constraint / bound families in the infeasibility certificate.
    std::vector<std::string> infeasible_families;

    bool has_values() const { return !values.empty(); }
};

class Solver {
public:
    virtual ~Solver() = default;
    virtual std::string_view name() const = 0;
    virtual Solution solve(const Model& model, const Options& options) const = 0;
};

/// Bundled backend ("dense-dual-simplex").
std::unique_ptr<Solver> make_default_solver();

/// Looks a backend up by name; throws std::invalid_argument when unknown.
std::unique_ptr<Solver> make_solver(std::string_view name);

}  // namespace agemp::lp
