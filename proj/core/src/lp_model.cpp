#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "agemp/lp.hpp"

namespace agemp::lp {

std::string_view to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
        case Status::IterationLimit: return "iteration-limit";
        case Status::NodeLimit: return "node-limit";
        case Status::TimeLimit: return "time-limit";
        case Status::NumericalError: return "numerical-error";
    }
    return "unknown";
}

int Model::add_variable(double lb, double ub, double cost, bool integer,
                        std::string_view family) {
    if (lb > ub) throw std::invalid_argument("lp::Model: variable lower bound exceeds upper bound");
    lb_.push_back(lb);
    ub_.push_back(ub);
    cost_.push_back(cost);
    integer_.push_back(integer ? 1 : 0);
    var_family_.emplace_back(family);
    return static_cast<int>(cost_.size()) - 1;
}

int Model::add_constraint(std::span<const Term> terms, Sense sense, double rhs,
                          std::string_view family) {
    for (const Term& t : terms) {
        if (t.var < 0 || t.var >= num_variables()) {
            throw std::out_of_range("lp::Model: constraint references unknown variable");
        }
        if (t.coef != 0.0) terms_.push_back(t);
    }
    row_start_.push_back(terms_.size());
    sense_.push_back(sense);
    rhs_.push_back(rhs);
    row_family_.emplace_back(family);
    return static_cast<int>(rhs_.size()) - 1;
}

void Model::set_bounds(int var, double lb, double ub) {
    if (lb > ub) throw std::invalid_argument("lp::Model: variable lower bound exceeds upper bound");
    lb_.at(var) = lb;
    ub_.at(var) = ub;
}

int Model::num_integer() const {
    return static_cast<int>(std::count(integer_.begin(), integer_.end(), 1));
}

std::span<const Term> Model::row(int r) const {
    const auto begin = row_start_[static_cast<std::size_t>(r)];
    const auto end = row_start_[static_cast<std::size_t>(r) + 1];
    return {terms_.data() + begin, end - begin};
}

double Model::evaluate(std::span<const double> x) const {
    double obj = offset_;
    for (int j = 0; j < num_variables(); ++j) obj += cost_[j] * x[j];
    return obj;
}

double Model::max_violation(std::span<const double> x) const {
    double worst = 0.0;
    for (int j = 0; j < num_variables(); ++j) {
        worst = std::max({worst, lb_[j] - x[j], x[j] - ub_[j]});
    }
    for (int r = 0; r < num_constraints(); ++r) {
        double lhs = 0.0;
        for (const Term& t : row(r)) lhs += t.coef * x[t.var];
        switch (sense_[r]) {
            case Sense::LessEqual: worst = std::max(worst, lhs - rhs_[r]); break;
            case Sense::GreaterEqual: worst = std::max(worst, rhs_[r] - lhs); break;
            case Sense::Equal: worst = std::max(worst, std::abs(lhs - rhs_[r])); break;
        }
    }
    return worst;
}

}  // namespace agemp::lp
