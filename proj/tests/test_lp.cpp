#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "agemp/lp.hpp"

using namespace agemp::lp;

namespace {

Solution run(const Model& m) { return make_default_solver()->solve(m, Options{}); }

}  // namespace

TEST(Lp, SmallMaximisation) {
    Model m;
    const int x = m.add_variable(0, 3, -1.0);
    const int y = m.add_variable(0, 2, -2.0);
    m.add_constraint({{x, 1.0}, {y, 1.0}}, Sense::LessEqual, 4.0);
    m.set_objective_offset(10.0);
    const auto s = run(m);
    ASSERT_EQ(s.status, Status::Optimal);
    EXPECT_NEAR(s.objective, 10.0 - 2.0 - 4.0, 1e-9);
    EXPECT_NEAR(s.values[x], 2.0, 1e-9);
    EXPECT_NEAR(s.values[y], 2.0, 1e-9);
    EXPECT_NEAR(m.evaluate(s.values), s.objective, 1e-12);
    EXPECT_LE(m.max_violation(s.values), 1e-9);
}

TEST(Lp, EqualityAndGreaterRows) {
    Model m;
    const int a = m.add_variable(0, kInf, 2.0);
    const int b = m.add_variable(0, kInf, 3.0);
    const int c = m.add_variable(-5, 5, 0.0);
    m.add_constraint({{a, 1.0}, {b, 1.0}}, Sense::Equal, 5.0);
    m.add_constraint({{b, 1.0}, {c, -1.0}}, Sense::GreaterEqual, 3.0);
    const auto s = run(m);
    ASSERT_EQ(s.status, Status::Optimal);
    EXPECT_NEAR(s.objective, 10.0, 1e-9);
    EXPECT_NEAR(s.values[b], 0.0, 1e-9);
    EXPECT_LE(s.values[c], -3.0 + 1e-9);
}

TEST(Lp, InfeasibleReportsFamilies) {
    Model m;
    const int x = m.add_variable(0, 3, 1.0, false, "x");
    m.add_constraint({{x, 1.0}}, Sense::GreaterEqual, 5.0, "demand");
    const auto s = run(m);
    EXPECT_EQ(s.status, Status::Infeasible);
    EXPECT_FALSE(s.infeasible_families.empty());
}

TEST(Lp, Unbounded) {
    Model m;
    const int x = m.add_variable(0, kInf, -1.0);
    const int y = m.add_variable(0, 1, 0.0);
    m.add_constraint({{x, 1.0}, {y, -1.0}}, Sense::GreaterEqual, 0.0);
    EXPECT_EQ(run(m).status, Status::Unbounded);
}

TEST(Lp, EmptyModel) {
    Model m;
    m.set_objective_offset(1.5);
    const auto s = run(m);
    EXPECT_EQ(s.status, Status::Optimal);
    EXPECT_DOUBLE_EQ(s.objective, 1.5);
}

TEST(Lp, BinaryKnapsack) {
    Model m;
    const double value[] = {6, 10, 12, 7};
    const double weight[] = {1, 2, 3, 2};
    std::vector<Term> row;
    for (int i = 0; i < 4; ++i) {
        m.add_variable(0, 1, -value[i], true);
        row.push_back({i, weight[i]});
    }
    m.add_constraint(row, Sense::LessEqual, 5.0);
    EXPECT_EQ(m.num_integer(), 4);
    const auto s = run(m);
    ASSERT_EQ(s.status, Status::Optimal);
    EXPECT_NEAR(s.objective, -23.0, 1e-9);
    for (double v : s.values) EXPECT_NEAR(v, std::round(v), 1e-7);
}

TEST(Lp, RandomIntegerProgramsMatchEnumeration) {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> coef(-4, 4), rhs(2, 9);
    const auto solver = make_default_solver();
    for (int trial = 0; trial < 60; ++trial) {
        Model m;
        double c[3];
        for (int j = 0; j < 3; ++j) {
            c[j] = coef(rng) + 0.25 * j;
            m.add_variable(0, 3, c[j], j < 2);
        }
        double a[2][3], b[2];
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 3; ++j) a[i][j] = std::abs(coef(rng)) + 0.5;
            b[i] = rhs(rng);
            m.add_constraint({{0, a[i][0]}, {1, a[i][1]}, {2, a[i][2]}}, Sense::LessEqual, b[i]);
        }
        // Enumerate the integer columns; the continuous one is set greedily.
        double best = std::numeric_limits<double>::infinity();
        for (int x0 = 0; x0 <= 3; ++x0)
            for (int x1 = 0; x1 <= 3; ++x1) {
                double hi = 3.0;
                bool ok = true;
                for (int i = 0; i < 2; ++i) {
                    const double slack = b[i] - a[i][0] * x0 - a[i][1] * x1;
                    if (slack < 0) ok = false;
                    hi = std::min(hi, slack / a[i][2]);
                }
                if (!ok) continue;
                const double x2 = c[2] < 0 ? hi : 0.0;
                best = std::min(best, c[0] * x0 + c[1] * x1 + c[2] * x2);
            }
        const auto s = solver->solve(m, Options{});
        ASSERT_EQ(s.status, Status::Optimal) << trial;
        EXPECT_NEAR(s.objective, best, 1e-7) << trial;
        EXPECT_LE(m.max_violation(s.values), 1e-7);
    }
}

TEST(Lp, HeuristicCandidateIsVerified) {
    Model m;
    const int x = m.add_variable(0, 10, -1.0, true);
    m.add_constraint({{x, 2.0}}, Sense::LessEqual, 7.0);
    Options o;
    o.heuristic = [](std::span<const double>, std::vector<double>& cand) {
        cand = {10.0};
        return true;
    };
    const auto s = make_default_solver()->solve(m, o);
    ASSERT_EQ(s.status, Status::Optimal);
    EXPECT_NEAR(s.values[x], 3.0, 1e-9);
}

TEST(Lp, SolverRegistry) {
    EXPECT_EQ(make_solver("default")->name(), "dense-dual-simplex");
    EXPECT_EQ(make_solver("dense-dual-simplex")->name(), "dense-dual-simplex");
    EXPECT_THROW(make_solver("cplex"), std::invalid_argument);
    EXPECT_EQ(to_string(Status::Infeasible), "infeasible");
}
