#include "support.hpp"

#include <gtest/gtest.h>

using namespace nras;
using namespace nras::testing;

namespace {

Problem benchmark(ProblemKind kind, Index n)
{
    return kind == ProblemKind::ignition ? Problem(ignition_data(), n) : Problem(minimal_surface_data(), n);
}

ProblemData poisson_data()
{
    ProblemData d;
    d.kind = ProblemKind::quadratic;
    d.forcing = [](const Point2& x) { return 1.0 + x[0] - 2.0 * x[1] * x[1]; };
    return d;
}

// Hand-built 1D hierarchy: 7 fine unknowns, coarse hats centred on fine 1, 3, 5.
CoarseSpace hat_space()
{
    std::vector<Triplet> t;
    for (Index c = 0; c < 3; ++c) {
        const Index j = 2 * c + 1;
        t.emplace_back(j - 1, c, 0.5);
        t.emplace_back(j, c, 1.0);
        t.emplace_back(j + 1, c, 0.5);
    }
    SparseStorage P(7, 3);
    P.setFromTriplets(t.begin(), t.end());
    return {P, {1, 3, 5}};
}

} // namespace

TEST(Hierarchy, NodalProlongationShapeAndRows)
{
    const Problem fine(minimal_surface_data(), 4);
    const CoarseHierarchy h(fine, 2);
    const auto& P = h.nodal_prolongation();
    EXPECT_EQ(P.rows(), 25);
    EXPECT_EQ(P.cols(), 9);
    const Eigen::MatrixXd D(P);
    EXPECT_GE(D.minCoeff(), 0.0);
    for (Index j = 0; j < 25; ++j) EXPECT_DOUBLE_EQ(D.row(j).sum(), 1.0);
    // Free-unknown restriction is the transpose of prolongation by construction.
    const auto& s = h.space();
    EXPECT_EQ(s.num_fine(), 9);
    EXPECT_EQ(s.num_coarse(), 1);
    EXPECT_EQ(Vector(s.restrict_dual(Vector::Ones(9))), Vector(Eigen::MatrixXd(s.prolongation).transpose() * Vector::Ones(9)));
}

TEST(Hierarchy, ReproducesLinearFunctions)
{
    const Problem fine(minimal_surface_data(), 12);
    for (const Index coarse : {1, 2, 3, 4, 6}) {
        const CoarseHierarchy h(fine, coarse);
        const auto& cm = h.coarse_problem().mesh();
        const auto& fm = fine.mesh();
        auto lin = [](const Point2& p) { return 0.3 - 1.25 * p[0] + 2.5 * p[1]; };
        Vector uc(cm.num_nodes()), uf(fm.num_nodes());
        for (Index i = 0; i < cm.num_nodes(); ++i) uc[i] = lin(cm.nodes[std::size_t(i)]);
        for (Index i = 0; i < fm.num_nodes(); ++i) uf[i] = lin(fm.nodes[std::size_t(i)]);
        EXPECT_LE(max_abs_diff(h.nodal_prolongation() * uc, uf), 1e-14) << coarse;
    }
}

TEST(Hierarchy, InjectionReadsCoincidentNodes)
{
    const Problem fine(ignition_data(), 8);
    const CoarseHierarchy h(fine, 4);
    const auto& cm = h.coarse_problem().mesh();
    for (Index t = 0; t < cm.num_nodes(); ++t) {
        const auto& pc = cm.nodes[std::size_t(t)];
        const auto& pf = fine.mesh().nodes[std::size_t(h.nodal_injection()[std::size_t(t)])];
        EXPECT_EQ(pc, pf);
    }
    Random rng(51);
    const Vector v = rng.vector(fine.space().num_free(), -1.0, 1.0);
    const Vector v0 = h.space().project(v);
    for (Index t = 0; t < v0.size(); ++t) {
        const Index coarse_node = h.coarse_problem().space().free_nodes()[std::size_t(t)];
        const Index fine_node = h.nodal_injection()[std::size_t(coarse_node)];
        EXPECT_EQ(v0[t], v[fine.space().node_to_free()[std::size_t(fine_node)]]);
    }
}

TEST(Hierarchy, SupportsAreThePositiveEntries)
{
    const Problem fine(ignition_data(), 8);
    const CoarseHierarchy h(fine, 2);
    const Eigen::MatrixXd P(h.space().prolongation);
    for (Index t = 0; t < P.cols(); ++t) {
        std::vector<Index> expected;
        for (Index j = 0; j < P.rows(); ++j)
            if (P(j, t) > 0.0) expected.push_back(j);
        EXPECT_EQ(h.space().support[std::size_t(t)], expected);
    }
    // The single coarse unknown (centre node) sees the 7x7 interior block minus the two far corners region of its hexagon.
    EXPECT_EQ(h.space().support[0].size(), std::size_t(3 * 4 * 4 - 3 * 4 + 1));
}

TEST(Hierarchy, RejectsNonNestedSizes)
{
    const Problem fine(ignition_data(), 10);
    EXPECT_THROW(CoarseHierarchy(fine, 4), InvalidArgument);
    EXPECT_THROW(CoarseHierarchy(fine, 0), InvalidArgument);
}

TEST(ProjectConstraints, UnboundedStaysUnbounded)
{
    const auto space = hat_space();
    const auto b = project_constraints(BoxBounds::unbounded(7), Vector::Zero(7), space);
    for (Index t = 0; t < 3; ++t) {
        EXPECT_EQ(b.lower()[t], -infinity);
        EXPECT_EQ(b.upper()[t], infinity);
    }
}

TEST(ProjectConstraints, ZeroSlackPropagates)
{
    Random rng(52);
    const auto space = hat_space();
    const Vector lo = rng.vector(7, -1.0, 0.0);
    const BoxBounds b(lo, Vector::Constant(7, 5.0));
    const auto c = project_constraints(b, lo, space);
    EXPECT_EQ(c.lower(), space.project(lo));
}

TEST(ProjectConstraints, HandEvaluation)
{
    const auto space = hat_space();
    const Vector v = (Vector(7) << 0.0, 0.5, 0.2, 0.1, 0.4, 0.3, 0.0).finished();
    const Vector lo = (Vector(7) << -0.5, 0.1, 0.0, -1.0, 0.35, 0.0, -0.1).finished();
    const Vector hi = (Vector(7) << 1.0, 0.6, 0.9, 0.15, 0.5, 0.3, 2.0).finished();
    const auto c = project_constraints(BoxBounds(lo, hi), v, space);
    // t=0, support {0,1,2}: lower slack max(-0.5,-0.4,-0.2) = -0.2, upper slack min(1.0,0.1,0.7) = 0.1; v0 = 0.5
    // t=1, support {2,3,4}: max(-0.2,-1.1,-0.05) = -0.05, min(0.7,0.05,0.1) = 0.05; v0 = 0.1
    // t=2, support {4,5,6}: max(-0.05,-0.3,-0.1) = -0.05, min(0.1,0.0,2.0) = 0.0; v0 = 0.3
    EXPECT_NEAR(c.lower()[0], 0.3, 1e-15);
    EXPECT_NEAR(c.upper()[0], 0.6, 1e-15);
    EXPECT_NEAR(c.lower()[1], 0.05, 1e-15);
    EXPECT_NEAR(c.upper()[1], 0.15, 1e-15);
    EXPECT_NEAR(c.lower()[2], 0.25, 1e-15);
    EXPECT_NEAR(c.upper()[2], 0.3, 1e-15);
    EXPECT_TRUE(c.contains(space.project(v)));
    EXPECT_THROW(project_constraints(BoxBounds(lo, hi), Vector::Constant(7, 9.0), space), InvalidArgument);
}

class CoarseConsistency : public ::testing::TestWithParam<ProblemKind> {};

TEST_P(CoarseConsistency, AugmentedGradientMatchesRestrictedFineGradient)
{
    Random rng(53);
    const Problem fine = benchmark(GetParam(), 16);
    const FeObjective f(fine);
    const CoarseHierarchy h(fine, 4);
    for (int trial = 0; trial < 100; ++trial) {
        const Vector v = rng.point_in(f.bounds());
        const auto cp = make_coarse_problem(f, h, v);
        EXPECT_TRUE(cp.objective.bounds().contains(cp.initial_guess));
        EXPECT_LE(max_abs_diff(cp.objective.gradient(cp.initial_guess), h.space().restrict_dual(f.gradient(v))), 1e-13);
        const Vector w = rng.point_in(cp.objective.bounds());
        EXPECT_EQ(cp.objective.hessian(w).to_dense(), h.objective().hessian(w).to_dense());
    }
}

TEST_P(CoarseConsistency, CoarseEnergyIsTheRediscretizedEnergy)
{
    const Problem fine = benchmark(GetParam(), 12);
    const CoarseHierarchy h(fine, 3);
    const Problem direct = benchmark(GetParam(), 3);
    const Vector zero = Vector::Zero(direct.space().num_free());
    EXPECT_DOUBLE_EQ(h.objective().value(zero), direct.energy(direct.space().expand(zero)));
}

TEST_P(CoarseConsistency, CoarseStepsStayFeasible)
{
    Random rng(54);
    const Problem fine = benchmark(GetParam(), 8);
    const FeObjective f(fine);
    const CoarseHierarchy h(fine, 4);
    NewtonOptions opt;
    opt.tol = 1e-11;
    for (int trial = 0; trial < 500; ++trial) {
        // Mix interior points with points touching the bounds.
        Vector v = rng.point_in(f.bounds());
        for (Index j = 0; j < v.size(); ++j)
            if (rng.coin(0.2)) v[j] = rng.coin() ? f.bounds().lower()[j] : f.bounds().upper()[j];
        const auto cp = make_coarse_problem(f, h, v);
        const auto solved = newton_sqp_solve(cp.objective, cp.initial_guess, opt);
        ASSERT_TRUE(cp.objective.bounds().contains(solved.x));
        const Vector d = h.space().prolong(Vector(solved.x - cp.initial_guess));
        for (const double alpha : {0.0, 0.25, 0.5, 1.0}) {
            const Vector w = v + alpha * d;
            const double slack = std::max((f.bounds().lower() - w).maxCoeff(), (w - f.bounds().upper()).maxCoeff());
            EXPECT_LE(slack, 1e-15) << "trial " << trial << " alpha " << alpha;
        }
        const auto step = coarse_step(f, h, v, opt, {});
        EXPECT_TRUE(f.bounds().contains(step.v));
        EXPECT_LE(f.value(step.v), f.value(v));
    }
}

INSTANTIATE_TEST_SUITE_P(BothBenchmarks, CoarseConsistency,
                         ::testing::Values(ProblemKind::ignition, ProblemKind::minimal_surface),
                         [](const auto& info) { return to_string(info.param); });

TEST(CoarseStep, OptimalIterateIsAFixedPoint)
{
    const Problem fine(minimal_surface_data(), 8);
    const FeObjective f(fine);
    NewtonOptions opt;
    opt.tol = 1e-11;
    const auto solved = newton_sqp_solve(f, fine.initial_guess(), opt);
    ASSERT_TRUE(solved.record.converged());
    const CoarseHierarchy h(fine, 4);
    const auto step = coarse_step(f, h, solved.x, opt, {});
    EXPECT_LE(step.correction_norm, 1e-9);
    EXPECT_LE(max_abs_diff(step.v, solved.x), 1e-9);
}

TEST(CoarseStep, IdentityHierarchySolvesTheFineProblem)
{
    const Problem fine(minimal_surface_data(), 6);
    const FeObjective f(fine);
    const CoarseHierarchy h(fine, 6);
    EXPECT_EQ(Eigen::MatrixXd(h.space().prolongation), Eigen::MatrixXd::Identity(f.size(), f.size()));
    NewtonOptions opt;
    opt.tol = 1e-11;
    const auto step = coarse_step(f, h, fine.initial_guess(), opt, {});
    EXPECT_EQ(step.alpha, 1.0);
    EXPECT_LE(projected_gradient_norm(step.v, f.gradient(step.v), f.bounds()), 1e-10);
}

TEST(CoarseStep, QuadraticEnergyGivesTheTwoGridCorrection)
{
    for (const Index coarse : {2, 4}) {
        const Problem fine(poisson_data(), 8);
        const FeObjective f(fine);
        const CoarseHierarchy h(fine, coarse);
        Random rng(55);
        const Vector v = rng.vector(f.size(), -1.0, 1.0);

        // Dense oracle: d = P (P'AP)^{-1} P' (-grad f(v)).
        const Eigen::MatrixXd A = f.hessian(v).to_dense();
        const Eigen::MatrixXd P(h.space().prolongation);
        const Eigen::MatrixXd A0 = P.transpose() * A * P;
        const Vector d = P * A0.ldlt().solve(P.transpose() * -f.gradient(v));

        NewtonOptions opt;
        opt.tol = 1e-13;
        const auto step = coarse_step(f, h, v, opt, {});
        EXPECT_EQ(step.alpha, 1.0);
        EXPECT_LE(max_abs_diff(step.v, v + d), 1e-12) << coarse;

        // Rediscretized and Galerkin coarse operators coincide for nested P1 spaces.
        EXPECT_LE((h.objective().hessian(Vector::Zero(A0.rows())).to_dense() - A0).lpNorm<Eigen::Infinity>(), 1e-12);

        const QuadraticObjective q(f.hessian(v), f.gradient(Vector::Zero(f.size())), BoxBounds::unbounded(f.size()));
        const GalerkinCoarseModel galerkin(q, h.space());
        const auto gstep = coarse_step(q, galerkin, v, opt, {});
        EXPECT_LE(max_abs_diff(gstep.v, v + d), 1e-12);
    }
}
