#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace nras;

TEST(Armijo, FullStepOnQuadratic)
{
    auto f = [](const Vector& v) { return v.squaredNorm(); };
    const Vector v = Vector::Ones(1), d = -Vector::Ones(1);
    const auto r = armijo(f, v, d, 2.0 * v.dot(d));
    EXPECT_EQ(r.alpha, 1.0);
    EXPECT_FALSE(r.stalled);
}

TEST(Armijo, ZeroDirectionAcceptsInitialStep)
{
    auto f = [](const Vector& v) { return v.squaredNorm(); };
    const auto r = armijo(f, Vector::Ones(2), Vector::Zero(2), 0.0);
    EXPECT_EQ(r.alpha, 1.0);
}

TEST(Armijo, BacktracksOnOvershoot)
{
    auto f = [](const Vector& v) { return std::pow(v[0], 4); };
    const Vector v = Vector::Ones(1), d = Vector::Constant(1, -3.0);
    EXPECT_EQ(f(v + d), 16.0);
    const auto r = armijo(f, v, d, 4.0 * d[0]);
    EXPECT_EQ(r.alpha, 0.5); // f(-0.5) = 0.0625
    EXPECT_LT(f(v + r.alpha * d), f(v));
    EXPECT_LE(f(v + r.alpha * d), f(v) + 1e-4 * r.alpha * 4.0 * d[0]);
}

TEST(Armijo, StepsAreDeterministicPowers)
{
    auto f = [](const Vector& v) { return std::cosh(5.0 * v[0]); };
    LineSearchConfig cfg;
    cfg.rho = 0.3;
    cfg.alpha0 = 0.9;
    for (double start : {0.2, 0.7, 1.5}) {
        const Vector v = Vector::Constant(1, start), d = Vector::Constant(1, -4.0);
        const auto r = armijo(f, v, d, 5.0 * std::sinh(5.0 * start) * d[0], cfg);
        ASSERT_FALSE(r.stalled);
        EXPECT_DOUBLE_EQ(r.alpha, cfg.alpha0 * std::pow(cfg.rho, r.backtracks));
        EXPECT_LE(f(v + r.alpha * d), f(v));
    }
}

TEST(Armijo, NonDescentUsesSimpleDecrease)
{
    // Uphill slope claimed, but f actually decreases along d: simple decrease accepts.
    auto f = [](const Vector& v) { return (v[0] - 1.0) * (v[0] - 1.0); };
    const auto r = armijo(f, Vector::Zero(1), Vector::Ones(1), 0.5);
    EXPECT_FALSE(r.stalled);
    EXPECT_EQ(r.alpha, 1.0);

    // Genuinely uphill: stalls with alpha = 0.
    const auto s = armijo(f, Vector::Constant(1, 1.0), Vector::Ones(1), 0.0);
    EXPECT_TRUE(s.stalled);
    EXPECT_EQ(s.alpha, 0.0);
}

TEST(Armijo, RoundingLevelDecreaseJudgedBySlope)
{
    // Flat to within one ulp: every trial reads one ulp uphill, so the value test cannot pass.
    auto f = [](const Vector& v) { return v[0] == 1.0 ? 1.0 : std::nextafter(1.0, 2.0); };
    const Vector v = Vector::Ones(1), d = -Vector::Ones(1);
    const auto without = armijo(f, v, d, -2e-12);
    EXPECT_TRUE(without.stalled);
    EXPECT_EQ(without.alpha, 0.0);

    // The slope at the trial is no longer downhill-steep, so the approximate test accepts the full step.
    const auto with = armijo(f, v, d, -2e-12, {}, std::nullopt, [](const Vector&) { return 0.0; });
    EXPECT_FALSE(with.stalled);
    EXPECT_EQ(with.alpha, 1.0);

    // A trial overshooting as far uphill as the start was downhill is rejected.
    const auto steep = armijo(f, v, d, -2e-12, {}, std::nullopt, [](const Vector&) { return 2e-12; });
    EXPECT_TRUE(steep.stalled);
}

TEST(LineSearchConfig, Validation)
{
    auto f = [](const Vector& v) { return v.squaredNorm(); };
    for (auto bad : {LineSearchConfig{.c1 = 0.0}, LineSearchConfig{.c1 = 1.0}, LineSearchConfig{.rho = 1.0},
                     LineSearchConfig{.alpha0 = 0.0}, LineSearchConfig{.alpha0 = 1.5}, LineSearchConfig{.max_backtracks = -1}})
        EXPECT_THROW(armijo(f, Vector::Ones(1), -Vector::Ones(1), -2.0, bad), InvalidArgument);
}
