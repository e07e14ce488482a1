#include <cmath>
#include <random>

#include "doctest.h"
#include "softtrack/dynamics.hpp"

using namespace softtrack;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Independent oracle: CoM of a uniform arc by Simpson quadrature over
// arclength, never touching the closed forms under test.
void com_oracle(double L, double q, double& cx, double& cy) {
    const int n = 20000;  // even
    const double kappa = q / L;
    double sx = 0.0, sy = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double s = L * i / n;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sx += w * std::sin(kappa * s) / kappa;
        sy += w * (1.0 - std::cos(kappa * s)) / kappa;
    }
    const double h = L / n;
    cx = sx * h / 3.0 / L;
    cy = sy * h / 3.0 / L;
}

double energy(const SegmentParams& p, const RobotState& s) {
    const DynamicsTerms t = dynamics_terms(p, s);
    return 0.5 * t.inertia * s.q_dot * s.q_dot + 0.5 * p.stiffness * s.q * s.q;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("tip pose closed form and limits") {
    SegmentParams p;  // L = 0.124

    PlanarPose straight = tip_pose(p, 0.0);
    CHECK(straight.x == doctest::Approx(0.124).epsilon(1e-12));
    CHECK(straight.y == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(straight.theta == 0.0);

    PlanarPose quarter = tip_pose(p, kPi / 2.0);
    CHECK(quarter.x == doctest::Approx(0.078940852).epsilon(1e-7));
    CHECK(quarter.y == doctest::Approx(0.078940852).epsilon(1e-7));
    CHECK(quarter.theta == doctest::Approx(1.570796327));

    PlanarPose neg = tip_pose(p, -kPi / 2.0);
    CHECK(neg.x == doctest::Approx(quarter.x));
    CHECK(neg.y == doctest::Approx(-quarter.y));
    CHECK(neg.theta == doctest::Approx(-quarter.theta));
}

TEST_CASE("com position matches quadrature oracle") {
    SegmentParams p;
    double x, y;

    p.length = 0.124;
    com_position(p, 0.0, x, y);
    CHECK(x == doctest::Approx(0.062).epsilon(1e-12));
    CHECK(y == doctest::Approx(0.0).epsilon(1e-12));

    com_position(p, kPi, x, y);
    CHECK(x == doctest::Approx(0.025127654).epsilon(1e-7));
    CHECK(y == doctest::Approx(0.039470426).epsilon(1e-7));

    p.length = 1.0;
    com_position(p, 0.5, x, y);
    CHECK(x == doctest::Approx(0.489669752).epsilon(1e-8));
    CHECK(y == doctest::Approx(0.082297846).epsilon(1e-8));

    // random sweep against the quadrature oracle
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> qd(-3.0, 3.0);
    for (int i = 0; i < 50; ++i) {
        const double q = qd(rng);
        if (std::abs(q) < 1e-2) continue;
        double ox, oy;
        com_oracle(p.length, q, ox, oy);
        com_position(p, q, x, y);
        CHECK(x == doctest::Approx(ox).epsilon(1e-9));
        CHECK(y == doctest::Approx(oy).epsilon(1e-9));
    }
}

TEST_CASE("shape function value and derivative vs finite differences") {
    CHECK(shape_fn(0.0).a == doctest::Approx(1.0 / 36.0).epsilon(1e-12));
    CHECK(shape_fn(0.0).da == doctest::Approx(0.0).epsilon(1e-14));

    SegmentParams p;
    p.length = 1.0;
    const double h = 1e-5;

    // a(q) from central finite differences of com_position
    auto a_fd = [&](double q) {
        double xp, yp, xm, ym;
        com_position(p, q + h, xp, yp);
        com_position(p, q - h, xm, ym);
        const double jx = (xp - xm) / (2.0 * h);
        const double jy = (yp - ym) / (2.0 * h);
        return jx * jx + jy * jy;
    };

    CHECK(shape_fn(0.0).a == doctest::Approx(a_fd(0.0)).epsilon(1e-8));
    CHECK(shape_fn(0.8).a == doctest::Approx(a_fd(0.8)).epsilon(1e-8));

    // a'(q) from central differences of a(q)
    for (double q : {0.3, 0.8, 1.5, 2.5, -0.7}) {
        const double da_fd = (shape_fn(q + h).a - shape_fn(q - h).a) / (2.0 * h);
        CHECK(shape_fn(q).da == doctest::Approx(da_fd).epsilon(1e-6));
    }
}

TEST_CASE("series and closed form agree across switch points") {
    SegmentParams p;
    for (double sgn : {1.0, -1.0}) {
        // com/shape switch at |q| = 1e-3: evaluate both branches right at it
        const double q = sgn * 1e-3;
        double xs, ys, xc, yc;
        com_position(p, std::nextafter(q, 0.0), xs, ys);   // series branch
        com_position(p, std::nextafter(q, 2.0 * q), xc, yc);  // closed branch
        CHECK(std::abs(xs - xc) < 1e-10);
        CHECK(std::abs(ys - yc) < 1e-10);

        const double qt = sgn * 1e-6;
        PlanarPose ts = tip_pose(p, std::nextafter(qt, 0.0));
        PlanarPose tc = tip_pose(p, std::nextafter(qt, 2.0 * qt));
        CHECK(std::abs(ts.x - tc.x) < 1e-10);
        CHECK(std::abs(ts.y - tc.y) < 1e-10);

        // a(q) switches with the CoM derivatives at 1e-3, a'(q) at 0.1
        Shape ss = shape_fn(std::nextafter(q, 0.0));
        Shape sc = shape_fn(std::nextafter(q, 2.0 * q));
        CHECK(std::abs(ss.a - sc.a) < 1e-10);

        const double qc = sgn * 0.1;
        Shape cs = shape_fn(std::nextafter(qc, 0.0));
        Shape cc = shape_fn(std::nextafter(qc, 2.0 * qc));
        CHECK(std::abs(cs.a - cc.a) < 1e-10);
        CHECK(std::abs(cs.da - cc.da) < 1e-10);
    }
}

TEST_CASE("mirror symmetry") {
    SegmentParams p;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> qd(0.0, 3.1);
    for (int i = 0; i < 100; ++i) {
        const double q = qd(rng);
        PlanarPose a = tip_pose(p, q);
        PlanarPose b = tip_pose(p, -q);
        CHECK(a.x == doctest::Approx(b.x).epsilon(1e-14));
        CHECK(a.y == doctest::Approx(-b.y).epsilon(1e-14));
        CHECK(shape_fn(q).a == doctest::Approx(shape_fn(-q).a).epsilon(1e-14));
    }
}

TEST_CASE("dynamics terms: frozen values") {
    SegmentParams p;  // m=0.110, L=0.124, K=1, D=0.2

    DynamicsTerms t0 = dynamics_terms(p, {0.0, 0.7});
    CHECK(t0.inertia == doctest::Approx(4.698222e-5).epsilon(1e-5));
    CHECK(t0.inertia > 0.0);

    // Coriolis vanishes at rest
    CHECK(dynamics_terms(p, {0.4, 0.0}).coriolis == 0.0);

    // K_s = 1 Nm/rad: spring torque equals q
    CHECK(dynamics_terms(p, {0.5, 0.0}).spring == doctest::Approx(0.5));

    // M > 0 over the workspace
    for (double q = -3.14; q <= 3.14; q += 0.05) {
        CHECK(dynamics_terms(p, {q, 0.0}).inertia > 0.0);
    }
}

TEST_CASE("one-DOF skew symmetry: dM/dt - 2C == 0") {
    SegmentParams p;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> qd(-3.0, 3.0), vd(-5.0, 5.0);
    const double ml2 = p.mass * p.length * p.length;
    for (int i = 0; i < 1000; ++i) {
        const double q = qd(rng), v = vd(rng);
        const Shape s = shape_fn(q);
        const double mdot = ml2 * s.da * v;
        const double c = dynamics_terms(p, {q, v}).coriolis;
        CHECK(std::abs(mdot - 2.0 * c) < 1e-12);
    }
}

TEST_CASE("accel satisfies the model identity") {
    SegmentParams p;
    CHECK(accel(p, {0.0, 0.0}, 0.0) == 0.0);
    CHECK(accel(p, {0.0, 0.0}, 0.01) == doctest::Approx(212.8465).epsilon(1e-5));

    const double m02 = dynamics_terms(p, {0.2, 0.0}).inertia;
    CHECK(accel(p, {0.2, 0.0}, 0.0) == doctest::Approx(-0.2 / m02).epsilon(1e-12));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> qd(-3.0, 3.0), vd(-5.0, 5.0), td(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        RobotState s{qd(rng), vd(rng)};
        const double tau = td(rng);
        const double qdd = accel(p, s, tau);
        const DynamicsTerms t = dynamics_terms(p, s);
        const double residual = t.inertia * qdd + t.coriolis * s.q_dot + t.damper + t.spring - tau;
        CHECK(std::abs(residual) < 1e-12);
    }
}

TEST_CASE("step: rest is an exact fixed point") {
    SegmentParams p;
    RobotState rest{0.0, 0.0};
    RobotState next = step(p, rest, 0.0, 1e-3);
    CHECK(next.q == 0.0);
    CHECK(next.q_dot == 0.0);
}

TEST_CASE("step: small-oscillation period matches 2*pi*sqrt(M/K)") {
    SegmentParams p;
    p.damping = 0.0;
    const double m0 = dynamics_terms(p, {0.0, 0.0}).inertia;
    const double expected = 2.0 * kPi * std::sqrt(m0 / p.stiffness);

    const double h = 1e-5;
    RobotState s{0.01, 0.0};
    double prev_qd = 0.0, first_cross = -1.0, last_cross = -1.0;
    int crossings = 0;
    for (long i = 1; i * h < 0.5; ++i) {
        s = step(p, s, 0.0, h);
        // downward zero crossing of q_dot marks each maximum of q
        if (prev_qd > 0.0 && s.q_dot <= 0.0) {
            const double frac = prev_qd / (prev_qd - s.q_dot);
            const double t = (i - 1 + frac) * h;
            if (first_cross < 0.0) first_cross = t;
            last_cross = t;
            crossings++;
        }
        prev_qd = s.q_dot;
    }
    REQUIRE(crossings >= 4);
    const double period = (last_cross - first_cross) / (crossings - 1);
    CHECK(period == doctest::Approx(expected).epsilon(0.005));
}

TEST_CASE("step: energy conservation without damping") {
    SegmentParams p;
    p.damping = 0.0;
    p.stiffness = 0.002;  // keeps the undamped mode resolvable at h = 1e-3
    RobotState s{0.5, 0.0};
    const double e0 = energy(p, s);
    double max_drift = 0.0;
    const double h = 1e-3;
    for (int i = 0; i < 10000; ++i) {
        s = step(p, s, 0.0, h);
        max_drift = std::max(max_drift, std::abs(energy(p, s) - e0) / e0);
    }
    CHECK(max_drift < 1e-8);
}

TEST_CASE("step: workspace guard saturates and counts") {
    SegmentParams p;
    p.stiffness = 0.0;  // nothing pulls back
    StepStats stats;
    RobotState s{3.1, 2.0};
    for (int i = 0; i < 4000; ++i) s = step(p, s, 0.5, 1e-4, &stats);
    CHECK(std::abs(s.q) <= kWorkspaceGuard);
    CHECK(stats.saturations > 0);
}

TEST_CASE("step: non-finite state is reported") {
    SegmentParams p;  // fast pole far outside RK4 stability at this h
    RobotState s{0.0, 0.0};
    bool thrown = false;
    try {
        for (int i = 0; i < 10000; ++i) s = step(p, s, 0.05, 0.01);
    } catch (const NonFiniteState&) {
        thrown = true;
    }
    CHECK(thrown);
}

}  // TEST_SUITE
