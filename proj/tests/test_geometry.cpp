#include <gtest/gtest.h>

#include "support.hpp"

using namespace hecke;
using hecke::testing::Sampler;
using hecke::testing::Geo;
using cplx = std::complex<double>;

namespace {
double arccosh_distance(cplx a, cplx b) {
    return std::acosh(1 + std::norm(a - b) / (2 * a.imag() * b.imag()));
}

// |det d(x, y, theta)/d(xi, eta, s)| by central differences.
double jacobian(const Geo& g, double s, double h = 1e-5) {
    double J[3][3];
    for (int col = 0; col < 3; ++col) {
        Geo gp = g, gm = g;
        double sp = s, sm = s;
        if (col == 0) { gp.xi += h; gm.xi -= h; }
        if (col == 1) { gp.eta += h; gm.eta -= h; }
        if (col == 2) { sp += h; sm -= h; }
        auto a = geodesic_to_tangent(gp, sp), b = geodesic_to_tangent(gm, sm);
        J[0][col] = (a.x - b.x) / (2 * h);
        J[1][col] = (a.y - b.y) / (2 * h);
        J[2][col] = wrap_angle(a.theta - b.theta) / (2 * h);
    }
    return std::abs(J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
                    J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
                    J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]));
}
}  // namespace

TEST(Tangent, Examples) {
    auto [g, s] = tangent_to_geodesic(TangentVector<double>{0, 1, 0});
    EXPECT_NEAR(g.xi, 1, 1e-15);
    EXPECT_NEAR(g.eta, -1, 1e-15);
    EXPECT_NEAR(s, 0, 1e-15);
    auto [g2, s2] = tangent_to_geodesic(TangentVector<double>{0, 2, std::numbers::pi / 4});
    EXPECT_NEAR(g2.xi, 2 + 2 * std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(g2.eta, 2 - 2 * std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(s2, std::log(1 + std::sqrt(2.0)), 1e-14);
    EXPECT_THROW(tangent_to_geodesic(TangentVector<double>{0, 1, std::numbers::pi / 2}), std::domain_error);
    EXPECT_THROW(tangent_to_geodesic(TangentVector<double>{0, -1, 0}), std::domain_error);

    auto t = geodesic_to_tangent(Geo{1, -1}, 0.0);
    EXPECT_NEAR(t.x, 0, 1e-15);
    EXPECT_NEAR(t.y, 1, 1e-15);
    EXPECT_NEAR(t.theta, 0, 1e-15);
    auto t2 = geodesic_to_tangent(Geo{4.8284271247461901, -0.8284271247461901}, 0.88137358701954303);
    EXPECT_NEAR(t2.x, 0, 1e-12);
    EXPECT_NEAR(t2.y, 2, 1e-12);
    EXPECT_NEAR(t2.theta, std::numbers::pi / 4, 1e-12);
    EXPECT_THROW(geodesic_to_tangent(Geo{1, 1}, 0.0), std::domain_error);
}

TEST(Tangent, RoundTrip) {
    Sampler gen(51);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        TangentVector<double> tv{gen.uniform(-5, 5), gen.uniform(0.05, 5), gen.uniform(-3.1, 3.1)};
        if (std::abs(std::cos(tv.theta)) < 0.05) continue;
        auto [g, s] = tangent_to_geodesic(tv);
        auto back = geodesic_to_tangent(g, s);
        worst = std::max({worst, std::abs(back.x - tv.x), std::abs(back.y - tv.y),
                          std::abs(wrap_angle(back.theta - tv.theta))});
        if (std::abs(tv.theta) < std::numbers::pi / 2) {
            EXPECT_LT(g.eta, g.xi);
        }
    }
    EXPECT_LE(worst, 1e-10);
}

TEST(Tangent, JacobianIsHalfCosSquared) {
    Sampler gen(52);
    for (int i = 0; i < 100; ++i) {
        TangentVector<double> tv{gen.uniform(-2, 2), gen.uniform(0.3, 2), gen.uniform(-1.3, 1.3)};
        if (gen.integer(0, 1)) tv.theta = wrap_angle(std::numbers::pi - tv.theta);
        auto [g, s] = tangent_to_geodesic(tv);
        double c = std::cos(tv.theta);
        EXPECT_NEAR(jacobian(g, s), c * c / 2, 1e-6) << tv.x << " " << tv.y << " " << tv.theta;
    }
}

TEST(GValue, ExamplesAndEquivariance) {
    EXPECT_DOUBLE_EQ(g_value(cplx(0, 1), 1.0), 2.0);
    EXPECT_DOUBLE_EQ(g_value(cplx(0, 1), 0.0), 1.0);
    EXPECT_THROW(g_value(cplx(0, -1), 0.0), std::domain_error);

    auto c4 = make_context<double>(4);
    auto A = (gen_S<double>() * gen_T(c4, 2)).normalized();
    cplx z(0, 1);
    EXPECT_NEAR(g_value(A(z), A(1.0)), g_value(z, 1.0) * A.derivative(1.0), 1e-12);

    Sampler gen(53);
    for (int q = 3; q <= 8; ++q) {
        auto c = make_context<double>(q);
        for (int i = 0; i < 100; ++i) {
            Word w;
            for (int k = 0; k < 3; ++k) w = w * Word::S() * Word::T(gen.digit(3));
            auto M = to_mobius(c, w).normalized();
            cplx p(gen.uniform(-1, 1), gen.uniform(0.5, 2));
            double xi = gen.uniform(-1, 1);
            if (std::abs(M.c * xi + M.d) < 0.05) continue;
            double lhs = g_value(M(p), M(xi)), rhs = g_value(p, xi) * M.derivative(xi);
            EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::max(1.0, std::abs(rhs)));
        }
    }
}

TEST(Distance, Examples) {
    Geo unit{1, -1};
    cplx i(0, 1), w = std::polar(1.0, std::numbers::pi / 3);
    EXPECT_EQ(distance_along(unit, i, i), 0.0);
    EXPECT_NEAR(distance_along(unit, i, w), std::log(std::sqrt(3.0)), 1e-14);
    EXPECT_NEAR(distance_along(unit, i, w), arccosh_distance(i, w), 1e-12);
    EXPECT_NEAR(distance_along(unit, w, i), -std::log(std::sqrt(3.0)), 1e-14);
    EXPECT_THROW(distance_along(unit, i, cplx(0, 2)), std::invalid_argument);
}

TEST(Distance, AdditiveAndMatchesArccosh) {
    Sampler gen(54);
    for (int i = 0; i < 300; ++i) {
        double a = gen.uniform(-3, 3), b = a + gen.uniform(0.1, 4);
        Geo g = gen.integer(0, 1) ? Geo{b, a} : Geo{a, b};
        double s1 = gen.uniform(-3, 3), s2 = gen.uniform(-3, 3), s3 = gen.uniform(-3, 3);
        auto pt = [&](double s) {
            auto t = geodesic_to_tangent(g, s);
            return cplx(t.x, t.y);
        };
        cplx z1 = pt(s1), z2 = pt(s2), z3 = pt(s3);
        double d12 = distance_along(g, z1, z2), d23 = distance_along(g, z2, z3), d13 = distance_along(g, z1, z3);
        EXPECT_NEAR(d12 + d23, d13, 1e-10);
        EXPECT_NEAR(std::abs(d12), arccosh_distance(z1, z2), 1e-8);
        // s grows toward the backward end
        EXPECT_NEAR(d12, s1 - s2, 1e-8);
    }
}

TEST(Sides, Examples) {
    auto c4 = make_context<double>(4);
    Geo g{2, -0.5};
    auto h0 = intersect_side(c4, side_arc(c4, 0), g);
    ASSERT_TRUE(h0);
    EXPECT_NEAR(h0->z.real(), 0, 1e-15);
    EXPECT_NEAR(h0->z.imag(), 1, 1e-15);
    EXPECT_NEAR(h0->g, 5, 1e-14);
    EXPECT_NEAR(side_g_closed_form(side_arc(c4, 0), g), 5, 1e-14);
    auto h1 = intersect_side(c4, side_arc(c4, 1), g);
    ASSERT_TRUE(h1);
    EXPECT_NEAR(h1->z.real(), 0.7071068, 1e-7);
    EXPECT_NEAR(h1->z.imag(), 1.2492638519463458, 1e-14);
    EXPECT_TRUE(h1->on_arc);
    EXPECT_FALSE(intersect_side(c4, side_arc(c4, 0), Geo{0.1, -0.1}));
    EXPECT_THROW(side_arc(c4, 4), std::invalid_argument);
}

TEST(Sides, CarriersPassThroughCorners) {
    for (int q = 3; q <= 10; ++q) {
        auto c = make_context<double>(q);
        const cplx rho = c.rho;
        for (int id = -3; id <= 3; ++id) {
            auto s = side_arc(c, id);
            if (s.kind == CarrierKind::vertical) {
                EXPECT_NEAR(std::abs(s.a), c.lambda / 2, 1e-15);
                continue;
            }
            // every circular side passes through rho or its mirror
            cplx corner = id >= 0 ? rho : cplx(-rho.real(), rho.imag());
            EXPECT_NEAR(std::abs(corner - s.center), s.radius, 1e-12) << "q=" << q << " id=" << id;
        }
        auto l2 = side_arc(c, 2), l3 = side_arc(c, 3);
        EXPECT_NEAR(std::abs(c.lambda - l2.center), l2.radius, 1e-12);
        EXPECT_NEAR(std::abs(rho + c.lambda - l3.center), l3.radius, 1e-12);
    }
}

TEST(Sides, IntersectionsLieOnBothCurves) {
    Sampler gen(55);
    for (int q = 3; q <= 8; ++q) {
        auto c = make_context<double>(q);
        for (int i = 0; i < 300; ++i) {
            Geo g{gen.uniform(-4, 4), gen.uniform(-4, 4)};
            for (int id = -3; id <= 3; ++id) {
                auto side = side_arc(c, id);
                auto hit = intersect_side(c, side, g);
                if (!hit) continue;
                EXPECT_TRUE(on_geodesic(g, hit->z, 1e-10));
                if (side.kind == CarrierKind::vertical) {
                    EXPECT_NEAR(hit->z.real(), side.a, 1e-12);
                } else {
                    EXPECT_NEAR(std::abs(hit->z - side.center), side.radius, 1e-10);
                }
                EXPECT_NEAR(hit->g, side_g_closed_form(side, g), 1e-9 * std::max(1.0, hit->g));
            }
        }
    }
}

TEST(Sides, MidlineCrossing) {
    Sampler gen(56);
    SideArc<double> axis;
    axis.kind = CarrierKind::vertical;
    axis.a = 0;
    for (int i = 0; i < 200; ++i) {
        Geo g{gen.uniform(0.01, 5), -gen.uniform(0.01, 5)};
        auto z = intersect_carrier(axis, g);
        ASSERT_TRUE(z);
        EXPECT_NEAR(z->real(), 0, 1e-15);
        EXPECT_NEAR(z->imag(), std::sqrt(-g.xi * g.eta), 1e-12);
    }
}

TEST(CrossesL1, Examples) {
    auto c4 = make_context<double>(4);
    auto r = crosses_L1(c4, Geo{2, -0.5});
    EXPECT_TRUE(r.crosses);
    EXPECT_NEAR(r.delta, -0.82037724101704074, 1e-14);
    double xi = 2, eta = l1_boundary(c4, xi);
    auto t = crosses_L1(c4, Geo{xi, eta});
    EXPECT_NEAR(t.delta, 0, 1e-15);
    EXPECT_FALSE(t.crosses);
    EXPECT_FALSE(crosses_L1(c4, Geo{3, 1}).crosses);
    // shifted copies
    auto s = crosses_L1(c4, Geo{2 + 3 * c4.lambda, -0.5 + 3 * c4.lambda}, 3);
    EXPECT_TRUE(s.crosses);
    EXPECT_NEAR(s.delta, r.delta, 1e-12);
}

TEST(CrossesL1, AgreesWithSideHeight) {
    // crossing the side L_1 (above rho) is the same as delta < 0
    Sampler gen(57);
    for (int q = 3; q <= 8; ++q) {
        auto c = make_context<double>(q);
        for (int i = 0; i < 500; ++i) {
            Geo g{gen.uniform(c.lambda / 2 + 1e-3, 5), gen.uniform(-5, c.lambda / 2 - 1e-3)};
            auto hit = intersect_side(c, side_arc(c, 1), g);
            ASSERT_TRUE(hit);
            bool above = hit->z.imag() > c.rho.imag();
            if (std::abs(hit->z.imag() - c.rho.imag()) < 1e-9) continue;
            EXPECT_EQ(crosses_L1(c, g).crosses, above);
        }
    }
}

TEST(CrossesL1, EvenDeltaIdentity) {
    Sampler gen(58);
    for (int q : {4, 6, 8, 10}) {
        auto c = make_context<double>(q);
        auto M = ts_power(c, c.h + 1);
        for (int i = 0; i < 200; ++i) {
            Geo g{gen.uniform(1, 5), gen.uniform(-3, 0.5)};
            EXPECT_NEAR(crosses_L1(c, g).delta, g.eta - M(g.xi), 1e-10) << q;
        }
    }
}

TEST(DigitBoundary, EvenQFlipPoint) {
    for (int q : {4, 6, 8}) {
        auto c = make_context<double>(q);
        auto digit_h = [&](double x) { return expand_regular(c, x, c.h + 2).digit(static_cast<std::size_t>(c.h)); };
        double lo = -c.lambda / 2 + 1e-9, hi = 1 - c.lambda - 1e-9;
        ASSERT_EQ(digit_h(lo), 1);
        ASSERT_EQ(digit_h(hi), 2);
        for (int it = 0; it < 80; ++it) {
            double mid = (lo + hi) / 2;
            (digit_h(mid) == 1 ? lo : hi) = mid;
        }
        double L = c.lambda;
        EXPECT_NEAR(lo, -L * L * L / (L * L + 4), 1e-9) << q;
    }
}
