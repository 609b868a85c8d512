#pragma once
// Geodesics in the upper half-plane and the sides of the fundamental domain.

#include <cmath>
#include <complex>
#include <optional>

#include "context.hpp"

namespace hecke {

/// Oriented geodesic from eta (backward end) to xi (forward end).
template <class Real>
struct GeodesicEndpoints {
    Real xi{};
    Real eta{};
};

template <class Real>
GeodesicEndpoints<Real> apply(const Mobius<Real>& m, const GeodesicEndpoints<Real>& g) {
    return {m(g.xi), m(g.eta)};
}

/// Reflection in the imaginary axis, z -> -conj(z).
template <class Real>
GeodesicEndpoints<Real> mirror(const GeodesicEndpoints<Real>& g) {
    return {-g.xi, -g.eta};
}

template <class Real>
struct TangentVector {
    Real x{};
    Real y{1};
    Real theta{};  // direction, in [-pi, pi)
};

template <class Real>
Real wrap_angle(Real t) {
    const Real pi = std::numbers::pi_v<Real>;
    t = std::fmod(t + pi, 2 * pi);
    if (t < 0) t += 2 * pi;
    return t - pi;
}

/// Endpoints and arclength parameter of the geodesic through (x+iy, theta).
/// s = 0 at the top of the semicircle and grows toward the backward end.
template <class Real>
std::pair<GeodesicEndpoints<Real>, Real> tangent_to_geodesic(const TangentVector<Real>& tv, Real eps = Real(1e-12)) {
    if (!(tv.y > 0)) throw std::domain_error("tangent vector base point must lie in the upper half-plane");
    const Real c = std::cos(tv.theta);
    if (std::abs(c) <= eps) throw std::domain_error("vertical geodesic has an endpoint at infinity");
    const Real center = tv.x + tv.y * std::tan(tv.theta);
    const Real rad = tv.y / c;  // signed: negative for leftward vectors
    const Real pi = std::numbers::pi_v<Real>;
    Real th = c > 0 ? tv.theta : wrap_angle(pi - tv.theta);
    return {{center + rad, center - rad}, std::log(std::tan(th / 2 + pi / 4))};
}

template <class Real>
TangentVector<Real> geodesic_to_tangent(const GeodesicEndpoints<Real>& g, Real s) {
    if (!std::isfinite(g.xi) || !std::isfinite(g.eta) || g.xi == g.eta)
        throw std::domain_error("geodesic_to_tangent needs distinct finite endpoints");
    const Real pi = std::numbers::pi_v<Real>;
    if (g.xi < g.eta) {
        auto t = geodesic_to_tangent(mirror(g), s);
        return {-t.x, t.y, wrap_angle(pi - t.theta)};
    }
    const Real center = (g.xi + g.eta) / 2, rad = (g.xi - g.eta) / 2;
    const Real t = 2 * std::atan(std::exp(s));
    return {center + rad * std::cos(t), rad * std::sin(t), t - pi / 2};
}

template <class Real>
Real g_value(std::complex<Real> z, Real xi) {
    if (!(z.imag() > 0)) throw std::domain_error("g_value: point not in the upper half-plane");
    return std::norm(z - xi) / z.imag();
}

template <class Real>
bool on_geodesic(const GeodesicEndpoints<Real>& g, std::complex<Real> z, Real tol) {
    const Real center = (g.xi + g.eta) / 2, rad = std::abs(g.xi - g.eta) / 2;
    return std::abs(std::abs(z - center) - rad) <= tol * std::max(Real(1), rad);
}

/// Signed hyperbolic distance from z1 to z2, positive when z2 lies ahead.
template <class Real>
Real distance_along(const GeodesicEndpoints<Real>& g, std::complex<Real> z1, std::complex<Real> z2,
                    Real tol = Real(1e-9)) {
    if (!on_geodesic(g, z1, tol) || !on_geodesic(g, z2, tol))
        throw std::invalid_argument("distance_along: point is not on the geodesic");
    return std::log(g_value(z1, g.xi)) - std::log(g_value(z2, g.xi));
}

/// Position along the geodesic, increasing toward xi.
template <class Real>
Real flow_position(const GeodesicEndpoints<Real>& g, std::complex<Real> z) {
    return -std::log(g_value(z, g.xi));
}

// ---------------------------------------------------------------------------
// Sides of the fundamental domain |Re z| <= lambda/2, |z| >= 1

enum class CarrierKind { vertical, circular };

/// Side L_id.  L_0 is the unit-circle arc, L_{+-1} the verticals at +-lambda/2,
/// L_{+-2} = T^{+-1} S L_{+-1} and L_{+-3} = T^{+-1} L_0.
template <class Real>
struct SideArc {
    int id = 0;
    CarrierKind kind = CarrierKind::circular;
    Real a{};       // vertical: abscissa
    Real center{};  // circular
    Real radius{};
    Real x_lo{}, x_hi{};  // circular arcs: range of Re z
    Real y_lo{};          // verticals: lowest point

    bool on_arc(std::complex<Real> z, Real tol) const {
        if (kind == CarrierKind::vertical) return z.imag() >= y_lo - tol;
        return z.real() >= x_lo - tol && z.real() <= x_hi + tol;
    }
};

template <class Real>
SideArc<Real> side_arc(const Context<Real>& ctx, int id) {
    if (id < -3 || id > 3) throw std::invalid_argument("side id must be in -3..3");
    SideArc<Real> s;
    s.id = id;
    const Real l = ctx.lambda;
    const int e = id >= 0 ? 1 : -1;
    switch (std::abs(id)) {
        case 0:
            s.center = 0;
            s.radius = 1;
            s.x_lo = -l / 2;
            s.x_hi = l / 2;
            break;
        case 1:
            s.kind = CarrierKind::vertical;
            s.a = e * l / 2;
            s.y_lo = ctx.rho.imag();
            break;
        case 2:
            // arc from rho to lambda
            s.center = e * (l - 1 / l);
            s.radius = 1 / l;
            s.x_lo = id > 0 ? l / 2 : -l;
            s.x_hi = id > 0 ? l : -l / 2;
            break;
        default:
            // arc from rho to rho + lambda
            s.center = e * l;
            s.radius = 1;
            s.x_lo = id > 0 ? l / 2 : -3 * l / 2;
            s.x_hi = id > 0 ? 3 * l / 2 : -l / 2;
            break;
    }
    return s;
}

template <class Real>
struct SideHit {
    std::complex<Real> z;
    Real g{};            // g(z, xi)
    bool on_arc = false; // z lies on the side itself, not only on its carrier
};

/// Intersection of the geodesic with the full carrier of a side.
template <class Real>
std::optional<std::complex<Real>> intersect_carrier(const SideArc<Real>& side, const GeodesicEndpoints<Real>& g) {
    const Real xi = g.xi, eta = g.eta;
    if (!std::isfinite(xi) || !std::isfinite(eta)) return std::nullopt;
    if (side.kind == CarrierKind::vertical) {
        const Real a = side.a;
        Real rad = (xi - a) * (a - eta);
        if (!(rad > 0)) return std::nullopt;
        return std::complex<Real>(a, std::sqrt(rad));
    }
    const Real c = side.center, rho = side.radius;
    const Real den = xi + eta - 2 * c;
    if (den == 0) return std::nullopt;  // concentric circles do not cross
    const Real rad = ((xi - c) * (xi - c) - rho * rho) * (rho * rho - (eta - c) * (eta - c));
    if (!(rad > 0)) return std::nullopt;
    return std::complex<Real>((xi * eta + rho * rho - c * c) / den, std::sqrt(rad) / std::abs(den));
}

template <class Real>
std::optional<SideHit<Real>> intersect_side(const Context<Real>& ctx, const SideArc<Real>& side,
                                            const GeodesicEndpoints<Real>& g) {
    auto z = intersect_carrier(side, g);
    if (!z) return std::nullopt;
    return SideHit<Real>{*z, g_value(*z, g.xi), side.on_arc(*z, 10 * ctx.eps)};
}

/// g(Z_j, xi) in closed form (eta < xi not required).
template <class Real>
Real side_g_closed_form(const SideArc<Real>& side, const GeodesicEndpoints<Real>& g) {
    const Real xi = g.xi, eta = g.eta;
    if (side.kind == CarrierKind::vertical) return std::abs(xi - eta) * std::sqrt(-(xi - side.a) / (eta - side.a));
    const Real c = side.center, rho = side.radius;
    return std::abs(xi - eta) *
           std::sqrt(-((xi - c) * (xi - c) - rho * rho) / ((eta - c) * (eta - c) - rho * rho));
}

/// B z = (lambda z - 2)/(2 z - lambda): the involution fixing rho whose graph
/// bounds the geodesics crossing L_1.
template <class Real>
Real l1_boundary(const Context<Real>& ctx, Real x) {
    return (ctx.lambda * x - 2) / (2 * x - ctx.lambda);
}

template <class Real>
struct L1Crossing {
    bool crosses = false;
    Real delta{};
};

/// Whether the geodesic meets T^n L_1; delta < 0 is the height condition.
template <class Real>
L1Crossing<Real> crosses_L1(const Context<Real>& ctx, const GeodesicEndpoints<Real>& g, long long n = 0) {
    const Real shift = Real(n) * ctx.lambda;
    const Real xi = g.xi - shift, eta = g.eta - shift;
    L1Crossing<Real> out;
    out.delta = eta - l1_boundary(ctx, xi);
    out.crosses = eta < ctx.lambda / 2 && ctx.lambda / 2 < xi && out.delta < 0;
    return out;
}

}  // namespace hecke
