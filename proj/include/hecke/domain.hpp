#pragma once
// Markov partition of I_q, the planar domain Omega of the natural extension,
// and the return exponents read off a regular expansion.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "cfmaps.hpp"

namespace hecke {

/// phi[0] = -lambda/2 < ... < phi[kappa] = 0 is the F_q-orbit of -lambda/2.
/// rj[0] = -R and 0 > rj[1] > ... > rj[kappa] = r is the dual orbit of -R.
/// Interval I_j = [phi[j-1], phi[j]) carries heights [rj[j], R]; I_{-j} = -I_j
/// carries [-R, -rj[j]].
template <class Real>
struct Partition {
    std::vector<Real> phi;
    std::vector<Real> rj;
    int kappa = 0;

    Real lower(int j) const { return j > 0 ? phi[j - 1] : -phi[-j]; }
    Real upper(int j) const { return j > 0 ? phi[j] : -phi[-j - 1]; }
    Real height_lo(int j, Real R) const { return j > 0 ? rj[j] : -R; }
    Real height_hi(int j, Real R) const { return j > 0 ? R : -rj[-j]; }
};

namespace detail {
template <class Real>
bool contains_close(const std::vector<Real>& xs, Real x, Real tol) {
    return std::any_of(xs.begin(), xs.end(), [&](Real y) { return std::abs(x - y) <= tol; });
}
}  // namespace detail

template <class Real>
Partition<Real> build_partition(const Context<Real>& ctx) {
    Partition<Real> p;
    p.kappa = ctx.kappa;
    const Real tol = std::max(Real(1e-9), 100 * ctx.eps);

    Real x = -ctx.lambda / 2;
    p.phi.push_back(x);
    detail::OrbitError<Real> err(x);
    for (int step = 0; step <= ctx.kappa + 1 && x != 0; ++step) {
        Real next = f_q(ctx, x).next;
        err.step(x, next);
        x = err.is_zero(ctx, next) ? Real(0) : next;
        if (!detail::contains_close(p.phi, x, tol)) p.phi.push_back(x);
    }
    if (x != 0 || static_cast<int>(p.phi.size()) != ctx.kappa + 1)
        throw consistency_error("orbit of -lambda/2 does not close after kappa+1 points");
    std::sort(p.phi.begin(), p.phi.end());

    Real y = -ctx.R;
    std::vector<Real> orbit{y};
    for (int step = 0; step <= 2 * ctx.kappa + 2; ++step) {
        y = f_q_star(ctx, y).next;
        if (detail::contains_close(orbit, y, tol)) break;
        orbit.push_back(y);
    }
    if (static_cast<int>(orbit.size()) != ctx.kappa + 1)
        throw consistency_error("dual orbit of -R does not have kappa+1 points");
    p.rj.push_back(orbit.front());
    std::vector<Real> rest(orbit.begin() + 1, orbit.end());
    std::sort(rest.begin(), rest.end(), std::greater<Real>());
    p.rj.insert(p.rj.end(), rest.begin(), rest.end());
    if (std::abs(p.rj.back() - ctx.r) > tol || p.rj[1] >= 0)
        throw consistency_error("dual orbit of -R is not ordered as 0 > r_1 > ... > r_kappa = r");
    return p;
}

/// Signed index j with u in I_j.
template <class Real>
int locate(const Context<Real>& ctx, const Partition<Real>& part, Real u) {
    if (!std::isfinite(u) || u == 0 || std::abs(u) > ctx.lambda / 2 + ctx.eps)
        throw std::domain_error("locate: point lies in no partition interval");
    if (u > 0) return -locate(ctx, part, -u);
    for (int j = 1; j <= part.kappa; ++j)
        if (u < part.phi[j]) return j;
    return part.kappa;
}

template <class Real>
struct PlanarPoint {
    Real u{};
    Real v{};
};

enum class OmegaRegion { outside, omega, omega_strong };

template <class Real>
bool strongly_reduced_uv(const Context<Real>& ctx, Real u, Real v) {
    return std::abs(u) <= 2 / (3 * ctx.lambda) + ctx.eps || u * v < 0;
}

/// Membership in the closed domain (boundary within eps).  An abscissa within
/// eps of a partition point is tested against both neighbouring intervals.
template <class Real>
OmegaRegion omega_membership(const Context<Real>& ctx, const Partition<Real>& part, PlanarPoint<Real> p) {
    if (!std::isfinite(p.u) || !std::isfinite(p.v)) return OmegaRegion::outside;
    if (std::abs(p.u) > ctx.lambda / 2 + ctx.eps || std::abs(p.v) > ctx.R + ctx.eps) return OmegaRegion::outside;
    bool in = false;
    for (int j = -part.kappa; j <= part.kappa && !in; ++j) {
        if (j == 0) continue;
        if (p.u < part.lower(j) - ctx.eps || p.u > part.upper(j) + ctx.eps) continue;
        in = p.v >= part.height_lo(j, ctx.R) - ctx.eps && p.v <= part.height_hi(j, ctx.R) + ctx.eps;
    }
    if (!in) return OmegaRegion::outside;
    return strongly_reduced_uv(ctx, p.u, p.v) ? OmegaRegion::omega_strong : OmegaRegion::omega;
}

/// True when the point is within eps of the boundary of Omega.
template <class Real>
bool on_omega_boundary(const Context<Real>& ctx, const Partition<Real>& part, PlanarPoint<Real> p) {
    if (omega_membership(ctx, part, p) == OmegaRegion::outside) return false;
    const Real e = 2 * ctx.eps;
    for (Real du : {-e, e})
        for (Real dv : {-e, e}) {
            PlanarPoint<Real> s{p.u + du, p.v + dv};
            Context<Real> tight = ctx;
            tight.eps = 0;
            if (omega_membership(tight, part, s) == OmegaRegion::outside) return true;
        }
    return false;
}

/// One step of the natural extension; returns the image and the digit a1.
template <class Real>
std::pair<PlanarPoint<Real>, long long> natural_extension(const Context<Real>& ctx, PlanarPoint<Real> p) {
    if (std::abs(p.u) <= ctx.eps) throw std::domain_error("natural_extension: u = 0 has no next digit");
    auto s = f_q(ctx, p.u);
    return {{s.next, -1 / (p.v + Real(s.digit) * ctx.lambda)}, s.digit};
}

template <class Real>
std::pair<PlanarPoint<Real>, long long> natural_extension_inv(const Context<Real>& ctx, PlanarPoint<Real> p) {
    if (std::abs(p.v) <= ctx.eps) throw std::domain_error("natural_extension_inv: v = 0 has no next digit");
    auto s = f_q_star(ctx, p.v);
    return {{-1 / (p.u + Real(s.digit) * ctx.lambda), s.next}, s.digit};
}

/// Two-sided code of (u, v): past from the dual expansion of v, future from
/// the regular expansion of u.
template <class Real>
BiCode bicode(const Context<Real>& ctx, PlanarPoint<Real> p, std::size_t digits = 40) {
    return {expand_dual(ctx, p.v, digits), expand_regular(ctx, p.u, digits)};
}

struct ReturnExponent {
    int k = 1;      // power of the natural extension
    int label = 0;  // component of the cross-section hit next
};

/// Return exponent and label from the leading digits of xi, |xi| > lambda/2.
template <class Real>
ReturnExponent first_return_exponent(const Context<Real>& ctx, const Code& code) {
    const long long a0 = code.leading;
    if (a0 == 0) throw std::domain_error("first_return_exponent: needs a nonzero leading digit");
    const long long e = a0 > 0 ? 1 : -1;
    const std::size_t limit = code.periodic() ? code.head.size() + code.cycle.size() + 1 : code.size() + 1;
    std::size_t k = 1;
    while (k <= limit && code.digit(k) == e) ++k;
    if (k > limit) throw std::domain_error("first_return_exponent: constant +-1 tail");
    ReturnExponent out;
    out.k = static_cast<int>(k);
    const int h = ctx.h;
    if (!ctx.even() && out.k == h + 1)
        out.label = static_cast<int>(3 * e);
    else if (ctx.even() && out.k == h && h >= 1 && e * code.digit(static_cast<std::size_t>(h)) >= 2)
        out.label = static_cast<int>(2 * e);
    else if (ctx.even() && out.k == h + 1)
        out.label = static_cast<int>(e);
    return out;
}

template <class Real>
ReturnExponent first_return_exponent(const Context<Real>& ctx, Real xi) {
    if (!(std::abs(xi) > ctx.lambda / 2)) throw std::domain_error("first_return_exponent: |xi| <= lambda/2");
    return first_return_exponent(ctx, expand_regular(ctx, xi, 64));
}

}  // namespace hecke
