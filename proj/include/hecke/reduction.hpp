#pragma once
// Reduction of geodesics into Omega*, normalization of the -r tail, strong
// reduction, and closed geodesics from periodic codes.

#include <cmath>
#include <string>

#include "domain.hpp"
#include "geometry.hpp"

namespace hecke {

/// Geodesic with (S xi, -eta) in Omega, together with the group element that
/// produced it from the input.
template <class Real>
struct ReducedGeodesic {
    GeodesicEndpoints<Real> endpoints;
    Word word;  // reducing map as a word in S and T
    Mobius<Real> map = Mobius<Real>::identity();
    BiCode code;
};

template <class Real>
PlanarPoint<Real> to_planar(const GeodesicEndpoints<Real>& g) {
    return {-1 / g.xi, -g.eta};
}

template <class Real>
GeodesicEndpoints<Real> from_planar(const PlanarPoint<Real>& p) {
    return {-1 / p.u, -p.v};
}

template <class Real>
OmegaRegion reduced_region(const Context<Real>& ctx, const Partition<Real>& part, const GeodesicEndpoints<Real>& g) {
    if (!std::isfinite(g.xi) || !std::isfinite(g.eta) || g.xi == 0) return OmegaRegion::outside;
    return omega_membership(ctx, part, to_planar(g));
}

template <class Real>
bool is_reduced(const Context<Real>& ctx, const Partition<Real>& part, const GeodesicEndpoints<Real>& g) {
    return reduced_region(ctx, part, g) != OmegaRegion::outside;
}

template <class Real>
bool is_strongly_reduced(const Context<Real>& ctx, const Partition<Real>& part, const GeodesicEndpoints<Real>& g) {
    return reduced_region(ctx, part, g) == OmegaRegion::omega_strong;
}

namespace detail {
template <class Real>
void push_word(const Context<Real>& ctx, ReducedGeodesic<Real>& rg, const Word& w) {
    Mobius<Real> m = to_mobius(ctx, w);
    rg.endpoints = apply(m, rg.endpoints);
    rg.map = (m * rg.map).normalized();
    rg.word = w * rg.word;
}

// One backward step of the natural extension, T^{-d} S with d the dual digit
// of eta.
template <class Real>
void dual_step(const Context<Real>& ctx, ReducedGeodesic<Real>& rg) {
    auto s = f_q_star(ctx, rg.endpoints.eta);
    if (s.stop()) throw std::domain_error("geodesic ends at a cusp");
    Word w = Word::T(-s.digit) * Word::S();
    Real snapped = s.next;
    push_word(ctx, rg, w);
    rg.endpoints.eta = snapped;  // keep pinned tie values exact
}

template <class Real>
void refresh_code(const Context<Real>& ctx, ReducedGeodesic<Real>& rg) {
    auto p = to_planar(rg.endpoints);
    rg.code = {expand_dual(ctx, p.v, 40), expand_regular(ctx, p.u, 40)};
}

template <class Real>
void require_infinite(const Context<Real>& ctx, Real x, std::size_t budget, const char* what) {
    if (!std::isfinite(x)) throw std::domain_error(std::string(what) + " is not finite");
    if (expand_regular(ctx, x, budget).finite())
        throw std::domain_error(std::string(what) + " has a finite expansion: the geodesic runs into the cusp");
}
}  // namespace detail

/// Length of the dual cycle of r plus h+2: how far ahead a -r tail is looked for.
template <class Real>
int tail_horizon(const Context<Real>& ctx) {
    int period = ctx.even() ? ctx.h : 2 * ctx.h + 1;
    return std::max(period, 1) + ctx.h + 2;
}

/// Index n <= horizon with F*^n(eta) = -r, if any.
template <class Real>
std::optional<int> minus_r_tail(const Context<Real>& ctx, Real eta) {
    const Real tol = std::max(Real(1e-9), 1000 * ctx.eps);
    Real y = eta;
    for (int n = 0; n <= tail_horizon(ctx); ++n) {
        if (std::abs(y + ctx.r) <= tol) return n;
        if (std::abs(y) > ctx.R + ctx.eps || std::abs(y) <= ctx.eps) return std::nullopt;
        y = f_q_star(ctx, y).next;
    }
    return std::nullopt;
}

/// Replaces a geodesic whose backward end has the dual tail of -r by an
/// equivalent one whose backward end has the tail of r.  No-op otherwise.
template <class Real>
ReducedGeodesic<Real> normalize_tail(const Context<Real>& ctx, const Partition<Real>& part, ReducedGeodesic<Real> rg) {
    auto n = minus_r_tail(ctx, rg.endpoints.eta);
    if (!n) return rg;
    for (int i = 0; i < *n; ++i) detail::dual_step(ctx, rg);
    rg.endpoints.eta = -ctx.r;

    Code u = expand_regular(ctx, -1 / rg.endpoints.xi, 2 * static_cast<std::size_t>(ctx.h) + 8);
    auto a = [&](std::size_t i) { return u.digit(i); };
    const Word Tinv = Word::T(-1);
    std::optional<Word> A;
    if (ctx.even()) {
        if (a(1) >= 2)
            A = Tinv;
        else if (a(1) == 1 && a(2) <= -1)
            A = Tinv * Word::S() * Tinv;
    } else if (a(1) >= 3) {
        A = Tinv;
    } else if (a(1) == 2) {
        std::size_t j = 0;
        while (a(2 + j) == 1 && j <= static_cast<std::size_t>(ctx.h)) ++j;
        if (j + 1 <= static_cast<std::size_t>(ctx.h)) {
            A = Tinv;
        } else if (j == static_cast<std::size_t>(ctx.h) && a(ctx.h + 2) <= -1) {
            Word w = Tinv;
            for (int i = 0; i < ctx.h; ++i) w = w * Word::S() * Tinv;
            A = w * Word::S() * Word::T(-2);
        }
    }
    if (A) {
        detail::push_word(ctx, rg, *A);
        // land exactly on -R or r
        if (std::abs(rg.endpoints.eta + ctx.R) <= 1e-9) rg.endpoints.eta = -ctx.R;
        if (std::abs(rg.endpoints.eta - ctx.r) <= 1e-9) rg.endpoints.eta = ctx.r;
    }
    for (int i = 0; i < 200 && !is_reduced(ctx, part, rg.endpoints); ++i) detail::dual_step(ctx, rg);
    if (!is_reduced(ctx, part, rg.endpoints)) throw consistency_error("tail normalization left Omega*");
    detail::refresh_code(ctx, rg);
    return rg;
}

/// Moves an arbitrary geodesic with non-cuspidal endpoints into Omega*.
template <class Real>
ReducedGeodesic<Real> reduce_endpoints(const Context<Real>& ctx, const Partition<Real>& part,
                                       const GeodesicEndpoints<Real>& g, std::size_t max_digits = 40,
                                       int max_steps = 200) {
    detail::require_infinite(ctx, g.xi, 10 * max_digits, "xi");
    detail::require_infinite(ctx, g.eta, 10 * max_digits, "eta");
    if (g.xi == g.eta) throw std::domain_error("endpoints coincide");
    ReducedGeodesic<Real> rg;
    rg.endpoints = g;
    if (std::abs(g.eta) > ctx.R) detail::push_word(ctx, rg, Word::T(-dual_nearest(ctx, g.eta)));
    int steps = 0;
    while (!is_reduced(ctx, part, rg.endpoints)) {
        if (++steps > max_steps) throw consistency_error("reduction did not reach Omega* within the step budget");
        detail::dual_step(ctx, rg);
    }
    rg = normalize_tail(ctx, part, rg);
    detail::refresh_code(ctx, rg);
    return rg;
}

template <class Real>
struct StrongReduction {
    ReducedGeodesic<Real> geodesic;
    int k = 0;  // forward steps of the natural extension taken
};

/// Smallest k >= 0 with F~^k of a reduced geodesic strongly reduced.
template <class Real>
StrongReduction<Real> strongly_reduce(const Context<Real>& ctx, const Partition<Real>& part, ReducedGeodesic<Real> rg,
                                      int max_steps = 10000) {
    StrongReduction<Real> out;
    while (!is_strongly_reduced(ctx, part, rg.endpoints)) {
        if (out.k >= max_steps) throw consistency_error("strong reduction did not terminate");
        long long a = nearest_multiple(ctx, rg.endpoints.xi);
        detail::push_word(ctx, rg, Word::S() * Word::T(-a));
        ++out.k;
    }
    detail::refresh_code(ctx, rg);
    out.geodesic = rg;
    return out;
}

template <class Real>
struct PeriodicGeodesic {
    Mobius<Real> A;   // S T^{a1} ... S T^{an}
    Real xi{};        // attracting fixed point, the value of the purely periodic code
    Real xi_conj{};   // repelling fixed point
};

template <class Real>
PeriodicGeodesic<Real> hyperbolic_from_periodic(const Context<Real>& ctx, const Digits& cycle) {
    if (cycle.empty()) throw std::invalid_argument("empty cycle");
    Code c;
    c.cycle = cycle;
    if (std::find(cycle.begin(), cycle.end(), 0) != cycle.end()) throw std::invalid_argument("zero digit in cycle");
    if (!is_regular(ctx, c)) throw std::invalid_argument("cycle contains a forbidden block");
    PeriodicGeodesic<Real> out;
    out.A = head_map(ctx, 0, cycle).normalized();
    out.xi = evaluate(ctx, c).value;
    Code dual;
    dual.flavor = Flavor::dual;
    dual.cycle.assign(cycle.rbegin(), cycle.rend());
    Real eta = evaluate(ctx, dual, true).value;
    out.xi_conj = 1 / eta;
    // the repelling point is checked with the inverse, which contracts there
    const Real tol = std::max(Real(1e-9), 1000 * ctx.eps);
    if (std::abs(out.A(out.xi) - out.xi) > tol * std::max(Real(1), std::abs(out.xi)) ||
        std::abs(out.A.inverse()(out.xi_conj) - out.xi_conj) > tol * std::max(Real(1), std::abs(out.xi_conj)))
        throw consistency_error("periodic code values are not fixed by the cycle map");
    return out;
}

/// Reduced representative (xi, eta) = (S u, -v) of the closed geodesic with
/// future code (cycle) and past code (reversed cycle).
template <class Real>
GeodesicEndpoints<Real> closed_geodesic(const Context<Real>& ctx, const Digits& cycle) {
    auto p = hyperbolic_from_periodic(ctx, cycle);
    return {-1 / p.xi, -1 / p.xi_conj};
}

}  // namespace hecke
