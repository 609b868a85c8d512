#pragma once
// The interval maps F_q, F_q^* and the expansions they generate.

#include <cmath>
#include <limits>
#include <optional>

#include "codes.hpp"

namespace hecke {

/// Floor variant: n < x <= n+1 for x > 0, n <= x < n+1 for x <= 0.
template <class Real>
long long floor_q(Real x) {
    if (!std::isfinite(x)) throw std::domain_error("floor_q of a non-finite value");
    if (x > 0) return static_cast<long long>(std::ceil(x)) - 1;
    return static_cast<long long>(std::floor(x));
}

namespace detail {
struct Rounded {
    long long digit;
    int tie;  // 0, or the side (+1/-1) the remainder is pinned to at a tie
};

// floor_q applied to t, with values within tol of an integer snapped onto it
// first.  Roundoff would otherwise decide which side of a tie we land on.
template <class Real>
Rounded snapped_floor_q(Real t, Real tol) {
    Real n = std::round(t);
    if (std::abs(t - n) <= tol * std::max(Real(1), std::abs(t))) {
        long long k = static_cast<long long>(n);
        return k > 0 ? Rounded{k - 1, 1} : Rounded{k, -1};
    }
    return {floor_q(t), 0};
}

template <class Real>
Rounded dual_round(const Context<Real>& ctx, Real w) {
    Real t = w > 0 ? (w - ctx.r) / ctx.lambda : (w + ctx.R) / ctx.lambda;
    Real n = std::round(t);
    if (std::abs(t - n) <= ctx.eps * std::max(Real(1), std::abs(t))) {
        long long k = static_cast<long long>(n);
        return w > 0 ? Rounded{k, 1} : Rounded{k - 1, -1};
    }
    return {floor_q(t), 0};
}
}  // namespace detail

/// Nearest lambda-multiple <x> = floor_q(x/lambda + 1/2).
template <class Real>
long long nearest_multiple(const Context<Real>& ctx, Real x) {
    return detail::snapped_floor_q(x / ctx.lambda + Real(0.5), ctx.eps).digit;
}

/// Shifted nearest multiple <w>* used by the dual map.  At a tie the digit is
/// chosen so that w - <w>* lambda lands on +-r instead of -+R.
template <class Real>
long long dual_nearest(const Context<Real>& ctx, Real w) {
    return detail::dual_round(ctx, w).digit;
}

namespace detail {
// Roundoff carried along an orbit of x -> -1/x - a lambda.  The derivative
// 1/x^2 amplifies it, so a long orbit can land on 0 only up to this bound.
template <class Real>
struct OrbitError {
    Real bound;
    explicit OrbitError(Real scale) : bound(2 * std::numeric_limits<Real>::epsilon() * std::max(Real(1), scale)) {}
    void step(Real x, Real next) {
        bound = bound / (x * x) + 2 * std::numeric_limits<Real>::epsilon() * (std::abs(1 / x) + std::abs(next));
    }
    // past sqrt(eps) the orbit carries no information and nothing is called 0
    bool is_zero(const Context<Real>& ctx, Real x) const {
        if (std::abs(x) <= ctx.eps) return true;
        return bound <= std::sqrt(ctx.eps) && std::abs(x) <= 4 * bound;
    }
};
}  // namespace detail

template <class Real>
struct DigitStep {
    long long digit = 0;  // 0 when the input was 0 and the orbit stops
    Real next{};
    bool stop() const { return digit == 0; }
};

template <class Real>
DigitStep<Real> f_q(const Context<Real>& ctx, Real x) {
    if (std::abs(x) > ctx.lambda / 2 + ctx.eps) throw std::domain_error("f_q: argument outside I_q");
    if (std::abs(x) <= ctx.eps) return {0, Real(0)};
    Real w = -1 / x;
    auto a = detail::snapped_floor_q(w / ctx.lambda + Real(0.5), ctx.eps);
    // pin ties exactly, otherwise orbits through +-lambda/2 drift
    if (a.tie) return {a.digit, Real(a.tie) * ctx.lambda / 2};
    return {a.digit, w - Real(a.digit) * ctx.lambda};
}

template <class Real>
DigitStep<Real> f_q_star(const Context<Real>& ctx, Real y) {
    if (std::abs(y) > ctx.R + ctx.eps) throw std::domain_error("f_q_star: argument outside I_R");
    if (std::abs(y) <= ctx.eps) return {0, Real(0)};
    Real w = -1 / y;
    auto b = detail::dual_round(ctx, w);
    if (b.tie) return {b.digit, Real(b.tie) * ctx.r};
    return {b.digit, w - Real(b.digit) * ctx.lambda};
}

/// Regular expansion; stops at an exact zero or after max_digits digits.
template <class Real>
Code expand_regular(const Context<Real>& ctx, Real x, std::size_t max_digits = 40) {
    if (!std::isfinite(x)) throw std::domain_error("expand_regular: non-finite input");
    Code c;
    c.leading = nearest_multiple(ctx, x);
    Real xj = x - Real(c.leading) * ctx.lambda;
    detail::OrbitError<Real> err(std::abs(x));
    for (std::size_t j = 0; j < max_digits; ++j) {
        // clamp roundoff just outside the interval
        if (std::abs(xj) > ctx.lambda / 2) xj = std::copysign(ctx.lambda / 2, xj);
        if (err.is_zero(ctx, xj)) return c;
        auto s = f_q(ctx, xj);
        if (s.stop()) return c;
        c.head.push_back(s.digit);
        err.step(xj, s.next);
        xj = s.next;
    }
    c.truncated = std::abs(xj) > ctx.eps;
    return c;
}

/// Dual regular expansion; stops at an exact zero or after max_digits digits.
template <class Real>
Code expand_dual(const Context<Real>& ctx, Real y, std::size_t max_digits = 40) {
    if (!std::isfinite(y)) throw std::domain_error("expand_dual: non-finite input");
    Code c;
    c.flavor = Flavor::dual;
    c.leading = std::abs(y) <= ctx.R ? 0 : dual_nearest(ctx, y);
    Real yj = y - Real(c.leading) * ctx.lambda;
    detail::OrbitError<Real> err(std::abs(y));
    for (std::size_t j = 0; j < max_digits; ++j) {
        if (std::abs(yj) > ctx.R) yj = std::copysign(ctx.R, yj);
        if (err.is_zero(ctx, yj)) return c;
        auto s = f_q_star(ctx, yj);
        if (s.stop()) return c;
        c.head.push_back(s.digit);
        err.step(yj, s.next);
        yj = s.next;
    }
    c.truncated = std::abs(yj) > ctx.eps;
    return c;
}

}  // namespace hecke
