#pragma once
// Invariant densities: the planar density of the natural extension and its
// projections onto u for F_q and for the factor of the return map.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "domain.hpp"

namespace hecke {

/// 2/(1-uv)^2, the density of the invariant measure of F~_q on Omega.
template <class Real>
Real planar_density(const PlanarPoint<Real>& p) {
    const Real d = 1 - p.u * p.v;
    if (d == 0) throw std::domain_error("planar_density: uv = 1");
    return 2 / (d * d);
}

/// Piece on [a, b] of a density obtained by integrating 2/(1-uv)^2 over
/// v in [v_lo, v_hi]:  2 (v_hi - v_lo) / ((1 - v_hi u)(1 - v_lo u)).
template <class Real>
struct DensityPiece {
    Real a{}, b{};
    Real v_lo{}, v_hi{};

    Real operator()(Real u) const { return 2 * (v_hi - v_lo) / ((1 - v_hi * u) * (1 - v_lo * u)); }
    Real antiderivative(Real u) const { return 2 * std::log((1 - v_lo * u) / (1 - v_hi * u)); }
    Real mass() const { return antiderivative(b) - antiderivative(a); }
};

template <class Real>
struct PiecewiseDensity {
    std::vector<DensityPiece<Real>> pieces;  // sorted, tiling I_q
    Real total_mass{};

    Real lower() const { return pieces.front().a; }
    Real upper() const { return pieces.back().b; }

    Real operator()(Real u) const {
        for (const auto& p : pieces)
            if (u >= p.a && u <= p.b) return p(u);
        return 0;
    }

    /// Closed-form measure of [c, d] (clipped to the support).
    Real mass(Real c, Real d) const {
        if (d < c) std::swap(c, d);
        Real m = 0;
        for (const auto& p : pieces) {
            const Real lo = std::max(c, p.a), hi = std::min(d, p.b);
            if (lo < hi) m += p.antiderivative(hi) - p.antiderivative(lo);
        }
        return m;
    }

    /// The piece containing u; ties go to the piece on the left.
    const DensityPiece<Real>& piece_at(Real u) const {
        for (const auto& p : pieces)
            if (u <= p.b) return p;
        return pieces.back();
    }
};

namespace detail {
template <class Real>
PiecewiseDensity<Real> assemble(std::vector<DensityPiece<Real>> pieces) {
    std::sort(pieces.begin(), pieces.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
    PiecewiseDensity<Real> d;
    d.pieces = std::move(pieces);
    for (const auto& p : d.pieces) d.total_mass += p.mass();
    return d;
}

// Pieces on the negative half u < 0, cut at the partition points and at the
// extra abscissae in `cuts`.  `fiber(j, mid)` gives the v-interval.
template <class Real, class Fiber>
std::vector<DensityPiece<Real>> negative_half(const Partition<Real>& part, std::vector<Real> cuts, Fiber fiber) {
    std::vector<Real> xs(part.phi.begin(), part.phi.end());
    for (Real c : cuts)
        if (c > xs.front() && c < Real(0)) xs.push_back(c);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::vector<DensityPiece<Real>> out;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const Real a = xs[i], b = xs[i + 1];
        const Real mid = (a + b) / 2;
        int j = 1;
        while (j < part.kappa && mid >= part.phi[j]) ++j;
        auto [lo, hi] = fiber(j, mid);
        out.push_back({a, b, lo, hi});
    }
    return out;
}

template <class Real>
std::vector<DensityPiece<Real>> with_mirror(std::vector<DensityPiece<Real>> neg) {
    const std::size_t n = neg.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = neg[i];
        neg.push_back({-p.b, -p.a, -p.v_hi, -p.v_lo});
    }
    return neg;
}
}  // namespace detail

/// Density of the absolutely continuous invariant measure of F_q: the fibre
/// of Omega over I_j is [r_j, R], mirrored for negative j.
template <class Real>
PiecewiseDensity<Real> density_fq(const Context<Real>& ctx, const Partition<Real>& part) {
    auto neg = detail::negative_half<Real>(part, {}, [&](int j, Real) { return std::pair{part.rj[j], ctx.R}; });
    return detail::assemble(detail::with_mirror(std::move(neg)));
}

/// Density invariant under u -> F_q^K(u) u, the factor of the return map:
/// the fibre of the strongly reduced part of Omega, which loses v < 0 (for
/// u < 0) once |u| > 2/(3 lambda).
template <class Real>
PiecewiseDensity<Real> density_factor_map(const Context<Real>& ctx, const Partition<Real>& part) {
    const Real cut = 2 / (3 * ctx.lambda);
    auto neg = detail::negative_half<Real>(part, {-cut}, [&](int j, Real mid) {
        return mid < -cut ? std::pair{Real(0), ctx.R} : std::pair{part.rj[j], ctx.R};
    });
    return detail::assemble(detail::with_mirror(std::move(neg)));
}

/// The printed normalization constant: C^{-1} = ln((1+cos(pi/q))/sin(pi/q))
/// for even q, ln(1+R) for odd q.
template <class Real>
Real normalization_inverse(const Context<Real>& ctx) {
    const Real pi = std::numbers::pi_v<Real>;
    if (ctx.even()) return std::log((1 + std::cos(pi / ctx.q)) / std::sin(pi / ctx.q));
    return std::log(1 + ctx.R);
}

/// Total mass of density_fq in closed form: 4 ln cot(pi/(2q)) for even q,
/// 4 ln((1+R)/(2 sin(pi/(2q)))) for odd q.  The printed odd-q constant
/// ln(1+R) agrees with this only at q = 3.
template <class Real>
Real fq_mass_closed_form(const Context<Real>& ctx) {
    const Real pi = std::numbers::pi_v<Real>;
    const Real half = pi / (2 * ctx.q);
    if (ctx.even()) return 4 * std::log(std::cos(half) / std::sin(half));
    return 4 * std::log((1 + ctx.R) / (2 * std::sin(half)));
}

template <class Real>
struct MassReport {
    Real mass{};        // sum of closed-form piece integrals
    Real quadrature{};  // the same by adaptive Gauss-Kronrod
    Real C_check{};     // 4 / mass, to compare with the printed C
    Real C_printed{};
};

template <class Real>
MassReport<Real> total_mass_and_constant(const Context<Real>& ctx, const PiecewiseDensity<Real>& d) {
    MassReport<Real> rep;
    rep.mass = d.total_mass;
    for (const auto& p : d.pieces)
        rep.quadrature += boost::math::quadrature::gauss_kronrod<Real, 61>::integrate(p, p.a, p.b, 15, Real(1e-14));
    rep.C_check = 4 / rep.mass;
    rep.C_printed = 1 / normalization_inverse(ctx);
    return rep;
}

// ---------------------------------------------------------------------------
// Maps acting on u and preimage bookkeeping

/// F_q^K(u) with K the return exponent of xi = -1/u.  Returns nullopt when the
/// orbit stops at 0.
template <class Real>
std::optional<Real> return_factor_step(const Context<Real>& ctx, Real u) {
    if (std::abs(u) <= ctx.eps) return std::nullopt;
    auto first = f_q(ctx, u);
    const long long e = first.digit > 0 ? 1 : -1;
    Real x = first.next;
    for (int guard = 0; guard < 4 * ctx.q + 8; ++guard) {
        if (std::abs(x) <= ctx.eps) return std::nullopt;
        if (nearest_multiple(ctx, -1 / x) != e) return x;
        x = f_q(ctx, x).next;
    }
    throw consistency_error("return_factor_step: run of +-1 digits longer than any admissible block");
}

namespace detail {
// Inverse branch u = -1/(t + a lambda) of F_q for the digit a.
template <class Real>
Real branch(const Context<Real>& ctx, long long a, Real t) {
    return -1 / (t + Real(a) * ctx.lambda);
}

// Image of [t1, t2] under the branch for digit a, clipped to I_q.  The branch
// is increasing, so the image is an interval.
template <class Real>
std::optional<std::pair<Real, Real>> branch_image(const Context<Real>& ctx, long long a, Real t1, Real t2) {
    Real lo = std::max(branch(ctx, a, t1), -ctx.lambda / 2);
    Real hi = std::min(branch(ctx, a, t2), ctx.lambda / 2);
    if (!(lo < hi)) return std::nullopt;
    return std::pair{lo, hi};
}

// Sum over |a| > n with sign(a) = s of the measure of the branch images of
// [t1, t2].  For large |a| they lie in the piece next to 0, where the measure
// of the image is 2 ln((t + a lambda + v_lo)/(t + a lambda + v_hi)) taken
// between t1 and t2; the sum over a telescopes into log-gammas.
template <class Real>
Real branch_tail(const Context<Real>& ctx, const PiecewiseDensity<Real>& d, int s, long long n, Real t1, Real t2) {
    const auto& p = d.piece_at(s > 0 ? -ctx.eps : ctx.eps);
    const Real l = ctx.lambda;
    const Real x[4] = {(t2 + p.v_lo) / l, (t2 + p.v_hi) / l, (t1 + p.v_lo) / l, (t1 + p.v_hi) / l};
    const Real sign[4] = {1, -1, -1, 1};
    Real sum = 0;
    for (int i = 0; i < 4; ++i) {
        const Real y = s > 0 ? x[i] : -x[i];
        sum += sign[i] * std::lgamma(Real(n + 1) + y);
    }
    return -2 * sum;
}
}  // namespace detail

/// mu(F_q^{-1}[c, d]) for a density on I_q: branches |a| <= n summed
/// directly, the rest in closed form.
template <class Real>
Real pullback_mass_fq(const Context<Real>& ctx, const PiecewiseDensity<Real>& d, Real c, Real dd, long long n = 64) {
    Real m = 0;
    for (long long a = -n; a <= n; ++a) {
        if (a == 0) continue;
        if (auto img = detail::branch_image(ctx, a, c, dd)) m += d.mass(img->first, img->second);
    }
    m += detail::branch_tail(ctx, d, 1, n, c, dd) + detail::branch_tail(ctx, d, -1, n, c, dd);
    return m;
}

/// mu(G^{-1}[c, d]) for G(u) = F_q^K(u) u.  A point u with first digit a_0 of
/// sign e returns after the run a_1 = ... = a_{k-1} = e, at an image whose
/// first digit is not e; so the preimages are a_0-branches of e-branch
/// iterates of [c, d] minus the e-cylinder.
template <class Real>
Real pullback_mass_factor(const Context<Real>& ctx, const PiecewiseDensity<Real>& d, Real c, Real dd,
                          long long n = 64) {
    using Interval = std::pair<Real, Real>;
    Real m = 0;
    for (int e : {1, -1}) {
        // cylinder of digit e: -1/x in [e lambda - lambda/2, e lambda + lambda/2]
        const Real l = ctx.lambda;
        const Real z1 = -1 / (e * l - l / 2), z2 = -1 / (e * l + l / 2);
        const Real cyl_lo = std::min(z1, z2), cyl_hi = std::max(z1, z2);
        std::vector<Interval> xs;
        if (c < cyl_lo) xs.push_back({c, std::min(dd, cyl_lo)});
        if (dd > cyl_hi) xs.push_back({std::max(c, cyl_hi), dd});
        for (int depth = 0; !xs.empty(); ++depth) {
            if (depth > 4 * ctx.q + 8) throw consistency_error("pullback_mass_factor: unbounded run of +-1");
            std::vector<Interval> next;
            for (auto [t1, t2] : xs) {
                for (long long a = e; std::abs(a) <= n; a += e)
                    if (auto img = detail::branch_image(ctx, a, t1, t2)) m += d.mass(img->first, img->second);
                m += detail::branch_tail(ctx, d, e, n, t1, t2);
                if (auto img = detail::branch_image(ctx, e, t1, t2)) next.push_back(*img);
            }
            xs = std::move(next);
        }
    }
    return m;
}

enum class MapKind { fq, return_factor };

template <class Real>
struct Histogram {
    Real lo{}, hi{};
    std::vector<std::uint64_t> counts;
    std::uint64_t samples = 0;
    Real l1 = 1;         // L1 distance to the normalized density (1 when empty)
    int restarts = 0;    // orbit restarted after hitting 0
};

/// Occupation histogram of an orbit of F_q (or of the return factor) on
/// equal bins of I_q, compared with the normalized invariant density.
template <class Real>
Histogram<Real> birkhoff_histogram(const Context<Real>& ctx, const Partition<Real>& part, Real x0,
                                   std::uint64_t iterations, int bins, MapKind map = MapKind::fq,
                                   std::uint64_t seed = 12345) {
    if (bins <= 0) throw std::invalid_argument("birkhoff_histogram: bins must be positive");
    if (!std::isfinite(x0)) throw std::domain_error("birkhoff_histogram: non-finite start");
    Histogram<Real> h;
    h.lo = -ctx.lambda / 2;
    h.hi = ctx.lambda / 2;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    if (iterations == 0) return h;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<Real> jitter(h.lo, h.hi);
    Real x = x0 - Real(nearest_multiple(ctx, x0)) * ctx.lambda;
    const Real width = (h.hi - h.lo) / bins;
    for (std::uint64_t i = 0; i < iterations; ++i) {
        std::optional<Real> nx;
        if (std::abs(x) > ctx.eps) {
            if (map == MapKind::fq)
                nx = f_q(ctx, x).next;
            else
                nx = return_factor_step(ctx, x);
        }
        if (!nx || std::abs(*nx) <= ctx.eps) {
            nx = jitter(rng);
            ++h.restarts;
        }
        x = *nx;
        auto b = static_cast<long long>((x - h.lo) / width);
        b = std::clamp<long long>(b, 0, bins - 1);
        ++h.counts[static_cast<std::size_t>(b)];
        ++h.samples;
    }
    const auto dens = map == MapKind::fq ? density_fq(ctx, part) : density_factor_map(ctx, part);
    h.l1 = 0;
    for (int b = 0; b < bins; ++b) {
        const Real a = h.lo + b * width;
        const Real expected = dens.mass(a, a + width) / dens.total_mass;
        h.l1 += std::abs(Real(h.counts[static_cast<std::size_t>(b)]) / Real(h.samples) - expected);
    }
    return h;
}

}  // namespace hecke
