#pragma once
// Cross-section of the geodesic flow, its first-return map computed two ways
// (symbolically via the natural extension and by following the geodesic
// through copies of the fundamental domain), return times and lengths.

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "reduction.hpp"

namespace hecke {

/// A point of the cross-section.  `endpoints` is the strongly reduced geodesic;
/// `anchor` is where it crosses side L_label.  `base`/`theta` is the inward
/// vector on the boundary of F representing it (for labels +-2 and +-3 this is
/// the anchor moved back onto L_{+-1} resp. L_0).
template <class Real>
struct SectionPoint {
    GeodesicEndpoints<Real> endpoints;
    int label = 0;
    std::complex<Real> anchor;
    std::complex<Real> base;
    Real theta{};
};

template <class Real>
struct ReturnRecord {
    SectionPoint<Real> point;
    int k = 0;
    Real time{};
};

/// Direction of travel at z on the geodesic.
template <class Real>
Real direction_at(const GeodesicEndpoints<Real>& g, std::complex<Real> z) {
    const Real center = (g.xi + g.eta) / 2;
    const Real pi = std::numbers::pi_v<Real>;
    Real radial = std::arg(z - center);
    return wrap_angle(g.xi > g.eta ? radial - pi / 2 : radial + pi / 2);
}

namespace detail {
template <class Real>
std::complex<Real> apply_point(const Mobius<Real>& m, std::complex<Real> z) {
    return m(z);
}

template <class Real>
std::optional<std::complex<Real>> arc_point(const Context<Real>& ctx, int side, const GeodesicEndpoints<Real>& g,
                                            Real tol) {
    auto arc = side_arc(ctx, side);
    auto z = intersect_carrier(arc, g);
    if (!z || !arc.on_arc(*z, tol)) return std::nullopt;
    return z;
}

// Side through which the representing vector enters F.
inline int entry_side_of_label(int label) {
    if (label == 2 || label == -2) return label / 2;
    if (label == 3 || label == -3) return 0;
    return label;
}

template <class Real>
Mobius<Real> label_to_base_map(const Context<Real>& ctx, int label) {
    switch (label) {
        case 2: return gen_S<Real>() * gen_T(ctx, -1);
        case -2: return gen_S<Real>() * gen_T(ctx, 1);
        case 3: return gen_T(ctx, -1);
        case -3: return gen_T(ctx, 1);
        default: return Mobius<Real>::identity();
    }
}
}  // namespace detail

namespace detail {
template <class Real>
std::optional<SectionPoint<Real>> find_section_point(const Context<Real>& ctx, const GeodesicEndpoints<Real>& g) {
    const Real pi = std::numbers::pi_v<Real>;
    if (g.xi < 0) {
        auto m = find_section_point(ctx, mirror(g));
        if (!m) return m;
        m->endpoints = g;
        m->label = -m->label;
        m->anchor = -std::conj(m->anchor);
        m->base = -std::conj(m->base);
        m->theta = wrap_angle(pi - m->theta);
        return m;
    }
    const Real tol = std::max(Real(1e-10), 10 * ctx.eps);
    SectionPoint<Real> sp;
    sp.endpoints = g;
    std::optional<std::complex<Real>> z;
    if ((z = arc_point(ctx, -1, g, tol))) {
        sp.label = -1;
    } else if ((z = arc_point(ctx, 0, g, tol))) {
        sp.label = 0;
    } else {
        sp.label = (ctx.q == 3 || g.xi <= ctx.lambda + 1) ? 2 : 3;
        z = arc_point(ctx, sp.label, g, tol);
        if (!z) return std::nullopt;
    }
    sp.anchor = *z;
    auto m = label_to_base_map(ctx, sp.label);
    sp.base = m(sp.anchor);
    sp.theta = direction_at(apply(m, g), sp.base);
    return sp;
}
}  // namespace detail

namespace detail {
// Reduced, with the backward end off the excluded tail of -r.
template <class Real>
bool in_upsilon(const Context<Real>& ctx, const Partition<Real>& part, const GeodesicEndpoints<Real>& g) {
    return is_reduced(ctx, part, g) && !minus_r_tail(ctx, g.eta);
}
}  // namespace detail

/// Strongly reduced and represented by a vector of the cross-section.  For odd
/// q a thin set with xi just above lambda+1 and eta in (lambda-1, -r] is
/// strongly reduced but meets none of L_{-1}, L_0, L_3.
template <class Real>
bool in_section(const Context<Real>& ctx, const Partition<Real>& part, const GeodesicEndpoints<Real>& g) {
    return is_strongly_reduced(ctx, part, g) && detail::find_section_point(ctx, g).has_value();
}

/// The section point of a strongly reduced geodesic.
template <class Real>
SectionPoint<Real> section_embed(const Context<Real>& ctx, const Partition<Real>& part, const GeodesicEndpoints<Real>& g) {
    if (!is_strongly_reduced(ctx, part, g)) throw std::domain_error("section_embed: geodesic is not strongly reduced");
    auto sp = detail::find_section_point(ctx, g);
    if (!sp) throw std::domain_error("section_embed: geodesic has no vector in the cross-section");
    return *sp;
}

/// Side index chosen by the closed-form case table for the start of a return
/// (xi > 0 directly, xi < 0 by reflection).  Empty when no case applies.
template <class Real>
std::optional<int> entry_side_selector(const Context<Real>& ctx, const GeodesicEndpoints<Real>& g) {
    if (g.xi < 0) {
        auto s = entry_side_selector(ctx, mirror(g));
        if (s) return -*s;
        return s;
    }
    const Real l = ctx.lambda, R = ctx.R, r = ctx.r;
    const Real xi = g.xi, eta = g.eta;
    auto B = [&](Real x) { return l1_boundary(ctx, x); };
    // ties at xi = B(eta) are geodesics through a corner; they go to L_0
    const Real tie = 1e-9 * std::max(Real(1), xi);
    if (-R - 10 * ctx.eps <= eta && eta < -l / 2) {
        if (xi > -B(-eta) + tie) return -1;
        return 0;
    }
    // closed at -r: reflection maps the admissible tail r onto the excluded -r
    const Real top = -r + 10 * ctx.eps;
    if (-l / 2 <= eta && eta <= top) {
        if (xi >= B(eta) - tie) return 0;
        if (ctx.q == 3) {
            if (3 * l / 2 < xi && xi < B(eta)) return 2;
        } else {
            if (3 * l / 4 - 1 / l < eta && 3 * l / 2 < xi && xi < B(eta) && B(eta) < l + 1) return 2;
            if (l - 1 < eta && l + 1 < xi && xi < B(eta)) return 3;
        }
    }
    return std::nullopt;
}

namespace detail {
template <class Real>
Real side_log_g(const Context<Real>& ctx, int side, const GeodesicEndpoints<Real>& g) {
    return std::log(side_g_closed_form(side_arc(ctx, side), g));
}

template <class Real>
struct Advance {
    GeodesicEndpoints<Real> next;
    Real log_sum{};  // sum of ln|u_j| over the steps taken
    int k = 0;
};

// F~ applied k0 times, then further until the image is back in the section.
// The extra steps only happen for images in the odd-q gap of in_section.
template <class Real>
Advance<Real> advance_to_section(const Context<Real>& ctx, const Partition<Real>& part,
                                 const GeodesicEndpoints<Real>& g, int k0) {
    PlanarPoint<Real> p = to_planar(g);
    Advance<Real> out;
    for (;; ++out.k) {
        if (out.k >= k0) {
            out.next = from_planar(p);
            if (in_section(ctx, part, out.next)) return out;
            if (out.k > k0 + 64) throw consistency_error("no return to the section after the return exponent");
        }
        p = natural_extension(ctx, p).first;
        out.log_sum += std::log(std::abs(p.u));
    }
}
}  // namespace detail

/// Next return via the natural extension: k = return exponent of xi.
template <class Real>
ReturnRecord<Real> first_return_symbolic(const Context<Real>& ctx, const Partition<Real>& part,
                                         const GeodesicEndpoints<Real>& g) {
    auto start = section_embed(ctx, part, g);
    auto adv = detail::advance_to_section(ctx, part, g, first_return_exponent(ctx, g.xi).k);
    ReturnRecord<Real> rec;
    rec.point = section_embed(ctx, part, adv.next);
    rec.k = adv.k;
    // xi_j = S u_j contributes 2 ln|xi_j| = -2 ln|u_j|
    rec.time = std::log(g_value(start.anchor, g.xi)) - std::log(g_value(rec.point.anchor, adv.next.xi)) -
               2 * adv.log_sum;
    return rec;
}

/// Return time from the closed-form g functions of the sides: the case table
/// picks the starting side, the image's own section point the landing side.
template <class Real>
Real return_time(const Context<Real>& ctx, const Partition<Real>& part, const GeodesicEndpoints<Real>& g) {
    if (!is_strongly_reduced(ctx, part, g)) throw std::domain_error("return_time: geodesic is not strongly reduced");
    if (g.xi < 0) return return_time(ctx, part, mirror(g));
    auto side = entry_side_selector(ctx, g);
    if (!side) throw consistency_error("no entry side matches the geodesic");
    auto adv = detail::advance_to_section(ctx, part, g, first_return_exponent(ctx, g.xi).k);
    // the landing side is read off the image; the digit table alone misses
    // returns that land on L_0
    int landing = section_embed(ctx, part, adv.next).label;
    return detail::side_log_g(ctx, *side, g) - detail::side_log_g(ctx, landing, adv.next) - 2 * adv.log_sum;
}

struct tracer_budget_error : consistency_error {
    using consistency_error::consistency_error;
};

template <class Real>
struct TraceResult {
    ReturnRecord<Real> record;
    int crossings = 0;  // sides of translates of F crossed until the return
};

/// Follows the geodesic through translates of F, starting at its section
/// point, until the re-entry vector lies in the cross-section.  k is recovered
/// afterwards by matching the result against the orbit of the natural
/// extension.
template <class Real>
TraceResult<Real> trace_first_return(const Context<Real>& ctx, const Partition<Real>& part,
                                     const GeodesicEndpoints<Real>& g, long max_crossings = 1000000) {
    const auto start = section_embed(ctx, part, g);
    const Real tol = std::max(Real(1e-10), 10 * ctx.eps);
    auto M = detail::label_to_base_map(ctx, start.label);
    // Runs of T^{+-1} are kept as an integer shift off the last S image so
    // that long excursions toward a cusp do not accumulate rounding.
    GeodesicEndpoints<Real> origin = apply(M, g);
    std::complex<Real> w0 = start.base;
    long long shift = 0;
    auto shifted = [&](long long n) {
        const Real d = Real(n) * ctx.lambda;
        return std::make_pair(GeodesicEndpoints<Real>{origin.xi + d, origin.eta + d}, w0 + d);
    };
    auto [cur, w] = shifted(0);
    int entry = detail::entry_side_of_label(start.label);
    Real time = 0;

    TraceResult<Real> out;
    for (long n = 1;; ++n) {
        if (n > max_crossings) throw tracer_budget_error("tracer exceeded its crossing budget");
        const Real p0 = flow_position(cur, w);
        int exit_side = 9;
        std::complex<Real> exit_point;
        Real best = std::numeric_limits<Real>::infinity();
        for (int s : {0, 1, -1}) {
            if (s == entry) continue;
            auto z = detail::arc_point(ctx, s, cur, tol);
            if (!z) continue;
            Real p = flow_position(cur, *z);
            if (p > p0 + tol && p < best) {
                best = p;
                exit_side = s;
                exit_point = *z;
            }
        }
        if (exit_side == 9) throw consistency_error("tracer found no exit from the fundamental domain");
        time += best - p0;
        if (exit_side == 0) {
            origin = apply(gen_S<Real>(), cur);
            w0 = gen_S<Real>()(exit_point);
            shift = 0;
            std::tie(cur, w) = shifted(0);
        } else {
            shift += exit_side == 1 ? -1 : 1;
            cur = shifted(shift).first;
            w = std::complex<Real>(-exit_side * ctx.lambda / 2, exit_point.imag());
        }
        entry = exit_side == 0 ? 0 : -exit_side;
        out.crossings = static_cast<int>(n);

        std::optional<std::pair<GeodesicEndpoints<Real>, int>> hit;
        // a backward end with the tail of -r is not a return (the start of
        // a closed orbit through r would otherwise meet its mirror)
        if (is_reduced(ctx, part, cur)) {
            if (in_section(ctx, part, cur) && !minus_r_tail(ctx, cur.eta)) hit = {{cur, entry}};
        } else if (entry != 0) {
            auto g2 = apply(Mobius<Real>(gen_T(ctx, entry) * gen_S<Real>()), cur);
            const Real f = entry * g2.xi;
            // q = 3 keeps the lower bound only; without it the windows for +2 and -2 overlap
            bool window = 3 * ctx.lambda / 2 < f && (ctx.q == 3 || f <= ctx.lambda + 1);
            if (window && detail::in_upsilon(ctx, part, g2)) hit = {{g2, 2 * entry}};
        } else if (!ctx.even() && ctx.q >= 5) {
            for (int s : {1, -1}) {
                auto g3 = apply(gen_T(ctx, s), cur);
                // forward end beyond lambda+1 on the side of the label; without
                // it a geodesic could also be claimed through L_{-+1}
                if (s * g3.xi > ctx.lambda + 1 && detail::in_upsilon(ctx, part, g3)) {
                    hit = {{g3, 3 * s}};
                    break;
                }
            }
        }
        if (!hit) continue;
        ReturnRecord<Real> rec;
        rec.time = time;
        rec.point = section_embed(ctx, part, hit->first);
        rec.point.label = hit->second;
        // k: position of the hit in the forward orbit of the natural extension
        PlanarPoint<Real> p = to_planar(g), target = to_planar(hit->first);
        const Real match = 1e-8;
        for (int i = 1; i <= 256; ++i) {
            p = natural_extension(ctx, p).first;
            if (std::abs(p.u - target.u) <= match * std::max(Real(1), std::abs(target.u)) &&
                std::abs(p.v - target.v) <= match * std::max(Real(1), std::abs(target.v))) {
                rec.k = i;
                break;
            }
        }
        out.record = rec;
        return out;
    }
}

template <class Real>
ReturnRecord<Real> first_return_geometric(const Context<Real>& ctx, const Partition<Real>& part,
                                          const GeodesicEndpoints<Real>& g, long max_crossings = 1000000) {
    return trace_first_return(ctx, part, g, max_crossings).record;
}

/// Length of the closed geodesic with periodic code (cycle):
/// -2 sum over rotations of ln|value of the rotated periodic code|.
template <class Real>
Real closed_length(const Context<Real>& ctx, const Digits& cycle) {
    if (cycle.empty()) throw std::invalid_argument("empty cycle");
    Code c;
    c.cycle = cycle;
    if (std::find(cycle.begin(), cycle.end(), 0) != cycle.end() || !is_regular(ctx, c))
        throw std::invalid_argument("cycle is not a regular periodic code");
    Real sum = 0;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        Code rot;
        rot.cycle = cycle;
        std::rotate(rot.cycle.begin(), rot.cycle.begin() + static_cast<std::ptrdiff_t>(i), rot.cycle.end());
        sum += std::log(std::abs(evaluate(ctx, rot).value));
    }
    return -2 * sum;
}

/// 2 arccosh(|tr A|/2) for the cycle map A.
template <class Real>
Real trace_length(const Context<Real>& ctx, const Digits& cycle) {
    auto A = head_map(ctx, 0, cycle).normalized();
    Real t = std::abs(A.trace());
    if (!(t > 2)) throw std::domain_error("cycle map is not hyperbolic");
    return 2 * std::acosh(t / 2);
}

enum class Engine { symbolic, geometric, both };

template <class Real>
bool same_return(const ReturnRecord<Real>& a, const ReturnRecord<Real>& b, Real tol) {
    auto close = [&](Real x, Real y) { return std::abs(x - y) <= tol * std::max(Real(1), std::abs(y)); };
    return a.k == b.k && a.point.label == b.point.label && close(a.point.endpoints.xi, b.point.endpoints.xi) &&
           close(a.point.endpoints.eta, b.point.endpoints.eta);
}

template <class Real>
std::vector<ReturnRecord<Real>> simulate_returns(const Context<Real>& ctx, const Partition<Real>& part,
                                                 GeodesicEndpoints<Real> g, int count, Engine engine = Engine::symbolic,
                                                 Real tol = Real(1e-8)) {
    if (count < 0) throw std::invalid_argument("count must be non-negative");
    std::vector<ReturnRecord<Real>> out;
    for (int i = 0; i < count; ++i) {
        ReturnRecord<Real> rec;
        if (engine == Engine::geometric) {
            rec = first_return_geometric(ctx, part, g);
        } else {
            rec = first_return_symbolic(ctx, part, g);
            if (engine == Engine::both) {
                auto geo = first_return_geometric(ctx, part, g);
                if (!same_return(rec, geo, tol) || std::abs(rec.time - geo.time) > tol * std::max(Real(1), rec.time))
                    throw consistency_error("symbolic and geometric returns disagree at step " + std::to_string(i));
            }
        }
        out.push_back(rec);
        g = rec.point.endpoints;
    }
    return out;
}


/// A section point on the closed geodesic of a periodic code.
template <class Real>
GeodesicEndpoints<Real> closed_section_point(const Context<Real>& ctx, const Partition<Real>& part,
                                             const Digits& cycle) {
    auto rg = reduce_endpoints(ctx, part, closed_geodesic(ctx, cycle));
    auto g = strongly_reduce(ctx, part, rg).geodesic.endpoints;
    return detail::advance_to_section(ctx, part, g, 0).next;
}

template <class Real>
struct PeriodSum {
    Real time{};
    int returns = 0;
};

/// Return times summed along the closed orbit of a periodic code, from its
/// section point until the orbit is back there.  After every return the
/// forward end is snapped to the exact value of the matching rotation of the
/// cycle (or of its negation): the natural extension amplifies its rounding by the cycle's
/// multiplier per period.
template <class Real>
PeriodSum<Real> period_return_time(const Context<Real>& ctx, const Partition<Real>& part, const Digits& cycle,
                                   int max_returns = 256) {
    // a closed geodesic equal to its mirror may be reduced to the lift coded
    // by the negated cycle
    std::vector<Real> rotations;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        Code rot;
        rot.cycle = cycle;
        std::rotate(rot.cycle.begin(), rot.cycle.begin() + static_cast<std::ptrdiff_t>(i), rot.cycle.end());
        Real v = evaluate(ctx, rot).value;
        rotations.push_back(v);
        rotations.push_back(-v);
    }
    auto snap = [&](GeodesicEndpoints<Real> g) {
        const Real u = -1 / g.xi;
        std::size_t best = 0;
        for (std::size_t i = 1; i < rotations.size(); ++i)
            if (std::abs(rotations[i] - u) < std::abs(rotations[best] - u)) best = i;
        if (std::abs(rotations[best] - u) > 1e-6) throw consistency_error("return left the closed orbit");
        g.xi = -1 / rotations[best];
        return std::make_pair(g, best);
    };
    const auto [start, start_rot] = snap(closed_section_point(ctx, part, cycle));
    const Real tol = std::max(Real(1e-9), 1000 * ctx.eps);
    PeriodSum<Real> out;
    auto g = start;
    for (;;) {
        if (out.returns >= max_returns) throw consistency_error("closed orbit did not come back to its start");
        out.time += return_time(ctx, part, g);
        ++out.returns;
        std::size_t rot;
        std::tie(g, rot) = snap(first_return_symbolic(ctx, part, g).point.endpoints);
        if (rot == start_rot && std::abs(g.eta - start.eta) <= tol) return out;
    }
}

}  // namespace hecke
