#pragma once
// Digit sequences of lambda-fractions: shifts, order, forbidden blocks.

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "context.hpp"

namespace hecke {

using Digits = std::vector<long long>;

enum class Flavor { regular, dual };

/// x = a0*lambda - 1/(a1*lambda - 1/(a2*lambda - ...)).
///
/// `head` holds a1..an, `cycle` an optional repeating tail.  A truncated code
/// is the prefix of an infinite expansion that was cut at a digit budget.
struct Code {
    long long leading = 0;
    Digits head;
    Digits cycle;
    Flavor flavor = Flavor::regular;
    bool truncated = false;

    bool periodic() const { return !cycle.empty(); }
    bool finite() const { return cycle.empty() && !truncated; }
    bool empty() const { return leading == 0 && head.empty() && cycle.empty() && !truncated; }

    /// Number of digits after the leading entry; max() when infinite.
    std::size_t size() const {
        if (periodic()) return std::numeric_limits<std::size_t>::max();
        return head.size();
    }

    /// Digit a_i for i >= 1 (a_0 for i == 0); 0 past the end of finite codes.
    long long digit(std::size_t i) const {
        if (i == 0) return leading;
        if (i <= head.size()) return head[i - 1];
        if (cycle.empty()) return 0;
        return cycle[(i - 1 - head.size()) % cycle.size()];
    }

    /// a1..an, unrolling the cycle to n digits where needed.
    Digits digits(std::size_t n) const {
        Digits out;
        for (std::size_t i = 1; i <= n && i <= size(); ++i) out.push_back(digit(i));
        return out;
    }

    bool operator==(const Code& o) const = default;
};

/// Smallest period of a cycle, and the head folded into the cycle.
inline Code canonical(Code c) {
    if (c.cycle.empty()) return c;
    const std::size_t n = c.cycle.size();
    for (std::size_t p = 1; p <= n; ++p) {
        if (n % p != 0) continue;
        bool ok = true;
        for (std::size_t i = p; i < n && ok; ++i) ok = c.cycle[i] == c.cycle[i - p];
        if (ok) {
            c.cycle.resize(p);
            break;
        }
    }
    while (!c.head.empty() && c.head.back() == c.cycle.back()) {
        std::rotate(c.cycle.rbegin(), c.cycle.rbegin() + 1, c.cycle.rend());
        c.head.pop_back();
    }
    c.truncated = false;
    return c;
}

inline Code negate(Code c) {
    c.leading = -c.leading;
    for (auto& d : c.head) d = -d;
    for (auto& d : c.cycle) d = -d;
    return c;
}

/// Drops a0 and the next n digits.
inline Code shift(const Code& c, std::size_t n) {
    Code out;
    out.flavor = c.flavor;
    if (n == 0) {
        out = c;
        out.leading = 0;
        return out;
    }
    if (n <= c.head.size()) {
        out.head.assign(c.head.begin() + static_cast<std::ptrdiff_t>(n), c.head.end());
        out.cycle = c.cycle;
        out.truncated = c.truncated;
        return out;
    }
    if (c.cycle.empty()) return out;  // shifted past the end: zero code
    std::size_t k = (n - c.head.size()) % c.cycle.size();
    out.cycle = c.cycle;
    std::rotate(out.cycle.begin(), out.cycle.begin() + static_cast<std::ptrdiff_t>(k), out.cycle.end());
    return out;
}

// ---------------------------------------------------------------------------
// Order and distance

namespace detail {
// Position of a digit in the order 1 < 2 < ... < (end) < ... < -2 < -1.
inline std::pair<int, long long> order_key(long long d, bool present) {
    if (!present) return {1, 0};
    if (d > 0) return {0, d};
    return {2, d};
}
}  // namespace detail

/// Three-way comparison of the values of two regular codes.
inline int compare(const Code& x, const Code& y, std::size_t depth = 512) {
    if (x.flavor != Flavor::regular || y.flavor != Flavor::regular)
        throw std::invalid_argument("compare: both codes must be regular");
    if (x.leading != y.leading) return x.leading < y.leading ? -1 : 1;
    for (std::size_t i = 1; i <= depth; ++i) {
        bool px = i <= x.size(), py = i <= y.size();
        if (!px && !py) return 0;
        auto kx = detail::order_key(px ? x.digit(i) : 0, px);
        auto ky = detail::order_key(py ? y.digit(i) : 0, py);
        if (kx != ky) return kx < ky ? -1 : 1;
    }
    return 0;
}

/// 1/(1+n) with n the first index where the digit sequences differ
/// (a0 has index 0, missing digits read as 0); 0 when no difference is found.
inline double code_distance(const Code& x, const Code& y, std::size_t depth = 512) {
    for (std::size_t i = 0; i <= depth; ++i) {
        if (i > x.size() && i > y.size()) return 0.0;
        if (x.digit(i) != y.digit(i)) return 1.0 / (1.0 + static_cast<double>(i));
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Forbidden blocks

enum class BlockKind {
    ones_then_m,  // even q: (e)^h, e*m
    ones_run,     // odd q:  (e)^(h+1)
    two_block,    // odd q:  (e)^h, 2e, (e)^h, e*m
};

struct BlockHit {
    std::size_t index;  // first digit of the block
    std::size_t length;
    BlockKind kind;
    long long sign;  // the sign e of the block
    long long m;     // |last digit| for ones_then_m and two_block
};

namespace detail {

// Forward block starting exactly at d[i] with exactly `len` digits.
template <class Real>
std::optional<BlockHit> match_block(const Context<Real>& ctx, const Digits& d, std::size_t i, std::size_t len) {
    if (i + len > d.size() || len == 0) return std::nullopt;
    const long long e = d[i] > 0 ? 1 : -1;
    const std::size_t h = static_cast<std::size_t>(ctx.h);
    auto run = [&](std::size_t from, std::size_t n) {
        for (std::size_t k = 0; k < n; ++k)
            if (d[from + k] != e) return false;
        return true;
    };
    if (d[i] == 0) return std::nullopt;
    if (ctx.even()) {
        if (len != h + 1 || !run(i, h)) return std::nullopt;
        long long last = d[i + h];
        if (last * e >= 1) return BlockHit{i, len, BlockKind::ones_then_m, e, last * e};
        return std::nullopt;
    }
    if (len == h + 1 && run(i, h + 1)) return BlockHit{i, len, BlockKind::ones_run, e, 1};
    if (len == 2 * h + 2 && run(i, h) && d[i + h] == 2 * e && run(i + h + 1, h)) {
        long long last = d[i + 2 * h + 1];
        if (last * e >= 1) return BlockHit{i, len, BlockKind::two_block, e, last * e};
    }
    return std::nullopt;
}

template <class Real>
std::vector<std::size_t> block_lengths(const Context<Real>& ctx) {
    const std::size_t h = static_cast<std::size_t>(ctx.h);
    if (ctx.even()) return {h + 1};
    return {h + 1, 2 * h + 2};
}

}  // namespace detail

/// Leftmost forbidden block at or after `start`.  With `reversed` the blocks
/// are matched read backwards (the test for dual regularity).
template <class Real>
std::optional<BlockHit> scan_forbidden(const Context<Real>& ctx, const Digits& d, bool reversed = false,
                                       std::size_t start = 0) {
    for (std::size_t i = start; i < d.size(); ++i) {
        for (std::size_t len : detail::block_lengths(ctx)) {
            if (i + len > d.size()) continue;
            if (!reversed) {
                if (auto hit = detail::match_block(ctx, d, i, len)) return hit;
            } else {
                Digits slice(d.rbegin() + static_cast<std::ptrdiff_t>(d.size() - i - len),
                             d.rbegin() + static_cast<std::ptrdiff_t>(d.size() - i));
                if (auto hit = detail::match_block(ctx, slice, 0, len)) {
                    hit->index = i;
                    return hit;
                }
            }
        }
    }
    return std::nullopt;
}

namespace detail {
// A zero digit between neighbours a and b acts as the single digit a + b; a
// trailing zero cancels the digit before it.
inline void merge_zeros(Digits& d) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 1; i < d.size(); ++i) {
            if (d[i] != 0) continue;
            if (i + 1 < d.size()) {
                d[i - 1] += d[i + 1];
                d.erase(d.begin() + static_cast<std::ptrdiff_t>(i), d.begin() + static_cast<std::ptrdiff_t>(i + 2));
            } else if (i >= 2) {
                d.erase(d.begin() + static_cast<std::ptrdiff_t>(i - 1), d.end());
            } else {
                // [a0, 0]: value a0*lambda + infinity is not a real number
                throw std::domain_error("rewrite produced an infinite value");
            }
            changed = true;
            break;
        }
    }
}
}  // namespace detail

/// One rewriting step at the leftmost forbidden block of [a0, a1, ..., an].
/// a0 is never part of a block; it is only the left neighbour.  Returns
/// nullopt when the sequence has no forbidden block.
template <class Real>
std::optional<Digits> rewrite_forbidden(const Context<Real>& ctx, const Digits& d) {
    auto hit = scan_forbidden(ctx, d, false, 1);
    if (!hit) return std::nullopt;
    const long long e = hit->sign;
    const std::size_t i = hit->index, h = static_cast<std::size_t>(ctx.h);
    const bool has_b = i + hit->length < d.size();
    Digits mid;
    bool bump_b = false;
    switch (hit->kind) {
        case BlockKind::ones_then_m:
            if (hit->m >= 2) {
                mid.assign(h, -e);
                mid.push_back(e * hit->m - e);
            } else {
                mid.assign(h - 1, -e);
                bump_b = true;
            }
            break;
        case BlockKind::ones_run:
            mid.assign(h, -e);
            bump_b = true;
            break;
        case BlockKind::two_block:
            mid.assign(h, -e);
            if (hit->m >= 2) {
                mid.push_back(-2 * e);
                mid.insert(mid.end(), h, -e);
                mid.push_back(e * hit->m - e);
            } else if (h == 0) {
                // [a, 2e, e, b] -> [a - e, b - 2e]
                Digits out(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(i));
                out.back() -= e;
                if (has_b) {
                    out.push_back(d[i + hit->length] - 2 * e);
                    out.insert(out.end(), d.begin() + static_cast<std::ptrdiff_t>(i + hit->length + 1), d.end());
                }
                detail::merge_zeros(out);
                return out;
            } else {
                mid.push_back(-2 * e);
                mid.insert(mid.end(), h - 1, -e);
                bump_b = true;
            }
            break;
    }
    Digits out(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(i));
    out.back() -= e;
    out.insert(out.end(), mid.begin(), mid.end());
    std::size_t rest = i + hit->length;
    if (has_b) {
        out.push_back(bump_b ? d[rest] - e : d[rest]);
        out.insert(out.end(), d.begin() + static_cast<std::ptrdiff_t>(rest + 1), d.end());
    }
    detail::merge_zeros(out);
    return out;
}

/// Rewrites until no forbidden block is left (bounded number of steps).
template <class Real>
Digits normalize_digits(const Context<Real>& ctx, Digits d, std::size_t max_steps = 100000) {
    for (std::size_t s = 0; s < max_steps; ++s) {
        auto next = rewrite_forbidden(ctx, d);
        if (!next) return d;
        d = std::move(*next);
    }
    throw consistency_error("rewriting did not terminate");
}

/// Digits used for block checks: head plus enough unrolled cycle copies to
/// expose every block that straddles the cycle boundary.
template <class Real>
Digits check_window(const Context<Real>& ctx, const Code& c) {
    if (!c.periodic()) return c.head;
    std::size_t span = c.head.size() + (2 * static_cast<std::size_t>(ctx.h) + 3 + c.cycle.size()) * 2;
    return c.digits(span);
}

template <class Real>
bool is_regular(const Context<Real>& ctx, const Code& c) {
    return !scan_forbidden(ctx, check_window(ctx, c), false);
}

template <class Real>
bool is_dual_regular(const Context<Real>& ctx, const Code& c) {
    Digits d = check_window(ctx, c);
    if (c.leading != 0) d.insert(d.begin(), c.leading);
    return !scan_forbidden(ctx, d, true);
}

// ---------------------------------------------------------------------------
// Values

template <class Real>
struct Evaluation {
    Real value;
    Real residual_bound;  // 0 for finite and periodic codes
};

/// T^{a0} S T^{a1} ... S T^{an} as a matrix.
template <class Real>
Mobius<Real> head_map(const Context<Real>& ctx, long long a0, const Digits& ds) {
    Mobius<Real> m = gen_T(ctx, a0);
    for (long long a : ds) m = m * gen_S<Real>() * gen_T(ctx, a);
    return m;
}

/// Value of a code.  Periodic tails are evaluated exactly as the attracting
/// fixed point of the cycle map; truncated codes report how far the true value
/// can be from the truncation.
template <class Real>
Evaluation<Real> evaluate(const Context<Real>& ctx, const Code& c, bool force = false) {
    if (!force) {
        bool ok = c.flavor == Flavor::regular ? is_regular(ctx, c) : is_dual_regular(ctx, c);
        if (!ok) throw std::domain_error("code contains a forbidden block; convergence not guaranteed");
    }
    Mobius<Real> m = head_map(ctx, c.leading, c.head);
    if (c.periodic()) {
        // value of the tail [c1, c2, ...] is the attracting fixed point of
        // S T^{c1} ... S T^{cn}
        Mobius<Real> w = Mobius<Real>::identity();
        for (long long a : c.cycle) w = w * gen_S<Real>() * gen_T(ctx, a);
        auto cls = classify(w, ctx.eps);
        if (cls.kind != MobiusKind::hyperbolic) throw std::domain_error("cycle map is not hyperbolic");
        Real tail = *cls.attracting;
        return {m(tail), 0};
    }
    Real v = m(Real(0));
    if (!c.truncated) return {v, 0};
    Real bound = c.flavor == Flavor::regular ? ctx.lambda / 2 : ctx.R;
    Real lo = m(-bound), hi = m(bound);
    return {v, std::max(std::abs(lo - v), std::abs(hi - v))};
}

// ---------------------------------------------------------------------------
// Text form "a0;a1,a2,(c1,c2)" and "a0;a1,...,an,..." for truncated codes.

constexpr long long kDigitCap = 1000000000LL;

inline std::string to_string(const Code& c) {
    std::ostringstream os;
    os << c.leading << ';';
    bool first = true;
    for (long long d : c.head) {
        if (!first) os << ',';
        os << d;
        first = false;
    }
    if (c.periodic()) {
        if (!first) os << ',';
        os << '(';
        for (std::size_t i = 0; i < c.cycle.size(); ++i) os << (i ? "," : "") << c.cycle[i];
        os << ')';
    } else if (c.truncated) {
        os << (first ? "..." : ",...");
    }
    return os.str();
}

inline Code parse_code(const std::string& text, Flavor flavor = Flavor::regular) {
    Code c;
    c.flavor = flavor;
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    if (s.empty()) throw std::invalid_argument("empty code");
    auto num = [](const std::string& tok) {
        if (tok.empty()) throw std::invalid_argument("missing digit");
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(tok, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad digit '" + tok + "'");
        }
        if (used != tok.size()) throw std::invalid_argument("bad digit '" + tok + "'");
        if (std::llabs(v) > kDigitCap) throw std::invalid_argument("digit magnitude exceeds 1e9");
        return v;
    };
    auto semi = s.find(';');
    std::string rest;
    if (semi == std::string::npos) {
        // bare digit list "a1,a2,(c)" means a0 = 0
        rest = s;
    } else {
        c.leading = num(s.substr(0, semi));
        rest = s.substr(semi + 1);
    }
    if (rest.empty()) return c;
    auto open = rest.find('(');
    std::string body = rest, cyc;
    if (open != std::string::npos) {
        auto close = rest.find(')', open);
        if (close == std::string::npos || close != rest.size() - 1) throw std::invalid_argument("unbalanced cycle");
        body = rest.substr(0, open);
        cyc = rest.substr(open + 1, close - open - 1);
        if (cyc.empty()) throw std::invalid_argument("empty cycle");
    }
    auto split = [&](const std::string& str, Digits& out, bool allow_dots) {
        std::size_t pos = 0;
        while (pos < str.size()) {
            auto comma = str.find(',', pos);
            std::string tok = str.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (allow_dots && tok == "...") {
                if (comma != std::string::npos) throw std::invalid_argument("'...' must be last");
                c.truncated = true;
            } else {
                long long v = num(tok);
                if (v == 0) throw std::invalid_argument("zero digit after a0");
                out.push_back(v);
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
            if (pos == str.size() && !allow_dots) throw std::invalid_argument("trailing comma");
        }
    };
    if (!body.empty() && body.back() == ',' && open != std::string::npos) body.pop_back();
    split(body, c.head, open == std::string::npos);
    if (!cyc.empty()) split(cyc, c.cycle, false);
    return c;
}

/// The two-sided code ... b2, b1 . a1, a2, ... of a point of the natural
/// extension: `past` is read outward from the cut.
struct BiCode {
    Code past;    // dual flavor
    Code future;  // regular flavor
};

/// True when no forbidden block straddles or sits next to the cut.
template <class Real>
bool cut_is_admissible(const Context<Real>& ctx, const BiCode& bc, std::size_t window = 0) {
    if (window == 0) window = 2 * static_cast<std::size_t>(ctx.h) + 4;
    Digits past = bc.past.digits(window), fut = bc.future.digits(window);
    Digits line(past.rbegin(), past.rend());
    line.insert(line.end(), fut.begin(), fut.end());
    return !scan_forbidden(ctx, line, false);
}

}  // namespace hecke
