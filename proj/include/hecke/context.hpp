#pragma once
// Hecke triangle group constants and projective 2x2 arithmetic.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hecke {

/// Thrown when a numerical cross-check inside the library fails.
struct consistency_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Parity { even, odd };

template <class Real = double>
struct Context {
    int q = 3;
    Real lambda{};
    int h = 0;
    int kappa = 0;
    Parity parity = Parity::odd;
    Real R{};
    Real r{};
    std::complex<Real> rho{};
    Real eps{};
    int precision = std::numeric_limits<Real>::digits;  // mantissa bits

    bool even() const { return parity == Parity::even; }
    Real pi() const { return std::numbers::pi_v<Real>; }
};

template <class Real = double>
Context<Real> make_context(int q, Real eps = Real(1e-12)) {
    if (q < 3) throw std::invalid_argument("q must be at least 3");
    if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
    Context<Real> c;
    const Real pi = std::numbers::pi_v<Real>;
    c.q = q;
    c.lambda = 2 * std::cos(pi / q);
    c.parity = (q % 2 == 0) ? Parity::even : Parity::odd;
    c.h = c.even() ? (q - 2) / 2 : (q - 3) / 2;
    c.kappa = c.even() ? c.h : 2 * c.h + 1;
    if (c.even()) {
        c.R = 1;
    } else {
        // positive root of R^2 + (2 - lambda) R - 1 = 0
        Real b = 2 - c.lambda;
        c.R = (-b + std::sqrt(b * b + 4)) / 2;
    }
    c.r = c.R - c.lambda;
    c.rho = std::polar(Real(1), pi / q);
    c.eps = eps;
    return c;
}

// ---------------------------------------------------------------------------
// Mobius maps

template <class Real = double>
struct Mobius {
    Real a{1}, b{0}, c{0}, d{1};

    static Mobius identity() { return {1, 0, 0, 1}; }

    Real det() const { return a * d - b * c; }
    Real trace() const { return a + d; }

    Mobius operator*(const Mobius& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }

    Mobius inverse() const { return {d, -b, -c, a}; }

    /// Scaled to determinant one (orientation preserving maps only).
    Mobius normalized() const {
        Real D = det();
        if (!(D > 0)) throw std::domain_error("Mobius map with non-positive determinant");
        Real s = 1 / std::sqrt(D);
        return {a * s, b * s, c * s, d * s};
    }

    /// Image of a point of the extended real line; infinity is +inf.
    Real operator()(Real x) const {
        if (std::isinf(x)) {
            if (c == 0) return std::numeric_limits<Real>::infinity();
            return a / c;
        }
        Real den = c * x + d;
        if (den == 0) return std::numeric_limits<Real>::infinity();
        return (a * x + b) / den;
    }

    std::complex<Real> operator()(std::complex<Real> z) const {
        return (a * z + b) / (c * z + d);
    }

    /// Derivative at a finite real point.
    Real derivative(Real x) const {
        Real den = c * x + d;
        return det() / (den * den);
    }
};

template <class Real>
bool projective_equal(const Mobius<Real>& m, const Mobius<Real>& n, Real tol) {
    auto a = m.normalized(), b = n.normalized();
    auto close = [&](Real s) {
        return std::abs(a.a - s * b.a) <= tol && std::abs(a.b - s * b.b) <= tol &&
               std::abs(a.c - s * b.c) <= tol && std::abs(a.d - s * b.d) <= tol;
    };
    return close(1) || close(-1);
}

template <class Real>
bool is_identity(const Mobius<Real>& m, Real tol) {
    return projective_equal(m, Mobius<Real>::identity(), tol);
}

template <class Real> Mobius<Real> gen_S() { return {0, -1, 1, 0}; }
template <class Real> Mobius<Real> gen_T(const Context<Real>& ctx, long long n = 1) {
    return {1, Real(n) * ctx.lambda, 0, 1};
}

// ---------------------------------------------------------------------------
// Words in the generators S and T

/// A word S^e T^k ... stored as letters ('S', 1) or ('T', k).  Adjacent T
/// powers merge and S S cancels, so the stored form is reduced in the free
/// product sense.
struct Word {
    std::vector<std::pair<char, long long>> letters;

    Word& push_S() {
        if (!letters.empty() && letters.back().first == 'S') letters.pop_back();
        else letters.push_back({'S', 1});
        return *this;
    }
    Word& push_T(long long k) {
        if (k == 0) return *this;
        if (!letters.empty() && letters.back().first == 'T') {
            letters.back().second += k;
            if (letters.back().second == 0) letters.pop_back();
        } else {
            letters.push_back({'T', k});
        }
        return *this;
    }
    Word& append(const Word& w) {
        for (auto& [g, k] : w.letters) g == 'S' ? push_S() : push_T(k);
        return *this;
    }
    /// (this) then applied after w: returns this * w as composition.
    Word operator*(const Word& w) const {
        Word out = *this;
        out.append(w);
        return out;
    }
    Word inverse() const {
        Word out;
        for (auto it = letters.rbegin(); it != letters.rend(); ++it)
            it->first == 'S' ? out.push_S() : out.push_T(-it->second);
        return out;
    }
    std::string str() const {
        if (letters.empty()) return "Id";
        std::string s;
        for (auto& [g, k] : letters) {
            if (!s.empty()) s += ' ';
            if (g == 'S') s += 'S';
            else s += k == 1 ? std::string("T") : "T^" + std::to_string(k);
        }
        return s;
    }
    static Word S() { return Word{}.push_S(); }
    static Word T(long long k = 1) { return Word{}.push_T(k); }
    static Word parse(const std::string& text);
};

inline Word Word::parse(const std::string& text) {
    Word w;
    std::size_t i = 0;
    auto skip = [&] { while (i < text.size() && (text[i] == ' ' || text[i] == '*' || text[i] == '.')) ++i; };
    skip();
    if (text.substr(i) == "Id") return w;
    while (i < text.size()) {
        char g = text[i++];
        long long k = 1;
        if (i < text.size() && text[i] == '^') {
            ++i;
            std::size_t used = 0;
            k = std::stoll(text.substr(i), &used);
            i += used;
        }
        if (g == 'S') {
            if (k % 2 != 0) w.push_S();
        } else if (g == 'T') {
            w.push_T(k);
        } else {
            throw std::invalid_argument("unknown generator in word: " + text);
        }
        skip();
    }
    return w;
}

template <class Real>
Mobius<Real> to_mobius(const Context<Real>& ctx, const Word& w) {
    Mobius<Real> m = Mobius<Real>::identity();
    for (auto& [g, k] : w.letters) m = m * (g == 'S' ? gen_S<Real>() : gen_T(ctx, k));
    return m;
}

enum class Gen { S, T, Tinv };

template <class Real>
Mobius<Real> mobius_word(const Context<Real>& ctx, const std::vector<Gen>& word) {
    if (word.empty()) throw std::invalid_argument("empty word");
    Mobius<Real> m = Mobius<Real>::identity();
    for (Gen g : word) {
        switch (g) {
            case Gen::S: m = m * gen_S<Real>(); break;
            case Gen::T: m = m * gen_T(ctx, 1); break;
            case Gen::Tinv: m = m * gen_T(ctx, -1); break;
        }
    }
    return m;
}

/// (TS)^n from the sine closed form, normalized to determinant one.
template <class Real>
Mobius<Real> ts_power(const Context<Real>& ctx, long long n) {
    const Real t = ctx.pi() / ctx.q;
    // reduce n modulo q: (TS)^q = Id projectively
    long long m = ((n % ctx.q) + ctx.q) % ctx.q;
    auto B = [&](long long k) { return std::sin(Real(k) * t); };
    Real s2 = std::sin(t) * std::sin(t);
    Mobius<Real> M{B(m + 1) / s2, -B(m) / s2, B(m) / s2, -B(m - 1) / s2};
    return M.normalized();
}

/// (ST)^n by repeated composition.
template <class Real>
Mobius<Real> st_power(const Context<Real>& ctx, long long n) {
    Mobius<Real> st = gen_S<Real>() * gen_T(ctx, 1);
    if (n < 0) { st = st.inverse(); n = -n; }
    Mobius<Real> m = Mobius<Real>::identity();
    for (long long i = 0; i < n; ++i) m = m * st;
    return m;
}

/// The group element identifying r with its image used in the odd/even
/// r-lemmas: (ST)^{h+1} T (ST)^h T for odd q, (ST)^{h-1} S T^2 for even q.
template <class Real>
Mobius<Real> a_r_map(const Context<Real>& ctx) {
    if (ctx.even())
        return st_power(ctx, ctx.h - 1) * gen_S<Real>() * gen_T(ctx, 2);
    return st_power(ctx, ctx.h + 1) * gen_T(ctx, 1) * st_power(ctx, ctx.h) * gen_T(ctx, 1);
}

enum class MobiusKind { elliptic, parabolic, hyperbolic };

template <class Real>
struct Classification {
    MobiusKind kind;
    std::vector<Real> fixed_points;  // real fixed points; +inf for infinity
    std::optional<Real> attracting;
    std::optional<Real> repelling;
};

template <class Real>
Classification<Real> classify(const Mobius<Real>& M0, Real eps = Real(1e-12)) {
    if (is_identity(M0, eps)) throw std::invalid_argument("classify: identity map");
    auto M = M0.normalized();
    Real tr = std::abs(M.trace());
    Classification<Real> out{};
    const Real inf = std::numeric_limits<Real>::infinity();
    if (std::abs(tr - 2) <= eps) {
        out.kind = MobiusKind::parabolic;
        out.fixed_points.push_back(std::abs(M.c) <= eps ? inf : (M.a - M.d) / (2 * M.c));
        return out;
    }
    if (tr < 2) {
        out.kind = MobiusKind::elliptic;
        return out;
    }
    out.kind = MobiusKind::hyperbolic;
    Real x1, x2;
    if (std::abs(M.c) <= eps * (std::abs(M.a) + std::abs(M.d))) {
        x1 = inf;
        x2 = M.b / (M.d - M.a);
    } else {
        // c x^2 + (d - a) x - b = 0
        Real disc = std::sqrt((M.d - M.a) * (M.d - M.a) + 4 * M.b * M.c);
        Real p = (M.a - M.d);
        // numerically stable pair of roots
        Real s = p >= 0 ? p + disc : p - disc;
        x1 = s / (2 * M.c);
        x2 = (-2 * M.b) / s;
        if (s == 0) x2 = x1;
    }
    out.fixed_points = {x1, x2};
    auto contraction = [&](Real x) {
        if (std::isinf(x)) {
            // derivative at infinity in the chart w = -1/x
            return M.c == 0 ? (M.d * M.d) : inf;
        }
        return std::abs(M.derivative(x));
    };
    if (contraction(x1) < contraction(x2)) {
        out.attracting = x1;
        out.repelling = x2;
    } else {
        out.attracting = x2;
        out.repelling = x1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exact arithmetic in Z[lambda]; test-time certification of group relations.

/// Minimal polynomial of 2cos(pi/q) over Q, monic with integer coefficients,
/// coefficient i multiplies x^i.
inline std::vector<long long> lambda_minimal_polynomial(int q) {
    using Poly = std::vector<long long>;
    auto trim = [](Poly& p) { while (p.size() > 1 && p.back() == 0) p.pop_back(); };
    auto divide = [&](Poly num, const Poly& den) {
        // exact division by a monic polynomial
        const long long nd = static_cast<long long>(den.size()) - 1;
        Poly quo(num.size() > den.size() - 1 ? num.size() - nd : 1, 0);
        for (long long i = static_cast<long long>(num.size()) - 1; i >= nd; --i) {
            long long coef = num[i];
            if (coef == 0) continue;
            quo[i - nd] = coef;
            for (long long j = 0; j <= nd; ++j) num[i - nd + j] -= coef * den[j];
        }
        trim(quo);
        return quo;
    };
    const int n = 2 * q;
    std::vector<Poly> phi(n + 1);
    for (int k = 1; k <= n; ++k) {
        if (n % k != 0) continue;
        Poly p(k + 1, 0);
        p[0] = -1;
        p[k] = 1;
        for (int d = 1; d < k; ++d)
            if (k % d == 0) p = divide(p, phi[d]);
        phi[k] = p;
    }
    const Poly& c = phi[n];
    const int m = static_cast<int>(c.size() - 1) / 2;
    // z^k + z^-k as a polynomial in x = z + 1/z
    std::vector<Poly> D(m + 1);
    D[0] = {2};
    if (m >= 1) D[1] = {0, 1};
    for (int k = 2; k <= m; ++k) {
        Poly p(k + 1, 0);
        for (std::size_t i = 0; i < D[k - 1].size(); ++i) p[i + 1] += D[k - 1][i];
        for (std::size_t i = 0; i < D[k - 2].size(); ++i) p[i] -= D[k - 2][i];
        D[k] = p;
    }
    Poly psi(m + 1, 0);
    psi[0] = c[m];
    for (int k = 1; k <= m; ++k)
        for (std::size_t i = 0; i < D[k].size(); ++i) psi[i] += c[m + k] * D[k][i];
    trim(psi);
    return psi;
}

/// Element of Z[lambda] reduced modulo the minimal polynomial.
struct LambdaInt {
    std::vector<long long> coef;  // coef[i] * lambda^i
};

class ExactField {
public:
    explicit ExactField(int q) : q_(q), min_(lambda_minimal_polynomial(q)) {}
    int degree() const { return static_cast<int>(min_.size()) - 1; }
    const std::vector<long long>& minimal_polynomial() const { return min_; }

    LambdaInt constant(long long v) const { return reduce({{v}}); }
    LambdaInt lambda_times(long long v) const { return reduce({{0, v}}); }

    LambdaInt add(const LambdaInt& x, const LambdaInt& y) const {
        std::vector<long long> out(std::max(x.coef.size(), y.coef.size()), 0);
        for (std::size_t i = 0; i < x.coef.size(); ++i) out[i] += x.coef[i];
        for (std::size_t i = 0; i < y.coef.size(); ++i) out[i] += y.coef[i];
        return reduce({out});
    }
    LambdaInt mul(const LambdaInt& x, const LambdaInt& y) const {
        if (x.coef.empty() || y.coef.empty()) return reduce({});
        std::vector<long long> out(x.coef.size() + y.coef.size() - 1, 0);
        for (std::size_t i = 0; i < x.coef.size(); ++i)
            for (std::size_t j = 0; j < y.coef.size(); ++j) out[i + j] += x.coef[i] * y.coef[j];
        return reduce({out});
    }
    LambdaInt neg(const LambdaInt& x) const {
        LambdaInt out = x;
        for (auto& v : out.coef) v = -v;
        return out;
    }
    bool equal(const LambdaInt& x, const LambdaInt& y) const {
        auto a = reduce(x), b = reduce(y);
        return a.coef == b.coef;
    }
    template <class Real>
    Real evaluate(const LambdaInt& x) const {
        Real lam = 2 * std::cos(std::numbers::pi_v<Real> / q_);
        Real acc = 0;
        for (std::size_t i = x.coef.size(); i-- > 0;) acc = acc * lam + Real(x.coef[i]);
        return acc;
    }

    struct Matrix {
        LambdaInt a, b, c, d;
    };
    Matrix S() const { return {constant(0), constant(-1), constant(1), constant(0)}; }
    Matrix T(long long n = 1) const { return {constant(1), lambda_times(n), constant(0), constant(1)}; }
    Matrix identity() const { return {constant(1), constant(0), constant(0), constant(1)}; }
    Matrix mul(const Matrix& x, const Matrix& y) const {
        return {add(mul(x.a, y.a), mul(x.b, y.c)), add(mul(x.a, y.b), mul(x.b, y.d)),
                add(mul(x.c, y.a), mul(x.d, y.c)), add(mul(x.c, y.b), mul(x.d, y.d))};
    }
    Matrix word(const Word& w) const {
        Matrix m = identity();
        for (auto& [g, k] : w.letters) m = mul(m, g == 'S' ? S() : T(k));
        return m;
    }
    /// Identity in PSL2, i.e. equal to +Id or -Id.
    bool is_projective_identity(const Matrix& m) const {
        auto zero = constant(0), one = constant(1), mone = constant(-1);
        if (!equal(m.b, zero) || !equal(m.c, zero)) return false;
        return (equal(m.a, one) && equal(m.d, one)) || (equal(m.a, mone) && equal(m.d, mone));
    }

private:
    LambdaInt reduce(LambdaInt x) const {
        auto& p = x.coef;
        const std::size_t deg = min_.size() - 1;
        while (p.size() > deg) {
            long long lead = p.back();
            std::size_t shift = p.size() - 1 - deg;
            for (std::size_t j = 0; j < min_.size(); ++j) p[shift + j] -= lead * min_[j];
            p.pop_back();
        }
        p.resize(deg, 0);
        return x;
    }

    int q_;
    std::vector<long long> min_;
};

}  // namespace hecke
