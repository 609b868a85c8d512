#pragma once
// Random inputs for the property tests.  Generators are seeded per test so
// failures replay.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hecke/hecke.hpp"

namespace hecke::testing {

using Ctx = Context<double>;
using Part = Partition<double>;
using Geo = GeodesicEndpoints<double>;

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    long long integer(long long lo, long long hi) { return std::uniform_int_distribution<long long>(lo, hi)(rng_); }

    double in_interval(const Ctx& c) { return uniform(-c.lambda / 2, c.lambda / 2); }

    PlanarPoint<double> in_omega(const Ctx& c, const Part& p) {
        for (;;) {
            PlanarPoint<double> pt{in_interval(c), uniform(-c.R, c.R)};
            if (std::abs(pt.u) > 1e-6 && omega_membership(c, p, pt) != OmegaRegion::outside) return pt;
        }
    }

    /// Strongly reduced geodesic with a section point, away from the cusp.
    Geo in_section(const Ctx& c, const Part& p) {
        for (;;) {
            PlanarPoint<double> pt{in_interval(c), uniform(-c.R, c.R)};
            if (std::abs(pt.u) < 1e-6) continue;
            Geo g{-1 / pt.u, -pt.v};
            if (hecke::in_section(c, p, g)) return g;
        }
    }

    long long digit(long long max_abs) {
        long long d = integer(1, max_abs);
        return integer(0, 1) ? d : -d;
    }

    /// Primitive cycle of the given length without forbidden blocks.
    Digits cycle(const Ctx& c, std::size_t len, long long max_abs = 5) {
        for (;;) {
            Digits d;
            for (std::size_t i = 0; i < len; ++i) d.push_back(digit(max_abs));
            Code code;
            code.cycle = d;
            if (!is_regular(c, code) || canonical(code).cycle.size() != len) continue;
            return d;
        }
    }

    /// Finite digit string a0, a1..an (a0 may be 0, the rest nonzero).
    Digits digits(std::size_t len, long long max_abs) {
        Digits d{integer(-max_abs, max_abs)};
        for (std::size_t i = 1; i < len; ++i) d.push_back(digit(max_abs));
        return d;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace hecke::testing
