// Command-line front end: every operation of the library with JSON (or CSV)
// output.  Exit codes: 0 success, 1 usage, 2 domain error, 3 consistency failure.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hecke/hecke.hpp"
#include "json.hpp"

using json = nlohmann::ordered_json;
using namespace hecke;

namespace {

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    int q = 3;
    int precision = 53;
    double eps = 1e-12;
    std::optional<std::uint64_t> seed;
    std::string format = "json";
    std::size_t digits = 40;
};

// Floats with 17 significant digits; non-finite values become null.
void write_json(std::ostream& os, const json& j) {
    switch (j.type()) {
    case json::value_t::object: {
        os << '{';
        bool first = true;
        for (auto& [k, v] : j.items()) {
            if (!first) os << ',';
            first = false;
            os << json(k).dump() << ':';
            write_json(os, v);
        }
        os << '}';
        break;
    }
    case json::value_t::array: {
        os << '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) os << ',';
            write_json(os, j[i]);
        }
        os << ']';
        break;
    }
    case json::value_t::number_float: {
        double x = j.get<double>();
        if (x == 0) x = 0;  // no negative zero
        if (!std::isfinite(x)) {
            os << "null";
        } else {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", x);
            os << buf;
        }
        break;
    }
    default:
        os << j.dump();
    }
}

void emit(const json& j) {
    write_json(std::cout, j);
    std::cout << '\n';
}

template <class Real>
Real parse_real(const std::string& text, const char* what) {
    const char* s = text.c_str();
    char* end = nullptr;
    errno = 0;
    long double v = std::strtold(s, &end);
    if (end == s || *end != '\0' || errno == ERANGE) throw usage_error(std::string("cannot parse ") + what + ": '" + text + "'");
    if constexpr (std::is_same_v<Real, double>) return std::strtod(s, nullptr);
    return static_cast<Real>(v);
}

// Significant digits of a decimal string and half a unit in its last place.
std::pair<int, long double> decimal_resolution(const std::string& text) {
    std::string mant = text;
    long exp10 = 0;
    auto e = text.find_first_of("eE");
    if (e != std::string::npos) {
        mant = text.substr(0, e);
        exp10 = std::strtol(text.c_str() + e + 1, nullptr, 10);
    }
    int sig = 0, frac = 0;
    bool seen_dot = false, leading = true;
    for (char ch : mant) {
        if (ch == '.') {
            seen_dot = true;
        } else if (std::isdigit(static_cast<unsigned char>(ch))) {
            if (seen_dot) ++frac;
            if (ch != '0') leading = false;
            if (!leading) ++sig;
        }
    }
    return {sig, 0.5L * std::pow(10.0L, static_cast<long double>(exp10 - frac))};
}

Digits parse_cycle(const std::string& text) {
    Digits out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        long long d = 0;
        try {
            d = std::stoll(tok, &used);
        } catch (const std::exception&) {
            throw usage_error("bad cycle digit '" + tok + "'");
        }
        while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
        if (used != tok.size()) throw usage_error("bad cycle digit '" + tok + "'");
        out.push_back(d);
    }
    if (out.empty()) throw usage_error("empty cycle");
    return out;
}

json digits_json(const Digits& d) { return json(std::vector<long long>(d.begin(), d.end())); }

json code_json(const Code& c) {
    return {{"code", to_string(c)},   {"leading", c.leading},     {"head", digits_json(c.head)},
            {"cycle", digits_json(c.cycle)}, {"finite", c.finite()}, {"truncated", c.truncated}};
}

template <class Real>
json endpoints_json(const GeodesicEndpoints<Real>& g) {
    return {{"xi", double(g.xi)}, {"eta", double(g.eta)}};
}

template <class Real>
json mobius_json(const Mobius<Real>& m) {
    auto n = m.normalized();
    return {double(n.a), double(n.b), double(n.c), double(n.d)};
}

const char* region_name(OmegaRegion r) {
    switch (r) {
    case OmegaRegion::omega: return "omega";
    case OmegaRegion::omega_strong: return "omega_strong";
    default: return "outside";
    }
}

json header(const Config& cfg, const char* command) {
    return {{"schema", 1}, {"command", command}, {"q", cfg.q}, {"precision_bits", cfg.precision}};
}

// Subcommand arguments as given on the command line.
struct Args {
    std::string x, y, xi, eta, cycle, engine = "symbolic", map = "fq", x0;
    std::size_t resolution = 16;
    double xi_max = 10;
    int returns = 1;
    bool batch = false, reduce_first = false, exact = false;
    std::uint64_t birkhoff = 0;
    int bins = 100;
};

template <class Real>
class Runner {
public:
    Runner(const Config& cfg, const Args& a) : cfg_(cfg), a_(a), ctx_(make_context<Real>(cfg.q, Real(cfg.eps))) {}

    // A decimal with at least 7 significant digits that agrees to its last
    // digit with a distinguished point of the context is read as that point.
    std::optional<std::pair<std::string, Real>> snap(const std::string& text, Real x) const {
        auto [sig, half_ulp] = decimal_resolution(text);
        if (a_.exact || sig < 7) return std::nullopt;
        auto p = build_partition(ctx_);
        std::vector<std::pair<std::string, Real>> marks = {
            {"-lambda/2", -ctx_.lambda / 2}, {"lambda/2", ctx_.lambda / 2}, {"-1", Real(-1)}, {"1", Real(1)},
            {"-R", -ctx_.R}, {"R", ctx_.R}, {"r", ctx_.r}, {"-r", -ctx_.r}};
        for (std::size_t j = 0; j < p.phi.size(); ++j) {
            marks.push_back({"phi_" + std::to_string(j), p.phi[j]});
            marks.push_back({"-phi_" + std::to_string(j), -p.phi[j]});
            marks.push_back({"r_" + std::to_string(j), p.rj[j]});
            marks.push_back({"-r_" + std::to_string(j), -p.rj[j]});
        }
        for (auto& [name, v] : marks)
            if (v != 0 && std::abs(static_cast<long double>(x - v)) <= half_ulp) return std::make_pair(name, v);
        return std::nullopt;
    }

    int expand(bool dual) {
        const std::string& text = dual ? a_.y : a_.x;
        Real x = parse_real<Real>(text, dual ? "y" : "x");
        auto snapped = snap(text, x);
        if (snapped) x = snapped->second;
        Code c = dual ? expand_dual(ctx_, x, cfg_.digits) : expand_regular(ctx_, x, cfg_.digits);
        json out = header(cfg_, dual ? "dual" : "expand");
        out[dual ? "y" : "x"] = double(x);
        out["snapped_to"] = snapped ? json(snapped->first) : json(nullptr);
        out.update(code_json(c));
        out["value"] = double(evaluate(ctx_, c, true).value);
        emit(out);
        return 0;
    }

    int partition() {
        auto p = build_partition(ctx_);
        json out = header(cfg_, "partition");
        out["kappa"] = p.kappa;
        out["h"] = ctx_.h;
        json phi = json::array(), rj = json::array(), intervals = json::array();
        for (auto x : p.phi) phi.push_back(double(x));
        for (auto x : p.rj) rj.push_back(double(x));
        for (int j = -p.kappa; j <= p.kappa; ++j) {
            if (j == 0) continue;
            intervals.push_back({{"j", j},
                                 {"lower", double(p.lower(j))},
                                 {"upper", double(p.upper(j))},
                                 {"v_lo", double(p.height_lo(j, ctx_.R))},
                                 {"v_hi", double(p.height_hi(j, ctx_.R))}});
        }
        out["phi"] = phi;
        out["r"] = rj;
        out["intervals"] = intervals;
        emit(out);
        return 0;
    }

    // Omega and its strongly reduced part in (u, v); Omega* in (xi, eta) with
    // |xi| cut at xi_max.  Each rectangle edge is split into `resolution` steps.
    int omega() {
        if (a_.resolution < 1) throw usage_error("resolution must be positive");
        auto p = build_partition(ctx_);
        struct Rect {
            Real u0, u1, v0, v1;
        };
        std::vector<Rect> full, strong;
        const Real cut = 2 / (3 * ctx_.lambda);
        for (int j = 1; j <= p.kappa; ++j) {
            Real a = p.lower(j), b = p.upper(j), lo = p.height_lo(j, ctx_.R), hi = ctx_.R;
            full.push_back({a, b, lo, hi});
            if (a < -cut) strong.push_back({a, std::min(b, -cut), std::max(lo, Real(0)), hi});
            if (b > -cut) strong.push_back({std::max(a, -cut), b, lo, hi});
        }
        auto mirrored = [](std::vector<Rect> rs) {
            std::size_t n = rs.size();
            for (std::size_t i = 0; i < n; ++i) rs.push_back({-rs[i].u1, -rs[i].u0, -rs[i].v1, -rs[i].v0});
            return rs;
        };
        full = mirrored(full);
        strong = mirrored(strong);

        struct Polygon {
            std::string region;
            std::vector<std::pair<double, double>> pts;
        };
        std::vector<Polygon> polys;
        const std::size_t k = a_.resolution;
        auto outline = [&](const Rect& r) {
            std::vector<std::pair<Real, Real>> pts;
            const Real us[4] = {r.u0, r.u1, r.u1, r.u0}, vs[4] = {r.v0, r.v0, r.v1, r.v1};
            for (int e = 0; e < 4; ++e)
                for (std::size_t i = 0; i < k; ++i) {
                    Real t = Real(i) / Real(k);
                    pts.push_back({us[e] + t * (us[(e + 1) % 4] - us[e]), vs[e] + t * (vs[(e + 1) % 4] - vs[e])});
                }
            pts.push_back(pts.front());
            return pts;
        };
        for (auto& r : full) {
            Polygon poly{"omega", {}};
            for (auto [u, v] : outline(r)) poly.pts.push_back({double(u), double(v)});
            polys.push_back(poly);
        }
        for (auto& r : strong) {
            Polygon poly{"omega_strong", {}};
            for (auto [u, v] : outline(r)) poly.pts.push_back({double(u), double(v)});
            polys.push_back(poly);
        }
        const Real umin = 1 / Real(a_.xi_max);
        for (auto r : full) {
            if (r.u1 <= -umin || r.u0 >= umin) {
            } else if (r.u0 < 0) {
                r.u1 = -umin;
            } else {
                r.u0 = umin;
            }
            if (r.u0 >= r.u1) continue;
            Polygon poly{"omega_star", {}};
            for (auto [u, v] : outline(r)) {
                auto g = from_planar(PlanarPoint<Real>{u, v});
                poly.pts.push_back({double(g.xi), double(g.eta)});
            }
            polys.push_back(poly);
        }

        if (cfg_.format == "csv") {
            std::printf("region,polygon,vertex,x,y\n");
            for (std::size_t i = 0; i < polys.size(); ++i)
                for (std::size_t j = 0; j < polys[i].pts.size(); ++j)
                    std::printf("%s,%zu,%zu,%.17g,%.17g\n", polys[i].region.c_str(), i, j, polys[i].pts[j].first,
                                polys[i].pts[j].second);
            return 0;
        }
        json out = header(cfg_, "omega");
        json arr = json::array();
        for (auto& poly : polys) {
            json pts = json::array();
            for (auto [x, y] : poly.pts) pts.push_back({x, y});
            arr.push_back({{"region", poly.region}, {"vertices", pts}});
        }
        out["polygons"] = arr;
        emit(out);
        return 0;
    }

    int reduce() {
        auto p = build_partition(ctx_);
        GeodesicEndpoints<Real> g{parse_real<Real>(a_.xi, "xi"), parse_real<Real>(a_.eta, "eta")};
        auto rg = reduce_endpoints(ctx_, p, g, cfg_.digits);
        auto sr = strongly_reduce(ctx_, p, rg);
        json out = header(cfg_, "reduce");
        out["input"] = endpoints_json(g);
        out["reduced"] = {{"endpoints", endpoints_json(rg.endpoints)},
                          {"region", region_name(reduced_region(ctx_, p, rg.endpoints))},
                          {"word", rg.word.str()},
                          {"map", mobius_json(rg.map)},
                          {"future", to_string(rg.code.future)},
                          {"past", to_string(rg.code.past)}};
        out["strongly_reduced"] = {{"k", sr.k},
                                   {"endpoints", endpoints_json(sr.geodesic.endpoints)},
                                   {"word", sr.geodesic.word.str()},
                                   {"in_section", in_section(ctx_, p, sr.geodesic.endpoints)}};
        emit(out);
        return 0;
    }

    int trace() {
        if (a_.returns < 0) throw usage_error("returns must be non-negative");
        Engine engine = Engine::symbolic;
        if (a_.engine == "geometric") engine = Engine::geometric;
        else if (a_.engine == "both") engine = Engine::both;
        else if (a_.engine != "symbolic") throw usage_error("unknown engine '" + a_.engine + "'");
        auto p = build_partition(ctx_);

        std::vector<std::pair<std::string, std::string>> inputs;
        if (a_.batch) {
            std::string line;
            while (std::getline(std::cin, line)) {
                if (line.empty() || line[0] == '#') continue;
                auto comma = line.find(',');
                if (comma == std::string::npos) throw usage_error("batch line without a comma: '" + line + "'");
                auto trim = [](std::string s) {
                    s.erase(0, s.find_first_not_of(" \t\r"));
                    s.erase(s.find_last_not_of(" \t\r") + 1);
                    return s;
                };
                inputs.push_back({trim(line.substr(0, comma)), trim(line.substr(comma + 1))});
            }
        } else {
            inputs.push_back({a_.xi, a_.eta});
        }

        json streams = json::array();
        bool csv = cfg_.format == "csv";
        if (csv) std::printf("input,n,k,label,xi,eta,time\n");
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            GeodesicEndpoints<Real> g{parse_real<Real>(inputs[i].first, "xi"), parse_real<Real>(inputs[i].second, "eta")};
            GeodesicEndpoints<Real> start = g;
            if (a_.reduce_first) start = strongly_reduce(ctx_, p, reduce_endpoints(ctx_, p, g, cfg_.digits)).geodesic.endpoints;
            auto recs = simulate_returns(ctx_, p, start, a_.returns, engine);
            json rows = json::array();
            Real total = 0;
            for (std::size_t n = 0; n < recs.size(); ++n) {
                auto& r = recs[n];
                total += r.time;
                if (csv) {
                    std::printf("%zu,%zu,%d,%d,%.17g,%.17g,%.17g\n", i, n + 1, r.k, r.point.label,
                                double(r.point.endpoints.xi), double(r.point.endpoints.eta), double(r.time));
                } else {
                    rows.push_back({{"n", n + 1},
                                    {"k", r.k},
                                    {"label", r.point.label},
                                    {"xi", double(r.point.endpoints.xi)},
                                    {"eta", double(r.point.endpoints.eta)},
                                    {"time", double(r.time)},
                                    {"cumulative_time", double(total)}});
                }
            }
            if (!csv) streams.push_back({{"input", endpoints_json(g)}, {"start", endpoints_json(start)}, {"returns", rows}});
        }
        if (!csv) {
            json out = header(cfg_, "trace");
            out["engine"] = a_.engine;
            out["streams"] = streams;
            emit(out);
        }
        return 0;
    }

    int length() {
        Digits cycle = parse_cycle(a_.cycle);
        Real len = closed_length(ctx_, cycle), tr = trace_length(ctx_, cycle);
        json out = header(cfg_, "length");
        out["cycle"] = digits_json(cycle);
        out["length"] = double(len);
        out["trace_length"] = double(tr);
        out["difference"] = double(len - tr);
        emit(out);
        return 0;
    }

    int measure() {
        auto p = build_partition(ctx_);
        auto d = density_fq(ctx_, p);
        auto f = density_factor_map(ctx_, p);
        auto rep = total_mass_and_constant(ctx_, d);
        auto frep = total_mass_and_constant(ctx_, f);
        auto pieces = [](const PiecewiseDensity<Real>& pd) {
            json arr = json::array();
            for (auto& pc : pd.pieces)
                arr.push_back({{"a", double(pc.a)}, {"b", double(pc.b)}, {"v_lo", double(pc.v_lo)},
                               {"v_hi", double(pc.v_hi)}, {"mass", double(pc.mass())}});
            return arr;
        };
        json out = header(cfg_, "measure");
        out["fq"] = {{"mass", double(rep.mass)},
                     {"quadrature", double(rep.quadrature)},
                     {"closed_form", double(fq_mass_closed_form(ctx_))},
                     {"printed_mass", double(4 * normalization_inverse(ctx_))},
                     {"C_check", double(rep.C_check)},
                     {"C_printed", double(rep.C_printed)},
                     {"pieces", pieces(d)}};
        out["return_factor"] = {{"mass", double(frep.mass)}, {"quadrature", double(frep.quadrature)}, {"pieces", pieces(f)}};
        if (a_.birkhoff > 0) {
            MapKind kind = MapKind::fq;
            if (a_.map == "factor") kind = MapKind::return_factor;
            else if (a_.map != "fq") throw usage_error("unknown map '" + a_.map + "'");
            Real x0 = a_.x0.empty() ? Real(1) / std::numbers::pi_v<Real> : parse_real<Real>(a_.x0, "x0");
            std::uint64_t seed = cfg_.seed.value_or(12345);
            auto h = birkhoff_histogram(ctx_, p, x0, a_.birkhoff, a_.bins, kind, seed);
            out["birkhoff"] = {{"map", a_.map},  {"x0", double(x0)},     {"iterations", a_.birkhoff},
                               {"bins", a_.bins}, {"seed", seed},         {"lo", double(h.lo)},
                               {"hi", double(h.hi)}, {"l1", double(h.l1)}, {"restarts", h.restarts},
                               {"counts", h.counts}};
        }
        emit(out);
        return 0;
    }

    int constants() {
        const Real pi = std::numbers::pi_v<Real>;
        Real r_res = ctx_.even() ? std::abs(ctx_.R - 1) : std::abs(ctx_.R * ctx_.R + (2 - ctx_.lambda) * ctx_.R - 1);
        json out = header(cfg_, "constants");
        out["parity"] = ctx_.even() ? "even" : "odd";
        out["lambda"] = double(ctx_.lambda);
        out["R"] = double(ctx_.R);
        out["r"] = double(ctx_.r);
        out["h"] = ctx_.h;
        out["kappa"] = ctx_.kappa;
        out["eps"] = double(ctx_.eps);
        out["residuals"] = {{"lambda", double(std::abs(ctx_.lambda - 2 * std::cos(pi / Real(cfg_.q))))},
                            {"R", double(r_res)},
                            {"r", double(std::abs(ctx_.r - (ctx_.R - ctx_.lambda)))}};
        emit(out);
        return 0;
    }

private:
    Config cfg_;
    Args a_;
    Context<Real> ctx_;
};

template <class Real>
int dispatch(const std::string& cmd, const Config& cfg, const Args& a) {
    Runner<Real> run(cfg, a);
    if (cmd == "expand") return run.expand(false);
    if (cmd == "dual") return run.expand(true);
    if (cmd == "partition") return run.partition();
    if (cmd == "omega") return run.omega();
    if (cmd == "reduce") return run.reduce();
    if (cmd == "trace") return run.trace();
    if (cmd == "length") return run.length();
    if (cmd == "measure") return run.measure();
    return run.constants();
}

int fail(int code, const char* kind, const std::string& msg) {
    json err = {{"schema", 1}, {"error", {{"kind", kind}, {"message", msg}}}};
    write_json(std::cerr, err);
    std::cerr << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hecke group continued fractions, reduction and geodesic flow"};
    app.require_subcommand(1);
    Config cfg;
    Args a;
    if (const char* env = std::getenv("HECKE_PRECISION")) {
        try {
            cfg.precision = std::stoi(env);
        } catch (const std::exception&) {
            return fail(1, "usage", std::string("HECKE_PRECISION is not an integer: ") + env);
        }
    }
    app.add_option("--precision", cfg.precision, "mantissa bits: 53 (double) or 64 (long double)")
        ->check(CLI::Range(1, 64));
    app.add_option("--eps", cfg.eps, "comparison tolerance")->check(CLI::PositiveNumber);
    app.add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--seed", cfg.seed, "random seed");

    auto add = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--q", cfg.q, "group index q >= 3")->required()->check(CLI::Range(3, 1000000));
        return sub;
    };
    auto* expand = add("expand", "regular expansion of x");
    expand->add_option("--x", a.x)->required();
    expand->add_option("--digits", cfg.digits)->check(CLI::Range(1, 100000));
    expand->add_flag("--exact", a.exact, "never read the input as a nearby distinguished point");
    auto* dual = add("dual", "dual expansion of y");
    dual->add_option("--y,--x", a.y)->required();
    dual->add_option("--digits", cfg.digits)->check(CLI::Range(1, 100000));
    dual->add_flag("--exact", a.exact, "never read the input as a nearby distinguished point");
    add("partition", "Markov partition points and heights");
    auto* omega = add("omega", "polygons of Omega, Omega* and the strongly reduced part");
    omega->add_option("--resolution", a.resolution)->check(CLI::Range(1, 100000));
    omega->add_option("--xi-max", a.xi_max, "cut of |xi| for Omega*")->check(CLI::PositiveNumber);
    auto* reduce = add("reduce", "reduce a geodesic into Omega*");
    reduce->add_option("--xi", a.xi)->required();
    reduce->add_option("--eta", a.eta)->required();
    reduce->add_option("--digits", cfg.digits)->check(CLI::Range(1, 100000));
    auto* trace = add("trace", "first returns to the cross section");
    trace->add_option("--xi", a.xi);
    trace->add_option("--eta", a.eta);
    trace->add_option("--returns", a.returns)->check(CLI::NonNegativeNumber);
    trace->add_option("--engine", a.engine)->check(CLI::IsMember({"symbolic", "geometric", "both"}));
    trace->add_flag("--batch", a.batch, "read xi,eta lines from stdin");
    trace->add_flag("--reduce", a.reduce_first, "reduce the input first");
    auto* length = add("length", "length of a closed geodesic from its cycle");
    length->add_option("--cycle", a.cycle)->required();
    auto* measure = add("measure", "invariant densities, masses and Birkhoff histograms");
    measure->add_option("--birkhoff", a.birkhoff, "orbit length");
    measure->add_option("--bins", a.bins)->check(CLI::Range(1, 10000000));
    measure->add_option("--map", a.map)->check(CLI::IsMember({"fq", "factor"}));
    measure->add_option("--x0", a.x0);
    measure->add_option("--seed", cfg.seed, "random seed for restarts");
    add("constants", "lambda, R, r, h, kappa with residuals");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    if (cfg.precision < 1 || cfg.precision > 64)
        return fail(1, "usage", "precision must be 1..64 bits (53 double, 64 long double), got " + std::to_string(cfg.precision));
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "trace" && !a.batch && (a.xi.empty() || a.eta.empty()))
        return fail(1, "usage", "trace needs --xi and --eta, or --batch");

    try {
        if (cfg.precision <= 53) return dispatch<double>(cmd, cfg, a);
        return dispatch<long double>(cmd, cfg, a);
    } catch (const usage_error& e) {
        return fail(1, "usage", e.what());
    } catch (const hecke::consistency_error& e) {
        return fail(3, "consistency", e.what());
    } catch (const std::domain_error& e) {
        return fail(2, "domain", e.what());
    } catch (const std::invalid_argument& e) {
        return fail(2, "domain", e.what());
    } catch (const std::exception& e) {
        return fail(3, "internal", e.what());
    }
}
