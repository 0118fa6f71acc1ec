// Command-line front end. Exit status: 0 pass, 1 numeric verdict failed,
// 2 invalid input, 3 internal error.

#include "bianchi/arithsums.h"
#include "bianchi/autoseries.h"
#include "bianchi/h3geom.h"
#include "bianchi/identities.h"
#include "bianchi/jensen.h"
#include "bianchi/quadfield.h"
#include "bianchi/specfun.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

using namespace bianchi;
using json = nlohmann::json;

namespace {

struct RunConfig {
    int dk = -4;
    int threads = 0;
    std::string format = "json";
    std::string output;
    bool timing = true;

    SeriesParams series;
    double C_max_kloosterman = 6.0;

    std::int64_t N = 1000000;
    double r_max = 6.0;
    double delta = 0.05;
    std::uint64_t seed = 1;
    double rel_tol = 0.02;
    std::string masses;
};

using Field = std::variant<double, std::int64_t, bool, std::string>;
using Record = std::vector<std::pair<std::string, Field>>;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string json_field(const Field& f) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>)
                return std::isfinite(v) ? format_double(v) : "null";
            else if constexpr (std::is_same_v<T, std::int64_t>)
                return std::to_string(v);
            else if constexpr (std::is_same_v<T, bool>)
                return v ? "true" : "false";
            else
                return json(v).dump();
        },
        f);
}

std::string csv_field(const Field& f) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>)
                return format_double(v);
            else if constexpr (std::is_same_v<T, std::int64_t>)
                return std::to_string(v);
            else if constexpr (std::is_same_v<T, bool>)
                return v ? "true" : "false";
            else {
                if (v.find_first_of(",\"\n") == std::string::npos) return v;
                std::string q = "\"";
                for (char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
                return q + "\"";
            }
        },
        f);
}

class Emitter {
public:
    explicit Emitter(const RunConfig& cfg) : cfg_(cfg) {
        if (!cfg.output.empty()) {
            file_.open(cfg.output);
            if (!file_) throw std::invalid_argument("cannot open output file " + cfg.output);
        }
    }

    void emit(const Record& rec) {
        std::ostream& os = file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout;
        if (cfg_.format == "csv") {
            if (!header_done_) {
                for (std::size_t i = 0; i < rec.size(); ++i) os << (i ? "," : "") << rec[i].first;
                os << '\n';
                header_done_ = true;
            }
            for (std::size_t i = 0; i < rec.size(); ++i) os << (i ? "," : "") << csv_field(rec[i].second);
            os << '\n';
        } else {
            os << '{';
            for (std::size_t i = 0; i < rec.size(); ++i)
                os << (i ? "," : "") << json(rec[i].first).dump() << ':' << json_field(rec[i].second);
            os << "}\n";
        }
        os.flush();
    }

    void add_time(Record& rec, double seconds) const {
        if (cfg_.timing) rec.emplace_back("time", seconds);
    }

private:
    const RunConfig& cfg_;
    std::ofstream file_;
    bool header_done_ = false;
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::vector<double> split_numbers(const std::string& text, std::size_t count, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != item.size()) throw std::invalid_argument("malformed " + what + ": " + text);
        out.push_back(v);
    }
    if (out.size() != count) throw std::invalid_argument(what + " needs " + std::to_string(count) + " comma-separated values");
    return out;
}

Point parse_point(const std::string& text) {
    auto v = split_numbers(text, 3, "point");
    if (!(v[2] > 0.0)) throw std::invalid_argument("point must have r > 0: " + text);
    return {{v[0], v[1]}, v[2]};
}

AlgInt parse_integer_pair(const std::string& text, const std::string& what) {
    auto v = split_numbers(text, 2, what);
    for (double x : v)
        if (x != std::floor(x) || std::abs(x) > 1e9) throw std::invalid_argument(what + " needs integer coordinates");
    return {static_cast<std::int64_t>(v[0]), static_cast<std::int64_t>(v[1])};
}

std::vector<PointMass> load_masses(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open masses file " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("masses file is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_array() || doc.empty()) throw std::invalid_argument("masses file must hold a non-empty array");
    std::vector<PointMass> out;
    for (const auto& m : doc) {
        for (const char* key : {"x", "y", "r", "c"})
            if (!m.contains(key) || !m[key].is_number())
                throw std::invalid_argument(std::string("mass entry lacks numeric field ") + key);
        out.push_back({{{m["x"].get<double>(), m["y"].get<double>()}, m["r"].get<double>()}, m["c"].get<double>()});
    }
    double sum = 0.0, scale = 0.0;
    for (const auto& m : out) {
        sum += m.c;
        scale += std::abs(m.c);
    }
    if (std::abs(sum) > 1e-12 * std::max(1.0, scale))
        throw std::invalid_argument("mass weights must sum to zero for a class-A function (sum = " + format_double(sum) + ")");
    return out;
}

// Flat JSON config. Keys already given on the command line are left alone.
void apply_config(const std::string& path, RunConfig& cfg, const std::map<std::string, CLI::Option*>& flags) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw std::invalid_argument("config file must hold a flat JSON object");

    using Setter = std::function<void(const json&)>;
    auto num = [](auto& field) {
        return Setter([&field](const json& v) {
            if (!v.is_number()) throw std::invalid_argument("config value must be a number");
            field = v.get<std::decay_t<decltype(field)>>();
        });
    };
    auto str = [](std::string& field) {
        return Setter([&field](const json& v) {
            if (!v.is_string()) throw std::invalid_argument("config value must be a string");
            field = v.get<std::string>();
        });
    };
    std::map<std::string, Setter> setters{
        {"dk", num(cfg.dk)},
        {"threads", num(cfg.threads)},
        {"format", str(cfg.format)},
        {"output", str(cfg.output)},
        {"timing", Setter([&cfg](const json& v) {
             if (!v.is_boolean()) throw std::invalid_argument("config value must be a boolean");
             cfg.timing = v.get<bool>();
         })},
        {"s", num(cfg.series.s)},
        {"C_max", num(cfg.series.coset_C_max)},
        {"L_max", num(cfg.series.lattice_L_max)},
        {"M_max", num(cfg.series.fourier_M_max)},
        {"tol", num(cfg.series.tol)},
        {"C_max_kloosterman", num(cfg.C_max_kloosterman)},
        {"N", num(cfg.N)},
        {"r_max", num(cfg.r_max)},
        {"delta", num(cfg.delta)},
        {"seed", num(cfg.seed)},
        {"rel_tol", num(cfg.rel_tol)},
        {"masses", str(cfg.masses)},
    };
    for (const auto& [key, value] : doc.items()) {
        auto it = setters.find(key);
        if (it == setters.end()) throw std::invalid_argument("unknown config key: " + key);
        auto flag = flags.find(key);
        if (flag != flags.end() && flag->second && flag->second->count() > 0) continue;
        try {
            it->second(value);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(std::string(e.what()) + " (key " + key + ")");
        }
    }
}

void validate(const RunConfig& cfg) {
    if (cfg.format != "json" && cfg.format != "csv") throw std::invalid_argument("format must be json or csv");
    if (cfg.threads < 0) throw std::invalid_argument("threads must be >= 0");
}

int cmd_field_info(const RunConfig& cfg, Emitter& out) {
    Stopwatch sw;
    FieldContext ctx = make_field(cfg.dk);
    Record rec{{"d_K", std::int64_t{ctx.d_K}},
               {"omega_re", ctx.omega.real()},
               {"omega_im", ctx.omega.imag()},
               {"units", std::int64_t{ctx.unit_count()}},
               {"class_number", std::int64_t{ctx.h_K}},
               {"covol", ctx.covol},
               {"zeta_K2", dedekind_zeta(ctx, 2.0)},
               {"vol", volume(ctx)}};
    out.add_time(rec, sw.seconds());
    out.emit(rec);
    return 0;
}

struct EvalArgs {
    std::string kind;
    std::string route = "direct";
    std::vector<std::string> P;
    std::string Q;
    std::string nu = "1,0";
};

int cmd_eval(const RunConfig& cfg, const EvalArgs& args, Emitter& out) {
    FieldContext ctx = make_field(cfg.dk);
    cfg.series.validate();
    if (args.P.empty()) throw std::invalid_argument("eval needs at least one --P");
    bool direct = args.route == "direct";
    if (direct && !(cfg.series.s > 1.0)) throw std::invalid_argument("direct route requires s > 1");
    std::vector<Point> pts;
    for (const auto& p : args.P) pts.push_back(parse_point(p));
    Point Q{};
    if (args.kind == "green") {
        if (args.Q.empty()) throw std::invalid_argument("green needs --Q");
        Q = parse_point(args.Q);
    }
    DualPoint nu{parse_integer_pair(args.nu, "nu")};
    if (args.kind == "niebur" && nu.is_zero()) throw std::invalid_argument("nu must be nonzero");

    for (const Point& P : pts) {
        Stopwatch sw;
        EvalResult r;
        if (args.kind == "eisenstein")
            r = direct ? eisenstein_direct(ctx, P, cfg.series) : eisenstein_fourier(ctx, P, cfg.series);
        else if (args.kind == "niebur")
            r = direct ? niebur_direct(ctx, nu, P, cfg.series) : niebur_fourier(ctx, nu, P, cfg.series);
        else
            r = direct ? green_direct(ctx, P, Q, cfg.series) : green_fourier(ctx, P, Q, cfg.series);
        Record rec{{"kind", args.kind},       {"route", args.route},    {"s", cfg.series.s},
                   {"x", P.z.real()},         {"y", P.z.imag()},        {"r", P.r},
                   {"value", r.value.real()}, {"value_im", r.value.imag()}, {"tail", r.tail_estimate},
                   {"terms", std::int64_t{r.terms_used}}, {"heuristic", r.heuristic}};
        out.add_time(rec, sw.seconds());
        out.emit(rec);
    }
    return 0;
}

struct KloostermanArgs {
    std::string nu = "1,0";
    std::string mu = "1,0";
};

int cmd_kloosterman(const RunConfig& cfg, const KloostermanArgs& args, Emitter& out) {
    FieldContext ctx = make_field(cfg.dk);
    if (!(cfg.C_max_kloosterman >= 1.0)) throw std::invalid_argument("C_max must be >= 1");
    DualPoint nu{parse_integer_pair(args.nu, "nu")}, mu{parse_integer_pair(args.mu, "mu")};
    for (const AlgInt& c : moduli_bounded(ctx, cfg.C_max_kloosterman)) {
        Stopwatch sw;
        KloostermanValue k = kloosterman_S(ctx, nu, mu, c);
        Record rec{{"c_x", c.x},
                   {"c_y", c.y},
                   {"norm", ctx.norm(c)},
                   {"value", k.value.real()},
                   {"value_im", k.value.imag()},
                   {"abs", std::abs(k.value)},
                   {"bound_ok", std::abs(k.value) <= static_cast<double>(ctx.norm(c)) + 1e-9}};
        out.add_time(rec, sw.seconds());
        out.emit(rec);
    }
    return 0;
}

std::string params_text(const IdentityParams& p) {
    std::string s;
    for (const auto& [k, v] : p) s += (s.empty() ? "" : ";") + k + "=" + format_double(v);
    return s;
}

int cmd_identities(const RunConfig&, const std::string& filter, Emitter& out) {
    bool known = filter.empty();
    for (const auto& id : identity_ids()) known = known || id.rfind(filter, 0) == 0;
    if (!known) throw std::invalid_argument("no identity matches filter " + filter);
    bool all = true;
    for (const auto& id : identity_ids()) {
        if (!filter.empty() && id.rfind(filter, 0) != 0) continue;
        for (const auto& params : default_identity_grid(id)) {
            Stopwatch sw;
            IdentityReport r = verify_identity(id, params);
            all = all && r.pass;
            Record rec{{"identity", r.identity_id},
                       {"params", params_text(r.params)},
                       {"lhs_re", r.lhs.real()},
                       {"lhs_im", r.lhs.imag()},
                       {"rhs_re", r.rhs.real()},
                       {"rhs_im", r.rhs.imag()},
                       {"value", r.rel_error},
                       {"tail", r.quadrature_error_estimate},
                       {"tolerance", r.tolerance},
                       {"pass", r.pass}};
            out.add_time(rec, sw.seconds());
            out.emit(rec);
        }
    }
    return all ? 0 : 1;
}

int cmd_cross_check(const RunConfig& cfg, Emitter& out) {
    FieldContext ctx = make_field(cfg.dk);
    cfg.series.validate();
    bool all = true;
    auto report = [&](const std::string& kind, double s, const std::string& where, const EvalResult& d,
                      const EvalResult& f, double rel_tol, double seconds) {
        double diff = std::abs(d.value - f.value);
        double rel = diff / std::abs(f.value);
        bool pass = rel <= rel_tol;
        all = all && pass;
        Record rec{{"kind", kind},
                   {"s", s},
                   {"point", where},
                   {"direct", d.value.real()},
                   {"fourier", f.value.real()},
                   {"value", rel},
                   {"tail", d.tail_estimate + f.tail_estimate},
                   {"terms", std::int64_t{d.terms_used + f.terms_used}},
                   {"tolerance", rel_tol},
                   {"pass", pass}};
        out.add_time(rec, seconds);
        out.emit(rec);
    };
    SeriesParams p = cfg.series;
    for (const Point& P : {Point{{0.1, 0.2}, 1.2}, Point{{-0.3, 0.4}, 0.9}}) {
        Stopwatch sw;
        p.s = 2.0;
        auto d = eisenstein_direct(ctx, P, p), f = eisenstein_fourier(ctx, P, p);
        report("eisenstein", p.s, "P=" + format_double(P.z.real()) + "," + format_double(P.z.imag()) + "," +
                                      format_double(P.r),
               d, f, 1e-6, sw.seconds());
    }
    for (const DualPoint& nu : {DualPoint{{1, 0}}, DualPoint{{1, 1}}}) {
        for (const Point& P : {Point{{0.1, 0.2}, 2.0}, Point{{-0.2, 0.3}, 1.1}}) {
            Stopwatch sw;
            p.s = 1.6;
            auto d = niebur_direct(ctx, nu, P, p), f = niebur_fourier(ctx, nu, P, p);
            report("niebur", p.s,
                   "nu=" + std::to_string(nu.m.x) + "," + std::to_string(nu.m.y) + " P=" + format_double(P.z.real()) +
                       "," + format_double(P.z.imag()) + "," + format_double(P.r),
                   d, f, 1e-3, sw.seconds());
        }
    }
    const std::pair<Point, Point> pairs[] = {{{{0.1, 0.3}, 4.0}, {{0.05, 0.1}, 1.1}},
                                             {{{-0.2, 0.1}, 2.5}, {{0.3, -0.2}, 1.5}},
                                             {{{0.4, 0.45}, 3.0}, {{-0.1, 0.2}, 0.8}}};
    for (double s : {1.5, 2.0}) {
        for (const auto& [P, Q] : pairs) {
            Stopwatch sw;
            p.s = s;
            auto d = green_direct(ctx, P, Q, p), f = green_fourier(ctx, P, Q, p);
            report("green", s,
                   "P=" + format_double(P.z.real()) + "," + format_double(P.z.imag()) + "," + format_double(P.r) +
                       " Q=" + format_double(Q.z.real()) + "," + format_double(Q.z.imag()) + "," + format_double(Q.r),
                   d, f, 1e-3, sw.seconds());
        }
    }
    return all ? 0 : 1;
}

int cmd_jensen(const RunConfig& cfg, Emitter& out) {
    FieldContext ctx = make_field(cfg.dk);
    if (ctx.d_K != -4) throw std::invalid_argument("jensen-verify supports d_K = -4 only");
    std::vector<PointMass> masses = cfg.masses.empty() ? default_masses() : load_masses(cfg.masses);
    TheoremParams tp;
    tp.mc.N = cfg.N;
    tp.mc.r_max = cfg.r_max;
    tp.mc.seed = cfg.seed;
    tp.mc.threads = cfg.threads;
    tp.delta = cfg.delta;
    tp.rel_tol = cfg.rel_tol;
    Stopwatch sw;
    TheoremReport r = verify_main_theorem(ctx, masses, tp);
    Record rec{{"seed", static_cast<std::int64_t>(cfg.seed)},
               {"samples", r.samples},
               {"value", r.lhs_mc},
               {"stderr", r.lhs_stderr},
               {"rhs", r.rhs},
               {"tail", r.cusp_tail_bound},
               {"exclusion_correction", r.exclusion_correction},
               {"tolerance", r.tolerance},
               {"pass", r.pass}};
    out.add_time(rec, sw.seconds());
    out.emit(rec);
    return r.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Automorphic series on hyperbolic 3-space for Euclidean imaginary quadratic fields"};
    app.require_subcommand(1);
    app.fallthrough();
    RunConfig cfg;
    std::string config_path;
    std::map<std::string, CLI::Option*> flags;

    flags["dk"] = app.add_option("--dk", cfg.dk, "field discriminant")->capture_default_str();
    flags["threads"] = app.add_option("--threads", cfg.threads, "worker threads (0: BIANCHI_THREADS or all cores)");
    flags["format"] = app.add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    flags["output"] = app.add_option("--output,-o", cfg.output, "write records to this file");
    flags["timing"] = app.add_flag("!--no-time", cfg.timing, "omit the time field for byte-identical output");
    app.add_option("--config", config_path, "flat JSON config; command-line flags take precedence");

    auto* field_info = app.add_subcommand("field-info", "field constants and covolume");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "evaluate an automorphic series");
    eval->add_option("kind", eval_args.kind, "eisenstein, niebur or green")
        ->required()
        ->check(CLI::IsMember({"eisenstein", "niebur", "green"}));
    eval->add_option("--route", eval_args.route, "direct or fourier")->check(CLI::IsMember({"direct", "fourier"}));
    eval->add_option("--P", eval_args.P, "evaluation point x,y,r (repeatable)");
    eval->add_option("--Q", eval_args.Q, "source point x,y,r (green)");
    eval->add_option("--nu", eval_args.nu, "frequency as integer coordinates a,b (niebur)");

    KloostermanArgs kl_args;
    auto* kloost = app.add_subcommand("kloosterman", "table of Kloosterman sums S(nu, mu, c)");
    kloost->add_option("--nu", kl_args.nu, "integer coordinates a,b");
    kloost->add_option("--mu", kl_args.mu, "integer coordinates a,b");
    flags["C_max_kloosterman"] = kloost->add_option("--C", cfg.C_max_kloosterman, "largest |c|");

    std::string filter;
    auto* idents = app.add_subcommand("identities", "special-function identity suite");
    idents->add_option("--filter", filter, "run only ids with this prefix");

    auto* cross = app.add_subcommand("cross-check", "direct against Fourier routes at fixed configurations");

    auto* jensen = app.add_subcommand("jensen-verify", "Monte Carlo check of the mean-value formula");
    flags["N"] = jensen->add_option("--N", cfg.N, "Monte Carlo proposals");
    flags["seed"] = jensen->add_option("--seed", cfg.seed, "RNG seed");
    flags["r_max"] = jensen->add_option("--r-max", cfg.r_max, "cusp truncation height");
    flags["delta"] = jensen->add_option("--delta", cfg.delta, "exclusion radius around the masses");
    flags["rel_tol"] = jensen->add_option("--rel-tol", cfg.rel_tol, "relative tolerance");
    flags["masses"] = jensen->add_option("--masses", cfg.masses, "JSON array of {x, y, r, c}");

    std::map<CLI::App*, std::map<std::string, CLI::Option*>> series_flags;
    for (auto* sub : {eval, cross}) {
        auto& f = series_flags[sub];
        f["s"] = sub->add_option("--s", cfg.series.s, "spectral parameter");
        f["C_max"] = sub->add_option("--C-max", cfg.series.coset_C_max, "explicit coset moduli");
        f["L_max"] = sub->add_option("--L-max", cfg.series.lattice_L_max, "lattice cutoff");
        f["M_max"] = sub->add_option("--M-max", cfg.series.fourier_M_max, "dual-lattice radius (0: auto)");
        f["tol"] = sub->add_option("--tol", cfg.series.tol, "target tolerance");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    for (auto* sub : {eval, cross})
        if (sub->parsed()) flags.insert(series_flags[sub].begin(), series_flags[sub].end());

    try {
        if (!config_path.empty()) apply_config(config_path, cfg, flags);
        validate(cfg);
        Emitter out(cfg);
        if (field_info->parsed()) return cmd_field_info(cfg, out);
        if (eval->parsed()) return cmd_eval(cfg, eval_args, out);
        if (kloost->parsed()) return cmd_kloosterman(cfg, kl_args, out);
        if (idents->parsed()) return cmd_identities(cfg, filter, out);
        if (cross->parsed()) return cmd_cross_check(cfg, out);
        if (jensen->parsed()) return cmd_jensen(cfg, out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
