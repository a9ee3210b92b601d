#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmtail/errors.hpp"
#include "mmtail/model_io.hpp"
#include "mmtail/simulator.hpp"
#include "mmtail/tail.hpp"
#include "mmtail/tail_fit.hpp"
#include "mmtail/wealth.hpp"

namespace mmtail::cli {

namespace {

using nlohmann::json;

struct Options {
    std::string spec;
    std::string out;
    std::int64_t paths = 100000;
    std::uint64_t seed = 0;
    std::optional<double> horizon;
    std::string window = "0.95,0.9995";
    std::string var = "s";
    double from = -2.0;
    double to = 2.0;
    int points = 401;
    std::optional<double> r;
    int threads = 0;
};

constexpr double kRootTol = 1e-10;
constexpr double kSlopeSigmas = 3.0;
constexpr double kMgfSigmas = 4.0;
constexpr double kBandSigmas = 3.0;

json num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

json num(const std::optional<double>& x) { return x ? num(*x) : json(nullptr); }

json vec(const RealVector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
    return a;
}

json provenance(const std::string& hash, std::optional<std::uint64_t> seed) {
    json p{{"spec_hash", hash}, {"tool_version", kToolVersion}};
    p["seed"] = seed ? json(*seed) : json(nullptr);
    return p;
}

bool ends_with_csv(const std::string& path) {
    if (path.size() < 4) return false;
    std::string ext = path.substr(path.size() - 4);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".csv";
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp" + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ValidationError("cannot write '" + path + "'");
        f << content;
        f.flush();
        if (!f) throw ValidationError("failed writing '" + path + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ValidationError("cannot move output into place at '" + path + "'");
    }
}

std::string csv_value(const json& v) {
    if (v.is_number_float()) {
        std::ostringstream os;
        os.precision(17);
        os << v.get<double>();
        return os.str();
    }
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

void flatten(const json& j, const std::string& prefix, std::ostringstream& os) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), os);
    } else if (j.is_array() && !j.empty() && (j[0].is_object() || j[0].is_array())) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), os);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) os << prefix << '.' << i << ',' << csv_value(j[i]) << '\n';
    } else {
        os << prefix << ',' << csv_value(j) << '\n';
    }
}

std::string report_csv(const json& report) {
    std::ostringstream os;
    os << "field,value\n";
    flatten(report, "", os);
    return os.str();
}

// JSON to `out` by default; to --out as JSON, or as CSV for a *.csv path.
void emit(const Options& o, const json& report, std::ostream& out, const std::string* csv = nullptr) {
    if (o.out.empty()) {
        out << report.dump(2) << '\n';
        return;
    }
    if (ends_with_csv(o.out))
        write_atomic(o.out, csv ? *csv : report_csv(report));
    else
        write_atomic(o.out, report.dump(2) + "\n");
}

std::pair<double, double> parse_window(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw ValidationError("--window expects QLO,QHI");
    try {
        std::size_t used = 0;
        const double lo = std::stod(s.substr(0, comma), &used);
        const double hi = std::stod(s.substr(comma + 1));
        if (!(0.0 <= lo && lo < hi && hi <= 1.0)) throw ValidationError("--window needs 0 <= QLO < QHI <= 1");
        return {lo, hi};
    } catch (const std::invalid_argument&) {
        throw ValidationError("--window expects two numbers");
    } catch (const std::out_of_range&) {
        throw ValidationError("--window expects two numbers");
    }
}

json domain_json(const DomainInterval& d) {
    return {{"lo", num(d.lo)}, {"hi", num(d.hi)}, {"lo_closed", d.lo_closed}, {"hi_closed", d.hi_closed}};
}

json rates_json(const DecayRates& r) {
    json alpha{{"value", num(r.alpha)},
               {"status", to_string(r.alpha_status)},
               {"residual", r.alpha ? num(r.alpha_residual) : json(nullptr)},
               {"tolerance", kRootTol}};
    if (r.zeta_at_hi) alpha["zeta_at_endpoint"] = num(*r.zeta_at_hi);
    json beta{{"value", num(r.beta)},
              {"status", to_string(r.beta_status)},
              {"residual", r.beta ? num(r.beta_residual) : json(nullptr)},
              {"tolerance", kRootTol}};
    if (r.zeta_at_lo) beta["zeta_at_endpoint"] = num(*r.zeta_at_lo);
    return {{"alpha", alpha}, {"beta", beta}, {"zeta_at_zero", num(r.zeta_at_zero)}, {"domain", domain_json(r.domain)}};
}

json lattice_json(const LatticeInfo& l) {
    return {{"status", to_string(l.status)}, {"non_lattice", l.non_lattice}, {"span", num(l.span)}, {"reason", l.reason}};
}

json bounds_json(const NakagawaBounds& b) {
    return {{"C", num(b.C)},         {"B", num(b.B)},         {"rate", num(b.rate)},
            {"lower", num(b.lower)}, {"upper", num(b.upper)}, {"exact_limit", num(b.exact_limit)}};
}

// Residue and bounds for one tail; refusals are recorded with their reason.
json tail_json(const ModelSpec& spec, const DecayRates& r, const LatticeInfo& lattice, TailSide side,
               std::optional<NakagawaBounds>* bounds_out = nullptr) {
    const bool upper = side == TailSide::Upper;
    const RootStatus status = upper ? r.alpha_status : r.beta_status;
    json t{{"side", to_string(side)}};
    if (status != RootStatus::FoundInterior) {
        t["refused"] = status == RootStatus::RootAtBoundary ? "root on the boundary of I; residue and bounds need an interior pole"
                                                            : "no pole: " + to_string(status);
        return t;
    }
    const double s0 = upper ? *r.alpha : -*r.beta;
    PoleData pole;
    try {
        pole = pole_residue(spec, s0);
    } catch (const Error& e) {
        t["refused"] = e.what();
        return t;
    }
    t["pole"] = num(pole.location);
    t["c"] = num(pole.c);
    t["mgf_residue"] = num(pole.mgf_residue);
    t["simple"] = pole.simple;
    try {
        const auto b = nakagawa_bounds(pole, lattice, side);
        t["bounds"] = bounds_json(b);
        if (bounds_out) *bounds_out = b;
    } catch (const Error& e) {
        t["bounds_refused"] = e.what();
    }
    return t;
}

int cmd_analyze(const Options& o, std::ostream& out) {
    const ModelSpec spec = load_spec(o.spec);
    require_valid(spec);
    const DecayRates r = find_decay_rates(spec);
    const LatticeInfo lattice = lattice_info(spec);
    json rep{{"command", "analyze"}, {"status", "ok"}, {"provenance", provenance(spec_hash(spec), std::nullopt)}};
    rep["rates"] = rates_json(r);
    rep["lattice"] = lattice_json(lattice);
    rep["upper_tail"] = tail_json(spec, r, lattice, TailSide::Upper);
    rep["lower_tail"] = tail_json(spec, r, lattice, TailSide::Lower);
    emit(o, rep, out);
    return kOk;
}

SampleSet run_simulation(const Options& o, const ModelSpec& spec) {
    if (o.paths < 1) throw ValidationError("--paths must be at least 1");
    if (o.horizon && !(*o.horizon > 0.0)) throw ValidationError("--horizon must be positive");
    SimConfig cfg;
    cfg.n_paths = o.paths;
    cfg.seed = o.seed;
    cfg.horizon_cap = o.horizon;
    cfg.threads = o.threads;
    return simulate_stopped(spec, cfg);
}

json sample_summary(const SampleSet& s) {
    json j{{"n_paths", s.n_paths},
           {"censored", s.censored},
           {"uncensored", static_cast<std::int64_t>(s.values.size())},
           {"horizon", num(s.horizon)}};
    if (s.values.empty()) return j;
    const double n = static_cast<double>(s.values.size());
    double mean = 0.0;
    for (double v : s.values) mean += v / n;
    double ss = 0.0;
    for (double v : s.values) ss += (v - mean) * (v - mean);
    const double var = s.values.size() > 1 ? ss / (n - 1) : 0.0;
    j["mean"] = num(mean);
    j["mean_std_error"] = num(std::sqrt(var / n));
    j["variance"] = num(var);
    j["min"] = num(*std::min_element(s.values.begin(), s.values.end()));
    j["max"] = num(*std::max_element(s.values.begin(), s.values.end()));
    return j;
}

int cmd_simulate(const Options& o, std::ostream& out) {
    const ModelSpec spec = load_spec(o.spec);
    require_valid(spec);
    SampleSet s = run_simulation(o, spec);
    s.spec_hash = spec_hash(spec);
    json rep{{"command", "simulate"}, {"status", "ok"}, {"provenance", provenance(s.spec_hash, o.seed)}};
    rep["samples"] = sample_summary(s);
    if (!o.out.empty() && !ends_with_csv(o.out)) {
        json values = json::array();
        for (double v : s.values) values.push_back(num(v));
        rep["values"] = values;
    }
    std::ostringstream csv;
    write_samples_csv(s, csv);
    const std::string text = csv.str();
    emit(o, rep, out, &text);
    return kOk;
}

json comparison(const std::string& name, double analytic, double empirical, double se, double sigmas) {
    const double z = se > 0.0 ? (empirical - analytic) / se : (empirical == analytic ? 0.0 : INFINITY);
    return {{"name", name},       {"analytic", num(analytic)}, {"empirical", num(empirical)}, {"std_error", num(se)},
            {"z", num(z)},        {"threshold_sigmas", sigmas}, {"pass", std::abs(z) <= sigmas}};
}

int cmd_verify(const Options& o, std::ostream& out) {
    const ModelSpec spec = load_spec(o.spec);
    require_valid(spec);
    const auto window = parse_window(o.window);
    const DecayRates r = find_decay_rates(spec);
    const LatticeInfo lattice = lattice_info(spec);
    SampleSet s = run_simulation(o, spec);
    s.spec_hash = spec_hash(spec);

    json checks = json::array();
    json refused = json::array();
    auto slope_check = [&](TailSide side, const std::optional<double>& rate, const char* name) {
        if (!rate) {
            refused.push_back({{"name", name}, {"reason", "rate not found"}});
            return;
        }
        try {
            const TailFit fit = fit_tail(s, side, window);
            json c = comparison(name, *rate, -fit.slope, fit.std_error, kSlopeSigmas);
            c["n_window"] = fit.n_window;
            c["n_points"] = fit.n_points;
            c["window"] = {fit.window.first, fit.window.second};
            c["ols_std_error"] = num(fit.ols_stderr);
            checks.push_back(c);
        } catch (const InsufficientTail& e) {
            refused.push_back({{"name", name}, {"reason", e.what()}});
        }
    };
    slope_check(TailSide::Upper, r.alpha, "upper_tail_rate");
    slope_check(TailSide::Lower, r.beta, "lower_tail_rate");

    // MGF at interior points of I-
    const double hi = r.alpha ? *r.alpha : std::min(r.domain.hi, 2.0);
    const double lo = r.beta ? -*r.beta : std::max(r.domain.lo, -2.0);
    if (!s.values.empty()) {
        for (double f : {-0.4, -0.2, 0.2, 0.4}) {
            const double sv = f < 0 ? -f * lo : f * hi;
            if (sv == 0.0) continue;
            const MgfEstimate e = empirical_mgf(s, sv, spec);
            std::ostringstream nm;
            nm.precision(6);
            nm << "mgf(" << sv << ")";
            json c = comparison(nm.str(), mgf_stopped(spec, sv), e.mean, e.std_error, kMgfSigmas);
            c["s"] = num(sv);
            if (e.flagged) c["flag"] = e.note;
            checks.push_back(c);
        }
    }

    // e^{alpha w} Pr(W_T > w) against the Nakagawa band
    std::optional<NakagawaBounds> bounds;
    const json upper = tail_json(spec, r, lattice, TailSide::Upper, &bounds);
    json band = json::array();
    if (bounds && s.values.size() >= 1000) {
        std::vector<double> sorted = s.values;
        std::sort(sorted.begin(), sorted.end());
        for (double q : {0.99, 0.999}) {
            const double w = sorted[static_cast<std::size_t>(q * static_cast<double>(sorted.size()))];
            if (!(w > 0.0)) continue;
            for (double w_at : {w, std::floor(w) + 0.5, std::floor(w) + 1.0 - 1e-6}) {
                const Proportion p = empirical_survival(s, w_at);
                const double scale = std::exp(bounds->rate * w_at);
                const double v = scale * p.p;
                const double se = scale * p.std_error;
                const bool pass = v >= bounds->lower - kBandSigmas * se && v <= bounds->upper + kBandSigmas * se;
                band.push_back({{"w", num(w_at)},
                                {"scaled_survival", num(v)},
                                {"std_error", num(se)},
                                {"lower", num(bounds->lower)},
                                {"upper", num(bounds->upper)},
                                {"threshold_sigmas", kBandSigmas},
                                {"pass", pass}});
            }
        }
    }

    bool all = true;
    for (const auto& c : checks) all = all && c["pass"].get<bool>();
    for (const auto& c : band) all = all && c["pass"].get<bool>();
    json rep{{"command", "verify"}, {"status", "ok"}, {"provenance", provenance(s.spec_hash, o.seed)}};
    rep["rates"] = rates_json(r);
    rep["lattice"] = lattice_json(lattice);
    rep["upper_tail"] = upper;
    rep["samples"] = sample_summary(s);
    rep["checks"] = checks;
    rep["band"] = band;
    rep["refused"] = refused;
    rep["all_pass"] = all;
    emit(o, rep, out);
    return kOk;
}

int cmd_wealth(const Options& o, std::ostream& out) {
    const WealthModel model = load_wealth(o.spec);
    validate_wealth_model(model);
    json rep{{"command", "wealth"}, {"status", "ok"}, {"provenance", provenance(wealth_hash(model), std::nullopt)}};
    rep["rho"] = num(model.rho());
    const RealVector varpi = stationary_distribution(model.generator.entries);
    rep["stationary"] = vec(varpi);
    auto b_json = [&](const BSolution& b) {
        return json{{"r", num(b.r)},
                    {"b", vec(b.b)},
                    {"residual", num(b.residual)},
                    {"residual_tolerance", 1e-12},
                    {"iterations", b.iterations},
                    {"newton_steps", b.newton_steps},
                    {"k", num(b.k)},
                    {"lower_bound", num(b.lower_bound)},
                    {"upper_bound", num(b.upper_bound)},
                    {"budget_check", num(budget_spectral_check(model, b))},
                    {"budget_tolerance", 1e-8}};
    };
    if (o.r) {
        const BSolution b = solve_b(model, *o.r);
        rep["mode"] = "partial";
        rep["solution"] = b_json(b);
        rep["excess_supply"] = num(varpi.dot(model.y - b.b));
        rep["slopes"] = vec(model.y - b.b);
        try {
            rep["rates"] = rates_json(find_decay_rates(wealth_spec(model, b.b)));
        } catch (const DomainDegenerate& e) {
            rep["rates_refused"] = e.what();
        }
    } else {
        const Equilibrium eq = solve_equilibrium(model);
        rep["mode"] = "equilibrium";
        rep["r_star"] = num(eq.r_star);
        rep["degenerate"] = eq.degenerate;
        rep["solution"] = b_json(eq.b);
        rep["slopes"] = vec(eq.slopes);
        rep["g_residual"] = num(eq.g_residual);
        rep["g_tolerance"] = 1e-10;
        rep["rates"] = rates_json(eq.rates);
        json log = json::array();
        for (const auto& [r, g] : eq.bracket_log) log.push_back({num(r), num(g)});
        rep["bracket_log"] = log;
    }
    emit(o, rep, out);
    return kOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
    if (o.points < 1) throw ValidationError("--points must be at least 1");
    std::vector<std::pair<double, double>> pts;
    std::string hash;
    std::string x_name;
    std::string y_name;
    if (o.var == "s") {
        const ModelSpec spec = load_spec(o.spec);
        require_valid(spec);
        pts = sweep_zeta(spec, o.from, o.to, o.points);
        hash = spec_hash(spec);
        x_name = "s";
        y_name = "zeta";
    } else {
        const WealthModel model = load_wealth(o.spec);
        validate_wealth_model(model);
        pts = sweep_excess_supply(model, o.from, o.to, o.points);
        hash = wealth_hash(model);
        x_name = "r";
        y_name = "g";
    }
    std::ostringstream csv;
    csv.precision(17);
    csv << x_name << ',' << y_name << '\n';
    for (const auto& [x, y] : pts) csv << x << ',' << y << '\n';
    json rep{{"command", "sweep"}, {"status", "ok"}, {"provenance", provenance(hash, std::nullopt)}};
    rep["var"] = o.var;
    json arr = json::array();
    for (const auto& [x, y] : pts) arr.push_back({{x_name, num(x)}, {y_name, num(y)}});
    rep["points"] = arr;
    const std::string text = csv.str();
    emit(o, rep, out, &text);
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Tail analysis of Markov-modulated Levy processes with state-dependent killing", "mmtail"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1, 1);

    auto add_spec = [&](CLI::App* c, const char* what) {
        c->add_option("--spec", o.spec, what)->required();
        c->add_option("--out", o.out, "output file; *.csv selects CSV");
    };
    auto add_sim = [&](CLI::App* c) {
        c->add_option("--paths", o.paths, "number of paths")->capture_default_str();
        c->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
        c->add_option("--horizon", o.horizon, "censoring horizon");
        c->add_option("--threads", o.threads, "worker threads, 0 for all cores")->capture_default_str();
    };

    auto* analyze = app.add_subcommand("analyze", "decay rates, residues and tail bounds");
    add_spec(analyze, "model spec (JSON)");
    auto* simulate = app.add_subcommand("simulate", "simulate W_T");
    add_spec(simulate, "model spec (JSON)");
    add_sim(simulate);
    auto* verify = app.add_subcommand("verify", "compare analytic results with simulation");
    add_spec(verify, "model spec (JSON)");
    add_sim(verify);
    verify->add_option("--window", o.window, "tail-fit quantile window QLO,QHI")->capture_default_str();
    auto* wealth = app.add_subcommand("wealth", "solve the wealth model");
    add_spec(wealth, "wealth model (JSON)");
    wealth->add_option("--r", o.r, "interest rate; omit to solve for the equilibrium");
    auto* sweep = app.add_subcommand("sweep", "evaluate zeta(A(s)) or g(r) on a grid");
    add_spec(sweep, "model spec or wealth model (JSON)");
    sweep->add_option("--var", o.var, "s or r")->check(CLI::IsMember({"s", "r"}))->capture_default_str();
    sweep->add_option("--from", o.from)->capture_default_str();
    sweep->add_option("--to", o.to)->capture_default_str();
    sweep->add_option("--points", o.points)->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return kValidation;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(o, out);
        if (simulate->parsed()) return cmd_simulate(o, out);
        if (verify->parsed()) return cmd_verify(o, out);
        if (wealth->parsed()) return cmd_wealth(o, out);
        return cmd_sweep(o, out);
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const Error& e) {
        err << "invalid input: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        err << "unexpected error: " << e.what() << '\n';
        return kUnexpected;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace mmtail::cli
