#include "mmtail/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "mmtail/errors.hpp"
#include "mmtail/model_io.hpp"
#include "mmtail/spectral.hpp"

namespace mmtail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// One path's random source. Normals can be negated for antithetic pairs.
class PathRng {
public:
    PathRng(std::uint64_t seed, bool negate) : eng_(seed), negate_(negate) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
    // in (0, 1]
    double uniform_open0() { return 1.0 - uniform(); }
    double exponential(double rate) {
        if (!(rate > 0.0)) return kInf;
        return -std::log(uniform_open0()) / rate;
    }
    double normal() {
        const double z = normal_(eng_);
        return negate_ ? -z : z;
    }
    std::int64_t poisson(double mean) {
        if (!(mean > 0.0)) return 0;
        return std::poisson_distribution<std::int64_t>(mean)(eng_);
    }
    int categorical(const std::vector<double>& cumulative) {
        const double u = uniform() * cumulative.back();
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                         static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
    }

private:
    std::mt19937_64 eng_;
    std::normal_distribution<double> normal_;
    bool negate_;
};

struct AtomTable {
    std::vector<double> values;
    std::vector<double> cumulative;

    explicit AtomTable(const std::vector<Atom>& atoms) {
        double acc = 0.0;
        for (const auto& a : atoms) {
            acc += a.prob;
            values.push_back(a.value);
            cumulative.push_back(acc);
        }
    }
    double draw(PathRng& rng) const { return values[rng.categorical(cumulative)]; }
};

// Jump size with density proportional to x^{-2} e^{-x} on [1, inf): Pareto(1) proposal,
// accepted with probability e^{-(x-1)}.
double pareto_exp_jump(PathRng& rng) {
    while (true) {
        const double x = 1.0 / rng.uniform_open0();
        if (rng.uniform() < std::exp(-(x - 1.0))) return x;
    }
}

struct Prepared {
    const ModelSpec* spec = nullptr;
    int n = 0;
    std::vector<double> exit_rate;
    std::vector<std::vector<double>> next_cumulative;
    std::vector<bool> can_kill;
    std::vector<double> start_cumulative;
    std::vector<std::optional<AtomTable>> state_atoms;
    std::vector<std::vector<std::optional<AtomTable>>> jump_atoms;

    explicit Prepared(const ModelSpec& s) : spec(&s), n(s.n()) {
        const RealMatrix& pi = s.generator.entries;
        exit_rate.resize(n);
        next_cumulative.resize(n);
        std::vector<bool> killing(n);
        for (int i = 0; i < n; ++i) {
            exit_rate[i] = -pi(i, i);
            double acc = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j != i) acc += std::max(pi(i, j), 0.0);
                next_cumulative[i].push_back(acc);
            }
            killing[i] = s.phi(i) > 0.0;
        }
        can_kill = can_reach(pi, killing);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += s.varpi.size() == n ? s.varpi(i) : 0.0;
            start_cumulative.push_back(acc);
        }
        state_atoms.resize(n);
        for (int i = 0; i < n; ++i)
            if (const auto* cp = std::get_if<CompoundPoissonDiscrete>(&s.exponents[i])) state_atoms[i].emplace(cp->atoms);
        jump_atoms.assign(n, std::vector<std::optional<AtomTable>>(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (const auto* da = std::get_if<DiscreteAtoms>(&s.jumps[i][j])) jump_atoms[i][j].emplace(da->atoms);
    }

    double increment(int state, double dt, PathRng& rng) const {
        const LevyExponent& e = spec->exponents[state];
        if (const auto* b = std::get_if<BrownianDrift>(&e)) {
            return b->mu * dt + (b->sigma2 > 0.0 ? std::sqrt(b->sigma2 * dt) * rng.normal() : 0.0);
        }
        if (const auto* l = std::get_if<LinearDrift>(&e)) return l->mu * dt;
        if (const auto* p = std::get_if<PoissonJump>(&e)) return p->h * static_cast<double>(rng.poisson(p->gamma * dt));
        if (const auto* cp = std::get_if<CompoundPoissonDiscrete>(&e)) {
            const std::int64_t k = rng.poisson(cp->gamma * dt);
            double sum = 0.0;
            for (std::int64_t i = 0; i < k; ++i) sum += state_atoms[state]->draw(rng);
            return sum;
        }
        if (const auto* tp = std::get_if<TruncatedParetoExpJump>(&e)) {
            const std::int64_t k = rng.poisson(pareto_exp_total_rate(tp->c) * dt);
            double sum = 0.0;
            for (std::int64_t i = 0; i < k; ++i) sum += pareto_exp_jump(rng);
            return sum;
        }
        // Cauchy process with unit scale
        return dt * std::tan(std::numbers::pi * (rng.uniform() - 0.5));
    }

    double transition_jump(int from, int to, PathRng& rng) const {
        const JumpMgf& m = spec->jumps[from][to];
        if (const auto* p = std::get_if<DegeneratePoint>(&m)) return p->a;
        if (std::get_if<DiscreteAtoms>(&m)) return jump_atoms[from][to]->draw(rng);
        if (const auto* g = std::get_if<GaussianJump>(&m)) return g->mean + std::sqrt(g->variance) * rng.normal();
        return 0.0;
    }

    // zero-width slots (the diagonal, absent transitions) are never selected
    int next_state(int from, PathRng& rng) const { return rng.categorical(next_cumulative[from]); }
};

template <class Body>
void parallel_for(std::int64_t count, int threads, Body body) {
    int t = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    t = std::max(1, std::min<int>(t, static_cast<int>(std::max<std::int64_t>(1, count / 1024))));
    if (t == 1) {
        for (std::int64_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::int64_t chunk = (count + t - 1) / t;
    for (int k = 0; k < t; ++k) {
        const std::int64_t lo = k * chunk;
        const std::int64_t hi = std::min(count, lo + chunk);
        pool.emplace_back([lo, hi, &body] {
            for (std::int64_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

void check_shapes(const ModelSpec& spec) {
    const int n = spec.n();
    bool ok = n > 0 && spec.phi.size() == n && spec.generator.entries.rows() == n &&
              spec.generator.entries.cols() == n && static_cast<int>(spec.jumps.size()) == n;
    if (ok)
        for (const auto& row : spec.jumps) ok = ok && static_cast<int>(row.size()) == n;
    if (!ok) throw ValidationError("spec dimensions are inconsistent");
    const auto gen = check_generator(spec.generator.entries);
    if (!gen.empty()) throw ValidationError(gen.front());
}

}  // namespace

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

double default_horizon(const ModelSpec& spec) {
    double m = kInf;
    for (int i = 0; i < spec.phi.size(); ++i)
        if (spec.phi(i) > 0.0) m = std::min(m, spec.phi(i));
    return std::isinf(m) ? 50.0 : 50.0 / m;
}

SampleSet simulate_stopped(const ModelSpec& spec, const SimConfig& cfg) {
    check_shapes(spec);
    if (cfg.n_paths < 1) throw ValidationError("n_paths must be at least 1");
    const double horizon = cfg.horizon_cap.value_or(default_horizon(spec));
    if (!(horizon > 0.0)) throw ValidationError("horizon_cap must be positive");
    if (cfg.initial_state && (*cfg.initial_state < 0 || *cfg.initial_state >= spec.n()))
        throw ValidationError("initial state out of range");
    if (!cfg.initial_state) {
        if (spec.varpi.size() != spec.n() || !(spec.varpi.sum() > 0.0)) throw ValidationError("varpi is unusable");
    }
    const Prepared prep(spec);

    SampleSet out;
    out.n_paths = cfg.n_paths;
    out.seed = cfg.seed;
    out.spec_hash = spec_hash(spec);
    out.horizon = horizon;
    out.paths.resize(cfg.n_paths);

    parallel_for(cfg.n_paths, cfg.threads, [&](std::int64_t i) {
        const bool mirror = cfg.antithetic && (i % 2 == 1);
        const auto stream = static_cast<std::uint64_t>(mirror ? i - 1 : i);
        PathRng rng(path_seed(cfg.seed, stream), mirror);
        int state = cfg.initial_state ? *cfg.initial_state : rng.categorical(prep.start_cumulative);
        double t = 0.0;
        double w = 0.0;
        PathRecord rec;
        while (true) {
            if (!prep.can_kill[state]) {
                rec.censored = true;
                break;
            }
            const double hold = rng.exponential(prep.exit_rate[state]);
            const double kill = rng.exponential(spec.phi(state));
            const double remaining = horizon - t;
            const double dt = std::min({hold, kill, remaining});
            w += prep.increment(state, dt, rng);
            t += dt;
            if (dt == kill) break;
            if (dt == remaining) {
                rec.censored = true;
                break;
            }
            const int next = prep.next_state(state, rng);
            w += prep.transition_jump(state, next, rng);
            state = next;
        }
        rec.w = w;
        rec.final_state = state;
        out.paths[i] = rec;
    });

    out.values.reserve(out.paths.size());
    for (const auto& p : out.paths) {
        if (p.censored)
            ++out.censored;
        else
            out.values.push_back(p.w);
    }
    return out;
}

std::vector<FixedTimeSample> simulate_fixed_time(const ModelSpec& spec, double t_end, int start, std::int64_t n_paths,
                                                 std::uint64_t seed, int threads) {
    check_shapes(spec);
    if (!(t_end > 0.0)) throw DomainError("t must be positive");
    if (start < 0 || start >= spec.n()) throw ValidationError("start state out of range");
    const Prepared prep(spec);
    std::vector<FixedTimeSample> out(n_paths);
    parallel_for(n_paths, threads, [&](std::int64_t i) {
        PathRng rng(path_seed(seed, static_cast<std::uint64_t>(i)), false);
        int state = start;
        double t = 0.0;
        double w = 0.0;
        while (true) {
            const double hold = rng.exponential(prep.exit_rate[state]);
            const double dt = std::min(hold, t_end - t);
            w += prep.increment(state, dt, rng);
            t += dt;
            if (dt != hold) break;
            const int next = prep.next_state(state, rng);
            w += prep.transition_jump(state, next, rng);
            state = next;
        }
        out[i] = {w, state};
    });
    return out;
}

RealVector absorption_probability(const RealMatrix& pi, const RealVector& phi) {
    const auto n = static_cast<int>(pi.rows());
    if (pi.cols() != n || phi.size() != n) throw ValidationError("generator and phi sizes differ");
    const RealMatrix a = pi - RealMatrix(phi.asDiagonal());
    if (metzler_abscissa(a) < -1e-10) return RealVector::Ones(n);
    std::vector<bool> killing(n);
    for (int i = 0; i < n; ++i) killing[i] = phi(i) > 0.0;
    const auto reach = can_reach(pi, killing);
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
        if (reach[i]) idx.push_back(i);
    RealVector p = RealVector::Zero(n);
    if (idx.empty()) return p;
    const auto m = static_cast<int>(idx.size());
    RealMatrix sub(m, m);
    RealVector rhs(m);
    for (int i = 0; i < m; ++i) {
        rhs(i) = -phi(idx[i]);
        for (int j = 0; j < m; ++j) sub(i, j) = a(idx[i], idx[j]);
    }
    const RealVector x = sub.partialPivLu().solve(rhs);
    for (int i = 0; i < m; ++i) p(idx[i]) = std::clamp(x(i), 0.0, 1.0);
    return p;
}

void write_samples_csv(const SampleSet& samples, std::ostream& os) {
    const auto old = os.precision(17);
    os << "# seed=" << samples.seed << " spec_hash=" << samples.spec_hash << " horizon=" << samples.horizon << "\n";
    os << "path_index,w_T,censored\n";
    for (std::size_t i = 0; i < samples.paths.size(); ++i) {
        const auto& p = samples.paths[i];
        os << i << ',' << p.w << ',' << (p.censored ? 1 : 0) << '\n';
    }
    os.precision(old);
}

}  // namespace mmtail
