#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <sstream>

#include "mmtail/errors.hpp"
#include "mmtail/simulator.hpp"
#include "mmtail/spectral.hpp"
#include "mmtail/tail.hpp"
#include "oracles.hpp"

using namespace mmtail;
using Catch::Approx;

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0;
    double mean_se = 0.0;
    double var_se = 0.0;
};

Moments moments(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    Moments m;
    m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = x - m.mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    m.var = m2 * n / (n - 1);
    m.mean_se = std::sqrt(m2 / n);
    m.var_se = std::sqrt((m4 - m2 * m2) / n);
    return m;
}

SimConfig config(std::int64_t paths, std::uint64_t seed, int threads = 1) {
    SimConfig c;
    c.n_paths = paths;
    c.seed = seed;
    c.threads = threads;
    return c;
}

}  // namespace

TEST_CASE("W is identically zero without motion") {
    const auto s = simulate_stopped(single_state(BrownianDrift{0.0, 0.0}, 1.0), config(1000, 1));
    REQUIRE(s.values.size() == 1000);
    CHECK(s.censored == 0);
    for (double v : s.values) CHECK(v == 0.0);
}

TEST_CASE("Brownian moments match the asymmetric Laplace law") {
    const auto spec = single_state(BrownianDrift{0.0, 1.0}, 0.5);
    const auto s = simulate_stopped(spec, config(200000, 3, 0));
    const auto m = moments(s.values);
    CHECK(std::abs(m.mean) < 4 * m.mean_se);
    CHECK(std::abs(m.var - oracle::laplace_variance(1.0, 1.0)) < 4 * m.var_se);

    const auto drift = single_state(BrownianDrift{0.4, 0.8}, 0.7);
    const double a = oracle::brownian_alpha(0.4, 0.8, 0.7);
    const double b = oracle::brownian_beta(0.4, 0.8, 0.7);
    const auto d = moments(simulate_stopped(drift, config(200000, 4, 0)).values);
    CHECK(std::abs(d.mean - oracle::laplace_mean(a, b)) < 4 * d.mean_se);
    CHECK(std::abs(d.var - oracle::laplace_variance(a, b)) < 4 * d.var_se);
}

TEST_CASE("Poisson counts at an exponential time are geometric") {
    const auto s = simulate_stopped(single_state(PoissonJump{1.0, 1.0}, 1.0), config(100000, 5, 0));
    // Pr(W = k) = 2^{-(k+1)}
    for (int k = 0; k < 5; ++k) {
        const double p = std::count(s.values.begin(), s.values.end(), static_cast<double>(k)) / 100000.0;
        const double want = std::pow(0.5, k + 1);
        CHECK(std::abs(p - want) < 4 * std::sqrt(want * (1 - want) / 100000.0));
    }
}

TEST_CASE("Pareto-exponential jumps have the right mean") {
    // E W_T = psi'(0) / phi and Var W_T = psi''(0) / phi + (E W_T)^2
    const TruncatedParetoExpJump e{0.6};
    const auto spec = single_state(e, 0.5);
    const auto m = moments(simulate_stopped(spec, config(200000, 6, 0)).values);
    const double want = exponent_derivative(e, 0.0) / 0.5;
    CHECK(std::abs(m.mean - want) < 4 * m.mean_se);
    const double h = 1e-4;
    const double d2 = (exponent_derivative(e, h) - exponent_derivative(e, -h)) / (2 * h);
    const double want_var = d2 / 0.5 + want * want;
    CHECK(std::abs(m.var - want_var) < 4 * m.var_se);
}

TEST_CASE("transition jumps enter W") {
    RealMatrix pi(2, 2);
    pi << -2.0, 2.0, 0.0, 0.0;
    RealVector varpi(2);
    varpi << 1.0, 0.0;
    RealVector phi(2);
    phi << 0.0, 1.0;
    auto spec = make_spec(varpi, pi, {LinearDrift{0.0}, LinearDrift{0.0}}, phi);
    spec.jumps[0][1] = DegeneratePoint{1.5};
    const auto s = simulate_stopped(spec, config(1000, 7));
    CHECK(s.censored == 0);
    for (double v : s.values) CHECK(v == 1.5);
}

TEST_CASE("nothing kills: every path censored") {
    RealMatrix pi(2, 2);
    pi << -1.0, 1.0, 1.0, -1.0;
    const auto spec = make_spec(RealVector::Constant(2, 0.5), pi, {BrownianDrift{0, 1}, BrownianDrift{1, 1}},
                                RealVector::Zero(2));
    const auto s = simulate_stopped(spec, config(500, 8));
    CHECK(s.censored == 500);
    CHECK(s.values.empty());
}

TEST_CASE("sample set bookkeeping and CSV") {
    RealMatrix pi(2, 2);
    pi << -1.0, 1.0, 1.0, -1.0;
    RealVector phi(2);
    phi << 0.05, 0.0;
    const auto spec = make_spec(RealVector::Constant(2, 0.5), pi, {BrownianDrift{0, 1}, LinearDrift{1}}, phi);
    auto cfg = config(3000, 9);
    cfg.horizon_cap = 10.0;
    const auto s = simulate_stopped(spec, cfg);
    CHECK(s.censored + static_cast<std::int64_t>(s.values.size()) == s.n_paths);
    CHECK(s.censored > 0);
    CHECK(s.horizon == 10.0);
    std::ostringstream os;
    write_samples_csv(s, os);
    const std::string csv = os.str();
    CHECK(csv.find("# seed=9") != std::string::npos);
    CHECK(csv.find("path_index,w_T,censored") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') >= 3000);
}

TEST_CASE("default horizon") {
    RealVector phi(3);
    phi << 0.0, 0.5, 2.0;
    RealMatrix pi = RealMatrix::Zero(3, 3);
    const auto spec = make_spec(RealVector::Constant(3, 1.0 / 3), pi,
                                {LinearDrift{1}, LinearDrift{1}, LinearDrift{1}}, phi);
    CHECK(default_horizon(spec) == Approx(100.0));
    CHECK(default_horizon(single_state(LinearDrift{1.0}, 0.0)) == Approx(50.0));
}

TEST_CASE("absorption probability examples") {
    RealVector phi(2);
    phi << 1.0, 0.0;
    const RealVector p0 = absorption_probability(RealMatrix::Zero(2, 2), phi);
    CHECK(p0(0) == 1.0);
    CHECK(p0(1) == 0.0);

    RealMatrix pi(2, 2);
    pi << -1.0, 1.0, 1.0, -1.0;
    CHECK(metzler_abscissa(pi - RealMatrix(phi.asDiagonal())) == Approx((-3 + std::sqrt(5.0)) / 2));
    CHECK(absorption_probability(pi, phi) == RealVector::Ones(2));

    RealMatrix three(3, 3);
    three << -2.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0;
    RealVector phi3(3);
    phi3 << 0.0, 1.0, 0.0;
    const RealVector p3 = absorption_probability(three, phi3);
    CHECK(p3(0) == Approx(0.5));
    CHECK(p3(1) == 1.0);
    CHECK(p3(2) == 0.0);
}

TEST_CASE("property: absorption equals the value-iteration minimal solution") {
    oracle::Rng rng(51);
    int minimal = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = rng.integer(1, 6);
        const RealMatrix pi = oracle::random_generator(rng, n, rng.uniform(0.3, 0.9), rng.coin(0.3));
        RealVector phi(n);
        for (int i = 0; i < n; ++i) phi(i) = rng.coin(0.6) ? 0.0 : rng.uniform(0.1, 2.0);
        const RealVector p = absorption_probability(pi, phi);
        const RealVector oracle_p = oracle::absorption_value_iteration(pi, phi);
        CHECK((p - oracle_p).cwiseAbs().maxCoeff() < 1e-9);
        const double z = metzler_abscissa(pi - RealMatrix(phi.asDiagonal()));
        const bool all_one = (p - RealVector::Ones(n)).cwiseAbs().maxCoeff() < 1e-12;
        CHECK(all_one == (z < -1e-10));
        if (!all_one) ++minimal;
    }
    CHECK(minimal > 20);
}

TEST_CASE("property: reproducible across thread counts") {
    oracle::Rng rng(52);
    for (int trial = 0; trial < 5; ++trial) {
        const auto spec = oracle::random_spec(rng, true, 3);
        auto cfg = config(5000, 100 + trial, 1);
        const auto a = simulate_stopped(spec, cfg);
        cfg.threads = 4;
        const auto b = simulate_stopped(spec, cfg);
        cfg.threads = 3;
        const auto c = simulate_stopped(spec, cfg);
        CHECK(a.values == b.values);
        CHECK(a.values == c.values);
        CHECK(a.censored == b.censored);
    }
}

TEST_CASE("property: a longer horizon never censors more") {
    oracle::Rng rng(53);
    for (int trial = 0; trial < 10; ++trial) {
        const auto spec = oracle::random_spec(rng, true, 3);
        auto cfg = config(2000, 200 + trial);
        std::int64_t last = cfg.n_paths + 1;
        for (double h : {0.1, 1.0, 5.0, 50.0}) {
            cfg.horizon_cap = h;
            const auto s = simulate_stopped(spec, cfg);
            CHECK(s.censored <= last);
            last = s.censored;
        }
    }
}

TEST_CASE("antithetic pairs mirror the Brownian part") {
    auto cfg = config(1000, 11);
    cfg.antithetic = true;
    const auto s = simulate_stopped(single_state(BrownianDrift{0.0, 1.0}, 0.5), cfg);
    REQUIRE(s.paths.size() == 1000);
    for (std::size_t i = 0; i + 1 < s.paths.size(); i += 2) CHECK(s.paths[i].w == -s.paths[i + 1].w);
}

TEST_CASE("fixed-time simulation against the conditional MGF matrix") {
    RealMatrix pi(2, 2);
    pi << -1.0, 1.0, 0.5, -0.5;
    auto spec = make_spec(RealVector::Constant(2, 0.5), pi, {BrownianDrift{0.2, 1.0}, PoissonJump{0.8, 0.5}},
                          RealVector::Constant(2, 0.3));
    spec.jumps[0][1] = GaussianJump{0.1, 0.2};
    const double t = 1.3;
    const double z = 0.4;
    const ComplexMatrix want = conditional_mgf_matrix(spec, t, Complex{z, 0.0}, false);
    for (int start = 0; start < 2; ++start) {
        const auto samples = simulate_fixed_time(spec, t, start, 100000, 12 + start, 0);
        for (int to = 0; to < 2; ++to) {
            double sum = 0.0, sq = 0.0;
            for (const auto& x : samples) {
                const double v = x.state == to ? std::exp(z * x.w) : 0.0;
                sum += v;
                sq += v * v;
            }
            const double n = static_cast<double>(samples.size());
            const double mean = sum / n;
            const double se = std::sqrt((sq / n - mean * mean) / n);
            CHECK(std::abs(mean - want(start, to).real()) < 4 * se);
        }
    }
}

TEST_CASE("path seeds differ") {
    CHECK(path_seed(1, 0) != path_seed(1, 1));
    CHECK(path_seed(1, 0) != path_seed(2, 0));
    CHECK(path_seed(5, 9) == path_seed(5, 9));
}
