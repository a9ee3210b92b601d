#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mmtail/model.hpp"

namespace mmtail {

struct SimConfig {
    std::int64_t n_paths = 1000;
    std::uint64_t seed = 0;
    std::optional<double> horizon_cap;  // default: default_horizon(spec)
    bool antithetic = false;            // odd paths reuse the even path's stream with negated normals
    int threads = 0;                    // 0: hardware concurrency
    std::optional<int> initial_state;   // overrides varpi
};

struct PathRecord {
    double w = 0.0;
    bool censored = false;
    int final_state = 0;
};

struct SampleSet {
    std::vector<double> values;  // W_T of non-censored paths, in path order
    std::int64_t censored = 0;
    std::int64_t n_paths = 0;
    std::vector<PathRecord> paths;
    std::uint64_t seed = 0;
    std::string spec_hash;
    double horizon = 0.0;
};

/// 50 / (smallest positive killing rate), or 50 when nothing kills.
[[nodiscard]] double default_horizon(const ModelSpec& spec);

/// Simulates (J, W, V) until the first killing event; exact in distribution on each segment.
/// Paths sitting in a state from which no killing state is reachable are censored at once.
[[nodiscard]] SampleSet simulate_stopped(const ModelSpec& spec, const SimConfig& cfg);

struct FixedTimeSample {
    double w = 0.0;
    int state = 0;
};

/// (W_t, J_t) without killing, every path started in `start`.
[[nodiscard]] std::vector<FixedTimeSample> simulate_fixed_time(const ModelSpec& spec, double t, int start,
                                                               std::int64_t n_paths, std::uint64_t seed,
                                                               int threads = 0);

/// Hitting probability of the killing event from each state: the minimal nonnegative
/// solution of (Pi - Phi) x = (Pi - Phi) 1.
[[nodiscard]] RealVector absorption_probability(const RealMatrix& pi, const RealVector& phi);

/// CSV with columns path_index,w_T,censored and a commented provenance header.
void write_samples_csv(const SampleSet& samples, std::ostream& os);

/// Seed of path i's generator.
[[nodiscard]] std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace mmtail
