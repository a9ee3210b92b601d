#pragma once

#include <string>
#include <utility>

#include "mmtail/simulator.hpp"
#include "mmtail/tail.hpp"

namespace mmtail {

struct TailFit {
    TailSide side = TailSide::Upper;
    double slope = 0.0;      // estimates -alpha (upper) or -beta (lower)
    double intercept = 0.0;
    double std_error = 0.0;  // accounts for the dependence of the empirical survival points
    double ols_stderr = 0.0; // textbook OLS formula, treats the points as independent
    std::pair<double, double> window{0.95, 0.9995};
    std::int64_t n_window = 0;
    int n_points = 0;
};

/// OLS of log empirical survival (or log CDF on -w for the lower tail) against w over the
/// samples between the q_lo and q_hi empirical quantiles. Throws InsufficientTail when fewer
/// than 50 samples fall in the window.
[[nodiscard]] TailFit fit_tail(const SampleSet& samples, TailSide side,
                               std::pair<double, double> window = {0.95, 0.9995});

/// Same, on raw values.
[[nodiscard]] TailFit fit_tail(const std::vector<double>& values, TailSide side,
                               std::pair<double, double> window = {0.95, 0.9995});

struct MgfEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    bool flagged = false;
    std::string note;
};

/// Sample mean and standard error of e^{s w}.
[[nodiscard]] MgfEstimate empirical_mgf(const SampleSet& samples, double s);

/// As above, flagging s within 5% of an endpoint of I- or with 2s outside I- (infinite variance).
[[nodiscard]] MgfEstimate empirical_mgf(const SampleSet& samples, double s, const ModelSpec& spec);

struct Proportion {
    double p = 0.0;
    double std_error = 0.0;
};

/// Fraction of non-censored samples with W_T > w.
[[nodiscard]] Proportion empirical_survival(const SampleSet& samples, double w);

/// Fraction with W_T < -w.
[[nodiscard]] Proportion empirical_lower_tail(const SampleSet& samples, double w);

}  // namespace mmtail
