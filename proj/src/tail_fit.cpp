#include "mmtail/tail_fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mmtail/errors.hpp"

namespace mmtail {

namespace {

constexpr std::int64_t kMinWindow = 50;

}  // namespace

TailFit fit_tail(const std::vector<double>& values, TailSide side, std::pair<double, double> window) {
    const auto [q_lo, q_hi] = window;
    if (!(0.0 <= q_lo && q_lo < q_hi && q_hi <= 1.0)) throw ValidationError("tail window must satisfy 0 <= q_lo < q_hi <= 1");
    std::vector<double> w = values;
    if (side == TailSide::Lower)
        for (double& x : w) x = -x;
    std::sort(w.begin(), w.end());
    const auto n = static_cast<std::int64_t>(w.size());
    TailFit fit;
    fit.side = side;
    fit.window = window;
    if (n < kMinWindow) throw InsufficientTail("fewer than 50 samples");

    const auto i_lo = std::min<std::int64_t>(n - 1, static_cast<std::int64_t>(std::floor(q_lo * static_cast<double>(n))));
    const auto i_hi = std::max<std::int64_t>(
        i_lo, std::min<std::int64_t>(n - 1, static_cast<std::int64_t>(std::ceil(q_hi * static_cast<double>(n))) - 1));
    const double x_lo = w[i_lo];
    const double x_hi = w[i_hi];
    const auto first = std::lower_bound(w.begin(), w.end(), x_lo);
    const auto last = std::upper_bound(w.begin(), w.end(), x_hi);
    fit.n_window = last - first;
    if (fit.n_window < kMinWindow) {
        std::ostringstream os;
        os << "only " << fit.n_window << " samples in the tail window";
        throw InsufficientTail(os.str());
    }

    // distinct values with their empirical survival S(v) = #{w > v} / n
    std::vector<double> xs;
    std::vector<double> surv;
    for (auto it = first; it != last;) {
        const double v = *it;
        const auto next = std::upper_bound(it, last, v);
        const auto above = static_cast<double>(w.end() - next);
        if (above > 0.0) {
            xs.push_back(v);
            surv.push_back(above / static_cast<double>(n));
        }
        it = next;
    }
    const auto m = static_cast<int>(xs.size());
    if (m < 3) throw InsufficientTail("fewer than three distinct points in the tail window");
    fit.n_points = m;

    double xbar = 0.0;
    double ybar = 0.0;
    for (int k = 0; k < m; ++k) {
        xbar += xs[k];
        ybar += std::log(surv[k]);
    }
    xbar /= m;
    ybar /= m;
    double sxx = 0.0;
    double sxy = 0.0;
    for (int k = 0; k < m; ++k) {
        sxx += (xs[k] - xbar) * (xs[k] - xbar);
        sxy += (xs[k] - xbar) * (std::log(surv[k]) - ybar);
    }
    if (!(sxx > 0.0)) throw InsufficientTail("tail window has no spread");
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;

    double rss = 0.0;
    for (int k = 0; k < m; ++k) {
        const double r = std::log(surv[k]) - fit.intercept - fit.slope * xs[k];
        rss += r * r;
    }
    fit.ols_stderr = std::sqrt(rss / (m - 2) / sxx);

    // Cov(log S_j, log S_k) = v_{min(j,k)} with v = (1 - S) / (n S) increasing in k,
    // so Var(slope) = sum_k (v_k - v_{k-1}) (sum_{i >= k} a_i)^2 with a the OLS weights.
    std::vector<double> tail_weight(m + 1, 0.0);
    for (int k = m - 1; k >= 0; --k) tail_weight[k] = tail_weight[k + 1] + (xs[k] - xbar) / sxx;
    double var = 0.0;
    double v_prev = 0.0;
    for (int k = 0; k < m; ++k) {
        const double v = (1.0 - surv[k]) / (static_cast<double>(n) * surv[k]);
        var += (v - v_prev) * tail_weight[k] * tail_weight[k];
        v_prev = v;
    }
    fit.std_error = std::sqrt(var);
    return fit;
}

TailFit fit_tail(const SampleSet& samples, TailSide side, std::pair<double, double> window) {
    return fit_tail(samples.values, side, window);
}

MgfEstimate empirical_mgf(const SampleSet& samples, double s) {
    MgfEstimate est;
    const auto n = static_cast<double>(samples.values.size());
    if (samples.values.empty()) throw InsufficientTail("no uncensored samples");
    if (s == 0.0) {
        est.mean = 1.0;
        return est;
    }
    double sum = 0.0;
    for (double w : samples.values) sum += std::exp(s * w);
    est.mean = sum / n;
    double ss = 0.0;
    for (double w : samples.values) {
        const double d = std::exp(s * w) - est.mean;
        ss += d * d;
    }
    est.std_error = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
    return est;
}

MgfEstimate empirical_mgf(const SampleSet& samples, double s, const ModelSpec& spec) {
    MgfEstimate est = empirical_mgf(samples, s);
    const DecayRates rates = find_decay_rates(spec);
    const DomainInterval& dom = rates.domain;
    // endpoints of I-: the roots when present, otherwise the ends of I
    const double hi = rates.alpha ? *rates.alpha : dom.hi;
    const double lo = rates.beta ? -*rates.beta : dom.lo;
    std::ostringstream note;
    auto in_minus = [&](double x) {
        const bool above = x > lo || (x == lo && !rates.beta && dom.lo_closed);
        const bool below = x < hi || (x == hi && !rates.alpha && dom.hi_closed);
        return above && below;
    };
    if (!in_minus(s)) {
        est.flagged = true;
        note << "s outside I-; ";
    }
    if (std::isfinite(hi) && s > 0.0 && hi - s <= 0.05 * std::abs(hi)) {
        est.flagged = true;
        note << "s within 5% of the upper end of I-; ";
    }
    if (std::isfinite(lo) && s < 0.0 && s - lo <= 0.05 * std::abs(lo)) {
        est.flagged = true;
        note << "s within 5% of the lower end of I-; ";
    }
    if (!in_minus(2.0 * s)) {
        est.flagged = true;
        note << "2s outside I-, variance may be infinite; ";
    }
    est.note = note.str();
    if (!est.note.empty()) est.note.erase(est.note.size() - 2);
    return est;
}

Proportion empirical_survival(const SampleSet& samples, double w) {
    if (samples.values.empty()) throw InsufficientTail("no uncensored samples");
    const auto n = static_cast<double>(samples.values.size());
    const auto k = static_cast<double>(
        std::count_if(samples.values.begin(), samples.values.end(), [w](double x) { return x > w; }));
    Proportion p;
    p.p = k / n;
    p.std_error = std::sqrt(p.p * (1.0 - p.p) / n);
    return p;
}

Proportion empirical_lower_tail(const SampleSet& samples, double w) {
    if (samples.values.empty()) throw InsufficientTail("no uncensored samples");
    const auto n = static_cast<double>(samples.values.size());
    const auto k = static_cast<double>(
        std::count_if(samples.values.begin(), samples.values.end(), [w](double x) { return x < -w; }));
    Proportion p;
    p.p = k / n;
    p.std_error = std::sqrt(p.p * (1.0 - p.p) / n);
    return p;
}

}  // namespace mmtail
