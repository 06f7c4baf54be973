#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "model.hpp"

namespace pbg {

// uniform grid tau_k = k * dtau, k = 0..n_steps
struct TimeGrid {
    double tau_max = 25.0;
    double dtau = 0.01;
    int steps() const {
        if (!(dtau > 0.0) || !(tau_max > 0.0))
            throw std::domain_error("TimeGrid: tau_max and dtau must be positive");
        return (int)std::llround(tau_max / dtau);
    }
    double tau(int k) const { return k * dtau; }
};

struct TimeSeries {
    TimeGrid grid;
    std::vector<CollectiveState> states;

    int size() const { return (int)states.size(); }
    const CollectiveState& at_tau(double tau) const {
        int k = (int)std::llround(tau / grid.dtau);
        if (k < 0 || k >= size()) throw std::out_of_range("TimeSeries: tau outside grid");
        return states[k];
    }
};

struct Histogram {
    double lo = 0.0, hi = 1.0;
    std::vector<long> counts;   // n_bins regular bins on [lo, hi)
    long overflow = 0;          // events beyond hi (or that never occurred)

    void add(double v) {
        if (counts.empty()) throw std::logic_error("Histogram: no bins");
        if (v >= lo && v < hi) {
            int b = (int)((v - lo) / (hi - lo) * counts.size());
            if (b >= (int)counts.size()) b = (int)counts.size() - 1;
            ++counts[b];
        } else {
            ++overflow;
        }
    }
    long total() const {
        long t = overflow;
        for (long c : counts) t += c;
        return t;
    }
};

} // namespace pbg
