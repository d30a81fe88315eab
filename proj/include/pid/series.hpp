#pragma once

#include <vector>

namespace pid {

/// Uniformly sampled real signal.
struct UniformSeries {
    double start_time = 0.0;
    double sample_interval = 0.0;  // s, > 0
    std::vector<double> values;

    double time_at(size_t k) const { return start_time + sample_interval * static_cast<double>(k); }
    size_t size() const { return values.size(); }
};

}  // namespace pid
