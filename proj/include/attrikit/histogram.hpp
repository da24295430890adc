#pragma once

#include <string>
#include <vector>

namespace attrikit {

// Normalized density histogram over [lo, hi]. `log_scale` is display
// metadata only; densities are always linear so they integrate to 1.
struct Histogram {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> density;
    bool log_scale = false;

    double bin_width() const { return (hi - lo) / static_cast<double>(density.size()); }
    double integral() const;
};

// Builds a density histogram from samples; values outside [lo,hi] are
// clamped into the boundary bins, the upper edge is inclusive.
Histogram make_histogram(const std::vector<double>& samples, int bins, double lo, double hi,
                         bool log_scale = false);

// CSV with columns bin_left,bin_right,density. When `channel` is nonempty a
// leading channel column is emitted instead.
void export_histogram_csv(const Histogram& h, const std::string& path);
void export_histograms_csv(const std::vector<std::pair<std::string, Histogram>>& labeled,
                           const std::string& path);

}  // namespace attrikit
