#include "attrikit/histogram.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "attrikit/errors.hpp"

namespace attrikit {

double Histogram::integral() const {
    double sum = 0.0;
    for (double d : density) sum += d;
    return sum * bin_width();
}

Histogram make_histogram(const std::vector<double>& samples, int bins, double lo, double hi,
                         bool log_scale) {
    if (bins < 1) throw ValidationError("histogram: bins must be >= 1");
    if (!(hi > lo)) throw ValidationError("histogram: hi must exceed lo");
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.log_scale = log_scale;
    h.density.assign(static_cast<size_t>(bins), 0.0);
    if (samples.empty()) return h;

    const double width = (hi - lo) / bins;
    for (double v : samples) {
        int b = static_cast<int>((v - lo) / width);
        b = std::clamp(b, 0, bins - 1);
        h.density[static_cast<size_t>(b)] += 1.0;
    }
    const double norm = static_cast<double>(samples.size()) * width;
    for (double& d : h.density) d /= norm;
    return h;
}

static void write_rows(std::ofstream& out, const std::string& label, const Histogram& h) {
    char buf[128];
    for (size_t b = 0; b < h.density.size(); ++b) {
        const double left = h.lo + h.bin_width() * static_cast<double>(b);
        const double right = h.lo + h.bin_width() * static_cast<double>(b + 1);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", left, right, h.density[b]);
        if (!label.empty()) out << label << ",";
        out << buf << "\n";
    }
}

void export_histogram_csv(const Histogram& h, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write histogram CSV: " + path);
    out << "bin_left,bin_right,density\n";
    write_rows(out, "", h);
}

void export_histograms_csv(const std::vector<std::pair<std::string, Histogram>>& labeled,
                           const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write histogram CSV: " + path);
    out << "channel,bin_left,bin_right,density\n";
    for (const auto& [label, h] : labeled) write_rows(out, label, h);
}

}  // namespace attrikit
