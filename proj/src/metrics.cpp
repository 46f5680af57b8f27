#include "mdrdh/metrics.hpp"

#include <cmath>
#include <limits>

namespace mdrdh {

int64_t file_expansion(std::span<const uint8_t> original, std::span<const uint8_t> marked) {
    return (static_cast<int64_t>(marked.size()) - static_cast<int64_t>(original.size())) * 8;
}

double psnr(const PixelImage& a, const PixelImage& b) {
    if (a.width != b.width || a.height != b.height) throw Error(Err::DimensionMismatch);
    double se = 0.0;
    for (size_t i = 0; i < a.samples.size(); ++i) {
        double d = static_cast<double>(a.samples[i]) - b.samples[i];
        se += d * d;
    }
    if (se == 0.0) return std::numeric_limits<double>::infinity();
    double mse = se / static_cast<double>(a.samples.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

} // namespace mdrdh
