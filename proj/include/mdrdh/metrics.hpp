#pragma once

#include <cstdint>
#include <span>

#include "mdrdh/jpeg.hpp"

namespace mdrdh {

// (marked - original) in bits; negative when the marked file shrank.
int64_t file_expansion(std::span<const uint8_t> original, std::span<const uint8_t> marked);

// 10*log10(255^2 / MSE); +infinity when the images are identical.
double psnr(const PixelImage& a, const PixelImage& b);

} // namespace mdrdh
