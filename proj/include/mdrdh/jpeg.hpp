#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mdrdh/errors.hpp"

namespace mdrdh {

// JPEG markers used by the baseline grayscale subset.
namespace marker {
inline constexpr uint8_t SOI = 0xD8;
inline constexpr uint8_t EOI = 0xD9;
inline constexpr uint8_t SOF0 = 0xC0;
inline constexpr uint8_t DHT = 0xC4;
inline constexpr uint8_t DQT = 0xDB;
inline constexpr uint8_t DRI = 0xDD;
inline constexpr uint8_t SOS = 0xDA;
inline constexpr uint8_t APP0 = 0xE0;
inline constexpr uint8_t APP15 = 0xEF;
inline constexpr uint8_t COM = 0xFE;
} // namespace marker

struct Segment {
    uint8_t marker = 0;
    std::vector<uint8_t> payload; // without the 2-byte length field; empty for SOI/EOI
};

struct HuffmanSpec {
    int table_class = 0; // 0 = DC, 1 = AC
    int table_id = 0;
    std::array<uint8_t, 16> counts{}; // codes per length 1..16
    std::vector<uint8_t> symbols;

    size_t total_symbols() const;
    bool operator==(const HuffmanSpec&) const = default;
};

// Standard Annex-K luminance tables.
const HuffmanSpec& standard_ac_spec();
const HuffmanSpec& standard_dc_spec();

struct CodeEntry {
    uint16_t bits = 0;
    uint8_t length = 0;
};

// Canonical prefix code derived from a HuffmanSpec: one code slot per symbol
// position, shortest codes first.
struct CodeAssignment {
    std::vector<CodeEntry> codes;   // per position
    std::vector<uint8_t> symbols;   // per position (may contain a duplicate in marked tables)
    std::array<int, 256> position_of; // symbol -> first position, -1 if absent
    std::array<uint8_t, 16> counts{};

    const CodeEntry& code_for(uint8_t symbol) const;
    int length_at(size_t pos) const { return codes[pos].length; }
};

CodeAssignment build_code_assignment(const HuffmanSpec& spec);

struct Block {
    std::array<int16_t, 64> zz{}; // zigzag order, zz[0] = DC
};

struct CoefficientImage {
    int width = 0;
    int height = 0;
    std::vector<Block> blocks;
    std::array<uint16_t, 64> quant{}; // zigzag order
    HuffmanSpec dc_spec;
    HuffmanSpec ac_spec;

    size_t block_count() const { return blocks.size(); }
};

struct AcToken {
    uint8_t run = 0;   // preceding zeros within the RLE token, 0..15
    uint8_t size = 0;  // VLI category; 0 only for EOB (0/0) and ZRL (F/0)
    int16_t value = 0; // signed amplitude, 0 when size == 0
    uint32_t block = 0;
    uint8_t pos = 0;   // zigzag index 1..63 of the coefficient (size >= 1)

    uint8_t symbol() const { return static_cast<uint8_t>((run << 4) | size); }
};

struct PixelImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> samples; // row-major

    uint8_t at(int x, int y) const { return samples[static_cast<size_t>(y) * width + x]; }
};

struct JpegFile {
    std::vector<Segment> segments; // file order; SOI first, EOI last
    std::vector<uint8_t> scan;     // raw (stuffed) entropy-coded bytes between SOS and EOI

    int width = 0;
    int height = 0;
    std::array<uint16_t, 64> quant{};
    HuffmanSpec dc_spec;
    HuffmanSpec ac_spec;
    size_t sos_index = 0; // index of the SOS segment
};

JpegFile parse(std::span<const uint8_t> bytes);
std::vector<uint8_t> serialize(const JpegFile& file);

// Replace the AC Huffman table inside the DHT segment that defines it,
// regenerating only that segment's bytes.
void rewrite_ac_table(JpegFile& file, const HuffmanSpec& new_ac);

struct DecodedScan {
    CoefficientImage image;
    std::vector<AcToken> tokens;
    std::vector<int32_t> positions; // code position per token within the AC table
};

DecodedScan entropy_decode(const JpegFile& file);

// Re-encode DC coefficients (from the image) and the AC token stream. When
// `positions` is given it overrides the per-symbol code choice (needed for
// marked tables that carry a duplicate symbol).
std::vector<uint8_t> entropy_encode(const CoefficientImage& image,
                                    const std::vector<AcToken>& tokens,
                                    const CodeAssignment& dc,
                                    const CodeAssignment& ac,
                                    const std::vector<int32_t>* positions = nullptr);

// Exact scan length in bits before byte padding; mirrors entropy_encode.
uint64_t scan_bit_length(const CoefficientImage& image,
                         const std::vector<AcToken>& tokens,
                         const CodeAssignment& dc,
                         const CodeAssignment& ac,
                         const std::vector<int32_t>* positions = nullptr);

// Refresh token values/sizes from (possibly modified) coefficients. The
// zero/nonzero structure is invariant under embedding, so runs, EOBs and
// ZRLs are untouched.
void sync_tokens(std::vector<AcToken>& tokens, const CoefficientImage& image);

PixelImage decode_pixels(const CoefficientImage& image);

// Canonical run-length tokenization (minimal VLI size, ZRL for 16-zero runs,
// EOB unless the block ends in a nonzero coefficient).
std::vector<AcToken> tokens_from_coefficients(const CoefficientImage& image);

// Build a complete baseline file around a coefficient image (used for
// synthetic inputs); segments are SOI, DQT, SOF0, DHT, SOS, EOI.
JpegFile assemble(const CoefficientImage& image);

// VLI helpers.
int vli_size(int value);
uint16_t vli_bits(int value, int size);
int vli_decode(uint32_t bits, int size);

extern const std::array<uint8_t, 64> kZigzagToNatural; // zigzag index -> row*8+col

} // namespace mdrdh
