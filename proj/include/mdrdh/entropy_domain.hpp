#pragma once

#include "mdrdh/jpeg.hpp"

namespace mdrdh {

struct VlcEntry {
    uint8_t symbol = 0;
    uint32_t count = 0;
    uint8_t code_len = 0;
    uint16_t code = 0;
};

// Per-symbol VLC occurrence histogram. Entries follow the spec's symbol
// positions; after optimize_table they are in sorted (descending count)
// order and carry the canonical codes of those positions.
struct VlcHistogram {
    HuffmanSpec spec;
    std::vector<VlcEntry> entries; // 162, aligned to spec symbol positions

    uint32_t count_of(uint8_t symbol) const;
    int position_of(uint8_t symbol) const; // -1 if absent
};

VlcHistogram build_histogram(const std::vector<AcToken>& tokens, const HuffmanSpec& spec);

// Frequency sort: code slots keep their bit patterns, symbols move so the
// most frequent symbol takes the shortest code.
std::pair<VlcHistogram, HuffmanSpec> optimize_table(const VlcHistogram& hist);

struct EntropyCostEntry {
    int position = 0;   // candidate peak position in the sorted histogram
    uint8_t symbol = 0;
    uint32_t count = 0;
    double shift = 0.0; // S(P)
    double embed = 0.0; // M(P)
    double unit = 0.0;  // E(P) = (S+M)/count

    double inc2() const { return shift + embed; }
};

struct EntropyCostTable {
    std::vector<EntropyCostEntry> entries; // ascending by (unit, position)

    const EntropyCostEntry* find_position(int position) const;
};

EntropyCostTable entropy_costs(const VlcHistogram& sorted);

struct PeakZero {
    int p = -1;
    int z = -1;
};

PeakZero select_peak(const VlcHistogram& sorted, uint64_t l2);

struct ShiftEmbedResult {
    HuffmanSpec marked_spec;        // DHT with the duplicated peak symbol
    std::vector<int32_t> positions; // per-token code positions in marked_spec
};

ShiftEmbedResult shift_and_embed(const std::vector<AcToken>& tokens, const VlcHistogram& sorted,
                                 PeakZero pz, std::span<const uint8_t> bits);

// Recover (P, Z) from a marked DHT; `sorted` is the histogram re-derived from
// the marked scan (identical to the embed-time one).
PeakZero detect_peak_zero(const HuffmanSpec& marked, const VlcHistogram& sorted);

// Pull L2 bits back out of the duplicate-coded peak occurrences. Token
// symbols are already correct after decoding under the marked table.
std::vector<uint8_t> extract_restore(const std::vector<AcToken>& tokens,
                                     const std::vector<int32_t>& positions, PeakZero pz,
                                     uint64_t l2);

} // namespace mdrdh
