#pragma once

#include "mdrdh/dct_domain.hpp"
#include "mdrdh/entropy_domain.hpp"
#include "mdrdh/jpeg.hpp"

namespace mdrdh {

// One place payload bits can go, at a constant estimated cost per bit.
struct CostVenue {
    double unit_cost = 0.0;
    uint64_t capacity = 0;
};

struct PeakVenue {
    double unit_cost = 0.0; // E(P)
    uint64_t count = 0;     // sum(VLC_P); at most count-1 bits may be embedded
    int position = -1;
    uint8_t symbol = 0;
};

struct DistributionState {
    uint64_t length = 0;
    uint64_t l1 = 0;
    uint64_t l2 = 0;
    int k = 0; // DCT venues touched by the fill
    bool has_peak = false;
    int peak_position = -1;
    uint8_t peak_symbol = 0;
    double estimated_cost = 0.0;
};

// Splits `length` bits between the DCT venues (ascending cost) and at most
// one entropy peak, minimizing estimated expansion INC1 + INC2.
DistributionState initialize_distribution(std::span<const CostVenue> dct_venues,
                                          std::span<const PeakVenue> peaks, uint64_t length);

enum class EmbedMode { Multi, DctOnly, EntropyOnly, HuffOptOnly };

const char* mode_name(EmbedMode m);

// Extractor-side parameters, carried in a plaintext APP15 segment.
struct SideInfo {
    uint8_t version = 1;
    uint32_t l1 = 0;
    uint32_t l2 = 0;
    uint64_t freq_bitmap = 0; // bit (k-1) set when zigzag frequency k is in the set
    uint32_t n_bar = 0;
    uint8_t run_bar = 0;
    uint32_t payload_len = 0;

    std::vector<uint8_t> to_segment_payload() const;
    static SideInfo from_segment_payload(std::span<const uint8_t> payload);

    static constexpr char kIdentifier[6] = {'M', 'D', 'R', 'D', 'H', '\0'};
    static constexpr size_t kRecordBytes = 26;
    // marker(2) + length(2) + identifier(6) + record
    static constexpr size_t kSegmentTotalBytes = 4 + 6 + kRecordBytes;
};

struct EmbedResult {
    std::vector<uint8_t> bytes;
    uint64_t l1 = 0;
    uint64_t l2 = 0;
    int k_bar = 0;
    uint32_t n_bar = 0;
    int run_bar = 0;
    bool peak_used = false;
    uint8_t peak_symbol = 0;
};

EmbedResult embed(std::span<const uint8_t> file, std::span<const uint8_t> payload_bits,
                  EmbedMode mode);

struct ExtractOutput {
    std::vector<uint8_t> payload_bits;
    std::vector<uint8_t> original;
    SideInfo side_info;
};

ExtractOutput extract(std::span<const uint8_t> marked);

// Capacity probe used by the CLI and the benchmark runner.
struct CapacityReport {
    uint64_t dct_carrier_bits = 0; // total |d|=1 coefficients at usable frequencies
    uint64_t entropy_peak_bits = 0; // max count-1 over feasible peaks
};

CapacityReport capacity(std::span<const uint8_t> file);

} // namespace mdrdh
