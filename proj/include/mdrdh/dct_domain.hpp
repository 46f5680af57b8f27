#pragma once

#include <optional>

#include "mdrdh/jpeg.hpp"

namespace mdrdh {

// Huffman code length table (by run, VLI size 1..10) and its per-size
// increment table.
struct CodeLengthTable {
    int hclt[16][11];  // columns 1..10
    int hcit[16][10];  // columns 1..9, hcit[r][c] = hclt[r][c+1] - hclt[r][c]
};

CodeLengthTable code_length_tables(const CodeAssignment& ac);

// +-1 histogram-shift embedding of one bit into a nonzero coefficient.
int embed_coefficient(int d, int bit);

struct CoefficientRecovery {
    std::optional<int> bit;
    int value;
};

CoefficientRecovery extract_recover_coefficient(int dbar);

struct FrequencyCost {
    double expansion = 0.0; // S(k): expected scan-bit growth over all blocks
    int64_t nonzero = 0;    // L(k)
    int64_t carriers = 0;   // |d| == 1 coefficients (one payload bit each)
    double unit = 0.0;      // UF(k) = S(k)/L(k)
    bool usable = false;
};

struct FrequencyCostTable {
    std::array<FrequencyCost, 64> at{}; // index by zigzag frequency 1..63
    std::vector<int> order;             // usable frequencies, ascending (UF, zigzag)

    double inc1(int k) const { return at[k].expansion; } // INC1(k) == S(k)
};

FrequencyCostTable frequency_costs(const CoefficientImage& image, const CodeLengthTable& clt);

// Stable descending order by per-block zero-valued-AC count.
std::vector<uint32_t> sort_blocks(const CoefficientImage& image);

struct DctEmbedPlan {
    std::array<bool, 64> in_set{}; // zigzag frequency membership
    std::vector<int> freq_set;     // ascending zigzag order
    int k_bar = 0;
    uint32_t n_bar = 0;
    int run_bar = 0;               // filled by embed_dct
    uint64_t l1 = 0;
    double estimated_expansion = 0.0;
};

DctEmbedPlan plan_dct(const CoefficientImage& image, uint64_t l1, const FrequencyCostTable& costs,
                      const CodeLengthTable& clt);

// Embeds bits in place following the run-ordered traversal; returns run_bar.
int embed_dct(CoefficientImage& image, std::span<const uint8_t> bits, const DctEmbedPlan& plan);

// Inverse of embed_dct: recovers coefficients in place, returns the payload.
std::vector<uint8_t> extract_dct(CoefficientImage& image, const DctEmbedPlan& plan);

// Token run (0..15) of the nonzero coefficient at zigzag index `pos`.
int token_run(const Block& block, int pos);

} // namespace mdrdh
