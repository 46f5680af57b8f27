#include "mdrdh/dct_domain.hpp"

#include <algorithm>
#include <numeric>

namespace mdrdh {

CodeLengthTable code_length_tables(const CodeAssignment& ac) {
    CodeLengthTable t{};
    for (int r = 0; r < 16; ++r)
        for (int c = 1; c <= 10; ++c) {
            uint8_t sym = static_cast<uint8_t>((r << 4) | c);
            int p = ac.position_of[sym];
            if (p < 0) throw Error(Err::MissingSymbol);
            t.hclt[r][c] = ac.codes[static_cast<size_t>(p)].length;
        }
    for (int r = 0; r < 16; ++r)
        for (int c = 1; c <= 9; ++c) t.hcit[r][c] = t.hclt[r][c + 1] - t.hclt[r][c];
    return t;
}

int embed_coefficient(int d, int bit) {
    if (d == 0) throw Error(Err::ZeroCoefficient);
    int sign = d > 0 ? 1 : -1;
    if (d == 1 || d == -1) return d + sign * bit;
    return d + sign;
}

CoefficientRecovery extract_recover_coefficient(int dbar) {
    if (dbar == 0) throw Error(Err::ZeroCoefficient);
    int sign = dbar > 0 ? 1 : -1;
    int mag = dbar * sign;
    if (mag == 1) return {0, dbar};
    if (mag == 2) return {1, sign};
    return {std::nullopt, dbar - sign};
}

int token_run(const Block& block, int pos) {
    int zeros = 0;
    for (int i = pos - 1; i >= 1 && block.zz[i] == 0; --i) ++zeros;
    return zeros % 16;
}

namespace {

bool at_vli_boundary(int mag) {
    // magnitudes 1, 3, 7, 15, ... sit at a size-category boundary
    return (mag & (mag + 1)) == 0;
}

// Per-coefficient expected expansion contribution (omega * S_j).
double coefficient_cost(int d, int run, const CodeLengthTable& clt) {
    int mag = d < 0 ? -d : d;
    if (mag == 0) return 0.0;
    if (!at_vli_boundary(mag)) return 0.0;
    int c = vli_size(mag);
    if (c > 9) return 0.0; // size 10 boundary cannot grow within baseline
    double sj = clt.hcit[run][c] + 1;
    return mag == 1 ? 0.5 * sj : sj;
}

} // namespace

FrequencyCostTable frequency_costs(const CoefficientImage& image, const CodeLengthTable& clt) {
    FrequencyCostTable t;
    std::array<bool, 64> overflow{};
    for (const Block& blk : image.blocks) {
        for (int k = 1; k < 64; ++k) {
            int d = blk.zz[k];
            if (d == 0) continue;
            auto& fc = t.at[k];
            fc.nonzero += 1;
            int mag = d < 0 ? -d : d;
            if (mag == 1) fc.carriers += 1;
            if (mag >= 1023) overflow[k] = true; // shifting would leave VLI range
            fc.expansion += coefficient_cost(d, token_run(blk, k), clt);
        }
    }
    for (int k = 1; k < 64; ++k) {
        auto& fc = t.at[k];
        if (fc.nonzero > 0 && !overflow[k]) {
            fc.unit = fc.expansion / static_cast<double>(fc.nonzero);
            fc.usable = true;
        }
    }
    t.order.reserve(63);
    for (int k = 1; k < 64; ++k)
        if (t.at[k].usable) t.order.push_back(k);
    std::stable_sort(t.order.begin(), t.order.end(),
                     [&](int a, int b) { return t.at[a].unit < t.at[b].unit; });
    return t;
}

std::vector<uint32_t> sort_blocks(const CoefficientImage& image) {
    std::vector<int> zeros(image.blocks.size());
    for (size_t j = 0; j < image.blocks.size(); ++j) {
        int z = 0;
        for (int k = 1; k < 64; ++k)
            if (image.blocks[j].zz[k] == 0) ++z;
        zeros[j] = z;
    }
    std::vector<uint32_t> order(image.blocks.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](uint32_t a, uint32_t b) { return zeros[a] > zeros[b]; });
    return order;
}

DctEmbedPlan plan_dct(const CoefficientImage& image, uint64_t l1, const FrequencyCostTable& costs,
                      const CodeLengthTable& clt) {
    DctEmbedPlan plan;
    plan.l1 = l1;
    if (l1 == 0) return plan;

    auto order = sort_blocks(image);
    const size_t nb = image.blocks.size();

    // Incrementally grown per-block carrier counts and costs for the current
    // frequency prefix, evaluated over the sorted block order.
    std::vector<int64_t> carriers(nb, 0);
    std::vector<double> cost(nb, 0.0);

    bool found = false;
    int best_k = 0;
    uint32_t best_n = 0;
    double best_cost = 0.0;

    for (size_t ki = 0; ki < costs.order.size(); ++ki) {
        int freq = costs.order[ki];
        for (size_t j = 0; j < nb; ++j) {
            const Block& blk = image.blocks[order[j]];
            int d = blk.zz[freq];
            if (d == 0) continue;
            if (d == 1 || d == -1) carriers[j] += 1;
            cost[j] += coefficient_cost(d, token_run(blk, freq), clt);
        }
        // minimal block prefix holding >= l1 carriers
        int64_t acc = 0;
        double c = 0.0;
        uint32_t n = 0;
        for (size_t j = 0; j < nb; ++j) {
            acc += carriers[j];
            c += cost[j];
            if (acc >= static_cast<int64_t>(l1)) {
                n = static_cast<uint32_t>(j + 1);
                break;
            }
        }
        if (n == 0) continue; // this prefix cannot hold the payload
        if (!found || c < best_cost) {
            found = true;
            best_k = static_cast<int>(ki + 1);
            best_n = n;
            best_cost = c;
        }
    }
    if (!found) throw Error(Err::InsufficientCapacity);

    plan.k_bar = best_k;
    plan.n_bar = best_n;
    plan.estimated_expansion = best_cost;
    plan.freq_set.assign(costs.order.begin(), costs.order.begin() + best_k);
    std::sort(plan.freq_set.begin(), plan.freq_set.end());
    for (int f : plan.freq_set) plan.in_set[f] = true;
    return plan;
}

int embed_dct(CoefficientImage& image, std::span<const uint8_t> bits, const DctEmbedPlan& plan) {
    if (bits.size() > plan.l1) throw Error(Err::CapacityExceeded);
    if (bits.empty()) return 0;

    auto order = sort_blocks(image);
    size_t bi = 0;
    for (int run = 0; run <= 15; ++run) {
        for (uint32_t j = 0; j < plan.n_bar; ++j) {
            Block& blk = image.blocks[order[j]];
            for (int k = 1; k < 64; ++k) {
                int d = blk.zz[k];
                if (d == 0 || !plan.in_set[k]) continue;
                if (token_run(blk, k) != run) continue;
                if (d == 1 || d == -1) {
                    // carriers after the last bit stay untouched
                    if (bi < bits.size()) {
                        blk.zz[k] = static_cast<int16_t>(embed_coefficient(d, bits[bi]));
                        ++bi;
                    }
                } else {
                    // non-carriers shift through the end of the final pass
                    blk.zz[k] = static_cast<int16_t>(embed_coefficient(d, 0));
                }
            }
        }
        if (bi == bits.size()) return run;
    }
    throw Error(Err::CapacityExceeded);
}

std::vector<uint8_t> extract_dct(CoefficientImage& image, const DctEmbedPlan& plan) {
    std::vector<uint8_t> bits;
    bits.reserve(plan.l1);
    if (plan.l1 == 0) return bits;

    auto order = sort_blocks(image);
    for (int run = 0; run <= plan.run_bar; ++run) {
        for (uint32_t j = 0; j < plan.n_bar; ++j) {
            Block& blk = image.blocks[order[j]];
            for (int k = 1; k < 64; ++k) {
                int d = blk.zz[k];
                if (d == 0 || !plan.in_set[k]) continue;
                if (token_run(blk, k) != run) continue;
                if (bits.size() < plan.l1) {
                    auto rec = extract_recover_coefficient(d);
                    if (rec.bit) bits.push_back(static_cast<uint8_t>(*rec.bit));
                    blk.zz[k] = static_cast<int16_t>(rec.value);
                } else {
                    // post-payload region of the final pass: only shifts happened
                    int mag = d < 0 ? -d : d;
                    if (mag >= 3)
                        blk.zz[k] = static_cast<int16_t>(d - (d > 0 ? 1 : -1));
                    else if (mag == 2)
                        throw Error(Err::IntegrityFailure, "carrier value after payload end");
                }
            }
        }
    }
    if (bits.size() < plan.l1) throw Error(Err::PayloadUnderrun);
    return bits;
}

} // namespace mdrdh
