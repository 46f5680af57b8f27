#include "mdrdh/entropy_domain.hpp"

#include <algorithm>
#include <numeric>

namespace mdrdh {

uint32_t VlcHistogram::count_of(uint8_t symbol) const {
    int p = position_of(symbol);
    return p < 0 ? 0 : entries[static_cast<size_t>(p)].count;
}

int VlcHistogram::position_of(uint8_t symbol) const {
    for (size_t i = 0; i < entries.size(); ++i)
        if (entries[i].symbol == symbol) return static_cast<int>(i);
    return -1;
}

VlcHistogram build_histogram(const std::vector<AcToken>& tokens, const HuffmanSpec& spec) {
    if (spec.total_symbols() != 162) throw Error(Err::NotFullTable);
    VlcHistogram h;
    h.spec = spec;
    auto assign = build_code_assignment(spec);
    h.entries.resize(162);
    for (size_t i = 0; i < 162; ++i) {
        h.entries[i].symbol = spec.symbols[i];
        h.entries[i].code = assign.codes[i].bits;
        h.entries[i].code_len = assign.codes[i].length;
    }
    std::array<uint32_t, 256> counts{};
    for (const auto& t : tokens) counts[t.symbol()] += 1;
    for (auto& e : h.entries) e.count = counts[e.symbol];
    return h;
}

std::pair<VlcHistogram, HuffmanSpec> optimize_table(const VlcHistogram& hist) {
    std::vector<size_t> order(hist.entries.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return hist.entries[a].count > hist.entries[b].count;
    });

    HuffmanSpec sorted_spec = hist.spec;
    for (size_t p = 0; p < order.size(); ++p)
        sorted_spec.symbols[p] = hist.spec.symbols[order[p]];

    VlcHistogram sorted;
    sorted.spec = sorted_spec;
    sorted.entries.resize(hist.entries.size());
    for (size_t p = 0; p < order.size(); ++p) {
        sorted.entries[p] = hist.entries[order[p]];
        // codes stay attached to positions
        sorted.entries[p].code = hist.entries[p].code;
        sorted.entries[p].code_len = hist.entries[p].code_len;
    }
    return {std::move(sorted), std::move(sorted_spec)};
}

const EntropyCostEntry* EntropyCostTable::find_position(int position) const {
    for (const auto& e : entries)
        if (e.position == position) return &e;
    return nullptr;
}

EntropyCostTable entropy_costs(const VlcHistogram& sorted) {
    const auto& e = sorted.entries;
    const int n = static_cast<int>(e.size());

    bool any_zero = false;
    for (const auto& v : e) any_zero = any_zero || v.count == 0;
    if (!any_zero) throw Error(Err::NoZeroPoint);

    EntropyCostTable t;
    for (int p = 0; p + 1 < n; ++p) {
        if (e[p].count == 0) continue;
        int z = -1;
        for (int i = p + 1; i < n; ++i)
            if (e[i].count == 0) {
                z = i;
                break;
            }
        if (z < 0) continue;
        EntropyCostEntry c;
        c.position = p;
        c.symbol = e[p].symbol;
        c.count = e[p].count;
        for (int i = p + 1; i < z; ++i)
            c.shift += static_cast<double>(e[i].count) * (e[i + 1].code_len - e[i].code_len);
        c.embed = 0.5 * c.count * (e[p + 1].code_len - e[p].code_len);
        c.unit = (c.shift + c.embed) / c.count;
        t.entries.push_back(c);
    }
    std::stable_sort(t.entries.begin(), t.entries.end(), [](const auto& a, const auto& b) {
        return a.unit < b.unit;
    });
    return t;
}

PeakZero select_peak(const VlcHistogram& sorted, uint64_t l2) {
    const auto& e = sorted.entries;
    int p = -1;
    for (int i = static_cast<int>(e.size()) - 1; i >= 0; --i)
        if (e[i].count > l2) {
            p = i;
            break;
        }
    if (p < 0) throw Error(Err::NoFeasiblePeak);
    for (int i = p + 1; i < static_cast<int>(e.size()); ++i)
        if (e[i].count == 0) return {p, i};
    throw Error(Err::NoZeroPoint);
}

ShiftEmbedResult shift_and_embed(const std::vector<AcToken>& tokens, const VlcHistogram& sorted,
                                 PeakZero pz, std::span<const uint8_t> bits) {
    const int p = pz.p, z = pz.z;
    const auto& e = sorted.entries;
    if (p < 0 || z <= p || z >= static_cast<int>(e.size()) || e[p].count == 0 || e[z].count != 0)
        throw Error(Err::IntegrityFailure, "bad peak/zero");
    if (bits.size() > e[p].count) throw Error(Err::PayloadOverflow);

    ShiftEmbedResult res;
    res.marked_spec = sorted.spec;
    for (int i = z; i > p + 1; --i) res.marked_spec.symbols[i] = sorted.spec.symbols[i - 1];
    res.marked_spec.symbols[p + 1] = sorted.spec.symbols[p]; // the extraction beacon

    // sorted position per symbol (positions are unique before shifting)
    std::array<int32_t, 256> pos_of;
    pos_of.fill(-1);
    for (size_t i = 0; i < e.size(); ++i) pos_of[e[i].symbol] = static_cast<int32_t>(i);

    res.positions.resize(tokens.size());
    size_t bi = 0;
    for (size_t i = 0; i < tokens.size(); ++i) {
        int32_t pos = pos_of[tokens[i].symbol()];
        if (pos < 0) throw Error(Err::UnmappableSymbol);
        if (pos == p) {
            if (bi < bits.size()) {
                res.positions[i] = bits[bi] ? p + 1 : p;
                ++bi;
            } else {
                res.positions[i] = p;
            }
        } else if (pos > p && pos < z) {
            res.positions[i] = pos + 1;
        } else {
            res.positions[i] = pos;
        }
    }
    if (bi < bits.size()) throw Error(Err::PayloadOverflow);
    return res;
}

PeakZero detect_peak_zero(const HuffmanSpec& marked, const VlcHistogram& sorted) {
    std::array<int, 256> first;
    first.fill(-1);
    int dup_sym = -1, dup_pos = -1;
    for (size_t i = 0; i < marked.symbols.size(); ++i) {
        uint8_t s = marked.symbols[i];
        if (first[s] < 0) {
            first[s] = static_cast<int>(i);
        } else {
            if (dup_sym >= 0) throw Error(Err::MultipleDuplicates);
            dup_sym = s;
            dup_pos = first[s];
            if (static_cast<int>(i) != dup_pos + 1)
                throw Error(Err::IntegrityFailure, "duplicate codes not adjacent");
        }
    }
    if (dup_sym < 0) throw Error(Err::NoDuplicate);

    if (sorted.entries[static_cast<size_t>(dup_pos)].symbol != dup_sym)
        throw Error(Err::IntegrityFailure, "peak symbol mismatch");
    for (int i = dup_pos + 1; i < static_cast<int>(sorted.entries.size()); ++i)
        if (sorted.entries[i].count == 0) return {dup_pos, i};
    throw Error(Err::IntegrityFailure, "no zero point right of peak");
}

std::vector<uint8_t> extract_restore(const std::vector<AcToken>& tokens,
                                     const std::vector<int32_t>& positions, PeakZero pz,
                                     uint64_t l2) {
    std::vector<uint8_t> bits;
    bits.reserve(l2);
    for (size_t i = 0; i < tokens.size() && bits.size() < l2; ++i) {
        if (positions[i] == pz.p)
            bits.push_back(0);
        else if (positions[i] == pz.p + 1)
            bits.push_back(1);
    }
    if (bits.size() < l2) throw Error(Err::PayloadUnderrun);
    return bits;
}

} // namespace mdrdh
