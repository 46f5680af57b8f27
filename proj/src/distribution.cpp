#include "mdrdh/distribution.hpp"

#include <algorithm>
#include <cstring>
#include <limits>

namespace mdrdh {

const char* mode_name(EmbedMode m) {
    switch (m) {
    case EmbedMode::Multi: return "multi";
    case EmbedMode::DctOnly: return "dct-only";
    case EmbedMode::EntropyOnly: return "entropy-only";
    case EmbedMode::HuffOptOnly: return "huffopt-only";
    }
    return "?";
}

namespace {

struct FillResult {
    bool feasible = false;
    double cost = 0.0;
    uint64_t l2 = 0;
    int k = 0;
};

// Cheapest-first fill of `length` bits into the DCT venues plus an optional
// peak venue of the given cost/capacity.
FillResult fill(std::span<const CostVenue> dct, double peak_cost, uint64_t peak_cap,
                uint64_t length, bool with_peak) {
    FillResult r;
    uint64_t remaining = length;
    size_t vi = 0;
    bool peak_spent = !with_peak;
    while (remaining > 0) {
        bool take_peak = !peak_spent && (vi >= dct.size() || peak_cost <= dct[vi].unit_cost);
        if (take_peak) {
            uint64_t take = std::min(remaining, peak_cap);
            r.cost += peak_cost * static_cast<double>(take);
            r.l2 += take;
            remaining -= take;
            peak_spent = true;
        } else if (vi < dct.size()) {
            uint64_t take = std::min(remaining, dct[vi].capacity);
            r.cost += dct[vi].unit_cost * static_cast<double>(take);
            remaining -= take;
            if (take > 0) r.k = static_cast<int>(vi + 1);
            ++vi;
        } else {
            return r; // infeasible
        }
    }
    r.feasible = true;
    return r;
}

} // namespace

DistributionState initialize_distribution(std::span<const CostVenue> dct_venues,
                                          std::span<const PeakVenue> peaks, uint64_t length) {
    DistributionState best;
    best.length = length;
    if (length == 0) return best;

    bool found = false;
    double best_cost = std::numeric_limits<double>::infinity();

    auto consider = [&](const FillResult& r, const PeakVenue* peak) {
        if (!r.feasible) return;
        bool better = !found || r.cost < best_cost ||
                      (r.cost == best_cost && r.l2 > best.l2) ||
                      (r.cost == best_cost && r.l2 == best.l2 && peak && best.has_peak &&
                       peak->position < best.peak_position);
        if (!better) return;
        found = true;
        best_cost = r.cost;
        best.l2 = r.l2;
        best.l1 = length - r.l2;
        best.k = r.k;
        best.estimated_cost = r.cost;
        best.has_peak = peak != nullptr && r.l2 > 0;
        best.peak_position = best.has_peak ? peak->position : -1;
        best.peak_symbol = best.has_peak ? peak->symbol : 0;
    };

    consider(fill(dct_venues, 0.0, 0, length, false), nullptr);
    for (const auto& p : peaks) {
        if (p.count < 2) continue; // capacity count-1 must leave the strict bound satisfiable
        consider(fill(dct_venues, p.unit_cost, p.count - 1, length, true), &p);
    }
    if (!found) throw Error(Err::InsufficientTotalCapacity);
    return best;
}

std::vector<uint8_t> SideInfo::to_segment_payload() const {
    std::vector<uint8_t> p;
    p.reserve(6 + kRecordBytes);
    p.insert(p.end(), kIdentifier, kIdentifier + 6);
    auto put32 = [&](uint32_t v) {
        p.push_back(static_cast<uint8_t>(v >> 24));
        p.push_back(static_cast<uint8_t>(v >> 16));
        p.push_back(static_cast<uint8_t>(v >> 8));
        p.push_back(static_cast<uint8_t>(v));
    };
    p.push_back(version);
    put32(l1);
    put32(l2);
    for (int i = 7; i >= 0; --i) p.push_back(static_cast<uint8_t>(freq_bitmap >> (i * 8)));
    put32(n_bar);
    p.push_back(run_bar);
    put32(payload_len);
    return p;
}

SideInfo SideInfo::from_segment_payload(std::span<const uint8_t> payload) {
    if (payload.size() != 6 + kRecordBytes ||
        std::memcmp(payload.data(), kIdentifier, 6) != 0)
        throw Error(Err::NotMarked);
    SideInfo si;
    size_t o = 6;
    auto get32 = [&]() {
        uint32_t v = (static_cast<uint32_t>(payload[o]) << 24) | (payload[o + 1] << 16) |
                     (payload[o + 2] << 8) | payload[o + 3];
        o += 4;
        return v;
    };
    si.version = payload[o++];
    if (si.version != 1) throw Error(Err::NotMarked, "unknown side-info version");
    si.l1 = get32();
    si.l2 = get32();
    si.freq_bitmap = 0;
    for (int i = 0; i < 8; ++i) si.freq_bitmap = (si.freq_bitmap << 8) | payload[o++];
    si.n_bar = get32();
    si.run_bar = payload[o++];
    si.payload_len = get32();
    return si;
}

namespace {

void require_standard_ac(const JpegFile& f) {
    const auto& std_spec = standard_ac_spec();
    if (f.ac_spec.counts != std_spec.counts || f.ac_spec.symbols != std_spec.symbols)
        throw Error(Err::NonStandardTable, "AC table is not the default Annex-K table");
}

struct MarkedState {
    CoefficientImage image;
    std::vector<AcToken> tokens;
    DctEmbedPlan plan;
};

class Pipeline {
public:
    Pipeline(std::span<const uint8_t> bytes, std::span<const uint8_t> payload)
        : file_(parse(bytes)), payload_(payload) {
        require_standard_ac(file_);
        auto ds = entropy_decode(file_);
        image_ = std::move(ds.image);
        tokens_ = std::move(ds.tokens);
        dc_assign_ = build_code_assignment(file_.dc_spec);
        std_ac_assign_ = build_code_assignment(standard_ac_spec());
        clt_ = code_length_tables(std_ac_assign_);
        costs_ = frequency_costs(image_, clt_);
    }

    EmbedResult run(EmbedMode mode) {
        switch (mode) {
        case EmbedMode::HuffOptOnly:
            if (!payload_.empty()) throw Error(Err::CapacityError, "huffopt-only carries no payload");
            return finish_entropy_stage(MarkedState{image_, tokens_, {}}, 0, 0, false);
        case EmbedMode::DctOnly: {
            auto st = embed_l1(payload_.size());
            return finish_plain(std::move(st));
        }
        case EmbedMode::EntropyOnly: {
            return run_entropy_only();
        }
        case EmbedMode::Multi:
            return run_multi();
        }
        throw Error(Err::IntegrityFailure);
    }

private:
    MarkedState embed_l1(uint64_t l1) {
        MarkedState st;
        st.image = image_;
        st.tokens = tokens_;
        st.plan = plan_dct(st.image, l1, costs_, clt_);
        if (l1 > 0) {
            st.plan.run_bar = embed_dct(st.image, payload_.subspan(0, l1), st.plan);
            sync_tokens(st.tokens, st.image);
        }
        return st;
    }

    // DCT-only output: table untouched, side info appended.
    EmbedResult finish_plain(MarkedState st) {
        JpegFile out = file_;
        out.scan = entropy_encode(st.image, st.tokens, dc_assign_, std_ac_assign_);
        EmbedResult res;
        res.l1 = st.plan.l1;
        res.k_bar = st.plan.k_bar;
        res.n_bar = st.plan.n_bar;
        res.run_bar = st.plan.run_bar;
        insert_side_info(out, st.plan, res.l1, 0);
        res.bytes = serialize(out);
        return res;
    }

    EmbedResult run_entropy_only() {
        uint64_t l2 = payload_.size();
        MarkedState st{image_, tokens_, {}};
        return finish_entropy_stage(std::move(st), 0, l2, true);
    }

    EmbedResult run_multi() {
        const uint64_t length = payload_.size();

        std::vector<CostVenue> venues;
        for (int k : costs_.order)
            venues.push_back({costs_.at[k].unit, static_cast<uint64_t>(costs_.at[k].carriers)});

        std::vector<PeakVenue> peaks;
        {
            auto hist0 = build_histogram(tokens_, file_.ac_spec);
            auto [sorted0, spec0] = optimize_table(hist0);
            try {
                auto e0 = entropy_costs(sorted0);
                for (const auto& e : e0.entries)
                    peaks.push_back({e.unit, e.count, e.position, e.symbol});
            } catch (const Error& err) {
                if (err.code() != Err::NoZeroPoint) throw;
            }
        }

        DistributionState st = initialize_distribution(venues, peaks, length);
        uint64_t l1 = st.l1, l2 = st.l2;
        uint8_t peak_symbol = st.peak_symbol;
        bool has_peak = st.has_peak && l2 > 0;

        MarkedState cur = embed_l1(l1);

        if (has_peak) {
            refine(cur, l1, l2, peak_symbol, has_peak);
            if (has_peak) judge_peak(cur, l1, l2, peak_symbol, has_peak);
        }
        return finish_entropy_stage(std::move(cur), l1, l2, has_peak, peak_symbol, has_peak);
    }

    // Keep L2 strictly under the marked-image peak count, moving the excess
    // to the DCT budget; falls back to the tallest peak, then to L2 = 0.
    void refine(MarkedState& cur, uint64_t& l1, uint64_t& l2, uint8_t& peak_symbol,
                bool& has_peak) {
        const uint64_t length = payload_.size();
        bool switched_to_tallest = false;
        for (int iter = 0;; ++iter) {
            if (l2 == 0) {
                has_peak = false;
                l1 = length;
                cur = embed_l1(l1);
                return;
            }
            auto hist = build_histogram(cur.tokens, standard_ac_spec());
            uint64_t cnt = hist.count_of(peak_symbol);
            if (cnt > l2) return; // converged

            if (iter >= 8 && !switched_to_tallest) {
                // fall back to the largest feasible peak of the marked image
                uint32_t best = 0;
                for (const auto& e : hist.entries)
                    if (e.count > best) {
                        best = e.count;
                        peak_symbol = e.symbol;
                    }
                switched_to_tallest = true;
                cnt = best;
                if (cnt > l2) return;
            }
            uint64_t excess = l2 - cnt + 1;
            if (excess >= l2 || iter >= 64) {
                has_peak = false;
                l1 = length;
                l2 = 0;
                cur = embed_l1(l1);
                return;
            }
            l2 -= excess;
            l1 += excess;
            cur = embed_l1(l1);
        }
    }

    void judge_peak(MarkedState& cur, uint64_t& l1, uint64_t& l2, uint8_t& peak_symbol,
                    bool& has_peak) {
        auto hist = build_histogram(cur.tokens, standard_ac_spec());
        auto [sorted, spec] = optimize_table(hist);
        EntropyCostTable marked_costs;
        try {
            marked_costs = entropy_costs(sorted);
        } catch (const Error& err) {
            if (err.code() == Err::NoZeroPoint) return;
            throw;
        }
        int jprime_pos = sorted.position_of(peak_symbol);
        const EntropyCostEntry* jp = marked_costs.find_position(jprime_pos);
        if (!jp) return;

        const EntropyCostEntry* jpp = nullptr;
        for (const auto& e : marked_costs.entries) {
            if (e.unit < jp->unit && (!jpp || e.count > jpp->count)) jpp = &e;
        }
        if (!jpp || jpp->count < 2) return;

        double s1 = jp->unit * static_cast<double>(l2) -
                    jpp->unit * static_cast<double>(jpp->count);
        uint64_t delta = l2 > jpp->count - 1 ? l2 - (jpp->count - 1) : 0;

        double s2;
        {
            auto prefix_for = [&](uint64_t bits) -> std::optional<int> {
                int64_t acc = 0;
                for (size_t i = 0; i < costs_.order.size(); ++i) {
                    acc += costs_.at[costs_.order[i]].carriers;
                    if (acc >= static_cast<int64_t>(bits)) return static_cast<int>(i + 1);
                }
                return bits == 0 ? std::optional<int>(0) : std::nullopt;
            };
            auto k0 = prefix_for(l1);
            auto k1 = prefix_for(l1 + delta);
            if (!k0 || !k1) return; // DCT domain cannot absorb the move
            s2 = 0.0;
            for (int i = *k0; i < *k1; ++i) s2 += costs_.at[costs_.order[i]].expansion;
        }

        if (s1 > s2) {
            peak_symbol = jpp->symbol;
            l2 -= delta;
            l1 += delta;
            cur = embed_l1(l1);
            refine(cur, l1, l2, peak_symbol, has_peak);
        }
    }

    // Table sort, optional shift/embed of the entropy payload, side info,
    // serialization.
    EmbedResult finish_entropy_stage(MarkedState st, uint64_t l1, uint64_t l2, bool use_peak,
                                     uint8_t peak_symbol = 0, bool peak_symbol_known = false) {
        auto hist = build_histogram(st.tokens, standard_ac_spec());
        auto [sorted, sorted_spec] = optimize_table(hist);

        JpegFile out = file_;
        EmbedResult res;
        res.l1 = l1;
        res.l2 = l2;
        res.k_bar = st.plan.k_bar;
        res.n_bar = st.plan.n_bar;
        res.run_bar = st.plan.run_bar;

        if (use_peak && l2 > 0) {
            PeakZero pz;
            if (peak_symbol_known) {
                pz.p = sorted.position_of(peak_symbol);
                if (pz.p < 0 || sorted.entries[pz.p].count <= l2)
                    throw Error(Err::IntegrityFailure, "refined peak no longer feasible");
                pz.z = -1;
                for (int i = pz.p + 1; i < static_cast<int>(sorted.entries.size()); ++i)
                    if (sorted.entries[i].count == 0) {
                        pz.z = i;
                        break;
                    }
                if (pz.z < 0) throw Error(Err::NoZeroPoint);
            } else {
                try {
                    pz = select_peak(sorted, l2);
                } catch (const Error& err) {
                    if (err.code() == Err::NoFeasiblePeak || err.code() == Err::NoZeroPoint)
                        throw Error(Err::CapacityError, "entropy-domain capacity exceeded");
                    throw;
                }
            }
            auto se = shift_and_embed(st.tokens, sorted, pz, payload_.subspan(l1, l2));
            rewrite_ac_table(out, se.marked_spec);
            out.scan = entropy_encode(st.image, st.tokens, dc_assign_,
                                      build_code_assignment(se.marked_spec), &se.positions);
            res.peak_used = true;
            res.peak_symbol = sorted.entries[pz.p].symbol;
        } else {
            rewrite_ac_table(out, sorted_spec);
            out.scan = entropy_encode(st.image, st.tokens, dc_assign_,
                                      build_code_assignment(sorted_spec));
        }
        insert_side_info(out, st.plan, l1, l2);
        res.bytes = serialize(out);
        return res;
    }

    void insert_side_info(JpegFile& out, const DctEmbedPlan& plan, uint64_t l1, uint64_t l2) {
        SideInfo si;
        si.l1 = static_cast<uint32_t>(l1);
        si.l2 = static_cast<uint32_t>(l2);
        for (int f : plan.freq_set) si.freq_bitmap |= 1ull << (f - 1);
        si.n_bar = plan.n_bar;
        si.run_bar = static_cast<uint8_t>(plan.run_bar);
        si.payload_len = static_cast<uint32_t>(payload_.size());
        Segment seg{marker::APP15, si.to_segment_payload()};
        out.segments.insert(out.segments.begin() + out.sos_index, std::move(seg));
        out.sos_index += 1;
    }

    JpegFile file_;
    std::span<const uint8_t> payload_;
    CoefficientImage image_;
    std::vector<AcToken> tokens_;
    CodeAssignment dc_assign_;
    CodeAssignment std_ac_assign_;
    CodeLengthTable clt_;
    FrequencyCostTable costs_;
};

} // namespace

EmbedResult embed(std::span<const uint8_t> file, std::span<const uint8_t> payload_bits,
                  EmbedMode mode) {
    Pipeline p(file, payload_bits);
    return p.run(mode);
}

ExtractOutput extract(std::span<const uint8_t> marked) {
    JpegFile f = parse(marked);

    std::optional<SideInfo> si;
    for (size_t i = 0; i < f.segments.size(); ++i) {
        const auto& seg = f.segments[i];
        if (seg.marker == marker::APP15 && seg.payload.size() == 6 + SideInfo::kRecordBytes &&
            std::memcmp(seg.payload.data(), SideInfo::kIdentifier, 6) == 0) {
            si = SideInfo::from_segment_payload(seg.payload);
            f.segments.erase(f.segments.begin() + i);
            if (i < f.sos_index) f.sos_index -= 1;
            break;
        }
    }
    if (!si) throw Error(Err::NotMarked);
    if (static_cast<uint64_t>(si->l1) + si->l2 != si->payload_len)
        throw Error(Err::IntegrityFailure, "side-info length mismatch");

    auto ds = entropy_decode(f);

    std::vector<uint8_t> entropy_bits;
    if (si->l2 > 0) {
        auto hist = build_histogram(ds.tokens, standard_ac_spec());
        auto [sorted, spec] = optimize_table(hist);
        PeakZero pz = detect_peak_zero(f.ac_spec, sorted);
        entropy_bits = extract_restore(ds.tokens, ds.positions, pz, si->l2);
    }

    std::vector<uint8_t> dct_bits;
    if (si->l1 > 0) {
        DctEmbedPlan plan;
        plan.l1 = si->l1;
        plan.n_bar = si->n_bar;
        plan.run_bar = si->run_bar;
        for (int k = 1; k < 64; ++k)
            if (si->freq_bitmap & (1ull << (k - 1))) {
                plan.in_set[k] = true;
                plan.freq_set.push_back(k);
            }
        plan.k_bar = static_cast<int>(plan.freq_set.size());
        dct_bits = extract_dct(ds.image, plan);
        sync_tokens(ds.tokens, ds.image);
    }

    ExtractOutput out;
    out.side_info = *si;
    out.payload_bits = std::move(dct_bits);
    out.payload_bits.insert(out.payload_bits.end(), entropy_bits.begin(), entropy_bits.end());

    rewrite_ac_table(f, standard_ac_spec());
    f.scan = entropy_encode(ds.image, ds.tokens, build_code_assignment(f.dc_spec),
                            build_code_assignment(standard_ac_spec()));
    out.original = serialize(f);
    return out;
}

CapacityReport capacity(std::span<const uint8_t> file) {
    JpegFile f = parse(file);
    require_standard_ac(f);
    auto ds = entropy_decode(f);
    auto clt = code_length_tables(build_code_assignment(standard_ac_spec()));
    auto costs = frequency_costs(ds.image, clt);

    CapacityReport rep;
    for (int k : costs.order) rep.dct_carrier_bits += static_cast<uint64_t>(costs.at[k].carriers);
    auto hist = build_histogram(ds.tokens, f.ac_spec);
    auto [sorted, spec] = optimize_table(hist);
    try {
        auto e = entropy_costs(sorted);
        for (const auto& c : e.entries)
            if (c.count >= 2) rep.entropy_peak_bits = std::max<uint64_t>(rep.entropy_peak_bits, c.count - 1);
    } catch (const Error& err) {
        if (err.code() != Err::NoZeroPoint) throw;
    }
    return rep;
}

} // namespace mdrdh
