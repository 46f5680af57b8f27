#include "mdrdh/jpeg.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

namespace mdrdh {

const char* err_name(Err e) {
    switch (e) {
    case Err::NotBaseline: return "NotBaseline";
    case Err::NotGrayscale: return "NotGrayscale";
    case Err::RestartIntervalsPresent: return "RestartIntervalsPresent";
    case Err::ArithmeticCoding: return "ArithmeticCoding";
    case Err::TruncatedStream: return "TruncatedStream";
    case Err::InvalidMarker: return "InvalidMarker";
    case Err::NotFullTable: return "NotFullTable";
    case Err::NonStandardTable: return "NonStandardTable";
    case Err::KraftViolation: return "KraftViolation";
    case Err::InvalidCode: return "InvalidCode";
    case Err::BlockOverflow: return "BlockOverflow";
    case Err::UnmappableSymbol: return "UnmappableSymbol";
    case Err::ZeroCoefficient: return "ZeroCoefficient";
    case Err::MissingSymbol: return "MissingSymbol";
    case Err::InsufficientCapacity: return "InsufficientCapacity";
    case Err::CapacityExceeded: return "CapacityExceeded";
    case Err::PayloadUnderrun: return "PayloadUnderrun";
    case Err::PayloadOverflow: return "PayloadOverflow";
    case Err::NoZeroPoint: return "NoZeroPoint";
    case Err::NoFeasiblePeak: return "NoFeasiblePeak";
    case Err::NoDuplicate: return "NoDuplicate";
    case Err::MultipleDuplicates: return "MultipleDuplicates";
    case Err::InsufficientTotalCapacity: return "InsufficientTotalCapacity";
    case Err::NotMarked: return "NotMarked";
    case Err::IntegrityFailure: return "IntegrityFailure";
    case Err::CapacityError: return "CapacityError";
    case Err::DimensionMismatch: return "DimensionMismatch";
    case Err::IoError: return "IoError";
    }
    return "Unknown";
}

const std::array<uint8_t, 64> kZigzagToNatural = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

size_t HuffmanSpec::total_symbols() const {
    size_t n = 0;
    for (uint8_t c : counts) n += c;
    return n;
}

const HuffmanSpec& standard_ac_spec() {
    static const HuffmanSpec spec = [] {
        HuffmanSpec s;
        s.table_class = 1;
        s.table_id = 0;
        s.counts = {0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7D};
        s.symbols = {
            0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41,
            0x06, 0x13, 0x51, 0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91,
            0xA1, 0x08, 0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0, 0x24,
            0x33, 0x62, 0x72, 0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A,
            0x25, 0x26, 0x27, 0x28, 0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38,
            0x39, 0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4A, 0x53,
            0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5A, 0x63, 0x64, 0x65, 0x66,
            0x67, 0x68, 0x69, 0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79,
            0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8A, 0x92, 0x93,
            0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5,
            0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6, 0xB7,
            0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9,
            0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1,
            0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF1, 0xF2,
            0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA};
        return s;
    }();
    return spec;
}

const HuffmanSpec& standard_dc_spec() {
    static const HuffmanSpec spec = [] {
        HuffmanSpec s;
        s.table_class = 0;
        s.table_id = 0;
        s.counts = {0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
        s.symbols = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
        return s;
    }();
    return spec;
}

CodeAssignment build_code_assignment(const HuffmanSpec& spec) {
    CodeAssignment a;
    a.counts = spec.counts;
    a.symbols = spec.symbols;
    a.position_of.fill(-1);
    a.codes.reserve(spec.symbols.size());

    uint32_t code = 0;
    size_t sym = 0;
    for (int len = 1; len <= 16; ++len) {
        for (int i = 0; i < spec.counts[len - 1]; ++i) {
            if (code >= (1u << len)) throw Error(Err::KraftViolation);
            a.codes.push_back({static_cast<uint16_t>(code), static_cast<uint8_t>(len)});
            ++code;
            ++sym;
        }
        code <<= 1;
    }
    if (sym != spec.symbols.size()) throw Error(Err::KraftViolation, "counts/symbols mismatch");
    for (size_t p = 0; p < a.symbols.size(); ++p) {
        if (a.position_of[a.symbols[p]] < 0)
            a.position_of[a.symbols[p]] = static_cast<int>(p);
    }
    return a;
}

const CodeEntry& CodeAssignment::code_for(uint8_t symbol) const {
    int p = position_of[symbol];
    if (p < 0) throw Error(Err::UnmappableSymbol);
    return codes[static_cast<size_t>(p)];
}

int vli_size(int value) {
    int mag = value < 0 ? -value : value;
    int size = 0;
    while (mag) {
        ++size;
        mag >>= 1;
    }
    return size;
}

uint16_t vli_bits(int value, int size) {
    if (value >= 0) return static_cast<uint16_t>(value);
    return static_cast<uint16_t>(value + (1 << size) - 1);
}

int vli_decode(uint32_t bits, int size) {
    if (size == 0) return 0;
    if (bits < (1u << (size - 1))) return static_cast<int>(bits) - (1 << size) + 1;
    return static_cast<int>(bits);
}

namespace {

uint16_t read_u16(std::span<const uint8_t> b, size_t off) {
    return static_cast<uint16_t>((b[off] << 8) | b[off + 1]);
}

struct TableRef {
    int table_class;
    int table_id;
};

// Split a DHT payload into individual table specs.
std::vector<HuffmanSpec> parse_dht_payload(const std::vector<uint8_t>& p) {
    std::vector<HuffmanSpec> tables;
    size_t off = 0;
    while (off < p.size()) {
        if (off + 17 > p.size()) throw Error(Err::TruncatedStream, "DHT");
        HuffmanSpec spec;
        spec.table_class = p[off] >> 4;
        spec.table_id = p[off] & 0x0F;
        size_t n = 0;
        for (int i = 0; i < 16; ++i) {
            spec.counts[i] = p[off + 1 + i];
            n += spec.counts[i];
        }
        off += 17;
        if (off + n > p.size()) throw Error(Err::TruncatedStream, "DHT symbols");
        spec.symbols.assign(p.begin() + off, p.begin() + off + n);
        off += n;
        tables.push_back(std::move(spec));
    }
    return tables;
}

std::vector<uint8_t> build_dht_payload(const std::vector<HuffmanSpec>& tables) {
    std::vector<uint8_t> p;
    for (const auto& t : tables) {
        p.push_back(static_cast<uint8_t>((t.table_class << 4) | t.table_id));
        p.insert(p.end(), t.counts.begin(), t.counts.end());
        p.insert(p.end(), t.symbols.begin(), t.symbols.end());
    }
    return p;
}

class BitReader {
public:
    explicit BitReader(std::span<const uint8_t> data) : data_(data) {}

    int next_bit() {
        if (pos_ >= data_.size() * 8) throw Error(Err::TruncatedStream, "scan");
        int bit = (data_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1;
        ++pos_;
        return bit;
    }

    uint32_t bits(int n) {
        uint32_t v = 0;
        for (int i = 0; i < n; ++i) v = (v << 1) | static_cast<uint32_t>(next_bit());
        return v;
    }

private:
    std::span<const uint8_t> data_;
    size_t pos_ = 0;
};

class BitWriter {
public:
    void put(uint32_t bits, int n) {
        for (int i = n - 1; i >= 0; --i) put_bit((bits >> i) & 1);
    }

    void put_bit(int bit) {
        cur_ = static_cast<uint8_t>((cur_ << 1) | bit);
        if (++nbits_ == 8) flush_byte();
    }

    std::vector<uint8_t> finish() {
        while (nbits_ != 0) put_bit(1); // pad with 1-bits
        return std::move(out_);
    }

private:
    void flush_byte() {
        out_.push_back(cur_);
        if (cur_ == 0xFF) out_.push_back(0x00); // byte stuffing
        cur_ = 0;
        nbits_ = 0;
    }

    std::vector<uint8_t> out_;
    uint8_t cur_ = 0;
    int nbits_ = 0;
};

// T.81-style canonical decoder: mincode/maxcode/valptr per length.
struct HuffmanDecoder {
    std::array<int32_t, 17> mincode{};
    std::array<int32_t, 17> maxcode{}; // -1 when no codes of that length
    std::array<int32_t, 17> valptr{};
    const CodeAssignment* assign = nullptr;

    explicit HuffmanDecoder(const CodeAssignment& a) : assign(&a) {
        int32_t code = 0;
        int32_t p = 0;
        for (int len = 1; len <= 16; ++len) {
            if (a.counts[len - 1] == 0) {
                maxcode[len] = -1;
            } else {
                valptr[len] = p;
                mincode[len] = code;
                p += a.counts[len - 1];
                code += a.counts[len - 1];
                maxcode[len] = code - 1;
            }
            code <<= 1;
        }
    }

    // Returns the code position within the table.
    int decode(BitReader& br) const {
        int32_t code = br.next_bit();
        for (int len = 1; len <= 16; ++len) {
            if (maxcode[len] >= 0 && code <= maxcode[len])
                return valptr[len] + (code - mincode[len]);
            code = (code << 1) | br.next_bit();
        }
        throw Error(Err::InvalidCode);
    }
};

std::vector<uint8_t> destuff(std::span<const uint8_t> scan) {
    std::vector<uint8_t> out;
    out.reserve(scan.size());
    for (size_t i = 0; i < scan.size(); ++i) {
        out.push_back(scan[i]);
        if (scan[i] == 0xFF) {
            if (i + 1 >= scan.size() || scan[i + 1] != 0x00)
                throw Error(Err::InvalidMarker, "unexpected marker in scan");
            ++i;
        }
    }
    return out;
}

} // namespace

JpegFile parse(std::span<const uint8_t> bytes) {
    if (bytes.size() < 4 || bytes[0] != 0xFF || bytes[1] != marker::SOI)
        throw Error(Err::InvalidMarker, "missing SOI");

    JpegFile f;
    f.segments.push_back({marker::SOI, {}});

    bool have_sof = false;
    bool have_sos = false;
    std::optional<int> dc_id, ac_id;
    size_t off = 2;

    while (true) {
        if (off + 2 > bytes.size()) throw Error(Err::TruncatedStream);
        if (bytes[off] != 0xFF) throw Error(Err::InvalidMarker);
        uint8_t m = bytes[off + 1];
        off += 2;

        if (m == marker::EOI) {
            if (!have_sos) throw Error(Err::InvalidMarker, "EOI before SOS");
            f.segments.push_back({marker::EOI, {}});
            if (off != bytes.size())
                throw Error(Err::InvalidMarker, "trailing bytes after EOI");
            break;
        }
        if (m == 0x01 || (m >= 0xD0 && m <= 0xD7))
            throw Error(Err::InvalidMarker, "standalone marker in header");
        if (m >= 0xC1 && m <= 0xCF && m != marker::DHT && m != 0xC8) {
            if (m == 0xC9 || m == 0xCB || m == 0xCD || m == 0xCE || m == 0xCF)
                throw Error(Err::ArithmeticCoding);
            if (m != marker::SOF0) throw Error(Err::NotBaseline);
        }

        if (off + 2 > bytes.size()) throw Error(Err::TruncatedStream);
        uint16_t len = read_u16(bytes, off);
        if (len < 2 || off + len > bytes.size()) throw Error(Err::TruncatedStream);
        Segment seg{m, std::vector<uint8_t>(bytes.begin() + off + 2, bytes.begin() + off + len)};
        off += len;

        if (m == marker::SOF0) {
            const auto& p = seg.payload;
            if (p.size() < 6) throw Error(Err::TruncatedStream, "SOF0");
            if (p[0] != 8) throw Error(Err::NotBaseline, "precision");
            f.height = (p[1] << 8) | p[2];
            f.width = (p[3] << 8) | p[4];
            int ncomp = p[5];
            if (ncomp != 1) throw Error(Err::NotGrayscale);
            if (p.size() < 6 + 3u) throw Error(Err::TruncatedStream, "SOF0 component");
            int tq = p[8];
            if (tq > 3) throw Error(Err::InvalidMarker, "bad quant id");
            have_sof = true;
            f.segments.push_back(std::move(seg));
            // remember which quant table the component uses via table_id stash
            f.quant[0] = static_cast<uint16_t>(tq); // temporarily; resolved below
            continue;
        }
        if (m == marker::DRI) {
            if (seg.payload.size() >= 2 && read_u16(seg.payload, 0) != 0)
                throw Error(Err::RestartIntervalsPresent);
            f.segments.push_back(std::move(seg));
            continue;
        }
        if (m == marker::SOS) {
            const auto& p = seg.payload;
            if (p.size() < 6) throw Error(Err::TruncatedStream, "SOS");
            if (p[0] != 1) throw Error(Err::NotGrayscale, "scan components");
            dc_id = p[2] >> 4;
            ac_id = p[2] & 0x0F;
            have_sos = true;
            f.sos_index = f.segments.size();
            f.segments.push_back(std::move(seg));

            // Scan data runs until the next marker that is not stuffing.
            size_t start = off;
            while (true) {
                if (off + 1 >= bytes.size()) throw Error(Err::TruncatedStream, "scan");
                if (bytes[off] == 0xFF && bytes[off + 1] != 0x00) {
                    if (bytes[off + 1] >= 0xD0 && bytes[off + 1] <= 0xD7)
                        throw Error(Err::RestartIntervalsPresent);
                    break;
                }
                ++off;
            }
            f.scan.assign(bytes.begin() + start, bytes.begin() + off);
            continue;
        }
        f.segments.push_back(std::move(seg));
    }

    if (!have_sof || !have_sos) throw Error(Err::InvalidMarker, "missing SOF0 or SOS");

    // Resolve quantization table and Huffman specs.
    int quant_id = f.quant[0];
    f.quant.fill(0);
    bool have_quant = false, have_dc = false, have_ac = false;
    for (const auto& seg : f.segments) {
        if (seg.marker == marker::DQT) {
            size_t o = 0;
            while (o < seg.payload.size()) {
                int pq = seg.payload[o] >> 4;
                int tq = seg.payload[o] & 0x0F;
                ++o;
                size_t n = pq ? 128 : 64;
                if (o + n > seg.payload.size()) throw Error(Err::TruncatedStream, "DQT");
                if (tq == quant_id) {
                    if (pq != 0) throw Error(Err::NotBaseline, "16-bit quant table");
                    for (int i = 0; i < 64; ++i) f.quant[i] = seg.payload[o + i];
                    have_quant = true;
                }
                o += n;
            }
        } else if (seg.marker == marker::DHT) {
            for (auto& t : parse_dht_payload(seg.payload)) {
                if (t.table_class == 0 && t.table_id == *dc_id) {
                    f.dc_spec = t;
                    have_dc = true;
                } else if (t.table_class == 1 && t.table_id == *ac_id) {
                    f.ac_spec = t;
                    have_ac = true;
                }
            }
        }
    }
    if (!have_quant || !have_dc || !have_ac)
        throw Error(Err::InvalidMarker, "missing DQT or DHT tables");
    if (f.ac_spec.total_symbols() != 162) throw Error(Err::NotFullTable);

    return f;
}

std::vector<uint8_t> serialize(const JpegFile& file) {
    std::vector<uint8_t> out;
    for (size_t i = 0; i < file.segments.size(); ++i) {
        const auto& seg = file.segments[i];
        out.push_back(0xFF);
        out.push_back(seg.marker);
        if (seg.marker != marker::SOI && seg.marker != marker::EOI) {
            uint16_t len = static_cast<uint16_t>(seg.payload.size() + 2);
            out.push_back(static_cast<uint8_t>(len >> 8));
            out.push_back(static_cast<uint8_t>(len & 0xFF));
            out.insert(out.end(), seg.payload.begin(), seg.payload.end());
        }
        if (seg.marker == marker::SOS)
            out.insert(out.end(), file.scan.begin(), file.scan.end());
    }
    return out;
}

void rewrite_ac_table(JpegFile& file, const HuffmanSpec& new_ac) {
    for (auto& seg : file.segments) {
        if (seg.marker != marker::DHT) continue;
        auto tables = parse_dht_payload(seg.payload);
        bool hit = false;
        for (auto& t : tables) {
            if (t.table_class == 1 && t.table_id == file.ac_spec.table_id) {
                int id = t.table_id;
                t = new_ac;
                t.table_class = 1;
                t.table_id = id;
                hit = true;
            }
        }
        if (hit) {
            seg.payload = build_dht_payload(tables);
            file.ac_spec = new_ac;
            file.ac_spec.table_class = 1;
            return;
        }
    }
    throw Error(Err::MissingSymbol, "AC DHT segment not found");
}

DecodedScan entropy_decode(const JpegFile& file) {
    DecodedScan ds;
    auto& img = ds.image;
    img.width = file.width;
    img.height = file.height;
    img.quant = file.quant;
    img.dc_spec = file.dc_spec;
    img.ac_spec = file.ac_spec;

    size_t nblocks = static_cast<size_t>((file.width + 7) / 8) * ((file.height + 7) / 8);
    img.blocks.resize(nblocks);

    auto dc_assign = build_code_assignment(file.dc_spec);
    auto ac_assign = build_code_assignment(file.ac_spec);
    HuffmanDecoder dc_dec(dc_assign), ac_dec(ac_assign);

    auto data = destuff(file.scan);
    BitReader br(data);

    int pred = 0;
    for (size_t b = 0; b < nblocks; ++b) {
        Block& blk = img.blocks[b];
        int pos_dc = dc_dec.decode(br);
        int dc_size = dc_assign.symbols[pos_dc];
        int diff = vli_decode(br.bits(dc_size), dc_size);
        pred += diff;
        blk.zz[0] = static_cast<int16_t>(pred);

        int k = 1;
        while (k < 64) {
            int pos = ac_dec.decode(br);
            uint8_t sym = ac_assign.symbols[pos];
            int run = sym >> 4;
            int size = sym & 0x0F;
            AcToken tok;
            tok.run = static_cast<uint8_t>(run);
            tok.size = static_cast<uint8_t>(size);
            tok.block = static_cast<uint32_t>(b);
            if (size == 0) {
                if (run == 0) { // EOB
                    ds.tokens.push_back(tok);
                    ds.positions.push_back(pos);
                    break;
                }
                if (run == 15) { // ZRL
                    k += 16;
                    if (k > 64) throw Error(Err::BlockOverflow);
                    ds.tokens.push_back(tok);
                    ds.positions.push_back(pos);
                    continue;
                }
                throw Error(Err::InvalidCode, "run/size with size 0");
            }
            k += run;
            if (k >= 64) throw Error(Err::BlockOverflow);
            int value = vli_decode(br.bits(size), size);
            tok.value = static_cast<int16_t>(value);
            tok.pos = static_cast<uint8_t>(k);
            blk.zz[k] = static_cast<int16_t>(value);
            ds.tokens.push_back(tok);
            ds.positions.push_back(pos);
            ++k;
        }
    }
    return ds;
}

namespace {

template <typename Sink>
void encode_scan_impl(const CoefficientImage& image, const std::vector<AcToken>& tokens,
                      const CodeAssignment& dc, const CodeAssignment& ac,
                      const std::vector<int32_t>* positions, Sink&& sink) {
    int pred = 0;
    size_t ti = 0;
    for (size_t b = 0; b < image.blocks.size(); ++b) {
        int dcv = image.blocks[b].zz[0];
        int diff = dcv - pred;
        pred = dcv;
        int size = vli_size(diff);
        const CodeEntry& dcode = dc.code_for(static_cast<uint8_t>(size));
        sink(dcode.bits, dcode.length);
        if (size) sink(vli_bits(diff, size), size);

        while (ti < tokens.size() && tokens[ti].block == b) {
            const AcToken& t = tokens[ti];
            const CodeEntry& ce = positions ? ac.codes[static_cast<size_t>((*positions)[ti])]
                                            : ac.code_for(t.symbol());
            sink(ce.bits, ce.length);
            if (t.size) sink(vli_bits(t.value, t.size), t.size);
            ++ti;
        }
    }
    if (ti != tokens.size()) throw Error(Err::IntegrityFailure, "unconsumed tokens");
}

} // namespace

std::vector<uint8_t> entropy_encode(const CoefficientImage& image,
                                    const std::vector<AcToken>& tokens,
                                    const CodeAssignment& dc, const CodeAssignment& ac,
                                    const std::vector<int32_t>* positions) {
    BitWriter bw;
    encode_scan_impl(image, tokens, dc, ac, positions,
                     [&](uint32_t bits, int n) { bw.put(bits, n); });
    return bw.finish();
}

uint64_t scan_bit_length(const CoefficientImage& image, const std::vector<AcToken>& tokens,
                         const CodeAssignment& dc, const CodeAssignment& ac,
                         const std::vector<int32_t>* positions) {
    uint64_t total = 0;
    encode_scan_impl(image, tokens, dc, ac, positions,
                     [&](uint32_t, int n) { total += static_cast<uint64_t>(n); });
    return total;
}

void sync_tokens(std::vector<AcToken>& tokens, const CoefficientImage& image) {
    for (auto& t : tokens) {
        if (t.size == 0) continue;
        int v = image.blocks[t.block].zz[t.pos];
        if (v == 0) throw Error(Err::IntegrityFailure, "token coefficient became zero");
        t.value = static_cast<int16_t>(v);
        t.size = static_cast<uint8_t>(vli_size(v));
    }
}

std::vector<AcToken> tokens_from_coefficients(const CoefficientImage& image) {
    std::vector<AcToken> tokens;
    for (size_t b = 0; b < image.blocks.size(); ++b) {
        const Block& blk = image.blocks[b];
        int last_nonzero = 0;
        for (int k = 63; k >= 1; --k)
            if (blk.zz[k] != 0) {
                last_nonzero = k;
                break;
            }
        int run = 0;
        for (int k = 1; k <= last_nonzero; ++k) {
            if (blk.zz[k] == 0) {
                ++run;
                continue;
            }
            while (run > 15) {
                tokens.push_back({15, 0, 0, static_cast<uint32_t>(b), 0});
                run -= 16;
            }
            AcToken t;
            t.run = static_cast<uint8_t>(run);
            t.value = blk.zz[k];
            t.size = static_cast<uint8_t>(vli_size(t.value));
            t.block = static_cast<uint32_t>(b);
            t.pos = static_cast<uint8_t>(k);
            tokens.push_back(t);
            run = 0;
        }
        if (last_nonzero != 63) tokens.push_back({0, 0, 0, static_cast<uint32_t>(b), 0});
    }
    return tokens;
}

JpegFile assemble(const CoefficientImage& image) {
    JpegFile f;
    f.width = image.width;
    f.height = image.height;
    f.quant = image.quant;
    f.dc_spec = image.dc_spec;
    f.ac_spec = image.ac_spec;

    f.segments.push_back({marker::SOI, {}});

    Segment dqt{marker::DQT, {}};
    dqt.payload.push_back(0x00); // 8-bit precision, table 0
    for (int i = 0; i < 64; ++i) dqt.payload.push_back(static_cast<uint8_t>(image.quant[i]));
    f.segments.push_back(std::move(dqt));

    Segment sof{marker::SOF0, {}};
    sof.payload = {8,
                   static_cast<uint8_t>(image.height >> 8),
                   static_cast<uint8_t>(image.height & 0xFF),
                   static_cast<uint8_t>(image.width >> 8),
                   static_cast<uint8_t>(image.width & 0xFF),
                   1,
                   1,    // component id
                   0x11, // 1x1 sampling
                   0};   // quant table 0
    f.segments.push_back(std::move(sof));

    Segment dht{marker::DHT, {}};
    auto append_table = [&](const HuffmanSpec& s, int cls) {
        dht.payload.push_back(static_cast<uint8_t>((cls << 4) | 0));
        dht.payload.insert(dht.payload.end(), s.counts.begin(), s.counts.end());
        dht.payload.insert(dht.payload.end(), s.symbols.begin(), s.symbols.end());
    };
    append_table(image.dc_spec, 0);
    append_table(image.ac_spec, 1);
    f.segments.push_back(std::move(dht));

    Segment sos{marker::SOS, {}};
    sos.payload = {1, 1, 0x00, 0, 63, 0};
    f.sos_index = f.segments.size();
    f.segments.push_back(std::move(sos));

    auto tokens = tokens_from_coefficients(image);
    f.scan = entropy_encode(image, tokens, build_code_assignment(image.dc_spec),
                            build_code_assignment(image.ac_spec));
    f.segments.push_back({marker::EOI, {}});
    return f;
}

PixelImage decode_pixels(const CoefficientImage& image) {
    PixelImage out;
    out.width = image.width;
    out.height = image.height;
    out.samples.assign(static_cast<size_t>(image.width) * image.height, 0);

    // Separable reference IDCT basis.
    static const auto basis = [] {
        std::array<std::array<double, 8>, 8> c{};
        for (int u = 0; u < 8; ++u)
            for (int x = 0; x < 8; ++x) {
                double cu = (u == 0) ? 1.0 / std::numbers::sqrt2 : 1.0;
                c[u][x] = 0.5 * cu * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
            }
        return c;
    }();

    int bw = (image.width + 7) / 8;
    for (size_t b = 0; b < image.blocks.size(); ++b) {
        double coeff[8][8];
        for (int zz = 0; zz < 64; ++zz) {
            int nat = kZigzagToNatural[zz];
            coeff[nat / 8][nat % 8] = static_cast<double>(image.blocks[b].zz[zz]) * image.quant[zz];
        }
        double tmp[8][8];
        for (int x = 0; x < 8; ++x)
            for (int v = 0; v < 8; ++v) {
                double s = 0;
                for (int u = 0; u < 8; ++u) s += basis[u][x] * coeff[u][v];
                tmp[x][v] = s;
            }
        int bx = static_cast<int>(b) % bw;
        int by = static_cast<int>(b) / bw;
        for (int x = 0; x < 8; ++x)
            for (int y = 0; y < 8; ++y) {
                double s = 0;
                for (int v = 0; v < 8; ++v) s += basis[v][y] * tmp[x][v];
                long val = std::lround(s + 128.0);
                val = std::clamp(val, 0L, 255L);
                int px = bx * 8 + y;
                int py = by * 8 + x;
                if (px < image.width && py < image.height)
                    out.samples[static_cast<size_t>(py) * image.width + px] =
                        static_cast<uint8_t>(val);
            }
    }
    return out;
}

} // namespace mdrdh
