// mdrdh: reversible data hiding for baseline grayscale JPEGs.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "mdrdh/distribution.hpp"
#include "mdrdh/metrics.hpp"

namespace fs = std::filesystem;
using namespace mdrdh;

namespace {

constexpr const char* kPrng = "mt19937_64";

int exit_code(Err e) { return 10 + static_cast<int>(e); }

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Err::IoError, "cannot read " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Err::IoError, "cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

std::vector<uint8_t> random_bits(uint64_t seed, uint64_t n) {
    std::mt19937_64 rng(seed);
    std::vector<uint8_t> bits(n);
    for (auto& b : bits) b = static_cast<uint8_t>(rng() & 1);
    return bits;
}

std::vector<uint8_t> bytes_to_bits(const std::vector<uint8_t>& bytes) {
    std::vector<uint8_t> bits;
    bits.reserve(bytes.size() * 8);
    for (uint8_t b : bytes)
        for (int i = 7; i >= 0; --i) bits.push_back((b >> i) & 1);
    return bits;
}

std::vector<uint8_t> bits_to_bytes(const std::vector<uint8_t>& bits) {
    std::vector<uint8_t> bytes((bits.size() + 7) / 8, 0);
    for (size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) bytes[i / 8] |= static_cast<uint8_t>(0x80 >> (i % 8));
    return bytes;
}

std::string sha256_hex(const std::vector<uint8_t>& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

EmbedMode parse_mode(const std::string& s) {
    if (s == "multi") return EmbedMode::Multi;
    if (s == "dct-only") return EmbedMode::DctOnly;
    if (s == "entropy-only") return EmbedMode::EntropyOnly;
    if (s == "huffopt-only") return EmbedMode::HuffOptOnly;
    throw CLI::ValidationError("mode", "unknown mode " + s);
}

std::string fmt_psnr(double v) {
    if (std::isinf(v)) return "inf";
    std::ostringstream os;
    os.precision(6);
    os << std::fixed << v;
    return os.str();
}

double psnr_files(const std::vector<uint8_t>& original, const std::vector<uint8_t>& marked) {
    auto a = decode_pixels(entropy_decode(parse(original)).image);
    auto b = decode_pixels(entropy_decode(parse(marked)).image);
    return psnr(a, b);
}

int cmd_embed(const std::string& in, const std::string& out, const std::string& payload_path,
              uint64_t random_n, bool have_random, uint64_t seed, const std::string& mode_str) {
    auto original = read_file(in);
    std::vector<uint8_t> bits;
    if (have_random)
        bits = random_bits(seed, random_n);
    else if (!payload_path.empty())
        bits = bytes_to_bits(read_file(payload_path));
    auto mode = parse_mode(mode_str);

    auto res = embed(original, bits, mode);
    write_file(out, res.bytes);

    int64_t exp = file_expansion(original, res.bytes);
    std::cout << "mode=" << mode_name(mode) << " payload_bits=" << bits.size()
              << " L1=" << res.l1 << " L2=" << res.l2
              << " expansion_bits=" << exp
              << " expansion_excl_sideinfo_bits=" << exp - int64_t(SideInfo::kSegmentTotalBytes) * 8
              << " psnr_db=" << fmt_psnr(psnr_files(original, res.bytes)) << "\n";
    return 0;
}

int cmd_extract(const std::string& in, const std::string& out_payload,
                const std::string& out_restored) {
    auto marked = read_file(in);
    auto res = extract(marked);
    if (!out_payload.empty()) write_file(out_payload, bits_to_bytes(res.payload_bits));
    write_file(out_restored, res.original);
    std::cout << "payload_bits=" << res.payload_bits.size()
              << " restored_sha256=" << sha256_hex(res.original) << "\n";
    return 0;
}

int cmd_verify(const std::string& in, uint64_t nbits, uint64_t seed, const std::string& mode_str) {
    auto original = read_file(in);
    auto bits = random_bits(seed, nbits);
    auto res = embed(original, bits, parse_mode(mode_str));
    auto out = extract(res.bytes);
    bool ok = out.payload_bits == bits && out.original == original;
    std::cout << (ok ? "pass" : "fail") << "\n";
    return ok ? 0 : 1;
}

int cmd_analyze(const std::string& in) {
    auto bytes = read_file(in);
    auto f = parse(bytes);
    auto ds = entropy_decode(f);
    auto assign = build_code_assignment(f.ac_spec);
    auto clt = code_length_tables(assign);

    std::cout << "hclt (run 0..15 x size 1..10)\n";
    for (int r = 0; r < 16; ++r) {
        for (int c = 1; c <= 10; ++c) std::cout << clt.hclt[r][c] << (c == 10 ? "\n" : ",");
    }
    std::cout << "hcit (run 0..15 x size 1..9)\n";
    for (int r = 0; r < 16; ++r) {
        for (int c = 1; c <= 9; ++c) std::cout << clt.hcit[r][c] << (c == 9 ? "\n" : ",");
    }

    auto costs = frequency_costs(ds.image, clt);
    std::cout << "frequency,S,L,carriers,UF\n";
    for (int k : costs.order) {
        const auto& fc = costs.at[k];
        std::cout << k << "," << fc.expansion << "," << fc.nonzero << "," << fc.carriers << ","
                  << fc.unit << "\n";
    }

    auto hist = build_histogram(ds.tokens, f.ac_spec);
    auto [sorted, spec] = optimize_table(hist);
    uint64_t total = 0;
    std::cout << "position,symbol,count,code_len\n";
    for (size_t i = 0; i < sorted.entries.size(); ++i) {
        const auto& e = sorted.entries[i];
        total += e.count;
        std::cout << i << "," << int(e.symbol) << "," << e.count << "," << int(e.code_len) << "\n";
    }
    std::cout << "token_count=" << ds.tokens.size() << " histogram_total=" << total << "\n";

    try {
        auto ec = entropy_costs(sorted);
        std::cout << "peak_position,symbol,count,S,M,E\n";
        for (const auto& c : ec.entries)
            std::cout << c.position << "," << int(c.symbol) << "," << c.count << "," << c.shift
                      << "," << c.embed << "," << c.unit << "\n";
    } catch (const Error& e) {
        if (e.code() != Err::NoZeroPoint) throw;
        std::cout << "no entropy-domain candidates (all symbols in use)\n";
    }
    return 0;
}

struct BenchRow {
    std::string image, qf, mode;
    uint64_t payload_bits = 0;
    int64_t expansion = 0, expansion_excl = 0;
    double psnr_db = 0.0;
    int64_t elapsed_ms = 0;
    bool pass = false;
};

int cmd_bench(const std::string& corpus, const std::vector<uint64_t>& payloads,
              const std::vector<std::string>& modes, uint64_t seed, const std::string& out_csv,
              const std::string& agg_csv) {
    std::vector<fs::path> files;
    for (auto& p : fs::recursive_directory_iterator(corpus))
        if (p.is_regular_file() && p.path().extension() == ".jpg") files.push_back(p.path());
    std::sort(files.begin(), files.end());

    std::ofstream csv(out_csv);
    if (!csv) throw Error(Err::IoError, "cannot write " + out_csv);
    csv << "# prng=" << kPrng << " seed=" << seed << "\n";
    csv << "image,qf,payload_bits,mode,expansion_bits,expansion_excl_sideinfo_bits,"
           "psnr_db,elapsed_ms,reversibility\n";

    std::vector<BenchRow> rows;
    for (const auto& path : files) {
        auto original = read_file(path.string());
        std::string qf = path.parent_path().filename().string();
        for (uint64_t n : payloads) {
            for (const auto& mode_str : modes) {
                bool huffopt = mode_str == "huffopt-only";
                if (huffopt && n != payloads.front()) continue; // payload-free transcode, once
                BenchRow row;
                row.image = path.stem().string();
                row.qf = qf;
                row.mode = mode_str;
                row.payload_bits = huffopt ? 0 : n;
                auto bits = random_bits(seed ^ std::hash<std::string>{}(path.string() + mode_str) ^
                                            n,
                                        row.payload_bits);
                try {
                    auto t0 = std::chrono::steady_clock::now();
                    auto res = embed(original, bits, parse_mode(mode_str));
                    auto out = extract(res.bytes);
                    auto t1 = std::chrono::steady_clock::now();
                    row.elapsed_ms =
                        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
                    row.expansion = file_expansion(original, res.bytes);
                    row.expansion_excl =
                        row.expansion - int64_t(SideInfo::kSegmentTotalBytes) * 8;
                    row.psnr_db = psnr_files(original, res.bytes);
                    row.pass = out.payload_bits == bits && out.original == original;
                } catch (const Error& e) {
                    std::cerr << path.string() << " " << mode_str << " " << n << ": " << e.what()
                              << "\n";
                    continue;
                }
                rows.push_back(row);
                csv << row.image << "," << row.qf << "," << row.payload_bits << "," << row.mode
                    << "," << row.expansion << "," << row.expansion_excl << ","
                    << fmt_psnr(row.psnr_db) << "," << row.elapsed_ms << ","
                    << (row.pass ? "pass" : "fail") << "\n";
            }
        }
    }

    if (!agg_csv.empty()) {
        std::ofstream agg(agg_csv);
        if (!agg) throw Error(Err::IoError, "cannot write " + agg_csv);
        agg << "qf,payload_bits,mode,n,mean_expansion_bits,mean_expansion_excl_sideinfo_bits,"
               "mean_psnr_db\n";
        std::map<std::tuple<std::string, uint64_t, std::string>,
                 std::tuple<int64_t, double, double, double>> groups;
        for (const auto& r : rows) {
            auto& [cnt, se, sx, sp] = groups[{r.qf, r.payload_bits, r.mode}];
            cnt += 1;
            se += double(r.expansion);
            sx += double(r.expansion_excl);
            sp += std::isinf(r.psnr_db) ? 0.0 : r.psnr_db; // inf groups stay inf below
        }
        for (const auto& [key, val] : groups) {
            const auto& [qf, n, mode] = key;
            const auto& [cnt, se, sx, sp] = val;
            bool allinf = true;
            for (const auto& r : rows)
                if (r.qf == qf && r.payload_bits == n && r.mode == mode && !std::isinf(r.psnr_db))
                    allinf = false;
            agg << qf << "," << n << "," << mode << "," << cnt << "," << se / cnt << ","
                << sx / cnt << ","
                << (allinf ? "inf" : fmt_psnr(sp / cnt)) << "\n";
        }
    }

    bool all_pass = !rows.empty();
    for (const auto& r : rows) all_pass = all_pass && r.pass;
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-domain reversible data hiding for baseline grayscale JPEGs"};
    app.require_subcommand(1);

    std::string in, out, payload_path, mode_str = "multi", out_payload, out_restored;
    std::string corpus, out_csv = "bench.csv", agg_csv;
    uint64_t random_n = 0, seed = 0, verify_bits = 1000;
    std::vector<uint64_t> payloads = {2000, 5000, 8000, 11000};
    std::vector<std::string> modes = {"multi", "dct-only", "entropy-only", "huffopt-only"};

    auto* e = app.add_subcommand("embed", "embed a payload");
    e->add_option("input", in)->required();
    e->add_option("output", out)->required();
    e->add_option("--payload", payload_path, "payload file (bytes, MSB-first bits)");
    auto* rb = e->add_option("--random-bits", random_n, "random payload length in bits");
    e->add_option("--seed", seed, "payload PRNG seed");
    e->add_option("--mode", mode_str, "multi|dct-only|entropy-only|huffopt-only");

    auto* x = app.add_subcommand("extract", "extract payload and restore the original");
    x->add_option("input", in)->required();
    x->add_option("--payload-out", out_payload, "write payload bits (packed)");
    x->add_option("--restored-out", out_restored)->required();

    auto* v = app.add_subcommand("verify", "in-memory embed/extract round trip");
    v->add_option("input", in)->required();
    v->add_option("--bits", verify_bits);
    v->add_option("--seed", seed);
    v->add_option("--mode", mode_str);

    auto* a = app.add_subcommand("analyze", "dump cost tables and histogram");
    a->add_option("input", in)->required();

    auto* c = app.add_subcommand("capacity", "report per-domain capacity in bits");
    c->add_option("input", in)->required();

    auto* b = app.add_subcommand("bench", "run the benchmark grid over a corpus");
    b->add_option("corpus", corpus)->required();
    b->add_option("--payloads", payloads, "payload sizes in bits")->delimiter(',');
    b->add_option("--modes", modes)->delimiter(',');
    b->add_option("--seed", seed);
    b->add_option("--out", out_csv);
    b->add_option("--aggregate", agg_csv, "per-(qf,payload,mode) mean CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (e->parsed()) return cmd_embed(in, out, payload_path, random_n, !rb->empty(), seed,
                                          mode_str);
        if (x->parsed()) return cmd_extract(in, out_payload, out_restored);
        if (v->parsed()) return cmd_verify(in, verify_bits, seed, mode_str);
        if (a->parsed()) return cmd_analyze(in);
        if (c->parsed()) {
            auto rep = capacity(read_file(in));
            std::cout << "dct_carrier_bits=" << rep.dct_carrier_bits
                      << " entropy_peak_bits=" << rep.entropy_peak_bits << "\n";
            return 0;
        }
        if (b->parsed()) return cmd_bench(corpus, payloads, modes, seed, out_csv, agg_csv);
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return exit_code(err.code());
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
