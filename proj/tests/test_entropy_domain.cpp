#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "mdrdh/entropy_domain.hpp"
#include "test_util.hpp"

using namespace mdrdh;

static AcToken token_for(uint8_t symbol) {
    AcToken t;
    t.run = symbol >> 4;
    t.size = symbol & 0x0F;
    t.value = t.size ? static_cast<int16_t>(1 << (t.size - 1)) : 0;
    t.pos = 1;
    return t;
}

static uint64_t vlc_bits(const VlcHistogram& h) {
    uint64_t total = 0;
    for (const auto& e : h.entries) total += static_cast<uint64_t>(e.count) * e.code_len;
    return total;
}

static VlcHistogram toy_histogram(const std::vector<uint32_t>& counts,
                                  const std::vector<int>& lens) {
    VlcHistogram h;
    h.entries.resize(counts.size());
    for (size_t i = 0; i < counts.size(); ++i) {
        h.entries[i].symbol = static_cast<uint8_t>(i + 1);
        h.entries[i].count = counts[i];
        h.entries[i].code_len = static_cast<uint8_t>(lens[i]);
    }
    return h;
}

TEST_CASE("histogram construction") {
    auto spec = standard_ac_spec();
    auto h = build_histogram({}, spec);
    for (const auto& e : h.entries) CHECK(e.count == 0);

    std::vector<AcToken> toks = {token_for(0x00)}; // lone EOB
    h = build_histogram(toks, spec);
    CHECK(h.count_of(0x00) == 1);
    uint64_t total = 0;
    for (const auto& e : h.entries) total += e.count;
    CHECK(total == 1);
}

TEST_CASE("histogram totals match token count on synthetic scan") {
    auto img = testutil::random_image(42, 6, 6);
    auto dec = entropy_decode(parse(serialize(assemble(img))));
    auto h = build_histogram(dec.tokens, dec.image.ac_spec);
    uint64_t total = 0;
    for (const auto& e : h.entries) total += e.count;
    CHECK(total == dec.tokens.size());
}

TEST_CASE("table optimization") {
    auto spec = standard_ac_spec();
    std::vector<AcToken> toks;
    // counts 30/10/20 on the first three DHT symbols (code lengths 2,2,3)
    for (int i = 0; i < 30; ++i) toks.push_back(token_for(spec.symbols[0]));
    for (int i = 0; i < 10; ++i) toks.push_back(token_for(spec.symbols[1]));
    for (int i = 0; i < 20; ++i) toks.push_back(token_for(spec.symbols[2]));
    auto h = build_histogram(toks, spec);
    auto before = vlc_bits(h);
    auto [sorted, sorted_spec] = optimize_table(h);
    CHECK(before - vlc_bits(sorted) == 10); // 10 and 20 swap across the 2/3-bit slots

    for (size_t i = 1; i < sorted.entries.size(); ++i) {
        CHECK(sorted.entries[i - 1].count >= sorted.entries[i].count);
        CHECK(sorted.entries[i - 1].code_len <= sorted.entries[i].code_len);
    }
    CHECK(sorted.entries[0].symbol == spec.symbols[0]);
    CHECK(sorted.entries[1].symbol == spec.symbols[2]);

    // sorting a sorted histogram is the identity
    auto [again, again_spec] = optimize_table(sorted);
    CHECK(again_spec == sorted_spec);
}

TEST_CASE("optimization never grows a real scan's VLC bits") {
    for (uint64_t seed = 50; seed < 56; ++seed) {
        auto img = testutil::random_image(seed, 6, 6);
        auto dec = entropy_decode(parse(serialize(assemble(img))));
        auto h = build_histogram(dec.tokens, dec.image.ac_spec);
        auto [sorted, sorted_spec] = optimize_table(h);
        CHECK(vlc_bits(sorted) <= vlc_bits(h));
    }
}

TEST_CASE("entropy cost table hand cases") {
    auto t = entropy_costs(toy_histogram({100, 40, 0}, {4, 5, 5}));
    const auto* c = t.find_position(0);
    REQUIRE(c != nullptr);
    CHECK(c->shift == doctest::Approx(0.0));
    CHECK(c->embed == doctest::Approx(50.0));
    CHECK(c->unit == doctest::Approx(0.5));
    CHECK(c->inc2() == doctest::Approx(c->shift + c->embed));

    // adjacent zero point: no shift cost at all
    auto t2 = entropy_costs(toy_histogram({100, 0, 7, 0}, {4, 6, 6, 7}));
    const auto* c2 = t2.find_position(0);
    REQUIRE(c2 != nullptr);
    CHECK(c2->shift == doctest::Approx(0.0));
    CHECK(c2->unit == doctest::Approx(0.5 * (6 - 4)));

    CHECK_THROWS_AS(entropy_costs(toy_histogram({5, 5, 5}, {2, 2, 3})), Error);
}

TEST_CASE("INC2 identity on a real histogram") {
    auto img = testutil::random_image(60, 8, 8);
    auto dec = entropy_decode(parse(serialize(assemble(img))));
    auto [sorted, _] = optimize_table(build_histogram(dec.tokens, dec.image.ac_spec));
    auto costs = entropy_costs(sorted);
    CHECK(!costs.entries.empty());
    for (const auto& c : costs.entries) {
        CHECK(c.inc2() == c.shift + c.embed);
        CHECK(c.unit == doctest::Approx(c.inc2() / c.count));
    }
}

TEST_CASE("peak selection") {
    auto h = toy_histogram({50, 30, 10, 0}, {2, 3, 4, 5});
    auto pz = select_peak(h, 20);
    CHECK(pz.p == 1);
    CHECK(pz.z == 3);
    pz = select_peak(h, 40);
    CHECK(pz.p == 0);
    CHECK(pz.z == 3);
    CHECK_THROWS_AS(select_peak(h, 50), Error);
}

TEST_CASE("shift/embed and extract/restore round trip") {
    auto img = testutil::random_image(70, 8, 8);
    auto dec = entropy_decode(parse(serialize(assemble(img))));
    auto [sorted, sorted_spec] = optimize_table(build_histogram(dec.tokens, dec.image.ac_spec));

    uint64_t l2 = 25;
    auto pz = select_peak(sorted, l2);
    auto bits = testutil::random_bits(7, l2);
    auto res = shift_and_embed(dec.tokens, sorted, pz, bits);

    // exactly one duplicated symbol, adjacent to the original peak slot
    CHECK(res.marked_spec.symbols[pz.p] == res.marked_spec.symbols[pz.p + 1]);
    auto back = detect_peak_zero(res.marked_spec, sorted);
    CHECK(back.p == pz.p);
    CHECK(back.z == pz.z);

    auto got = extract_restore(dec.tokens, res.positions, pz, l2);
    CHECK(got == bits);

    CHECK_THROWS_AS(detect_peak_zero(sorted_spec, sorted), Error);
}

TEST_CASE("measured expansion identity") {
    auto img = testutil::random_image(71, 8, 8);
    auto f = parse(serialize(assemble(img)));
    auto dec = entropy_decode(f);
    auto dc = build_code_assignment(f.dc_spec);
    auto [sorted, sorted_spec] = optimize_table(build_histogram(dec.tokens, dec.image.ac_spec));
    auto sorted_assign = build_code_assignment(sorted_spec);
    auto costs = entropy_costs(sorted);

    uint64_t l2 = 40;
    auto pz = select_peak(sorted, l2);
    const auto* cost = costs.find_position(pz.p);
    REQUIRE(cost != nullptr);

    for (uint64_t seed : {1u, 2u, 3u}) {
        auto bits = testutil::random_bits(seed, l2);
        auto res = shift_and_embed(dec.tokens, sorted, pz, bits);
        auto marked_assign = build_code_assignment(res.marked_spec);
        uint64_t before = scan_bit_length(dec.image, dec.tokens, dc, sorted_assign);
        uint64_t after = scan_bit_length(dec.image, dec.tokens, dc, marked_assign, &res.positions);
        int ones = std::accumulate(bits.begin(), bits.end(), 0);
        int dlen = sorted.entries[pz.p + 1].code_len - sorted.entries[pz.p].code_len;
        CHECK(static_cast<int64_t>(after) - static_cast<int64_t>(before) ==
              static_cast<int64_t>(cost->shift) + static_cast<int64_t>(ones) * dlen);
    }
}

TEST_CASE("payload overflow and duplicate corruption detection") {
    auto img = testutil::random_image(72, 4, 4);
    auto dec = entropy_decode(parse(serialize(assemble(img))));
    auto [sorted, _] = optimize_table(build_histogram(dec.tokens, dec.image.ac_spec));
    auto pz = select_peak(sorted, 1);
    auto too_many = testutil::random_bits(0, sorted.entries[pz.p].count + 1);
    CHECK_THROWS_AS(shift_and_embed(dec.tokens, sorted, pz, too_many), Error);

    auto res = shift_and_embed(dec.tokens, sorted, pz, testutil::random_bits(0, 1));
    auto corrupt = res.marked_spec;
    corrupt.symbols[160] = corrupt.symbols[158]; // second duplicate pair
    CHECK_THROWS_AS(detect_peak_zero(corrupt, sorted), Error);
}
