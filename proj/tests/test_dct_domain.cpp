#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mdrdh/dct_domain.hpp"
#include "test_util.hpp"

using namespace mdrdh;

TEST_CASE("embed formula") {
    CHECK(embed_coefficient(1, 1) == 2);
    CHECK(embed_coefficient(1, 0) == 1);
    CHECK(embed_coefficient(-1, 1) == -2);
    CHECK(embed_coefficient(-3, 0) == -4);
    CHECK(embed_coefficient(-3, 1) == -4);
    CHECK_THROWS_AS(embed_coefficient(0, 0), Error);
}

TEST_CASE("extract/recover formula") {
    auto r = extract_recover_coefficient(2);
    CHECK(r.bit == 1);
    CHECK(r.value == 1);
    r = extract_recover_coefficient(-1);
    CHECK(r.bit == 0);
    CHECK(r.value == -1);
    r = extract_recover_coefficient(6);
    CHECK(!r.bit.has_value());
    CHECK(r.value == 5);
    r = extract_recover_coefficient(-2);
    CHECK(r.bit == 1);
    CHECK(r.value == -1);
    CHECK_THROWS_AS(extract_recover_coefficient(0), Error);
}

TEST_CASE("code length tables of the standard AC table") {
    auto clt = code_length_tables(build_code_assignment(standard_ac_spec()));
    const int row0_hclt[11] = {0, 2, 2, 3, 4, 5, 7, 8, 10, 16, 16};
    const int row0_hcit[10] = {0, 0, 1, 1, 1, 2, 1, 2, 6, 0};
    for (int c = 1; c <= 10; ++c) CHECK(clt.hclt[0][c] == row0_hclt[c]);
    for (int c = 1; c <= 9; ++c) CHECK(clt.hcit[0][c] == row0_hcit[c]);
    for (int r = 0; r < 16; ++r)
        for (int c = 1; c <= 9; ++c) {
            CHECK(clt.hcit[r][c] == clt.hclt[r][c + 1] - clt.hclt[r][c]);
            CHECK(clt.hclt[r][c] >= 2);
            CHECK(clt.hclt[r][c] <= 16);
        }
}

static CoefficientImage single_block(int16_t v_at_1, int16_t v_at_2 = 0) {
    auto img = testutil::random_image(0, 1, 1);
    img.blocks[0].zz.fill(0);
    img.blocks[0].zz[1] = v_at_1;
    img.blocks[0].zz[2] = v_at_2;
    return img;
}

TEST_CASE("per-frequency costs on one block") {
    auto clt = code_length_tables(build_code_assignment(standard_ac_spec()));

    auto img = single_block(3);
    auto fc = frequency_costs(img, clt);
    CHECK(fc.at[1].expansion == doctest::Approx(2.0)); // hcit[0][2]+1, w=1
    CHECK(fc.at[1].nonzero == 1);
    CHECK(fc.at[1].unit == doctest::Approx(2.0));
    CHECK(fc.inc1(1) == fc.at[1].expansion);

    img = single_block(1);
    fc = frequency_costs(img, clt);
    CHECK(fc.at[1].expansion == doctest::Approx(0.5)); // (hcit[0][1]+1)/2
    CHECK(fc.at[1].carriers == 1);

    img = single_block(4); // |4| is not a category boundary
    fc = frequency_costs(img, clt);
    CHECK(fc.at[1].expansion == doctest::Approx(0.0));
    CHECK(fc.at[1].usable);
    CHECK(!fc.at[2].usable); // L(2)=0
}

TEST_CASE("block sorting") {
    auto img = testutil::random_image(0, 3, 1);
    for (auto& b : img.blocks) b.zz.fill(0);
    img.blocks[0].zz[1] = 4;
    img.blocks[0].zz[2] = 4;
    img.blocks[0].zz[3] = 4; // 60 zeros
    img.blocks[2].zz[1] = 4;
    img.blocks[2].zz[2] = 4; // 61 zeros
    auto order = sort_blocks(img);
    CHECK(order == std::vector<uint32_t>{1, 2, 0});

    // ties keep original order
    img.blocks[1] = img.blocks[0];
    order = sort_blocks(img);
    CHECK(order == std::vector<uint32_t>{2, 0, 1});
}

TEST_CASE("sort order invariant under embedding") {
    auto img = testutil::random_image(11, 5, 5);
    auto clt = code_length_tables(build_code_assignment(standard_ac_spec()));
    auto fc = frequency_costs(img, clt);
    uint64_t cap = 0;
    for (int k = 1; k < 64; ++k) cap += static_cast<uint64_t>(fc.at[k].carriers);
    auto plan = plan_dct(img, cap / 2, fc, clt);
    auto before = sort_blocks(img);
    auto bits = testutil::random_bits(1, cap / 2);
    embed_dct(img, bits, plan);
    CHECK(sort_blocks(img) == before);
}

TEST_CASE("plan degenerate cases") {
    auto img = testutil::random_image(12, 4, 4);
    auto clt = code_length_tables(build_code_assignment(standard_ac_spec()));
    auto fc = frequency_costs(img, clt);

    auto plan = plan_dct(img, 0, fc, clt);
    CHECK(plan.freq_set.empty());
    CHECK(plan.n_bar == 0);

    uint64_t cap = 0;
    for (int k = 1; k < 64; ++k) cap += static_cast<uint64_t>(fc.at[k].carriers);
    plan = plan_dct(img, cap, fc, clt);
    CHECK(plan.freq_set.size() == fc.order.size());
    CHECK(plan.n_bar == img.blocks.size());

    CHECK_THROWS_AS(plan_dct(img, cap + 1, fc, clt), Error);
}

TEST_CASE("shift applies past payload exhaustion within the run pass") {
    auto img = single_block(1, 5);
    auto clt = code_length_tables(build_code_assignment(standard_ac_spec()));
    auto fc = frequency_costs(img, clt);
    auto plan = plan_dct(img, 1, fc, clt);
    REQUIRE(plan.in_set[1]);
    REQUIRE(plan.in_set[2]);
    uint8_t one = 1;
    plan.run_bar = embed_dct(img, std::span(&one, 1), plan);
    CHECK(img.blocks[0].zz[1] == 2);
    CHECK(img.blocks[0].zz[2] == 6); // shifted although bits were spent
    CHECK(plan.run_bar == 0);

    auto bits = extract_dct(img, plan);
    REQUIRE(bits.size() == 1);
    CHECK(bits[0] == 1);
    CHECK(img.blocks[0].zz[1] == 1);
    CHECK(img.blocks[0].zz[2] == 5);
}

TEST_CASE("round trip on random images") {
    auto clt = code_length_tables(build_code_assignment(standard_ac_spec()));
    for (uint64_t seed = 0; seed < 25; ++seed) {
        auto img = testutil::random_image(seed + 100, 6, 6);
        auto original = img;
        auto fc = frequency_costs(img, clt);
        uint64_t cap = 0;
        for (int k = 1; k < 64; ++k) cap += static_cast<uint64_t>(fc.at[k].carriers);
        uint64_t l1 = (seed * 37) % (cap + 1);
        auto plan = plan_dct(img, l1, fc, clt);
        auto bits = testutil::random_bits(seed, l1);
        plan.run_bar = embed_dct(img, bits, plan);
        for (size_t b = 0; b < img.blocks.size(); ++b)
            for (int k = 1; k < 64; ++k) {
                int d = original.blocks[b].zz[k], m = img.blocks[b].zz[k];
                CHECK(((d == 0) == (m == 0)));
                if (d != 0) {
                    CHECK((d > 0) == (m > 0));
                    CHECK((std::abs(m) == std::abs(d) || std::abs(m) == std::abs(d) + 1));
                }
            }
        auto got = extract_dct(img, plan);
        CHECK(got == bits);
        for (size_t b = 0; b < img.blocks.size(); ++b) CHECK(img.blocks[b].zz == original.blocks[b].zz);
    }
}

TEST_CASE("capacity overflow throws") {
    auto img = single_block(1);
    auto clt = code_length_tables(build_code_assignment(standard_ac_spec()));
    auto fc = frequency_costs(img, clt);
    auto plan = plan_dct(img, 1, fc, clt);
    auto bits = testutil::random_bits(0, 2);
    CHECK_THROWS_AS(embed_dct(img, bits, plan), Error);
}

TEST_CASE("token_run counts preceding zeros mod 16") {
    Block b;
    b.zz.fill(0);
    b.zz[3] = 5;
    b.zz[4] = 1;
    CHECK(token_run(b, 3) == 2);
    CHECK(token_run(b, 4) == 0);
    b.zz.fill(0);
    b.zz[20] = 1;
    CHECK(token_run(b, 20) == 3); // 19 zeros, one ZRL consumed
}
