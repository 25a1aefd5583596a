#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "support.hpp"

using namespace hsz;

namespace {

std::vector<std::uint8_t> bytes_of(std::vector<std::int32_t> v) {
    std::vector<std::uint8_t> out;
    encode_chunk_into(v, out);
    return out;
}

}  // namespace

TEST(EncodeChunk, MixedSigns) {
    std::vector<std::int32_t> v{1, 3, 8, -10};
    auto c = encode_chunk(v);
    EXPECT_EQ(c.bitwidth, 4);
    ASSERT_EQ(c.signs.size(), 1u);
    EXPECT_EQ(c.signs[0], 0b1000);
    std::vector<std::uint8_t> expect{4, 0x08, 0x31, 0xA8};
    EXPECT_EQ(bytes_of(v), expect);
    EXPECT_EQ(decode_chunk(c), v);
}

TEST(EncodeChunk, AllZeroIsOneByte) {
    auto b = bytes_of({0, 0, 0, 0});
    ASSERT_EQ(b.size(), 1u);
    EXPECT_EQ(b[0], 0);
}

TEST(EncodeChunk, SmallestNegative) {
    auto c = encode_chunk(std::vector<std::int32_t>{-1});
    EXPECT_EQ(c.bitwidth, 1);
    EXPECT_EQ(c.signs[0], 1);
    EXPECT_EQ(c.magnitudes[0], 1);
    EXPECT_EQ(decode_chunk(c), std::vector<std::int32_t>{-1});
}

TEST(EncodeChunk, RejectsMinInt) {
    std::vector<std::int32_t> v{0, std::numeric_limits<std::int32_t>::min()};
    try {
        encode_chunk(v);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    }
}

TEST(EncodeChunk, RejectsBadCounts) {
    EXPECT_THROW(encode_chunk(std::vector<std::int32_t>{}), Error);
    EXPECT_THROW(encode_chunk(std::vector<std::int32_t>(33, 1)), Error);
}

TEST(DecodeChunk, ZeroBitwidthGivesZeros) {
    std::vector<std::uint8_t> b{0};
    std::vector<std::int32_t> out(7, 99);
    EXPECT_EQ(decode_chunk(b, out), 1u);
    EXPECT_EQ(out, std::vector<std::int32_t>(7, 0));
}

TEST(DecodeChunk, TruncatedPayload) {
    auto b = bytes_of({1, 3, 8, -10});
    b.pop_back();
    std::vector<std::int32_t> out(4);
    try {
        decode_chunk(b, out);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::CorruptStream);
    }
    std::vector<std::uint8_t> empty;
    EXPECT_THROW(decode_chunk(empty, out), Error);
}

TEST(DecodeChunk, BitwidthAbove32) {
    std::vector<std::uint8_t> b(64, 0);
    b[0] = 33;
    std::vector<std::int32_t> out(2);
    EXPECT_THROW(decode_chunk(b, out), Error);
}

TEST(DecodeChunk, NegativeZeroIsCorrupt) {
    std::vector<std::uint8_t> b{1, 0x01, 0x00};  // sign set, magnitude 0
    std::vector<std::int32_t> out(1);
    EXPECT_THROW(decode_chunk(b, out), Error);
}

TEST(Codec, RandomRoundTripAgainstBitwiseDecoder) {
    std::mt19937_64 rng(1234);
    std::uniform_int_distribution<int> count(1, 32), bits(0, 31), coin(0, 1);
    for (int t = 0; t < 100000; ++t) {
        std::size_t n = static_cast<std::size_t>(count(rng));
        int b = std::min(bits(rng), 30);
        std::uniform_int_distribution<std::int64_t> mag(0, (std::int64_t{1} << b));
        std::vector<std::int32_t> v(n);
        for (auto &x : v) x = static_cast<std::int32_t>(coin(rng) ? -mag(rng) : mag(rng));
        std::vector<std::uint8_t> bytes;
        encode_chunk_into(v, bytes);
        ASSERT_EQ(bytes.size(), chunk_byte_size(n, bytes[0]));
        std::uint32_t max_mag = 0;
        for (auto x : v) max_mag = std::max(max_mag, static_cast<std::uint32_t>(std::abs(x)));
        ASSERT_EQ(bytes[0], std::bit_width(max_mag));

        std::vector<std::int32_t> back(n);
        ASSERT_EQ(decode_chunk(bytes, back), bytes.size());
        ASSERT_EQ(back, v);
        auto ref = oracle::decode_chunk(bytes, n);
        for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(ref[i], v[i]);
    }
}

TEST(Codec, FullWidthMagnitudes) {
    std::vector<std::int32_t> v{std::numeric_limits<std::int32_t>::max(), -std::numeric_limits<std::int32_t>::max(), 0};
    auto c = encode_chunk(v);
    EXPECT_EQ(c.bitwidth, 31);
    EXPECT_EQ(decode_chunk(c), v);
}

TEST(Codec, Deterministic) {
    std::vector<std::int32_t> v{5, -7, 0, 1023, -1, 2};
    EXPECT_EQ(bytes_of(v), bytes_of(v));
}

TEST(Codec, SizeFormula) {
    EXPECT_EQ(chunk_byte_size(4, 0), 1u);
    EXPECT_EQ(chunk_byte_size(4, 4), 1u + 1u + 2u);
    EXPECT_EQ(chunk_byte_size(32, 31), 1u + 4u + 124u);
    EXPECT_EQ(chunk_byte_size(9, 3), 1u + 2u + 4u);
}
