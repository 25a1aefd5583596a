#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace hsz;
using namespace hsz_test;

TEST(PartialDecompress, WorkedStages) {
    auto s = worked_stream();
    auto m = std::get<MetaView>(partial_decompress(s, Stage::Meta));
    EXPECT_EQ(m, (MetaView{5, -1}));

    auto d = std::get<DecorrelatedStream>(partial_decompress(s, Stage::Decorrelated));
    EXPECT_EQ(d.values, (std::vector<std::int32_t>{1, 3, 8, -10, -10, -11, 11, 10}));

    auto q = std::get<QuantizedField>(partial_decompress(s, Stage::Quantized));
    EXPECT_EQ(q.values, (std::vector<std::int32_t>{6, 8, -11, -12, 13, -5, 10, 9}));

    auto f = std::get<FieldF32>(partial_decompress(s, Stage::Full));
    const double expect[] = {1.2, 1.6, -2.2, -2.4, 2.6, -1.0, 2.0, 1.8};
    auto y = worked_y();
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_FLOAT_EQ(f.values[i], static_cast<float>(expect[i]));
        EXPECT_LE(std::abs(static_cast<double>(f.values[i]) - static_cast<double>(y.values[i])), 0.1 + 1e-6);
    }
}

TEST(PartialDecompress, StageOfTagsView) {
    auto s = worked_stream();
    for (auto st : {Stage::Meta, Stage::Decorrelated, Stage::Quantized, Stage::Full})
        EXPECT_EQ(stage_of(partial_decompress(s, st)), st);
}

TEST(PartialDecompress, MetaOnPredictiveKindsIsUnsupported) {
    for (auto kind : {CompressorKind::HSZP, CompressorKind::HSZP_ND}) {
        try {
            partial_decompress(worked_stream(kind), Stage::Meta);
            FAIL();
        } catch (const Error &e) {
            EXPECT_EQ(e.code(), ErrorCode::UnsupportedStage);
        }
    }
}

TEST(PartialDecompress, CompositionOnRandomFields) {
    std::mt19937_64 rng(77);
    for (int t = 0; t < 24; ++t) {
        std::size_t rank = 1 + t % 3;
        auto f = random_field(rng, random_dims(rng, rank, rank == 3 ? 14 : 60));
        for (auto kind : kAllKinds) {
            if (is_nd(kind) && rank < 2) continue;
            auto s = compress(f, kind, ErrorBound::relative(1e-3), random_blocks(rng, kind, rank));
            auto d = decode_stream(s);
            auto q3 = decompress_quantized(s);
            auto q = recorrelate(d);
            ASSERT_EQ(q.values, q3.values);
            auto f4 = decompress(s);
            auto f_from_2 = dequantize_field<float>(q);
            ASSERT_EQ(f4.values, f_from_2.values);
        }
    }
}

TEST(DecodeCounters, StageWorkIsMonotone) {
    std::mt19937_64 rng(1);
    auto f = random_field(rng, {64, 64});
    auto s = compress(f, CompressorKind::HSZX_ND, ErrorBound::relative(1e-3));
    DecodeCounters c[4];
    for (int i = 0; i < 4; ++i) partial_decompress(s, static_cast<Stage>(i + 1), &c[i]);
    EXPECT_EQ(c[0].chunks_decoded, 0u);
    EXPECT_EQ(c[0].payload_bytes, 0u);
    EXPECT_GT(c[1].chunks_decoded, 0u);
    EXPECT_EQ(c[1].payload_bytes, c[2].payload_bytes);
    EXPECT_EQ(c[2].payload_bytes, c[3].payload_bytes);
    EXPECT_EQ(c[1].payload_bytes, s.payload().size());
    EXPECT_LT(c[0].work(), c[1].work());
    EXPECT_LT(c[1].work(), c[2].work());
    EXPECT_LT(c[2].work(), c[3].work());
}

TEST(SlabIterator, SixteenSquareHasTwoSlabs) {
    std::mt19937_64 rng(2);
    auto f = random_field(rng, {16, 16});
    CompressOptions o;
    o.block_dims = {8, 8};
    auto s = compress(f, CompressorKind::HSZX_ND, ErrorBound::absolute(0.01), o);
    SlabIterator it(s, Stage::Quantized);
    EXPECT_EQ(it.slab_count(), 2u);
    auto a = it.next();
    ASSERT_TRUE(a);
    EXPECT_EQ(a->begin, 0u);
    EXPECT_EQ(a->end, 128u);
    auto b = it.next();
    ASSERT_TRUE(b);
    EXPECT_EQ(b->begin, 128u);
    EXPECT_FALSE(it.next());
}

TEST(SlabIterator, MetaStageRejected) {
    auto s = worked_stream();
    EXPECT_THROW(SlabIterator(s, Stage::Meta), Error);
}

TEST(SlabIterator, ConcatenationEqualsWholeArray) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 18; ++t) {
        std::size_t rank = 1 + t % 3;
        auto f = random_field(rng, random_dims(rng, rank, rank == 3 ? 12 : 50));
        for (auto kind : kAllKinds) {
            if (is_nd(kind) && rank < 2) continue;
            auto s = compress(f, kind, ErrorBound::relative(1e-3), random_blocks(rng, kind, rank));
            auto d = decode_stream(s);
            auto q = decompress_quantized(s);
            auto full = decompress(s);
            for (auto st : {Stage::Decorrelated, Stage::Quantized, Stage::Full}) {
                SlabIterator it(s, st);
                std::vector<std::int32_t> ints;
                std::vector<float> floats;
                std::size_t expect_begin = 0;
                while (auto v = it.next()) {
                    ASSERT_EQ(v->begin, expect_begin);
                    expect_begin = v->end;
                    if (st == Stage::Full) {
                        floats.insert(floats.end(), v->floats().begin(), v->floats().end());
                    } else {
                        ints.insert(ints.end(), v->ints().begin(), v->ints().end());
                    }
                }
                ASSERT_EQ(expect_begin, f.size());
                if (st == Stage::Decorrelated) { ASSERT_EQ(ints, d.values); }
                if (st == Stage::Quantized) { ASSERT_EQ(ints, q.values) << to_string(kind); }
                if (st == Stage::Full) { ASSERT_EQ(floats, full.values); }
            }
        }
    }
}

TEST(SlabIterator, PredictiveSeedsCarryAcrossSlabs) {
    std::mt19937_64 rng(4);
    auto f = random_field(rng, {300});
    CompressOptions o;
    o.block_dims = {16};
    auto s = compress(f, CompressorKind::HSZP, ErrorBound::absolute(1e-3), o);
    SlabIterator it(s, Stage::Quantized);
    EXPECT_EQ(it.slab_count(), 19u);
    auto q = decompress_quantized(s);
    std::size_t pos = 0;
    while (auto v = it.next())
        for (auto x : v->ints()) ASSERT_EQ(x, q.values[pos++]);
}

TEST(SlabIterator, HoldsAtMostOneSlabWhenConsumerDropsEach) {
    std::mt19937_64 rng(5);
    auto f = random_field(rng, {1024, 1024}, 0.01);
    for (auto kind : {CompressorKind::HSZP_ND, CompressorKind::HSZX_ND}) {
        auto s = compress(f, kind, ErrorBound::relative(1e-3));
        auto tracker = std::make_shared<SlabTracker>();
        {
            SlabIterator it(s, Stage::Full, tracker);
            while (auto v = it.next()) {
            }
        }
        EXPECT_LE(tracker->peak, 2u);  // the consumer's slab plus the iterator's seed
        EXPECT_EQ(tracker->live, 0u);
        EXPECT_LE(tracker->peak_bytes, 3 * tracker->largest_slab_bytes);
    }
}
