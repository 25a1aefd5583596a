#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "support.hpp"

using namespace hsz;
using namespace hsz_test;
namespace fs = std::filesystem;

namespace {

class IoTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("hsz_io_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path path(const std::string &name) const { return dir_ / name; }

    static void write_bytes(const fs::path &p, const std::vector<std::uint8_t> &b) {
        std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char *>(b.data()), static_cast<std::streamsize>(b.size()));
    }

    static ErrorCode code_of(const std::function<void()> &f) {
        try {
            f();
        } catch (const Error &e) {
            return e.code();
        }
        ADD_FAILURE() << "expected an error";
        return ErrorCode::InvalidArgument;
    }

    fs::path dir_;
};

}  // namespace

TEST_F(IoTest, RawRoundTrip) {
    auto y = worked_y();
    write_raw(path("y.f32"), y);
    EXPECT_EQ(fs::file_size(path("y.f32")), 32u);
    auto back = read_raw(path("y.f32"), {2, 4});
    EXPECT_EQ(back.values, y.values);
    EXPECT_EQ(back.shape, y.shape);
}

TEST_F(IoTest, RawBytesAreLittleEndian) {
    write_raw(path("one.f32"), FieldF32(GridShape{1}, {1.0f}));
    std::ifstream in(path("one.f32"), std::ios::binary);
    std::vector<unsigned char> b(4);
    in.read(reinterpret_cast<char *>(b.data()), 4);
    EXPECT_EQ(b, (std::vector<unsigned char>{0x00, 0x00, 0x80, 0x3f}));
}

TEST_F(IoTest, RawLengthMismatchNamesBothSizes) {
    write_bytes(path("short.f32"), std::vector<std::uint8_t>(28, 0));
    try {
        read_raw(path("short.f32"), {2, 4});
        FAIL();
    } catch (const Error &e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("32"), std::string::npos) << msg;
        EXPECT_NE(msg.find("28"), std::string::npos) << msg;
    }
}

TEST_F(IoTest, RawRejectsEmptyDimsMissingFileAndNonFinite) {
    write_raw(path("y.f32"), worked_y());
    EXPECT_EQ(code_of([&] { read_raw(path("y.f32"), {}); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([&] { read_raw(path("absent.f32"), {2}); }), ErrorCode::Io);
    write_raw(path("nan.f32"), FieldF32(GridShape{2}, {1.f, std::numeric_limits<float>::infinity()}));
    EXPECT_EQ(code_of([&] { read_raw(path("nan.f32"), {2}); }), ErrorCode::NonFinite);
}

TEST_F(IoTest, CompressedRoundTripIsBitExact) {
    std::mt19937_64 rng(21);
    auto f = random_field(rng, {40, 30});
    for (auto kind : kAllKinds) {
        auto s = compress(f, kind, ErrorBound::relative(1e-3));
        write_compressed(path("c.hsz"), s);
        EXPECT_EQ(fs::file_size(path("c.hsz")), s.serialized_size());
        auto back = read_compressed(path("c.hsz"));
        EXPECT_EQ(to_bytes(back), to_bytes(s));
        EXPECT_EQ(decompress(back).values, decompress(s).values);
    }
}

TEST_F(IoTest, ContainerLayout) {
    auto bytes = to_bytes(worked_stream());
    ASSERT_GE(bytes.size(), 7u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "HSZ1");
    EXPECT_EQ(bytes[4], 1);  // version
    EXPECT_EQ(bytes[5], 3);  // HSZX_ND
    EXPECT_EQ(bytes[6], 2);  // rank
    EXPECT_EQ(bytes[7], 2);  // dims[0] low byte
    EXPECT_EQ(bytes[15], 4);
    EXPECT_EQ(bytes[23], 2);  // block dims
    EXPECT_EQ(bytes[27], 2);
}

TEST_F(IoTest, FlippedMagicIsCorruptFile) {
    auto bytes = to_bytes(worked_stream());
    bytes[0] ^= 0xff;
    write_bytes(path("bad.hsz"), bytes);
    EXPECT_EQ(code_of([&] { read_compressed(path("bad.hsz")); }), ErrorCode::CorruptFile);
}

TEST_F(IoTest, VersionTwoIsUnsupported) {
    auto bytes = to_bytes(worked_stream());
    bytes[4] = 2;
    write_bytes(path("v2.hsz"), bytes);
    EXPECT_EQ(code_of([&] { read_compressed(path("v2.hsz")); }), ErrorCode::UnsupportedVersion);
}

TEST_F(IoTest, TruncationsAreCorruptFile) {
    auto s = worked_stream();
    auto bytes = to_bytes(s);
    const std::size_t payload_start = bytes.size() - s.payload().size();
    for (std::size_t cut : {std::size_t{3}, std::size_t{10}, std::size_t{40}, payload_start - 3}) {
        std::vector<std::uint8_t> t(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
        EXPECT_EQ(code_of([&] { from_bytes(t); }), ErrorCode::CorruptFile) << cut;
    }
}

TEST_F(IoTest, TruncatedPayloadSurfacesOnDecode) {
    auto s = worked_stream();
    auto bytes = to_bytes(s);
    bytes.pop_back();
    auto t = from_bytes(bytes);
    EXPECT_EQ(code_of([&] { decompress(t); }), ErrorCode::CorruptStream);
}

TEST_F(IoTest, UnknownKindIsCorrupt) {
    auto bytes = to_bytes(worked_stream());
    bytes[5] = 9;
    EXPECT_EQ(code_of([&] { from_bytes(bytes); }), ErrorCode::CorruptFile);
}

TEST_F(IoTest, Int32Files) {
    std::vector<std::int32_t> v{5, -1, 0, 2147483647};
    write_i32(path("m.i32"), v);
    EXPECT_EQ(read_i32(path("m.i32")), v);
}
