// hsz: compress, partially decompress and analyze float32 arrays.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hsz/hsz.hpp"

namespace {

using namespace hsz;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest decimal that reads back to the same double (at most 17 significant digits).
std::string fmt(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string join(const std::vector<std::size_t> &v, char sep = ',') {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + std::to_string(v[i]);
    return s;
}

ErrorBound parse_bound(const std::string &text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) throw UsageError("--error must look like abs:<value> or rel:<value>");
    std::string mode = text.substr(0, colon), num = text.substr(colon + 1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (ec != std::errc() || ptr != num.data() + num.size() || !(v > 0))
        throw UsageError("--error value must be a positive number, got '" + num + "'");
    if (mode == "abs") return ErrorBound::absolute(v);
    if (mode == "rel") return ErrorBound::relative(v);
    throw UsageError("--error mode must be abs or rel, got '" + mode + "'");
}

CompressorKind parse_kind_arg(const std::string &s) {
    auto k = parse_kind(s);
    if (!k) throw UsageError("unknown compressor '" + s + "' (hszp, hszp-nd, hszx, hszx-nd)");
    return *k;
}

Stage parse_stage_arg(const std::string &s) {
    auto st = parse_stage(s);
    if (!st) throw UsageError("unknown stage '" + s + "' (meta, decorrelated, quantized, full)");
    return *st;
}

// ---- compress ----

struct CompressArgs {
    std::string input, output, compressor, error;
    std::vector<std::size_t> dims, block;
};

int cmd_compress(const CompressArgs &a) {
    auto kind = parse_kind_arg(a.compressor);
    auto bound = parse_bound(a.error);
    auto field = read_raw(a.input, a.dims);
    CompressOptions opts;
    if (!a.block.empty()) {
        if (is_nd(kind)) {
            if (a.block.size() != a.dims.size()) throw UsageError("--block needs one extent per dimension");
        } else if (a.block.size() != 1) {
            throw UsageError("--block takes a single length for " + std::string(to_string(kind)));
        }
        opts.block_dims = a.block;
    }
    auto stream = compress(field, kind, bound, opts);
    write_compressed(a.output, stream);
    std::cout << "ratio=" << fmt(stream.ratio()) << "\n";
    std::cout << "eps=" << fmt(stream.eps()) << "\n";
    return kOk;
}

// ---- decompress ----

struct DecompressArgs {
    std::string input, output, stage;
};

int cmd_decompress(const DecompressArgs &a) {
    auto stage = parse_stage_arg(a.stage);
    auto stream = read_compressed(a.input);
    if (!supports_stage(stream.kind(), stage)) {
        std::cerr << "stage unsupported: " << to_string(stage) << " is not available for " << to_string(stream.kind())
                  << "\n";
        return kFailure;
    }
    auto view = partial_decompress(stream, stage);
    std::visit(
        [&](const auto &v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, MetaView>) write_i32(a.output, v);
            else if constexpr (std::is_same_v<V, FieldF32>) write_raw(a.output, v);
            else write_i32(a.output, v.values);
        },
        view);
    std::cout << "stage=" << to_string(stage) << "\n";
    std::cout << "output=" << a.output << "\n";
    return kOk;
}

// ---- analyze ----

struct AnalyzeArgs {
    std::string op, stage = "auto", input, u, v, w, output;
};

enum class AnyOp { Mean, Std, Derivative, Laplacian, Divergence, Curl };

std::optional<AnyOp> parse_op(const std::string &s) {
    if (s == "mean") return AnyOp::Mean;
    if (s == "std") return AnyOp::Std;
    if (s == "derivative") return AnyOp::Derivative;
    if (s == "laplacian") return AnyOp::Laplacian;
    if (s == "divergence") return AnyOp::Divergence;
    if (s == "curl") return AnyOp::Curl;
    return std::nullopt;
}

bool is_stat(AnyOp op) { return op == AnyOp::Mean || op == AnyOp::Std; }
StatOp stat_op(AnyOp op) { return op == AnyOp::Mean ? StatOp::Mean : StatOp::Std; }

FieldOp field_op_of(AnyOp op) {
    switch (op) {
        case AnyOp::Laplacian: return FieldOp::Laplacian;
        case AnyOp::Divergence: return FieldOp::Divergence;
        case AnyOp::Curl: return FieldOp::Curl;
        default: return FieldOp::Derivative;
    }
}

bool op_supported(AnyOp op, CompressorKind kind, Stage stage) {
    return is_stat(op) ? stat_supported(stat_op(op), kind, stage) : field_op_supported(kind, stage);
}

Stage auto_stage(AnyOp op, CompressorKind kind) {
    return is_stat(op) ? auto_stat_stage(stat_op(op), kind) : auto_field_stage(kind);
}

void print_matrix(AnyOp op, const std::string &name) {
    std::cerr << "applicability of '" << name << "' (compressor x stage):\n";
    std::cerr << "  " << std::left << std::setw(10) << "" << " meta decorrelated quantized full\n";
    for (auto kind : {CompressorKind::HSZP, CompressorKind::HSZP_ND, CompressorKind::HSZX, CompressorKind::HSZX_ND}) {
        std::cerr << "  " << std::setw(10) << to_string(kind);
        const int widths[] = {5, 13, 10, 5};
        int i = 0;
        for (auto st : {Stage::Meta, Stage::Decorrelated, Stage::Quantized, Stage::Full})
            std::cerr << std::right << std::setw(widths[i++]) << (op_supported(op, kind, st) ? "yes" : "no");
        std::cerr << std::left << "\n";
    }
}

std::vector<std::string> component_names(FieldOp op, std::size_t rank) {
    switch (op) {
        case FieldOp::Derivative: {
            const char *axes[] = {"dx", "dy", "dz"};
            return {axes, axes + rank};
        }
        case FieldOp::Laplacian: return {"laplacian"};
        case FieldOp::Divergence: return {"divergence"};
        case FieldOp::Curl:
            if (rank == 3) return {"curl_x", "curl_y", "curl_z"};
            return {"curl"};
    }
    return {};
}

int run_field_op(AnyOp any, Stage stage, const std::vector<CompressedStream> &inputs, const std::string &prefix) {
    const FieldOp op = field_op_of(any);
    const auto &shape = inputs[0].shape();
    auto names = component_names(op, shape.rank());
    std::vector<std::string> paths;
    for (const auto &n : names) paths.push_back(prefix + "." + n + ".f32");

    const bool streamable = is_nd(inputs[0].kind()) || shape.rank() == 1;
    if (streamable) {
        std::vector<std::ofstream> files;
        for (const auto &p : paths) {
            files.emplace_back(p, std::ios::binary | std::ios::trunc);
            if (!files.back()) fail(ErrorCode::Io, "cannot create " + p);
        }
        std::vector<const CompressedStream *> ptrs;
        for (const auto &s : inputs) ptrs.push_back(&s);
        stream_field_op(
            ptrs, op, stage,
            [&](std::size_t, std::size_t, const std::vector<std::vector<double>> &comps) {
                for (std::size_t c = 0; c < comps.size(); ++c) {
                    std::vector<float> f(comps[c].begin(), comps[c].end());
                    auto bytes = detail::to_le_bytes(std::span<const float>(f));
                    files[c].write(reinterpret_cast<const char *>(bytes.data()),
                                   static_cast<std::streamsize>(bytes.size()));
                }
            });
        for (std::size_t c = 0; c < files.size(); ++c)
            if (!files[c].flush()) fail(ErrorCode::Io, "write failed on " + paths[c]);
    } else {
        auto r = field_op(inputs, op, stage);
        for (std::size_t c = 0; c < r.components.size(); ++c) {
            std::vector<float> f(r.components[c].begin(), r.components[c].end());
            write_raw(paths[c], f);
        }
    }
    std::cout << "stage=" << to_string(stage) << "\n";
    for (const auto &p : paths) std::cout << "output=" << p << "\n";
    return kOk;
}

int cmd_analyze(const AnalyzeArgs &a) {
    auto op = parse_op(a.op);
    if (!op) throw UsageError("unknown op '" + a.op + "' (mean, std, derivative, laplacian, divergence, curl)");
    const bool vector_op = *op == AnyOp::Divergence || *op == AnyOp::Curl;

    std::vector<CompressedStream> inputs;
    if (vector_op) {
        if (a.u.empty() || a.v.empty()) throw UsageError("--op " + a.op + " needs --u and --v (and --w for 3D)");
        for (const auto *p : {&a.u, &a.v, &a.w})
            if (!p->empty()) inputs.push_back(read_compressed(*p));
    } else {
        if (a.input.empty()) throw UsageError("--op " + a.op + " needs --input");
        inputs.push_back(read_compressed(a.input));
    }
    if (!is_stat(*op) && a.output.empty()) throw UsageError("--op " + a.op + " needs --output <prefix>");

    const auto kind = inputs[0].kind();
    Stage stage = a.stage == "auto" ? auto_stage(*op, kind) : parse_stage_arg(a.stage);
    if (!op_supported(*op, kind, stage)) {
        std::cerr << "unsupported: " << a.op << " at stage " << to_string(stage) << " for " << to_string(kind) << "\n";
        print_matrix(*op, a.op);
        return kFailure;
    }

    if (is_stat(*op)) {
        auto r = compute_stat(inputs[0], stat_op(*op), stage);
        std::cout << a.op << "=" << fmt(r.value) << "\n";
        std::cout << "stage=" << to_string(r.stage_used) << "\n";
        return kOk;
    }
    return run_field_op(*op, stage, inputs, a.output);
}

// ---- info ----

int cmd_info(const std::string &input) {
    auto s = read_compressed(input);
    const auto &h = s.header();
    std::cout << "kind=" << to_string(h.kind) << "\n";
    std::cout << "dims=" << join(h.shape.dims()) << "\n";
    std::cout << "block=" << join(h.block_dims) << "\n";
    std::cout << "eps=" << fmt(h.eps) << "\n";
    std::cout << "n=" << h.element_count() << "\n";
    std::cout << "chunks=" << s.chunk_count() << "\n";
    std::cout << "metadata=" << s.metadata().size() << "\n";
    std::cout << "bytes=" << s.serialized_size() << "\n";
    std::cout << "ratio=" << fmt(s.ratio()) << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Error-bounded lossy compressor with partial decompression and analytics on compressed data"};
    app.require_subcommand(1);

    CompressArgs ca;
    auto *compress_cmd = app.add_subcommand("compress", "Compress a raw float32 array");
    compress_cmd->add_option("--input", ca.input, "Raw little-endian float32 file")->required();
    compress_cmd->add_option("--dims", ca.dims, "Extents, slowest first, e.g. 512,512")->required()->delimiter(',');
    compress_cmd->add_option("--compressor", ca.compressor, "hszp | hszp-nd | hszx | hszx-nd")->required();
    compress_cmd->add_option("--error", ca.error, "abs:<eps> or rel:<fraction of value range>")->required();
    compress_cmd->add_option("--block", ca.block, "Block extents")->delimiter(',');
    compress_cmd->add_option("--output", ca.output, "Container path")->required();

    DecompressArgs da;
    auto *decompress_cmd = app.add_subcommand("decompress", "Decompress to a chosen stage");
    decompress_cmd->add_option("--input", da.input, "Container path")->required();
    decompress_cmd->add_option("--stage", da.stage, "meta | decorrelated | quantized | full")->required();
    decompress_cmd->add_option("--output", da.output, "Output path")->required();

    AnalyzeArgs aa;
    auto *analyze_cmd = app.add_subcommand("analyze", "Run an analytical operation on compressed data");
    analyze_cmd->add_option("--op", aa.op, "mean | std | derivative | laplacian | divergence | curl")->required();
    analyze_cmd->add_option("--stage", aa.stage, "auto | meta | decorrelated | quantized | full (default auto)");
    analyze_cmd->add_option("--input", aa.input, "Container for scalar-field ops");
    analyze_cmd->add_option("--u", aa.u, "First vector component");
    analyze_cmd->add_option("--v", aa.v, "Second vector component");
    analyze_cmd->add_option("--w", aa.w, "Third vector component (3D)");
    analyze_cmd->add_option("--output", aa.output, "Prefix for field outputs, written as <prefix>.<comp>.f32");

    std::string info_input;
    auto *info_cmd = app.add_subcommand("info", "Describe a container");
    info_cmd->add_option("--input", info_input, "Container path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*compress_cmd) return cmd_compress(ca);
        if (*decompress_cmd) return cmd_decompress(da);
        if (*analyze_cmd) return cmd_analyze(aa);
        if (*info_cmd) return cmd_info(info_input);
    } catch (const UsageError &e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const hsz::Error &e) {
        std::cerr << "error [" << hsz::to_string(e.code()) << "]: " << e.what() << "\n";
        return kFailure;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}
