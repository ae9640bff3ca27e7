#include "demfi/weights.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace demfi {

namespace {

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t read_u32(std::istream& is, const char* what) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) {
        throw std::runtime_error(std::string("weights: truncated file reading ") + what +
                                 " at offset " + std::to_string(is.tellg()));
    }
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

std::uint64_t read_u64(std::istream& is, const char* what) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) {
        throw std::runtime_error(std::string("weights: truncated file reading ") + what +
                                 " at offset " + std::to_string(is.tellg()));
    }
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

void write_f32_le(std::ostream& os, const std::vector<float>& v) {
    for (float f : v) {
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        write_u32(os, bits);
    }
}

constexpr char kMagic[4] = {'D', 'M', 'F', 'I'};

}  // namespace

std::int64_t WeightStore::parameter_count() const {
    std::int64_t total = 0;
    for (const auto& [path, t] : params_) total += t.numel();
    return total;
}

void add_conv_param(std::vector<ParamSpec>& out, const std::string& prefix,
                    std::int64_t c_out, std::int64_t c_in, std::int64_t kh, std::int64_t kw) {
    out.push_back({prefix + "/kernel", {c_out, c_in, kh, kw}, false});
    out.push_back({prefix + "/bias", {c_out, 1, 1, 1}, true});
}

WeightStore xavier_init(const std::vector<ParamSpec>& specs, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    WeightStore store;
    for (const auto& spec : specs) {
        Tensor t(spec.shape[0], spec.shape[1], spec.shape[2], spec.shape[3]);
        if (!spec.is_bias) {
            const double fan_in = static_cast<double>(spec.shape[1] * spec.shape[2] * spec.shape[3]);
            const double fan_out = static_cast<double>(spec.shape[0] * spec.shape[2] * spec.shape[3]);
            const double bound = std::sqrt(6.0 / (fan_in + fan_out));
            std::uniform_real_distribution<double> dist(-bound, bound);
            for (auto& v : t.data) v = static_cast<float>(dist(rng));
        }
        store.put(spec.path, std::move(t));
    }
    return store;
}

void save_weights(const WeightStore& store, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("weights: cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    write_u32(os, 1);
    write_u64(os, store.size());
    for (const auto& [name, t] : store.entries()) {
        write_u32(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        os.put(static_cast<char>(0));  // dtype f32
        os.put(static_cast<char>(4));  // rank
        for (int d = 0; d < 4; ++d) write_u64(os, static_cast<std::uint64_t>(t.shape[d]));
        write_f32_le(os, t.data);
    }
    if (!os) throw std::runtime_error("weights: write failed for '" + path + "'");
}

WeightStore load_weights(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("weights: cannot open '" + path + "'");
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("weights: bad magic at offset 0 in '" + path + "'");
    }
    const std::uint32_t version = read_u32(is, "version");
    if (version != 1) {
        throw std::runtime_error("weights: unsupported version " + std::to_string(version) +
                                 " at offset 4 in '" + path + "'");
    }
    const std::uint64_t count = read_u64(is, "entry count");
    WeightStore store;
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint32_t len = read_u32(is, "path length");
        std::string name(len, '\0');
        if (!is.read(name.data(), len)) {
            throw std::runtime_error("weights: truncated path at offset " + std::to_string(is.tellg()));
        }
        const int dtype = is.get();
        const int rank = is.get();
        if (dtype != 0) throw std::runtime_error("weights: unknown dtype code " + std::to_string(dtype));
        if (rank != 4) throw std::runtime_error("weights: unsupported rank " + std::to_string(rank));
        std::array<std::int64_t, 4> shape{};
        for (int d = 0; d < 4; ++d) shape[d] = static_cast<std::int64_t>(read_u64(is, "dim"));
        Tensor t(shape[0], shape[1], shape[2], shape[3]);
        for (auto& v : t.data) {
            const std::uint32_t bits = read_u32(is, "payload");
            std::memcpy(&v, &bits, 4);
        }
        store.put(name, std::move(t));
    }
    return store;
}

}  // namespace demfi
