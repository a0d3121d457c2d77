#include "slstt/weights_io.hpp"

#include <cstring>
#include <fstream>

#include "slstt/error.hpp"

namespace slstt {

namespace {

constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& os, T value) {
    unsigned char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
        bytes[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) &
                                              0xff);
    os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is, const std::string& path) {
    unsigned char bytes[sizeof(T)];
    is.read(reinterpret_cast<char*>(bytes), sizeof(T));
    require(static_cast<bool>(is), "truncated weight file: " + path);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return static_cast<T>(v);
}

}  // namespace

void save_weights(const std::string& path, const NamedTensors& params) {
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os), "cannot open for writing: " + path);
    os.write("SLST", 4);
    put_le<std::uint32_t>(os, kVersion);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(params.count()));
    for (std::size_t i = 0; i < params.count(); ++i) {
        const auto& entry = params.entry(i);
        require(entry.name.size() <= 0xffff, "tensor name too long: " + entry.name);
        put_le<std::uint16_t>(os, static_cast<std::uint16_t>(entry.name.size()));
        os.write(entry.name.data(), static_cast<std::streamsize>(entry.name.size()));
        put_le<std::uint8_t>(os, static_cast<std::uint8_t>(entry.dtype));
        const auto& shape = entry.tensor.shape();
        put_le<std::uint8_t>(os, static_cast<std::uint8_t>(shape.size()));
        for (int d : shape) put_le<std::uint64_t>(os, static_cast<std::uint64_t>(d));
        for (double v : entry.tensor.values()) {
            if (entry.dtype == Dtype::F32) {
                const float f = static_cast<float>(v);
                std::uint32_t bits;
                std::memcpy(&bits, &f, 4);
                put_le<std::uint32_t>(os, bits);
            } else {
                std::uint64_t bits;
                std::memcpy(&bits, &v, 8);
                put_le<std::uint64_t>(os, bits);
            }
        }
    }
    require(static_cast<bool>(os), "write failed: " + path);
}

NamedTensors load_weights(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(static_cast<bool>(is), "cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    require(static_cast<bool>(is) && std::memcmp(magic, "SLST", 4) == 0,
            "not a weight file: " + path);
    const auto version = get_le<std::uint32_t>(is, path);
    require(version == kVersion,
            "unsupported weight file version " + std::to_string(version) + ": " + path);
    const auto count = get_le<std::uint32_t>(is, path);
    NamedTensors params;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name_len = get_le<std::uint16_t>(is, path);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        require(static_cast<bool>(is), "truncated weight file: " + path);
        const auto dtype_raw = get_le<std::uint8_t>(is, path);
        require(dtype_raw <= 1, "unknown dtype in weight file: " + path);
        const auto rank = get_le<std::uint8_t>(is, path);
        Shape shape;
        std::size_t elements = 1;
        for (int d = 0; d < rank; ++d) {
            const auto dim = get_le<std::uint64_t>(is, path);
            require(dim > 0 && dim < (1ull << 32), "implausible dimension in " + path);
            elements *= dim;
            shape.push_back(static_cast<int>(dim));
        }
        require(elements < (1ull << 28), "tensor too large in " + path);
        std::vector<double> values(elements);
        const Dtype dtype = static_cast<Dtype>(dtype_raw);
        for (std::size_t k = 0; k < elements; ++k) {
            if (dtype == Dtype::F32) {
                const auto bits = get_le<std::uint32_t>(is, path);
                float f;
                std::memcpy(&f, &bits, 4);
                values[k] = f;
            } else {
                const auto bits = get_le<std::uint64_t>(is, path);
                double v;
                std::memcpy(&v, &bits, 8);
                values[k] = v;
            }
        }
        params.add(name, Tensor(std::move(shape), std::move(values)), /*decay=*/true, dtype);
    }
    is.peek();
    require(is.eof(), "trailing bytes in weight file: " + path);
    return params;
}

}  // namespace slstt
