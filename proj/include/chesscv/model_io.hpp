#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chesscv/network.hpp"

namespace chesscv {
namespace detail {

/// CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320).
inline std::uint32_t crc32(const unsigned char* data, std::size_t n,
                           std::uint32_t crc = 0) {
    static const std::array<std::uint32_t, 256> table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    crc ^= 0xFFFFFFFFu;
    for (std::size_t i = 0; i < n; ++i) crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline void put_f64(std::vector<unsigned char>& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64(out, bits);
}

struct ByteReader {
    const unsigned char* p;
    const unsigned char* end;

    void need(std::size_t n) const {
        if (static_cast<std::size_t>(end - p) < n)
            throw std::runtime_error("model file truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
        p += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
        p += 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double d;
        std::memcpy(&d, &bits, 8);
        return d;
    }
};

}  // namespace detail

/// Serialise a network: "CVNN" magic, format version, class count, layer
/// specs, per-parameter shapes and little-endian float64 payloads, and a
/// trailing CRC-32 of everything before it. Round-trips bit-exactly.
inline void save_network(const Network& net, const std::string& path) {
    std::vector<unsigned char> out;
    out.insert(out.end(), {'C', 'V', 'N', 'N'});
    detail::put_u32(out, 1);  // format version
    detail::put_u32(out, static_cast<std::uint32_t>(net.class_count));
    detail::put_u32(out, static_cast<std::uint32_t>(net.layers.size()));
    for (const auto& layer : net.layers) {
        const LayerSpec s = layer->spec();
        out.push_back(static_cast<unsigned char>(s.kind));
        detail::put_u32(out, static_cast<std::uint32_t>(s.a));
        detail::put_u32(out, static_cast<std::uint32_t>(s.b));
        detail::put_u32(out, static_cast<std::uint32_t>(s.c));
    }
    for (const auto& layer : net.layers) {
        for (const Tensor* t : layer->const_params()) {
            detail::put_u32(out, static_cast<std::uint32_t>(t->shape.size()));
            for (int d : t->shape) detail::put_u32(out, static_cast<std::uint32_t>(d));
            detail::put_u64(out, t->numel());
            for (double v : t->v) detail::put_f64(out, v);
        }
    }
    detail::put_u32(out, detail::crc32(out.data(), out.size()));

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("save_network: cannot open " + path);
    f.write(reinterpret_cast<const char*>(out.data()),
            static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("save_network: write failed for " + path);
}

inline Network load_network(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_network: cannot open " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
    if (buf.size() < 16 || std::memcmp(buf.data(), "CVNN", 4) != 0)
        throw std::runtime_error("load_network: not a model file: " + path);

    const std::size_t body = buf.size() - 4;
    detail::ByteReader tail{buf.data() + body, buf.data() + buf.size()};
    if (tail.u32() != detail::crc32(buf.data(), body))
        throw std::runtime_error("load_network: checksum mismatch in " + path);

    detail::ByteReader r{buf.data() + 4, buf.data() + body};
    if (r.u32() != 1) throw std::runtime_error("load_network: unsupported format version");
    const int classes = static_cast<int>(r.u32());
    const std::uint32_t n_layers = r.u32();

    Network net;
    net.class_count = classes;
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        r.need(1);
        LayerSpec s;
        s.kind = static_cast<LayerKind>(*r.p++);
        s.a = static_cast<int>(r.u32());
        s.b = static_cast<int>(r.u32());
        s.c = static_cast<int>(r.u32());
        net.layers.push_back(make_layer(s));
    }
    for (auto& layer : net.layers) {
        for (Tensor* t : layer->params()) {
            const std::uint32_t rank = r.u32();
            std::vector<int> shape(rank);
            for (std::uint32_t d = 0; d < rank; ++d) shape[d] = static_cast<int>(r.u32());
            const std::uint64_t count = r.u64();
            if (shape != t->shape || count != t->numel())
                throw std::runtime_error("load_network: parameter shape mismatch");
            for (std::uint64_t j = 0; j < count; ++j) t->v[j] = r.f64();
        }
    }
    if (r.p != r.end) throw std::runtime_error("load_network: trailing bytes");
    return net;
}

}  // namespace chesscv
