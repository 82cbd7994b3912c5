#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace stiffgrasp {

// Input validation failures (bad specs, shape mismatches, malformed configs).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Simulation failures (solver non-convergence, blow-ups).
struct SimError : std::runtime_error {
    explicit SimError(const std::string& msg, double residual = 0.0)
        : std::runtime_error(msg), residual(residual) {}
    double residual;
};

// File format / serialization failures.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// CRC-32 (IEEE 802.3, polynomial 0xEDB88320), table-driven.

inline const uint32_t* crc32_table() {
    static uint32_t table[256];
    static bool init = [] {
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k)
                c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            table[i] = c;
        }
        return true;
    }();
    (void)init;
    return table;
}

inline uint32_t crc32_update(uint32_t crc, const void* data, size_t len) {
    const uint8_t* p = static_cast<const uint8_t*>(data);
    const uint32_t* table = crc32_table();
    crc ^= 0xFFFFFFFFu;
    for (size_t i = 0; i < len; ++i)
        crc = table[(crc ^ p[i]) & 0xFFu] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

inline uint32_t crc32(const void* data, size_t len) { return crc32_update(0, data, len); }

// ---------------------------------------------------------------------------
// Seed derivation. splitmix64 finalizer; combine by feeding words through it.

inline uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t seed, uint64_t value) {
    return mix64(seed ^ mix64(value + 0x1234567ull));
}

inline uint64_t hash_string(uint64_t seed, const std::string& s) {
    uint64_t h = seed;
    for (char c : s) h = hash_combine(h, static_cast<uint64_t>(static_cast<uint8_t>(c)));
    return hash_combine(h, s.size());
}

// Deterministic RNG wrapper. Distribution helpers are hand-rolled so results
// do not depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // uniform in [0,1)
    double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    uint64_t uniform_index(uint64_t n) {
        // modulo bias negligible for n << 2^64; kept simple on purpose
        return n ? gen_() % n : 0;
    }

    double normal() {
        // Box-Muller, one value per call (cache discarded for determinism clarity)
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::mt19937_64 gen_;
};

// ---------------------------------------------------------------------------
// Little-endian binary I/O on byte buffers (host assumed little-endian; the
// write path memcpys fixed-width types, which is LE on every target we build).

inline void put_bytes(std::vector<uint8_t>& out, const void* p, size_t n) {
    const uint8_t* b = static_cast<const uint8_t*>(p);
    out.insert(out.end(), b, b + n);
}

template <typename T>
void put_le(std::vector<uint8_t>& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    put_bytes(out, &v, sizeof(T));
}

class ByteReader {
public:
    ByteReader(const uint8_t* data, size_t size) : data_(data), size_(size) {}
    explicit ByteReader(const std::vector<uint8_t>& buf) : data_(buf.data()), size_(buf.size()) {}

    template <typename T>
    T get() {
        T v;
        if (pos_ + sizeof(T) > size_) throw IoError("unexpected end of data");
        std::memcpy(&v, data_ + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    void get_bytes(void* dst, size_t n) {
        if (pos_ + n > size_) throw IoError("unexpected end of data");
        std::memcpy(dst, data_ + pos_, n);
        pos_ += n;
    }

    size_t pos() const { return pos_; }
    size_t remaining() const { return size_ - pos_; }

private:
    const uint8_t* data_;
    size_t size_;
    size_t pos_ = 0;
};

// Canonical shortest round-trip double formatting for manifests/metadata.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = std::strtod(buf, nullptr);
    if (back == v) {
        // try shorter representations that still round-trip
        for (int prec = 1; prec < 17; ++prec) {
            char shorter[64];
            std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
            if (std::strtod(shorter, nullptr) == v) return shorter;
        }
    }
    return buf;
}

std::vector<uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes);
void write_file_text(const std::string& path, const std::string& text);
std::string read_file_text(const std::string& path);

}  // namespace stiffgrasp
