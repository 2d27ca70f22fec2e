#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <type_traits>

#include "rfree/errors.hpp"
#include "rfree/sieve.hpp"

namespace rfree {

namespace {

constexpr std::array<char, 5> kMagic{'R', 'F', 'S', 'V', '1'};

template <typename T>
void write_le(std::ostream& out, const T* data, size_t count) {
    static_assert(std::is_unsigned_v<T>);
    if constexpr (std::endian::native == std::endian::little || sizeof(T) == 1) {
        out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
    } else {
        for (size_t i = 0; i < count; ++i) {
            unsigned char buf[sizeof(T)];
            for (size_t b = 0; b < sizeof(T); ++b) buf[b] = static_cast<unsigned char>(data[i] >> (8 * b));
            out.write(reinterpret_cast<const char*>(buf), sizeof(T));
        }
    }
}

template <typename T>
void write_le(std::ostream& out, T value) {
    write_le(out, &value, 1);
}

template <typename T>
void read_le(std::istream& in, T* data, size_t count) {
    static_assert(std::is_unsigned_v<T>);
    if constexpr (std::endian::native == std::endian::little || sizeof(T) == 1) {
        in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
    } else {
        for (size_t i = 0; i < count; ++i) {
            unsigned char buf[sizeof(T)];
            in.read(reinterpret_cast<char*>(buf), sizeof(T));
            T v = 0;
            for (size_t b = 0; b < sizeof(T); ++b) v |= static_cast<T>(buf[b]) << (8 * b);
            data[i] = v;
        }
    }
    if (!in) throw InvalidArgument("sieve cache: truncated file");
}

template <typename T>
T read_le(std::istream& in) {
    T value{};
    read_le(in, &value, 1);
    return value;
}

}  // namespace

void SieveTable::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("sieve cache: cannot open " + path.string() + " for writing");
    out.write(kMagic.data(), kMagic.size());
    write_le<uint64_t>(out, limit_);
    write_le<uint32_t>(out, static_cast<uint32_t>(rs_.size()));
    for (unsigned r : rs_) write_le<uint32_t>(out, r);
    write_le<uint64_t>(out, arith_limit_);
    write_le(out, mu_.data(), mu_.size());
    for (const auto& bits : r_free_) write_le(out, bits.data(), bits.size());
    write_le(out, spf_.data(), spf_.size());
    write_le(out, omega_.data(), omega_.size());
    write_le(out, phi_.data(), phi_.size());
    if (!out) throw InvalidArgument("sieve cache: write failed for " + path.string());
}

SieveTable SieveTable::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("sieve cache: cannot open " + path.string());
    std::array<char, 5> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw InvalidArgument("sieve cache: bad magic in " + path.string());

    SieveTable t;
    t.limit_ = read_le<uint64_t>(in);
    auto count = read_le<uint32_t>(in);
    if (t.limit_ == 0 || count > 64) throw InvalidArgument("sieve cache: corrupt header");
    for (uint32_t i = 0; i < count; ++i) t.rs_.push_back(read_le<uint32_t>(in));
    if (!std::is_sorted(t.rs_.begin(), t.rs_.end()) ||
        std::any_of(t.rs_.begin(), t.rs_.end(), [](unsigned r) { return r < 2; }))
        throw InvalidArgument("sieve cache: corrupt r-set");
    t.arith_limit_ = read_le<uint64_t>(in);
    if (t.arith_limit_ > t.limit_ || t.arith_limit_ > UINT32_MAX)
        throw InvalidArgument("sieve cache: corrupt arithmetic limit");

    // Refuse sizes the stream cannot possibly hold before allocating.
    auto here = in.tellg();
    in.seekg(0, std::ios::end);
    auto remaining = static_cast<uint64_t>(in.tellg() - here);
    in.seekg(here);
    uint64_t mu_words = (t.limit_ + 32) / 32;
    uint64_t bit_words = (t.limit_ + 64) / 64;
    uint64_t expected = mu_words * 8 + count * bit_words * 8 + (t.arith_limit_ + 1) * 9;
    if (remaining != expected) throw InvalidArgument("sieve cache: payload size mismatch");

    t.mu_.resize(mu_words);
    read_le(in, t.mu_.data(), t.mu_.size());
    t.r_free_.assign(count, std::vector<uint64_t>(bit_words));
    for (auto& bits : t.r_free_) read_le(in, bits.data(), bits.size());
    t.spf_.resize(t.arith_limit_ + 1);
    read_le(in, t.spf_.data(), t.spf_.size());
    t.omega_.resize(t.arith_limit_ + 1);
    read_le(in, t.omega_.data(), t.omega_.size());
    t.phi_.resize(t.arith_limit_ + 1);
    read_le(in, t.phi_.data(), t.phi_.size());
    return t;
}

}  // namespace rfree
