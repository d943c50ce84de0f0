#include "idla/container.hpp"

#include <array>
#include <cstdio>
#include <cstring>

namespace idla {

namespace {

std::array<std::uint64_t, 256> make_crc64_table() {
    std::array<std::uint64_t, 256> table{};
    const std::uint64_t poly = 0xC96C5795D7870F42ULL;  // reflected ECMA-182
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint64_t crc = i;
        for (int bit = 0; bit < 8; ++bit)
            crc = (crc & 1) ? (crc >> 1) ^ poly : crc >> 1;
        table[i] = crc;
    }
    return table;
}

const std::array<std::uint64_t, 256>& crc64_table() {
    static const auto table = make_crc64_table();
    return table;
}

}  // namespace

std::uint64_t crc64(const void* data, std::size_t len, std::uint64_t seed) {
    const auto& table = crc64_table();
    const auto* p = static_cast<const std::uint8_t*>(data);
    std::uint64_t crc = ~seed;
    for (std::size_t i = 0; i < len; ++i)
        crc = table[(crc ^ p[i]) & 0xff] ^ (crc >> 8);
    return ~crc;
}

void BinaryWriter::magic(const char m[4]) { bytes(m, 4); }
void BinaryWriter::u8(std::uint8_t v) { buf_.push_back(v); }
void BinaryWriter::u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) buf_.push_back(std::uint8_t(v >> (8 * i)));
}
void BinaryWriter::u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(std::uint8_t(v >> (8 * i)));
}
void BinaryWriter::u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(std::uint8_t(v >> (8 * i)));
}
void BinaryWriter::f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
}
void BinaryWriter::bytes(const void* p, std::size_t n) {
    const auto* q = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), q, q + n);
}
void BinaryWriter::varint(std::int64_t v) {
    auto z = (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
    while (z >= 0x80) {
        buf_.push_back(std::uint8_t(z) | 0x80);
        z >>= 7;
    }
    buf_.push_back(std::uint8_t(z));
}

void BinaryWriter::finish_to_file(const std::string& path) const {
    const std::uint64_t crc = crc64(buf_.data(), buf_.size());
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw ContractError("cannot open " + path + " for writing");
    bool ok = std::fwrite(buf_.data(), 1, buf_.size(), fp) == buf_.size();
    std::uint8_t trailer[8];
    for (int i = 0; i < 8; ++i) trailer[i] = std::uint8_t(crc >> (8 * i));
    ok = ok && std::fwrite(trailer, 1, 8, fp) == 8;
    ok = (std::fclose(fp) == 0) && ok;
    if (!ok) throw ContractError("short write to " + path);
}

BinaryReader::BinaryReader(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw CorruptSnapshotError("cannot open " + path);
    std::fseek(fp, 0, SEEK_END);
    const long n = std::ftell(fp);
    std::fseek(fp, 0, SEEK_SET);
    if (n < 8) {
        std::fclose(fp);
        throw CorruptSnapshotError(path + ": truncated file");
    }
    buf_.resize(std::size_t(n));
    const bool ok = std::fread(buf_.data(), 1, buf_.size(), fp) == buf_.size();
    std::fclose(fp);
    if (!ok) throw CorruptSnapshotError(path + ": short read");

    payload_len_ = buf_.size() - 8;
    std::uint64_t stored = 0;
    for (int i = 7; i >= 0; --i) stored = (stored << 8) | buf_[payload_len_ + std::size_t(i)];
    if (crc64(buf_.data(), payload_len_) != stored)
        throw CorruptSnapshotError(path + ": checksum mismatch");
}

void BinaryReader::need(std::size_t n) {
    if (pos_ + n > payload_len_) throw CorruptSnapshotError("truncated payload");
}
void BinaryReader::expect_magic(const char m[4]) {
    need(4);
    if (std::memcmp(buf_.data() + pos_, m, 4) != 0)
        throw CorruptSnapshotError(std::string("bad magic, expected ") + std::string(m, 4));
    pos_ += 4;
}
std::uint8_t BinaryReader::u8() {
    need(1);
    return buf_[pos_++];
}
std::uint16_t BinaryReader::u16() {
    need(2);
    std::uint16_t v = 0;
    for (int i = 1; i >= 0; --i) v = std::uint16_t((v << 8) | buf_[pos_ + std::size_t(i)]);
    pos_ += 2;
    return v;
}
std::uint32_t BinaryReader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | buf_[pos_ + std::size_t(i)];
    pos_ += 4;
    return v;
}
std::uint64_t BinaryReader::u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | buf_[pos_ + std::size_t(i)];
    pos_ += 8;
    return v;
}
double BinaryReader::f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}
void BinaryReader::bytes(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
}
std::int64_t BinaryReader::varint() {
    std::uint64_t z = 0;
    int shift = 0;
    while (true) {
        need(1);
        const std::uint8_t b = buf_[pos_++];
        z |= std::uint64_t(b & 0x7f) << shift;
        if (!(b & 0x80)) break;
        shift += 7;
        if (shift > 63) throw CorruptSnapshotError("varint overflow");
    }
    return static_cast<std::int64_t>((z >> 1) ^ (~(z & 1) + 1));
}

}  // namespace idla
