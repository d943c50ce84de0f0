#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idla/errors.hpp"

namespace idla {

/// CRC-64/XZ (reflected ECMA-182 polynomial).  check("123456789") =
/// 0x995DC9BBDF1939FA.
std::uint64_t crc64(const void* data, std::size_t len, std::uint64_t seed = 0);

/// Little-endian byte buffer with a CRC64 trailer, the shared framing
/// of the snapshot and cache files ("IDLA", "IDLG", "IDLK").
class BinaryWriter {
public:
    void magic(const char m[4]);
    void u8(std::uint8_t v);
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v);
    void bytes(const void* p, std::size_t n);
    /// Zigzag + LEB128.
    void varint(std::int64_t v);

    /// Append the CRC64 trailer and write the whole buffer to `path`.
    void finish_to_file(const std::string& path) const;

    const std::vector<std::uint8_t>& buffer() const { return buf_; }

private:
    std::vector<std::uint8_t> buf_;
};

class BinaryReader {
public:
    /// Loads the file and verifies the CRC64 trailer; throws
    /// CorruptSnapshotError on short files or checksum mismatch.
    explicit BinaryReader(const std::string& path);

    void expect_magic(const char m[4]);
    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64();
    void bytes(void* p, std::size_t n);
    std::int64_t varint();

    bool at_end() const { return pos_ == payload_len_; }

private:
    void need(std::size_t n);
    std::vector<std::uint8_t> buf_;
    std::size_t pos_ = 0;
    std::size_t payload_len_ = 0;
};

}  // namespace idla
