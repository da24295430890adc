#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "attrikit/errors.hpp"
#include "attrikit/prng.hpp"

namespace attrikit {

// Little-endian buffer writer for the binary file formats. The checksum
// convention shared by all formats: FNV-1a over every byte after the 4-byte
// magic, appended as a trailing u64.
class ByteWriter {
public:
    void magic(const char tag[4]) { append(tag, 4); }
    void u8(uint8_t v) { append(&v, 1); }
    void u32(uint32_t v) {
        uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                        static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
        append(b, 4);
    }
    void u64(uint64_t v) {
        u32(static_cast<uint32_t>(v));
        u32(static_cast<uint32_t>(v >> 32));
    }
    void f32(float v) {
        uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        append(s.data(), s.size());
    }

    // Appends the checksum of bytes [4, size) and returns the full buffer.
    const std::vector<uint8_t>& finish_with_checksum() {
        u64(fnv1a64(buf_.data() + 4, buf_.size() - 4));
        return buf_;
    }

    const std::vector<uint8_t>& bytes() const { return buf_; }

private:
    void append(const void* p, size_t n) {
        const auto* b = static_cast<const uint8_t*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    std::vector<uint8_t> buf_;
};

class ByteReader {
public:
    ByteReader(const uint8_t* data, size_t size, std::string origin)
        : data_(data), size_(size), origin_(std::move(origin)) {}

    // Verifies magic and the trailing checksum, then restricts reads to the
    // payload between them.
    void open(const char expect_magic[4]) {
        if (size_ < 12) throw FormatError(origin_ + ": truncated file (" +
                                          std::to_string(size_) + " bytes)");
        if (std::memcmp(data_, expect_magic, 4) != 0) {
            std::string found(reinterpret_cast<const char*>(data_), 4);
            for (char& c : found)
                if (c < 0x20 || c > 0x7e) c = '?';
            throw FormatError(origin_ + ": bad magic \"" + found + "\", expected \"" +
                              std::string(expect_magic, 4) + "\"");
        }
        pos_ = 4;
        end_ = size_ - 8;
        uint64_t stored = 0;
        for (int i = 0; i < 8; ++i) stored |= static_cast<uint64_t>(data_[end_ + i]) << (8 * i);
        const uint64_t computed = fnv1a64(data_ + 4, end_ - 4);
        if (stored != computed) throw FormatError(origin_ + ": checksum mismatch");
    }

    uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    uint64_t u64() {
        const uint64_t lo = u32();
        const uint64_t hi = u32();
        return lo | (hi << 32);
    }
    float f32() {
        const uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    std::string str() {
        const uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }

    void expect_end() const {
        if (pos_ != end_) throw FormatError(origin_ + ": trailing bytes in payload");
    }

private:
    void need(size_t n) const {
        if (pos_ + n > end_)
            throw FormatError(origin_ + ": truncated payload at byte " + std::to_string(pos_));
    }
    const uint8_t* data_;
    size_t size_;
    std::string origin_;
    size_t pos_ = 0;
    size_t end_ = 0;
};

std::vector<uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes);

}  // namespace attrikit
