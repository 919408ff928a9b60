#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace underloc::dataio {

/// Little-endian byte sink used by all ULx1 writers.
class ByteWriter {
public:
    void magic(std::string_view four_cc);
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v);
    void f32(float v);
    /// u32 byte length followed by the UTF-8 bytes.
    void str(std::string_view s);
    void raw(std::span<const std::uint8_t> data);

    [[nodiscard]] const std::vector<std::uint8_t>& bytes() const { return bytes_; }

    /// Writes to a temporary sibling, then renames over `path`.
    void save(const std::filesystem::path& path) const;

private:
    std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked little-endian reader. Every failure throws ParseError
/// naming `source` and the byte offset.
class ByteReader {
public:
    ByteReader(std::vector<std::uint8_t> data, std::string source);

    static ByteReader from_file(const std::filesystem::path& path);

    void expect_magic(std::string_view four_cc);
    std::uint8_t u8();
    std::uint32_t u32();
    float f32();
    std::string str();
    std::span<const std::uint8_t> raw(std::size_t n);

    [[nodiscard]] bool at_end() const { return pos_ == data_.size(); }
    [[nodiscard]] std::size_t offset() const { return pos_; }
    [[nodiscard]] const std::string& source() const { return source_; }

    /// Throws unless every byte was consumed.
    void expect_end() const;

private:
    void need(std::size_t n) const;

    std::vector<std::uint8_t> data_;
    std::string source_;
    std::size_t pos_ = 0;
};

}  // namespace underloc::dataio
