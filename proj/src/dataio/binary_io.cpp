#include "underloc/dataio/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "underloc/common/errors.hpp"

namespace underloc::dataio {

void ByteWriter::magic(std::string_view four_cc) {
    for (const char c : four_cc) bytes_.push_back(static_cast<std::uint8_t>(c));
}

void ByteWriter::u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

void ByteWriter::str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    for (const char c : s) bytes_.push_back(static_cast<std::uint8_t>(c));
}

void ByteWriter::raw(std::span<const std::uint8_t> data) {
    bytes_.insert(bytes_.end(), data.begin(), data.end());
}

void ByteWriter::save(const std::filesystem::path& path) const {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes_.data()),
                  static_cast<std::streamsize>(bytes_.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

ByteReader::ByteReader(std::vector<std::uint8_t> data, std::string source)
    : data_(std::move(data)), source_(std::move(source)) {}

ByteReader ByteReader::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path.string());
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    return ByteReader(std::move(data), path.string());
}

void ByteReader::need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
        throw ParseError(source_ + ": truncated at byte " + std::to_string(pos_) + " (need " +
                         std::to_string(n) + " more bytes)");
    }
}

void ByteReader::expect_magic(std::string_view four_cc) {
    need(four_cc.size());
    if (std::memcmp(data_.data() + pos_, four_cc.data(), four_cc.size()) != 0) {
        throw ParseError(source_ + ": bad magic, expected \"" + std::string(four_cc) + "\"");
    }
    pos_ += four_cc.size();
}

std::uint8_t ByteReader::u8() {
    need(1);
    return data_[pos_++];
}

std::uint32_t ByteReader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }

std::string ByteReader::str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
}

std::span<const std::uint8_t> ByteReader::raw(std::size_t n) {
    need(n);
    std::span<const std::uint8_t> out(data_.data() + pos_, n);
    pos_ += n;
    return out;
}

void ByteReader::expect_end() const {
    if (!at_end()) {
        throw ParseError(source_ + ": " + std::to_string(data_.size() - pos_) +
                         " trailing bytes after byte " + std::to_string(pos_));
    }
}

}  // namespace underloc::dataio
