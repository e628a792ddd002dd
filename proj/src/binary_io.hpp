#pragma once

// Little-endian binary reader/writer shared by the embedding store and the
// model checkpoint.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "stance/error.hpp"

namespace stance::io {

inline std::string describe_bytes(const char* bytes, std::size_t n) {
  std::ostringstream out;
  out << '\'';
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<unsigned char>(bytes[i]);
    out << (c >= 0x20 && c < 0x7F ? static_cast<char>(c) : '.');
  }
  out << "' (";
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out << ' ';
    out << std::hex << std::setw(2) << std::setfill('0')
        << static_cast<unsigned>(static_cast<unsigned char>(bytes[i]));
  }
  out << ')';
  return out.str();
}

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatError::Code::kIo, "cannot open " + path_);
    buffer_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  bool at_end() const { return pos_ == buffer_.size(); }

  void expect_magic(const char (&magic)[4]) {
    const char* got = take(4, "magic");
    if (std::memcmp(got, magic, 4) != 0) {
      throw FormatError(FormatError::Code::kBadMagic,
                        "bad magic in " + path_ + ": expected " + describe_bytes(magic, 4) +
                            ", got " + describe_bytes(got, 4));
    }
  }

  template <typename T>
  T read() {
    static_assert(std::is_integral_v<T> && std::is_unsigned_v<T>);
    const auto* p = reinterpret_cast<const unsigned char*>(take(sizeof(T), "integer"));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(static_cast<T>(p[i]) << (8 * i));
    return value;
  }

  std::string read_string() {
    const auto len = read<std::uint16_t>();
    const char* p = take(len, "string");
    return std::string(p, len);
  }

  std::vector<float> read_floats(std::size_t n) {
    std::vector<float> out(n);
    for (auto& f : out) f = std::bit_cast<float>(read<std::uint32_t>());
    return out;
  }

  std::vector<std::uint8_t> read_bytes(std::size_t n) {
    const char* p = take(n, "bytes");
    return std::vector<std::uint8_t>(p, p + n);
  }

 private:
  const char* take(std::size_t n, const char* what) {
    if (buffer_.size() - pos_ < n) {
      throw FormatError(FormatError::Code::kTruncated,
                        "truncated file " + path_ + ": needed " + std::to_string(n) +
                            " bytes for " + what + " at offset " + std::to_string(pos_) +
                            ", " + std::to_string(buffer_.size() - pos_) + " left");
    }
    const char* p = buffer_.data() + pos_;
    pos_ += n;
    return p;
  }

  std::string path_;
  std::vector<char> buffer_;
  std::size_t pos_ = 0;
};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path)
      : path_(path.string()), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw FormatError(FormatError::Code::kIo, "cannot write " + path_);
  }

  void write_magic(const char (&magic)[4]) { out_.write(magic, 4); }

  template <typename T>
  void write(T value) {
    static_assert(std::is_integral_v<T> && std::is_unsigned_v<T>);
    char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
    out_.write(bytes, sizeof(T));
  }

  void write_string(const std::string& s) {
    if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw FormatError(FormatError::Code::kIo, "string too long for u16 length: " + s.substr(0, 32));
    }
    write<std::uint16_t>(static_cast<std::uint16_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

  template <typename Range>
  void write_floats(const Range& values) {
    for (auto v : values) write<std::uint32_t>(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }

  void write_bytes(const std::vector<std::uint8_t>& bytes) {
    out_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }

  void finish() {
    out_.flush();
    if (!out_) throw FormatError(FormatError::Code::kIo, "write failed for " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace stance::io
