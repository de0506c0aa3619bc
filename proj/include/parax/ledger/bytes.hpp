#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace parax {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Big-endian, length-prefixed writer. Every wire format in the project
/// goes through this so that encodings stay canonical.
class ByteWriter {
 public:
  ByteWriter& u8(std::uint8_t v);
  ByteWriter& u32(std::uint32_t v);
  ByteWriter& u64(std::uint64_t v);
  ByteWriter& f64(double v);
  /// Raw bytes, no prefix. Only for fixed-width fields.
  ByteWriter& raw(ByteView bytes);
  template <std::size_t N>
  ByteWriter& raw(const std::array<std::uint8_t, N>& a) {
    return raw(ByteView(a.data(), a.size()));
  }
  /// u32 length followed by the bytes.
  ByteWriter& bytes(ByteView bytes);
  ByteWriter& str(std::string_view s);

  const Bytes& data() const& { return out_; }
  Bytes take() && { return std::move(out_); }

 private:
  Bytes out_;
};

/// Bounds-checked reader; throws Error(Errc::Decode) on truncation.
class ByteReader {
 public:
  explicit ByteReader(ByteView in) : in_(in) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  ByteView raw(std::size_t n);
  template <std::size_t N>
  std::array<std::uint8_t, N> fixed() {
    std::array<std::uint8_t, N> a{};
    auto v = raw(N);
    std::copy(v.begin(), v.end(), a.begin());
    return a;
  }
  Bytes bytes();
  std::string str();

  std::size_t remaining() const { return in_.size() - pos_; }
  std::size_t position() const { return pos_; }
  bool done() const { return pos_ == in_.size(); }
  void expect_done() const;

 private:
  ByteView in_;
  std::size_t pos_ = 0;
};

std::string to_hex(ByteView bytes);
Bytes from_hex(std::string_view hex);

}  // namespace parax
