#include "parax/ledger/bytes.hpp"

#include <bit>
#include <cstring>

#include "parax/ledger/error.hpp"

namespace parax {

ByteWriter& ByteWriter::u8(std::uint8_t v) {
  out_.push_back(v);
  return *this;
}

ByteWriter& ByteWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

ByteWriter& ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

ByteWriter& ByteWriter::f64(double v) { return u64(std::bit_cast<std::uint64_t>(v)); }

ByteWriter& ByteWriter::raw(ByteView bytes) {
  out_.insert(out_.end(), bytes.begin(), bytes.end());
  return *this;
}

ByteWriter& ByteWriter::bytes(ByteView bytes) {
  u32(static_cast<std::uint32_t>(bytes.size()));
  return raw(bytes);
}

ByteWriter& ByteWriter::str(std::string_view s) {
  return bytes(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

ByteView ByteReader::raw(std::size_t n) {
  if (n > remaining()) {
    throw Error(Errc::Decode, "truncated input at offset " + std::to_string(pos_));
  }
  auto v = in_.subspan(pos_, n);
  pos_ += n;
  return v;
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

std::uint32_t ByteReader::u32() {
  auto v = raw(4);
  std::uint32_t out = 0;
  for (auto b : v) out = (out << 8) | b;
  return out;
}

std::uint64_t ByteReader::u64() {
  auto v = raw(8);
  std::uint64_t out = 0;
  for (auto b : v) out = (out << 8) | b;
  return out;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

Bytes ByteReader::bytes() {
  auto n = u32();
  auto v = raw(n);
  return Bytes(v.begin(), v.end());
}

std::string ByteReader::str() {
  auto b = bytes();
  return std::string(b.begin(), b.end());
}

void ByteReader::expect_done() const {
  if (!done()) {
    throw Error(Errc::Decode, std::to_string(remaining()) + " trailing bytes");
  }
}

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0xf]);
  }
  return s;
}

Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw Error(Errc::Decode, "odd-length hex");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = nibble(hex[i]);
    int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::Decode, "bad hex digit");
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

}  // namespace parax
