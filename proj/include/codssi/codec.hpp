#pragma once

#include <cstdint>
#include <string>

#include "codssi/bytes.hpp"
#include "codssi/errors.hpp"

namespace codssi {

// Parse failure with the offset where the input stopped making sense.
class CodecError : public Error {
 public:
  CodecError(const std::string& what, size_t position)
      : Error(what + " at offset " + std::to_string(position)), position_(position) {}
  size_t position() const { return position_; }

 private:
  size_t position_;
};

// Canonical binary encoding: big-endian integers, u32 length prefixes on
// variable fields. Same layout for files and wire bodies.
class Writer {
 public:
  void u8(uint8_t v) { append_u8(out_, v); }
  void u32(uint32_t v) { append_u32_be(out_, v); }
  void u64(uint64_t v) { append_u64_be(out_, v); }
  void i64(int64_t v) { append_u64_be(out_, static_cast<uint64_t>(v)); }
  void raw(BytesView b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void bytes(BytesView b) {
    u32(static_cast<uint32_t>(b.size()));
    raw(b);
  }
  void str(std::string_view s) {
    bytes(BytesView(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
  }

  const Bytes& view() const { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(BytesView data) : data_(data) {}

  uint8_t u8() {
    need(1, "u8");
    return data_[pos_++];
  }
  uint32_t u32() {
    need(4, "u32");
    uint32_t v = read_u32_be(data_.subspan(pos_, 4));
    pos_ += 4;
    return v;
  }
  uint64_t u64() {
    need(8, "u64");
    uint64_t v = read_u64_be(data_.subspan(pos_, 8));
    pos_ += 8;
    return v;
  }
  int64_t i64() { return static_cast<int64_t>(u64()); }
  BytesView raw(size_t n) {
    need(n, "raw bytes");
    BytesView v = data_.subspan(pos_, n);
    pos_ += n;
    return v;
  }
  Bytes bytes() {
    uint32_t n = u32();
    BytesView v = raw(n);
    return Bytes(v.begin(), v.end());
  }
  std::string str() {
    Bytes b = bytes();
    return std::string(b.begin(), b.end());
  }

  size_t position() const { return pos_; }
  size_t remaining() const { return data_.size() - pos_; }
  void expect_end() const {
    if (pos_ != data_.size()) throw CodecError("trailing bytes", pos_);
  }

 private:
  void need(size_t n, const char* what) const {
    if (data_.size() - pos_ < n) {
      throw CodecError(std::string("truncated ") + what, pos_);
    }
  }

  BytesView data_;
  size_t pos_ = 0;
};

}  // namespace codssi
