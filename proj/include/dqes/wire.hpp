/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.  See the NOTICE file
 * distributed with this work for additional information
 * regarding copyright ownership.  The ASF licenses this file
 * to you under the Apache License, Version 2.0 (the
 * "License"); you may not use this file except in compliance
 * with the License.  You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an
 * "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, either express or implied.  See the License for the
 * specific language governing permissions and limitations
 * under the License.
 */

#ifndef DQES_WIRE_HPP_
#define DQES_WIRE_HPP_

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "dqes/errors.hpp"

namespace dqes {

/// Algorithm identifiers; the numeric values are the wire tags.
enum class algo : uint8_t { gk = 1, sampling = 2, qdigest = 3, fastqdigest = 4, rms = 5 };

std::string to_string(algo a);
/// Parses "gk", "sampling", "qdigest", "fastqdigest" or "rms".
algo parse_algo(const std::string& name);

using bytes = std::vector<uint8_t>;

/// Appends little-endian primitives to a byte vector.
class byte_writer {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u32(uint32_t v) { put(v); }
  void i32(int32_t v) { put(static_cast<uint32_t>(v)); }
  void u64(uint64_t v) { put(v); }
  void f64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put(bits);
  }
  void raw(const void* data, std::size_t len) {
    const auto* p = static_cast<const uint8_t*>(data);
    buf_.insert(buf_.end(), p, p + len);
  }
  const bytes& data() const { return buf_; }
  bytes take() { return std::move(buf_); }

 private:
  template <typename T>
  void put(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  bytes buf_;
};

/// Reads little-endian primitives, raising format_error with the offset on truncation.
class byte_reader {
 public:
  byte_reader(const uint8_t* data, std::size_t len) : data_(data), len_(len) {}
  explicit byte_reader(const bytes& b) : byte_reader(b.data(), b.size()) {}

  uint8_t u8() { return get<uint8_t>(); }
  uint32_t u32() { return get<uint32_t>(); }
  int32_t i32() { return static_cast<int32_t>(get<uint32_t>()); }
  uint64_t u64() { return get<uint64_t>(); }
  double f64() {
    const uint64_t bits = get<uint64_t>();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  void raw(void* out, std::size_t len) {
    need(len);
    std::memcpy(out, data_ + pos_, len);
    pos_ += len;
  }

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return len_ - pos_; }

  /// Checks that a declared element count fits in the remaining bytes.
  void check_count(uint64_t count, std::size_t element_size) const {
    if (element_size != 0 && count > remaining() / element_size) {
      throw format_error("declared element count exceeds blob size", pos_);
    }
  }

  void expect_end() const {
    if (pos_ != len_) throw format_error("trailing bytes after payload", pos_);
  }

 private:
  void need(std::size_t len) const {
    if (len > len_ - pos_) throw format_error("truncated blob", pos_);
  }
  template <typename T>
  T get() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(data_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }

  const uint8_t* data_;
  std::size_t len_;
  std::size_t pos_ = 0;
};

/// FNV-1a hash of a blob. Used to seed randomness that must be reproducible
/// from a summary's serialized state alone.
inline uint64_t fingerprint(const bytes& b) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (uint8_t c : b) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Common blob header: "DQES", version, algorithm tag, epsilon, item count.
struct wire_header {
  static constexpr uint8_t version = 1;
  static constexpr std::size_t size = 22;

  algo tag;
  double epsilon;
  uint64_t n;

  void write(byte_writer& w) const;
  /// Reads and validates magic, version and tag.
  static wire_header read(byte_reader& r);
};

}  // namespace dqes

#endif  // DQES_WIRE_HPP_
