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

#ifndef DQES_GK_HPP_
#define DQES_GK_HPP_

#include <cstdint>
#include <map>
#include <vector>

#include "dqes/corpus.hpp"
#include "dqes/wire.hpp"

namespace dqes {

/// Insertion policy. `classic` compresses every ceil(1/(2 eps)) insertions;
/// `mixed` drops a new tuple immediately when its neighbour can absorb it and
/// compresses whenever the tuple list doubles.
enum class gk_mode : uint8_t { classic = 0, mixed = 1 };

/// One entry of the summary: value, gap to the previous lower rank bound, and
/// the spread between the upper and lower rank bounds.
struct gk_tuple {
  value_t v;
  uint64_t g;
  uint64_t delta;

  bool operator==(const gk_tuple&) const = default;
};

/// Band index of `delta` for a summary holding n items.
/// Returns threshold + 1 for delta = 0 and 0 for delta >= floor(2 eps n),
/// where threshold = ceil(log2(2 eps n)).
uint32_t gk_capacity(uint64_t delta, uint64_t n, double epsilon);

/// One COMPRESS pass over a tuple list holding n items. Never removes the
/// first tuple and does nothing while floor(2 eps n) < 1.
void gk_compress_tuples(std::vector<gk_tuple>& tuples, uint64_t n, double epsilon);

/// Greenwald-Khanna quantile summary.
class gk_summary {
 public:
  explicit gk_summary(double epsilon, gk_mode mode = gk_mode::mixed);

  /// Rebuilds a summary from an explicit tuple list (tests, deserialization).
  static gk_summary from_tuples(double epsilon, uint64_t n, const std::vector<gk_tuple>& tuples,
                                gk_mode mode = gk_mode::classic, bool merged = false);

  void update(value_t v);

  /// Runs a COMPRESS pass with the current n.
  void compress();

  /// Absorbs `other` (which is consumed). The result uses the larger epsilon.
  void merge(gk_summary&& other);

  /// phi-quantile estimate. Throws query_error when empty or phi is outside (0,1).
  value_t get_quantile(double phi) const;

  std::vector<gk_tuple> tuples() const;
  std::size_t num_tuples() const { return entries_.size(); }
  double epsilon() const { return epsilon_; }
  uint64_t n() const { return n_; }
  gk_mode mode() const { return mode_; }
  bool merged() const { return merged_; }
  bool is_empty() const { return n_ == 0; }

  bytes serialize() const;
  static gk_summary deserialize(const uint8_t* data, std::size_t len);
  static gk_summary deserialize(const bytes& b) { return deserialize(b.data(), b.size()); }

 private:
  struct gd {
    uint64_t g;
    uint64_t delta;
  };
  using map_type = std::multimap<value_t, gd>;

  void insert_tuple(value_t v);
  void assign(const std::vector<gk_tuple>& tuples);

  double epsilon_;
  gk_mode mode_;
  uint64_t k_;  // classic compress period
  uint64_t n_ = 0;
  uint64_t size_at_last_compress_ = 0;
  bool merged_ = false;
  map_type entries_;
};

}  // namespace dqes

#endif  // DQES_GK_HPP_
