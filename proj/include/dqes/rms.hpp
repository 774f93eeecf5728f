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


#ifndef DQES_RMS_HPP_
#define DQES_RMS_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "dqes/corpus.hpp"
#include "dqes/random.hpp"
#include "dqes/wire.hpp"

namespace dqes {

/// Sizing of a random mergeable summary. `from_epsilon` derives every field
/// from eps; `custom` lets tests use small hand-picked shapes.
struct rms_config {
  double epsilon = 0.01;
  uint32_t h = 0;
  uint32_t b = 1;             // number of buffers and of hierarchy levels
  uint64_t s = 1;             // buffer capacity
  double const_level = 0.0;   // offset of curLevel against log2(n)

  /// h = floor(log2(1/eps)), b = h + 1, s = floor((1/eps) sqrt(log2(1/eps))),
  /// constLevel = 1 - 2 log2(1/eps) - log2(log2(1/eps)) / 2. Requires eps < 1/2.
  static rms_config from_epsilon(double epsilon);
  static rms_config custom(double epsilon, uint32_t b, uint64_t s, double const_level);

  void validate() const;
  /// max(0, ceil(constLevel + log2(n))), 0 for n = 0.
  int32_t level_for(uint64_t n) const;

  bool operator==(const rms_config&) const = default;
};

/// One hierarchy level: the weight exponent shared by its buffers, or -1 when unused.
struct rms_level {
  int32_t level_val = -1;
  std::vector<std::vector<value_t>> buffers;  // each sorted, length <= s
};

/// A stored item with the number of stream items it stands for.
struct rms_weighted {
  value_t value;
  uint64_t weight;

  bool operator==(const rms_weighted&) const = default;
};

/**
 * Random mergeable summary: items are kept with probability 2^-curLevel into
 * a staging list; full staging lists become buffers in a hierarchy of b levels
 * where a buffer at LevelVal L stands for 2^L items per stored value. Two
 * buffers of a level halve into one buffer of the next level.
 *
 * Levels are kept ordered by LevelVal with unused levels last, and no two used
 * levels share a LevelVal.
 */
class rms_summary {
 public:
  /// keep(curLevel) decides whether an arriving item is kept.
  using keep_fn = std::function<bool(int32_t)>;
  /// parity() picks the odd (true) or even (false) positions in a buffer merge.
  using parity_fn = std::function<bool()>;

  explicit rms_summary(double epsilon, uint64_t seed = 1);
  rms_summary(const rms_config& config, uint64_t seed);

  /// Replaces the random decisions; an empty function restores the default.
  void set_decisions(keep_fn keep, parity_fn parity);

  void update(value_t v);
  /// Merges `other` into this summary. Both must share a configuration and be
  /// unfinalized. `other` is consumed.
  void merge(rms_summary&& other);

  /// Flushes staging into the hierarchy and flattens all buffers into one
  /// weighted array. Idempotent; the summary becomes query-only. Random
  /// choices made here are seeded from the serialized state.
  void finalize();
  bool finalized() const { return finalized_; }
  /// Finalizes if needed, then returns the first value whose running weight
  /// reaches phi * n, or the largest value if none does.
  value_t get_quantile(double phi);

  const rms_config& config() const { return config_; }
  double epsilon() const { return config_.epsilon; }
  uint64_t n() const { return n_; }
  bool is_empty() const { return n_ == 0; }
  int32_t cur_level() const { return cur_level_; }
  const std::vector<rms_level>& levels() const { return levels_; }
  const std::vector<value_t>& staging() const { return staging_; }
  /// Sorted weighted array; empty until finalized.
  const std::vector<rms_weighted>& weighted() const { return weighted_; }
  std::size_t buffer_count() const;
  /// Sum of weights of every stored item, staged items at 2^curLevel.
  double total_weight() const;

  bytes serialize() const;
  static rms_summary deserialize(const uint8_t* data, std::size_t len);
  static rms_summary deserialize(const bytes& b) { return deserialize(b.data(), b.size()); }

 private:
  bool keep(int32_t level);
  bool parity();
  /// Makes sure fewer than b buffers are in use, merging buffers if needed.
  void acquire_buffer();
  /// Pops two buffers of level index i and pushes their halving one level up.
  void merge_pair(std::size_t i);
  /// Adds a buffer at LevelVal `level_val`, taking an unused level if needed.
  void place(std::vector<value_t> buffer, int32_t level_val);
  void normalize_levels();
  void flush_staging();

  rms_config config_;
  rng gen_;
  keep_fn keep_;
  parity_fn parity_;
  std::vector<rms_level> levels_;
  std::vector<value_t> staging_;
  int32_t cur_level_ = 0;
  uint64_t n_ = 0;
  bool finalized_ = false;
  std::vector<rms_weighted> weighted_;
};

}  // namespace dqes

#endif  // DQES_RMS_HPP_
