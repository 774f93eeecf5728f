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

#ifndef DQES_CORPUS_HPP_
#define DQES_CORPUS_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace dqes {

using value_t = uint32_t;

enum class order : uint8_t { sorted, random };

std::string to_string(order o);
order parse_order(const std::string& name);

/// Parameters of a synthetic dataset.
struct data_spec {
  uint64_t n = 1000000;
  uint64_t u = uint64_t{1} << 20;
  double zipf = 0.0;
  dqes::order order = order::random;
  uint64_t seed = 1;

  /// Throws config_error unless n >= 1 and u is a power of two in [2, 2^32].
  void validate() const;

  bool operator==(const data_spec&) const = default;
};

/// Draws n values in [0, u) from a Zipf law with exponent `zipf` over the
/// ranks 1..u (value = rank - 1). The sorted order is the sorted permutation
/// of the random-order output for the same spec.
std::vector<value_t> generate(const data_spec& spec);

/// 0-based target rank floor(phi * n).
uint64_t target_rank(double phi, uint64_t n);

/// Throws query_error unless 0 < phi < 1.
void check_phi(double phi);

/// The default query grid 0.05, 0.10, ..., 0.95.
std::vector<double> default_phis();

/// Rank interval occupied by a value in the sorted data.
struct rank_interval {
  uint64_t r_min;
  uint64_t r_max;
  bool absent;
};

/// Exact answers over a fully sorted copy of the data.
class rank_oracle {
 public:
  explicit rank_oracle(std::vector<value_t> values);

  uint64_t size() const { return sorted_.size(); }
  const std::vector<value_t>& sorted() const { return sorted_; }

  /// sorted[floor(phi * n)].
  value_t exact_quantile(double phi) const;

  /// r_min = #values < v; r_max = r_min + occurrences - 1, or r_min when v is absent.
  rank_interval rank_bounds(value_t v) const;

  /// Normalized distance from floor(phi * n) to the rank interval of `answer`.
  double rank_error(double phi, value_t answer) const;

 private:
  std::vector<value_t> sorted_;
};

/// Dataset together with its universe bound, as stored on disk.
struct dataset {
  uint64_t u = 0;
  std::vector<value_t> values;
};

/// Binary layout: "DQDS", version u8 = 1, n u64, u u64, n x u32 (little-endian).
void write_dataset_binary(const std::string& path, const dataset& d);
/// One decimal integer per line.
void write_dataset_text(const std::string& path, const dataset& d);
/// Reads either format. Binary files are recognized by their magic; text files
/// take `u_hint` as universe, or the smallest power of two above the maximum.
dataset read_dataset(const std::string& path, uint64_t u_hint = 0);

}  // namespace dqes

#endif  // DQES_CORPUS_HPP_
