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

#ifndef DQES_SAMPLING_HPP_
#define DQES_SAMPLING_HPP_

#include <cstdint>
#include <vector>

#include "dqes/corpus.hpp"
#include "dqes/random.hpp"
#include "dqes/wire.hpp"

namespace dqes {

/// Global parameters shared by all samples that will ever be combined:
/// the error target, the number of participating summaries k, and the total
/// item count n across all of them.
struct sampling_context {
  double epsilon = 0.01;
  uint64_t k = 1;
  uint64_t n = 1;

  void validate() const;
  /// sqrt(k) / (eps n), clamped to 1.
  double base_probability() const;
  /// n / sqrt(k): samples of fewer items are "small".
  double small_limit() const;
  /// floor(log2(s sqrt(k) / n)) for large samples, no_class otherwise.
  int32_t class_of(uint64_t s) const;
  /// 1 / (eps s), clamped to 1.
  double probability_for(uint64_t s) const;

  bool operator==(const sampling_context&) const = default;
};

inline constexpr int32_t no_class = -1;
/// Wire marker for a sample whose local ranks have not been assigned yet.
inline constexpr int32_t unranked_class = -2;

/// Random sample of one node's data. `ranks` is empty until the sample is ranked.
struct sample_set {
  std::vector<value_t> values;
  std::vector<double> ranks;
  double p = 1.0;
  uint64_t s = 0;
  int32_t cls = no_class;

  bool ranked = false;

  /// Sorts the values and assigns local ranks with step 1/p: the first value
  /// gets 0, an equal value repeats the previous rank, a larger one adds 1/p.
  void assign_ranks();

  /// Rank estimate of x in this node's data: x's own local rank if sampled,
  /// else the predecessor's rank + 1/p, else 0.
  double rank_estimate(value_t x) const;
};

/// Sum of per-sample rank estimates.
double global_rank(const std::vector<sample_set>& samples, value_t x);

/// Sampled value whose global rank is closest to phi * total; ties go to the
/// smaller value. Throws query_error when every sample is empty.
value_t flat_query(const std::vector<sample_set>& samples, double phi, uint64_t total);

/// Tree-model combination: small samples are pooled once their total size
/// reaches n / sqrt(k); large samples of equal class are paired, ascending
/// by class, until no class holds two samples. All inputs must be ranked.
std::vector<sample_set> tree_merge(std::vector<sample_set> samples, const sampling_context& ctx, rng& gen);

/// Sampling-based summary: the list of samples it currently holds.
class sampling_summary {
 public:
  sampling_summary(const sampling_context& ctx, uint64_t seed);

  /// Keeps v with the base probability.
  void update(value_t v);
  /// Counts v and keeps it iff `keep` (for externally chosen samples).
  void offer(value_t v, bool keep);

  /// Ranks every sample; large local samples are first thinned to 1/(eps s).
  /// Idempotent. The thinning draws are seeded from the serialized state.
  void rank();
  bool ranked() const;

  /// Ranks both sides and combines them with the tree-model rule. `other` is consumed.
  void merge(sampling_summary&& other);

  /// Ranks if needed, then answers from the flat union of samples.
  value_t get_quantile(double phi);

  const std::vector<sample_set>& samples() const { return samples_; }
  const sampling_context& context() const { return ctx_; }
  double epsilon() const { return ctx_.epsilon; }
  uint64_t n() const;
  bool is_empty() const { return n() == 0; }

  bytes serialize() const;
  static sampling_summary deserialize(const uint8_t* data, std::size_t len);
  static sampling_summary deserialize(const bytes& b) { return deserialize(b.data(), b.size()); }

 private:
  sampling_context ctx_;
  rng gen_;
  std::vector<sample_set> samples_;
};

}  // namespace dqes

#endif  // DQES_SAMPLING_HPP_
