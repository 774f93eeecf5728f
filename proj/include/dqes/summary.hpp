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


#ifndef DQES_SUMMARY_HPP_
#define DQES_SUMMARY_HPP_

#include <cstdint>
#include <variant>

#include "dqes/corpus.hpp"
#include "dqes/gk.hpp"
#include "dqes/qdigest.hpp"
#include "dqes/rms.hpp"
#include "dqes/sampling.hpp"
#include "dqes/wire.hpp"

namespace dqes {

/// Everything needed to construct an empty summary of any algorithm.
struct summary_params {
  algo kind = algo::gk;
  double epsilon = 0.01;
  uint64_t u = uint64_t{1} << 20;  // q-digest universe
  gk_mode gk = gk_mode::mixed;
  uint64_t k = 1;                  // sampling: number of participating summaries
  uint64_t total_n = 1;            // sampling: items across all of them
  uint64_t seed = 1;               // randomized algorithms

  void validate() const;
};

/**
 * Uniform front end over the five summaries: build, merge, query and the
 * wire format. Merging requires the same algorithm and epsilon (and universe
 * for the q-digests); anything else raises merge_error.
 */
class summary {
 public:
  using impl = std::variant<gk_summary, sampling_summary, q_digest, rms_summary>;

  explicit summary(const summary_params& params);
  explicit summary(impl inner);

  void update(value_t v);
  /// Absorbs `other`, which is consumed.
  void merge(summary&& other);
  /// Completes the summary before queries; required for sampling and rms,
  /// a no-op for the others. Further updates raise state_error.
  void finalize();
  bool finalized() const { return finalized_; }
  /// Finalizes when the algorithm needs it, then answers.
  value_t query(double phi);

  algo kind() const;
  double epsilon() const;
  uint64_t n() const;
  bool is_empty() const { return n() == 0; }

  bytes serialize() const;
  static summary deserialize(const uint8_t* data, std::size_t len);
  static summary deserialize(const bytes& b) { return deserialize(b.data(), b.size()); }

  impl& inner() { return impl_; }
  const impl& inner() const { return impl_; }

 private:
  impl impl_;
  bool finalized_ = false;
};

}  // namespace dqes

#endif  // DQES_SUMMARY_HPP_
