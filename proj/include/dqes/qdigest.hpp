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

#ifndef DQES_QDIGEST_HPP_
#define DQES_QDIGEST_HPP_

#include <cstdint>
#include <map>
#include <vector>

#include "dqes/corpus.hpp"
#include "dqes/wire.hpp"

namespace dqes {

/// `batch` counts leaves and compresses only when asked; `fast` places each
/// item at the deepest admissible ancestor and compresses whenever n doubles.
enum class qd_variant : uint8_t { batch = 0, fast = 1 };

/// A node of the virtual tree in heap numbering: root 1, children 2i and
/// 2i+1, leaf of value x at u + x.
struct qd_node {
  uint64_t index;
  uint64_t count;

  bool operator==(const qd_node&) const = default;
};

/// Counters describing the compress passes a digest has run itself.
/// `bound_violations` counts passes that ended with at least
/// 3 log2(u) / eps + 1 nodes while the threshold was at least 1.
struct qd_compress_stats {
  uint64_t compressions = 0;
  uint64_t bound_checks = 0;
  uint64_t bound_violations = 0;
  uint64_t max_nodes = 0;

  /// Sums the counters and keeps the larger max_nodes.
  qd_compress_stats& operator+=(const qd_compress_stats& o) {
    compressions += o.compressions;
    bound_checks += o.bound_checks;
    bound_violations += o.bound_violations;
    if (o.max_nodes > max_nodes) max_nodes = o.max_nodes;
    return *this;
  }
};

/// Q-Digest over the universe [0, u) with u a power of two.
class q_digest {
 public:
  q_digest(double epsilon, uint64_t u, qd_variant variant = qd_variant::batch);

  /// Builds a digest from explicit counters (tests, deserialization).
  static q_digest from_nodes(double epsilon, uint64_t u, qd_variant variant, const std::vector<qd_node>& nodes);

  /// Throws value_error when v >= u.
  void update(value_t v);

  /// Folds sibling pairs into their parent, bottom-up, while the triple sum
  /// stays within the threshold.
  void compress();

  /// Adds `other`'s counters (other is consumed) and recompresses. An empty
  /// operand leaves the other side unchanged.
  void merge(q_digest&& other);

  value_t get_quantile(double phi) const;

  /// floor(eps * n / log2(u)).
  uint64_t threshold() const;

  /// Nodes in ascending heap index.
  std::vector<qd_node> nodes() const;
  std::size_t num_nodes() const { return nodes_.size(); }
  double epsilon() const { return epsilon_; }
  uint64_t u() const { return u_; }
  uint64_t n() const { return n_; }
  qd_variant variant() const { return variant_; }
  bool is_empty() const { return n_ == 0; }
  const qd_compress_stats& stats() const { return stats_; }

  /// Node-count bound 3 log2(u) / eps + 1.
  double size_bound() const;

  bytes serialize() const;
  static q_digest deserialize(const uint8_t* data, std::size_t len);
  static q_digest deserialize(const bytes& b) { return deserialize(b.data(), b.size()); }

 private:
  uint64_t threshold_for(uint64_t n) const;

  double epsilon_;
  uint64_t u_;
  uint32_t depth_;  // log2(u)
  qd_variant variant_;
  uint64_t n_ = 0;
  uint64_t n_at_last_compress_ = 0;
  std::map<uint64_t, uint64_t> nodes_;
  qd_compress_stats stats_;
};

}  // namespace dqes

#endif  // DQES_QDIGEST_HPP_
