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

#include "dqes/qdigest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "dqes/errors.hpp"

namespace dqes {

q_digest::q_digest(double epsilon, uint64_t u, qd_variant variant)
    : epsilon_(epsilon), u_(u), variant_(variant) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw config_error("epsilon must lie in (0,1)");
  if (u < 2 || !std::has_single_bit(u) || u > (uint64_t{1} << 32)) {
    throw config_error("q-digest universe must be a power of two in [2, 2^32]");
  }
  depth_ = static_cast<uint32_t>(std::countr_zero(u));
}

q_digest q_digest::from_nodes(double epsilon, uint64_t u, qd_variant variant, const std::vector<qd_node>& nodes) {
  q_digest d(epsilon, u, variant);
  for (const auto& nd : nodes) {
    if (nd.index < 1 || nd.index >= 2 * u) throw value_error("heap index outside the tree");
    if (nd.count == 0) continue;
    d.nodes_[nd.index] += nd.count;
    d.n_ += nd.count;
  }
  d.n_at_last_compress_ = d.n_;
  return d;
}

uint64_t q_digest::threshold_for(uint64_t n) const {
  return static_cast<uint64_t>(std::floor(epsilon_ * static_cast<double>(n) / depth_));
}

uint64_t q_digest::threshold() const { return threshold_for(n_); }

double q_digest::size_bound() const { return 3.0 * depth_ / epsilon_ + 1.0; }

void q_digest::update(value_t v) {
  if (v >= u_) throw value_error("value " + std::to_string(v) + " outside the universe");
  ++n_;
  const uint64_t leaf = u_ + v;
  if (variant_ == qd_variant::batch) {
    ++nodes_[leaf];
    return;
  }
  // Start at the deepest existing node on the leaf-to-root path (the root if
  // none exists) and descend until a node can take the item without its
  // counter exceeding the threshold; leaves always can.
  const uint64_t thr = threshold_for(n_);
  uint64_t cur = leaf;
  while (cur > 1 && nodes_.find(cur) == nodes_.end()) cur >>= 1;
  for (;;) {
    if (cur >= u_) {
      ++nodes_[cur];
      break;
    }
    const auto it = nodes_.find(cur);
    const uint64_t c = it == nodes_.end() ? 0 : it->second;
    if (c + 1 <= thr) {
      ++nodes_[cur];
      break;
    }
    const auto level = static_cast<uint32_t>(std::bit_width(cur) - 1);
    cur = leaf >> (depth_ - level - 1);
  }
  if (n_ >= 2 * n_at_last_compress_) compress();
}

void q_digest::compress() {
  const uint64_t thr = threshold();
  for (uint32_t d = depth_; d >= 1; --d) {
    const uint64_t lo = uint64_t{1} << d;
    const uint64_t hi = lo << 1;
    auto it = nodes_.lower_bound(lo);
    while (it != nodes_.end() && it->first < hi) {
      const uint64_t idx = it->first;
      const bool left = (idx & 1) == 0;
      if (!left && nodes_.count(idx - 1) != 0) {
        ++it;  // pair already examined from its left child
        continue;
      }
      auto sib = std::next(it);
      const bool has_sib = left && sib != nodes_.end() && sib->first == idx + 1;
      const uint64_t cs = has_sib ? sib->second : 0;
      const auto par = nodes_.find(idx >> 1);
      const uint64_t cp = par == nodes_.end() ? 0 : par->second;
      if (it->second + cs + cp <= thr) {
        nodes_[idx >> 1] += it->second + cs;
        it = nodes_.erase(it);
        if (has_sib) it = nodes_.erase(it);
      } else {
        ++it;
        if (has_sib) ++it;
      }
    }
  }
  n_at_last_compress_ = n_;
  ++stats_.compressions;
  stats_.max_nodes = std::max<uint64_t>(stats_.max_nodes, nodes_.size());
  if (thr >= 1) {
    ++stats_.bound_checks;
    if (static_cast<double>(nodes_.size()) >= size_bound()) ++stats_.bound_violations;
  }
}

void q_digest::merge(q_digest&& other) {
  if (other.u_ != u_) throw merge_error("q-digest universes differ");
  if (other.epsilon_ != epsilon_) throw merge_error("q-digest epsilons differ");
  // An empty operand is an identity: no extra compress pass.
  if (other.n_ == 0) return;
  if (n_ == 0) {
    nodes_ = std::move(other.nodes_);
    n_ = other.n_;
    n_at_last_compress_ = other.n_at_last_compress_;
    other.nodes_.clear();
    other.n_ = 0;
    return;
  }
  for (const auto& [idx, c] : other.nodes_) nodes_[idx] += c;
  n_ += other.n_;
  other.nodes_.clear();
  other.n_ = 0;
  compress();
}

value_t q_digest::get_quantile(double phi) const {
  check_phi(phi);
  if (n_ == 0) throw query_error("q-digest is empty");
  // Post-order over existing nodes: ascending right endpoint, and for equal
  // right endpoints the narrower (deeper) interval first.
  struct span {
    uint64_t right;
    uint64_t width;
    uint64_t count;
  };
  std::vector<span> order;
  order.reserve(nodes_.size());
  for (const auto& [idx, c] : nodes_) {
    const auto level = static_cast<uint32_t>(std::bit_width(idx) - 1);
    const uint64_t width = u_ >> level;
    const uint64_t left = (idx - (uint64_t{1} << level)) * width;
    order.push_back({left + width, width, c});
  }
  std::sort(order.begin(), order.end(), [](const span& a, const span& b) {
    return a.right != b.right ? a.right < b.right : a.width < b.width;
  });
  const double target = phi * static_cast<double>(n_);
  uint64_t sum = 0;
  for (const auto& s : order) {
    sum += s.count;
    if (static_cast<double>(sum) >= target) return static_cast<value_t>(s.right - 1);
  }
  return static_cast<value_t>(order.back().right - 1);
}

std::vector<qd_node> q_digest::nodes() const {
  std::vector<qd_node> out;
  out.reserve(nodes_.size());
  for (const auto& [idx, c] : nodes_) out.push_back({idx, c});
  return out;
}

bytes q_digest::serialize() const {
  byte_writer w;
  wire_header{variant_ == qd_variant::fast ? algo::fastqdigest : algo::qdigest, epsilon_, n_}.write(w);
  w.u64(u_);
  w.u64(nodes_.size());
  for (const auto& [idx, c] : nodes_) {
    w.u64(idx);
    w.u64(c);
  }
  w.u8(static_cast<uint8_t>(variant_));
  return w.take();
}

q_digest q_digest::deserialize(const uint8_t* data, std::size_t len) {
  byte_reader r(data, len);
  const wire_header h = wire_header::read(r);
  if (h.tag != algo::qdigest && h.tag != algo::fastqdigest) throw format_error("blob does not hold a q-digest", 5);
  const std::size_t u_at = r.offset();
  const uint64_t u = r.u64();
  if (u < 2 || !std::has_single_bit(u) || u > (uint64_t{1} << 32)) throw format_error("bad universe", u_at);
  const uint64_t count = r.u64();
  r.check_count(count, 16);
  std::vector<qd_node> nodes(count);
  uint64_t total = 0;
  for (uint64_t i = 0; i < count; ++i) {
    const std::size_t at = r.offset();
    nodes[i].index = r.u64();
    nodes[i].count = r.u64();
    if (nodes[i].index < 1 || nodes[i].index >= 2 * u) throw format_error("heap index outside the tree", at);
    if (nodes[i].count == 0) throw format_error("zero counter", at + 8);
    if (i > 0 && nodes[i].index <= nodes[i - 1].index) throw format_error("nodes out of order", at);
    total += nodes[i].count;
  }
  const std::size_t var_at = r.offset();
  const uint8_t variant = r.u8();
  if (variant > 1) throw format_error("bad q-digest variant", var_at);
  if ((variant == 1) != (h.tag == algo::fastqdigest)) throw format_error("variant disagrees with tag", var_at);
  r.expect_end();
  if (total != h.n) throw format_error("counters do not sum to n", 14);
  return from_nodes(h.epsilon, u, static_cast<qd_variant>(variant), nodes);
}

}  // namespace dqes
