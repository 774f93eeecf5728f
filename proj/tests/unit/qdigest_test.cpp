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

#include <gtest/gtest.h>

#include <bit>
#include <map>

#include "dqes/corpus.hpp"
#include "dqes/errors.hpp"
#include "dqes/qdigest.hpp"
#include "golden.hpp"

namespace dqes {

namespace {

using nl = std::vector<qd_node>;

q_digest build(const std::vector<value_t>& data, double eps, uint64_t u, qd_variant var, bool compress_at_end) {
  q_digest d(eps, u, var);
  for (auto v : data) d.update(v);
  if (compress_at_end) d.compress();
  return d;
}

uint64_t total(const q_digest& d) {
  uint64_t s = 0;
  for (const auto& nd : d.nodes()) s += nd.count;
  return s;
}

// Internal non-root counters never exceed the threshold.
void expect_internal_bound(const q_digest& d) {
  for (const auto& nd : d.nodes()) {
    if (nd.index == 1 || nd.index >= d.u()) continue;
    EXPECT_LE(nd.count, d.threshold()) << "node " << nd.index;
  }
}

}  // namespace

TEST(qdigest, leaf_histogram_of_first_dataset) {
  const auto d = build(golden::first, 0.4, 8, qd_variant::batch, false);
  EXPECT_EQ(d.nodes(), (nl{{8, 5}, {9, 2}, {10, 3}, {11, 1}, {12, 2}, {14, 1}, {15, 1}}));
}

TEST(qdigest, compress_first_dataset) {
  const auto d = build(golden::first, 0.4, 8, qd_variant::batch, true);
  EXPECT_EQ(d.threshold(), 2u);
  // Leaves 0..3 stay; [4,6) and [6,8) each hold 2.
  EXPECT_EQ(d.nodes(), golden::qd_first_tree);
  EXPECT_EQ(d.get_quantile(0.5), 2u);
}

TEST(qdigest, compress_second_dataset) {
  const auto d = build(golden::second, 0.4, 8, qd_variant::batch, true);
  EXPECT_EQ(d.nodes(), golden::qd_second_tree);
  EXPECT_EQ(d.get_quantile(0.5), 3u);
}

TEST(qdigest, merge_worked_digests) {
  auto a = build(golden::first, 0.4, 8, qd_variant::batch, true);
  a.merge(build(golden::second, 0.4, 8, qd_variant::batch, true));
  EXPECT_EQ(a.n(), 30u);
  EXPECT_EQ(a.threshold(), 4u);
  EXPECT_EQ(a.nodes(), golden::qd_merged_tree);
  EXPECT_EQ(a.get_quantile(0.5), 3u);
}

TEST(qdigest, compress_without_admissible_pairs_is_noop) {
  auto d = q_digest::from_nodes(0.4, 8, qd_variant::batch, {{8, 5}, {9, 5}, {10, 5}});
  const auto before = d.nodes();
  d.compress();  // threshold 2, every pair sum exceeds it
  EXPECT_EQ(d.nodes(), before);
}

TEST(qdigest, merge_with_empty) {
  auto d = build(golden::first, 0.4, 8, qd_variant::batch, true);
  const auto before = d.nodes();
  d.merge(q_digest(0.4, 8));
  EXPECT_EQ(d.nodes(), before);
  EXPECT_EQ(d.n(), 15u);
}

TEST(qdigest, merge_mismatch_rejected) {
  q_digest a(0.1, 8);
  EXPECT_THROW(a.merge(q_digest(0.1, 16)), merge_error);
  EXPECT_THROW(a.merge(q_digest(0.2, 8)), merge_error);
}

TEST(qdigest, value_outside_universe_rejected) {
  q_digest d(0.1, 8);
  EXPECT_THROW(d.update(8), value_error);
  q_digest f(0.1, 8, qd_variant::fast);
  EXPECT_THROW(f.update(100), value_error);
}

TEST(qdigest, bad_universe_rejected) {
  EXPECT_THROW(q_digest(0.1, 1000), config_error);
  EXPECT_THROW(q_digest(0.1, 1), config_error);
}

TEST(qdigest, empty_query_rejected) {
  q_digest d(0.1, 8);
  EXPECT_THROW(d.get_quantile(0.5), query_error);
}

TEST(qdigest, fast_first_item_goes_to_leaf) {
  // At n = 1 the threshold is 0, so no internal node may hold a count.
  q_digest d(0.4, 8, qd_variant::fast);
  d.update(3);
  EXPECT_EQ(d.nodes(), (nl{{11, 1}}));
}

TEST(qdigest, fast_zero_threshold_keeps_exact_leaves) {
  q_digest d(0.1, 8, qd_variant::fast);
  for (value_t v : {5, 1, 5, 7, 0}) d.update(v);  // eps * n / 3 < 1 throughout
  EXPECT_EQ(d.nodes(), (nl{{8, 1}, {9, 1}, {13, 2}, {15, 1}}));
}

TEST(qdigest, fast_uses_deepest_admissible_ancestor) {
  // threshold floor(0.9 * 21 / 3) = 6 once the next item arrives.
  auto d = q_digest::from_nodes(0.9, 8, qd_variant::fast, {{8, 10}, {9, 10}});
  d.update(6);  // nothing on the path of 6 exists: the root takes it
  EXPECT_EQ(d.nodes(), (nl{{1, 1}, {8, 10}, {9, 10}}));
  d.update(1);  // leaf 1 exists and takes it directly
  EXPECT_EQ(d.nodes(), (nl{{1, 1}, {8, 10}, {9, 11}}));
}

TEST(qdigest, fast_descends_past_full_ancestor) {
  auto d = q_digest::from_nodes(0.9, 8, qd_variant::fast, {{1, 6}, {8, 10}, {9, 4}});
  d.update(6);  // threshold floor(0.9 * 21 / 3) = 6; root is full so node [4,8) opens
  EXPECT_EQ(d.nodes(), (nl{{1, 6}, {3, 1}, {8, 10}, {9, 4}}));
}

class qd_stream : public ::testing::TestWithParam<std::tuple<qd_variant, double, uint64_t, double, order>> {};

TEST_P(qd_stream, conservation_bounds_and_error) {
  const auto [var, eps, u, zipf, ord] = GetParam();
  for (uint64_t seed = 1; seed <= 3; ++seed) {
    const auto data = generate({20000, u, zipf, ord, seed});
    q_digest d(eps, u, var);
    for (std::size_t i = 0; i < data.size(); ++i) {
      d.update(data[i]);
      if (var == qd_variant::batch && i % 1000 == 999) d.compress();
      if (i % 1013 == 0) ASSERT_EQ(total(d), d.n());
    }
    d.compress();
    ASSERT_EQ(total(d), d.n());
    expect_internal_bound(d);
    EXPECT_EQ(d.stats().bound_violations, 0u);
    EXPECT_LT(static_cast<double>(d.num_nodes()), d.size_bound());
    const rank_oracle o(data);
    for (double phi : default_phis()) {
      const value_t q = d.get_quantile(phi);
      EXPECT_LT(q, u);
      EXPECT_LE(o.rank_error(phi, q), eps) << "phi " << phi;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(streams, qd_stream,
                         ::testing::Combine(::testing::Values(qd_variant::batch, qd_variant::fast),
                                            ::testing::Values(0.05, 0.01),
                                            ::testing::Values(uint64_t{1} << 10, uint64_t{1} << 20),
                                            ::testing::Values(0.0, 1.0),
                                            ::testing::Values(order::random, order::sorted)));

TEST(qdigest, eight_way_merge_error) {
  for (qd_variant var : {qd_variant::batch, qd_variant::fast}) {
    for (uint64_t seed = 1; seed <= 3; ++seed) {
      const auto data = generate({80000, 1 << 20, 0.5, order::random, seed});
      q_digest acc(0.01, 1 << 20, var);
      for (int w = 0; w < 8; ++w) {
        q_digest part(0.01, 1 << 20, var);
        for (std::size_t i = w; i < data.size(); i += 8) part.update(data[i]);
        part.compress();
        acc.merge(std::move(part));
      }
      ASSERT_EQ(total(acc), data.size());
      const rank_oracle o(data);
      for (double phi : default_phis()) EXPECT_LE(o.rank_error(phi, acc.get_quantile(phi)), 0.01);
    }
  }
}

TEST(qdigest, serialization_roundtrip) {
  for (qd_variant var : {qd_variant::batch, qd_variant::fast}) {
    auto d = build(generate({5000, 1 << 10, 0.5, order::random, 2}), 0.05, 1 << 10, var, true);
    const bytes b = d.serialize();
    EXPECT_EQ(b.size(), 22u + 16u + 16u * d.num_nodes() + 1u);
    const auto back = q_digest::deserialize(b);
    EXPECT_EQ(back.nodes(), d.nodes());
    EXPECT_EQ(back.variant(), var);
    EXPECT_EQ(back.serialize(), b);
  }
}

}  // namespace dqes
