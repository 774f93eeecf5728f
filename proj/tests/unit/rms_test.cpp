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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dqes/corpus.hpp"
#include "dqes/errors.hpp"
#include "dqes/rms.hpp"
#include "golden.hpp"

namespace dqes {

namespace {

// Scripted decisions: the keep and parity answers are consumed in order.
struct script {
  std::vector<bool> keeps;
  std::vector<bool> parities;
  std::size_t next_keep = 0;
  std::size_t next_parity = 0;

  void attach(rms_summary& s) {
    s.set_decisions([this](int32_t) { return keeps.at(next_keep++); }, [this] { return parities.at(next_parity++); });
  }
};

// Two buffers of two items, constLevel -2, over the first worked dataset.
// Kept: 3 4 0 7 | 1 (0 dropped) 0 | only the 1 at index 11 afterwards.
script worked_script() {
  script sc;
  sc.keeps = {true, true, true, true, true, false, true, false, false, false, false, true, false, false, false};
  sc.parities = {false, true};
  return sc;
}

rms_config worked_config() { return rms_config::custom(0.25, 2, 2, -2.0); }

std::vector<value_t> all_values(const rms_summary& s) {
  std::vector<value_t> out;
  for (const auto& l : s.levels()) {
    for (const auto& b : l.buffers) out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

void expect_structure(const rms_summary& s) {
  const auto& c = s.config();
  EXPECT_LE(s.buffer_count(), c.b);
  EXPECT_LT(s.staging().size(), c.s);
  ASSERT_EQ(s.levels().size(), c.b);
  int32_t last = -1;
  bool unused = false;
  for (const auto& l : s.levels()) {
    if (l.level_val < 0) {
      unused = true;
      EXPECT_TRUE(l.buffers.empty());
      continue;
    }
    EXPECT_FALSE(unused) << "used level after an unused one";
    EXPECT_GT(l.level_val, last);
    last = l.level_val;
    EXPECT_FALSE(l.buffers.empty());
    for (const auto& b : l.buffers) {
      EXPECT_LE(b.size(), c.s);
      EXPECT_TRUE(std::is_sorted(b.begin(), b.end()));
    }
  }
}

double mean_error(rms_summary& s, const rank_oracle& o) {
  double sum = 0;
  const auto phis = default_phis();
  for (double phi : phis) sum += o.rank_error(phi, s.get_quantile(phi));
  return sum / static_cast<double>(phis.size());
}

rms_summary build(const std::vector<value_t>& data, double eps, uint64_t seed) {
  rms_summary s(eps, seed);
  for (auto v : data) s.update(v);
  return s;
}

// Round-robin split over k workers, merged left to right.
rms_summary build_merged(const std::vector<value_t>& data, double eps, uint64_t seed, std::size_t k) {
  std::vector<rms_summary> parts;
  for (std::size_t w = 0; w < k; ++w) parts.emplace_back(eps, seed * 64 + w);
  for (std::size_t i = 0; i < data.size(); ++i) parts[i % k].update(data[i]);
  for (std::size_t w = 1; w < k; ++w) parts[0].merge(std::move(parts[w]));
  return std::move(parts[0]);
}

}  // namespace

TEST(rms_config, derived_parameters) {
  const auto c = rms_config::from_epsilon(0.01);
  EXPECT_EQ(c.h, 6u);
  EXPECT_EQ(c.b, 7u);
  EXPECT_EQ(c.s, 257u);
  EXPECT_NEAR(c.const_level, -13.653722802371759, 1e-12);
  const auto d = rms_config::from_epsilon(0.1);
  EXPECT_EQ(d.b, 4u);
  EXPECT_EQ(d.s, 18u);
}

TEST(rms_config, epsilon_at_least_half_rejected) {
  EXPECT_THROW(rms_config::from_epsilon(0.5), config_error);
  EXPECT_THROW(rms_config::from_epsilon(0.7), config_error);
  EXPECT_THROW(rms_summary(0.0), config_error);
  EXPECT_THROW(rms_config::custom(0.1, 1, 4, 0.0), config_error);
}

TEST(rms_config, level_for) {
  const auto c = worked_config();
  EXPECT_EQ(c.level_for(0), 0);
  EXPECT_EQ(c.level_for(3), 0);  // ceil(-2 + 1.58)
  EXPECT_EQ(c.level_for(5), 1);
  EXPECT_EQ(c.level_for(8), 1);  // ceil(-2 + 3)
  EXPECT_EQ(c.level_for(9), 2);
}

TEST(rms, first_buffer_enters_level_zero) {
  rms_summary s(worked_config(), 1);
  s.set_decisions([](int32_t) { return true; }, [] { return false; });
  s.update(3);
  EXPECT_EQ(s.staging(), (std::vector<value_t>{3}));
  s.update(4);
  EXPECT_TRUE(s.staging().empty());
  EXPECT_EQ(s.levels()[0].level_val, 0);
  EXPECT_EQ(s.levels()[0].buffers, (std::vector<std::vector<value_t>>{{3, 4}}));
}

TEST(rms, worked_trace) {
  auto sc = worked_script();
  rms_summary s(worked_config(), 1);
  sc.attach(s);
  const auto& data = golden::first;
  for (std::size_t i = 0; i < 4; ++i) s.update(data[i]);
  EXPECT_EQ(s.levels()[0].level_val, 0);
  EXPECT_EQ(s.levels()[0].buffers, (std::vector<std::vector<value_t>>{{3, 4}, {0, 7}}));
  EXPECT_EQ(s.cur_level(), 1);
  for (std::size_t i = 4; i < 7; ++i) s.update(data[i]);
  // Level 0 halved into level 1 (even positions of 0 3 4 7), then {0, 1} joined it.
  EXPECT_EQ(s.levels()[0].level_val, 1);
  EXPECT_EQ(s.levels()[0].buffers, (std::vector<std::vector<value_t>>{{0, 4}, {0, 1}}));
  EXPECT_EQ(s.levels()[1].level_val, -1);
  for (std::size_t i = 7; i < data.size(); ++i) s.update(data[i]);
  EXPECT_EQ(s.staging(), (std::vector<value_t>{1}));
  EXPECT_EQ(s.n(), 15u);

  s.finalize();
  EXPECT_EQ(s.weighted(), (std::vector<rms_weighted>{{0, 4}, {1, 2}, {4, 4}}));
  EXPECT_EQ(s.get_quantile(0.5), 4u);
  EXPECT_EQ(sc.next_parity, 2u);
}

TEST(rms, pair_merge_parity) {
  for (bool odd : {false, true}) {
    rms_summary s(worked_config(), 1);
    s.set_decisions([](int32_t) { return true; }, [odd] { return odd; });
    for (value_t v : {3, 4, 0, 7, 9}) s.update(v);
    s.finalize();
    // The staged 9 joins the halved buffer at LevelVal 1.
    ASSERT_EQ(s.levels()[0].level_val, 1);
    const std::vector<value_t> expected = odd ? std::vector<value_t>{3, 7} : std::vector<value_t>{0, 4};
    EXPECT_EQ(s.levels()[0].buffers.front(), expected);
  }
}

TEST(rms, pair_merge_of_equal_values) {
  rms_summary s(rms_config::custom(0.25, 2, 3, -100.0), 9);
  for (int i = 0; i < 7; ++i) s.update(5);
  s.finalize();
  for (const auto& w : s.weighted()) EXPECT_EQ(w.value, 5u);
}

TEST(rms, empty_summary) {
  rms_summary s(0.1, 1);
  s.finalize();
  EXPECT_TRUE(s.weighted().empty());
  EXPECT_THROW(s.get_quantile(0.5), query_error);
}

TEST(rms, finalize_conserves_stored_items) {
  const auto data = generate({5000, 1 << 16, 0.0, order::random, 4});
  auto s = build(data, 0.05, 4);
  s.finalize();
  EXPECT_EQ(s.weighted().size(), all_values(s).size());
  EXPECT_TRUE(s.staging().empty());
  EXPECT_THROW(s.update(1), state_error);
}

TEST(rms, single_buffer_is_exact) {
  // n < s keeps everything in staging at level 0, so each item weighs 1.
  const auto data = generate({999, 1 << 20, 0.0, order::random, 8});
  auto s = build(data, 0.002, 3);
  ASSERT_LT(data.size(), s.config().s);
  const rank_oracle o(data);
  for (double phi : default_phis()) EXPECT_EQ(s.get_quantile(phi), o.exact_quantile(phi)) << phi;
}

TEST(rms, structure_holds_while_streaming) {
  for (double eps : {0.1, 0.02}) {
    const auto data = generate({50000, 1 << 20, 0.8, order::random, 6});
    rms_summary s(eps, 6);
    for (std::size_t i = 0; i < data.size(); ++i) {
      s.update(data[i]);
      if (i % 997 == 0) expect_structure(s);
    }
    expect_structure(s);
  }
}

TEST(rms, structure_holds_after_merges) {
  const auto data = generate({40000, 1 << 20, 0.0, order::random, 7});
  for (std::size_t k : {2u, 3u, 8u}) {
    auto s = build_merged(data, 0.05, 7, k);
    expect_structure(s);
    EXPECT_EQ(s.n(), data.size());
  }
}

TEST(rms, mass_is_consistent) {
  int inside = 0;
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    const auto data = generate({10000, 1 << 20, 0.0, order::random, seed});
    auto s = build(data, 0.05, seed);
    s.finalize();
    const double mass = s.total_weight();
    if (mass >= 5000 && mass <= 20000) ++inside;
  }
  EXPECT_GE(inside, 95);
}

TEST(rms, merged_mass_is_consistent) {
  int inside = 0;
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    const auto data = generate({10000, 1 << 20, 0.0, order::random, seed});
    auto s = build_merged(data, 0.05, seed, 4);
    s.finalize();
    const double mass = s.total_weight();
    if (mass >= 5000 && mass <= 20000) ++inside;
  }
  EXPECT_GE(inside, 95);
}

TEST(rms, statistical_accuracy) {
  double sum = 0;
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    const auto data = generate({100000, 1 << 20, 0.0, order::random, seed});
    const rank_oracle o(data);
    auto s = build(data, 0.01, seed);
    sum += mean_error(s, o);
  }
  EXPECT_LE(sum / 100, 0.03);
}

TEST(rms, merging_costs_at_most_twice_the_error) {
  double single = 0;
  double merged = 0;
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    const auto data = generate({100000, 1 << 20, 0.0, order::random, seed});
    const rank_oracle o(data);
    auto a = build(data, 0.01, seed);
    auto b = build_merged(data, 0.01, seed, 8);
    single += mean_error(a, o);
    merged += mean_error(b, o);
  }
  EXPECT_LE(merged, 2 * single);
}

TEST(rms, deterministic_under_seed) {
  const auto data = generate({30000, 1 << 20, 0.5, order::random, 2});
  auto a = build(data, 0.02, 11);
  auto b = build(data, 0.02, 11);
  a.finalize();
  b.finalize();
  EXPECT_EQ(a.weighted(), b.weighted());
}

TEST(rms, merge_with_empty) {
  const auto data = generate({3000, 1 << 16, 0.0, order::random, 5});
  auto s = build(data, 0.1, 5);
  const auto before = s.serialize();
  s.merge(rms_summary(0.1, 9));
  EXPECT_EQ(s.serialize(), before);
  rms_summary e(0.1, 9);
  e.merge(build(data, 0.1, 5));
  EXPECT_EQ(e.serialize(), before);
}

TEST(rms, merge_rejects_mismatch_and_finalized) {
  rms_summary a(0.1, 1);
  EXPECT_THROW(a.merge(rms_summary(0.05, 1)), merge_error);
  rms_summary f(0.1, 1);
  f.finalize();
  EXPECT_THROW(a.merge(std::move(f)), state_error);
}

TEST(rms, serialization_roundtrip) {
  const auto data = generate({20000, 1 << 20, 0.0, order::random, 12});
  auto s = build_merged(data, 0.05, 12, 3);
  const auto blob = s.serialize();
  auto back = rms_summary::deserialize(blob);
  EXPECT_EQ(back.serialize(), blob);
  EXPECT_EQ(back.n(), s.n());
  for (double phi : default_phis()) EXPECT_EQ(back.get_quantile(phi), s.get_quantile(phi));
}

TEST(rms, corrupted_blobs_rejected) {
  auto s = build(generate({500, 1 << 10, 0.0, order::random, 1}), 0.1, 1);
  const auto blob = s.serialize();
  for (std::size_t cut : {std::size_t{0}, std::size_t{21}, std::size_t{30}, blob.size() - 1}) {
    EXPECT_THROW(rms_summary::deserialize(blob.data(), cut), format_error);
  }
  auto bad = blob;
  bad[22 + 4] = 9;  // b no longer h + 1
  EXPECT_THROW(rms_summary::deserialize(bad), format_error);
}

}  // namespace dqes
