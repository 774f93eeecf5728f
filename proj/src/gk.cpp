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

#include "dqes/gk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dqes/errors.hpp"

namespace dqes {

namespace {

uint64_t floor_2en(double epsilon, uint64_t n) {
  return static_cast<uint64_t>(std::floor(2.0 * epsilon * static_cast<double>(n)));
}

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw config_error("epsilon must lie in (0,1)");
}

}  // namespace

uint32_t gk_capacity(uint64_t delta, uint64_t n, double epsilon) {
  const double two_en = 2.0 * epsilon * static_cast<double>(n);
  const auto p = static_cast<int64_t>(std::floor(two_en));
  const int64_t threshold = two_en > 1.0 ? static_cast<int64_t>(std::ceil(std::log2(two_en))) : 0;
  if (delta == 0) return static_cast<uint32_t>(threshold + 1);
  const auto d = static_cast<int64_t>(delta);
  if (d >= p) return 0;
  // The bands partition [1, p - 1]: band alpha holds
  // p - 2^alpha - (p mod 2^alpha) < delta <= p - 2^(alpha-1) - (p mod 2^(alpha-1)).
  for (int64_t alpha = 1; alpha <= threshold; ++alpha) {
    const int64_t hi_pow = int64_t{1} << alpha;
    const int64_t lo_pow = int64_t{1} << (alpha - 1);
    const int64_t lbound = p - hi_pow - (p % hi_pow);
    const int64_t ubound = p - lo_pow - (p % lo_pow);
    if (lbound < d && d <= ubound) return static_cast<uint32_t>(alpha);
  }
  return static_cast<uint32_t>(threshold);
}

void gk_compress_tuples(std::vector<gk_tuple>& t, uint64_t n, double epsilon) {
  if (floor_2en(epsilon, n) < 1 || t.size() < 3) return;
  const double two_en = 2.0 * epsilon * static_cast<double>(n);
  const std::size_t s = t.size();
  std::vector<uint32_t> cap(s);
  for (std::size_t i = 0; i < s; ++i) cap[i] = gk_capacity(t[i].delta, n, epsilon);
  std::vector<bool> dead(s, false);

  // `next` is the live tuple following i; the first tuple is never removed.
  std::size_t i = s - 2;
  std::size_t next = s - 1;
  while (i >= 1) {
    const uint32_t ci = cap[i];
    uint64_t g_star = t[i].g;
    std::size_t j = i - 1;
    while (j > 0 && cap[j] < ci) {
      g_star += t[j].g;
      --j;
    }
    const double merged_span = static_cast<double>(g_star + t[next].g + t[next].delta) - 1.0;
    if (ci <= cap[next] && merged_span <= two_en) {
      t[next].g += g_star;
      for (std::size_t x = j + 1; x <= i; ++x) dead[x] = true;
      i = j;
    } else {
      next = i;
      --i;
    }
  }
  std::size_t out = 0;
  for (std::size_t x = 0; x < s; ++x) {
    if (!dead[x]) t[out++] = t[x];
  }
  t.resize(out);
}

gk_summary::gk_summary(double epsilon, gk_mode mode) : epsilon_(epsilon), mode_(mode) {
  check_epsilon(epsilon);
  k_ = static_cast<uint64_t>(std::ceil(1.0 / (2.0 * epsilon)));
}

gk_summary gk_summary::from_tuples(double epsilon, uint64_t n, const std::vector<gk_tuple>& tuples,
                                   gk_mode mode, bool merged) {
  gk_summary s(epsilon, mode);
  s.n_ = n;
  s.merged_ = merged;
  s.assign(tuples);
  s.size_at_last_compress_ = tuples.size();
  return s;
}

void gk_summary::assign(const std::vector<gk_tuple>& tuples) {
  entries_.clear();
  for (const auto& t : tuples) entries_.emplace_hint(entries_.end(), t.v, gd{t.g, t.delta});
}

std::vector<gk_tuple> gk_summary::tuples() const {
  std::vector<gk_tuple> out;
  out.reserve(entries_.size());
  for (const auto& [v, e] : entries_) out.push_back({v, e.g, e.delta});
  return out;
}

void gk_summary::compress() {
  auto t = tuples();
  gk_compress_tuples(t, n_, epsilon_);
  if (t.size() != entries_.size()) assign(t);
  size_at_last_compress_ = entries_.size();
}

void gk_summary::insert_tuple(value_t v) {
  // Successor is the first tuple with a strictly larger value, so equal
  // values are kept in arrival order.
  const auto succ = entries_.upper_bound(v);
  map_type::iterator it;
  if (succ == entries_.end() || succ == entries_.begin()) {
    it = entries_.emplace_hint(succ, v, gd{1, 0});
  } else {
    it = entries_.emplace_hint(succ, v, gd{1, succ->second.g + succ->second.delta - 1});
  }
  if (mode_ == gk_mode::mixed && it != entries_.begin()) {
    const auto nxt = std::next(it);
    if (nxt != entries_.end() && it->second.g + nxt->second.g + nxt->second.delta <= floor_2en(epsilon_, n_)) {
      nxt->second.g += it->second.g;
      entries_.erase(it);
    }
  }
}

void gk_summary::update(value_t v) {
  if (merged_) throw state_error("insertion into a merged GK summary is not supported");
  ++n_;
  if (mode_ == gk_mode::classic) {
    // The count includes the incoming item when deciding and compressing.
    if (n_ % k_ == 0) compress();
    insert_tuple(v);
  } else {
    insert_tuple(v);
    if (entries_.size() >= 2 * std::max<uint64_t>(size_at_last_compress_, 1)) compress();
  }
}

void gk_summary::merge(gk_summary&& other) {
  if (other.n_ == 0) {
    merged_ = true;
    epsilon_ = std::max(epsilon_, other.epsilon_);
    return;
  }
  if (n_ == 0) {
    const double eps = std::max(epsilon_, other.epsilon_);
    const gk_mode mode = mode_;
    *this = std::move(other);
    epsilon_ = eps;
    mode_ = mode;
    merged_ = true;
    return;
  }
  const auto a = tuples();
  const auto b = other.tuples();
  struct tagged {
    gk_tuple t;
    bool from_b;
  };
  std::vector<tagged> m;
  m.reserve(a.size() + b.size());
  {
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
      // Ties take the tuple from `a` first.
      if (j == b.size() || (i < a.size() && a[i].v <= b[j].v)) {
        m.push_back({a[i++], false});
      } else {
        m.push_back({b[j++], true});
      }
    }
  }
  const std::size_t s = m.size();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  // For each tuple, the nearest tuple of the other origin after / before it.
  std::vector<std::size_t> next_other(s, none), prev_other(s, none);
  {
    std::size_t next_a = none, next_b = none;
    for (std::size_t x = s; x-- > 0;) {
      next_other[x] = m[x].from_b ? next_a : next_b;
      (m[x].from_b ? next_b : next_a) = x;
    }
    std::size_t prev_a = none, prev_b = none;
    for (std::size_t x = 0; x < s; ++x) {
      prev_other[x] = m[x].from_b ? prev_a : prev_b;
      (m[x].from_b ? prev_b : prev_a) = x;
    }
  }
  std::vector<gk_tuple> out(s);
  for (std::size_t x = 0; x < s; ++x) {
    uint64_t delta = m[x].t.delta;
    if (next_other[x] != none) {
      const gk_tuple& nx = m[next_other[x]].t;
      delta += nx.g + nx.delta - 1;
    } else if (prev_other[x] != none) {
      delta += m[prev_other[x]].t.delta;
    }
    out[x] = {m[x].t.v, m[x].t.g, delta};
  }
  n_ += other.n_;
  epsilon_ = std::max(epsilon_, other.epsilon_);
  merged_ = true;
  gk_compress_tuples(out, n_, epsilon_);
  assign(out);
  size_at_last_compress_ = entries_.size();
  other = gk_summary(other.epsilon_, other.mode_);
}

value_t gk_summary::get_quantile(double phi) const {
  check_phi(phi);
  if (n_ == 0 || entries_.empty()) throw query_error("GK summary is empty");
  const uint64_t r = target_rank(phi, n_);
  // Tuple ranks are 1-based, so the target element has rank r + 1. Return the
  // first tuple whose rank interval lies within eps * n of it.
  const double rd = static_cast<double>(r) + 1.0;
  const double slack = epsilon_ * static_cast<double>(n_);
  uint64_t r_min = 0;
  for (const auto& [v, e] : entries_) {
    r_min += e.g;
    const auto lo = static_cast<double>(r_min);
    if (lo > rd + slack) break;
    if (rd - slack <= lo && static_cast<double>(r_min + e.delta) <= rd + slack) return v;
  }
  // Otherwise the minimizer of |rd - r_min| + |r_max - rd|, scanning until r_min passes rd.
  r_min = 0;
  value_t best = entries_.begin()->first;
  double best_cost = std::numeric_limits<double>::infinity();
  for (const auto& [v, e] : entries_) {
    r_min += e.g;
    const double lo = static_cast<double>(r_min);
    const double hi = static_cast<double>(r_min + e.delta);
    const double cost = std::abs(rd - lo) + std::abs(hi - rd);
    if (cost < best_cost) {
      best_cost = cost;
      best = v;
    }
    if (lo > rd) break;
  }
  return best;
}

bytes gk_summary::serialize() const {
  byte_writer w;
  wire_header{algo::gk, epsilon_, n_}.write(w);
  w.u64(entries_.size());
  for (const auto& [v, e] : entries_) {
    w.u32(v);
    w.u64(e.g);
    w.u64(e.delta);
  }
  w.u8(static_cast<uint8_t>(mode_));
  w.u8(merged_ ? 1 : 0);
  return w.take();
}

gk_summary gk_summary::deserialize(const uint8_t* data, std::size_t len) {
  byte_reader r(data, len);
  const wire_header h = wire_header::read(r);
  if (h.tag != algo::gk) throw format_error("blob does not hold a GK summary", 5);
  const uint64_t count = r.u64();
  r.check_count(count, 20);
  std::vector<gk_tuple> t(count);
  uint64_t g_sum = 0;
  for (uint64_t i = 0; i < count; ++i) {
    const std::size_t at = r.offset();
    t[i].v = r.u32();
    t[i].g = r.u64();
    t[i].delta = r.u64();
    if (t[i].g == 0) throw format_error("tuple with zero gap", at);
    if (i > 0 && t[i].v < t[i - 1].v) throw format_error("tuples out of order", at);
    g_sum += t[i].g;
  }
  const std::size_t mode_at = r.offset();
  const uint8_t mode = r.u8();
  if (mode > 1) throw format_error("bad GK mode", mode_at);
  const uint8_t merged = r.u8();
  if (merged > 1) throw format_error("bad merged flag", mode_at + 1);
  r.expect_end();
  if (g_sum != h.n) throw format_error("tuple gaps do not sum to n", 14);
  return from_tuples(h.epsilon, h.n, t, static_cast<gk_mode>(mode), merged == 1);
}

}  // namespace dqes
