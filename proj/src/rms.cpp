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


#include "dqes/rms.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "dqes/errors.hpp"

namespace dqes {

namespace {

constexpr int32_t max_level_val = 62;

uint64_t weight_of(int32_t level_val) { return uint64_t{1} << level_val; }

}  // namespace

rms_config rms_config::from_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw config_error("rms needs epsilon in (0, 1/2)");
  const double l = std::log2(1.0 / epsilon);
  rms_config c;
  c.epsilon = epsilon;
  c.h = static_cast<uint32_t>(std::floor(l));
  c.b = c.h + 1;
  c.s = static_cast<uint64_t>(std::floor(std::sqrt(l) / epsilon));
  c.const_level = 1.0 - 2.0 * l - 0.5 * std::log2(l);
  c.validate();
  return c;
}

rms_config rms_config::custom(double epsilon, uint32_t b, uint64_t s, double const_level) {
  rms_config c;
  c.epsilon = epsilon;
  c.h = b == 0 ? 0 : b - 1;
  c.b = b;
  c.s = s;
  c.const_level = const_level;
  c.validate();
  return c;
}

void rms_config::validate() const {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw config_error("rms needs epsilon in (0, 1/2)");
  if (b < 2 || h + 1 != b) throw config_error("rms needs at least two buffers and b = h + 1");
  if (s < 1) throw config_error("rms buffer capacity must be positive");
  if (!std::isfinite(const_level)) throw config_error("rms constLevel must be finite");
}

int32_t rms_config::level_for(uint64_t n) const {
  if (n == 0) return 0;
  const double level = std::ceil(const_level + std::log2(static_cast<double>(n)));
  return static_cast<int32_t>(std::clamp(level, 0.0, static_cast<double>(max_level_val)));
}

rms_summary::rms_summary(double epsilon, uint64_t seed) : rms_summary(rms_config::from_epsilon(epsilon), seed) {}

rms_summary::rms_summary(const rms_config& config, uint64_t seed)
    : config_(config), gen_(derive_seed(seed, "rms")), levels_(config.b) {
  config_.validate();
}

void rms_summary::set_decisions(keep_fn keep, parity_fn parity) {
  keep_ = std::move(keep);
  parity_ = std::move(parity);
}

bool rms_summary::keep(int32_t level) { return keep_ ? keep_(level) : gen_.halving(level); }

bool rms_summary::parity() { return parity_ ? parity_() : gen_.coin(); }

std::size_t rms_summary::buffer_count() const {
  std::size_t total = 0;
  for (const auto& l : levels_) total += l.buffers.size();
  return total;
}

double rms_summary::total_weight() const {
  double total = 0;
  for (const auto& l : levels_) {
    for (const auto& buf : l.buffers) total += static_cast<double>(buf.size()) * static_cast<double>(weight_of(l.level_val));
  }
  return total + static_cast<double>(staging_.size()) * static_cast<double>(weight_of(cur_level_));
}

void rms_summary::normalize_levels() {
  for (auto& l : levels_) {
    if (l.buffers.empty()) l.level_val = -1;
  }
  std::stable_sort(levels_.begin(), levels_.end(), [](const rms_level& x, const rms_level& y) {
    if ((x.level_val < 0) != (y.level_val < 0)) return y.level_val < 0;
    return x.level_val < y.level_val;
  });
}

void rms_summary::place(std::vector<value_t> buffer, int32_t level_val) {
  if (level_val > max_level_val) throw state_error("rms level value overflow");
  auto it = std::find_if(levels_.begin(), levels_.end(),
                         [&](const rms_level& l) { return l.level_val == level_val || l.level_val < 0; });
  if (it == levels_.end()) throw state_error("rms hierarchy has no level for a new buffer");
  it->level_val = level_val;
  it->buffers.push_back(std::move(buffer));
  normalize_levels();
}

void rms_summary::merge_pair(std::size_t i) {
  auto& level = levels_[i];
  std::vector<value_t> x = std::move(level.buffers.back());
  level.buffers.pop_back();
  std::vector<value_t> y = std::move(level.buffers.back());
  level.buffers.pop_back();
  const int32_t level_val = level.level_val;
  std::vector<value_t> all(x.size() + y.size());
  std::merge(x.begin(), x.end(), y.begin(), y.end(), all.begin());
  std::vector<value_t> kept;
  kept.reserve(all.size() / 2 + 1);
  for (std::size_t j = parity() ? 1 : 0; j < all.size(); j += 2) kept.push_back(all[j]);
  normalize_levels();
  place(std::move(kept), level_val + 1);
}

void rms_summary::acquire_buffer() {
  while (buffer_count() >= config_.b) {
    auto it = std::find_if(levels_.begin(), levels_.end(), [](const rms_level& l) { return l.buffers.size() >= 2; });
    if (it != levels_.end()) {
      merge_pair(static_cast<std::size_t>(it - levels_.begin()));
      continue;
    }
    // Every level holds one buffer: thin the lowest one up to the next level
    // and merge it there.
    auto& low = levels_[0];
    auto& next = levels_[1];
    std::vector<value_t> thinned;
    for (value_t v : low.buffers.front()) {
      if (gen_.halving(next.level_val - low.level_val)) thinned.push_back(v);
    }
    low.buffers.clear();
    next.buffers.push_back(std::move(thinned));
    normalize_levels();
    merge_pair(0);
  }
}

void rms_summary::flush_staging() {
  if (staging_.empty()) return;
  acquire_buffer();
  std::sort(staging_.begin(), staging_.end());
  place(std::move(staging_), cur_level_);
  staging_.clear();
}

void rms_summary::update(value_t v) {
  if (finalized_) throw state_error("cannot update a finalized rms summary");
  ++n_;
  if (!keep(cur_level_)) return;
  staging_.push_back(v);
  if (staging_.size() < config_.s) return;
  flush_staging();
  cur_level_ = config_.level_for(n_ + 1);
}

void rms_summary::merge(rms_summary&& other) {
  if (finalized_ || other.finalized_) throw state_error("cannot merge a finalized rms summary");
  if (!(config_ == other.config_)) throw merge_error("rms summaries have different configurations");
  if (other.n_ == 0) return;
  if (n_ == 0) {
    levels_ = std::move(other.levels_);
    staging_ = std::move(other.staging_);
    cur_level_ = other.cur_level_;
    n_ = other.n_;
    return;
  }
  const int32_t new_level = config_.level_for(n_ + other.n_);
  const std::size_t s = static_cast<std::size_t>(config_.s);
  std::vector<value_t> scratch;
  scratch.reserve(2 * s);
  auto offer = [&](value_t v, int32_t from_level) {
    if (!gen_.halving(new_level - from_level)) return;
    scratch.push_back(v);
    if (scratch.size() < s) return;
    if (scratch.size() > 2 * s) throw state_error("rms scratch buffer overflow");
    std::sort(scratch.begin(), scratch.end());
    std::vector<value_t> head(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(s));
    scratch.erase(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(s));
    acquire_buffer();
    place(std::move(head), new_level);
  };

  // Lift the low levels of both sides out before any flush needs a buffer.
  std::vector<std::pair<int32_t, std::vector<value_t>>> low;
  for (auto* side : {this, &other}) {
    for (auto& l : side->levels_) {
      if (l.level_val < 0 || l.level_val >= new_level) continue;
      for (auto& buf : l.buffers) low.emplace_back(l.level_val, std::move(buf));
      l.buffers.clear();
    }
    side->normalize_levels();
  }
  std::vector<value_t> staged = std::move(staging_);
  staging_.clear();
  for (value_t v : staged) offer(v, cur_level_);
  for (value_t v : other.staging_) offer(v, other.cur_level_);
  for (const auto& [level_val, buf] : low) {
    for (value_t v : buf) offer(v, level_val);
  }
  staging_ = std::move(scratch);

  for (auto& l : other.levels_) {
    if (l.level_val < 0) continue;
    for (auto& buf : l.buffers) {
      auto it = std::find_if(levels_.begin(), levels_.end(),
                             [&](const rms_level& mine) { return mine.level_val == l.level_val; });
      if (it != levels_.end()) {
        it->buffers.push_back(std::move(buf));
        merge_pair(static_cast<std::size_t>(it - levels_.begin()));
      } else {
        acquire_buffer();
        place(std::move(buf), l.level_val);
      }
    }
  }
  n_ += other.n_;
  cur_level_ = new_level;
}

void rms_summary::finalize() {
  if (finalized_) return;
  // Seeded from the state alone so a deserialized copy finalizes identically.
  gen_ = rng(derive_seed(fingerprint(serialize()), "rms-finalize"));
  flush_staging();
  weighted_.clear();
  for (const auto& l : levels_) {
    for (const auto& buf : l.buffers) {
      for (value_t v : buf) weighted_.push_back({v, weight_of(l.level_val)});
    }
  }
  std::sort(weighted_.begin(), weighted_.end(), [](const rms_weighted& x, const rms_weighted& y) {
    return x.value != y.value ? x.value < y.value : x.weight < y.weight;
  });
  finalized_ = true;
}

value_t rms_summary::get_quantile(double phi) {
  check_phi(phi);
  finalize();
  if (weighted_.empty()) throw query_error("quantile of an empty rms summary");
  const double target = phi * static_cast<double>(n_);
  double running = 0;
  for (const auto& item : weighted_) {
    running += static_cast<double>(item.weight);
    if (running >= target) return item.value;
  }
  return weighted_.back().value;
}

bytes rms_summary::serialize() const {
  byte_writer w;
  wire_header{algo::rms, config_.epsilon, n_}.write(w);
  w.u32(config_.h);
  w.u32(config_.b);
  w.u64(config_.s);
  w.f64(config_.const_level);
  w.i32(cur_level_);
  w.u64(n_);
  w.u64(staging_.size());
  for (value_t v : staging_) w.u32(v);
  for (const auto& l : levels_) {
    w.i32(l.level_val);
    w.u32(static_cast<uint32_t>(l.buffers.size()));
    for (const auto& buf : l.buffers) {
      w.u64(buf.size());
      for (value_t v : buf) w.u32(v);
    }
  }
  return w.take();
}

rms_summary rms_summary::deserialize(const uint8_t* data, std::size_t len) {
  byte_reader r(data, len);
  const wire_header hdr = wire_header::read(r);
  if (hdr.tag != algo::rms) throw format_error("blob does not hold an rms summary", 5);
  rms_config c;
  c.epsilon = hdr.epsilon;
  const std::size_t config_at = r.offset();
  c.h = r.u32();
  c.b = r.u32();
  c.s = r.u64();
  c.const_level = r.f64();
  try {
    c.validate();
  } catch (const config_error& e) {
    throw format_error(e.what(), config_at);
  }
  const std::size_t state_at = r.offset();
  const int32_t cur_level = r.i32();
  if (cur_level < 0 || cur_level > max_level_val) throw format_error("bad rms curLevel", state_at);
  const uint64_t n = r.u64();
  if (n != hdr.n) throw format_error("rms item count disagrees with header", state_at + 4);
  const uint64_t staged = r.u64();
  if (staged >= c.s) throw format_error("rms staging list is full", state_at + 12);
  r.check_count(staged, 4);

  rms_summary out(c, derive_seed(n, "rms-wire"));
  out.cur_level_ = cur_level;
  out.n_ = n;
  out.staging_.resize(staged);
  for (auto& v : out.staging_) v = r.u32();

  uint64_t buffers = 0;
  int32_t last = -1;
  bool unused_seen = false;
  double mass = static_cast<double>(staged) * static_cast<double>(weight_of(cur_level));
  for (auto& l : out.levels_) {
    const std::size_t at = r.offset();
    l.level_val = r.i32();
    const uint32_t count = r.u32();
    if (l.level_val < -1 || l.level_val > max_level_val) throw format_error("bad rms level value", at);
    if ((l.level_val < 0) != (count == 0)) throw format_error("rms level value and buffer count disagree", at);
    if (l.level_val >= 0) {
      if (unused_seen || l.level_val <= last) throw format_error("rms levels out of order", at);
      last = l.level_val;
    } else {
      unused_seen = true;
    }
    buffers += count;
    if (buffers > c.b) throw format_error("rms hierarchy holds too many buffers", at + 4);
    l.buffers.resize(count);
    for (auto& buf : l.buffers) {
      const std::size_t buf_at = r.offset();
      const uint64_t size = r.u64();
      if (size < 1 || size > c.s) throw format_error("bad rms buffer length", buf_at);
      r.check_count(size, 4);
      buf.resize(size);
      for (auto& v : buf) v = r.u32();
      if (!std::is_sorted(buf.begin(), buf.end())) throw format_error("rms buffer not sorted", buf_at + 8);
      mass += static_cast<double>(size) * static_cast<double>(weight_of(l.level_val));
    }
  }
  r.expect_end();
  if (n == 0 && mass > 0) throw format_error("empty rms summary holds items", state_at + 4);
  return out;
}

}  // namespace dqes
