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

#include "dqes/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dqes/errors.hpp"

namespace dqes {

void sampling_context::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw config_error("epsilon must lie in (0,1)");
  if (k < 1) throw config_error("sampling needs k >= 1");
  if (n < 1) throw config_error("sampling needs n >= 1");
}

double sampling_context::base_probability() const {
  return std::min(1.0, std::sqrt(static_cast<double>(k)) / (epsilon * static_cast<double>(n)));
}

double sampling_context::small_limit() const {
  return static_cast<double>(n) / std::sqrt(static_cast<double>(k));
}

int32_t sampling_context::class_of(uint64_t s) const {
  if (static_cast<double>(s) < small_limit()) return no_class;
  return static_cast<int32_t>(std::floor(std::log2(static_cast<double>(s) * std::sqrt(static_cast<double>(k)) /
                                                   static_cast<double>(n))));
}

double sampling_context::probability_for(uint64_t s) const {
  if (s == 0) return 1.0;
  return std::min(1.0, 1.0 / (epsilon * static_cast<double>(s)));
}

void sample_set::assign_ranks() {
  std::sort(values.begin(), values.end());
  ranks.resize(values.size());
  const double step = 1.0 / p;
  uint64_t steps = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0 && values[i] != values[i - 1]) ++steps;
    ranks[i] = static_cast<double>(steps) * step;
  }
  ranked = true;
}

double sample_set::rank_estimate(value_t x) const {
  const auto it = std::upper_bound(values.begin(), values.end(), x);
  if (it == values.begin()) return 0.0;
  const auto j = static_cast<std::size_t>(it - values.begin()) - 1;
  return values[j] == x ? ranks[j] : ranks[j] + 1.0 / p;
}

double global_rank(const std::vector<sample_set>& samples, value_t x) {
  double total = 0.0;
  for (const auto& s : samples) {
    if (!s.ranked) throw state_error("global rank needs ranked samples");
    total += s.rank_estimate(x);
  }
  return total;
}

value_t flat_query(const std::vector<sample_set>& samples, double phi, uint64_t total) {
  check_phi(phi);
  std::vector<value_t> candidates;
  for (const auto& s : samples) {
    if (!s.ranked) throw state_error("query needs ranked samples");
    candidates.insert(candidates.end(), s.values.begin(), s.values.end());
  }
  if (candidates.empty()) throw query_error("all samples are empty");
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  const double target = phi * static_cast<double>(total);
  // One cursor per sample: number of sampled values <= the current candidate.
  std::vector<std::size_t> cursor(samples.size(), 0);
  value_t best = candidates.front();
  double best_dist = std::numeric_limits<double>::infinity();
  for (value_t x : candidates) {
    double g = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      std::size_t& j = cursor[i];
      while (j < s.values.size() && s.values[j] <= x) ++j;
      if (j == 0) continue;
      g += s.values[j - 1] == x ? s.ranks[j - 1] : s.ranks[j - 1] + 1.0 / s.p;
    }
    const double dist = std::abs(g - target);
    if (dist < best_dist) {
      best_dist = dist;
      best = x;
    }
  }
  return best;
}

namespace {

// Thins every part to probability p' = 1/(eps s') and ranks the union.
sample_set combine(const std::vector<const sample_set*>& parts, const sampling_context& ctx, rng& gen) {
  sample_set out;
  double lowest = 1.0;
  for (const auto* part : parts) {
    out.s += part->s;
    lowest = std::min(lowest, part->p);
  }
  out.p = std::min(ctx.probability_for(out.s), lowest);
  for (const auto* part : parts) {
    const double keep = out.p / part->p;
    for (value_t v : part->values) {
      if (gen.bernoulli(keep)) out.values.push_back(v);
    }
  }
  out.cls = ctx.class_of(out.s);
  out.assign_ranks();
  return out;
}

}  // namespace

std::vector<sample_set> tree_merge(std::vector<sample_set> samples, const sampling_context& ctx, rng& gen) {
  for (const auto& s : samples) {
    if (!s.ranked) throw state_error("tree merge needs ranked samples");
  }
  std::vector<sample_set> out;
  std::vector<const sample_set*> small;
  uint64_t small_total = 0;
  for (const auto& s : samples) {
    if (s.cls == no_class) {
      small.push_back(&s);
      small_total += s.s;
    }
  }
  if (!small.empty() && static_cast<double>(small_total) >= ctx.small_limit()) {
    for (auto& s : samples) {
      if (s.cls != no_class) out.push_back(std::move(s));
    }
    out.push_back(combine(small, ctx, gen));
  } else {
    out = std::move(samples);
  }
  for (;;) {
    // Lowest class holding at least two samples.
    int32_t cls = std::numeric_limits<int32_t>::max();
    std::size_t first = 0, second = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i].cls == no_class || out[i].cls >= cls) continue;
      for (std::size_t j = i + 1; j < out.size(); ++j) {
        if (out[j].cls == out[i].cls) {
          cls = out[i].cls;
          first = i;
          second = j;
          break;
        }
      }
    }
    if (cls == std::numeric_limits<int32_t>::max()) break;
    sample_set merged = combine({&out[first], &out[second]}, ctx, gen);
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(second));
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(first));
    out.push_back(std::move(merged));
  }
  return out;
}

sampling_summary::sampling_summary(const sampling_context& ctx, uint64_t seed)
    : ctx_(ctx), gen_(derive_seed(seed, "sampling")) {
  ctx_.validate();
  sample_set local;
  local.p = ctx_.base_probability();
  samples_.push_back(std::move(local));
}

void sampling_summary::offer(value_t v, bool keep) {
  if (samples_.size() != 1 || samples_.front().ranked) {
    throw state_error("sampling summary no longer accepts items once ranked or merged");
  }
  auto& local = samples_.front();
  ++local.s;
  if (keep) local.values.push_back(v);
}

void sampling_summary::update(value_t v) { offer(v, gen_.bernoulli(samples_.front().p)); }

void sampling_summary::rank() {
  if (ranked()) return;
  // Thinning depends only on the current state, so a deserialized copy ranks
  // (and answers) identically.
  gen_ = rng(derive_seed(fingerprint(serialize()), "sampling-rank"));
  for (auto& s : samples_) {
    if (s.ranked) continue;
    if (static_cast<double>(s.s) > ctx_.small_limit()) {
      const double pi = ctx_.probability_for(s.s);
      if (pi < s.p) {
        std::vector<value_t> kept;
        for (value_t v : s.values) {
          if (gen_.bernoulli(pi / s.p)) kept.push_back(v);
        }
        s.values = std::move(kept);
        s.p = pi;
      }
    }
    s.cls = ctx_.class_of(s.s);
    s.assign_ranks();
  }
}

bool sampling_summary::ranked() const {
  return std::all_of(samples_.begin(), samples_.end(), [](const sample_set& s) { return s.ranked; });
}

void sampling_summary::merge(sampling_summary&& other) {
  if (!(other.ctx_ == ctx_)) throw merge_error("sampling contexts differ");
  rank();
  other.rank();
  std::vector<sample_set> all = std::move(samples_);
  for (auto& s : other.samples_) all.push_back(std::move(s));
  other.samples_.clear();
  samples_ = tree_merge(std::move(all), ctx_, gen_);
}

value_t sampling_summary::get_quantile(double phi) {
  check_phi(phi);
  rank();
  return flat_query(samples_, phi, n());
}

uint64_t sampling_summary::n() const {
  uint64_t total = 0;
  for (const auto& s : samples_) total += s.s;
  return total;
}

bytes sampling_summary::serialize() const {
  byte_writer w;
  wire_header{algo::sampling, ctx_.epsilon, n()}.write(w);
  w.u64(samples_.size());
  for (const auto& s : samples_) {
    w.f64(s.p);
    w.u64(s.s);
    w.i32(s.ranked ? s.cls : unranked_class);
    w.u64(s.values.size());
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      w.u32(s.values[i]);
      w.f64(s.ranked ? s.ranks[i] : std::numeric_limits<double>::quiet_NaN());
    }
  }
  w.u64(ctx_.k);
  w.u64(ctx_.n);
  return w.take();
}

sampling_summary sampling_summary::deserialize(const uint8_t* data, std::size_t len) {
  byte_reader r(data, len);
  const wire_header h = wire_header::read(r);
  if (h.tag != algo::sampling) throw format_error("blob does not hold a sampling summary", 5);
  const uint64_t count = r.u64();
  r.check_count(count, 28);
  std::vector<sample_set> samples(count);
  uint64_t total = 0;
  for (auto& s : samples) {
    const std::size_t at = r.offset();
    s.p = r.f64();
    if (!(s.p > 0.0 && s.p <= 1.0)) throw format_error("sampling probability outside (0,1]", at);
    s.s = r.u64();
    const int32_t cls = r.i32();
    if (cls < unranked_class) throw format_error("bad class number", at + 16);
    s.ranked = cls != unranked_class;
    s.cls = s.ranked ? cls : no_class;
    const uint64_t items = r.u64();
    if (items > s.s) throw format_error("sample holds more items than it summarizes", at + 20);
    r.check_count(items, 12);
    s.values.resize(items);
    if (s.ranked) s.ranks.resize(items);
    for (uint64_t i = 0; i < items; ++i) {
      const std::size_t item_at = r.offset();
      s.values[i] = r.u32();
      const double rank = r.f64();
      if (s.ranked) {
        if (!std::isfinite(rank) || rank < 0.0) throw format_error("bad local rank", item_at + 4);
        if (i > 0 && (s.values[i] < s.values[i - 1] || rank < s.ranks[i - 1])) {
          throw format_error("ranked sample out of order", item_at);
        }
        s.ranks[i] = rank;
      } else if (!std::isnan(rank)) {
        throw format_error("unranked sample carries a rank", item_at + 4);
      }
    }
    total += s.s;
  }
  sampling_context ctx;
  ctx.epsilon = h.epsilon;
  const std::size_t ctx_at = r.offset();
  ctx.k = r.u64();
  ctx.n = r.u64();
  r.expect_end();
  if (ctx.k < 1 || ctx.n < 1) throw format_error("bad sampling context", ctx_at);
  if (total != h.n) throw format_error("sample sizes do not sum to n", 14);
  for (const auto& s : samples) {
    if (s.ranked && s.cls != ctx.class_of(s.s)) throw format_error("class number disagrees with sample size", ctx_at);
  }
  sampling_summary out(ctx, derive_seed(h.n, "sampling-wire"));
  out.samples_ = std::move(samples);
  return out;
}

}  // namespace dqes
