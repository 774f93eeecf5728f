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

#include "dqes/corpus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "dqes/errors.hpp"
#include "dqes/random.hpp"
#include "dqes/wire.hpp"

namespace dqes {

namespace {

// Largest universe for which the Zipf cumulative table is materialized.
constexpr uint64_t max_zipf_universe = uint64_t{1} << 26;

constexpr char dataset_magic[4] = {'D', 'Q', 'D', 'S'};
constexpr uint8_t dataset_version = 1;

}  // namespace

std::string to_string(order o) { return o == order::sorted ? "sorted" : "random"; }

order parse_order(const std::string& name) {
  if (name == "sorted") return order::sorted;
  if (name == "random") return order::random;
  throw config_error("unknown order '" + name + "'");
}

void data_spec::validate() const {
  if (n < 1) throw config_error("dataset size n must be at least 1");
  if (u < 2 || !std::has_single_bit(u)) throw config_error("universe u must be a power of two >= 2");
  if (u > (uint64_t{1} << 32)) throw config_error("universe u must not exceed 2^32");
  if (!(zipf >= 0.0) || !std::isfinite(zipf)) throw config_error("zipf exponent must be finite and >= 0");
  if (zipf > 0.0 && u > max_zipf_universe) throw config_error("zipf > 0 supports u <= 2^26");
}

std::vector<value_t> generate(const data_spec& spec) {
  spec.validate();
  rng gen(derive_seed(spec.seed, "corpus"));
  std::vector<value_t> out(spec.n);
  if (spec.zipf == 0.0) {
    const int shift = 64 - std::countr_zero(spec.u);
    for (auto& v : out) v = static_cast<value_t>(gen.next() >> shift);
  } else {
    std::vector<double> cdf(spec.u);
    double total = 0.0;
    for (uint64_t i = 0; i < spec.u; ++i) {
      total += std::pow(static_cast<double>(i + 1), -spec.zipf);
      cdf[i] = total;
    }
    for (auto& v : out) {
      const double x = gen.uniform() * total;
      auto idx = static_cast<uint64_t>(std::upper_bound(cdf.begin(), cdf.end(), x) - cdf.begin());
      v = static_cast<value_t>(std::min(idx, spec.u - 1));
    }
  }
  if (spec.order == order::sorted) std::sort(out.begin(), out.end());
  return out;
}

uint64_t target_rank(double phi, uint64_t n) {
  const auto r = static_cast<uint64_t>(std::floor(phi * static_cast<double>(n)));
  return n == 0 ? 0 : std::min(r, n - 1);
}

void check_phi(double phi) {
  if (!(phi > 0.0 && phi < 1.0)) throw query_error("phi must lie in (0,1)");
}

std::vector<double> default_phis() {
  std::vector<double> phis;
  for (int i = 1; i <= 19; ++i) phis.push_back(i / 20.0);
  return phis;
}

rank_oracle::rank_oracle(std::vector<value_t> values) : sorted_(std::move(values)) {
  std::sort(sorted_.begin(), sorted_.end());
}

value_t rank_oracle::exact_quantile(double phi) const {
  check_phi(phi);
  if (sorted_.empty()) throw query_error("empty dataset");
  return sorted_[target_rank(phi, sorted_.size())];
}

rank_interval rank_oracle::rank_bounds(value_t v) const {
  const auto lo = std::lower_bound(sorted_.begin(), sorted_.end(), v);
  const auto hi = std::upper_bound(lo, sorted_.end(), v);
  const auto r_min = static_cast<uint64_t>(lo - sorted_.begin());
  if (lo == hi) return {r_min, r_min, true};
  return {r_min, static_cast<uint64_t>(hi - sorted_.begin()) - 1, false};
}

double rank_oracle::rank_error(double phi, value_t answer) const {
  check_phi(phi);
  if (sorted_.empty()) throw query_error("empty dataset");
  const uint64_t r = target_rank(phi, sorted_.size());
  const rank_interval b = rank_bounds(answer);
  const double n = static_cast<double>(sorted_.size());
  if (r < b.r_min) return static_cast<double>(b.r_min - r) / n;
  if (r > b.r_max) return static_cast<double>(r - b.r_max) / n;
  return 0.0;
}

void write_dataset_binary(const std::string& path, const dataset& d) {
  byte_writer w;
  w.raw(dataset_magic, sizeof dataset_magic);
  w.u8(dataset_version);
  w.u64(d.values.size());
  w.u64(d.u);
  for (value_t v : d.values) w.u32(v);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(w.data().data()), static_cast<std::streamsize>(w.data().size()));
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void write_dataset_text(const std::string& path, const dataset& d) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (value_t v : d.values) out << v << '\n';
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

dataset read_dataset(const std::string& path, uint64_t u_hint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  const bytes content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  dataset d;
  if (content.size() >= 4 && std::memcmp(content.data(), dataset_magic, 4) == 0) {
    byte_reader r(content);
    char m[4];
    r.raw(m, 4);
    if (r.u8() != dataset_version) throw format_error("unsupported dataset version", 4);
    const uint64_t n = r.u64();
    d.u = r.u64();
    r.check_count(n, 4);
    d.values.resize(n);
    for (auto& v : d.values) v = r.u32();
    r.expect_end();
  } else {
    std::istringstream text(std::string(content.begin(), content.end()));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(text, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::size_t used = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(line, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != line.size() || v > 0xffffffffULL || line[0] == '-') {
        throw format_error("bad integer on line " + std::to_string(lineno), lineno);
      }
      d.values.push_back(static_cast<value_t>(v));
    }
    if (u_hint != 0) {
      d.u = u_hint;
    } else {
      const value_t mx = d.values.empty() ? 0 : *std::max_element(d.values.begin(), d.values.end());
      d.u = std::max<uint64_t>(2, std::bit_ceil(static_cast<uint64_t>(mx) + 1));
    }
  }
  for (value_t v : d.values) {
    if (v >= d.u) throw format_error("value " + std::to_string(v) + " outside universe", 0);
  }
  return d;
}

}  // namespace dqes
