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


#include "dqes/harness.hpp"

#include <algorithm>
#include <chrono>
#include <optional>
#include <stdexcept>
#include <thread>
#include <variant>

#include "dqes/errors.hpp"
#include "dqes/summary.hpp"

namespace dqes {

namespace {

using clock_type = std::chrono::steady_clock;

double elapsed_ms(clock_type::time_point since) {
  return std::chrono::duration<double, std::milli>(clock_type::now() - since).count();
}

bool is_power_of_two(uint64_t x) { return x != 0 && (x & (x - 1)) == 0; }

summary make_worker(const experiment_config& c, uint64_t n, uint64_t global_id) {
  summary_params p;
  p.kind = c.kind;
  p.epsilon = c.epsilon;
  p.u = c.data.u;
  p.gk = c.gk;
  p.k = c.total_workers();
  p.total_n = std::max<uint64_t>(n, 1);
  p.seed = derive_seed(c.seed, "worker", global_id);
  return summary(p);
}

void add_stats(qd_compress_stats& into, const summary& s) {
  if (const auto* q = std::get_if<q_digest>(&s.inner())) into += q->stats();
}

// Ships `from` to `to` through the wire format, logging the transfer.
void transmit(summary& to, summary&& from, const char* phase, uint64_t src, uint64_t dst, measurement& m) {
  if (auto* s = std::get_if<sampling_summary>(&from.inner())) s->rank();
  add_stats(m.qd_stats, from);
  const bytes blob = from.serialize();
  m.log.push_back({phase, src, dst, from.kind(), blob.size()});
  to.merge(summary::deserialize(blob));
}

}  // namespace

void experiment_config::validate() const {
  data.validate();
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw config_error("epsilon must lie in (0,1)");
  if (kind == algo::rms && epsilon >= 0.5) throw config_error("rms needs epsilon below 1/2");
  if (workers < 1 || chunks < workers) throw config_error("need chunks >= workers >= 1");
  if (!is_power_of_two(nodes)) throw config_error("node count must be a power of two");
  if (chunks < nodes) throw config_error("need at least one chunk per node");
  if (phis.empty()) throw config_error("phi list is empty");
  for (double phi : phis) check_phi(phi);
}

std::vector<uint64_t> worker_assignment(uint64_t chunks, uint64_t workers) {
  if (workers < 1 || chunks < workers) throw config_error("need chunks >= workers >= 1");
  std::vector<uint64_t> out(chunks);
  for (uint64_t i = 0; i < chunks; ++i) out[i] = i % workers;
  return out;
}

double measurement::mean_error() const {
  double sum = 0;
  for (const auto& r : results) sum += r.rank_error;
  return results.empty() ? 0.0 : sum / static_cast<double>(results.size());
}

double measurement::max_error() const {
  double worst = 0;
  for (const auto& r : results) worst = std::max(worst, r.rank_error);
  return worst;
}

measurement run(const experiment_config& config, const std::vector<value_t>& data, const rank_oracle& oracle) {
  config.validate();
  if (data.empty()) throw config_error("dataset is empty");
  measurement m;
  m.config = config;
  const uint64_t n = data.size();
  const uint64_t total = config.total_workers();
  m.worker_count = total;

  // Chunk c covers [c n / C, (c + 1) n / C). Chunk c goes to node c mod L and,
  // among that node's chunks, round-robin to its P workers.
  const uint64_t chunks = config.chunks;
  const auto local = worker_assignment((chunks + config.nodes - 1) / config.nodes, config.workers);
  std::vector<std::vector<uint64_t>> owned(total);
  for (uint64_t c = 0; c < chunks; ++c) {
    const uint64_t node = c % config.nodes;
    owned[node * config.workers + local[c / config.nodes]].push_back(c);
  }

  std::vector<summary> parts;
  parts.reserve(total);
  for (uint64_t g = 0; g < total; ++g) parts.push_back(make_worker(config, n, g));

  auto build_one = [&](uint64_t g) {
    summary& s = parts[g];
    auto* qd = std::get_if<q_digest>(&s.inner());
    const bool end_chunk_compress = qd != nullptr && qd->variant() == qd_variant::batch;
    for (uint64_t c : owned[g]) {
      const uint64_t lo = c * n / chunks;
      const uint64_t hi = (c + 1) * n / chunks;
      for (uint64_t i = lo; i < hi; ++i) s.update(data[i]);
      if (end_chunk_compress) qd->compress();
    }
  };

  auto t0 = clock_type::now();
  if (config.parallel && total > 1) {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(total);
    for (uint64_t g = 0; g < total; ++g) {
      pool.emplace_back([&, g] {
        try {
          build_one(g);
        } catch (...) {
          errors[g] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (uint64_t g = 0; g < total; ++g) build_one(g);
  }
  m.build_ms = elapsed_ms(t0);

  t0 = clock_type::now();
  std::vector<summary> node_acc;
  node_acc.reserve(config.nodes);
  for (uint64_t node = 0; node < config.nodes; ++node) {
    const uint64_t first = node * config.workers;
    summary acc = std::move(parts[first]);
    for (uint64_t w = 1; w < config.workers; ++w) transmit(acc, std::move(parts[first + w]), "add_state", first + w, first, m);
    node_acc.push_back(std::move(acc));
  }
  for (uint64_t stride = 1; stride < config.nodes; stride *= 2) {
    for (uint64_t j = 0; j + stride < config.nodes; j += 2 * stride) {
      transmit(node_acc[j], std::move(node_acc[j + stride]), "add_global_state", j + stride, j, m);
    }
  }
  summary& root = node_acc.front();
  m.merge_ms = elapsed_ms(t0);
  add_stats(m.qd_stats, root);
  m.summary_final_bytes = root.serialize().size();
  for (const auto& t : m.log) {
    m.total_bytes += t.bytes;
    m.max_bytes = std::max(m.max_bytes, t.bytes);
  }

  t0 = clock_type::now();
  root.finalize();
  for (double phi : config.phis) {
    const value_t est = root.query(phi);
    m.results.push_back({phi, est, 0.0});
  }
  m.query_ms = elapsed_ms(t0);
  for (auto& r : m.results) r.rank_error = oracle.rank_error(r.phi, r.estimate);
  return m;
}

measurement run(const experiment_config& config) {
  config.validate();
  const auto data = generate(config.data);
  return run(config, data, rank_oracle(data));
}

namespace {

bool same_group(const experiment_config& a, const experiment_config& b) {
  return a.kind == b.kind && a.epsilon == b.epsilon && a.data == b.data && a.nodes == b.nodes && a.seed == b.seed &&
         a.chunks == b.chunks && a.gk == b.gk;
}

std::string describe(std::size_t index, const experiment_config& c) {
  return "run " + std::to_string(index) + " (algo=" + to_string(c.kind) + ", eps=" + std::to_string(c.epsilon) +
         ", workers=" + std::to_string(c.workers) + ", n=" + std::to_string(c.data.n) + ", seed=" + std::to_string(c.seed) +
         ")";
}

template <class RunFn>
sweep_result sweep_with(const std::vector<experiment_config>& grid, RunFn&& run_one) {
  if (grid.empty()) throw config_error("sweep grid is empty");
  sweep_result out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    try {
      out.runs.push_back(run_one(grid[i]));
    } catch (const std::exception& e) {
      throw std::runtime_error(describe(i, grid[i]) + ": " + e.what());
    }
  }
  for (const auto& m : out.runs) {
    const auto base = std::find_if(out.runs.begin(), out.runs.end(), [&](const measurement& b) {
      return b.config.workers == 1 && same_group(b.config, m.config);
    });
    if (base == out.runs.end()) continue;
    const double ratio = m.config.workers == 1 ? 1.0 : base->total_ms() / std::max(m.total_ms(), 1e-9);
    out.ratios.push_back({m.config.kind, m.config.epsilon, m.config.data, m.config.workers, ratio});
  }
  return out;
}

}  // namespace

sweep_result sweep(const std::vector<experiment_config>& grid) {
  // Only the latest dataset is kept; grids are usually ordered by data.
  std::optional<data_spec> spec;
  std::vector<value_t> data;
  std::optional<rank_oracle> oracle;
  return sweep_with(grid, [&](const experiment_config& c) {
    c.validate();
    if (!spec || !(*spec == c.data)) {
      data = generate(c.data);
      oracle.emplace(data);
      spec = c.data;
    }
    return run(c, data, *oracle);
  });
}

sweep_result sweep(const std::vector<experiment_config>& grid, const std::vector<value_t>& data) {
  const rank_oracle oracle(data);
  return sweep_with(grid, [&](const experiment_config& c) { return run(c, data, oracle); });
}

}  // namespace dqes
