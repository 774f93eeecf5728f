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


#ifndef DQES_HARNESS_HPP_
#define DQES_HARNESS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "dqes/corpus.hpp"
#include "dqes/gk.hpp"
#include "dqes/qdigest.hpp"
#include "dqes/wire.hpp"

namespace dqes {

/// One simulated experiment: P workers on each of `nodes` simulated machines.
struct experiment_config {
  algo kind = algo::gk;
  double epsilon = 0.01;
  data_spec data;
  uint64_t chunks = 1024;
  uint64_t workers = 1;  // P, per node
  uint64_t nodes = 1;    // leaves of the node tree, a power of two
  std::vector<double> phis = default_phis();
  uint64_t seed = 1;
  gk_mode gk = gk_mode::mixed;
  bool parallel = false;  // build worker summaries on separate threads

  void validate() const;
  uint64_t total_workers() const { return workers * nodes; }
};

/// chunk i -> worker i mod P.
std::vector<uint64_t> worker_assignment(uint64_t chunks, uint64_t workers);

/// One serialized summary crossing a merge boundary.
struct transmission {
  std::string phase;  // "add_state" (worker ids) or "add_global_state" (node ids)
  uint64_t src;
  uint64_t dst;
  algo kind;
  uint64_t bytes;
};

struct phi_result {
  double phi;
  value_t estimate;
  double rank_error;
};

struct measurement {
  experiment_config config;
  std::vector<phi_result> results;
  uint64_t total_bytes = 0;
  uint64_t max_bytes = 0;
  double build_ms = 0;
  double merge_ms = 0;
  double query_ms = 0;
  uint64_t worker_count = 0;
  uint64_t summary_final_bytes = 0;
  std::vector<transmission> log;
  /// Compress statistics summed over every q-digest of the run (zero otherwise).
  qd_compress_stats qd_stats;

  double mean_error() const;
  double max_error() const;
  double total_ms() const { return build_ms + merge_ms + query_ms; }
};

/// Runs the pipeline on `data` (which must be the data the config describes,
/// or any data when the caller loaded it from a file) against `oracle`.
measurement run(const experiment_config& config, const std::vector<value_t>& data, const rank_oracle& oracle);
/// Generates config.data and runs on it.
measurement run(const experiment_config& config);

/// Time_1 / Time_P for one group of runs differing only in P.
struct ratio_row {
  algo kind;
  double epsilon;
  data_spec data;
  uint64_t workers;
  double ratio;
};

struct sweep_result {
  std::vector<measurement> runs;
  std::vector<ratio_row> ratios;
};

/// Runs every config in order (datasets are generated once per distinct spec)
/// and computes ratio-time per (algo, eps, data, nodes, seed) group against its
/// P = 1 run; groups without a P = 1 run get no ratio rows. A failing run
/// aborts with a runtime_error naming the config.
sweep_result sweep(const std::vector<experiment_config>& grid);

/// Same as `sweep`, but every config runs on the given data.
sweep_result sweep(const std::vector<experiment_config>& grid, const std::vector<value_t>& data);

}  // namespace dqes

#endif  // DQES_HARNESS_HPP_
