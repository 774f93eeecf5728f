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


#ifndef DQES_REPORT_HPP_
#define DQES_REPORT_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dqes/harness.hpp"

namespace dqes {

/// Column order of every result CSV.
inline constexpr const char* csv_header =
    "algo,eps,zipf,order,workers,seed,phi,estimate,rank_error,total_bytes,max_bytes,build_ms,merge_ms,query_ms";

/// One CSV line: a single phi of a single run.
struct result_row {
  std::string algo;
  double eps = 0;
  double zipf = 0;
  std::string order;
  uint64_t workers = 0;
  uint64_t seed = 0;
  double phi = 0;
  uint64_t estimate = 0;
  double rank_error = 0;
  uint64_t total_bytes = 0;
  uint64_t max_bytes = 0;
  double build_ms = 0;
  double merge_ms = 0;
  double query_ms = 0;
};

/// Shortest fixed-notation decimal that reads back to the same double, with a
/// '.' separator regardless of locale.
std::string format_number(double x);
/// Fixed notation with three decimals, for timings.
std::string format_ms(double ms);

std::vector<result_row> rows_of(const measurement& m);
void write_csv_header(std::ostream& out);
void write_rows(std::ostream& out, const std::vector<result_row>& rows);

/// Parses a result CSV (header line first). Throws std::runtime_error naming
/// the 1-based line of the first malformed row.
std::vector<result_row> read_csv(std::istream& in);

/// Per-(algo, eps) means over all rows of that group, in first-seen order.
struct aggregate_row {
  std::string algo;
  double eps = 0;
  uint64_t rows = 0;
  double mean_error = 0;
  double max_error = 0;
  double mean_total_bytes = 0;
  double mean_max_bytes = 0;
  double mean_build_ms = 0;
  double mean_merge_ms = 0;
  double mean_query_ms = 0;
};

std::vector<aggregate_row> aggregate(const std::vector<result_row>& rows);
void write_aggregate(std::ostream& out, const std::vector<aggregate_row>& table);

/// algo,eps,n,zipf,order,workers,ratio_time
void write_ratio_table(std::ostream& out, const std::vector<ratio_row>& ratios);

/// phase,src,dst,algo,bytes
void write_log(std::ostream& out, const std::vector<transmission>& log);

}  // namespace dqes

#endif  // DQES_REPORT_HPP_
