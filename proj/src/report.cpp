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


#include "dqes/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string_view>
#include <type_traits>

namespace dqes {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

template <class T>
T parse_field(std::string_view text, const char* name, std::size_t line) {
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw std::runtime_error("line " + std::to_string(line) + ": bad " + name + " '" + std::string(text) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value) || value < 0) {
      throw std::runtime_error("line " + std::to_string(line) + ": " + name + " must be finite and nonnegative");
    }
  }
  return value;
}

}  // namespace

std::string format_number(double x) {
  char buf[512];  // fixed notation of any finite double fits
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed);
  return std::string(buf, res.ptr);
}

std::string format_ms(double ms) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, ms, std::chars_format::fixed, 3);
  return std::string(buf, res.ptr);
}

std::vector<result_row> rows_of(const measurement& m) {
  std::vector<result_row> out;
  for (const auto& r : m.results) {
    result_row row;
    row.algo = to_string(m.config.kind);
    row.eps = m.config.epsilon;
    row.zipf = m.config.data.zipf;
    row.order = to_string(m.config.data.order);
    row.workers = m.config.workers;
    row.seed = m.config.seed;
    row.phi = r.phi;
    row.estimate = r.estimate;
    row.rank_error = r.rank_error;
    row.total_bytes = m.total_bytes;
    row.max_bytes = m.max_bytes;
    row.build_ms = m.build_ms;
    row.merge_ms = m.merge_ms;
    row.query_ms = m.query_ms;
    out.push_back(std::move(row));
  }
  return out;
}

void write_csv_header(std::ostream& out) { out << csv_header << '\n'; }

void write_rows(std::ostream& out, const std::vector<result_row>& rows) {
  for (const auto& r : rows) {
    out << r.algo << ',' << format_number(r.eps) << ',' << format_number(r.zipf) << ',' << r.order << ',' << r.workers
        << ',' << r.seed << ',' << format_number(r.phi) << ',' << r.estimate << ',' << format_number(r.rank_error) << ','
        << r.total_bytes << ',' << r.max_bytes << ',' << format_ms(r.build_ms) << ',' << format_ms(r.merge_ms) << ','
        << format_ms(r.query_ms) << '\n';
  }
}

std::vector<result_row> read_csv(std::istream& in) {
  std::vector<result_row> out;
  std::string line;
  std::size_t number = 0;
  if (!std::getline(in, line)) throw std::runtime_error("line 1: missing CSV header");
  ++number;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != csv_header) throw std::runtime_error("line 1: unexpected CSV header");
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 14) {
      throw std::runtime_error("line " + std::to_string(number) + ": expected 14 fields, found " + std::to_string(f.size()));
    }
    result_row r;
    r.algo = std::string(f[0]);
    r.eps = parse_field<double>(f[1], "eps", number);
    r.zipf = parse_field<double>(f[2], "zipf", number);
    r.order = std::string(f[3]);
    r.workers = parse_field<uint64_t>(f[4], "workers", number);
    r.seed = parse_field<uint64_t>(f[5], "seed", number);
    r.phi = parse_field<double>(f[6], "phi", number);
    r.estimate = parse_field<uint64_t>(f[7], "estimate", number);
    r.rank_error = parse_field<double>(f[8], "rank_error", number);
    r.total_bytes = parse_field<uint64_t>(f[9], "total_bytes", number);
    r.max_bytes = parse_field<uint64_t>(f[10], "max_bytes", number);
    r.build_ms = parse_field<double>(f[11], "build_ms", number);
    r.merge_ms = parse_field<double>(f[12], "merge_ms", number);
    r.query_ms = parse_field<double>(f[13], "query_ms", number);
    if (r.algo.empty() || r.order.empty()) throw std::runtime_error("line " + std::to_string(number) + ": empty field");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<aggregate_row> aggregate(const std::vector<result_row>& rows) {
  std::vector<aggregate_row> table;
  for (const auto& r : rows) {
    auto it = std::find_if(table.begin(), table.end(),
                           [&](const aggregate_row& a) { return a.algo == r.algo && a.eps == r.eps; });
    if (it == table.end()) {
      table.push_back({r.algo, r.eps});
      it = table.end() - 1;
    }
    ++it->rows;
    it->mean_error += r.rank_error;
    it->max_error = std::max(it->max_error, r.rank_error);
    it->mean_total_bytes += static_cast<double>(r.total_bytes);
    it->mean_max_bytes += static_cast<double>(r.max_bytes);
    it->mean_build_ms += r.build_ms;
    it->mean_merge_ms += r.merge_ms;
    it->mean_query_ms += r.query_ms;
  }
  for (auto& a : table) {
    const double k = static_cast<double>(a.rows);
    a.mean_error /= k;
    a.mean_total_bytes /= k;
    a.mean_max_bytes /= k;
    a.mean_build_ms /= k;
    a.mean_merge_ms /= k;
    a.mean_query_ms /= k;
  }
  return table;
}

void write_aggregate(std::ostream& out, const std::vector<aggregate_row>& table) {
  out << "algo,eps,rows,mean_error,max_error,mean_total_bytes,mean_max_bytes,mean_build_ms,mean_merge_ms,mean_query_ms\n";
  for (const auto& a : table) {
    out << a.algo << ',' << format_number(a.eps) << ',' << a.rows << ',' << format_number(a.mean_error) << ','
        << format_number(a.max_error) << ',' << format_number(a.mean_total_bytes) << ',' << format_number(a.mean_max_bytes)
        << ',' << format_ms(a.mean_build_ms) << ',' << format_ms(a.mean_merge_ms) << ',' << format_ms(a.mean_query_ms)
        << '\n';
  }
}

void write_ratio_table(std::ostream& out, const std::vector<ratio_row>& ratios) {
  out << "algo,eps,n,zipf,order,workers,ratio_time\n";
  for (const auto& r : ratios) {
    out << to_string(r.kind) << ',' << format_number(r.epsilon) << ',' << r.data.n << ',' << format_number(r.data.zipf)
        << ',' << to_string(r.data.order) << ',' << r.workers << ',' << format_number(r.ratio) << '\n';
  }
}

void write_log(std::ostream& out, const std::vector<transmission>& log) {
  for (const auto& t : log) {
    out << t.phase << ',' << t.src << ',' << t.dst << ',' << to_string(t.kind) << ',' << t.bytes << '\n';
  }
}

}  // namespace dqes
