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

#include <clocale>
#include <sstream>

#include "dqes/harness.hpp"
#include "dqes/report.hpp"

namespace dqes {

namespace {

result_row row(const std::string& algo, double eps, double err, uint64_t total) {
  result_row r;
  r.algo = algo;
  r.eps = eps;
  r.order = "random";
  r.workers = 2;
  r.seed = 1;
  r.phi = 0.5;
  r.estimate = 10;
  r.rank_error = err;
  r.total_bytes = total;
  r.max_bytes = total / 2;
  r.build_ms = 1.5;
  return r;
}

}  // namespace

TEST(report, number_formatting_is_shortest_and_dotted) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(0.05), "0.05");
  EXPECT_EQ(format_number(0), "0");
  EXPECT_EQ(format_number(1e-4), "0.0001");
  EXPECT_EQ(format_ms(1.23456), "1.235");
  EXPECT_EQ(format_ms(0), "0.000");
}

TEST(report, formatting_ignores_locale) {
  const char* old = std::setlocale(LC_ALL, nullptr);
  const std::string saved = old ? old : "C";
  if (std::setlocale(LC_ALL, "de_DE.UTF-8") == nullptr) GTEST_SKIP() << "de_DE locale not installed";
  EXPECT_EQ(format_number(0.25), "0.25");
  EXPECT_EQ(format_ms(2.5), "2.500");
  std::setlocale(LC_ALL, saved.c_str());
}

TEST(report, csv_roundtrip) {
  experiment_config c;
  c.epsilon = 0.05;
  c.data = {5000, 1 << 16, 0.5, order::sorted, 2};
  c.workers = 2;
  const auto m = run(c);
  std::stringstream ss;
  write_csv_header(ss);
  write_rows(ss, rows_of(m));
  const auto rows = read_csv(ss);
  ASSERT_EQ(rows.size(), 19u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].algo, "gk");
    EXPECT_EQ(rows[i].order, "sorted");
    EXPECT_EQ(rows[i].zipf, 0.5);
    EXPECT_EQ(rows[i].phi, m.results[i].phi);
    EXPECT_EQ(rows[i].estimate, m.results[i].estimate);
    EXPECT_EQ(rows[i].rank_error, m.results[i].rank_error);
    EXPECT_EQ(rows[i].total_bytes, m.total_bytes);
  }
}

TEST(report, header_only_gives_empty_table) {
  std::stringstream ss(std::string(csv_header) + "\n");
  const auto rows = read_csv(ss);
  EXPECT_TRUE(rows.empty());
  EXPECT_TRUE(aggregate(rows).empty());
}

TEST(report, malformed_row_names_line) {
  std::stringstream ss(std::string(csv_header) + "\n" +
                       "gk,0.1,0,random,1,1,0.5,3,0.01,0,0,1.000,0.000,0.000\n"
                       "gk,0.1,0,random,1,1,0.5,three,0.01,0,0,1.000,0.000,0.000\n");
  try {
    read_csv(ss);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::stringstream short_row(std::string(csv_header) + "\ngk,0.1\n");
  EXPECT_THROW(read_csv(short_row), std::runtime_error);
  std::stringstream bad_header("algo,eps\n");
  EXPECT_THROW(read_csv(bad_header), std::runtime_error);
}

TEST(report, aggregate_means) {
  const std::vector<result_row> rows{row("gk", 0.1, 0.02, 100), row("gk", 0.1, 0.04, 300), row("rms", 0.1, 0.5, 8)};
  const auto t = aggregate(rows);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].algo, "gk");
  EXPECT_EQ(t[0].rows, 2u);
  EXPECT_DOUBLE_EQ(t[0].mean_error, 0.03);
  EXPECT_DOUBLE_EQ(t[0].max_error, 0.04);
  EXPECT_DOUBLE_EQ(t[0].mean_total_bytes, 200);
  EXPECT_DOUBLE_EQ(t[0].mean_max_bytes, 100);
  EXPECT_DOUBLE_EQ(t[0].mean_build_ms, 1.5);
  EXPECT_EQ(t[1].algo, "rms");
}

TEST(report, single_run_aggregate_equals_row_mean) {
  experiment_config c;
  c.kind = algo::rms;
  c.epsilon = 0.05;
  c.data = {20000, 1 << 16, 0.0, order::random, 3};
  const auto m = run(c);
  const auto t = aggregate(rows_of(m));
  ASSERT_EQ(t.size(), 1u);
  EXPECT_DOUBLE_EQ(t[0].mean_error, m.mean_error());
}

TEST(report, log_lines) {
  std::vector<transmission> log{{"add_state", 1, 0, algo::gk, 40}, {"add_global_state", 1, 0, algo::gk, 50}};
  std::ostringstream out;
  write_log(out, log);
  EXPECT_EQ(out.str(), "add_state,1,0,gk,40\nadd_global_state,1,0,gk,50\n");
}

}  // namespace dqes
