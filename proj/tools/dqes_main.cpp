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


// Command-line front end: dataset generation, single runs, sweeps and reports.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dqes/corpus.hpp"
#include "dqes/errors.hpp"
#include "dqes/harness.hpp"
#include "dqes/report.hpp"

namespace {

using namespace dqes;

struct data_flags {
  uint64_t n = 1000000;
  uint64_t u = uint64_t{1} << 20;
  double zipf = 0.0;
  std::string order = "random";
  uint64_t seed = 1;
};

void add_data_flags(CLI::App* cmd, data_flags& f) {
  cmd->add_option("--n", f.n, "Number of items")->capture_default_str();
  cmd->add_option("--u", f.u, "Universe size, a power of two")->capture_default_str();
  cmd->add_option("--zipf", f.zipf, "Zipf exponent (0 = uniform)")->capture_default_str();
  cmd->add_option("--order", f.order, "sorted or random")->capture_default_str();
}

// DQES_SEED, when set, overrides --seed.
uint64_t effective_seed(uint64_t flag) {
  const char* env = std::getenv("DQES_SEED");
  if (env == nullptr || *env == '\0') return flag;
  const std::string text(env);
  std::size_t used = 0;
  uint64_t value = 0;
  try {
    value = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.front() == '-') throw config_error("DQES_SEED is not an unsigned integer: " + text);
  return value;
}

data_spec spec_of(const data_flags& f, uint64_t seed) {
  data_spec s{f.n, f.u, f.zipf, parse_order(f.order), seed};
  s.validate();
  return s;
}

struct gen_flags {
  data_flags data;
  std::string out;
  bool text = false;
};

int cmd_gen(const gen_flags& f) {
  const data_spec spec = spec_of(f.data, effective_seed(f.data.seed));
  dataset d{spec.u, generate(spec)};
  if (f.text) {
    write_dataset_text(f.out, d);
  } else {
    write_dataset_binary(f.out, d);
  }
  return 0;
}

struct run_flags {
  std::string algo;
  double eps = 0;
  uint64_t workers = 1;
  uint64_t nodes = 1;
  uint64_t chunks = 1024;
  std::string data_path;
  data_flags data;
  std::vector<double> phis;
  std::string gk_mode = "mixed";
  bool parallel = false;
  bool verbose = false;
};

gk_mode parse_gk_mode(const std::string& name) {
  if (name == "classic") return gk_mode::classic;
  if (name == "mixed") return gk_mode::mixed;
  throw config_error("unknown GK mode '" + name + "' (expected classic or mixed)");
}

experiment_config base_config(const run_flags& f, uint64_t seed) {
  experiment_config c;
  c.kind = parse_algo(f.algo);
  c.epsilon = f.eps;
  c.workers = f.workers;
  c.nodes = f.nodes;
  c.chunks = f.chunks;
  c.seed = seed;
  c.gk = parse_gk_mode(f.gk_mode);
  c.parallel = f.parallel;
  if (!f.phis.empty()) c.phis = f.phis;
  return c;
}

int cmd_run(const run_flags& f) {
  const uint64_t seed = effective_seed(f.data.seed);
  experiment_config c = base_config(f, seed);
  measurement m;
  if (!f.data_path.empty()) {
    const dataset d = read_dataset(f.data_path);
    // The file defines n and u; zipf and order only label the output rows.
    c.data = {d.values.size(), d.u, f.data.zipf, parse_order(f.data.order), seed};
    c.validate();
    m = run(c, d.values, rank_oracle(d.values));
  } else {
    c.data = spec_of(f.data, seed);
    m = run(c);
  }
  write_csv_header(std::cout);
  write_rows(std::cout, rows_of(m));
  if (f.verbose) {
    std::cerr << "phase,src,dst,algo,bytes\n";
    write_log(std::cerr, m.log);
  }
  return 0;
}

struct sweep_flags {
  std::vector<std::string> algos;
  std::vector<double> eps_list;
  std::vector<uint64_t> workers_list{1};
  std::vector<double> zipf_list{0.0};
  std::vector<std::string> orders{"random"};
  uint64_t n = 1000000;
  uint64_t u = uint64_t{1} << 20;
  uint64_t seed = 1;
  uint64_t nodes = 1;
  uint64_t chunks = 1024;
  std::vector<double> phis;
  std::string gk_mode = "mixed";
  std::string out;
};

int cmd_sweep(const sweep_flags& f) {
  const uint64_t seed = effective_seed(f.seed);
  std::vector<experiment_config> grid;
  for (double zipf : f.zipf_list) {
    for (const auto& ord : f.orders) {
      for (const auto& a : f.algos) {
        for (double eps : f.eps_list) {
          for (uint64_t p : f.workers_list) {
            experiment_config c;
            c.kind = parse_algo(a);
            c.epsilon = eps;
            c.data = {f.n, f.u, zipf, parse_order(ord), seed};
            c.workers = p;
            c.nodes = f.nodes;
            c.chunks = f.chunks;
            c.seed = seed;
            c.gk = parse_gk_mode(f.gk_mode);
            if (!f.phis.empty()) c.phis = f.phis;
            c.validate();
            grid.push_back(c);
          }
        }
      }
    }
  }
  std::ofstream csv(f.out, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot open " + f.out + " for writing");
  const sweep_result r = sweep(grid);
  write_csv_header(csv);
  for (const auto& m : r.runs) write_rows(csv, rows_of(m));
  csv.close();
  if (!csv) throw std::runtime_error("failed writing " + f.out);
  write_ratio_table(std::cout, r.ratios);
  return 0;
}

int cmd_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  write_aggregate(std::cout, aggregate(read_csv(in)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed quantile summaries: build, merge and measure"};
  app.name("dqes");
  app.require_subcommand(1);

  gen_flags gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a dataset file");
  add_data_flags(gen_cmd, gen.data);
  gen_cmd->get_option("--n")->required();
  gen_cmd->add_option("--seed", gen.data.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output path")->required();
  gen_cmd->add_flag("--text", gen.text, "Write one decimal value per line");

  run_flags run;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment and print CSV rows");
  run_cmd->add_option("--algo", run.algo, "gk, sampling, qdigest, fastqdigest or rms")->required();
  run_cmd->add_option("--eps", run.eps, "Error parameter in (0,1)")->required();
  run_cmd->add_option("--workers", run.workers, "Workers per node")->capture_default_str();
  run_cmd->add_option("--nodes", run.nodes, "Leaves of the node tree (power of two)")->capture_default_str();
  run_cmd->add_option("--chunks", run.chunks, "Number of data chunks")->capture_default_str();
  auto* data_opt = run_cmd->add_option("--data", run.data_path, "Dataset file (binary or text)");
  add_data_flags(run_cmd, run.data);
  data_opt->excludes(run_cmd->get_option("--n"))->excludes(run_cmd->get_option("--u"));
  run_cmd->add_option("--seed", run.data.seed, "Seed for data and randomized summaries")->capture_default_str();
  run_cmd->add_option("--phis", run.phis, "Comma-separated quantiles")->delimiter(',');
  run_cmd->add_option("--gk-mode", run.gk_mode, "classic or mixed")->capture_default_str();
  run_cmd->add_flag("--parallel", run.parallel, "Build worker summaries on threads");
  run_cmd->add_flag("--verbose", run.verbose, "Print the transmission log to stderr");

  sweep_flags sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a grid of experiments into one CSV");
  sweep_cmd->add_option("--algos", sw.algos, "Comma-separated algorithms")->delimiter(',')->required();
  sweep_cmd->add_option("--eps-list", sw.eps_list, "Comma-separated epsilons")->delimiter(',')->required();
  sweep_cmd->add_option("--workers-list", sw.workers_list, "Comma-separated worker counts")->delimiter(',');
  sweep_cmd->add_option("--zipf-list", sw.zipf_list, "Comma-separated Zipf exponents")->delimiter(',');
  sweep_cmd->add_option("--orders", sw.orders, "Comma-separated orders")->delimiter(',');
  sweep_cmd->add_option("--n", sw.n, "Number of items")->capture_default_str();
  sweep_cmd->add_option("--u", sw.u, "Universe size")->capture_default_str();
  sweep_cmd->add_option("--seed", sw.seed, "Seed")->capture_default_str();
  sweep_cmd->add_option("--nodes", sw.nodes, "Leaves of the node tree")->capture_default_str();
  sweep_cmd->add_option("--chunks", sw.chunks, "Number of data chunks")->capture_default_str();
  sweep_cmd->add_option("--phis", sw.phis, "Comma-separated quantiles")->delimiter(',');
  sweep_cmd->add_option("--gk-mode", sw.gk_mode, "classic or mixed")->capture_default_str();
  sweep_cmd->add_option("--out", sw.out, "CSV output path")->required();

  std::string report_path;
  auto* report_cmd = app.add_subcommand("report", "Aggregate a result CSV per algorithm and epsilon");
  report_cmd->add_option("csv", report_path, "Result CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen_cmd) return cmd_gen(gen);
    if (*run_cmd) return cmd_run(run);
    if (*sweep_cmd) return cmd_sweep(sw);
    if (*report_cmd) return cmd_report(report_path);
  } catch (const std::exception& e) {
    std::cerr << "dqes: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
