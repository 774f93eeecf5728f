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

#include "dqes/wire.hpp"

namespace dqes {

namespace {
constexpr char magic[4] = {'D', 'Q', 'E', 'S'};
}

std::string to_string(algo a) {
  switch (a) {
    case algo::gk: return "gk";
    case algo::sampling: return "sampling";
    case algo::qdigest: return "qdigest";
    case algo::fastqdigest: return "fastqdigest";
    case algo::rms: return "rms";
  }
  return "unknown";
}

algo parse_algo(const std::string& name) {
  if (name == "gk") return algo::gk;
  if (name == "sampling") return algo::sampling;
  if (name == "qdigest") return algo::qdigest;
  if (name == "fastqdigest") return algo::fastqdigest;
  if (name == "rms") return algo::rms;
  throw config_error("unknown algorithm '" + name + "'");
}

void wire_header::write(byte_writer& w) const {
  w.raw(magic, sizeof magic);
  w.u8(version);
  w.u8(static_cast<uint8_t>(tag));
  w.f64(epsilon);
  w.u64(n);
}

wire_header wire_header::read(byte_reader& r) {
  char m[4];
  r.raw(m, sizeof m);
  if (std::memcmp(m, magic, sizeof m) != 0) throw format_error("bad magic", 0);
  const uint8_t ver = r.u8();
  if (ver != version) throw format_error("unsupported version " + std::to_string(ver), 4);
  const uint8_t tag = r.u8();
  if (tag < 1 || tag > 5) throw format_error("unknown algorithm tag " + std::to_string(tag), 5);
  wire_header h;
  h.tag = static_cast<algo>(tag);
  h.epsilon = r.f64();
  if (!(h.epsilon > 0.0 && h.epsilon < 1.0)) throw format_error("epsilon outside (0,1)", 6);
  h.n = r.u64();
  return h;
}

}  // namespace dqes
