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


#include "dqes/summary.hpp"

#include <utility>

#include "dqes/errors.hpp"

namespace dqes {

namespace {

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

summary::impl make_impl(const summary_params& p) {
  p.validate();
  switch (p.kind) {
    case algo::gk:
      return gk_summary(p.epsilon, p.gk);
    case algo::sampling:
      return sampling_summary({p.epsilon, p.k, p.total_n}, p.seed);
    case algo::qdigest:
      return q_digest(p.epsilon, p.u, qd_variant::batch);
    case algo::fastqdigest:
      return q_digest(p.epsilon, p.u, qd_variant::fast);
    case algo::rms:
      return rms_summary(p.epsilon, p.seed);
  }
  throw config_error("unknown algorithm");
}

}  // namespace

void summary_params::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw config_error("epsilon must lie in (0,1)");
  if (kind == algo::rms && epsilon >= 0.5) throw config_error("rms needs epsilon below 1/2");
  if (kind == algo::sampling && (k < 1 || total_n < 1)) throw config_error("sampling needs k >= 1 and n >= 1");
}

summary::summary(const summary_params& params) : impl_(make_impl(params)) {}

summary::summary(impl inner) : impl_(std::move(inner)) {}

algo summary::kind() const {
  return std::visit(overloaded{
                        [](const gk_summary&) { return algo::gk; },
                        [](const sampling_summary&) { return algo::sampling; },
                        [](const q_digest& q) { return q.variant() == qd_variant::fast ? algo::fastqdigest : algo::qdigest; },
                        [](const rms_summary&) { return algo::rms; },
                    },
                    impl_);
}

double summary::epsilon() const {
  return std::visit([](const auto& s) { return s.epsilon(); }, impl_);
}

uint64_t summary::n() const {
  return std::visit([](const auto& s) { return s.n(); }, impl_);
}

void summary::update(value_t v) {
  if (finalized_) throw state_error("cannot update a finalized summary");
  std::visit([v](auto& s) { s.update(v); }, impl_);
}

void summary::merge(summary&& other) {
  if (kind() != other.kind()) {
    throw merge_error("cannot merge " + to_string(other.kind()) + " into " + to_string(kind()));
  }
  if (epsilon() != other.epsilon()) throw merge_error("summaries have different epsilons");
  if (finalized_ || other.finalized_) throw state_error("cannot merge a finalized summary");
  std::visit(
      [&other](auto& s) {
        using T = std::decay_t<decltype(s)>;
        s.merge(std::move(std::get<T>(other.impl_)));
      },
      impl_);
}

void summary::finalize() {
  if (finalized_) return;
  std::visit(overloaded{
                 [](sampling_summary& s) { s.rank(); },
                 [](rms_summary& s) { s.finalize(); },
                 [](auto&) {},
             },
             impl_);
  finalized_ = true;
}

value_t summary::query(double phi) {
  const algo a = kind();
  if (a == algo::sampling || a == algo::rms) finalize();
  return std::visit([phi](auto& s) { return s.get_quantile(phi); }, impl_);
}

bytes summary::serialize() const {
  return std::visit([](const auto& s) { return s.serialize(); }, impl_);
}

summary summary::deserialize(const uint8_t* data, std::size_t len) {
  byte_reader r(data, len);
  const wire_header h = wire_header::read(r);
  switch (h.tag) {
    case algo::gk:
      return summary(gk_summary::deserialize(data, len));
    case algo::sampling:
      return summary(sampling_summary::deserialize(data, len));
    case algo::qdigest:
    case algo::fastqdigest:
      return summary(q_digest::deserialize(data, len));
    case algo::rms:
      return summary(rms_summary::deserialize(data, len));
  }
  throw format_error("unknown algorithm tag", 5);
}

}  // namespace dqes
