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

#ifndef DQES_ERRORS_HPP_
#define DQES_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dqes {

/// Invalid construction parameters or experiment configuration.
class config_error : public std::invalid_argument {
 public:
  explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Query that cannot be answered (empty summary, phi outside (0,1)).
class query_error : public std::domain_error {
 public:
  explicit query_error(const std::string& what) : std::domain_error(what) {}
};

/// Operation not allowed in the current lifecycle state.
class state_error : public std::logic_error {
 public:
  explicit state_error(const std::string& what) : std::logic_error(what) {}
};

/// Operands of a merge are incompatible.
class merge_error : public std::invalid_argument {
 public:
  explicit merge_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Input value outside the domain an operation accepts.
class value_error : public std::out_of_range {
 public:
  explicit value_error(const std::string& what) : std::out_of_range(what) {}
};

/// Malformed serialized data. Carries the byte offset where decoding failed.
class format_error : public std::runtime_error {
 public:
  format_error(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace dqes

#endif  // DQES_ERRORS_HPP_
