// Copyright 2026 The maskbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MASKBENCH_TESTS_SUPPORT_FIXTURES_H_
#define MASKBENCH_TESTS_SUPPORT_FIXTURES_H_

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace maskbench::testing {

inline std::string fixture_path(const std::string& name) {
  return std::string(MASKBENCH_FIXTURES) + "/" + name;
}

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name), std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace maskbench::testing

#endif  // MASKBENCH_TESTS_SUPPORT_FIXTURES_H_
