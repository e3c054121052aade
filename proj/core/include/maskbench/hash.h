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

#ifndef MASKBENCH_HASH_H_
#define MASKBENCH_HASH_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace maskbench {

// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

// First 8 bytes of SHA-256(data), big-endian. Used to derive stable seeds.
std::uint64_t sha256_u64(std::string_view data);

}  // namespace maskbench

#endif  // MASKBENCH_HASH_H_
