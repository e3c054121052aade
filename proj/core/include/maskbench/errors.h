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

#ifndef MASKBENCH_ERRORS_H_
#define MASKBENCH_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace maskbench {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MASKBENCH_DEFINE_ERROR(Name)   \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

// Ingestion.
MASKBENCH_DEFINE_ERROR(DecodeError);
MASKBENCH_DEFINE_ERROR(EmptyDocument);
MASKBENCH_DEFINE_ERROR(SectionNotFound);
MASKBENCH_DEFINE_ERROR(MalformedDocument);
MASKBENCH_DEFINE_ERROR(TableParseError);

// Lexicon and matcher.
MASKBENCH_DEFINE_ERROR(LexiconError);
MASKBENCH_DEFINE_ERROR(AmbiguousNumber);

// Task construction and benchmark files.
MASKBENCH_DEFINE_ERROR(NotMaskable);
MASKBENCH_DEFINE_ERROR(UnsupportedVersion);

// Gateway.
MASKBENCH_DEFINE_ERROR(TemplateError);
MASKBENCH_DEFINE_ERROR(TransportError);
MASKBENCH_DEFINE_ERROR(ClientError);
MASKBENCH_DEFINE_ERROR(InvalidOutput);
MASKBENCH_DEFINE_ERROR(SchemaError);

// Annotation and evaluation.
MASKBENCH_DEFINE_ERROR(JoinError);
MASKBENCH_DEFINE_ERROR(EmptyEvaluation);

// Configuration.
MASKBENCH_DEFINE_ERROR(ConfigError);

#undef MASKBENCH_DEFINE_ERROR

// Malformed line in a line-delimited record file. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace maskbench

#endif  // MASKBENCH_ERRORS_H_
