// Copyright 2026 The Casebase Authors.
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

#ifndef CASEBASE_BINARY_IO_H_
#define CASEBASE_BINARY_IO_H_

// Little-endian fixed-width encoding used by checkpoints and snapshots.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "casebase/error.h"

namespace casebase {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream &out) : out_(out) {}

  template <typename T>
  void Put(T value) {
    out_.write(reinterpret_cast<const char *>(&value), sizeof(T));
  }
  void PutBytes(const void *data, size_t size) {
    out_.write(static_cast<const char *>(data), static_cast<std::streamsize>(size));
  }
  void PutString(const std::string &s) {
    Put<uint32_t>(static_cast<uint32_t>(s.size()));
    PutBytes(s.data(), s.size());
  }

 private:
  std::ostream &out_;
};

// Reads from a stream and reports truncation with the byte offset at which
// the read started.
class BinaryReader {
 public:
  BinaryReader(std::istream &in, uint64_t offset = 0) : in_(in), offset_(offset) {}

  template <typename T>
  T Get(const char *what) {
    T value;
    GetBytes(&value, sizeof(T), what);
    return value;
  }
  void GetBytes(void *data, size_t size, const char *what) {
    in_.read(static_cast<char *>(data), static_cast<std::streamsize>(size));
    if (static_cast<size_t>(in_.gcount()) != size) {
      throw Error(ErrorCode::kDataLoss, "truncated " + std::string(what) +
                                            " at offset " + std::to_string(offset_));
    }
    offset_ += size;
  }
  std::string GetString(const char *what, uint32_t max_size = 1u << 20) {
    uint64_t at = offset_;
    uint32_t size = Get<uint32_t>(what);
    if (size > max_size) {
      throw Error(ErrorCode::kDataLoss, "bad " + std::string(what) + " length at offset " +
                                            std::to_string(at));
    }
    std::string s(size, '\0');
    GetBytes(s.data(), size, what);
    return s;
  }
  uint64_t offset() const { return offset_; }

 private:
  std::istream &in_;
  uint64_t offset_;
};

}  // namespace casebase

#endif  // CASEBASE_BINARY_IO_H_
