// sst/common.h

// Copyright 2026  The sst Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SST_COMMON_H_
#define SST_COMMON_H_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sst {

// Error taxonomy.
//   ConfigError   - parameters that can never work (rates, dimensions).
//   InputError    - a particular input value is malformed.
//   DataError     - on-disk or dataset contents are inconsistent.
//   InternalError - a broken internal invariant.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InternalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// splitmix64 finalizer; used to derive independent stream seeds.
uint64_t mix64(uint64_t x);
uint64_t hash_combine(uint64_t a, uint64_t b);

// Deterministic RNG.  mt19937_64 plus hand-rolled transforms, so the values
// drawn do not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  // [0, 1)
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // standard normal, Box-Muller
  double gaussian();

  // [0, n), n > 0
  uint64_t randint(uint64_t n) { return eng_() % n; }

  // Fisher-Yates
  template <typename T>
  void shuffle(std::vector<T>* v) {
    for (size_t i = v->size(); i > 1; --i)
      std::swap((*v)[i - 1], (*v)[randint(i)]);
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Little-endian binary stream helpers.  Readers throw DataError with the
// given context string on truncation.
void write_u16(std::ostream& os, uint16_t v);
void write_u32(std::ostream& os, uint32_t v);
void write_u64(std::ostream& os, uint64_t v);
void write_f32(std::ostream& os, float v);
uint16_t read_u16(std::istream& is, const std::string& ctx);
uint32_t read_u32(std::istream& is, const std::string& ctx);
uint64_t read_u64(std::istream& is, const std::string& ctx);
float read_f32(std::istream& is, const std::string& ctx);

}  // namespace sst

#endif  // SST_COMMON_H_
