// sst/common.cc

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

#include "sst/common.h"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

namespace sst {

uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t hash_combine(uint64_t a, uint64_t b) {
  return mix64(a ^ (mix64(b) + 0x9e3779b97f4a7c15ULL));
}

double Rng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  while (u1 == 0.0) u1 = uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

namespace {

template <typename T>
void write_le(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  for (size_t i = 0; i < sizeof(T); ++i)
    buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& is, const std::string& ctx) {
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!is || is.gcount() != static_cast<std::streamsize>(sizeof(T)))
    throw DataError("truncated read: " + ctx);
  T v = 0;
  for (size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<T>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void write_u16(std::ostream& os, uint16_t v) { write_le<uint16_t>(os, v); }
void write_u32(std::ostream& os, uint32_t v) { write_le<uint32_t>(os, v); }
void write_u64(std::ostream& os, uint64_t v) { write_le<uint64_t>(os, v); }

void write_f32(std::ostream& os, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_le<uint32_t>(os, bits);
}

uint16_t read_u16(std::istream& is, const std::string& ctx) {
  return read_le<uint16_t>(is, ctx);
}
uint32_t read_u32(std::istream& is, const std::string& ctx) {
  return read_le<uint32_t>(is, ctx);
}
uint64_t read_u64(std::istream& is, const std::string& ctx) {
  return read_le<uint64_t>(is, ctx);
}

float read_f32(std::istream& is, const std::string& ctx) {
  uint32_t bits = read_le<uint32_t>(is, ctx);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace sst
