// Copyright 2026 The survcl Authors.
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

#include "survcl/io/binary.hpp"

#include "survcl/error.hpp"

#include <bit>
#include <cstring>

namespace survcl::io {

namespace {

template <typename U>
void encode_le(U v, unsigned char* out) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}

template <typename U>
U decode_le(const unsigned char* in) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(in[i]) << (8 * i);
  return v;
}

}  // namespace

BinaryWriter::BinaryWriter(const std::string& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw DataError(path + ": cannot open for writing");
}

void BinaryWriter::bytes(const void* data, std::size_t n) {
  out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out_) throw DataError(path_ + ": write failed");
}

void BinaryWriter::u32(std::uint32_t v) {
  unsigned char buf[4];
  encode_le(v, buf);
  bytes(buf, 4);
}

void BinaryWriter::u64(std::uint64_t v) {
  unsigned char buf[8];
  encode_le(v, buf);
  bytes(buf, 8);
}

void BinaryWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::str(const std::string& s) {
  u32(static_cast<std::uint32_t>(s.size()));
  bytes(s.data(), s.size());
}

void BinaryWriter::close() {
  out_.close();
  if (!out_) throw DataError(path_ + ": close failed");
}

BinaryReader::BinaryReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw DataError(path + ": cannot open for reading");
}

void BinaryReader::bytes(void* data, std::size_t n, const char* field) {
  in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) {
    throw DataError(path_ + ": truncated while reading '" + field + "'");
  }
}

std::uint8_t BinaryReader::u8(const char* field) {
  std::uint8_t v = 0;
  bytes(&v, 1, field);
  return v;
}

std::uint32_t BinaryReader::u32(const char* field) {
  unsigned char buf[4];
  bytes(buf, 4, field);
  return decode_le<std::uint32_t>(buf);
}

std::uint64_t BinaryReader::u64(const char* field) {
  unsigned char buf[8];
  bytes(buf, 8, field);
  return decode_le<std::uint64_t>(buf);
}

float BinaryReader::f32(const char* field) { return std::bit_cast<float>(u32(field)); }
double BinaryReader::f64(const char* field) { return std::bit_cast<double>(u64(field)); }

std::string BinaryReader::str(const char* field, std::size_t max_len) {
  const std::uint32_t n = u32(field);
  if (n > max_len) throw DataError(path_ + ": implausible length for '" + field + "'");
  std::string s(n, '\0');
  bytes(s.data(), n, field);
  return s;
}

bool BinaryReader::at_end() { return in_.peek() == std::ifstream::traits_type::eof(); }

}  // namespace survcl::io
