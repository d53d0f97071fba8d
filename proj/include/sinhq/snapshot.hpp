#pragma once

#include <string>

#include "sinhq/field.hpp"

namespace sinhq {

// Field snapshot file: 32-byte header (8-byte magic "SINHQF01", u32 version,
// u32 JSON length, 16 zero bytes), then a JSON preamble carrying grid dims,
// spacings and endianness, then raw little-endian float64 site data.
void write_field(const std::string& path, const Field& f);
Field read_field(const std::string& path);

}  // namespace sinhq
