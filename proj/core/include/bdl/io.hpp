#pragma once

#include <string>

#include "bdl/datagen.hpp"

namespace bdl {

enum class FileFormat { Binary, Text };

// Binary layout: magic "PKD1", little-endian u32 dim, u64 count, then
// count*dim little-endian f64 values row-major.
// Text layout: one point per line, whitespace-separated decimal values;
// the dimension is inferred from the first line.
//
// Ids are always the row index. Malformed input raises std::runtime_error
// naming the offending row or the expected/actual byte counts; non-finite
// values are rejected.
RawPoints read_points(const std::string& path, FileFormat format);
void write_points(const std::string& path, const RawPoints& points,
                  FileFormat format);

}  // namespace bdl
