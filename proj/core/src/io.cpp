#include "bdl/io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace bdl {

namespace {

constexpr char kMagic[4] = {'P', 'K', 'D', '1'};

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error(msg);
}

void check_finite(double v, std::size_t row, const std::string& path) {
  if (!std::isfinite(v)) {
    fail(path + ": non-finite coordinate at row " + std::to_string(row));
  }
}

RawPoints read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path + ": cannot open");
  in.seekg(0, std::ios::end);
  const std::uint64_t total = static_cast<std::uint64_t>(in.tellg());
  in.seekg(0);

  char magic[4];
  std::uint32_t dim = 0;
  std::uint64_t n = 0;
  if (total < sizeof(magic) + sizeof(dim) + sizeof(n)) {
    fail(path + ": truncated header, " + std::to_string(total) + " bytes");
  }
  in.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) fail(path + ": bad magic");
  in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (dim == 0 || n == 0) fail(path + ": empty dimension or count");

  const std::uint64_t expect = n * dim * sizeof(double);
  const std::uint64_t have = total - (sizeof(magic) + sizeof(dim) + sizeof(n));
  if (have != expect) {
    fail(path + ": payload size mismatch, expected " + std::to_string(expect) +
         " bytes, got " + std::to_string(have));
  }
  RawPoints out;
  out.dim = dim;
  out.coords.resize(n * dim);
  in.read(reinterpret_cast<char*>(out.coords.data()),
          static_cast<std::streamsize>(expect));
  if (!in) fail(path + ": short read");
  for (std::size_t i = 0; i < out.coords.size(); ++i) {
    check_finite(out.coords[i], i / dim, path);
  }
  return out;
}

RawPoints read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path + ": cannot open");
  RawPoints out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::vector<double> vals;
    double v;
    while (ls >> v) vals.push_back(v);
    if (!ls.eof()) {
      fail(path + ": unparsable value at row " + std::to_string(row));
    }
    if (out.dim == 0) {
      out.dim = static_cast<std::uint32_t>(vals.size());
      if (out.dim == 0) fail(path + ": empty first row");
    }
    if (vals.size() != out.dim) {
      fail(path + ": row " + std::to_string(row) + " has " +
           std::to_string(vals.size()) + " values, expected " +
           std::to_string(out.dim));
    }
    for (double c : vals) check_finite(c, row, path);
    out.coords.insert(out.coords.end(), vals.begin(), vals.end());
    ++row;
  }
  if (row == 0) fail(path + ": no points");
  return out;
}

}  // namespace

RawPoints read_points(const std::string& path, FileFormat format) {
  return format == FileFormat::Binary ? read_binary(path) : read_text(path);
}

void write_points(const std::string& path, const RawPoints& points,
                  FileFormat format) {
  if (format == FileFormat::Binary) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(path + ": cannot open for writing");
    const std::uint32_t dim = points.dim;
    const std::uint64_t n = points.size();
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(reinterpret_cast<const char*>(points.coords.data()),
              static_cast<std::streamsize>(points.coords.size() *
                                           sizeof(double)));
    if (!out) fail(path + ": write failed");
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(path + ": cannot open for writing");
  out.precision(std::numeric_limits<double>::max_digits10);
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint32_t c = 0; c < points.dim; ++c) {
      if (c) out << ' ';
      out << points.at(i, c);
    }
    out << '\n';
  }
  if (!out) fail(path + ": write failed");
}

}  // namespace bdl
