#pragma once

// Named-array container used by the lookup-table and mixture-component files.
//
// Layout (all integers and floats little-endian):
//   bytes [0, 8)    magic, 8 ASCII characters
//   bytes [8, 16)   uint64 header length H
//   bytes [16, 16+H) UTF-8 JSON header
//   then the float64 payloads back to back.
// The header carries free-form metadata plus an "arrays" list whose entries
// give name, shape, dtype ("float64"), order ("F", column-major) and the
// byte offset of each payload from the end of the header.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace vswir {

struct NamedArray {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;
};

struct Container {
  std::string magic;
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedArray> arrays;

  const NamedArray& get(const std::string& name) const;
};

void write_container(const std::filesystem::path& path, const Container& c);
Container read_container(const std::filesystem::path& path, const std::string& expected_magic);

/// Raw row-major float64 matrix, no header.
void write_matrix_bin(const std::filesystem::path& path, const double* data, std::size_t count);
std::vector<double> read_matrix_bin(const std::filesystem::path& path, std::size_t expected_count);

}  // namespace vswir
