#include "vswir/container.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <numeric>

#include "vswir/errors.hpp"

namespace vswir {

static_assert(std::endian::native == std::endian::little, "file formats assume a little-endian host");

const NamedArray& Container::get(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return a;
  }
  throw InputError("container has no array named '" + name + "'");
}

void write_container(const std::filesystem::path& path, const Container& c) {
  if (c.magic.size() != 8) throw InputError("container magic must be 8 characters");
  nlohmann::json header = c.meta;
  header["format_version"] = 1;
  header["arrays"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& a : c.arrays) {
    const std::size_t count =
        std::accumulate(a.shape.begin(), a.shape.end(), std::size_t{1}, std::multiplies<>());
    if (count != a.data.size()) throw InputError("array '" + a.name + "' shape does not match data");
    header["arrays"].push_back(
        {{"name", a.name}, {"shape", a.shape}, {"dtype", "float64"}, {"order", "F"}, {"offset", offset}});
    offset += count * sizeof(double);
  }
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  const std::uint64_t len = text.size();
  out.write(c.magic.data(), 8);
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& a : c.arrays) {
    out.write(reinterpret_cast<const char*>(a.data.data()),
              static_cast<std::streamsize>(a.data.size() * sizeof(double)));
  }
  if (!out) throw InputError("write failed for " + path.string());
}

Container read_container(const std::filesystem::path& path, const std::string& expected_magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  Container c;
  c.magic.resize(8);
  in.read(c.magic.data(), 8);
  if (!in || c.magic != expected_magic) {
    throw InputError(path.string() + ": expected magic '" + expected_magic + "'");
  }
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len > (1ull << 32)) throw InputError(path.string() + ": bad header length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw InputError(path.string() + ": truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": header is not valid JSON: " + e.what());
  }
  const auto data_start = in.tellg();
  for (const auto& entry : header.at("arrays")) {
    NamedArray a;
    a.name = entry.at("name").get<std::string>();
    a.shape = entry.at("shape").get<std::vector<std::size_t>>();
    if (entry.at("dtype") != "float64" || entry.at("order") != "F") {
      throw InputError(path.string() + ": array '" + a.name + "' must be float64, column-major");
    }
    const std::size_t count =
        std::accumulate(a.shape.begin(), a.shape.end(), std::size_t{1}, std::multiplies<>());
    a.data.resize(count);
    in.seekg(data_start + static_cast<std::streamoff>(entry.at("offset").get<std::uint64_t>()));
    in.read(reinterpret_cast<char*>(a.data.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw InputError(path.string() + ": truncated payload for '" + a.name + "'");
    c.arrays.push_back(std::move(a));
  }
  header.erase("arrays");
  c.meta = std::move(header);
  return c;
}

void write_matrix_bin(const std::filesystem::path& path, const double* data, std::size_t count) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  if (!out) throw InputError("write failed for " + path.string());
}

std::vector<double> read_matrix_bin(const std::filesystem::path& path, std::size_t expected_count) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw InputError("cannot open " + path.string());
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != expected_count * sizeof(double)) {
    throw InputError(path.string() + ": expected " + std::to_string(expected_count) + " float64 values");
  }
  in.seekg(0);
  std::vector<double> v(expected_count);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(bytes));
  return v;
}

}  // namespace vswir
