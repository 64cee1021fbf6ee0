#include "npy.hpp"

#include <bit>
#include <fstream>
#include <string>

#include "csiae/errors.hpp"

namespace csiae::cli {

void write_npy(const std::filesystem::path& path, std::span<const std::uint64_t> shape,
               std::span<const double> values) {
  static_assert(std::endian::native == std::endian::little, "npy writer assumes little-endian");
  std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    dict += std::to_string(shape[i]);
    if (i + 1 < shape.size() || shape.size() == 1) dict += ", ";
  }
  dict += "), }";
  const std::size_t prefix = 10;
  std::size_t total = prefix + dict.size() + 1;
  dict.append((64 - total % 64) % 64, ' ');
  dict.push_back('\n');

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write("\x93NUMPY\x01\x00", 8);
  const auto len = static_cast<std::uint16_t>(dict.size());
  const char len_bytes[2] = {static_cast<char>(len & 0xff), static_cast<char>(len >> 8)};
  out.write(len_bytes, 2);
  out.write(dict.data(), static_cast<std::streamsize>(dict.size()));
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw FormatError("failed writing " + path.string());
}

}  // namespace csiae::cli
