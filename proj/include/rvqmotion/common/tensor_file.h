#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace rvqmotion {

// Binary container shared by model checkpoints and classifiers,
// little-endian:
//   8 bytes   magic
//   uint32    format version
//   uint64    header length L
//   L bytes   UTF-8 JSON header; its "tensors" entry lists
//             [{"name", "rows", "cols"}] in storage order
//   tensors   float64, row-major, in table order
//   8 bytes   end marker "RVQMEND\0"
using FileMagic = std::array<char, 8>;

struct NamedTensor {
  std::string name;
  Eigen::MatrixXd value;
};

struct TensorFile {
  nlohmann::json header;
  std::map<std::string, Eigen::MatrixXd> tensors;

  // Throws ParseError when absent, StructuralError on a shape mismatch.
  const Eigen::MatrixXd& tensor(const std::string& name, Eigen::Index rows, Eigen::Index cols) const;
};

// Writes through a temporary file and renames it into place.
void write_tensor_file(const std::filesystem::path& path,
                       const FileMagic& magic,
                       uint32_t version,
                       nlohmann::json header,
                       const std::vector<NamedTensor>& tensors);

// ParseError on wrong magic, version mismatch, truncation or a malformed
// header; IoError when the file cannot be opened.
TensorFile read_tensor_file(const std::filesystem::path& path, const FileMagic& magic, uint32_t version);

} // namespace rvqmotion
