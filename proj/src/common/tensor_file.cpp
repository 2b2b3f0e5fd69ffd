#include "rvqmotion/common/tensor_file.h"

#include <bit>
#include <fstream>

#include "rvqmotion/common/errors.h"

namespace rvqmotion {

static_assert(std::endian::native == std::endian::little, "tensor files assume a little-endian host");

namespace {

using nlohmann::json;
using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr FileMagic kEndMagic = {'R', 'V', 'Q', 'M', 'E', 'N', 'D', '\0'};

void write_raw(std::ostream& out, const void* data, size_t bytes) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

void read_raw(std::istream& in, void* data, size_t bytes, const std::string& what) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
  if (static_cast<size_t>(in.gcount()) != bytes) {
    throw ParseError("file truncated while reading " + what);
  }
}

} // namespace

const Eigen::MatrixXd& TensorFile::tensor(const std::string& name, Eigen::Index rows, Eigen::Index cols) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) {
    throw ParseError("missing tensor " + name);
  }
  if (it->second.rows() != rows || it->second.cols() != cols) {
    throw StructuralError("tensor " + name + " has shape " + std::to_string(it->second.rows()) + "x" +
                          std::to_string(it->second.cols()) + ", expected " + std::to_string(rows) + "x" +
                          std::to_string(cols));
  }
  return it->second;
}

void write_tensor_file(const std::filesystem::path& path,
                       const FileMagic& magic,
                       uint32_t version,
                       json header,
                       const std::vector<NamedTensor>& tensors) {
  json table = json::array();
  for (const auto& t : tensors) {
    table.push_back({{"name", t.name}, {"rows", t.value.rows()}, {"cols", t.value.cols()}});
  }
  header["tensors"] = std::move(table);
  const std::string text = header.dump();

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open " + tmp.string() + " for writing");
    }
    write_raw(out, magic.data(), magic.size());
    write_raw(out, &version, sizeof(version));
    const uint64_t len = text.size();
    write_raw(out, &len, sizeof(len));
    write_raw(out, text.data(), text.size());
    for (const auto& t : tensors) {
      const RowMajor rm = t.value;
      write_raw(out, rm.data(), sizeof(double) * static_cast<size_t>(rm.size()));
    }
    write_raw(out, kEndMagic.data(), kEndMagic.size());
    if (!out) {
      throw IoError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

TensorFile read_tensor_file(const std::filesystem::path& path, const FileMagic& magic, uint32_t version) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  FileMagic got{};
  read_raw(in, got.data(), got.size(), "magic");
  if (got != magic) {
    throw ParseError(path.string() + " has the wrong file type (bad magic)");
  }
  uint32_t v = 0;
  read_raw(in, &v, sizeof(v), "version");
  if (v != version) {
    throw ParseError("format version " + std::to_string(v) + " is not supported (expected " +
                     std::to_string(version) + ")");
  }
  uint64_t len = 0;
  read_raw(in, &len, sizeof(len), "header length");
  if (len > (uint64_t{1} << 32)) {
    throw ParseError("header length is implausible");
  }
  std::string text(len, '\0');
  read_raw(in, text.data(), len, "header");

  TensorFile out;
  try {
    out.header = json::parse(text);
    for (const auto& t : out.header.at("tensors")) {
      const std::string name = t.at("name").get<std::string>();
      const auto rows = t.at("rows").get<Eigen::Index>();
      const auto cols = t.at("cols").get<Eigen::Index>();
      if (rows < 0 || cols < 0 || rows * cols > (Eigen::Index{1} << 31)) {
        throw ParseError("implausible shape for tensor " + name);
      }
      RowMajor rm(rows, cols);
      read_raw(in, rm.data(), sizeof(double) * static_cast<size_t>(rm.size()), "tensor " + name);
      out.tensors[name] = rm;
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed header: ") + e.what());
  }
  FileMagic end{};
  read_raw(in, end.data(), end.size(), "end marker");
  if (end != kEndMagic) {
    throw ParseError("end marker missing or corrupt");
  }
  return out;
}

} // namespace rvqmotion
