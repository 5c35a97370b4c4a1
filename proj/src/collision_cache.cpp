#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include <unistd.h>

#include "alab/collision_ops.hpp"
#include "alab/errors.hpp"
#include "alab/io.hpp"

namespace alab::collision {

namespace {
constexpr char kMagic[8] = {'A', 'L', 'A', 'B', 'L', 'M', 'A', 'T'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_cache(const std::string& path, const AssembledL& op) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  // Unique per writer so concurrent processes never share a temp file.
  const std::string tmp = path + ".tmp." + std::to_string(::getpid()) + "." +
                          std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw FormatError("cannot write cache file " + path);
    out.write(kMagic, sizeof kMagic);
    io::write_le(out, kVersion);
    io::write_le(out, static_cast<std::uint64_t>(op.matrix.rows()));
    io::write_le(out, static_cast<std::uint64_t>(op.matrix.cols()));
    io::write_le(out, op.grid->hash());
    io::write_le(out, op.kernel.hash());
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = op.matrix;
    io::write_f64s(out, rm.data(), static_cast<std::size_t>(rm.size()));
    if (!out) throw FormatError("short write on cache file " + path);
  }
  std::filesystem::rename(tmp, path);
}

bool load_cache(const std::string& path, const GridPtr& grid, const KernelSpec& kernel,
                AssembledL& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) return false;
  const auto version = io::read_le<std::uint32_t>(in);
  const auto rows = io::read_le<std::uint64_t>(in);
  const auto cols = io::read_le<std::uint64_t>(in);
  const auto ghash = io::read_le<std::uint64_t>(in);
  const auto khash = io::read_le<std::uint64_t>(in);
  if (!in || version != kVersion || rows != grid->size() || cols != grid->size() ||
      ghash != grid->hash() || khash != kernel.hash())
    return false;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(
      static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  io::read_f64s(in, rm.data(), static_cast<std::size_t>(rm.size()));
  if (!in) return false;
  out.matrix = rm;
  return true;
}

}  // namespace alab::collision
