#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace dpsb::bench {

// Arrays are raw little-endian float64, row-major, one file per array, with
// shapes and FNV-1a checksums recorded in a JSON manifest. A bundle is fully
// reproducible from the seeds stored in the manifest.
class ArrayStore {
 public:
  explicit ArrayStore(std::filesystem::path dir);

  // Row-major write: rows x cols.
  void write(const std::string& name, const Eigen::MatrixXd& array,
             std::vector<std::size_t> shape = {});
  Eigen::MatrixXd read(const std::string& name) const;
  std::vector<std::size_t> shape(const std::string& name) const;
  bool contains(const std::string& name) const;

  void save_manifest(const nlohmann::json& extra) const;
  void load_manifest();
  // Throws when a file's bytes do not match its recorded checksum.
  void verify_checksums() const;
  const nlohmann::json& extra() const { return extra_; }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  struct Entry {
    std::string file;
    std::vector<std::size_t> shape;
    std::string checksum;
  };

  std::filesystem::path dir_;
  std::map<std::string, Entry> entries_;
  nlohmann::json extra_;
};

std::uint64_t fnv1a(const void* data, std::size_t n);

}  // namespace dpsb::bench
