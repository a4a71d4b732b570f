#include "dpsb/harness/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace dpsb::bench {

std::uint64_t fnv1a(const void* data, std::size_t n) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ull;
  }
  return hash;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

ArrayStore::ArrayStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void ArrayStore::write(const std::string& name, const Eigen::MatrixXd& array,
                       std::vector<std::size_t> shape) {
  // Row-major on disk; Eigen matrices are column-major in memory.
  std::vector<double> buffer(static_cast<std::size_t>(array.size()));
  std::size_t idx = 0;
  for (Eigen::Index r = 0; r < array.rows(); ++r) {
    for (Eigen::Index c = 0; c < array.cols(); ++c) buffer[idx++] = array(r, c);
  }
  const std::string file = name + ".f64";
  std::ofstream out(dir_ / file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("ArrayStore: cannot write " + file);
  out.write(reinterpret_cast<const char*>(buffer.data()),
            static_cast<std::streamsize>(buffer.size() * sizeof(double)));
  if (!out) throw std::runtime_error("ArrayStore: short write to " + file);

  Entry entry;
  entry.file = file;
  entry.shape = shape.empty()
                    ? std::vector<std::size_t>{static_cast<std::size_t>(array.rows()),
                                               static_cast<std::size_t>(array.cols())}
                    : std::move(shape);
  entry.checksum = hex64(fnv1a(buffer.data(), buffer.size() * sizeof(double)));
  entries_[name] = std::move(entry);
}

Eigen::MatrixXd ArrayStore::read(const std::string& name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) throw std::runtime_error("ArrayStore: unknown array " + name);
  const auto& entry = it->second;
  std::size_t rows = entry.shape.empty() ? 0 : entry.shape.front();
  std::size_t cols = 1;
  for (std::size_t i = 1; i < entry.shape.size(); ++i) cols *= entry.shape[i];

  std::ifstream in(dir_ / entry.file, std::ios::binary);
  if (!in) throw std::runtime_error("ArrayStore: cannot read " + entry.file);
  std::vector<double> buffer(rows * cols);
  in.read(reinterpret_cast<char*>(buffer.data()),
          static_cast<std::streamsize>(buffer.size() * sizeof(double)));
  if (!in) throw std::runtime_error("ArrayStore: short read from " + entry.file);

  Eigen::MatrixXd array(rows, cols);
  std::size_t idx = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) array(r, c) = buffer[idx++];
  }
  return array;
}

std::vector<std::size_t> ArrayStore::shape(const std::string& name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) throw std::runtime_error("ArrayStore: unknown array " + name);
  return it->second.shape;
}

bool ArrayStore::contains(const std::string& name) const { return entries_.count(name) > 0; }

void ArrayStore::save_manifest(const nlohmann::json& extra) const {
  nlohmann::json j;
  j["format_version"] = 1;
  nlohmann::json arrays;
  for (const auto& [name, entry] : entries_) {
    arrays[name] = {{"file", entry.file}, {"shape", entry.shape}, {"checksum", entry.checksum}};
  }
  j["arrays"] = arrays;
  j["meta"] = extra;
  std::ofstream out(dir_ / "manifest.json", std::ios::trunc);
  if (!out) throw std::runtime_error("ArrayStore: cannot write manifest");
  out << j.dump(2) << "\n";
}

void ArrayStore::load_manifest() {
  std::ifstream in(dir_ / "manifest.json");
  if (!in) throw std::runtime_error("ArrayStore: no manifest in " + dir_.string());
  nlohmann::json j;
  in >> j;
  entries_.clear();
  for (const auto& [name, value] : j.at("arrays").items()) {
    Entry entry;
    entry.file = value.at("file").get<std::string>();
    entry.shape = value.at("shape").get<std::vector<std::size_t>>();
    entry.checksum = value.at("checksum").get<std::string>();
    entries_[name] = std::move(entry);
  }
  extra_ = j.value("meta", nlohmann::json::object());
}

void ArrayStore::verify_checksums() const {
  for (const auto& [name, entry] : entries_) {
    std::ifstream in(dir_ / entry.file, std::ios::binary);
    if (!in) throw std::runtime_error("ArrayStore: missing file " + entry.file);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (hex64(fnv1a(bytes.data(), bytes.size())) != entry.checksum) {
      throw std::runtime_error("ArrayStore: checksum mismatch for " + name);
    }
  }
}

}  // namespace dpsb::bench
