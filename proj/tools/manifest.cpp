#include "manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>

#include "json.hpp"

#include "hgnids/error.hpp"

namespace hgnids::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kToolVersion = "0.1.0";

}  // namespace

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw InvariantError("sha256: digest init failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 15]);
  }
  return out;
}

RunManifest::RunManifest(std::string command, fs::path out_dir, std::uint64_t seed, std::string config_snapshot,
                         std::vector<std::string> argv)
    : command_(std::move(command)),
      out_dir_(std::move(out_dir)),
      seed_(seed),
      config_(std::move(config_snapshot)),
      argv_(std::move(argv)) {}

void RunManifest::add_input(const fs::path& path) { inputs_.push_back({path.string(), sha256_file(path)}); }

void RunManifest::begin() {
  fs::create_directories(out_dir_);
  write("running", {});
}

void RunManifest::finish_ok() { write("ok", {}); }

void RunManifest::finish_failed(const std::string& message) { write("failed", message); }

void RunManifest::write(const std::string& status, const std::string& error) const {
  nlohmann::ordered_json j;
  j["tool"] = "hgnids";
  j["version"] = kToolVersion;
  j["command"] = command_;
  j["argv"] = argv_;
  j["seed"] = seed_;
  j["config"] = config_;
  auto inputs = nlohmann::ordered_json::array();
  for (const auto& in : inputs_) inputs.push_back({{"path", in.path}, {"sha256", in.sha256}});
  j["inputs"] = inputs;

  std::vector<fs::path> files;
  if (fs::exists(out_dir_)) {
    for (const auto& e : fs::recursive_directory_iterator(out_dir_)) {
      if (!e.is_regular_file()) continue;
      const fs::path rel = fs::relative(e.path(), out_dir_);
      if (rel == kFileName) continue;
      files.push_back(rel);
    }
  }
  std::sort(files.begin(), files.end());
  auto outputs = nlohmann::ordered_json::array();
  if (status != "running") {
    for (const auto& f : files) {
      outputs.push_back({{"path", f.generic_string()}, {"sha256", sha256_file(out_dir_ / f)}});
    }
  }
  j["outputs"] = outputs;
  j["status"] = status;
  if (!error.empty()) j["error"] = error;

  const fs::path tmp = out_dir_ / (std::string(kFileName) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
  }
  fs::rename(tmp, out_dir_ / kFileName);
}

}  // namespace hgnids::cli
