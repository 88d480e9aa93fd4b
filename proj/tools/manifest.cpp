#include "manifest.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "ratedev/csv.hpp"

#ifndef RATEDEV_VERSION
#define RATEDEV_VERSION "dev"
#endif

namespace ratedev::cli {

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 init failed");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::string hex;
  char byte[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

void RunManifest::add_input(const std::string& path) {
  inputs.push_back({{"path", path}, {"sha256", sha256_file(path)}});
}

nlohmann::json RunManifest::to_json() const {
  return {{"tool", "ratedev"},
          {"version", RATEDEV_VERSION},
          {"command", command},
          {"args", args},
          {"original_args", original_args},
          {"config", config},
          {"seeds", seeds},
          {"inputs", inputs},
          {"summary", summary},
          {"duration_seconds", duration_seconds}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.args = j.at("args").get<std::vector<std::string>>();
  if (j.contains("original_args")) m.original_args = j["original_args"].get<std::vector<std::string>>();
  if (j.contains("config")) m.config = j["config"];
  if (j.contains("seeds")) m.seeds = j["seeds"];
  if (j.contains("inputs")) m.inputs = j["inputs"];
  if (j.contains("summary")) m.summary = j["summary"];
  if (j.contains("duration_seconds")) m.duration_seconds = j["duration_seconds"].get<double>();
  return m;
}

}  // namespace ratedev::cli
