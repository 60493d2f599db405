#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nsbvar/config.hpp"

namespace nsbvar::cli {

struct RunContext {
  std::string command;
  KeyValueConfig config;             // file entries, then --set overrides, then --seed
  std::filesystem::path config_dir;  // relative input paths resolve against this
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  std::vector<std::string> outputs;  // file names written under out_dir, in order

  std::string config_hash() const { return config.hash(); }
  std::filesystem::path input_path(const std::string& key) const;
  // Opens out_dir/name for writing and records it for the manifest.
  std::filesystem::path output(const std::string& name);
};

void cmd_fit_two_step(RunContext& ctx);
void cmd_fit_pca(RunContext& ctx);
void cmd_fit_kalman(RunContext& ctx);
void cmd_bvar(RunContext& ctx);
void cmd_irf(RunContext& ctx);
void cmd_sign_irf(RunContext& ctx);
void cmd_evaluate(RunContext& ctx);
void cmd_describe(RunContext& ctx);

// config.txt (the effective configuration) and manifest.txt with the size and
// FNV-1a hash of every output.
void write_manifest(RunContext& ctx);

}  // namespace nsbvar::cli
