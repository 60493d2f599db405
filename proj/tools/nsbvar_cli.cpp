#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "nsbvar/error.hpp"

namespace fs = std::filesystem;
using namespace nsbvar;

namespace {

struct Flags {
  std::string config;
  std::string out = "run";
  std::vector<std::string> sets;
  long long seed = -1;
};

cli::RunContext make_context(const std::string& command, const Flags& f) {
  cli::RunContext ctx;
  ctx.command = command;
  if (!f.config.empty()) {
    if (!fs::exists(f.config)) throw ArgumentError(fmt::format("config file '{}' does not exist", f.config));
    ctx.config = KeyValueConfig::load(f.config);
    ctx.config_dir = fs::path(f.config).parent_path();
  }
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ArgumentError(fmt::format("--set expects key=value, got '{}'", s));
    ctx.config.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  if (f.seed >= 0) ctx.config.set("seed", std::to_string(f.seed));
  const long long seed = ctx.config.get_int("seed", 1);
  if (seed < 0) throw ArgumentError("seed must be non-negative");
  ctx.seed = static_cast<std::uint64_t>(seed);
  ctx.out_dir = f.out;
  fs::create_directories(ctx.out_dir);
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nelson-Siegel factor models and Bayesian VARs for yield curves"};
  app.require_subcommand(1);
  Flags flags;

  const std::map<std::string, std::pair<std::string, std::function<void(cli::RunContext&)>>> commands = {
      {"fit-two-step", {"per-date factor regression, then a VAR on the factors", cli::cmd_fit_two_step}},
      {"fit-pca", {"principal components of the training yields", cli::cmd_fit_pca}},
      {"fit-kalman", {"one-step state-space maximum likelihood", cli::cmd_fit_kalman}},
      {"bvar", {"Bayesian VAR on the factors: draws and predictive tables", cli::cmd_bvar}},
      {"irf", {"recursive (Cholesky) impulse responses", cli::cmd_irf}},
      {"sign-irf", {"sign-restricted impulse responses", cli::cmd_sign_irf}},
      {"evaluate", {"out-of-sample MSFE by horizon and method", cli::cmd_evaluate}},
      {"describe", {"descriptive statistics of the panel", cli::cmd_describe}},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("-c,--config", flags.config, "key = value configuration file");
    sub->add_option("-s,--seed", flags.seed, "random seed (overrides the config key 'seed')");
    sub->add_option("-o,--out", flags.out, "output directory")->capture_default_str();
    sub->add_option("--set", flags.sets, "override a config entry, key=value (repeatable)");
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    try {
      cli::RunContext ctx = make_context(name, flags);
      commands.at(name).second(ctx);
      cli::write_manifest(ctx);
      return 0;
    } catch (const ArgumentError& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 2;
    } catch (const NumericError& e) {
      std::fprintf(stderr, "numeric error: %s\n", e.what());
      return 3;
    } catch (const ResultError& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 3;
    } catch (const fs::filesystem_error& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 2;
    }
  }
  return 2;
}
