// Command-line front end. Everything goes through the C interface.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ctlab/ctlab.h"

namespace {

// Process exit codes.
constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitInvalidRun = 4;

int exit_code(ctlab_status s) {
  switch (s) {
    case CTLAB_OK: return kExitOk;
    case CTLAB_IO: return kExitIo;
    case CTLAB_SOLVER_FAILURE:
    case CTLAB_HORIZON_TOO_SMALL:
    case CTLAB_INTERNAL: return kExitSolver;
    default: return kExitValidation;
  }
}

struct Options {
  std::string config;
  std::string out;
  unsigned long long seed = 0;
  bool seed_set = false;
  unsigned threads = 1;
  std::string formats = "json,csv,svg";
};

int run(const std::string& preset, const Options& opt) {
  ctlab_config* cfg = nullptr;
  ctlab_status st = ctlab_config_load(opt.config.c_str(), &cfg);
  if (st == CTLAB_OK) st = ctlab_config_apply_preset(cfg, preset.c_str());
  if (st == CTLAB_OK && opt.seed_set) st = ctlab_config_set_seed(cfg, opt.seed);
  if (st != CTLAB_OK) {
    std::fprintf(stderr, "ctlab: %s: %s\n", ctlab_status_name(st), ctlab_last_error());
    ctlab_config_destroy(cfg);
    return exit_code(st);
  }

  std::string out_dir = opt.out;
  if (out_dir.empty()) {
    const char* env = std::getenv("CTLAB_OUT_DIR");
    out_dir = env && *env ? env : "ctlab_out";
  }

  const std::size_t count = ctlab_config_count(cfg);
  std::vector<int> codes(count, kExitOk);
  std::atomic<std::size_t> next{0};
  std::mutex io;

  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      const char* name = "";
      ctlab_config_name(cfg, i, &name);
      ctlab_report* rep = nullptr;
      const ctlab_status rs = ctlab_run(cfg, i, &rep);
      std::lock_guard<std::mutex> lock(io);
      if (rs != CTLAB_OK) {
        std::fprintf(stderr, "ctlab: scenario '%s': %s: %s\n", name, ctlab_status_name(rs), ctlab_last_error());
        codes[i] = exit_code(rs);
        continue;
      }
      const ctlab_status es = ctlab_report_emit(rep, out_dir.c_str(), opt.formats.c_str());
      if (es != CTLAB_OK) {
        std::fprintf(stderr, "ctlab: scenario '%s': %s\n", name, ctlab_last_error());
        codes[i] = exit_code(es);
      } else if (!ctlab_report_valid(rep)) {
        codes[i] = kExitInvalidRun;
      }
      std::printf("%s: %s, %zu rows, %zu estimator errors, %zu failed assertions\n", name,
                  ctlab_report_valid(rep) ? "valid" : "INVALID (guard tripped)", ctlab_report_row_count(rep),
                  ctlab_report_error_count(rep), ctlab_report_failed_assertions(rep));
      std::fflush(stdout);
      ctlab_report_destroy(rep);
    }
  };

  const unsigned n_threads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(count)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  ctlab_config_destroy(cfg);
  return *std::max_element(codes.begin(), codes.end());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dispersive-estimate experiments for charge-transfer Hamiltonians"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ctlab_version());

  Options opt;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"bound-states", "Bound states of each potential"},
      {"propagate", "Propagate the data and report norm drift and guards"},
      {"verify-decay", "Dispersive and local decay estimates"},
      {"verify-strichartz", "Homogeneous and inhomogeneous Strichartz ratios"},
      {"verify-ac", "Channel bases, wave-operator tails and asymptotic completeness residuals"},
      {"matrix-diagnose", "Admissibility, stability and frame diagnostics for matrix potentials"},
      {"oracle-compare", "Split-step propagation against the dense reference solver"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory (default: $CTLAB_OUT_DIR or ./ctlab_out)");
    sub->add_option("--seed", opt.seed, "Override every scenario seed")->each([&](const std::string&) {
      opt.seed_set = true;
    });
    sub->add_option("--threads", opt.threads, "Scenarios run concurrently")->check(CLI::PositiveNumber);
    sub->add_option("--formats", opt.formats, "Comma list of json, csv, svg");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }
  for (const auto* sub : app.get_subcommands()) return run(sub->get_name(), opt);
  return kExitValidation;
}
