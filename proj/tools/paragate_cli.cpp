// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
//
// Batch runner over the paragate C API: each --config names a scenario file
// whose own "command" field selects what runs.  Multiple configs run
// concurrently (one context per scenario); summaries print in argument
// order.  Exit code 0 on success, 2 on validation errors, 3 on numerical
// failures.
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "paragate.h"

namespace {

struct Job {
  std::string path;
  int code = 0;
  std::string summary;
  std::string error;
};

void run_job(Job& job, unsigned long long seed, int threads, const std::string& out_dir) {
  pg_context* ctx = pg_create();
  if (!ctx) {
    job.code = 3;
    job.error = "context allocation failed";
    return;
  }
  pg_set_seed(ctx, seed);
  pg_set_threads(ctx, threads);
  pg_set_output_dir(ctx, out_dir.c_str());
  int rc = pg_load_config_file(ctx, job.path.c_str());
  if (rc == PG_OK) rc = pg_run_command(ctx, nullptr);
  if (rc != PG_OK) {
    job.code = rc == PG_ERR_NUMERIC ? 3 : 2;
    job.error = pg_last_error(ctx);
  } else {
    job.summary = pg_result_text(ctx);
  }
  pg_destroy(ctx);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("paragate ") + pg_version() +
               " — pulse-level simulation of parametrically driven transmon rings"};
  std::vector<std::string> configs;
  unsigned long long seed = 1;
  int threads = 1;
  std::string out_dir = ".";
  app.add_option("--config", configs, "Scenario config file (repeat to run several)")
      ->required();
  app.add_option("--seed", seed, "Deterministic run seed");
  app.add_option("--threads", threads, "Worker threads per scenario")
      ->envname("PARAGATE_THREADS")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::vector<Job> jobs(configs.size());
  for (size_t i = 0; i < configs.size(); ++i) jobs[i].path = configs[i];

  if (jobs.size() == 1) {
    run_job(jobs[0], seed, threads, out_dir);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(jobs.size());
    for (Job& job : jobs)
      workers.emplace_back([&job, seed, threads, &out_dir] {
        run_job(job, seed, threads, out_dir);
      });
    for (std::thread& w : workers) w.join();
  }

  int exit_code = 0;
  for (const Job& job : jobs) {
    if (job.code == 0) {
      std::fputs(job.summary.c_str(), stdout);
      std::fputc('\n', stdout);
    } else {
      std::fprintf(stderr, "%s: error: %s\n", job.path.c_str(), job.error.c_str());
      exit_code = std::max(exit_code, job.code);
    }
  }
  return exit_code;
}
