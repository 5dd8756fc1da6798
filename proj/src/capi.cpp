// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#include "paragate.h"

#include <exception>
#include <new>
#include <string>

#include "paragate/config.hpp"
#include "paragate/scenarios.hpp"

struct pg_context {
  paragate::ScenarioConfig config;
  bool has_config = false;
  paragate::RunOptions options;
  std::string last_error;
  std::string result_json;
  std::string result_text;
};

namespace {

int fail(pg_context* ctx, int code, const std::string& msg) {
  if (ctx) ctx->last_error = msg;
  return code;
}

// Translate exceptions escaping the C++ core into error codes; nothing may
// cross the C boundary as an exception.
template <typename Fn>
int guarded(pg_context* ctx, Fn&& fn) {
  if (!ctx) return PG_ERR_INVALID;
  try {
    fn();
    ctx->last_error.clear();
    return PG_OK;
  } catch (const paragate::Error& e) {
    return fail(ctx,
                e.kind() == paragate::ErrorKind::numeric ? PG_ERR_NUMERIC : PG_ERR_CONFIG,
                e.what());
  } catch (const std::exception& e) {
    return fail(ctx, PG_ERR_NUMERIC, e.what());
  } catch (...) {
    return fail(ctx, PG_ERR_NUMERIC, "unknown failure");
  }
}

}  // namespace

extern "C" {

pg_context* pg_create(void) { return new (std::nothrow) pg_context(); }

void pg_destroy(pg_context* ctx) { delete ctx; }

int pg_load_config_file(pg_context* ctx, const char* path) {
  if (!ctx) return PG_ERR_INVALID;
  if (!path) return fail(ctx, PG_ERR_INVALID, "path is null");
  return guarded(ctx, [&] {
    ctx->config = paragate::load_config(path);
    ctx->has_config = true;
  });
}

int pg_load_config_json(pg_context* ctx, const char* json_text) {
  if (!ctx) return PG_ERR_INVALID;
  if (!json_text) return fail(ctx, PG_ERR_INVALID, "json_text is null");
  return guarded(ctx, [&] {
    ctx->config = paragate::parse_config(json_text);
    ctx->has_config = true;
  });
}

int pg_set_seed(pg_context* ctx, unsigned long long seed) {
  if (!ctx) return PG_ERR_INVALID;
  ctx->options.seed = seed;
  ctx->last_error.clear();
  return PG_OK;
}

int pg_set_threads(pg_context* ctx, int threads) {
  if (!ctx) return PG_ERR_INVALID;
  if (threads < 1) return fail(ctx, PG_ERR_INVALID, "threads must be at least 1");
  ctx->options.threads = threads;
  ctx->last_error.clear();
  return PG_OK;
}

int pg_set_output_dir(pg_context* ctx, const char* dir) {
  if (!ctx) return PG_ERR_INVALID;
  if (!dir) return fail(ctx, PG_ERR_INVALID, "dir is null");
  ctx->options.out_dir = dir;
  ctx->last_error.clear();
  return PG_OK;
}

int pg_run_command(pg_context* ctx, const char* command) {
  if (!ctx) return PG_ERR_INVALID;
  return guarded(ctx, [&] {
    if (!ctx->has_config) paragate::Error::invalid("no configuration loaded");
    if (command && ctx->config.command != command)
      paragate::Error::invalid("config declares command \"" + ctx->config.command +
                               "\", not \"" + command + "\"");
    paragate::RunOutput out = paragate::run_scenario(ctx->config, ctx->options);
    paragate::Json summary = out.summary_json;
    summary["files"] = out.files_written;
    ctx->result_json = summary.dump(2);
    ctx->result_text = out.summary_text;
  });
}

const char* pg_last_error(const pg_context* ctx) {
  return ctx ? ctx->last_error.c_str() : "";
}

const char* pg_result_json(const pg_context* ctx) {
  return ctx ? ctx->result_json.c_str() : "";
}

const char* pg_result_text(const pg_context* ctx) {
  return ctx ? ctx->result_text.c_str() : "";
}

const char* pg_version(void) { return "0.1.0"; }

}  // extern "C"
