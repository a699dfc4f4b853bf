#include "wforge.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "wforge/commands.hpp"

struct wf_config {
  wforge::RunConfig cfg;
};

struct wf_run {
  wforge::ConstructSummary sum;
  std::string phase;  // stable storage for the borrowed const char*
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename F>
int guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return WF_OK;
  } catch (const wforge::Error& e) {
    g_last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return WF_ERR_INTERNAL;
  }
}

int invalid_argument(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return WF_ERR_CONFIG;
}

}  // namespace

extern "C" {

const char* wf_last_error(void) { return g_last_error.c_str(); }

void wf_string_free(char* s) { std::free(s); }

int wf_config_parse_string(const char* text, wf_config** out) {
  if (!text || !out) return invalid_argument("wf_config_parse_string");
  return guarded([&] {
    auto* h = new wf_config{wforge::parse_config(text)};
    *out = h;
  });
}

int wf_config_parse_file(const char* path, wf_config** out) {
  if (!path || !out) return invalid_argument("wf_config_parse_file");
  return guarded([&] {
    auto* h = new wf_config{wforge::parse_config_file(path)};
    *out = h;
  });
}

void wf_config_free(wf_config* cfg) { delete cfg; }

int wf_config_serialize(const wf_config* cfg, char** out) {
  if (!cfg || !out) return invalid_argument("wf_config_serialize");
  return guarded([&] { *out = dup_string(wforge::serialize_config(cfg->cfg)); });
}

int wf_config_set_out_dir(wf_config* cfg, const char* dir) {
  if (!cfg || !dir) return invalid_argument("wf_config_set_out_dir");
  cfg->cfg.out_dir = dir;
  return WF_OK;
}

int wf_config_set_seed(wf_config* cfg, unsigned seed) {
  if (!cfg) return invalid_argument("wf_config_set_seed");
  cfg->cfg.scheme.seed = seed;
  return WF_OK;
}

int wf_config_set_max_stages(wf_config* cfg, int stages) {
  if (!cfg) return invalid_argument("wf_config_set_max_stages");
  if (stages < 1) {
    g_last_error = "max_stages must be >= 1";
    return WF_ERR_CONFIG;
  }
  cfg->cfg.scheme.max_stages = stages;
  return WF_OK;
}

int wf_config_set_resolution(wf_config* cfg, int resolution) {
  if (!cfg) return invalid_argument("wf_config_set_resolution");
  if (resolution < 2) {
    g_last_error = "resolution must be >= 2";
    return WF_ERR_CONFIG;
  }
  cfg->cfg.scheme.resolution = resolution;
  return WF_OK;
}

const char* wf_config_out_dir(const wf_config* cfg) {
  return cfg ? cfg->cfg.out_dir.c_str() : "";
}

int wf_construct(const wf_config* cfg, int quiet, wf_run** out) {
  if (!cfg || !out) return invalid_argument("wf_construct");
  return guarded([&] {
    auto* run = new wf_run;
    try {
      run->sum = wforge::cmd_construct(cfg->cfg, quiet != 0);
    } catch (...) {
      delete run;
      throw;
    }
    run->phase = run->sum.phase;
    *out = run;
  });
}

void wf_run_free(wf_run* run) { delete run; }

int wf_run_stage_count(const wf_run* run) { return run ? run->sum.stages : 0; }

const char* wf_run_phase(const wf_run* run) { return run ? run->phase.c_str() : ""; }

double wf_run_final_defect(const wf_run* run) { return run ? run->sum.final_defect : 0.0; }

int wf_run_defect_trace(const wf_run* run, const double** data, size_t* count) {
  if (!run || !data || !count) return invalid_argument("wf_run_defect_trace");
  *data = run->sum.artifacts.defect_trace.data();
  *count = run->sum.artifacts.defect_trace.size();
  return WF_OK;
}

int wf_run_residual_trace(const wf_run* run, const double** data, size_t* count) {
  if (!run || !data || !count) return invalid_argument("wf_run_residual_trace");
  *data = run->sum.artifacts.residual_trace.data();
  *count = run->sum.artifacts.residual_trace.size();
  return WF_OK;
}

int wf_verify(const wf_config* cfg, const char* artifact_dir, char** csv_out) {
  if (!cfg || !artifact_dir || !csv_out) return invalid_argument("wf_verify");
  return guarded([&] { *csv_out = dup_string(wforge::cmd_verify(cfg->cfg, artifact_dir)); });
}

int wf_degree(const wf_config* cfg, const double* poly_xy, int n_vertices, double yx, double yy,
              int use_delta, double delta, int use_bump, double bump_cx, double bump_cy,
              double bump_r, int quad_resolution, char** json_out) {
  if (!cfg || !poly_xy || !json_out) return invalid_argument("wf_degree");
  return guarded([&] {
    wforge::DegreeCommand cmd;
    cmd.polygon.reserve(static_cast<std::size_t>(n_vertices > 0 ? n_vertices : 0));
    for (int i = 0; i < n_vertices; ++i)
      cmd.polygon.push_back({poly_xy[2 * i], poly_xy[2 * i + 1]});
    cmd.y = {yx, yy};
    if (use_delta) cmd.delta = delta;
    if (use_bump) cmd.g = wforge::TestFunction{{bump_cx, bump_cy}, bump_r, 1.0};
    if (quad_resolution > 0) cmd.quad_resolution = quad_resolution;
    *json_out = dup_string(wforge::cmd_degree(cfg->cfg, cmd));
  });
}

int wf_report(const char* artifact_dir, char** text_out) {
  if (!artifact_dir || !text_out) return invalid_argument("wf_report");
  return guarded([&] { *text_out = dup_string(wforge::cmd_report(artifact_dir)); });
}

}  // extern "C"
