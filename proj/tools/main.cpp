// Command-line front end; talks to the library exclusively through the C API.
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wforge.h"

namespace {

int fail(int code) {
  std::fprintf(stderr, "error: %s\n", wf_last_error());
  return code;
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  unsigned seed = 0;
  int stages = 0;
  int resolution = 0;
  bool quiet = false;
  bool has_seed = false;
};

void add_common(CLI::App* cmd, CommonOpts* o) {
  cmd->add_option("--config", o->config_path, "configuration file")->required();
  cmd->add_option("--out", o->out_dir, "override the output directory");
  cmd->add_option("--seed", o->seed, "override the recorded seed")
      ->each([o](const std::string&) { o->has_seed = true; });
  cmd->add_option("--stages", o->stages, "override the stage cap");
  cmd->add_option("--resolution", o->resolution, "override the lattice resolution");
  cmd->add_flag("--quiet", o->quiet, "suppress progress output");
}

int load_config(const CommonOpts& o, wf_config** out) {
  int rc = wf_config_parse_file(o.config_path.c_str(), out);
  if (rc != WF_OK) return rc;
  if (!o.out_dir.empty()) wf_config_set_out_dir(*out, o.out_dir.c_str());
  if (o.has_seed) wf_config_set_seed(*out, o.seed);
  if (o.stages > 0 && (rc = wf_config_set_max_stages(*out, o.stages)) != WF_OK) return rc;
  if (o.resolution > 0 && (rc = wf_config_set_resolution(*out, o.resolution)) != WF_OK) return rc;
  return WF_OK;
}

int run_construct(const CommonOpts& o) {
  wf_config* cfg = nullptr;
  int rc = load_config(o, &cfg);
  if (rc != WF_OK) return fail(rc);
  wf_run* run = nullptr;
  rc = wf_construct(cfg, o.quiet ? 1 : 0, &run);
  if (rc != WF_OK) {
    wf_config_free(cfg);
    return fail(rc);
  }
  if (!o.quiet) {
    const double* trace = nullptr;
    size_t n = 0;
    wf_run_defect_trace(run, &trace, &n);
    std::printf("phase: %s\nstages: %d\nfinal defect: %.17g\n", wf_run_phase(run),
                wf_run_stage_count(run), wf_run_final_defect(run));
    for (size_t k = 0; k < n; ++k) std::printf("defect[%zu] = %.17g\n", k, trace[k]);
  }
  wf_run_free(run);
  wf_config_free(cfg);
  return 0;
}

int run_verify(const CommonOpts& o, const std::string& artifacts) {
  wf_config* cfg = nullptr;
  int rc = load_config(o, &cfg);
  if (rc != WF_OK) return fail(rc);
  const std::string dir = artifacts.empty() ? wf_config_out_dir(cfg) : artifacts;
  char* csv = nullptr;
  rc = wf_verify(cfg, dir.c_str(), &csv);
  wf_config_free(cfg);
  if (rc != WF_OK) return fail(rc);
  if (!o.quiet) std::fputs(csv, stdout);
  wf_string_free(csv);
  return 0;
}

int run_degree(const CommonOpts& o, const std::vector<double>& circle,
               const std::string& polygon_text, const std::vector<double>& y,
               const std::vector<double>& delta, const std::vector<double>& bump, int quad) {
  std::vector<double> poly;
  if (!circle.empty()) {
    const int n = 64;
    for (int k = 0; k < n; ++k) {
      const double t = 2.0 * M_PI * k / n;
      poly.push_back(circle[0] + circle[2] * std::cos(t));
      poly.push_back(circle[1] + circle[2] * std::sin(t));
    }
  } else if (!polygon_text.empty()) {
    // "x,y;x,y;..." pairs
    std::string tok;
    double pending = 0.0;
    bool have_x = false;
    for (size_t i = 0; i <= polygon_text.size(); ++i) {
      const char c = i < polygon_text.size() ? polygon_text[i] : ';';
      if (c == ',' || c == ';') {
        if (!tok.empty()) {
          const double val = std::strtod(tok.c_str(), nullptr);
          if (have_x) {
            poly.push_back(pending);
            poly.push_back(val);
            have_x = false;
          } else {
            pending = val;
            have_x = true;
          }
          tok.clear();
        }
      } else {
        tok.push_back(c);
      }
    }
  } else {
    std::fprintf(stderr, "error: degree needs --circle cx cy r or --polygon \"x,y;...\"\n");
    return WF_ERR_CONFIG;
  }

  wf_config* cfg = nullptr;
  int rc = load_config(o, &cfg);
  if (rc != WF_OK) return fail(rc);
  char* json = nullptr;
  rc = wf_degree(cfg, poly.data(), static_cast<int>(poly.size() / 2), y[0], y[1],
                 delta.empty() ? 0 : 1, delta.empty() ? 0.0 : delta[0], bump.empty() ? 0 : 1,
                 bump.empty() ? 0.0 : bump[0], bump.empty() ? 0.0 : bump[1],
                 bump.empty() ? 0.0 : bump[2], quad, &json);
  wf_config_free(cfg);
  if (rc != WF_OK) return fail(rc);
  std::fputs(json, stdout);
  wf_string_free(json);
  return 0;
}

int run_report(const std::string& dir) {
  char* text = nullptr;
  const int rc = wf_report(dir.c_str(), &text);
  if (rc != WF_OK) return fail(rc);
  std::fputs(text, stdout);
  wf_string_free(text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oscillatory-solution construction, verification and degree queries"};
  app.require_subcommand(1);

  CommonOpts construct_opts;
  CLI::App* construct = app.add_subcommand("construct", "run the scheme and write artifacts");
  add_common(construct, &construct_opts);

  CommonOpts verify_opts;
  std::string verify_dir;
  CLI::App* verify = app.add_subcommand("verify", "check persisted grids against the target");
  add_common(verify, &verify_opts);
  verify->add_option("--artifacts", verify_dir, "artifact directory (default: config out_dir)");

  CommonOpts degree_opts;
  std::vector<double> circle, y{0.0, 0.0}, delta, bump;
  std::string polygon_text;
  int quad = 128;
  CLI::App* degree = app.add_subcommand("degree", "Brouwer degree of the gradient map of v0");
  add_common(degree, &degree_opts);
  degree->add_option("--circle", circle, "circular boundary: cx cy r")->expected(3);
  degree->add_option("--polygon", polygon_text, "polygon vertices \"x,y;x,y;...\"");
  degree->add_option("--y", y, "target point: yx yy")->expected(2);
  degree->add_option("--delta", delta, "rotational perturbation strength")->expected(1);
  degree->add_option("--bump", bump, "test bump cx cy r for the formula residual")->expected(3);
  degree->add_option("--quad", quad, "quadrature resolution for the formula residual");

  std::string report_dir;
  CLI::App* report = app.add_subcommand("report", "summarize a finished run directory");
  report->add_option("dir", report_dir, "artifact directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (construct->parsed()) return run_construct(construct_opts);
  if (verify->parsed()) return run_verify(verify_opts, verify_dir);
  if (degree->parsed())
    return run_degree(degree_opts, circle, polygon_text, y, delta, bump, quad);
  if (report->parsed()) return run_report(report_dir);
  return 0;
}
