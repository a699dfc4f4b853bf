#include "wforge/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wforge/grid_io.hpp"
#include "wforge/norms.hpp"
#include "wforge/parallel.hpp"
#include "wforge/quadrature.hpp"

namespace wforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json report_json(const StageReport& r, int index) {
  json j;
  j["event"] = "stage";
  j["index"] = index;
  j["defect_before"] = r.defect_before.value;
  j["defect_after"] = r.defect_after.value;
  j["lambdas"] = r.lambdas;
  j["l"] = r.l;
  j["shift"] = r.shift;
  j["c1_margin"] = r.c1_margin;
  j["delta"] = r.delta;
  j["terms"] = r.terms;
  j["budget_halvings"] = r.budget_halvings;
  return j;
}

/// The effective right-hand side implied by the configuration: f itself when
/// given, otherwise the double-divergence-type contraction of the target A
/// (which the construction's induced tensor approaches as the defect decays).
Expr effective_rhs(const RunConfig& cfg) {
  if (cfg.f) return *cfg.f;
  if (cfg.a0) {
    const SymField& a = *cfg.a0;
    return -(differentiate(a.e11, 0, 2) - 2.0 * differentiate(a.e12, 1, 1) +
             differentiate(a.e22, 2, 0));
  }
  return constant(0.0);
}

SymField target_field(const RunConfig& cfg) {
  if (cfg.a0) return *cfg.a0;
  if (cfg.f)
    return solve_A0_from_f(*cfg.f, cfg.domain, cfg.scheme.c_extra, cfg.scheme.poisson_modes);
  throw ConfigError("verify: configuration supplies neither a target A0 nor a right-hand side f");
}

/// Weak-Hessian residual of a grid-sampled v against f for one test bump,
/// with the same composite-cells x 16-point Gauss layout used for analytic
/// fields.
double weak_residual_grid(const GridField& v, const Expr& f, const TestFunction& phi,
                          const Domain& dom, int cells) {
  const double r = phi.radius;
  const double ax = std::max(phi.center.x - r, dom.rect_min.x);
  const double bx = std::min(phi.center.x + r, dom.rect_max.x);
  const double ay = std::max(phi.center.y - r, dom.rect_min.y);
  const double by = std::min(phi.center.y + r, dom.rect_max.y);
  if (!(ax < bx) || !(ay < by)) return 0.0;

  const Expr pe = phi.expr();
  const Evaluator p11(differentiate(pe, 2, 0)), p12(differentiate(pe, 1, 1)),
      p22(differentiate(pe, 0, 2)), pv(pe), fe(f);

  const Composite1D qx = composite_gauss(ax, bx, cells, 16);
  const Composite1D qy = composite_gauss(ay, by, cells, 16);
  std::vector<double> row_sum(qy.x.size(), 0.0);
  parallel_for(qy.x.size(), [&](std::size_t jb, std::size_t je) {
    thread_local EvalScratch s11, s12, s22, sp, sf;
    for (std::size_t j = jb; j < je; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < qx.x.size(); ++i) {
        const Vec2 p{qx.x[i], qy.x[j]};
        const double v1 = v.deriv(p, 1, 0);
        const double v2 = v.deriv(p, 0, 1);
        const double integrand = -0.5 * (v1 * v1 * p22.eval(p, s22) + v2 * v2 * p11.eval(p, s11) -
                                         2.0 * v1 * v2 * p12.eval(p, s12)) -
                                 fe.eval(p, sf) * pv.eval(p, sp);
        acc += qx.w[i] * integrand;
      }
      row_sum[j] = qy.w[j] * acc;
    }
  });
  double total = 0.0;
  for (double t : row_sum) total += t;
  return std::abs(total);
}

/// Sup over an n x n lattice of the finite-difference Hoelder-alpha quotient
/// of the interpolated gradient (four directions, dyadic strides).
double holder_grad_grid(const GridField& v, const Domain& dom, double alpha, int n) {
  const double hx = dom.width() / (n - 1);
  const double hy = dom.height() / (n - 1);
  std::vector<double> gx(static_cast<std::size_t>(n) * n), gy(gx.size());
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t jb, std::size_t je) {
    for (std::size_t j = jb; j < je; ++j)
      for (int i = 0; i < n; ++i) {
        const Vec2 p{dom.rect_min.x + hx * i, dom.rect_min.y + hy * j};
        gx[j * n + i] = v.deriv(p, 1, 0);
        gy[j * n + i] = v.deriv(p, 0, 1);
      }
  });
  static const int dirs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  std::vector<double> row_best(static_cast<std::size_t>(n), 0.0);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t jb, std::size_t je) {
    for (std::size_t j = jb; j < je; ++j) {
      double best = 0.0;
      for (int i = 0; i < n; ++i)
        for (const auto& d : dirs)
          for (int s = 1; s < n; s *= 2) {
            const int i2 = i + d[0] * s;
            const int j2 = static_cast<int>(j) + d[1] * s;
            if (i2 < 0 || i2 >= n || j2 < 0 || j2 >= n) continue;
            const double du = gx[static_cast<std::size_t>(j2) * n + i2] - gx[j * n + i];
            const double dv = gy[static_cast<std::size_t>(j2) * n + i2] - gy[j * n + i];
            const double dist = std::hypot(d[0] * s * hx, d[1] * s * hy);
            best = std::max(best, std::hypot(du, dv) / std::pow(dist, alpha));
          }
      row_best[j] = best;
    }
  });
  return *std::max_element(row_best.begin(), row_best.end());
}

/// The standard battery: a 3x3 arrangement of small bumps plus one wide
/// central bump, all inside the base rectangle.
std::vector<TestFunction> bump_battery(const Domain& dom) {
  std::vector<TestFunction> out;
  const double m = std::min(dom.width(), dom.height());
  for (double fx : {0.3, 0.5, 0.7})
    for (double fy : {0.3, 0.5, 0.7})
      out.push_back({{dom.rect_min.x + fx * dom.width(), dom.rect_min.y + fy * dom.height()},
                     0.12 * m,
                     1.0});
  out.push_back({{dom.rect_min.x + 0.5 * dom.width(), dom.rect_min.y + 0.5 * dom.height()},
                 0.3 * m,
                 1.0});
  return out;
}

}  // namespace

ConstructSummary cmd_construct(const RunConfig& cfg, bool quiet) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
  const std::string log_path = cfg.out_dir + "/run.log";
  std::ofstream log(log_path, std::ios::trunc);
  if (!log) throw IoError("cannot open '" + log_path + "' for writing");

  json hdr;
  hdr["event"] = "config";
  hdr["seed"] = cfg.scheme.seed;
  hdr["alpha"] = cfg.scheme.alpha;
  hdr["beta"] = cfg.scheme.beta;
  hdr["sigma"] = cfg.scheme.sigma;
  hdr["s"] = cfg.scheme.s;
  hdr["m0"] = cfg.scheme.m0;
  hdr["max_stages"] = cfg.scheme.max_stages;
  hdr["target_defect"] = cfg.scheme.target_defect;
  hdr["delta0"] = cfg.scheme.delta0;
  hdr["resolution"] = cfg.scheme.resolution;
  hdr["export_resolution"] = cfg.export_resolution;
  hdr["v0"] = cfg.v0_text;
  hdr["has_a0"] = cfg.a0.has_value();
  hdr["f"] = cfg.f ? json(cfg.f_text) : json(nullptr);
  log << hdr.dump() << "\n";
  log.flush();
  if (!log) throw IoError("short write to '" + log_path + "'");

  RunArtifacts art =
      run_full(cfg.v0, cfg.w0, cfg.a0, cfg.f, cfg.domain, cfg.scheme);

  for (std::size_t k = 0; k < art.stage_reports.size(); ++k)
    log << report_json(art.stage_reports[k], static_cast<int>(k)).dump() << "\n";
  json traces;
  traces["event"] = "traces";
  traces["defect"] = art.defect_trace;
  traces["drift"] = art.drift_trace;
  traces["grad_increments"] = art.grad_increments;
  traces["residual"] = art.residual_trace;
  log << traces.dump() << "\n";

  ConstructSummary sum;
  sum.out_dir = cfg.out_dir;
  sum.phase = art.phase;
  sum.stages = static_cast<int>(art.stage_reports.size());
  sum.final_defect = art.defect_trace.empty() ? 0.0 : art.defect_trace.back();

  json done;
  done["event"] = "done";
  done["phase"] = sum.phase;
  done["stages"] = sum.stages;
  done["final_defect"] = sum.final_defect;
  done["halt"] = art.halt.empty() ? json(nullptr) : json(art.halt);
  log << done.dump() << "\n";
  if (!log) throw IoError("short write to '" + log_path + "'");
  log.close();

  const int n = cfg.export_resolution;
  const Grid gv = sample_grid(art.v_final, cfg.domain, n, n);
  const Grid gw1 = sample_grid(art.w_final[0], cfg.domain, n, n);
  const Grid gw2 = sample_grid(art.w_final[1], cfg.domain, n, n);
  write_grid(gv, cfg.out_dir + "/v.wfg");
  write_grid(gw1, cfg.out_dir + "/w1.wfg");
  write_grid(gw2, cfg.out_dir + "/w2.wfg");
  write_grid_csv(gv, cfg.out_dir + "/v.csv");
  write_grid_csv(gw1, cfg.out_dir + "/w1.csv");
  write_grid_csv(gw2, cfg.out_dir + "/w2.csv");

  {
    const std::string path = cfg.out_dir + "/defect_trace.csv";
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << "stage,defect\n";
    for (std::size_t k = 0; k < art.defect_trace.size(); ++k)
      os << k << "," << fmt(art.defect_trace[k]) << "\n";
    if (!os) throw IoError("short write to '" + path + "'");
  }
  {
    const std::string path = cfg.out_dir + "/config.txt";
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << serialize_config(cfg);
    if (!os) throw IoError("short write to '" + path + "'");
  }

  if (!quiet)
    std::fprintf(stderr, "construct: %d stage(s), phase %s, final defect %.6g -> %s\n", sum.stages,
                 sum.phase.c_str(), sum.final_defect, sum.out_dir.c_str());
  sum.artifacts = std::move(art);
  return sum;
}

std::string cmd_verify(const RunConfig& cfg, const std::string& artifact_dir) {
  const GridField v(read_grid(artifact_dir + "/v.wfg"));
  const GridField w1(read_grid(artifact_dir + "/w1.wfg"));
  const GridField w2(read_grid(artifact_dir + "/w2.wfg"));
  const Domain& dom = cfg.domain;
  const Expr f = effective_rhs(cfg);
  const SymField a = target_field(cfg);

  std::ostringstream csv;
  csv << "quantity,param1,param2,value\n";

  const std::vector<TestFunction> battery = bump_battery(dom);
  for (std::size_t i = 0; i < battery.size(); ++i) {
    const double res = weak_residual_grid(v, f, battery[i], dom, 64);
    csv << "residual," << fmt(battery[i].center.x) << "," << fmt(battery[i].center.y) << ","
        << fmt(res) << "\n";
  }

  // Lattice defect of the interpolated fields against the configured target.
  {
    const int n = std::max(2, cfg.scheme.resolution);
    const double hx = dom.width() / (n - 1), hy = dom.height() / (n - 1);
    std::vector<double> row_sup(static_cast<std::size_t>(n), 0.0);
    std::vector<double> row_eig(static_cast<std::size_t>(n), 0.0);
    const Evaluator a11(a.e11), a12(a.e12), a22(a.e22);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t jb, std::size_t je) {
      thread_local EvalScratch s11, s12, s22;
      for (std::size_t j = jb; j < je; ++j) {
        double sup = 0.0, eig = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
          const Vec2 p{dom.rect_min.x + hx * i, dom.rect_min.y + hy * j};
          const double v1 = v.deriv(p, 1, 0), v2 = v.deriv(p, 0, 1);
          Sym2 d{a11.eval(p, s11) - (0.5 * v1 * v1 + w1.deriv(p, 1, 0)),
                 a12.eval(p, s12) - (0.5 * v1 * v2 + 0.5 * (w1.deriv(p, 0, 1) + w2.deriv(p, 1, 0))),
                 a22.eval(p, s22) - (0.5 * v2 * v2 + w2.deriv(p, 0, 1))};
          sup = std::max({sup, std::abs(d.m11), std::abs(d.m12), std::abs(d.m22)});
          eig = std::min(eig, eig_min(d));
        }
        row_sup[j] = sup;
        row_eig[j] = eig;
      }
    });
    const double sup = *std::max_element(row_sup.begin(), row_sup.end());
    const double eig = *std::min_element(row_eig.begin(), row_eig.end());
    csv << "defect_sup," << n << ",," << fmt(sup) << "\n";
    csv << "defect_eig_min," << n << ",," << fmt(eig) << "\n";
  }

  const int hn = std::max(16, cfg.scheme.resolution);
  for (int n : {hn, 2 * hn})
    csv << "holder_grad," << n << "," << fmt(cfg.scheme.alpha) << ","
        << fmt(holder_grad_grid(v, dom, cfg.scheme.alpha, n)) << "\n";

  const std::string out = csv.str();
  const std::string path = artifact_dir + "/verify.csv";
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << out;
  if (!os) throw IoError("short write to '" + path + "'");
  return out;
}

std::string cmd_degree(const RunConfig& cfg, const DegreeCommand& cmd) {
  if (cmd.polygon.size() < 3) throw ConfigError("degree: polygon needs at least 3 vertices");
  for (Vec2 p : cmd.polygon)
    if (!cfg.domain.contains(p))
      throw ConfigError("degree: polygon vertex outside the base rectangle");

  std::array<Expr, 2> map{differentiate(cfg.v0, 1, 0), differentiate(cfg.v0, 0, 1)};
  if (cmd.delta) {
    map[0] = map[0] - *cmd.delta * x2();
    map[1] = map[1] + *cmd.delta * x1();
  }
  DegreeQuery q;
  q.polygon = cmd.polygon;
  q.y = cmd.y;

  json out;
  out["y"] = {cmd.y.x, cmd.y.y};
  out["perturbation"] = cmd.delta ? json(*cmd.delta) : json(nullptr);
  try {
    const DegreeResult r = degree_detail(map, q);
    out["degree_defined"] = true;
    out["degree"] = r.degree;
    out["clearance"] = r.clearance;
  } catch (const PreconditionError& e) {
    out["degree_defined"] = false;
    out["degree"] = nullptr;
    out["message"] = e.what();
  }
  if (cmd.g && !cmd.delta) {
    out["formula_residual"] =
        degree_formula_residual(cfg.v0, det_hessian(cfg.v0), q, *cmd.g, cmd.quad_resolution);
  }
  return out.dump(2) + "\n";
}

std::string cmd_report(const std::string& artifact_dir) {
  const std::string path = artifact_dir + "/run.log";
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::ostringstream out;
  out << "run summary for " << artifact_dir << "\n";
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw IoError("malformed log line in '" + path + "': " + e.what());
    }
    const std::string event = j.value("event", "");
    if (event == "config") {
      out << "  config: alpha=" << j.value("alpha", 0.0) << " sigma=" << j.value("sigma", 0.0)
          << " s=" << j.value("s", 0.0) << " seed=" << j.value("seed", 0u) << "\n";
    } else if (event == "stage") {
      out << "  stage " << j.value("index", 0) << ": defect " << j.value("defect_before", 0.0)
          << " -> " << j.value("defect_after", 0.0) << ", margin " << j.value("c1_margin", 0.0)
          << ", " << j["lambdas"].size() << " step(s)\n";
    } else if (event == "done") {
      out << "  done: phase " << j.value("phase", std::string("?")) << ", "
          << j.value("stages", 0) << " stage(s), final defect " << j.value("final_defect", 0.0)
          << "\n";
    }
  }
  return out.str();
}

}  // namespace wforge
