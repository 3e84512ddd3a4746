#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "pcq/problems.hpp"
#include "pcq/report.hpp"

using namespace pcq;

namespace {

struct RunConfig {
  std::string problem = "disk";
  std::string mesh_file;  // custom problems
  double g_const = 1.0;   // custom problems
  int levels = 4;
  double tol = 1e-15;
  int max_iter = 20;
  double floor_factor = 100.0;
  int pie_order = kPieOrder;
  int threads = 1;
  std::string csv, table, plot, solution, dump_matrix;
  int plot_n = 101;
};

void apply_config(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  const nlohmann::json j = nlohmann::json::parse(in);
  auto get = [&j](const char* k, auto& v) {
    if (j.contains(k)) v = j.at(k).get<std::decay_t<decltype(v)>>();
  };
  get("problem", c.problem);
  get("mesh", c.mesh_file);
  get("g", c.g_const);
  get("levels", c.levels);
  get("tol", c.tol);
  get("max_iter", c.max_iter);
  get("floor_factor", c.floor_factor);
  get("pie_order", c.pie_order);
  get("threads", c.threads);
  get("csv", c.csv);
  get("table", c.table);
  get("plot", c.plot);
  get("plot_n", c.plot_n);
  get("solution", c.solution);
  get("dump_matrix", c.dump_matrix);
}

std::shared_ptr<const CurvedTriangulation> load_mesh(const std::string& path) {
  return std::make_shared<const CurvedTriangulation>(load_mesh_file(path));
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

int run_solve(const RunConfig& c) {
  if (c.levels < 1) throw std::invalid_argument("levels must be at least 1");
  if (!(c.tol > 0)) throw std::invalid_argument("tolerance must be positive");
  const ProblemId id = parse_problem_id(c.problem);
  MongeAmpereProblem pb;
  if (id == ProblemId::Custom) {
    if (c.mesh_file.empty()) throw std::invalid_argument("custom problem needs --mesh");
    if (!(c.g_const > 0)) throw std::invalid_argument("g must be positive");
    pb.name = "custom";
    pb.mesh = load_mesh(c.mesh_file);
    const double g = c.g_const;
    pb.g = [g](const Point&) { return g; };
  } else {
    pb = builtin_problem(id);
    if (!c.mesh_file.empty()) pb.mesh = load_mesh(c.mesh_file);
  }
  NewtonOptions opt;
  opt.tol = c.tol;
  opt.max_iter = c.max_iter;
  opt.floor_factor = c.floor_factor;
  opt.assembly.pie_order = c.pie_order;
  opt.assembly.threads = c.threads;

  const MultilevelResult res = multilevel_run(pb, c.levels, opt, [](const LevelReport& r) {
    std::cerr << "level " << r.level << ": " << r.dofs << " dofs, m = " << r.m << ", R = " << r.residual << ", "
              << r.seconds << " s" << (r.diverged ? " (diverged)" : "") << (r.min_eigenvalue < 0 ? " (non-convex)" : "")
              << '\n';
    std::cerr << "  updates:";
    for (double u : r.updates) std::cerr << ' ' << u;
    std::cerr << '\n';
  });
  write_text_table(std::cout, res);
  if (!c.csv.empty()) {
    auto f = open_out(c.csv);
    write_csv(f, res);
  }
  if (!c.table.empty()) {
    auto f = open_out(c.table);
    write_text_table(f, res);
  }
  if (!c.plot.empty()) {
    auto f = open_out(c.plot);
    write_plot_lattice(f, res.final_solution, c.plot_n);
  }
  if (!c.solution.empty()) {
    auto j = spline_to_json(res.final_solution, true);
    j["mesh"] = res.final_solution.space().mesh().to_json();
    auto f = open_out(c.solution);
    f << j.dump(1) << '\n';
  }
  if (!c.dump_matrix.empty()) {
    const auto& u = res.final_solution;
    const SparseSystem sys = assemble(u.space(), linearize_ma(u, pb.g), opt.assembly);
    write_matrix_market(sys.matrix, c.dump_matrix);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"C1 quintic splines on conic domains and a Newton-Galerkin Monge-Ampere solver"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_file;
  auto* solve = app.add_subcommand("solve", "run a multilevel Monge-Ampere solve");
  solve->add_option("--config", config_file, "JSON file overriding the flags");
  solve->add_option("--problem", cfg.problem, "disk | ellipse-exp | ellipse-sin | c2-domain | custom");
  solve->add_option("--mesh", cfg.mesh_file, "initial mesh file (required for custom)");
  solve->add_option("--g", cfg.g_const, "constant right-hand side for custom problems");
  solve->add_option("--levels", cfg.levels, "number of levels");
  solve->add_option("--tol", cfg.tol, "Newton stopping tolerance on the L2 update");
  solve->add_option("--max-iter", cfg.max_iter, "Newton iteration cap per level");
  solve->add_option("--floor-factor", cfg.floor_factor, "rounding floor factor for the stopping rule");
  solve->add_option("--pie-order", cfg.pie_order, "Gauss points per direction on pie triangles");
  solve->add_option("--threads", cfg.threads, "assembly threads (results do not depend on it)");
  solve->add_option("--csv", cfg.csv, "convergence table as CSV");
  solve->add_option("--table", cfg.table, "convergence table as aligned text");
  solve->add_option("--plot", cfg.plot, "solution samples on a lattice (x,y,value)");
  solve->add_option("--plot-n", cfg.plot_n, "lattice points per direction");
  solve->add_option("--solution", cfg.solution, "final solution as JSON");
  solve->add_option("--dump-matrix", cfg.dump_matrix, "Newton matrix at the final iterate (Matrix Market)");

  auto* mesh = app.add_subcommand("mesh", "mesh utilities");
  mesh->require_subcommand(1);
  std::string mesh_file, out_file;
  int refine_levels = 1;
  auto* validate = mesh->add_subcommand("validate", "validate a mesh file");
  validate->add_option("file", mesh_file)->required();
  auto* refine = mesh->add_subcommand("refine", "refine a mesh uniformly");
  refine->add_option("file", mesh_file)->required();
  refine->add_option("--levels", refine_levels, "refinement steps");
  refine->add_option("-o,--output", out_file, "output mesh file (default stdout)");

  auto* space = app.add_subcommand("space", "spline space utilities");
  space->require_subcommand(1);
  std::string space_problem;
  int space_levels = 1;
  bool oracle = false;
  auto* info = space->add_subcommand("info", "print the determining set dimension and category counts");
  info->add_option("file", mesh_file, "mesh file");
  info->add_option("--problem", space_problem, "use the built-in mesh of a problem");
  info->add_option("--levels", space_levels, "level of the mesh (1 = as given)");
  info->add_flag("--oracle", oracle, "also compute the dimension as the nullity of the smoothness constraints");

  auto* exp = app.add_subcommand("export", "export utilities");
  exp->require_subcommand(1);
  std::string solution_file, plot_file;
  int plot_n = 101;
  auto* plot = exp->add_subcommand("plot", "sample a saved solution on a lattice");
  plot->add_option("solution", solution_file, "solution file written by solve --solution")->required();
  plot->add_option("-o,--output", plot_file, "output file (default stdout)");
  plot->add_option("-n", plot_n, "lattice points per direction");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      if (!config_file.empty()) apply_config(cfg, config_file);
      return run_solve(cfg);
    }
    if (*validate) {
      const CurvedTriangulation m = load_mesh_file(mesh_file);
      std::cout << "valid: " << m.num_vertices() << " vertices, " << m.num_triangles() << " triangles ("
                << m.count(TriKind::Ordinary) << " ordinary, " << m.count(TriKind::Buffer) << " buffer, "
                << m.count(TriKind::Pie) << " pie)\n";
      return 0;
    }
    if (*refine) {
      CurvedTriangulation m = load_mesh_file(mesh_file);
      for (int k = 0; k < refine_levels; ++k) m = refine_uniform(m);
      const std::string s = m.to_json().dump(1);
      if (out_file.empty()) {
        std::cout << s << '\n';
      } else {
        auto f = open_out(out_file);
        f << s << '\n';
      }
      return 0;
    }
    if (*info) {
      std::shared_ptr<const CurvedTriangulation> m;
      if (!space_problem.empty())
        m = builtin_mesh(parse_problem_id(space_problem));
      else if (!mesh_file.empty())
        m = load_mesh(mesh_file);
      else
        throw std::invalid_argument("space info needs a mesh file or --problem");
      for (int k = 1; k < space_levels; ++k) m = std::make_shared<const CurvedTriangulation>(refine_uniform(*m));
      const MinimalDeterminingSet mds = build_mds(m);
      const DofCounts& c = mds.counts();
      std::cout << "triangles: " << m->num_triangles() << '\n'
                << "dimension: " << mds.dimension() << '\n'
                << "vertex: " << c.vertex << '\n'
                << "edge: " << c.edge << '\n'
                << "tangent: " << c.tangent << '\n'
                << "pie: " << c.pie << '\n'
                << "buffer: " << c.buffer << '\n';
      if (oracle) std::cout << "oracle: " << rank_oracle(*m).nullity() << '\n';
      return 0;
    }
    if (*plot) {
      std::ifstream in(solution_file);
      if (!in) throw std::runtime_error("cannot open " + solution_file);
      const nlohmann::json j = nlohmann::json::parse(in);
      const auto& jm = j.at("mesh");
      auto m = std::make_shared<const CurvedTriangulation>(
          classify_and_validate(domain_from_json(jm.at("domain")), raw_mesh_from_json(jm)));
      const SplineFunction s = spline_from_json(SplineSpace::build(m), j);
      if (plot_file.empty()) {
        write_plot_lattice(std::cout, s, plot_n);
      } else {
        auto f = open_out(plot_file);
        write_plot_lattice(f, s, plot_n);
      }
      return 0;
    }
  } catch (const MeshError& e) {
    std::cerr << "mesh error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
