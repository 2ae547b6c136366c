// Command-line front end: grid generation, fit/predict, benchmark runs and
// debug dumps.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tmsk/bench.hpp"
#include "tmsk/csv_io.hpp"
#include "tmsk/errors.hpp"
#include "tmsk/fast_inverse.hpp"
#include "tmsk/hier_basis.hpp"
#include "tmsk/kriging.hpp"

using namespace tmsk;

namespace {

DomainMap make_domain(std::size_t d, double lo, double hi) { return DomainMap::cube(d, lo, hi); }

std::vector<std::size_t> parse_budgets(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used != tok.size() || v < 1) throw std::invalid_argument(tok);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw InputError("bad budget '" + tok + "'");
    }
  }
  if (out.empty()) throw InputError("--budgets is empty");
  return out;
}

std::optional<double> parse_griewank_denominator(const std::string& s) {
  if (s == "sqrt_j") return std::nullopt;
  const std::string prefix = "constant:";
  if (s.rfind(prefix, 0) == 0) {
    try {
      return std::stod(s.substr(prefix.size()));
    } catch (const std::exception&) {
    }
  }
  throw InputError("--griewank-denominator expects sqrt_j or constant:c, got '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic kriging with tensor Markov kernels on truncated sparse grids"};
  app.require_subcommand(1);

  // grid
  auto* grid_cmd = app.add_subcommand("grid", "Write a truncated sparse grid design as CSV");
  int g_dim = 0;
  std::size_t g_size = 0;
  std::optional<std::uint64_t> g_seed;
  std::string g_out;
  double g_lo = 0.0, g_hi = 1.0;
  grid_cmd->add_option("--dim", g_dim, "Dimension")->required();
  grid_cmd->add_option("--size", g_size, "Number of design points")->required();
  grid_cmd->add_option("--seed", g_seed, "Draw the extra points at random with this seed");
  grid_cmd->add_option("--out", g_out, "Output CSV")->required();
  grid_cmd->add_option("--lo", g_lo, "Lower bound of every coordinate");
  grid_cmd->add_option("--hi", g_hi, "Upper bound of every coordinate");

  // fit-predict
  auto* fp_cmd = app.add_subcommand("fit-predict", "Fit a kriging model and predict at given points");
  std::string fp_kernel, fp_design, fp_obs, fp_pred, fp_noise = "estimated", fp_out;
  double fp_lo = 0.0, fp_hi = 1.0;
  unsigned fp_jobs = 1;
  fp_cmd->add_option("--kernel", fp_kernel, "Kernel spec, e.g. laplace:1 or bm;laplace:2")->required();
  fp_cmd->add_option("--design", fp_design, "Grid CSV")->required();
  fp_cmd->add_option("--obs", fp_obs, "Observation CSV (long or summary format)")->required();
  fp_cmd->add_option("--pred", fp_pred, "Prediction points CSV")->required();
  fp_cmd->add_option("--noise", fp_noise, "none, known or estimated")
      ->check(CLI::IsMember({"none", "known", "estimated"}));
  fp_cmd->add_option("--out", fp_out, "Predictions CSV")->required();
  fp_cmd->add_option("--lo", fp_lo, "Lower bound of every coordinate");
  fp_cmd->add_option("--hi", fp_hi, "Upper bound of every coordinate");
  fp_cmd->add_option("--jobs", fp_jobs, "Prediction threads");

  // bench
  auto* b_cmd = app.add_subcommand("bench", "Run the RMSE benchmark on a synthetic test function");
  std::string b_func = "griewank", b_budgets, b_kernel = "laplace:1", b_out, b_law = "zeta_y2", b_gden = "sqrt_j";
  std::size_t b_dim = 2, b_m = 10, b_R = 1, b_pred = 1000, b_levels = 4;
  double b_zeta = 0.1;
  std::uint64_t b_seed = 0;
  unsigned b_jobs = 1;
  bool b_no_timing = false;
  b_cmd->add_option("--func", b_func, "schwefel222 or griewank")->check(CLI::IsMember({"schwefel222", "griewank"}));
  b_cmd->add_option("--dim", b_dim, "Dimension");
  b_cmd->add_option("--budgets", b_budgets, "Comma-separated design sizes, ascending")->required();
  b_cmd->add_option("--zeta", b_zeta, "Noise scale");
  b_cmd->add_option("--reps-per-point", b_m, "Replications per design point");
  b_cmd->add_option("--macro-reps", b_R, "Macro-replications");
  b_cmd->add_option("--pred-count", b_pred, "Prediction points per macro-replication");
  b_cmd->add_option("--seed", b_seed, "Master seed");
  b_cmd->add_option("--kernel", b_kernel, "Kernel spec");
  b_cmd->add_option("--out", b_out, "Report CSV")->required();
  b_cmd->add_option("--jobs", b_jobs, "Parallel macro-replications");
  b_cmd->add_option("--lattice-levels", b_levels, "Levels per dimension of the prediction lattice");
  b_cmd->add_option("--noise-law", b_law, "zeta_y2, zeta_abs_y or unit");
  b_cmd->add_option("--griewank-denominator", b_gden, "sqrt_j or constant:c");
  b_cmd->add_flag("--no-timing", b_no_timing, "Write zero timings so reports are byte-reproducible");

  // debug
  auto* dbg_cmd = app.add_subcommand("debug", "Diagnostic dumps");
  dbg_cmd->require_subcommand(1);
  auto* basis_cmd = dbg_cmd->add_subcommand("basis", "Hierarchical basis values on a mesh (one dimension)");
  std::string bs_kernel = "bm", bs_out;
  int bs_level = 3;
  std::size_t bs_mesh = 257;
  basis_cmd->add_option("--kernel", bs_kernel, "One-dimensional kernel spec");
  basis_cmd->add_option("--max-level", bs_level, "Highest level to dump");
  basis_cmd->add_option("--mesh", bs_mesh, "Number of interior mesh points");
  basis_cmd->add_option("--out", bs_out, "Output CSV")->required();

  auto* kinv_cmd = dbg_cmd->add_subcommand("kinv", "Dump K^{-1} of a truncated sparse grid as MatrixMarket");
  std::string ki_kernel, ki_out;
  int ki_dim = 0;
  std::size_t ki_size = 0;
  std::optional<std::uint64_t> ki_seed;
  kinv_cmd->add_option("--kernel", ki_kernel, "Kernel spec")->required();
  kinv_cmd->add_option("--dim", ki_dim, "Dimension")->required();
  kinv_cmd->add_option("--size", ki_size, "Number of design points")->required();
  kinv_cmd->add_option("--seed", ki_seed, "Seed for the extra points");
  kinv_cmd->add_option("--out", ki_out, "Output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (grid_cmd->parsed()) {
      const auto grid = truncated_sg(g_dim, g_size, g_seed);
      write_grid_csv(g_out, grid, make_domain(static_cast<std::size_t>(g_dim), g_lo, g_hi));
      std::cout << "wrote " << grid.size() << " points (level " << grid.tau() << ", " << grid.extra_size()
                << " extra) to " << g_out << '\n';
      return 0;
    }

    if (fp_cmd->parsed()) {
      auto grid = read_grid_csv(fp_design);
      const std::size_t d = static_cast<std::size_t>(grid.dim());
      const TMKernel tm = parse_kernel_spec(fp_kernel, d);
      const auto obs = read_observations_csv(fp_obs, grid.size());
      Dataset data{std::move(grid), obs.means, obs.variances, obs.reps, make_domain(d, fp_lo, fp_hi)};
      NoiseModel noise = fp_noise == "none"    ? NoiseModel::noiseless(data.size())
                         : fp_noise == "known" ? NoiseModel::from_dataset(data, NoiseMode::Known)
                                               : NoiseModel::from_dataset(data, NoiseMode::Estimated);
      const auto model = fit(tm, data, noise);
      const auto xs = read_points_csv(fp_pred, d);
      const auto preds = model.predict_batch(xs, fp_jobs);
      std::size_t clamped = 0;
      for (const auto& p : preds) clamped += p.clamped ? 1 : 0;
      if (clamped > 0)
        std::cerr << "warning: " << clamped << " prediction point(s) outside the domain were clamped inside\n";
      write_predictions_csv(fp_out, xs, preds);
      const auto rep = sparsity_report(model.kinv());
      std::cout << "n=" << rep.n << " nnz(K^-1)=" << rep.nnz << " density=" << rep.density << " predictions="
                << preds.size() << '\n';
      return 0;
    }

    if (b_cmd->parsed()) {
      ExperimentConfig cfg;
      cfg.function = parse_test_function(b_func);
      cfg.dim = b_dim;
      cfg.budgets = parse_budgets(b_budgets);
      cfg.zeta = b_zeta;
      cfg.reps_per_point = b_m;
      cfg.macro_reps = b_R;
      cfg.pred_count = b_pred;
      cfg.seed = b_seed;
      cfg.kernel = b_kernel;
      cfg.lattice_levels = b_levels;
      cfg.jobs = b_jobs;
      cfg.noise_law = parse_noise_law(b_law);
      cfg.griewank_constant = parse_griewank_denominator(b_gden);
      cfg.record_timing = !b_no_timing;
      const auto report = run_experiment(cfg);
      emit_report(report, b_out);
      int failed = 0;
      for (const auto& r : report.rows) {
        if (r.error.empty()) continue;
        ++failed;
        std::cerr << "error: budget " << r.budget << " rep " << r.rep << ": " << r.error << '\n';
      }
      return failed > 0 ? 1 : 0;
    }

    if (basis_cmd->parsed()) {
      const auto kern = parse_component_spec(bs_kernel);
      if (bs_level < 1 || bs_level > 12) throw InputError("--max-level must be in 1..12");
      std::vector<HatFunction1D> hats;
      for (int l = 1; l <= bs_level; ++l) {
        for (std::int64_t i = 1; i < (std::int64_t{1} << l); i += 2) hats.emplace_back(kern, l, i);
      }
      std::FILE* f = std::fopen(bs_out.c_str(), "wb");
      if (!f) throw IoError("cannot open '" + bs_out + "' for writing");
      std::fprintf(f, "x");
      for (const auto& h : hats) std::fprintf(f, ",phi_%d_%lld", h.level(), static_cast<long long>(h.index()));
      std::fprintf(f, "\n");
      for (std::size_t k = 0; k < bs_mesh; ++k) {
        const double x = static_cast<double>(k + 1) / static_cast<double>(bs_mesh + 1);
        std::fprintf(f, "%.17g", x);
        for (const auto& h : hats) std::fprintf(f, ",%.17g", h(x));
        std::fprintf(f, "\n");
      }
      std::fclose(f);
      return 0;
    }

    if (kinv_cmd->parsed()) {
      const auto grid = truncated_sg(ki_dim, ki_size, ki_seed);
      const TMKernel tm = parse_kernel_spec(ki_kernel, static_cast<std::size_t>(ki_dim));
      const auto kinv = inv_tsg(tm, grid);
      write_matrix_market(ki_out, kinv);
      const auto rep = sparsity_report(kinv);
      std::cout << "n=" << rep.n << " nnz=" << rep.nnz << " density=" << rep.density << '\n';
      return 0;
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
