// hidegl: benchmark harness for graph-based semi-supervised learning with high-dense points.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hidegl/bench.hpp"
#include "hidegl/config.hpp"
#include "hidegl/error.hpp"
#include "hidegl/graph.hpp"
#include "hidegl/hdp.hpp"
#include "hidegl/serialize.hpp"

namespace {

constexpr const char* kSeedEnv = "HIDEGL_SEED";

// `--key value` and `--key=value` pairs left over after CLI11 parsing.
void apply_overrides(hidegl::KeyValueConfig& kv, const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.size() < 3) throw hidegl::UsageError("unexpected argument '" + arg + "'");
    std::string key = arg.substr(2);
    std::string value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.erase(eq);
    } else {
      if (i + 1 >= extras.size()) throw hidegl::UsageError("flag '" + arg + "' needs a value");
      value = extras[++i];
    }
    for (char& ch : key)
      if (ch == '-') ch = '_';
    kv.set(key, value);
  }
}

// --seed flag, then $HIDEGL_SEED, then the config file's seed key.
void resolve_seed(hidegl::KeyValueConfig& kv, const std::string& flag) {
  if (!flag.empty()) {
    kv.set("seed", flag);
  } else if (const char* env = std::getenv(kSeedEnv); env && *env) {
    kv.set("seed", env);
  }
}

hidegl::KeyValueConfig load_config(const std::string& path, const std::string& seed, const CLI::App& sub) {
  hidegl::KeyValueConfig kv = path.empty() ? hidegl::KeyValueConfig{} : hidegl::KeyValueConfig::load(path);
  apply_overrides(kv, sub.remaining());
  resolve_seed(kv, seed);
  return kv;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw hidegl::InvalidArgument("cannot write " + path);
  out << text << '\n';
}

int cmd_gen(const std::string& out_path, const std::string& seed_flag, const CLI::App& sub) {
  hidegl::KeyValueConfig kv;
  apply_overrides(kv, sub.remaining());
  resolve_seed(kv, seed_flag);
  hidegl::ThreeMoonSpec spec;
  spec.n_per_class = kv.get_int("n_per_class", spec.n_per_class);
  spec.ambient_dim = kv.get_int("ambient_dim", spec.ambient_dim);
  spec.noise_sd = kv.get_double("noise_sd", spec.noise_sd);
  spec.seed = kv.get_uint("seed", spec.seed);
  for (const auto& [key, value] : kv.entries()) {
    (void)value;
    if (key != "n_per_class" && key != "ambient_dim" && key != "noise_sd" && key != "seed")
      throw hidegl::UsageError("gen-threemoon does not take '" + key + "'");
  }
  const hidegl::Dataset ds = hidegl::gen_three_moon(spec);
  std::ofstream out(out_path);
  if (!out) throw hidegl::InvalidArgument("cannot write " + out_path);
  if (out_path.size() >= 4 && out_path.compare(out_path.size() - 4, 4, ".csv") == 0)
    hidegl::write_csv(ds, out);
  else
    hidegl::write_libsvm(ds, out);
  std::cerr << "wrote " << ds.n() << " points (d = " << ds.d() << ") to " << out_path << '\n';
  return 0;
}

int cmd_bench(const hidegl::KeyValueConfig& kv) {
  const hidegl::RunConfig cfg = hidegl::run_config_from(kv);
  const hidegl::BenchReport report = hidegl::run_bench(cfg);
  hidegl::write_report_csv(report, std::cout);
  if (!cfg.out.empty()) emit(cfg.out, hidegl::report_to_json(report));
  return 0;
}

int cmd_grid(const hidegl::KeyValueConfig& kv) {
  hidegl::ParamGrid grid;
  const hidegl::RunConfig base = hidegl::run_config_from(kv, &grid);
  const hidegl::GridResult result = hidegl::grid_search(base, grid);
  std::cout << "best cell:";
  for (const auto& axis : grid) std::cout << ' ' << axis.key << '=' << hidegl::get_hyper(result.best.hp, axis.key);
  std::cout << "  mean accuracy " << result.report.mean_accuracy() << '\n';
  hidegl::write_report_csv(result.report, std::cout);
  if (!base.out.empty()) emit(base.out, hidegl::grid_result_to_json(result, grid));
  return 0;
}

int cmd_diagnose(const hidegl::KeyValueConfig& kv) {
  const hidegl::RunConfig cfg = hidegl::run_config_from(kv);
  if (!hidegl::is_hidegl(cfg.method)) throw hidegl::UsageError("diagnose needs a hidegl-* method");
  hidegl::validate(cfg);
  const hidegl::Dataset ds = hidegl::load_run_dataset(cfg.data);
  hidegl::HdpConfig hcfg;
  hcfg.k = cfg.hp.k;
  hcfg.sigma = cfg.hp.sigma;
  hcfg.lambda1 = cfg.hp.lambda1;
  hcfg.max_outer_iters = cfg.hp.hdp_iters;
  hcfg.tol = cfg.hp.hdp_tol;
  hcfg.kmeans = {cfg.hp.kmeans_iters, cfg.hp.kmeans_restarts, hidegl::init_seed(cfg.master_seed)};
  const hidegl::HdpModel model = hidegl::fit_hdp(ds, hcfg);
  const bool exact =
      cfg.method == hidegl::Method::hidegl_l_accurate || cfg.method == hidegl::Method::hidegl_a_accurate;
  const hidegl::GraphFactor factor =
      exact ? hidegl::build_exact_factor(model, cfg.hp.alpha, cfg.hp.eta)
            : hidegl::build_approx_factor(model, cfg.hp.alpha, cfg.hp.eta);
  const hidegl::SpectralReport report = hidegl::spectral_diagnostics(factor);
  emit(cfg.out, hidegl::spectral_report_to_json(report));
  std::cerr << "spectral checks " << (report.all_ok() ? "passed" : "FAILED") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-based semi-supervised learning with high-dense points.\n"
               "Config files hold `key = value` lines; every key can be overridden with --key value.\n"
               "--seed falls back to $HIDEGL_SEED, then to the config's seed key.\n"
               "For agr-* methods, gamma is the reduced solver's regularization weight (the lambda2 slot)."};
  app.require_subcommand(1);

  std::string out_path, seed, config;

  auto* gen = app.add_subcommand("gen-threemoon", "Write a three-moon dataset (LIBSVM, or CSV for *.csv)");
  gen->add_option("--out", out_path, "Output path")->required();
  gen->add_option("--seed", seed, "Generator seed");
  gen->allow_extras();

  auto* bench = app.add_subcommand("bench", "Repeated label-draw evaluation of one configuration");
  auto* grid = app.add_subcommand("grid", "Exhaustive grid search; comma lists in the config become axes");
  auto* diagnose = app.add_subcommand("diagnose", "Spectral diagnostics of a small HiDeGL graph");
  for (auto* sub : {bench, grid, diagnose}) {
    sub->add_option("--config", config, "Config file");
    sub->add_option("--seed", seed, "Master seed");
    sub->allow_extras();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) return cmd_gen(out_path, seed, *gen);
    if (bench->parsed()) return cmd_bench(load_config(config, seed, *bench));
    if (grid->parsed()) return cmd_grid(load_config(config, seed, *grid));
    if (diagnose->parsed()) return cmd_diagnose(load_config(config, seed, *diagnose));
  } catch (const hidegl::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const hidegl::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const hidegl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
