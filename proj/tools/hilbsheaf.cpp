// hilbsheaf: run the synthetic sweeps and write CSV artifacts.
//
// Exit codes: 0 success, 2 configuration error, 3 tolerance failure under
// --validate, 1 anything else.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "hilbsheaf/config.hpp"
#include "hilbsheaf/experiments.hpp"
#include "hilbsheaf/parallel.hpp"

namespace {

using namespace hilbsheaf;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int workers = 0;
  bool validate = false;
};

std::string sidecar(const std::string& out, const std::string& tag) {
  std::string stem = out;
  if (stem.size() > 4 && stem.compare(stem.size() - 4, 4, ".csv") == 0) stem.resize(stem.size() - 4);
  return stem + "." + tag + ".csv";
}

void emit(const std::string& path, const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file " + path);
  write(f);
  if (!f) throw std::runtime_error("failed writing " + path);
}

int report(const std::vector<std::string>& failures, bool enabled) {
  if (!enabled) return 0;
  for (const auto& f : failures) std::cerr << "validation: " << f << '\n';
  if (failures.empty()) {
    std::cerr << "validation: all checks passed\n";
    return 0;
  }
  return 3;
}

int run(const std::string& experiment, const Options& opt) {
  const KeyValueFile kv = opt.config.empty() ? KeyValueFile{} : KeyValueFile::load(opt.config);
  const std::uint64_t seed = opt.seed ? *opt.seed : kv.get_u64("seed", 0);
  set_threads(opt.workers);

  if (experiment == "transport-recovery") {
    const auto cfg = transport_recovery_config(kv);
    const auto r = run_transport_recovery(cfg, seed);
    emit(opt.out, [&](std::ostream& os) { write_csv(os, cfg, seed, r); });
    if (!opt.out.empty())
      emit(sidecar(opt.out, "edges"), [&](std::ostream& os) { write_edges_csv(os, cfg, seed, r); });
    return report(validate(r), opt.validate);
  }
  if (experiment == "spectral-stability") {
    const auto cfg = spectral_stability_config(kv);
    const auto r = run_spectral_stability(cfg, seed);
    emit(opt.out, [&](std::ostream& os) { write_csv(os, cfg, seed, r); });
    if (!opt.out.empty())
      emit(sidecar(opt.out, "summary"), [&](std::ostream& os) { write_summary_csv(os, cfg, seed, r); });
    return report(validate(r), opt.validate);
  }
  if (experiment == "circle-convergence") {
    const auto cfg = circle_convergence_config(kv);
    const auto r = run_circle_convergence(cfg, seed);
    emit(opt.out, [&](std::ostream& os) { write_csv(os, cfg, seed, r); });
    if (!opt.out.empty())
      emit(sidecar(opt.out, "summary"), [&](std::ostream& os) { write_summary_csv(os, cfg, seed, r); });
    return report(validate(r), opt.validate);
  }
  const auto cfg = gaussian_oracle_config(kv);
  const auto r = run_gaussian_oracle(cfg, seed);
  emit(opt.out, [&](std::ostream& os) { write_csv(os, cfg, seed, r); });
  return report(validate(r), opt.validate);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hilbert sheaf Laplacian experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hilbsheaf::code_version());

  Options opt;
  std::uint64_t seed_value = 0;
  std::vector<CLI::App*> subs;
  for (const char* name : {"transport-recovery", "spectral-stability", "circle-convergence", "gaussian-oracle"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed_value, "master seed (overrides the config)");
    sub->add_option("--out", opt.out, "output CSV path (stdout when omitted)");
    sub->add_option("--workers", opt.workers, "OpenMP threads (0 keeps the runtime default)")
        ->check(CLI::NonNegativeNumber);
    sub->add_flag("--validate", opt.validate, "check tolerances, exit 3 on failure");
    subs.push_back(sub);
  }
  app.get_subcommand("transport-recovery")->description("fit transport classes to Levi-Civita transports");
  app.get_subcommand("spectral-stability")->description("bottom-k eigenvalue discrepancy against a reference n");
  app.get_subcommand("circle-convergence")->description("point-cloud Laplacian error on the circle");
  app.get_subcommand("gaussian-oracle")->description("Monte-Carlo Gaussian moment identities");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::string experiment;
  for (auto* sub : subs)
    if (sub->parsed()) {
      experiment = sub->get_name();
      if (sub->count("--seed")) opt.seed = seed_value;
    }

  try {
    return run(experiment, opt);
  } catch (const hilbsheaf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::length_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
