#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "qvdp/scenarios.hpp"

using namespace qvdp;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> engine;
  std::optional<int> shots;
  std::optional<std::string> out;
  std::optional<int> threads;
};

// Switching engines converts between the two parameter sources.
void switch_engine(ExperimentConfig& c, Engine e) {
  if (c.engine == e) return;
  if (e == Engine::Stroboscopic) {
    const auto& p = *c.effective;
    const double ratio = p.kappa_minus / p.kappa_plus;
    const Regime r = std::abs(ratio - 0.14) < std::abs(ratio - 0.42) ? Regime::NearClassical : Regime::Quantum;
    c.schedule = reference_schedule(r, p.phi, p.delta1, p.delta2);
    c.effective.reset();
  } else {
    c.effective = effective_rates(*c.schedule);
    c.schedule.reset();
  }
  c.engine = e;
}

int run_verb(Scenario s, const Overrides& o) {
  try {
    ExperimentConfig c;
    if (!o.config.empty()) {
      c = load_config(o.config);
      if (c.scenario != s)
        throw Error(ErrorKind::Config, std::string("config is for scenario '") + scenario_name(c.scenario) +
                                           "', not '" + scenario_name(s) + "'");
    } else {
      if (!o.seed) throw Error(ErrorKind::Config, "--seed is required without --config");
      c = default_config(s, *o.seed);
    }
    if (o.seed) c.seed = *o.seed;
    if (o.engine) switch_engine(c, parse_engine(*o.engine));
    if (o.shots) {
      c.readout.shots = *o.shots;
      c.noise.shots = *o.shots;
    }
    if (o.out) c.output_dir = *o.out;
    if (o.threads) c.threads = *o.threads;
    c.validate();
    RunResult r = run_scenario(c);
    for (const auto& ch : r.checks)
      std::cout << (ch.pass ? "PASS " : "FAIL ") << ch.name << " value=" << ch.value << " bound=" << ch.bound
                << "\n";
    if (r.exit_code) std::cerr << "failed at stage '" << r.failed_stage << "': " << r.error << "\n";
    std::cout << "manifest: " << c.output_dir << "/manifest.json\n";
    return r.exit_code;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.kind() == ErrorKind::Config ? 2 : 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum van der Pol synchronisation simulator"};
  app.require_subcommand(1);
  Overrides o;
  int code = 0;
  for (auto s : {Scenario::SingleVdp, Scenario::LimitCycle, Scenario::Sync, Scenario::Arnold, Scenario::Sense,
                 Scenario::Meanfield, Scenario::TomoCheck}) {
    auto* sub = app.add_subcommand(scenario_name(s), std::string("run the ") + scenario_name(s) + " scenario");
    sub->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "run seed (overrides the config)");
    sub->add_option("--engine", o.engine, "effective | stroboscopic")
        ->check(CLI::IsMember({"effective", "stroboscopic"}));
    sub->add_option("--shots", o.shots, "readout shots per grid point (0 = exact)")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->callback([&, s] { code = run_verb(s, o); });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  return code;
}
