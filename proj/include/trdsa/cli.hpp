#pragma once

#include <cstdint>
#include <cstdlib>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "trdsa/analytics.hpp"
#include "trdsa/errors.hpp"
#include "trdsa/params.hpp"
#include "trdsa/simulator.hpp"
#include "trdsa/sweep.hpp"

namespace trdsa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNoSolution = 3;
inline constexpr int kExitInternal = 4;

inline constexpr const char* kParallelismEnv = "TRDSA_PARALLELISM";

struct Environment {
  /// Whether a user is at the terminal; only then may --seed be omitted.
  bool interactive = false;
  unsigned default_parallelism = 1;
};

/// Default worker count: TRDSA_PARALLELISM if set, else the hardware count.
inline unsigned default_parallelism() {
  if (const char* env = std::getenv(kParallelismEnv)) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

namespace detail {

struct Options {
  std::string share = "0";
  long z = 0;
  long window = 1;
  long l = 1;
  long m = 0;
  long n = 0;
  std::optional<long> k;
  std::uint64_t runs = 10000;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> parallelism;
  std::string format = "csv";
  std::string out;
  std::string backend = "float";
  std::string preset;
  std::string spec;
  bool simulate = false;
  bool verbose = false;
  double threshold = 0.001;
  long z_max = 12;
};

inline Backend parse_backend(const std::string& name) {
  if (name == "float") return Backend::float_compensated;
  if (name == "rational") return Backend::exact_rational;
  throw ValidationError("unknown backend '" + name + "'");
}

template <class T>
void print_probability(std::ostream& out, std::ostream& err, const Probability<T>& p) {
  out << sweep::format_number(p.to_double()) << '\n';
  if constexpr (!std::is_same_v<T, double>) out << "exact " << p.value().str() << '\n';
  if (p.clamped()) err << "note: result clamped into [0, 1]\n";
}

template <class T>
int compute_q(const Options& o, std::ostream& out, std::ostream& err) {
  const auto share = HashShare::parse(o.share);
  const RaceQuery query{o.l, o.m, o.n};
  query.validate();
  const auto p = analytics::catch_up_probability<T>(query, share);
  print_probability(out, err, p);
  if (o.verbose && query.lag >= 0 && query.elapsed < query.deadline) {
    const auto table = analytics::detail::table_for(query);
    out << "i,a_im,term\n";
    for (const auto& term : analytics::catch_up_terms(query, share, table)) {
      out << term.index << ',' << term.coefficient.str() << ',' << sweep::format_number(term.value) << '\n';
    }
  }
  return kExitOk;
}

template <class T>
int compute_tr(const Options& o, std::ostream& out, std::ostream& err) {
  const AttackParams params{HashShare::parse(o.share), o.z, o.window};
  params.validate();
  const auto table = analytics::table_for_attack(params.window, params.depth);
  const auto p = analytics::tr_success_probability<T>(params, table);
  print_probability(out, err, p);
  if (o.verbose) {
    const auto dist = analytics::lead_distribution<double>(params.share, params.depth);
    out << "lead_tail," << sweep::format_number(dist.tail) << '\n';
    out << "k,lead_pmf,q_catch_up\n";
    for (long k = 0; k <= params.depth + 1; ++k) {
      const RaceQuery race{params.window, params.depth + 1 - k, 0};
      out << k << ',' << sweep::format_number(dist.pmf[static_cast<std::size_t>(k)]) << ','
          << sweep::format_number(analytics::catch_up_probability<double>(race, params.share, table).to_double())
          << '\n';
    }
  }
  return kExitOk;
}

template <class T>
int compute_tu(const Options& o, std::ostream& out, std::ostream& err) {
  print_probability(out, err, analytics::tu_success_probability<T>(HashShare::parse(o.share), o.z));
  return kExitOk;
}

template <class T>
int compute_lead(const Options& o, std::ostream& out, std::ostream& err) {
  const auto share = HashShare::parse(o.share);
  if (o.k) {
    print_probability(out, err, analytics::lead_pmf<T>(share, o.z, *o.k));
    return kExitOk;
  }
  const auto dist = analytics::lead_distribution<T>(share, o.z);
  out << "k,lead_pmf\n";
  for (std::size_t k = 0; k < dist.pmf.size(); ++k) out << k << ',' << sweep::format_number(to_double(dist.pmf[k])) << '\n';
  out << "tail," << sweep::format_number(to_double(dist.tail)) << '\n';
  return kExitOk;
}

template <class Fn>
int with_backend(const Options& o, Fn&& fn) {
  return parse_backend(o.backend) == Backend::float_compensated ? fn(double{}) : fn(Rational{});
}

inline sim::SimConfig sim_config(const Options& o, const Environment& env, std::ostream& out) {
  sim::SimConfig config;
  config.runs = o.runs;
  config.parallelism = o.parallelism.value_or(env.default_parallelism);
  if (o.seed) {
    config.seed = *o.seed;
  } else if (env.interactive) {
    std::random_device device;
    config.seed = (std::uint64_t{device()} << 32U) | device();
    out << "# no --seed given, using random seed " << config.seed << '\n';
  } else {
    throw ValidationError("--seed is required when not running interactively");
  }
  config.validate();
  return config;
}

inline void print_estimate(std::ostream& out, const sim::EmpiricalEstimate& e) {
  out << "p_hat " << sweep::format_number(e.p_hat) << '\n'
      << "stderr " << sweep::format_number(e.std_error) << '\n'
      << "runs " << e.runs << '\n'
      << "seed " << e.seed << '\n';
}

inline int recommend(const Options& o, std::ostream& out) {
  const auto share = HashShare::parse(o.share);
  const auto rec = analytics::min_confirmation_depth<double>(share, o.window, o.threshold, o.z_max);
  out << "z,p_tr\n";
  for (const auto& probe : rec.scan) out << probe.depth << ',' << sweep::format_number(probe.success) << '\n';
  if (rec.non_monotone) {
    out << "warning: P_tr increases with Z somewhere in the scan; a deeper confirmation is not always safer\n";
  }
  if (!rec.depth) {
    out << "no Z in 0.." << o.z_max << " keeps P_tr <= " << sweep::format_number(o.threshold) << '\n';
    return kExitNoSolution;
  }
  out << "recommended_z " << *rec.depth << '\n';
  return kExitOk;
}

inline int run_sweep(const Options& o, const Environment& env, std::ostream& out) {
  if (o.preset.empty() == o.spec.empty()) throw ValidationError("sweep needs exactly one of --preset or --spec");
  auto specs = o.preset.empty() ? sweep::load_spec_file(o.spec) : sweep::preset(o.preset);
  if (o.simulate) sweep::attach_simulation(specs, sim_config(o, env, out));
  sweep::Format format;
  if (o.format == "csv") {
    format = sweep::Format::csv;
  } else if (o.format == "json") {
    format = sweep::Format::json;
  } else {
    throw ValidationError("unknown format '" + o.format + "'");
  }
  const std::string text = sweep::render(sweep::evaluate(specs, parse_backend(o.backend)), format);
  if (o.out.empty()) {
    out << text;
  } else {
    sweep::write_file_atomic(o.out, text);
  }
  return kExitOk;
}

}  // namespace detail

/// Runs one command line; returns the process exit code.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err, const Environment& env) {
  detail::Options o;
  CLI::App app{"Time-restricted double-spending attack probabilities"};
  app.require_subcommand(1);

  auto add_share = [&](CLI::App* c) { c->add_option("--share", o.share, "attacker block share I in [0,1)")->required(); };
  auto add_backend = [&](CLI::App* c) {
    c->add_option("--backend", o.backend, "float or rational")->check(CLI::IsMember({"float", "rational"}));
  };
  auto add_sim = [&](CLI::App* c) {
    c->add_option("--runs", o.runs, "Monte Carlo runs");
    c->add_option("--seed", o.seed, "64-bit seed");
    c->add_option("--parallelism", o.parallelism, "worker threads");
  };

  auto* q = app.add_subcommand("q", "catch-up probability Q(l, m, n)");
  add_share(q);
  q->add_option("--l", o.l, "honest-block deadline")->required();
  q->add_option("--m", o.m, "attacker lag")->required();
  q->add_option("--n", o.n, "honest blocks already mined");
  add_backend(q);
  q->add_flag("--verbose", o.verbose, "print the closed-form terms");

  auto* tr = app.add_subcommand("tr", "time-restricted attack success probability");
  add_share(tr);
  tr->add_option("--z", o.z, "confirmation depth Z")->required();
  tr->add_option("--window", o.window, "attack window L")->required();
  add_backend(tr);
  tr->add_flag("--verbose", o.verbose, "print the lead/catch-up breakdown");

  auto* tu = app.add_subcommand("tu", "time-unrestricted attack success probability");
  add_share(tu);
  tu->add_option("--z", o.z, "confirmation depth Z")->required();
  add_backend(tu);

  auto* lead = app.add_subcommand("lead", "attacker lead distribution at confirmation");
  add_share(lead);
  lead->add_option("--z", o.z, "confirmation depth Z")->required();
  lead->add_option("--k", o.k, "single lead value");
  add_backend(lead);

  auto* sw = app.add_subcommand("sweep", "parameter sweeps and figure presets");
  sw->add_option("--preset", o.preset, "preset name")->check(CLI::IsMember(sweep::preset_names()));
  sw->add_option("--spec", o.spec, "JSON sweep spec file");
  sw->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sw->add_option("--out", o.out, "output file (written atomically)");
  sw->add_flag("--simulate", o.simulate, "attach Monte Carlo columns");
  add_sim(sw);
  add_backend(sw);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates");
  simulate->require_subcommand(1);
  auto* race = simulate->add_subcommand("race", "simulate the catch-up race");
  add_share(race);
  race->add_option("--l", o.l, "honest-block deadline")->required();
  race->add_option("--m", o.m, "attacker lag")->required();
  race->add_option("--n", o.n, "honest blocks already mined");
  add_sim(race);
  auto* attack = simulate->add_subcommand("attack", "simulate the whole attack");
  add_share(attack);
  attack->add_option("--z", o.z, "confirmation depth Z")->required();
  attack->add_option("--window", o.window, "attack window L")->required();
  add_sim(attack);

  auto* rec = app.add_subcommand("recommend-z", "smallest confirmation depth under a risk threshold");
  add_share(rec);
  rec->add_option("--window", o.window, "attack window L")->required();
  rec->add_option("--threshold", o.threshold, "acceptable P_tr");
  rec->add_option("--z-max", o.z_max, "largest depth scanned");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (q->parsed()) return detail::with_backend(o, [&](auto t) { return detail::compute_q<decltype(t)>(o, out, err); });
    if (tr->parsed()) return detail::with_backend(o, [&](auto t) { return detail::compute_tr<decltype(t)>(o, out, err); });
    if (tu->parsed()) return detail::with_backend(o, [&](auto t) { return detail::compute_tu<decltype(t)>(o, out, err); });
    if (lead->parsed()) {
      return detail::with_backend(o, [&](auto t) { return detail::compute_lead<decltype(t)>(o, out, err); });
    }
    if (sw->parsed()) return detail::run_sweep(o, env, out);
    if (race->parsed()) {
      const RaceQuery query{o.l, o.m, o.n};
      const auto share = HashShare::parse(o.share);
      const auto config = detail::sim_config(o, env, out);
      detail::print_estimate(out, sim::simulate_race(query, share, config));
      return kExitOk;
    }
    if (attack->parsed()) {
      const AttackParams params{HashShare::parse(o.share), o.z, o.window};
      const auto config = detail::sim_config(o, env, out);
      detail::print_estimate(out, sim::simulate_attack(params, config));
      return kExitOk;
    }
    if (rec->parsed()) return detail::recommend(o, out);
  } catch (const ConsistencyError& e) {
    err << "internal consistency error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const ResourceLimitError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitValidation;
}

}  // namespace trdsa::cli
