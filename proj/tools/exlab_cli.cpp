// Command-line front end: analyze, learn, validate, sweep, zoo, gen.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "exlab/exlab.hpp"

namespace {

using exlab::Error;
using exlab::ErrorKind;
using ojson = nlohmann::ordered_json;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Globals {
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool json = false;
};

/// Where a command reads its environment from.
struct EnvArgs {
  std::string file;
  std::string zoo;
  std::vector<std::string> params;

  void attach(CLI::App* cmd) {
    cmd->add_option("env", file, "environment JSON file");
    cmd->add_option("--zoo", zoo, "catalog entry instead of a file");
    cmd->add_option("--param", params, "catalog parameter as key=value (repeatable)");
  }

  exlab::ZooParams parsed_params() const {
    exlab::ZooParams out;
    for (const auto& kv : params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::BadParams, "expected key=value, got '" + kv + "'");
      try {
        out[kv.substr(0, eq)] = std::stoll(kv.substr(eq + 1));
      } catch (const std::logic_error&) {
        throw Error(ErrorKind::BadParams, "parameter '" + kv + "' is not an integer");
      }
    }
    return out;
  }

  exlab::ExBmdp load() const {
    if (!file.empty() && !zoo.empty()) throw Error(ErrorKind::SchemaError, "give either an env file or --zoo, not both");
    if (!zoo.empty()) return exlab::zoo_build(zoo, parsed_params()).env;
    if (file.empty()) throw Error(ErrorKind::SchemaError, "no environment given (file or --zoo)");
    return exlab::load_env(file);
  }
};

std::string witness_cell(const exlab::Witness& w) { return w ? std::to_string(*w) : "inf"; }

ojson witness_json(const exlab::Witness& w) { return w ? ojson(*w) : ojson("inf"); }

int cmd_analyze(const Globals& g, const EnvArgs& env_args, bool check_theorem) {
  const exlab::ExBmdp env = env_args.load();
  const auto& endo = env.endo();
  const exlab::AnalysisReport rep = exlab::analyze(endo);
  std::optional<exlab::DPrimeReport> theorem;
  if (check_theorem) theorem = exlab::verify_dprime_theorem(endo);

  if (g.json) {
    ojson j;
    j["env"] = env.name();
    j["n_endogenous"] = endo.n_states;
    j["diameter"] = rep.diameter;
    j["period"] = rep.period;
    j["cyclic_class"] = rep.cyclic_class;
    j["max_finite_witness"] = rep.max_finite_witness;
    j["d_prime_bound"] = rep.d_prime_bound;
    ojson w = ojson::array();
    for (const auto& row : rep.witness) {
      ojson r = ojson::array();
      for (const auto& v : row) r.push_back(witness_json(v));
      w.push_back(r);
    }
    j["witness"] = w;
    if (theorem) j["theorem"] = {{"pass", theorem->pass}, {"message", theorem->message}};
    std::cout << j.dump(2) << "\n";
    return 0;
  }

  std::cout << std::left;
  std::cout << std::setw(22) << "env" << env.name() << "\n"
            << std::setw(22) << "endogenous states" << endo.n_states << "\n"
            << std::setw(22) << "diameter" << rep.diameter << "\n"
            << std::setw(22) << "period" << rep.period << "\n"
            << std::setw(22) << "max finite witness" << rep.max_finite_witness << "\n"
            << std::setw(22) << "bound 2D^2+D" << rep.d_prime_bound << "\n";
  std::cout << std::setw(22) << "cyclic classes";
  for (std::size_t s = 0; s < rep.cyclic_class.size(); ++s) std::cout << (s ? " " : "") << rep.cyclic_class[s];
  std::cout << "\nwitness distances:\n";
  std::size_t width = 4;
  for (const auto& row : rep.witness)
    for (const auto& v : row) width = std::max(width, witness_cell(v).size() + 1);
  std::cout << std::right << std::setw(static_cast<int>(width)) << "";
  for (std::size_t b = 0; b < endo.n_states; ++b) std::cout << std::setw(static_cast<int>(width)) << b;
  std::cout << "\n";
  for (std::size_t a = 0; a < endo.n_states; ++a) {
    std::cout << std::setw(static_cast<int>(width)) << a;
    for (std::size_t b = 0; b < endo.n_states; ++b)
      std::cout << std::setw(static_cast<int>(width)) << witness_cell(rep.witness[a][b]);
    std::cout << "\n";
  }
  if (theorem) std::cout << "theorem check: " << (theorem->pass ? "pass" : "FAIL") << " (" << theorem->message << ")\n";
  return 0;
}

struct LearnArgs {
  std::string loss = "ACDF";
  std::size_t K = 1;
  std::size_t steps = 5000;
  std::size_t trajectories = 1;
  std::string start = "uniform";
  std::string emit_losses;
  bool exact = false;
  double tolerance = 0.001;
  double floor = 1e-7;
};

void write_losses_csv(const std::string& path, const std::vector<exlab::EncoderLoss>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  out << "encoder,n_latent,loss\n";
  out << std::setprecision(17);
  for (const auto& r : rows) out << r.encoder.to_string() << ',' << r.encoder.n_latent << ',' << r.loss << '\n';
}

int cmd_learn(const Globals& g, const EnvArgs& env_args, const LearnArgs& a) {
  const exlab::ExBmdp env = env_args.load();
  exlab::LossConfig config;
  config.variant = exlab::parse_variant(a.loss);
  config.K = a.K;
  config.tolerance = a.tolerance;
  config.smoothing_floor = a.floor;
  config.validate();
  exlab::LearnOptions opts;
  opts.threads = g.threads;
  opts.keep_losses = !a.emit_losses.empty();

  exlab::LearnResult res;
  if (a.exact) {
    res = exlab::learn_exact(env, config, opts);
  } else {
    if (a.trajectories < 1) throw Error(ErrorKind::SchemaError, "--trajectories must be at least 1");
    exlab::DataParams data;
    data.n_trajectories = a.trajectories;
    data.length = a.steps / a.trajectories;
    data.start = exlab::StartMode::parse(a.start);
    res = exlab::learn(env, config, data, g.seed, opts);
  }
  const exlab::Outcome outcome = exlab::classify(res.encoder, env, g.threads);
  if (res.per_encoder_losses) write_losses_csv(a.emit_losses, *res.per_encoder_losses);

  if (g.json) {
    ojson j;
    j["env"] = env.name();
    j["loss"] = exlab::to_string(config.variant);
    j["K"] = config.K;
    j["mode"] = a.exact ? "exact" : "sampled";
    if (!a.exact) {
      j["steps"] = a.steps;
      j["trajectories"] = a.trajectories;
      j["seed"] = g.seed;
    }
    j["encoder"] = res.encoder.to_string();
    j["n_latent"] = res.encoder.n_latent;
    j["min_loss"] = res.loss;
    j["n_evaluated"] = res.n_evaluated;
    j["outcome"] = exlab::to_string(outcome.kind);
    j["detail"] = outcome.detail;
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::cout << "env         " << env.name() << "\n"
            << "objective   " << config.describe() << (a.exact ? " (exact statistics)" : "") << "\n";
  if (!a.exact)
    std::cout << "data        " << a.trajectories << " x " << a.steps / a.trajectories << " steps, seed " << g.seed
              << "\n";
  std::cout << "encoder     " << res.encoder.to_string() << "  (" << res.encoder.n_latent << " latent states)\n";
  for (const auto& block : res.encoder.blocks()) {
    std::cout << "            {";
    for (std::size_t i = 0; i < block.size(); ++i) std::cout << (i ? "," : "") << env.label(block[i]);
    std::cout << "}\n";
  }
  std::cout << "loss        " << std::setprecision(10) << res.loss << "\n"
            << "evaluated   " << res.n_evaluated << " encoders\n"
            << "outcome     " << exlab::to_string(outcome.kind) << "\n"
            << "detail      " << outcome.detail << "\n";
  return 0;
}

int cmd_validate(const Globals& g, const EnvArgs& env_args, const std::string& encoder_text) {
  const exlab::ExBmdp env = env_args.load();
  exlab::Encoder enc;
  try {
    enc = exlab::Encoder::parse(encoder_text);
  } catch (const Error& e) {
    throw Error(ErrorKind::SchemaError, e.what());
  }
  const exlab::Outcome out = exlab::classify(enc, env, g.threads);
  if (g.json) {
    ojson j;
    j["env"] = env.name();
    j["encoder"] = exlab::Encoder::canonical(enc.assignment).to_string();
    j["n_latent"] = out.n_latent;
    j["outcome"] = exlab::to_string(out.kind);
    if (out.kind != exlab::OutcomeKind::Incorrect) j["minimal_size"] = out.minimal_size;
    j["detail"] = out.detail;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << exlab::to_string(out.kind) << "\n" << out.detail << "\n";
  }
  return 0;
}

struct SweepArgs {
  std::string config;
  std::string out;
  std::string svg;
  std::string summary;
  bool no_timing = false;
};

int cmd_sweep(const Globals& g, const SweepArgs& a) {
  const exlab::SweepConfig config = exlab::SweepConfig::load(a.config);
  const auto rows = exlab::run_sweep(config, {g.threads, !a.no_timing});
  {
    std::ofstream out(a.out);
    if (!out) throw Error(ErrorKind::IoError, "cannot write '" + a.out + "'");
    exlab::write_rows_csv(out, rows);
  }
  const auto cells = exlab::summarize(rows);
  if (!a.summary.empty()) {
    std::ofstream out(a.summary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write '" + a.summary + "'");
    exlab::write_summary_csv(out, cells);
  }
  std::vector<std::string> plots;
  if (!a.svg.empty()) plots = exlab::write_svg_plots(cells, a.svg);

  if (g.json) {
    ojson j;
    j["rows"] = rows.size();
    j["out"] = a.out;
    ojson cj = ojson::array();
    for (const auto& c : cells)
      cj.push_back({{"env", c.env},
                    {"variant", exlab::to_string(c.variant)},
                    {"K", c.K},
                    {"steps", c.steps},
                    {"trials", c.n},
                    {"rate_correct", c.rate_correct()},
                    {"rate_minimal", c.rate_minimal()},
                    {"errors", c.errors}});
    j["summary"] = cj;
    j["plots"] = plots;
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::cout << rows.size() << " rows written to " << a.out << "\n";
  std::cout << std::left << std::setw(28) << "env" << std::setw(12) << "variant" << std::right << std::setw(4) << "K"
            << std::setw(8) << "steps" << std::setw(9) << "correct" << std::setw(9) << "minimal" << std::setw(8)
            << "errors" << "\n";
  for (const auto& c : cells)
    std::cout << std::left << std::setw(28) << c.env << std::setw(12) << exlab::to_string(c.variant) << std::right
              << std::setw(4) << c.K << std::setw(8) << c.steps << std::setw(9) << std::fixed << std::setprecision(3)
              << c.rate_correct() << std::setw(9) << c.rate_minimal() << std::setw(8) << c.errors << "\n";
  for (const auto& p : plots) std::cout << "plot: " << p << "\n";
  return 0;
}

std::string params_text(const exlab::ZooParams& params) {
  std::string s;
  for (const auto& [k, v] : params) s += (s.empty() ? "" : " ") + k + "=" + std::to_string(v);
  return s;
}

int cmd_zoo_list(const Globals& g) {
  ojson arr = ojson::array();
  if (!g.json)
    std::cout << std::left << std::setw(22) << "name" << std::setw(10) << "params" << std::setw(5) << "|X|"
              << std::setw(5) << "|S*|" << std::setw(4) << "D" << std::setw(8) << "period" << "description\n";
  for (const auto& info : exlab::zoo_catalog()) {
    const exlab::ZooEntry e = exlab::zoo_build(info.name, info.defaults);
    auto opt = [](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string("-"); };
    if (g.json) {
      ojson j;
      j["name"] = info.name;
      j["params"] = info.defaults;
      j["n_obs"] = e.env.n_obs();
      if (e.expected.minimal_size) j["minimal_size"] = *e.expected.minimal_size;
      if (e.expected.diameter) j["diameter"] = *e.expected.diameter;
      if (e.expected.period) j["period"] = *e.expected.period;
      j["claims"] = e.expected.claims;
      j["description"] = info.description;
      arr.push_back(j);
      continue;
    }
    std::cout << std::setw(22) << info.name << std::setw(10) << params_text(info.defaults) << std::setw(5)
              << e.env.n_obs() << std::setw(5) << opt(e.expected.minimal_size) << std::setw(4)
              << opt(e.expected.diameter) << std::setw(8) << opt(e.expected.period) << info.description << "\n";
    for (const auto& c : e.expected.claims) std::cout << std::setw(22) << "" << "- " << c << "\n";
  }
  if (g.json) std::cout << arr.dump(2) << "\n";
  return 0;
}

int cmd_zoo_emit(const std::string& name, const EnvArgs& env_args, const std::string& out) {
  const exlab::ZooEntry e = exlab::zoo_build(name, env_args.parsed_params());
  if (out.empty() || out == "-") {
    std::cout << exlab::serialize_env(e.env);
  } else {
    exlab::save_env(e.env, out);
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

struct GenEnvArgs {
  std::size_t n_endo = 4;
  std::size_t n_exo = 2;
  std::size_t n_actions = 2;
  bool aperiodic = false;
  std::optional<std::size_t> period;
  std::string out;
};

int cmd_gen_env(const Globals& g, const GenEnvArgs& a) {
  exlab::RandomRequirement req;
  req.aperiodic = a.aperiodic;
  req.period = a.period;
  const exlab::ExBmdp env = exlab::random_exbmdp(a.n_endo, a.n_exo, a.n_actions, g.seed, req);
  if (a.out.empty() || a.out == "-") {
    std::cout << exlab::serialize_env(env);
  } else {
    exlab::save_env(env, a.out);
    std::cout << "wrote " << a.out << "\n";
  }
  return 0;
}

struct GenDataArgs {
  std::size_t trajectories = 1;
  std::size_t length = 1000;
  std::string start = "uniform";
  std::string out;
};

int cmd_gen_data(const Globals& g, const EnvArgs& env_args, const GenDataArgs& a) {
  const exlab::ExBmdp env = env_args.load();
  const auto ds = exlab::sample_dataset(env, a.trajectories, a.length, g.seed, exlab::StartMode::parse(a.start),
                                        nullptr, g.threads);
  const std::string note = "env=" + env.name();
  if (a.out.empty() || a.out == "-") {
    exlab::write_dataset(std::cout, ds, note);
    return 0;
  }
  std::ofstream out(a.out);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + a.out + "'");
  exlab::write_dataset(out, ds, note);
  std::cout << "wrote " << ds.total_steps << " steps to " << a.out << "\n";
  return 0;
}

bool is_config_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SchemaError:
    case ErrorKind::BadParams:
    case ErrorKind::UnknownEntry:
    case ErrorKind::ConfigMismatch:
    case ErrorKind::IoError:
    case ErrorKind::InvalidDynamics:
    case ErrorKind::InvalidExogenous:
    case ErrorKind::NonStochasticRow:
    case ErrorKind::EmissionNotClosed:
    case ErrorKind::InitialOffSupport:
    case ErrorKind::InvalidEncoder:
      return true;
    default:
      return false;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exogenous block MDP encoder learning toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "base random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)")->capture_default_str();
  app.add_flag("--json", g.json, "machine-readable output");

  int status = 0;

  EnvArgs analyze_env;
  bool check_theorem = false;
  auto* analyze = app.add_subcommand("analyze", "diameter, period and witness distances of the endogenous dynamics");
  analyze_env.attach(analyze);
  analyze->add_flag("--check-theorem", check_theorem, "also verify the witness-distance bound");
  analyze->callback([&] { status = cmd_analyze(g, analyze_env, check_theorem); });

  EnvArgs learn_env;
  LearnArgs learn_args;
  auto* learn = app.add_subcommand("learn", "score every encoder and select the smallest near-optimal one");
  learn_env.attach(learn);
  learn->add_option("--loss", learn_args.loss, "ACState, ACDF, FullMulti or ImpreciseK")->capture_default_str();
  learn->add_option("--K", learn_args.K, "largest span length")->capture_default_str();
  learn->add_option("--steps", learn_args.steps, "steps per dataset (train and validation each)")->capture_default_str();
  learn->add_option("--trajectories", learn_args.trajectories, "trajectories per dataset")->capture_default_str();
  learn->add_option("--start", learn_args.start, "uniform, per-class, initial or fixed:i,j")->capture_default_str();
  learn->add_option("--tolerance", learn_args.tolerance, "relative selection slack")->capture_default_str();
  learn->add_option("--floor", learn_args.floor, "probability floor for unseen outcomes")->capture_default_str();
  learn->add_option("--emit-losses", learn_args.emit_losses, "write every encoder's loss to this CSV");
  learn->add_flag("--exact", learn_args.exact, "use exact long-run statistics instead of samples");
  learn->callback([&] { status = cmd_learn(g, learn_env, learn_args); });

  EnvArgs validate_env;
  std::string encoder_text;
  auto* validate = app.add_subcommand("validate", "classify an encoder against the ground truth");
  validate_env.attach(validate);
  validate->add_option("--encoder", encoder_text, "labels as \"0112\" or \"0,1,1,2\"")->required();
  validate->callback([&] { status = cmd_validate(g, validate_env, encoder_text); });

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "multi-trial success-rate grid");
  sweep->add_option("--config", sweep_args.config, "sweep configuration JSON")->required();
  sweep->add_option("--out", sweep_args.out, "row CSV")->required();
  sweep->add_option("--svg", sweep_args.svg, "directory for success-curve plots");
  sweep->add_option("--summary", sweep_args.summary, "success-rate CSV");
  sweep->add_flag("--no-timing", sweep_args.no_timing, "write runtime_ms as 0");
  sweep->callback([&] { status = cmd_sweep(g, sweep_args); });

  auto* zoo = app.add_subcommand("zoo", "catalog of built-in environments");
  zoo->require_subcommand(1);
  auto* zoo_list = zoo->add_subcommand("list", "list entries with their expected properties");
  zoo_list->callback([&] { status = cmd_zoo_list(g); });
  std::string emit_name, emit_out;
  EnvArgs emit_params;
  auto* zoo_emit = zoo->add_subcommand("emit", "write an entry as an env file");
  zoo_emit->add_option("--name", emit_name, "entry name")->required();
  zoo_emit->add_option("--param", emit_params.params, "parameter as key=value (repeatable)");
  zoo_emit->add_option("--out", emit_out, "output path (stdout when omitted)");
  zoo_emit->callback([&] { status = cmd_zoo_emit(emit_name, emit_params, emit_out); });

  auto* gen = app.add_subcommand("gen", "generate random environments or dataset caches");
  gen->require_subcommand(1);
  GenEnvArgs gen_env_args;
  auto* gen_env = gen->add_subcommand("env", "random environment with full emission");
  gen_env->add_option("--n-endo", gen_env_args.n_endo)->capture_default_str();
  gen_env->add_option("--n-exo", gen_env_args.n_exo)->capture_default_str();
  gen_env->add_option("--n-actions", gen_env_args.n_actions)->capture_default_str();
  gen_env->add_flag("--aperiodic", gen_env_args.aperiodic, "require aperiodic endogenous dynamics");
  gen_env->add_option("--period", gen_env_args.period, "require this period");
  gen_env->add_option("--out", gen_env_args.out, "output path (stdout when omitted)");
  gen_env->callback([&] { status = cmd_gen_env(g, gen_env_args); });
  EnvArgs gen_data_env;
  GenDataArgs gen_data_args;
  auto* gen_data = gen->add_subcommand("data", "sample a dataset cache under the uniform policy");
  gen_data_env.attach(gen_data);
  gen_data->add_option("--trajectories", gen_data_args.trajectories)->capture_default_str();
  gen_data->add_option("--length", gen_data_args.length)->capture_default_str();
  gen_data->add_option("--start", gen_data_args.start)->capture_default_str();
  gen_data->add_option("--out", gen_data_args.out, "output path (stdout when omitted)");
  gen_data->callback([&] { status = cmd_gen_data(g, gen_data_env, gen_data_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_config_error(e.kind()) ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return status;
}
