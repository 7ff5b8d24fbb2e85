#include "mulreg/cli.hpp"

#include "mulreg/error.hpp"
#include "mulreg/rng.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <functional>
#include <limits>
#include <iostream>
#include <memory>

namespace mulreg {

namespace {

//! One configurable field: its key, JSON round trip, and a copy used to let
//! explicitly given flags win over the config file.
struct Field {
  std::string flag;
  std::string key;
  std::function<void(RunConfig&, const Json&)> from_json;
  std::function<Json(const RunConfig&)> to_json;
  std::function<void(RunConfig&, const RunConfig&)> copy;
  std::function<CLI::Option*(CLI::App&, RunConfig&)> add;
};

template <class T>
Field field(std::string flag, T RunConfig::*member, std::string help)
{
  std::string key = flag;
  for (char& ch : key)
    if (ch == '-')
      ch = '_';
  Field f;
  f.flag = flag;
  f.key = key;
  f.from_json = [member](RunConfig& c, const Json& j) { c.*member = j.get<T>(); };
  f.to_json = [member](const RunConfig& c) { return Json(c.*member); };
  f.copy = [member](RunConfig& dst, const RunConfig& src) { dst.*member = src.*member; };
  f.add = [flag, member, help](CLI::App& app, RunConfig& c) {
    auto* opt = app.add_option("--" + flag, c.*member, help);
    if constexpr (requires { typename T::value_type; } && !std::is_same_v<T, std::string>)
      opt->delimiter(',');
    return opt;
  };
  return f;
}

const std::vector<Field>& fields()
{
  static const std::vector<Field> all{
    field("fn", &RunConfig::fn, "test function: f1, f2, f3, f4 or constant(c)"),
    field("n", &RunConfig::n, "sample size (a perfect d-th power)"),
    field("d", &RunConfig::d, "dimension"),
    field("b", &RunConfig::b, "local polynomial degree"),
    field("q", &RunConfig::q, "loss exponent in the theory threshold"),
    field("y", &RunConfig::y, "estimation point (all coordinates)"),
    field("h", &RunConfig::h, "bandwidth; 0 selects the minimax bandwidth in estimate"),
    field("mode", &RunConfig::mode, "threshold mode: theory or practical"),
    field("c-thr", &RunConfig::c_thr, "practical threshold constant"),
    field("method", &RunConfig::method, "integrator: auto, grid or sample"),
    field("nodes", &RunConfig::nodes, "grid nodes per axis"),
    field("proposals", &RunConfig::proposals, "proposal count for the sampling integrator"),
    field("seed", &RunConfig::seed, "master seed"),
    field("reps", &RunConfig::reps, "Monte Carlo replications"),
    field("out", &RunConfig::out, "primary output file name"),
    field("workers", &RunConfig::workers, "worker threads (0: MULREG_WORKERS or all cores)"),
    field("backend", &RunConfig::backend, "replication loop: openmp or serial"),
    field("A", &RunConfig::a_low, "known lower bound A (with M: fixed coefficient set)"),
    field("M", &RunConfig::m_up, "known upper bound M"),
    field("beta", &RunConfig::beta, "smoothness for the minimax bandwidth and rate targets"),
    field("L", &RunConfig::lipschitz, "Hoelder constant for the minimax bandwidth"),
    field("estimator", &RunConfig::estimator, "oracle estimator: fixed or lse"),
    field("candidates", &RunConfig::candidates, "oracle candidate bandwidths (comma separated)"),
    field("eps", &RunConfig::eps, "tail deviation grid (comma separated, increasing)"),
    field("noise", &RunConfig::noise, "uniform, or none for U = 1"),
    field("functions", &RunConfig::functions, "risk table functions"),
    field("ns", &RunConfig::ns, "sample sizes (risk table, rate)"),
    field("points", &RunConfig::points, "risk table evaluation points"),
  };
  return all;
}

IntegratorConfig integrator_of(const RunConfig& c)
{
  IntegratorConfig ic;
  ic.method = parse_method(c.method);
  ic.nodes_per_axis = c.nodes;
  ic.proposal_count = c.proposals;
  ic.seed = derive_seed(c.seed, 0x1f7e6a7cULL);
  return ic;
}

ThresholdParams thresholds_of(const RunConfig& c)
{
  ThresholdParams t;
  t.mode = parse_threshold_mode(c.mode);
  t.c_thr = c.c_thr;
  t.q = c.q;
  return t;
}

RunOptions run_of(const RunConfig& c)
{
  RunOptions r;
  r.reps = c.reps;
  r.master_seed = c.seed;
  r.workers = c.workers;
  r.backend = parse_backend(c.backend);
  r.noise = c.noise == "none" ? NoiseMode::None : NoiseMode::Uniform;
  return r;
}

bool known_bounds(const RunConfig& c)
{
  return c.a_low > 0.0 || c.m_up > 0.0;
}

void require(bool ok, ErrorKind kind, const std::string& what)
{
  if (!ok)
    throw Error(kind, what);
}

std::vector<double> point_of(const RunConfig& c)
{
  return std::vector<double>(static_cast<std::size_t>(c.d), c.y);
}

std::shared_ptr<const DesignGrid> grid_of(const RunConfig& c)
{
  return std::make_shared<const DesignGrid>(make_grid(c.d, c.n));
}

Sample sample_of(const RunConfig& c)
{
  return simulate(test_function(c.fn), grid_of(c), c.seed, run_of(c).noise);
}

std::string out_name(const RunConfig& c, const std::string& fallback)
{
  return c.out.empty() ? fallback : c.out;
}

std::string dump(const Json& j)
{
  return j.dump(2) + "\n";
}

} // namespace

RunConfig defaults_for(const std::string& command)
{
  RunConfig c;
  if (command == "replicate-table" || command == "oracle" || command == "replicate-f4" || command == "rate"
      || command == "tail")
    c.nodes = 16;
  if (command == "replicate-table")
    c.ns = {100, 1000};
  if (command == "replicate-f4")
    c.n = 1000;
  if (command == "rate") {
    c.ns = {100, 400, 1600};
    c.y = 0.3;
    c.reps = 500;
  }
  if (command == "tail") {
    c.fn = "constant(2)";
    c.n = 400;
    c.h = 0.25;
    c.reps = 5000;
    c.a_low = 1.0;
    c.m_up = 3.0;
  }
  return c;
}

Json to_json(const RunConfig& c)
{
  Json j = Json::object();
  for (const auto& f : fields())
    j[f.key] = f.to_json(c);
  return j;
}

void merge_json(RunConfig& c, const Json& j)
{
  if (!j.is_object())
    throw Error(ErrorKind::Config, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& f) { return f.key == key; });
    if (it == fields().end())
      throw Error(ErrorKind::Config, "unknown config key '" + key + "'");
    try {
      it->from_json(c, value);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Config, "bad value for '" + key + "': " + e.what());
    }
  }
}

Json load_config(const std::filesystem::path& path)
{
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Config, path.string() + ": " + e.what());
  }
  if (!j.is_object())
    throw Error(ErrorKind::Config, path.string() + ": config must be a JSON object");
  if (j.contains("manifest_version") && j.contains("config"))
    return j["config"];
  return j;
}

void validate(const std::string& command, const RunConfig& c)
{
  using K = ErrorKind;
  require(std::find(kCommands.begin(), kCommands.end(), command) != kCommands.end(), K::Config,
          "unknown command '" + command + "'");
  require(c.d >= 1, K::InvalidArgument, "d must be >= 1");
  require(c.b >= 0, K::InvalidArgument, "b must be >= 0");
  require(c.q > 0.0, K::InvalidArgument, "q must be positive");
  require(c.c_thr > 0.0, K::InvalidArgument, "c-thr must be positive");
  require(c.nodes >= 2, K::InvalidArgument, "nodes must be >= 2");
  require(c.proposals >= 100, K::InvalidArgument, "proposals must be >= 100");
  require(c.workers >= 0, K::InvalidArgument, "workers must be >= 0");
  require(c.noise == "uniform" || c.noise == "none", K::InvalidArgument, "noise must be uniform or none");
  parse_method(c.method);
  parse_threshold_mode(c.mode);
  parse_backend(c.backend);
  const bool tables = command == "replicate-table" || command == "rate";
  if (!tables)
    test_function(c.fn);
  if (command != "replicate-table" && command != "rate")
    make_grid(c.d, c.n);
  if (command != "simulate" && command != "replicate-table" && command != "replicate-f4") {
    require(c.y > 0.0 && c.y < 1.0, K::InvalidArgument, "y must lie in (0,1)");
  }
  if (command == "oracle" || command == "replicate-table" || command == "replicate-f4" || command == "rate"
      || command == "tail")
    require(c.reps >= 2, K::InvalidArgument, "reps must be >= 2");
  if (known_bounds(c))
    ParamSet(c.a_low, c.m_up, multi_indices(c.d, c.b));

  if (command == "estimate") {
    if (c.h > 0.0) {
      require(c.h < 1.0, K::InvalidArgument, "h must lie in (0,1)");
      require(window_in_domain(point_of(c), c.h), K::WindowOutOfDomain,
              "window of side h = " + std::to_string(c.h) + " around y = " + std::to_string(c.y) + " leaves [0,1]^d");
    } else {
      require(known_bounds(c), K::InvalidArgument, "minimax estimate (h = 0) needs --A and --M");
      require(c.beta > 0.0 && c.lipschitz > 0.0, K::InvalidArgument, "beta and L must be positive");
      const double h = minimax_bandwidth(c.beta, c.lipschitz, c.n, c.d);
      require(window_in_domain(point_of(c), h), K::WindowOutOfDomain,
              "minimax window h = " + std::to_string(h) + " around y leaves [0,1]^d");
    }
  }
  if (command == "adapt" || command == "oracle") {
    const BandwidthGrid g = bandwidth_grid(c.n, c.b, c.d);
    require(window_in_domain(point_of(c), g.h_max), K::WindowOutOfDomain,
            "window at h_max = " + std::to_string(g.h_max) + " leaves [0,1]^d");
  }
  if (command == "oracle") {
    const EstimatorKind k = parse_estimator(c.estimator);
    require(k == EstimatorKind::Fixed || k == EstimatorKind::Lse, K::InvalidArgument, "oracle estimator must be fixed or lse");
    for (double h : c.candidates)
      require(h > 0.0 && window_in_domain(point_of(c), h), K::WindowOutOfDomain,
              "candidate h = " + std::to_string(h) + " leaves [0,1]^d");
  }
  if (command == "replicate-table") {
    require(c.d == 1, K::InvalidArgument, "the risk table is one-dimensional");
    require(!c.functions.empty() && !c.ns.empty(), K::InvalidArgument, "functions and ns must be nonempty");
    for (const auto& fn : c.functions)
      test_function(fn);
    for (auto n : c.ns) {
      make_grid(1, n);
      bandwidth_grid(n, c.b, 1);
    }
    require(c.points >= 1, K::InvalidArgument, "points must be >= 1");
  }
  if (command == "replicate-f4")
    require(c.d == 1, K::InvalidArgument, "the f4 experiment is one-dimensional");
  if (command == "rate") {
    require(c.d == 1, K::InvalidArgument, "the rate experiment is one-dimensional");
    test_function(c.fn);
    require(c.ns.size() >= 3, K::InvalidArgument, "rate needs at least three sample sizes");
    for (auto n : c.ns) {
      make_grid(1, n);
      require(!rate_candidates(n, c.b, c.y).empty(), K::InvalidArgument, "no candidate bandwidth fits at n = " + std::to_string(n));
    }
    require(c.beta > 0.0, K::InvalidArgument, "beta must be positive");
  }
  if (command == "tail") {
    require(c.d == 1, K::InvalidArgument, "the tail experiment is one-dimensional");
    require(c.h > 0.0 && c.h < 1.0 && window_in_domain(point_of(c), c.h), K::WindowOutOfDomain,
            "tail window leaves [0,1]");
    require(std::is_sorted(c.eps.begin(), c.eps.end()), K::InvalidArgument, "eps must be increasing");
  }
}

Json run_command(const std::string& command, const RunConfig& c, const std::filesystem::path& out_dir)
{
  validate(command, c);
  Manifest m(command, to_json(c), c.seed);
  Json summary;
  const std::vector<double> y = point_of(c);

  if (command == "simulate") {
    const Sample s = sample_of(c);
    const std::string name = out_name(c, "sample.csv");
    m.write(out_dir, name, sample_csv(s));
    m.write(out_dir, std::filesystem::path(name).replace_extension(".json").string(), dump(sample_sidecar(s)));
    summary = sample_sidecar(s);
  } else if (command == "estimate") {
    const Sample s = sample_of(c);
    const auto idx = multi_indices(c.d, c.b);
    PosteriorEstimate e;
    double h = c.h;
    Json bounds;
    if (c.h > 0.0) {
      const ParamSet set = known_bounds(c) ? ParamSet(c.a_low, c.m_up, idx)
                                           : plug_in(s, y, bandwidth_grid(c.n, c.b, c.d).h_max, idx).set;
      e = bayes_estimate(window(s, y, c.h, idx), set, integrator_of(c));
      bounds = {{"A", set.a_low}, {"M", set.m_up}, {"plug_in", !known_bounds(c)}};
    } else {
      h = minimax_bandwidth(c.beta, c.lipschitz, c.n, c.d);
      e = minimax_estimate(s, y, c.beta, c.lipschitz, c.a_low, c.m_up, c.b, integrator_of(c));
      bounds = {{"A", c.a_low}, {"M", c.m_up}, {"plug_in", false}};
    }
    summary = to_json(e);
    summary["h"] = h;
    summary["y"] = y;
    summary["set"] = bounds;
    m.write(out_dir, out_name(c, "estimate.json"), dump(summary));
  } else if (command == "adapt") {
    const Sample s = sample_of(c);
    const AdaptiveResult r = adaptive_estimate(s, y, c.b, integrator_of(c), thresholds_of(c));
    summary = to_json(r.trace);
    m.write(out_dir, out_name(c, "trace.json"), dump(summary));
  } else if (command == "oracle") {
    EstimatorSpec spec;
    spec.kind = parse_estimator(c.estimator);
    spec.b = c.b;
    spec.integrator = integrator_of(c);
    spec.known_bounds = known_bounds(c);
    spec.a_low = c.a_low;
    spec.m_up = c.m_up;
    std::vector<double> cands = c.candidates;
    if (cands.empty())
      cands = ladder_with_midpoints(bandwidth_grid(c.n, c.b, c.d));
    const FunctionSpec f = test_function(c.fn);
    const OracleResult r = oracle_bandwidth(spec, f, y, c.n, c.d, cands, run_of(c));
    summary = to_json(r);
    m.write(out_dir, out_name(c, "oracle.csv"), oracle_csv(r));
    m.write(out_dir, "oracle.json", dump(summary));
  } else if (command == "replicate-table") {
    TableConfig tc;
    tc.functions = c.functions;
    tc.ns = c.ns;
    tc.points = c.points;
    tc.b = c.b;
    tc.integrator = integrator_of(c);
    tc.thresholds = thresholds_of(c);
    tc.run = run_of(c);
    const auto rows = replicate_risk_table(tc);
    m.write(out_dir, out_name(c, "table.csv"), table_csv(rows));
    m.write(out_dir, "table_points.csv", table_points_csv(rows));
    // ratio against n, one curve per function
    CsvTable ratio({"function", "n", "ratio", "adaptive_risk", "oracle_risk"});
    for (const auto& r : rows)
      ratio.row(std::vector<std::string>{r.function_id, std::to_string(r.n), format_double(r.ratio),
                                         format_double(r.adaptive_risk), format_double(r.oracle_risk)});
    m.write(out_dir, "plot_ratio.csv", ratio.str());
    // the test functions and one adaptive estimate per point on the first sample
    CsvTable curves({"function", "n", "x", "f", "f_hat"});
    for (const auto& fn : c.functions) {
      const FunctionSpec f = test_function(fn);
      const std::size_t n = c.ns.front();
      const auto g = std::make_shared<const DesignGrid>(make_grid(1, n));
      const Sample s = simulate(f, g, derive_seed(c.seed, 0x9e3779b9ULL), run_of(c).noise);
      const double h_max = bandwidth_grid(n, c.b, 1).h_max;
      for (double x : evaluation_points(c.points, h_max)) {
        const std::vector<double> at{x};
        double est = std::numeric_limits<double>::quiet_NaN();
        try {
          est = adaptive_estimate(s, at, c.b, integrator_of(c), thresholds_of(c)).f_hat;
        } catch (const Error& e) {
          if (is_validation_error(e.kind()))
            throw;
        }
        curves.row(std::vector<std::string>{fn, std::to_string(n), format_double(x), format_double(f(at)),
                                            format_double(est)});
      }
    }
    m.write(out_dir, "plot_examples.csv", curves.str());
    summary = Json::array();
    for (const auto& r : rows)
      summary.push_back({{"function", r.function_id}, {"n", r.n}, {"adaptive_risk", r.adaptive_risk},
                         {"adaptive_se", r.adaptive_se}, {"oracle_risk", r.oracle_risk}, {"ratio", r.ratio},
                         {"mean_h_hat", r.mean_h_hat}, {"failures", r.failures}});
  } else if (command == "replicate-f4") {
    F4Config fc;
    fc.n = c.n;
    fc.b = c.b;
    fc.integrator = integrator_of(c);
    fc.thresholds = thresholds_of(c);
    fc.run = run_of(c);
    const F4Report r = replicate_f4(fc);
    summary = to_json(r);
    m.write(out_dir, out_name(c, "f4.json"), dump(summary));
    m.write(out_dir, "f4_bandwidths.csv", histogram_csv(r.bandwidth_histogram));
    const FunctionSpec f = test_function("f4");
    CsvTable curve({"x", "f4"});
    for (int i = 0; i <= 200; ++i) {
      const double x = i / 200.0;
      curve.row(std::vector<double>{x, f(std::span<const double>(&x, 1))});
    }
    m.write(out_dir, "plot_f4.csv", curve.str());
  } else if (command == "rate") {
    RateConfig rc;
    rc.function_id = c.fn;
    rc.beta_nominal = c.beta;
    rc.ns = c.ns;
    rc.y = c.y;
    rc.b = c.b;
    rc.integrator = integrator_of(c);
    rc.run = run_of(c);
    const RateFit r = rate_slope(rc);
    summary = to_json(r);
    m.write(out_dir, out_name(c, "rate.csv"), rate_csv(r));
    m.write(out_dir, "rate.json", dump(summary));
  } else if (command == "tail") {
    TailConfig tc;
    tc.function_id = c.fn;
    tc.n = c.n;
    tc.y = c.y;
    tc.h = c.h;
    tc.eps = c.eps;
    tc.spec.b = c.b;
    tc.spec.integrator = integrator_of(c);
    tc.spec.known_bounds = known_bounds(c);
    tc.spec.a_low = c.a_low;
    tc.spec.m_up = c.m_up;
    tc.run = run_of(c);
    const TailCurve r = tail_decay_check(tc);
    summary = to_json(r);
    m.write(out_dir, out_name(c, "tail.csv"), tail_csv(r));
    m.write(out_dir, "tail.json", dump(summary));
  }
  write_text(out_dir / "manifest.json", dump(m.json()));
  return summary;
}

int cli_dispatch(int argc, char** argv)
{
  CLI::App app{"Locally Bayesian estimation of a frontier under multiplicative uniform noise"};
  app.require_subcommand(1);
  app.fallthrough();
  // --h is the bandwidth, so help is long-only
  app.set_help_flag("--help", "print this help");
  std::string config_path;
  std::string out_dir = ".";
  std::string manifest_path;
  app.add_option("--config", config_path, "JSON config (or a manifest); flags override it");
  app.add_option("--out-dir", out_dir, "directory for all outputs");

  std::vector<std::unique_ptr<RunConfig>> staged;
  std::vector<std::pair<CLI::App*, std::vector<CLI::Option*>>> subs;
  for (const auto& name : kCommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->set_help_flag("--help", "print this help");
    staged.push_back(std::make_unique<RunConfig>(defaults_for(name)));
    std::vector<CLI::Option*> opts;
    for (const auto& f : fields())
      opts.push_back(f.add(*sub, *staged.back()));
    subs.emplace_back(sub, opts);
  }
  CLI::App* rerun = app.add_subcommand("rerun", "repeat a run from its manifest");
  rerun->set_help_flag("--help", "print this help");
  rerun->add_option("--manifest", manifest_path, "manifest.json of the original run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::string command;
    RunConfig cfg;
    if (rerun->parsed()) {
      const Json man = Json::parse(read_text(manifest_path));
      if (!man.contains("command") || !man.contains("config"))
        throw Error(ErrorKind::Config, manifest_path + " is not a run manifest");
      command = man["command"].get<std::string>();
      cfg = defaults_for(command);
      merge_json(cfg, man["config"]);
    } else {
      for (std::size_t i = 0; i < subs.size(); ++i) {
        if (!subs[i].first->parsed())
          continue;
        command = kCommands[i];
        cfg = defaults_for(command);
        if (!config_path.empty())
          merge_json(cfg, load_config(config_path));
        for (std::size_t k = 0; k < fields().size(); ++k)
          if (subs[i].second[k]->count() > 0)
            fields()[k].copy(cfg, *staged[i]);
      }
    }
    const Json summary = run_command(command, cfg, out_dir);
    std::cout << summary.dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_validation_error(e.kind()) ? 2 : 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: ConfigError: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

} // namespace mulreg
