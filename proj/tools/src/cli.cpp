#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>

#include "manifest.hpp"
#include "rfbm/asymptotics.hpp"
#include "rfbm/csv.hpp"
#include "rfbm/error.hpp"
#include "rfbm/fbm.hpp"
#include "rfbm/field.hpp"
#include "rfbm/grid.hpp"
#include "rfbm/mvn.hpp"
#include "rfbm/parallel.hpp"
#include "rfbm/pickands.hpp"
#include "rfbm/storage.hpp"

namespace rfbm::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct Artifacts {
  Json result;
  std::function<void(std::ostream&)> csv;  // empty: no CSV payload
};

struct Command {
  CLI::App* app = nullptr;
  std::vector<std::pair<std::string, std::function<Json()>>> params;
  std::function<Artifacts()> exec;
  std::string out_stem;
  std::string config;
};

using Commands = std::vector<std::unique_ptr<Command>>;

// Registers --name bound to var and remembers how to serialise its final
// value into the manifest.
template <class T>
CLI::Option* param(Command& c, const std::string& name, T& var, const std::string& desc) {
  c.params.emplace_back(name, [&var] { return Json(var); });
  return c.app->add_option("--" + name, var, desc)->capture_default_str();
}

Command& add_command(CLI::App& root, Commands& cmds, const std::string& name, const std::string& desc) {
  auto& c = *cmds.emplace_back(std::make_unique<Command>());
  c.app = root.add_subcommand(name, desc);
  c.app->add_option("--out", c.out_stem, "Write <stem>.json, <stem>.csv and <stem>.manifest.json");
  c.app->add_option("--config", c.config, "Flat JSON file of flag values; explicit flags win");
  return c;
}

std::uint64_t seed_of(const Command& c) {
  for (const auto& [name, get] : c.params) {
    if (name == "seed") return get().get<std::uint64_t>();
  }
  return 0;
}

Json estimate_json(const McEstimate& e) {
  return {{"estimate", e.value}, {"stderr", e.stderr_}, {"ci_low", e.ci_low}, {"ci_high", e.ci_high},
          {"reps", e.reps},      {"seed", e.seed},      {"stream", e.stream}};
}

Json constants_json(const asym::ModelConstants& k) {
  return {{"hurst", k.h.value()}, {"c", k.c},   {"tau0", k.tau0}, {"A", k.A},
          {"B", k.B},             {"a", k.a},   {"b", k.b},       {"cH", k.cH},
          {"lambda", k.lambda},   {"limsupConstant", asym::limsup_constant(k)}};
}

Json pickands_json(const pickands::PickandsEstimate& e) {
  return {{"hurst", e.hurst.value()},
          {"theta", e.theta},
          {"span", e.span},
          {"reps", e.reps},
          {"value", e.value},
          {"stderr", e.stderr_},
          {"rejected", e.rejected},
          {"method", e.method == pickands::Method::ChangeOfMeasure ? "change-of-measure" : "direct"}};
}

// --- subcommands -----------------------------------------------------------

void add_constants(CLI::App& root, Commands& cmds) {
  auto& c = add_command(root, cmds, "constants", "Print the model constants for a Hurst parameter");
  auto hurst = std::make_shared<double>(0.5);
  param(c, "hurst", *hurst, "Hurst parameter")->required();
  c.exec = [hurst] { return Artifacts{constants_json(asym::derive_constants(fbm::HurstParameter(*hurst))), {}}; };
}

void add_sample_fbm(CLI::App& root, Commands& cmds) {
  struct S {
    double hurst = 0.5, dt = 0.01;
    std::size_t n = 1025;
    std::uint64_t seed = 1;
    std::string method = "circulant";
  };
  auto s = std::make_shared<S>();
  auto& c = add_command(root, cmds, "sample-fbm", "Sample one fBm path on a uniform grid");
  param(c, "hurst", s->hurst, "Hurst parameter");
  param(c, "n", s->n, "Number of grid points including t = 0");
  param(c, "dt", s->dt, "Grid step");
  param(c, "seed", s->seed, "Root seed");
  param(c, "method", s->method, "circulant or dense")->check(CLI::IsMember({"circulant", "dense"}));
  c.exec = [s] {
    const fbm::HurstParameter h(s->hurst);
    const auto key = StreamKey::root(s->seed).child("fbm").child(std::uint64_t{0});
    auto path = s->method == "dense" ? fbm::sample_fbm_dense_oracle(s->n, s->dt, h, key)
                                     : fbm::sample_fbm_circulant(s->n, s->dt, h, key);
    const auto v = path.values();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    Json r = {{"hurst", s->hurst}, {"n", s->n},       {"dt", s->dt},   {"seed", s->seed}, {"method", s->method},
              {"horizon", path.horizon()}, {"final", v.back()}, {"min", *lo}, {"max", *hi}};
    auto shared = std::make_shared<fbm::FbmPath>(std::move(path));
    return Artifacts{r, [shared](std::ostream& os) { fbm::write_path_csv(os, *shared); }};
  };
}

void add_queue_sim(CLI::App& root, Commands& cmds) {
  struct S {
    double hurst = 0.5, horizon = 100.0, dt = 0.01, q0 = 0.0, burn_in = 0.0, window = 0.0;
    std::uint64_t seed = 1;
    std::string mode = "reflected";
    bool doubling_check = true;
  };
  auto s = std::make_shared<S>();
  auto& c = add_command(root, cmds, "queue-sim", "Simulate the storage process");
  param(c, "hurst", s->hurst, "Hurst parameter");
  param(c, "horizon", s->horizon, "Simulated time span");
  param(c, "dt", s->dt, "Grid step");
  param(c, "seed", s->seed, "Root seed");
  param(c, "mode", s->mode, "reflected or stationary")->check(CLI::IsMember({"reflected", "stationary"}));
  param(c, "q0", s->q0, "Initial content (reflected)");
  param(c, "burn-in", s->burn_in, "Discarded initial time (reflected)");
  param(c, "window", s->window, "Look-back window (stationary); 0 = default rule");
  param(c, "doubling-check", s->doubling_check, "Verify the window by doubling (stationary)");
  c.exec = [s] {
    const fbm::HurstParameter h(s->hurst);
    const auto key = StreamKey::root(s->seed).child("queue");
    storage::QueuePath qp;
    double window = 0.0;
    if (s->mode == "reflected") {
      qp = storage::simulate_reflected(s->q0, s->horizon, s->dt, h, key, s->burn_in);
    } else {
      window = s->window > 0.0 ? s->window : storage::default_window(h, 1.0);
      storage::StationaryOptions opts;
      opts.doubling_check = s->doubling_check;
      qp = storage::simulate_stationary(s->horizon, s->dt, window, h, key, opts);
    }
    double sum = 0.0, mx = 0.0;
    for (double q : qp.values) {
      sum += q;
      mx = std::max(mx, q);
    }
    Json r = {{"mode", s->mode},
              {"hurst", s->hurst},
              {"dt", s->dt},
              {"horizon", s->horizon},
              {"window", window},
              {"points", qp.values.size()},
              {"mean", sum / static_cast<double>(qp.values.size())},
              {"max", mx},
              {"final", qp.values.back()},
              {"seed", s->seed}};
    auto shared = std::make_shared<storage::QueuePath>(std::move(qp));
    return Artifacts{r, [shared](std::ostream& os) { storage::write_queue_csv(os, *shared); }};
  };
}

void add_tail_prob(CLI::App& root, Commands& cmds) {
  struct S {
    double hurst = 0.5;
    storage::TailProbabilityParams p;
  };
  auto s = std::make_shared<S>();
  auto& c = add_command(root, cmds, "tail-prob", "Monte Carlo P(sup over [0, T] of Q > u) vs the asymptotic formula");
  param(c, "hurst", s->hurst, "Hurst parameter");
  param(c, "interval", s->p.interval, "Interval length T");
  param(c, "level", s->p.level, "Level u");
  param(c, "dt", s->p.dt, "Grid step");
  param(c, "window", s->p.window, "Look-back window; 0 = default rule");
  param(c, "reps", s->p.reps, "Replications");
  param(c, "seed", s->p.seed, "Root seed");
  param(c, "pickands", s->p.pickands, "Pickands constant used by the asymptotic formula");
  c.exec = [s] {
    const fbm::HurstParameter h(s->hurst);
    const auto est = storage::sup_tail_probability(h, s->p);
    const auto k = asym::derive_constants(h);
    const double factor = s->p.interval / s->p.level;
    const auto asy = asym::piterbarg_tail(factor, s->p.level, k, s->p.pickands);
    Json r = estimate_json(est);
    r["asymptotic"] = {{"value", asy.value},
                       {"logValue", asy.log_value},
                       {"windowFactor", factor},
                       {"regimeWarning", asy.regime_warning}};
    r["ratio"] = est.value / asy.value;
    return Artifacts{r, {}};
  };
}

void add_pickands(CLI::App& root, Commands& cmds) {
  struct S {
    double hurst = 0.5, span = 0.0;
    std::vector<double> thetas;
    std::uint64_t reps = 10'000, seed = 1;
    std::size_t centers = 16;
    std::string method = "change-of-measure";
  };
  auto s = std::make_shared<S>();
  auto& c = add_command(root, cmds, "pickands",
                        "Estimate the Pickands constant; without --theta, extrapolate theta -> 0");
  param(c, "hurst", s->hurst, "Hurst parameter");
  param(c, "theta", s->thetas, "Grid spacing (repeatable)");
  param(c, "span", s->span, "Time span S; 0 = default");
  param(c, "reps", s->reps, "Replications per theta");
  param(c, "seed", s->seed, "Root seed");
  param(c, "centers", s->centers, "Tilt centres per path (change-of-measure)");
  param(c, "method", s->method, "change-of-measure or direct")
      ->check(CLI::IsMember({"change-of-measure", "direct"}));
  c.exec = [s] {
    const fbm::HurstParameter h(s->hurst);
    const auto key = StreamKey::root(s->seed);
    const auto method = s->method == "direct" ? pickands::Method::Direct : pickands::Method::ChangeOfMeasure;
    Json r;
    if (!s->thetas.empty()) {
      r["estimates"] = Json::array();
      for (double theta : s->thetas) {
        pickands::ThetaParams p;
        p.theta = theta;
        p.span = s->span;
        p.reps = s->reps;
        p.method = method;
        p.centers = s->centers;
        r["estimates"].push_back(pickands_json(pickands::estimate_pickands_theta(h, p, key)));
      }
    } else {
      pickands::Budget b;
      b.reps_per_theta = s->reps;
      b.span = s->span;
      const auto ex = pickands::estimate_pickands(h, key, b);
      r["estimate"] = pickands_json(ex.estimate);
      r["levels"] = Json::array();
      for (const auto& e : ex.levels) r["levels"].push_back(pickands_json(e));
      r["slope"] = ex.slope;
      r["maxStandardisedResidual"] = ex.max_standardised_residual;
      r["residualOverPropagatedSe"] = ex.residual_over_propagated_se;
    }
    return Artifacts{r, {}};
  };
}

void add_criterion(CLI::App& root, Commands& cmds) {
  struct S {
    double hurst = 0.5, p = 1.0, t0 = 0.0, t_max = 1e9, pickands = 1.0;
    std::string mode = "analytic";
  };
  auto s = std::make_shared<S>();
  auto& c = add_command(root, cmds, "criterion", "Finite/infinite dichotomy for the threshold family f_p");
  param(c, "hurst", s->hurst, "Hurst parameter");
  param(c, "p", s->p, "Family exponent p");
  param(c, "t0", s->t0, "Window start; 0 = just above the family's domain");
  param(c, "t-max", s->t_max, "Window end");
  param(c, "pickands", s->pickands, "Pickands constant");
  param(c, "mode", s->mode, "analytic or quadrature")->check(CLI::IsMember({"analytic", "quadrature"}));
  c.exec = [s] {
    const auto k = asym::derive_constants(fbm::HurstParameter(s->hurst));
    const auto fam = asym::make_threshold_family(s->p, k, s->pickands);
    const double t0 = s->t0 > 0.0 ? s->t0 : std::max(fam.s_min, std::exp(std::numbers::e)) * 1.01;
    const auto method =
        s->mode == "quadrature" ? asym::CriterionMethod::Quadrature : asym::CriterionMethod::AnalyticRate;
    const auto rep = asym::criterion_integral(fam, t0, s->t_max, method);
    Json r = {{"hurst", s->hurst},
              {"p", s->p},
              {"sMin", fam.s_min},
              {"t0", rep.t0},
              {"tMax", rep.t_max},
              {"integralOnWindow", rep.integral_on_window},
              {"errorEstimate", rep.error_estimate},
              {"classification", rep.classification == asym::Classification::Finite ? "Finite" : "Infinite"},
              {"method", s->mode}};
    return Artifacts{r, {}};
  };
}

void add_lil(CLI::App& root, Commands& cmds) {
  struct S {
    double hurst = 0.5, p = 2.0, horizon = 1e4, dt = 0.01, pickands = 1.0;
    std::uint64_t seed = 1;
    storage::LilOptions opts;
  };
  auto s = std::make_shared<S>();
  auto& c = add_command(root, cmds, "lil", "Crossing record of Q over f_p and the law-of-iterated-logarithm statistics");
  param(c, "hurst", s->hurst, "Hurst parameter");
  param(c, "p", s->p, "Family exponent p");
  param(c, "horizon", s->horizon, "Simulated time span");
  param(c, "dt", s->dt, "Grid step");
  param(c, "seed", s->seed, "Root seed");
  param(c, "pickands", s->pickands, "Pickands constant");
  param(c, "t0", s->opts.t0, "Start time; 0 = default");
  param(c, "window", s->opts.window, "Look-back window; 0 = default rule");
  param(c, "stride", s->opts.record_stride, "Keep every k-th grid point in the CSV");
  c.exec = [s] {
    const auto k = asym::derive_constants(fbm::HurstParameter(s->hurst));
    const auto fam = asym::make_threshold_family(s->p, k, s->pickands);
    auto res = std::make_shared<storage::LilResult>(
        storage::lil_experiment(fam, s->horizon, s->dt, StreamKey::root(s->seed).child("lil"), s->opts));
    const auto& sm = res->summary;
    Json r = {{"hurst", s->hurst},
              {"p", s->p},
              {"seed", s->seed},
              {"points", res->record.times.size()},
              {"crossings", sm.crossings},
              {"runningMinStatistic", sm.running_min_statistic},
              {"logScaledMax", sm.log_scaled_max},
              {"limsupConstant", sm.limsup_constant},
              {"usesLogRatio", sm.uses_log_ratio}};
    return Artifacts{r, [res](std::ostream& os) { storage::write_crossings_csv(os, res->record); }};
  };
}

void add_grid_check(CLI::App& root, Commands& cmds) {
  struct S {
    double hurst = 0.5;
    grid::GridCheckParams p;
  };
  auto s = std::make_shared<S>();
  auto& c = add_command(root, cmds, "grid-check", "Grid maximum vs a refined reference grid, common random numbers");
  param(c, "hurst", s->hurst, "Hurst parameter");
  param(c, "T", s->p.T, "Length of the s-range [0, T]");
  param(c, "theta", s->p.theta, "Grid scale theta");
  param(c, "v", s->p.v, "Scaled level v (>= e)");
  param(c, "reps", s->p.reps, "Replications");
  param(c, "seed", s->p.seed, "Root seed");
  param(c, "refinement", s->p.refinement, "Reference grid refinement factor");
  c.exec = [s] {
    const fbm::HurstParameter h(s->hurst);
    const auto g = grid::build_grid(s->p.T, s->p.theta, s->p.v, asym::derive_constants(h));
    const auto res = grid::grid_vs_continuum_experiment(h, s->p);
    Json r = {{"hurst", s->hurst},
              {"grid", {{"q", g.q}, {"L", g.L}, {"N", g.N}, {"tauStar", g.tau_star}}},
              {"pGrid", estimate_json(res.p_grid)},
              {"pReference", estimate_json(res.p_reference)},
              {"ratio", res.ratio},
              {"ratioStderr", res.ratio_stderr},
              {"pathwiseViolations", res.pathwise_violations},
              {"fieldPoints", res.field_points}};
    return Artifacts{r, {}};
  };
}

mvn::CorrelationMatrix square(const std::vector<double>& v, std::size_t n) {
  if (v.size() != n * n) throw Error(ErrorCode::InvalidCorrelation, "correlation needs n*n entries");
  return {n, v};
}

void add_berman_check(CLI::App& root, Commands& cmds) {
  struct S {
    std::size_t n = 2, instances = 1000;
    std::uint64_t seed = 1;
    std::vector<double> corr1, corr0, levels;
  };
  auto s = std::make_shared<S>();
  auto& c = add_command(root, cmds, "berman-check",
                        "Both sides of Berman's inequality; random instances unless --levels is given");
  param(c, "n", s->n, "Dimension (2..4)");
  param(c, "instances", s->instances, "Random instances");
  param(c, "seed", s->seed, "Root seed");
  param(c, "corr1", s->corr1, "Row-major correlation of xi (explicit instance)");
  param(c, "corr0", s->corr0, "Row-major correlation of eta (explicit instance)");
  param(c, "levels", s->levels, "Levels u_1..u_n (explicit instance)");
  c.exec = [s] {
    constexpr double kTol = 1e-6;
    std::vector<double> lhs, rhs;
    if (!s->levels.empty()) {
      const std::size_t n = s->levels.size();
      const auto gap = field::berman_gap(square(s->corr1, n), square(s->corr0, n), s->levels);
      lhs.push_back(gap.lhs);
      rhs.push_back(gap.rhs);
    } else {
      if (s->n < 2 || s->n > 4) throw Error(ErrorCode::DomainError, "n must be in 2..4");
      lhs.resize(s->instances);
      rhs.resize(s->instances);
      const auto base = StreamKey::root(s->seed).child("berman");
      parallel_for(s->instances, [&](std::size_t i) {
        NormalSource noise(base.child(static_cast<std::uint64_t>(i)));
        const auto c1 = mvn::random_correlation(s->n, noise);
        const auto c0 = mvn::random_correlation(s->n, noise);
        std::vector<double> u(s->n);
        for (auto& x : u) x = -1.0 + 4.0 * noise.uniform();
        const auto gap = field::berman_gap(c1, c0, u);
        lhs[i] = gap.lhs;
        rhs[i] = gap.rhs;
      });
    }
    std::size_t violations = 0;
    double max_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      violations += lhs[i] > rhs[i] + kTol;
      max_excess = std::max(max_excess, lhs[i] - rhs[i]);
    }
    Json r = {{"instances", lhs.size()}, {"violations", violations}, {"maxExcess", max_excess}, {"tolerance", kTol}};
    if (lhs.size() == 1) {
      r["lhs"] = lhs[0];
      r["rhs"] = rhs[0];
    }
    auto cols = std::make_shared<std::array<std::vector<double>, 3>>();
    for (std::size_t i = 0; i < lhs.size(); ++i) (*cols)[0].push_back(static_cast<double>(i));
    (*cols)[1] = std::move(lhs);
    (*cols)[2] = std::move(rhs);
    return Artifacts{r, [cols](std::ostream& os) {
                       const std::array<std::string_view, 3> header{"instance", "lhs", "rhs"};
                       const std::array<std::span<const double>, 3> spans{(*cols)[0], (*cols)[1], (*cols)[2]};
                       write_csv(os, header, spans);
                     }};
  };
}

// --- config, outputs, replay ------------------------------------------------

std::string arg_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();  // numbers: shortest round-trip representation
}

// Appends "--key value" for config-file keys not given on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
  }
  if (!file) return args;
  std::ifstream in(*file);
  if (!in) throw CLI::ValidationError("--config", "cannot read " + *file);
  Json cfg;
  try {
    cfg = Json::parse(in);
  } catch (const Json::exception& e) {
    throw CLI::ValidationError("--config", std::string("invalid JSON: ") + e.what());
  }
  if (!cfg.is_object()) throw CLI::ValidationError("--config", "expected a flat JSON object");
  const std::vector<std::string> given(args.begin(), args.end());
  auto present = [&](const std::string& flag) {
    return std::any_of(given.begin(), given.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    if (present(flag)) continue;
    if (value.is_array()) {
      for (const auto& v : value) {
        args.push_back(flag);
        args.push_back(arg_text(v));
      }
    } else if (value.is_object()) {
      throw CLI::ValidationError("--config", "nested value for " + key);
    } else {
      args.push_back(flag);
      args.push_back(arg_text(value));
    }
  }
  return args;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + p.string());
}

void persist(const Command& c, const Artifacts& a, const std::string& started_at) {
  const std::string stem = c.out_stem;
  if (const auto dir = fs::path(stem).parent_path(); !dir.empty()) fs::create_directories(dir);
  RunManifest m;
  m.command = c.app->get_name();
  for (const auto& [name, get] : c.params) m.parameters[name] = get();
  m.seed = seed_of(c);
  m.tool_version = RFBM_VERSION;
  m.started_at = started_at;
  const std::string json_path = stem + ".json";
  write_text(json_path, a.result.dump(2) + "\n");
  m.outputs.push_back({json_path, sha256_file(json_path)});
  if (a.csv) {
    const std::string csv_path = stem + ".csv";
    std::ostringstream os;
    a.csv(os);
    write_text(csv_path, os.str());
    m.outputs.push_back({csv_path, sha256_file(csv_path)});
  }
  write_manifest(stem + ".manifest.json", m);
}

std::string extension_of(const std::string& path) { return fs::path(path).extension().string(); }

int replay(const std::string& manifest_path, std::string stem, std::ostream& out, std::ostream& err) {
  const auto m = read_manifest(manifest_path);
  if (m.command == "replay") throw CLI::ValidationError("replay", "cannot replay a replay");
  if (stem.empty()) {
    std::string base = manifest_path;
    const std::string suffix = ".manifest.json";
    if (base.size() > suffix.size() && base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
      base.resize(base.size() - suffix.size());
    }
    stem = base + ".replay";
  }
  std::vector<std::string> args{m.command};
  for (const auto& [key, value] : m.parameters.items()) {
    if (value.is_array()) {
      for (const auto& v : value) args.insert(args.end(), {"--" + key, arg_text(v)});
    } else {
      args.insert(args.end(), {"--" + key, arg_text(value)});
    }
  }
  args.insert(args.end(), {"--out", stem});
  std::ostringstream sink;
  if (const int code = run(args, sink, err); code != kOk) return code;

  const auto fresh = read_manifest(stem + ".manifest.json");
  Json r = {{"manifest", manifest_path}, {"replay", stem + ".manifest.json"}, {"outputs", Json::array()}};
  bool identical = fresh.outputs.size() == m.outputs.size();
  for (const auto& o : m.outputs) {
    const auto it = std::find_if(fresh.outputs.begin(), fresh.outputs.end(),
                                 [&](const OutputRecord& f) { return extension_of(f.path) == extension_of(o.path); });
    const std::string actual = it == fresh.outputs.end() ? "" : it->sha256;
    identical = identical && actual == o.sha256;
    r["outputs"].push_back({{"path", o.path}, {"expected", o.sha256}, {"actual", actual}});
  }
  r["identical"] = identical;
  out << r.dump(2) << '\n';
  if (!identical) err << "replay: payload digests differ\n";
  return identical ? kOk : kDomainError;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reflected fractional Brownian motion storage toolkit", "rfbm"};
  app.set_version_flag("--version", std::string(RFBM_VERSION));
  app.require_subcommand(1);
  Commands cmds;
  add_constants(app, cmds);
  add_sample_fbm(app, cmds);
  add_queue_sim(app, cmds);
  add_tail_prob(app, cmds);
  add_pickands(app, cmds);
  add_criterion(app, cmds);
  add_lil(app, cmds);
  add_grid_check(app, cmds);
  add_berman_check(app, cmds);
  auto* rp = app.add_subcommand("replay", "Re-run a manifest and compare output digests");
  std::string replay_manifest, replay_stem;
  rp->add_option("manifest", replay_manifest, "Path to <stem>.manifest.json")->required();
  rp->add_option("--out", replay_stem, "Stem for the replayed outputs (default <stem>.replay)");

  try {
    auto args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << RFBM_VERSION << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kUsageError;
  }

  try {
    if (rp->parsed()) return replay(replay_manifest, replay_stem, out, err);
    for (const auto& c : cmds) {
      if (!c->app->parsed()) continue;
      const auto started = utc_timestamp();
      const auto artifacts = c->exec();
      if (!c->out_stem.empty()) persist(*c, artifacts, started);
      out << artifacts.result.dump(2) << '\n';
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  }
  return kUsageError;
}

}  // namespace rfbm::cli
