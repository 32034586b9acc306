// thermies: experiment harness for error-mitigated Gaussian sampling on
// imprecision-limited devices. Subcommands cover the rounding-ensemble
// inspection tools (residual, weights), the samplers, the scaling sweeps,
// the matrix-inversion experiment, feasibility curves, and concentration
// bounds. Every stochastic command is fully determined by --seed.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thermies/analyze.hpp"
#include "thermies/errors.hpp"
#include "thermies/experiments.hpp"
#include "thermies/feasibility.hpp"
#include "thermies/inversion.hpp"
#include "thermies/io.hpp"
#include "thermies/mitigate.hpp"
#include "thermies/quant.hpp"
#include "thermies/sampler.hpp"
#include "thermies/sym_matrix.hpp"
#include "thermies/version.hpp"

namespace {

using namespace thermies;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Output sink: "-" means stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw IoError("cannot open for writing: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += format_double(v[i]);
  }
  return s;
}

template <typename T>
std::string join_ints(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(v[i]);
  }
  return s;
}

// Canonical provenance line: version, command, then the effective
// configuration in a fixed order. Byte-stable across runs and worker counts.
std::string provenance(const std::string& cmd,
                       const std::vector<std::pair<std::string, std::string>>&
                           kv) {
  std::ostringstream os;
  os << "thermies " << kVersion << " cmd=" << cmd;
  for (const auto& [k, v] : kv) os << ' ' << k << '=' << v;
  return os.str();
}

// Shared quantization flags.
struct QuantFlags {
  double epsilon = 0.0;
  std::vector<double> grid_diag;
  std::vector<double> grid_offdiag;
  std::string mode;  // optional cross-check: uniform | grid

  void attach(CLI::App* sub) {
    sub->add_option("--epsilon", epsilon,
                    "uniform quantization step (entries are multiples of it)");
    sub->add_option("--grid-diag", grid_diag,
                    "allowed diagonal values (non-uniform hardware grid)")
        ->delimiter(',');
    sub->add_option("--grid-offdiag", grid_offdiag,
                    "allowed off-diagonal values (non-uniform hardware grid)")
        ->delimiter(',');
    sub->add_option("--quant-mode", mode, "uniform | grid (config cross-check)");
  }

  QuantSpec resolve() const {
    const bool has_grid = !grid_diag.empty() || !grid_offdiag.empty();
    if (epsilon > 0.0 && has_grid)
      throw UsageError("give either --epsilon or the grid value lists");
    if (!mode.empty() && mode != "uniform" && mode != "grid")
      throw UsageError("unknown quantization mode: " + mode);
    if (mode == "uniform" && has_grid)
      throw UsageError("mode is uniform but grid values were given");
    if (mode == "grid" && epsilon > 0.0)
      throw UsageError("mode is grid but a uniform step was given");
    if (has_grid) {
      if (grid_diag.empty() || grid_offdiag.empty())
        throw UsageError("grid mode needs both --grid-diag and --grid-offdiag");
      return QuantSpec::hardware_grid(grid_diag, grid_offdiag);
    }
    if (!(epsilon > 0.0))
      throw UsageError("quantization model required: --epsilon or grid lists");
    return QuantSpec::uniform(epsilon);
  }

  std::vector<std::pair<std::string, std::string>> describe() const {
    if (!grid_diag.empty())
      return {{"grid_diag", join_doubles(grid_diag)},
              {"grid_offdiag", join_doubles(grid_offdiag)}};
    return {{"epsilon", format_double(epsilon)}};
  }
};

SamplerBackend parse_backend(const std::string& s) {
  if (s == "exact") return SamplerBackend::Exact;
  if (s == "langevin") return SamplerBackend::Langevin;
  throw UsageError("unknown backend: " + s);
}

// `key = value` config file support: keys become --key flags unless already
// given on the command line, which therefore wins.
std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);

  std::set<std::string> given;
  for (const auto& a : args)
    if (a.rfind("--", 0) == 0) given.insert(a.substr(0, a.find('=')));

  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    // canonical config names for the quantization model
    if (key == "quant.mode") key = "quant-mode";
    if (key == "quant.epsilon") key = "epsilon";
    if (key == "quant.diag_values") key = "grid-diag";
    if (key == "quant.offdiag_values") key = "grid-offdiag";
    std::string flag = "--" + key;
    if (given.count(flag)) continue;
    if (value == "false") continue;
    args.push_back(flag);
    if (value != "true") args.push_back(value);
  }
  return args;
}

PsdPolicy parse_policy(const std::string& s) {
  if (s == "redraw") return PsdPolicy::Redraw;
  if (s == "clip") return PsdPolicy::Clip;
  if (s == "error") return PsdPolicy::Error;
  throw UsageError("unknown psd policy: " + s);
}

// ---------------------------------------------------------------------------
// residual

struct ResidualArgs {
  std::string matrix_path;
  double epsilon = 0.0;
  std::string output = "-";
};

int run_residual(const ResidualArgs& a) {
  CovMatrix target = load_matrix(a.matrix_path);
  ResidualMatrix r = residual(target, QuantSpec::uniform(a.epsilon));
  Sink sink(a.output);
  CsvWriter w(sink.stream());
  w.comment(provenance("residual", {{"matrix", a.matrix_path},
                                    {"epsilon", format_double(a.epsilon)}}));
  w.header({"i", "j", "residual"});
  for (int i = 0; i < r.dim(); ++i)
    for (int j = i; j < r.dim(); ++j)
      w.row({std::to_string(i), std::to_string(j), format_double(r(i, j))});
  return 0;
}

// ---------------------------------------------------------------------------
// weights

struct WeightsArgs {
  std::string matrix_path;
  double epsilon = 0.0;
  std::string output = "-";
};

int run_weights(const WeightsArgs& a) {
  CovMatrix target = load_matrix(a.matrix_path);
  NeighborEnsemble ens(target, QuantSpec::uniform(a.epsilon));
  const int d = target.dim();
  Sink sink(a.output);
  CsvWriter w(sink.stream());
  w.comment(provenance("weights", {{"matrix", a.matrix_path},
                                   {"epsilon", format_double(a.epsilon)}}));
  std::vector<std::string> cols = {"bits", "weight"};
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      cols.push_back("s_" + std::to_string(i) + "_" + std::to_string(j));
  w.header(cols);
  for (std::uint64_t b = 0; b < ens.size(); ++b) {
    NeighborDraw nb = ens.member(b);
    std::string bits;
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j)
        bits += nb.bits(i, j) != 0.0 ? '1' : '0';
    std::vector<std::string> cells = {bits, format_double(*nb.weight)};
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) cells.push_back(format_double(nb.matrix(i, j)));
    w.row(cells);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sample

struct SampleArgs {
  std::string matrix_path;
  QuantFlags quant;
  std::size_t n = 0;
  std::size_t ensemble_draws = 0;
  std::size_t samples_per_draw = 0;
  std::string mode = "mitigated";
  std::string backend = "exact";
  std::string psd_policy = "redraw";
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output = "sample.csv";
  std::string binary_output;
};

int run_sample(const SampleArgs& a) {
  CovMatrix target = load_matrix(a.matrix_path);
  QuantSpec spec = a.quant.resolve();
  const bool repetition = a.ensemble_draws > 0 || a.samples_per_draw > 0;
  std::size_t total = a.n;
  std::size_t m_draws = a.ensemble_draws;
  std::size_t per_draw = a.samples_per_draw;
  if (repetition) {
    if (m_draws == 0 || per_draw == 0)
      throw UsageError("--ensemble-draws and --samples-per-draw go together");
    if (total != 0 && total != m_draws * per_draw)
      throw UsageError("--n disagrees with M * n");
    total = m_draws * per_draw;
  }
  if (total == 0)
    throw UsageError("need a positive sample count (--n or M * n)");

  Rng rng = Rng::derive(a.seed, {0x73616D70ULL});
  SampleBatch batch;
  if (a.mode == "strict" || a.mode == "unmitigated") {
    batch = device_sample(target, spec, total,
                          a.mode == "strict" ? DeviceMode::Strict
                                             : DeviceMode::RoundNearest,
                          parse_backend(a.backend), rng);
  } else if (a.mode == "mitigated") {
    MitigationPlan plan(target, spec, repetition ? m_draws : total,
                        repetition ? per_draw : 1);
    plan.backend = parse_backend(a.backend);
    plan.psd_policy = parse_policy(a.psd_policy);
    plan.seed = a.seed;
    batch = repetition ? thermies_repetition(plan, rng, a.workers).batch
                       : thermies_sample(plan, total, rng);
  } else {
    throw UsageError("unknown mode: " + a.mode);
  }
  batch.seed = a.seed;

  auto kv = a.quant.describe();
  kv.insert(kv.begin(), {"matrix", a.matrix_path});
  kv.push_back({"n", std::to_string(total)});
  if (repetition) {
    kv.push_back({"ensemble_draws", std::to_string(m_draws)});
    kv.push_back({"samples_per_draw", std::to_string(per_draw)});
  }
  kv.push_back({"mode", a.mode});
  kv.push_back({"backend", a.backend});
  kv.push_back({"psd_policy", a.psd_policy});
  kv.push_back({"seed", std::to_string(a.seed)});

  Sink sink(a.output);
  write_batch_csv(sink.stream(), batch, provenance("sample", kv));
  if (!a.binary_output.empty()) write_batch_binary(a.binary_output, batch);
  return 0;
}

// ---------------------------------------------------------------------------
// sweep-eps

struct SweepEpsArgs {
  std::vector<int> dims = {1, 2, 3, 4};
  std::vector<double> eps_list;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output = "sweep_eps.csv";
};

int run_sweep_eps(const SweepEpsArgs& a) {
  std::vector<double> eps = a.eps_list;
  if (eps.empty())
    for (int k = 1; k <= 25; ++k) eps.push_back(0.02 * k);
  auto rows = eps_scaling_sweep(a.dims, eps, a.seed, a.workers);
  Sink sink(a.output);
  CsvWriter w(sink.stream());
  w.comment(provenance("sweep-eps", {{"dims", join_ints(a.dims)},
                                     {"eps", join_doubles(eps)},
                                     {"seed", std::to_string(a.seed)}}));
  w.header({"d", "epsilon", "linf_mitigated", "linf_unmitigated"});
  for (const auto& r : rows)
    w.row({std::to_string(r.d), format_double(r.epsilon),
           format_double(r.linf_mitigated), format_double(r.linf_unmitigated)});
  return 0;
}

// ---------------------------------------------------------------------------
// sweep-m

struct SweepMArgs {
  std::vector<int> dims = {8, 64, 512, 1024};
  std::vector<std::size_t> m_list;
  int num_seeds = 10;
  double epsilon = 1.0;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output = "sweep_m.csv";
};

int run_sweep_m(const SweepMArgs& a) {
  std::vector<std::size_t> m_list = a.m_list;
  if (m_list.empty())
    for (std::size_t m = 1; m <= 1024; m *= 2) m_list.push_back(m);
  auto rows = m_scaling_sweep(a.dims, m_list, a.num_seeds, a.epsilon, a.seed,
                              a.workers);
  Sink sink(a.output);
  CsvWriter w(sink.stream());
  w.comment(provenance(
      "sweep-m", {{"dims", join_ints(a.dims)},
                  {"m", join_ints(m_list)},
                  {"num_seeds", std::to_string(a.num_seeds)},
                  {"epsilon", format_double(a.epsilon)},
                  {"seed", std::to_string(a.seed)}}));
  w.header({"d", "m_draws", "seed_index", "rms"});
  for (const auto& r : rows)
    w.row({std::to_string(r.d), std::to_string(r.m_draws),
           std::to_string(r.seed_index), format_double(r.rms)});
  return 0;
}

// ---------------------------------------------------------------------------
// invert

struct InvertArgs {
  std::string matrix_path;
  std::int64_t fixture_seed = -1;
  int dim = 8;
  QuantFlags quant;
  std::size_t ensemble_draws = 4;
  std::size_t n = 100000;
  std::vector<std::size_t> checkpoints;
  int repetitions = 10;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string backend = "exact";
  bool absolute_error = false;
  std::string output = "inversion.csv";
  std::string summary_output;
};

int run_invert(const InvertArgs& a) {
  if (a.matrix_path.empty() == (a.fixture_seed < 0))
    throw UsageError("give exactly one of --matrix or --fixture-seed");
  CovMatrix matrix = a.matrix_path.empty()
                         ? make_inversion_fixture(
                               a.dim, static_cast<std::uint64_t>(a.fixture_seed))
                         : load_matrix(a.matrix_path);

  QuantSpec spec = (a.quant.epsilon > 0.0 || !a.quant.grid_diag.empty())
                       ? a.quant.resolve()
                       : inversion_hardware_grid();

  InversionConfig cfg{matrix,
                      spec,
                      a.ensemble_draws,
                      a.n,
                      a.checkpoints,
                      a.repetitions,
                      a.seed,
                      parse_backend(a.backend),
                      a.absolute_error,
                      a.workers};
  InversionExperimentResult res = inversion_experiment(cfg);

  std::vector<std::pair<std::string, std::string>> kv;
  if (!a.matrix_path.empty())
    kv.push_back({"matrix", a.matrix_path});
  else {
    kv.push_back({"fixture_seed", std::to_string(a.fixture_seed)});
    kv.push_back({"dim", std::to_string(a.dim)});
  }
  for (auto& p : a.quant.epsilon > 0.0 || !a.quant.grid_diag.empty()
                     ? a.quant.describe()
                     : std::vector<std::pair<std::string, std::string>>{
                           {"grid", "hardware"}})
    kv.push_back(p);
  kv.push_back({"ensemble_draws", std::to_string(a.ensemble_draws)});
  kv.push_back({"n", std::to_string(a.n)});
  kv.push_back({"checkpoints", join_ints(res.mitigated.checkpoints)});
  kv.push_back({"repetitions", std::to_string(a.repetitions)});
  kv.push_back({"backend", a.backend});
  kv.push_back({"error", a.absolute_error ? "absolute" : "relative_fro"});
  kv.push_back({"seed", std::to_string(a.seed)});
  const std::string prov = provenance("invert", kv);

  Sink sink(a.output);
  CsvWriter w(sink.stream());
  w.comment(prov);
  w.header({"rep", "checkpoint", "mitigated", "error"});
  for (const auto& r : res.per_rep)
    w.row({std::to_string(r.rep), std::to_string(r.checkpoint),
           r.mitigated ? "1" : "0", format_double(r.error)});

  std::string summary_path = a.summary_output;
  if (summary_path.empty()) {
    if (a.output == "-")
      summary_path = "-";
    else {
      summary_path = a.output;
      auto dot = summary_path.rfind(".csv");
      if (dot != std::string::npos && dot == summary_path.size() - 4)
        summary_path.insert(dot, "_summary");
      else
        summary_path += "_summary.csv";
    }
  }
  Sink ssink(summary_path);
  CsvWriter sw(ssink.stream());
  sw.comment(prov);
  sw.header({"checkpoint", "mitigated", "mean_error", "std_error"});
  for (const ErrorCurve* c : {&res.mitigated, &res.unmitigated})
    for (std::size_t i = 0; i < c->checkpoints.size(); ++i)
      sw.row({std::to_string(c->checkpoints[i]), c->mitigated ? "1" : "0",
              format_double(c->mean_error[i]), format_double(c->std_error[i])});
  return 0;
}

// ---------------------------------------------------------------------------
// feasibility

struct FeasibilityArgs {
  int d_max = 64;
  std::vector<int> bit_depths = {8, 16, 32};
  std::string output = "-";
};

int run_feasibility(const FeasibilityArgs& a) {
  if (a.d_max < 1) throw UsageError("--d-max must be >= 1");
  Sink sink(a.output);
  CsvWriter w(sink.stream());
  w.comment(provenance("feasibility", {{"d_max", std::to_string(a.d_max)},
                                       {"bit_depths", join_ints(a.bit_depths)}}));
  w.header({"d", "xi", "kappa_max"});
  for (int d = 1; d <= a.d_max; ++d)
    for (int xi : a.bit_depths)
      w.row({std::to_string(d), std::to_string(xi),
             format_double(feasible_kappa_max(d, xi))});
  return 0;
}

// ---------------------------------------------------------------------------
// bounds

struct BoundsArgs {
  std::string matrix_path;
  QuantFlags quant;
  std::size_t ensemble_draws = 100;
  std::size_t samples_per_draw = 100;
  double delta = 0.1;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output = "-";
};

int run_bounds(const BoundsArgs& a) {
  CovMatrix target = load_matrix(a.matrix_path);
  QuantSpec spec = a.quant.resolve();
  MitigationPlan plan(target, spec, a.ensemble_draws, a.samples_per_draw);
  plan.seed = a.seed;
  Rng rng = Rng::derive(a.seed, {0x626E6473ULL});
  RepetitionResult rep = thermies_repetition(plan, rng, a.workers);
  double eps_for_bound =
      spec.mode() == QuantMode::Uniform ? spec.epsilon() : 0.0;
  if (spec.mode() != QuantMode::Uniform) {
    // grid mode: use the widest bracket as the Hoeffding range
    NeighborSampler sampler(target, spec);
    for (std::size_t p = 0; p < sampler.lo_upper().size(); ++p)
      eps_for_bound = std::max(
          eps_for_bound, sampler.hi_upper()[p] - sampler.lo_upper()[p]);
  }
  BoundReport report = evaluate_bounds(rep.drawn, plan.total_samples(),
                                       a.delta, eps_for_bound);

  const int d = target.dim();
  SymMatrix mean(d);
  for (const auto& m : rep.drawn)
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) mean.set(i, j, mean(i, j) + m(i, j));
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      mean.set(i, j, mean(i, j) / static_cast<double>(rep.drawn.size()));

  auto kv = a.quant.describe();
  kv.insert(kv.begin(), {"matrix", a.matrix_path});
  kv.push_back({"ensemble_draws", std::to_string(a.ensemble_draws)});
  kv.push_back({"samples_per_draw", std::to_string(a.samples_per_draw)});
  kv.push_back({"delta", format_double(a.delta)});
  kv.push_back({"hoeffding_prob", format_double(report.hoeffding_prob)});
  kv.push_back({"combined_lower", format_double(report.combined_lower)});
  kv.push_back({"seed", std::to_string(a.seed)});

  Sink sink(a.output);
  CsvWriter w(sink.stream());
  w.comment(provenance("bounds", kv));
  w.header({"i", "j", "sbar", "abs_dev", "hoeffding_prob", "combined_lower"});
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      w.row({std::to_string(i), std::to_string(j),
             format_double(report.sbar(i, j)),
             format_double(std::abs(mean(i, j) - target(i, j))),
             format_double(report.hoeffding_prob),
             format_double(combined_bound(plan.total_samples(),
                                          a.ensemble_draws, a.delta,
                                          eps_for_bound, report.sbar(i, j)))});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"error-mitigated Gaussian sampling on imprecise hardware"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("thermies ") + kVersion);

  ResidualArgs residual_args;
  auto* sub_residual =
      app.add_subcommand("residual", "fractional rounding residuals of a target");
  sub_residual->add_option("--matrix", residual_args.matrix_path, "matrix file")
      ->required();
  sub_residual->add_option("--epsilon", residual_args.epsilon, "step size")
      ->required();
  sub_residual->add_option("--output", residual_args.output, "CSV path or -");

  WeightsArgs weights_args;
  auto* sub_weights = app.add_subcommand(
      "weights", "enumerate the rounding ensemble with its weights");
  sub_weights->add_option("--matrix", weights_args.matrix_path, "matrix file")
      ->required();
  sub_weights->add_option("--epsilon", weights_args.epsilon, "step size")
      ->required();
  sub_weights->add_option("--output", weights_args.output, "CSV path or -");

  SampleArgs sample_args;
  auto* sub_sample =
      app.add_subcommand("sample", "draw samples from the simulated device");
  sub_sample->add_option("--matrix", sample_args.matrix_path, "target matrix")
      ->required();
  sample_args.quant.attach(sub_sample);
  sub_sample->add_option("--n", sample_args.n, "total sample count");
  sub_sample->add_option("--ensemble-draws", sample_args.ensemble_draws,
                         "M rounding draws (repetition protocol)");
  sub_sample->add_option("--samples-per-draw", sample_args.samples_per_draw,
                         "n samples per rounding draw");
  sub_sample->add_option("--mode", sample_args.mode,
                         "mitigated | unmitigated | strict");
  sub_sample->add_option("--backend", sample_args.backend, "exact | langevin");
  sub_sample->add_option("--psd-policy", sample_args.psd_policy,
                         "redraw | clip | error");
  sub_sample->add_option("--seed", sample_args.seed, "RNG seed")
      ->envname("THERMIES_SEED")
      ->required();
  sub_sample->add_option("--workers", sample_args.workers, "worker threads");
  sub_sample->add_option("--output", sample_args.output, "CSV path or -");
  sub_sample->add_option("--binary-output", sample_args.binary_output,
                         "optional binary batch path");

  SweepEpsArgs sweep_eps_args;
  auto* sub_sweep_eps = app.add_subcommand(
      "sweep-eps", "distance to target vs imprecision step");
  sub_sweep_eps->add_option("--dims", sweep_eps_args.dims, "dimensions (1..4)")
      ->delimiter(',');
  sub_sweep_eps
      ->add_option("--eps-list", sweep_eps_args.eps_list, "step sizes")
      ->delimiter(',');
  sub_sweep_eps->add_option("--seed", sweep_eps_args.seed, "RNG seed")
      ->envname("THERMIES_SEED")
      ->required();
  sub_sweep_eps->add_option("--workers", sweep_eps_args.workers,
                            "worker threads");
  sub_sweep_eps->add_option("--output", sweep_eps_args.output, "CSV path or -");

  SweepMArgs sweep_m_args;
  auto* sub_sweep_m = app.add_subcommand(
      "sweep-m", "ensemble-average RMS error vs number of draws");
  sub_sweep_m->add_option("--dims", sweep_m_args.dims, "dimensions")
      ->delimiter(',');
  sub_sweep_m->add_option("--m-list", sweep_m_args.m_list, "draw counts")
      ->delimiter(',');
  sub_sweep_m->add_option("--num-seeds", sweep_m_args.num_seeds,
                          "independent targets per dimension");
  sub_sweep_m->add_option("--epsilon", sweep_m_args.epsilon, "step size");
  sub_sweep_m->add_option("--seed", sweep_m_args.seed, "RNG seed")
      ->envname("THERMIES_SEED")
      ->required();
  sub_sweep_m->add_option("--workers", sweep_m_args.workers, "worker threads");
  sub_sweep_m->add_option("--output", sweep_m_args.output, "CSV path or -");

  InvertArgs invert_args;
  auto* sub_invert = app.add_subcommand(
      "invert", "sampling-based matrix inversion, mitigated vs not");
  sub_invert->add_option("--matrix", invert_args.matrix_path,
                         "matrix to invert (precision-matrix encoding)");
  sub_invert->add_option("--fixture-seed", invert_args.fixture_seed,
                         "generate a grid-compatible fixture instead");
  sub_invert->add_option("--dim", invert_args.dim, "fixture dimension");
  invert_args.quant.attach(sub_invert);
  sub_invert->add_option("--ensemble-draws", invert_args.ensemble_draws,
                         "M rounding draws for the mitigated path");
  sub_invert->add_option("--n", invert_args.n, "total samples per repetition");
  sub_invert
      ->add_option("--checkpoints", invert_args.checkpoints,
                   "sample counts at which error is recorded")
      ->delimiter(',');
  sub_invert->add_option("--repetitions", invert_args.repetitions,
                         "independent repetitions");
  sub_invert->add_option("--backend", invert_args.backend, "exact | langevin");
  sub_invert->add_flag("--absolute-error", invert_args.absolute_error,
                       "report absolute instead of relative Frobenius error");
  sub_invert->add_option("--seed", invert_args.seed, "RNG seed")
      ->envname("THERMIES_SEED")
      ->required();
  sub_invert->add_option("--workers", invert_args.workers, "worker threads");
  sub_invert->add_option("--output", invert_args.output, "per-rep CSV path");
  sub_invert->add_option("--summary", invert_args.summary_output,
                         "summary CSV path (default: derived from --output)");

  FeasibilityArgs feasibility_args;
  auto* sub_feasibility = app.add_subcommand(
      "feasibility", "largest representable condition number per (d, xi)");
  sub_feasibility->add_option("--d-max", feasibility_args.d_max,
                              "largest dimension");
  sub_feasibility
      ->add_option("--bit-depths", feasibility_args.bit_depths, "bit depths")
      ->delimiter(',');
  sub_feasibility->add_option("--output", feasibility_args.output,
                              "CSV path or -");

  BoundsArgs bounds_args;
  auto* sub_bounds = app.add_subcommand(
      "bounds", "concentration bounds for a repetition run");
  sub_bounds->add_option("--matrix", bounds_args.matrix_path, "target matrix")
      ->required();
  bounds_args.quant.attach(sub_bounds);
  sub_bounds->add_option("--ensemble-draws", bounds_args.ensemble_draws,
                         "M rounding draws");
  sub_bounds->add_option("--samples-per-draw", bounds_args.samples_per_draw,
                         "n samples per draw");
  sub_bounds->add_option("--delta", bounds_args.delta, "deviation threshold");
  sub_bounds->add_option("--seed", bounds_args.seed, "RNG seed")
      ->envname("THERMIES_SEED")
      ->required();
  sub_bounds->add_option("--workers", bounds_args.workers, "worker threads");
  sub_bounds->add_option("--output", bounds_args.output, "CSV path or -");

  std::string config_path;
  for (auto* sub : app.get_subcommands({}))
    sub->add_option("--config", config_path, "key = value configuration file");

  try {
    std::vector<std::string> args = expand_config_args(argc, argv);
    std::vector<const char*> argv2;
    argv2.push_back(argc > 0 ? argv[0] : "thermies");
    for (const auto& a : args) argv2.push_back(a.c_str());
    app.parse(static_cast<int>(argv2.size()), argv2.data());
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\nrun with --help for usage\n";
    return 2;
  }

  try {
    if (sub_residual->parsed()) return run_residual(residual_args);
    if (sub_weights->parsed()) return run_weights(weights_args);
    if (sub_sample->parsed()) return run_sample(sample_args);
    if (sub_sweep_eps->parsed()) return run_sweep_eps(sweep_eps_args);
    if (sub_sweep_m->parsed()) return run_sweep_m(sweep_m_args);
    if (sub_invert->parsed()) return run_invert(invert_args);
    if (sub_feasibility->parsed()) return run_feasibility(feasibility_args);
    if (sub_bounds->parsed()) return run_bounds(bounds_args);
    std::cerr << "no subcommand given; run with --help\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
