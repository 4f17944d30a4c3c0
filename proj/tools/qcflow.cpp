// qcflow: verification suites, pointwise operators, flow lines and gradient-flow runs.
// Exit codes: 0 success, 1 verification failure, 2 usage or configuration error, 3 halted run.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qcflow/flowlines.hpp"
#include "qcflow/gradientflow.hpp"
#include "qcflow/io.hpp"
#include "qcflow/registry.hpp"
#include "qcflow/verify.hpp"

namespace {

using namespace qcflow;

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitHalted = 3;

/// --threads, then QCFLOW_THREADS, then `fallback`.
int resolve_threads(std::optional<int> flag, int fallback = 1) {
  if (flag) return *flag;
  if (const char* env = std::getenv("QCFLOW_THREADS")) {
    try {
      const int t = std::stoi(env);
      if (t >= 1) return t;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::InvalidArgument, "QCFLOW_THREADS must be a positive integer");
  }
  return fallback;
}

Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
  return out;
}

/// Writes `text` to `path`, or to stdout when `path` is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  out << text;
}

struct VerifyArgs {
  std::string suite;
  std::uint64_t seed = 1;
  std::string out;
  std::vector<std::string> tol;
  std::optional<int> threads;
  bool timing = false;
};

int cmd_verify(const VerifyArgs& a) {
  VerifyOptions opt;
  opt.seed = a.seed;
  opt.threads = resolve_threads(a.threads);
  for (const std::string& t : a.tol) {
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::InvalidArgument, "--tol expects <case-id>=<value>, got '" + t + "'");
    }
    try {
      opt.tolerance[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "--tol value is not a number: '" + t + "'");
    }
  }
  std::vector<std::string> suites;
  if (a.suite == "all") {
    suites = verification_suites();
  } else {
    suites = {a.suite};
  }
  bool ok = true;
  json doc;
  if (suites.size() == 1) {
    const VerificationReport r = run_verification(suites[0], opt);
    ok = r.all_passed();
    doc = to_json(r, a.timing);
  } else {
    doc = json::array();
    for (const auto& s : suites) {
      const VerificationReport r = run_verification(s, opt);
      ok = ok && r.all_passed();
      doc.push_back(to_json(r, a.timing));
    }
  }
  emit(a.out, doc.dump(2) + "\n");
  return ok ? kExitOk : kExitFailed;
}

struct OpsArgs {
  std::string map;
  std::vector<double> params;
  std::vector<double> point;
  double p = 2.0;
  std::optional<int> n;
};

int cmd_ops(const OpsArgs& a) {
  if (a.n && *a.n != static_cast<int>(a.point.size())) {
    throw Error(ErrorCode::InvalidArgument, "--point must have n coordinates");
  }
  std::cout << pointwise_record(a.map, a.params, to_vector(a.point), a.p).dump(2) << "\n";
  return kExitOk;
}

struct FlowlineArgs {
  std::string map;
  std::vector<double> params;
  std::vector<double> x0;
  double ds = 1e-3;
  double maxLen = 1.0;
  double radius = 1.0;
  std::string out;
};

int cmd_flowline(const FlowlineArgs& a) {
  const Vector x0 = to_vector(a.x0);
  const int n = x0.size();
  const SmoothMap map = make_map(a.map, a.params, n);
  const FlowTrajectory tr = trace_flowline(map, x0, a.ds, a.maxLen, Domain::ball(Vector(n), a.radius));
  std::ostringstream csv;
  write_csv(csv, tr, n);
  emit(a.out, csv.str());

  std::ostringstream summary;
  summary << std::setprecision(17) << "# samples=" << tr.samples.size() << " length=" << tr.samples.back().s
          << " terminated=" << to_string(tr.terminated);
  if (tr.terminated == Termination::Degenerate && tr.samples.size() == 1) summary << " status=degenerate-at-start";
  summary << " K0=" << tr.samples.front().K << " K_drift=" << tr.max_K_drift() << "\n";
  // Keep stdout pure CSV when it carries the trajectory.
  (a.out.empty() ? std::cerr : std::cout) << summary.str();
  return kExitOk;
}

int cmd_flow(const std::string& path, std::optional<int> threads_flag) {
  FlowConfig c = load_flow_config(path);
  GridField g = initial_grid(c);
  // --threads, then the config's "threads", then QCFLOW_THREADS.
  c.options.threads = threads_flag ? *threads_flag : c.threads ? *c.threads : resolve_threads(std::nullopt);

  const FlowRunStats st = run_flow(g, c.p, c.T, c.options);
  if (!c.energyCsv.empty()) {
    std::ostringstream os;
    write_stats_csv(os, st);
    emit(c.energyCsv, os.str());
  }
  if (!c.snapshot.empty()) {
    std::ostringstream os;
    write_snapshot(os, g);
    emit(c.snapshot, os.str());
  }
  std::cout << std::setprecision(17) << "steps=" << st.steps() << " t=" << st.times.back()
            << " energy0=" << st.energy.front() << " energy=" << st.energy.back()
            << " minDet=" << *std::min_element(st.minDet.begin(), st.minDet.end())
            << " detFloor=" << st.detFloor << " compatibility=" << st.compatibility
            << " halvings=" << st.halvings << " halt=" << to_string(st.haltReason) << "\n";
  return st.halted() ? kExitHalted : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-dilation operators, flow lines and p-distortion gradient flow"};
  app.require_subcommand(1);

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Run a seeded verification suite and print a JSON report");
  verify->add_option("suite", va.suite, "core | operators | examples | flowlines | traces | flow | all")
      ->required();
  verify->add_option("--seed", va.seed, "Seed for random cases");
  verify->add_option("--out", va.out, "Write the report here instead of stdout");
  verify->add_option("--tol", va.tol, "Tolerance override <case-id>=<value> (repeatable)");
  verify->add_option("--threads", va.threads, "Worker threads (default: QCFLOW_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  verify->add_flag("--timing", va.timing, "Include wall time in the report");

  OpsArgs oa;
  auto* ops = app.add_subcommand("ops", "Evaluate K, S(g), L_p and L_inf of a registry map at a point");
  ops->add_option("map", oa.map, "Registry map id")->required();
  ops->add_option("--params", oa.params, "Comma-separated map parameters")->delimiter(',');
  ops->add_option("--point", oa.point, "Comma-separated coordinates")->delimiter(',')->required();
  ops->add_option("--p", oa.p, "Exponent p >= 1");
  ops->add_option("--n", oa.n, "Dimension (must match --point)");

  FlowlineArgs fa;
  auto* flowline = app.add_subcommand("flowline", "Trace a flow line of S(g) du^{-T} in a ball");
  flowline->add_option("map", fa.map, "Registry map id")->required();
  flowline->add_option("--params", fa.params, "Comma-separated map parameters")->delimiter(',');
  flowline->add_option("--x0", fa.x0, "Comma-separated start point")->delimiter(',')->required();
  flowline->add_option("--ds", fa.ds, "RK4 step in the ODE parameter");
  flowline->add_option("--max-len", fa.maxLen, "Largest ODE parameter value");
  flowline->add_option("--radius", fa.radius, "Radius of the ball around the origin");
  flowline->add_option("--out", fa.out, "CSV path (default: stdout)");

  std::string config;
  std::optional<int> flow_threads;
  auto* flow = app.add_subcommand("flow", "Run the gradient flow described by a JSON config");
  flow->add_option("config", config, "Path to the run configuration")->required();
  flow->add_option("--threads", flow_threads, "Worker threads (overrides the config)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (verify->parsed()) return cmd_verify(va);
    if (ops->parsed()) return cmd_ops(oa);
    if (flowline->parsed()) return cmd_flowline(fa);
    if (flow->parsed()) return cmd_flow(config, flow_threads);
  } catch (const Error& e) {
    std::cerr << "qcflow: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
