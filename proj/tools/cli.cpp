#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "elliptic/elliptic.hpp"

namespace elliptic::cli {

namespace {

using nlohmann::json;

enum class Expect { Pass, Fail };

struct Common {
  std::string op_spec;
  std::size_t dim{2};
  std::uint64_t seed{0};
  std::size_t trials{1000};
  double scale{1.0};
  unsigned threads{0};
  bool json_out{false};
  std::string out_path;
  std::string expect;
  std::vector<double> nu;
  std::optional<double> tol;
};

// A finished command: the claim either held ("pass") or a certificate /
// negative result was produced ("fail").
struct Outcome {
  json report;
  bool passed;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void add_common(CLI::App& sub, Common& c, bool with_op, bool with_sampling) {
  if (with_op) sub.add_option("--op", c.op_spec, "operator spec as JSON, e.g. '{\"family\":\"p_laplace\",\"p\":3}'")->required();
  sub.add_option("--dim", c.dim, "matrix dimension N")->check(CLI::Range(1, static_cast<int>(kMaxDim)));
  if (with_sampling) {
    sub.add_option("--seed", c.seed, "RNG seed");
    sub.add_option("--trials", c.trials, "random trials per stage")->check(CLI::PositiveNumber);
    sub.add_option("--scale", c.scale, "entry range [-scale, scale] for sampled matrices")->check(CLI::PositiveNumber);
    sub.add_option("--threads", c.threads, "worker threads (0 = hardware concurrency)");
  }
  sub.add_flag("--json", c.json_out, "emit the report as JSON");
  sub.add_option("--out", c.out_path, "write the report to this file instead of stdout");
  sub.add_option("--expect", c.expect, "expected outcome; exit 1 when it differs")
      ->check(CLI::IsMember({"pass", "fail"}));
  sub.add_option("--tol", c.tol, "Loewner tolerance (overrides ELLIPTIC_TOL)")->check(CLI::NonNegativeNumber);
}

OperatorDescriptor parse_op(const Common& c) {
  json spec;
  try {
    spec = json::parse(c.op_spec);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("malformed --op JSON: ") + e.what());
  }
  return catalog::make_operator(spec, c.dim);
}

SampleConfig sample_config(const Common& c) {
  SampleConfig cfg;
  cfg.seed = c.seed;
  cfg.trials = c.trials;
  cfg.scale = c.scale;
  cfg.dim = c.dim;
  cfg.threads = c.threads;
  cfg.validate();
  return cfg;
}

json sample_config_json(const SampleConfig& cfg) {
  return {{"seed", cfg.seed}, {"trials", cfg.trials}, {"scale", cfg.scale}, {"dim", cfg.dim}};
}

JetPoint jet(const Common& c) {
  if (c.nu.empty()) {
    std::vector<double> e(c.dim, 0.0);
    e[0] = 1.0;
    return JetPoint{std::vector<double>(c.dim, 0.0), 0.0, e};
  }
  if (c.nu.size() != c.dim) throw UsageError("--nu needs exactly N = " + std::to_string(c.dim) + " entries");
  return JetPoint{std::vector<double>(c.dim, 0.0), 0.0, c.nu};
}

SymmetricMatrix matrix_arg(const std::string& arg, const char* flag) {
  try {
    if (std::filesystem::is_regular_file(arg)) return read_matrix_file(arg);
    return parse_matrix(arg);
  } catch (const Error& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

double loewner_tol(const Common& c) {
  if (c.tol) return *c.tol;
  if (const char* env = std::getenv("ELLIPTIC_TOL"); env && *env) {
    double v = 0.0;
    try {
      v = parse_double(env);
    } catch (const Error&) {
      throw UsageError(std::string("ELLIPTIC_TOL is not a number: ") + env);
    }
    if (!(v >= 0.0)) throw UsageError("ELLIPTIC_TOL must be >= 0");
    return v;
  }
  return kDefaultLoewnerTol;
}

Outcome from_check(const CheckResult& r) { return {to_json(r), passed(r)}; }

// --- subcommands -----------------------------------------------------------

Outcome cmd_catalog() {
  json fams = json::array();
  for (const auto& f : catalog::families()) {
    fams.push_back({{"family", f.family}, {"formula", f.formula}, {"domain", f.domain}, {"fields", f.fields}});
  }
  return {{{"families", fams}}, true};
}

Outcome cmd_check_ellipticity(const Common& c, json& config) {
  const auto op = parse_op(c);
  const auto cfg = sample_config(c);
  config = {{"operator", op.params()}, {"sampling", sample_config_json(cfg)}};
  return from_check(check_degenerate_ellipticity(op, cfg));
}

Outcome cmd_check_class_u(const Common& c, std::optional<double> lambda, double h, json& config) {
  const auto op = parse_op(c);
  const auto cfg = sample_config(c);
  std::optional<ClassUWitness> w;
  if (lambda) {
    w = ClassUWitness::constant(*lambda, h);
  } else {
    w = known_class_u_witness(op);
    if (!w) throw UsageError(op.name() + " has no shipped Class U witness; pass --lambda (and --H)");
  }
  config = {{"operator", op.params()}, {"sampling", sample_config_json(cfg)}, {"lambda", w->lambda()}, {"H", w->h_name()}};
  return from_check(check_class_u(op, *w, cfg));
}

Outcome cmd_check_class_m(const Common& c, const std::string& candidate, json& config) {
  const auto op = parse_op(c);
  const auto cfg = sample_config(c);
  const JetPoint w = jet(c);
  config = {{"operator", op.params()}, {"sampling", sample_config_json(cfg)}, {"omega", to_json(w)}};
  std::optional<WitnessPair> pair;
  if (!candidate.empty()) {
    json spec;
    try {
      spec = json::parse(candidate);
    } catch (const json::parse_error& e) {
      throw UsageError(std::string("malformed --candidate JSON: ") + e.what());
    }
    pair = known_class_m_witnesses(catalog::make_operator(spec, c.dim), w, w);
    if (!pair) throw UsageError("--candidate operator has no shipped Class M witnesses");
    config["candidate"] = spec;
  } else {
    try {
      pair = known_class_m_witnesses(op, w, w);
      if (!pair && op.params().value("family", "") == "eig_sum") {
        pair = witness_eig_sum(MonotoneFunction::from_json(op.params()));
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotInClassM) throw;
      return {{{"result", "not_in_class_m"}, {"kind", "class_m"}, {"reason", e.what()}}, false};
    }
    if (!pair) throw UsageError(op.name() + " has no shipped Class M witnesses; pass --candidate");
  }
  return from_check(check_class_m(op, pair->g1, pair->g2, cfg));
}

Outcome cmd_bounds(const Common& c, const std::string& e_arg, const std::string& d_arg, const std::string& route,
                   const std::string& x_arg, const std::string& y_arg, json& config) {
  const auto op = parse_op(c);
  const JetPoint w = jet(c);
  const auto e = matrix_arg(e_arg, "--E");
  const auto d = matrix_arg(d_arg, "--D");
  if (e.dim() != c.dim || d.dim() != c.dim) throw UsageError("--E and --D must be N x N with N = --dim");
  const double tol = loewner_tol(c);
  config = {{"operator", op.params()}, {"route", route}, {"omega", to_json(w)}, {"tol", tol}};

  BoundReport report;
  if (route == "corollary") {
    const auto u = known_class_u_witness(op);
    if (!u) throw UsageError(op.name() + " has no shipped Class U witness for the corollary route");
    report = corollary_bounds(op, *u, w, w, e, d);
  } else {
    const auto pair = known_class_m_witnesses(op, w, w);
    if (!pair) throw UsageError(op.name() + " has no shipped Class M witnesses");
    report = theorem_lower_bounds(pair->g1, pair->g2, e, d);
  }
  bool ok = true;
  if (!x_arg.empty()) {
    const auto x = matrix_arg(x_arg, "--X");
    const double l1 = lambda_min(x);
    report.details["lambda_1_X"] = l1;
    report.details["X_ok"] = l1 >= report.lower_X - tol;
    ok = ok && report.details["X_ok"].get<bool>();
  }
  if (!y_arg.empty()) {
    const auto y = matrix_arg(y_arg, "--Y");
    const double l1 = lambda_min(-y);
    report.details["lambda_1_negY"] = l1;
    report.details["negY_ok"] = l1 >= report.lower_negY - tol;
    ok = ok && report.details["negY_ok"].get<bool>();
  }
  json j = to_json(report);
  j["result"] = ok ? "pass" : "violation";
  return {j, ok};
}

Outcome cmd_counterexample(const Common& c, const std::string& name, const CounterexampleParams& params,
                           json& config) {
  config = {{"name", name},        {"dim", params.dim},       {"k", params.k}, {"n", params.n},
            {"d", params.d},       {"lambda", params.lambda}, {"K", params.K}, {"p", params.p},
            {"c", params.c ? json(*params.c) : json(nullptr)}};
  (void)c;
  const Certificate cert = counterexample(name, params);
  json j = to_json(cert);
  j["recomputed_margin"] = recompute_margin(cert);
  const bool holds = cert.details.value("holds", false);
  return {j, !holds};
}

struct SumsArgs {
  double alpha{1.0};
  double eps0{1.0};
  std::size_t terms{40};
  double slack{0.0};
  double jitter{0.0};
  double limit_tol{1e-6};
};

Outcome cmd_sums_demo(const Common& c, const SumsArgs& s, json& config) {
  const auto op = parse_op(c);
  TestFunction tf = TestFunction::quadratic(s.alpha, c.dim);
  if (!c.nu.empty()) {
    if (c.nu.size() != c.dim) throw UsageError("--nu needs exactly N entries");
    // Anchor x_hat so that p = q = nu.
    for (std::size_t i = 0; i < c.dim; ++i) tf.x_hat[i] = c.nu[i] / s.alpha;
  }
  config = {{"operator", op.params()}, {"alpha", s.alpha}, {"dim", c.dim},       {"eps0", s.eps0},
            {"terms", s.terms},        {"slack", s.slack}, {"jitter", s.jitter}, {"seed", c.seed},
            {"limit_tol", s.limit_tol}};

  const BlockMatrix2N a = hessian_blocks(tf);
  const auto sched = EpsilonSchedule::geometric(s.eps0, 0.5, s.terms);
  const auto family = generate_admissible(a, sched, s.slack, c.seed, s.jitter);

  json pairs = json::array();
  bool eq1_ok = true;
  for (const auto& pr : family.pairs) {
    const Eq1Margins m = eq1_margins(a, pr.eps, pr.X, pr.Y);
    const bool ok = m.lower >= -kSumsTol && m.upper >= -kSumsTol;
    eq1_ok = eq1_ok && ok;
    pairs.push_back({{"eps", pr.eps}, {"lower_margin", m.lower}, {"upper_margin", m.upper}, {"eq1", ok}});
  }
  const CheckResult lemma = lemma_upper_bound(a, s.eps0, family);
  const LimitPair limits = extract_limit(family, s.limit_tol);

  const auto witnesses = known_class_m_witnesses(op, tf.jet_x(), tf.jet_y());
  if (!witnesses) throw UsageError(op.name() + " has no shipped Class M witnesses");
  const BoundReport bounds = verify_conclusion(op, witnesses->g1, witnesses->g2, tf, family, limits);

  json j = {{"test_function",
             {{"family", tf.family}, {"alpha", tf.alpha}, {"dim", tf.dim}, {"x_hat", tf.x_hat},
              {"y_hat", tf.y_hat},   {"p", tf.p()},       {"q", tf.q()}}},
            {"A", to_json(a.assemble())},
            {"schedule", sched.values},
            {"pairs", pairs},
            {"lemma", to_json(lemma)},
            {"limits", {{"X", to_json(limits.X)}, {"Y", to_json(limits.Y)}, {"oscillation", limits.oscillation}}},
            {"bounds", to_json(bounds)}};
  if (const auto u = known_class_u_witness(op)) {
    j["corollary"] = to_json(corollary_bounds(op, *u, tf.jet_x(), tf.jet_y(), a.E, a.D));
  }
  const bool ok = eq1_ok && passed(lemma) && bounds.upper_block_ok && bounds.details.at("implications_ok").get<bool>() &&
                  bounds.details.at("limit_X_ok").get<bool>() && bounds.details.at("limit_negY_ok").get<bool>();
  j["result"] = ok ? "pass" : "violation";
  return {j, ok};
}

// --- output ----------------------------------------------------------------

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& rows) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, rows);
    return;
  }
  if (j.is_array() && !j.empty() && j.front().is_object()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", rows);
    return;
  }
  rows.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
}

std::string render_table(const json& doc) {
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(doc, "", rows);
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.first.size());
  std::ostringstream os;
  for (const auto& [k, v] : rows) os << std::left << std::setw(static_cast<int>(width)) << k << "  " << v << '\n';
  return os.str();
}

int emit(const Common& c, const json& doc, std::ostream& out, std::ostream& err) {
  const std::string text = c.json_out ? doc.dump(2) + "\n" : render_table(doc);
  if (c.out_path.empty()) {
    out << text;
    return kExitOk;
  }
  std::ofstream f(c.out_path, std::ios::binary);
  if (!f || !(f << text)) {
    err << "error: cannot write " << c.out_path << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Degenerate elliptic operators: class checks, bounds, counterexamples"};
  app.name("elliptic");
  app.require_subcommand(1);

  Common common;
  std::optional<double> lambda;
  double h_const = 0.0;
  std::string candidate;
  std::string e_arg, d_arg, x_arg, y_arg, route = "theorem";
  std::string cx_name;
  CounterexampleParams cx;
  SumsArgs sums;

  auto* catalog_cmd = app.add_subcommand("catalog", "list the operator families");
  add_common(*catalog_cmd, common, false, false);

  auto* ell = app.add_subcommand("check-ellipticity", "sample X <= Y and check F(X) >= F(Y)");
  add_common(*ell, common, true, true);
  ell->add_option("--nu", common.nu, "unused; accepted for uniformity")->delimiter(',');

  auto* cu = app.add_subcommand("check-class-u", "sample the Class U inequality");
  add_common(*cu, common, true, true);
  cu->add_option("--lambda", lambda, "witness lambda (default: shipped witness)")->check(CLI::PositiveNumber);
  cu->add_option("--H", h_const, "constant witness H");

  auto* cm = app.add_subcommand("check-class-m", "check Class M conditions 1-4 for shipped witnesses");
  add_common(*cm, common, true, true);
  cm->add_option("--nu", common.nu, "gradient slot, comma separated (default e_1)")->delimiter(',');
  cm->add_option("--candidate", candidate, "operator spec whose witnesses are used as candidates");

  auto* bd = app.add_subcommand("bounds", "lower bounds on X and -Y from (E, D)");
  add_common(*bd, common, true, false);
  bd->add_option("--nu", common.nu, "gradient slot, comma separated (default e_1)")->delimiter(',');
  bd->add_option("--E", e_arg, "E block: file or inline matrix (text or JSON)")->required();
  bd->add_option("--D", d_arg, "D block: file or inline matrix (text or JSON)")->required();
  bd->add_option("--route", route, "theorem | corollary")->check(CLI::IsMember({"theorem", "corollary"}));
  bd->add_option("--X", x_arg, "limit X to check against the lower bound");
  bd->add_option("--Y", y_arg, "limit Y to check against the lower bound");

  auto* ce = app.add_subcommand("counterexample", "reproduce a counterexample construction");
  add_common(*ce, common, false, false);
  ce->add_option("--name", cx_name, "inf_laplace | k_hessian | p1_laplace | power_not_u | p_laplace_not_u")
      ->required();
  ce->add_option("--k", cx.k, "k for k_hessian");
  ce->add_option("--n", cx.n, "n for k_hessian");
  ce->add_option("--c", cx.c, "single c <= 0 instead of the default grid");
  ce->add_option("--d", cx.d, "odd root degree for power_not_u");
  ce->add_option("--lambda", cx.lambda, "Class U lambda to refute");
  ce->add_option("--K", cx.K, "Class U constant H = K to refute");
  ce->add_option("--p", cx.p, "p for p_laplace_not_u");

  auto* sd = app.add_subcommand("sums-demo", "run the theorem-of-sums pipeline on the quadratic test function");
  add_common(*sd, common, true, false);
  sd->add_option("--seed", common.seed, "seed for the optional jitter");
  sd->add_option("--nu", common.nu, "gradient slot p = q (default alpha e_1)")->delimiter(',');
  sd->add_option("--alpha", sums.alpha, "test function alpha > 0");
  sd->add_option("--eps0", sums.eps0, "schedule start eps0 > 0");
  sd->add_option("--terms", sums.terms, "schedule length")->check(CLI::Range(1, 200));
  sd->add_option("--slack", sums.slack, "extra diagonal shift >= 0");
  sd->add_option("--jitter", sums.jitter, "seeded PSD jitter scale >= 0");
  sd->add_option("--limit-tol", sums.limit_tol, "Cauchy tolerance for the limit");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  const bool counter = sub == ce;
  const Expect expect = common.expect.empty() ? (counter ? Expect::Fail : Expect::Pass)
                                              : (common.expect == "pass" ? Expect::Pass : Expect::Fail);
  cx.dim = common.dim;

  json config = json::object();
  Outcome outcome;
  try {
    if (sub == catalog_cmd) {
      outcome = cmd_catalog();
    } else if (sub == ell) {
      outcome = cmd_check_ellipticity(common, config);
    } else if (sub == cu) {
      outcome = cmd_check_class_u(common, lambda, h_const, config);
    } else if (sub == cm) {
      outcome = cmd_check_class_m(common, candidate, config);
    } else if (sub == bd) {
      outcome = cmd_bounds(common, e_arg, d_arg, route, x_arg, y_arg, config);
    } else if (counter) {
      outcome = cmd_counterexample(common, cx_name, cx, config);
    } else {
      outcome = cmd_sums_demo(common, sums, config);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const json::exception& e) {
    err << "error: malformed input: " << e.what() << '\n';
    return kExitUsage;
  }

  const bool met = outcome.passed == (expect == Expect::Pass);
  const int code = met ? kExitOk : kExitViolation;
  const json doc = {{"command", command},
                    {"config", config},
                    {"outcome", outcome.passed ? "pass" : "fail"},
                    {"expect", expect == Expect::Pass ? "pass" : "fail"},
                    {"exit_code", code},
                    {"report", outcome.report}};
  const int io = emit(common, doc, out, err);
  return io != kExitOk ? io : code;
}

}  // namespace elliptic::cli
