#include "dualgap/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "dualgap/brenier.hpp"
#include "dualgap/errors.hpp"
#include "dualgap/ot.hpp"

namespace dualgap::cli {

namespace {

using json = nlohmann::json;

json num(double v) {
  if (std::isnan(v)) throw std::domain_error("NaN in output");
  if (std::isinf(v)) return nullptr;
  return v;
}

json vec(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

json mat(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec(m.row(i).transpose()));
  return a;
}

json map_json(const std::map<std::string, double>& m) {
  json o = json::object();
  for (const auto& [k, v] : m) o[k] = num(v);
  return o;
}

std::string fmt17(double v) {
  if (std::isnan(v)) throw std::domain_error("NaN in output");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + std::count(text.begin(), text.begin() + byte, '\n');
}

json load_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(path + ":" + std::to_string(line_of(text, e.byte)) + ": malformed JSON: " +
                     e.what());
  }
}

// Numbers separated by commas, spaces or newlines; a non-numeric first line
// is taken as a header.
std::vector<std::vector<double>> load_csv(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::string cell;
    std::istringstream ls(line);
    bool bad = false;
    while (std::getline(ls, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t"), e = cell.find_last_not_of(" \t");
      if (b == std::string::npos) {
        bad = true;
        break;
      }
      cell = cell.substr(b, e - b + 1);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end != cell.c_str() + cell.size() || !std::isfinite(v)) {
        bad = true;
        break;
      }
      row.push_back(v);
    }
    if (bad) {
      if (rows.empty() && lineno == 1) continue;
      throw InputError(path + ":" + std::to_string(lineno) + ": malformed CSV row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path + ": no data rows");
  return rows;
}

template <class T>
T field(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw InputError(path + ": missing key \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(path + ": key \"" + key + "\" has the wrong type");
  }
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), v.size()); }

Matrix to_matrix(const std::vector<std::vector<double>>& rows, const std::string& what) {
  if (rows.empty()) return Matrix();
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw InputError(what + ": ragged rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

DiscreteDistribution dist_field(const json& j, const std::string& key, const std::string& path) {
  return DiscreteDistribution(to_vector(field<std::vector<double>>(j, key, path)));
}

// {"points": [labels], "metric": "euclidean"|"manhattan"|"discrete"|"explicit",
//  "dist": [[...]], "coords": [[...]]}, at the top level or under "space".
FiniteMetricSpace space_field(const json& j, const std::string& path) {
  const json& s = j.contains("space") ? j["space"] : j;
  std::vector<std::string> labels;
  if (s.contains("points")) labels = field<std::vector<std::string>>(s, "points", path);
  const std::string metric = s.value("metric", s.contains("dist") ? "explicit" : "euclidean");
  auto coords = [&] {
    return to_matrix(field<std::vector<std::vector<double>>>(s, "coords", path), path);
  };
  if (metric == "explicit")
    return FiniteMetricSpace(labels, to_matrix(field<std::vector<std::vector<double>>>(s, "dist", path), path));
  if (metric == "euclidean") return FiniteMetricSpace::euclidean(coords(), labels);
  if (metric == "manhattan") return FiniteMetricSpace::manhattan(coords(), labels);
  if (metric == "discrete") {
    if (labels.empty()) throw InputError(path + ": discrete metric needs \"points\"");
    return FiniteMetricSpace::discrete(labels.size(), labels);
  }
  throw InputError(path + ": unknown metric \"" + metric + "\"");
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(tok, &pos);
      if (pos != tok.size() || v <= 0) throw std::invalid_argument(tok);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw InputError("bad sample-size list: " + s);
    }
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw InputError("bad " + what + ": " + s);
    }
  }
  return out;
}

struct Common {
  std::string out = "-";
  bool quiet = false;
  bool no_timing = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out", c.out, "Output path, '-' for standard output");
  sub->add_flag("--quiet", c.quiet, "Suppress the summary on standard error");
  sub->add_flag("--no-timing", c.no_timing, "Omit the wall-clock sidecar field");
}

// Opens the output before any work so a bad path fails fast.
class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (path != "-") {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw InputError(path + ": cannot open for writing");
    }
  }
  std::ostream& stream() { return path_ == "-" ? std::cout : file_; }

 private:
  std::string path_;
  std::ofstream file_;
};

void emit_report(Output& out, const Common& c, const std::string& command, json config,
                 json results, bool pass, double seconds) {
  json r;
  r["schema_version"] = kSchemaVersion;
  r["command"] = command;
  r["config"] = std::move(config);
  r["results"] = std::move(results);
  r["summary"] = {{"pass", pass}};
  if (!c.no_timing) r["timing"] = {{"wall_seconds", seconds}};
  out.stream() << r.dump(2) << "\n";
  out.stream().flush();
}

json theorem_json(const TheoremReport& rep) {
  json inst = json::array();
  for (const auto& r : rep.instances) {
    inst.push_back({{"index", r.index},
                    {"seed", r.seed},
                    {"pass", r.pass},
                    {"skipped", r.skipped},
                    {"note", r.note},
                    {"values", map_json(r.values)},
                    {"gaps", map_json(r.gaps)}});
  }
  return {{"suite", rep.suite},
          {"tolerances", map_json(rep.tolerances)},
          {"summary",
           {{"passed", rep.passed()}, {"failed", rep.failed()}, {"skipped", rep.skipped()}, {"pass", rep.pass()}}},
          {"instances", std::move(inst)}};
}

json solution_json(const PenaltySolution& s) {
  return {{"value", num(s.value)},
          {"q", vec(s.q)},
          {"iters", s.iters},
          {"lower_bound", num(s.lower_bound)},
          {"certified_gap", num(s.certified_gap)},
          {"converged", s.converged},
          {"method", s.method}};
}

const char* kSeedScheme = "instance seed = splitmix64 finalizer of (master + 0x9E3779B97F4A7C15*(index+1))";

}  // namespace

std::string theorem_report_json(const TheoremReport& report) { return theorem_json(report).dump(2); }

std::string rate_curve_csv(const RateCurve& curve) {
  std::string s = "n,trial,ipm,bound_term\n";
  for (const auto& r : curve.rows)
    s += std::to_string(r.n) + "," + std::to_string(r.trial) + "," + fmt17(r.ipm) + "," +
         fmt17(r.bound_term) + "\n";
  return s;
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Wasserstein / f-divergence duality toolkit", "dualgap"};
  app.require_subcommand(1);
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  Common common;
  std::optional<std::uint64_t> seed;

  // ot
  std::string ot_input, ot_method = "primal";
  double ot_eps = 0.01;
  auto* ot = app.add_subcommand("ot", "Transport between two distributions");
  ot->add_option("--input", ot_input, "Problem JSON: space or cost, P, Q")->required()->check(CLI::ExistingFile);
  ot->add_option("--method", ot_method, "primal | dual | sinkhorn")
      ->check(CLI::IsMember({"primal", "dual", "sinkhorn"}));
  ot->add_option("--epsilon", ot_eps, "Entropic regularization for sinkhorn")->check(CLI::PositiveNumber);
  add_common(ot, common);

  // objective
  std::string ob_input, ob_kind = "fgan", ob_f = "tv", ob_solver = "auto";
  double ob_lambda = 1;
  SolverConfig cfg;
  auto* ob = app.add_subcommand("objective", "Restricted f-GAN, WAE or f-WAE value");
  ob->add_option("--input", ob_input, "Problem JSON")->required()->check(CLI::ExistingFile);
  ob->add_option("--kind", ob_kind, "fgan | fgan-direct | wae | fwae")
      ->check(CLI::IsMember({"fgan", "fgan-direct", "wae", "fwae"}));
  ob->add_option("--f", ob_f, "Generator name");
  ob->add_option("--lambda", ob_lambda, "Penalty weight")->check(CLI::PositiveNumber);
  ob->add_option("--solver", ob_solver, "auto | refinement | mirror-descent")
      ->check(CLI::IsMember({"auto", "refinement", "mirror-descent"}));
  ob->add_option("--tol", cfg.tol, "Certified gap target")->check(CLI::PositiveNumber);
  ob->add_option("--max-iters", cfg.max_iters, "Mirror-descent iterations")->check(CLI::PositiveNumber);
  ob->add_option("--max-rounds", cfg.max_rounds, "Refinement rounds")->check(CLI::PositiveNumber);
  ob->add_option("--step-scale", cfg.step_scale, "Mirror-descent step scale")->check(CLI::PositiveNumber);
  add_common(ob, common);

  // verify
  std::string v_suite, v_metric = "euclidean", v_gkind = "permutation", v_f, v_eps = "1,0.1,0.01";
  std::size_t v_instances = 20;
  InstanceSpec ispec;
  ispec.n_x = 4, ispec.n_z = 4;
  auto* ve = app.add_subcommand("verify", "Randomized theorem verification");
  ve->add_option("--suite", v_suite, "theorem1 | theorem2 | theorem3 | theorem5 | lemmas")
      ->required()
      ->check(CLI::IsMember({"theorem1", "theorem2", "theorem3", "theorem5", "lemmas"}));
  ve->add_option("--instances", v_instances, "Instance count")->check(CLI::PositiveNumber);
  ve->add_option("--seed", seed, "Master seed")->required();
  ve->add_option("--n-x", ispec.n_x, "Data support size")->check(CLI::PositiveNumber);
  ve->add_option("--n-z", ispec.n_z, "Latent support size")->check(CLI::PositiveNumber);
  ve->add_option("--metric", v_metric, "euclidean | discrete | random-metric");
  ve->add_option("--g-kind", v_gkind, "identity | permutation | random-surjection | random-map");
  ve->add_option("--generator", v_f, "Generator name (suite default if omitted)");
  ve->add_option("--lambda", ispec.lambda, "Penalty weight")->check(CLI::PositiveNumber);
  ve->add_option("--eps", v_eps, "Comma-separated epsilons for theorem5");
  ve->add_flag("--vary-sizes", ispec.vary_sizes, "Draw support sizes per instance");
  ve->add_option("--tol", cfg.tol, "Solver certified gap target")->check(CLI::PositiveNumber);
  add_common(ve, common);

  // genbounds
  std::string g_dist = "uniform-square", g_ns = "100,300,1000,3000";
  std::size_t g_trials = 50, g_grid = 64;
  double g_delta = 0.1;
  auto* gb = app.add_subcommand("genbounds", "Empirical IPM rate curve (CSV)");
  gb->add_option("--dist", g_dist, "uniform-square | uniform-grid | two-point | point-mass");
  gb->add_option("--ns", g_ns, "Increasing comma-separated sample sizes");
  gb->add_option("--trials", g_trials, "Trials per sample size")->check(CLI::PositiveNumber);
  gb->add_option("--delta", g_delta, "Confidence level for the bound term");
  gb->add_option("--grid", g_grid, "Reference grid size per axis")->check(CLI::PositiveNumber);
  gb->add_option("--seed", seed, "Master seed")->required();
  add_common(gb, common);

  // brenier
  std::string b_atoms, b_weights, b_domain = "box:-1,1,-1,1";
  FitConfig fit;
  double b_check_tol = 2e-2;
  auto* br = app.add_subcommand("brenier", "Fit a semi-discrete Brenier potential");
  br->add_option("--atoms", b_atoms, "CSV, one atom per row")->required()->check(CLI::ExistingFile);
  br->add_option("--weights", b_weights, "CSV of target weights")->required()->check(CLI::ExistingFile);
  br->add_option("--domain", b_domain, "box:lo1,hi1,... or grid:N:lo1,hi1,...");
  br->add_option("--samples", fit.n_samples, "Samples per mass estimate")->check(CLI::PositiveNumber);
  br->add_option("--tol", fit.tol, "Residual target")->check(CLI::PositiveNumber);
  br->add_option("--step", fit.step, "Initial ascent step")->check(CLI::PositiveNumber);
  br->add_option("--max-iters", fit.max_iters, "Ascent iterations")->check(CLI::PositiveNumber);
  br->add_option("--check-tol", b_check_tol, "Pushforward TV tolerance")->check(CLI::PositiveNumber);
  br->add_option("--seed", seed, "Master seed")->required();
  add_common(br, common);

  // report
  std::size_t r_instances = 20;
  auto* rp = app.add_subcommand("report", "Run every verification suite");
  rp->add_option("--instances", r_instances, "Instances per suite")->check(CLI::PositiveNumber);
  rp->add_option("--seed", seed, "Master seed")->required();
  add_common(rp, common);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);
      return kOk;
    }
    std::cerr << "dualgap: " << e.what() << "\n";
    return kInputError;
  }

  auto say = [&](const std::string& s) {
    if (!common.quiet) std::cerr << s << "\n";
  };

  try {
    if (ob_solver == "refinement") cfg.method = SolverMethod::Refinement;
    if (ob_solver == "mirror-descent") cfg.method = SolverMethod::MirrorDescent;

    if (ot->parsed()) {
      Output out(common.out);
      const json in = load_json(ot_input);
      const auto P = dist_field(in, "P", ot_input), Q = dist_field(in, "Q", ot_input);
      std::optional<FiniteMetricSpace> space;
      std::optional<CostMatrix> cost;
      if (in.contains("cost")) {
        cost.emplace(to_matrix(field<std::vector<std::vector<double>>>(in, "cost", ot_input), ot_input));
      } else {
        space.emplace(space_field(in, ot_input));
        cost.emplace(CostMatrix::from_space(*space));
      }
      json res;
      if (ot_method == "primal") {
        const auto r = wasserstein_primal(P, Q, *cost);
        res = {{"value", num(r.value)},
               {"coupling", mat(r.coupling.matrix)},
               {"phi", vec(r.potentials.phi)},
               {"psi", vec(r.potentials.psi)}};
      } else if (ot_method == "dual") {
        const auto r = space ? kantorovich_dual(P, Q, *space) : kantorovich_dual(P, Q, *cost);
        res = {{"value", num(r.value)},
               {"h", vec(r.potentials.h)},
               {"lipschitz_modulus", num(r.potentials.lipschitz_modulus)}};
      } else {
        const auto r = sinkhorn(P, Q, *cost, ot_eps);
        res = {{"value", num(r.value)},
               {"coupling", mat(r.coupling.matrix)},
               {"iters", r.iters},
               {"marginal_error", num(r.marginal_error)}};
      }
      say("ot " + ot_method + ": value " + fmt17(res["value"].get<double>()));
      emit_report(out, common, "ot", {{"input", ot_input}, {"method", ot_method}, {"epsilon", ot_eps}},
                  res, true, elapsed());
      return kOk;
    }

    if (ob->parsed()) {
      Output out(common.out);
      const json in = load_json(ob_input);
      const FGenerator f = FGenerator::builtin(ob_f);
      const FiniteMetricSpace space = space_field(in, ob_input);
      const auto P_X = dist_field(in, "P_X", ob_input);
      json res;
      bool converged = true;
      if (ob_kind == "fgan" || ob_kind == "fgan-direct") {
        const auto P_G = dist_field(in, "P_G", ob_input);
        if (ob_kind == "fgan") {
          const auto s = restricted_fgan(P_X, P_G, f, ob_lambda, space, cfg);
          res = solution_json(s);
          converged = s.converged;
        } else {
          const auto d = fgan_direct(P_X, P_G, f, ob_lambda, space);
          res = {{"value", num(d.value)}, {"h", vec(d.h.h)}, {"lipschitz_modulus", num(d.h.lipschitz_modulus)}};
        }
      } else {
        const auto P_Z = dist_field(in, "P_Z", ob_input);
        const auto gmap = field<std::vector<std::size_t>>(in, "G", ob_input);
        const PushforwardMap G(gmap, space.size());
        if (ob_kind == "wae") {
          const auto w = wae_objective(P_X, P_Z, G, space, f, ob_lambda, cfg);
          res = solution_json(w.solution);
          res["value"] = num(w.value);
          res["encoder"] = mat(w.encoder.matrix);
          converged = w.solution.converged;
        } else {
          const auto s = fwae_objective(P_X, P_Z, G, space, f, ob_lambda, cfg);
          res = solution_json(s);
          converged = s.converged;
        }
      }
      say("objective " + ob_kind + ": value " + fmt17(res["value"].get<double>()));
      emit_report(out, common, "objective",
                  {{"input", ob_input}, {"kind", ob_kind}, {"f", ob_f}, {"lambda", ob_lambda},
                   {"solver", ob_solver}, {"tol", cfg.tol}},
                  res, converged, elapsed());
      if (!converged) {
        std::cerr << "dualgap: solver did not certify its gap\n";
        return kNonConvergence;
      }
      return kOk;
    }

    if (ve->parsed()) {
      Output out(common.out);
      ispec.metric = parse_metric_kind(v_metric);
      ispec.g_kind = parse_g_kind(v_gkind);
      ispec.seed = *seed;
      std::vector<TheoremReport> reps;
      auto gen = [&](const char* dflt) { ispec.generator = v_f.empty() ? dflt : v_f; };
      if (v_suite == "theorem1") {
        gen("tv");
        reps.push_back(verify_theorem1(ispec, v_instances, cfg));
      } else if (v_suite == "theorem2") {
        gen("chi2");
        reps.push_back(verify_theorem2(ispec, v_instances, cfg));
      } else if (v_suite == "theorem3") {
        gen("tv");
        reps.push_back(verify_theorem3(ispec, v_instances, cfg));
      } else if (v_suite == "theorem5") {
        gen("kl");
        reps.push_back(verify_theorem5(ispec, v_instances, parse_doubles(v_eps, "epsilon list"), cfg));
      } else {
        gen("kl");
        reps.push_back(verify_data_processing(ispec, v_instances));
        reps.push_back(verify_fwae_equals_wae(ispec, v_instances, cfg));
        if (ispec.g_kind == GKind::Identity || ispec.g_kind == GKind::Permutation)
          reps.push_back(verify_reparametrization(ispec, v_instances));
      }
      bool pass = true;
      json res = json::array();
      for (const auto& r : reps) {
        pass = pass && r.pass();
        res.push_back(theorem_json(r));
        say(r.suite + ": " + std::to_string(r.passed()) + " passed, " + std::to_string(r.failed()) +
            " failed, " + std::to_string(r.skipped()) + " skipped");
      }
      emit_report(out, common, "verify",
                  {{"suite", v_suite}, {"instances", v_instances}, {"seed", *seed},
                   {"seed_scheme", kSeedScheme}, {"n_x", ispec.n_x}, {"n_z", ispec.n_z},
                   {"metric", v_metric}, {"g_kind", v_gkind}, {"generator", ispec.generator},
                   {"lambda", ispec.lambda}, {"vary_sizes", ispec.vary_sizes}, {"tol", cfg.tol}},
                  res, pass, elapsed());
      return pass ? kOk : kViolation;
    }

    if (gb->parsed()) {
      Output out(common.out);
      const auto spec = SampledDistributionSpec::parse(g_dist, g_grid);
      const auto curve = empirical_ipm_curve(spec, parse_sizes(g_ns), g_trials, *seed, g_delta);
      const std::string csv = rate_curve_csv(curve);
      out.stream() << csv;
      out.stream().flush();
      if (curve.fitted) say("genbounds " + g_dist + ": fitted slope " + fmt17(curve.slope));
      if (curve.flagged_trials) {
        std::cerr << "dualgap: " << curve.flagged_trials << " trials failed to solve\n";
        return kViolation;
      }
      return kOk;
    }

    if (br->parsed()) {
      Output out(common.out);
      SemiDiscreteProblem prob;
      prob.atoms = to_matrix(load_csv(b_atoms), b_atoms);
      std::vector<double> w;
      for (const auto& row : load_csv(b_weights)) w.insert(w.end(), row.begin(), row.end());
      prob.nu = to_vector(w);
      std::string spec = b_domain;
      if (spec.rfind("box:", 0) == 0) {
        spec = spec.substr(4);
      } else if (spec.rfind("grid:", 0) == 0) {
        prob.sampler = SemiDiscreteProblem::Sampler::UniformGrid;
        const auto colon = spec.find(':', 5);
        if (colon == std::string::npos) throw InputError("grid domain needs grid:N:lo,hi,...");
        prob.grid_points = parse_sizes(spec.substr(5, colon - 5)).at(0);
        spec = spec.substr(colon + 1);
      } else {
        throw InputError("domain must start with box: or grid:");
      }
      const auto bounds = parse_doubles(spec, "domain");
      if (bounds.size() != 2 * static_cast<std::size_t>(prob.atoms.cols()))
        throw InputError("domain needs a lo,hi pair per atom coordinate");
      prob.lo.resize(prob.atoms.cols());
      prob.hi.resize(prob.atoms.cols());
      for (Eigen::Index k = 0; k < prob.atoms.cols(); ++k) prob.lo[k] = bounds[2 * k], prob.hi[k] = bounds[2 * k + 1];
      prob.validate();
      fit.seed = *seed;
      const auto r = fit_potential(prob, fit);
      const auto chk = pushforward_check(r.h, prob, prob.nu, fit.n_samples, derive_seed(*seed, 1), b_check_tol);
      json res = {{"h", vec(r.h.h)},
                  {"residual", num(r.residual)},
                  {"converged", r.converged},
                  {"iters", r.iters},
                  {"tv_error", num(chk.tv_error)},
                  {"pushforward_pass", chk.pass}};
      say("brenier: residual " + fmt17(r.residual) + ", tv error " + fmt17(chk.tv_error));
      emit_report(out, common, "brenier",
                  {{"atoms", b_atoms}, {"weights", b_weights}, {"domain", b_domain},
                   {"samples", fit.n_samples}, {"tol", fit.tol}, {"seed", *seed},
                   {"check_tol", b_check_tol}},
                  res, r.converged && chk.pass, elapsed());
      if (!r.converged) return kNonConvergence;
      return chk.pass ? kOk : kViolation;
    }

    if (rp->parsed()) {
      Output out(common.out);
      InstanceSpec s;
      s.seed = *seed;
      std::vector<TheoremReport> reps;
      s.generator = "tv";
      reps.push_back(verify_theorem1(s, r_instances));
      s.generator = "kl";
      reps.push_back(verify_theorem1(s, r_instances));
      s.generator = "chi2";
      reps.push_back(verify_theorem2(s, r_instances));
      s.generator = "tv";
      reps.push_back(verify_theorem3(s, r_instances));
      s.generator = "kl";
      reps.push_back(verify_theorem5(s, r_instances, {1, 0.1, 0.01}));
      reps.push_back(verify_data_processing(s, r_instances));
      reps.push_back(verify_fwae_equals_wae(s, r_instances));
      reps.push_back(verify_reparametrization(s, r_instances));
      bool pass = true;
      json res = json::array();
      for (const auto& r : reps) {
        pass = pass && r.pass();
        res.push_back(theorem_json(r));
        say(r.suite + ": " + std::to_string(r.passed()) + " passed, " + std::to_string(r.failed()) +
            " failed, " + std::to_string(r.skipped()) + " skipped");
      }
      emit_report(out, common, "report",
                  {{"instances", r_instances}, {"seed", *seed}, {"seed_scheme", kSeedScheme}}, res,
                  pass, elapsed());
      return pass ? kOk : kViolation;
    }
  } catch (const std::domain_error& e) {
    std::cerr << "dualgap: " << e.what() << "\n";
    return kViolation;
  } catch (const InputError& e) {
    std::cerr << "dualgap: " << e.what() << "\n";
    return kInputError;
  } catch (const ContractError& e) {
    std::cerr << "dualgap: " << e.what() << "\n";
    return kInputError;
  } catch (const ConvergenceError& e) {
    std::cerr << "dualgap: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "dualgap: " << e.what() << "\n";
    return kNonConvergence;
  }
  return kInputError;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace dualgap::cli
