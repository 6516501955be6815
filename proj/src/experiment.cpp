#include "paucopt/experiment.hpp"

#include "paucopt/metrics.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace paucopt {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

using Section = std::map<std::string, std::string>;
using Sections = std::map<std::string, Section>;

Sections parse_sections(const std::string& text) {
  Sections out;
  std::string section;  // "" = top level
  std::istringstream ss(text);
  std::string line;
  long lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key at line " + std::to_string(lineno));
    if (!out[section].emplace(key, val).second)
      throw ConfigError("duplicate key '" + key + "' at line " + std::to_string(lineno));
  }
  return out;
}

class SectionReader {
 public:
  SectionReader(const Sections& all, const std::string& name) : name_(name) {
    const auto it = all.find(name);
    if (it != all.end()) entries_ = it->second;
  }

  ~SectionReader() = default;

  bool has(const std::string& key) {
    seen_.insert(key);
    return entries_.count(key) > 0;
  }
  std::string str(const std::string& key, const std::string& fallback) {
    seen_.insert(key);
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
  }
  double num(const std::string& key, double fallback) {
    seen_.insert(key);
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument(it->second);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("bad number for '" + key + "' in [" + name_ + "]: " + it->second);
    }
  }
  long integer(const std::string& key, long fallback) {
    const double v = num(key, static_cast<double>(fallback));
    const long r = std::lround(v);
    if (static_cast<double>(r) != v)
      throw ConfigError("expected integer for '" + key + "' in [" + name_ + "]");
    return r;
  }
  void finish() const {
    for (const auto& [key, value] : entries_)
      if (!seen_.count(key))
        throw ConfigError("unknown key '" + key + "' in [" + name_ + "]");
  }

 private:
  std::string name_;
  Section entries_;
  std::set<std::string> seen_;
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    try {
      seeds.push_back(std::stoull(tok));
    } catch (const std::exception&) {
      throw ConfigError("bad seed '" + tok + "'");
    }
  }
  if (seeds.empty()) throw ConfigError("empty seed list");
  return seeds;
}

struct ResolvedData {
  BinaryDataset binary;
  RegressionDataset regression;
};

ResolvedData load_data(const ExperimentConfig& cfg) {
  ResolvedData d;
  switch (cfg.data_kind) {
    case DataKind::Synthetic:
      d.binary = generate_synthetic(cfg.synthetic);
      break;
    case DataKind::Libsvm:
      d.binary = load_libsvm(cfg.libsvm_path, cfg.positive_label);
      break;
    case DataKind::SyntheticRegression:
      d.regression = generate_synthetic_logistic(cfg.synthetic_regression);
      break;
  }
  return d;
}

PAucRange resolve_range(const ExperimentConfig& cfg, Index pool) {
  if (cfg.rates) return PAucRange::from_rates(cfg.rates->first, cfg.rates->second, pool);
  return PAucRange::from_indices(cfg.ranks->first, cfg.ranks->second, pool);
}

void write_trace_csv(const std::string& path, const RunTrace& trace) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << "k,epoch,normalized_loss,train_pauc,xi_norm,wall_ms\n";
  for (const TraceRow& r : trace.rows) {
    out << r.k << ',' << fmt(r.epochs) << ',' << fmt(r.normalized_loss) << ','
        << fmt(r.train_pauc) << ',' << fmt(r.xi_norm_est) << ',' << fmt(r.wall_ms) << '\n';
  }
}

void write_roc_csv(const std::string& path, const Vector& w, const BinaryDataset& ds) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << "fpr,tpr,threshold\n";
  const RocCurve curve = roc_curve(positive_scores(w, ds), negative_scores(w, ds));
  for (const RocPoint& p : curve.points)
    out << fmt(p.fpr) << ',' << fmt(p.tpr) << ',' << fmt(p.threshold) << '\n';
}

ordered_json echo_config(const ExperimentConfig& cfg) {
  ordered_json j;
  j["task"] = cfg.task == Task::PAuc ? "pauc" : "sorr";
  j["solver"] = solver_name(cfg.solver);
  ordered_json data;
  switch (cfg.data_kind) {
    case DataKind::Synthetic:
      data["kind"] = "synthetic";
      data["n_pos"] = cfg.synthetic.n_pos;
      data["n_neg"] = cfg.synthetic.n_neg;
      data["dim"] = cfg.synthetic.dim;
      data["separation"] = cfg.synthetic.separation;
      data["noise"] = cfg.synthetic.noise;
      data["seed"] = cfg.synthetic.seed;
      break;
    case DataKind::SyntheticRegression:
      data["kind"] = "synthetic_regression";
      data["n"] = cfg.synthetic_regression.n;
      data["dim"] = cfg.synthetic_regression.dim;
      data["noise"] = cfg.synthetic_regression.noise;
      data["seed"] = cfg.synthetic_regression.seed;
      break;
    case DataKind::Libsvm:
      data["kind"] = "libsvm";
      data["path"] = cfg.libsvm_path;
      data["positive_label"] = cfg.positive_label;
      break;
  }
  j["data"] = data;
  ordered_json range;
  if (cfg.rates) {
    range["alpha"] = cfg.rates->first;
    range["beta"] = cfg.rates->second;
  } else {
    range["m"] = cfg.ranks->first;
    range["n"] = cfg.ranks->second;
  }
  j["range"] = range;
  ordered_json sp;
  if (cfg.solver == SolverKind::AgdSbcd) {
    sp["K"] = cfg.agd.outer_iterations;
    sp["T_growth"] = cfg.agd.t_growth;
    sp["mu"] = cfg.agd.mu;
    sp["gamma"] = cfg.agd.gamma;
    sp["c"] = cfg.agd.step_c;
    sp["I"] = cfg.agd.batch_pos;
    sp["J"] = cfg.agd.batch_neg;
    sp["epsilon"] = cfg.agd.epsilon;
    sp["certify"] = cfg.agd.certify_result;
  } else {
    sp["K"] = cfg.dca.outer_iterations;
    sp["T_growth"] = cfg.dca.t_growth;
    sp["c"] = cfg.dca.step_c;
    sp["I"] = cfg.dca.batch_pos;
    sp["J"] = cfg.dca.batch_neg;
    sp["L_prox"] = cfg.dca.l_prox;
  }
  j["solver_params"] = sp;
  ordered_json run;
  run["seeds"] = cfg.seeds;
  run["max_epochs"] = std::isfinite(cfg.max_epochs) ? ordered_json(cfg.max_epochs)
                                                    : ordered_json("unlimited");
  run["out"] = cfg.out_dir;
  j["run"] = run;
  return j;
}

ordered_json certificate_json(const CriticalityCertificate& cert) {
  ordered_json j;
  j["xi_norm"] = cert.xi_norm;
  j["dist_to_vm"] = cert.dist_to_vm;
  j["dist_to_vn"] = cert.dist_to_vn;
  j["mu"] = cert.mu;
  j["k"] = cert.k;
  j["high_confidence"] = cert.high_confidence;
  return j;
}

ordered_json vector_json(const Vector& v) {
  ordered_json arr = ordered_json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

struct SeedRun {
  RunTrace trace;
  Vector model;           // the solver's returned model
  ordered_json summary;   // per-seed metrics entry
};

SeedRun run_one_seed(const ExperimentConfig& cfg, const ResolvedData& data, std::uint64_t seed) {
  SeedRun out;
  out.summary["seed"] = seed;

  if (cfg.task == Task::PAuc) {
    const BinaryDataset& ds = data.binary;
    const PAucRange range = resolve_range(cfg, ds.n_neg());
    if (range.rounded)
      std::cerr << "warning: FPR window rounded to ranks m=" << range.m << ", n=" << range.n
                << "\n";
    const Vector w0 = Vector::Zero(ds.dim());
    out.summary["initial_normalized_loss"] = dc_objective_normalized(w0, ds, range);

    if (cfg.solver == SolverKind::AgdSbcd) {
      AgdConfig acfg = cfg.agd;
      acfg.seed = seed;
      acfg.max_epochs = cfg.max_epochs;
      const AgdResult r = agd_run(ds, range, acfg, w0);
      out.trace = r.trace;
      out.model = r.w_best;
      out.summary["best_pauc"] = r.best_pauc;
      out.summary["best_k"] = r.best_k;
      out.summary["final_pauc"] = r.trace.rows.back().train_pauc;
      out.summary["final_normalized_loss"] = r.trace.rows.back().normalized_loss;
      out.summary["k_bar"] = r.k_bar;
      out.summary["theory_valid"] = r.theory_valid;
      if (cfg.agd.certify_result) out.summary["certificate"] = certificate_json(r.certificate);
      out.summary["w_best"] = vector_json(r.w_best);
    } else {
      DcaConfig dcfg = cfg.dca;
      dcfg.seed = seed;
      dcfg.max_epochs = cfg.max_epochs;
      const DcaResult r = cfg.solver == SolverKind::Dca ? dca_run(ds, range, dcfg, w0)
                                                        : prox_dca_run(ds, range, dcfg, w0);
      out.trace = r.trace;
      out.model = r.w_final;
      out.summary["best_pauc"] = r.best_pauc;
      out.summary["best_k"] = r.best_k;
      out.summary["final_pauc"] = r.trace.rows.back().train_pauc;
      out.summary["final_normalized_loss"] = r.trace.rows.back().normalized_loss;
      out.summary["w_final"] = vector_json(r.w_final);
    }
  } else {
    if (cfg.solver != SolverKind::AgdSbcd)
      throw ConfigError("sorr task supports solver = agd_sbcd only");
    const RegressionDataset& ds = data.regression;
    Index m, n;
    if (cfg.ranks) {
      m = cfg.ranks->first;
      n = cfg.ranks->second;
    } else {
      const PAucRange r = PAucRange::from_rates(cfg.rates->first, cfg.rates->second, ds.n());
      m = r.m;
      n = r.n;
    }
    const Vector w0 = Vector::Zero(ds.dim());
    out.summary["initial_normalized_loss"] = dc_objective_sorr_normalized(w0, ds, m, n);

    AgdConfig acfg = cfg.agd;
    acfg.seed = seed;
    acfg.max_epochs = cfg.max_epochs;
    const AgdSorrResult r = agd_run_sorr(ds, m, n, acfg, w0);
    out.trace = r.trace;
    out.model = r.w_best;
    out.summary["best_normalized_loss"] = r.best_loss;
    out.summary["best_k"] = r.best_k;
    out.summary["final_normalized_loss"] = r.trace.rows.back().normalized_loss;
    out.summary["k_bar"] = r.k_bar;
    out.summary["theory_valid"] = r.theory_valid;
    if (cfg.agd.certify_result) out.summary["certificate"] = certificate_json(r.certificate);
    out.summary["w_best"] = vector_json(r.w_best);
  }
  return out;
}

void check_same_experiment(const ExperimentConfig& a, const ExperimentConfig& b) {
  const ordered_json ja = echo_config(a), jb = echo_config(b);
  if (ja["task"] != jb["task"] || ja["data"] != jb["data"] || ja["range"] != jb["range"])
    throw ConfigError("compare: configs must share task, dataset and range");
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

const char* solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::AgdSbcd: return "agd_sbcd";
    case SolverKind::Dca: return "dca";
    case SolverKind::ProxDca: return "prox_dca";
  }
  return "?";
}

ExperimentConfig parse_config_text(const std::string& text) {
  const Sections sections = parse_sections(text);
  for (const auto& [name, _] : sections)
    if (name != "" && name != "data" && name != "range" && name != "solver_params" && name != "run")
      throw ConfigError("unknown section [" + name + "]");

  ExperimentConfig cfg;

  SectionReader top(sections, "");
  const std::string task = top.str("task", "pauc");
  if (task == "pauc") cfg.task = Task::PAuc;
  else if (task == "sorr") cfg.task = Task::Sorr;
  else throw ConfigError("task must be pauc or sorr");
  const std::string solver = top.str("solver", "agd_sbcd");
  if (solver == "agd_sbcd") cfg.solver = SolverKind::AgdSbcd;
  else if (solver == "dca") cfg.solver = SolverKind::Dca;
  else if (solver == "prox_dca") cfg.solver = SolverKind::ProxDca;
  else throw ConfigError("solver must be agd_sbcd, dca or prox_dca");
  top.finish();

  SectionReader data(sections, "data");
  const std::string kind =
      data.str("kind", cfg.task == Task::PAuc ? "synthetic" : "synthetic_regression");
  if (kind == "synthetic") {
    cfg.data_kind = DataKind::Synthetic;
    cfg.synthetic.n_pos = data.integer("n_pos", cfg.synthetic.n_pos);
    cfg.synthetic.n_neg = data.integer("n_neg", cfg.synthetic.n_neg);
    cfg.synthetic.dim = data.integer("dim", cfg.synthetic.dim);
    cfg.synthetic.separation = data.num("separation", cfg.synthetic.separation);
    cfg.synthetic.noise = data.num("noise", cfg.synthetic.noise);
    cfg.synthetic.seed = static_cast<std::uint64_t>(data.integer("seed", 0));
  } else if (kind == "synthetic_regression") {
    cfg.data_kind = DataKind::SyntheticRegression;
    cfg.synthetic_regression.n = data.integer("n", cfg.synthetic_regression.n);
    cfg.synthetic_regression.dim = data.integer("dim", cfg.synthetic_regression.dim);
    cfg.synthetic_regression.noise = data.num("noise", cfg.synthetic_regression.noise);
    cfg.synthetic_regression.seed = static_cast<std::uint64_t>(data.integer("seed", 0));
  } else if (kind == "libsvm") {
    cfg.data_kind = DataKind::Libsvm;
    cfg.libsvm_path = data.str("path", "");
    if (cfg.libsvm_path.empty()) throw ConfigError("libsvm data needs path");
    cfg.positive_label = static_cast<int>(data.integer("positive_label", 1));
  } else {
    throw ConfigError("data kind must be synthetic, synthetic_regression or libsvm");
  }
  data.finish();
  if (cfg.task == Task::Sorr && cfg.data_kind != DataKind::SyntheticRegression)
    throw ConfigError("sorr task needs synthetic_regression data");
  if (cfg.task == Task::PAuc && cfg.data_kind == DataKind::SyntheticRegression)
    throw ConfigError("pauc task needs binary data");

  SectionReader range(sections, "range");
  const bool has_rates = range.has("alpha") || range.has("beta");
  const bool has_ranks = range.has("m") || range.has("n");
  if (has_rates == has_ranks)
    throw ConfigError("set exactly one of (alpha, beta) / (m, n) in [range]");
  if (has_rates) {
    cfg.rates = {range.num("alpha", 0.0), range.num("beta", 1.0)};
  } else {
    cfg.ranks = {range.integer("m", 0), range.integer("n", 0)};
  }
  range.finish();

  SectionReader sp(sections, "solver_params");
  if (cfg.solver == SolverKind::AgdSbcd) {
    cfg.agd.outer_iterations = static_cast<int>(sp.integer("K", cfg.agd.outer_iterations));
    cfg.agd.t_growth = sp.num("T_growth", cfg.agd.t_growth);
    cfg.agd.mu = sp.num("mu", cfg.agd.mu);
    cfg.agd.gamma = sp.num("gamma", cfg.agd.gamma);
    cfg.agd.step_c = sp.num("c", cfg.agd.step_c);
    cfg.agd.batch_pos = sp.integer("I", cfg.agd.batch_pos);
    cfg.agd.batch_neg = sp.integer("J", cfg.agd.batch_neg);
    cfg.agd.epsilon = sp.num("epsilon", cfg.agd.epsilon);
    cfg.agd.certify_result = sp.integer("certify", cfg.agd.certify_result ? 1 : 0) != 0;
  } else {
    cfg.dca.outer_iterations = static_cast<int>(sp.integer("K", cfg.dca.outer_iterations));
    cfg.dca.t_growth = sp.num("T_growth", cfg.dca.t_growth);
    cfg.dca.step_c = sp.num("c", cfg.dca.step_c);
    cfg.dca.batch_pos = sp.integer("I", cfg.dca.batch_pos);
    cfg.dca.batch_neg = sp.integer("J", cfg.dca.batch_neg);
    cfg.dca.l_prox = sp.num("L_prox", cfg.dca.l_prox);
  }
  sp.finish();

  SectionReader run(sections, "run");
  if (run.has("seeds")) cfg.seeds = parse_seed_list(run.str("seeds", ""));
  cfg.max_epochs = run.num("max_epochs", cfg.max_epochs);
  cfg.out_dir = run.str("out", cfg.out_dir);
  run.finish();

  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void run_experiment(const ExperimentConfig& cfg) {
  const ResolvedData data = load_data(cfg);
  std::filesystem::create_directories(cfg.out_dir);

  ordered_json metrics;
  metrics["version"] = kVersion;
  metrics["config_echo"] = echo_config(cfg);
  ordered_json per_seed = ordered_json::array();

  for (const std::uint64_t seed : cfg.seeds) {
    SeedRun run = run_one_seed(cfg, data, seed);
    const std::string tag = std::to_string(seed);
    write_trace_csv(cfg.out_dir + "/trace_seed" + tag + ".csv", run.trace);
    if (cfg.task == Task::PAuc)
      write_roc_csv(cfg.out_dir + "/roc_seed" + tag + ".csv", run.model, data.binary);
    per_seed.push_back(std::move(run.summary));
  }

  metrics["seeds"] = std::move(per_seed);
  std::ofstream out(cfg.out_dir + "/metrics.json");
  if (!out) throw ValidationError("cannot write metrics.json");
  out << metrics.dump(2) << '\n';
}

void compare(const std::vector<ExperimentConfig>& cfgs, const std::string& out_dir) {
  if (cfgs.size() < 2) throw ConfigError("compare needs at least two configs");
  for (std::size_t i = 1; i < cfgs.size(); ++i) check_same_experiment(cfgs[0], cfgs[i]);
  const ResolvedData data = load_data(cfgs[0]);
  std::filesystem::create_directories(out_dir);

  std::ofstream merged(out_dir + "/compare.csv");
  if (!merged) throw ValidationError("cannot write compare.csv");
  merged << "solver,seed,k,epoch,normalized_loss,train_pauc,xi_norm\n";

  std::cout << "solver        median_final_loss  median_final_pauc  median_best_pauc\n";
  for (const ExperimentConfig& cfg : cfgs) {
    std::vector<double> final_loss, final_pauc, best_pauc;
    for (const std::uint64_t seed : cfg.seeds) {
      SeedRun run = run_one_seed(cfg, data, seed);
      for (const TraceRow& r : run.trace.rows) {
        merged << solver_name(cfg.solver) << ',' << seed << ',' << r.k << ',' << fmt(r.epochs)
               << ',' << fmt(r.normalized_loss) << ',' << fmt(r.train_pauc) << ','
               << fmt(r.xi_norm_est) << '\n';
      }
      final_loss.push_back(run.trace.rows.back().normalized_loss);
      final_pauc.push_back(run.trace.rows.back().train_pauc);
      const double bp = run.summary.contains("best_pauc")
                            ? run.summary["best_pauc"].get<double>()
                            : std::numeric_limits<double>::quiet_NaN();
      best_pauc.push_back(bp);
    }
    std::printf("%-12s  %17.6g  %17.6g  %16.6g\n", solver_name(cfg.solver), median(final_loss),
                median(final_pauc), median(best_pauc));
  }
}

namespace {

int guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const DivergenceError& e) {
    std::cerr << "solver divergence: " << e.what() << "\n";
    return 4;
  }
}

ExperimentConfig with_overrides(ExperimentConfig cfg, const CliOverrides& o) {
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (!o.seeds.empty()) cfg.seeds = o.seeds;
  if (o.max_epochs) cfg.max_epochs = *o.max_epochs;
  return cfg;
}

}  // namespace

int run_experiment_cli(const std::string& config_path, const CliOverrides& overrides) {
  return guarded([&] { run_experiment(with_overrides(parse_config_file(config_path), overrides)); });
}

int compare_cli(const std::vector<std::string>& config_paths, const CliOverrides& overrides) {
  return guarded([&] {
    std::vector<ExperimentConfig> cfgs;
    for (const std::string& path : config_paths)
      cfgs.push_back(with_overrides(parse_config_file(path), overrides));
    std::string out = cfgs.empty() ? std::string("paucopt_out") : cfgs.front().out_dir;
    if (overrides.out_dir) out = *overrides.out_dir;
    compare(cfgs, out);
  });
}

}  // namespace paucopt
