#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "coadvise/coadvise.hpp"

namespace {

using namespace coadvise;

struct CommonOpts {
  std::string data_path;
  std::string outcome_col = "Y";
  std::string treatment_col = "A";
  std::string trt_name;
  std::string ctrl_name;
  std::string outcome_type = "continuous";
  std::string var_sel_method = "Lasso";
  std::string lasso_family;    // empty = infer from outcome type
  std::string a_lasso_family;  // empty = same rule
  std::string out1_model = "linear";
  std::string out0_model = "linear";
  bool out1_set = false, out0_set = false, lasso_family_set = false,
       a_lasso_family_set = false;
  int k = 1;
  double xi = 0.25;
  double pre_alpha = 0.05;
  double conf_level = 0.95;
  std::string mi_method = "cc";
  std::uint64_t seed = 4399;
  std::string format = "text";
  std::string output;
};

SelectionMethod parse_selection_method(const std::string& s) {
  if (s == "No") return SelectionMethod::none;
  if (s == "Lasso") return SelectionMethod::lasso;
  if (s == "A.Lasso") return SelectionMethod::adaptive_lasso;
  if (s == "Corr.k") return SelectionMethod::corr_k;
  if (s == "Corr.xi") return SelectionMethod::corr_xi;
  if (s == "Pre.test") return SelectionMethod::pre_test;
  throw ConfigError("--var-sel-method: unknown method '" + s +
                    "' (No, Lasso, A.Lasso, Corr.k, Corr.xi, Pre.test)");
}

Family parse_family_flag(const std::string& s, const char* flag) {
  if (s == "gaussian") return Family::gaussian;
  if (s == "binomial") return Family::binomial;
  if (s == "poisson" || s == "multinomial")
    throw ConfigError(std::string(flag) + ": family '" + s +
                      "' is not implemented; only gaussian and binomial are "
                      "supported");
  throw ConfigError(std::string(flag) + ": unknown family '" + s + "'");
}

void add_common_flags(CLI::App* cmd, CommonOpts& o, bool needs_labels) {
  cmd->add_option("--data", o.data_path, "input CSV file")->required();
  cmd->add_option("--outcome-col", o.outcome_col, "outcome column name")->required();
  cmd->add_option("--treatment-col", o.treatment_col, "treatment column name")->required();
  auto* trt = cmd->add_option("--trt-name", o.trt_name, "treatment arm label");
  auto* ctl = cmd->add_option("--ctrl-name", o.ctrl_name, "control arm label");
  if (needs_labels) {
    trt->required();
    ctl->required();
  }
  cmd->add_option("--outcome-type", o.outcome_type, "continuous or binary")
      ->required()
      ->check(CLI::IsMember({"continuous", "binary"}));
  cmd->add_option("--var-sel-method", o.var_sel_method,
                  "No, Lasso, A.Lasso, Corr.k, Corr.xi, Pre.test");
  cmd->add_option("--lasso-family", o.lasso_family)->each([&o](const std::string&) {
    o.lasso_family_set = true;
  });
  cmd->add_option("--a-lasso-family", o.a_lasso_family)->each([&o](const std::string&) {
    o.a_lasso_family_set = true;
  });
  cmd->add_option("--out1-model-aipw", o.out1_model)->each([&o](const std::string&) {
    o.out1_set = true;
  });
  cmd->add_option("--out0-model-aipw", o.out0_model)->each([&o](const std::string&) {
    o.out0_set = true;
  });
  cmd->add_option("--k", o.k, "covariate count for Corr.k");
  cmd->add_option("--xi", o.xi, "correlation threshold for Corr.xi");
  cmd->add_option("--pre-alpha", o.pre_alpha, "level for Pre.test");
  cmd->add_option("--conf-level", o.conf_level, "confidence level");
  cmd->add_option("--mi-method", o.mi_method, "cc, mice, ipw, missInd");
  cmd->add_option("--seed", o.seed);
  cmd->add_option("--format", o.format)->check(CLI::IsMember({"text", "csv", "json"}));
  cmd->add_option("--output", o.output, "write results to this path");
}

AnalysisConfig build_config(const CommonOpts& o) {
  AnalysisConfig cfg;
  cfg.imputation.method = parse_imputation_method(o.mi_method);
  cfg.imputation.seed = o.seed;
  cfg.selection.method = parse_selection_method(o.var_sel_method);
  cfg.selection.k = o.k;
  cfg.selection.xi = o.xi;
  cfg.selection.alpha = o.pre_alpha;
  cfg.selection.seed = o.seed;
  const bool binary = o.outcome_type == "binary";
  if (cfg.selection.method == SelectionMethod::lasso) {
    cfg.selection.family = o.lasso_family_set
                               ? parse_family_flag(o.lasso_family, "--lasso-family")
                               : (binary ? Family::binomial : Family::gaussian);
  } else if (cfg.selection.method == SelectionMethod::adaptive_lasso) {
    cfg.selection.family = o.a_lasso_family_set
                               ? parse_family_flag(o.a_lasso_family, "--a-lasso-family")
                               : (binary ? Family::binomial : Family::gaussian);
  }
  cfg.out1_link = LinkFamily{o.out1_set ? parse_link(o.out1_model)
                                        : (binary ? Link::logit : Link::identity)};
  cfg.out0_link = LinkFamily{o.out0_set ? parse_link(o.out0_model)
                                        : (binary ? Link::logit : Link::identity)};
  if (!(o.conf_level > 0.0 && o.conf_level < 1.0))
    throw ConfigError("--conf-level must be in (0,1)");
  cfg.conf_level = o.conf_level;
  return cfg;
}

std::string estimates_csv(const std::vector<AteEstimate>& es) {
  std::string out = "method,tau,se,ci.lwr,ci.upr,p\n";
  char buf[64];
  const auto num = [&](const std::optional<double>& v) -> std::string {
    if (!v) return "NA";
    std::snprintf(buf, sizeof(buf), "%.10g", *v);
    return buf;
  };
  for (const auto& e : es) {
    out += estimator_name(e.method);
    out += ',' + num(std::optional<double>(e.tau_hat)) + ',' + num(e.se) + ',' +
           num(e.ci_low) + ',' + num(e.ci_high) + ',' + num(e.p_value) + '\n';
  }
  return out;
}

nlohmann::json analysis_json(const AnalysisResult& res) {
  nlohmann::json j;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : res.estimates) rows.push_back(estimate_to_json(e));
  j["df.fit"] = rows;
  j["selection"] = selection_to_json(res.selection, res.covariate_names);
  if (res.aipw_means.theta.size() == 2) {
    j["AIPW.out.means"]["mu"] = {res.aipw_means.theta[0], res.aipw_means.theta[1]};
    j["AIPW.out.means"]["sigma"] = {
        {res.aipw_means.sigma(0, 0), res.aipw_means.sigma(0, 1)},
        {res.aipw_means.sigma(1, 0), res.aipw_means.sigma(1, 1)}};
  }
  j["dropped_rows"] = res.dropped_rows;
  j["added_columns"] = res.added_columns;
  return j;
}

void emit(const std::string& text, const std::string& output_path) {
  if (output_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(output_path);
  if (!f) throw DataError("cannot write output file: " + output_path);
  f << text;
}

int cmd_analyze(const CommonOpts& o) {
  const AnalysisConfig cfg = build_config(o);
  const TrialDataset ds = load_csv(o.data_path, o.outcome_col, o.treatment_col);
  const BinaryTrial trial = encode_treatment(ds, o.trt_name, o.ctrl_name);
  const AnalysisResult res = analyze(trial, cfg);

  std::string text;
  if (o.format == "text")
    text = render_estimates_table(res.estimates);
  else if (o.format == "csv")
    text = estimates_csv(res.estimates);
  else
    text = analysis_json(res).dump(2) + "\n";
  emit(text, o.output);
  if (!o.output.empty()) {
    std::ofstream side(o.output + ".selection.json");
    side << analysis_json(res).dump(2) << "\n";
  }
  return 0;
}

int cmd_select(const CommonOpts& o) {
  const AnalysisConfig cfg = build_config(o);
  const TrialDataset ds = load_csv(o.data_path, o.outcome_col, o.treatment_col);
  const BinaryTrial trial = encode_treatment(ds, o.trt_name, o.ctrl_name);
  const ImputedTrial imp = impute(cfg.imputation, trial);
  const SelectionResult sel = select(cfg.selection, imp.trial);
  emit(selection_to_json(sel, imp.trial.covariate_names).dump(2) + "\n", o.output);
  return 0;
}

struct SimulateOpts {
  std::string outcome = "continuous";
  std::string delta = "linear";
  std::string reading = "as_written";
  Eigen::Index n = 500;
  int m = 500;
  std::uint64_t seed = 4399;
  int workers = 1;
  std::string methods = "none:simple,lasso:anhecova,lasso:aipw";
  bool oracle_only = false;
  Eigen::Index oracle_n = 1000000;
  int oracle_reps = 20;
  int k = 1;
  double xi = 0.25;
  double pre_alpha = 0.05;
  std::string output;
  bool dump_reps = false;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<MethodSpec> parse_methods(const SimulateOpts& o, bool binary) {
  std::vector<MethodSpec> out;
  for (const std::string& tok : split(o.methods, ',')) {
    if (tok.empty()) continue;
    const auto parts = split(tok, ':');
    if (parts.size() < 2 || parts.size() > 3)
      throw ConfigError("--methods entries must look like sel:est or sel:est:pool");
    MethodSpec m;
    m.label = tok;
    const std::string& sel = parts[0];
    if (sel == "none") m.selection.method = SelectionMethod::none;
    else if (sel == "lasso") m.selection.method = SelectionMethod::lasso;
    else if (sel == "a.lasso") m.selection.method = SelectionMethod::adaptive_lasso;
    else if (sel == "corr.k") m.selection.method = SelectionMethod::corr_k;
    else if (sel == "corr.xi") m.selection.method = SelectionMethod::corr_xi;
    else if (sel == "pre.test") m.selection.method = SelectionMethod::pre_test;
    else throw ConfigError("--methods: unknown selector '" + sel + "'");
    m.selection.k = o.k;
    m.selection.xi = o.xi;
    m.selection.alpha = o.pre_alpha;
    m.selection.family = binary ? Family::binomial : Family::gaussian;
    const std::string& est = parts[1];
    if (est == "simple") m.estimator = EstimatorKind::simple;
    else if (est == "ancova") m.estimator = EstimatorKind::ancova;
    else if (est == "anhecova") m.estimator = EstimatorKind::anhecova;
    else if (est == "aipw") m.estimator = EstimatorKind::aipw;
    else throw ConfigError("--methods: unknown estimator '" + est + "'");
    if (parts.size() == 3) {
      if (parts[2] == "x") m.pool = PoolKind::x_only;
      else if (parts[2] == "all") m.pool = PoolKind::x_and_v;
      else throw ConfigError("--methods: pool must be 'all' or 'x'");
    }
    const Link link = binary ? Link::logit : Link::identity;
    m.link1 = LinkFamily{link};
    m.link0 = LinkFamily{link};
    out.push_back(std::move(m));
  }
  if (out.empty()) throw ConfigError("--methods: empty method list");
  return out;
}

int cmd_simulate(const SimulateOpts& o) {
  DgpSpec spec;
  spec.outcome = o.outcome == "binary" ? OutcomeType::binary : OutcomeType::continuous;
  spec.delta_form = o.delta == "nonlinear" ? DeltaForm::nonlinear : DeltaForm::linear;
  spec.linear_delta_reading = o.reading == "additive" ? LinearDeltaReading::additive
                                                      : LinearDeltaReading::as_written;
  spec.n = o.n;
  spec.seed = o.seed;
  spec.validate();
  if (o.m < 1) throw ConfigError("--m must be >= 1");
  if (o.workers < 1) throw ConfigError("--workers must be >= 1");

  const OracleEstimate oracle = true_ate_oracle(spec, o.oracle_n, o.oracle_reps);
  char line[256];
  std::snprintf(line, sizeof(line), "oracle tau = %.6f (MC SE %.6f, n_big=%lld, reps=%d)\n",
                oracle.tau, oracle.mc_se, static_cast<long long>(oracle.n_big),
                oracle.reps);
  std::cout << line;
  if (spec.delta_form == DeltaForm::linear && spec.outcome == OutcomeType::continuous) {
    const char* reading =
        spec.linear_delta_reading == LinearDeltaReading::as_written ? "as_written"
                                                                    : "additive";
    if (std::fabs(oracle.tau - 8.15) > 0.1) {
      std::snprintf(line, sizeof(line),
                    "note: linear-delta reading '%s' gives tau = %.4f, not the nominal "
                    "8.15 (see --linear-delta-reading)\n",
                    reading, oracle.tau);
      std::cout << line;
    }
  }
  if (o.oracle_only) return 0;

  const auto methods = parse_methods(o, spec.outcome == OutcomeType::binary);
  const SimulationReport rep =
      run_monte_carlo(spec, methods, o.m, o.seed, oracle.tau, o.workers);

  std::cout << report_to_csv(rep);
  if (!o.output.empty()) {
    {
      std::ofstream f(o.output + ".summary.csv");
      if (!f) throw DataError("cannot write " + o.output + ".summary.csv");
      f << report_to_csv(rep);
    }
    {
      std::ofstream f(o.output + ".report.json");
      f << report_to_json(rep).dump(2) << "\n";
    }
    if (o.dump_reps) {
      std::ofstream f(o.output + ".reps.csv");
      f << replications_to_csv(rep);
    }
  }
  return 0;
}

int cmd_defaults() {
  nlohmann::json j;
  j["var-sel-method"] = "Lasso";
  j["lasso-family"] = "gaussian";
  j["a-lasso-family"] = "gaussian";
  j["out1-model-aipw"] = "linear";
  j["out0-model-aipw"] = "linear";
  j["k"] = 1;
  j["xi"] = 0.25;
  j["pre-alpha"] = 0.05;
  j["conf-level"] = 0.95;
  j["mi-method"] = "cc";
  j["seed"] = 4399;
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covariate-adjusted ATE estimation for randomized trials"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value config file");

  CommonOpts aopts;
  auto* analyze_cmd = app.add_subcommand("analyze", "estimate the ATE from a CSV dataset");
  add_common_flags(analyze_cmd, aopts, true);

  CommonOpts sopts;
  auto* select_cmd = app.add_subcommand("select", "run variable selection only");
  add_common_flags(select_cmd, sopts, true);

  SimulateOpts mopts;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study on built-in DGPs");
  sim_cmd->add_option("--outcome", mopts.outcome)->check(CLI::IsMember({"continuous", "binary"}));
  sim_cmd->add_option("--delta", mopts.delta)->check(CLI::IsMember({"linear", "nonlinear"}));
  sim_cmd->add_option("--linear-delta-reading", mopts.reading)
      ->check(CLI::IsMember({"as_written", "additive"}));
  sim_cmd->add_option("--n", mopts.n, "sample size per replication");
  sim_cmd->add_option("--m", mopts.m, "number of replications");
  sim_cmd->add_option("--seed", mopts.seed);
  sim_cmd->add_option("--workers", mopts.workers);
  sim_cmd->add_option("--methods", mopts.methods, "comma list of sel:est[:pool] entries");
  sim_cmd->add_flag("--oracle-only", mopts.oracle_only, "print the oracle tau and stop");
  sim_cmd->add_option("--oracle-n", mopts.oracle_n);
  sim_cmd->add_option("--oracle-reps", mopts.oracle_reps);
  sim_cmd->add_option("--k", mopts.k);
  sim_cmd->add_option("--xi", mopts.xi);
  sim_cmd->add_option("--pre-alpha", mopts.pre_alpha);
  sim_cmd->add_option("--output", mopts.output, "output path prefix");
  sim_cmd->add_flag("--dump-reps", mopts.dump_reps, "also write per-replication CSV");

  auto* defaults_cmd = app.add_subcommand("defaults", "print default configuration as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (analyze_cmd->parsed()) return cmd_analyze(aopts);
    if (select_cmd->parsed()) return cmd_select(sopts);
    if (sim_cmd->parsed()) return cmd_simulate(mopts);
    if (defaults_cmd->parsed()) return cmd_defaults();
  } catch (const coadvise::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const coadvise::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
