#include "mps/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "csv.hpp"
#include "json.hpp"
#include "mps/engine.hpp"
#include "mps/reporting.hpp"
#include "mps/resampling.hpp"
#include "mps/viz.hpp"

namespace mps {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataOpts {
  std::string data;
  std::string response;
  bool expand = false;
  bool no_standardize = false;
  double test_split = 0.0;
};

struct ModelOpts {
  std::string model = "ols";
  int tree_max_depth = 0;  // 0: covariates in the model
  int tree_min_leaf = 5;
  int logistic_max_iter = 25;
  double logistic_tol = 1e-8;

  ModelClass resolve() const {
    ModelClass mc;
    mc.kind = parse_model_kind(model);
    if (tree_max_depth > 0) mc.tree_max_depth = tree_max_depth;
    mc.tree_min_leaf = tree_min_leaf;
    mc.logistic_max_iter = logistic_max_iter;
    mc.logistic_tol = logistic_tol;
    mc.validate();
    return mc;
  }
};

struct EngineOpts {
  std::string depth;
  int cv_folds = 5;
  int cv_max_depth = 20;
  int r = 100;
  double p_star = 0.95;
  double gamma = 0.5;
  int nsim = 10000;
  std::uint64_t seed = 0;
  std::string threshold = "inclusive";
  double scoring_holdout = 0.0;
  int max_redraws = 1000;
};

struct RenderOpts {
  std::string layout = "radial";
  std::string label = "name";
  int max_label_chars = 24;

  RenderOptions resolve() const {
    RenderOptions o;
    o.layout = parse_layout(layout);
    if (label == "name") o.label = RenderOptions::Label::name_only;
    else if (label == "name+proportion") o.label = RenderOptions::Label::name_and_proportion;
    else throw UsageError("--label must be 'name' or 'name+proportion'");
    o.max_label_chars = max_label_chars;
    o.validate();
    return o;
  }
};

std::string num(double v) { return format_double(v); }

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void make_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

std::size_t threads_of(int requested) {
  return resolve_threads(requested > 0 ? std::optional<std::size_t>(requested) : std::nullopt);
}

void add_data_options(CLI::App* cmd, DataOpts& o) {
  cmd->add_option("--data", o.data, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  cmd->add_option("--response", o.response, "Response column name")->required();
  cmd->add_flag("--expand-2nd-order", o.expand, "Append squares and pairwise products");
  cmd->add_flag("--no-standardize", o.no_standardize, "Keep covariates on their original scale");
  cmd->add_option("--test-split", o.test_split, "Fraction of rows held out as a test set (0: none)")
      ->check(CLI::Range(0.0, 0.99));
}

void add_model_options(CLI::App* cmd, ModelOpts& o) {
  cmd->add_option("--model", o.model, "Model class")->check(CLI::IsMember({"ols", "logistic", "tree"}));
  cmd->add_option("--tree-max-depth", o.tree_max_depth, "Tree depth (0: number of covariates)");
  cmd->add_option("--tree-min-leaf", o.tree_min_leaf, "Minimum rows per tree leaf");
  cmd->add_option("--logistic-max-iter", o.logistic_max_iter, "IRLS iteration cap");
  cmd->add_option("--logistic-tol", o.logistic_tol, "IRLS relative deviance tolerance");
}

void add_engine_options(CLI::App* cmd, EngineOpts& o, bool ranking) {
  cmd->add_option("--depth", o.depth, "Covariates per model, or 'cv' for cross-validated forward selection")
      ->required();
  cmd->add_option("--cv-folds", o.cv_folds, "Folds for --depth cv");
  cmd->add_option("--cv-max-depth", o.cv_max_depth, "Largest depth considered by --depth cv");
  cmd->add_option("--r", o.r, "Maximum cell count r");
  cmd->add_option("--gamma", o.gamma, "Subsample size exponent: floor(n^gamma) rows");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--scoring-holdout", o.scoring_holdout, "Fraction of each subsample held out for scoring");
  cmd->add_option("--max-redraws", o.max_redraws, "Consecutive degenerate subsamples tolerated");
  if (ranking) {
    cmd->add_option("--p-star", o.p_star, "Inclusion probability P*");
    cmd->add_option("--nsim", o.nsim, "Monte-Carlo experiments for the slack D");
    cmd->add_option("--threshold", o.threshold, "Rule-R threshold")->check(CLI::IsMember({"inclusive", "strict"}));
  }
}

void add_render_options(CLI::App* cmd, RenderOpts& o) {
  cmd->add_option("--layout", o.layout, "SVG layout")->check(CLI::IsMember({"radial", "tree"}));
  cmd->add_option("--label", o.label, "Node labels")->check(CLI::IsMember({"name", "name+proportion"}));
  cmd->add_option("--max-label-chars", o.max_label_chars, "Truncate labels to this many characters");
}

struct Prepared {
  DataMatrix train;
  DataMatrix test;
  bool has_test = false;
  std::string sha1;
};

Prepared prepare(const DataOpts& o, std::uint64_t seed) {
  Prepared p;
  const DataMatrix raw = read_csv(o.data, o.response);
  p.sha1 = git_blob_sha1_file(o.data);
  if (o.test_split > 0.0) {
    auto [tr, te] = split_train_test(raw, o.test_split, seed);
    std::tie(p.train, p.test) = prepare_train_test(tr, te, !o.no_standardize, o.expand);
    p.has_test = true;
  } else {
    p.train = prepare_train_test(raw, raw, !o.no_standardize, o.expand).first;
  }
  return p;
}

std::vector<std::string> data_argv(const DataOpts& o) {
  std::vector<std::string> a{"--data", o.data, "--response", o.response};
  if (o.expand) a.push_back("--expand-2nd-order");
  if (o.no_standardize) a.push_back("--no-standardize");
  a.insert(a.end(), {"--test-split", num(o.test_split)});
  return a;
}

std::vector<std::string> model_argv(const ModelOpts& o) {
  return {"--model", o.model, "--tree-max-depth", std::to_string(o.tree_max_depth), "--tree-min-leaf",
          std::to_string(o.tree_min_leaf), "--logistic-max-iter", std::to_string(o.logistic_max_iter),
          "--logistic-tol", num(o.logistic_tol)};
}

ojson data_json(const DataOpts& o, const Prepared& p) {
  ojson j;
  j["path"] = o.data;
  j["response"] = o.response;
  j["expand_second_order"] = o.expand;
  j["standardize"] = !o.no_standardize;
  j["test_split"] = o.test_split;
  j["n_train"] = p.train.n();
  j["n_test"] = p.has_test ? p.test.n() : 0;
  j["p"] = p.train.p();
  return j;
}

void write_manifest(const fs::path& dir, const std::string& command, const std::vector<std::string>& argv,
                    const ojson& config, const ojson& inputs, const std::vector<std::string>& outputs,
                    std::size_t threads) {
  ojson m;
  m["command"] = command;
  m["argv"] = argv;
  m["version"] = kVersion;
  m["timestamp"] = utc_timestamp();
  m["threads"] = threads;
  m["config"] = config;
  m["config_sha1"] = git_blob_sha1(config.dump());
  m["inputs"] = inputs;
  ojson outs = ojson::object();
  for (const auto& name : outputs) outs[name] = git_blob_sha1_file(dir / name);
  m["outputs"] = outs;
  write_file(dir / "manifest.json", m.dump(2) + "\n");
}

int resolve_depth(const EngineOpts& o, const ModelClass& mc, const DataMatrix& train, ojson& note) {
  if (o.depth == "cv") {
    const int max_depth = std::min(o.cv_max_depth, train.p());
    const auto cv = cv_forward_depth(mc, train, o.cv_folds, max_depth, derive_seed(o.seed, "cv-depth"));
    note["depth_rule"] = "cv";
    note["cv_folds"] = o.cv_folds;
    note["cv_max_depth"] = max_depth;
    note["cv_mse"] = cv.cv_mse;
    return cv.depth;
  }
  try {
    std::size_t used = 0;
    const int d = std::stoi(o.depth, &used);
    if (used != o.depth.size()) throw std::invalid_argument("");
    note["depth_rule"] = "fixed";
    return d;
  } catch (const std::logic_error&) {
    throw UsageError("--depth must be an integer or 'cv'");
  }
}

MpsConfig engine_config(const EngineOpts& o, const ModelClass& mc, int d) {
  MpsConfig c;
  c.d = d;
  c.r = o.r;
  c.p_star = o.p_star;
  c.gamma = o.gamma;
  c.nsim = o.nsim;
  c.model_class = mc;
  c.seed = o.seed;
  c.threshold_mode = parse_threshold_mode(o.threshold);
  c.scoring_holdout = o.scoring_holdout;
  c.max_redraws = o.max_redraws;
  return c;
}

std::vector<std::string> engine_argv(const EngineOpts& o, int d, bool ranking) {
  std::vector<std::string> a{"--depth", std::to_string(d), "--r", std::to_string(o.r), "--gamma", num(o.gamma),
                             "--seed", std::to_string(o.seed), "--scoring-holdout", num(o.scoring_holdout),
                             "--max-redraws", std::to_string(o.max_redraws)};
  if (ranking)
    a.insert(a.end(), {"--p-star", num(o.p_star), "--nsim", std::to_string(o.nsim), "--threshold", o.threshold});
  return a;
}

std::string join_names(const IndexList& covs, const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t i = 0; i < covs.size(); ++i) s += (i ? ";" : "") + names[covs[i]];
  return s;
}

// ---- run ---------------------------------------------------------------------

struct RunCmd {
  DataOpts data;
  ModelOpts model;
  EngineOpts engine;
  RenderOpts render;
  std::string out;
  int threads = 0;
};

int cmd_run(const RunCmd& c, std::ostream& out) {
  const ModelClass mc = c.model.resolve();
  const RenderOptions ropts = c.render.resolve();
  const Prepared prep = prepare(c.data, c.engine.seed);
  ojson depth_note;
  const int d = resolve_depth(c.engine, mc, prep.train, depth_note);
  const MpsConfig config = engine_config(c.engine, mc, d);
  config.validate(prep.train.p());
  const std::size_t threads = threads_of(c.threads);

  const PathForest forest = run_mps(prep.train, config, threads);
  const ModelFamily fam = enumerate_models(forest);
  const IndexList fwd = forward_select(mc, prep.train, d);

  make_out_dir(c.out);
  const fs::path dir(c.out);
  write_file(dir / "forest.json", to_json(forest));
  write_file(dir / "forest.dot", to_dot(forest, ropts));
  write_file(dir / "forest.svg", to_svg(forest, ropts));
  write_file(dir / "d_table.json", d_table_json());

  std::ostringstream models;
  models << "kind,id,covariates,train_loss,test_loss\n";
  double fwd_test = 0.0;
  int beat_forward = 0;
  const auto emit = [&](const std::string& kind, std::size_t id, const IndexList& covs) {
    const FittedModel m = fit(mc, prep.train, covs);
    models << kind << ',' << id << ',' << csv::escape(join_names(covs, prep.train.names)) << ','
           << num(loss(m, prep.train)) << ',';
    double test_loss = 0.0;
    if (prep.has_test) {
      test_loss = loss(m, prep.test);
      models << num(test_loss);
    }
    models << '\n';
    return test_loss;
  };
  fwd_test = emit("forward", 0, fwd);
  for (std::size_t i = 0; i < fam.paths.size(); ++i) emit("path", i, fam.paths[i]);
  for (std::size_t i = 0; i < fam.sets.size(); ++i)
    if (emit("set", i, fam.sets[i]) < fwd_test) ++beat_forward;
  write_file(dir / "models.csv", models.str());

  ojson cfg;
  cfg["data"] = data_json(c.data, prep);
  cfg["depth"] = depth_note;
  cfg["mps"] = config;
  cfg["render"] = {{"layout", c.render.layout}, {"label", c.render.label}, {"max_label_chars", c.render.max_label_chars}};
  std::vector<std::string> argv{"run"};
  for (auto v : {data_argv(c.data), model_argv(c.model), engine_argv(c.engine, d, true)}) argv.insert(argv.end(), v.begin(), v.end());
  argv.insert(argv.end(), {"--layout", c.render.layout, "--label", c.render.label, "--max-label-chars",
                           std::to_string(c.render.max_label_chars), "--out", c.out});
  write_manifest(dir, "run", argv, cfg, {{"data", {{"path", c.data.data}, {"sha1", prep.sha1}}}},
                 {"forest.json", "forest.dot", "forest.svg", "d_table.json", "models.csv"}, threads);

  out << "depth " << d << (depth_note["depth_rule"] == "cv" ? " (cross-validated)" : "") << '\n'
      << "paths " << fam.paths.size() << ", distinct models " << fam.sets.size() << '\n'
      << "forward selection: " << join_names(fwd, prep.train.names) << '\n';
  if (prep.has_test)
    out << "models with lower test loss than forward selection: " << beat_forward << "/" << fam.sets.size() << '\n';
  out << "wrote " << c.out << '\n';
  return 0;
}

// ---- fss ---------------------------------------------------------------------

struct FssCmd {
  DataOpts data;
  ModelOpts model;
  EngineOpts engine;
  int B = 0;
  std::string out;
};

int cmd_fss(const FssCmd& c, std::ostream& out) {
  const ModelClass mc = c.model.resolve();
  const Prepared prep = prepare(c.data, c.engine.seed);
  ojson depth_note;
  const int d = resolve_depth(c.engine, mc, prep.train, depth_note);
  const MpsConfig config = engine_config(c.engine, mc, d);
  config.validate(prep.train.p());
  const int B = c.B > 0 ? c.B : default_fss_B(config.r, prep.train.p());
  const IndexList path = run_fss(prep.train, config, B);
  const FittedModel m = fit(mc, prep.train, path);

  ojson res;
  res["path"] = path;
  std::vector<std::string> names;
  for (int k : path) names.push_back(prep.train.names[k]);
  res["names"] = names;
  res["B"] = B;
  res["config"] = config;
  res["train_loss"] = loss(m, prep.train);
  res["test_loss"] = prep.has_test ? ojson(loss(m, prep.test)) : ojson(nullptr);

  make_out_dir(c.out);
  const fs::path dir(c.out);
  write_file(dir / "fss_path.json", res.dump(2) + "\n");
  ojson cfg;
  cfg["data"] = data_json(c.data, prep);
  cfg["depth"] = depth_note;
  cfg["mps"] = config;
  cfg["B"] = B;
  std::vector<std::string> argv{"fss"};
  for (auto v : {data_argv(c.data), model_argv(c.model), engine_argv(c.engine, d, false)}) argv.insert(argv.end(), v.begin(), v.end());
  argv.insert(argv.end(), {"--B", std::to_string(B), "--out", c.out});
  write_manifest(dir, "fss", argv, cfg, {{"data", {{"path", c.data.data}, {"sha1", prep.sha1}}}}, {"fss_path.json"}, 1);

  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? " -> " : "") << names[i];
  out << '\n';
  return 0;
}

// ---- render ------------------------------------------------------------------

struct RenderCmd {
  std::string in;
  std::string format = "svg";
  RenderOpts render;
  std::string out;
};

int cmd_render(const RenderCmd& c, std::ostream& out) {
  const RenderOptions ropts = c.render.resolve();
  const PathForest forest = forest_from_json(read_file(c.in));
  std::string text;
  if (c.format == "svg") text = to_svg(forest, ropts);
  else if (c.format == "dot") text = to_dot(forest, ropts);
  else text = to_json(forest);
  if (c.out.empty()) {
    out << text;
  } else {
    write_file(c.out, text);
    out << "wrote " << c.out << '\n';
  }
  return 0;
}

// ---- diagnose-resampling -----------------------------------------------------

struct DiagnoseCmd {
  std::vector<int> n_list{100, 1000};
  int B = 200;
  int reps = 200;
  std::vector<std::string> schemes{"subsample", "bootstrap"};
  double gamma = 0.5;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;
};

int cmd_diagnose(const DiagnoseCmd& c, std::ostream& out) {
  const std::size_t threads = threads_of(c.threads);
  std::vector<DiagnosticRow> rows;
  std::vector<DiagnosticSummary> summary;
  for (const auto& s : c.schemes) {
    ResamplePlan plan;
    plan.scheme = parse_scheme(s);
    plan.gamma = c.gamma;
    plan.seed = c.seed;
    auto res = selection_proportion_diagnostic(c.n_list, c.B, c.reps, plan, threads);
    rows.insert(rows.end(), res.rows.begin(), res.rows.end());
    summary.insert(summary.end(), res.summary.begin(), res.summary.end());
  }
  make_out_dir(c.out);
  const fs::path dir(c.out);
  std::ostringstream csv;
  write_diagnostic_csv(csv, rows);
  write_file(dir / "diagnostic.csv", csv.str());

  ojson cfg{{"n_list", c.n_list}, {"B", c.B}, {"reps", c.reps}, {"schemes", c.schemes}, {"gamma", c.gamma}, {"seed", c.seed}};
  std::string n_text, s_text;
  for (std::size_t i = 0; i < c.n_list.size(); ++i) n_text += (i ? "," : "") + std::to_string(c.n_list[i]);
  for (std::size_t i = 0; i < c.schemes.size(); ++i) s_text += (i ? "," : "") + c.schemes[i];
  write_manifest(dir, "diagnose-resampling",
                 {"diagnose-resampling", "--n-list", n_text, "--B", std::to_string(c.B), "--reps",
                  std::to_string(c.reps), "--schemes", s_text, "--gamma", num(c.gamma), "--seed",
                  std::to_string(c.seed), "--out", c.out},
                 cfg, ojson::object(), {"diagnostic.csv"}, threads);

  out << std::left << std::setw(13) << "scheme" << std::setw(8) << "n" << std::setw(10) << "mean" << "sd\n";
  for (const auto& s : summary)
    out << std::left << std::setw(13) << s.scheme << std::setw(8) << s.n << std::setw(10) << std::fixed
        << std::setprecision(4) << s.mean << s.sd << std::defaultfloat << '\n';
  return 0;
}

// ---- simulate ----------------------------------------------------------------

struct SimulateCmd {
  std::string setup = "1";
  int n = -1, p = -1, s = -1, r = -1;
  double p_star = -1.0;
  int beta_type = 2;
  std::vector<double> rho{0.0};
  std::vector<std::string> snr{"1"};
  int reps = 1;
  std::vector<std::string> methods = all_methods();
  std::uint64_t seed = 0;
  int n_test = 10000;
  double gamma = 0.5;
  int nsim = 10000;
  int depth = 0;
  int stability_B = 100;
  int fss_B = 0;
  int lasso_folds = 10;
  std::string out;
  int threads = 0;
};

int cmd_simulate(const SimulateCmd& c, std::ostream& out) {
  SimSpec base;
  if (c.setup == "custom") base = SimSpec::for_setup(0);
  else if (c.setup == "1" || c.setup == "2" || c.setup == "3") base = SimSpec::for_setup(std::stoi(c.setup));
  else throw UsageError("--setup must be 1, 2, 3 or custom");
  if (c.n > 0) base.n = c.n;
  if (c.p > 0) base.p = c.p;
  if (c.s > 0) base.s = c.s;
  if (c.r > 0) base.r = c.r;
  if (c.p_star > 0) base.p_star = c.p_star;
  base.beta_type = c.beta_type;
  base.reps = c.reps;
  base.methods = c.methods;
  base.seed = c.seed;
  base.n_test = c.n_test;
  base.gamma = c.gamma;
  base.nsim = c.nsim;
  base.depth = c.depth;
  base.stability_B = c.stability_B;
  base.fss_B = c.fss_B;
  base.lasso_folds = c.lasso_folds;

  std::vector<double> snrs;
  for (const auto& v : c.snr) {
    if (v == "grid") {
      for (double g : snr_grid()) snrs.push_back(g);
      continue;
    }
    try {
      snrs.push_back(std::stod(v));
    } catch (const std::logic_error&) {
      throw UsageError("--snr values must be numbers or 'grid'");
    }
  }

  std::vector<SimSpec> specs;
  for (double rho : c.rho)
    for (double snr : snrs) {
      SimSpec s = base;
      s.rho = rho;
      s.snr = snr;
      s.validate();
      specs.push_back(s);
    }

  const std::size_t threads = threads_of(c.threads);
  std::vector<SimResultRow> rows;
  bool ok = true;
  for (const auto& s : specs) {
    auto res = run_simulation(s, threads);
    ok &= res.all_ok;
    rows.insert(rows.end(), res.rows.begin(), res.rows.end());
  }

  make_out_dir(c.out);
  const fs::path dir(c.out);
  std::ostringstream results, timings;
  write_results_csv(results, rows);
  write_timings_csv(timings, rows);
  write_file(dir / "results.csv", results.str());
  write_file(dir / "timings.csv", timings.str());

  ojson cfg = ojson::array();
  for (const auto& s : specs) cfg.push_back(s);
  const auto join = [](const auto& xs, auto f) {
    std::string t;
    for (std::size_t i = 0; i < xs.size(); ++i) t += (i ? "," : "") + f(xs[i]);
    return t;
  };
  std::vector<std::string> argv{"simulate", "--setup", base.setup == 0 ? "custom" : std::to_string(base.setup),
                                "--n", std::to_string(base.n), "--p", std::to_string(base.p), "--s",
                                std::to_string(base.s), "--r", std::to_string(base.r), "--p-star", num(base.p_star),
                                "--beta-type", std::to_string(base.beta_type), "--rho",
                                join(c.rho, [](double v) { return num(v); }), "--snr",
                                join(snrs, [](double v) { return num(v); }), "--reps", std::to_string(base.reps),
                                "--methods", join(base.methods, [](const std::string& m) { return m; }), "--seed",
                                std::to_string(base.seed), "--n-test", std::to_string(base.n_test), "--gamma",
                                num(base.gamma), "--nsim", std::to_string(base.nsim), "--depth",
                                std::to_string(base.model_depth()), "--stability-B", std::to_string(base.stability_B),
                                "--fss-B", std::to_string(base.fss_B > 0 ? base.fss_B : default_fss_B(base.r, base.p)),
                                "--lasso-folds", std::to_string(base.lasso_folds), "--out", c.out};
  write_manifest(dir, "simulate", argv, cfg, ojson::object(), {"results.csv"}, threads);

  const auto summary = aggregate(rows);
  print_summary(out, summary);
  if (!ok) out << "some replications failed; see the error column of results.csv\n";
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Model path selection: forests of similarly accurate forward-selected models", "mps"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  RunCmd run;
  auto* run_app = app.add_subcommand("run", "Build a path forest from a CSV file");
  add_data_options(run_app, run.data);
  add_model_options(run_app, run.model);
  add_engine_options(run_app, run.engine, true);
  add_render_options(run_app, run.render);
  run_app->add_option("--out", run.out, "Output directory")->required();
  run_app->add_option("--threads", run.threads, "Worker threads (default $MPS_THREADS or 1)");

  FssCmd fss;
  auto* fss_app = app.add_subcommand("fss", "Forward stability selection: one path");
  add_data_options(fss_app, fss.data);
  add_model_options(fss_app, fss.model);
  add_engine_options(fss_app, fss.engine, false);
  fss_app->add_option("--B", fss.B, "Subsamples per step (0: r * candidates / 4, capped at 500)");
  fss_app->add_option("--out", fss.out, "Output directory")->required();

  RenderCmd render;
  auto* render_app = app.add_subcommand("render", "Render a forest.json file");
  render_app->add_option("--in", render.in, "forest.json")->required()->check(CLI::ExistingFile);
  render_app->add_option("--format", render.format, "Output format")->check(CLI::IsMember({"svg", "dot", "json"}));
  add_render_options(render_app, render.render);
  render_app->add_option("--out", render.out, "Output file (default: stdout)");

  DiagnoseCmd diag;
  auto* diag_app = app.add_subcommand("diagnose-resampling", "Selection-proportion spread: subsampling vs bootstrap");
  diag_app->add_option("--n-list", diag.n_list, "Sample sizes")->delimiter(',');
  diag_app->add_option("--B", diag.B, "Resamples per dataset");
  diag_app->add_option("--reps", diag.reps, "Datasets per sample size");
  diag_app->add_option("--schemes", diag.schemes, "Resampling schemes")
      ->delimiter(',')
      ->check(CLI::IsMember({"subsample", "half_sample", "bootstrap"}));
  diag_app->add_option("--gamma", diag.gamma, "Subsample exponent");
  diag_app->add_option("--seed", diag.seed, "Master seed");
  diag_app->add_option("--out", diag.out, "Output directory")->required();
  diag_app->add_option("--threads", diag.threads, "Worker threads");

  SimulateCmd sim;
  auto* sim_app = app.add_subcommand("simulate", "Synthetic benchmark against the baselines");
  sim_app->add_option("--setup", sim.setup, "1, 2, 3 or custom");
  sim_app->add_option("--n", sim.n, "Training rows (overrides the setup)");
  sim_app->add_option("--p", sim.p, "Covariates (overrides the setup)");
  sim_app->add_option("--s", sim.s, "Non-zero coefficients (overrides the setup)");
  sim_app->add_option("--r", sim.r, "Maximum cell count (overrides the setup)");
  sim_app->add_option("--p-star", sim.p_star, "Inclusion probability (overrides the setup)");
  sim_app->add_option("--beta-type", sim.beta_type, "Coefficient pattern 1, 2 or 3");
  sim_app->add_option("--rho", sim.rho, "Toeplitz autocorrelations")->delimiter(',');
  sim_app->add_option("--snr", sim.snr, "Signal-to-noise ratios, or 'grid'")->delimiter(',');
  sim_app->add_option("--reps", sim.reps, "Replications per setting");
  sim_app->add_option("--methods", sim.methods, "Methods to compare")
      ->delimiter(',')
      ->check(CLI::IsMember(all_methods()));
  sim_app->add_option("--seed", sim.seed, "Master seed");
  sim_app->add_option("--n-test", sim.n_test, "Test rows per replication");
  sim_app->add_option("--gamma", sim.gamma, "Subsample exponent");
  sim_app->add_option("--nsim", sim.nsim, "Monte-Carlo experiments for the slack D");
  sim_app->add_option("--depth", sim.depth, "Model size (0: s)");
  sim_app->add_option("--stability-B", sim.stability_B, "Half-samples for stability selection");
  sim_app->add_option("--fss-B", sim.fss_B, "Subsamples per FSS step (0: default)");
  sim_app->add_option("--lasso-folds", sim.lasso_folds, "Lasso cross-validation folds");
  sim_app->add_option("--out", sim.out, "Output directory")->required();
  sim_app->add_option("--threads", sim.threads, "Worker threads");

  std::string manifest_path, replay_out;
  auto* replay_app = app.add_subcommand("replay", "Re-run the command recorded in a manifest.json");
  replay_app->add_option("--manifest", manifest_path, "manifest.json")->required()->check(CLI::ExistingFile);
  replay_app->add_option("--out", replay_out, "Output directory (default: as recorded)");

  std::vector<const char*> argv{"mps"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_app) return cmd_run(run, out);
    if (*fss_app) return cmd_fss(fss, out);
    if (*render_app) return cmd_render(render, out);
    if (*diag_app) return cmd_diagnose(diag, out);
    if (*sim_app) return cmd_simulate(sim, out);
    if (*replay_app) {
      const ojson m = ojson::parse(read_file(manifest_path));
      auto replay_args = m.at("argv").get<std::vector<std::string>>();
      if (!replay_out.empty()) {
        for (std::size_t i = 0; i + 1 < replay_args.size(); ++i)
          if (replay_args[i] == "--out") replay_args[i + 1] = replay_out;
      }
      return run_cli(replay_args, out, err);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "data error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace mps
