// Command-line front end: data prep, training, prediction, evaluation,
// Murphy analysis, distribution fitting, and decision simulation.

#include <algorithm>
#include <cstring>
#include <optional>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dhqr/data.hpp"
#include "dhqr/decision.hpp"
#include "dhqr/evaluation.hpp"
#include "dhqr/functionals.hpp"
#include "dhqr/network.hpp"
#include "dhqr/scoring.hpp"

using json = nlohmann::json;
using namespace dhqr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

double parse_cap(const std::string& s) {
  if (s == "inf" || s == "infinity") return kInf;
  return std::stod(s);
}

std::string cap_repr(double c) {
  if (std::isinf(c)) return "inf";
  std::ostringstream ss;
  ss.precision(17);
  ss << c;
  return ss.str();
}

// Echo every resolved option value so a run can be reproduced from its log.
void echo_config(const CLI::App* cmd) {
  json resolved;
  for (const CLI::Option* opt : cmd->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config") continue;
    if (opt->count() > 0) {
      resolved[name] = opt->results();
    } else if (!opt->get_default_str().empty()) {
      resolved[name] = opt->get_default_str();
    }
  }
  std::cout << json{{"command", cmd->get_name()}, {"resolved", resolved}}.dump()
            << '\n';
}

std::vector<std::string> csv_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cols;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) cols.push_back(field);
  return cols;
}

std::vector<std::string> feature_columns_or_default(
    const std::vector<std::string>& given, const std::string& data_path,
    const std::string& target) {
  if (!given.empty()) return given;
  std::vector<std::string> cols;
  for (const auto& c : csv_header(data_path))
    if (c != target) cols.push_back(c);
  if (cols.empty()) throw std::runtime_error("no feature columns in " + data_path);
  return cols;
}

std::string with_tau_suffix(const std::string& path, double tau) {
  std::ostringstream tag;
  tag << "_tau" << tau;
  const auto dot = path.rfind('.');
  if (dot == std::string::npos || path.find('/', dot) != std::string::npos)
    return path + tag.str();
  return path.substr(0, dot) + tag.str() + path.substr(dot);
}

struct FitOptions {
  std::string data, target = "y", out = "model.json", report, split_out;
  std::vector<std::string> features;
  std::vector<double> tau_list;
  double tau = 0.5, a = kInf, b = kInf;
  std::string a_str = "inf", b_str = "inf";
  double target_scale = 1.0;
  std::string arch = "model3";
  TrainConfig cfg;
};

void run_fit_single(const FitOptions& opt, double tau, const std::string& out,
                    const std::string& report) {
  const auto features =
      feature_columns_or_default(opt.features, opt.data, opt.target);
  const auto loaded =
      load_table(opt.data, features, opt.target, opt.target_scale);
  const auto split =
      split_dataset(loaded.dataset, 0.4, 0.3, 0.3, opt.cfg.seed);

  if (!opt.split_out.empty()) {
    std::ofstream sout(opt.split_out);
    if (!sout) throw std::runtime_error("cannot open " + opt.split_out);
    sout.precision(17);
    for (const auto& name : features) sout << name << ',';
    sout << opt.target << ",split\n";
    auto emit = [&](const Dataset& d, const char* label) {
      for (std::size_t i = 0; i < d.rows(); ++i) {
        for (double v : d.features[i]) sout << v << ',';
        sout << d.targets[i] << ',' << label << '\n';
      }
    };
    emit(split.train, "train");
    emit(split.val, "val");
    emit(split.test, "test");
  }

  const ScoreParams p(tau, opt.a, opt.b);
  const auto arch =
      ArchitectureSpec::by_name(opt.arch, static_cast<int>(features.size()));

  const auto train_stats = zscore_fit(split.train);
  const auto [probe, rep] = train_early_stopping(
      zscore_apply(split.train, train_stats).features, split.train.targets,
      zscore_apply(split.val, train_stats).features, split.val.targets, arch,
      p, opt.cfg);

  Dataset merged = split.train;
  for (std::size_t i = 0; i < split.val.rows(); ++i) {
    merged.features.push_back(split.val.features[i]);
    merged.targets.push_back(split.val.targets[i]);
    merged.row_ids.push_back(split.val.row_ids[i]);
  }
  const auto merged_stats = zscore_fit(merged);
  NetworkModel model =
      refit_fixed_epochs(zscore_apply(merged, merged_stats).features,
                         merged.targets, arch, p, opt.cfg, rep.best_epoch);
  model.norm_stats = merged_stats;
  save_model(model, out);

  if (!report.empty()) {
    std::ofstream rout(report);
    if (!rout) throw std::runtime_error("cannot open " + report);
    rout.precision(17);
    rout << "epoch,train_score,val_score\n";
    for (std::size_t e = 0; e < rep.train_score.size(); ++e)
      rout << (e + 1) << ',' << rep.train_score[e] << ',' << rep.val_score[e]
           << '\n';
  }
  std::cout << json{{"model", out},
                    {"tau", tau},
                    {"a", cap_repr(opt.a)},
                    {"b", cap_repr(opt.b)},
                    {"best_epoch", rep.best_epoch},
                    {"stopped_at", rep.stopped_at},
                    {"train_rows", split.train.rows()},
                    {"val_rows", split.val.rows()},
                    {"test_rows", split.test.rows()},
                    {"dropped_rows", loaded.dropped}}
                   .dump()
            << '\n';
}

struct PredRecord {
  std::vector<double> x, y;
};

PredRecord read_predictions(const std::string& path) {
  const auto header = csv_header(path);
  const auto find = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw std::runtime_error(path + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t xi = find("prediction"), yi = find("observation");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  PredRecord rec;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    rec.x.push_back(std::stod(fields.at(xi)));
    rec.y.push_back(std::stod(fields.at(yi)));
  }
  if (rec.x.empty()) throw std::runtime_error(path + ": no prediction rows");
  return rec;
}

std::string basename_label(const std::string& path) {
  auto slash = path.find_last_of('/');
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = name.rfind('.');
  if (dot != std::string::npos) name = name.substr(0, dot);
  return name;
}

// Expand `--config file.json` into option tokens placed before the real
// command-line flags so that explicit flags win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string config_path;
  for (std::size_t i = 1; i + 1 < args.size(); ++i)
    if (args[i] == "--config") config_path = args[i + 1];
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot open config " + config_path);
  json cfg = json::parse(in);

  // the subcommand is the first bare token that is not the --config value
  std::size_t sub_pos = 0;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      ++i;
      continue;
    }
    if (!args[i].empty() && args[i][0] != '-') {
      sub_pos = i;
      break;
    }
  }
  if (sub_pos == 0) return args;

  // allow either flat keys or a section named after the subcommand
  if (cfg.contains(args[sub_pos]) && cfg[args[sub_pos]].is_object())
    cfg = cfg[args[sub_pos]];

  std::vector<std::string> injected;
  for (const auto& [key, value] : cfg.items()) {
    if (value.is_object()) continue;  // unrelated section
    injected.push_back("--" + key);
    if (value.is_array()) {
      for (const auto& v : value)
        injected.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    } else {
      injected.push_back(value.is_string() ? value.get<std::string>()
                                           : value.dump());
    }
  }
  // config values go right after the subcommand so later flags override them;
  // the --config pair itself is consumed here
  std::vector<std::string> out;
  for (std::size_t i = 0; i <= sub_pos; ++i) {
    if (args[i] == "--config") {
      ++i;
      continue;
    }
    out.push_back(args[i]);
  }
  out.insert(out.end(), injected.begin(), injected.end());
  for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      ++i;
      continue;
    }
    out.push_back(args[i]);
  }
  return out;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Huber quantile regression networks: scoring, training, "
               "evaluation, and decision analysis"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON config file; command-line flags override its values");

  // ---- synth ----------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Generate conditional log-normal data");
  std::size_t synth_n = 1000, synth_d = 5;
  std::vector<double> synth_coef;
  double synth_sigma = 0.4;
  std::uint64_t synth_seed = 1;
  std::string synth_out = "synth.csv";
  synth->add_option("--n", synth_n, "number of rows")->capture_default_str();
  synth->add_option("--d", synth_d, "number of features")->capture_default_str();
  synth->add_option("--coef", synth_coef,
                    "intercept followed by d slopes (default: 0.2 then 0.5s)");
  synth->add_option("--sigma", synth_sigma, "log-scale noise")
      ->capture_default_str();
  synth->add_option("--seed", synth_seed)->capture_default_str();
  synth->add_option("--out", synth_out)->capture_default_str();

  // ---- fit ------------------------------------------------------------
  auto* fit = app.add_subcommand(
      "fit", "Train a model: split, early stopping, then fixed-epoch refit");
  FitOptions fo;
  fit->add_option("--data", fo.data, "input CSV")->required();
  fit->add_option("--features", fo.features,
                  "feature columns (default: all except target)");
  fit->add_option("--target", fo.target)->capture_default_str();
  fit->add_option("--target-scale", fo.target_scale)->capture_default_str();
  fit->add_option("--tau", fo.tau, "level in (0,1)")->capture_default_str();
  fit->add_option("--tau-list", fo.tau_list,
                  "train one model per level; output names get a suffix");
  fit->add_option("--a", fo.a_str, "upper cap, number or 'inf'")
      ->capture_default_str();
  fit->add_option("--b", fo.b_str, "lower cap, number or 'inf'")
      ->capture_default_str();
  fit->add_option("--arch", fo.arch, "model1|model2|model3")
      ->capture_default_str();
  fit->add_option("--seed", fo.cfg.seed)->capture_default_str();
  fit->add_option("--lr", fo.cfg.learning_rate)->capture_default_str();
  fit->add_option("--batch", fo.cfg.batch_size)->capture_default_str();
  fit->add_option("--epochs", fo.cfg.max_epochs)->capture_default_str();
  fit->add_option("--patience", fo.cfg.patience)->capture_default_str();
  fit->add_option("--out", fo.out, "model JSON path")->capture_default_str();
  fit->add_option("--report", fo.report, "per-epoch score CSV");
  fit->add_option("--split-out", fo.split_out,
                  "write the split with a label column to this CSV");

  // ---- predict --------------------------------------------------------
  auto* predict = app.add_subcommand("predict", "Predict with a saved model");
  std::string pr_model, pr_data, pr_target = "y", pr_out = "predictions.csv";
  std::string pr_split;
  std::vector<std::string> pr_features;
  double pr_scale = 1.0;
  predict->add_option("--model", pr_model)->required();
  predict->add_option("--data", pr_data)->required();
  predict->add_option("--features", pr_features);
  predict->add_option("--target", pr_target)->capture_default_str();
  predict->add_option("--target-scale", pr_scale)->capture_default_str();
  predict->add_option("--split", pr_split,
                      "keep only rows whose 'split' column equals this");
  predict->add_option("--out", pr_out)->capture_default_str();

  // ---- evaluate -------------------------------------------------------
  auto* evaluate = app.add_subcommand(
      "evaluate", "Average scores, skill table, level estimates, coverage");
  std::vector<std::string> ev_files;
  std::string ev_reference, ev_out_csv, ev_out_json;
  double ev_tau = 0.5;
  std::string ev_a = "inf", ev_b = "inf";
  evaluate->add_option("--pred", ev_files, "prediction CSVs")
      ->required()
      ->expected(-1);
  evaluate->add_option("--reference", ev_reference,
                       "label of the reference method (default: last file)");
  evaluate->add_option("--tau", ev_tau)->capture_default_str();
  evaluate->add_option("--a", ev_a)->capture_default_str();
  evaluate->add_option("--b", ev_b)->capture_default_str();
  evaluate->add_option("--out-csv", ev_out_csv);
  evaluate->add_option("--out-json", ev_out_json);

  // ---- murphy ---------------------------------------------------------
  auto* murphy = app.add_subcommand("murphy", "Murphy curve of elementary scores");
  std::string mu_file, mu_out = "murphy.csv";
  double mu_tau = 0.5;
  std::string mu_a = "inf", mu_b = "inf";
  std::size_t mu_nodes = 513;
  murphy->add_option("--pred", mu_file)->required();
  murphy->add_option("--tau", mu_tau)->capture_default_str();
  murphy->add_option("--a", mu_a)->capture_default_str();
  murphy->add_option("--b", mu_b)->capture_default_str();
  murphy->add_option("--nodes", mu_nodes)->capture_default_str();
  murphy->add_option("--out", mu_out)->capture_default_str();

  // ---- functional -----------------------------------------------------
  auto* functional = app.add_subcommand(
      "functional", "Empirical quantile/expectile/Huber quantile of a column");
  std::string fn_data, fn_column = "y", fn_out;
  double fn_tau = 0.5;
  std::string fn_a = "0.5", fn_b = "0.4";
  std::vector<double> fn_a_grid, fn_b_grid;
  functional->add_option("--data", fn_data)->required();
  functional->add_option("--column", fn_column)->capture_default_str();
  functional->add_option("--tau", fn_tau)->capture_default_str();
  functional->add_option("--a", fn_a)->capture_default_str();
  functional->add_option("--b", fn_b)->capture_default_str();
  functional->add_option("--a-grid", fn_a_grid,
                         "emit a ratio table over this cap grid");
  functional->add_option("--b-grid", fn_b_grid);
  functional->add_option("--out", fn_out, "ratio table CSV");

  // ---- distfit --------------------------------------------------------
  auto* distfit =
      app.add_subcommand("distfit", "Log-normal maximum likelihood fit");
  std::string df_data, df_column = "y", df_out;
  distfit->add_option("--data", df_data)->required();
  distfit->add_option("--column", df_column)->capture_default_str();
  distfit->add_option("--out", df_out, "JSON output path");

  // ---- decide ---------------------------------------------------------
  auto* decide =
      app.add_subcommand("decide", "Investment rule simulation over predictions");
  std::string dc_file, dc_out_csv, dc_out_json;
  double dc_theta = 0.0, dc_rl = 0.0, dc_rg = 0.0;
  std::string dc_a = "0.5", dc_b = "0.4";
  decide->add_option("--pred", dc_file)->required();
  decide->add_option("--theta", dc_theta, "investment amount")->required();
  decide->add_option("--a", dc_a)->capture_default_str();
  decide->add_option("--b", dc_b)->capture_default_str();
  decide->add_option("--rl", dc_rl, "deduction rate")->capture_default_str();
  decide->add_option("--rg", dc_rg, "profit tax rate")->capture_default_str();
  decide->add_option("--out-csv", dc_out_csv);
  decide->add_option("--out-json", dc_out_json);

  const auto args = expand_config(argc, argv);
  std::vector<const char*> cargs;
  for (const auto& a : args) cargs.push_back(a.c_str());
  app.parse(static_cast<int>(cargs.size()), cargs.data());

  CLI::App* active = app.get_subcommands().front();
  echo_config(active);

  if (active == synth) {
    if (synth_coef.empty()) {
      synth_coef.assign(synth_d + 1, 0.5);
      synth_coef[0] = 0.2;
    }
    const auto d = synth_lognormal_regression(synth_n, synth_d, synth_coef,
                                              synth_sigma, synth_seed);
    save_dataset_csv(d, synth_out);
    std::cout << json{{"rows", d.rows()}, {"out", synth_out}}.dump() << '\n';
  } else if (active == fit) {
    fo.a = parse_cap(fo.a_str);
    fo.b = parse_cap(fo.b_str);
    if (fo.tau_list.empty()) {
      run_fit_single(fo, fo.tau, fo.out, fo.report);
    } else {
      for (double tau : fo.tau_list)
        run_fit_single(fo, tau, with_tau_suffix(fo.out, tau),
                       fo.report.empty() ? fo.report
                                         : with_tau_suffix(fo.report, tau));
    }
  } else if (active == predict) {
    const auto model = load_model(pr_model);
    auto features =
        feature_columns_or_default(pr_features, pr_data, pr_target);
    // drop the split label column if the file carries one
    std::erase(features, "split");
    const auto header = csv_header(pr_data);
    if (!pr_split.empty()) {
      const auto it = std::find(header.begin(), header.end(), "split");
      if (it == header.end())
        throw std::runtime_error(pr_data + ": no 'split' column to filter on");
    }
    auto loaded = load_table(pr_data, features, pr_target, pr_scale);
    std::vector<std::size_t> rows(loaded.dataset.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    if (!pr_split.empty()) {
      // re-read the split labels aligned by row id
      std::ifstream in(pr_data);
      std::string line;
      std::getline(in, line);
      const auto it = std::find(header.begin(), header.end(), "split");
      const auto si = static_cast<std::size_t>(it - header.begin());
      std::vector<std::string> labels;
      while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        labels.push_back(si < fields.size() ? fields[si] : "");
      }
      rows.clear();
      for (std::size_t i = 0; i < loaded.dataset.rows(); ++i)
        if (labels.at(loaded.dataset.row_ids[i] - 1) == pr_split)
          rows.push_back(i);
      if (rows.empty())
        throw std::runtime_error("no rows with split == " + pr_split);
    }
    std::vector<std::vector<double>> x;
    for (std::size_t i : rows) x.push_back(loaded.dataset.features[i]);
    const auto preds = predict_batch(model, x);
    std::ofstream out(pr_out);
    if (!out) throw std::runtime_error("cannot open " + pr_out);
    out.precision(17);
    out << "id,prediction,observation\n";
    for (std::size_t k = 0; k < rows.size(); ++k)
      out << loaded.dataset.row_ids[rows[k]] << ',' << preds[k] << ','
          << loaded.dataset.targets[rows[k]] << '\n';
    std::cout << json{{"rows", rows.size()}, {"out", pr_out}}.dump() << '\n';
  } else if (active == evaluate) {
    const ScoreParams p(ev_tau, parse_cap(ev_a), parse_cap(ev_b));
    struct Entry {
      std::string label;
      double mean, level, coverage;
    };
    std::vector<Entry> entries;
    for (const auto& f : ev_files) {
      const auto rec = read_predictions(f);
      const PredictionSet ps(rec.x, rec.y, basename_label(f));
      double level = std::numeric_limits<double>::quiet_NaN();
      try {
        level = huber_level_estimate(ps, p.a, p.b);
      } catch (const std::domain_error&) {
      }
      entries.push_back(
          {ps.label, mean_score(ps, p), level, coverage_frequency(ps)});
    }
    std::string ref = ev_reference.empty() ? entries.back().label : ev_reference;
    const auto rit =
        std::find_if(entries.begin(), entries.end(),
                     [&](const Entry& e) { return e.label == ref; });
    if (rit == entries.end())
      throw std::runtime_error("reference label not found: " + ref);

    json out_json{{"tau", ev_tau},
                  {"a", cap_repr(p.a)},
                  {"b", cap_repr(p.b)},
                  {"reference", ref},
                  {"methods", json::array()}};
    std::ostringstream csv;
    csv.precision(17);
    csv << "label,mean_score,skill_vs_" << ref << ",level_estimate,coverage\n";
    for (const auto& e : entries) {
      const double skill = skill_score(e.mean, rit->mean);
      csv << e.label << ',' << e.mean << ',' << skill << ',' << e.level << ','
          << e.coverage << '\n';
      out_json["methods"].push_back({{"label", e.label},
                                     {"mean_score", e.mean},
                                     {"skill", skill},
                                     {"level_estimate", e.level},
                                     {"coverage", e.coverage}});
    }
    if (!ev_out_csv.empty()) {
      std::ofstream f(ev_out_csv);
      if (!f) throw std::runtime_error("cannot open " + ev_out_csv);
      f << csv.str();
    }
    if (!ev_out_json.empty()) {
      std::ofstream f(ev_out_json);
      if (!f) throw std::runtime_error("cannot open " + ev_out_json);
      f << out_json.dump(2) << '\n';
    }
    std::cout << out_json.dump() << '\n';
  } else if (active == murphy) {
    const ScoreParams p(mu_tau, parse_cap(mu_a), parse_cap(mu_b));
    const auto rec = read_predictions(mu_file);
    const PredictionSet ps(rec.x, rec.y);
    const auto curve = murphy_curve(ps, p, default_theta_grid(ps, mu_nodes));
    std::ofstream out(mu_out);
    if (!out) throw std::runtime_error("cannot open " + mu_out);
    out.precision(17);
    out << "theta,mean_elementary_score\n";
    for (const auto& pt : curve)
      out << pt.theta << ',' << pt.mean_elementary << '\n';
    std::cout << json{{"nodes", curve.size()}, {"out", mu_out}}.dump() << '\n';
  } else if (active == functional) {
    const auto loaded = load_table(fn_data, {}, fn_column);
    const EmpiricalSample sample(loaded.dataset.targets);
    const ScoreParams p(fn_tau, parse_cap(fn_a), parse_cap(fn_b));
    json out{{"n", sample.size()},
             {"tau", fn_tau},
             {"quantile", empirical_quantile(sample, fn_tau)},
             {"expectile", empirical_expectile(sample, fn_tau)},
             {"huber_quantile", empirical_huber_quantile(sample, p)},
             {"a", cap_repr(p.a)},
             {"b", cap_repr(p.b)}};
    if (!fn_a_grid.empty() && !fn_b_grid.empty()) {
      const double e = empirical_expectile(sample, fn_tau);
      const double q = empirical_quantile(sample, fn_tau);
      std::ostringstream csv;
      csv.precision(17);
      csv << "a,b,huber,h_over_e,h_over_q\n";
      for (double a : fn_a_grid)
        for (double b : fn_b_grid) {
          const double h =
              empirical_huber_quantile(sample, ScoreParams(fn_tau, a, b));
          csv << a << ',' << b << ',' << h << ',' << h / e << ',' << h / q
              << '\n';
        }
      if (!fn_out.empty()) {
        std::ofstream f(fn_out);
        if (!f) throw std::runtime_error("cannot open " + fn_out);
        f << csv.str();
      } else {
        std::cout << csv.str();
      }
    }
    std::cout << out.dump() << '\n';
  } else if (active == distfit) {
    const auto loaded = load_table(df_data, {}, df_column);
    const auto fit_params =
        lognormal_fit_mle(EmpiricalSample(loaded.dataset.targets));
    const json out{{"mu", fit_params.mu},
                   {"sigma", fit_params.sigma},
                   {"n", loaded.dataset.rows()}};
    if (!df_out.empty()) {
      std::ofstream f(df_out);
      if (!f) throw std::runtime_error("cannot open " + df_out);
      f << out.dump(2) << '\n';
    }
    std::cout << out.dump() << '\n';
  } else if (active == decide) {
    const DecisionPolicy pol(dc_theta, parse_cap(dc_a), parse_cap(dc_b), dc_rl,
                             dc_rg);
    const auto rec = read_predictions(dc_file);
    const PredictionSet ps(rec.x, rec.y);
    const auto result = simulate_portfolio(ps, pol);
    if (!dc_out_csv.empty()) {
      std::ofstream f(dc_out_csv);
      if (!f) throw std::runtime_error("cannot open " + dc_out_csv);
      f.precision(17);
      f << "prediction,observation,decision,payoff,regret\n";
      for (std::size_t i = 0; i < ps.size(); ++i) {
        const double x = ps.predictions[i], y = ps.observations[i];
        f << x << ',' << y << ','
          << (x > pol.theta ? "invest" : "refrain") << ','
          << payoff(x, y, pol) << ',' << regret(x, y, pol) << '\n';
      }
    }
    const json out{{"implied_tau", pol.implied_tau()},
                   {"total_payoff", result.total_payoff},
                   {"total_regret", result.total_regret},
                   {"invested", result.invested},
                   {"refrained", result.refrained}};
    if (!dc_out_json.empty()) {
      std::ofstream f(dc_out_json);
      if (!f) throw std::runtime_error("cannot open " + dc_out_json);
      f << out.dump(2) << '\n';
    }
    std::cout << out.dump() << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const CLI::ParseError& e) {
    CLI::App dummy;
    const int code = dummy.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    if (msg.find("diverged") != std::string::npos ||
        msg.find("converge") != std::string::npos) {
      std::cerr << "numerical error: " << msg << '\n';
      return kExitNumerical;
    }
    std::cerr << "error: " << msg << '\n';
    return kExitData;
  }
}
