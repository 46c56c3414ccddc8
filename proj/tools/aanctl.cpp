// Command-line front end: dataset generation, reservoir training, feature
// extraction, network training/evaluation, and the reporting battery. All
// artifacts live under a work directory (--work); reports under --out.
//
//   aanctl <command> [--config FILE]... [--set key=value]... [--work DIR]
//                    [--out DIR] [--check] [command options]
//
// --check turns the command's headline numbers into hard gates: the process
// exits nonzero if any of them fail.

#include "aan/checks.hpp"
#include "aan/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using namespace aan;

struct Cli {
  std::string cmd;
  ParamSet ps;
  std::string work = "work";
  std::string out;  // defaults to <work>/reports
  bool check = false;
  std::map<std::string, std::string> opt;  // command-specific --key value
};

int usage(std::ostream& os) {
  os << "usage: aanctl <command> [options]\n"
        "\n"
        "commands:\n"
        "  gen-data          write a dataset (--kind NAME [--k N] [--dir DIR])\n"
        "  train-reservoir   train or load the convolutional front end\n"
        "  extract-features  fill the feature cache for a dataset (--kind, [--k])\n"
        "  train-aan         train one network, save a snapshot (--snapshot FILE)\n"
        "  eval              evaluate a snapshot (--snapshot FILE)\n"
        "  histograms        per-pool activation histograms (one training run)\n"
        "  correlate         imagined-vs-real feature correlations (repeated runs)\n"
        "  relational-stats  chain sharpening and relation-pool tables, both colors\n"
        "  sweep-outliers    acting rate vs rule-breaker share in the training set\n"
        "  sweep-params      acting rate under learning-parameter variations\n"
        "  ablate            acting rate vs chain depth\n"
        "  learning-curves   error rates along both training phases\n"
        "  run-all           everything above that feeds the summary report\n"
        "\n"
        "common options:\n"
        "  --config FILE     key=value file, may repeat (later files win)\n"
        "  --set key=value   single override, may repeat (wins over files)\n"
        "  --work DIR        artifact directory (default: work)\n"
        "  --out DIR         report directory (default: <work>/reports)\n"
        "  --check           fail the process if the command's gates fail\n";
  return 2;
}

Cli parse(int argc, char** argv) {
  Cli c;
  if (argc < 2) throw std::runtime_error("missing command");
  c.cmd = argv[1];
  for (int i = 2; i < argc; ++i) {
    const std::string a = argv[i];
    auto need = [&](const char* what) -> std::string {
      if (i + 1 >= argc) throw std::runtime_error(std::string(what) + " needs a value");
      return argv[++i];
    };
    if (a == "--config") c.ps.load_file(need("--config"));
    else if (a == "--set") c.ps.set_line(need("--set"));
    else if (a == "--work") c.work = need("--work");
    else if (a == "--out") c.out = need("--out");
    else if (a == "--check") c.check = true;
    else if (a.rfind("--", 0) == 0) c.opt[a.substr(2)] = need(a.c_str());
    else throw std::runtime_error("unexpected argument: " + a);
  }
  if (c.out.empty()) c.out = (fs::path(c.work) / "reports").string();
  fs::create_directories(c.out);
  return c;
}

void print_errors(const char* label, const ErrorReport& e) {
  std::printf("  %-22s big %6.2f%%   c %6.2f%%   left %6.2f%%   (n=%d)\n", label, e.big,
              e.c, e.left, e.n);
}

// Single-trial gate set used by train-aan / eval.
std::vector<CheckResult> single_trial_checks(const TrialResult& r, bool with_reflex) {
  std::vector<TrialResult> one(1);
  one[0].p1_base_ff = r.p1_base_ff;
  one[0].base_ff = r.base_ff;
  one[0].base_fb = r.base_fb;
  one[0].nbyl_ff = r.nbyl_ff;
  one[0].nbyl_fb = r.nbyl_fb;
  ErrorReportSummary s;
  s.p1_base_ff = aggregate_errors(one, [](const TrialResult& t) { return t.p1_base_ff; });
  s.base_ff = aggregate_errors(one, [](const TrialResult& t) { return t.base_ff; });
  s.base_fb = aggregate_errors(one, [](const TrialResult& t) { return t.base_fb; });
  s.nbyl_ff = aggregate_errors(one, [](const TrialResult& t) { return t.nbyl_ff; });
  s.nbyl_fb = aggregate_errors(one, [](const TrialResult& t) { return t.nbyl_fb; });
  CheckGates g;
  std::vector<CheckResult> out;
  if (with_reflex) out.push_back(check_reflex_learning(s, g));
  out.push_back(check_probe_gap(s, g));
  out.push_back(check_no_false_alarms(s, g));
  return out;
}

int cmd_gen_data(Cli& c) {
  const auto kind_it = c.opt.find("kind");
  if (kind_it == c.opt.end()) throw std::runtime_error("gen-data needs --kind");
  const DatasetKind kind = dataset_kind_from_string(kind_it->second);
  int k = -1;
  if (auto it = c.opt.find("k"); it != c.opt.end()) k = std::stoi(it->second);
  const std::uint64_t seed =
      static_cast<std::uint64_t>(c.ps.get_int("data.seed", 101));
  DatasetManifest m = generate_dataset(kind, seed, k);
  std::string name = to_string(kind);
  if (kind == DatasetKind::aan_train_outliers) name += "_k" + std::to_string(m.outliers_per_kind);
  std::string dir = (fs::path(c.work) / "datasets" / name).string();
  if (auto it = c.opt.find("dir"); it != c.opt.end()) dir = it->second;
  write_dataset(dir, m);
  std::printf("wrote %zu images + manifest.jsonl to %s\n", m.entries.size(), dir.c_str());
  return 0;
}

int cmd_train_reservoir(Cli& c) {
  Pipeline pipe(PipelineConfig::from(c.ps, c.work));
  ReservoirModel& model = pipe.reservoir();
  const HeadAccuracy acc = pipe.holdout_head_accuracy();
  std::printf("reservoir: %s\n", pipe.reservoir_path().c_str());
  std::printf("checksum:  %016llx\n",
              static_cast<unsigned long long>(reservoir_checksum(model)));
  std::printf("held-out head accuracy: class %.2f%%  left %.2f%%\n", 100.0 * acc.class_acc,
              100.0 * acc.left_acc);
  if (c.check && (acc.class_acc < 0.9 || acc.left_acc < 0.95)) {
    std::printf("[FAIL] front end below par (need class>=90%%, left>=95%%)\n");
    return 1;
  }
  return 0;
}

int cmd_extract_features(Cli& c) {
  const auto kind_it = c.opt.find("kind");
  if (kind_it == c.opt.end()) throw std::runtime_error("extract-features needs --kind");
  const DatasetKind kind = dataset_kind_from_string(kind_it->second);
  int k = -1;
  if (auto it = c.opt.find("k"); it != c.opt.end()) k = std::stoi(it->second);
  Pipeline pipe(PipelineConfig::from(c.ps, c.work));
  const FeatureSet& fsr = pipe.features(kind, k);
  std::printf("features: %d images x %d values\n", fsr.n(),
              static_cast<int>(fsr.X.cols()));
  return 0;
}

TrialResult train_once(Cli& c, Pipeline& pipe, bool keep_net) {
  TrialRequest req;
  req.cfg = AanConfig::from(c.ps);
  req.sched = TrainingSchedule::from(c.ps);
  req.keep_net = keep_net;
  const FeatureSet& train = pipe.features(DatasetKind::aan_train);
  const FeatureSet& base = pipe.features(DatasetKind::baseline_test);
  const FeatureSet& nbyl = pipe.features(DatasetKind::nbyl_test);
  std::fprintf(stderr, "[train] seed %llu depth %d conjecture %s\n",
               static_cast<unsigned long long>(req.cfg.seed), req.cfg.depth,
               to_string(req.cfg.conjecture));
  return run_trial(train, base, nbyl, req);
}

int cmd_train_aan(Cli& c) {
  Pipeline pipe(PipelineConfig::from(c.ps, c.work));
  TrialResult r = train_once(c, pipe, true);
  std::string snap = (fs::path(c.out) / "network.aans").string();
  if (auto it = c.opt.find("snapshot"); it != c.opt.end()) snap = it->second;
  save_aan(snap, *r.net);
  std::printf("snapshot: %s\n", snap.c_str());
  std::printf("trigger error rates:\n");
  print_errors("baseline ff (reflex)", r.p1_base_ff);
  print_errors("baseline ff", r.base_ff);
  print_errors("baseline fb", r.base_fb);
  print_errors("rule-probe ff", r.nbyl_ff);
  print_errors("rule-probe fb", r.nbyl_fb);
  if (c.check) return report_checks(single_trial_checks(r, true), std::cout) ? 1 : 0;
  return 0;
}

int cmd_eval(Cli& c) {
  const auto it = c.opt.find("snapshot");
  if (it == c.opt.end()) throw std::runtime_error("eval needs --snapshot");
  AanNetwork net = load_aan(it->second);
  Pipeline pipe(PipelineConfig::from(c.ps, c.work));
  TrialResult r;
  r.base_ff = evaluate_errors(net, pipe.features(DatasetKind::baseline_test),
                              EvalMode::feedforward, false);
  r.base_fb = evaluate_errors(net, pipe.features(DatasetKind::baseline_test),
                              EvalMode::feedback, false);
  r.nbyl_ff =
      evaluate_errors(net, pipe.features(DatasetKind::nbyl_test), EvalMode::feedforward, true);
  r.nbyl_fb =
      evaluate_errors(net, pipe.features(DatasetKind::nbyl_test), EvalMode::feedback, true);
  std::printf("trigger error rates (%s):\n", it->second.c_str());
  print_errors("baseline ff", r.base_ff);
  print_errors("baseline fb", r.base_fb);
  print_errors("rule-probe ff", r.nbyl_ff);
  print_errors("rule-probe fb", r.nbyl_fb);
  if (c.check) return report_checks(single_trial_checks(r, false), std::cout) ? 1 : 0;
  return 0;
}

int cmd_histograms(Cli& c) {
  Pipeline pipe(PipelineConfig::from(c.ps, c.work));
  AanNetwork net = [&] {
    if (auto it = c.opt.find("snapshot"); it != c.opt.end()) return load_aan(it->second);
    TrialResult r = train_once(c, pipe, true);
    return std::move(*r.net);
  }();
  write_histogram_report(c.out, "baseline",
                         collect_histograms(net, pipe.features(DatasetKind::baseline_test)));
  write_histogram_report(c.out, "rule_probe",
                         collect_histograms(net, pipe.features(DatasetKind::nbyl_test)));
  std::printf("wrote histograms_baseline.{csv,svg}, histograms_rule_probe.{csv,svg} to %s\n",
              c.out.c_str());
  return 0;
}

int cmd_correlate(Cli& c) {
  Pipeline pipe(PipelineConfig::from(c.ps, c.work));
  const BatteryConfig bc = BatteryConfig::from(c.ps);
  TrialRequest req;
  req.cfg = AanConfig::from(c.ps);
  req.sched = TrainingSchedule::from(c.ps);
  req.want_correlation = true;
  auto rs = run_trials(pipe.features(DatasetKind::aan_train),
                       pipe.features(DatasetKind::baseline_test),
                       pipe.features(DatasetKind::nbyl_test), req, bc.trials);
  const ErrorReportSummary es = write_error_report(c.out, rs);
  const CorrelationSummary cs = write_correlation_report(c.out, rs);
  std::printf("correlations (mean over %d trials):\n", cs.trials);
  for (int z = 0; z < 3; ++z)
    std::printf("  %-7s image-by-image %.3f +- %.3f   category-mean %.3f\n",
                to_string(static_cast<Size>(z)), cs.img_r_mean[z].mean, cs.img_r_std[z].mean,
                cs.category_r[z].mean);
  if (c.check) {
    CheckGates g;
    std::vector<CheckResult> checks = {check_reflex_learning(es, g), check_probe_gap(es, g),
                                       check_no_false_alarms(es, g),
                                       check_imagination(cs, g)};
    return report_checks(checks, std::cout) ? 1 : 0;
  }
  return 0;
}

int cmd_relational(Cli& c) {
  Pipeline pipe(PipelineConfig::from(c.ps, c.work));
  const BatteryConfig bc = BatteryConfig::from(c.ps);
  const AanConfig base_cfg = AanConfig::from(c.ps);
  TrialRequest req;
  req.cfg = base_cfg;
  req.sched = TrainingSchedule::from(c.ps);
  req.want_discretization = true;
  const FeatureSet& train = pipe.features(DatasetKind::aan_train);
  const FeatureSet& base = pipe.features(DatasetKind::baseline_test);
  const FeatureSet& nbyl = pipe.features(DatasetKind::nbyl_test);
  auto yellow = run_trials(train, base, nbyl, req, bc.trials_relational);
  TrialRequest creq = req;
  creq.cfg.conjecture =
      base_cfg.conjecture == Color::magenta ? Color::yellow : Color::magenta;
  creq.cfg.seed += 500;
  auto control = run_trials(train, base, nbyl, creq, bc.trials_relational);
  const DiscretizationSummary ds = write_discretization_report(c.out, yellow, control);
  std::printf("wrote sharpening.csv and relational.csv to %s\n", c.out.c_str());
  if (c.check) {
    CheckGates g;
    std::vector<CheckResult> checks = {check_sharpening(ds, g), check_relation(ds, g)};
    return report_checks(checks, std::cout) ? 1 : 0;
  }
  return 0;
}

int cmd_sweep_outliers(Cli& c) {
  Pipeline pipe(PipelineConfig::from(c.ps, c.work));
  const BatteryConfig bc = BatteryConfig::from(c.ps);
  const SweepSummary s =
      run_outlier_sweep(pipe, AanConfig::from(c.ps), TrainingSchedule::from(c.ps), c.out,
                        bc.sweep_trials, nullptr);
  std::printf("%-5s %-12s %-10s %s\n", "k", "breakers%", "run%", "trials");
  for (const auto& p : s.points)
    std::printf("%-5d %-12.2f %-10.2f %d\n", p.k, p.outlier_fraction_pct, p.run_pct.mean,
                p.trials);
  if (c.check)
    return report_checks({check_outlier_band(s, CheckGates{})}, std::cout) ? 1 : 0;
  return 0;
}

int cmd_sweep_params(Cli& c) {
  Pipeline pipe(PipelineConfig::from(c.ps, c.work));
  const BatteryConfig bc = BatteryConfig::from(c.ps);
  const ParamSweepSummary s = run_param_sweep(pipe, c.ps, TrainingSchedule::from(c.ps),
                                              c.out, bc.params_trials, nullptr);
  std::printf("%-22s %-10s %-14s %s\n", "variant", "run%", "base fb err%", "trials");
  for (const auto& p : s.points)
    std::printf("%-22s %-10.2f %-14.2f %d\n", p.name.c_str(), p.run_pct.mean,
                p.base_fb_big.mean, p.trials);
  return 0;
}

int cmd_ablate(Cli& c) {
  Pipeline pipe(PipelineConfig::from(c.ps, c.work));
  const BatteryConfig bc = BatteryConfig::from(c.ps);
  const AblationSummary s = run_ablation(pipe, AanConfig::from(c.ps),
                                         TrainingSchedule::from(c.ps), c.out,
                                         bc.ablation_trials, nullptr);
  std::printf("%-7s %-20s %-20s %s\n", "depth", "probe fb big err%", "base fb big err%",
              "p vs next");
  for (const auto& r : s.rows)
    std::printf("%-7d %6.2f +- %-11.2f %6.2f +- %-11.2f %.3g\n", r.depth,
                r.nbyl_fb_big_err.mean, r.nbyl_fb_big_err.std, r.base_fb_big_err.mean,
                r.base_fb_big_err.std, r.p_vs_next);
  if (c.check) return report_checks({check_ablation(s, CheckGates{})}, std::cout) ? 1 : 0;
  return 0;
}

int cmd_learning_curves(Cli& c) {
  Pipeline pipe(PipelineConfig::from(c.ps, c.work));
  run_learning_curves(pipe, AanConfig::from(c.ps), c.out);
  std::printf("wrote learning_curves.{csv,svg} to %s\n", c.out.c_str());
  return 0;
}

int cmd_run_all(Cli& c) {
  Pipeline pipe(PipelineConfig::from(c.ps, c.work));
  const FullBattery fb = run_full_battery(pipe, c.ps, BatteryConfig::from(c.ps), c.out);
  const std::vector<CheckResult> checks = check_battery(fb);
  const int fails = report_checks(checks, std::cout);
  std::ofstream summary(fs::path(c.out) / "summary.txt");
  report_checks(checks, summary);
  std::printf("reports in %s\n", c.out.c_str());
  return c.check && fails ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    if (argc >= 2 && (std::string(argv[1]) == "--help" || std::string(argv[1]) == "-h"))
      return usage(std::cout), 0;
    Cli c = parse(argc, argv);
    if (c.cmd == "gen-data") return cmd_gen_data(c);
    if (c.cmd == "train-reservoir") return cmd_train_reservoir(c);
    if (c.cmd == "extract-features") return cmd_extract_features(c);
    if (c.cmd == "train-aan") return cmd_train_aan(c);
    if (c.cmd == "eval") return cmd_eval(c);
    if (c.cmd == "histograms") return cmd_histograms(c);
    if (c.cmd == "correlate") return cmd_correlate(c);
    if (c.cmd == "relational-stats") return cmd_relational(c);
    if (c.cmd == "sweep-outliers") return cmd_sweep_outliers(c);
    if (c.cmd == "sweep-params") return cmd_sweep_params(c);
    if (c.cmd == "ablate") return cmd_ablate(c);
    if (c.cmd == "learning-curves") return cmd_learning_curves(c);
    if (c.cmd == "run-all") return cmd_run_all(c);
    std::cerr << "unknown command: " << c.cmd << "\n";
    return usage(std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
