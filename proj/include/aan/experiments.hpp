#pragma once
// The experiment battery: repeated-trial training runs and the reports they
// produce (CSV tables plus SVG charts). Every driver writes into a reports
// directory and returns its aggregate numbers so the acceptance checks can
// interrogate them directly instead of re-parsing files.

#include "aan/harness.hpp"
#include "aan/pipeline.hpp"
#include "aan/svg.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace aan {

// --- one trial --------------------------------------------------------------

struct TrialRequest {
  AanConfig cfg;
  TrainingSchedule sched;
  bool want_discretization = false;
  bool want_correlation = false;
  bool want_histograms = false;
  bool keep_net = false;
};

struct TrialResult {
  ErrorReport p1_base_ff;  // reflex layer alone, straight after phase 1
  ErrorReport base_ff, base_fb, nbyl_ff, nbyl_fb;
  DiscretizationStats disc;
  CorrelationReport corr;
  std::vector<PoolHistogram> hist_base, hist_nbyl;
  std::optional<AanNetwork> net;
};

inline TrialResult run_trial(const FeatureSet& train, const FeatureSet& base,
                             const FeatureSet& nbyl, const TrialRequest& req) {
  AanNetwork net(req.cfg);
  TrialResult res;
  TrainCallback cb = [&](int phase, long long done) {
    if (phase == 2 && done == 0)
      res.p1_base_ff = evaluate_errors(net, base, EvalMode::feedforward, false);
  };
  train_aan(net, train, req.sched, cb);
  res.base_ff = evaluate_errors(net, base, EvalMode::feedforward, false);
  res.base_fb = evaluate_errors(net, base, EvalMode::feedback, false);
  res.nbyl_ff = evaluate_errors(net, nbyl, EvalMode::feedforward, true);
  res.nbyl_fb = evaluate_errors(net, nbyl, EvalMode::feedback, true);
  if (req.want_discretization) res.disc = collect_discretization(net, base, nbyl);
  if (req.want_correlation) res.corr = correlation_analysis(net, base);
  if (req.want_histograms) {
    res.hist_base = collect_histograms(net, base);
    res.hist_nbyl = collect_histograms(net, nbyl);
  }
  if (req.keep_net) res.net = std::move(net);
  return res;
}

// Same request repeated with consecutive seeds; the extras are only
// collected where asked (trial 0 carries the histograms).
inline std::vector<TrialResult> run_trials(const FeatureSet& train, const FeatureSet& base,
                                           const FeatureSet& nbyl, TrialRequest req,
                                           int ntrials, bool progress = true) {
  std::vector<TrialResult> out;
  const std::uint64_t seed0 = req.cfg.seed;
  for (int t = 0; t < ntrials; ++t) {
    TrialRequest r = req;
    r.cfg.seed = seed0 + static_cast<std::uint64_t>(t);
    r.want_histograms = req.want_histograms && t == 0;
    r.keep_net = req.keep_net && t == 0;
    if (progress)
      std::cerr << "[trial " << (t + 1) << "/" << ntrials << "] seed " << r.cfg.seed
                << " depth " << r.cfg.depth << " conjecture "
                << to_string(r.cfg.conjecture) << "\n";
    out.push_back(run_trial(train, base, nbyl, r));
  }
  return out;
}

// --- aggregation ------------------------------------------------------------

struct ErrorAggregate {
  MeanStd big, c, left;
  int trials = 0;
};

template <typename Pick>
inline ErrorAggregate aggregate_errors(const std::vector<TrialResult>& rs, Pick pick) {
  std::vector<double> b, c, l;
  for (const auto& r : rs) {
    const ErrorReport& e = pick(r);
    b.push_back(e.big);
    c.push_back(e.c);
    l.push_back(e.left);
  }
  return {mean_std(b), mean_std(c), mean_std(l), static_cast<int>(rs.size())};
}

// --- CSV helpers ------------------------------------------------------------

namespace csvdetail {

class Csv {
 public:
  Csv(const std::string& path, const std::string& header) : f_(path, std::ios::binary) {
    if (!f_) throw std::runtime_error("cannot write " + path);
    f_ << header << "\n";
  }
  void row(const std::string& line) { f_ << line << "\n"; }

 private:
  std::ofstream f_;
};

inline std::string num(double v, int prec = 4) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

}  // namespace csvdetail

// --- trigger-error report (baseline vs rule probes, ff vs fb) ---------------

struct ErrorReportSummary {
  ErrorAggregate p1_base_ff;
  ErrorAggregate base_ff, base_fb, nbyl_ff, nbyl_fb;
};

inline ErrorReportSummary write_error_report(const std::string& dir,
                                             const std::vector<TrialResult>& rs) {
  using csvdetail::Csv;
  using csvdetail::num;
  ErrorReportSummary s;
  s.p1_base_ff = aggregate_errors(rs, [](const TrialResult& r) { return r.p1_base_ff; });
  s.base_ff = aggregate_errors(rs, [](const TrialResult& r) { return r.base_ff; });
  s.base_fb = aggregate_errors(rs, [](const TrialResult& r) { return r.base_fb; });
  s.nbyl_ff = aggregate_errors(rs, [](const TrialResult& r) { return r.nbyl_ff; });
  s.nbyl_fb = aggregate_errors(rs, [](const TrialResult& r) { return r.nbyl_fb; });

  Csv csv((std::filesystem::path(dir) / "trigger_errors.csv").string(),
          "testset,mode,pool,error_mean_pct,error_std_pct,trials");
  auto rows = [&](const char* set, const char* mode, const ErrorAggregate& a) {
    csv.row(std::string(set) + "," + mode + ",big," + num(a.big.mean) + "," +
            num(a.big.std) + "," + std::to_string(a.trials));
    csv.row(std::string(set) + "," + mode + ",c," + num(a.c.mean) + "," + num(a.c.std) +
            "," + std::to_string(a.trials));
    csv.row(std::string(set) + "," + mode + ",left," + num(a.left.mean) + "," +
            num(a.left.std) + "," + std::to_string(a.trials));
  };
  rows("baseline", "reflex_only_ff", s.p1_base_ff);
  rows("baseline", "ff", s.base_ff);
  rows("baseline", "fb", s.base_fb);
  rows("rule_probe", "ff", s.nbyl_ff);
  rows("rule_probe", "fb", s.nbyl_fb);

  std::vector<std::string> cats = {"base ff", "base fb", "probe ff", "probe fb"};
  std::vector<svg::BarGroup> groups(3);
  groups[0] = {"big", {s.base_ff.big.mean, s.base_fb.big.mean, s.nbyl_ff.big.mean, s.nbyl_fb.big.mean}};
  groups[1] = {"c", {s.base_ff.c.mean, s.base_fb.c.mean, s.nbyl_ff.c.mean, s.nbyl_fb.c.mean}};
  groups[2] = {"left", {s.base_ff.left.mean, s.base_fb.left.mean, s.nbyl_ff.left.mean, s.nbyl_fb.left.mean}};
  svg::write_bar_chart((std::filesystem::path(dir) / "trigger_errors.svg").string(),
                       "Trigger error rates", cats, groups, "error %");
  return s;
}

// --- histogram report -------------------------------------------------------

inline void write_histogram_report(const std::string& dir, const std::string& tag,
                                   const std::vector<PoolHistogram>& hists) {
  using csvdetail::Csv;
  using csvdetail::num;
  Csv csv((std::filesystem::path(dir) / ("histograms_" + tag + ".csv")).string(),
          "pool,category,bin_lo,bin_hi,count");
  for (const auto& ph : hists) {
    const double w = (ph.hist.hi - ph.hist.lo) / ph.hist.bins.size();
    for (std::size_t b = 0; b < ph.hist.bins.size(); ++b) {
      csv.row(ph.pool + "," + ph.category + "," + num(ph.hist.lo + w * b) + "," +
              num(ph.hist.lo + w * (b + 1)) + "," + std::to_string(ph.hist.bins[b]));
    }
  }
  // panels: one per pool, traces = categories
  std::vector<svg::HistPanel> panels;
  for (const auto& ph : hists) {
    svg::HistPanel* panel = nullptr;
    for (auto& p : panels)
      if (p.title == ph.pool) panel = &p;
    if (!panel) {
      panels.push_back({ph.pool, {}});
      panel = &panels.back();
    }
    panel->traces.emplace_back(ph.category, &ph.hist);
  }
  svg::write_histogram_grid((std::filesystem::path(dir) / ("histograms_" + tag + ".svg")).string(),
                            "Mean pool activation per image (" + tag + ")", panels);
}

// --- correlation report -----------------------------------------------------

struct CorrelationSummary {
  // indexed by size class; means over trials
  std::array<MeanStd, 3> img_r_mean;   // of the per-trial image-by-image means
  std::array<MeanStd, 3> img_r_std;    // of the per-trial spreads
  std::array<MeanStd, 3> category_r;
  int excluded_total = 0;
  int trials = 0;
};

inline CorrelationSummary write_correlation_report(const std::string& dir,
                                                   const std::vector<TrialResult>& rs) {
  using csvdetail::Csv;
  using csvdetail::num;
  CorrelationSummary s;
  std::array<std::vector<double>, 3> im, is, cr;
  Csv per((std::filesystem::path(dir) / "correlations_per_trial.csv").string(),
          "trial,size,image_r_mean,image_r_std,category_r,excluded_images");
  for (std::size_t t = 0; t < rs.size(); ++t) {
    if (rs[t].corr.rows.empty()) continue;
    ++s.trials;
    for (int z = 0; z < 3; ++z) {
      const auto& row = rs[t].corr.rows[z];
      im[z].push_back(row.img_r_mean);
      is[z].push_back(row.img_r_std);
      cr[z].push_back(row.category_r);
      s.excluded_total += row.excluded;
      per.row(std::to_string(t) + "," + row.size + "," + num(row.img_r_mean) + "," +
              num(row.img_r_std) + "," + num(row.category_r) + "," +
              std::to_string(row.excluded));
    }
  }
  Csv csv((std::filesystem::path(dir) / "correlations.csv").string(),
          "size,image_r_mean,image_r_mean_std,image_r_std_mean,category_r_mean,"
          "category_r_std,trials");
  for (int z = 0; z < 3; ++z) {
    s.img_r_mean[z] = mean_std(im[z]);
    s.img_r_std[z] = mean_std(is[z]);
    s.category_r[z] = mean_std(cr[z]);
    csv.row(std::string(to_string(static_cast<Size>(z))) + "," + num(s.img_r_mean[z].mean) +
            "," + num(s.img_r_mean[z].std) + "," + num(s.img_r_std[z].mean) + "," +
            num(s.category_r[z].mean) + "," + num(s.category_r[z].std) + "," +
            std::to_string(s.trials));
  }
  return s;
}

// --- discretization report (chain sharpening + relational pools) ------------

struct DiscretizationSummary {
  // key -> aggregated cell; keys look like "big/2/base_high"
  std::vector<std::pair<std::string, MeanStd>> sharpening;
  std::vector<std::pair<std::string, MeanStd>> relational;
};

inline DiscretizationSummary write_discretization_report(
    const std::string& dir, const std::vector<TrialResult>& yellow,
    const std::vector<TrialResult>& control) {
  using csvdetail::Csv;
  using csvdetail::num;
  DiscretizationSummary s;

  // sharpening: aggregate over yellow trials, row order as produced
  Csv sc((std::filesystem::path(dir) / "sharpening.csv").string(),
         "feature,layer,base_false_low_mean,base_false_low_std,base_true_high_mean,"
         "base_true_high_std,probe_mean,probe_std,trials");
  if (!yellow.empty() && !yellow[0].disc.sharpening.empty()) {
    const std::size_t nrows = yellow[0].disc.sharpening.size();
    for (std::size_t i = 0; i < nrows; ++i) {
      std::vector<double> lo, hi, pr;
      for (const auto& t : yellow) {
        lo.push_back(t.disc.sharpening[i].base_low);
        hi.push_back(t.disc.sharpening[i].base_high);
        pr.push_back(t.disc.sharpening[i].probe);
      }
      const auto& row0 = yellow[0].disc.sharpening[i];
      const MeanStd mlo = mean_std(lo), mhi = mean_std(hi), mpr = mean_std(pr);
      sc.row(row0.feature + "," + std::to_string(row0.layer) + "," + num(mlo.mean) + "," +
             num(mlo.std) + "," + num(mhi.mean) + "," + num(mhi.std) + "," + num(mpr.mean) +
             "," + num(mpr.std) + "," + std::to_string(yellow.size()));
      const std::string key = row0.feature + "/" + std::to_string(row0.layer);
      s.sharpening.emplace_back(key + "/base_low", mlo);
      s.sharpening.emplace_back(key + "/base_high", mhi);
      s.sharpening.emplace_back(key + "/probe", mpr);
    }
  }

  // relational: both color variants side by side
  Csv rc((std::filesystem::path(dir) / "relational.csv").string(),
         "conjecture,pool,base_false_low_mean,base_false_low_std,base_true_high_mean,"
         "base_true_high_std,probe_mean,probe_std,trials");
  auto rel_rows = [&](const char* label, const std::vector<TrialResult>& rs) {
    if (rs.empty() || rs[0].disc.relational.empty()) return;
    for (std::size_t i = 0; i < rs[0].disc.relational.size(); ++i) {
      std::vector<double> lo, hi, pr;
      for (const auto& t : rs) {
        lo.push_back(t.disc.relational[i].base_low);
        hi.push_back(t.disc.relational[i].base_high);
        pr.push_back(t.disc.relational[i].probe);
      }
      const auto& row0 = rs[0].disc.relational[i];
      const MeanStd mlo = mean_std(lo), mhi = mean_std(hi), mpr = mean_std(pr);
      rc.row(std::string(label) + "," + row0.pool + "," + num(mlo.mean) + "," +
             num(mlo.std) + "," + num(mhi.mean) + "," + num(mhi.std) + "," +
             num(mpr.mean) + "," + num(mpr.std) + "," + std::to_string(rs.size()));
      s.relational.emplace_back(std::string(label) + "/" + row0.pool + "/base_low", mlo);
      s.relational.emplace_back(std::string(label) + "/" + row0.pool + "/base_high", mhi);
      s.relational.emplace_back(std::string(label) + "/" + row0.pool + "/probe", mpr);
    }
  };
  rel_rows("trained_color", yellow);
  rel_rows("control_color", control);
  return s;
}

// --- outlier sweep ----------------------------------------------------------

struct SweepPoint {
  int k = 0;
  double outlier_fraction_pct = 0.0;  // share of rule breakers in the set
  MeanStd run_pct;                    // probe set, feedback evaluation
  MeanStd recog_big, recog_c, recog_left;  // feed-forward recognition, probes
  int trials = 0;
};

struct SweepSummary {
  std::vector<SweepPoint> points;
};

inline SweepSummary run_outlier_sweep(Pipeline& pipe, const AanConfig& base_cfg,
                                      const TrainingSchedule& sched,
                                      const std::string& dir, int trials_per_k,
                                      const std::vector<TrialResult>* reuse_k7) {
  using csvdetail::Csv;
  using csvdetail::num;
  SweepSummary s;
  const FeatureSet& baseline = pipe.features(DatasetKind::baseline_test);
  const FeatureSet& nbyl = pipe.features(DatasetKind::nbyl_test);
  for (int k : kValidOutlierCounts) {
    SweepPoint pt;
    pt.k = k;
    pt.outlier_fraction_pct = 100.0 * 6.0 * k / (2700.0 + 6.0 * k);
    std::vector<double> run, rb, rc2, rl;
    auto absorb = [&](const TrialResult& r) {
      run.push_back(100.0 - r.nbyl_fb.big);  // probes where the agent acted
      // Feed-forward recognition of what is actually in the image: probes are
      // never big, so agreeing with ground truth there means NOT triggering --
      // which is exactly the error rate against the act-target.
      rb.push_back(r.nbyl_ff.big);
      rc2.push_back(100.0 - r.nbyl_ff.c);
      rl.push_back(100.0 - r.nbyl_ff.left);
    };
    if (k == 7 && reuse_k7) {
      for (const auto& r : *reuse_k7) absorb(r);
    } else {
      std::cerr << "[sweep] k=" << k << " (" << num(pt.outlier_fraction_pct, 1)
                << "% rule breakers)\n";
      FeatureSet train = pipe.outlier_features(k);
      TrialRequest req;
      req.cfg = base_cfg;
      req.cfg.seed = base_cfg.seed + 100 + static_cast<std::uint64_t>(k) * 1000;
      req.sched = sched;
      for (const auto& r : run_trials(train, baseline, nbyl, req, trials_per_k, false))
        absorb(r);
    }
    pt.run_pct = mean_std(run);
    pt.recog_big = mean_std(rb);
    pt.recog_c = mean_std(rc2);
    pt.recog_left = mean_std(rl);
    pt.trials = static_cast<int>(run.size());
    s.points.push_back(pt);
  }

  Csv csv((std::filesystem::path(dir) / "outlier_sweep.csv").string(),
          "k,outlier_fraction_pct,run_pct_mean,run_pct_std,ff_recog_big_pct,"
          "ff_recog_c_pct,ff_recog_left_pct,trials");
  svg::Series run_series{"run % (fb)", {}, {}};
  for (const auto& pt : s.points) {
    csv.row(std::to_string(pt.k) + "," + num(pt.outlier_fraction_pct, 2) + "," +
            num(pt.run_pct.mean) + "," + num(pt.run_pct.std) + "," +
            num(pt.recog_big.mean) + "," + num(pt.recog_c.mean) + "," +
            num(pt.recog_left.mean) + "," + std::to_string(pt.trials));
    run_series.x.push_back(pt.outlier_fraction_pct);
    run_series.y.push_back(pt.run_pct.mean);
  }
  svg::write_line_chart((std::filesystem::path(dir) / "outlier_sweep.svg").string(),
                        "Acting on rule probes vs rule-breaker share",
                        "rule breakers in training set (%)", "probes acted on (%)",
                        {run_series});
  return s;
}

// --- parameter sweep --------------------------------------------------------

struct ParamVariant {
  std::string name;
  std::vector<std::pair<std::string, std::string>> overrides;
};

inline std::vector<ParamVariant> default_param_variants() {
  return {
      {"default", {}},
      {"chain_mu_x2", {{"aa.mu0.layer123", "10"}}},
      {"chain_mu_half", {{"aa.mu0.layer123", "2.5"}}},
      {"and_mu_x2", {{"aa.mu0.and1", "0.1"}, {"aa.mu0.and2", "0.05"}}},
      {"and_mu_half", {{"aa.mu0.and1", "0.025"}, {"aa.mu0.and2", "0.0125"}}},
      {"fb_mu_x2", {{"hebb.mu0", "2"}}},
      {"fb_mu_half", {{"hebb.mu0", "0.5"}}},
      {"theta_layer1_0.995", {{"anneal.layer1.theta", "0.995"}}},
      {"theta_rest_0.99", {{"anneal.rest.theta", "0.99"}, {"bal.theta", "0.99"}}},
      {"theta_all_0.9",
       {{"anneal.layer1.theta", "0.9"}, {"anneal.rest.theta", "0.9"}, {"bal.theta", "0.9"}}},
      {"anneal_c_0.1_all", {{"anneal.layer1.c", "0.1"}, {"hebb.c", "0.1"}}},
      {"anneal_c_0.9_all", {{"anneal.rest.c", "0.9"}, {"bal.c", "0.9"}}},
      {"anneal_c_0.99_all",
       {{"anneal.layer1.c", "0.99"}, {"anneal.rest.c", "0.99"}, {"bal.c", "0.99"},
        {"hebb.c", "0.99"}}},
  };
}

struct ParamPoint {
  std::string name;
  MeanStd run_pct;       // probes acted on, fb evaluation
  MeanStd base_fb_big;   // false alarms stay visible
  int trials = 0;
};

struct ParamSweepSummary {
  std::vector<ParamPoint> points;
};

inline ParamSweepSummary run_param_sweep(Pipeline& pipe, const ParamSet& base_ps,
                                         const TrainingSchedule& sched,
                                         const std::string& dir, int trials_per_set,
                                         const std::vector<TrialResult>* reuse_default) {
  using csvdetail::Csv;
  using csvdetail::num;
  ParamSweepSummary s;
  const FeatureSet& train = pipe.features(DatasetKind::aan_train);
  const FeatureSet& baseline = pipe.features(DatasetKind::baseline_test);
  const FeatureSet& nbyl = pipe.features(DatasetKind::nbyl_test);
  for (const auto& var : default_param_variants()) {
    ParamPoint pt;
    pt.name = var.name;
    std::vector<double> run, fa;
    if (var.name == "default" && reuse_default) {
      for (const auto& r : *reuse_default) {
        run.push_back(100.0 - r.nbyl_fb.big);
        fa.push_back(r.base_fb.big);
      }
    } else {
      std::cerr << "[params] " << var.name << "\n";
      ParamSet ps = base_ps;
      for (const auto& [k, v] : var.overrides) ps.set(k, v);
      TrialRequest req;
      req.cfg = AanConfig::from(ps);
      req.cfg.seed += 5000;
      req.sched = sched;
      for (const auto& r : run_trials(train, baseline, nbyl, req, trials_per_set, false)) {
        run.push_back(100.0 - r.nbyl_fb.big);
        fa.push_back(r.base_fb.big);
      }
    }
    pt.run_pct = mean_std(run);
    pt.base_fb_big = mean_std(fa);
    pt.trials = static_cast<int>(run.size());
    s.points.push_back(pt);
  }

  Csv csv((std::filesystem::path(dir) / "param_sweep.csv").string(),
          "variant,run_pct_mean,run_pct_std,base_fb_big_err_mean,base_fb_big_err_std,trials");
  std::vector<std::string> cats;
  svg::BarGroup bars{"run % (fb)", {}};
  for (const auto& pt : s.points) {
    csv.row(pt.name + "," + num(pt.run_pct.mean) + "," + num(pt.run_pct.std) + "," +
            num(pt.base_fb_big.mean) + "," + num(pt.base_fb_big.std) + "," +
            std::to_string(pt.trials));
    cats.push_back(pt.name);
    bars.values.push_back(pt.run_pct.mean);
  }
  svg::write_bar_chart((std::filesystem::path(dir) / "param_sweep.svg").string(),
                       "Rule-probe activity under parameter variations", cats, {bars},
                       "probes acted on (%)", 980, 420);
  return s;
}

// --- depth ablation ---------------------------------------------------------

struct AblationRow {
  int depth = 0;
  MeanStd nbyl_fb_big_err;   // missing the required action on probes
  MeanStd base_fb_big_err;
  int trials = 0;
  double p_vs_next = 1.0;    // Welch test against depth+1 (1.0 on last row)
  std::vector<double> probe_errs;  // per-trial values, for further tests
};

struct AblationSummary {
  std::vector<AblationRow> rows;  // depth 0..3
};

inline AblationSummary run_ablation(Pipeline& pipe, const AanConfig& base_cfg,
                                    const TrainingSchedule& sched, const std::string& dir,
                                    int trials_per_depth,
                                    const std::vector<TrialResult>* reuse_d3) {
  using csvdetail::Csv;
  using csvdetail::num;
  const FeatureSet& train = pipe.features(DatasetKind::aan_train);
  const FeatureSet& baseline = pipe.features(DatasetKind::baseline_test);
  const FeatureSet& nbyl = pipe.features(DatasetKind::nbyl_test);

  std::vector<std::vector<double>> probe_err(4), base_err(4);
  for (int d = 0; d <= 3; ++d) {
    if (d == 3 && reuse_d3) {
      for (const auto& r : *reuse_d3) {
        probe_err[d].push_back(r.nbyl_fb.big);
        base_err[d].push_back(r.base_fb.big);
      }
      continue;
    }
    std::cerr << "[ablation] depth " << d << "\n";
    TrialRequest req;
    req.cfg = base_cfg;
    req.cfg.depth = d;
    req.cfg.seed = base_cfg.seed + 9000 + static_cast<std::uint64_t>(d) * 100;
    req.sched = sched;
    for (const auto& r : run_trials(train, baseline, nbyl, req, trials_per_depth, false)) {
      probe_err[d].push_back(r.nbyl_fb.big);
      base_err[d].push_back(r.base_fb.big);
    }
  }

  AblationSummary s;
  Csv csv((std::filesystem::path(dir) / "ablation.csv").string(),
          "depth,probe_fb_big_err_mean,probe_fb_big_err_std,base_fb_big_err_mean,"
          "base_fb_big_err_std,trials,welch_p_vs_next_depth");
  for (int d = 0; d <= 3; ++d) {
    AblationRow row;
    row.depth = d;
    row.nbyl_fb_big_err = mean_std(probe_err[d]);
    row.base_fb_big_err = mean_std(base_err[d]);
    row.trials = static_cast<int>(probe_err[d].size());
    row.p_vs_next = d < 3 ? welch_t_test(probe_err[d], probe_err[d + 1]).p : 1.0;
    row.probe_errs = probe_err[d];
    csv.row(std::to_string(d) + "," + num(row.nbyl_fb_big_err.mean) + "," +
            num(row.nbyl_fb_big_err.std) + "," + num(row.base_fb_big_err.mean) + "," +
            num(row.base_fb_big_err.std) + "," + std::to_string(row.trials) + "," +
            num(row.p_vs_next, 6));
    s.rows.push_back(row);
  }

  std::vector<std::string> cats = {"0", "1", "2", "3"};
  svg::BarGroup g{"probe fb big error %", {}};
  for (const auto& r : s.rows) g.values.push_back(r.nbyl_fb_big_err.mean);
  svg::write_bar_chart((std::filesystem::path(dir) / "ablation.svg").string(),
                       "Missing the rule-implied action vs chain depth", cats, {g},
                       "error %");
  return s;
}

// --- learning curves --------------------------------------------------------

struct CurvePoint {
  int phase = 1;
  double pct = 0.0;          // of one pass over the training set
  long long presentations = 0;
  ErrorReport base_ff;
  ErrorReport probe_fb;      // phase 2 only (feedback needs the whole net)
};

struct LearningCurves {
  std::vector<CurvePoint> points;
};

inline LearningCurves run_learning_curves(Pipeline& pipe, const AanConfig& cfg,
                                          const std::string& dir) {
  using csvdetail::Csv;
  using csvdetail::num;
  const FeatureSet& train = pipe.features(DatasetKind::aan_train);
  const FeatureSet& baseline = pipe.features(DatasetKind::baseline_test);
  const FeatureSet& nbyl = pipe.features(DatasetKind::nbyl_test);
  const long long N = train.n();

  const double pcts[] = {0, 20, 40, 60, 80, 100, 200, 300, 400, 500};
  std::vector<long long> marks;
  for (double p : pcts) marks.push_back(static_cast<long long>(p / 100.0 * N + 0.5));

  LearningCurves curves;
  auto at_mark = [&](long long done) {
    for (long long m : marks)
      if (m == done) return true;
    return false;
  };

  // Phase-1 curve: reflex acquisition over five passes.
  {
    std::cerr << "[curves] reflex phase\n";
    AanNetwork net(cfg);
    TrainingSchedule sched;
    sched.ico_passes = 5;
    sched.presentations = 0;
    TrainCallback cb = [&](int phase, long long done) {
      if (phase != 1 || !at_mark(done)) return;
      CurvePoint pt;
      pt.phase = 1;
      pt.presentations = done;
      pt.pct = 100.0 * done / N;
      pt.base_ff = evaluate_errors(net, baseline, EvalMode::feedforward, false);
      curves.points.push_back(pt);
    };
    train_aan(net, train, sched, cb);
  }

  // Phase-2 curve on a fresh net: the standard single reflex pass, then the
  // unsupervised stage with evaluations along the way.
  {
    std::cerr << "[curves] association phase\n";
    AanConfig c2 = cfg;
    c2.seed += 1;
    AanNetwork net(c2);
    TrainingSchedule sched;
    sched.ico_passes = 1;
    sched.presentations = 5 * N;
    TrainCallback cb = [&](int phase, long long done) {
      if (phase != 2 || !at_mark(done)) return;
      CurvePoint pt;
      pt.phase = 2;
      pt.presentations = done;
      pt.pct = 100.0 * done / N;
      pt.base_ff = evaluate_errors(net, baseline, EvalMode::feedforward, false);
      pt.probe_fb = evaluate_errors(net, nbyl, EvalMode::feedback, true);
      curves.points.push_back(pt);
    };
    train_aan(net, train, sched, cb);
  }

  Csv csv((std::filesystem::path(dir) / "learning_curves.csv").string(),
          "phase,pct_of_pass,presentations,base_ff_big_err,base_ff_c_err,"
          "base_ff_left_err,probe_fb_big_err");
  svg::Series s1{"reflex: base big err (ff)", {}, {}};
  svg::Series s2{"assoc: base big err (ff)", {}, {}};
  svg::Series s3{"assoc: probe big err (fb)", {}, {}};
  for (const auto& pt : curves.points) {
    csv.row(std::to_string(pt.phase) + "," + num(pt.pct, 1) + "," +
            std::to_string(pt.presentations) + "," + num(pt.base_ff.big) + "," +
            num(pt.base_ff.c) + "," + num(pt.base_ff.left) + "," +
            (pt.phase == 2 ? num(pt.probe_fb.big) : std::string("")));
    if (pt.phase == 1) {
      s1.x.push_back(pt.pct);
      s1.y.push_back(pt.base_ff.big);
    } else {
      s2.x.push_back(pt.pct);
      s2.y.push_back(pt.base_ff.big);
      s3.x.push_back(pt.pct);
      s3.y.push_back(pt.probe_fb.big);
    }
  }
  svg::write_line_chart((std::filesystem::path(dir) / "learning_curves.svg").string(),
                        "Error rates over training", "presentations (% of one pass)",
                        "error %", {s1, s2, s3});
  return curves;
}

// --- the whole battery ------------------------------------------------------

struct BatteryConfig {
  int trials = 10;              // error/correlation aggregates
  int trials_relational = 20;   // discretization tables, both colors
  int sweep_trials = 5;         // per outlier count
  int params_trials = 3;        // per parameter variant
  int ablation_trials = 10;     // per depth
  bool with_sweep = true;
  bool with_params = true;
  bool with_ablation = true;
  bool with_curves = true;

  static BatteryConfig from(const ParamSet& ps) {
    BatteryConfig c;
    c.trials = static_cast<int>(ps.get_int("experiment.trials", c.trials));
    c.trials_relational =
        static_cast<int>(ps.get_int("experiment.trials_relational", c.trials_relational));
    c.sweep_trials = static_cast<int>(ps.get_int("sweep.trials", c.sweep_trials));
    c.params_trials = static_cast<int>(ps.get_int("params.trials", c.params_trials));
    c.ablation_trials = static_cast<int>(ps.get_int("ablation.trials", c.ablation_trials));
    return c;
  }
};

struct FullBattery {
  ErrorReportSummary errors;       // first `trials` conjecture-color runs
  CorrelationSummary corr;
  DiscretizationSummary disc;      // both colors, `trials_relational` runs
  SweepSummary sweep;
  ParamSweepSummary params;
  AblationSummary ablation;
  LearningCurves curves;
};

// Trains everything the reports need, sharing trials where the protocols
// coincide: the conjecture-color runs double as the sweep's k=7 point, the
// parameter sweep's default column, and the ablation's full-depth group.
inline FullBattery run_full_battery(Pipeline& pipe, const ParamSet& ps,
                                    const BatteryConfig& bc, const std::string& dir) {
  std::filesystem::create_directories(dir);
  FullBattery fb;
  const AanConfig base_cfg = AanConfig::from(ps);
  const TrainingSchedule sched = TrainingSchedule::from(ps);
  const FeatureSet& train = pipe.features(DatasetKind::aan_train);
  const FeatureSet& baseline = pipe.features(DatasetKind::baseline_test);
  const FeatureSet& nbyl = pipe.features(DatasetKind::nbyl_test);

  const int n_yellow = std::max(bc.trials, bc.trials_relational);
  std::cerr << "[battery] " << n_yellow << " conjecture-color trials\n";
  TrialRequest req;
  req.cfg = base_cfg;
  req.sched = sched;
  req.want_discretization = true;
  req.want_correlation = true;
  req.want_histograms = true;
  std::vector<TrialResult> yellow = run_trials(train, baseline, nbyl, req, n_yellow);

  std::cerr << "[battery] " << bc.trials_relational << " control-color trials\n";
  TrialRequest creq;
  creq.cfg = base_cfg;
  creq.cfg.conjecture = base_cfg.conjecture == Color::magenta ? Color::yellow : Color::magenta;
  creq.cfg.seed = base_cfg.seed + 500;
  creq.sched = sched;
  creq.want_discretization = true;
  std::vector<TrialResult> control =
      run_trials(train, baseline, nbyl, creq, bc.trials_relational);

  std::vector<TrialResult> head(yellow.begin(),
                                yellow.begin() + std::min<std::size_t>(bc.trials, yellow.size()));
  std::vector<TrialResult> rel(yellow.begin(),
                               yellow.begin() +
                                   std::min<std::size_t>(bc.trials_relational, yellow.size()));
  fb.errors = write_error_report(dir, head);
  fb.corr = write_correlation_report(dir, head);
  fb.disc = write_discretization_report(dir, rel, control);
  write_histogram_report(dir, "baseline", yellow[0].hist_base);
  write_histogram_report(dir, "rule_probe", yellow[0].hist_nbyl);

  if (bc.with_sweep) {
    std::cerr << "[battery] outlier sweep\n";
    fb.sweep = run_outlier_sweep(pipe, base_cfg, sched, dir, bc.sweep_trials, &head);
  }
  if (bc.with_params) {
    std::cerr << "[battery] parameter sweep\n";
    fb.params = run_param_sweep(pipe, ps, sched, dir, bc.params_trials, &head);
  }
  if (bc.with_ablation) {
    std::cerr << "[battery] depth ablation\n";
    fb.ablation = run_ablation(pipe, base_cfg, sched, dir, bc.ablation_trials, &head);
  }
  if (bc.with_curves) {
    std::cerr << "[battery] learning curves\n";
    fb.curves = run_learning_curves(pipe, base_cfg, dir);
  }
  return fb;
}

}  // namespace aan
