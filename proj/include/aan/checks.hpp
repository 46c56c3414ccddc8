#pragma once
// Pass/fail predicates over the experiment aggregates. One place for the
// numeric gates so the command-line --check option and the acceptance test
// binary can never drift apart.

#include "aan/experiments.hpp"

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace aan {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// All gates in one struct so a test can pin them and a reader can see them.
struct CheckGates {
  double reflex_big_err_max = 5.0;    // reflex layer alone, baseline ff
  double probe_ff_err_min = 70.0;     // probes must NOT trigger feed-forward
  double probe_fb_err_max = 25.0;     // ...but must act once feedback ran
  double base_fb_err_max = 6.0;       // feedback must not cause false alarms
  double cat_r_big_min = 0.85;        // imagined-vs-real, category means
  double img_r_big_lo = 0.2;          // image-by-image band for big
  double img_r_big_hi = 0.7;
  double sharp_top_high_min = 95.0;   // chain tops discretize true images
  double rel_trained_high_min = 95.0; // relation pool fires for its rule...
  double rel_control_high_max = 40.0; // ...but not for an arbitrary color
  double abl_shallow_err_min = 45.0;  // depth 0 misses probes
  double abl_deep_err_max = 25.0;     // depth 3 acts on them
  double abl_p_max = 0.05;
};

namespace checkdetail {

inline std::string pct(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f%%", v);
  return buf;
}

inline std::string r3(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline const MeanStd* find_cell(const std::vector<std::pair<std::string, MeanStd>>& cells,
                                const std::string& key) {
  for (const auto& [k, v] : cells)
    if (k == key) return &v;
  return nullptr;
}

}  // namespace checkdetail

inline CheckResult check_reflex_learning(const ErrorReportSummary& e, const CheckGates& g) {
  using checkdetail::pct;
  const double v = e.p1_base_ff.big.mean;
  return {"reflex layer recognizes big after supervised phase", v <= g.reflex_big_err_max,
          "baseline ff big error " + pct(v) + " (limit " + pct(g.reflex_big_err_max) +
              ", " + std::to_string(e.p1_base_ff.trials) + " trials)"};
}

inline CheckResult check_probe_gap(const ErrorReportSummary& e, const CheckGates& g) {
  using checkdetail::pct;
  const double ff = e.nbyl_ff.big.mean, fbk = e.nbyl_fb.big.mean;
  const bool pass = ff >= g.probe_ff_err_min && fbk <= g.probe_fb_err_max;
  return {"rule probes act only once feedback runs", pass,
          "probe big miss ff " + pct(ff) + " (min " + pct(g.probe_ff_err_min) + "), fb " +
              pct(fbk) + " (max " + pct(g.probe_fb_err_max) + ")"};
}

inline CheckResult check_no_false_alarms(const ErrorReportSummary& e, const CheckGates& g) {
  using checkdetail::pct;
  const double v = e.base_fb.big.mean;
  return {"feedback does not corrupt baseline decisions", v <= g.base_fb_err_max,
          "baseline fb big error " + pct(v) + " (limit " + pct(g.base_fb_err_max) + ")"};
}

inline CheckResult check_imagination(const CorrelationSummary& c, const CheckGates& g) {
  using checkdetail::r3;
  const double cb = c.category_r[0].mean, cm = c.category_r[1].mean,
               cs = c.category_r[2].mean;
  const double ib = c.img_r_mean[0].mean;
  const bool pass = cb >= g.cat_r_big_min && cb > cm && cm > cs &&
                    ib >= g.img_r_big_lo && ib <= g.img_r_big_hi;
  return {"imagined features correlate with real big images", pass,
          "category r big/med/small " + r3(cb) + "/" + r3(cm) + "/" + r3(cs) +
              " (big min " + r3(g.cat_r_big_min) + ", ordered), image-by-image big " +
              r3(ib) + " in [" + r3(g.img_r_big_lo) + "," + r3(g.img_r_big_hi) + "]"};
}

inline CheckResult check_sharpening(const DiscretizationSummary& d, const CheckGates& g) {
  using checkdetail::find_cell;
  using checkdetail::pct;
  std::string detail;
  bool pass = true;
  for (const char* feat : {"big", "c", "left"}) {
    for (const char* col : {"base_low", "base_high"}) {
      for (int l = 1; l <= 2; ++l) {
        const auto* a = find_cell(d.sharpening, std::string(feat) + "/" +
                                                    std::to_string(l) + "/" + col);
        const auto* b = find_cell(d.sharpening, std::string(feat) + "/" +
                                                    std::to_string(l + 1) + "/" + col);
        if (!a || !b) { pass = false; detail += std::string(feat) + " rows missing; "; continue; }
        const double tol = std::sqrt((a->std * a->std + b->std * b->std) / 2.0);
        if (b->mean + tol < a->mean) {
          pass = false;
          detail += std::string(feat) + "/" + col + " drops " + std::to_string(l) + "->" +
                    std::to_string(l + 1) + " (" + pct(a->mean) + "->" + pct(b->mean) +
                    ", tol " + pct(tol) + "); ";
        }
      }
    }
    const auto* top = find_cell(d.sharpening, std::string(feat) + "/3/base_high");
    if (!top || top->mean < g.sharp_top_high_min) {
      pass = false;
      detail += std::string(feat) + " top layer true>0.9 " +
                (top ? pct(top->mean) : std::string("missing")) + " (min " +
                pct(g.sharp_top_high_min) + "); ";
    }
  }
  if (detail.empty()) detail = "all chains discretize monotonically, tops above " +
                               pct(g.sharp_top_high_min);
  return {"chain activations sharpen layer by layer", pass, detail};
}

inline CheckResult check_relation(const DiscretizationSummary& d, const CheckGates& g) {
  using checkdetail::find_cell;
  using checkdetail::pct;
  const auto* yes = find_cell(d.relational, "trained_color/big3_branch2/base_high");
  const auto* no = find_cell(d.relational, "control_color/big3_branch2/base_high");
  if (!yes || !no)
    return {"conjecture forms for the rule color only", false, "relational rows missing"};
  const bool pass = yes->mean >= g.rel_trained_high_min && no->mean <= g.rel_control_high_max;
  return {"conjecture forms for the rule color only", pass,
          "branch-2 true>0.9: trained " + pct(yes->mean) + " (min " +
              pct(g.rel_trained_high_min) + "), control " + pct(no->mean) + " (max " +
              pct(g.rel_control_high_max) + ")"};
}

inline CheckResult check_outlier_band(const SweepSummary& s, const CheckGates& g) {
  using checkdetail::pct;
  auto run_at = [&](int k) -> double {
    for (const auto& p : s.points)
      if (p.k == k) return p.run_pct.mean;
    return -1.0;
  };
  const double r0 = run_at(0), r20 = run_at(20), r30 = run_at(30);
  const double band = (r20 + r30) / 2.0;
  bool pass = r20 > r0 && r30 > r0;
  std::string detail = "run% k=0 " + pct(r0) + ", k=20 " + pct(r20) + ", k=30 " + pct(r30);
  for (int k : {50, 75, 100}) {
    const double rk = run_at(k);
    detail += ", k=" + std::to_string(k) + " " + pct(rk);
    if (!(band > rk)) pass = false;
  }
  const double r7 = run_at(7);
  detail += ", k=7 " + pct(r7);
  if (!(r7 >= 100.0 - g.probe_fb_err_max)) pass = false;
  return {"moderate rule-breaker share drives acting most", pass, detail};
}

inline CheckResult check_ablation(const AblationSummary& a, const CheckGates& g) {
  using checkdetail::pct;
  if (a.rows.size() != 4)
    return {"deep chains required for the conjecture", false, "ablation rows missing"};
  const auto& d0 = a.rows[0];
  const auto& d3 = a.rows[3];
  const double p = welch_t_test(d0.probe_errs, d3.probe_errs).p;
  const bool pass = d0.nbyl_fb_big_err.mean >= g.abl_shallow_err_min &&
                    d3.nbyl_fb_big_err.mean <= g.abl_deep_err_max && p < g.abl_p_max;
  char pb[32];
  std::snprintf(pb, sizeof pb, "%.2g", p);
  return {"deep chains required for the conjecture", pass,
          "probe fb big error depth0 " + pct(d0.nbyl_fb_big_err.mean) + " (min " +
              pct(g.abl_shallow_err_min) + "), depth3 " + pct(d3.nbyl_fb_big_err.mean) +
              " (max " + pct(g.abl_deep_err_max) + "), Welch p=" + pb + " (<" +
              std::to_string(g.abl_p_max) + ")"};
}

inline std::vector<CheckResult> check_battery(const FullBattery& fb,
                                              const CheckGates& g = {}) {
  return {check_reflex_learning(fb.errors, g), check_probe_gap(fb.errors, g),
          check_no_false_alarms(fb.errors, g), check_imagination(fb.corr, g),
          check_sharpening(fb.disc, g),        check_relation(fb.disc, g),
          check_outlier_band(fb.sweep, g),     check_ablation(fb.ablation, g)};
}

// Prints one line per check; returns the number of failures.
inline int report_checks(const std::vector<CheckResult>& checks, std::ostream& os) {
  int fails = 0;
  for (const auto& c : checks) {
    os << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " -- " << c.detail << "\n";
    if (!c.pass) ++fails;
  }
  return fails;
}

}  // namespace aan
