#pragma once
// Training schedule and the measurement battery that the experiment drivers
// share: trigger error rates (feed-forward and feedback mode), activation
// histograms, layer-wise discretization statistics, and the correlation of
// imagined (fed-back) features with real ones.

#include "aan/aan_net.hpp"
#include "aan/feature_cache.hpp"
#include "aan/stats.hpp"

#include <functional>
#include <string>
#include <vector>

namespace aan {

struct FeatureSet {
  FeatureMatrix X;                 // one row per image, kFeatDim wide
  std::vector<ImageLabel> labels;

  int n() const { return static_cast<int>(X.rows()); }
  const float* row(int i) const { return X.row(i).data(); }
};

struct TrainingSchedule {
  int ico_passes = 1;                  // phase 1: randomized passes, supervised
  long long presentations = 13710;     // phase 2: all rules concurrently

  static TrainingSchedule from(const ParamSet& ps) {
    TrainingSchedule s;
    s.ico_passes = static_cast<int>(ps.get_int("schedule.ico_passes", s.ico_passes));
    s.presentations = ps.get_int("schedule.presentations", s.presentations);
    return s;
  }
};

// phase (1|2), presentations completed within that phase. Invoked once at 0
// and after every presentation; cheap unless the callback does work.
using TrainCallback = std::function<void(int, long long)>;

inline void train_aan(AanNetwork& net, const FeatureSet& train,
                      const TrainingSchedule& sched,
                      const TrainCallback& cb = {}) {
  const int N = train.n();
  if (N == 0) throw std::runtime_error("train_aan: empty training set");
  Rng order(sub_seed(net.config().seed, 0x4f524452ull));
  AanNetwork::Acts acts = net.make_acts();

  // Phase 1: reflex layer only, once (or more) through the set.
  if (cb) cb(1, 0);
  long long done = 0;
  for (int pass = 0; pass < sched.ico_passes; ++pass) {
    auto perm = permutation(static_cast<std::uint32_t>(N), order);
    for (int t = 0; t < N; ++t) {
      const auto& lab = train.labels[perm[t]];
      net.present_reflex(train.row(perm[t]), lab.spec.size == Size::big,
                         net.required_c(lab), lab.is_left, acts);
      if (cb) cb(1, ++done);
    }
  }

  // Phase 2: everything at once, reshuffling each time the set is exhausted.
  // The reflex layer keeps its supervision; its updates die out on their own
  // once trigger and requirement agree.
  if (cb) cb(2, 0);
  std::vector<std::uint32_t> perm;
  for (long long t = 0; t < sched.presentations; ++t) {
    const int phase_t = static_cast<int>(t % N);
    if (phase_t == 0) perm = permutation(static_cast<std::uint32_t>(N), order);
    const auto& lab = train.labels[perm[phase_t]];
    net.present(train.row(perm[phase_t]), lab.spec.size == Size::big,
                net.required_c(lab), lab.is_left, acts);
    if (cb) cb(2, t + 1);
  }
}

// --- trigger errors ---------------------------------------------------------

enum class EvalMode { feedforward, feedback };

inline const char* to_string(EvalMode m) {
  return m == EvalMode::feedforward ? "ff" : "fb";
}

struct ErrorReport {
  double big = 0.0;   // percent of images whose trigger missed its target
  double c = 0.0;
  double left = 0.0;
  int n = 0;
};

// On the rule-probing set the run target is unconditionally "act" (the
// hidden rule says these situations require it); elsewhere ground truth.
inline ErrorReport evaluate_errors(const AanNetwork& net, const FeatureSet& data,
                                   EvalMode mode, bool rule_probe_set) {
  ErrorReport rep;
  rep.n = data.n();
  AanNetwork::Acts a = net.make_acts();
  int err_big = 0, err_c = 0, err_left = 0;
  for (int i = 0; i < data.n(); ++i) {
    const auto& lab = data.labels[i];
    bool trig[3];
    if (mode == EvalMode::feedforward) {
      net.forward(data.row(i), a);
      trig[0] = a.trigger[net.big0()];
      trig[1] = a.trigger[net.c0()];
      trig[2] = a.trigger[net.left0()];
    } else {
      net.evaluate(data.row(i), a);
      trig[0] = a.post_trigger[0];
      trig[1] = a.post_trigger[1];
      trig[2] = a.post_trigger[2];
    }
    const bool want_big = rule_probe_set ? true : lab.spec.size == Size::big;
    if (trig[0] != want_big) ++err_big;
    if (trig[1] != net.required_c(lab)) ++err_c;
    if (trig[2] != lab.is_left) ++err_left;
  }
  const double scale = 100.0 / std::max(rep.n, 1);
  rep.big = err_big * scale;
  rep.c = err_c * scale;
  rep.left = err_left * scale;
  return rep;
}

// --- activation histograms --------------------------------------------------

struct PoolHistogram {
  std::string pool;      // pool name; big3 contributes branch1/branch2/combined
  std::string category;  // ground-truth split the image fell into
  Histogram hist{0.0, 1.0, 50};
};

namespace harnessdetail {

inline std::size_t hist_slot(std::vector<PoolHistogram>& out, const std::string& pool,
                             const std::string& cat, int nbins) {
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i].pool == pool && out[i].category == cat) return i;
  out.push_back({pool, cat, Histogram(0.0, 1.0, nbins)});
  return out.size() - 1;
}

}  // namespace harnessdetail

// Per-image mean pool activation, binned by the image's ground-truth
// category. big3's two dendrites are recorded separately and combined, and
// the reflex big pool both before and after feedback.
inline std::vector<PoolHistogram> collect_histograms(const AanNetwork& net,
                                                     const FeatureSet& data,
                                                     int nbins = 50) {
  using harnessdetail::hist_slot;
  std::vector<PoolHistogram> out;
  AanNetwork::Acts a = net.make_acts();
  const float n_inv = 1.0f / net.config().params.pool_n;
  for (int i = 0; i < data.n(); ++i) {
    const auto& lab = data.labels[i];
    net.evaluate(data.row(i), a);
    const std::string size_cat = to_string(lab.spec.size);
    const std::string color_cat = to_string(lab.spec.color);
    const std::string left_cat = lab.is_left ? "left" : "right";
    const bool cl = net.required_c(lab) && lab.is_left;
    const std::string cl_cat = cl ? "conj_and_left" : "rest";
    for (int pi = 0; pi < net.num_pools(); ++pi) {
      const auto& p = net.pool(pi);
      std::string cat;
      if (p.name[0] == 'b') cat = size_cat;          // big chain
      else if (p.name[0] == 'c') cat = color_cat;    // color chain
      else if (p.name[0] == 'l') cat = left_cat;     // left chain
      else cat = cl_cat;                             // and pools
      if (pi == net.big3()) {
        const double v1 = a.branch_v[pi][0].mean();
        const double v2 = a.branch_v[pi][1].mean();
        out[hist_slot(out, "big3_branch1", size_cat, nbins)].hist.add(v1);
        out[hist_slot(out, "big3_branch2", cl_cat, nbins)].hist.add(v2);
        out[hist_slot(out, "big3", size_cat, nbins)].hist.add(a.v[pi].mean());
      } else {
        out[hist_slot(out, p.name, cat, nbins)].hist.add(a.sum[pi] * n_inv);
      }
    }
    out[hist_slot(out, "big0_after_feedback", size_cat, nbins)].hist.add(
        a.post_sum[0] * n_inv);
  }
  return out;
}

// --- discretization statistics (sharpening along the chains) ----------------

struct SharpRow {
  std::string feature;    // big | c | left
  int layer = 0;          // 1..3
  double base_low = 0.0;  // % of feature-false baseline images with mean < 0.1
  double base_high = 0.0; // % of feature-true baseline images with mean > 0.9
  double probe = 0.0;     // rule-probe set: big -> % false<0.1, else % true>0.9
};

struct RelationalRow {
  std::string pool;        // and1 | and2 | big3_branch2
  double base_low = 0.0;   // conj&left false images, mean < 0.1
  double base_high = 0.0;  // conj&left true images, mean > 0.9
  double probe = 0.0;      // probe set; high for the trained color, low otherwise
};

struct DiscretizationStats {
  std::vector<SharpRow> sharpening;   // 9 rows at full depth
  std::vector<RelationalRow> relational;  // 3 rows
};

// Mean activations per pool per image for both test sets, reduced to the
// <0.1 / >0.9 tail fractions the supplement tables use.
inline DiscretizationStats collect_discretization(const AanNetwork& net,
                                                  const FeatureSet& base,
                                                  const FeatureSet& probe) {
  DiscretizationStats out;
  const int P = net.num_pools();
  const float n_inv = 1.0f / net.config().params.pool_n;
  // pool means per image: [set][image][pool-slot]; big3 branches get two
  // extra virtual slots at P and P+1.
  auto means_for = [&](const FeatureSet& fs) {
    std::vector<std::vector<float>> m(fs.n(), std::vector<float>(P + 2, 0.0f));
    AanNetwork::Acts a = net.make_acts();
    for (int i = 0; i < fs.n(); ++i) {
      net.forward(fs.row(i), a);
      for (int pi = 0; pi < P; ++pi) m[i][pi] = a.sum[pi] * n_inv;
      m[i][P] = a.branch_v[net.big3()][0].mean();
      m[i][P + 1] = a.branch_v[net.big3()][1].mean();
    }
    return m;
  };
  const auto base_m = means_for(base);
  const auto probe_m = means_for(probe);

  auto tail_pct = [](const std::vector<float>& vals, bool low) {
    if (vals.empty()) return 0.0;
    int hit = 0;
    for (float v : vals)
      if (low ? v < 0.1f : v > 0.9f) ++hit;
    return 100.0 * hit / vals.size();
  };

  auto row_stats = [&](int slot, auto&& feature_true) {
    std::vector<float> base_false, base_true, probe_vals;
    for (int i = 0; i < base.n(); ++i)
      (feature_true(base.labels[i]) ? base_true : base_false).push_back(base_m[i][slot]);
    for (int i = 0; i < probe.n(); ++i) probe_vals.push_back(probe_m[i][slot]);
    return std::array<std::vector<float>, 3>{std::move(base_false), std::move(base_true),
                                             std::move(probe_vals)};
  };

  // sharpening rows, only for layers the ablation depth kept
  struct ChainDef {
    const char* feature;
    const char* prefix;
    bool probe_low;  // probe statistic looks at the low tail
  };
  const ChainDef chains[] = {{"big", "big", true}, {"c", "c", false}, {"left", "left", false}};
  for (const auto& ch : chains) {
    for (int layer = 1; layer <= 3; ++layer) {
      int slot = -1;
      if (std::string(ch.feature) == "big" && layer == 3) {
        slot = P;  // branch 1 continues the big chain
      } else {
        const std::string name = std::string(ch.prefix) + std::to_string(layer);
        if (!net.has_pool(name)) continue;
        slot = net.find(name);
      }
      auto feature_true = [&](const ImageLabel& lab) {
        if (std::string(ch.feature) == "big") return lab.spec.size == Size::big;
        if (std::string(ch.feature) == "c") return net.required_c(lab);
        return lab.is_left;
      };
      auto parts = row_stats(slot, feature_true);
      SharpRow r;
      r.feature = ch.feature;
      r.layer = layer;
      r.base_low = tail_pct(parts[0], true);
      r.base_high = tail_pct(parts[1], false);
      r.probe = tail_pct(parts[2], ch.probe_low);
      out.sharpening.push_back(std::move(r));
    }
  }

  // relational rows
  const bool probe_is_conj = net.config().conjecture == Color::yellow;
  const std::pair<std::string, int> rel_pools[] = {
      {"and1", net.and1()}, {"and2", net.and2()}, {"big3_branch2", P + 1}};
  for (const auto& [name, slot] : rel_pools) {
    auto feature_true = [&](const ImageLabel& lab) {
      return net.required_c(lab) && lab.is_left;
    };
    auto parts = row_stats(slot, feature_true);
    RelationalRow r;
    r.pool = name;
    r.base_low = tail_pct(parts[0], true);
    r.base_high = tail_pct(parts[1], false);
    // probe images are yellow lefts: the conjectured-color net should fire
    // (high tail), a control color net should stay silent (low tail)
    r.probe = tail_pct(parts[2], !probe_is_conj);
    out.relational.push_back(std::move(r));
  }
  return out;
}

// --- imagined-vs-real feature correlation -----------------------------------

struct CorrelationRow {
  std::string size;
  double img_r_mean = 0.0;  // image-by-image r, averaged
  double img_r_std = 0.0;
  double category_r = 0.0;  // r between category-mean vectors
  int excluded = 0;         // images without variance on either side
};

struct CorrelationReport {
  std::vector<CorrelationRow> rows;  // big, medium, small
};

// For every baseline image: run the net feed-forward, let the conjecture
// pool imagine the feature vector through the feedback weights, and compare
// against the real (normalized) features.
inline CorrelationReport correlation_analysis(const AanNetwork& net,
                                              const FeatureSet& base) {
  AanNetwork::Acts a = net.make_acts();
  Eigen::VectorXf fb(kFeatDim);
  std::array<std::vector<double>, 3> img_r;
  std::array<Eigen::VectorXd, 3> sum_real, sum_fb;
  std::array<int, 3> count{0, 0, 0};
  std::array<int, 3> excluded{0, 0, 0};
  for (auto& v : sum_real) v = Eigen::VectorXd::Zero(kFeatDim);
  for (auto& v : sum_fb) v = Eigen::VectorXd::Zero(kFeatDim);

  std::vector<double> xr(kFeatDim), xf(kFeatDim);
  for (int i = 0; i < base.n(); ++i) {
    net.forward(base.row(i), a);
    net.feedback_vector(a.v[net.big3()], fb);
    const int z = static_cast<int>(base.labels[i].spec.size);
    for (int k = 0; k < kFeatDim; ++k) {
      xr[k] = base.row(i)[k];
      xf[k] = fb[k];
      sum_real[z][k] += xr[k];
      sum_fb[z][k] += xf[k];
    }
    ++count[z];
    const double r = pearson(xr, xf);
    if (std::isnan(r)) ++excluded[z];
    else img_r[z].push_back(r);
  }

  CorrelationReport rep;
  for (int z = 0; z < 3; ++z) {
    CorrelationRow row;
    row.size = to_string(static_cast<Size>(z));
    row.img_r_mean = mean_of(img_r[z]);
    row.img_r_std = stddev_of(img_r[z]);
    row.excluded = excluded[z];
    if (count[z] > 0) {
      std::vector<double> mr(kFeatDim), mf(kFeatDim);
      for (int k = 0; k < kFeatDim; ++k) {
        mr[k] = sum_real[z][k] / count[z];
        mf[k] = sum_fb[z][k] / count[z];
      }
      const double r = pearson(mr, mf);
      row.category_r = std::isnan(r) ? 0.0 : r;
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace aan
