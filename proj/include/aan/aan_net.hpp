#pragma once
// The acting agent: pools of 300 saturated-sum sigmoid neurons wired by
// sparse random fan-in (50 inputs each) on top of the frozen feature bank.
//
// Architecture at full depth (d=3):
//   big0,c0,left0        <- features, supervised reflex-style (ICO)
//   big1..2, c1..3,
//   left1..3             <- previous pool, above-average Hebb (sharpening)
//   and1                 <- 25 from c-top + 25 from left-top, above-avg Hebb
//   and2                 <- and1, above-avg Hebb
//   big3                 <- dual dendrite: branch 1 from big2 (above-avg
//                           Hebb), branch 2 from and2 (balanced Hebb);
//                           output = max of branches (logical OR)
//   feedback             <- one Hebb weight per (reservoir neuron, big3
//                           neuron): 4416x300, recreates the big-image
//                           feature pattern from conjecture activity
//
// The ablation depth d trims the sharpening chains: c/left run 0..d, the
// big chain 0..min(d,2), and the and pools always read the chain tops.
// A pool "acts" when its summed output exceeds F (strictly).

#include "aan/binio.hpp"
#include "aan/config.hpp"
#include "aan/plasticity.hpp"
#include "aan/rng.hpp"
#include "aan/shape_world.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

namespace aan {

inline constexpr int kFeatDim = 4416;

struct AanParams {
  SigmoidParams sigmoid{0.1f, 100.0f};
  float motor_f = 20.0f;
  int pool_n = 300;
  int fan_in = 50;

  IcoParams ico{80.0f, 34.0f, 0.01f};

  float hebb_mu0 = 1.0f;           // feedback pathway
  AnnealParams hebb_anneal{0.99f, 0.9f};

  float aa_mu0_layer123 = 5.0f;
  float aa_mu0_and1 = 0.05f;
  float aa_mu0_and2 = 0.025f;
  float aa_gU = 0.9f;
  float aa_gV = 0.9f;
  AAHebbParams aa_thr{1.0f, 0.1f};
  AnnealParams anneal_layer1{0.99f, 0.9f};
  AnnealParams anneal_rest{0.995f, 0.1f};

  float bal_mu0 = 0.05f;
  float bal_gU = 0.9f;
  float bal_gV = 0.9f;
  AAHebbParams bal_thr{1.0f, 1.0f};
  AnnealParams bal_anneal{0.995f, 0.1f};

  static AanParams from(const ParamSet& ps) {
    AanParams p;
    p.sigmoid.a = static_cast<float>(ps.get("net.sigmoid_a", p.sigmoid.a));
    p.sigmoid.b = static_cast<float>(ps.get("net.sigmoid_b", p.sigmoid.b));
    p.motor_f = static_cast<float>(ps.get("net.motor_f", p.motor_f));
    p.pool_n = static_cast<int>(ps.get_int("net.pool_n", p.pool_n));
    p.fan_in = static_cast<int>(ps.get_int("net.fan_in", p.fan_in));
    p.ico.mu_pos = static_cast<float>(ps.get("ico.mu_pos", p.ico.mu_pos));
    p.ico.mu_neg = static_cast<float>(ps.get("ico.mu_neg", p.ico.mu_neg));
    p.ico.phi = static_cast<float>(ps.get("ico.phi", p.ico.phi));
    p.hebb_mu0 = static_cast<float>(ps.get("hebb.mu0", p.hebb_mu0));
    p.hebb_anneal.theta = static_cast<float>(ps.get("hebb.theta", p.hebb_anneal.theta));
    p.hebb_anneal.c = static_cast<float>(ps.get("hebb.c", p.hebb_anneal.c));
    p.aa_mu0_layer123 = static_cast<float>(ps.get("aa.mu0.layer123", p.aa_mu0_layer123));
    p.aa_mu0_and1 = static_cast<float>(ps.get("aa.mu0.and1", p.aa_mu0_and1));
    p.aa_mu0_and2 = static_cast<float>(ps.get("aa.mu0.and2", p.aa_mu0_and2));
    p.aa_gU = static_cast<float>(ps.get("aa.gU", p.aa_gU));
    p.aa_gV = static_cast<float>(ps.get("aa.gV", p.aa_gV));
    p.aa_thr.rU = static_cast<float>(ps.get("aa.rU", p.aa_thr.rU));
    p.aa_thr.rV = static_cast<float>(ps.get("aa.rV", p.aa_thr.rV));
    p.anneal_layer1.theta = static_cast<float>(ps.get("anneal.layer1.theta", p.anneal_layer1.theta));
    p.anneal_layer1.c = static_cast<float>(ps.get("anneal.layer1.c", p.anneal_layer1.c));
    p.anneal_rest.theta = static_cast<float>(ps.get("anneal.rest.theta", p.anneal_rest.theta));
    p.anneal_rest.c = static_cast<float>(ps.get("anneal.rest.c", p.anneal_rest.c));
    p.bal_mu0 = static_cast<float>(ps.get("bal.mu0", p.bal_mu0));
    p.bal_gU = static_cast<float>(ps.get("bal.gU", p.bal_gU));
    p.bal_gV = static_cast<float>(ps.get("bal.gV", p.bal_gV));
    p.bal_thr.rU = static_cast<float>(ps.get("bal.rU", p.bal_thr.rU));
    p.bal_thr.rV = static_cast<float>(ps.get("bal.rV", p.bal_thr.rV));
    p.bal_anneal.theta = static_cast<float>(ps.get("bal.theta", p.bal_anneal.theta));
    p.bal_anneal.c = static_cast<float>(ps.get("bal.c", p.bal_anneal.c));
    return p;
  }
};

struct AanConfig {
  std::uint64_t seed = 1;
  int depth = 3;                      // 0..3
  Color conjecture = Color::yellow;   // the color the c-chain is trained on
  AanParams params;

  static AanConfig from(const ParamSet& ps) {
    AanConfig c;
    c.seed = static_cast<std::uint64_t>(ps.get_int("net.seed", 1));
    c.depth = static_cast<int>(ps.get_int("net.depth", 3));
    c.conjecture = enum_from_string<Color>(ps.get_str("net.conjecture_color", "yellow"));
    c.params = AanParams::from(ps);
    return c;
  }
};

enum class Rule : std::uint8_t { ico = 0, above_avg = 1, balanced = 2 };

class AanNetwork {
 public:
  // One dendritic branch: private wiring, weights and learning rate, plus
  // the sliding average of its source space.
  struct Branch {
    Rule rule = Rule::above_avg;
    std::vector<int> srcs;           // source pool ids; empty = feature input
    int src_dim = 0;
    std::vector<std::uint32_t> idx;  // n * fan_in
    std::vector<float> w;            // n * fan_in
    std::vector<float> mu;           // n (unused for ico)
    std::vector<float> U;            // src_dim (unused for ico)
    float gU = 0.9f;
    AAHebbParams thr;
    AnnealParams ann;
  };

  struct Pool {
    std::string name;
    int chain_layer = 0;  // 0 = reflex layer, 1.. = sharpening layers
    std::vector<Branch> branches;
    std::vector<float> V;  // per-neuron sliding average of combined output
    float gV = 0.9f;
  };

  // Per-presentation activations; reuse one instance across calls.
  struct Acts {
    // per pool: combined output, per branch outputs, sum, trigger
    std::vector<Eigen::VectorXf> v;
    std::vector<std::vector<Eigen::VectorXf>> branch_v;
    std::vector<float> sum;
    std::vector<char> trigger;
    // feedback pass
    Eigen::VectorXf fb_vec;    // f(W_fb . big3), feature space
    Eigen::VectorXf x_mod;     // max(x, fb_vec)
    std::array<float, 3> post_sum{0, 0, 0};       // big0,c0,left0 after feedback
    std::array<char, 3> post_trigger{0, 0, 0};
    bool feedback_applied = false;
  };

  AanNetwork() = default;

  explicit AanNetwork(const AanConfig& cfg) : cfg_(cfg) {
    const AanParams& P = cfg.params;
    if (cfg.depth < 0 || cfg.depth > 3) throw std::runtime_error("depth must be 0..3");
    Rng wiring(sub_seed(cfg.seed, 0x504f4f4cull));

    const int d = cfg.depth;
    const int big_top_layer = std::min(d, 2);

    auto add_chain = [&](const std::string& base, int top_layer) {
      int prev = -1;
      for (int l = 0; l <= top_layer; ++l) {
        Pool p;
        p.name = base + std::to_string(l);
        p.chain_layer = l;
        p.gV = P.aa_gV;
        p.V.assign(P.pool_n, 0.0f);
        Branch b;
        if (l == 0) {
          b.rule = Rule::ico;
          b.src_dim = kFeatDim;
        } else {
          b.rule = Rule::above_avg;
          b.srcs = {prev};
          b.src_dim = P.pool_n;
          b.mu.assign(P.pool_n, P.aa_mu0_layer123);
          b.U.assign(b.src_dim, 0.0f);
          b.gU = P.aa_gU;
          b.thr = P.aa_thr;
          b.ann = l == 1 ? P.anneal_layer1 : P.anneal_rest;
        }
        wire_branch(b, wiring, P, /*split=*/false);
        p.branches.push_back(std::move(b));
        prev = static_cast<int>(pools_.size());
        pools_.push_back(std::move(p));
      }
      return prev;
    };

    big_top_ = add_chain("big", big_top_layer);
    c_top_ = add_chain("c", d);
    left_top_ = add_chain("left", d);
    big0_ = find("big0");
    c0_ = find("c0");
    left0_ = find("left0");

    // and1: half its fan-in from each chain top.
    {
      Pool p;
      p.name = "and1";
      p.chain_layer = d + 1;
      p.gV = P.aa_gV;
      p.V.assign(P.pool_n, 0.0f);
      Branch b;
      b.rule = Rule::above_avg;
      b.srcs = {c_top_, left_top_};
      b.src_dim = 2 * P.pool_n;
      b.mu.assign(P.pool_n, P.aa_mu0_and1);
      b.U.assign(b.src_dim, 0.0f);
      b.gU = P.aa_gU;
      b.thr = P.aa_thr;
      b.ann = P.anneal_rest;
      wire_branch(b, wiring, P, /*split=*/true);
      p.branches.push_back(std::move(b));
      and1_ = static_cast<int>(pools_.size());
      pools_.push_back(std::move(p));
    }
    // and2 sharpens and1.
    {
      Pool p;
      p.name = "and2";
      p.chain_layer = d + 2;
      p.gV = P.aa_gV;
      p.V.assign(P.pool_n, 0.0f);
      Branch b;
      b.rule = Rule::above_avg;
      b.srcs = {and1_};
      b.src_dim = P.pool_n;
      b.mu.assign(P.pool_n, P.aa_mu0_and2);
      b.U.assign(b.src_dim, 0.0f);
      b.gU = P.aa_gU;
      b.thr = P.aa_thr;
      b.ann = P.anneal_rest;
      wire_branch(b, wiring, P, false);
      p.branches.push_back(std::move(b));
      and2_ = static_cast<int>(pools_.size());
      pools_.push_back(std::move(p));
    }
    // big3: the conjecture neuron pool. Branch 1 continues the big chain,
    // branch 2 listens to the and-chain; the output ORs them.
    {
      Pool p;
      p.name = "big3";
      p.chain_layer = 3;
      p.gV = P.aa_gV;  // combined-output average feeds both branch rules
      p.V.assign(P.pool_n, 0.0f);
      Branch b1;
      b1.rule = Rule::above_avg;
      b1.srcs = {big_top_};
      b1.src_dim = P.pool_n;
      b1.mu.assign(P.pool_n, P.aa_mu0_layer123);
      b1.U.assign(b1.src_dim, 0.0f);
      b1.gU = P.aa_gU;
      b1.thr = P.aa_thr;
      b1.ann = P.anneal_rest;
      wire_branch(b1, wiring, P, false);
      p.branches.push_back(std::move(b1));
      Branch b2;
      b2.rule = Rule::balanced;
      b2.srcs = {and2_};
      b2.src_dim = P.pool_n;
      b2.mu.assign(P.pool_n, P.bal_mu0);
      b2.U.assign(b2.src_dim, 0.0f);
      b2.gU = P.bal_gU;
      b2.thr = P.bal_thr;
      b2.ann = P.bal_anneal;
      wire_branch(b2, wiring, P, false);
      p.branches.push_back(std::move(b2));
      big3_ = static_cast<int>(pools_.size());
      pools_.push_back(std::move(p));
    }

    // Feedback: every reservoir feature neuron grows one weight per big3
    // neuron; starts silent.
    fbW_ = Eigen::MatrixXf::Zero(kFeatDim, P.pool_n);
    fb_mu_ = P.hebb_mu0;
  }

  const AanConfig& config() const { return cfg_; }
  int num_pools() const { return static_cast<int>(pools_.size()); }
  const Pool& pool(int i) const { return pools_[i]; }
  Pool& pool(int i) { return pools_[i]; }
  int find(const std::string& name) const {
    for (std::size_t i = 0; i < pools_.size(); ++i)
      if (pools_[i].name == name) return static_cast<int>(i);
    throw std::runtime_error("no such pool: " + name);
  }
  bool has_pool(const std::string& name) const {
    for (const auto& p : pools_)
      if (p.name == name) return true;
    return false;
  }
  int big0() const { return big0_; }
  int c0() const { return c0_; }
  int left0() const { return left0_; }
  int big_top() const { return big_top_; }
  int c_top() const { return c_top_; }
  int left_top() const { return left_top_; }
  int and1() const { return and1_; }
  int and2() const { return and2_; }
  int big3() const { return big3_; }
  Eigen::MatrixXf& feedback_weights() { return fbW_; }
  const Eigen::MatrixXf& feedback_weights() const { return fbW_; }
  float feedback_mu() const { return fb_mu_; }
  void set_feedback_mu(float mu) { fb_mu_ = mu; }

  Acts make_acts() const {
    Acts a;
    a.v.resize(pools_.size());
    a.branch_v.resize(pools_.size());
    a.sum.assign(pools_.size(), 0.0f);
    a.trigger.assign(pools_.size(), 0);
    for (std::size_t i = 0; i < pools_.size(); ++i) {
      a.v[i].setZero(cfg_.params.pool_n);
      a.branch_v[i].resize(pools_[i].branches.size());
      for (auto& bv : a.branch_v[i]) bv.setZero(cfg_.params.pool_n);
    }
    a.fb_vec.setZero(kFeatDim);
    a.x_mod.setZero(kFeatDim);
    return a;
  }

  // Feed-forward pass over all pools from the (normalized) feature vector.
  void forward(const float* x, Acts& a) const {
    a.feedback_applied = false;
    for (std::size_t pi = 0; pi < pools_.size(); ++pi) {
      const Pool& p = pools_[pi];
      for (std::size_t bi = 0; bi < p.branches.size(); ++bi)
        branch_forward(p.branches[bi], x, a, a.branch_v[pi][bi]);
      if (p.branches.size() == 1) {
        a.v[pi] = a.branch_v[pi][0];
      } else {
        a.v[pi] = a.branch_v[pi][0].cwiseMax(a.branch_v[pi][1]);
      }
      a.sum[pi] = a.v[pi].sum();
      a.trigger[pi] = a.sum[pi] > cfg_.params.motor_f ? 1 : 0;
    }
  }

  // f(W_fb . big3) for the whole feature space.
  void feedback_vector(const Eigen::VectorXf& big3_v, Eigen::VectorXf& out) const {
    out.noalias() = fbW_ * big3_v;
    const auto& s = cfg_.params.sigmoid;
    for (int i = 0; i < out.size(); ++i) out[i] = pool_sigmoid(out[i], s);
  }

  // Evaluation protocol: act on the direct trigger if there is one;
  // otherwise let the conjecture pool imagine the feature pattern and give
  // the reflex layer a second look. Triggers of all three layer-0 pools are
  // re-derived from the modified features in that case.
  void evaluate(const float* x, Acts& a) const {
    forward(x, a);
    a.feedback_applied = false;
    a.post_sum = {a.sum[big0_], a.sum[c0_], a.sum[left0_]};
    a.post_trigger = {a.trigger[big0_], a.trigger[c0_], a.trigger[left0_]};
    if (a.trigger[big0_]) return;  // ran feed-forward; nothing to add
    a.feedback_applied = true;
    feedback_vector(a.v[big3_], a.fb_vec);
    for (int i = 0; i < kFeatDim; ++i) a.x_mod[i] = std::max(x[i], a.fb_vec[i]);
    const int l0[3] = {big0_, c0_, left0_};
    for (int k = 0; k < 3; ++k) {
      const Branch& b = pools_[l0[k]].branches[0];
      float sum = 0.0f;
      for (int j = 0; j < cfg_.params.pool_n; ++j)
        sum += neuron_value(b, j, a.x_mod.data());
      a.post_sum[k] = sum;
      a.post_trigger[k] = sum > cfg_.params.motor_f ? 1 : 0;
    }
  }

  // --- training step (one presentation, phase 2) ---------------------------
  // Order per presentation: forward -> sliding averages -> weight updates
  // (reflex layer, sharpening chains, feedback) -> annealing.
  void present(const float* x, bool is_big, bool is_c, bool is_left, Acts& a) {
    forward(x, a);
    const AanParams& P = cfg_.params;

    for (std::size_t pi = 0; pi < pools_.size(); ++pi) {
      Pool& p = pools_[pi];
      for (auto& b : p.branches)
        if (b.rule != Rule::ico)
          sliding_update(b.U.data(), gather_source(b, x, a), b.src_dim, b.gU);
      if (p.branches[0].rule != Rule::ico || p.branches.size() > 1)
        sliding_update(p.V.data(), a.v[pi].data(), P.pool_n, p.gV);
    }

    ico_step(big0_, x, is_big, a);
    ico_step(c0_, x, is_c, a);
    ico_step(left0_, x, is_left, a);

    for (std::size_t pi = 0; pi < pools_.size(); ++pi) {
      Pool& p = pools_[pi];
      for (std::size_t bi = 0; bi < p.branches.size(); ++bi) {
        Branch& b = p.branches[bi];
        if (b.rule == Rule::ico) continue;
        const float* src = gather_source(b, x, a);
        // threshold-rectified source, shared by all neurons of the branch
        scratch_d_.resize(b.src_dim);
        for (int i = 0; i < b.src_dim; ++i) {
          const float thr = b.thr.rU * b.U[i];
          scratch_d_[i] = src[i] > thr ? src[i] - thr : 0.0f;
        }
        const Eigen::VectorXf& v_comb = a.v[pi];
        for (int j = 0; j < P.pool_n; ++j) {
          const float vj = v_comb[j];
          const float Vj = p.V[j];
          float gate;
          if (b.rule == Rule::above_avg) {
            if (!(vj > b.thr.rV * Vj)) continue;
            gate = 1.0f;
          } else {
            const float vd = vj - b.thr.rV * Vj;
            if (vd == 0.0f) continue;
            gate = vd > 0.0f ? 1.0f : -1.0f;
          }
          const float step = b.mu[j] * gate;
          float* wrow = &b.w[std::size_t(j) * P.fan_in];
          const std::uint32_t* irow = &b.idx[std::size_t(j) * P.fan_in];
          for (int k = 0; k < P.fan_in; ++k) {
            const float d = scratch_d_[irow[k]];
            if (d > 0.0f) wrow[k] = std::max(0.0f, wrow[k] + step * d);
          }
        }
      }
    }

    // Feedback pathway: each feature neuron's second dendrite Hebb-associates
    // the big3 pattern with its own (combined) activity. Once the shared
    // rate has annealed to nothing the update is numerically invisible in
    // float32, so it is skipped.
    if (fb_mu_ > 1e-8f) {
      const Eigen::VectorXf& big3_v = a.v[big3_];
      fb_scratch_.noalias() = fbW_ * big3_v;
      const auto& sg = P.sigmoid;
      float v2max = 0.0f;
      for (int i = 0; i < kFeatDim; ++i) {
        const float v2 = pool_sigmoid(fb_scratch_[i], sg);
        v2max = std::max(v2max, v2);
        fb_scratch_[i] = std::max(x[i], v2);  // the neuron's combined output
      }
      fbW_.noalias() += fb_mu_ * fb_scratch_ * big3_v.transpose();
      fb_mu_ = anneal(fb_mu_, v2max, P.hebb_anneal);
    }

    // Annealing, driven by each branch's own output.
    for (std::size_t pi = 0; pi < pools_.size(); ++pi) {
      Pool& p = pools_[pi];
      for (std::size_t bi = 0; bi < p.branches.size(); ++bi) {
        Branch& b = p.branches[bi];
        if (b.rule == Rule::ico) continue;
        const Eigen::VectorXf& bv = a.branch_v[pi][bi];
        for (int j = 0; j < P.pool_n; ++j) b.mu[j] = anneal(b.mu[j], bv[j], b.ann);
      }
    }
  }

  // Phase-1 presentation: only the reflex layer is computed and trained.
  void present_reflex(const float* x, bool is_big, bool is_c, bool is_left, Acts& a) {
    const int l0[3] = {big0_, c0_, left0_};
    for (int k = 0; k < 3; ++k) {
      const Pool& p = pools_[l0[k]];
      branch_forward(p.branches[0], x, a, a.branch_v[l0[k]][0]);
      a.v[l0[k]] = a.branch_v[l0[k]][0];
      a.sum[l0[k]] = a.v[l0[k]].sum();
      a.trigger[l0[k]] = a.sum[l0[k]] > cfg_.params.motor_f ? 1 : 0;
    }
    ico_step(big0_, x, is_big, a);
    ico_step(c0_, x, is_c, a);
    ico_step(left0_, x, is_left, a);
  }

  // Ground-truth "required" signal for the reflex pools of this net.
  bool required_c(const ImageLabel& lab) const { return lab.spec.color == cfg_.conjecture; }

 private:
  void wire_branch(Branch& b, Rng& rng, const AanParams& P, bool split) {
    const int n = P.pool_n, f = P.fan_in;
    b.idx.resize(std::size_t(n) * f);
    const float w0 = b.rule == Rule::ico ? 0.0f : 0.01f;
    b.w.assign(std::size_t(n) * f, w0);
    for (int j = 0; j < n; ++j) {
      std::uint32_t* row = &b.idx[std::size_t(j) * f];
      if (!split) {
        auto pick = rng.sample_indices(static_cast<std::uint32_t>(b.src_dim), f);
        std::copy(pick.begin(), pick.end(), row);
      } else {
        // half the dendrite on each source pool
        auto a_half = rng.sample_indices(static_cast<std::uint32_t>(b.src_dim / 2), f / 2);
        auto b_half = rng.sample_indices(static_cast<std::uint32_t>(b.src_dim / 2), f - f / 2);
        for (int k = 0; k < f / 2; ++k) row[k] = a_half[k];
        for (int k = 0; k < f - f / 2; ++k)
          row[f / 2 + k] = b_half[k] + static_cast<std::uint32_t>(b.src_dim / 2);
      }
    }
  }

  // Source activations of a branch as a contiguous array.
  const float* gather_source(const Branch& b, const float* x, const Acts& a) const {
    if (b.srcs.empty()) return x;
    if (b.srcs.size() == 1) return a.v[b.srcs[0]].data();
    concat_buf_.resize(b.src_dim);
    int off = 0;
    for (int s : b.srcs) {
      const auto& v = a.v[s];
      std::copy(v.data(), v.data() + v.size(), concat_buf_.data() + off);
      off += static_cast<int>(v.size());
    }
    return concat_buf_.data();
  }

  float neuron_value(const Branch& b, int j, const float* src) const {
    const float* wrow = &b.w[std::size_t(j) * cfg_.params.fan_in];
    const std::uint32_t* irow = &b.idx[std::size_t(j) * cfg_.params.fan_in];
    float y = 0.0f;
    for (int k = 0; k < cfg_.params.fan_in; ++k) y += wrow[k] * src[irow[k]];
    return pool_sigmoid(y, cfg_.params.sigmoid);
  }

  void branch_forward(const Branch& b, const float* x, const Acts& a,
                      Eigen::VectorXf& out) const {
    const float* src = gather_source(b, x, a);
    for (int j = 0; j < cfg_.params.pool_n; ++j) out[j] = neuron_value(b, j, src);
  }

  void ico_step(int pid, const float* x, bool required, Acts& a) {
    Branch& b = pools_[pid].branches[0];
    const bool present = a.trigger[pid] != 0;
    if (required == present) return;
    const AanParams& P = cfg_.params;
    for (int j = 0; j < P.pool_n; ++j) {
      float* wrow = &b.w[std::size_t(j) * P.fan_in];
      const std::uint32_t* irow = &b.idx[std::size_t(j) * P.fan_in];
      // gather, then the shared rule
      scratch_u_.resize(P.fan_in);
      for (int k = 0; k < P.fan_in; ++k) scratch_u_[k] = x[irow[k]];
      ico_update(wrow, scratch_u_.data(), P.fan_in, required, present, P.ico);
    }
  }

  AanConfig cfg_;
  std::vector<Pool> pools_;
  int big0_ = -1, c0_ = -1, left0_ = -1;
  int big_top_ = -1, c_top_ = -1, left_top_ = -1;
  int and1_ = -1, and2_ = -1, big3_ = -1;
  Eigen::MatrixXf fbW_;
  float fb_mu_ = 1.0f;
  mutable std::vector<float> concat_buf_;
  std::vector<float> scratch_d_;
  std::vector<float> scratch_u_;
  Eigen::VectorXf fb_scratch_{Eigen::VectorXf::Zero(kFeatDim)};

  friend void save_aan(const std::string&, const AanNetwork&);
  friend AanNetwork load_aan(const std::string&);
};

// --- snapshot (magic AANS, version 1) ---------------------------------------
// Everything needed to resume training or evaluate identically: wiring,
// weights, sliding averages, per-neuron rates, feedback state.

inline void save_aan(const std::string& path, const AanNetwork& net) {
  BinWriter w(path);
  w.magic("AANS");
  w.u32(1);
  const AanConfig& c = net.cfg_;
  w.u64(c.seed);
  w.u32(static_cast<std::uint32_t>(c.depth));
  w.u8(static_cast<std::uint8_t>(c.conjecture));
  w.u32(static_cast<std::uint32_t>(c.params.pool_n));
  w.u32(static_cast<std::uint32_t>(c.params.fan_in));
  // rule constants travel with the net so a snapshot stands alone
  const float pf[] = {c.params.sigmoid.a, c.params.sigmoid.b, c.params.motor_f,
                      c.params.ico.mu_pos, c.params.ico.mu_neg, c.params.ico.phi,
                      c.params.hebb_mu0, c.params.hebb_anneal.theta, c.params.hebb_anneal.c,
                      c.params.aa_mu0_layer123, c.params.aa_mu0_and1, c.params.aa_mu0_and2,
                      c.params.aa_gU, c.params.aa_gV, c.params.aa_thr.rU, c.params.aa_thr.rV,
                      c.params.anneal_layer1.theta, c.params.anneal_layer1.c,
                      c.params.anneal_rest.theta, c.params.anneal_rest.c,
                      c.params.bal_mu0, c.params.bal_gU, c.params.bal_gV,
                      c.params.bal_thr.rU, c.params.bal_thr.rV,
                      c.params.bal_anneal.theta, c.params.bal_anneal.c};
  w.u32(static_cast<std::uint32_t>(std::size(pf)));
  w.f32s(pf, std::size(pf));

  w.u32(static_cast<std::uint32_t>(net.pools_.size()));
  for (const auto& p : net.pools_) {
    w.u32(static_cast<std::uint32_t>(p.name.size()));
    w.bytes(p.name.data(), p.name.size());
    w.u32(static_cast<std::uint32_t>(p.chain_layer));
    w.f32(p.gV);
    w.f32s(p.V.data(), p.V.size());
    w.u32(static_cast<std::uint32_t>(p.branches.size()));
    for (const auto& b : p.branches) {
      w.u8(static_cast<std::uint8_t>(b.rule));
      w.u32(static_cast<std::uint32_t>(b.srcs.size()));
      for (int s : b.srcs) w.u32(static_cast<std::uint32_t>(s));
      w.u32(static_cast<std::uint32_t>(b.src_dim));
      w.bytes(b.idx.data(), b.idx.size() * sizeof(std::uint32_t));
      w.f32s(b.w.data(), b.w.size());
      w.u32(static_cast<std::uint32_t>(b.mu.size()));
      w.f32s(b.mu.data(), b.mu.size());
      w.u32(static_cast<std::uint32_t>(b.U.size()));
      w.f32s(b.U.data(), b.U.size());
      w.f32(b.gU);
      w.f32(b.thr.rU);
      w.f32(b.thr.rV);
      w.f32(b.ann.theta);
      w.f32(b.ann.c);
    }
  }
  w.f32s(net.fbW_.data(), static_cast<std::size_t>(net.fbW_.size()));
  w.f32(net.fb_mu_);
}

inline AanNetwork load_aan(const std::string& path) {
  BinReader r(path);
  r.expect_magic("AANS", "network snapshot");
  if (r.u32() != 1) throw std::runtime_error("network snapshot: unsupported version");
  AanConfig c;
  c.seed = r.u64();
  c.depth = static_cast<int>(r.u32());
  c.conjecture = static_cast<Color>(r.u8());
  c.params.pool_n = static_cast<int>(r.u32());
  c.params.fan_in = static_cast<int>(r.u32());
  const std::uint32_t npf = r.u32();
  std::vector<float> pf(npf);
  r.f32s(pf.data(), npf);
  if (npf != 27) throw std::runtime_error("network snapshot: parameter block size");
  AanParams& P = c.params;
  P.sigmoid.a = pf[0]; P.sigmoid.b = pf[1]; P.motor_f = pf[2];
  P.ico.mu_pos = pf[3]; P.ico.mu_neg = pf[4]; P.ico.phi = pf[5];
  P.hebb_mu0 = pf[6]; P.hebb_anneal.theta = pf[7]; P.hebb_anneal.c = pf[8];
  P.aa_mu0_layer123 = pf[9]; P.aa_mu0_and1 = pf[10]; P.aa_mu0_and2 = pf[11];
  P.aa_gU = pf[12]; P.aa_gV = pf[13]; P.aa_thr.rU = pf[14]; P.aa_thr.rV = pf[15];
  P.anneal_layer1.theta = pf[16]; P.anneal_layer1.c = pf[17];
  P.anneal_rest.theta = pf[18]; P.anneal_rest.c = pf[19];
  P.bal_mu0 = pf[20]; P.bal_gU = pf[21]; P.bal_gV = pf[22];
  P.bal_thr.rU = pf[23]; P.bal_thr.rV = pf[24];
  P.bal_anneal.theta = pf[25]; P.bal_anneal.c = pf[26];

  AanNetwork net(c);  // rebuild structure, then overwrite every state array
  const std::uint32_t npools = r.u32();
  if (npools != net.pools_.size())
    throw std::runtime_error("network snapshot: pool count mismatch");
  for (auto& p : net.pools_) {
    const std::uint32_t nlen = r.u32();
    std::string name(nlen, '\0');
    r.bytes(name.data(), nlen);
    if (name != p.name) throw std::runtime_error("network snapshot: pool order mismatch");
    p.chain_layer = static_cast<int>(r.u32());
    p.gV = r.f32();
    r.f32s(p.V.data(), p.V.size());
    const std::uint32_t nbr = r.u32();
    if (nbr != p.branches.size())
      throw std::runtime_error("network snapshot: branch count mismatch");
    for (auto& b : p.branches) {
      b.rule = static_cast<Rule>(r.u8());
      const std::uint32_t nsrc = r.u32();
      b.srcs.resize(nsrc);
      for (auto& s : b.srcs) s = static_cast<int>(r.u32());
      b.src_dim = static_cast<int>(r.u32());
      r.bytes(b.idx.data(), b.idx.size() * sizeof(std::uint32_t));
      r.f32s(b.w.data(), b.w.size());
      const std::uint32_t nmu = r.u32();
      b.mu.resize(nmu);
      r.f32s(b.mu.data(), nmu);
      const std::uint32_t nU = r.u32();
      b.U.resize(nU);
      r.f32s(b.U.data(), nU);
      b.gU = r.f32();
      b.thr.rU = r.f32();
      b.thr.rV = r.f32();
      b.ann.theta = r.f32();
      b.ann.c = r.f32();
    }
  }
  r.f32s(net.fbW_.data(), static_cast<std::size_t>(net.fbW_.size()));
  net.fb_mu_ = r.f32();
  return net;
}

}  // namespace aan
