#pragma once
// Local learning rules. All of them are pure array transforms so they can be
// unit-tested by direct substitution; pools own the state (weights, sliding
// averages, per-neuron learning rates) and call in here once per
// presentation, in the fixed order: activations -> sliding averages ->
// weight updates -> learning-rate annealing.
//
// Conventions shared by every rule:
//  * weights never go below zero (clamped after each update);
//  * thresholds are strict (a value exactly at threshold contributes 0);
//  * learning rates anneal geometrically, per neuron, and never reset.

#include <algorithm>
#include <cmath>

namespace aan {

// Saturated-sum pool nonlinearity, v = 1/(1+e^{-a(y-b)}).
struct SigmoidParams {
  float a = 0.1f;
  float b = 100.0f;
};

inline float pool_sigmoid(float y, const SigmoidParams& p = {}) {
  return 1.0f / (1.0f + std::exp(-p.a * (y - p.b)));
}

// --- supervised bootstrap (reflex-avoidance learning) -----------------------
// Potentiate toward a missed trigger, depress an unwanted one, do nothing
// when trigger and requirement agree. Inputs below phi are treated as
// silence so the huge rates only act on genuinely active features.
struct IcoParams {
  float mu_pos = 80.0f;
  float mu_neg = 34.0f;
  float phi = 0.01f;
};

inline void ico_update(float* w, const float* u, int n, bool required,
                       bool present, const IcoParams& p) {
  if (required == present) return;
  const float mu = required ? p.mu_pos : -p.mu_neg;
  for (int i = 0; i < n; ++i) {
    if (u[i] > p.phi) w[i] = std::max(0.0f, w[i] + mu * u[i]);
  }
}

// --- plain Hebb (feedback pathway) ------------------------------------------
inline void hebb_update(float* w, const float* u, int n, float v, float mu) {
  for (int i = 0; i < n; ++i) w[i] = std::max(0.0f, w[i] + mu * v * u[i]);
}

// --- annealing --------------------------------------------------------------
// Geometric learning-rate decay, triggered while the watched output is
// saturated above theta. Returns the new rate.
struct AnnealParams {
  float theta = 0.99f;
  float c = 0.9f;
};

inline float anneal(float mu, float v, const AnnealParams& p) {
  return v > p.theta ? mu * p.c : mu;
}

// --- sliding averages -------------------------------------------------------
// s <- g*s + (1-g)*x, elementwise. Fixed point is the (stationary) input
// mean; state starts at 0 and is never reset.
inline void sliding_update(float* s, const float* x, int n, float g) {
  for (int i = 0; i < n; ++i) s[i] = g * s[i] + (1.0f - g) * x[i];
}

inline float sliding_update(float s, float x, float g) {
  return g * s + (1.0f - g) * x;
}

// --- above-average Hebb ------------------------------------------------------
// Grows weights only where the input is above its own recent average while
// the neuron's output is above its recent average: both signals are
// mean-subtracted with ratio'd thresholds and clamped, the output side
// reduced to a step gate. Bootstraps from w=0.01 without any supervision.
struct AAHebbParams {
  float rU = 1.0f;
  float rV = 0.1f;
};

inline void aa_hebb_update(float* w, const float* u, const float* U, int n,
                           float v, float V, float mu, const AAHebbParams& p) {
  if (!(v > p.rV * V)) return;  // H(v_delta), with H(0) = 0
  for (int i = 0; i < n; ++i) {
    const float thr = p.rU * U[i];
    if (u[i] > thr) w[i] = std::max(0.0f, w[i] + mu * (u[i] - thr));
  }
}

// --- balanced Hebb / anti-Hebb ----------------------------------------------
// Same input side as above-average Hebb, but the output side keeps its sign:
// above-average output strengthens, below-average output weakens, exact
// balance does nothing. The negative branch is what keeps coincidences that
// contradict the running conjecture from accumulating weight.
inline void balanced_update(float* w, const float* u, const float* U, int n,
                            float v, float V, float mu, const AAHebbParams& p) {
  const float vd = v - p.rV * V;  // deliberately unclamped
  if (vd == 0.0f) return;
  const float s = vd > 0.0f ? 1.0f : -1.0f;
  for (int i = 0; i < n; ++i) {
    const float thr = p.rU * U[i];
    if (u[i] > thr) w[i] = std::max(0.0f, w[i] + mu * s * (u[i] - thr));
  }
}

}  // namespace aan
