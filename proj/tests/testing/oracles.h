// Copyright 2026 The WMPlan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Independent reference implementations. Each one recomputes a quantity from
// first principles, without the library's incremental shortcuts.

#ifndef WMPLAN_TESTS_TESTING_ORACLES_H_
#define WMPLAN_TESTS_TESTING_ORACLES_H_

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "wmplan/critic.h"
#include "wmplan/segtree.h"
#include "wmplan/toy_world.h"

namespace wmplan::testing {

// Two-pass SSE of frames [lo, hi) about their mean.
inline double BruteSse(const FeatureStream& s, std::size_t lo, std::size_t hi) {
  const std::size_t d = static_cast<std::size_t>(s.dim);
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = lo; i < hi; ++i) {
    for (std::size_t k = 0; k < d; ++k) mean[k] += s.frames[i].v[k];
  }
  for (double& m : mean) m /= static_cast<double>(hi - lo);
  double sse = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      const double e = s.frames[i].v[k] - mean[k];
      sse += e * e;
    }
  }
  return sse;
}

struct BruteMerge {
  std::size_t lo, mid, hi;  // merged frames [lo, mid) and [mid, hi)
  double delta;
};

// Repeatedly merges the adjacent pair with the smallest SSE increase,
// recomputed from raw frames. Deltas within `tie_tol` (relative) of the
// minimum count as ties and go to the leftmost pair.
inline std::vector<BruteMerge> BruteForceMerges(const FeatureStream& s,
                                                double tie_tol = 1e-12) {
  std::vector<std::size_t> bounds;  // segment starts, plus the end
  for (std::size_t i = 0; i <= s.frames.size(); ++i) bounds.push_back(i);
  std::vector<BruteMerge> out;
  while (bounds.size() > 2) {
    std::vector<double> deltas;
    for (std::size_t i = 0; i + 2 < bounds.size(); ++i) {
      deltas.push_back(BruteSse(s, bounds[i], bounds[i + 2]) -
                       BruteSse(s, bounds[i], bounds[i + 1]) -
                       BruteSse(s, bounds[i + 1], bounds[i + 2]));
    }
    double lo = std::numeric_limits<double>::infinity();
    for (double d : deltas) lo = std::min(lo, d);
    std::size_t pick = 0;
    while (deltas[pick] > lo + tie_tol * std::max(1.0, std::abs(lo))) ++pick;
    out.push_back({bounds[pick], bounds[pick + 1], bounds[pick + 2], deltas[pick]});
    bounds.erase(bounds.begin() + static_cast<long>(pick) + 1);
  }
  return out;
}

// Critic forward pass written out loop by loop from the model definition.
inline double ReferenceCost(const CriticModel& m, const std::vector<double>& eg,
                            const std::vector<double>& et) {
  std::vector<double> z;
  for (double x : eg) z.push_back(x);
  for (double x : et) z.push_back(x);
  for (std::size_t i = 0; i < eg.size(); ++i) z.push_back(eg[i] * et[i]);
  for (std::size_t i = 0; i < eg.size(); ++i) z.push_back(std::abs(eg[i] - et[i]));
  double c = m.b2;
  for (int j = 0; j < m.hidden; ++j) {
    double a = m.b1[j];
    for (std::size_t i = 0; i < z.size(); ++i) a += m.w1[j * z.size() + i] * z[i];
    c += m.w2[j] * std::tanh(a);
  }
  return c;
}

// Squared hinge plus magnitude penalty, evaluated directly.
inline double ReferencePairLoss(double c_pos, double c_neg, double margin, double lambda) {
  const double hinge = margin + c_pos - c_neg;
  return (hinge > 0 ? hinge * hinge : 0.0) + lambda * (c_pos * c_pos + c_neg * c_neg);
}

// Visits every parameter of a model as a mutable double.
inline void ForEachParam(CriticModel& m, const std::function<void(double&)>& fn) {
  for (double& x : m.w1) fn(x);
  for (double& x : m.b1) fn(x);
  for (double& x : m.w2) fn(x);
  fn(m.b2);
}

inline std::vector<double> FlattenGrad(const CriticGradients& g) {
  std::vector<double> out = g.w1;
  out.insert(out.end(), g.b1.begin(), g.b1.end());
  out.insert(out.end(), g.w2.begin(), g.w2.end());
  out.push_back(g.b2);
  return out;
}

// Reference 64-bit FNV-1a, byte by byte.
inline std::uint64_t ReferenceFnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Lowest cost over every complete plan the search could emit: sequences that
// end when the goal holds, at `max_depth`, or when nothing is applicable.
// Only the first `branching` applicable actions (name order) are expanded.
inline double ExhaustiveOptimum(const ToyWorld& w, int branching, int max_depth,
                                double step_cost = 0.01) {
  double best = std::numeric_limits<double>::infinity();
  std::function<void(const FluentSet&, int)> walk = [&](const FluentSet& state, int depth) {
    std::vector<std::string> names;
    for (const auto& [name, a] : w.actions) {
      bool ok = true;
      for (const auto& p : a.pre) ok = ok && state.count(p) > 0;
      if (ok) names.push_back(name);
    }
    if (static_cast<int>(names.size()) > branching) names.resize(branching);
    if (names.empty()) {
      if (depth > 0) best = std::min(best, w.UnmetGoals(state) + step_cost * depth);
      return;
    }
    for (const auto& name : names) {
      const ToyAction& a = w.actions.at(name);
      FluentSet next;
      for (const auto& f : state) {
        if (!a.del.count(f)) next.insert(f);
      }
      next.insert(a.add.begin(), a.add.end());
      const int unmet = w.UnmetGoals(next);
      if (unmet == 0 || depth + 1 == max_depth) {
        best = std::min(best, unmet + step_cost * (depth + 1));
      } else {
        walk(next, depth + 1);
      }
    }
  };
  walk(w.initial, 0);
  return best;
}

// Direct Elo evaluation.
inline std::pair<double, double> ReferenceElo(double rw, double rl, double k) {
  const double ew = 1.0 / (1.0 + std::pow(10.0, (rl - rw) / 400.0));
  return {rw + k * (1 - ew), rl - k * (1 - ew)};
}

}  // namespace wmplan::testing

#endif  // WMPLAN_TESTS_TESTING_ORACLES_H_
