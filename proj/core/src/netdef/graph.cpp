// Copyright 2026 The mgrind Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mgrind/netdef/graph.hpp"

#include <algorithm>
#include <map>
#include <queue>

namespace mgrind {

std::vector<int> Wiring::outputs() const {
  std::vector<int> out;
  std::vector<bool> seen(versions.size(), false);
  auto note = [&](int v) {
    if (consumers[v].empty() && !seen[v]) {
      seen[v] = true;
      out.push_back(v);
    }
  };
  for (std::size_t v = 0; v < versions.size(); ++v) {
    if (versions[v].producer < 0) note(static_cast<int>(v));
  }
  for (std::size_t layer : order) {
    for (int v : tops[layer]) note(v);
  }
  return out;
}

namespace {

bool in_place_top(const LayerSpec& spec, const std::string& top) {
  return std::find(spec.bottoms.begin(), spec.bottoms.end(), top) != spec.bottoms.end();
}

SourcePos bottom_pos(const LayerSpec& spec, std::size_t i) {
  return i < spec.bottom_pos.size() ? spec.bottom_pos[i] : spec.pos;
}

[[noreturn]] void report_cycle(const NetDef& def, const Wiring& w,
                               const std::vector<int>& pending) {
  // Every pending layer waits on some pending producer, so walking producers
  // from any pending layer must revisit a layer.
  auto waiting_on = [&](std::size_t layer) -> std::pair<int, std::size_t> {
    const auto& bs = w.bottoms[layer];
    for (std::size_t i = 0; i < bs.size(); ++i) {
      const int p = w.versions[bs[i]].producer;
      if (p >= 0 && pending[p] > 0) return {p, i};
    }
    return {-1, 0};
  };
  std::size_t start = 0;
  while (pending[start] == 0) ++start;
  std::vector<int> visit(def.layers.size(), -1);
  std::vector<std::size_t> path;
  std::size_t cur = start;
  while (visit[cur] < 0) {
    visit[cur] = static_cast<int>(path.size());
    path.push_back(cur);
    cur = static_cast<std::size_t>(waiting_on(cur).first);
  }
  // path[visit[cur]..] is the cycle, in reverse data-flow order.
  std::vector<std::size_t> cycle(path.begin() + visit[cur], path.end());
  std::reverse(cycle.begin(), cycle.end());
  const auto first = std::min_element(cycle.begin(), cycle.end());
  std::rotate(cycle.begin(), first, cycle.end());

  // Bottom slot of `to` fed by layer `from`.
  auto slot_from = [&](std::size_t to, std::size_t from) {
    const auto& bs = w.bottoms[to];
    std::size_t i = 0;
    while (w.versions[bs[i]].producer != static_cast<int>(from)) ++i;
    return i;
  };
  const std::size_t head = cycle.front();
  const std::size_t slot = slot_from(head, cycle.back());
  std::string blobs = def.layers[head].bottoms[slot];
  std::string layers = "'" + def.layers[head].name + "'";
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const std::size_t to = cycle[(i + 1) % cycle.size()];
    blobs += " -> " + def.layers[to].bottoms[slot_from(to, cycle[i])];
    layers += " -> '" + def.layers[to].name + "'";
  }
  throw ParseError(bottom_pos(def.layers[head], slot),
                   "cycle through blobs " + blobs + " (layers " + layers + ")");
}

}  // namespace

Wiring resolve_wiring(const NetDef& def) {
  Wiring w;
  const std::size_t n = def.layers.size();
  w.bottoms.resize(n);
  w.tops.resize(n);

  auto add_version = [&](const std::string& name, int producer) {
    w.versions.push_back({name, producer});
    return static_cast<int>(w.versions.size()) - 1;
  };

  // Plain producers, wherever they are in the file.
  std::map<std::string, int> base;
  std::map<std::string, std::string> base_owner;
  for (const auto& in : def.inputs) {
    if (base.count(in.name) != 0) {
      throw ParseError(in.pos, "input '" + in.name + "' is declared twice");
    }
    base[in.name] = add_version(in.name, -1);
    base_owner[in.name] = "input declaration";
  }
  std::vector<std::vector<int>> plain_tops(n);
  for (std::size_t l = 0; l < n; ++l) {
    const LayerSpec& spec = def.layers[l];
    for (std::size_t t = 0; t < spec.tops.size(); ++t) {
      const std::string& top = spec.tops[t];
      for (std::size_t u = 0; u < t; ++u) {
        if (spec.tops[u] == top) {
          throw ParseError(spec.pos, "layer '" + spec.name + "' lists top '" + top + "' twice");
        }
      }
      if (in_place_top(spec, top)) {
        plain_tops[l].push_back(-1);
        continue;
      }
      if (const auto it = base.find(top); it != base.end()) {
        throw ParseError(spec.pos, "blob '" + top + "' is produced by both " +
                                       base_owner[top] + " and layer '" + spec.name + "'");
      }
      const int v = add_version(top, static_cast<int>(l));
      base[top] = v;
      base_owner[top] = "layer '" + spec.name + "'";
      plain_tops[l].push_back(v);
    }
  }

  // Bottoms see the newest earlier in-place rewrite, else the plain producer.
  std::map<std::string, int> latest;
  std::vector<int> rewrites(n, -1);
  for (std::size_t l = 0; l < n; ++l) {
    const LayerSpec& spec = def.layers[l];
    for (std::size_t b = 0; b < spec.bottoms.size(); ++b) {
      const std::string& name = spec.bottoms[b];
      int v = -1;
      if (const auto it = latest.find(name); it != latest.end()) {
        v = it->second;
      } else if (const auto jt = base.find(name); jt != base.end()) {
        v = jt->second;
      } else {
        throw ParseError(bottom_pos(spec, b), "bottom '" + name + "' of layer '" + spec.name +
                                                  "' is not produced by any layer or input");
      }
      w.bottoms[l].push_back(v);
    }
    for (std::size_t t = 0; t < spec.tops.size(); ++t) {
      int v = plain_tops[l][t];
      if (v < 0) {
        const auto slot = std::find(spec.bottoms.begin(), spec.bottoms.end(), spec.tops[t]) -
                          spec.bottoms.begin();
        rewrites[l] = w.bottoms[l][slot];
        v = add_version(spec.tops[t], static_cast<int>(l));
        latest[spec.tops[t]] = v;
      }
      w.tops[l].push_back(v);
    }
  }

  w.consumers.assign(w.versions.size(), {});
  for (std::size_t l = 0; l < n; ++l) {
    for (int v : w.bottoms[l]) {
      auto& c = w.consumers[v];
      if (c.empty() || c.back() != static_cast<int>(l)) c.push_back(static_cast<int>(l));
    }
  }
  for (std::size_t l = 0; l < n; ++l) {
    if (rewrites[l] < 0) continue;
    for (int other : w.consumers[rewrites[l]]) {
      if (other == static_cast<int>(l)) continue;
      const LayerSpec& spec = def.layers[l];
      throw ParseError(spec.pos, "layer '" + spec.name + "' rewrites blob '" +
                                     w.versions[rewrites[l]].name +
                                     "' in place, but layer '" + def.layers[other].name +
                                     "' also reads it");
    }
  }

  // Kahn's algorithm; the min-heap keeps file order among ready layers.
  std::vector<int> pending(n, 0);
  std::vector<std::vector<std::size_t>> dependents(n);
  for (std::size_t l = 0; l < n; ++l) {
    for (int v : w.bottoms[l]) {
      const int p = w.versions[v].producer;
      if (p < 0) continue;
      ++pending[l];
      dependents[p].push_back(l);
    }
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t l = 0; l < n; ++l) {
    if (pending[l] == 0) ready.push(l);
  }
  while (!ready.empty()) {
    const std::size_t l = ready.top();
    ready.pop();
    w.order.push_back(l);
    for (std::size_t d : dependents[l]) {
      if (--pending[d] == 0) ready.push(d);
    }
  }
  if (w.order.size() != n) report_cycle(def, w, pending);
  return w;
}

std::vector<std::size_t> toposort(const NetDef& def) { return resolve_wiring(def).order; }

}  // namespace mgrind
