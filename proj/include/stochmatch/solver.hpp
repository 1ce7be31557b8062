#pragma once

// Exact maximum-weight matching on general graphs.
//
// Primal-dual blossom algorithm (Edmonds; Galil's O(n^3) formulation), in
// the array-based layout popularised by J. van Rantwijk's mwmatching. Vertex
// duals are stored doubled (slack = y_u + y_v - 2 w), which keeps every dual
// an integer when weights are integers.

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <vector>

#include "error.hpp"
#include "graph.hpp"

namespace stochmatch {

namespace detail {

class BlossomSolver {
 public:
  struct InEdge {
    std::int32_t i, j;
    Weight w;
  };

  BlossomSolver(std::int32_t nvertex, std::vector<InEdge> edges)
      : nv_(nvertex), edges_(std::move(edges)) {}

  /// mate[v] = matched vertex or -1.
  std::vector<std::int32_t> solve() {
    const std::int32_t nedge = static_cast<std::int32_t>(edges_.size());
    if (nedge == 0 || nv_ == 0) return std::vector<std::int32_t>(static_cast<std::size_t>(nv_), -1);
    Weight maxweight = 0;
    for (const auto& e : edges_) maxweight = std::max(maxweight, e.w);

    endpoint_.resize(2 * static_cast<std::size_t>(nedge));
    for (std::int32_t p = 0; p < 2 * nedge; ++p) endpoint_[p] = (p % 2 == 0) ? edges_[p / 2].i : edges_[p / 2].j;
    neighbend_.assign(nv_, {});
    for (std::int32_t k = 0; k < nedge; ++k) {
      neighbend_[edges_[k].i].push_back(2 * k + 1);
      neighbend_[edges_[k].j].push_back(2 * k);
    }
    const std::size_t n2 = 2 * static_cast<std::size_t>(nv_);
    mate_.assign(nv_, -1);
    label_.assign(n2, 0);
    labelend_.assign(n2, -1);
    inblossom_.resize(nv_);
    for (std::int32_t v = 0; v < nv_; ++v) inblossom_[v] = v;
    blossomparent_.assign(n2, -1);
    blossomchilds_.assign(n2, {});
    blossombase_.assign(n2, -1);
    for (std::int32_t v = 0; v < nv_; ++v) blossombase_[v] = v;
    blossomendps_.assign(n2, {});
    bestedge_.assign(n2, -1);
    blossombestedges_.assign(n2, {});
    has_bestlist_.assign(n2, 0);
    unusedblossoms_.clear();
    for (std::int32_t b = nv_; b < 2 * nv_; ++b) unusedblossoms_.push_back(b);
    dualvar_.assign(n2, 0);
    for (std::int32_t v = 0; v < nv_; ++v) dualvar_[v] = maxweight;
    allowedge_.assign(nedge, 0);
    queue_.clear();

    for (std::int32_t t = 0; t < nv_; ++t) {
      std::fill(label_.begin(), label_.end(), 0);
      std::fill(bestedge_.begin(), bestedge_.end(), -1);
      for (std::size_t b = nv_; b < n2; ++b) {
        blossombestedges_[b].clear();
        has_bestlist_[b] = 0;
      }
      std::fill(allowedge_.begin(), allowedge_.end(), 0);
      queue_.clear();
      for (std::int32_t v = 0; v < nv_; ++v)
        if (mate_[v] == -1 && label_[inblossom_[v]] == 0) assign_label(v, 1, -1);

      bool augmented = false;
      while (true) {
        while (!queue_.empty() && !augmented) {
          std::int32_t v = queue_.back();
          queue_.pop_back();
          for (std::int32_t p : neighbend_[v]) {
            std::int32_t k = p / 2;
            std::int32_t w = endpoint_[p];
            if (inblossom_[v] == inblossom_[w]) continue;
            Weight kslack = 0;
            if (!allowedge_[k]) {
              kslack = slack(k);
              if (kslack <= 0) allowedge_[k] = 1;
            }
            if (allowedge_[k]) {
              if (label_[inblossom_[w]] == 0) {
                assign_label(w, 2, p ^ 1);
              } else if (label_[inblossom_[w]] == 1) {
                std::int32_t base = scan_blossom(v, w);
                if (base >= 0) {
                  add_blossom(base, k);
                } else {
                  augment_matching(k);
                  augmented = true;
                  break;
                }
              } else if (label_[w] == 0) {
                label_[w] = 2;
                labelend_[w] = p ^ 1;
              }
            } else if (label_[inblossom_[w]] == 1) {
              std::int32_t b = inblossom_[v];
              if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) bestedge_[b] = k;
            } else if (label_[w] == 0) {
              if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) bestedge_[w] = k;
            }
          }
        }
        if (augmented) break;

        int deltatype = 1;
        Weight delta = dualvar_[0];
        for (std::int32_t v = 1; v < nv_; ++v) delta = std::min(delta, dualvar_[v]);
        std::int32_t deltaedge = -1, deltablossom = -1;
        for (std::int32_t v = 0; v < nv_; ++v) {
          if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
            Weight d = slack(bestedge_[v]);
            if (d < delta) {
              delta = d;
              deltatype = 2;
              deltaedge = bestedge_[v];
            }
          }
        }
        for (std::int32_t b = 0; b < 2 * nv_; ++b) {
          if (blossomparent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
            Weight kslack = slack(bestedge_[b]);
            assert(kslack % 2 == 0);
            Weight d = kslack / 2;
            if (d < delta) {
              delta = d;
              deltatype = 3;
              deltaedge = bestedge_[b];
            }
          }
        }
        for (std::int32_t b = nv_; b < 2 * nv_; ++b) {
          if (blossombase_[b] >= 0 && blossomparent_[b] == -1 && label_[b] == 2 && dualvar_[b] < delta) {
            delta = dualvar_[b];
            deltatype = 4;
            deltablossom = b;
          }
        }
        for (std::int32_t v = 0; v < nv_; ++v) {
          if (label_[inblossom_[v]] == 1)
            dualvar_[v] -= delta;
          else if (label_[inblossom_[v]] == 2)
            dualvar_[v] += delta;
        }
        for (std::int32_t b = nv_; b < 2 * nv_; ++b) {
          if (blossombase_[b] >= 0 && blossomparent_[b] == -1) {
            if (label_[b] == 1)
              dualvar_[b] += delta;
            else if (label_[b] == 2)
              dualvar_[b] -= delta;
          }
        }
        if (deltatype == 1) {
          break;
        } else if (deltatype == 2) {
          allowedge_[deltaedge] = 1;
          std::int32_t i = edges_[deltaedge].i, j = edges_[deltaedge].j;
          if (label_[inblossom_[i]] == 0) std::swap(i, j);
          queue_.push_back(i);
        } else if (deltatype == 3) {
          allowedge_[deltaedge] = 1;
          queue_.push_back(edges_[deltaedge].i);
        } else {
          expand_blossom(deltablossom, false);
        }
      }
      if (!augmented) break;
      for (std::int32_t b = nv_; b < 2 * nv_; ++b)
        if (blossomparent_[b] == -1 && blossombase_[b] >= 0 && label_[b] == 1 && dualvar_[b] == 0)
          expand_blossom(b, true);
    }
    std::vector<std::int32_t> out(nv_, -1);
    for (std::int32_t v = 0; v < nv_; ++v)
      if (mate_[v] >= 0) out[v] = endpoint_[mate_[v]];
    return out;
  }

 private:
  Weight slack(std::int32_t k) const {
    const auto& e = edges_[k];
    return dualvar_[e.i] + dualvar_[e.j] - 2 * e.w;
  }

  void leaves(std::int32_t b, std::vector<std::int32_t>& out) const {
    if (b < nv_) {
      out.push_back(b);
      return;
    }
    for (std::int32_t t : blossomchilds_[b]) leaves(t, out);
  }
  std::vector<std::int32_t> leaves(std::int32_t b) const {
    std::vector<std::int32_t> out;
    leaves(b, out);
    return out;
  }

  void assign_label(std::int32_t w, int t, std::int32_t p) {
    std::int32_t b = inblossom_[w];
    label_[w] = label_[b] = t;
    labelend_[w] = labelend_[b] = p;
    bestedge_[w] = bestedge_[b] = -1;
    if (t == 1) {
      leaves(b, queue_);
    } else if (t == 2) {
      std::int32_t base = blossombase_[b];
      assign_label(endpoint_[mate_[base]], 1, mate_[base] ^ 1);
    }
  }

  std::int32_t scan_blossom(std::int32_t v, std::int32_t w) {
    std::vector<std::int32_t> path;
    std::int32_t base = -1;
    while (v != -1 || w != -1) {
      std::int32_t b = inblossom_[v];
      if (label_[b] & 4) {
        base = blossombase_[b];
        break;
      }
      path.push_back(b);
      label_[b] = 5;
      if (labelend_[b] == -1) {
        v = -1;
      } else {
        v = endpoint_[labelend_[b]];
        b = inblossom_[v];
        v = endpoint_[labelend_[b]];
      }
      if (w != -1) std::swap(v, w);
    }
    for (std::int32_t b : path) label_[b] = 1;
    return base;
  }

  void add_blossom(std::int32_t base, std::int32_t k) {
    std::int32_t v = edges_[k].i, w = edges_[k].j;
    std::int32_t bb = inblossom_[base];
    std::int32_t bv = inblossom_[v];
    std::int32_t bw = inblossom_[w];
    std::int32_t b = unusedblossoms_.back();
    unusedblossoms_.pop_back();
    blossombase_[b] = base;
    blossomparent_[b] = -1;
    blossomparent_[bb] = b;
    auto& path = blossomchilds_[b];
    auto& endps = blossomendps_[b];
    path.clear();
    endps.clear();
    while (bv != bb) {
      blossomparent_[bv] = b;
      path.push_back(bv);
      endps.push_back(labelend_[bv]);
      v = endpoint_[labelend_[bv]];
      bv = inblossom_[v];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
      blossomparent_[bw] = b;
      path.push_back(bw);
      endps.push_back(labelend_[bw] ^ 1);
      w = endpoint_[labelend_[bw]];
      bw = inblossom_[w];
    }
    label_[b] = 1;
    labelend_[b] = labelend_[bb];
    dualvar_[b] = 0;
    for (std::int32_t x : leaves(b)) {
      if (label_[inblossom_[x]] == 2) queue_.push_back(x);
      inblossom_[x] = b;
    }
    std::vector<std::int32_t> bestedgeto(2 * static_cast<std::size_t>(nv_), -1);
    for (std::int32_t sub : path) {
      std::vector<std::vector<std::int32_t>> nblists;
      if (!has_bestlist_[sub]) {
        for (std::int32_t x : leaves(sub)) {
          std::vector<std::int32_t> l;
          for (std::int32_t p : neighbend_[x]) l.push_back(p / 2);
          nblists.push_back(std::move(l));
        }
      } else {
        nblists.push_back(blossombestedges_[sub]);
      }
      for (const auto& nblist : nblists) {
        for (std::int32_t kk : nblist) {
          std::int32_t i = edges_[kk].i, j = edges_[kk].j;
          if (inblossom_[j] == b) std::swap(i, j);
          std::int32_t bj = inblossom_[j];
          if (bj != b && label_[bj] == 1 && (bestedgeto[bj] == -1 || slack(kk) < slack(bestedgeto[bj])))
            bestedgeto[bj] = kk;
        }
      }
      blossombestedges_[sub].clear();
      has_bestlist_[sub] = 0;
      bestedge_[sub] = -1;
    }
    blossombestedges_[b].clear();
    for (std::int32_t kk : bestedgeto)
      if (kk != -1) blossombestedges_[b].push_back(kk);
    has_bestlist_[b] = 1;
    bestedge_[b] = -1;
    for (std::int32_t kk : blossombestedges_[b])
      if (bestedge_[b] == -1 || slack(kk) < slack(bestedge_[b])) bestedge_[b] = kk;
  }

  void expand_blossom(std::int32_t b, bool endstage) {
    for (std::int32_t s : blossomchilds_[b]) {
      blossomparent_[s] = -1;
      if (s < nv_) {
        inblossom_[s] = s;
      } else if (endstage && dualvar_[s] == 0) {
        expand_blossom(s, endstage);
      } else {
        for (std::int32_t x : leaves(s)) inblossom_[x] = s;
      }
    }
    if (!endstage && label_[b] == 2) {
      const auto& childs = blossomchilds_[b];
      const auto& endps = blossomendps_[b];
      const auto len = static_cast<std::int32_t>(childs.size());
      auto at = [len](std::int32_t j) { return static_cast<std::size_t>(((j % len) + len) % len); };
      std::int32_t entrychild = inblossom_[endpoint_[labelend_[b] ^ 1]];
      std::int32_t j = static_cast<std::int32_t>(std::find(childs.begin(), childs.end(), entrychild) - childs.begin());
      std::int32_t jstep, endptrick;
      if (j & 1) {
        j -= len;
        jstep = 1;
        endptrick = 0;
      } else {
        jstep = -1;
        endptrick = 1;
      }
      std::int32_t p = labelend_[b];
      while (j != 0) {
        label_[endpoint_[p ^ 1]] = 0;
        label_[endpoint_[endps[at(j - endptrick)] ^ endptrick ^ 1]] = 0;
        assign_label(endpoint_[p ^ 1], 2, p);
        allowedge_[endps[at(j - endptrick)] / 2] = 1;
        j += jstep;
        p = endps[at(j - endptrick)] ^ endptrick;
        allowedge_[p / 2] = 1;
        j += jstep;
      }
      std::int32_t bv = childs[at(j)];
      label_[endpoint_[p ^ 1]] = label_[bv] = 2;
      labelend_[endpoint_[p ^ 1]] = labelend_[bv] = p;
      bestedge_[bv] = -1;
      j += jstep;
      while (childs[at(j)] != entrychild) {
        bv = childs[at(j)];
        if (label_[bv] == 1) {
          j += jstep;
          continue;
        }
        std::int32_t found = -1;
        for (std::int32_t x : leaves(bv)) {
          if (label_[x] != 0) {
            found = x;
            break;
          }
        }
        if (found >= 0) {
          label_[found] = 0;
          label_[endpoint_[mate_[blossombase_[bv]]]] = 0;
          assign_label(found, 2, labelend_[found]);
        }
        j += jstep;
      }
    }
    label_[b] = labelend_[b] = -1;
    blossomchilds_[b].clear();
    blossomendps_[b].clear();
    blossombase_[b] = -1;
    blossombestedges_[b].clear();
    has_bestlist_[b] = 0;
    bestedge_[b] = -1;
    unusedblossoms_.push_back(b);
  }

  void augment_blossom(std::int32_t b, std::int32_t v) {
    std::int32_t t = v;
    while (blossomparent_[t] != b) t = blossomparent_[t];
    if (t >= nv_) augment_blossom(t, v);
    auto& childs = blossomchilds_[b];
    auto& endps = blossomendps_[b];
    const auto len = static_cast<std::int32_t>(childs.size());
    auto at = [len](std::int32_t j) { return static_cast<std::size_t>(((j % len) + len) % len); };
    std::int32_t i = static_cast<std::int32_t>(std::find(childs.begin(), childs.end(), t) - childs.begin());
    std::int32_t j = i;
    std::int32_t jstep, endptrick;
    if (i & 1) {
      j -= len;
      jstep = 1;
      endptrick = 0;
    } else {
      jstep = -1;
      endptrick = 1;
    }
    while (j != 0) {
      j += jstep;
      t = childs[at(j)];
      std::int32_t p = endps[at(j - endptrick)] ^ endptrick;
      if (t >= nv_) augment_blossom(t, endpoint_[p]);
      j += jstep;
      t = childs[at(j)];
      if (t >= nv_) augment_blossom(t, endpoint_[p ^ 1]);
      mate_[endpoint_[p]] = p ^ 1;
      mate_[endpoint_[p ^ 1]] = p;
    }
    std::rotate(childs.begin(), childs.begin() + i, childs.end());
    std::rotate(endps.begin(), endps.begin() + i, endps.end());
    blossombase_[b] = blossombase_[childs[0]];
  }

  void augment_matching(std::int32_t k) {
    const std::int32_t v = edges_[k].i, w = edges_[k].j;
    const std::int32_t starts[2][2] = {{v, 2 * k + 1}, {w, 2 * k}};
    for (const auto& sp : starts) {
      std::int32_t s = sp[0], p = sp[1];
      while (true) {
        std::int32_t bs = inblossom_[s];
        if (bs >= nv_) augment_blossom(bs, s);
        mate_[s] = p;
        if (labelend_[bs] == -1) break;
        std::int32_t t = endpoint_[labelend_[bs]];
        std::int32_t bt = inblossom_[t];
        s = endpoint_[labelend_[bt]];
        std::int32_t j = endpoint_[labelend_[bt] ^ 1];
        if (bt >= nv_) augment_blossom(bt, j);
        mate_[j] = labelend_[bt];
        p = labelend_[bt] ^ 1;
      }
    }
  }

  std::int32_t nv_;
  std::vector<InEdge> edges_;
  std::vector<std::int32_t> endpoint_;
  std::vector<std::vector<std::int32_t>> neighbend_;
  std::vector<std::int32_t> mate_, label_, labelend_, inblossom_, blossomparent_, blossombase_, bestedge_;
  std::vector<std::vector<std::int32_t>> blossomchilds_, blossomendps_, blossombestedges_;
  std::vector<char> has_bestlist_, allowedge_;
  std::vector<std::int32_t> unusedblossoms_, queue_;
  std::vector<Weight> dualvar_;
};

}  // namespace detail

/// Maximum-weight matching of (V, active). Deterministic in (g, active).
inline Matching max_weight_matching(const WeightedGraph& g, const EdgeSet& active) {
  std::vector<detail::BlossomSolver::InEdge> in;
  std::vector<EdgeId> ids;
  // Zero-weight edges never raise the optimum; leaving them out keeps the
  // solver smaller and the output free of weightless padding.
  for (EdgeId e : active.ids()) {
    const Edge& ed = g.edge(e);
    if (ed.w <= 0) continue;
    in.push_back({ed.u, ed.v, ed.w});
    ids.push_back(e);
  }
  if (in.empty()) return Matching{};
  // Compress to the touched vertices; isolated vertices never matter.
  std::vector<std::int32_t> local(static_cast<std::size_t>(g.n()), -1);
  std::int32_t nloc = 0;
  for (auto& e : in) {
    for (auto* x : {&e.i, &e.j}) {
      auto& slot = local[static_cast<std::size_t>(*x)];
      if (slot < 0) slot = nloc++;
      *x = slot;
    }
  }
  detail::BlossomSolver solver(nloc, in);
  auto mate = solver.solve();
  std::vector<EdgeId> chosen;
  for (std::size_t k = 0; k < in.size(); ++k) {
    if (mate[static_cast<std::size_t>(in[k].i)] == in[k].j) chosen.push_back(ids[k]);
  }
  return validate_matching(g, chosen);
}

inline Matching max_weight_matching(const WeightedGraph& g) { return max_weight_matching(g, g.all_edges()); }

/// Exhaustive-search oracle. Refuses more than `limit` active edges.
inline Matching brute_force_matching(const WeightedGraph& g, const EdgeSet& active, std::size_t limit = 24) {
  const auto ids = active.ids();
  if (ids.size() > limit)
    throw Error(ErrorCode::TooLarge, std::to_string(ids.size()) + " active edges exceeds oracle limit " + std::to_string(limit));
  std::vector<char> used(static_cast<std::size_t>(g.n()), 0);
  std::vector<EdgeId> cur, best;
  Weight cur_w = 0, best_w = -1;
  // Branch on each edge in id order: skip it, or take it if both ends are free.
  auto rec = [&](auto&& self, std::size_t idx) -> void {
    if (idx == ids.size()) {
      if (cur_w > best_w) {
        best_w = cur_w;
        best = cur;
      }
      return;
    }
    const Edge& e = g.edge(ids[idx]);
    if (!used[static_cast<std::size_t>(e.u)] && !used[static_cast<std::size_t>(e.v)]) {
      used[static_cast<std::size_t>(e.u)] = used[static_cast<std::size_t>(e.v)] = 1;
      cur.push_back(e.id);
      cur_w += e.w;
      self(self, idx + 1);
      cur_w -= e.w;
      cur.pop_back();
      used[static_cast<std::size_t>(e.u)] = used[static_cast<std::size_t>(e.v)] = 0;
    }
    self(self, idx + 1);
  };
  rec(rec, 0);
  return validate_matching(g, best);
}

}  // namespace stochmatch
