// Copyright 2026 The GenLI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "genli/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <type_traits>

#include "genli/errors.hpp"

namespace genli::nn {
namespace {

// \`detail\` is a string or a callable building one; callables keep message
// formatting off the hot path.
template <typename Detail>
void require(bool ok, const char* op, Detail&& detail) {
  if (ok) return;
  if constexpr (std::is_invocable_v<Detail>) {
    throw ConfigError(std::string(op) + ": " + detail());
  } else {
    throw ConfigError(std::string(op) + ": " + std::string(detail));
  }
}

std::string shapes(const Tensor2D& a, const Tensor2D& b) {
  return a.shape_string() + " vs " + b.shape_string();
}

bool key_valid(const RowGroups& g, std::size_t row) {
  return g.valid.empty() || g.valid[row] != 0;
}

void check_groups(const RowGroups& g, std::size_t rows, const char* op) {
  require(g.begin.size() == g.count.size(), op, "group begin/count size mismatch");
  require(g.valid.empty() || g.valid.size() == rows, op, [&] { return "validity mask has " + std::to_string(g.valid.size()) + " entries for " +
              std::to_string(rows) + " rows"; });
  for (std::size_t i = 0; i < g.begin.size(); ++i) {
    require(g.begin[i] + g.count[i] <= rows, op, [&] { return "group " + std::to_string(i) + " runs past row " + std::to_string(rows); });
  }
}

}  // namespace

void softmax_inplace(std::span<double> row) {
  if (row.empty()) return;
  const double m = *std::max_element(row.begin(), row.end());
  double total = 0.0;
  for (double& v : row) {
    v = std::exp(v - m);
    total += v;
  }
  const double inv = 1.0 / total;
  for (double& v : row) v *= inv;
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var matmul(Tape& t, Var a, Var b) {
  const Tensor2D& av = t.value(a);
  const Tensor2D& bv = t.value(b);
  require(av.cols() == bv.rows(), "matmul", [&] { return shapes(av, bv); });
  Tensor2D out(av.rows(), bv.cols());
  out.matrix().noalias() = av.matrix() * bv.matrix();
  return t.record("matmul", std::move(out), {a, b},
                  [a, b](Tape& t, const Tensor2D&, const Tensor2D& g) {
                    if (t.requires_grad(a)) {
                      t.grad(a).matrix().noalias() +=
                          g.matrix() * t.value(b).matrix().transpose();
                    }
                    if (t.requires_grad(b)) {
                      t.grad(b).matrix().noalias() +=
                          t.value(a).matrix().transpose() * g.matrix();
                    }
                  });
}

Var add_bias(Tape& t, Var x, Var bias) {
  const Tensor2D& xv = t.value(x);
  const Tensor2D& bv = t.value(bias);
  require(bv.rows() == 1 && bv.cols() == xv.cols(), "add_bias", [&] { return shapes(xv, bv); });
  Tensor2D out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bv[c];
  }
  return t.record("add_bias", std::move(out), {x, bias},
                  [x, bias](Tape& t, const Tensor2D&, const Tensor2D& g) {
                    if (t.requires_grad(x)) t.grad(x).matrix() += g.matrix();
                    if (t.requires_grad(bias)) {
                      t.grad(bias).matrix() += g.matrix().colwise().sum();
                    }
                  });
}

Var add(Tape& t, Var a, Var b) {
  const Tensor2D& av = t.value(a);
  const Tensor2D& bv = t.value(b);
  require(av.same_shape(bv), "add", [&] { return shapes(av, bv); });
  Tensor2D out(av.rows(), av.cols());
  out.matrix() = av.matrix() + bv.matrix();
  return t.record("add", std::move(out), {a, b}, [a, b](Tape& t, const Tensor2D&, const Tensor2D& g) {
    if (t.requires_grad(a)) t.grad(a).matrix() += g.matrix();
    if (t.requires_grad(b)) t.grad(b).matrix() += g.matrix();
  });
}

Var sub(Tape& t, Var a, Var b) {
  const Tensor2D& av = t.value(a);
  const Tensor2D& bv = t.value(b);
  require(av.same_shape(bv), "sub", [&] { return shapes(av, bv); });
  Tensor2D out(av.rows(), av.cols());
  out.matrix() = av.matrix() - bv.matrix();
  return t.record("sub", std::move(out), {a, b}, [a, b](Tape& t, const Tensor2D&, const Tensor2D& g) {
    if (t.requires_grad(a)) t.grad(a).matrix() += g.matrix();
    if (t.requires_grad(b)) t.grad(b).matrix() -= g.matrix();
  });
}

Var scale(Tape& t, Var x, double factor) {
  Tensor2D out = t.value(x);
  out.matrix() *= factor;
  return t.record("scale", std::move(out), {x}, [x, factor](Tape& t, const Tensor2D&, const Tensor2D& g) {
    t.grad(x).matrix() += factor * g.matrix();
  });
}

Var mul(Tape& t, Var a, Var b) {
  const Tensor2D& av = t.value(a);
  const Tensor2D& bv = t.value(b);
  require(av.same_shape(bv), "mul", [&] { return shapes(av, bv); });
  Tensor2D out(av.rows(), av.cols());
  out.matrix() = av.matrix().cwiseProduct(bv.matrix());
  return t.record("mul", std::move(out), {a, b}, [a, b](Tape& t, const Tensor2D&, const Tensor2D& g) {
    if (t.requires_grad(a)) {
      t.grad(a).matrix() += g.matrix().cwiseProduct(t.value(b).matrix());
    }
    if (t.requires_grad(b)) {
      t.grad(b).matrix() += g.matrix().cwiseProduct(t.value(a).matrix());
    }
  });
}

Var prelu(Tape& t, Var x, Var slope) {
  const Tensor2D& xv = t.value(x);
  const Tensor2D& sv = t.value(slope);
  require(sv.rows() == 1 && sv.cols() == 1, "prelu", "slope must be 1x1");
  const double a = sv[0];
  Tensor2D out(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > 0.0 ? xv[i] : a * xv[i];
  return t.record("prelu", std::move(out), {x, slope},
                  [x, slope](Tape& t, const Tensor2D&, const Tensor2D& g) {
                    const Tensor2D& xv = t.value(x);
                    const double a = t.value(slope)[0];
                    if (t.requires_grad(x)) {
                      Tensor2D& gx = t.grad(x);
                      for (std::size_t i = 0; i < xv.size(); ++i) {
                        gx[i] += xv[i] > 0.0 ? g[i] : a * g[i];
                      }
                    }
                    if (t.requires_grad(slope)) {
                      double ga = 0.0;
                      for (std::size_t i = 0; i < xv.size(); ++i) {
                        if (xv[i] <= 0.0) ga += g[i] * xv[i];
                      }
                      t.grad(slope)[0] += ga;
                    }
                  });
}

Var sigmoid(Tape& t, Var x) {
  const Tensor2D& xv = t.value(x);
  Tensor2D out(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = stable_sigmoid(xv[i]);
  return t.record("sigmoid", std::move(out), {x}, [x](Tape& t, const Tensor2D& y, const Tensor2D& g) {
    Tensor2D& gx = t.grad(x);
    for (std::size_t i = 0; i < y.size(); ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var softmax_rows(Tape& t, Var x) {
  const Tensor2D& xv = t.value(x);
  require(xv.cols() >= 1, "softmax_rows", "needs at least one column");
  Tensor2D out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r) softmax_inplace(out.row(r));
  return t.record("softmax_rows", std::move(out), {x},
                  [x](Tape& t, const Tensor2D& y, const Tensor2D& g) {
                    Tensor2D& gx = t.grad(x);
                    const std::size_t cols = y.cols();
                    for (std::size_t r = 0; r < y.rows(); ++r) {
                      auto yr = y.row(r);
                      auto gr = g.row(r);
                      double dot = 0.0;
                      for (std::size_t c = 0; c < cols; ++c) dot += gr[c] * yr[c];
                      auto gxr = gx.row(r);
                      for (std::size_t c = 0; c < cols; ++c) gxr[c] += yr[c] * (gr[c] - dot);
                    }
                  });
}

Var concat_cols(Tape& t, std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols", "no inputs");
  const std::size_t rows = t.value(parts[0]).rows();
  std::size_t cols = 0;
  for (Var p : parts) {
    require(t.value(p).rows() == rows, "concat_cols", [&] { return "row counts differ: " + shapes(t.value(parts[0]), t.value(p)); });
    cols += t.value(p).cols();
  }
  Tensor2D out(rows, cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor2D& pv = t.value(p);
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(pv.row(r).begin(), pv.row(r).end(), out.row(r).begin() + offset);
    }
    offset += pv.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.record("concat_cols", std::move(out), inputs,
                  [inputs](Tape& t, const Tensor2D&, const Tensor2D& g) {
                    std::size_t offset = 0;
                    for (Var p : inputs) {
                      const std::size_t w = t.value(p).cols();
                      if (t.requires_grad(p)) {
                        Tensor2D& gp = t.grad(p);
                        for (std::size_t r = 0; r < g.rows(); ++r) {
                          auto src = g.row(r).subspan(offset, w);
                          auto dst = gp.row(r);
                          for (std::size_t c = 0; c < w; ++c) dst[c] += src[c];
                        }
                      }
                      offset += w;
                    }
                  });
}

Var reshape(Tape& t, Var x, std::size_t rows, std::size_t cols) {
  Tensor2D out = t.value(x).reshaped(rows, cols);
  return t.record("reshape", std::move(out), {x}, [x](Tape& t, const Tensor2D&, const Tensor2D& g) {
    Tensor2D& gx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

Var select_rows(Tape& t, Var x, std::vector<std::size_t> rows) {
  const Tensor2D& xv = t.value(x);
  Tensor2D out(rows.size(), xv.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < xv.rows(), "select_rows", [&] { return "row " + std::to_string(rows[i]) + " out of range for " + xv.shape_string(); });
    std::copy(xv.row(rows[i]).begin(), xv.row(rows[i]).end(), out.row(i).begin());
  }
  return t.record("select_rows", std::move(out), {x},
                  [x, rows = std::move(rows)](Tape& t, const Tensor2D&, const Tensor2D& g) {
                    Tensor2D& gx = t.grad(x);
                    for (std::size_t i = 0; i < rows.size(); ++i) {
                      auto dst = gx.row(rows[i]);
                      auto src = g.row(i);
                      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
                    }
                  });
}

Var tile_rows(Tape& t, Var x, std::size_t n) {
  const Tensor2D& xv = t.value(x);
  require(xv.rows() == 1, "tile_rows", [&] { return "expects a single row, got " + xv.shape_string(); });
  Tensor2D out(n, xv.cols());
  for (std::size_t r = 0; r < n; ++r) {
    std::copy(xv.row(0).begin(), xv.row(0).end(), out.row(r).begin());
  }
  return t.record("tile_rows", std::move(out), {x}, [x](Tape& t, const Tensor2D&, const Tensor2D& g) {
    t.grad(x).matrix() += g.matrix().colwise().sum();
  });
}

Var sum_all(Tape& t, Var x) {
  Tensor2D out(1, 1, t.value(x).matrix().sum());
  return t.record("sum_all", std::move(out), {x}, [x](Tape& t, const Tensor2D&, const Tensor2D& g) {
    t.grad(x).matrix().array() += g[0];
  });
}

Var weighted_sum(Tape& t, std::span<const std::pair<Var, double>> terms) {
  double total = 0.0;
  std::vector<Var> inputs;
  for (const auto& [v, w] : terms) {
    const Tensor2D& tv = t.value(v);
    require(tv.rows() == 1 && tv.cols() == 1, "weighted_sum", "terms must be 1x1");
    total += w * tv[0];
    inputs.push_back(v);
  }
  std::vector<std::pair<Var, double>> owned(terms.begin(), terms.end());
  return t.record("weighted_sum", Tensor2D(1, 1, total), inputs,
                  [owned = std::move(owned)](Tape& t, const Tensor2D&, const Tensor2D& g) {
                    for (const auto& [v, w] : owned) {
                      if (t.requires_grad(v)) t.grad(v)[0] += w * g[0];
                    }
                  });
}

Var group_mean(Tape& t, Var x, RowGroups groups) {
  const Tensor2D& xv = t.value(x);
  check_groups(groups, xv.rows(), "group_mean");
  const std::size_t n_groups = groups.begin.size();
  Tensor2D out(n_groups, xv.cols());
  std::vector<double> inv_counts(n_groups);
  for (std::size_t gi = 0; gi < n_groups; ++gi) {
    std::size_t n = 0;
    auto dst = out.row(gi);
    for (std::size_t r = groups.begin[gi]; r < groups.begin[gi] + groups.count[gi]; ++r) {
      if (!key_valid(groups, r)) continue;
      ++n;
      auto src = xv.row(r);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
    if (n == 0) throw DataError("group_mean: group " + std::to_string(gi) + " has no valid rows");
    inv_counts[gi] = 1.0 / static_cast<double>(n);
    for (double& v : dst) v *= inv_counts[gi];
  }
  return t.record("group_mean", std::move(out), {x},
                  [x, groups = std::move(groups), inv_counts = std::move(inv_counts)](
                      Tape& t, const Tensor2D&, const Tensor2D& g) {
                    Tensor2D& gx = t.grad(x);
                    for (std::size_t gi = 0; gi < groups.begin.size(); ++gi) {
                      auto src = g.row(gi);
                      for (std::size_t r = groups.begin[gi];
                           r < groups.begin[gi] + groups.count[gi]; ++r) {
                        if (!key_valid(groups, r)) continue;
                        auto dst = gx.row(r);
                        for (std::size_t c = 0; c < dst.size(); ++c) {
                          dst[c] += src[c] * inv_counts[gi];
                        }
                      }
                    }
                  });
}

Var attention(Tape& t, Var q, Var k, Var v, AttentionLayout layout,
              std::size_t heads, std::size_t head_dim) {
  const Tensor2D& qv = t.value(q);
  const Tensor2D& kv = t.value(k);
  const Tensor2D& vv = t.value(v);
  const std::size_t width = heads * head_dim;
  require(heads >= 1 && head_dim >= 1, "attention", "heads and head_dim must be >= 1");
  require(qv.cols() == width && kv.cols() == width && vv.cols() == width, "attention", [&] { return "projected widths must equal heads*head_dim = " + std::to_string(width); });
  require(kv.rows() == vv.rows(), "attention", [&] { return "key/value rows differ: " + shapes(kv, vv); });
  require(layout.query_group.size() == qv.rows(), "attention",
          "query_group must have one entry per query row");
  check_groups(layout.keys, kv.rows(), "attention");

  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  // weights[offset[i] + h * count + j]: weight of key j for query i, head h.
  auto weights = std::make_shared<std::vector<double>>();
  std::vector<std::size_t> offsets(qv.rows());
  std::size_t total = 0;
  for (std::size_t i = 0; i < qv.rows(); ++i) {
    const std::size_t gi = layout.query_group[i];
    require(gi < layout.keys.begin.size(), "attention", "query group out of range");
    offsets[i] = total;
    total += heads * layout.keys.count[gi];
  }
  weights->assign(total, 0.0);

  Tensor2D out(qv.rows(), width);
  for (std::size_t i = 0; i < qv.rows(); ++i) {
    const std::size_t gi = layout.query_group[i];
    const std::size_t begin = layout.keys.begin[gi];
    const std::size_t count = layout.keys.count[gi];
    bool any_valid = false;
    for (std::size_t j = 0; j < count; ++j) any_valid |= key_valid(layout.keys, begin + j);
    if (!any_valid) {
      throw DataError("attention: query " + std::to_string(i) + " has no valid keys");
    }
    for (std::size_t h = 0; h < heads; ++h) {
      const double* qh = qv.row(i).data() + h * head_dim;
      double* w = weights->data() + offsets[i] + h * count;
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < count; ++j) {
        if (!key_valid(layout.keys, begin + j)) continue;
        const double* kh = kv.row(begin + j).data() + h * head_dim;
        double s = 0.0;
        for (std::size_t c = 0; c < head_dim; ++c) s += qh[c] * kh[c];
        w[j] = s * inv_sqrt;
        m = std::max(m, w[j]);
      }
      double z = 0.0;
      for (std::size_t j = 0; j < count; ++j) {
        if (!key_valid(layout.keys, begin + j)) {
          w[j] = 0.0;
          continue;
        }
        w[j] = std::exp(w[j] - m);
        z += w[j];
      }
      double* oh = out.row(i).data() + h * head_dim;
      for (std::size_t j = 0; j < count; ++j) {
        w[j] /= z;
        if (w[j] == 0.0) continue;
        const double* vh = vv.row(begin + j).data() + h * head_dim;
        for (std::size_t c = 0; c < head_dim; ++c) oh[c] += w[j] * vh[c];
      }
    }
  }

  return t.record(
      "attention", std::move(out), {q, k, v},
      [q, k, v, layout = std::move(layout), heads, head_dim, inv_sqrt, weights,
       offsets = std::move(offsets)](Tape& t, const Tensor2D&, const Tensor2D& g) {
        const Tensor2D& qv = t.value(q);
        const Tensor2D& kv = t.value(k);
        const Tensor2D& vv = t.value(v);
        Tensor2D* gq = t.requires_grad(q) ? &t.grad(q) : nullptr;
        Tensor2D* gk = t.requires_grad(k) ? &t.grad(k) : nullptr;
        Tensor2D* gv = t.requires_grad(v) ? &t.grad(v) : nullptr;
        std::vector<double> dscore;
        for (std::size_t i = 0; i < qv.rows(); ++i) {
          const std::size_t gi = layout.query_group[i];
          const std::size_t begin = layout.keys.begin[gi];
          const std::size_t count = layout.keys.count[gi];
          dscore.assign(count, 0.0);
          for (std::size_t h = 0; h < heads; ++h) {
            const double* w = weights->data() + offsets[i] + h * count;
            const double* go = g.row(i).data() + h * head_dim;
            double weighted = 0.0;
            for (std::size_t j = 0; j < count; ++j) {
              if (w[j] == 0.0) {
                dscore[j] = 0.0;
                continue;
              }
              const std::size_t r = begin + j;
              const double* vh = vv.row(r).data() + h * head_dim;
              double dw = 0.0;
              for (std::size_t c = 0; c < head_dim; ++c) dw += go[c] * vh[c];
              dscore[j] = dw;
              weighted += w[j] * dw;
              if (gv) {
                double* gvh = gv->row(r).data() + h * head_dim;
                for (std::size_t c = 0; c < head_dim; ++c) gvh[c] += w[j] * go[c];
              }
            }
            const double* qh = qv.row(i).data() + h * head_dim;
            for (std::size_t j = 0; j < count; ++j) {
              if (w[j] == 0.0) continue;
              const double ds = w[j] * (dscore[j] - weighted) * inv_sqrt;
              const std::size_t r = begin + j;
              const double* kh = kv.row(r).data() + h * head_dim;
              if (gq) {
                double* gqh = gq->row(i).data() + h * head_dim;
                for (std::size_t c = 0; c < head_dim; ++c) gqh[c] += ds * kh[c];
              }
              if (gk) {
                double* gkh = gk->row(r).data() + h * head_dim;
                for (std::size_t c = 0; c < head_dim; ++c) gkh[c] += ds * qh[c];
              }
            }
          }
        }
      });
}

Var weighted_neg_log(Tape& t, Var probs, std::vector<Pick> picks, double floor) {
  const Tensor2D& pv = t.value(probs);
  double total = 0.0;
  for (const Pick& p : picks) {
    require(p.row < pv.rows() && p.col < pv.cols(), "weighted_neg_log", [&] { return "pick (" + std::to_string(p.row) + "," + std::to_string(p.col) +
                ") outside " + pv.shape_string(); });
    total -= p.weight * std::log(std::max(pv(p.row, p.col), floor));
  }
  return t.record("weighted_neg_log", Tensor2D(1, 1, total), {probs},
                  [probs, picks = std::move(picks), floor](Tape& t, const Tensor2D&, const Tensor2D& g) {
                    const Tensor2D& pv = t.value(probs);
                    Tensor2D& gp = t.grad(probs);
                    for (const Pick& p : picks) {
                      const double prob = pv(p.row, p.col);
                      if (prob < floor) continue;
                      gp(p.row, p.col) -= g[0] * p.weight / prob;
                    }
                  });
}

Var bce_with_logits(Tape& t, Var logits, std::vector<double> labels) {
  const Tensor2D& zv = t.value(logits);
  require(zv.cols() == 1 && zv.rows() == labels.size() && !labels.empty(),
          "bce_with_logits", "needs an (n x 1) logit column and n labels");
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double z = zv[i];
    total += std::max(z, 0.0) - z * labels[i] + std::log1p(std::exp(-std::abs(z)));
  }
  const double inv_n = 1.0 / static_cast<double>(labels.size());
  return t.record("bce_with_logits", Tensor2D(1, 1, total * inv_n), {logits},
                  [logits, labels = std::move(labels), inv_n](Tape& t, const Tensor2D&, const Tensor2D& g) {
                    const Tensor2D& zv = t.value(logits);
                    Tensor2D& gz = t.grad(logits);
                    for (std::size_t i = 0; i < labels.size(); ++i) {
                      gz[i] += g[0] * inv_n * (stable_sigmoid(zv[i]) - labels[i]);
                    }
                  });
}

}  // namespace genli::nn
