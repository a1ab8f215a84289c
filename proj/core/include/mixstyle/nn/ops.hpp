#pragma once

#include <algorithm>
#include <complex>
#include <vector>

#include "mixstyle/audio/fft.hpp"
#include "mixstyle/audio/stft.hpp"
#include "mixstyle/nn/tensor.hpp"

namespace mixstyle::nn {

enum class PadMode { kSame, kCausal };

struct ConvGeom {
  int64_t lout;
  int64_t pad_left;
};

inline ConvGeom conv_geometry(int64_t len, int64_t kernel, int64_t stride, int64_t dilation,
                              PadMode mode) {
  const int64_t span = (kernel - 1) * dilation + 1;
  const int64_t lout = (len + stride - 1) / stride;
  const int64_t pad_total = std::max<int64_t>(0, (lout - 1) * stride + span - len);
  const int64_t pad_left = mode == PadMode::kCausal ? pad_total : pad_total / 2;
  return {lout, pad_left};
}

// valid output range [t_lo, t_hi) for one kernel tap starting at in_start
inline void conv_tap_bounds(int64_t in_start, int64_t stride, int64_t len, int64_t lout,
                            int64_t& t_lo, int64_t& t_hi) {
  t_lo = in_start < 0 ? (-in_start + stride - 1) / stride : 0;
  if (in_start >= len) {
    t_hi = 0;
  } else {
    t_hi = std::min(lout, (len - 1 - in_start) / stride + 1);
  }
}

// ---------------------------------------------------------------------------
// elementwise
// ---------------------------------------------------------------------------

template <typename T>
Var<T> add(Tape<T>* tape, const Var<T>& a, const Var<T>& b) {
  require(a->shape == b->shape, "add: shape mismatch");
  auto out = make_var<T>(a->shape, rec(tape, {a, b}));
  for (size_t i = 0; i < a->v.size(); ++i) out->v[i] = a->v[i] + b->v[i];
  if (out->requires_grad) {
    tape->record([a, b, out]() {
      if (a->requires_grad) {
        a->ensure_grad();
        for (size_t i = 0; i < a->v.size(); ++i) a->g[i] += out->g[i];
      }
      if (b->requires_grad) {
        b->ensure_grad();
        for (size_t i = 0; i < b->v.size(); ++i) b->g[i] += out->g[i];
      }
    });
  }
  return out;
}

template <typename T>
Var<T> sub(Tape<T>* tape, const Var<T>& a, const Var<T>& b) {
  require(a->shape == b->shape, "sub: shape mismatch");
  auto out = make_var<T>(a->shape, rec(tape, {a, b}));
  for (size_t i = 0; i < a->v.size(); ++i) out->v[i] = a->v[i] - b->v[i];
  if (out->requires_grad) {
    tape->record([a, b, out]() {
      if (a->requires_grad) {
        a->ensure_grad();
        for (size_t i = 0; i < a->v.size(); ++i) a->g[i] += out->g[i];
      }
      if (b->requires_grad) {
        b->ensure_grad();
        for (size_t i = 0; i < b->v.size(); ++i) b->g[i] -= out->g[i];
      }
    });
  }
  return out;
}

template <typename T>
Var<T> mul(Tape<T>* tape, const Var<T>& a, const Var<T>& b) {
  require(a->shape == b->shape, "mul: shape mismatch");
  auto out = make_var<T>(a->shape, rec(tape, {a, b}));
  for (size_t i = 0; i < a->v.size(); ++i) out->v[i] = a->v[i] * b->v[i];
  if (out->requires_grad) {
    tape->record([a, b, out]() {
      if (a->requires_grad) {
        a->ensure_grad();
        for (size_t i = 0; i < a->v.size(); ++i) a->g[i] += out->g[i] * b->v[i];
      }
      if (b->requires_grad) {
        b->ensure_grad();
        for (size_t i = 0; i < b->v.size(); ++i) b->g[i] += out->g[i] * a->v[i];
      }
    });
  }
  return out;
}

template <typename T>
Var<T> scale(Tape<T>* tape, const Var<T>& a, T c) {
  auto out = make_var<T>(a->shape, rec(tape, {a}));
  for (size_t i = 0; i < a->v.size(); ++i) out->v[i] = a->v[i] * c;
  if (out->requires_grad) {
    tape->record([a, out, c]() {
      a->ensure_grad();
      for (size_t i = 0; i < a->v.size(); ++i) a->g[i] += out->g[i] * c;
    });
  }
  return out;
}

template <typename T>
Var<T> tanh_op(Tape<T>* tape, const Var<T>& a) {
  auto out = make_var<T>(a->shape, rec(tape, {a}));
  for (size_t i = 0; i < a->v.size(); ++i) out->v[i] = std::tanh(a->v[i]);
  if (out->requires_grad) {
    tape->record([a, out]() {
      a->ensure_grad();
      for (size_t i = 0; i < a->v.size(); ++i) a->g[i] += out->g[i] * (T(1) - out->v[i] * out->v[i]);
    });
  }
  return out;
}

template <typename T>
Var<T> sigmoid_op(Tape<T>* tape, const Var<T>& a) {
  auto out = make_var<T>(a->shape, rec(tape, {a}));
  for (size_t i = 0; i < a->v.size(); ++i) out->v[i] = T(1) / (T(1) + std::exp(-a->v[i]));
  if (out->requires_grad) {
    tape->record([a, out]() {
      a->ensure_grad();
      for (size_t i = 0; i < a->v.size(); ++i)
        a->g[i] += out->g[i] * out->v[i] * (T(1) - out->v[i]);
    });
  }
  return out;
}

// ln(x + eps), elementwise
template <typename T>
Var<T> log_shift(Tape<T>* tape, const Var<T>& a, T eps) {
  require(eps > T(0), "log_shift: eps must be positive");
  auto out = make_var<T>(a->shape, rec(tape, {a}));
  for (size_t i = 0; i < a->v.size(); ++i) out->v[i] = std::log(a->v[i] + eps);
  if (out->requires_grad) {
    tape->record([a, out, eps]() {
      a->ensure_grad();
      for (size_t i = 0; i < a->v.size(); ++i) a->g[i] += out->g[i] / (a->v[i] + eps);
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// reductions
// ---------------------------------------------------------------------------

template <typename T>
Var<T> mean_abs(Tape<T>* tape, const Var<T>& a) {
  auto out = make_scalar<T>(T(0), rec(tape, {a}));
  double acc = 0.0;
  for (T x : a->v) acc += std::fabs(static_cast<double>(x));
  const double n = static_cast<double>(a->v.size());
  out->v[0] = static_cast<T>(acc / n);
  if (out->requires_grad) {
    tape->record([a, out, n]() {
      a->ensure_grad();
      const T go = out->g[0] / static_cast<T>(n);
      for (size_t i = 0; i < a->v.size(); ++i) {
        if (a->v[i] > T(0)) a->g[i] += go;
        else if (a->v[i] < T(0)) a->g[i] -= go;
      }
    });
  }
  return out;
}

template <typename T>
Var<T> mean_sq(Tape<T>* tape, const Var<T>& a) {
  auto out = make_scalar<T>(T(0), rec(tape, {a}));
  double acc = 0.0;
  for (T x : a->v) acc += static_cast<double>(x) * x;
  const double n = static_cast<double>(a->v.size());
  out->v[0] = static_cast<T>(acc / n);
  if (out->requires_grad) {
    tape->record([a, out, n]() {
      a->ensure_grad();
      const T go = out->g[0] * T(2) / static_cast<T>(n);
      for (size_t i = 0; i < a->v.size(); ++i) a->g[i] += go * a->v[i];
    });
  }
  return out;
}

template <typename T>
Var<T> sum_all(Tape<T>* tape, const Var<T>& a) {
  auto out = make_scalar<T>(T(0), rec(tape, {a}));
  double acc = 0.0;
  for (T x : a->v) acc += static_cast<double>(x);
  out->v[0] = static_cast<T>(acc);
  if (out->requires_grad) {
    tape->record([a, out]() {
      a->ensure_grad();
      for (size_t i = 0; i < a->v.size(); ++i) a->g[i] += out->g[0];
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// structure
// ---------------------------------------------------------------------------

// rows [c0, c1) of a [C, L] tensor
template <typename T>
Var<T> slice_channels(Tape<T>* tape, const Var<T>& x, int64_t c0, int64_t c1) {
  require(x->shape.size() == 2, "slice_channels: need a [C, L] tensor");
  const int64_t len = x->shape[1];
  require(c0 >= 0 && c1 > c0 && c1 <= x->shape[0], "slice_channels: bad range");
  auto out = make_var<T>({c1 - c0, len}, rec(tape, {x}));
  std::copy(x->v.begin() + c0 * len, x->v.begin() + c1 * len, out->v.begin());
  if (out->requires_grad) {
    tape->record([x, out, c0, len]() {
      x->ensure_grad();
      for (size_t i = 0; i < out->v.size(); ++i)
        x->g[static_cast<size_t>(c0 * len) + i] += out->g[i];
    });
  }
  return out;
}

// elements [a, b) of a flat vector
template <typename T>
Var<T> slice_vec(Tape<T>* tape, const Var<T>& x, int64_t a, int64_t b) {
  require(a >= 0 && b > a && b <= x->numel(), "slice_vec: bad range");
  auto out = make_var<T>({b - a}, rec(tape, {x}));
  std::copy(x->v.begin() + a, x->v.begin() + b, out->v.begin());
  if (out->requires_grad) {
    tape->record([x, out, a]() {
      x->ensure_grad();
      for (size_t i = 0; i < out->v.size(); ++i) x->g[static_cast<size_t>(a) + i] += out->g[i];
    });
  }
  return out;
}

// columns [c0, c1) of a [N, D] tensor
template <typename T>
Var<T> slice_cols(Tape<T>* tape, const Var<T>& x, int64_t c0, int64_t c1) {
  require(x->shape.size() == 2, "slice_cols: need a [N, D] tensor");
  const int64_t n = x->shape[0], d = x->shape[1];
  require(c0 >= 0 && c1 > c0 && c1 <= d, "slice_cols: bad range");
  const int64_t w = c1 - c0;
  auto out = make_var<T>({n, w}, rec(tape, {x}));
  for (int64_t i = 0; i < n; ++i)
    std::copy(x->v.begin() + i * d + c0, x->v.begin() + i * d + c1, out->v.begin() + i * w);
  if (out->requires_grad) {
    tape->record([x, out, c0, w, n, d]() {
      x->ensure_grad();
      for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < w; ++j)
          x->g[static_cast<size_t>(i * d + c0 + j)] += out->g[static_cast<size_t>(i * w + j)];
    });
  }
  return out;
}

// stack N vectors [D] into [N, D]
template <typename T>
Var<T> concat_rows(Tape<T>* tape, const std::vector<Var<T>>& rows) {
  require(!rows.empty(), "concat_rows: empty input");
  const int64_t d = rows[0]->numel();
  bool any_grad = false;
  for (const auto& r : rows) {
    require(r->numel() == d, "concat_rows: row sizes differ");
    any_grad = any_grad || r->requires_grad;
  }
  auto out = make_var<T>({static_cast<int64_t>(rows.size()), d}, tape != nullptr && any_grad);
  for (size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i]->v.begin(), rows[i]->v.end(), out->v.begin() + static_cast<int64_t>(i) * d);
  if (out->requires_grad) {
    tape->record([rows, out, d]() {
      for (size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i]->requires_grad) continue;
        rows[i]->ensure_grad();
        for (int64_t j = 0; j < d; ++j)
          rows[i]->g[static_cast<size_t>(j)] += out->g[static_cast<size_t>(static_cast<int64_t>(i) * d + j)];
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// layers
// ---------------------------------------------------------------------------

// x [Cin, L], w [Cout, Cin, K], b [Cout] (may be null). Dilated
// cross-correlation; `same` keeps ceil(L/stride), `causal` pads left only.
template <typename T>
Var<T> conv1d(Tape<T>* tape, const Var<T>& x, const Var<T>& w, const Var<T>& b, int64_t stride,
              int64_t dilation, PadMode pad) {
  require(x->shape.size() == 2 && w->shape.size() == 3, "conv1d: bad ranks");
  const int64_t cin = x->shape[0], len = x->shape[1];
  const int64_t cout = w->shape[0], kernel = w->shape[2];
  require(w->shape[1] == cin, "conv1d: channel mismatch");
  require(stride >= 1 && dilation >= 1, "conv1d: stride and dilation must be >= 1");
  if (b) require(b->numel() == cout, "conv1d: bias size mismatch");

  const auto geom = conv_geometry(len, kernel, stride, dilation, pad);
  const int64_t lout = geom.lout;
  const int64_t pad_left = geom.pad_left;

  auto out = make_var<T>({cout, lout}, rec(tape, {x, w, b}));

  for (int64_t co = 0; co < cout; ++co) {
    T* orow = out->v.data() + co * lout;
    if (b) {
      const T bias = b->v[static_cast<size_t>(co)];
      for (int64_t t = 0; t < lout; ++t) orow[t] = bias;
    }
    for (int64_t ci = 0; ci < cin; ++ci) {
      const T* xrow = x->v.data() + ci * len;
      const T* wrow = w->v.data() + (co * cin + ci) * kernel;
      for (int64_t k = 0; k < kernel; ++k) {
        const T wv = wrow[k];
        if (wv == T(0)) continue;
        const int64_t in_start = k * dilation - pad_left;
        int64_t t_lo, t_hi;
        conv_tap_bounds(in_start, stride, len, lout, t_lo, t_hi);
        if (stride == 1) {
          const T* xp = xrow + in_start + t_lo;
          T* op = orow + t_lo;
          const int64_t span = t_hi - t_lo;
          for (int64_t t = 0; t < span; ++t) op[t] += wv * xp[t];
        } else {
          for (int64_t t = t_lo; t < t_hi; ++t) orow[t] += wv * xrow[t * stride + in_start];
        }
      }
    }
  }

  if (out->requires_grad) {
    tape->record([x, w, b, out, stride, dilation, pad_left, lout, len, cin, cout, kernel]() {
      if (b && b->requires_grad) {
        b->ensure_grad();
        for (int64_t co = 0; co < cout; ++co) {
          double acc = 0.0;
          const T* gy = out->g.data() + co * lout;
          for (int64_t t = 0; t < lout; ++t) acc += static_cast<double>(gy[t]);
          b->g[static_cast<size_t>(co)] += static_cast<T>(acc);
        }
      }
      const bool need_w = w->requires_grad;
      const bool need_x = x->requires_grad;
      if (need_w) w->ensure_grad();
      if (need_x) x->ensure_grad();
      if (!need_w && !need_x) return;
      for (int64_t co = 0; co < cout; ++co) {
        const T* gy = out->g.data() + co * lout;
        for (int64_t ci = 0; ci < cin; ++ci) {
          const T* xrow = x->v.data() + ci * len;
          T* gx = need_x ? x->g.data() + ci * len : nullptr;
          const T* wrow = w->v.data() + (co * cin + ci) * kernel;
          T* gw = need_w ? w->g.data() + (co * cin + ci) * kernel : nullptr;
          for (int64_t k = 0; k < kernel; ++k) {
            const int64_t in_start = k * dilation - pad_left;
            int64_t t_lo, t_hi;
            conv_tap_bounds(in_start, stride, len, lout, t_lo, t_hi);
            if (need_w) {
              double acc = 0.0;
              if (stride == 1) {
                const T* xp = xrow + in_start + t_lo;
                const T* gp = gy + t_lo;
                const int64_t span = t_hi - t_lo;
                for (int64_t t = 0; t < span; ++t) acc += static_cast<double>(gp[t]) * xp[t];
              } else {
                for (int64_t t = t_lo; t < t_hi; ++t)
                  acc += static_cast<double>(gy[t]) * xrow[t * stride + in_start];
              }
              gw[k] += static_cast<T>(acc);
            }
            if (need_x) {
              const T wv = wrow[k];
              if (wv == T(0)) continue;
              if (stride == 1) {
                T* xp = gx + in_start + t_lo;
                const T* gp = gy + t_lo;
                const int64_t span = t_hi - t_lo;
                for (int64_t t = 0; t < span; ++t) xp[t] += wv * gp[t];
              } else {
                for (int64_t t = t_lo; t < t_hi; ++t) gx[t * stride + in_start] += wv * gy[t];
              }
            }
          }
        }
      }
    });
  }
  return out;
}

// x [Din] -> y [Dout]; w [Dout, Din], b [Dout] (may be null)
template <typename T>
Var<T> linear(Tape<T>* tape, const Var<T>& x, const Var<T>& w, const Var<T>& b) {
  require(w->shape.size() == 2, "linear: weight must be [Dout, Din]");
  const int64_t din = w->shape[1], dout = w->shape[0];
  require(x->numel() == din, "linear: input size mismatch");
  if (b) require(b->numel() == dout, "linear: bias size mismatch");

  auto out = make_var<T>({dout}, rec(tape, {x, w, b}));
  for (int64_t o = 0; o < dout; ++o) {
    const T* wrow = w->v.data() + o * din;
    double acc = b ? static_cast<double>(b->v[static_cast<size_t>(o)]) : 0.0;
    for (int64_t i = 0; i < din; ++i) acc += static_cast<double>(wrow[i]) * x->v[static_cast<size_t>(i)];
    out->v[static_cast<size_t>(o)] = static_cast<T>(acc);
  }
  if (out->requires_grad) {
    tape->record([x, w, b, out, din, dout]() {
      if (b && b->requires_grad) {
        b->ensure_grad();
        for (int64_t o = 0; o < dout; ++o) b->g[static_cast<size_t>(o)] += out->g[static_cast<size_t>(o)];
      }
      if (w->requires_grad) {
        w->ensure_grad();
        for (int64_t o = 0; o < dout; ++o) {
          const T go = out->g[static_cast<size_t>(o)];
          T* gw = w->g.data() + o * din;
          for (int64_t i = 0; i < din; ++i) gw[i] += go * x->v[static_cast<size_t>(i)];
        }
      }
      if (x->requires_grad) {
        x->ensure_grad();
        for (int64_t o = 0; o < dout; ++o) {
          const T go = out->g[static_cast<size_t>(o)];
          const T* wrow = w->v.data() + o * din;
          for (int64_t i = 0; i < din; ++i) x->g[static_cast<size_t>(i)] += go * wrow[i];
        }
      }
    });
  }
  return out;
}

// out[c, t] = gamma[c] x[c, t] + beta[c]
template <typename T>
Var<T> film(Tape<T>* tape, const Var<T>& x, const Var<T>& gamma, const Var<T>& beta) {
  require(x->shape.size() == 2, "film: need [C, L] input");
  const int64_t c = x->shape[0], len = x->shape[1];
  require(gamma->numel() == c && beta->numel() == c, "film: condition channel mismatch");
  auto out = make_var<T>(x->shape, rec(tape, {x, gamma, beta}));
  for (int64_t ci = 0; ci < c; ++ci) {
    const T gm = gamma->v[static_cast<size_t>(ci)], bt = beta->v[static_cast<size_t>(ci)];
    const T* xr = x->v.data() + ci * len;
    T* yr = out->v.data() + ci * len;
    for (int64_t t = 0; t < len; ++t) yr[t] = gm * xr[t] + bt;
  }
  if (out->requires_grad) {
    tape->record([x, gamma, beta, out, c, len]() {
      for (int64_t ci = 0; ci < c; ++ci) {
        const T* gy = out->g.data() + ci * len;
        if (gamma->requires_grad || beta->requires_grad) {
          double acc_g = 0.0, acc_b = 0.0;
          const T* xr = x->v.data() + ci * len;
          for (int64_t t = 0; t < len; ++t) {
            acc_g += static_cast<double>(gy[t]) * xr[t];
            acc_b += static_cast<double>(gy[t]);
          }
          if (gamma->requires_grad) {
            gamma->ensure_grad();
            gamma->g[static_cast<size_t>(ci)] += static_cast<T>(acc_g);
          }
          if (beta->requires_grad) {
            beta->ensure_grad();
            beta->g[static_cast<size_t>(ci)] += static_cast<T>(acc_b);
          }
        }
        if (x->requires_grad) {
          x->ensure_grad();
          const T gm = gamma->v[static_cast<size_t>(ci)];
          T* gx = x->g.data() + ci * len;
          for (int64_t t = 0; t < len; ++t) gx[t] += gm * gy[t];
        }
      }
    });
  }
  return out;
}

// x [C, L], alpha [C]: y = x > 0 ? x : alpha_c x
template <typename T>
Var<T> prelu(Tape<T>* tape, const Var<T>& x, const Var<T>& alpha) {
  require(x->shape.size() == 2, "prelu: need [C, L] input");
  const int64_t c = x->shape[0], len = x->shape[1];
  require(alpha->numel() == c, "prelu: alpha channel mismatch");
  auto out = make_var<T>(x->shape, rec(tape, {x, alpha}));
  for (int64_t ci = 0; ci < c; ++ci) {
    const T a = alpha->v[static_cast<size_t>(ci)];
    const T* xr = x->v.data() + ci * len;
    T* yr = out->v.data() + ci * len;
    for (int64_t t = 0; t < len; ++t) yr[t] = xr[t] > T(0) ? xr[t] : a * xr[t];
  }
  if (out->requires_grad) {
    tape->record([x, alpha, out, c, len]() {
      for (int64_t ci = 0; ci < c; ++ci) {
        const T a = alpha->v[static_cast<size_t>(ci)];
        const T* xr = x->v.data() + ci * len;
        const T* gy = out->g.data() + ci * len;
        if (x->requires_grad) {
          x->ensure_grad();
          T* gx = x->g.data() + ci * len;
          for (int64_t t = 0; t < len; ++t) gx[t] += gy[t] * (xr[t] > T(0) ? T(1) : a);
        }
        if (alpha->requires_grad) {
          alpha->ensure_grad();
          double acc = 0.0;
          for (int64_t t = 0; t < len; ++t)
            if (xr[t] <= T(0)) acc += static_cast<double>(gy[t]) * xr[t];
          alpha->g[static_cast<size_t>(ci)] += static_cast<T>(acc);
        }
      }
    });
  }
  return out;
}

// [C, L] -> [C], average over time
template <typename T>
Var<T> global_avg_pool_time(Tape<T>* tape, const Var<T>& x) {
  require(x->shape.size() == 2, "global_avg_pool_time: need [C, L] input");
  const int64_t c = x->shape[0], len = x->shape[1];
  auto out = make_var<T>({c}, rec(tape, {x}));
  for (int64_t ci = 0; ci < c; ++ci) {
    double acc = 0.0;
    const T* xr = x->v.data() + ci * len;
    for (int64_t t = 0; t < len; ++t) acc += static_cast<double>(xr[t]);
    out->v[static_cast<size_t>(ci)] = static_cast<T>(acc / static_cast<double>(len));
  }
  if (out->requires_grad) {
    tape->record([x, out, c, len]() {
      x->ensure_grad();
      for (int64_t ci = 0; ci < c; ++ci) {
        const T go = out->g[static_cast<size_t>(ci)] / static_cast<T>(len);
        T* gx = x->g.data() + ci * len;
        for (int64_t t = 0; t < len; ++t) gx[t] += go;
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// batch normalization (shared statistics across a group of [C, L] tensors)
// ---------------------------------------------------------------------------

template <typename T>
struct BatchNorm1d {
  Var<T> gamma, beta;  // [C]
  std::vector<T> running_mean, running_var;
  T momentum = T(0.1);
  T eps = T(1e-5);

  explicit BatchNorm1d(int64_t channels) {
    gamma = make_var<T>({channels}, true);
    beta = make_var<T>({channels}, true);
    std::fill(gamma->v.begin(), gamma->v.end(), T(1));
    running_mean.assign(static_cast<size_t>(channels), T(0));
    running_var.assign(static_cast<size_t>(channels), T(1));
  }

  std::vector<Var<T>> params() const { return {gamma, beta}; }
};

template <typename T>
std::vector<Var<T>> batchnorm_group(Tape<T>* tape, const std::vector<Var<T>>& xs,
                                    BatchNorm1d<T>& bn, bool training) {
  require(!xs.empty(), "batchnorm_group: empty group");
  const int64_t c = xs[0]->shape[0];
  for (const auto& x : xs) {
    require(x->shape.size() == 2 && x->shape[0] == c, "batchnorm_group: channel mismatch");
  }

  std::vector<T> mean(static_cast<size_t>(c)), inv_std(static_cast<size_t>(c));
  int64_t m = 0;
  for (const auto& x : xs) m += x->shape[1];

  if (training) {
    for (int64_t ci = 0; ci < c; ++ci) {
      double acc = 0.0;
      for (const auto& x : xs) {
        const T* xr = x->v.data() + ci * x->shape[1];
        for (int64_t t = 0; t < x->shape[1]; ++t) acc += static_cast<double>(xr[t]);
      }
      const double mu = acc / static_cast<double>(m);
      double var = 0.0;
      for (const auto& x : xs) {
        const T* xr = x->v.data() + ci * x->shape[1];
        for (int64_t t = 0; t < x->shape[1]; ++t) {
          const double d = static_cast<double>(xr[t]) - mu;
          var += d * d;
        }
      }
      var /= static_cast<double>(m);
      mean[static_cast<size_t>(ci)] = static_cast<T>(mu);
      inv_std[static_cast<size_t>(ci)] = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(bn.eps)));
      // running stats use the unbiased variance, updated with momentum
      const double unbiased = m > 1 ? var * static_cast<double>(m) / static_cast<double>(m - 1) : var;
      bn.running_mean[static_cast<size_t>(ci)] =
          (T(1) - bn.momentum) * bn.running_mean[static_cast<size_t>(ci)] + bn.momentum * static_cast<T>(mu);
      bn.running_var[static_cast<size_t>(ci)] =
          (T(1) - bn.momentum) * bn.running_var[static_cast<size_t>(ci)] + bn.momentum * static_cast<T>(unbiased);
    }
  } else {
    for (int64_t ci = 0; ci < c; ++ci) {
      mean[static_cast<size_t>(ci)] = bn.running_mean[static_cast<size_t>(ci)];
      inv_std[static_cast<size_t>(ci)] =
          static_cast<T>(1.0 / std::sqrt(static_cast<double>(bn.running_var[static_cast<size_t>(ci)]) +
                                         static_cast<double>(bn.eps)));
    }
  }

  bool any_grad = bn.gamma->requires_grad || bn.beta->requires_grad;
  for (const auto& x : xs) any_grad = any_grad || x->requires_grad;
  const bool track = tape != nullptr && any_grad;

  std::vector<Var<T>> outs;
  outs.reserve(xs.size());
  for (const auto& x : xs) {
    auto y = make_var<T>(x->shape, track);
    const int64_t len = x->shape[1];
    for (int64_t ci = 0; ci < c; ++ci) {
      const T mu = mean[static_cast<size_t>(ci)], is = inv_std[static_cast<size_t>(ci)];
      const T gm = bn.gamma->v[static_cast<size_t>(ci)], bt = bn.beta->v[static_cast<size_t>(ci)];
      const T* xr = x->v.data() + ci * len;
      T* yr = y->v.data() + ci * len;
      for (int64_t t = 0; t < len; ++t) yr[t] = gm * (xr[t] - mu) * is + bt;
    }
    outs.push_back(std::move(y));
  }

  if (track) {
    auto gamma = bn.gamma;
    auto beta = bn.beta;
    tape->record([xs, outs, gamma, beta, mean, inv_std, m, c, training]() {
      for (int64_t ci = 0; ci < c; ++ci) {
        const T mu = mean[static_cast<size_t>(ci)], is = inv_std[static_cast<size_t>(ci)];
        const T gm = gamma->v[static_cast<size_t>(ci)];
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (size_t s = 0; s < xs.size(); ++s) {
          const int64_t len = xs[s]->shape[1];
          const T* xr = xs[s]->v.data() + ci * len;
          const T* gy = outs[s]->g.data() + ci * len;
          for (int64_t t = 0; t < len; ++t) {
            sum_dy += static_cast<double>(gy[t]);
            sum_dy_xhat += static_cast<double>(gy[t]) * ((xr[t] - mu) * is);
          }
        }
        if (gamma->requires_grad) {
          gamma->ensure_grad();
          gamma->g[static_cast<size_t>(ci)] += static_cast<T>(sum_dy_xhat);
        }
        if (beta->requires_grad) {
          beta->ensure_grad();
          beta->g[static_cast<size_t>(ci)] += static_cast<T>(sum_dy);
        }
        const double mean_dy = sum_dy / static_cast<double>(m);
        const double mean_dy_xhat = sum_dy_xhat / static_cast<double>(m);
        for (size_t s = 0; s < xs.size(); ++s) {
          if (!xs[s]->requires_grad) continue;
          xs[s]->ensure_grad();
          const int64_t len = xs[s]->shape[1];
          const T* xr = xs[s]->v.data() + ci * len;
          const T* gy = outs[s]->g.data() + ci * len;
          T* gx = xs[s]->g.data() + ci * len;
          if (training) {
            for (int64_t t = 0; t < len; ++t) {
              const double xhat = (xr[t] - mu) * is;
              gx[t] += static_cast<T>(static_cast<double>(gm) * is *
                                      (static_cast<double>(gy[t]) - mean_dy - xhat * mean_dy_xhat));
            }
          } else {
            for (int64_t t = 0; t < len; ++t) gx[t] += gm * is * gy[t];
          }
        }
      }
    });
  }
  return outs;
}

// ---------------------------------------------------------------------------
// contrastive head
// ---------------------------------------------------------------------------

// rows of x [N, D] scaled to unit L2 norm
template <typename T>
Var<T> row_normalize(Tape<T>* tape, const Var<T>& x) {
  require(x->shape.size() == 2, "row_normalize: need [N, D]");
  const int64_t n = x->shape[0], d = x->shape[1];
  auto out = make_var<T>(x->shape, rec(tape, {x}));
  std::vector<T> norms(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const T* xr = x->v.data() + i * d;
    for (int64_t j = 0; j < d; ++j) acc += static_cast<double>(xr[j]) * xr[j];
    const double nm = std::sqrt(acc);
    require(nm > 1e-20, "row_normalize: zero-norm subvector");
    norms[static_cast<size_t>(i)] = static_cast<T>(nm);
    T* yr = out->v.data() + i * d;
    for (int64_t j = 0; j < d; ++j) yr[j] = static_cast<T>(xr[j] / nm);
  }
  if (out->requires_grad) {
    tape->record([x, out, norms, n, d]() {
      x->ensure_grad();
      for (int64_t i = 0; i < n; ++i) {
        const T* u = out->v.data() + i * d;
        const T* gy = out->g.data() + i * d;
        T* gx = x->g.data() + i * d;
        double dot = 0.0;
        for (int64_t j = 0; j < d; ++j) dot += static_cast<double>(u[j]) * gy[j];
        const double inv = 1.0 / static_cast<double>(norms[static_cast<size_t>(i)]);
        for (int64_t j = 0; j < d; ++j)
          gx[j] += static_cast<T>((static_cast<double>(gy[j]) - dot * u[j]) * inv);
      }
    });
  }
  return out;
}

// A [N, D] x B [M, D]^T -> [N, M]. A and B may be the same Var.
template <typename T>
Var<T> matmul_nt(Tape<T>* tape, const Var<T>& a, const Var<T>& b) {
  require(a->shape.size() == 2 && b->shape.size() == 2 && a->shape[1] == b->shape[1],
          "matmul_nt: shape mismatch");
  const int64_t n = a->shape[0], m = b->shape[0], d = a->shape[1];
  auto out = make_var<T>({n, m}, rec(tape, {a, b}));
  for (int64_t i = 0; i < n; ++i) {
    const T* ar = a->v.data() + i * d;
    for (int64_t j = 0; j < m; ++j) {
      const T* br = b->v.data() + j * d;
      double acc = 0.0;
      for (int64_t k = 0; k < d; ++k) acc += static_cast<double>(ar[k]) * br[k];
      out->v[static_cast<size_t>(i * m + j)] = static_cast<T>(acc);
    }
  }
  if (out->requires_grad) {
    tape->record([a, b, out, n, m, d]() {
      if (a->requires_grad) {
        a->ensure_grad();
        for (int64_t i = 0; i < n; ++i)
          for (int64_t j = 0; j < m; ++j) {
            const T go = out->g[static_cast<size_t>(i * m + j)];
            if (go == T(0)) continue;
            const T* br = b->v.data() + j * d;
            T* ga = a->g.data() + i * d;
            for (int64_t k = 0; k < d; ++k) ga[k] += go * br[k];
          }
      }
      if (b->requires_grad) {
        b->ensure_grad();
        for (int64_t i = 0; i < n; ++i)
          for (int64_t j = 0; j < m; ++j) {
            const T go = out->g[static_cast<size_t>(i * m + j)];
            if (go == T(0)) continue;
            const T* ar = a->v.data() + i * d;
            T* gb = b->g.data() + j * d;
            for (int64_t k = 0; k < d; ++k) gb[k] += go * ar[k];
          }
      }
    });
  }
  return out;
}

// Mean over anchors of [logsumexp over j != i] - logits[i, partner_i].
template <typename T>
Var<T> paired_infonce(Tape<T>* tape, const Var<T>& logits, const std::vector<int>& partners) {
  require(logits->shape.size() == 2 && logits->shape[0] == logits->shape[1],
          "paired_infonce: logits must be square");
  const int64_t n = logits->shape[0];
  require(static_cast<int64_t>(partners.size()) == n, "paired_infonce: partner map size mismatch");
  for (int64_t i = 0; i < n; ++i)
    require(partners[static_cast<size_t>(i)] >= 0 && partners[static_cast<size_t>(i)] < n &&
                partners[static_cast<size_t>(i)] != i,
            "paired_infonce: bad partner index");

  std::vector<double> lse(static_cast<size_t>(n));
  double loss = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const T* row = logits->v.data() + i * n;
    double mx = -1e300;
    for (int64_t j = 0; j < n; ++j)
      if (j != i) mx = std::max(mx, static_cast<double>(row[j]));
    double acc = 0.0;
    for (int64_t j = 0; j < n; ++j)
      if (j != i) acc += std::exp(static_cast<double>(row[j]) - mx);
    lse[static_cast<size_t>(i)] = mx + std::log(acc);
    loss += lse[static_cast<size_t>(i)] - static_cast<double>(row[partners[static_cast<size_t>(i)]]);
  }
  auto out = make_scalar<T>(static_cast<T>(loss / static_cast<double>(n)), rec(tape, {logits}));
  if (out->requires_grad) {
    tape->record([logits, out, partners, lse, n]() {
      logits->ensure_grad();
      const double go = static_cast<double>(out->g[0]) / static_cast<double>(n);
      for (int64_t i = 0; i < n; ++i) {
        const T* row = logits->v.data() + i * n;
        T* grow = logits->g.data() + i * n;
        for (int64_t j = 0; j < n; ++j) {
          if (j == i) continue;
          const double p = std::exp(static_cast<double>(row[j]) - lse[static_cast<size_t>(i)]);
          grow[j] += static_cast<T>(go * p);
        }
        grow[partners[static_cast<size_t>(i)]] -= static_cast<T>(go);
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// differentiable STFT magnitude (Hann, centered, reflection padding)
// ---------------------------------------------------------------------------

template <typename T>
Var<T> stft_mag_op(Tape<T>* tape, const Var<T>& x, int fft_size, int hop) {
  require(audio::is_power_of_two(static_cast<size_t>(fft_size)), "stft_mag_op: fft_size must be a power of two");
  const int64_t len = x->numel();
  require(len >= 2, "stft_mag_op: signal too short");

  const int pad = fft_size / 2;
  const int frames = static_cast<int>(len / hop) + 1;
  const int bins = fft_size / 2 + 1;
  const std::vector<double> win = audio::make_window(audio::Window::kHann, fft_size);

  auto reflect = [len](int64_t p) -> int64_t {
    if (len == 1) return 0;
    const int64_t period = 2 * (len - 1);
    int64_t q = p % period;
    if (q < 0) q += period;
    if (q >= len) q = period - q;
    return q;
  };

  auto out = make_var<T>({frames, bins}, rec(tape, {x}));
  // one-sided spectra kept for the backward pass
  auto spectra = std::make_shared<std::vector<std::complex<double>>>(
      static_cast<size_t>(frames) * bins);

  std::vector<std::complex<double>> buf(static_cast<size_t>(fft_size));
  for (int f = 0; f < frames; ++f) {
    const int64_t start = static_cast<int64_t>(f) * hop - pad;
    for (int i = 0; i < fft_size; ++i) {
      const int64_t src = reflect(start + i);
      buf[static_cast<size_t>(i)] = {static_cast<double>(x->v[static_cast<size_t>(src)]) * win[static_cast<size_t>(i)], 0.0};
    }
    audio::fft(buf, false);
    for (int b = 0; b < bins; ++b) {
      (*spectra)[static_cast<size_t>(f) * bins + b] = buf[static_cast<size_t>(b)];
      out->v[static_cast<size_t>(f) * bins + b] = static_cast<T>(std::abs(buf[static_cast<size_t>(b)]));
    }
  }

  if (out->requires_grad) {
    tape->record([x, out, spectra, win, reflect, fft_size, hop, pad, frames, bins]() {
      x->ensure_grad();
      std::vector<std::complex<double>> h(static_cast<size_t>(fft_size));
      for (int f = 0; f < frames; ++f) {
        std::fill(h.begin(), h.end(), std::complex<double>(0.0, 0.0));
        bool any = false;
        for (int b = 0; b < bins; ++b) {
          const double gm = static_cast<double>(out->g[static_cast<size_t>(f) * bins + b]);
          if (gm == 0.0) continue;
          const std::complex<double> c = (*spectra)[static_cast<size_t>(f) * bins + b];
          const double mag = std::abs(c);
          if (mag < 1e-300) continue;
          h[static_cast<size_t>(b)] = c * (gm / mag);
          any = true;
        }
        if (!any) continue;
        audio::fft(h, true);  // unnormalized inverse kernel gives the adjoint sum
        const int64_t start = static_cast<int64_t>(f) * hop - pad;
        for (int i = 0; i < fft_size; ++i) {
          const int64_t src = reflect(start + i);
          x->g[static_cast<size_t>(src)] += static_cast<T>(h[static_cast<size_t>(i)].real() * win[static_cast<size_t>(i)]);
        }
      }
    });
  }
  return out;
}

}  // namespace mixstyle::nn
