#include "dstlab/kernels.hpp"

#include <atomic>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dstlab::kernels {

namespace {
std::atomic<Backend> g_backend{
#ifdef _OPENMP
    Backend::OpenMP
#else
    Backend::Serial
#endif
};

inline long checked(size_t v) { return static_cast<long>(v); }
}  // namespace

Backend backend() { return g_backend.load(std::memory_order_relaxed); }
void set_backend(Backend b) { g_backend.store(b, std::memory_order_relaxed); }
bool openmp_compiled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

// ---------------------------------------------------------------- linear

static void linear_forward_serial(const double* x, const double* w, const double* bias, double* y,
                                  size_t batch, size_t in, size_t out) {
  for (size_t b = 0; b < batch; ++b) {
    const double* xb = x + b * in;
    double* yb = y + b * out;
    for (size_t o = 0; o < out; ++o) {
      double acc = bias ? bias[o] : 0.0;
      const double* wo = w + o * in;
      for (size_t i = 0; i < in; ++i) acc += xb[i] * wo[i];
      yb[o] = acc;
    }
  }
}

static void linear_forward_omp(const double* x, const double* w, const double* bias, double* y,
                               size_t batch, size_t in, size_t out) {
#pragma omp parallel for schedule(static)
  for (long b = 0; b < checked(batch); ++b) {
    const double* xb = x + static_cast<size_t>(b) * in;
    double* yb = y + static_cast<size_t>(b) * out;
    for (size_t o = 0; o < out; ++o) {
      double acc = bias ? bias[o] : 0.0;
      const double* wo = w + o * in;
      for (size_t i = 0; i < in; ++i) acc += xb[i] * wo[i];
      yb[o] = acc;
    }
  }
}

void linear_forward(const double* x, const double* w, const double* bias, double* y, size_t batch,
                    size_t in, size_t out) {
  if (backend() == Backend::OpenMP)
    linear_forward_omp(x, w, bias, y, batch, in, out);
  else
    linear_forward_serial(x, w, bias, y, batch, in, out);
}

static void linear_backward_serial(const double* x, const double* w, const double* dy, double* dx,
                                   double* dw, double* dbias, size_t batch, size_t in, size_t out) {
  if (dx) {
    for (size_t b = 0; b < batch; ++b) {
      double* dxb = dx + b * in;
      const double* dyb = dy + b * out;
      for (size_t i = 0; i < in; ++i) dxb[i] = 0.0;
      for (size_t o = 0; o < out; ++o) {
        const double g = dyb[o];
        const double* wo = w + o * in;
        for (size_t i = 0; i < in; ++i) dxb[i] += g * wo[i];
      }
    }
  }
  for (size_t o = 0; o < out; ++o) {
    double* dwo = dw + o * in;
    for (size_t i = 0; i < in; ++i) dwo[i] = 0.0;
    for (size_t b = 0; b < batch; ++b) {
      const double g = dy[b * out + o];
      const double* xb = x + b * in;
      for (size_t i = 0; i < in; ++i) dwo[i] += g * xb[i];
    }
    if (dbias) {
      double acc = 0.0;
      for (size_t b = 0; b < batch; ++b) acc += dy[b * out + o];
      dbias[o] = acc;
    }
  }
}

static void linear_backward_omp(const double* x, const double* w, const double* dy, double* dx,
                                double* dw, double* dbias, size_t batch, size_t in, size_t out) {
  if (dx) {
#pragma omp parallel for schedule(static)
    for (long b = 0; b < checked(batch); ++b) {
      double* dxb = dx + static_cast<size_t>(b) * in;
      const double* dyb = dy + static_cast<size_t>(b) * out;
      for (size_t i = 0; i < in; ++i) dxb[i] = 0.0;
      for (size_t o = 0; o < out; ++o) {
        const double g = dyb[o];
        const double* wo = w + o * in;
        for (size_t i = 0; i < in; ++i) dxb[i] += g * wo[i];
      }
    }
  }
#pragma omp parallel for schedule(static)
  for (long o = 0; o < checked(out); ++o) {
    double* dwo = dw + static_cast<size_t>(o) * in;
    for (size_t i = 0; i < in; ++i) dwo[i] = 0.0;
    for (size_t b = 0; b < batch; ++b) {
      const double g = dy[b * out + static_cast<size_t>(o)];
      const double* xb = x + b * in;
      for (size_t i = 0; i < in; ++i) dwo[i] += g * xb[i];
    }
    if (dbias) {
      double acc = 0.0;
      for (size_t b = 0; b < batch; ++b) acc += dy[b * out + static_cast<size_t>(o)];
      dbias[static_cast<size_t>(o)] = acc;
    }
  }
}

void linear_backward(const double* x, const double* w, const double* dy, double* dx, double* dw,
                     double* dbias, size_t batch, size_t in, size_t out) {
  if (backend() == Backend::OpenMP)
    linear_backward_omp(x, w, dy, dx, dw, dbias, batch, in, out);
  else
    linear_backward_serial(x, w, dy, dx, dw, dbias, batch, in, out);
}

// ---------------------------------------------------------------- conv2d

namespace {

inline void conv_forward_one(const double* x, const double* w, const double* bias, double* y,
                             size_t b, size_t co, const ConvShape& s) {
  const size_t ho = s.h_out(), wo = s.w_out();
  const double* xb = x + b * s.c_in * s.h_in * s.w_in;
  double* yb = y + ((b * s.c_out + co) * ho) * wo;
  const double* wc = w + co * s.c_in * s.k * s.k;
  for (size_t oy = 0; oy < ho; ++oy) {
    for (size_t ox = 0; ox < wo; ++ox) {
      double acc = bias ? bias[co] : 0.0;
      const long y0 = static_cast<long>(oy * s.stride) - static_cast<long>(s.pad);
      const long x0 = static_cast<long>(ox * s.stride) - static_cast<long>(s.pad);
      for (size_t ci = 0; ci < s.c_in; ++ci) {
        const double* xc = xb + ci * s.h_in * s.w_in;
        const double* wk = wc + ci * s.k * s.k;
        for (size_t ky = 0; ky < s.k; ++ky) {
          const long iy = y0 + static_cast<long>(ky);
          if (iy < 0 || iy >= static_cast<long>(s.h_in)) continue;
          for (size_t kx = 0; kx < s.k; ++kx) {
            const long ix = x0 + static_cast<long>(kx);
            if (ix < 0 || ix >= static_cast<long>(s.w_in)) continue;
            acc += xc[iy * static_cast<long>(s.w_in) + ix] * wk[ky * s.k + kx];
          }
        }
      }
      yb[oy * wo + ox] = acc;
    }
  }
}

// Input gradient for one sample; dxb must be zeroed by the caller.
inline void conv_backward_input_one(const double* w, const double* dy, double* dxb, size_t b,
                                    const ConvShape& s) {
  const size_t ho = s.h_out(), wo = s.w_out();
  for (size_t co = 0; co < s.c_out; ++co) {
    const double* dyc = dy + ((b * s.c_out + co) * ho) * wo;
    const double* wc = w + co * s.c_in * s.k * s.k;
    for (size_t oy = 0; oy < ho; ++oy) {
      for (size_t ox = 0; ox < wo; ++ox) {
        const double g = dyc[oy * wo + ox];
        const long y0 = static_cast<long>(oy * s.stride) - static_cast<long>(s.pad);
        const long x0 = static_cast<long>(ox * s.stride) - static_cast<long>(s.pad);
        for (size_t ci = 0; ci < s.c_in; ++ci) {
          double* dxc = dxb + ci * s.h_in * s.w_in;
          const double* wk = wc + ci * s.k * s.k;
          for (size_t ky = 0; ky < s.k; ++ky) {
            const long iy = y0 + static_cast<long>(ky);
            if (iy < 0 || iy >= static_cast<long>(s.h_in)) continue;
            for (size_t kx = 0; kx < s.k; ++kx) {
              const long ix = x0 + static_cast<long>(kx);
              if (ix < 0 || ix >= static_cast<long>(s.w_in)) continue;
              dxc[iy * static_cast<long>(s.w_in) + ix] += g * wk[ky * s.k + kx];
            }
          }
        }
      }
    }
  }
}

// Weight/bias gradient for one output channel, accumulated over the batch in
// index order.
inline void conv_backward_weight_one(const double* x, const double* dy, double* dw, double* dbias,
                                     size_t co, size_t batch, const ConvShape& s) {
  const size_t ho = s.h_out(), wo = s.w_out();
  double* dwc = dw + co * s.c_in * s.k * s.k;
  for (size_t i = 0; i < s.c_in * s.k * s.k; ++i) dwc[i] = 0.0;
  double bias_acc = 0.0;
  for (size_t b = 0; b < batch; ++b) {
    const double* xb = x + b * s.c_in * s.h_in * s.w_in;
    const double* dyc = dy + ((b * s.c_out + co) * ho) * wo;
    for (size_t oy = 0; oy < ho; ++oy) {
      for (size_t ox = 0; ox < wo; ++ox) {
        const double g = dyc[oy * wo + ox];
        bias_acc += g;
        const long y0 = static_cast<long>(oy * s.stride) - static_cast<long>(s.pad);
        const long x0 = static_cast<long>(ox * s.stride) - static_cast<long>(s.pad);
        for (size_t ci = 0; ci < s.c_in; ++ci) {
          const double* xc = xb + ci * s.h_in * s.w_in;
          double* wk = dwc + ci * s.k * s.k;
          for (size_t ky = 0; ky < s.k; ++ky) {
            const long iy = y0 + static_cast<long>(ky);
            if (iy < 0 || iy >= static_cast<long>(s.h_in)) continue;
            for (size_t kx = 0; kx < s.k; ++kx) {
              const long ix = x0 + static_cast<long>(kx);
              if (ix < 0 || ix >= static_cast<long>(s.w_in)) continue;
              wk[ky * s.k + kx] += g * xc[iy * static_cast<long>(s.w_in) + ix];
            }
          }
        }
      }
    }
  }
  if (dbias) dbias[co] = bias_acc;
}

}  // namespace

void conv2d_forward(const double* x, const double* w, const double* bias, double* y, size_t batch,
                    const ConvShape& s) {
  const size_t total = batch * s.c_out;
  if (backend() == Backend::OpenMP) {
#pragma omp parallel for schedule(static)
    for (long t = 0; t < checked(total); ++t)
      conv_forward_one(x, w, bias, y, static_cast<size_t>(t) / s.c_out,
                       static_cast<size_t>(t) % s.c_out, s);
  } else {
    for (size_t t = 0; t < total; ++t) conv_forward_one(x, w, bias, y, t / s.c_out, t % s.c_out, s);
  }
}

void conv2d_backward(const double* x, const double* w, const double* dy, double* dx, double* dw,
                     double* dbias, size_t batch, const ConvShape& s) {
  const size_t in_sample = s.c_in * s.h_in * s.w_in;
  if (backend() == Backend::OpenMP) {
    if (dx) {
#pragma omp parallel for schedule(static)
      for (long b = 0; b < checked(batch); ++b) {
        double* dxb = dx + static_cast<size_t>(b) * in_sample;
        std::memset(dxb, 0, in_sample * sizeof(double));
        conv_backward_input_one(w, dy, dxb, static_cast<size_t>(b), s);
      }
    }
#pragma omp parallel for schedule(static)
    for (long co = 0; co < checked(s.c_out); ++co)
      conv_backward_weight_one(x, dy, dw, dbias, static_cast<size_t>(co), batch, s);
  } else {
    if (dx) {
      for (size_t b = 0; b < batch; ++b) {
        double* dxb = dx + b * in_sample;
        std::memset(dxb, 0, in_sample * sizeof(double));
        conv_backward_input_one(w, dy, dxb, b, s);
      }
    }
    for (size_t co = 0; co < s.c_out; ++co)
      conv_backward_weight_one(x, dy, dw, dbias, co, batch, s);
  }
}

// ---------------------------------------------------------------- pointwise

void relu_forward(const double* x, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* x, const double* dy, double* dx, size_t n) {
  for (size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

void maxpool2_forward(const double* x, double* y, size_t* argmax, size_t batch, size_t c, size_t h,
                      size_t w) {
  const size_t ho = h / 2, wo = w / 2;
  const size_t planes = batch * c;
  for (size_t p = 0; p < planes; ++p) {
    const double* xp = x + p * h * w;
    double* yp = y + p * ho * wo;
    size_t* ap = argmax + p * ho * wo;
    for (size_t oy = 0; oy < ho; ++oy) {
      for (size_t ox = 0; ox < wo; ++ox) {
        size_t best = (2 * oy) * w + 2 * ox;
        double bv = xp[best];
        const size_t cand[3] = {(2 * oy) * w + 2 * ox + 1, (2 * oy + 1) * w + 2 * ox,
                                (2 * oy + 1) * w + 2 * ox + 1};
        for (size_t idx : cand) {
          if (xp[idx] > bv) {
            bv = xp[idx];
            best = idx;
          }
        }
        yp[oy * wo + ox] = bv;
        ap[oy * wo + ox] = p * h * w + best;
      }
    }
  }
}

void maxpool2_backward(const double* dy, const size_t* argmax, double* dx, size_t batch, size_t c,
                       size_t h, size_t w) {
  const size_t ho = h / 2, wo = w / 2;
  const size_t n_in = batch * c * h * w;
  const size_t n_out = batch * c * ho * wo;
  for (size_t i = 0; i < n_in; ++i) dx[i] = 0.0;
  for (size_t i = 0; i < n_out; ++i) dx[argmax[i]] += dy[i];
}

void global_avg_pool_forward(const double* x, double* y, size_t batch, size_t c, size_t h,
                             size_t w) {
  const size_t hw = h * w;
  for (size_t p = 0; p < batch * c; ++p) {
    double acc = 0.0;
    const double* xp = x + p * hw;
    for (size_t i = 0; i < hw; ++i) acc += xp[i];
    y[p] = acc / static_cast<double>(hw);
  }
}

void global_avg_pool_backward(const double* dy, double* dx, size_t batch, size_t c, size_t h,
                              size_t w) {
  const size_t hw = h * w;
  for (size_t p = 0; p < batch * c; ++p) {
    const double g = dy[p] / static_cast<double>(hw);
    double* dxp = dx + p * hw;
    for (size_t i = 0; i < hw; ++i) dxp[i] = g;
  }
}

}  // namespace dstlab::kernels
