#pragma once

#include <cstddef>
#include <vector>

namespace dstlab::kernels {

// Two implementations of every compute kernel: a plain serial reference and
// an OpenMP version. The OpenMP loops are partitioned so that each output
// element is written by exactly one thread and every accumulation runs in a
// fixed order inside that thread, so results are bit-identical to the serial
// reference for any thread count. Tests assert that equality directly.
enum class Backend { Serial, OpenMP };

Backend backend();
void set_backend(Backend b);
bool openmp_compiled();

struct ConvShape {
  size_t c_in = 0, c_out = 0, k = 0, stride = 1, pad = 0;
  size_t h_in = 0, w_in = 0;
  size_t h_out() const { return (h_in + 2 * pad - k) / stride + 1; }
  size_t w_out() const { return (w_in + 2 * pad - k) / stride + 1; }
};

// y[b,o] = sum_i x[b,i] * w[o,i] + bias[o]         (bias may be null)
void linear_forward(const double* x, const double* w, const double* bias, double* y,
                    size_t batch, size_t in, size_t out);

// dx[b,i] = sum_o dy[b,o] * w[o,i]                  (dx may be null)
// dw[o,i] = sum_b dy[b,o] * x[b,i]
// dbias[o] = sum_b dy[b,o]                          (dbias may be null)
void linear_backward(const double* x, const double* w, const double* dy, double* dx, double* dw,
                     double* dbias, size_t batch, size_t in, size_t out);

void conv2d_forward(const double* x, const double* w, const double* bias, double* y, size_t batch,
                    const ConvShape& s);

void conv2d_backward(const double* x, const double* w, const double* dy, double* dx, double* dw,
                     double* dbias, size_t batch, const ConvShape& s);

void relu_forward(const double* x, double* y, size_t n);
void relu_backward(const double* x, const double* dy, double* dx, size_t n);

// 2x2 window, stride 2; requires even h and w. argmax records the flat input
// index of each window maximum (first maximum in scan order wins).
void maxpool2_forward(const double* x, double* y, size_t* argmax, size_t batch, size_t c, size_t h,
                      size_t w);
void maxpool2_backward(const double* dy, const size_t* argmax, double* dx, size_t batch, size_t c,
                       size_t h, size_t w);

void global_avg_pool_forward(const double* x, double* y, size_t batch, size_t c, size_t h,
                             size_t w);
void global_avg_pool_backward(const double* dy, double* dx, size_t batch, size_t c, size_t h,
                              size_t w);

}  // namespace dstlab::kernels
