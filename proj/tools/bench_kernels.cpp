// Times the OpenMP kernels against the serial reference on training-sized
// workloads and verifies they agree bit for bit.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "dstlab/kernels.hpp"
#include "dstlab/rng.hpp"

using namespace dstlab;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::vector<double> random_vec(size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

double time_case(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const double t0 = now_seconds();
  for (int i = 0; i < reps; ++i) fn();
  return (now_seconds() - t0) / reps;
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 5;
  if (argc > 1) reps = std::atoi(argv[1]);
  Rng rng(7);

  printf("%-28s %12s %12s %8s %6s\n", "kernel", "serial [ms]", "openmp [ms]", "speedup",
         "equal");

  auto report = [&](const std::string& name, const std::function<void()>& fn,
                    std::vector<double>& out) {
    kernels::set_backend(kernels::Backend::Serial);
    const double ts = time_case(fn, reps);
    std::vector<double> serial_out = out;
    kernels::set_backend(kernels::Backend::OpenMP);
    const double tp = time_case(fn, reps);
    const bool equal =
        std::memcmp(serial_out.data(), out.data(), out.size() * sizeof(double)) == 0;
    printf("%-28s %12.3f %12.3f %7.2fx %6s\n", name.c_str(), ts * 1e3, tp * 1e3, ts / tp,
           equal ? "yes" : "NO");
  };

  {  // the large-MLP hidden layer at batch 128
    const size_t b = 128, in = 1024, out_dim = 512;
    auto x = random_vec(b * in, rng), w = random_vec(out_dim * in, rng),
         bias = random_vec(out_dim, rng), dy = random_vec(b * out_dim, rng);
    std::vector<double> y(b * out_dim), dx(b * in), dw(out_dim * in), db(out_dim);
    report("linear_forward 128x1024x512",
           [&] { kernels::linear_forward(x.data(), w.data(), bias.data(), y.data(), b, in, out_dim); },
           y);
    report("linear_backward 128x1024x512",
           [&] {
             kernels::linear_backward(x.data(), w.data(), dy.data(), dx.data(), dw.data(),
                                      db.data(), b, in, out_dim);
           },
           dw);
  }
  {  // the middle small-cnn block at batch 32
    kernels::ConvShape s{32, 64, 3, 1, 1, 16, 16};
    const size_t b = 32;
    auto x = random_vec(b * s.c_in * s.h_in * s.w_in, rng),
         w = random_vec(s.c_out * s.c_in * s.k * s.k, rng), bias = random_vec(s.c_out, rng),
         dy = random_vec(b * s.c_out * s.h_out() * s.w_out(), rng);
    std::vector<double> y(b * s.c_out * s.h_out() * s.w_out()),
        dx(b * s.c_in * s.h_in * s.w_in), dw(s.c_out * s.c_in * s.k * s.k), db(s.c_out);
    report("conv2d_forward 32c64 16x16",
           [&] { kernels::conv2d_forward(x.data(), w.data(), bias.data(), y.data(), b, s); }, y);
    report("conv2d_backward 32c64 16x16",
           [&] {
             kernels::conv2d_backward(x.data(), w.data(), dy.data(), dx.data(), dw.data(),
                                      db.data(), b, s);
           },
           dw);
  }
  kernels::set_backend(kernels::Backend::OpenMP);
  if (!kernels::openmp_compiled()) printf("note: built without OpenMP; both columns are serial\n");
  return 0;
}
