#include "beltrami/transforms.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "beltrami/errors.hpp"

namespace beltrami {

// FFTW's planner mutates global state; executing a plan on caller-owned
// buffers is thread-safe.
static std::mutex g_fftw_planner_mutex;

cd cauchy_cell_weight(cd d, double h) {
  if (d == cd(0.0, 0.0)) return cd(0.0, 0.0);  // odd kernel, symmetric cell
  const double a = 0.5 * h;
  const cd c1(-a, -a), c2(a, -a), c3(a, a), c4(-a, a);
  struct Side {
    cd u0, u1, alpha, beta;
  };
  // On each side conj(u) is affine in u: conj(u) = alpha * u + beta.
  const Side sides[4] = {
      {c1, c2, cd(1.0, 0.0), cd(0.0, 2.0 * a)},
      {c2, c3, cd(-1.0, 0.0), cd(2.0 * a, 0.0)},
      {c3, c4, cd(1.0, 0.0), cd(0.0, -2.0 * a)},
      {c4, c1, cd(-1.0, 0.0), cd(-2.0 * a, 0.0)},
  };
  // integral over the cell of dm(u)/(d-u) = (1/2i) * contour integral of
  // conj(u)/(d-u) du; per side the primitive is elementary and the log of the
  // endpoint ratio stays on the principal branch because a straight segment
  // never subtends a full half-turn around the pole.
  cd total(0.0, 0.0);
  for (const Side& s : sides) {
    const cd num = d - s.u1;
    const cd den = d - s.u0;
    total += -s.alpha * (s.u1 - s.u0) - (s.alpha * d + s.beta) * std::log(num / den);
  }
  const cd integral = total / cd(0.0, 2.0);
  return integral / M_PI;
}

enum class Op { cauchy, beurling };

struct TransformPlan::Impl {
  GridSpec spec;
  int padded = 0;
  std::vector<cd> cauchy_kernel_hat;  // forward FFT of kernel weights, padded grid
  fftw_plan forward = nullptr;   // in-place c2c on a padded buffer
  fftw_plan backward = nullptr;

  ~Impl() {
    std::lock_guard<std::mutex> lock(g_fftw_planner_mutex);
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }

  ComplexField apply(const ComplexField& h, Op op) const;
};

TransformPlan::TransformPlan(const GridSpec& spec) : impl_(std::make_unique<Impl>()) {
  if (spec.resolution < 8) throw std::invalid_argument("transform plan needs resolution >= 8");
  impl_->spec = spec;
  const int N = spec.resolution;
  const int P = 2 * N;
  impl_->padded = P;
  const double h = spec.spacing();
  const size_t total = static_cast<size_t>(P) * P;

  std::vector<cd> buffer(total, cd(0.0, 0.0));
  {
    std::lock_guard<std::mutex> lock(g_fftw_planner_mutex);
    fftw_complex* raw = reinterpret_cast<fftw_complex*>(buffer.data());
    impl_->forward = fftw_plan_dft_2d(P, P, raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
    impl_->backward = fftw_plan_dft_2d(P, P, raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!impl_->forward || !impl_->backward) throw std::runtime_error("fftw plan creation failed");
  }

  // Cauchy kernel, wraparound displacement order: index (a, b) holds the
  // weight for displacement (dx, dy) with dx = a for a < P/2 else a - P.
  for (int a = 0; a < P; ++a) {
    const int dx = (a < P / 2) ? a : a - P;
    for (int b = 0; b < P; ++b) {
      const int dy = (b < P / 2) ? b : b - P;
      const cd d(dx * h, dy * h);
      cd w;
      if (std::abs(dx) <= 1 && std::abs(dy) <= 1) {
        w = cauchy_cell_weight(d, h);
      } else {
        w = h * h / (M_PI * d);
      }
      buffer[static_cast<size_t>(a) * P + b] = w;
    }
  }
  fftw_execute_dft(impl_->forward, reinterpret_cast<fftw_complex*>(buffer.data()),
                   reinterpret_cast<fftw_complex*>(buffer.data()));
  impl_->cauchy_kernel_hat = std::move(buffer);
}

TransformPlan::~TransformPlan() = default;
TransformPlan::TransformPlan(TransformPlan&&) noexcept = default;
TransformPlan& TransformPlan::operator=(TransformPlan&&) noexcept = default;

const GridSpec& TransformPlan::spec() const { return impl_->spec; }
int TransformPlan::padded_size() const { return impl_->padded; }

static void check_support(const ComplexField& h, const GridSpec& spec) {
  require_same_grid(h.spec, spec, "transform");
  const int N = spec.resolution;
  const double margin = 0.9 * spec.halfwidth;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (h.at(i, j) == cd(0.0, 0.0)) continue;
      const cd z = spec.node(i, j) - spec.center;
      if (std::abs(z.real()) > margin || std::abs(z.imag()) > margin) {
        throw support_overflow_error("transform input is nonzero in the outer 10% window margin");
      }
    }
  }
}

ComplexField TransformPlan::Impl::apply(const ComplexField& h, Op op) const {
  const Impl& impl = *this;
  const fftw_plan fwd = forward;
  const fftw_plan bwd = backward;
  const int N = impl.spec.resolution;
  const int P = impl.padded;
  const size_t total = static_cast<size_t>(P) * P;
  std::vector<cd> buf(total, cd(0.0, 0.0));
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) buf[static_cast<size_t>(i) * P + j] = h.at(i, j);
  }
  fftw_complex* raw = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_execute_dft(fwd, raw, raw);
  const double scale = 1.0 / static_cast<double>(total);
  if (op == Op::cauchy) {
    for (size_t t = 0; t < total; ++t) buf[t] *= impl.cauchy_kernel_hat[t] * scale;
  } else {
    // Beurling multiplier conj(xi)/xi; only the argument of xi matters, so the
    // signed integer frequency pair stands in for xi directly. Zero frequency
    // gets multiplier 0.
    for (int a = 0; a < P; ++a) {
      const int p = (a < P / 2) ? a : a - P;
      for (int b = 0; b < P; ++b) {
        const int q = (b < P / 2) ? b : b - P;
        cd m(0.0, 0.0);
        if (p != 0 || q != 0) {
          const cd xi(static_cast<double>(p), static_cast<double>(q));
          m = std::conj(xi) / xi;
        }
        buf[static_cast<size_t>(a) * P + b] *= m * scale;
      }
    }
  }
  fftw_execute_dft(bwd, raw, raw);

  ComplexField out =
      make_field(impl.spec, op == Op::cauchy ? Meaning::displacement : Meaning::derivative);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) out.at(i, j) = buf[static_cast<size_t>(i) * P + j];
  }
  return out;
}

ComplexField TransformPlan::cauchy(const ComplexField& h) const {
  check_support(h, impl_->spec);
  return impl_->apply(h, Op::cauchy);
}

ComplexField TransformPlan::beurling(const ComplexField& h) const {
  check_support(h, impl_->spec);
  return impl_->apply(h, Op::beurling);
}

ComplexField cauchy_transform(const ComplexField& h, const TransformPlan& plan) {
  return plan.cauchy(h);
}

ComplexField beurling_transform(const ComplexField& h, const TransformPlan& plan) {
  return plan.beurling(h);
}

}  // namespace beltrami
