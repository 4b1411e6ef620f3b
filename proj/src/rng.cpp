#include "privdet/rng.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "privdet/errors.hpp"

namespace privdet {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                          std::uint64_t b) {
  std::uint64_t s = base;
  std::uint64_t h = splitmix64(s);
  s ^= a * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
  h ^= splitmix64(s);
  s ^= b * 0xda942042e4dd58b5ULL + 0x9e3779b97f4a7c15ULL;
  h ^= splitmix64(s);
  return h;
}

GaussianStream::GaussianStream(std::uint64_t seed) : gen_(seed) {}

double GaussianStream::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller on uniforms u1 in (0, 1], u2 in [0, 1).
  const double u1 =
      (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = r * std::sin(angle);
  have_spare_ = true;
  return r * std::cos(angle);
}

Vector GaussianStream::draw(Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = next();
  return v;
}

Matrix psd_sqrt(const Matrix& s) {
  if (s.rows() != s.cols()) {
    throw std::invalid_argument("psd_sqrt: matrix not square");
  }
  if (s.rows() == 0) return s;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(s));
  if (es.info() != Eigen::Success) {
    throw NumericalError("psd_sqrt: eigensolver failed");
  }
  Vector ev = es.eigenvalues();
  const double scale = 1.0 + std::max(0.0, ev.maxCoeff());
  Vector root(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-12 * scale) {
      throw NumericalError("psd_sqrt: matrix has a negative eigenvalue");
    }
    root(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  return es.eigenvectors() * root.asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace privdet
