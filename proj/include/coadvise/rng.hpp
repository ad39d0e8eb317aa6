#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace coadvise {

// SplitMix64 step; also used as the hash for deriving substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derive an independent stream seed from (master, stream_id) by hashing.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s ^= stream_id * 0xD1B54A32D192ED03ULL;
  std::uint64_t b = splitmix64(s);
  return a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
}

// xoshiro256++ with SplitMix64 seeding. All distribution draws below are
// implemented in-repo so that streams are reproducible bit-for-bit across
// runs and worker counts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
  }

  static Rng stream(std::uint64_t master, std::uint64_t stream_id) {
    return Rng(derive_seed(master, stream_id));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform on [0, 1) with 53 random bits
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1]
  double uniform01_open() { return 1.0 - uniform01(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double chi_square(int df) {
    double s = 0.0;
    for (int i = 0; i < df; ++i) {
      const double z = normal();
      s += z * z;
    }
    return s;
  }

  // Student t as normal / sqrt(chi^2_df / df)
  double student_t(int df) { return normal() / std::sqrt(chi_square(df) / df); }

  bool bernoulli(double p) { return uniform01() < p; }

  // Binomial via inverse CDF walk on a single uniform.
  int binomial(int n, double p) {
    const double u = uniform01();
    double pmf = std::pow(1.0 - p, n);
    double cdf = pmf;
    int k = 0;
    while (u > cdf && k < n) {
      pmf *= (static_cast<double>(n - k) / (k + 1)) * (p / (1.0 - p));
      cdf += pmf;
      ++k;
    }
    return k;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> state_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Lower Cholesky factor with a small diagonal jitter retry for matrices
// that are PSD only up to rounding.
inline Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& sigma,
                                            double jitter = 1e-10,
                                            int max_tries = 6) {
  Eigen::MatrixXd s = sigma;
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    s += jitter * Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols());
    jitter *= 10.0;
  }
  throw std::runtime_error("cholesky_with_jitter: matrix not positive semidefinite");
}

// One multivariate normal draw: mean + L * z.
inline Eigen::VectorXd mvn_draw(const Eigen::VectorXd& mean,
                                const Eigen::MatrixXd& chol_lower, Rng& rng) {
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + chol_lower * z;
}

}  // namespace coadvise
