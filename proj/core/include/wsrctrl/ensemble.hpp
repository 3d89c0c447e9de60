#pragma once

// Distribution of the stacked parameter Lambda = [vec(A); vec(B)], seeded
// sample banks and plain empirical expectations over them.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "wsrctrl/matops.hpp"

namespace wsrctrl {

enum class Family { PointMass, Normal, Laplace };

std::string_view to_string(Family f);
Family parse_family(std::string_view name);  // "point-mass" | "normal" | "laplace"

// Independent components. Entry k of `mean`/`stddev`/`families` refers to
// Lambda(k); the A block comes first (column-major), then the B block.
struct ParameterDistribution {
  Index n = 0;
  Index m = 0;
  std::vector<Family> families;
  Vec mean;
  Vec stddev;

  Index dim() const { return n * (n + m); }
  Mat mean_A() const;
  Mat mean_B() const;
  // Stable textual digest of every field, used as bank provenance.
  std::string fingerprint() const;
};

// Input to build_distribution. Either give explicit standard deviations or
// set `stddev_ratio` > 0 to use stddev = |mean| * ratio (ratio 0.1 gives the
// covariance (diag(E[Lambda]) / 10)^2).
struct DistributionSpec {
  Index n = 0;
  Index m = 0;
  Mat mean_A;
  Mat mean_B;
  std::vector<Family> families;  // length n(n+m); empty means use a_family/b_family
  Family a_family = Family::Normal;
  Family b_family = Family::Normal;
  Vec stddev;                    // length n(n+m) when stddev_ratio <= 0
  double stddev_ratio = 0.0;
};

ParameterDistribution build_distribution(const DistributionSpec& spec);

// Two-state, one-input benchmark plant: normal A entries, Laplace B entries,
// stddev = |mean| / 10.
ParameterDistribution example_plant_distribution();

// Deterministic sub-seed for stream k: splitmix64 applied to seed + k * golden
// gamma. Used for repetitions, trials and anything else indexed by k.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t k);

using Rng = std::mt19937_64;

// One draw of Lambda. Components are drawn in index order; point-mass
// components consume no randomness. Laplace uses scale stddev / sqrt(2).
void draw_parameter(const ParameterDistribution& dist, Rng& rng, Eigen::Ref<Vec> out);

class SampleBank {
 public:
  SampleBank(Index n, Index m, Mat params, std::uint64_t seed, std::string provenance);

  Index n() const { return n_; }
  Index m() const { return m_; }
  Index size() const { return params_.cols(); }
  std::uint64_t seed() const { return seed_; }
  const std::string& provenance() const { return provenance_; }

  // Column i holds Lambda_i.
  const Mat& params() const { return params_; }
  Mat A(Index i) const;
  Mat B(Index i) const;

 private:
  Index n_;
  Index m_;
  Mat params_;
  std::uint64_t seed_;
  std::string provenance_;
};

SampleBank draw_bank(const ParameterDistribution& dist, Index count, std::uint64_t seed);

using ParamFunction = std::function<Mat(const Mat& A, const Mat& B)>;

// Arithmetic mean of phi over the bank, summed sequentially in sample order.
Mat expect(const SampleBank& bank, const ParamFunction& phi);

// (1/N) sum_i w_i Lambda_i Lambda_i^T. An empty `weights` means all ones.
Mat second_moment(const SampleBank& bank, const Eigen::Ref<const Vec>& weights);

enum class Block { A, B };

// E[X^T P Y] for X, Y in {A, B}, read off a second moment of Lambda.
Mat bilinear_expect(const Mat& moment, Index n, Index m, Block x, const Eigen::Ref<const Mat>& p,
                    Block y);

// CSV with a leading `# n=..,m=..,N=..,seed=..` line, then a header row and
// one sample per row: vec(A) entries followed by vec(B) entries.
void write_bank_csv(const SampleBank& bank, std::ostream& os);
SampleBank read_bank_csv(std::istream& is);

}  // namespace wsrctrl
