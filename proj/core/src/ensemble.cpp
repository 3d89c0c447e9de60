#include "wsrctrl/ensemble.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "wsrctrl/error.hpp"

namespace wsrctrl {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::PointMass:
      return "point-mass";
    case Family::Normal:
      return "normal";
    case Family::Laplace:
      return "laplace";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  if (name == "point-mass" || name == "point_mass" || name == "pointmass") return Family::PointMass;
  if (name == "normal" || name == "gaussian") return Family::Normal;
  if (name == "laplace") return Family::Laplace;
  throw ConfigError("unknown distribution family '" + std::string(name) +
                    "' (expected point-mass, normal or laplace)");
}

Mat ParameterDistribution::mean_A() const { return unvec(mean.head(n * n), n, n); }

Mat ParameterDistribution::mean_B() const { return unvec(mean.tail(n * m), n, m); }

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::string ParameterDistribution::fingerprint() const {
  std::string s = "n=" + std::to_string(n) + ";m=" + std::to_string(m) + ";";
  for (Index k = 0; k < dim(); ++k) {
    s += to_string(families[static_cast<std::size_t>(k)]);
    s += ':';
    append_double(s, mean(k));
    s += ':';
    append_double(s, stddev(k));
    s += ';';
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(s)));
  return hex;
}

ParameterDistribution build_distribution(const DistributionSpec& spec) {
  if (spec.n < 1 || spec.m < 1) throw ConfigError("distribution: n and m must be >= 1");
  if (spec.mean_A.rows() != spec.n || spec.mean_A.cols() != spec.n) {
    throw ConfigError("distribution: mean of A must be " + std::to_string(spec.n) + "x" +
                      std::to_string(spec.n));
  }
  if (spec.mean_B.rows() != spec.n || spec.mean_B.cols() != spec.m) {
    throw ConfigError("distribution: mean of B must be " + std::to_string(spec.n) + "x" +
                      std::to_string(spec.m));
  }
  ParameterDistribution dist;
  dist.n = spec.n;
  dist.m = spec.m;
  const Index d = dist.dim();
  dist.mean.resize(d);
  dist.mean << vec(spec.mean_A), vec(spec.mean_B);
  require_finite(dist.mean, "distribution mean");

  if (spec.families.empty()) {
    dist.families.assign(static_cast<std::size_t>(spec.n * spec.n), spec.a_family);
    dist.families.insert(dist.families.end(), static_cast<std::size_t>(spec.n * spec.m),
                         spec.b_family);
  } else if (static_cast<Index>(spec.families.size()) == d) {
    dist.families = spec.families;
  } else {
    throw ConfigError("distribution: families has length " + std::to_string(spec.families.size()) +
                      ", needs " + std::to_string(d));
  }

  if (spec.stddev_ratio > 0.0) {
    dist.stddev = dist.mean.cwiseAbs() * spec.stddev_ratio;
  } else {
    if (spec.stddev.size() != d) {
      throw ConfigError("distribution: stddev vector has length " +
                        std::to_string(spec.stddev.size()) + ", needs " + std::to_string(d));
    }
    dist.stddev = spec.stddev;
  }
  require_finite(dist.stddev, "distribution stddev");
  for (Index k = 0; k < d; ++k) {
    if (dist.stddev(k) < 0.0) {
      throw ConfigError("distribution: stddev entry " + std::to_string(k) + " is negative");
    }
    if (dist.stddev(k) == 0.0) dist.families[static_cast<std::size_t>(k)] = Family::PointMass;
    if (dist.families[static_cast<std::size_t>(k)] == Family::PointMass) dist.stddev(k) = 0.0;
  }
  return dist;
}

ParameterDistribution example_plant_distribution() {
  DistributionSpec spec;
  spec.n = 2;
  spec.m = 1;
  spec.mean_A.resize(2, 2);
  spec.mean_A << 0.97, -0.03, 0.1, 1.03;
  spec.mean_B.resize(2, 1);
  spec.mean_B << 0.005, 0.01;
  spec.a_family = Family::Normal;
  spec.b_family = Family::Laplace;
  spec.stddev_ratio = 0.1;
  return build_distribution(spec);
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + (k + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void draw_parameter(const ParameterDistribution& dist, Rng& rng, Eigen::Ref<Vec> out) {
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Index k = 0; k < dist.dim(); ++k) {
    const double mu = dist.mean(k);
    const double sd = dist.stddev(k);
    switch (dist.families[static_cast<std::size_t>(k)]) {
      case Family::PointMass:
        out(k) = mu;
        break;
      case Family::Normal:
        out(k) = mu + sd * gauss(rng);
        break;
      case Family::Laplace: {
        // Inverse CDF; u in [-1/2, 1/2).
        const double u = unit(rng);
        const double b = sd / std::sqrt(2.0);
        const double mag = std::max(1.0 - 2.0 * std::abs(u), std::numeric_limits<double>::min());
        out(k) = mu - b * std::copysign(1.0, u) * std::log(mag);
        break;
      }
    }
  }
}

SampleBank::SampleBank(Index n, Index m, Mat params, std::uint64_t seed, std::string provenance)
    : n_(n), m_(m), params_(std::move(params)), seed_(seed), provenance_(std::move(provenance)) {
  if (params_.rows() != n_ * (n_ + m_)) {
    throw DimensionError("SampleBank: parameter rows " + std::to_string(params_.rows()) +
                         " != n(n+m) = " + std::to_string(n_ * (n_ + m_)));
  }
  if (params_.cols() < 1) throw DimensionError("SampleBank: empty bank");
  for (Index i = 0; i < params_.cols(); ++i) {
    if (!params_.col(i).allFinite()) {
      throw NonFiniteValue("SampleBank: sample " + std::to_string(i) + " has non-finite entries",
                           static_cast<std::size_t>(i));
    }
  }
}

Mat SampleBank::A(Index i) const { return unvec(params_.col(i).head(n_ * n_), n_, n_); }

Mat SampleBank::B(Index i) const { return unvec(params_.col(i).tail(n_ * m_), n_, m_); }

SampleBank draw_bank(const ParameterDistribution& dist, Index count, std::uint64_t seed) {
  if (count < 1) throw ConfigError("draw_bank: sample count must be >= 1");
  Rng rng(seed);
  Mat params(dist.dim(), count);
  for (Index i = 0; i < count; ++i) draw_parameter(dist, rng, params.col(i));
  return SampleBank(dist.n, dist.m, std::move(params), seed, dist.fingerprint());
}

Mat expect(const SampleBank& bank, const ParamFunction& phi) {
  Mat acc;
  for (Index i = 0; i < bank.size(); ++i) {
    Mat v = phi(bank.A(i), bank.B(i));
    if (!v.allFinite()) {
      throw NonFiniteValue("expect: non-finite value at sample " + std::to_string(i),
                           static_cast<std::size_t>(i));
    }
    if (i == 0) {
      acc = std::move(v);
    } else {
      if (v.rows() != acc.rows() || v.cols() != acc.cols()) {
        throw DimensionError("expect: function changed shape at sample " + std::to_string(i));
      }
      acc += v;
    }
  }
  return acc / static_cast<double>(bank.size());
}

Mat second_moment(const SampleBank& bank, const Eigen::Ref<const Vec>& weights) {
  const Mat& p = bank.params();
  if (weights.size() == 0) return (p * p.transpose()) / static_cast<double>(bank.size());
  if (weights.size() != bank.size()) {
    throw DimensionError("second_moment: " + std::to_string(weights.size()) + " weights for " +
                         std::to_string(bank.size()) + " samples");
  }
  return (p * weights.asDiagonal() * p.transpose()) / static_cast<double>(bank.size());
}

Mat bilinear_expect(const Mat& moment, Index n, Index m, Block x, const Eigen::Ref<const Mat>& p,
                    Block y) {
  const Index cx = x == Block::A ? n : m;
  const Index cy = y == Block::A ? n : m;
  const Index ox = x == Block::A ? 0 : n * n;
  const Index oy = y == Block::A ? 0 : n * n;
  // (X^T P Y)_{ij} = sum_{k,l} X_{ki} P_{kl} Y_{lj}, X_{ki} = Lambda(ox + k + i n).
  Mat out(cx, cy);
  for (Index j = 0; j < cy; ++j) {
    for (Index i = 0; i < cx; ++i) {
      out(i, j) = (p.array() * moment.block(ox + i * n, oy + j * n, n, n).array()).sum();
    }
  }
  return out;
}

void write_bank_csv(const SampleBank& bank, std::ostream& os) {
  os << "# n=" << bank.n() << ",m=" << bank.m() << ",N=" << bank.size() << ",seed=" << bank.seed()
     << "\n";
  const Index n = bank.n();
  bool first = true;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      os << (first ? "" : ",") << "A" << i + 1 << "_" << j + 1;
      first = false;
    }
  }
  for (Index j = 0; j < bank.m(); ++j) {
    for (Index i = 0; i < n; ++i) os << ",B" << i + 1 << "_" << j + 1;
  }
  os << "\n";
  char buf[32];
  for (Index s = 0; s < bank.size(); ++s) {
    for (Index k = 0; k < bank.params().rows(); ++k) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, bank.params()(k, s));
      if (k) os << ',';
      os.write(buf, end - buf);
    }
    os << "\n";
  }
}

SampleBank read_bank_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) {
    throw IoError("bank csv: missing '# n=..,m=..,N=..,seed=..' line");
  }
  long long n = 0, m = 0, count = 0;
  unsigned long long seed = 0;
  if (std::sscanf(line.c_str(), "# n=%lld,m=%lld,N=%lld,seed=%llu", &n, &m, &count, &seed) != 4) {
    throw IoError("bank csv: malformed header line '" + line + "'");
  }
  if (!std::getline(is, line)) throw IoError("bank csv: missing column header");
  const Index d = n * (n + m);
  Mat params(d, count);
  for (Index s = 0; s < count; ++s) {
    if (!std::getline(is, line)) throw IoError("bank csv: expected " + std::to_string(count) + " rows");
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (Index k = 0; k < d; ++k) {
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw IoError("bank csv: bad number in row " + std::to_string(s) + " column " + std::to_string(k));
      }
      params(k, s) = v;
      p = next;
      if (k + 1 < d) {
        if (p == end || *p != ',') throw IoError("bank csv: short row " + std::to_string(s));
        ++p;
      }
    }
  }
  return SampleBank(n, m, std::move(params), seed, "imported");
}

}  // namespace wsrctrl
