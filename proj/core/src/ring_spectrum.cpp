#include "chainqfi/ring_spectrum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <unordered_map>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "chainqfi/error.hpp"
#include "chainqfi/units.hpp"

namespace chainqfi {
namespace {

using State = std::uint32_t;

State rotate(State s, int n) {
  const State mask = (State{1} << n) - 1;
  return ((s << 1) | (s >> (n - 1))) & mask;
}

struct Representative {
  State rep;
  int shift;  // s = T^shift rep
};

Representative representative_of(State s, int n) {
  State best = s;
  int best_shift = 0;
  State t = s;
  for (int j = 1; j < n; ++j) {
    t = rotate(t, n);  // t = T^j s
    if (t < best) {
      best = t;
      best_shift = j;
    }
  }
  // best = T^best_shift s  =>  s = T^{-best_shift} best
  return {best, (n - best_shift) % n};
}

int period_of(State rep, int n) {
  State t = rep;
  for (int j = 1; j <= n; ++j) {
    t = rotate(t, n);
    if (t == rep) return j;
  }
  return n;
}

struct Level {
  double energy;
  double count;
  double m2;
};

void diagonalise_sector(int n, int up, std::vector<Level>& levels) {
  std::vector<State> reps;
  std::vector<int> periods;
  for (State s = 0; s < (State{1} << n); ++s) {
    if (std::popcount(s) != up) continue;
    if (representative_of(s, n).rep != s) continue;
    reps.push_back(s);
    periods.push_back(period_of(s, n));
  }
  std::unordered_map<State, std::size_t> index;
  for (std::size_t i = 0; i < reps.size(); ++i) index.emplace(reps[i], i);

  const double m = up - 0.5 * n;
  const double multiplicity = (2 * up == n) ? 1.0 : 2.0;  // S^z -> -S^z mirror sector
  const std::complex<double> i_unit(0.0, 1.0);

  for (int k = 0; k < n; ++k) {
    std::vector<std::size_t> members;
    for (std::size_t a = 0; a < reps.size(); ++a)
      if ((k * periods[a]) % n == 0) members.push_back(a);
    if (members.empty()) continue;
    std::vector<long> local(reps.size(), -1);
    for (std::size_t j = 0; j < members.size(); ++j) local[members[j]] = static_cast<long>(j);

    const auto dim = static_cast<Eigen::Index>(members.size());
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    const double kk = 2.0 * kPi * k / n;
    for (std::size_t j = 0; j < members.size(); ++j) {
      const State a = reps[members[j]];
      const auto col = static_cast<Eigen::Index>(j);
      for (int b = 0; b < n; ++b) {
        const int c = (b + 1) % n;
        const bool sb = (a >> b) & 1U;
        const bool sc = (a >> c) & 1U;
        if (sb == sc) {
          h(col, col) += 0.25;
          continue;
        }
        h(col, col) -= 0.25;
        const State flipped = a ^ (State{1} << b) ^ (State{1} << c);
        const auto [rep, shift] = representative_of(flipped, n);
        const long row = local[index.at(rep)];
        if (row < 0) continue;  // state annihilated by the momentum projection
        const double ratio = std::sqrt(static_cast<double>(periods[members[j]]) /
                                       periods[index.at(rep)]);
        h(static_cast<Eigen::Index>(row), col) += 0.5 * ratio * std::exp(i_unit * (kk * shift));
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      raise(ErrorCode::DomainError, "ring diagonalisation failed");
    for (Eigen::Index e = 0; e < dim; ++e)
      levels.push_back({es.eigenvalues()[e], multiplicity, multiplicity * m * m});
  }
}

std::unique_ptr<RingSpectrum> build(int n) {
  std::vector<Level> levels;
  for (int up = 0; 2 * up <= n; ++up) diagonalise_sector(n, up, levels);
  std::sort(levels.begin(), levels.end(),
            [](const Level& a, const Level& b) { return a.energy < b.energy; });

  auto out = std::make_unique<RingSpectrum>();
  out->sites = n;
  out->ground_energy = levels.front().energy;
  constexpr double kMergeTol = 1e-10;
  for (const auto& l : levels) {
    const double x = l.energy - out->ground_energy;
    if (!out->excitation.empty() && x - out->excitation.back() < kMergeTol) {
      out->degeneracy.back() += l.count;
      out->m2_weight.back() += l.m2;
    } else {
      out->excitation.push_back(x);
      out->degeneracy.push_back(l.count);
      out->m2_weight.push_back(l.m2);
    }
  }
  return out;
}

}  // namespace

const RingSpectrum& ring_spectrum(int sites) {
  if (sites < 4 || sites > 18)
    raise(ErrorCode::InvalidArgument,
          "ring size must lie in [4, 18], got " + std::to_string(sites));
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<RingSpectrum>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[sites];
  if (!slot) slot = build(sites);
  return *slot;
}

double ring_reduced_susceptibility(const RingSpectrum& spectrum, double t) {
  if (!(t > 0.0)) raise(ErrorCode::NonPositiveTemperature, "reduced temperature must be > 0");
  double z = 0.0;
  double m2 = 0.0;
  const double beta = 1.0 / t;
  for (std::size_t i = 0; i < spectrum.excitation.size(); ++i) {
    const double w = std::exp(-beta * spectrum.excitation[i]);
    if (w == 0.0) break;
    z += spectrum.degeneracy[i] * w;
    m2 += spectrum.m2_weight[i] * w;
  }
  return m2 / (z * spectrum.sites * t);
}

}  // namespace chainqfi
