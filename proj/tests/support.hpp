#pragma once

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "qzd/hilbert.hpp"
#include "qzd/model.hpp"

namespace qzd::testing {

inline const char* const kBranch0[] = {
    "|0_A,g_B;vac>",    "|eR_A,g_B;vac>", "|R_A,g_B;aAR=1>", "|R_A,g_B;bR=1>",
    "|R_A,g_B;aBR=1>", "|R_A,eR_B;vac>", "|R_A,R_B;vac>",
};

// Chain 1-2-3-4-5-6-7 with couplings (Omega_A, g, eta, eta, g, Omega_B),
// written down directly rather than assembled from operator stencils.
inline DenseOperator chain_hamiltonian(double g, double eta, double omega_a, double omega_b) {
  DenseOperator h = DenseOperator::Zero(7, 7);
  const double c[] = {omega_a, g, eta, eta, g, omega_b};
  for (int i = 0; i < 6; ++i) h(i, i + 1) = h(i + 1, i) = c[i];
  return h;
}

// Every basis state of the layout (full tensor product within the cutoff).
inline std::vector<BasisState> all_states(const SystemLayout& layout) {
  std::vector<BasisState> out(1);
  for (const auto& atom : layout.atoms()) {
    std::vector<BasisState> next;
    for (const auto& s : out)
      for (std::size_t l = 0; l < atom.scheme.size(); ++l) {
        BasisState t = s;
        t.levels.push_back(static_cast<std::uint8_t>(l));
        next.push_back(t);
      }
    out = std::move(next);
  }
  for (std::size_t m = 0; m < layout.modes().size(); ++m) {
    std::vector<BasisState> next;
    for (const auto& s : out)
      for (unsigned n = 0; n <= layout.photon_cutoff(); ++n) {
        BasisState t = s;
        t.photons.push_back(static_cast<std::uint8_t>(n));
        next.push_back(t);
      }
    out = std::move(next);
  }
  return out;
}

// Fixpoint iteration over the whole product space: keep adding images of
// marked states until nothing changes.
inline std::set<BasisState> fixpoint_closure(const SystemLayout& layout,
                                             const std::vector<Stencil>& hermitian,
                                             const std::vector<Stencil>& jumps,
                                             const std::vector<BasisState>& seeds) {
  std::set<BasisState> marked(seeds.begin(), seeds.end());
  std::vector<Stencil> moves = jumps;
  for (const auto& s : hermitian) {
    moves.push_back(s);
    moves.push_back(s.adjoint());
  }
  const auto universe = all_states(layout);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& s : universe) {
      if (!marked.count(s)) continue;
      for (const auto& m : moves)
        if (auto img = m.apply(s, layout.photon_cutoff()))
          changed |= marked.insert(img->first).second;
    }
  }
  return marked;
}

inline DenseOperator random_hermitian(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  DenseOperator a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(d(rng), d(rng));
  return 0.5 * (a + a.adjoint());
}

inline StateVector random_state(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> d(0.0, 1.0);
  StateVector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(d(rng), d(rng));
  return v / v.norm();
}

}  // namespace qzd::testing
