#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "qzd/types.hpp"

namespace qzd {

// Ordered set of level labels for one atom. Excited levels are flagged so
// that protocol steps can refuse to act mid-excitation.
struct LevelScheme {
  std::string name;
  std::vector<std::string> levels;
  std::vector<bool> excited;

  std::optional<std::uint8_t> find(std::string_view label) const;
  bool is_excited(std::uint8_t level) const { return excited.at(level); }
  std::size_t size() const { return levels.size(); }

  bool operator==(const LevelScheme&) const = default;
};

struct AtomSite {
  std::string name;
  LevelScheme scheme;

  bool operator==(const AtomSite&) const = default;
};

// One (location, polarization) photon mode.
struct Mode {
  std::string name;

  bool operator==(const Mode&) const = default;
};

// Tensor-product configuration: one level index per atom, one occupation per
// mode. Indices refer to the owning SystemLayout.
struct BasisState {
  std::vector<std::uint8_t> levels;
  std::vector<std::uint8_t> photons;

  bool operator==(const BasisState&) const = default;
  auto operator<=>(const BasisState&) const = default;
};

struct BasisStateHash {
  std::size_t operator()(const BasisState& s) const noexcept;
};

// Atoms, modes and truncation shared by every state of a model.
class SystemLayout {
 public:
  SystemLayout(std::vector<AtomSite> atoms, std::vector<Mode> modes,
               unsigned photon_cutoff = 1);

  const std::vector<AtomSite>& atoms() const { return atoms_; }
  const std::vector<Mode>& modes() const { return modes_; }
  unsigned photon_cutoff() const { return cutoff_; }

  std::size_t atom_index(std::string_view name) const;
  std::size_t mode_index(std::string_view name) const;
  std::uint8_t level_index(std::size_t atom, std::string_view label) const;

  // Builds a state from level labels (one per atom); all modes empty unless
  // listed in `excited_modes` as (mode name, occupation).
  BasisState make_state(
      const std::vector<std::string>& levels,
      const std::vector<std::pair<std::string, unsigned>>& excited_modes = {}) const;

  // Throws ConfigError naming the offending label or occupation.
  void validate(const BasisState& s) const;
  bool is_valid(const BasisState& s) const;

  // Canonical text form, e.g. "|R_A,g_B;aAR=1>" or "|0_A,g_B;vac>".
  std::string label(const BasisState& s) const;

  bool operator==(const SystemLayout& other) const;

 private:
  std::vector<AtomSite> atoms_;
  std::vector<Mode> modes_;
  unsigned cutoff_;
};

// Elementary factors of an operator product acting on basis states.
struct AtomFlip {
  std::size_t atom;
  std::uint8_t to;
  std::uint8_t from;
};
struct PhotonLower {
  std::size_t mode;
};
struct PhotonRaise {
  std::size_t mode;
};
using Factor = std::variant<AtomFlip, PhotonLower, PhotonRaise>;

// Product of factors with a single nonzero image per basis state (or none).
// The rightmost factor acts first.
class Stencil {
 public:
  Stencil() = default;
  explicit Stencil(std::vector<Factor> factors) : factors_(std::move(factors)) {}

  // Image state and the real matrix element (bosonic square-root factors).
  std::optional<std::pair<BasisState, double>> apply(const BasisState& s,
                                                     unsigned cutoff) const;
  Stencil adjoint() const;
  const std::vector<Factor>& factors() const { return factors_; }

 private:
  std::vector<Factor> factors_;
};

// Ordered basis with exact inverse index. Immutable once built.
class StateSpace {
 public:
  StateSpace(std::shared_ptr<const SystemLayout> layout, std::vector<BasisState> basis);

  std::size_t dimension() const { return basis_.size(); }
  const BasisState& operator[](std::size_t i) const { return basis_[i]; }
  const std::vector<BasisState>& basis() const { return basis_; }
  const SystemLayout& layout() const { return *layout_; }
  const std::shared_ptr<const SystemLayout>& layout_ptr() const { return layout_; }

  std::optional<std::size_t> index_of(const BasisState& s) const;
  std::optional<std::size_t> index_of_label(std::string_view label) const;
  const std::string& label(std::size_t i) const { return labels_[i]; }

  bool operator==(const StateSpace& other) const;

 private:
  std::shared_ptr<const SystemLayout> layout_;
  std::vector<BasisState> basis_;
  std::vector<std::string> labels_;
  std::unordered_map<BasisState, std::size_t, BasisStateHash> index_;
};

// Smallest set containing the seeds and closed under every Hermitian term
// (forward and adjoint) and every jump stencil (forward only). Breadth-first
// from the seeds in the order given; states discovered from the same parent
// are appended in lexicographic label order.
StateSpace enumerate_closure(std::shared_ptr<const SystemLayout> layout,
                             std::span<const Stencil> hermitian_terms,
                             std::span<const Stencil> jump_terms,
                             std::span<const BasisState> seeds);

std::optional<std::size_t> state_index(const StateSpace& space, const BasisState& s);

// Dense vector with the given amplitudes; not normalized.
StateVector embed(const StateSpace& space,
                  std::span<const std::pair<BasisState, Complex>> amplitudes);

// Re-expresses a vector from one space in another space over the same layout.
// Amplitudes on states missing from `to` raise ConfigError unless below `drop_tol`.
StateVector transfer(const StateSpace& from, const StateVector& v, const StateSpace& to,
                     double drop_tol = 0.0);
DensityMatrix transfer(const StateSpace& from, const DensityMatrix& rho,
                       const StateSpace& to, double drop_tol = 0.0);

}  // namespace qzd
