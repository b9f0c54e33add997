#include "qzd/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_set>

namespace qzd {

std::optional<std::uint8_t> LevelScheme::find(std::string_view label) const {
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (levels[i] == label) return static_cast<std::uint8_t>(i);
  return std::nullopt;
}

std::size_t BasisStateHash::operator()(const BasisState& s) const noexcept {
  std::size_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint8_t b) {
    h ^= b;
    h *= 1099511628211ull;
  };
  for (auto l : s.levels) mix(l);
  mix(0xff);
  for (auto p : s.photons) mix(p);
  return h;
}

SystemLayout::SystemLayout(std::vector<AtomSite> atoms, std::vector<Mode> modes,
                           unsigned photon_cutoff)
    : atoms_(std::move(atoms)), modes_(std::move(modes)), cutoff_(photon_cutoff) {
  if (cutoff_ == 0) throw ConfigError("photon cutoff must be at least 1");
  if (cutoff_ > 255) throw ConfigError("photon cutoff too large");
  for (const auto& a : atoms_) {
    if (a.scheme.levels.empty()) throw ConfigError("atom " + a.name + " has no levels");
    if (a.scheme.excited.size() != a.scheme.levels.size())
      throw ConfigError("atom " + a.name + " excited flags do not match levels");
  }
}

std::size_t SystemLayout::atom_index(std::string_view name) const {
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (atoms_[i].name == name) return i;
  throw ConfigError("unknown atom '" + std::string(name) + "'");
}

std::size_t SystemLayout::mode_index(std::string_view name) const {
  for (std::size_t i = 0; i < modes_.size(); ++i)
    if (modes_[i].name == name) return i;
  throw ConfigError("unknown mode '" + std::string(name) + "'");
}

std::uint8_t SystemLayout::level_index(std::size_t atom, std::string_view label) const {
  auto idx = atoms_.at(atom).scheme.find(label);
  if (!idx)
    throw ConfigError("level '" + std::string(label) + "' is not in the scheme of atom " +
                      atoms_[atom].name);
  return *idx;
}

BasisState SystemLayout::make_state(
    const std::vector<std::string>& levels,
    const std::vector<std::pair<std::string, unsigned>>& excited_modes) const {
  if (levels.size() != atoms_.size())
    throw ConfigError("expected " + std::to_string(atoms_.size()) + " atom levels, got " +
                      std::to_string(levels.size()));
  BasisState s;
  s.levels.reserve(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) s.levels.push_back(level_index(i, levels[i]));
  s.photons.assign(modes_.size(), 0);
  for (const auto& [name, n] : excited_modes) {
    if (n > cutoff_)
      throw ConfigError("occupation " + std::to_string(n) + " of mode " + name +
                        " exceeds cutoff " + std::to_string(cutoff_));
    s.photons[mode_index(name)] = static_cast<std::uint8_t>(n);
  }
  return s;
}

bool SystemLayout::is_valid(const BasisState& s) const {
  if (s.levels.size() != atoms_.size() || s.photons.size() != modes_.size()) return false;
  for (std::size_t i = 0; i < s.levels.size(); ++i)
    if (s.levels[i] >= atoms_[i].scheme.size()) return false;
  for (auto p : s.photons)
    if (p > cutoff_) return false;
  return true;
}

void SystemLayout::validate(const BasisState& s) const {
  if (s.levels.size() != atoms_.size())
    throw ConfigError("state has " + std::to_string(s.levels.size()) + " atom levels, layout has " +
                      std::to_string(atoms_.size()) + " atoms");
  if (s.photons.size() != modes_.size())
    throw ConfigError("state has " + std::to_string(s.photons.size()) +
                      " photon occupations, layout has " + std::to_string(modes_.size()) +
                      " modes");
  for (std::size_t i = 0; i < s.levels.size(); ++i)
    if (s.levels[i] >= atoms_[i].scheme.size())
      throw ConfigError("level index " + std::to_string(s.levels[i]) +
                        " is outside the scheme of atom " + atoms_[i].name);
  for (std::size_t m = 0; m < s.photons.size(); ++m)
    if (s.photons[m] > cutoff_)
      throw ConfigError("occupation of mode " + modes_[m].name + " exceeds cutoff " +
                        std::to_string(cutoff_));
}

std::string SystemLayout::label(const BasisState& s) const {
  std::string out = "|";
  for (std::size_t i = 0; i < s.levels.size(); ++i) {
    if (i) out += ',';
    out += atoms_[i].scheme.levels.at(s.levels[i]);
    out += '_';
    out += atoms_[i].name;
  }
  out += ';';
  bool any = false;
  for (std::size_t m = 0; m < s.photons.size(); ++m) {
    if (s.photons[m] == 0) continue;
    if (any) out += ',';
    out += modes_[m].name;
    out += '=';
    out += std::to_string(s.photons[m]);
    any = true;
  }
  if (!any) out += "vac";
  out += '>';
  return out;
}

bool SystemLayout::operator==(const SystemLayout& other) const {
  return atoms_ == other.atoms_ && modes_ == other.modes_ && cutoff_ == other.cutoff_;
}

std::optional<std::pair<BasisState, double>> Stencil::apply(const BasisState& s,
                                                            unsigned cutoff) const {
  BasisState out = s;
  double amp = 1.0;
  for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) {
    bool ok = std::visit(
        [&](const auto& f) -> bool {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, AtomFlip>) {
            if (out.levels[f.atom] != f.from) return false;
            out.levels[f.atom] = f.to;
          } else if constexpr (std::is_same_v<T, PhotonLower>) {
            auto n = out.photons[f.mode];
            if (n == 0) return false;
            amp *= std::sqrt(static_cast<double>(n));
            out.photons[f.mode] = static_cast<std::uint8_t>(n - 1);
          } else {
            auto n = out.photons[f.mode];
            if (n >= cutoff) return false;
            amp *= std::sqrt(static_cast<double>(n + 1));
            out.photons[f.mode] = static_cast<std::uint8_t>(n + 1);
          }
          return true;
        },
        *it);
    if (!ok) return std::nullopt;
  }
  return std::make_pair(std::move(out), amp);
}

Stencil Stencil::adjoint() const {
  std::vector<Factor> adj;
  adj.reserve(factors_.size());
  for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) {
    adj.push_back(std::visit(
        [](const auto& f) -> Factor {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, AtomFlip>)
            return AtomFlip{f.atom, f.from, f.to};
          else if constexpr (std::is_same_v<T, PhotonLower>)
            return PhotonRaise{f.mode};
          else
            return PhotonLower{f.mode};
        },
        *it));
  }
  return Stencil(std::move(adj));
}

StateSpace::StateSpace(std::shared_ptr<const SystemLayout> layout, std::vector<BasisState> basis)
    : layout_(std::move(layout)), basis_(std::move(basis)) {
  if (!layout_) throw ConfigError("state space needs a layout");
  labels_.reserve(basis_.size());
  index_.reserve(basis_.size());
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    layout_->validate(basis_[i]);
    if (!index_.emplace(basis_[i], i).second)
      throw ConfigError("duplicate basis state " + layout_->label(basis_[i]));
    labels_.push_back(layout_->label(basis_[i]));
  }
}

std::optional<std::size_t> StateSpace::index_of(const BasisState& s) const {
  auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> StateSpace::index_of_label(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return i;
  return std::nullopt;
}

bool StateSpace::operator==(const StateSpace& other) const {
  return *layout_ == *other.layout_ && basis_ == other.basis_;
}

StateSpace enumerate_closure(std::shared_ptr<const SystemLayout> layout,
                             std::span<const Stencil> hermitian_terms,
                             std::span<const Stencil> jump_terms,
                             std::span<const BasisState> seeds) {
  if (!layout) throw ConfigError("closure needs a layout");
  const unsigned cutoff = layout->photon_cutoff();

  std::vector<Stencil> moves;
  moves.reserve(2 * hermitian_terms.size() + jump_terms.size());
  for (const auto& t : hermitian_terms) {
    moves.push_back(t);
    moves.push_back(t.adjoint());
  }
  moves.insert(moves.end(), jump_terms.begin(), jump_terms.end());

  std::vector<BasisState> order;
  std::unordered_set<BasisState, BasisStateHash> seen;
  std::deque<BasisState> queue;
  for (const auto& s : seeds) {
    layout->validate(s);
    if (seen.insert(s).second) {
      order.push_back(s);
      queue.push_back(s);
    }
  }

  while (!queue.empty()) {
    BasisState current = std::move(queue.front());
    queue.pop_front();
    std::vector<std::pair<std::string, BasisState>> fresh;
    for (const auto& m : moves) {
      auto image = m.apply(current, cutoff);
      if (!image) continue;
      if (seen.contains(image->first)) continue;
      seen.insert(image->first);
      fresh.emplace_back(layout->label(image->first), std::move(image->first));
    }
    std::sort(fresh.begin(), fresh.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [label, s] : fresh) {
      order.push_back(s);
      queue.push_back(std::move(s));
    }
  }
  return StateSpace(std::move(layout), std::move(order));
}

std::optional<std::size_t> state_index(const StateSpace& space, const BasisState& s) {
  return space.index_of(s);
}

StateVector embed(const StateSpace& space,
                  std::span<const std::pair<BasisState, Complex>> amplitudes) {
  StateVector v = StateVector::Zero(static_cast<Eigen::Index>(space.dimension()));
  for (const auto& [state, amp] : amplitudes) {
    auto idx = space.index_of(state);
    if (!idx) {
      std::string name = space.layout().is_valid(state) ? space.layout().label(state)
                                                        : std::string("<invalid state>");
      throw ConfigError("state " + name + " is not in the space");
    }
    v(static_cast<Eigen::Index>(*idx)) += amp;
  }
  return v;
}

namespace {

std::vector<std::optional<std::size_t>> index_map(const StateSpace& from, const StateSpace& to) {
  if (!(from.layout() == to.layout())) throw ConfigError("spaces use different layouts");
  std::vector<std::optional<std::size_t>> map(from.dimension());
  for (std::size_t i = 0; i < from.dimension(); ++i) map[i] = to.index_of(from[i]);
  return map;
}

}  // namespace

StateVector transfer(const StateSpace& from, const StateVector& v, const StateSpace& to,
                     double drop_tol) {
  auto map = index_map(from, to);
  StateVector out = StateVector::Zero(static_cast<Eigen::Index>(to.dimension()));
  for (std::size_t i = 0; i < map.size(); ++i) {
    const Complex a = v(static_cast<Eigen::Index>(i));
    if (map[i]) {
      out(static_cast<Eigen::Index>(*map[i])) = a;
    } else if (std::abs(a) > drop_tol) {
      throw ConfigError("amplitude on " + from.label(i) + " has no place in the target space");
    }
  }
  return out;
}

DensityMatrix transfer(const StateSpace& from, const DensityMatrix& rho, const StateSpace& to,
                       double drop_tol) {
  auto map = index_map(from, to);
  const auto n = static_cast<Eigen::Index>(to.dimension());
  DensityMatrix out = DensityMatrix::Zero(n, n);
  for (std::size_t i = 0; i < map.size(); ++i) {
    for (std::size_t j = 0; j < map.size(); ++j) {
      const Complex a = rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (map[i] && map[j]) {
        out(static_cast<Eigen::Index>(*map[i]), static_cast<Eigen::Index>(*map[j])) = a;
      } else if (std::abs(a) > drop_tol) {
        throw ConfigError("density element on " + from.label(i) + " / " + from.label(j) +
                          " has no place in the target space");
      }
    }
  }
  return out;
}

}  // namespace qzd
