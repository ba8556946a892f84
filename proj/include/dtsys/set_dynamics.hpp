#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <unordered_map>

#include "dtsys/cellset.hpp"
#include "dtsys/system.hpp"

namespace dtsys {

/// How a sampled cell image is enlarged into an outer cover.
struct Padding {
  enum class Kind { None, OneCell, Lipschitz };
  Kind kind = Kind::OneCell;
  double lipschitz = 0.0;

  static Padding none() { return {Kind::None, 0.0}; }
  static Padding one_cell() { return {Kind::OneCell, 0.0}; }
  /// Rigorous for an ℓ∞ Lipschitz bound L of T: the sampled hull is grown by
  /// L times the largest distance from a cell point to its nearest sample.
  static Padding lipschitz_bound(double L) { return {Kind::Lipschitz, L}; }
};

struct ImageConfig {
  std::size_t samples_per_axis = 3;
  Padding padding;
};

struct ImageResult {
  CellSet cells;  // padded cover
  CellSet raw;    // sampled hull cover, before padding
  bool escaped = false;
};

/// Lazily computed per-cell images on a fixed grid.
class CellMapper {
 public:
  struct Entry {
    std::vector<std::size_t> padded;
    std::vector<std::size_t> raw;
    bool escaped = false;
  };

  CellMapper(const System& sys, std::shared_ptr<const Grid> grid, ImageConfig config);

  const Entry& image(std::size_t cell);
  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  const ImageConfig& config() const { return config_; }

 private:
  Entry compute(std::size_t cell) const;

  const System& sys_;
  std::shared_ptr<const Grid> grid_;
  ImageConfig config_;
  std::unordered_map<std::size_t, Entry> cache_;
};

/// Sampled image of every cell of s: the hull of the images of a regular
/// lattice (corners and center included), covered by grid cells and padded.
/// Samples that leave the grid box or are non-finite set `escaped`.
ImageResult outer_image(const System& sys, const CellSet& s, const ImageConfig& config = {});

bool is_positively_invariant(const System& sys, const CellSet& s, const ImageConfig& config = {});

/// outer_image(s) ⊆ s without escape, and every cell of s is hit by the raw
/// sampled image of s.
bool is_invariant(const System& sys, const CellSet& s, const ImageConfig& config = {});

enum class IterationStatus { Converged, NotConverged, Unbounded };

std::string_view to_string(IterationStatus s);

struct InvariantPartResult {
  CellSet cells;
  IterationStatus status = IterationStatus::Converged;
  std::size_t iterations = 0;
};

/// Repeatedly drops cells with no image cell inside the current set or no
/// preimage cell inside it. The fixed point outer-approximates the largest
/// invariant subset of e. Default cap: 10 × grid size.
InvariantPartResult invariant_part(const System& sys, const CellSet& e, const ImageConfig& config = {},
                                   std::optional<std::size_t> max_iters = std::nullopt);

enum class OmegaMode { Nested, TruncatedTails };

std::string_view to_string(OmegaMode m);

struct OmegaSetOptions {
  std::size_t j_max = 100;
  std::size_t n_max = 200;
  std::optional<std::size_t> max_iters;
};

struct OmegaSetResult {
  CellSet cells;
  OmegaMode mode = OmegaMode::Nested;
  IterationStatus status = IterationStatus::Converged;
  std::size_t iterations = 0;
  /// Nested mode: S(k+1) ⊆ S(k) held at every step.
  bool nested = true;
};

/// Limit set of a cell set. A positively invariant h is intersected with its
/// images until stable; otherwise the tails ∪_{n=j..n_max} Tⁿ(h) are
/// intersected over j <= j_max. Any escape aborts with Unbounded.
OmegaSetResult omega_of_set(const System& sys, const CellSet& h, const ImageConfig& config = {},
                            const OmegaSetOptions& options = {});

class NotInvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// For a finite set permuted by T (within tol): true iff the permutation is a
/// single cycle, i.e. the set is one periodic motion. Throws
/// NotInvariantError when T does not permute the set.
bool is_invariantly_connected_finite(const System& sys, const PointList& set, double tol);

}  // namespace dtsys
