#include "dtsys/set_dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace dtsys {

namespace {

using Ranges = std::vector<std::pair<std::size_t, std::size_t>>;

void append_product(const Grid& grid, const Ranges& ranges, std::vector<std::size_t>& out) {
  MultiIndex idx(ranges.size());
  for (std::size_t i = 0; i < ranges.size(); ++i) idx[i] = ranges[i].first;
  for (;;) {
    out.push_back(grid.flatten(idx));
    std::size_t axis = ranges.size();
    while (axis-- > 0) {
      if (idx[axis] < ranges[axis].second) {
        ++idx[axis];
        break;
      }
      idx[axis] = ranges[axis].first;
    }
    if (axis == static_cast<std::size_t>(-1)) return;
  }
}

// Cover of the box [lo, hi] clipped to the grid; nullopt when disjoint.
std::optional<Ranges> cover(const Grid& grid, const Point& lo, const Point& hi) {
  Ranges r;
  for (std::size_t i = 0; i < grid.dim(); ++i) {
    const auto a = static_cast<Eigen::Index>(i);
    const double l = std::max(lo[a], grid.box().lower[a]);
    const double h = std::min(hi[a], grid.box().upper[a]);
    auto range = grid.axis_range(i, l, h);
    if (!range) return std::nullopt;
    r.push_back(*range);
  }
  return r;
}

}  // namespace

std::string_view to_string(IterationStatus s) {
  switch (s) {
    case IterationStatus::Converged: return "converged";
    case IterationStatus::NotConverged: return "not_converged";
    case IterationStatus::Unbounded: return "unbounded";
  }
  return "?";
}

std::string_view to_string(OmegaMode m) {
  return m == OmegaMode::Nested ? "nested" : "truncated_tails";
}

CellMapper::CellMapper(const System& sys, std::shared_ptr<const Grid> grid, ImageConfig config)
    : sys_(sys), grid_(std::move(grid)), config_(config) {
  if (sys_.dim() != grid_->dim()) throw std::invalid_argument("grid dimension does not match system");
  if (config_.samples_per_axis == 0) throw std::invalid_argument("samples_per_axis must be positive");
  if (config_.padding.kind == Padding::Kind::Lipschitz && !(config_.padding.lipschitz >= 0)) {
    throw std::invalid_argument("Lipschitz bound must be non-negative");
  }
}

const CellMapper::Entry& CellMapper::image(std::size_t cell) {
  auto it = cache_.find(cell);
  if (it != cache_.end()) return it->second;
  return cache_.emplace(cell, compute(cell)).first->second;
}

CellMapper::Entry CellMapper::compute(std::size_t cell) const {
  const Grid& g = *grid_;
  const Box cb = g.cell_box(cell);
  const auto m = cb.dim();
  Entry e;

  Point lo = Point::Constant(m, std::numeric_limits<double>::infinity());
  Point hi = Point::Constant(m, -std::numeric_limits<double>::infinity());
  bool any = false;
  Point y(m);
  for (const Point& x : sample_lattice(cb, config_.samples_per_axis)) {
    sys_.map(std::span<const double>(x.data(), static_cast<std::size_t>(m)),
             std::span<double>(y.data(), static_cast<std::size_t>(m)));
    if (!y.allFinite()) {
      e.escaped = true;
      continue;
    }
    if (!g.box().contains(y)) e.escaped = true;
    lo = lo.cwiseMin(y);
    hi = hi.cwiseMax(y);
    any = true;
  }
  if (!any) return e;

  if (auto raw = cover(g, lo, hi)) append_product(g, *raw, e.raw);

  switch (config_.padding.kind) {
    case Padding::Kind::None:
      e.padded = e.raw;
      break;
    case Padding::Kind::OneCell: {
      if (auto r = cover(g, lo, hi)) {
        for (std::size_t i = 0; i < r->size(); ++i) {
          auto& [first, last] = (*r)[i];
          if (first > 0) --first;
          if (last + 1 < g.counts()[i]) ++last;
        }
        append_product(g, *r, e.padded);
      }
      break;
    }
    case Padding::Kind::Lipschitz: {
      const std::size_t s = config_.samples_per_axis;
      const Point w = cb.widths();
      // Largest ℓ∞ distance from any cell point to its nearest lattice sample.
      const double reach = s == 1 ? 0.5 * linf_norm(w) : 0.5 * linf_norm(w) / static_cast<double>(s - 1);
      const double r = config_.padding.lipschitz * reach;
      const Point plo = lo.array() - r;
      const Point phi = hi.array() + r;
      if (auto rr = cover(g, plo, phi)) append_product(g, *rr, e.padded);
      break;
    }
  }
  std::sort(e.padded.begin(), e.padded.end());
  return e;
}

ImageResult outer_image(const System& sys, const CellSet& s, const ImageConfig& config) {
  CellMapper mapper(sys, s.grid_ptr(), config);
  std::vector<char> padded(s.grid().size(), 0), raw(s.grid().size(), 0);
  bool escaped = false;
  for (auto c : s.indices()) {
    const auto& e = mapper.image(c);
    escaped = escaped || e.escaped;
    for (auto d : e.padded) padded[d] = 1;
    for (auto d : e.raw) raw[d] = 1;
  }
  return {CellSet::from_mask(s.grid_ptr(), padded), CellSet::from_mask(s.grid_ptr(), raw), escaped};
}

bool is_positively_invariant(const System& sys, const CellSet& s, const ImageConfig& config) {
  const ImageResult img = outer_image(sys, s, config);
  return !img.escaped && img.cells.subset_of(s);
}

bool is_invariant(const System& sys, const CellSet& s, const ImageConfig& config) {
  const ImageResult img = outer_image(sys, s, config);
  return !img.escaped && img.cells.subset_of(s) && s.subset_of(img.raw);
}

InvariantPartResult invariant_part(const System& sys, const CellSet& e, const ImageConfig& config,
                                   std::optional<std::size_t> max_iters) {
  if (e.empty()) throw std::invalid_argument("invariant_part needs a non-empty set");
  const Grid& g = e.grid();
  const std::size_t cap = max_iters.value_or(10 * g.size());
  CellMapper mapper(sys, e.grid_ptr(), config);

  std::vector<char> in = e.mask();
  std::vector<std::size_t> current = e.indices();
  std::vector<char> hit(g.size(), 0);

  InvariantPartResult result{CellSet(e.grid_ptr())};
  result.status = IterationStatus::NotConverged;
  while (result.iterations < cap) {
    ++result.iterations;
    std::fill(hit.begin(), hit.end(), 0);
    for (auto c : current) {
      for (auto d : mapper.image(c).padded) hit[d] = 1;
    }
    std::vector<std::size_t> next;
    next.reserve(current.size());
    for (auto c : current) {
      if (!hit[c]) continue;
      const auto& img = mapper.image(c).padded;
      if (std::any_of(img.begin(), img.end(), [&](std::size_t d) { return in[d] != 0; })) {
        next.push_back(c);
      }
    }
    const bool stable = next.size() == current.size();
    for (auto c : current) in[c] = 0;
    for (auto c : next) in[c] = 1;
    current = std::move(next);
    if (stable) {
      result.status = IterationStatus::Converged;
      break;
    }
    if (current.empty()) {
      result.status = IterationStatus::Converged;
      break;
    }
  }
  result.cells = CellSet(e.grid_ptr(), std::move(current));
  return result;
}

OmegaSetResult omega_of_set(const System& sys, const CellSet& h, const ImageConfig& config,
                            const OmegaSetOptions& options) {
  if (h.empty()) throw std::invalid_argument("omega_of_set needs a non-empty set");
  const Grid& g = h.grid();
  CellMapper mapper(sys, h.grid_ptr(), config);

  auto image_of = [&](const std::vector<std::size_t>& cells, bool& escaped) {
    std::vector<char> mark(g.size(), 0);
    for (auto c : cells) {
      const auto& e = mapper.image(c);
      escaped = escaped || e.escaped;
      for (auto d : e.padded) mark[d] = 1;
    }
    return mark;
  };

  OmegaSetResult result{CellSet(h.grid_ptr())};

  if (is_positively_invariant(sys, h, config)) {
    result.mode = OmegaMode::Nested;
    result.status = IterationStatus::NotConverged;
    const std::vector<char> base = h.mask();
    std::vector<std::size_t> current = h.indices();
    const std::size_t cap = options.max_iters.value_or(10 * g.size());
    while (result.iterations < cap) {
      ++result.iterations;
      bool escaped = false;
      const std::vector<char> mark = image_of(current, escaped);
      if (escaped) {
        result.status = IterationStatus::Unbounded;
        break;
      }
      std::vector<std::size_t> next;
      for (std::size_t c = 0; c < mark.size(); ++c) {
        if (mark[c] && base[c]) next.push_back(c);
      }
      if (!std::includes(current.begin(), current.end(), next.begin(), next.end())) {
        result.nested = false;
      }
      const bool stable = next == current;
      current = std::move(next);
      if (stable || current.empty()) {
        result.status = IterationStatus::Converged;
        break;
      }
    }
    result.cells = CellSet(h.grid_ptr(), std::move(current));
    return result;
  }

  result.mode = OmegaMode::TruncatedTails;
  const std::size_t n_max = options.n_max;
  const std::size_t j_max = std::min(options.j_max, n_max);
  std::vector<std::vector<std::size_t>> iterates;
  iterates.push_back(h.indices());
  for (std::size_t n = 1; n <= n_max; ++n) {
    bool escaped = false;
    const std::vector<char> mark = image_of(iterates.back(), escaped);
    ++result.iterations;
    if (escaped) {
      result.status = IterationStatus::Unbounded;
      return result;
    }
    std::vector<std::size_t> next;
    for (std::size_t c = 0; c < mark.size(); ++c) {
      if (mark[c]) next.push_back(c);
    }
    iterates.push_back(std::move(next));
  }

  // Tail unions U_j = ∪_{n=j..n_max} Tⁿ(h), intersected over j = 0..j_max.
  std::vector<char> tail(g.size(), 0);
  std::vector<char> meet(g.size(), 1);
  for (std::size_t j = n_max + 1; j-- > 0;) {
    for (auto c : iterates[j]) tail[c] = 1;
    if (j <= j_max) {
      for (std::size_t c = 0; c < meet.size(); ++c) meet[c] = meet[c] && tail[c];
    }
  }
  result.cells = CellSet::from_mask(h.grid_ptr(), meet);
  result.status = IterationStatus::Converged;
  return result;
}

bool is_invariantly_connected_finite(const System& sys, const PointList& set, double tol) {
  if (set.empty()) throw std::invalid_argument("set must be non-empty");
  const std::size_t n = set.size();
  std::vector<std::size_t> next(n);
  std::vector<char> taken(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Point y = sys.map(set[i]);
    std::size_t best = n;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      const double d = linf_distance(y, set[j]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (!(best_d <= tol)) {
      throw NotInvariantError("T maps point " + std::to_string(i) + " outside the set");
    }
    if (taken[best]) throw NotInvariantError("T is not a permutation of the set");
    taken[best] = 1;
    next[i] = best;
  }
  // One cycle iff walking from 0 visits every point before returning.
  std::size_t len = 0, k = 0;
  do {
    k = next[k];
    ++len;
  } while (k != 0 && len <= n);
  return len == n;
}

}  // namespace dtsys
