#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtsys/cellset.hpp"
#include "dtsys/fixed_points.hpp"
#include "dtsys/lasalle.hpp"
#include "dtsys/limitset.hpp"
#include "dtsys/set_dynamics.hpp"
#include "dtsys/system.hpp"

namespace dtsys {

using Json = nlohmann::ordered_json;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// On-disk system definition. Exactly one of `map` / `higher_order` is set.
struct SystemFile {
  struct HigherOrder {
    std::size_t order = 1;
    std::string g;
    std::vector<double> initial;  // u(0), ..., u(k-1)
  };

  std::string name;
  std::size_t dimension = 0;
  std::vector<std::string> map;
  std::map<std::string, double> params;
  std::optional<std::string> lyapunov;
  std::optional<Box> domain;
  std::optional<std::vector<double>> initial;
  std::optional<HigherOrder> higher_order;
};

SystemFile parse_system_file(const std::string& text);
SystemFile load_system_file(const std::string& path);
Json system_file_to_json(const SystemFile& file);

/// First-order system described by the file (lifted when higher-order).
System build_system(const SystemFile& file);
/// Initial point stored in the file, if any (the lifted start for recurrences).
std::optional<Point> file_initial_point(const SystemFile& file);

/// Equivalent first-order file; passthrough for map files.
SystemFile lift_file(const SystemFile& file);

/// Shortest round-trip decimal form.
std::string format_double(double v);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

Json point_to_json(const Point& p);
Json box_to_json(const Box& b);
Json grid_to_json(const Grid& g);
Json cellset_to_json(const CellSet& s);
/// Rows of cell centers followed by half-widths.
void write_cellset_csv(std::ostream& os, const CellSet& s);

Json fixed_points_to_json(const FixedPointResult& r);
Json estimate_to_json(const LimitSetEstimate& est, const Classification& cls);
Json omega_set_to_json(const OmegaSetResult& r);
Json invariant_part_to_json(const InvariantPartResult& r);
Json report_to_json(const LasalleReport& r);
std::string report_summary(const LasalleReport& r);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace dtsys
