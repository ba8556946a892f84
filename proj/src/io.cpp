#include "dtsys/io.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dtsys {

namespace {

constexpr std::size_t kMaxViolationsInJson = 100;

std::vector<double> read_numbers(const Json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw InputError(std::string(what) + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Point to_point(const std::vector<double>& v) {
  return Eigen::Map<const Point>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Expression parse_field(const std::string& text, const std::string& what) {
  try {
    return parse(text);
  } catch (const ParseError& e) {
    throw InputError(what + ": " + e.what());
  }
}

}  // namespace

SystemFile parse_system_file(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("system file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("system file must be a JSON object");

  SystemFile f;
  try {
    f.name = j.value("name", std::string{});
    if (j.contains("params")) {
      if (!j["params"].is_object()) throw InputError("params must be an object");
      for (const auto& [k, v] : j["params"].items()) {
        if (!v.is_number()) throw InputError("parameter '" + k + "' must be a number");
        f.params[k] = v.get<double>();
      }
    }
    if (j.contains("lyapunov") && !j["lyapunov"].is_null()) f.lyapunov = j["lyapunov"].get<std::string>();
    if (j.contains("initial")) f.initial = read_numbers(j["initial"], "initial");

    const bool has_map = j.contains("map");
    const bool has_ho = j.contains("higher_order");
    if (has_map == has_ho) throw InputError("system file needs exactly one of 'map' or 'higher_order'");

    if (has_map) {
      if (!j["map"].is_array() || j["map"].empty()) throw InputError("map must be a non-empty array");
      for (const auto& e : j["map"]) f.map.push_back(e.get<std::string>());
      f.dimension = j.value("dimension", f.map.size());
      if (f.dimension != f.map.size()) {
        throw InputError("dimension " + std::to_string(f.dimension) + " does not match " +
                         std::to_string(f.map.size()) + " map components");
      }
    } else {
      const Json& ho = j["higher_order"];
      SystemFile::HigherOrder h;
      h.order = ho.at("order").get<std::size_t>();
      h.g = ho.at("g").get<std::string>();
      h.initial = read_numbers(ho.at("initial"), "higher_order.initial");
      if (h.order == 0) throw InputError("higher_order.order must be positive");
      if (h.initial.size() != h.order) {
        throw InputError("higher_order.initial needs " + std::to_string(h.order) + " values");
      }
      f.dimension = j.value("dimension", h.order);
      if (f.dimension != h.order) throw InputError("dimension must equal higher_order.order");
      f.higher_order = std::move(h);
    }

    if (j.contains("domain")) {
      const auto lo = read_numbers(j["domain"].at("lower"), "domain.lower");
      const auto hi = read_numbers(j["domain"].at("upper"), "domain.upper");
      if (lo.size() != f.dimension || hi.size() != f.dimension) {
        throw InputError("domain bounds must have the system dimension");
      }
      try {
        f.domain = Box(to_point(lo), to_point(hi));
      } catch (const std::invalid_argument& e) {
        throw InputError(std::string("domain: ") + e.what());
      }
    }
    if (f.initial && f.initial->size() != f.dimension) {
      throw InputError("initial point must have the system dimension");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed system file: ") + e.what());
  }
  // Validate expressions and variable coverage up front.
  (void)build_system(f);
  return f;
}

SystemFile load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open system file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_system_file(ss.str());
}

Json system_file_to_json(const SystemFile& f) {
  Json j;
  j["name"] = f.name;
  j["dimension"] = f.dimension;
  if (f.higher_order) {
    Json ho;
    ho["order"] = f.higher_order->order;
    ho["g"] = f.higher_order->g;
    ho["initial"] = f.higher_order->initial;
    j["higher_order"] = ho;
  } else {
    j["map"] = f.map;
  }
  Json params = Json::object();
  for (const auto& [k, v] : f.params) params[k] = v;
  j["params"] = params;
  if (f.lyapunov) j["lyapunov"] = *f.lyapunov;
  if (f.domain) j["domain"] = box_to_json(*f.domain);
  if (f.initial) j["initial"] = *f.initial;
  return j;
}

namespace {

Environment param_env(const SystemFile& f) {
  Environment env;
  for (const auto& [k, v] : f.params) env.bind(k, v);
  return env;
}

HigherOrderSpec higher_order_spec(const SystemFile& f) {
  HigherOrderSpec spec;
  spec.order = f.higher_order->order;
  spec.g = parse_field(f.higher_order->g, "higher_order.g");
  spec.params = param_env(f);
  spec.initial = f.higher_order->initial;
  return spec;
}

std::map<std::string, Expression> u_to_x(std::size_t k) {
  std::map<std::string, Expression> r;
  for (std::size_t i = 1; i <= k; ++i) {
    r.emplace("u" + std::to_string(i), Expression::variable("x" + std::to_string(i)));
  }
  return r;
}

}  // namespace

System build_system(const SystemFile& f) {
  try {
    std::optional<Expression> v;
    if (f.lyapunov) v = parse_field(*f.lyapunov, "lyapunov");
    if (f.higher_order) {
      LiftedSystem lifted = lift(higher_order_spec(f));
      if (v) v = substitute(*v, u_to_x(f.higher_order->order));
      return System(lifted.system.components(), lifted.system.params(), v, f.domain, f.name);
    }
    std::vector<Expression> comps;
    for (std::size_t i = 0; i < f.map.size(); ++i) {
      comps.push_back(parse_field(f.map[i], "map[" + std::to_string(i) + "]"));
    }
    return System(std::move(comps), param_env(f), v, f.domain, f.name);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

std::optional<Point> file_initial_point(const SystemFile& f) {
  if (f.initial) return to_point(*f.initial);
  if (f.higher_order) return lift(higher_order_spec(f)).initial;
  return std::nullopt;
}

SystemFile lift_file(const SystemFile& f) {
  if (!f.higher_order) return f;
  const LiftedSystem lifted = [&] {
    try {
      return lift(higher_order_spec(f));
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  }();
  SystemFile out;
  out.name = f.name;
  out.dimension = lifted.system.dim();
  for (const auto& c : lifted.system.components()) out.map.push_back(print(c));
  out.params = f.params;
  if (f.lyapunov) out.lyapunov = print(substitute(parse(*f.lyapunov), u_to_x(f.higher_order->order)));
  out.domain = f.domain;
  out.initial = std::vector<double>(lifted.initial.data(), lifted.initial.data() + lifted.initial.size());
  return out;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t m = traj.points.empty() ? 0 : static_cast<std::size_t>(traj.points[0].size());
  os << "n";
  for (std::size_t i = 1; i <= m; ++i) os << ",x" << i;
  os << "\n";
  for (std::size_t n = 0; n < traj.points.size(); ++n) {
    os << n;
    for (Eigen::Index i = 0; i < traj.points[n].size(); ++i) os << "," << format_double(traj.points[n][i]);
    os << "\n";
  }
}

Json point_to_json(const Point& p) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) j.push_back(p[i]);
  return j;
}

Json box_to_json(const Box& b) {
  Json j;
  j["lower"] = point_to_json(b.lower);
  j["upper"] = point_to_json(b.upper);
  return j;
}

Json grid_to_json(const Grid& g) {
  Json j = box_to_json(g.box());
  j["counts"] = g.counts();
  return j;
}

Json cellset_to_json(const CellSet& s) {
  Json j;
  j["grid"] = grid_to_json(s.grid());
  Json cells = Json::array();
  for (auto flat : s.indices()) cells.push_back(s.grid().unflatten(flat));
  j["cells"] = cells;
  return j;
}

void write_cellset_csv(std::ostream& os, const CellSet& s) {
  const std::size_t m = s.grid().dim();
  for (std::size_t i = 1; i <= m; ++i) os << (i > 1 ? "," : "") << "c" << i;
  for (std::size_t i = 1; i <= m; ++i) os << ",h" << i;
  os << "\n";
  for (auto flat : s.indices()) {
    const Box b = s.grid().cell_box(flat);
    const Point c = b.center();
    const Point h = b.widths() / 2.0;
    for (Eigen::Index i = 0; i < c.size(); ++i) os << (i > 0 ? "," : "") << format_double(c[i]);
    for (Eigen::Index i = 0; i < h.size(); ++i) os << "," << format_double(h[i]);
    os << "\n";
  }
}

Json fixed_points_to_json(const FixedPointResult& r) {
  Json j;
  Json pts = Json::array();
  for (const auto& p : r.points) pts.push_back(point_to_json(p));
  j["points"] = pts;
  j["continuum"] = r.continuum;
  return j;
}

Json estimate_to_json(const LimitSetEstimate& est, const Classification& cls) {
  Json j;
  Json reps = Json::array();
  for (const auto& p : est.representatives) reps.push_back(point_to_json(p));
  j["representatives"] = reps;
  j["period"] = est.period ? Json(*est.period) : Json(nullptr);
  j["tail_radius"] = est.tail_radius;
  j["classification"] = to_string(cls.kind);
  if (cls.kind == Classification::Kind::PeriodicOrbit) j["orbit_period"] = cls.period;
  if (!cls.diagnostic.empty()) j["diagnostic"] = cls.diagnostic;
  return j;
}

Json omega_set_to_json(const OmegaSetResult& r) {
  Json j;
  j["mode"] = to_string(r.mode);
  j["status"] = to_string(r.status);
  j["iterations"] = r.iterations;
  j["cellset"] = cellset_to_json(r.cells);
  return j;
}

Json invariant_part_to_json(const InvariantPartResult& r) {
  Json j;
  j["status"] = to_string(r.status);
  j["iterations"] = r.iterations;
  j["cellset"] = cellset_to_json(r.cells);
  return j;
}

Json report_to_json(const LasalleReport& r) {
  Json j;
  j["mode"] = to_string(r.mode);
  if (r.g_box) j["G"] = box_to_json(*r.g_box);
  if (r.gc_box) j["G_c"] = box_to_json(*r.gc_box);
  if (r.extension_n) j["N"] = *r.extension_n;

  Json audit;
  audit["samples"] = r.audit.samples;
  audit["holds"] = r.audit.holds();
  audit["violation_count"] = r.audit.violations.size();
  audit["max_delta_V"] = r.audit.max_delta;
  audit["worst_point"] = point_to_json(r.audit.worst);
  Json viol = Json::array();
  for (std::size_t i = 0; i < r.audit.violations.size() && i < kMaxViolationsInJson; ++i) {
    Json v;
    v["point"] = point_to_json(r.audit.violations[i].point);
    v["delta_V"] = r.audit.violations[i].delta;
    viol.push_back(v);
  }
  audit["violations"] = viol;
  audit["violations_truncated"] = r.audit.violations.size() > kMaxViolationsInJson;
  j["audit"] = audit;

  j["zero_tol"] = r.zero_tol;
  j["level_tol"] = r.level_tol;
  if (r.grid) j["grid"] = grid_to_json(*r.grid);
  auto cells = [](const std::optional<CellSet>& s) {
    Json a = Json::array();
    if (s) {
      for (auto flat : s->indices()) a.push_back(s->grid().unflatten(flat));
    }
    return a;
  };
  j["E_cells"] = cells(r.e_cells);
  j["M_cells"] = cells(r.m_cells);
  j["M_status"] = to_string(r.m_status);

  Json verdicts = Json::array();
  for (const auto& v : r.verdicts) {
    Json jv;
    jv["x0"] = point_to_json(v.x0);
    jv["verdict"] = to_string(v.verdict);
    jv["step"] = v.step ? Json(*v.step) : Json(nullptr);
    jv["c"] = v.c ? Json(*v.c) : Json(nullptr);
    if (v.c) {
      jv["c_tail_min"] = v.c_tail_min;
      jv["c_tail_stddev"] = v.c_tail_stddev;
    }
    jv["target_cells"] = cells(v.target);
    if (!v.note.empty()) jv["note"] = v.note;
    verdicts.push_back(jv);
  }
  j["verdicts"] = verdicts;
  j["assumptions"] = r.assumptions;
  return j;
}

std::string report_summary(const LasalleReport& r) {
  std::ostringstream os;
  os << "mode: " << to_string(r.mode) << "\n";
  os << "descent audit: " << (r.audit.holds() ? "passed" : "FAILED") << " (" << r.audit.samples
     << " samples, " << r.audit.violations.size() << " violations, max dV = "
     << format_double(r.audit.max_delta) << ")\n";
  if (r.e_cells) os << "E cells: " << r.e_cells->size() << "\n";
  if (r.m_cells) os << "M cells: " << r.m_cells->size() << " (" << to_string(r.m_status) << ")\n";
  for (const auto& v : r.verdicts) {
    os << "x0 = (";
    for (Eigen::Index i = 0; i < v.x0.size(); ++i) os << (i ? ", " : "") << format_double(v.x0[i]);
    os << "): " << to_string(v.verdict);
    if (v.c) os << ", c = " << format_double(*v.c);
    if (v.target) os << ", target cells = " << v.target->size();
    if (v.step) os << ", step = " << *v.step;
    if (!v.note.empty()) os << " [" << v.note << "]";
    os << "\n";
  }
  return os.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move output into '" + path + "': " + ec.message());
  }
}

}  // namespace dtsys
