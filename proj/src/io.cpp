#include "pilotwave/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <numbers>
#include <set>
#include <sstream>

namespace pilotwave {

using json = nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Drops a '#' comment that is not inside double quotes.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    if (line[k] == '"') quoted = !quoted;
    if (line[k] == '#' && !quoted) return line.substr(0, k);
  }
  return line;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return lines;
}

int column_of(std::string_view line, std::string_view part) {
  return static_cast<int>(part.data() - line.data()) + 1;
}

// Message of a ParseError without its "parse error at l:c: " prefix.
std::string bare_message(const ParseError& e) {
  const std::string what = e.what();
  const auto pos = what.find(": ");
  return pos == std::string::npos ? what : what.substr(pos + 2);
}

double parse_number(std::string_view text, int line, int column) {
  const std::string s(trim(text));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size()) throw ParseError("expected a number, got '" + s + "'", line, column);
  return v;
}

// Splits on whitespace outside brackets and quotes.
std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t k = 0;
  while (k < s.size()) {
    while (k < s.size() && std::isspace(static_cast<unsigned char>(s[k]))) ++k;
    if (k >= s.size()) break;
    const std::size_t start = k;
    int depth = 0;
    bool quoted = false;
    while (k < s.size() && (quoted || depth > 0 || !std::isspace(static_cast<unsigned char>(s[k])))) {
      if (s[k] == '"') quoted = !quoted;
      if (!quoted && s[k] == '[') ++depth;
      if (!quoted && s[k] == ']') --depth;
      ++k;
    }
    out.push_back(s.substr(start, k - start));
  }
  return out;
}

std::vector<double> parse_list(std::string_view text, int line, int column) {
  text = trim(text);
  std::vector<double> out;
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') throw ParseError("unterminated list", line, column);
    std::string_view body = text.substr(1, text.size() - 2);
    std::size_t start = 0;
    while (start <= body.size()) {
      const std::size_t end = body.find(',', start);
      const auto item = body.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
      out.push_back(parse_number(item, line, column));
      if (end == std::string_view::npos) break;
      start = end + 1;
    }
  } else {
    out.push_back(parse_number(text, line, column));
  }
  return out;
}

json grid_to_json(const Grid& grid) {
  json axes = json::array();
  for (const Axis& a : grid.axes()) axes.push_back({{"points", a.points}, {"lower", a.lower}, {"length", a.length}});
  return {{"axes", axes}};
}

Grid grid_from_json(const json& j) {
  std::vector<Axis> axes;
  for (const auto& a : j.at("axes")) {
    axes.push_back(Axis{a.at("points").get<std::size_t>(), a.at("lower").get<double>(), a.at("length").get<double>()});
  }
  return Grid(axes);
}

std::vector<double> broadcast(const StateComponent& c, const std::string& key, std::size_t dim, double fallback) {
  const auto it = c.parameters.find(key);
  if (it == c.parameters.end()) return std::vector<double>(dim, fallback);
  if (it->second.size() == 1) return std::vector<double>(dim, it->second.front());
  if (it->second.size() != dim) {
    throw DimensionError("parameter '" + key + "' of preset '" + c.preset + "' has " +
                         std::to_string(it->second.size()) + " entries for a " + std::to_string(dim) + "-D grid");
  }
  return it->second;
}

const std::map<std::string, std::set<std::string>>& presets() {
  static const std::map<std::string, std::set<std::string>> table = {
      {"gaussian", {"center", "width", "wavevector"}},
      {"plane-wave", {"k"}},
      {"ho-eigenstate", {"n", "center", "omega"}},
  };
  return table;
}

Complex component_value(const StateComponent& c, std::span<const double> q, const std::vector<double>& a,
                        const std::vector<double>& b, const std::vector<double>& d) {
  Complex v = c.amplitude;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (c.preset == "gaussian") {
      // a = center, b = width, d = wavevector
      const double x = q[k] - a[k];
      v *= std::pow(2 * std::numbers::pi * b[k] * b[k], -0.25) * std::exp(-x * x / (4 * b[k] * b[k])) *
           std::polar(1.0, d[k] * x);
    } else if (c.preset == "plane-wave") {
      v *= std::polar(1.0, a[k] * q[k]);
    } else {
      // a = n, b = center, d = omega
      const unsigned n = static_cast<unsigned>(a[k]);
      const double s = std::sqrt(d[k]);
      const double x = s * (q[k] - b[k]);
      const double norm = std::pow(d[k] / std::numbers::pi, 0.25) / std::sqrt(std::ldexp(std::tgamma(n + 1.0), n));
      v *= norm * std::hermite(n, x) * std::exp(-x * x / 2);
    }
  }
  return v;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

struct Box {
  double x0, x1, y0, y1;
};

// Minimal SVG frame: axes rectangle and min/max tick labels.
std::string svg_open(const Box& b, const std::string& xlabel, const std::string& ylabel, const std::string& title) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\">\n"
     << "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n"
     << "<rect x=\"60\" y=\"30\" width=\"560\" height=\"340\" fill=\"none\" stroke=\"black\"/>\n"
     << "<text x=\"340\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n"
     << "<text x=\"340\" y=\"405\" text-anchor=\"middle\" font-size=\"12\">" << xlabel << "</text>\n"
     << "<text x=\"15\" y=\"200\" font-size=\"12\" transform=\"rotate(-90 15 200)\">" << ylabel << "</text>\n"
     << "<text x=\"60\" y=\"385\" font-size=\"10\">" << std::setprecision(4) << b.x0 << "</text>\n"
     << "<text x=\"620\" y=\"385\" text-anchor=\"end\" font-size=\"10\">" << b.x1 << "</text>\n"
     << "<text x=\"55\" y=\"370\" text-anchor=\"end\" font-size=\"10\">" << b.y0 << "</text>\n"
     << "<text x=\"55\" y=\"38\" text-anchor=\"end\" font-size=\"10\">" << b.y1 << "</text>\n";
  return os.str();
}

std::string polyline(const Box& b, const std::vector<std::pair<double, double>>& pts, const std::string& colour) {
  std::ostringstream os;
  os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1\" points=\"";
  os << std::fixed << std::setprecision(2);
  const double sx = b.x1 > b.x0 ? 560.0 / (b.x1 - b.x0) : 0.0;
  const double sy = b.y1 > b.y0 ? 340.0 / (b.y1 - b.y0) : 0.0;
  for (const auto& [x, y] : pts) os << 60.0 + (x - b.x0) * sx << ',' << 370.0 - (y - b.y0) * sy << ' ';
  os << "\"/>\n";
  return os.str();
}

std::string colour(std::size_t k, std::size_t n) {
  const int shade = n > 1 ? static_cast<int>(200.0 * static_cast<double>(k) / static_cast<double>(n - 1)) : 0;
  std::ostringstream os;
  os << "rgb(" << shade << ",0," << 200 - shade << ")";
  return os.str();
}

}  // namespace

DifferentialOperator parse_hamiltonian(std::string_view text) {
  const auto lines = split_lines(text);
  std::optional<std::size_t> dim;
  std::map<MultiIndex, Expr> terms;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const int lineno = static_cast<int>(k + 1);
    const std::string_view raw = lines[k];
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected '='", lineno, column_of(raw, line));
    const std::string_view lhs = trim(line.substr(0, eq));
    const std::string_view rhs = trim(line.substr(eq + 1));
    if (!dim) {
      if (lhs != "dim") throw ParseError("the first line must be 'dim = N'", lineno, column_of(raw, lhs));
      const double n = parse_number(rhs, lineno, column_of(raw, rhs));
      if (n < 1 || n > 3 || n != std::floor(n)) {
        throw ParseError("dimension must be 1, 2 or 3", lineno, column_of(raw, rhs));
      }
      dim = static_cast<std::size_t>(n);
      continue;
    }
    if (lhs.substr(0, 4) != "term") throw ParseError("expected 'term [..] = \"...\"'", lineno, column_of(raw, lhs));
    const std::string_view index_text = trim(lhs.substr(4));
    MultiIndex n;
    try {
      n = MultiIndex::parse(index_text);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), lineno, column_of(raw, index_text));
    }
    if (n.dimension() != *dim) {
      throw ParseError("multi-index " + n.to_string() + " does not have " + std::to_string(*dim) + " entries", lineno,
                       column_of(raw, index_text));
    }
    if (terms.count(n)) throw ParseError("duplicate term " + n.to_string(), lineno, column_of(raw, lhs));
    if (rhs.size() < 2 || rhs.front() != '"' || rhs.back() != '"') {
      throw ParseError("expression must be double-quoted", lineno, column_of(raw, rhs));
    }
    const std::string_view body = rhs.substr(1, rhs.size() - 2);
    try {
      terms.emplace(n, parse_expression(body, *dim));
    } catch (const ParseError& e) {
      throw ParseError(bare_message(e), lineno, column_of(raw, body) + e.column() - 1);
    }
  }
  if (!dim) throw ParseError("missing 'dim = N' line", 1, 1);
  DifferentialOperator h(*dim);
  for (const auto& [n, c] : terms) h.add_term(n, c);
  return h;
}

DifferentialOperator load_hamiltonian(const std::filesystem::path& path) { return parse_hamiltonian(read_file(path)); }

std::string format_hamiltonian(const DifferentialOperator& h) {
  std::ostringstream os;
  os << "dim = " << h.dimension() << "\n";
  for (const auto& [n, c] : h.terms()) os << "term " << n.to_string() << " = \"" << c.to_string() << "\"\n";
  return os.str();
}

void RunConfig::merge(const RunConfig& over) {
  if (over.points) points = over.points;
  if (over.domain) domain = over.domain;
  if (over.dt) dt = over.dt;
  if (over.steps) steps = over.steps;
  if (over.stride) stride = over.stride;
  if (over.seed) seed = over.seed;
  if (over.trajectories) trajectories = over.trajectories;
  if (over.time) time = over.time;
}

std::vector<std::size_t> parse_points(std::string_view text) {
  std::vector<std::size_t> out;
  for (double v : parse_list("[" + std::string(text) + "]", 1, 1)) {
    if (v < 1 || v != std::floor(v)) throw ParseError("grid point counts must be positive integers", 1, 1);
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::vector<std::pair<double, double>> parse_domain(std::string_view text) {
  std::vector<std::pair<double, double>> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find(',', start);
    const auto item = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) throw ParseError("domain must be lo:hi", 1, static_cast<int>(start) + 1);
    const double lo = parse_number(item.substr(0, colon), 1, static_cast<int>(start) + 1);
    const double hi = parse_number(item.substr(colon + 1), 1, static_cast<int>(start + colon) + 2);
    if (!(hi > lo)) throw ParseError("domain upper bound must exceed the lower bound", 1, static_cast<int>(start) + 1);
    out.emplace_back(lo, hi);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

StateSpec parse_state_spec(std::string_view text) {
  StateSpec spec;
  const auto lines = split_lines(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const int lineno = static_cast<int>(k + 1);
    const std::string_view raw = lines[k];
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto parts = tokens(line);
    if (parts.front() == "state") {
      if (parts.size() < 2) throw ParseError("missing preset name", lineno, column_of(raw, parts.front()));
      StateComponent c;
      c.preset = std::string(parts[1]);
      const auto preset = presets().find(c.preset);
      if (preset == presets().end()) throw ParseError("unknown preset '" + c.preset + "'", lineno, column_of(raw, parts[1]));
      for (std::size_t p = 2; p < parts.size(); ++p) {
        const auto eq = parts[p].find('=');
        if (eq == std::string_view::npos) throw ParseError("expected key=value", lineno, column_of(raw, parts[p]));
        const std::string key(parts[p].substr(0, eq));
        std::string_view value = parts[p].substr(eq + 1);
        const int col = column_of(raw, value);
        if (key == "amplitude") {
          if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
          try {
            c.amplitude = parse_expression(value, 1).evaluate(std::vector<double>{0.0}, 0.0);
          } catch (const ParseError& e) {
            throw ParseError(bare_message(e), lineno, col + e.column() - 1);
          }
          continue;
        }
        if (!preset->second.count(key)) {
          throw ParseError("preset '" + c.preset + "' has no parameter '" + key + "'", lineno, column_of(raw, parts[p]));
        }
        c.parameters[key] = parse_list(value, lineno, col);
      }
      spec.components.push_back(std::move(c));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", lineno, column_of(raw, line));
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const int col = column_of(raw, value);
    auto integer = [&] {
      const double v = parse_number(value, lineno, col);
      if (v < 0 || v != std::floor(v)) throw ParseError("expected a non-negative integer", lineno, col);
      return v;
    };
    // grid/domain parsers report columns relative to the value.
    auto relocate = [&](auto parse) {
      try {
        return parse(value);
      } catch (const ParseError& e) {
        throw ParseError(bare_message(e), lineno, col + e.column() - 1);
      }
    };
    if (key == "grid") {
      spec.config.points = relocate(parse_points);
    } else if (key == "domain") {
      spec.config.domain = relocate(parse_domain);
    } else if (key == "dt") {
      spec.config.dt = parse_number(value, lineno, col);
    } else if (key == "steps") {
      spec.config.steps = static_cast<int>(integer());
    } else if (key == "stride") {
      spec.config.stride = static_cast<int>(integer());
    } else if (key == "seed") {
      spec.config.seed = static_cast<std::uint64_t>(integer());
    } else if (key == "trajectories") {
      spec.config.trajectories = static_cast<std::size_t>(integer());
    } else if (key == "time") {
      spec.config.time = parse_number(value, lineno, col);
    } else {
      throw ParseError("unknown setting '" + std::string(key) + "'", lineno, column_of(raw, key));
    }
  }
  if (spec.components.empty()) throw ParseError("no 'state' line", static_cast<int>(lines.size()), 1);
  return spec;
}

StateSpec load_state_spec(const std::filesystem::path& path) { return parse_state_spec(read_file(path)); }

Grid make_grid(std::size_t dimension, const std::vector<std::size_t>& points,
               const std::vector<std::pair<double, double>>& domain) {
  if (points.size() != 1 && points.size() != dimension) throw DimensionError("grid needs 1 or N point counts");
  if (domain.size() != 1 && domain.size() != dimension) throw DimensionError("domain needs 1 or N intervals");
  std::vector<Axis> axes;
  for (std::size_t k = 0; k < dimension; ++k) {
    const auto& [lo, hi] = domain[domain.size() == 1 ? 0 : k];
    axes.push_back(Axis{points[points.size() == 1 ? 0 : k], lo, hi - lo});
  }
  return Grid(axes);
}

GridState build_state(const StateSpec& spec, const Grid& grid, double t) {
  const std::size_t dim = grid.dimension();
  std::vector<Complex> values(grid.size(), Complex(0.0));
  std::vector<double> q(dim);
  for (const auto& c : spec.components) {
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> d;
    if (c.preset == "gaussian") {
      a = broadcast(c, "center", dim, 0.0);
      b = broadcast(c, "width", dim, 1.0);
      d = broadcast(c, "wavevector", dim, 0.0);
      for (double w : b) {
        if (!(w > 0.0)) throw std::invalid_argument("gaussian width must be positive");
      }
    } else if (c.preset == "plane-wave") {
      a = broadcast(c, "k", dim, 0.0);
    } else {
      a = broadcast(c, "n", dim, 0.0);
      b = broadcast(c, "center", dim, 0.0);
      d = broadcast(c, "omega", dim, 1.0);
      for (std::size_t k = 0; k < dim; ++k) {
        if (a[k] < 0 || a[k] != std::floor(a[k]) || a[k] > 60) throw std::invalid_argument("n must be an integer in [0, 60]");
        if (!(d[k] > 0.0)) throw std::invalid_argument("omega must be positive");
      }
    }
    for (std::size_t p = 0; p < grid.size(); ++p) {
      grid.coordinates(p, q);
      values[p] += component_value(c, q, a, b, d);
    }
  }
  GridState psi(grid, std::move(values), t);
  const double norm = std::sqrt(psi.norm_squared());
  if (!(norm > 0.0) || !std::isfinite(norm)) throw std::invalid_argument("state vanishes on the grid");
  for (auto& v : psi.values) v /= norm;
  return psi;
}

std::string snapshot_to_json(const GridState& psi) {
  json values = json::array();
  for (const auto& v : psi.values) values.push_back({v.real(), v.imag()});
  json out = {{"time", psi.time}, {"grid", grid_to_json(psi.grid)}, {"values", values}};
  return out.dump() + "\n";
}

GridState snapshot_from_json(std::string_view text) {
  try {
    const json in = json::parse(text);
    const Grid grid = grid_from_json(in.at("grid"));
    const auto& values = in.at("values");
    if (values.size() != grid.size()) throw ParseError("snapshot has the wrong number of values", 1, 1);
    std::vector<Complex> v;
    v.reserve(values.size());
    for (const auto& pair : values) v.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
    return GridState(grid, std::move(v), in.at("time").get<double>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed snapshot: ") + e.what(), 1, 1);
  }
}

std::string snapshot_to_csv(const GridState& psi) {
  std::ostringstream os;
  os << std::setprecision(17);
  const std::size_t dim = psi.grid.dimension();
  for (std::size_t k = 0; k < dim; ++k) os << 'q' << k + 1 << ',';
  os << "re,im\n";
  std::vector<double> q(dim);
  for (std::size_t p = 0; p < psi.grid.size(); ++p) {
    psi.grid.coordinates(p, q);
    for (double x : q) os << x << ',';
    os << psi.values[p].real() << ',' << psi.values[p].imag() << '\n';
  }
  return os.str();
}

std::string field_to_json(const VectorField& j) {
  json out = {{"grid", grid_to_json(j.grid)}, {"components", j.components}};
  return out.dump() + "\n";
}

VectorField field_from_json(std::string_view text) {
  try {
    const json in = json::parse(text);
    VectorField j(grid_from_json(in.at("grid")));
    const auto components = in.at("components").get<std::vector<std::vector<double>>>();
    if (components.size() != j.grid.dimension()) throw ParseError("field has the wrong number of components", 1, 1);
    for (const auto& c : components) {
      if (c.size() != j.grid.size()) throw ParseError("field component has the wrong length", 1, 1);
    }
    j.components = components;
    return j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed field: ") + e.what(), 1, 1);
  }
}

std::string trajectories_to_csv(const Ensemble& ensemble) {
  std::ostringstream os;
  os << std::setprecision(17) << "t,particle_id";
  for (std::size_t k = 0; k < ensemble.dimension; ++k) os << ",q" << k + 1;
  os << ",truncated\n";
  for (std::size_t f = 0; f < ensemble.frames.size(); ++f) {
    const double t = ensemble.times[f];
    for (std::size_t p = 0; p < ensemble.count(); ++p) {
      os << t << ',' << p;
      for (double x : ensemble.position(f, p)) os << ',' << x;
      os << ',' << (ensemble.truncated(p, t) ? 1 : 0) << '\n';
    }
  }
  return os.str();
}

std::string density_svg(const std::vector<GridState>& snapshots) {
  if (snapshots.empty()) throw std::invalid_argument("no snapshots to plot");
  const Grid& grid = snapshots.front().grid;
  const Axis& axis = grid.axis(0);
  std::vector<std::vector<std::pair<double, double>>> curves;
  double top = 0.0;
  for (const auto& s : snapshots) {
    const auto rho = s.density();
    std::vector<double> marginal(axis.points, 0.0);
    for (std::size_t p = 0; p < grid.size(); ++p) marginal[grid.axis_index(p, 0)] += rho[p];
    const double scale = grid.cell_volume() / axis.spacing();
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < axis.points; ++k) {
      pts.emplace_back(axis.coordinate(k), marginal[k] * scale);
      top = std::max(top, marginal[k] * scale);
    }
    curves.push_back(std::move(pts));
  }
  const Box box{axis.lower, axis.lower + axis.length, 0.0, top > 0.0 ? top : 1.0};
  std::string out = svg_open(box, "q1", grid.dimension() == 1 ? "|psi|^2" : "marginal |psi|^2",
                             "density, t = " + fmt(snapshots.front().time) + " to " + fmt(snapshots.back().time));
  for (std::size_t k = 0; k < curves.size(); ++k) out += polyline(box, curves[k], colour(k, curves.size()));
  return out + "</svg>\n";
}

std::string trajectory_svg(const Ensemble& ensemble, const Grid& grid) {
  if (ensemble.frames.empty()) throw std::invalid_argument("no trajectories to plot");
  const std::size_t shown = std::min<std::size_t>(ensemble.count(), 200);
  const std::size_t step = shown > 0 ? std::max<std::size_t>(1, ensemble.count() / shown) : 1;
  std::string out;
  if (ensemble.dimension == 1) {
    double lo = grid.axis(0).lower + grid.axis(0).length;
    double hi = grid.axis(0).lower;
    for (const auto& frame : ensemble.frames) {
      for (double x : frame) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
    if (!(hi > lo)) hi = lo + 1.0;
    const double t1 = ensemble.times.back() > ensemble.times.front() ? ensemble.times.back() : ensemble.times.front() + 1.0;
    const Box box{ensemble.times.front(), t1, lo, hi};
    out = svg_open(box, "t", "q1", "trajectories");
    for (std::size_t p = 0; p < ensemble.count(); p += step) {
      std::vector<std::pair<double, double>> pts;
      for (std::size_t f = 0; f < ensemble.frames.size(); ++f) pts.emplace_back(ensemble.times[f], ensemble.position(f, p)[0]);
      out += polyline(box, pts, ensemble.truncated(p, ensemble.times.back()) ? "red" : "black");
    }
  } else {
    const Axis& a = grid.axis(0);
    const Axis& b = grid.axis(1);
    const Box box{a.lower, a.lower + a.length, b.lower, b.lower + b.length};
    out = svg_open(box, "q1", "q2", "trajectories");
    for (std::size_t p = 0; p < ensemble.count(); p += step) {
      std::vector<std::pair<double, double>> pts;
      for (std::size_t f = 0; f < ensemble.frames.size(); ++f) {
        const auto q = ensemble.position(f, p);
        pts.emplace_back(q[0], q[1]);
      }
      out += polyline(box, pts, ensemble.truncated(p, ensemble.times.back()) ? "red" : "black");
    }
  }
  return out + "</svg>\n";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out) throw std::runtime_error("error writing " + path.string());
}

}  // namespace pilotwave
