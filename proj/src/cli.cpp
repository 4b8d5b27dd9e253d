#include "gkp/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include "gkp/circuit.hpp"
#include "gkp/parallel.hpp"
#include "gkp/spectra.hpp"
#include "gkp/states.hpp"
#include "gkp/transform.hpp"

namespace gkp::cli {

namespace {

using json = nlohmann::ordered_json;
using cd = std::complex<double>;
using std::numbers::pi;

const double sqrt_pi = std::sqrt(pi);

// ---------------------------------------------------------------------------
// Parameters and resolved configuration

enum class Kind { real, integer, text, flag };

struct Param {
  std::string name;
  Kind kind;
  json fallback;
  std::string help;
};

class Config {
 public:
  explicit Config(json values) : values_(std::move(values)) {}

  double real(const std::string& key) const { return values_.at(key).get<double>(); }
  int integer(const std::string& key) const { return values_.at(key).get<int>(); }
  std::string text(const std::string& key) const { return values_.at(key).get<std::string>(); }
  bool flag(const std::string& key) const { return values_.at(key).get<bool>(); }
  const json& values() const { return values_; }

 private:
  json values_;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row) { rows.push_back(std::move(row)); }
};

struct Outcome {
  Table table;
  json diagnostics = json::object();
};

struct Command {
  std::string name;
  std::string help;
  std::string format;  // default output format
  std::vector<Param> params;
  std::function<Outcome(const Config&)> body;
};

void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

const char* kind_name(Kind kind) {
  switch (kind) {
    case Kind::real: return "a real number";
    case Kind::integer: return "an integer";
    case Kind::text: return "a string";
    case Kind::flag: return "a boolean";
  }
  return "";
}

json parse_flag_value(const Param& p, const std::string& raw) {
  const std::string where = "--" + p.name + " expects " + kind_name(p.kind) + ", got '" + raw + "'";
  if (p.kind == Kind::text) return raw;
  const char* first = raw.data();
  const char* last = raw.data() + raw.size();
  if (p.kind == Kind::integer) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    require(ec == std::errc() && ptr == last, where);
    require(v >= std::numeric_limits<int>::min() && v <= std::numeric_limits<int>::max(), where);
    return static_cast<int>(v);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  require(ec == std::errc() && ptr == last && std::isfinite(v), where);
  return v;
}

json check_file_value(const Param& p, const json& value) {
  const std::string where = "config key '" + p.name + "' expects " + kind_name(p.kind);
  switch (p.kind) {
    case Kind::real:
      require(value.is_number() && std::isfinite(value.get<double>()), where);
      return value.get<double>();
    case Kind::integer:
      require(value.is_number_integer(), where);
      return value.get<int>();
    case Kind::text:
      require(value.is_string(), where);
      return value;
    case Kind::flag:
      require(value.is_boolean(), where);
      return value;
  }
  return value;
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open config file '" + path + "'");
  try {
    json doc = json::parse(in);
    require(doc.is_object(), "config file '" + path + "' must hold a JSON object");
    return doc;
  } catch (const json::parse_error& e) {
    throw ValidationError("config file '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Output

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string to_csv(const Table& t) {
  std::string s;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) s += ',';
    s += t.columns[c];
  }
  s += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) s += ',';
      s += format_number(row[c]);
    }
    s += '\n';
  }
  return s;
}

// Rows carry the same 12 significant digits as the CSV.
std::string to_json(const Table& t, const json& config) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::array();
    for (double v : row) r.push_back(std::strtod(format_number(v).c_str(), nullptr));
    rows.push_back(std::move(r));
  }
  json doc;
  doc["config"] = config;
  doc["columns"] = t.columns;
  doc["rows"] = std::move(rows);
  return doc.dump(2) + '\n';
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
  f.close();
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// ---------------------------------------------------------------------------
// Shared helpers for the subcommands

std::vector<double> linspace(double lo, double hi, int n) {
  require(n >= 1, "point count must be positive");
  if (n == 1) return {lo};
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  return out;
}

FluxRatio parse_fraction(const std::string& s) {
  const auto slash = s.find('/');
  const std::string num = s.substr(0, slash);
  const std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  int p = 0, q = 0;
  const auto a = std::from_chars(num.data(), num.data() + num.size(), p);
  const auto b = std::from_chars(den.data(), den.data() + den.size(), q);
  require(a.ec == std::errc() && a.ptr == num.data() + num.size() && b.ec == std::errc() &&
              b.ptr == den.data() + den.size(),
          "flux must be written p/q, got '" + s + "'");
  return FluxRatio(p, q);
}

double parse_conductance(const std::string& s) {
  if (s == "two_e2_h") return si::gkp_gyration_conductance;
  if (s == "four_e2_h") return si::conductance_quantum_sc;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && ptr == s.data() + s.size() && v > 0.0,
          "--G takes two_e2_h, four_e2_h or a positive conductance in S, got '" + s + "'");
  return v;
}

json to_json(const std::map<std::string, double>& m) {
  json out = json::object();
  for (const auto& [k, v] : m) out[k] = v;
  return out;
}

Truncation truncation(const Config& c) { return {c.integer("n-max"), c.integer("m-max")}; }

CircuitParams ratio_circuit(const Config& c) {
  require(c.real("capacitance") > 0.0, "capacitance must be positive");
  return circuit_from_energy_ratios(c.real("ej-over-ec"), c.real("el-over-ec"),
                                    c.real("capacitance"));
}

std::vector<Param> circuit_params() {
  return {
      {"ej-over-ec", Kind::real, 0.26, "E_J / E_C"},
      {"el-over-ec", Kind::real, 5e-3, "E_L / E_C"},
      {"capacitance", Kind::real, 1.434e-15, "port capacitance (F)"},
      {"n-max", Kind::integer, 16, "Landau-level truncation"},
      {"m-max", Kind::integer, 40, "guiding-center truncation"},
  };
}

// Lowest eigenvector in `sector` among `sol`, -1 when absent.
int first_in_sector(const EigenSolution& sol, int sector) {
  for (std::size_t i = 0; i < sol.sectors.size(); ++i) {
    if (sol.sectors[i] == sector) return static_cast<int>(i);
  }
  return -1;
}

SampledWavefunction state_1d(const std::string& name, double delta, int fock_n, const Grid1D& grid) {
  if (name == "fock") {
    require(fock_n >= 0, "--fock-n must be non-negative");
    VectorXc c = VectorXc::Zero(fock_n + 1);
    c(fock_n) = 1.0;
    return sample_fock_state(c, grid);
  }
  GridStateParams p;
  p.delta = delta;
  p.validate();
  if (name == "psi0") return approx_grid_state(0, p, grid);
  if (name == "psi1") return approx_grid_state(1, p, grid);
  const auto [plus, minus] = hadamard_pair(approx_grid_state(0, p, grid), approx_grid_state(1, p, grid));
  if (name == "h-plus") return plus;
  if (name == "h-minus") return minus;
  throw ValidationError("unknown state '" + name + "' (psi0, psi1, h-plus, h-minus, fock)");
}

Wavefunction2D closed_form_2d(const std::string& name, double delta, double k1, double k2,
                              const Grid2D& grid) {
  if (name == "zak") return zak_wavefunction_2d(k1, k2, grid);
  if (name == "psi0") return confined_wavefunction_2d(0, delta, grid);
  if (name == "psi1") return confined_wavefunction_2d(1, delta, grid);
  const double c = std::cos(pi / 8), s = std::sin(pi / 8);
  if (name == "h-plus" || name == "h-minus") {
    const auto psi0 = confined_wavefunction_2d(0, delta, grid);
    const auto psi1 = confined_wavefunction_2d(1, delta, grid);
    return name == "h-plus" ? combine(c, psi0, s, psi1) : combine(-s, psi0, c, psi1);
  }
  throw ValidationError("unknown state '" + name + "' (zak, psi0, psi1, h-plus, h-minus)");
}

Grid2D window(const Config& c) {
  require(c.integer("points") >= 2, "--points must be at least 2");
  require(c.real("half-width") > 0.0, "--half-width must be positive");
  return Grid2D::square(c.real("half-width"), c.integer("points"));
}

Grid1D line_grid(const Config& c) {
  require(c.real("grid-half-width") > 0.0, "--grid-half-width must be positive");
  Grid1D g{-c.real("grid-half-width"), c.real("grid-half-width"), c.integer("grid-points")};
  g.validate();
  return g;
}

void fill_plane(Table& t, const Wavefunction2D& psi, bool complex_columns) {
  for (int i = 0; i < psi.x1_grid.n; ++i) {
    for (int j = 0; j < psi.x2_grid.n; ++j) {
      const cd v = psi.values(i, j);
      if (complex_columns) {
        t.add({psi.x1_grid.at(i), psi.x2_grid.at(j), v.real(), v.imag(), std::abs(v)});
      } else {
        t.add({psi.x1_grid.at(i), psi.x2_grid.at(j), std::norm(v)});
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Subcommands

Outcome butterfly_cmd(const Config& c) {
  require(c.integer("k-grid") >= 1, "--k-grid must be positive");
  const auto fluxes = farey_fluxes(c.integer("max-denominator"), c.real("max-inverse"));
  const auto sweep = butterfly(fluxes, KGrid{c.integer("k-grid"), c.integer("k-grid")}, c.real("v0"));
  Outcome o;
  o.table.columns = {"q_over_p", "energy_over_V0"};
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < sweep.grid.size(); ++i) {
    for (double e : sweep.energies[i]) {
      o.table.add({sweep.grid[i], e});
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
  }
  o.diagnostics["flux_count"] = fluxes.size();
  o.diagnostics["min_energy"] = lo;
  o.diagnostics["max_energy"] = hi;
  o.diagnostics["sweep"] = to_json(sweep.metadata);
  return o;
}

Outcome bands_cmd(const Config& c) {
  require(c.integer("k-grid") >= 1, "--k-grid must be positive");
  require(c.integer("levels") >= 1, "--levels must be positive");
  const auto fluxes = farey_fluxes(c.integer("max-denominator"), c.real("max-inverse"));
  const auto sweep = crystal_bands(c.real("v-over-hwc"), fluxes,
                                   KGrid{c.integer("k-grid"), c.integer("k-grid")},
                                   c.integer("n-max"), c.integer("levels"));
  Outcome o;
  o.table.columns = {"q_over_p", "energy_over_hwc"};
  for (std::size_t i = 0; i < sweep.grid.size(); ++i) {
    for (double e : sweep.energies[i]) o.table.add({sweep.grid[i], e});
  }
  o.diagnostics["flux_count"] = fluxes.size();
  o.diagnostics["sweep"] = to_json(sweep.metadata);
  return o;
}

Outcome confined_spectrum_cmd(const Config& c) {
  const int levels = c.integer("levels");
  require(levels >= 1, "--levels must be positive");
  const auto grid = linspace(c.real("hw0-over-v-min"), c.real("hw0-over-v-max"), c.integer("points"));
  const auto sweep = confined_sweep(c.real("v-over-hwc"), grid, parse_fraction(c.text("flux")),
                                    c.integer("n-max"), c.integer("m-max"), levels);
  Outcome o;
  o.table.columns = {"hw0_over_v", "level", "energy_over_hwc", "sector"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t l = 0; l < sweep.energies[i].size(); ++l) {
      const double sector = sweep.sectors[i].empty() ? -1.0 : sweep.sectors[i][l];
      o.table.add({grid[i], static_cast<double>(l), sweep.energies[i][l], sector});
    }
  }
  json crossings = json::array();
  for (int l = 0; l + 1 < levels; ++l) {
    for (const auto& x : find_crossings(sweep, l)) {
      crossings.push_back({{"level", x.level}, {"lower", x.lower}, {"upper", x.upper}});
    }
  }
  o.diagnostics["crossings"] = crossings;
  o.diagnostics["sweep"] = to_json(sweep.metadata);
  return o;
}

Outcome gap_fit_cmd(const Config& c) {
  const auto grid = linspace(c.real("hw0-over-v-min"), c.real("hw0-over-v-max"), c.integer("points"));
  const auto sweep = confined_sweep(c.real("v-over-hwc"), grid, parse_fraction(c.text("flux")),
                                    c.integer("n-max"), c.integer("m-max"), 2);
  const auto fit = fit_gap_law(sweep);
  Outcome o;
  o.table.columns = {"v_over_hw0", "log_gap", "fitted_log_gap"};
  for (std::size_t i = 0; i < fit.log_gap.size(); ++i) {
    const double x = fit.inverse_confinement[i];
    o.table.add({x, fit.log_gap[i], fit.log_prefactor - fit.alpha * x});
  }
  o.diagnostics["alpha"] = fit.alpha;
  o.diagnostics["log_prefactor"] = fit.log_prefactor;
  o.diagnostics["r_squared"] = fit.r_squared;
  o.diagnostics["sweep"] = to_json(sweep.metadata);
  return o;
}

Outcome lll_weight_cmd(const Config& c) {
  ModelParams m;
  m.flux = parse_fraction(c.text("flux"));
  m.v_over_hwc = c.real("v-over-hwc");
  m.hw0_over_v = c.real("hw0-over-v");
  m.validate();
  const int state = c.integer("state");
  require(state >= 0, "--state must be non-negative");
  const auto blocks = confined_blocks(m, c.integer("n-max"), c.integer("m-max"));
  const auto sol = eigensolve(blocks, state + 1);
  require(sol.values.size() > state, "--state exceeds the basis dimension");
  const double w = lll_weight(sol.vectors.col(state), sol.basis);
  Outcome o;
  o.table.columns = {"v_over_hwc", "hw0_over_v", "state", "energy_over_hwc", "lll_weight"};
  o.table.add({m.v_over_hwc, m.hw0_over_v, static_cast<double>(state), sol.values(state), w});
  o.diagnostics["sector"] = sol.sectors.empty() ? -1 : sol.sectors[state];
  o.diagnostics["max_residual"] = sol.max_residual;
  o.diagnostics["truncation_defect"] = blocks.truncation_defect;
  o.diagnostics["truncation_warning"] = blocks.truncation_warning;
  return o;
}

Outcome grid_states_cmd(const Config& c) {
  const double delta = c.real("delta");
  const Grid1D grid = line_grid(c);
  GridStateParams p;
  p.delta = delta;
  p.validate();
  const auto psi0 = approx_grid_state(0, p, grid);
  const auto psi1 = approx_grid_state(1, p, grid);
  const auto [plus, minus] = hadamard_pair(psi0, psi1);

  Outcome o;
  o.table.columns = {"x", "psi0", "psi1", "h_plus", "h_minus"};
  const int m_max = c.integer("m-max");
  VectorXc lll[2];
  if (m_max > 0) {
    const double ratio = confinement_ratio_from_delta(delta);
    const auto blocks = lll_grid_blocks(ratio, m_max);
    const auto sol = eigensolve(blocks, 6);
    const int i0 = first_in_sector(sol, 0), i2 = first_in_sector(sol, 2);
    if (i0 < 0 || i2 < 0) throw ConvergenceError("sectors 0 and 2 missing from the lowest levels");
    const SampledWavefunction* targets[2] = {&plus, &minus};
    double worst_imag = 0.0;
    for (int k = 0; k < 2; ++k) {
      auto sampled = sample_fock_state(sol.vectors.col(k == 0 ? i0 : i2), grid);
      const cd overlap = inner_product(sampled, *targets[k]);
      sampled.values *= std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cd(1.0);
      lll[k] = sampled.values;
      worst_imag = std::max(worst_imag, sampled.values.imag().cwiseAbs().maxCoeff());
    }
    o.table.columns.insert(o.table.columns.end(), {"lll_ground", "lll_excited"});
    o.diagnostics["confinement_over_v0"] = ratio;
    o.diagnostics["fidelity_ground_h_plus"] = fidelity(VectorXc(sol.vectors.col(i0)), plus);
    o.diagnostics["fidelity_excited_h_minus"] = fidelity(VectorXc(sol.vectors.col(i2)), minus);
    o.diagnostics["gap_over_v0"] = sol.values(i2) - sol.values(i0);
    o.diagnostics["max_residual"] = sol.max_residual;
    o.diagnostics["truncation_defect"] = blocks.truncation_defect;
    o.diagnostics["max_imaginary_part"] = worst_imag;
  }
  for (int i = 0; i < grid.n; ++i) {
    std::vector<double> row = {grid.at(i), psi0.values(i).real(), psi1.values(i).real(),
                               plus.values(i).real(), minus.values(i).real()};
    if (m_max > 0) {
      row.push_back(lll[0](i).real());
      row.push_back(lll[1](i).real());
    }
    o.table.add(std::move(row));
  }
  const auto peak = fit_central_peak(psi0);
  const auto envelope = fit_envelope(psi0);
  o.diagnostics["central_peak_width"] = peak.width;
  o.diagnostics["envelope_width"] = envelope.width;
  o.diagnostics["codeword_overlap"] = std::abs(inner_product(psi0, psi1));
  o.diagnostics["norm_defect"] = psi0.norm_defect;
  return o;
}

Outcome husimi_cmd(const Config& c) {
  const auto psi = state_1d(c.text("state"), c.real("delta"), c.integer("fock-n"), line_grid(c));
  const auto lifted = lift_to_2d(psi, window(c), c.flag("require-norm"));
  Outcome o;
  o.table.columns = {"x1", "x2", "q"};
  fill_plane(o.table, lifted, false);
  o.diagnostics["captured_norm"] = lifted.captured_norm;
  o.diagnostics["input_norm_defect"] = psi.norm_defect;
  return o;
}

Outcome wavefunction_2d_cmd(const Config& c) {
  const Grid2D grid = window(c);
  const std::string state = c.text("state");
  const std::string method = c.text("method");
  Wavefunction2D psi;
  if (method == "closed-form") {
    psi = closed_form_2d(state, c.real("delta"), c.real("k1"), c.real("k2"), grid);
  } else if (method == "quadrature") {
    require(state != "zak", "the Zak state has no square-integrable 1-D form; use closed-form");
    psi = lift_to_2d(state_1d(state, c.real("delta"), 0, line_grid(c)), grid);
  } else {
    throw ValidationError("--method takes closed-form or quadrature, got '" + method + "'");
  }
  Outcome o;
  o.table.columns = {"x1", "x2", "re", "im", "abs"};
  fill_plane(o.table, psi, true);
  o.diagnostics["captured_norm"] = psi.captured_norm;
  o.diagnostics["zeros"] = count_zeros(psi);
  // Best C4 eigenvalue i^n and its defect.
  int best_n = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int n = 0; n < 4; ++n) {
    const double d = rotation_fourier_check(psi, n);
    if (d < best) best = d, best_n = n;
  }
  o.diagnostics["rotation_exponent"] = best_n;
  o.diagnostics["rotation_defect"] = best;
  return o;
}

Outcome noise_sweep_cmd(const Config& c) {
  const auto circ = ratio_circuit(c);
  const auto axis = parse_flux_axis(c.text("axis"));
  const auto trunc = truncation(c);
  const double lo = c.real("phi-min"), hi = c.real("phi-max");
  const auto grid = linspace(lo, hi, c.integer("points"));
  const auto sweep = flux_sweep(circ, axis, grid, c.integer("levels"), trunc);
  const double ghz = sweep.metadata.at("hbar_omega_c_ghz");
  Outcome o;
  o.table.columns = {"phi_ext", "level", "energy_over_hwc", "energy_ghz"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t l = 0; l < sweep.energies[i].size(); ++l) {
      const double e = sweep.energies[i][l];
      o.table.add({grid[i], static_cast<double>(l), e, e * ghz});
    }
  }
  std::vector<double> spots;
  for (double s : {0.0, pi, 2.0 * pi}) {
    if (s >= std::min(lo, hi) - 1e-12 && s <= std::max(lo, hi) + 1e-12) spots.push_back(s);
  }
  if (!spots.empty() && grid.size() > 1) {
    const auto report = sweet_spot_check(circ, axis, sweep, spots, trunc);
    o.diagnostics["sweet_spots"] = report.points;
    o.diagnostics["sweet_spot_slopes"] = report.slopes;
    o.diagnostics["sweet_spot_worst"] = report.worst;
  }
  o.diagnostics["sweep"] = to_json(sweep.metadata);
  return o;
}

Outcome noise_elements_cmd(const Config& c) {
  const auto circ = ratio_circuit(c);
  const auto trunc = truncation(c);
  const auto reports = noise_matrix_elements(circ, trunc);
  Outcome o;
  o.table.columns = {"operator", "magnitude", "control", "vanishes"};
  json labels = json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    o.table.add({static_cast<double>(i), r.magnitude, r.control, r.vanishes ? 1.0 : 0.0});
    labels.push_back(r.label);
  }
  const auto [plus, minus] = hadamard_level_positions(circ, 6, trunc);
  o.diagnostics["operators"] = labels;
  o.diagnostics["psi_h_plus_level"] = plus;
  o.diagnostics["psi_h_minus_level"] = minus;
  return o;
}

Outcome gate_sim_cmd(const Config& c) {
  const double current = c.real("current");
  const double t_gate = gate_time_z(current);
  const double v0_joules = si::planck * c.real("ej-ghz") * 1e9 * std::exp(-pi);
  const int samples = c.integer("samples");
  const int repeats = c.integer("repeats");
  require(samples >= 1, "--samples must be positive");
  require(repeats >= 1, "--repeats must be positive");

  GateOptions options;
  options.m_max = c.integer("m-max");
  options.confined = c.flag("confined");
  const std::string initial = c.text("initial");
  const double h = 1.0 / std::sqrt(2.0);
  if (initial == "zero") {
    options.c0 = 1.0, options.c1 = 0.0;
  } else if (initial == "one") {
    options.c0 = 0.0, options.c1 = 1.0;
  } else if (initial == "plus") {
    options.c0 = h, options.c1 = h;
  } else if (initial == "minus") {
    options.c0 = h, options.c1 = -h;
  } else {
    throw ValidationError("--initial takes zero, one, plus or minus, got '" + initial + "'");
  }

  std::vector<GateResult> results(samples);
  std::vector<double> times(samples);
  const double total = repeats * t_gate;
  parallel_for(samples, [&](int i) {
    DriveProtocol protocol;
    protocol.port = c.integer("port");
    times[i] = total * (i + 1) / samples;
    protocol.segments.push_back({current, times[i]});
    results[i] = simulate_z_gate(v0_joules, c.real("delta"), protocol, options);
  });

  Outcome o;
  o.table.columns = {"time_s", "gate_periods", "fidelity", "return_fidelity",
                     "code_space_weight", "logical_fidelity", "norm_defect", "edge_weight"};
  double worst_norm = 0.0, worst_edge = 0.0;
  bool warning = false;
  for (int i = 0; i < samples; ++i) {
    const auto& r = results[i];
    o.table.add({times[i], r.gate_periods, r.fidelity, r.return_fidelity, r.code_space_weight,
                 r.logical_fidelity, r.max_norm_defect, r.edge_weight});
    worst_norm = std::max(worst_norm, r.max_norm_defect);
    worst_edge = std::max(worst_edge, r.edge_weight);
    warning = warning || r.truncation_warning;
  }
  o.diagnostics["gate_time_s"] = t_gate;
  o.diagnostics["v0_joules"] = v0_joules;
  o.diagnostics["drive_over_v0"] = current * si::flux_quantum_sc / (sqrt_pi * v0_joules);
  o.diagnostics["max_norm_defect"] = worst_norm;
  o.diagnostics["max_edge_weight"] = worst_edge;
  o.diagnostics["truncation_warning"] = warning;
  return o;
}

Outcome circuit_map_cmd(const Config& c) {
  CircuitParams circ;
  circ.capacitance = c.real("C");
  if (c.real("L") > 0.0) circ.inductance = c.real("L");
  circ.josephson_energy = si::planck * c.real("EJ-GHz") * 1e9;
  circ.gyration_conductance = parse_conductance(c.text("G"));
  const auto mapping = map_circuit_to_model(circ);
  const auto& d = mapping.derived;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double to_ghz = 1e-9 / (2.0 * pi);
  Outcome o;
  o.table.columns = {"omega_c_ghz", "omega_lc_ghz", "ec_ghz", "el_ghz", "ej_ghz", "flux_p",
                     "flux_q", "v0_over_v", "v_over_hwc", "hw0_over_v", "delta"};
  o.table.add({d.omega_c * to_ghz, d.omega_lc ? *d.omega_lc * to_ghz : nan,
               d.e_c / si::planck * 1e-9, d.e_l ? *d.e_l / si::planck * 1e-9 : nan,
               circ.josephson_energy / si::planck * 1e-9, static_cast<double>(d.flux.p()),
               static_cast<double>(d.flux.q()), d.v0_over_v, mapping.model.v_over_hwc,
               mapping.model.hw0_over_v, d.delta ? *d.delta : nan});
  o.diagnostics["gyration_conductance_s"] = circ.gyration_conductance;
  return o;
}

// ---------------------------------------------------------------------------
// Registry

std::vector<Param> with(std::vector<Param> a, const std::vector<Param>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

const std::vector<Command>& registry() {
  const Param flux{"flux", Kind::text, "1/2", "flux per unit cell p/q"};
  const std::vector<Param> line = {
      {"grid-half-width", Kind::real, 24.0, "half-width of the 1-D grid (l_B)"},
      {"grid-points", Kind::integer, 4096, "1-D grid points"},
  };
  const std::vector<Param> plane = {
      {"half-width", Kind::real, 4.0 * sqrt_pi, "half-width of the square 2-D window (l_B)"},
      {"points", Kind::integer, 256, "2-D points per axis"},
  };
  static const std::vector<Command> commands = {
      {"butterfly", "Harper spectrum against q/p in units of V0", "csv",
       {{"max-denominator", Kind::integer, 12, "largest p and q"},
        {"max-inverse", Kind::real, 4.0, "largest q/p"},
        {"k-grid", Kind::integer, 32, "k-points per Brillouin-zone axis"},
        {"v0", Kind::real, 1.0, "energy unit of the Harper model"}},
       butterfly_cmd},
      {"bands", "crystal bands with Landau-level mixing against q/p", "csv",
       {{"v-over-hwc", Kind::real, 0.25, "V / hbar omega_c"},
        {"max-denominator", Kind::integer, 6, "largest p and q"},
        {"max-inverse", Kind::real, 4.0, "largest q/p"},
        {"k-grid", Kind::integer, 8, "k-points per Brillouin-zone axis"},
        {"n-max", Kind::integer, 16, "Landau-level truncation"},
        {"levels", Kind::integer, 12, "bands kept per k-point"}},
       bands_cmd},
      {"confined-spectrum", "lowest levels of the confined model against hbar omega_0 / V", "csv",
       {{"v-over-hwc", Kind::real, 0.25, "V / hbar omega_c"},
        {"hw0-over-v-min", Kind::real, 0.05, "sweep start"},
        {"hw0-over-v-max", Kind::real, 1.0, "sweep end"},
        {"points", Kind::integer, 40, "sweep points"},
        flux,
        {"n-max", Kind::integer, 10, "Landau-level truncation"},
        {"m-max", Kind::integer, 120, "guiding-center truncation"},
        {"levels", Kind::integer, 10, "levels kept"}},
       confined_spectrum_cmd},
      {"gap-fit", "exponential fit of the ground-state splitting", "csv",
       {{"v-over-hwc", Kind::real, 0.25, "V / hbar omega_c"},
        {"hw0-over-v-min", Kind::real, 0.08, "sweep start"},
        {"hw0-over-v-max", Kind::real, 0.2, "sweep end"},
        {"points", Kind::integer, 7, "sweep points"},
        flux,
        {"n-max", Kind::integer, 12, "Landau-level truncation"},
        {"m-max", Kind::integer, 200, "guiding-center truncation"}},
       gap_fit_cmd},
      {"lll-weight", "lowest-Landau-level weight of a confined eigenstate", "csv",
       {{"v-over-hwc", Kind::real, 0.4, "V / hbar omega_c"},
        {"hw0-over-v", Kind::real, 0.8, "hbar omega_0 / V"},
        flux,
        {"state", Kind::integer, 0, "eigenstate index"},
        {"n-max", Kind::integer, 12, "Landau-level truncation"},
        {"m-max", Kind::integer, 160, "guiding-center truncation"}},
       lll_weight_cmd},
      {"grid-states", "approximate codewords, Hadamard pair and numerical LLL states", "csv",
       with({{"delta", Kind::real, 0.25, "squeezing parameter"},
             {"m-max", Kind::integer, 160, "truncation of the numerical states, 0 to skip"}},
            line),
       grid_states_cmd},
      {"husimi", "Husimi Q function of a 1-D state", "csv",
       with(with({{"state", Kind::text, "h-plus", "psi0, psi1, h-plus, h-minus or fock"},
                  {"delta", Kind::real, 0.25, "squeezing parameter"},
                  {"fock-n", Kind::integer, 0, "Fock index for state fock"},
                  {"require-norm", Kind::flag, false, "fail when the window loses > 1% of the norm"}},
                 line),
            plane),
       husimi_cmd},
      {"wavefunction-2d", "plane wavefunction of a codeword or Zak state", "csv",
       with(with({{"state", Kind::text, "h-plus", "zak, psi0, psi1, h-plus or h-minus"},
                  {"method", Kind::text, "closed-form", "closed-form or quadrature"},
                  {"delta", Kind::real, 0.25, "squeezing parameter"},
                  {"k1", Kind::real, 0.0, "Zak momentum k1"},
                  {"k2", Kind::real, 0.0, "Zak momentum k2"}},
                 line),
            plane),
       wavefunction_2d_cmd},
      {"noise-sweep", "circuit levels against one external flux", "csv",
       with({{"axis", Kind::text, "phi1", "phi1, phi2, phi_g1 or phi_g2"},
             {"phi-min", Kind::real, 0.0, "sweep start (rad)"},
             {"phi-max", Kind::real, 2.0 * pi, "sweep end (rad)"},
             {"points", Kind::integer, 33, "sweep points"},
             {"levels", Kind::integer, 4, "levels kept"}},
            circuit_params()),
       noise_sweep_cmd},
      {"noise-elements", "noise-operator matrix elements between the Hadamard eigenstates", "csv",
       circuit_params(), noise_elements_cmd},
      {"gate-sim", "current-driven logical gate on the approximate codewords", "csv",
       {{"current", Kind::real, 1e-9, "drive current (A)"},
        {"delta", Kind::real, 0.25, "squeezing parameter"},
        {"ej-ghz", Kind::real, 3.5, "E_J / h (GHz); V0 = E_J exp(-pi)"},
        {"port", Kind::integer, 1, "driven port, 1 or 2"},
        {"repeats", Kind::integer, 1, "gate times simulated"},
        {"samples", Kind::integer, 20, "output times"},
        {"m-max", Kind::integer, 200, "Fock truncation"},
        {"confined", Kind::flag, false, "keep the confinement term during the drive"},
        {"initial", Kind::text, "plus", "zero, one, plus or minus"}},
       gate_sim_cmd},
      {"circuit-map", "derived circuit quantities and model parameters", "json",
       {{"C", Kind::real, 1.434e-15, "capacitance (F)"},
        {"L", Kind::real, 2.3e-6, "inductance (H), 0 for none"},
        {"EJ-GHz", Kind::real, 3.5, "E_J / h (GHz)"},
        {"G", Kind::text, "two_e2_h", "gyration conductance: two_e2_h, four_e2_h or S"}},
       circuit_map_cmd},
  };
  return commands;
}

const std::vector<Param>& output_params() {
  static const std::vector<Param> params = {
      {"out", Kind::text, "-", "data file, - for standard output"},
      {"format", Kind::text, "", "csv or json (default from --out or the subcommand)"},
      {"manifest", Kind::text, "", "manifest path (default <out>.manifest.json)"},
  };
  return params;
}

struct Resolved {
  json config = json::object();
  json sources = json::object();
};

Resolved resolve(const Command& cmd, const std::map<std::string, std::string>& flags,
                 const std::map<std::string, bool>& switches, const std::string& config_path) {
  std::vector<Param> all = cmd.params;
  all.insert(all.end(), output_params().begin(), output_params().end());
  Resolved r;
  for (const auto& p : all) {
    r.config[p.name] = p.fallback;
    r.sources[p.name] = "default";
  }
  if (!config_path.empty()) {
    const json file = read_config_file(config_path);
    for (const auto& [key, value] : file.items()) {
      const auto it = std::find_if(all.begin(), all.end(), [&](const Param& p) { return p.name == key; });
      require(it != all.end(), "unknown config key '" + key + "' for " + cmd.name);
      r.config[key] = check_file_value(*it, value);
      r.sources[key] = "file";
    }
  }
  for (const auto& p : all) {
    if (p.kind == Kind::flag) {
      if (const auto it = switches.find(p.name); it != switches.end()) {
        r.config[p.name] = it->second;
        r.sources[p.name] = "flag";
      }
    } else if (const auto it = flags.find(p.name); it != flags.end()) {
      r.config[p.name] = parse_flag_value(p, it->second);
      r.sources[p.name] = "flag";
    }
  }
  std::string format = r.config["format"].get<std::string>();
  const std::string out = r.config["out"].get<std::string>();
  if (format.empty()) {
    format = ends_with(out, ".json") ? "json" : ends_with(out, ".csv") ? "csv" : cmd.format;
  }
  require(format == "csv" || format == "json", "--format takes csv or json, got '" + format + "'");
  r.config["format"] = format;
  return r;
}

int execute(const Command& cmd, const Resolved& resolved, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const Config config(resolved.config);
  const Outcome outcome = cmd.body(config);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::string format = config.text("format");
  const std::string data =
      format == "csv" ? to_csv(outcome.table) : to_json(outcome.table, resolved.config);
  const std::string path = config.text("out");
  std::string manifest_path = config.text("manifest");
  if (manifest_path.empty() && path != "-") manifest_path = path + ".manifest.json";

  if (path == "-") {
    out << data;
  } else {
    write_file(path, data);
  }
  if (!manifest_path.empty()) {
    json manifest;
    manifest["subcommand"] = cmd.name;
    manifest["config"] = resolved.config;
    manifest["sources"] = resolved.sources;
    manifest["columns"] = outcome.table.columns;
    manifest["row_count"] = outcome.table.rows.size();
    manifest["diagnostics"] = outcome.diagnostics;
    manifest["threads"] = thread_count();
    manifest["wall_time_s"] = wall;
    write_file(manifest_path, manifest.dump(2) + '\n');
  }
  return ok;
}

}  // namespace

std::vector<std::string> subcommands() {
  std::vector<std::string> names;
  for (const auto& c : registry()) names.push_back(c.name);
  return names;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"GKP grid states of an electron in a crystal and of the gyrator circuit"};
  app.name("gkp");
  app.require_subcommand(1, 1);

  const auto& commands = registry();
  // Raw flag text per subcommand, typed once the subcommand is known.
  std::vector<std::map<std::string, std::string>> raw(commands.size());
  std::vector<std::map<std::string, bool>> switches(commands.size());
  std::vector<std::string> config_paths(commands.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const auto& cmd = commands[i];
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    std::vector<Param> all = cmd.params;
    all.insert(all.end(), output_params().begin(), output_params().end());
    for (const auto& p : all) {
      std::string help = p.help;
      if (!(p.fallback.is_string() && p.fallback.get<std::string>().empty())) {
        help += " [" + p.fallback.dump() + "]";
      }
      if (p.kind == Kind::flag) {
        sub->add_flag_callback("--" + p.name, [&sw = switches[i], name = p.name] { sw[name] = true; },
                               help);
      } else {
        sub->add_option_function<std::string>(
            "--" + p.name, [&r = raw[i], name = p.name](const std::string& v) { r[name] = v; }, help);
      }
    }
    sub->add_option("--config", config_paths[i], "JSON config file; flags take precedence");
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    for (auto* sub : subs) {
      if (sub->parsed()) {
        out << sub->help();
        return ok;
      }
    }
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "gkp: " << e.what() << '\n';
    return invalid_input;
  }

  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      const Resolved resolved = resolve(commands[i], raw[i], switches[i], config_paths[i]);
      return execute(commands[i], resolved, out);
    } catch (const ValidationError& e) {
      err << "gkp " << commands[i].name << ": invalid input: " << e.what() << '\n';
      return invalid_input;
    } catch (const ConvergenceError& e) {
      err << "gkp " << commands[i].name << ": not converged: " << e.what() << '\n';
      return not_converged;
    } catch (const std::exception& e) {
      err << "gkp " << commands[i].name << ": " << e.what() << '\n';
      return failure;
    }
  }
  return invalid_input;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace gkp::cli
