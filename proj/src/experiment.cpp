#include "fef/experiment.hpp"

#include "fef/theory_constants.hpp"

#include <json.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <cctype>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <type_traits>

namespace fef {

using json = nlohmann::ordered_json;

NLOHMANN_JSON_SERIALIZE_ENUM(GeneratorKind, {{GeneratorKind::circle, "circle"},
                                             {GeneratorKind::lemniscate, "lemniscate"},
                                             {GeneratorKind::perturbed_circle, "perturbed_circle"},
                                             {GeneratorKind::ellipse, "ellipse"}})
NLOHMANN_JSON_SERIALIZE_ENUM(StepPolicy, {{StepPolicy::fixed, "fixed"}, {StepPolicy::adaptive, "adaptive"}})
NLOHMANN_JSON_SERIALIZE_ENUM(TimeScheme, {{TimeScheme::linearly_implicit, "linearly_implicit"},
                                          {TimeScheme::extrapolated, "extrapolated"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Redistribution, {{Redistribution::off, "off"},
                                              {Redistribution::every_step, "every_step"},
                                              {Redistribution::threshold, "threshold"}})

namespace {

constexpr double pi = std::numbers::pi;

// Unknown keys are errors: a misspelt key would otherwise silently fall back
// to its default.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw SpecError(where_ + ": expected an object");
  }

  template <typename T>
  void operator()(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      it->get_to(out);
    } catch (const json::exception& e) {
      throw SpecError(where_ + "." + key + ": " + e.what());
    }
    // The enum macros map unknown strings to the first enumerator.
    if constexpr (std::is_enum_v<T>) {
      if (json(out) != *it) throw SpecError(where_ + "." + key + ": unknown value " + it->dump());
    }
  }

  // JSON has no infinity; null stands for it.
  void unbounded(const char* key, double& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    if (it->is_null()) {
      out = std::numeric_limits<double>::infinity();
      return;
    }
    (*this)(key, out);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw SpecError(where_ + ": unknown key \"" + key + "\"");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

json unbounded(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const FlowConfig& c) {
  return {{"nodes", c.nodes},
          {"dt_policy", c.dt_policy},
          {"dt", c.dt},
          {"cap_factor", c.cap_factor},
          {"dt_max", unbounded(c.dt_max)},
          {"dt_min", c.dt_min},
          {"grow_factor", c.grow_factor},
          {"grow_after", c.grow_after},
          {"scheme", c.scheme},
          {"t_end", c.t_end},
          {"redistribution", c.redistribution},
          {"redistribution_threshold", c.redistribution_threshold},
          {"linear_tolerance", c.linear_tolerance},
          {"max_mesh_ratio", c.max_mesh_ratio},
          {"local_error_tolerance", c.local_error_tolerance},
          {"record_interval", c.record_interval},
          {"record_times", c.record_times}};
}

FlowConfig flow_from_json(const json& j) {
  FlowConfig c;
  Reader r(j, "flow");
  r("nodes", c.nodes);
  r("dt_policy", c.dt_policy);
  r("dt", c.dt);
  r("cap_factor", c.cap_factor);
  r.unbounded("dt_max", c.dt_max);
  r("dt_min", c.dt_min);
  r("grow_factor", c.grow_factor);
  r("grow_after", c.grow_after);
  r("scheme", c.scheme);
  r("t_end", c.t_end);
  r("redistribution", c.redistribution);
  r("redistribution_threshold", c.redistribution_threshold);
  r("linear_tolerance", c.linear_tolerance);
  r("max_mesh_ratio", c.max_mesh_ratio);
  r("local_error_tolerance", c.local_error_tolerance);
  r("record_interval", c.record_interval);
  r("record_times", c.record_times);
  r.finish();
  return c;
}

json to_json(const GeneratorSpec& g) {
  json modes = json::array();
  for (const RadialMode<double>& m : g.modes) {
    modes.push_back({{"m", m.m}, {"amplitude", m.amplitude}, {"phase", m.phase}});
  }
  return {{"kind", g.kind},   {"omega", g.omega}, {"scale", g.scale},
          {"minor", g.minor}, {"t0", g.t0},       {"modes", modes},
          {"random_phases", g.random_phases}};
}

GeneratorSpec generator_from_json(const json& j) {
  GeneratorSpec g;
  Reader r(j, "generator");
  r("kind", g.kind);
  r("omega", g.omega);
  r("scale", g.scale);
  r("minor", g.minor);
  r("t0", g.t0);
  r("random_phases", g.random_phases);
  json modes = json::array();
  r("modes", modes);
  r.finish();
  if (!modes.is_array()) throw SpecError("generator.modes: expected an array");
  for (const json& mj : modes) {
    RadialMode<double> m;
    Reader mr(mj, "generator.modes[]");
    mr("m", m.m);
    mr("amplitude", m.amplitude);
    mr("phase", m.phase);
    mr.finish();
    g.modes.push_back(m);
  }
  return g;
}

json to_json(const ExperimentSpec& s) {
  return {{"name", s.name},
          {"generator", to_json(s.generator)},
          {"flow", to_json(s.flow)},
          {"geometric_records", {{"first", s.geometric_records.first}, {"factor", s.geometric_records.factor}}},
          {"output_dir", s.output_dir},
          {"laws", s.laws},
          {"seed", s.seed},
          {"plots", s.plots},
          {"snapshots", s.snapshots},
          {"refinement_group", s.refinement_group}};
}

ExperimentSpec spec_from(const json& j) {
  ExperimentSpec s;
  Reader r(j, "spec");
  r("name", s.name);
  json generator = json::object(), flow = json::object(), geometric = json::object();
  r("generator", generator);
  r("flow", flow);
  r("geometric_records", geometric);
  r("output_dir", s.output_dir);
  r("laws", s.laws);
  r("seed", s.seed);
  r("plots", s.plots);
  r("snapshots", s.snapshots);
  r("refinement_group", s.refinement_group);
  r.finish();
  s.generator = generator_from_json(generator);
  s.flow = flow_from_json(flow);
  Reader gr(geometric, "geometric_records");
  gr("first", s.geometric_records.first);
  gr("factor", s.geometric_records.factor);
  gr.finish();
  validate(s);
  return s;
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << content;
  out.close();
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

// Shortest round-trip representation.
std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

struct Column {
  const char* name;
  double DiagnosticsRecord::*value;
};

constexpr Column kColumns[] = {
    {"t", &DiagnosticsRecord::t},
    {"dt", &DiagnosticsRecord::dt},
    {"length", &DiagnosticsRecord::length},
    {"energy", &DiagnosticsRecord::energy},
    {"omega", nullptr},
    {"omega_signed", nullptr},
    {"eps", &DiagnosticsRecord::eps},
    {"q", &DiagnosticsRecord::q},
    {"ks_l2sq", &DiagnosticsRecord::ks_l2sq},
    {"kbar_dev", &DiagnosticsRecord::kbar_dev},
    {"k_inf", &DiagnosticsRecord::k_inf},
    {"ks_inf", &DiagnosticsRecord::ks_inf},
    {"kss_inf", &DiagnosticsRecord::kss_inf},
    {"rescaled_ks_inf", &DiagnosticsRecord::rescaled_ks_inf},
    {"rescaled_kss_inf", &DiagnosticsRecord::rescaled_kss_inf},
    {"centre_x", &DiagnosticsRecord::centre_x},
    {"centre_y", &DiagnosticsRecord::centre_y},
    {"mean_radius", &DiagnosticsRecord::mean_radius},
    {"centered_dev", &DiagnosticsRecord::centered_dev},
    {"origin_dev", &DiagnosticsRecord::origin_dev},
    {"rescaled_centre", &DiagnosticsRecord::rescaled_centre},
};

// Uniform phase in [0, 2 pi) from the top 53 bits; the standard
// distributions are implementation-defined and would break reproducibility
// across standard libraries.
double draw_phase(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53 * 2 * pi;
}

LawCheck not_applicable(std::string law, std::string why) {
  LawCheck c;
  c.law = std::move(law);
  c.verdict = Verdict::inconclusive;
  c.slack = std::numeric_limits<double>::quiet_NaN();
  c.note = std::move(why);
  return c;
}

LawCheck informational(LawCheck c, const std::string& why) {
  c.verdict = Verdict::informational;
  c.note += c.note.empty() ? why : " (" + why + ")";
  return c;
}

double max_increase(const Series& s, double DiagnosticsRecord::*value) {
  double worst = 0;
  for (std::size_t i = 1; i < s.size(); ++i) worst = std::max(worst, s[i].*value - s[i - 1].*value);
  return worst;
}

void append_decay_rate_checks(std::vector<LawCheck>& checks, const Series& series, int omega) {
  const DecayReport rep = decay_report(series, theory_constants(omega));
  checks.insert(checks.end(), rep.checks.begin(), rep.checks.end());
  if (rep.eps_fit.points >= 2) {
    LawCheck fit;
    fit.law = "eps_decay_exponent";
    fit.verdict = Verdict::informational;
    fit.measured = rep.eps_fit.exponent;
    fit.slack = std::numeric_limits<double>::quiet_NaN();
    fit.note = "tail fit eps ~ t^p; Q exponent " + fmt(rep.q_fit.exponent);
    checks.push_back(fit);
  }
}

void write_plots(const std::filesystem::path& dir, const ExperimentSpec& spec, const Series& series,
                 const RunObservations& obs) {
  std::vector<double> t, eps, q, l4, law, centered, origin;
  const double l04 = std::pow(series.front().length, 4);
  const int w = series.front().omega;
  for (const DiagnosticsRecord& r : series) {
    t.push_back(r.t);
    eps.push_back(r.eps);
    q.push_back(r.q);
    l4.push_back(std::pow(r.length, 4));
    law.push_back(l04 + 32 * std::pow(w * pi, 4) * (r.t - series.front().t));
    centered.push_back(r.centered_dev);
    origin.push_back(r.origin_dev);
  }
  const std::string suffix = " (" + spec.name + ")";
  write_file(dir / "eps.svg", svg::line_plot({{"eps", t, eps}}, {"eps(t)" + suffix, "t", "eps", false, true}));
  write_file(dir / "q.svg", svg::line_plot({{"Q", t, q}}, {"Q(t)" + suffix, "t", "Q", false, true}));
  write_file(dir / "length4.svg",
             svg::line_plot({{"L^4", t, l4}, {"L(0)^4 + 32 w^4 pi^4 t", t, law, true}},
                            {"L(t)^4" + suffix, "t", "L^4"}));
  write_file(dir / "circle_deviation.svg",
             svg::line_plot({{"centred", t, centered}, {"origin", t, origin}},
                            {"circle deviation of eta" + suffix, "t", "deviation", false, true}));
  std::vector<svg::Snapshot> snaps = obs.snapshots;
  if (snaps.empty()) snaps.push_back({"t = 0", rescaled_curve(obs.initial)});
  write_file(dir / "snapshots.svg", svg::curve_plot(snaps, "rescaled curve eta" + suffix));
}

void write_state(const std::filesystem::path& file, const Curve& curve, double t) {
  std::ostringstream os;
  os << "# fef-state v1 t=" << fmt(t) << "\nx,y\n";
  for (Index i = 0; i < curve.size(); ++i) os << fmt(curve.point(i).x()) << ',' << fmt(curve.point(i).y()) << '\n';
  write_file(file, os.str());
}

}  // namespace

const std::vector<std::string>& known_laws() {
  static const std::vector<std::string> laws{
      "circle_radius", "lemniscate_scale", "lemniscate_image", "length_law",  "length_exponent",
      "decay",         "ks_monotone",      "circle_deviation", "curvature_decay", "centre_drift",
      "energy_monotone", "le_lower"};
  return laws;
}

void validate(const ExperimentSpec& spec) {
  if (spec.name.empty()) throw SpecError("spec needs a name");
  for (char c : spec.name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) {
      throw SpecError("spec name \"" + spec.name + "\" may only contain letters, digits, '-', '_' and '.'");
    }
  }
  const GeneratorSpec& g = spec.generator;
  if (g.omega < 1) throw SpecError("generator.omega must be >= 1");
  if (!(g.scale > 0) || !(g.minor > 0)) throw SpecError("generator scales must be positive");
  if (!(g.t0 >= 0)) throw SpecError("generator.t0 must be >= 0");
  if (!g.modes.empty() && g.kind != GeneratorKind::perturbed_circle) {
    throw SpecError("generator.modes only apply to perturbed_circle");
  }
  if (spec.flow.t_end < 0) throw SpecError("flow.t_end must be >= 0");
  try {
    FlowConfig check = spec.flow;
    if (check.t_end == 0) check.t_end = 1;
    check.validate();
  } catch (const std::invalid_argument& e) {
    throw SpecError(e.what());
  }
  if (spec.geometric_records.first < 0 ||
      (spec.geometric_records.first > 0 && !(spec.geometric_records.factor > 1))) {
    throw SpecError("geometric_records needs first >= 0 and factor > 1");
  }
  if (spec.snapshots < 0) throw SpecError("snapshots must be >= 0");
  for (const std::string& law : spec.laws) {
    const auto& known = known_laws();
    if (std::find(known.begin(), known.end(), law) == known.end()) throw SpecError("unknown law \"" + law + "\"");
    if (law == "circle_radius" && g.kind != GeneratorKind::circle) {
      throw SpecError("circle_radius needs the circle generator");
    }
    if (law.rfind("lemniscate_", 0) == 0 && g.kind != GeneratorKind::lemniscate) {
      throw SpecError(law + " needs the lemniscate generator");
    }
  }
  const std::filesystem::path out(spec.output_dir);
  if (out.is_absolute() || std::any_of(out.begin(), out.end(), [](const auto& p) { return p == ".."; })) {
    throw SpecError("output_dir must be a relative path inside the run root");
  }
}

std::string spec_to_json(const ExperimentSpec& spec, int indent) { return to_json(spec).dump(indent) + "\n"; }

ExperimentSpec spec_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("spec is not valid JSON: ") + e.what());
  }
  return spec_from(j);
}

ExperimentSpec load_spec(const std::filesystem::path& file) {
  try {
    return spec_from_json(read_file(file));
  } catch (const SpecError& e) {
    throw SpecError(file.string() + ": " + e.what());
  }
}

ExperimentSpec spec_from_manifest(const std::filesystem::path& manifest) {
  const json j = json::parse(read_file(manifest));
  if (!j.contains("spec")) throw SpecError(manifest.string() + ": no spec section");
  return spec_from(j.at("spec"));
}

InitialData initial_curve(const ExperimentSpec& spec) {
  const GeneratorSpec& g = spec.generator;
  const Index n = spec.flow.nodes;
  InitialData out;
  switch (g.kind) {
    case GeneratorKind::circle:
      out.curve = circle_at(CircleSolution<double>{g.omega, g.scale, Point<double>::Zero()}, g.t0, n);
      break;
    case GeneratorKind::lemniscate:
      out.curve = lemniscate_at(LemniscateSolution<double>{g.scale}, g.t0, n);
      break;
    case GeneratorKind::ellipse:
      out.curve = ellipse_at(g.scale, g.minor, n);
      break;
    case GeneratorKind::perturbed_circle: {
      std::vector<RadialMode<double>> modes = g.modes;
      if (g.random_phases) {
        std::mt19937_64 gen(spec.seed);
        for (RadialMode<double>& m : modes) m.phase = draw_phase(gen);
      }
      out.curve = perturbed_circle<double>(g.omega, modes, g.scale, n).curve;
      break;
    }
  }
  out.eps0 = make_record(out.curve, 0.0, 0.0).eps;
  return out;
}

FlowConfig resolved_flow(const ExperimentSpec& spec) {
  FlowConfig cfg = spec.flow;
  const GeometricRecords& geo = spec.geometric_records;
  if (geo.first > 0 && cfg.t_end > 0) {
    if (cfg.record_times.empty() && cfg.record_interval > 0) {
      for (double t : detail::record_schedule(cfg)) cfg.record_times.push_back(t);
    }
    for (double t = geo.first; t < cfg.t_end; t *= geo.factor) cfg.record_times.push_back(t);
    std::sort(cfg.record_times.begin(), cfg.record_times.end());
  }
  return cfg;
}

std::vector<LawCheck> evaluate_laws(const ExperimentSpec& spec, const Series& series, const RunObservations& obs) {
  std::vector<LawCheck> checks;
  if (series.empty()) return checks;
  const GeneratorSpec& g = spec.generator;
  const DiagnosticsRecord& first = series.front();
  const DiagnosticsRecord& last = series.back();
  const int omega = first.omega;

  for (const std::string& law : spec.laws) {
    if (law == "circle_radius") {
      const CircleSolution<double> sol{g.omega, g.scale, Point<double>::Zero()};
      double worst = 0;
      for (const DiagnosticsRecord& r : series) worst = std::max(worst, std::abs(r.mean_radius / sol.radius(g.t0 + r.t) - 1));
      const double final_err = std::abs(last.mean_radius / sol.radius(g.t0 + last.t) - 1);
      checks.push_back(make_check("circle_radius_max", worst, 5e-3, "max relative radius error over records"));
      checks.push_back(make_check("circle_radius_final", final_err, 5e-3,
                                  "final radius " + fmt(last.mean_radius) + " vs " + fmt(sol.radius(g.t0 + last.t))));
    } else if (law == "lemniscate_scale") {
      const LemniscateSolution<double> sol{g.scale};
      const double h0 = sol.scale(g.t0);
      double worst = 0;
      for (const DiagnosticsRecord& r : series) {
        const double measured = h0 * r.length / first.length;
        worst = std::max(worst, std::abs(measured / sol.scale(g.t0 + r.t) - 1));
      }
      checks.push_back(make_check("lemniscate_scale", worst, 1e-2,
                                  "max relative error of h(0) L(t)/L(0) against (h0^4 + 30 t)^(1/4)"));
    } else if (law == "lemniscate_image") {
      checks.push_back(make_check("lemniscate_image", obs.max_image_deviation, 1e-2,
                                  "max Hausdorff distance of eta(t) to eta(0) over the radius"));
    } else if (law == "length_law" || law == "length_exponent") {
      if (omega < 1) {
        checks.push_back(not_applicable(law, "turning number 0"));
        continue;
      }
      if (series.size() < 10) {
        checks.push_back(not_applicable(law, "fewer than 10 records"));
        continue;
      }
      const LengthLawResidual r = length_law_residual(series, omega, 1e-300);
      if (law == "length_law") {
        checks.push_back(make_check("length_law", r.max_ratio, 1.05,
                                    "max |L^4 - L0^4 - 32 w^4 pi^4 t| / (sigma C_hat t), sigma = " + fmt(r.sigma) +
                                        ", worst t = " + fmt(r.worst_t)));
      } else {
        checks.push_back(make_check("length_exponent", std::abs(r.raw_exponent - 0.25), 0.01,
                                    "tail fit p = " + fmt(r.raw_exponent) + "; with virtual origin " +
                                        fmt(r.virtual_origin) + ": p = " + fmt(r.exponent)));
      }
    } else if (law == "decay") {
      if (omega < 1) {
        checks.push_back(not_applicable(law, "turning number 0"));
        continue;
      }
      append_decay_rate_checks(checks, series, omega);
    } else if (law == "ks_monotone") {
      LawCheck c = make_check("ks_monotone", max_increase(series, &DiagnosticsRecord::ks_l2sq), 1e-8,
                              "largest increase of int k_s^2 ds between records");
      double max_eps = 0;
      for (const DiagnosticsRecord& r : series) max_eps = std::max(max_eps, r.eps);
      if (omega < 1) {
        c = informational(c, "turning number 0");
      } else if (max_eps > static_cast<double>(eps_star(omega))) {
        c = informational(c, "eps exceeds eps_* during the run");
      }
      checks.push_back(c);
    } else if (law == "circle_deviation") {
      checks.push_back(make_check("circle_deviation_centered", last.centered_dev, 1e-2, "final record"));
      checks.push_back(make_check("circle_deviation_origin", last.origin_dev, 1e-2, "final record"));
    } else if (law == "curvature_decay") {
      double ks_max = 0, kss_max = 0;
      for (const DiagnosticsRecord& r : series) {
        ks_max = std::max(ks_max, r.rescaled_ks_inf);
        kss_max = std::max(kss_max, r.rescaled_kss_inf);
      }
      checks.push_back(make_check("rescaled_ks_decay", ks_max > 0 ? last.rescaled_ks_inf / ks_max : 0.0, 0.1,
                                  "final L^2 |k_s|_inf over its maximum " + fmt(ks_max)));
      checks.push_back(make_check("rescaled_kss_decay", kss_max > 0 ? last.rescaled_kss_inf / kss_max : 0.0, 0.1,
                                  "final L^3 |k_ss|_inf over its maximum " + fmt(kss_max)));
    } else if (law == "centre_drift") {
      checks.push_back(make_check("centre_drift", last.rescaled_centre, 1e-2, "|int eta ds| at the final record"));
    } else if (law == "energy_monotone") {
      checks.push_back(make_check("energy_monotone", max_increase(series, &DiagnosticsRecord::energy) / first.energy,
                                  1e-12, "largest relative increase of E between records"));
    } else if (law == "le_lower") {
      const double bound = 2 * pi * pi * std::max(omega * omega, 1);
      double worst = 0;
      for (const DiagnosticsRecord& r : series) worst = std::max(worst, 1 - r.length * r.energy / bound);
      checks.push_back(make_check("le_lower", worst, 1e-9, "max 1 - L E / (2 pi^2 max(w, 1)^2)"));
    }
  }
  return checks;
}

void write_series_csv(std::ostream& os, const Series& series) {
  os << kSeriesHeader << '\n';
  for (std::size_t c = 0; c < std::size(kColumns); ++c) os << (c ? "," : "") << kColumns[c].name;
  os << '\n';
  for (const DiagnosticsRecord& r : series) {
    for (std::size_t c = 0; c < std::size(kColumns); ++c) {
      if (c) os << ',';
      const std::string name = kColumns[c].name;
      if (name == "omega") {
        os << r.omega;
      } else if (name == "omega_signed") {
        os << r.omega_signed;
      } else {
        os << fmt(r.*(kColumns[c].value));
      }
    }
    os << '\n';
  }
}

Series read_series_csv(std::istream& is) {
  Series out;
  std::string line;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (header.empty()) {
      header = cells;
      continue;
    }
    if (cells.size() != header.size()) throw std::runtime_error("series CSV: ragged row");
    DiagnosticsRecord r;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      double v = 0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{}) throw std::runtime_error("series CSV: bad number \"" + cell + "\"");
      if (header[c] == "omega") {
        r.omega = static_cast<int>(v);
        continue;
      }
      if (header[c] == "omega_signed") {
        r.omega_signed = static_cast<int>(v);
        continue;
      }
      for (const Column& col : kColumns) {
        if (col.value && header[c] == col.name) r.*(col.value) = v;
      }
    }
    out.push_back(r);
  }
  return out;
}

void write_verdict(std::ostream& os, const std::vector<LawCheck>& checks, Verdict overall_verdict) {
  for (const LawCheck& c : checks) {
    os << c.law << ' ' << to_string(c.verdict) << " slack=" << fmt(c.slack) << " measured=" << fmt(c.measured)
       << " bound=" << fmt(c.bound);
    if (!c.note.empty()) os << " # " << c.note;
    os << '\n';
  }
  os << "overall " << to_string(overall_verdict) << '\n';
}

const char* to_string(RunOutcome o) {
  switch (o) {
    case RunOutcome::completed: return "completed";
    case RunOutcome::aborted: return "aborted";
    case RunOutcome::skipped: return "skipped";
  }
  return "?";
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::pass: return 0;
    case Verdict::fail: return 1;
    default: return 2;
  }
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  validate(spec);
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.name = spec.name;
  result.directory = options.root / (spec.output_dir.empty() ? spec.name : spec.output_dir);
  if (options.write) std::filesystem::create_directories(result.directory);
  const bool plots = options.plots.value_or(spec.plots);

  const InitialData init = initial_curve(spec);
  result.eps0 = init.eps0;
  RunObservations obs;
  obs.initial = init.curve;
  obs.final = init.curve;
  double final_t = 0;

  if (spec.flow.t_end == 0) {
    result.outcome = RunOutcome::skipped;
    result.message = "t_end = 0: nothing to integrate";
  } else {
    const FlowConfig cfg = resolved_flow(spec);
    const bool image_law =
        std::find(spec.laws.begin(), spec.laws.end(), "lemniscate_image") != spec.laws.end();
    const Curve eta0 = rescaled_curve(init.curve);
    const int slots = plots ? spec.snapshots : 0;
    int next_slot = 0;
    auto observer = [&](const FlowState<double>& s, const DiagnosticsRecord&) {
      if (image_law) obs.max_image_deviation = std::max(obs.max_image_deviation, image_deviation(rescaled_curve(s.curve), eta0));
      if (next_slot < slots) {
        const double target = slots > 1 ? cfg.t_end * next_slot / (slots - 1) : 0.0;
        if (s.t >= target * (1 - 1e-12)) {
          obs.snapshots.push_back({"t = " + fmt(s.t), rescaled_curve(s.curve)});
          ++next_slot;
        }
      }
    };
    RunResult<double> run_result = run(init.curve, cfg, RecordObserver<double>(observer));
    result.series = std::move(run_result.records);
    obs.final = run_result.final_state.curve;
    final_t = run_result.final_state.t;
    if (run_result.status == RunStatus::aborted) {
      result.outcome = RunOutcome::aborted;
      result.message = run_result.message;
    }
  }

  result.checks = evaluate_laws(spec, result.series, obs);
  result.verdict = result.outcome == RunOutcome::completed ? overall(result.checks) : Verdict::inconclusive;
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!options.write) return result;
  const auto& dir = result.directory;
  {
    std::ostringstream os;
    write_series_csv(os, result.series);
    write_file(dir / "series.csv", os.str());
  }
  {
    std::ostringstream os;
    if (result.outcome != RunOutcome::completed) os << "# " << to_string(result.outcome) << ": " << result.message << '\n';
    write_verdict(os, result.checks, result.verdict);
    write_file(dir / "verdict.txt", os.str());
  }
  std::vector<std::string> files{"manifest.json", "series.csv", "verdict.txt"};
  if (result.outcome == RunOutcome::aborted) {
    write_state(dir / "last_state.csv", obs.final, final_t);
    files.push_back("last_state.csv");
  }
  if (plots && !result.series.empty()) {
    write_plots(dir, spec, result.series, obs);
    for (const char* f : {"eps.svg", "q.svg", "length4.svg", "circle_deviation.svg", "snapshots.svg"}) files.push_back(f);
  }

  json manifest = {
      {"format", "fef-manifest v1"},
      {"spec", to_json(spec)},
      {"versions",
       {{"fef", kVersion},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"compiler", __VERSION__},
        {"series", kSeriesHeader}}},
      {"timings", {{"wall_seconds", result.wall_seconds}}},
      {"result",
       {{"outcome", to_string(result.outcome)},
        {"verdict", to_string(result.verdict)},
        {"message", result.message},
        {"records", result.series.size()},
        {"eps0", result.eps0},
        {"files", files}}}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

void fill_observed_orders(std::vector<SweepRow>& rows) {
  std::map<std::string, std::vector<SweepRow*>> groups;
  for (SweepRow& r : rows) {
    if (!r.refinement_group.empty() && r.status == "completed") groups[r.refinement_group].push_back(&r);
  }
  for (auto& [name, members] : groups) {
    std::stable_sort(members.begin(), members.end(), [](const SweepRow* a, const SweepRow* b) { return a->dt > b->dt; });
    for (std::size_t i = 2; i < members.size(); ++i) {
      const double d1 = std::abs(members[i - 2]->final_length - members[i - 1]->final_length);
      const double d2 = std::abs(members[i - 1]->final_length - members[i]->final_length);
      const double ratio = members[i - 2]->dt / members[i - 1]->dt;
      if (d1 > 0 && d2 > 0 && ratio > 1) members[i]->observed_order = std::log(d1 / d2) / std::log(ratio);
    }
  }
}

std::string summary_csv(const std::vector<SweepRow>& rows) {
  std::vector<std::string> laws;
  for (const SweepRow& r : rows) {
    for (const LawCheck& c : r.checks) {
      if (std::find(laws.begin(), laws.end(), c.law) == laws.end()) laws.push_back(c.law);
    }
  }
  const bool verdicts = !laws.empty();
  std::ostringstream os;
  os << kSummaryHeader << '\n';
  os << "name,status,records,final_t,final_length,eps0,eps_final,dt,refinement_group,observed_order";
  if (verdicts) {
    os << ",verdict";
    for (const std::string& l : laws) os << ',' << l;
  }
  os << ",message\n";
  for (const SweepRow& r : rows) {
    os << csv_field(r.name) << ',' << r.status << ',' << r.records << ',' << fmt(r.final_t) << ','
       << fmt(r.final_length) << ',' << fmt(r.eps0) << ',' << fmt(r.eps_final) << ',' << fmt(r.dt) << ','
       << csv_field(r.refinement_group) << ',' << (r.observed_order ? fmt(*r.observed_order) : "");
    if (verdicts) {
      os << ',' << (r.status == "error" ? "error" : to_string(r.verdict));
      for (const std::string& l : laws) {
        os << ',';
        for (const LawCheck& c : r.checks) {
          if (c.law == l) os << to_string(c.verdict);
        }
      }
    }
    os << ',' << csv_field(r.message) << '\n';
  }
  return os.str();
}

SweepResult sweep(const std::vector<ExperimentSpec>& specs, int parallelism, const RunOptions& options) {
  if (specs.empty()) throw std::invalid_argument("sweep needs at least one spec");
  if (parallelism < 1) throw std::invalid_argument("sweep parallelism must be positive");
  std::set<std::string> names;
  for (const ExperimentSpec& s : specs) {
    if (!names.insert(s.name).second) throw SpecError("duplicate spec name \"" + s.name + "\" in sweep");
  }

  SweepResult out;
  out.rows.resize(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < specs.size();) {
      const ExperimentSpec& spec = specs[i];
      SweepRow& row = out.rows[i];
      row.name = spec.name;
      row.dt = spec.flow.dt;
      row.refinement_group = spec.refinement_group;
      try {
        const ExperimentResult r = run_experiment(spec, options);
        row.status = to_string(r.outcome);
        row.verdict = r.verdict;
        row.message = r.message;
        row.records = r.series.size();
        row.eps0 = r.eps0;
        if (!r.series.empty()) {
          row.final_t = r.series.back().t;
          row.final_length = r.series.back().length;
          row.eps_final = r.series.back().eps;
        }
        row.checks = r.checks;
      } catch (const std::exception& e) {
        row.status = "error";
        row.verdict = Verdict::inconclusive;
        row.message = e.what();
      }
    }
  };
  const int threads = std::min<int>(parallelism, static_cast<int>(specs.size()));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  fill_observed_orders(out.rows);
  out.summary_csv = summary_csv(out.rows);
  if (options.write) {
    std::filesystem::create_directories(options.root);
    write_file(options.root / "summary.csv", out.summary_csv);
  }
  return out;
}

std::vector<ExperimentSpec> load_spec_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw SpecError(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ExperimentSpec> specs;
  for (const auto& f : files) specs.push_back(load_spec(f));
  if (specs.empty()) throw SpecError("no *.json specs in " + dir.string());
  return specs;
}

}  // namespace fef
