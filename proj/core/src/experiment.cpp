#include "orbitherm/experiment.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "orbitherm/catalog.hpp"
#include "orbitherm/geometry.hpp"
#include "orbitherm/version.hpp"

namespace orbitherm {

using nlohmann::json;
namespace fs = std::filesystem;

const char* const kCommands[8] = {"orbits", "pressure", "separated", "volume",
                                  "escape",  "boxdim",  "bound",     "oracle"};

std::string format_sig12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

double round12(double v) { return std::strtod(format_sig12(v).c_str(), nullptr); }

json num(double v) { return json(round12(v)); }

json num_list(const std::vector<double>& vs) {
  json a = json::array();
  for (double v : vs) a.push_back(num(v));
  return a;
}

std::string fnv1a64_hex(const std::string& data) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw ConfigError("config field '" + field + "': " + why);
}

double get_num(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  return j.get<double>();
}

template <typename T>
T get_int(const json& j, const std::string& field) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    fail(field, "expected an integer");
  return j.get<T>();
}

Window get_window(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) fail(field, "expected [lo, hi]");
  Window w{get_int<int>(j[0], field), get_int<int>(j[1], field)};
  if (w.lo < 1 || w.hi < w.lo) fail(field, "need 1 <= lo <= hi");
  return w;
}

std::vector<double> get_num_list(const json& j, const std::string& field,
                                 bool require_nonempty = true) {
  if (!j.is_array()) fail(field, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : j) out.push_back(get_num(e, field));
  if (require_nonempty && out.empty()) fail(field, "must be nonempty");
  return out;
}

// Rebuild the effective config as a sorted-key JSON document. Idempotent:
// parsing the output reproduces the same text.
json canonical_json_of(const ExperimentConfig& c) {
  json j;
  j["system"] = {{"name", c.system_name}, {"params", json::object()}};
  for (const auto& [k, v] : c.system_params) j["system"]["params"][k] = num(v);

  j["potential"] = {{"name", c.potential_name}};
  if (c.potential_name == "constant" || c.potential_name == "sink_bump")
    j["potential"]["value"] = num(c.potential_value);
  if (c.potential_name == "coordinate") j["potential"]["axis"] = c.potential_axis;
  if (c.potential_name == "cylinder") j["potential"]["values"] = num_list(c.cylinder_values);

  j["window"] = {c.window.lo, c.window.hi};
  j["orbits"] = {{"method", c.method}, {"seed_resolution", c.seed_resolution}};
  if (c.kcap_override) j["orbits"]["kcap_override"] = *c.kcap_override;

  j["filter"] = {{"alphas", num_list(c.alphas)}, {"cs", num_list(c.cs)}};
  if (c.beta) j["filter"]["beta"] = num(*c.beta);

  j["separated"] = {{"epsilons", num_list(c.epsilons)},
                    {"use_cloud", c.separated_use_cloud},
                    {"spacing_factor", num(c.spacing_factor)},
                    {"cloud_samples", c.separated_cloud_samples},
                    {"cloud_depth", c.separated_cloud_depth}};

  if (c.region_box) {
    json lo = json::array(), hi = json::array();
    for (int a = 0; a < c.region_box->dim(); ++a) {
      lo.push_back(num(c.region_box->lo[a]));
      hi.push_back(num(c.region_box->hi[a]));
    }
    j["region"] = {{"type", "box"}, {"lo", lo}, {"hi", hi}};
  } else {
    j["region"] = {{"type", "full"}};
  }

  j["escape"] = {{"samples", c.escape_samples},
                 {"n_max", c.escape_n_max},
                 {"window", {c.escape_window.lo, c.escape_window.hi}}};
  j["boxdim"] = {{"scales", num_list(c.scales)},
                 {"source", c.cloud_source},
                 {"depth", c.cloud_depth},
                 {"samples", c.cloud_samples},
                 {"two_sided", c.cloud_two_sided}};
  j["volume"] = {{"alphas", num_list(c.volume_alphas)}, {"cs", num_list(c.volume_cs)}};

  if (c.shift_transitions) {
    json rows = json::array();
    for (int i = 0; i < c.shift_transitions->rows(); ++i) {
      json row = json::array();
      for (int k = 0; k < c.shift_transitions->cols(); ++k)
        row.push_back((*c.shift_transitions)(i, k));
      rows.push_back(row);
    }
    j["oracle"] = {{"transitions", rows}, {"weights", num_list(c.shift_weights)}};
  }

  j["grid_resolution"] = c.grid_resolution;
  if (c.seed) j["seed"] = *c.seed;
  j["threads"] = c.threads;
  j["out"] = c.out_dir;
  return j;
}

void finalize(ExperimentConfig& c) {
  json j = canonical_json_of(c);
  c.canonical_json = j.dump();
  j.erase("out");
  j.erase("threads");
  c.config_hash = fnv1a64_hex(j.dump());
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig c;

  if (!j.contains("system") || !j["system"].is_object() ||
      !j["system"].contains("name"))
    fail("system.name", "required");
  c.system_name = j["system"]["name"].get<std::string>();
  if (j["system"].contains("params")) {
    if (!j["system"]["params"].is_object()) fail("system.params", "expected an object");
    for (auto& [k, v] : j["system"]["params"].items())
      c.system_params[k] = get_num(v, "system.params." + k);
  }

  if (j.contains("potential")) {
    const auto& p = j["potential"];
    if (!p.is_object() || !p.contains("name")) fail("potential.name", "required");
    c.potential_name = p["name"].get<std::string>();
    if (p.contains("value")) c.potential_value = get_num(p["value"], "potential.value");
    if (p.contains("axis")) c.potential_axis = get_int<int>(p["axis"], "potential.axis");
    if (p.contains("values"))
      c.cylinder_values = get_num_list(p["values"], "potential.values");
    if ((c.potential_name == "constant" || c.potential_name == "sink_bump") &&
        !p.contains("value"))
      fail("potential.value", "required for '" + c.potential_name + "'");
    if (c.potential_name == "cylinder" && c.cylinder_values.empty())
      fail("potential.values", "required for 'cylinder'");
  }

  if (j.contains("window")) c.window = get_window(j["window"], "window");

  if (j.contains("orbits")) {
    const auto& o = j["orbits"];
    if (o.contains("method")) {
      c.method = o["method"].get<std::string>();
      if (c.method != "auto" && c.method != "symbolic" && c.method != "newton")
        fail("orbits.method", "must be auto|symbolic|newton");
    }
    if (o.contains("seed_resolution"))
      c.seed_resolution = get_int<int>(o["seed_resolution"], "orbits.seed_resolution");
    if (o.contains("kcap_override"))
      c.kcap_override = get_int<int>(o["kcap_override"], "orbits.kcap_override");
  }

  if (j.contains("filter")) {
    const auto& f = j["filter"];
    if (f.contains("alphas")) c.alphas = get_num_list(f["alphas"], "filter.alphas");
    if (f.contains("cs")) c.cs = get_num_list(f["cs"], "filter.cs");
    if (f.contains("beta") && !f["beta"].is_null())
      c.beta = get_num(f["beta"], "filter.beta");
    for (double a : c.alphas)
      if (!(a > 0.0)) fail("filter.alphas", "alpha values must be positive");
    for (double cc : c.cs)
      if (!(cc > 0.0 && cc <= 1.0)) fail("filter.cs", "c values must be in (0,1]");
  }

  if (j.contains("separated")) {
    const auto& s = j["separated"];
    if (s.contains("epsilons"))
      c.epsilons = get_num_list(s["epsilons"], "separated.epsilons", false);
    if (s.contains("use_cloud")) c.separated_use_cloud = s["use_cloud"].get<bool>();
    if (s.contains("spacing_factor"))
      c.spacing_factor = get_num(s["spacing_factor"], "separated.spacing_factor");
    if (s.contains("cloud_samples"))
      c.separated_cloud_samples =
          get_int<long>(s["cloud_samples"], "separated.cloud_samples");
    if (s.contains("cloud_depth"))
      c.separated_cloud_depth = get_int<int>(s["cloud_depth"], "separated.cloud_depth");
  }

  if (j.contains("region")) {
    const auto& r = j["region"];
    std::string type = r.contains("type") ? r["type"].get<std::string>() : "full";
    if (type == "box") {
      auto lo = get_num_list(r.contains("lo") ? r["lo"] : json(), "region.lo");
      auto hi = get_num_list(r.contains("hi") ? r["hi"] : json(), "region.hi");
      if (lo.size() != hi.size()) fail("region", "lo/hi dimension mismatch");
      Vec vlo(lo.size()), vhi(hi.size());
      for (size_t a = 0; a < lo.size(); ++a) { vlo[a] = lo[a]; vhi[a] = hi[a]; }
      try {
        c.region_box = Box(vlo, vhi);
      } catch (const std::exception& e) {
        fail("region", e.what());
      }
    } else if (type != "full") {
      fail("region.type", "must be full|box");
    }
  }

  if (j.contains("escape")) {
    const auto& e = j["escape"];
    if (e.contains("samples"))
      c.escape_samples = get_int<long>(e["samples"], "escape.samples");
    if (e.contains("n_max")) c.escape_n_max = get_int<int>(e["n_max"], "escape.n_max");
    if (e.contains("window")) c.escape_window = get_window(e["window"], "escape.window");
  }

  if (j.contains("boxdim")) {
    const auto& b = j["boxdim"];
    if (b.contains("scales"))
      c.scales = get_num_list(b["scales"], "boxdim.scales", false);
    if (b.contains("source")) {
      c.cloud_source = b["source"].get<std::string>();
      if (c.cloud_source != "survivor" && c.cloud_source != "periodic" &&
          c.cloud_source != "orbit")
        fail("boxdim.source", "must be survivor|periodic|orbit");
    }
    if (b.contains("depth")) c.cloud_depth = get_int<int>(b["depth"], "boxdim.depth");
    if (b.contains("samples"))
      c.cloud_samples = get_int<long>(b["samples"], "boxdim.samples");
    if (b.contains("two_sided")) c.cloud_two_sided = b["two_sided"].get<bool>();
  }

  if (j.contains("volume")) {
    const auto& v = j["volume"];
    if (v.contains("alphas"))
      c.volume_alphas = get_num_list(v["alphas"], "volume.alphas");
    if (v.contains("cs")) c.volume_cs = get_num_list(v["cs"], "volume.cs");
  }
  if (c.volume_alphas.empty()) c.volume_alphas = c.alphas;
  if (c.volume_cs.empty()) c.volume_cs = c.cs;

  if (j.contains("oracle")) {
    const auto& o = j["oracle"];
    if (!o.contains("transitions") || !o["transitions"].is_array())
      fail("oracle.transitions", "expected an array of 0/1 rows");
    const auto& rows = o["transitions"];
    int s = static_cast<int>(rows.size());
    Eigen::MatrixXi A(s, s);
    for (int i = 0; i < s; ++i) {
      if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != s)
        fail("oracle.transitions", "matrix must be square");
      for (int k = 0; k < s; ++k)
        A(i, k) = get_int<int>(rows[i][k], "oracle.transitions");
    }
    c.shift_transitions = A;
    c.shift_weights = get_num_list(o.contains("weights") ? o["weights"] : json(),
                                   "oracle.weights");
  }

  if (j.contains("grid_resolution"))
    c.grid_resolution = get_int<int>(j["grid_resolution"], "grid_resolution");
  if (j.contains("seed")) c.seed = get_int<uint64_t>(j["seed"], "seed");
  if (j.contains("threads")) {
    c.threads = get_int<int>(j["threads"], "threads");
    if (c.threads < 1) fail("threads", "must be >= 1");
  }
  if (j.contains("out")) c.out_dir = j["out"].get<std::string>();

  finalize(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ExperimentConfig with_overrides(const ExperimentConfig& config,
                                std::optional<uint64_t> seed,
                                std::optional<int> threads,
                                std::optional<std::string> out_dir) {
  ExperimentConfig c = config;
  if (seed) c.seed = *seed;
  if (threads) c.threads = *threads;
  if (out_dir) c.out_dir = *out_dir;
  finalize(c);
  return c;
}

// ---------------------------------------------------------------------------

namespace {

struct RunContext {
  SmoothSystem system;
  Potential phi;
  EnumMethod method = EnumMethod::Newton;
  KCapPolicy kcap;
  std::unique_ptr<OrbitDatabase> db;
};

RunContext make_context(const ExperimentConfig& c) {
  RunContext ctx;
  try {
    ctx.system = make_system(c.system_name, c.system_params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  if (c.potential_name == "zero") ctx.phi = zero_potential();
  else if (c.potential_name == "constant") ctx.phi = constant_potential(c.potential_value);
  else if (c.potential_name == "coordinate") {
    if (c.potential_axis < 0 || c.potential_axis >= ctx.system.dim)
      throw ConfigError("potential.axis out of range for system dimension");
    ctx.phi = coordinate_potential(c.potential_axis);
  } else if (c.potential_name == "cylinder") {
    try {
      ctx.phi = cylinder_potential(ctx.system, c.cylinder_values);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else if (c.potential_name == "sink_bump") {
    try {
      ctx.phi = sink_bump_potential(ctx.system, c.potential_value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else {
    throw ConfigError("unknown potential '" + c.potential_name +
                      "'; available: zero constant coordinate cylinder sink_bump");
  }

  if (c.method == "symbolic" && !ctx.system.symbolic)
    throw ConfigError("orbits.method=symbolic but system '" + c.system_name +
                      "' has no symbolic model");
  ctx.method = (c.method == "symbolic" || (c.method == "auto" && ctx.system.symbolic))
                   ? EnumMethod::Symbolic
                   : EnumMethod::Newton;

  SeedGrid grid;
  grid.per_axis = c.seed_resolution > 0 ? c.seed_resolution
                                        : (ctx.system.dim >= 3 ? 12 : 200);
  if (c.kcap_override) ctx.kcap.override_cap = *c.kcap_override;
  ctx.db = std::make_unique<OrbitDatabase>(ctx.system, ctx.method, grid, c.threads);
  return ctx;
}

void require_seed(const ExperimentConfig& c, const std::string& command) {
  if (!c.seed)
    throw ConfigError("missing required field 'seed' for command " + command);
}

std::string pressure_csv(const PressureSeries& s) {
  std::string out = "n,Q,logQ_over_n,count,fallback\n";
  for (const auto& r : s.rows)
    out += std::to_string(r.n) + "," + format_sig12(r.q) + "," +
           format_sig12(r.log_q_over_n) + "," + std::to_string(r.count) + "," +
           (r.fallback ? "1" : "0") + "\n";
  return out;
}

json estimate_json(const GrowthEstimate& e) {
  return json{{"estimate", num(e.estimate)},
              {"tail_max", num(e.tail_max)},
              {"method", e.method},
              {"window", {e.window.lo, e.window.hi}},
              {"slope_stderr", num(e.slope_stderr)},
              {"max_deviation", num(e.max_deviation)},
              {"any_fallback", e.any_fallback},
              {"all_fallback", e.all_fallback}};
}

json checks_json(const std::vector<LedgerCheck>& checks) {
  json a = json::array();
  for (const auto& c : checks)
    a.push_back({{"name", c.name}, {"pass", c.pass}, {"details", c.details}});
  return a;
}

ReportBundle finish(ReportBundle bundle, const ExperimentConfig& c, json summary,
                    std::vector<LedgerCheck> checks) {
  bundle.config_hash = c.config_hash;
  bundle.canonical_config = c.canonical_json;
  summary["command"] = bundle.command;
  summary["config_hash"] = c.config_hash;
  json tables = json::array();
  for (const auto& [name, _] : bundle.csv_files) tables.push_back(name);
  summary["tables"] = tables;
  summary["checks"] = checks_json(checks);
  if (bundle.status_error) summary["status"] = *bundle.status_error;
  bundle.summary_json = summary.dump(2) + "\n";
  bundle.checks = std::move(checks);
  return bundle;
}

ReportBundle cmd_orbits(const ExperimentConfig& c) {
  ReportBundle bundle;
  bundle.command = "orbits";
  RunContext ctx = make_context(c);
  for (int n = c.window.lo; n <= c.window.hi; ++n) ctx.db->ensure(n);

  const int d = ctx.system.dim;
  std::string csv = "period";
  for (int a = 0; a < d; ++a) csv += ",x" + std::to_string(a);
  for (int a = 1; a <= d; ++a) csv += ",lambda_" + std::to_string(a);
  csv += ",saddle";
  for (size_t ai = 0; ai < c.alphas.size(); ++ai)
    csv += ",cmax_a" + std::to_string(ai);
  csv += ",residual\n";

  auto orbits = ctx.db->all_orbits();
  std::sort(orbits.begin(), orbits.end(), [](const PeriodicOrbit* a, const PeriodicOrbit* b) {
    if (a->period != b->period) return a->period < b->period;
    return lex_less(a->points[0].x, b->points[0].x);
  });
  for (const auto* o : orbits) {
    csv += std::to_string(o->period);
    for (int a = 0; a < d; ++a) csv += "," + format_sig12(o->points[0].x[a]);
    for (int a = 0; a < d; ++a) csv += "," + format_sig12(o->exponents[a]);
    csv += std::string(",") + (o->saddle ? "1" : "0");
    for (double alpha : c.alphas)
      csv += "," + format_sig12(ctx.db->cmax(*o, alpha, ctx.kcap));
    csv += "," + format_sig12(o->residual) + "\n";
  }
  bundle.csv_files.emplace_back("orbits.csv", csv);

  json counts = json::object();
  for (int n = c.window.lo; n <= c.window.hi; ++n)
    counts[std::to_string(n)] = ctx.db->point_count(n);
  const auto& dg = ctx.db->diagnostics();
  json summary{{"system", c.system_name},
               {"orbit_count", orbits.size()},
               {"fixed_point_counts", counts},
               {"diagnostics",
                {{"seeds_total", dg.seeds_total},
                 {"converged", dg.converged},
                 {"dropped", dg.dropped},
                 {"off_itinerary", dg.off_itinerary},
                 {"degenerate", dg.degenerate},
                 {"duplicates", dg.duplicates}}}};
  return finish(std::move(bundle), c, std::move(summary), {});
}

ReportBundle cmd_pressure(const ExperimentConfig& c) {
  ReportBundle bundle;
  bundle.command = "pressure";
  RunContext ctx = make_context(c);
  double fallback_min = grid_min_potential(ctx.system, ctx.phi, c.grid_resolution);

  json limits = json::array();
  json per_c = json::array();
  std::vector<LedgerCheck> checks;
  bool all_no_saddles = true;
  for (size_t ai = 0; ai < c.alphas.size(); ++ai) {
    auto lim = p_sp_limit(*ctx.db, ctx.phi, c.alphas[ai], c.cs, c.window,
                          fallback_min, ctx.kcap);
    all_no_saddles = all_no_saddles && lim.no_saddles;
    for (size_t ci = 0; ci < c.cs.size(); ++ci) {
      std::string name = "pressure_a" + std::to_string(ai) + "_c" + std::to_string(ci) + ".csv";
      bundle.csv_files.emplace_back(name, pressure_csv(lim.series_per_c[ci]));
      json e = estimate_json(lim.per_c[ci]);
      e["alpha"] = num(c.alphas[ai]);
      e["c"] = num(c.cs[ci]);
      e["series_csv"] = name;
      per_c.push_back(e);
    }
    json l = estimate_json(lim.limit);
    l["alpha"] = num(c.alphas[ai]);
    l["monotone_ok"] = lim.monotone_ok;
    l["violations"] = lim.violations;
    l["no_saddles"] = lim.no_saddles;
    limits.push_back(l);
    checks.push_back({"c_monotonicity_alpha" + std::to_string(ai), lim.monotone_ok,
                      "estimates nondecreasing along the c schedule"});

    if (c.beta) {
      for (size_t ci = 0; ci < c.cs.size(); ++ci) {
        auto banded = p_sp_banded(*ctx.db, ctx.phi, c.alphas[ai], *c.beta, c.cs[ci],
                                  c.window, fallback_min, ctx.kcap);
        std::string name =
            "banded_a" + std::to_string(ai) + "_c" + std::to_string(ci) + ".csv";
        bundle.csv_files.emplace_back(name, pressure_csv(banded.series));
      }
    }
  }
  if (all_no_saddles)
    bundle.status_error = "no saddles at this alpha";

  auto gap = gap_estimate(*ctx.db, ctx.phi, c.window, fallback_min);
  json summary{{"system", c.system_name},
               {"potential", ctx.phi.name},
               {"alphas", num_list(c.alphas)},
               {"cs", num_list(c.cs)},
               {"window", {c.window.lo, c.window.hi}},
               {"fallback_min_phi", num(fallback_min)},
               {"limits", limits},
               {"per_c", per_c},
               {"gap_estimate",
                {{"p_top", num(gap.p_top)},
                 {"max_orbit_average", num(gap.max_orbit_average)},
                 {"gap", num(gap.gap)}}}};
  if (c.beta) summary["beta"] = num(*c.beta);
  return finish(std::move(bundle), c, std::move(summary), std::move(checks));
}

ReportBundle cmd_separated(const ExperimentConfig& c) {
  ReportBundle bundle;
  bundle.command = "separated";
  if (c.epsilons.empty())
    throw ConfigError("missing required field 'separated.epsilons' for command separated");
  if (c.separated_use_cloud) require_seed(c, "separated");
  RunContext ctx = make_context(c);

  SeparatedGrid grid;
  grid.use_cloud = c.separated_use_cloud;
  grid.spacing_factor = c.spacing_factor;
  grid.cloud_samples = c.separated_cloud_samples;
  grid.cloud_depth = c.separated_cloud_depth;
  grid.seed = c.seed.value_or(1);

  std::string csv = "epsilon,n,grid_points,survivors,selected,estimate\n";
  json per_eps = json::array();
  for (double eps : c.epsilons) {
    std::vector<double> ns, logsums;
    double last = 0.0;
    for (int n = c.window.lo; n <= c.window.hi; ++n) {
      auto r = separated_pressure(ctx.system, ctx.phi, n, eps, grid);
      csv += format_sig12(eps) + "," + std::to_string(n) + "," +
             std::to_string(r.grid_points) + "," + std::to_string(r.survivors) + "," +
             std::to_string(r.selected) + "," + format_sig12(r.estimate) + "\n";
      ns.push_back(n);
      logsums.push_back(r.estimate * n);
      last = r.estimate;
    }
    // window slope of log sums; removes the n-independent packing constant
    double xb = 0, yb = 0;
    for (size_t i = 0; i < ns.size(); ++i) { xb += ns[i]; yb += logsums[i]; }
    xb /= ns.size();
    yb /= ns.size();
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < ns.size(); ++i) {
      sxx += (ns[i] - xb) * (ns[i] - xb);
      sxy += (ns[i] - xb) * (logsums[i] - yb);
    }
    per_eps.push_back({{"epsilon", num(eps)},
                       {"estimate_at_hi", num(last)},
                       {"window_slope", num(sxx > 0 ? sxy / sxx : 0.0)}});
  }
  bundle.csv_files.emplace_back("separated.csv", csv);
  json summary{{"system", c.system_name},
               {"potential", ctx.phi.name},
               {"window", {c.window.lo, c.window.hi}},
               {"per_epsilon", per_eps}};
  return finish(std::move(bundle), c, std::move(summary), {});
}

ReportBundle cmd_volume(const ExperimentConfig& c) {
  ReportBundle bundle;
  bundle.command = "volume";
  RunContext ctx = make_context(c);

  std::vector<LedgerCheck> checks;
  json summary{{"system", c.system_name},
               {"window", {c.window.lo, c.window.hi}},
               {"alphas", num_list(c.volume_alphas)},
               {"cs", num_list(c.volume_cs)}};
  try {
    auto res = volume_pressure(*ctx.db, c.volume_alphas, c.volume_cs, c.window, ctx.kcap);
    std::string csv = "alpha,c,estimate,slope_stderr,tail_max,all_fallback\n";
    for (const auto& cell : res.grid)
      csv += format_sig12(cell.alpha) + "," + format_sig12(cell.c) + "," +
             format_sig12(cell.estimate.estimate) + "," +
             format_sig12(cell.estimate.slope_stderr) + "," +
             format_sig12(cell.estimate.tail_max) + "," +
             (cell.estimate.all_fallback ? "1" : "0") + "\n";
    bundle.csv_files.emplace_back("volume_grid.csv", csv);

    summary["estimate"] = num(res.estimate);
    json per_alpha = json::array();
    for (size_t i = 0; i < res.per_alpha_limits.size(); ++i) {
      json e = estimate_json(res.per_alpha_limits[i]);
      e["alpha"] = num(c.volume_alphas[i]);
      per_alpha.push_back(e);
    }
    summary["per_alpha_limits"] = per_alpha;
    if (res.oracle_sup) {
      summary["oracle_sup"] = num(*res.oracle_sup);
      bool pass = res.estimate <= *res.oracle_sup + 0.05;
      checks.push_back({"volume_variational_inequality", pass,
                        "P_SP(phi_u)=" + format_sig12(res.estimate) +
                            " <= sup(h+int phi_u)=" + format_sig12(*res.oracle_sup) +
                            " + 0.05"});
    }
  } catch (const StatusError& e) {
    bundle.status_error = e.what();
  }
  return finish(std::move(bundle), c, std::move(summary), std::move(checks));
}

ReportBundle cmd_escape(const ExperimentConfig& c) {
  ReportBundle bundle;
  bundle.command = "escape";
  require_seed(c, "escape");
  if (c.escape_samples < 10000)
    throw ConfigError("config field 'escape.samples': at least 1e4 samples required");
  RunContext ctx = make_context(c);

  RegionSpec V = c.region_box ? RegionSpec::of_box(*c.region_box)
                              : RegionSpec::full(ctx.system);
  auto est = escape_rate(ctx.system, V, c.escape_n_max, c.escape_samples, *c.seed,
                         {c.escape_window.lo, c.escape_window.hi}, c.threads);

  std::string csv = "n,survivors,p_n\n";
  for (int n = 1; n <= est.n_max; ++n)
    csv += std::to_string(n) + "," + std::to_string(est.survivors[n - 1]) + "," +
           format_sig12(est.p[n - 1]) + "\n";
  bundle.csv_files.emplace_back("escape.csv", csv);

  json summary{{"system", c.system_name},
               {"samples", est.samples},
               {"seed", est.seed},
               {"region_volume", num(est.region_volume)},
               {"rate_upper_surrogate", num(est.rate_regression)},
               {"rate_lower_surrogate", num(est.rate_min_step)},
               {"slope_stderr", num(est.slope_stderr)},
               {"ci_halfwidth", num(est.ci_halfwidth)},
               {"window", {est.window.first, est.window.second}},
               {"truncated", est.truncated},
               {"truncated_at", est.truncated_at}};
  return finish(std::move(bundle), c, std::move(summary), {});
}

std::vector<Vec> make_cloud(const ExperimentConfig& c, RunContext& ctx) {
  if (c.cloud_source == "survivor") {
    require_seed(c, "boxdim");
    return survivor_cloud(ctx.system, c.cloud_depth, c.cloud_samples, *c.seed,
                          c.cloud_two_sided);
  }
  if (c.cloud_source == "periodic") {
    std::vector<Vec> cloud;
    for (int n = c.window.lo; n <= c.window.hi; ++n) ctx.db->ensure(n);
    for (const auto* o : ctx.db->all_orbits())
      for (const auto& p : o->points) cloud.push_back(p.x);
    return cloud;
  }
  // forward orbit from the region center
  Vec mid = 0.5 * (ctx.system.domain.lo + ctx.system.domain.hi);
  return orbit_cloud(ctx.system, ctx.system.make_point(mid), c.cloud_samples);
}

ReportBundle cmd_boxdim(const ExperimentConfig& c) {
  ReportBundle bundle;
  bundle.command = "boxdim";
  if (c.scales.empty())
    throw ConfigError("missing required field 'boxdim.scales' for command boxdim");
  RunContext ctx = make_context(c);
  auto cloud = make_cloud(c, ctx);
  auto est = box_dimension(cloud, c.scales, c.cloud_source);

  std::string csv = "rho,N\n";
  for (size_t i = 0; i < est.scales.size(); ++i)
    csv += format_sig12(est.scales[i]) + "," + std::to_string(est.counts[i]) + "\n";
  bundle.csv_files.emplace_back("boxdim.csv", csv);

  json summary{{"system", c.system_name},
               {"estimate", num(est.estimate)},
               {"slope_stderr", num(est.slope_stderr)},
               {"provenance", est.provenance},
               {"cloud_points", cloud.size()}};
  return finish(std::move(bundle), c, std::move(summary), {});
}

ReportBundle cmd_bound(const ExperimentConfig& c) {
  ReportBundle bundle;
  bundle.command = "bound";
  require_seed(c, "bound");
  if (c.escape_samples < 10000)
    throw ConfigError("config field 'escape.samples': at least 1e4 samples required");
  RunContext ctx = make_context(c);

  RegionSpec V = c.region_box ? RegionSpec::of_box(*c.region_box)
                              : RegionSpec::full(ctx.system);
  auto escape = escape_rate(ctx.system, V, c.escape_n_max, c.escape_samples, *c.seed,
                            {c.escape_window.lo, c.escape_window.hi}, c.threads);
  auto expansion = expansion_rate(ctx.system, std::max(32, c.grid_resolution),
                                  {c.window.lo, c.window.hi});
  std::optional<BoxDimEstimate> measured;
  if (!c.scales.empty()) {
    auto cloud = make_cloud(c, ctx);
    measured = box_dimension(cloud, c.scales, c.cloud_source);
  }
  auto bound = dimension_bound(ctx.system, escape, expansion, measured);

  std::string esc_csv = "n,survivors,p_n\n";
  for (int n = 1; n <= escape.n_max; ++n)
    esc_csv += std::to_string(n) + "," + std::to_string(escape.survivors[n - 1]) + "," +
               format_sig12(escape.p[n - 1]) + "\n";
  bundle.csv_files.emplace_back("escape.csv", esc_csv);
  std::string exp_csv = "n,a_n\n";
  for (size_t i = 0; i < expansion.ns.size(); ++i)
    exp_csv += std::to_string(expansion.ns[i]) + "," + format_sig12(expansion.a[i]) + "\n";
  bundle.csv_files.emplace_back("expansion.csv", exp_csv);
  if (measured) {
    std::string bx = "rho,N\n";
    for (size_t i = 0; i < measured->scales.size(); ++i)
      bx += format_sig12(measured->scales[i]) + "," +
            std::to_string(measured->counts[i]) + "\n";
    bundle.csv_files.emplace_back("boxdim.csv", bx);
  }

  std::vector<LedgerCheck> checks;
  json summary{{"system", c.system_name},
               {"escape_rate", num(bound.escape_rate_used)},
               {"expansion_rate", num(bound.expansion_used)},
               {"status", bound.status}};
  if (bound.status != "ok") {
    bundle.status_error = bound.status;
  } else {
    summary["bound"] = num(bound.bound);
    if (bound.measured_dimension) {
      summary["measured_dimension"] = num(*bound.measured_dimension);
      checks.push_back({"dim_bound_check", *bound.pass,
                        "bound=" + format_sig12(bound.bound) +
                            " measured=" + format_sig12(*bound.measured_dimension)});
    }
  }
  return finish(std::move(bundle), c, std::move(summary), std::move(checks));
}

ReportBundle cmd_oracle(const ExperimentConfig& c) {
  ReportBundle bundle;
  bundle.command = "oracle";
  if (!c.shift_transitions)
    throw ConfigError("missing required field 'oracle.transitions' for command oracle");
  WeightedShift shift;
  shift.symbols = static_cast<int>(c.shift_transitions->rows());
  shift.transitions = *c.shift_transitions;
  shift.weights = c.shift_weights;

  double pressure = transfer_pressure(shift);  // domain_error if reducible
  auto mu = markov_equilibrium(shift);

  std::string csv = "n,trace,log_trace\n";
  for (int n = 1; n <= c.window.hi; ++n)
    csv += std::to_string(n) + "," + format_sig12(trace_periodic_sum(shift, n)) + "," +
           format_sig12(log_trace_periodic_sum(shift, n)) + "\n";
  bundle.csv_files.emplace_back("oracle_trace.csv", csv);

  json pi = json::array(), kernel = json::array();
  for (int i = 0; i < shift.symbols; ++i) {
    pi.push_back(num(mu.stationary[i]));
    json row = json::array();
    for (int k = 0; k < shift.symbols; ++k) row.push_back(num(mu.kernel(i, k)));
    kernel.push_back(row);
  }
  double free_energy = mu.entropy + mu.potential_integral;
  std::vector<LedgerCheck> checks{
      {"variational_identity", std::abs(free_energy - pressure) <= 1e-9,
       "h+int phi=" + format_sig12(free_energy) + " pressure=" + format_sig12(pressure)}};
  json summary{{"pressure", num(pressure)},
               {"entropy", num(mu.entropy)},
               {"potential_integral", num(mu.potential_integral)},
               {"free_energy", num(free_energy)},
               {"stationary", pi},
               {"kernel", kernel}};
  return finish(std::move(bundle), c, std::move(summary), std::move(checks));
}

}  // namespace

ReportBundle run_experiment(const ExperimentConfig& config, const std::string& command) {
  if (command == "orbits") return cmd_orbits(config);
  if (command == "pressure") return cmd_pressure(config);
  if (command == "separated") return cmd_separated(config);
  if (command == "volume") return cmd_volume(config);
  if (command == "escape") return cmd_escape(config);
  if (command == "boxdim") return cmd_boxdim(config);
  if (command == "bound") return cmd_bound(config);
  if (command == "oracle") return cmd_oracle(config);
  std::string names;
  for (const char* n : kCommands) names += std::string(" ") + n;
  throw ConfigError("unknown command '" + command + "'; available:" + names);
}

std::vector<std::string> emit_report(const ReportBundle& bundle,
                                     const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory: " + out_dir);

  auto write = [&](const std::string& name, const std::string& content) {
    fs::path p = fs::path(out_dir) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << content;
    if (!f) throw std::runtime_error("short write on " + p.string());
    return p.string();
  };

  std::vector<std::string> paths;
  paths.push_back(write("summary.json", bundle.summary_json));
  for (const auto& [name, content] : bundle.csv_files)
    paths.push_back(write(name, content));

  // SOURCE_DATE_EPOCH pins the timestamp for reproducible reruns.
  std::time_t now;
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"))
    now = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
  else
    now = std::time(nullptr);
  char stamp[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);

  json files = json::array();
  files.push_back("summary.json");
  for (const auto& [name, _] : bundle.csv_files) files.push_back(name);
  json manifest{{"tool", kToolName},
                {"version", kToolVersion},
                {"command", bundle.command},
                {"created_utc", stamp},
                {"config_hash", bundle.config_hash},
                {"config", json::parse(bundle.canonical_config)},
                {"files", files}};
  paths.push_back(write("manifest.json", manifest.dump(2) + "\n"));
  return paths;
}

}  // namespace orbitherm
