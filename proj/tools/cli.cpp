#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "lgm/circle_cov.hpp"
#include "lgm/error.hpp"
#include "lgm/inference.hpp"
#include "lgm/io.hpp"
#include "lgm/moments.hpp"
#include "lgm/parallel.hpp"
#include "lgm/random.hpp"

namespace lgm::cli {

using nlohmann::json;

namespace {

// --- schema ----------------------------------------------------------------------------------------

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ConfigError(path + ": unknown key '" + key + "'");
}

const json& need(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError(path + ": missing key '" + key + "'");
  return obj.at(key);
}

double num(const json& obj, const std::string& path, const std::string& key) {
  const json& v = need(obj, path, key);
  if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return v.get<double>();
}

double num_or(const json& obj, const std::string& path, const std::string& key, double fallback) {
  return obj.contains(key) ? num(obj, path, key) : fallback;
}

std::string str(const json& obj, const std::string& path, const std::string& key) {
  const json& v = need(obj, path, key);
  if (!v.is_string()) throw ConfigError(path + "." + key + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) throw ConfigError(path + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

void validate_typed(const json& obj, const std::string& path, const std::map<std::string, std::set<std::string>>& types) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  const std::string type = str(obj, path, "type");
  const auto it = types.find(type);
  if (it == types.end()) {
    std::string known;
    for (const auto& [k, v] : types) known += (known.empty() ? "" : ", ") + k;
    throw ConfigError(path + ".type: unknown value '" + type + "' (expected one of " + known + ")");
  }
  std::set<std::string> allowed = it->second;
  allowed.insert("type");
  check_keys(obj, path, allowed);
}

const std::map<std::string, std::set<std::string>> kDriftTypes = {
    {"constant", {"c"}}, {"table", {"knots", "values", "step"}}, {"gompertz", {"kappa0", "eta", "gamma"}}};
const std::map<std::string, std::set<std::string>> kWeightTypes = {
    {"constant", {"c"}}, {"fourier", {"a"}}, {"pth-order", {"p", "alpha", "beta", "k_max"}}, {"tumour", {}}};
const std::map<std::string, std::set<std::string>> kSpotTypes = {{"gaussian", {"drift", "variance"}},
                                                                 {"poisson", {}},
                                                                 {"gamma", {"shape", "rate"}},
                                                                 {"inverse-gaussian", {"eta", "gamma"}}};
const std::map<std::string, std::set<std::string>> kControlTypes = {
    {"lebesgue", {}}, {"constant", {"c"}}, {"linear", {"a"}}, {"exponential", {"a", "b"}}, {"power", {"a", "alpha"}}};
const std::map<std::string, std::set<std::string>> kAmbitTypes = {{"full-angle", {"lag"}},
                                                                  {"rectangular", {"half_width", "lag", "lag_factor"}},
                                                                  {"wedge", {"theta", "lag"}},
                                                                  {"cosine-boundary", {"c"}},
                                                                  {"tumour", {"table"}}};
const std::map<std::string, std::set<std::string>> kMultiplierTypes = {{"exp-angle", {"scale"}}};

ModelKind parse_kind(const std::string& text, const std::string& path) {
  for (ModelKind k : {ModelKind::RateLinear, ModelKind::DirectRadial, ModelKind::DirectScaled, ModelKind::RateOfLog,
                      ModelKind::ExponentialTumour})
    if (text == to_string(k)) return k;
  throw ConfigError(path + ": unknown model kind '" + text +
                    "' (expected rate-linear, direct, direct-scaled, rate-of-log or exponential-tumour)");
}

TumourTable parse_table(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path + ": expected rows [t, lag, t0, alpha, beta, phi0]");
  std::vector<TumourRow> rows;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::vector<double> r = numbers(v[i], path + "[" + std::to_string(i) + "]");
    if (r.size() != 6) throw ConfigError(path + "[" + std::to_string(i) + "]: expected 6 numbers");
    rows.push_back({r[0], r[1], r[2], r[3], r[4], r[5]});
  }
  return TumourTable(std::move(rows));
}

json table_json(const TumourTable& table) {
  json rows = json::array();
  for (const TumourRow& r : table.rows()) rows.push_back({r.t, r.lag, r.t0, r.alpha, r.beta, r.phi0});
  return rows;
}

// Like merge_patch, except that a typed object whose "type" changes is replaced rather than merged.
void merge_config(json& base, const json& patch) {
  if (!patch.is_object() || !base.is_object() ||
      (patch.contains("type") && base.contains("type") && patch["type"] != base["type"])) {
    base = patch;
    return;
  }
  for (const auto& [key, value] : patch.items()) {
    if (value.is_null()) base.erase(key);
    else if (base.contains(key)) merge_config(base[key], value);
    else base[key] = value;
  }
}

}  // namespace

// --- presets ---------------------------------------------------------------------------------------

json preset_config(const std::string& id) {
  const GridSpec grid = preset_grid(id);
  json config;
  config["grid"] = {{"n_angles", grid.n_angles()}, {"dt", grid.dt()}, {"t_min", grid.t_min()}, {"t_max", grid.t_max()}};
  config["times"] = preset_times(id);
  json ex4 = {{"kind", "direct"},
              {"drift", {{"type", "table"}, {"knots", {20.0, 45.0, 80.0}}, {"values", {16.0, 24.0, 32.0}}}},
              {"weight", {{"type", "constant"}, {"c", 1.0}}},
              {"basis", {{"type", "gaussian"}, {"drift", 0.0}, {"variance", 1.0}}},
              {"control", {{"type", "lebesgue"}}},
              {"ambit", {{"type", "rectangular"}, {"half_width", kPi / 5.0}, {"lag_factor", 0.2}}}};
  if (id == "ex3") {
    config["model"] = {{"kind", "rate-linear"},
                       {"drift", {{"type", "constant"}, {"c", 0.0}}},
                       {"weight", {{"type", "constant"}, {"c", 1.0}}},
                       {"basis", {{"type", "poisson"}}},
                       {"control", {{"type", "linear"}, {"a", 10.0}}},
                       {"ambit", {{"type", "wedge"}, {"theta", 0.5}, {"lag", 1.0}}}};
  } else if (id == "ex4") {
    config["model"] = ex4;
  } else if (id == "ex5") {
    const GrowthModelSpec s = example_preset("ex5");
    const auto& drift = std::get<TableDrift>(s.drift.kind());
    const auto& spot = std::get<GammaSpot>(s.basis.spot);
    std::vector<double> values(drift.values.data(), drift.values.data() + drift.values.size());
    config["model"] = ex4;
    config["model"]["drift"] = {{"type", "table"}, {"knots", drift.knots}, {"values", values}};
    config["model"]["basis"] = {{"type", "gamma"}, {"shape", spot.shape}, {"rate", spot.rate}};
  } else if (id == "ex6") {
    config["model"] = ex4;
    config["model"]["kind"] = "direct-scaled";
    config["model"]["multiplier"] = {{"type", "exp-angle"}, {"scale", 0.35}};
  } else if (id == "tumour") {
    const GrowthModelSpec s = example_preset("tumour");
    const json table = table_json(std::get<TumourSet>(s.ambit).table);
    config["model"] = {{"kind", "exponential-tumour"},
                       {"drift", {{"type", "constant"}, {"c", 0.0}}},
                       {"weight", {{"type", "tumour"}}},
                       {"basis", {{"type", "gaussian"}, {"drift", 0.0}, {"variance", 1.0}}},
                       {"control", {{"type", "lebesgue"}}},
                       {"ambit", {{"type", "tumour"}, {"table", table}}}};
  } else {
    throw ConfigError("unknown preset '" + id + "' (expected ex3, ex4, ex5, ex6 or tumour)");
  }
  return config;
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects path=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &config;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].empty()) throw ConfigError("--set: empty path component in '" + path + "'");
    if (!node->is_object()) *node = json::object();
    node = &(*node)[parts[i]];
  }
  *node = value;
}

void validate_config(const json& config) {
  check_keys(config, "config", {"preset", "model", "grid", "times", "seed", "replicates", "threads", "out_dir", "cov",
                                "mc_verify", "fit", "moments"});
  if (config.contains("model")) {
    const json& m = config["model"];
    check_keys(m, "model",
               {"kind", "drift", "weight", "basis", "control", "ambit", "r0", "multiplier", "use_shortcut"});
    if (m.contains("drift")) validate_typed(m["drift"], "model.drift", kDriftTypes);
    if (m.contains("weight")) validate_typed(m["weight"], "model.weight", kWeightTypes);
    if (m.contains("basis")) validate_typed(m["basis"], "model.basis", kSpotTypes);
    if (m.contains("control")) validate_typed(m["control"], "model.control", kControlTypes);
    if (m.contains("ambit")) validate_typed(m["ambit"], "model.ambit", kAmbitTypes);
    if (m.contains("multiplier")) validate_typed(m["multiplier"], "model.multiplier", kMultiplierTypes);
  }
  if (config.contains("grid")) check_keys(config["grid"], "grid", {"n_angles", "dt", "t_min", "t_max"});
  if (config.contains("cov")) check_keys(config["cov"], "cov", {"times", "lags"});
  if (config.contains("moments")) check_keys(config["moments"], "moments", {"times", "n_lags"});
  if (config.contains("mc_verify")) {
    check_keys(config["mc_verify"], "mc_verify", {"queries"});
    const json& q = config["mc_verify"]["queries"];
    if (!q.is_array()) throw ConfigError("mc_verify.queries: expected an array");
    for (std::size_t i = 0; i < q.size(); ++i)
      check_keys(q[i], "mc_verify.queries[" + std::to_string(i) + "]", {"kind", "points", "lambda", "label"});
  }
  if (config.contains("fit")) {
    const json& f = config["fit"];
    check_keys(f, "fit", {"dataset", "family", "starts", "max_iterations", "n_lags", "k_lo", "k_hi", "params"});
    if (f.contains("params")) {
      check_keys(f["params"], "fit.params", {"sigma2", "Theta", "scale"});
      for (const auto& [name, p] : f["params"].items()) check_keys(p, "fit.params." + name, {"lo", "hi", "start"});
    }
  }
}

std::string config_hash(const json& config) { return fnv1a_hex(config.dump()); }

// --- model building --------------------------------------------------------------------------------

GridSpec build_grid(const json& config) {
  const json& g = need(config, "config", "grid");
  const double n = num(g, "grid", "n_angles");
  if (n < 2 || n != std::floor(n)) throw ConfigError("grid.n_angles: expected an integer >= 2");
  try {
    return GridSpec(static_cast<int>(n), num(g, "grid", "dt"), num_or(g, "grid", "t_min", 0.0), num(g, "grid", "t_max"));
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

std::vector<double> build_times(const json& config) {
  std::vector<double> t = numbers(need(config, "config", "times"), "times");
  if (t.empty()) throw ConfigError("times: expected at least one time");
  return t;
}

GrowthModelSpec build_spec(const json& config) {
  const json& m = need(config, "config", "model");
  GrowthModelSpec s;
  s.kind = parse_kind(str(m, "model", "kind"), "model.kind");

  const json& control = need(m, "model", "control");
  const std::string ctype = str(control, "model.control", "type");
  if (ctype == "lebesgue") s.basis.control = ControlMeasure::lebesgue();
  else if (ctype == "constant") s.basis.control = ControlMeasure::constant(num(control, "model.control", "c"));
  else if (ctype == "linear") s.basis.control = ControlMeasure::linear(num(control, "model.control", "a"));
  else if (ctype == "exponential")
    s.basis.control = ControlMeasure::exponential(num(control, "model.control", "a"), num(control, "model.control", "b"));
  else s.basis.control = ControlMeasure::power(num(control, "model.control", "a"), num(control, "model.control", "alpha"));

  const json& basis = need(m, "model", "basis");
  const std::string btype = str(basis, "model.basis", "type");
  if (btype == "gaussian")
    s.basis.spot = GaussianSpot{num_or(basis, "model.basis", "drift", 0.0), num_or(basis, "model.basis", "variance", 1.0)};
  else if (btype == "poisson") s.basis.spot = PoissonSpot{};
  else if (btype == "gamma") s.basis.spot = GammaSpot{num(basis, "model.basis", "shape"), num(basis, "model.basis", "rate")};
  else s.basis.spot = InverseGaussianSpot{num(basis, "model.basis", "eta"), num(basis, "model.basis", "gamma")};
  try {
    validate(s.basis.spot);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("model.basis: ") + e.what());
  }

  const json& ambit = need(m, "model", "ambit");
  const std::string atype = str(ambit, "model.ambit", "type");
  std::optional<TumourTable> table;
  TimeFunction lag = TimeFunction::constant(0.0);
  if (atype == "full-angle") {
    lag = TimeFunction::constant(num(ambit, "model.ambit", "lag"));
    s.ambit = FullAngle{lag};
  } else if (atype == "rectangular") {
    if (ambit.contains("lag") == ambit.contains("lag_factor"))
      throw ConfigError("model.ambit: give exactly one of 'lag' (constant) or 'lag_factor' (T(t) = factor * t)");
    lag = ambit.contains("lag") ? TimeFunction::constant(num(ambit, "model.ambit", "lag"))
                                : TimeFunction::proportional(num(ambit, "model.ambit", "lag_factor"));
    s.ambit = Rectangular{TimeFunction::constant(num(ambit, "model.ambit", "half_width")), lag};
  } else if (atype == "wedge") {
    s.ambit = WedgeOverS{num(ambit, "model.ambit", "theta"), num(ambit, "model.ambit", "lag")};
  } else if (atype == "cosine-boundary") {
    s.ambit = cosine_boundary(num(ambit, "model.ambit", "c"));
  } else {
    table = parse_table(need(ambit, "model.ambit", "table"), "model.ambit.table");
    s.ambit = TumourSet{*table};
  }

  const json& weight = need(m, "model", "weight");
  const std::string wtype = str(weight, "model.weight", "type");
  if (wtype == "constant") {
    s.weight = ConstantWeight{num(weight, "model.weight", "c")};
  } else if (wtype == "fourier") {
    s.weight = FourierWeight::constant(numbers(need(weight, "model.weight", "a"), "model.weight.a"));
  } else if (wtype == "pth-order") {
    if (atype != "full-angle") throw ConfigError("model.weight: pth-order weights need a full-angle ambit");
    PthOrderParams p;
    p.p = static_cast<int>(num_or(weight, "model.weight", "p", 1));
    p.alpha = num(weight, "model.weight", "alpha");
    p.beta = num(weight, "model.weight", "beta");
    s.weight = pth_order_weight(p, static_cast<int>(num(weight, "model.weight", "k_max")), s.basis.control, lag);
  } else {
    if (!table) throw ConfigError("model.weight: the tumour weight needs a tumour ambit");
    s.weight = TumourWeight{*table};
  }

  if (m.contains("drift")) {
    const json& drift = m["drift"];
    const std::string dtype = str(drift, "model.drift", "type");
    if (dtype == "constant") {
      s.drift = ConstantDrift{num(drift, "model.drift", "c")};
    } else if (dtype == "table") {
      const auto knots = numbers(need(drift, "model.drift", "knots"), "model.drift.knots");
      const auto values = numbers(need(drift, "model.drift", "values"), "model.drift.values");
      if (knots.size() != values.size() || knots.empty())
        throw ConfigError("model.drift: knots and values must be nonempty and of equal length");
      const bool step = drift.contains("step") && drift["step"].is_boolean() && drift["step"].get<bool>();
      s.drift = DriftFunction::table(knots, values, step);
    } else {
      s.drift = GompertzDrift{num(drift, "model.drift", "kappa0"), num(drift, "model.drift", "eta"),
                              num(drift, "model.drift", "gamma")};
    }
  }
  if (m.contains("r0")) {
    const double r0 = num(m, "model", "r0");
    s.r0 = [r0](double) { return r0; };
  }
  if (m.contains("multiplier")) {
    const double scale = num(m["multiplier"], "model.multiplier", "scale");
    s.multiplier = [scale](double phi) { return scale * std::exp((kPi - std::abs(wrap_angle(phi))) / kPi); };
  }
  if (m.contains("use_shortcut")) {
    if (!m["use_shortcut"].is_boolean()) throw ConfigError("model.use_shortcut: expected true or false");
    s.use_shortcut = m["use_shortcut"].get<bool>();
  }
  if (config.contains("preset") && config["preset"].is_string()) s.tag = config["preset"].get<std::string>();
  return s;
}

// --- commands --------------------------------------------------------------------------------------

namespace {

struct Context {
  json config;
  std::string hash;
  std::uint64_t seed = 1;
  int replicates = 0;
  int threads = 0;
  MomentMode mode = MomentMode::Mesh;
  std::filesystem::path out_dir = ".";
  std::ostream* out = nullptr;
};

std::ofstream open_output(const Context& ctx, const std::string& name) {
  std::filesystem::create_directories(ctx.out_dir);
  const auto path = ctx.out_dir / name;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  *ctx.out << "wrote " << path.string() << "\n";
  return os;
}

int cmd_simulate(const Context& ctx) {
  const GrowthModelSpec spec = build_spec(ctx.config);
  const GridSpec grid = build_grid(ctx.config);
  const std::vector<double> times = build_times(ctx.config);
  const int reps = ctx.replicates > 0 ? ctx.replicates : 1;
  const GrowthSimulator sim(spec, grid, times);
  std::vector<GrowthHistory> histories(static_cast<std::size_t>(reps));
  parallel_for(reps, ctx.threads, [&](int r) {
    histories[static_cast<std::size_t>(r)] = sim.simulate(reps == 1 ? ctx.seed : derive_seed(ctx.seed, static_cast<std::uint64_t>(r)));
  });
  for (GrowthHistory& h : histories) h.spec_hash = ctx.hash;
  {
    std::ofstream os = open_output(ctx, "history.csv");
    write_history_csv(os, histories.front());
  }
  {
    std::ofstream os = open_output(ctx, "polylines.csv");
    write_polylines_csv(os, histories.front());
  }
  {
    std::ofstream os = open_output(ctx, "profiles.csv");
    os << provenance_line(ctx.hash, ctx.seed) << "\n";
    write_profiles_csv(os, dataset_from_histories(histories));
  }
  return kOk;
}

int cmd_cov(const Context& ctx) {
  const GrowthModelSpec spec = build_spec(ctx.config);
  const json cov = ctx.config.value("cov", json::object());
  const std::vector<double> times = cov.contains("times") ? numbers(cov["times"], "cov.times") : build_times(ctx.config);
  std::vector<double> lags;
  if (cov.contains("lags")) {
    lags = numbers(cov["lags"], "cov.lags");
  } else {
    for (int i = 0; i < 16; ++i) lags.push_back(kPi * i / 15.0);
  }
  std::ofstream os = open_output(ctx, "cov.csv");
  os << provenance_line(ctx.hash, ctx.seed) << "\n";
  const auto* full = std::get_if<FullAngle>(&spec.ambit);
  const auto* fourier = std::get_if<FourierWeight>(&spec.weight.kind());
  if (full && fourier && spec.kind == ModelKind::DirectRadial && spec.basis.factorizable()) {
    const CircleCovModel model(*fourier, spec.basis.control, full->lag, spot_variance(spec.basis.spot));
    write_cov_table(os, model, times, lags);
    return kOk;
  }
  const MomentEngine engine(spec, build_grid(ctx.config), ctx.mode);
  os << "t1,t2,dphi,cov\n";
  for (double t1 : times)
    for (double t2 : times)
      for (double d : lags)
        os << format_double(t1) << ',' << format_double(t2) << ',' << format_double(d) << ','
           << format_double(engine.cov_linear({t1, 0.0}, {t2, d})) << '\n';
  return kOk;
}

std::vector<MomentQuery> build_queries(const Context& ctx, const GrowthModelSpec& spec) {
  std::vector<MomentQuery> out;
  if (ctx.config.contains("mc_verify")) {
    const json& q = ctx.config["mc_verify"]["queries"];
    for (std::size_t i = 0; i < q.size(); ++i) {
      const std::string path = "mc_verify.queries[" + std::to_string(i) + "]";
      const std::string kind = str(q[i], path, "kind");
      MomentQuery query;
      if (kind == "mean") query.kind = QueryKind::Mean;
      else if (kind == "variance") query.kind = QueryKind::Variance;
      else if (kind == "covariance") query.kind = QueryKind::Covariance;
      else if (kind == "relative-second-moment") query.kind = QueryKind::RelativeSecondMoment;
      else if (kind == "mixed-exponential") query.kind = QueryKind::MixedExponential;
      else throw ConfigError(path + ".kind: unknown query kind '" + kind + "'");
      const json& pts = need(q[i], path, "points");
      if (!pts.is_array()) throw ConfigError(path + ".points: expected [[t, phi], ...]");
      for (std::size_t j = 0; j < pts.size(); ++j) {
        const auto p = numbers(pts[j], path + ".points[" + std::to_string(j) + "]");
        if (p.size() != 2) throw ConfigError(path + ".points[" + std::to_string(j) + "]: expected [t, phi]");
        query.points.push_back({p[0], p[1]});
      }
      if (q[i].contains("lambda")) query.lambda = numbers(q[i]["lambda"], path + ".lambda");
      query.label = q[i].value("label", kind);
      out.push_back(std::move(query));
    }
    return out;
  }
  const std::vector<double> times = build_times(ctx.config);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    out.push_back({QueryKind::Mean, {{t, 0.0}}, {}, "mean t=" + format_double(t)});
    out.push_back({QueryKind::Variance, {{t, 0.0}}, {}, "variance t=" + format_double(t)});
    out.push_back({QueryKind::Covariance, {{t, 0.0}, {t, kPi / 10.0}}, {}, "cov lag pi/10 t=" + format_double(t)});
    if (i + 1 < times.size())
      out.push_back({QueryKind::Covariance, {{t, 0.0}, {times[i + 1], 0.0}}, {},
                     "cov t=" + format_double(t) + ",t=" + format_double(times[i + 1])});
  }
  (void)spec;
  return out;
}

int cmd_mc_verify(const Context& ctx) {
  const GrowthModelSpec spec = build_spec(ctx.config);
  const GridSpec grid = build_grid(ctx.config);
  const int reps = ctx.replicates > 0 ? ctx.replicates : 2000;
  const VerifyReport report = mc_verify(spec, grid, build_queries(ctx, spec), reps, ctx.seed, ctx.threads, ctx.mode);
  std::ofstream os = open_output(ctx, "mc_verify.csv");
  os << provenance_line(ctx.hash, ctx.seed) << "\n" << "kind,label,analytic,mc,se,z,flagged\n";
  int flagged = 0;
  for (const VerifyRecord& r : report.records) {
    os << to_string(r.query.kind) << ',' << r.query.label << ',' << format_double(r.analytic) << ','
       << format_double(r.mc) << ',' << format_double(r.se) << ',' << format_double(r.z) << ','
       << (r.flagged ? 1 : 0) << '\n';
    flagged += r.flagged ? 1 : 0;
  }
  *ctx.out << report.records.size() << " queries, " << flagged << " with |z| > 3 (" << reps << " replicates)\n";
  return flagged == 0 ? kOk : kVerificationFailure;
}

int cmd_moments(const Context& ctx) {
  const GrowthModelSpec spec = build_spec(ctx.config);
  const GridSpec grid = build_grid(ctx.config);
  const json mj = ctx.config.value("moments", json::object());
  const std::vector<double> times = mj.contains("times") ? numbers(mj["times"], "moments.times") : build_times(ctx.config);
  const int n_lags = static_cast<int>(num_or(mj, "moments", "n_lags", 16));
  const std::vector<int> steps = lag_ladder(grid.n_angles(), n_lags);
  const EmpiricalMoments m = analytic_moments(spec, grid, times, steps, ctx.mode);
  std::ofstream os = open_output(ctx, "moments.csv");
  os << provenance_line(ctx.hash, ctx.seed) << "\n" << "t,dphi,mean,cov\n";
  for (std::size_t i = 0; i < times.size(); ++i)
    for (std::size_t l = 0; l < steps.size(); ++l)
      os << format_double(times[i]) << ',' << format_double(m.lag(l)) << ','
         << format_double(m.mean[static_cast<Eigen::Index>(i)]) << ','
         << format_double(m.spatial_cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l))) << '\n';
  return kOk;
}

void override_params(std::vector<ParamSpec>& params, const json& fit) {
  if (!fit.contains("params")) return;
  for (const auto& [name, p] : fit["params"].items()) {
    auto it = std::find_if(params.begin(), params.end(), [&](const ParamSpec& s) { return s.name == name; });
    if (it == params.end()) throw ConfigError("fit.params." + name + ": not a parameter of this family");
    it->lo = num_or(p, "fit.params." + name, "lo", it->lo);
    it->hi = num_or(p, "fit.params." + name, "hi", it->hi);
    it->start = num_or(p, "fit.params." + name, "start", it->start);
  }
}

int cmd_fit(const Context& ctx, const std::string& dataset_flag) {
  const json fit = ctx.config.value("fit", json::object());
  const std::string path = !dataset_flag.empty() ? dataset_flag
                           : fit.contains("dataset") ? str(fit, "fit", "dataset")
                                                     : throw ConfigError("fit: no dataset (use --dataset or fit.dataset)");
  const std::string family = fit.contains("family") ? str(fit, "fit", "family") : "ex4";
  const ProfileDataset data = ingest_profiles(path);

  FitOptions options;
  options.seed = ctx.seed;
  options.threads = ctx.threads;
  options.starts = static_cast<int>(num_or(fit, "fit", "starts", 4));
  options.max_iterations = static_cast<int>(num_or(fit, "fit", "max_iterations", 500));
  options.require_convergence = false;

  FitResult result;
  std::vector<ParamSpec> params;
  if (family == "ex4") {
    GridSpec grid = build_grid(ctx.config);
    grid = GridSpec(data.n_angles(), grid.dt(), grid.t_min(), grid.t_max());
    MomentFitProblem problem = ex4_fit_problem(grid);
    problem.mode = ctx.mode;
    override_params(problem.params, fit);
    params = problem.params;
    result = fit_moments(problem, data, options, static_cast<int>(num_or(fit, "fit", "n_lags", 16)));
  } else if (family == "fourier-scale") {
    const GrowthModelSpec spec = build_spec(ctx.config);
    const auto* full = std::get_if<FullAngle>(&spec.ambit);
    const auto* fourier = std::get_if<FourierWeight>(&spec.weight.kind());
    if (!full || !fourier) throw ConfigError("fit.family fourier-scale needs a full-angle model with a fourier weight");
    const CircleCovModel model(*fourier, spec.basis.control, full->lag, spot_variance(spec.basis.spot));
    FourierMleProblem problem;
    problem.tau = [model](std::span<const double> x) {
      const double c = x[0];
      return TauFn([model, c](int k, double t, double t2) { return c * model.tau(k, t, t2); });
    };
    problem.params = {{"scale", 0.01, 100.0, 1.0}};
    problem.k_lo = static_cast<int>(num_or(fit, "fit", "k_lo", 1));
    problem.k_hi = static_cast<int>(num_or(fit, "fit", "k_hi", std::min(6, model.k_max())));
    override_params(problem.params, fit);
    params = problem.params;
    result = fit_fourier_mle(problem, data, options);
  } else {
    throw ConfigError("fit.family: unknown value '" + family + "' (expected ex4 or fourier-scale)");
  }

  json report;
  report["provenance"] = provenance_line(ctx.hash, ctx.seed);
  report["family"] = family;
  report["dataset"] = path;
  for (std::size_t i = 0; i < params.size(); ++i)
    report["estimates"][params[i].name] = result.estimates[i];
  for (const ParamSpec& p : params) report["bounds"][p.name] = {p.lo, p.hi};
  report["objective"] = result.objective;
  report["trace"] = result.trace;
  report["converged"] = result.converged;
  report["identifiable"] = result.identifiable;
  report["iterations"] = result.iterations;
  report["evaluations"] = result.evaluations;
  if (!result.note.empty()) report["note"] = result.note;
  std::ofstream os = open_output(ctx, "fit.json");
  os << report.dump(2) << "\n";
  *ctx.out << "converged: " << (result.converged ? "true" : "false") << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Levy-based growth models: simulation, analytic moments, Monte Carlo checks and fitting", "lgm"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  std::string preset, config_path, out_dir = ".", dataset;
  std::uint64_t seed = 1;
  int replicates = 0, threads = 0;
  bool fine = false;
  std::vector<std::string> sets;
  app.add_option("--preset", preset, "Built-in model: ex3, ex4, ex5, ex6 or tumour");
  app.add_option("--config", config_path, "JSON run configuration (applied over the preset)");
  app.add_option("--seed", seed, "Run seed")->capture_default_str();
  app.add_option("--replicates", replicates, "Number of replicates (0: command default)")->capture_default_str();
  app.add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads (0: all cores)")->capture_default_str();
  app.add_flag("--fine", fine, "Evaluate analytic moments on a 4x refined grid");
  app.add_option("--dataset", dataset, "Profile CSV (t,phi,r[,replicate]) for fit");
  app.add_option("--set", sets, "Override a config field, e.g. --set model.basis.variance=2");

  CLI::App* simulate = app.add_subcommand("simulate", "Simulate radial growth and write profiles and polylines");
  CLI::App* cov = app.add_subcommand("cov", "Write the analytic space-time covariance table");
  CLI::App* verify = app.add_subcommand("mc-verify", "Compare analytic moments with Monte Carlo; exit 4 on |z| > 3");
  CLI::App* fit = app.add_subcommand("fit", "Fit a model family to a profile dataset and write a JSON report");
  CLI::App* moments = app.add_subcommand("moments", "Write analytic means and spatial covariances");
  for (CLI::App* sub : {simulate, cov, verify, fit, moments}) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << version() << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  Context ctx;
  ctx.out = &out;
  try {
    json file = json::object();
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw ConfigError("cannot open config '" + config_path + "'");
      try {
        file = json::parse(is);
      } catch (const json::parse_error& e) {
        throw ConfigError(config_path + ": " + e.what());
      }
      validate_config(file);
    }
    std::string base_id = preset;
    if (base_id.empty() && file.contains("preset")) base_id = str(file, "config", "preset");
    json config = json::object();
    if (!base_id.empty()) {
      config = preset_config(base_id);
      config["preset"] = base_id;
    }
    file.erase("preset");
    merge_config(config, file);
    for (const std::string& s : sets) apply_override(config, s);
    validate_config(config);
    if (!config.contains("model")) throw ConfigError("config: no model (use --preset or --config)");

    ctx.config = config;
    ctx.hash = config_hash(config);
    ctx.seed = app.count("--seed") ? seed : config.value("seed", seed);
    ctx.replicates = app.count("--replicates") ? replicates : config.value("replicates", replicates);
    ctx.threads = app.count("--threads") ? threads : config.value("threads", threads);
    ctx.out_dir = app.count("--out-dir") ? out_dir : config.value("out_dir", out_dir);
    ctx.mode = fine ? MomentMode::Fine : MomentMode::Mesh;

    if (*simulate) return cmd_simulate(ctx);
    if (*cov) return cmd_cov(ctx);
    if (*verify) return cmd_mc_verify(ctx);
    if (*fit) return cmd_fit(ctx, dataset);
    return cmd_moments(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const UnknownId& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "model error: " << e.what() << "\n";
    return kModelError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kModelError;
  }
}

}  // namespace lgm::cli
