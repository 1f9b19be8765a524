// snlp: command-line front end for the scale, occupation, excursion and
// Parisian evaluators, the path simulator and the acceptance suite.
//
// Every subcommand reads a flat set of fields. A --config JSON file supplies
// them under the flag names (dashes or underscores), the model either flat
// or as {"model": {"type": ..., ...}}; flags on the command line win.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "snlp/acceptance.hpp"
#include "snlp/excursion.hpp"
#include "snlp/montecarlo.hpp"
#include "snlp/occupation.hpp"
#include "snlp/parisian.hpp"
#include "snlp/scale.hpp"
#include "snlp/version.hpp"

namespace {

using json = nlohmann::ordered_json;
using snlp::ValidationError;

constexpr int kOk = 0, kInvalid = 1, kNumerical = 2;

std::string key_of(std::string name) {
  for (auto& ch : name)
    if (ch == '-') ch = '_';
  return name;
}

std::string flag_of(std::string key) {
  for (auto& ch : key)
    if (ch == '_') ch = '-';
  return "--" + key;
}

bool is_number(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

// "--c -inf" and "--x -0.5" become "--c=-inf", "--x=-0.5", so the value is
// never mistaken for a short flag.
std::vector<std::string> join_negative_values(int argc, char** argv) {
  std::vector<std::string> out;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a.rfind("--", 0) == 0 && a.find('=') == std::string::npos && i + 1 < argc && argv[i + 1][0] == '-' &&
        is_number(argv[i + 1])) {
      out.push_back(a + "=" + argv[++i]);
    } else {
      out.push_back(std::move(a));
    }
  }
  return out;
}

struct FieldSpec {
  std::string key;
  std::string help;
};

// The merged field set of one invocation.
class Fields {
 public:
  Fields(std::string command, json values) : command_(std::move(command)), v_(std::move(values)) {}

  bool has(const std::string& k) const { return v_.contains(k) && !v_[k].is_null(); }

  void require(const std::vector<std::string>& keys) const {
    for (const auto& k : keys)
      if (!has(k)) throw ValidationError(command_ + ": missing field '" + k + "' (flag " + flag_of(k) + ")");
  }

  double num(const std::string& k) const {
    require({k});
    const auto& j = v_[k];
    if (j.is_number()) return j.get<double>();
    if (j.is_string() && is_number(j.get<std::string>())) return std::strtod(j.get<std::string>().c_str(), nullptr);
    throw ValidationError(command_ + ": field '" + k + "' must be a number, got " + j.dump());
  }
  double num(const std::string& k, double fallback) const { return has(k) ? num(k) : fallback; }

  long long integer(const std::string& k, long long fallback) const {
    if (!has(k)) return fallback;
    const double d = num(k);
    if (d != std::floor(d) || std::abs(d) > 9e15)
      throw ValidationError(command_ + ": field '" + k + "' must be an integer");
    return static_cast<long long>(d);
  }

  std::string str(const std::string& k) const {
    require({k});
    const auto& j = v_[k];
    return j.is_string() ? j.get<std::string>() : j.dump();
  }
  std::string str(const std::string& k, const std::string& fallback) const { return has(k) ? str(k) : fallback; }

  bool flag(const std::string& k) const {
    if (!has(k)) return false;
    const auto& j = v_[k];
    if (j.is_boolean()) return j.get<bool>();
    const auto s = str(k);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ValidationError(command_ + ": field '" + k + "' must be true or false");
  }

  // Values along one axis: "--x 0.5", "--x 0,0.5,1" or "--x-grid lo:hi:step".
  std::vector<double> axis(const std::string& k) const {
    const std::string g = k + "_grid";
    if (has(k) && has(g)) throw ValidationError(command_ + ": give either " + flag_of(k) + " or " + flag_of(g));
    if (has(g)) return parse_grid(str(g));
    if (!has(k)) throw ValidationError(command_ + ": missing field '" + k + "' (flag " + flag_of(k) + " or " + flag_of(g) + ")");
    if (v_[k].is_number()) return {num(k)};
    std::vector<double> out;
    std::stringstream ss(str(k));
    for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_value(k, item));
    if (out.empty()) throw ValidationError(command_ + ": field '" + k + "' is empty");
    return out;
  }

 private:
  double parse_value(const std::string& k, const std::string& s) const {
    if (!is_number(s)) throw ValidationError(command_ + ": field '" + k + "' has a non-numeric entry '" + s + "'");
    return std::strtod(s.c_str(), nullptr);
  }

  std::vector<double> parse_grid(const std::string& s) const {
    std::vector<double> parts;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(parse_value("grid", item));
    if (parts.size() != 3) throw ValidationError(command_ + ": a grid is lo:hi:step, got '" + s + "'");
    const double lo = parts[0], hi = parts[1], step = parts[2];
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(step > 0.0) || !std::isfinite(step) || hi < lo)
      throw ValidationError(command_ + ": grid '" + s + "' needs finite lo <= hi and step > 0");
    const double count = std::floor((hi - lo) / step + 1e-9) + 1.0;
    if (count > 1e6) throw ValidationError(command_ + ": grid '" + s + "' has more than 10^6 points");
    std::vector<double> out;
    for (long long i = 0; i < static_cast<long long>(count); ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
  }

  std::string command_;
  json v_;
};

// ---------------------------------------------------------------- output

json cell(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

std::string csv_field(const json& j) {
  std::string s;
  if (j.is_null()) return "";
  if (j.is_string()) {
    s = j.get<std::string>();
  } else if (j.is_number_float()) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, j.get<double>());
    s.assign(buf, res.ptr);
  } else {
    s = j.dump();
  }
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

void emit(std::ostream& os, const std::string& format, const json& meta, const Table& t) {
  if (format == "json") {
    os << json{{"meta", meta}}.dump() << "\n";
    for (const auto& row : t.rows) {
      json o = json::object();
      for (std::size_t i = 0; i < t.columns.size(); ++i) o[t.columns[i]] = row[i];
      os << o.dump() << "\n";
    }
    return;
  }
  os << "# " << meta.dump() << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_field(t.columns[i]);
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i]);
    os << "\n";
  }
}

// ---------------------------------------------------------------- models and numerics

const std::vector<FieldSpec> kModelFields{
    {"model", "model type: brownian | cramer_lundberg"},
    {"mu", "Brownian drift"},
    {"sigma", "Brownian volatility"},
    {"premium", "Cramer-Lundberg premium rate"},
    {"jump_rate", "Cramer-Lundberg claim arrival rate"},
    {"jump_mean", "Cramer-Lundberg mean claim size"},
};

const std::vector<FieldSpec> kNumericsFields{
    {"inversion", "Laplace inversion method: euler | talbot | gaver_stehfest"},
    {"inversion_terms", "inversion terms"},
    {"inversion_shift", "inversion contour shift"},
    {"quad_abs_tol", "quadrature absolute tolerance"},
    {"quad_rel_tol", "quadrature relative tolerance"},
    {"quad_max_subdivisions", "quadrature subdivision limit"},
    {"backend", "scale backend: closed_form | inversion"},
};

const std::vector<FieldSpec> kOutputFields{
    {"format", "output format: csv | json"},
    {"out", "write to this file instead of stdout"},
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct ModelSetup {
  snlp::LevyModel model;
  json spec;
};

ModelSetup build_model(const Fields& f) {
  const auto type = f.str("model");
  if (type == "brownian") {
    f.require({"mu", "sigma"});
    const double mu = f.num("mu"), sigma = f.num("sigma");
    return {snlp::LevyModel::brownian(mu, sigma), json{{"type", type}, {"mu", mu}, {"sigma", sigma}}};
  }
  if (type == "cramer_lundberg") {
    f.require({"premium", "jump_rate", "jump_mean"});
    const double c = f.num("premium"), lam = f.num("jump_rate"), m = f.num("jump_mean");
    return {snlp::LevyModel::cramer_lundberg(c, lam, m),
            json{{"type", type}, {"premium", c}, {"jump_rate", lam}, {"jump_mean", m}}};
  }
  throw ValidationError("model: unknown type '" + type + "' (brownian, cramer_lundberg)");
}

struct Numerics {
  snlp::ParisianConfig parisian;
  snlp::ScaleOptions scale;
  snlp::QuadratureConfig quadrature = snlp::bivariate_quadrature();
  json describe() const {
    json j{{"inversion",
            {{"method", snlp::to_string(parisian.inversion.method)},
             {"terms", parisian.inversion.terms},
             {"shift", parisian.inversion.shift}}},
           {"quadrature",
            {{"abs_tol", quadrature.abs_tol},
             {"rel_tol", quadrature.rel_tol},
             {"max_subdivisions", quadrature.max_subdivisions}}}};
    j["scale_backend"] = scale.backend ? (*scale.backend == snlp::ScaleBackend::closed_form ? "closed_form" : "inversion")
                                       : "automatic";
    return j;
  }
};

Numerics build_numerics(const Fields& f) {
  Numerics n;
  auto inv = snlp::InversionConfig::with(snlp::parse_inversion_method(f.str("inversion", "euler")));
  inv.terms = static_cast<int>(f.integer("inversion_terms", inv.terms));
  inv.shift = f.num("inversion_shift", inv.shift);
  inv.validate();
  n.quadrature.abs_tol = f.num("quad_abs_tol", n.quadrature.abs_tol);
  n.quadrature.rel_tol = f.num("quad_rel_tol", n.quadrature.rel_tol);
  n.quadrature.max_subdivisions = static_cast<int>(f.integer("quad_max_subdivisions", n.quadrature.max_subdivisions));
  n.quadrature.validate();
  if (f.has("backend")) {
    const auto b = f.str("backend");
    if (b == "closed_form") n.scale.backend = snlp::ScaleBackend::closed_form;
    else if (b == "inversion") n.scale.backend = snlp::ScaleBackend::inversion;
    else throw ValidationError("backend: unknown value '" + b + "' (closed_form, inversion)");
  }
  n.scale.inversion = inv;
  n.parisian.inversion = inv;
  n.parisian.quadrature = n.quadrature;
  n.parisian.scale = n.scale;
  return n;
}

json metadata(const std::string& command, const ModelSetup& m, const json& numerics) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(m.spec.dump())));
  return json{{"library", "snlp"},    {"version", snlp::kVersion}, {"command", command},
              {"model", m.spec},      {"model_hash", hash},         {"numerics", numerics}};
}

// ---------------------------------------------------------------- subcommands

Table run_scale(const Fields& f, const ModelSetup& m, const Numerics& n) {
  const double q = f.num("q");
  snlp::ScaleEvaluator<double> w(m.model, q, n.scale);
  Table t{{"x", "W", "Z"}, {}};
  for (double x : f.axis("x")) t.rows.push_back({cell(x), cell(w.W(x)), cell(w.Z(x))});
  return t;
}

Table run_occupation(const Fields& f, const ModelSetup& m, const Numerics& n) {
  f.require({"p", "q", "b", "c"});
  Table t{{"x", "p", "q", "b", "c", "exit_up", "exit_down"}, {}};
  for (double x : f.axis("x")) {
    const snlp::OccupationQuery oq{m.model, f.num("p"), f.num("q"), x, f.num("b"), f.num("c")};
    const snlp::OccupationIdentities id(oq, n.scale, n.quadrature);
    t.rows.push_back({cell(x), cell(oq.p), cell(oq.q), cell(oq.b), cell(oq.c), cell(id.exit_up()), cell(id.exit_down())});
  }
  return t;
}

Table run_excursion(const Fields& f, const ModelSetup& m, const Numerics& n) {
  f.require({"p", "q", "b", "c"});
  const snlp::ExcursionQuery<double> eq{m.model, f.num("p"), f.num("q"), f.num("b"), f.num("c")};
  const snlp::ExcursionFunctionals<double> ex(eq, n.scale, n.quadrature);
  const auto tr = snlp::parisian_transforms(eq, n.scale);
  const json down_tr = eq.q >= 1e-3 ? cell(tr.down) : json();
  Table t{{"p", "q", "b", "c", "y", "n_kill", "n_up", "n_down", "n_resolvent_density", "denominator_transform",
           "ruin_transform", "down_transform"},
          {}};
  auto row = [&](json y, json density) {
    t.rows.push_back({cell(eq.p), cell(eq.q), cell(eq.b), cell(eq.c), y, cell(ex.n_kill()), cell(ex.n_up()),
                      cell(ex.n_down()), density, cell(tr.denominator), cell(tr.ruin), down_tr});
  };
  if (!f.has("y") && !f.has("y_grid")) {
    row(json(), json());
  } else {
    for (double y : f.axis("y")) row(cell(y), cell(ex.n_resolvent_density(y)));
  }
  return t;
}

snlp::ParisianQuery parisian_query(const Fields& f, const ModelSetup& m, double x) {
  f.require({"b", "c", "p", "gamma", "r"});
  snlp::ParisianQuery pq{m.model, x, f.num("t0", 0.0), f.num("b"), f.num("c"), f.num("p"), f.num("gamma"), f.num("r")};
  pq.validate();
  return pq;
}

Table run_parisian(const Fields& f, const ModelSetup& m, const Numerics& n) {
  Table t{{"x", "t0", "b", "c", "p", "gamma", "r", "up", "ruin_raw", "ruin_shifted", "down", "inversion",
           "accuracy_warning"},
          {}};
  for (double x : f.axis("x")) {
    const auto pq = parisian_query(f, m, x);
    const auto v = snlp::parisian_all(pq, n.parisian);
    t.rows.push_back({cell(x), cell(pq.t0), cell(pq.b), cell(pq.c), cell(pq.p), cell(pq.gamma), cell(pq.r),
                      cell(v.up), cell(v.ruin.raw), cell(v.ruin.shifted), cell(v.down),
                      pq.no_lower_barrier() ? "closed_form" : snlp::to_string(n.parisian.inversion.method),
                      v.accuracy_warning});
  }
  return t;
}

snlp::PathConfig path_config(const Fields& f, const snlp::LevyModel& model) {
  snlp::PathConfig cfg;
  cfg.scheme = f.has("scheme") ? snlp::parse_path_scheme(f.str("scheme"))
               : model.cl_spec() ? snlp::PathScheme::event_driven_cl
                                 : snlp::PathScheme::gaussian_grid;
  cfg.dt = f.num("dt", cfg.dt);
  cfg.horizon = f.num("horizon", cfg.horizon);
  const long long seed = f.integer("seed", static_cast<long long>(cfg.base_seed));
  if (seed < 0) throw ValidationError("simulate: seed must be >= 0");
  cfg.base_seed = static_cast<std::uint64_t>(seed);
  cfg.n_paths = f.integer("paths", cfg.n_paths);
  const long long threads = f.integer("threads", 0);
  if (threads < 0) throw ValidationError("simulate: threads must be >= 0");
  cfg.threads = static_cast<unsigned>(threads);
  cfg.validate();
  return cfg;
}

Table run_simulate(const Fields& f, const ModelSetup& m, json& numerics) {
  const auto cfg = path_config(f, m.model);
  const bool grid = cfg.scheme == snlp::PathScheme::gaussian_grid;
  numerics["paths"] = {{"scheme", snlp::to_string(cfg.scheme)},
                       {"dt", grid ? json(cfg.dt) : json()},
                       {"horizon", cfg.horizon},
                       {"seed", cfg.base_seed},
                       {"paths", cfg.n_paths}};
  Table t{{"event", "mean", "stderr", "n", "dt", "seed", "bias_note"}, {}};
  auto row = [&](const std::string& ev, const snlp::MCEstimate& e) {
    t.rows.push_back({ev, cell(e.mean), cell(e.std_error), e.n, grid ? cell(cfg.dt) : json(), cfg.base_seed,
                      e.bias_note});
  };
  const auto kind = f.str("kind", "parisian");
  if (kind == "parisian") {
    const auto e = snlp::simulate_parisian(parisian_query(f, m, f.num("x")), cfg);
    row("up", e.up);
    row("ruin_raw", e.ruin_raw);
    row("ruin_shifted", e.ruin_shifted);
    row("down", e.down);
  } else if (kind == "occupation") {
    f.require({"x", "b", "c", "p", "q"});
    const snlp::OccupationQuery oq{m.model, f.num("p"), f.num("q"), f.num("x"), f.num("b"), f.num("c")};
    const auto e = snlp::simulate_occupation_exit(oq, cfg);
    row("up", e.up);
    row("down", e.down);
  } else {
    throw ValidationError("simulate: unknown kind '" + kind + "' (parisian, occupation)");
  }
  return t;
}

int run_verify(const Fields& f, std::ostream& os) {
  const auto suite = f.str("suite", "all");
  if (!snlp::is_verify_suite(suite)) {
    std::string list;
    for (const auto& s : snlp::verify_suites()) list += (list.empty() ? "" : ", ") + s;
    throw ValidationError("verify: unknown suite '" + suite + "' (suites: " + list + ")");
  }
  snlp::VerifyOptions opts;
  opts.paths = f.integer("paths", opts.paths);
  if (opts.paths < 2) throw ValidationError("verify: paths must be >= 2");
  const long long seed = f.integer("seed", static_cast<long long>(opts.seed));
  const long long threads = f.integer("threads", 0);
  if (seed < 0 || threads < 0) throw ValidationError("verify: seed and threads must be >= 0");
  opts.seed = static_cast<std::uint64_t>(seed);
  opts.threads = static_cast<unsigned>(threads);
  opts.timing = !f.flag("no_timing");

  json report{{"meta",
               {{"library", "snlp"},
                {"version", snlp::kVersion},
                {"suite", suite},
                {"paths", opts.paths},
                {"seed", opts.seed},
                {"timing", opts.timing}}},
              {"criteria", json::array()}};
  std::vector<int> failed;
  for (int id : snlp::suite_criteria(suite)) {
    const auto r = snlp::run_criterion(id, opts);
    const auto& w = r.worst();
    json checks = json::array();
    for (const auto& c : r.checks)
      checks.push_back({{"label", c.label},
                        {"value", cell(c.value)},
                        {"reference", cell(c.reference)},
                        {"tolerance", cell(c.tolerance)},
                        {"pass", c.pass}});
    report["criteria"].push_back({{"id", r.id},
                                  {"name", r.name},
                                  {"value", cell(w.value)},
                                  {"reference", cell(w.reference)},
                                  {"tolerance", cell(w.tolerance)},
                                  {"pass", r.pass},
                                  {"wall_time", r.seconds},
                                  {"budget", r.budget},
                                  {"widened_stderr", r.widened},
                                  {"note", r.note},
                                  {"checks", checks}});
    if (!r.pass) failed.push_back(id);
  }
  report["failed"] = failed;
  report["pass"] = failed.empty();
  os << report.dump(2) << "\n";
  if (failed.empty()) return kOk;
  std::string ids;
  for (int id : failed) ids += (ids.empty() ? "" : ", ") + std::to_string(id);
  std::cerr << "verify: failing criteria: " << ids << "\n";
  return kNumerical;
}

// ---------------------------------------------------------------- wiring

struct Command {
  std::string name;
  std::string help;
  std::vector<FieldSpec> fields;
  bool model = true;
};

std::vector<Command> commands() {
  auto with = [](std::vector<FieldSpec> own, bool numerics) {
    std::vector<FieldSpec> all = kModelFields;
    all.insert(all.end(), own.begin(), own.end());
    if (numerics) all.insert(all.end(), kNumericsFields.begin(), kNumericsFields.end());
    all.insert(all.end(), kOutputFields.begin(), kOutputFields.end());
    return all;
  };
  const FieldSpec x{"x", "start point(s), comma separated"}, x_grid{"x_grid", "start points lo:hi:step"};
  return {
      {"scale", "scale functions W and Z on an x grid",
       with({{"q", "exponent q >= 0"}, x, x_grid}, true)},
      {"occupation", "exit identities weighted by occupation times",
       with({{"p", "weight above 0"}, {"q", "weight below 0"}, {"b", "upper barrier"}, {"c", "lower barrier"}, x,
             x_grid},
            true)},
      {"excursion", "excursion measure functionals and the Parisian transforms",
       with({{"p", "rate p"},
             {"q", "rate q"},
             {"b", "upper barrier"},
             {"c", "lower barrier"},
             {"y", "resolvent level(s), comma separated"},
             {"y_grid", "resolvent levels lo:hi:step"}},
            true)},
      {"parisian", "Parisian exit, ruin and down transforms",
       with({x, x_grid, {"t0", "initial clock (x < 0 only)"}, {"b", "upper barrier"},
             {"c", "lower barrier (-inf for none)"}, {"p", "discount rate"}, {"gamma", "Parisian delay"},
             {"r", "clock threshold for the down event"}},
            true)},
      {"simulate", "Monte Carlo estimates",
       with({{"kind", "parisian | occupation"},
             {"x", "start point"},
             {"t0", "initial clock"},
             {"b", "upper barrier"},
             {"c", "lower barrier (-inf for none)"},
             {"p", "discount rate / weight above 0"},
             {"q", "weight below 0 (occupation)"},
             {"gamma", "Parisian delay"},
             {"r", "clock threshold for the down event"},
             {"scheme", "grid | event"},
             {"dt", "grid step"},
             {"horizon", "simulation horizon"},
             {"seed", "base seed"},
             {"paths", "number of paths"},
             {"threads", "worker threads (0 = all cores)"}},
            false)},
      {"verify", "run the acceptance suite and print a JSON report",
       {{"suite", "scale | occupation | excursion | parisian | mc | all"},
        {"paths", "paths for criteria sized at 1e5"},
        {"seed", "base seed"},
        {"threads", "worker threads (0 = all cores)"},
        {"no_timing", "skip the runtime budgets"},
        {"out", "write to this file instead of stdout"}},
       false},
  };
}

json read_config(const std::string& path, const std::vector<FieldSpec>& fields) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open '" + path + "'");
  json raw;
  try {
    raw = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  if (!raw.is_object()) throw ValidationError("config: top level must be an object");
  json flat = json::object();
  for (auto& [k, v] : raw.items()) {
    if (k == "model" && v.is_object()) {
      for (auto& [mk, mv] : v.items()) flat[mk == "type" ? "model" : key_of(mk)] = mv;
    } else {
      flat[key_of(k)] = v;
    }
  }
  for (auto& [k, v] : flat.items()) {
    const bool known = std::any_of(fields.begin(), fields.end(), [&](const FieldSpec& s) { return s.key == k; });
    if (!known) throw ValidationError("config: unknown key '" + k + "'");
  }
  return flat;
}

int dispatch(const Command& cmd, const json& values) {
  const Fields f(cmd.name, values);
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (f.has("out")) {
    file.open(f.str("out"));
    if (!file) throw ValidationError(cmd.name + ": cannot write '" + f.str("out") + "'");
    os = &file;
  }
  if (cmd.name == "verify") return run_verify(f, *os);

  const auto format = f.str("format", "csv");
  if (format != "csv" && format != "json") throw ValidationError("format: must be csv or json");
  const auto m = build_model(f);
  const auto n = build_numerics(f);
  json numerics = n.describe();
  Table t;
  if (cmd.name == "scale") t = run_scale(f, m, n);
  else if (cmd.name == "occupation") t = run_occupation(f, m, n);
  else if (cmd.name == "excursion") t = run_excursion(f, m, n);
  else if (cmd.name == "parisian") t = run_parisian(f, m, n);
  else {
    numerics = json::object();
    t = run_simulate(f, m, numerics);
  }
  emit(*os, format, metadata(cmd.name, m, numerics), t);
  return kOk;
}

int run(int argc, char** argv) {
  CLI::App app{"snlp: scale functions, occupation identities and Parisian ruin for spectrally negative Levy processes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", snlp::kVersion);

  const auto cmds = commands();
  std::map<std::string, std::map<std::string, std::string>> given;
  std::map<std::string, std::string> config_path;
  std::vector<CLI::App*> subs;
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path[c.name], "JSON file with fields keyed by flag name");
    for (const auto& fs : c.fields) {
      auto& slot = given[c.name][fs.key];
      if (fs.key == "no_timing") sub->add_flag_callback(flag_of(fs.key), [&slot] { slot = "true"; }, fs.help);
      else sub->add_option(flag_of(fs.key), slot, fs.help);
    }
    subs.push_back(sub);
  }

  const auto args = join_negative_values(argc, argv);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }

  for (std::size_t i = 0; i < cmds.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    const auto& c = cmds[i];
    json values = json::object();
    if (!config_path[c.name].empty()) values = read_config(config_path[c.name], c.fields);
    for (const auto& fs : c.fields) {
      auto* opt = subs[i]->get_option_no_throw(flag_of(fs.key));
      if (opt && opt->count() > 0) values[fs.key] = given[c.name][fs.key];
    }
    return dispatch(c, values);
  }
  return kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const snlp::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const snlp::CapabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
}
