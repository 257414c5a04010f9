#include "epiguard/scenario_io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "epiguard/errors.hpp"

namespace epiguard {

namespace {

struct Entry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct Section {
  std::string name;  // empty for the top-level preamble
  std::size_t line = 0;
  std::vector<Entry> entries;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<Section> tokenize(std::string_view text, const std::string& source) {
  std::vector<Section> sections(1);
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(source, line_no, "unterminated section header");
      sections.push_back({trim(std::string_view(line).substr(1, line.size() - 2)), line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected 'key = value'");
    Entry e{trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)),
            line_no};
    if (e.key.empty()) throw ParseError(source, line_no, "empty key");
    sections.back().entries.push_back(std::move(e));
  }
  return sections;
}

double parse_number(const std::string& source, const Entry& e) {
  double v = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError(source, e.line, "'" + e.key + "' expects a number, got '" + e.value + "'");
  }
  return v;
}

class SectionReader {
 public:
  SectionReader(const Section& section, const std::string& source,
                const std::vector<std::string>& allowed, bool repeatable_keys = false)
      : section_(section), source_(source) {
    std::set<std::string> seen;
    for (const auto& e : section.entries) {
      const bool known = std::find(allowed.begin(), allowed.end(), e.key) != allowed.end();
      if (!known) throw ParseError(source, e.line, "unknown key '" + e.key + "' in " + where());
      if (!repeatable_keys && !seen.insert(e.key).second) {
        throw ParseError(source, e.line, "duplicate key '" + e.key + "' in " + where());
      }
    }
  }

  const Entry* find(const std::string& key) const {
    for (const auto& e : section_.entries)
      if (e.key == key) return &e;
    return nullptr;
  }

  const Entry& require(const std::string& key) const {
    if (const Entry* e = find(key)) return *e;
    throw ParseError(source_, section_.line, "missing key '" + key + "' in " + where());
  }

  double number(const Entry& e) const { return parse_number(source_, e); }

  double number(const std::string& key) const { return number(require(key)); }

  double number_or(const std::string& key, double fallback) const {
    const Entry* e = find(key);
    return e ? number(*e) : fallback;
  }

  std::string where() const { return section_.name.empty() ? "preamble" : "[" + section_.name + "]"; }
  const std::string& source() const { return source_; }
  const Section& section() const { return section_; }

 private:
  const Section& section_;
  const std::string& source_;
};

const std::map<std::string, std::vector<std::string>>& model_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"sir", {"beta0", "gamma", "population"}},
      {"seir", {"beta0", "gamma", "sigma", "population"}},
      {"sihrd", {"beta0", "gamma", "lambda", "nu", "mu", "population"}},
  };
  return keys;
}

// Reads or writes one named parameter of a model parameter set.
double* param_slot(ModelParams& params, const std::string& name) {
  return std::visit(
      [&](auto& p) -> double* {
        using P = std::decay_t<decltype(p)>;
        if (name == "beta0") return &p.beta0;
        if (name == "gamma") return &p.gamma;
        if (name == "population") return &p.population;
        if constexpr (std::is_same_v<P, SeirParams>) {
          if (name == "sigma") return &p.sigma;
        }
        if constexpr (std::is_same_v<P, SihrdParams>) {
          if (name == "lambda") return &p.lambda;
          if (name == "nu") return &p.nu;
          if (name == "mu") return &p.mu;
        }
        return nullptr;
      },
      params);
}

ModelParams empty_params(const std::string& kind) {
  if (kind == "sir") return SirParams{};
  if (kind == "seir") return SeirParams{};
  return SihrdParams{};
}

ModelSpec build_checked(const ModelParams& params, const std::string& source, std::size_t line) {
  try {
    return build_model(params);
  } catch (const ValidationError& e) {
    throw ParseError(source, line, e.what());
  }
}

// Day value: a number, or an ISO date when the scenario is date-anchored.
double time_value(const SectionReader& r, const Entry& e, std::optional<long long> start_day,
                  double t_start) {
  if (e.value.size() == 10 && e.value[4] == '-' && e.value[7] == '-') {
    if (!start_day) throw ParseError(r.source(), e.line, "calendar dates need [time] start_date");
    try {
      return t_start + static_cast<double>(parse_iso_date(e.value) - *start_day);
    } catch (const ValidationError& err) {
      throw ParseError(r.source(), e.line, err.what());
    }
  }
  return r.number(e);
}

std::vector<double> parse_row(const SectionReader& r, const Entry& e, std::size_t expected) {
  std::vector<double> out;
  for (const auto& cell : split(e.value, ',')) {
    Entry tmp{e.key, cell, e.line};
    out.push_back(r.number(tmp));
  }
  if (out.size() != expected) {
    throw ParseError(r.source(), e.line,
                     "expected " + std::to_string(expected) + " values, got " + std::to_string(out.size()));
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

long long parse_iso_date(std::string_view text) {
  using namespace std::chrono;
  int y = 0;
  unsigned m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
      std::from_chars(text.data(), text.data() + 4, y).ptr != text.data() + 4 ||
      std::from_chars(text.data() + 5, text.data() + 7, m).ptr != text.data() + 7 ||
      std::from_chars(text.data() + 8, text.data() + 10, d).ptr != text.data() + 10) {
    throw ValidationError("invalid ISO-8601 date '" + std::string(text) + "'");
  }
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw ValidationError("invalid calendar date '" + std::string(text) + "'");
  return sys_days{ymd}.time_since_epoch().count();
}

std::string format_iso_date(long long days) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Scenario parse_scenario(const std::filesystem::path& path) {
  return parse_scenario_text(read_file(path), path.string(), path.parent_path());
}

Scenario parse_scenario_text(std::string_view text, const std::string& source,
                             const std::filesystem::path& base_dir) {
  const auto sections = tokenize(text, source);
  if (sections.size() == 1 && sections[0].entries.empty()) throw ParseError(source, 0, "empty scenario");

  const SectionReader pre(sections[0], source, {"schema_version", "name"});
  const Entry& version = pre.require("schema_version");
  if (pre.number(version) != kScenarioSchemaVersion) {
    throw ParseError(source, version.line,
                     "schema_version mismatch: file has " + version.value + ", supported is " +
                         std::to_string(kScenarioSchemaVersion));
  }

  std::map<std::string, const Section*> single;
  std::vector<const Section*> constraint_sections;
  for (std::size_t s = 1; s < sections.size(); ++s) {
    const auto& sec = sections[s];
    static const std::set<std::string> known{"model", "initial", "time", "feedback", "disturbance",
                                             "plant", "prehistory"};
    if (sec.name == "constraint") {
      constraint_sections.push_back(&sec);
    } else if (known.count(sec.name)) {
      if (!single.emplace(sec.name, &sec).second) {
        throw ParseError(source, sec.line, "duplicate section [" + sec.name + "]");
      }
    } else {
      throw ParseError(source, sec.line, "unknown section [" + sec.name + "]");
    }
  }
  const auto need = [&](const char* name) -> const Section& {
    auto it = single.find(name);
    if (it == single.end()) throw ParseError(source, 0, std::string("missing section [") + name + "]");
    return *it->second;
  };

  // [model]
  const Section& model_sec = need("model");
  const Entry* kind_entry = nullptr;
  for (const auto& e : model_sec.entries)
    if (e.key == "kind") kind_entry = &e;
  if (!kind_entry) throw ParseError(source, model_sec.line, "missing key 'kind' in [model]");
  const auto keys_it = model_keys().find(kind_entry->value);
  if (keys_it == model_keys().end()) {
    throw ParseError(source, kind_entry->line, "unknown model kind '" + kind_entry->value + "'");
  }
  std::vector<std::string> allowed_model = keys_it->second;
  allowed_model.push_back("kind");
  const SectionReader model_r(model_sec, source, allowed_model);
  ModelParams params = empty_params(kind_entry->value);
  for (const auto& key : keys_it->second) *param_slot(params, key) = model_r.number(key);
  ModelSpec spec = build_checked(params, source, model_sec.line);

  // [initial]
  const Section& init_sec = need("initial");
  Vector values(spec.labels().size());
  {
    std::set<std::string> got;
    for (const auto& e : init_sec.entries) {
      const auto& labels = spec.labels();
      const auto it = std::find(labels.begin(), labels.end(), e.key);
      if (it == labels.end()) throw ParseError(source, e.line, "unknown compartment '" + e.key + "' in [initial]");
      if (!got.insert(e.key).second) throw ParseError(source, e.line, "duplicate key '" + e.key + "' in [initial]");
      const double v = parse_number(source, e);
      if (v < 0.0) throw ParseError(source, e.line, "compartment '" + e.key + "' must be >= 0");
      values[static_cast<std::size_t>(it - labels.begin())] = v;
    }
    for (const auto& label : spec.labels()) {
      if (!got.count(label)) throw ParseError(source, init_sec.line, "missing compartment '" + label + "' in [initial]");
    }
  }
  ModelState state0 = ModelState::from_flat(values, spec.n());

  // [time]
  const SectionReader time_r(need("time"), source, {"start_date", "t_start", "t_end", "dt", "control_start"});
  std::optional<std::string> start_date;
  std::optional<long long> start_day;
  if (const Entry* e = time_r.find("start_date")) {
    try {
      start_day = parse_iso_date(e->value);
    } catch (const ValidationError& err) {
      throw ParseError(source, e->line, err.what());
    }
    start_date = e->value;
  }
  const double t_start = time_r.find("t_start") ? time_r.number("t_start") : 0.0;
  const double t_end = time_value(time_r, time_r.require("t_end"), start_day, t_start);
  const double dt = time_r.number_or("dt", 0.1);
  const Entry* cs = time_r.find("control_start");
  const double control_start = cs ? time_value(time_r, *cs, start_day, t_start) : t_start;

  Scenario sc{.name = pre.find("name") ? pre.find("name")->value : std::string("scenario"),
              .spec = spec,
              .state0 = state0,
              .t_start = t_start,
              .t_end = t_end,
              .dt = dt,
              .control_start = control_start,
              .constraints = {},
              .feedback = InstantaneousFeedback{},
              .disturbance = std::nullopt,
              .guaranteed = true,
              .predictor_dt = 0.0,
              .plant = std::nullopt,
              .prehistory = {},
              .start_date = start_date};

  // [feedback]
  if (auto it = single.find("feedback"); it != single.end()) {
    const SectionReader r(*it->second, source, {"mode", "tau", "predictor_dt", "guaranteed"});
    const std::string mode = r.find("mode") ? r.find("mode")->value : "instantaneous";
    const double tau = r.number_or("tau", 0.0);
    if (mode == "instantaneous") {
      if (tau != 0.0) throw ParseError(source, r.require("tau").line, "tau needs mode delayed or predictor");
      sc.feedback = InstantaneousFeedback{};
    } else if (mode == "delayed") {
      sc.feedback = DelayedFeedback{tau};
    } else if (mode == "predictor") {
      sc.feedback = PredictorFeedback{tau};
    } else {
      throw ParseError(source, r.require("mode").line, "unknown feedback mode '" + mode + "'");
    }
    sc.predictor_dt = r.number_or("predictor_dt", 0.0);
    if (const Entry* g = r.find("guaranteed")) {
      if (g->value != "true" && g->value != "false") {
        throw ParseError(source, g->line, "guaranteed expects true or false");
      }
      sc.guaranteed = g->value == "true";
    }
  }

  // [disturbance]
  if (auto it = single.find("disturbance"); it != single.end()) {
    const SectionReader r(*it->second, source, {"delta", "seed"});
    BoundedDisturbance d;
    d.delta = r.number("delta");
    if (const Entry* e = r.find("seed")) {
      const auto [ptr, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), d.seed);
      if (ec != std::errc() || ptr != e->value.data() + e->value.size()) {
        throw ParseError(source, e->line, "seed expects an unsigned 64-bit integer");
      }
    }
    sc.disturbance = d;
  }

  // [constraint]*
  for (const Section* sec : constraint_sections) {
    const SectionReader r(*sec, source, {"compartment", "bound", "direction", "alpha", "alpha_e"});
    const Entry& comp = r.require("compartment");
    const std::string dir = r.find("direction") ? r.find("direction")->value : "upper";
    if (dir != "upper" && dir != "lower") {
      throw ParseError(source, r.require("direction").line, "direction expects upper or lower");
    }
    try {
      sc.constraints.push_back(make_constraint(spec, comp.value, r.number("bound"),
                                               dir == "upper" ? BoundDirection::Upper : BoundDirection::Lower,
                                               r.number_or("alpha", 0.0), r.number_or("alpha_e", 0.0)));
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(source, sec->line, e.what());
    }
    if (sc.constraints.back().group == CompartmentGroup::Multiplicative && r.find("alpha_e")) {
      throw ParseError(source, r.find("alpha_e")->line, "alpha_e applies to outlet compartments only");
    }
  }

  // [plant]
  if (auto it = single.find("plant"); it != single.end()) {
    ModelParams plant_params = params;
    std::set<std::string> got;
    for (const auto& e : it->second->entries) {
      double* slot = param_slot(plant_params, e.key);
      if (!slot) throw ParseError(source, e.line, "unknown key '" + e.key + "' in [plant]");
      if (!got.insert(e.key).second) throw ParseError(source, e.line, "duplicate key '" + e.key + "' in [plant]");
      *slot = parse_number(source, e);
    }
    sc.plant = build_checked(plant_params, source, it->second->line);
  }

  // [prehistory]
  if (auto it = single.find("prehistory"); it != single.end()) {
    const SectionReader r(*it->second, source, {"row", "file"}, true);
    const std::size_t width = spec.labels().size() + 1;
    auto add_row = [&](const std::vector<double>& row) {
      sc.prehistory.emplace_back(row[0], ModelState::from_flat(Vector(row.begin() + 1, row.end()), spec.n()));
    };
    for (const auto& e : it->second->entries) {
      if (e.key == "row") {
        add_row(parse_row(r, e, width));
        continue;
      }
      const std::filesystem::path file = base_dir / e.value;
      std::istringstream csv(read_file(file));
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(csv, line)) {
        ++line_no;
        if (line_no == 1 || trim(line).empty()) continue;  // header
        Entry row_entry{"row", line, line_no};
        try {
          add_row(parse_row(r, row_entry, width));
        } catch (const ParseError&) {
          throw ParseError(file.string(), line_no, "malformed prehistory row");
        }
      }
    }
  }

  try {
    validate_scenario(sc);
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ParseError(source, 0, e.what());
  }
  return sc;
}

std::string write_scenario(const Scenario& sc) {
  std::ostringstream out;
  const auto num = format_number;
  out << "schema_version = " << kScenarioSchemaVersion << "\n";
  out << "name = " << sc.name << "\n\n";

  const auto write_params = [&](const ModelParams& params) {
    const std::string kind = to_string(static_cast<ModelKind>(params.index()));
    ModelParams copy = params;
    for (const auto& key : model_keys().at(kind)) out << key << " = " << num(*param_slot(copy, key)) << "\n";
  };

  out << "[model]\nkind = " << to_string(sc.spec.kind()) << "\n";
  write_params(sc.spec.params());

  out << "\n[initial]\n";
  for (std::size_t k = 0; k < sc.state0.size(); ++k) {
    out << sc.spec.labels()[k] << " = " << num(sc.state0[k]) << "\n";
  }

  out << "\n[time]\n";
  if (sc.start_date) out << "start_date = " << *sc.start_date << "\n";
  out << "t_start = " << num(sc.t_start) << "\nt_end = " << num(sc.t_end) << "\ndt = " << num(sc.dt)
      << "\ncontrol_start = " << num(sc.control_start) << "\n";

  out << "\n[feedback]\nmode = " << feedback_name(sc.feedback) << "\n";
  if (sc.feedback.index() != 0) out << "tau = " << num(feedback_delay(sc.feedback)) << "\n";
  if (sc.predictor_dt > 0.0) out << "predictor_dt = " << num(sc.predictor_dt) << "\n";
  out << "guaranteed = " << (sc.guaranteed ? "true" : "false") << "\n";

  if (sc.disturbance) {
    out << "\n[disturbance]\ndelta = " << num(sc.disturbance->delta) << "\nseed = " << sc.disturbance->seed
        << "\n";
  }

  for (const auto& c : sc.constraints) {
    out << "\n[constraint]\ncompartment = " << sc.spec.labels()[c.flat_index(sc.spec)]
        << "\nbound = " << num(c.bound) << "\ndirection = " << to_string(c.direction)
        << "\nalpha = " << num(c.alpha) << "\n";
    if (c.group == CompartmentGroup::Outlet) out << "alpha_e = " << num(c.alpha_e) << "\n";
  }

  if (sc.plant) {
    out << "\n[plant]\n";
    write_params(sc.plant->params());
  }

  if (!sc.prehistory.empty()) {
    out << "\n[prehistory]\n";
    for (const auto& [t, state] : sc.prehistory) {
      out << "row = " << num(t);
      for (double v : state.values()) out << ", " << num(v);
      out << "\n";
    }
  }
  return out.str();
}

namespace {

// Fig. 2 setting: control from 2020-06-01 with the fitted US SIR parameters.
// The initial compartment values are not known; these put the state
// inside the safe set with a growing infection on the control start date.
constexpr const char* kSirFig2 = R"(schema_version = 1
name = sir_fig2

[model]
kind = sir
beta0 = 0.33
gamma = 0.2
population = 33000000

[initial]
S = 28050000
I = 30000
R = 4920000

[time]
start_date = 2020-05-21
t_start = 0
t_end = 2021-07-01
dt = 0.1
control_start = 2020-06-01

[feedback]
mode = predictor
tau = 11

[constraint]
compartment = I
bound = 200000
direction = upper
alpha = 0.02
)";

// Fig. 3 setting: fitted SIHRD parameters, hospitalizations and deaths bounded.
constexpr const char* kSihrdFig3 = R"(schema_version = 1
name = sihrd_fig3

[model]
kind = sihrd
beta0 = 0.53
gamma = 0.14
lambda = 0.03
nu = 0.14
mu = 0.01
population = 15000000

[initial]
S = 7000000
I = 30000
H = 7000
R = 7843000
D = 120000

[time]
start_date = 2020-05-23
t_start = 0
t_end = 2021-07-01
dt = 0.1
control_start = 2020-06-01

[feedback]
mode = predictor
tau = 9

[constraint]
compartment = H
bound = 40000
alpha = 0.018
alpha_e = 0.014

[constraint]
compartment = D
bound = 400000
alpha = 0.018
alpha_e = 0.018
)";

// Early-epidemic SIR where I grows more than tenfold over the delay; delayed
// feedback without prediction overshoots the bound.
constexpr const char* kSirDelayDanger = R"(schema_version = 1
name = sir_delay_danger

[model]
kind = sir
beta0 = 0.33
gamma = 0.2
population = 33000000

[initial]
S = 32990000
I = 1000
R = 9000

[time]
t_start = 0
t_end = 250
dt = 0.1
control_start = 18

[feedback]
mode = delayed
tau = 18

[constraint]
compartment = I
bound = 200000
alpha = 0.02
)";

// SEIR with the exposed population bounded (the infected row of g is zero).
constexpr const char* kSeirExposed = R"(schema_version = 1
name = seir_exposed

[model]
kind = seir
beta0 = 0.33
gamma = 0.2
sigma = 0.2
population = 33000000

[initial]
S = 30000000
E = 40000
I = 40000
R = 2920000

[time]
t_start = 0
t_end = 400
dt = 0.1
control_start = 0

[feedback]
mode = instantaneous

[constraint]
compartment = E
bound = 150000
alpha = 0.02
)";

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all{
      {"sir_fig2", "SIR, infected bounded at 200000, 11-day delay with predictor", kSirFig2},
      {"sihrd_fig3", "SIHRD, hospitalized <= 40000 and deaths <= 400000, 9-day delay with predictor",
       kSihrdFig3},
      {"sir_delay_danger", "SIR early growth, 18-day delay without prediction", kSirDelayDanger},
      {"seir_exposed", "SEIR, exposed bounded at 150000, instantaneous feedback", kSeirExposed},
  };
  return all;
}

Scenario load_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return parse_scenario_text(p.text, "preset:" + name);
  }
  throw ValidationError("unknown preset '" + name + "'");
}

Scenario with_parameter(const Scenario& base, const std::string& parameter, double value) {
  Scenario sc = base;
  const auto bad = [&](const std::string& why) {
    return ValidationError("cannot set '" + parameter + "': " + why);
  };

  if (parameter == "tau") {
    if (auto* d = std::get_if<DelayedFeedback>(&sc.feedback)) {
      d->tau = value;
    } else if (auto* p = std::get_if<PredictorFeedback>(&sc.feedback)) {
      p->tau = value;
    } else {
      throw bad("scenario uses instantaneous feedback");
    }
  } else if (parameter == "dt") {
    sc.dt = value;
  } else if (parameter == "predictor_dt") {
    sc.predictor_dt = value;
  } else if (parameter == "delta") {
    if (!sc.disturbance) sc.disturbance = BoundedDisturbance{};
    sc.disturbance->delta = value;
  } else if (parameter == "seed") {
    if (!(value >= 0.0) || value != std::floor(value)) throw bad("seed must be a non-negative integer");
    if (!sc.disturbance) sc.disturbance = BoundedDisturbance{};
    sc.disturbance->seed = static_cast<std::uint64_t>(value);
  } else if (parameter == "control_start") {
    sc.control_start = value;
  } else if (parameter == "t_end") {
    sc.t_end = value;
  } else if (parameter == "alpha" || parameter == "alpha_e") {
    bool any = false;
    for (auto& c : sc.constraints) {
      if (parameter == "alpha") {
        c.alpha = value;
        any = true;
      } else if (c.group == CompartmentGroup::Outlet) {
        c.alpha_e = value;
        any = true;
      }
    }
    if (!any) throw bad("no matching constraint");
  } else if (parameter.rfind("bound.", 0) == 0) {
    const std::size_t flat = sc.spec.index_of(parameter.substr(6));
    bool any = false;
    for (auto& c : sc.constraints) {
      if (c.flat_index(sc.spec) == flat) {
        c.bound = value;
        any = true;
      }
    }
    if (!any) throw bad("no constraint on that compartment");
  } else if (parameter.rfind("initial.", 0) == 0) {
    const std::size_t flat = sc.spec.index_of(parameter.substr(8));
    Vector v = sc.state0.values();
    v[flat] = value;
    sc.state0 = ModelState::from_flat(std::move(v), sc.spec.n());
  } else {
    ModelParams params = sc.spec.params();
    double* slot = param_slot(params, parameter);
    if (!slot) throw bad("unknown parameter");
    *slot = value;
    sc.spec = build_model(params);
  }
  validate_scenario(sc);
  return sc;
}

}  // namespace epiguard
