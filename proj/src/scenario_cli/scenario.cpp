#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>
#include <toml.hpp>

#include "gvf3d/scenario.hpp"

namespace gvf3d {

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

ImplicitPath Scenario::build_path() const {
  if (const auto* b = std::get_if<BuiltinPathSpec>(&path)) {
    if (b->name == "cylinder_intersection") return builtin_cylinder_intersection(b->a, b->b, b->R, b->r);
    if (b->name == "helix") return builtin_helix();
    if (b->name == "line") return builtin_line();
    throw ConfigError("path.builtin", "unknown builtin path '" + b->name + "'");
  }
  const auto& e = std::get<ExpressionPathSpec>(path);
  return expression_path(e.phi1, e.phi2, e.boundedness);
}

namespace {

// Reads one TOML table, recording which keys were consumed so that unknown
// keys can be reported with their full dotted path.
class TableReader {
 public:
  TableReader(const toml::table& table, std::string prefix) : table_(table), prefix_(std::move(prefix)) {}

  std::string path(std::string_view key) const {
    return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key);
  }

  bool has(std::string_view key) const { return table_.contains(key); }

  const toml::node* node(std::string_view key) {
    seen_.insert(std::string(key));
    return table_.get(key);
  }

  double number(std::string_view key, std::optional<double> fallback = std::nullopt) {
    const toml::node* n = node(key);
    if (!n) {
      if (fallback) return *fallback;
      throw ConfigError(path(key), "required number is missing");
    }
    if (auto v = n->value<double>(); v && (n->is_floating_point() || n->is_integer())) return *v;
    throw ConfigError(path(key), "expected a number");
  }

  long integer(std::string_view key, long fallback) {
    const toml::node* n = node(key);
    if (!n) return fallback;
    if (!n->is_integer()) throw ConfigError(path(key), "expected an integer");
    return static_cast<long>(*n->value<std::int64_t>());
  }

  bool boolean(std::string_view key, bool fallback) {
    const toml::node* n = node(key);
    if (!n) return fallback;
    if (!n->is_boolean()) throw ConfigError(path(key), "expected true or false");
    return *n->value<bool>();
  }

  std::string string(std::string_view key, std::optional<std::string> fallback = std::nullopt) {
    const toml::node* n = node(key);
    if (!n) {
      if (fallback) return *fallback;
      throw ConfigError(path(key), "required string is missing");
    }
    if (!n->is_string()) throw ConfigError(path(key), "expected a string");
    return *n->value<std::string>();
  }

  std::vector<double> numbers(std::string_view key, std::optional<std::size_t> size = std::nullopt) {
    const toml::node* n = node(key);
    if (!n) throw ConfigError(path(key), "required array is missing");
    const toml::array* arr = n->as_array();
    if (!arr) throw ConfigError(path(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const toml::node& item = *arr->get(i);
      if (!(item.is_floating_point() || item.is_integer()))
        throw ConfigError(path(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(*item.value<double>());
    }
    if (size && out.size() != *size)
      throw ConfigError(path(key), "expected " + std::to_string(*size) + " entries, got " + std::to_string(out.size()));
    return out;
  }

  Vec3 vec3(std::string_view key, std::optional<Vec3> fallback = std::nullopt) {
    if (!has(key) && fallback) {
      seen_.insert(std::string(key));
      return *fallback;
    }
    const auto v = numbers(key, 3);
    return Vec3(v[0], v[1], v[2]);
  }

  TableReader sub(std::string_view key, bool required) {
    const toml::node* n = node(key);
    if (!n) {
      if (required) throw ConfigError(path(key), "required table is missing");
      return TableReader(empty_, path(key));
    }
    const toml::table* t = n->as_table();
    if (!t) throw ConfigError(path(key), "expected a table");
    return TableReader(*t, path(key));
  }

  void finish() const {
    for (const auto& [k, v] : table_)
      if (!seen_.contains(std::string(k.str()))) throw ConfigError(path(k.str()), "unknown key");
  }

 private:
  static inline const toml::table empty_{};
  const toml::table& table_;
  std::string prefix_;
  std::set<std::string> seen_;
};

template <class F>
auto checked(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
}

Boundedness parse_boundedness(const std::string& s, const std::string& field) {
  if (s == "bounded") return Boundedness::Bounded;
  if (s == "unbounded") return Boundedness::Unbounded;
  if (s == "unknown") return Boundedness::Unknown;
  throw ConfigError(field, "expected bounded, unbounded or unknown");
}

SystemKind parse_system(const std::string& s) {
  if (s == "raw") return SystemKind::Raw;
  if (s == "normalized") return SystemKind::Normalized;
  if (s == "perturbed") return SystemKind::Perturbed;
  if (s == "aircraft") return SystemKind::Aircraft;
  throw ConfigError("system.kind", "expected raw, normalized, perturbed or aircraft");
}

PathSpec read_path(TableReader& t) {
  const bool builtin = t.has("builtin");
  const bool expr = t.has("phi1") || t.has("phi2");
  if (builtin && expr) throw ConfigError("path", "builtin and phi1/phi2 are mutually exclusive");
  if (!builtin && !expr) throw ConfigError("path", "either builtin or phi1/phi2 is required");
  if (builtin) {
    BuiltinPathSpec b;
    b.name = t.string("builtin");
    if (b.name == "cylinder_intersection") {
      b.a = t.number("a");
      b.b = t.number("b");
      b.R = t.number("R");
      b.r = t.number("r");
      if (!(b.R > 0.0)) throw ConfigError("path.R", "radius must be positive");
      if (!(b.r > 0.0)) throw ConfigError("path.r", "radius must be positive");
    } else if (b.name != "helix" && b.name != "line") {
      throw ConfigError("path.builtin", "expected cylinder_intersection, helix or line");
    }
    t.finish();
    return b;
  }
  ExpressionPathSpec e;
  e.phi1 = t.string("phi1");
  e.phi2 = t.string("phi2");
  e.boundedness = parse_boundedness(t.string("boundedness", "unknown"), "path.boundedness");
  for (const auto& [key, src] : {std::pair{"phi1", &e.phi1}, std::pair{"phi2", &e.phi2}}) {
    try {
      (void)parse_expression(*src);
    } catch (const ParseError& err) {
      throw ConfigError(std::string("path.") + key, err.what());
    }
  }
  t.finish();
  return e;
}

Disturbance read_disturbance(TableReader& t) {
  const std::string kind = t.string("kind", "zero");
  Disturbance d;
  const std::string field = t.path("kind");
  if (kind == "zero") {
    d = Disturbance::zero();
  } else if (kind == "constant") {
    d = checked(field, [&] { return Disturbance::constant(t.vec3("vector")); });
  } else if (kind == "sinusoid") {
    d = checked(field, [&] {
      return Disturbance::sinusoid(t.vec3("amplitude"), t.vec3("frequency"), t.vec3("phase", Vec3::Zero()));
    });
  } else if (kind == "decaying") {
    d = checked(field, [&] { return Disturbance::decaying(t.vec3("d0"), t.number("rate")); });
  } else {
    throw ConfigError(field, "expected zero, constant, sinusoid or decaying");
  }
  t.finish();
  return d;
}

IntegratorConfig read_integrator(TableReader& t) {
  IntegratorConfig c;
  const std::string method = t.string("method", "rk4");
  if (method == "rk4") {
    c.method = IntegratorMethod::Rk4;
  } else if (method == "rk45") {
    c.method = IntegratorMethod::Rk45;
  } else {
    throw ConfigError(t.path("method"), "expected rk4 or rk45");
  }
  c.dt = t.number("dt", c.dt);
  c.rtol = t.number("rtol", c.rtol);
  c.atol = t.number("atol", c.atol);
  c.dt_min = t.number("dt_min", c.dt_min);
  c.dt_max = t.number("dt_max", c.dt_max);
  c.record_every = static_cast<int>(t.integer("record_every", c.record_every));
  t.finish();
  checked(t.path("dt"), [&] {
    c.validate();
    return 0;
  });
  return c;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite value in scenario");
  std::string s = buf;
  // Keep TOML floats recognizable as floats.
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string fmt(const Vec3& v) { return "[" + fmt(v.x()) + ", " + fmt(v.y()) + ", " + fmt(v.z()) + "]"; }

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Scenario parse_scenario(std::string_view text, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML syntax error at line " << e.source().begin.line << ", column " << e.source().begin.column << ": "
        << e.description();
    throw ConfigError("", msg.str());
  }

  TableReader top(root, "");
  Scenario s;
  s.name = top.string("name", s.name);
  s.t_end = top.number("t_end", s.t_end);
  if (!(s.t_end > 0.0) || !std::isfinite(s.t_end)) throw ConfigError("t_end", "must be positive and finite");

  {
    TableReader p = top.sub("path", true);
    s.path = read_path(p);
  }
  {
    TableReader f = top.sub("field", false);
    s.k1 = f.number("k1", s.k1);
    s.k2 = f.number("k2", s.k2);
    f.finish();
    checked("field", [&] { return s.field_params(); });
  }
  {
    TableReader sys = top.sub("system", true);
    s.system = parse_system(sys.string("kind"));
    const std::size_t dim = s.system == SystemKind::Aircraft ? 5 : 3;
    s.initial_state = sys.numbers("initial_state", dim);
    for (double v : s.initial_state)
      if (!std::isfinite(v)) throw ConfigError("system.initial_state", "entries must be finite");
    if (s.system == SystemKind::Aircraft && s.initial_state[4] < 0.0)
      throw ConfigError("system.initial_state", "airspeed must be non-negative");

    if (sys.has("aircraft") && s.system != SystemKind::Aircraft)
      throw ConfigError("system.aircraft", "only allowed when kind = \"aircraft\"");
    if (sys.has("disturbance") && s.system != SystemKind::Perturbed)
      throw ConfigError("system.disturbance", "only allowed when kind = \"perturbed\"");
    if (s.system == SystemKind::Aircraft) {
      TableReader a = sys.sub("aircraft", false);
      s.aircraft.tau_z = a.number("tau_z", s.aircraft.tau_z);
      s.aircraft.tau_theta = a.number("tau_theta", s.aircraft.tau_theta);
      s.aircraft.tau_s = a.number("tau_s", s.aircraft.tau_s);
      s.aircraft.k_theta = a.number("k_theta", s.aircraft.k_theta);
      s.aircraft.s_star = a.number("s_star", s.aircraft.s_star);
      a.finish();
      checked("system.aircraft", [&] {
        s.aircraft.validate();
        return 0;
      });
    }
    if (s.system == SystemKind::Perturbed) {
      TableReader d = sys.sub("disturbance", false);
      s.disturbance = read_disturbance(d);
    }
    sys.finish();
  }
  {
    TableReader i = top.sub("integrator", false);
    s.integrator = read_integrator(i);
  }
  {
    TableReader o = top.sub("output", false);
    s.output.prefix = o.string("prefix", s.output.prefix);
    if (s.output.prefix.empty() || s.output.prefix.find('/') != std::string::npos)
      throw ConfigError("output.prefix", "must be a plain file name");
    s.output.svg = o.boolean("svg", s.output.svg);
    s.output.view = o.string("view", s.output.view);
    checked("output.view", [&] { return parse_view(s.output.view); });
    o.finish();
  }
  top.finish();
  return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read scenario file " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), file.string());
}

std::string to_toml(const Scenario& s) {
  std::ostringstream out;
  out << "name = " << quote(s.name) << "\n";
  out << "t_end = " << fmt(s.t_end) << "\n\n[path]\n";
  if (const auto* b = std::get_if<BuiltinPathSpec>(&s.path)) {
    out << "builtin = " << quote(b->name) << "\n";
    if (b->name == "cylinder_intersection")
      out << "a = " << fmt(b->a) << "\nb = " << fmt(b->b) << "\nR = " << fmt(b->R) << "\nr = " << fmt(b->r) << "\n";
  } else {
    const auto& e = std::get<ExpressionPathSpec>(s.path);
    out << "phi1 = " << quote(e.phi1) << "\nphi2 = " << quote(e.phi2) << "\nboundedness = "
        << quote(to_string(e.boundedness)) << "\n";
  }
  out << "\n[field]\nk1 = " << fmt(s.k1) << "\nk2 = " << fmt(s.k2) << "\n";
  out << "\n[system]\nkind = " << quote(to_string(s.system)) << "\ninitial_state = [";
  for (std::size_t i = 0; i < s.initial_state.size(); ++i) out << (i ? ", " : "") << fmt(s.initial_state[i]);
  out << "]\n";
  if (s.system == SystemKind::Aircraft) {
    const AircraftParams& a = s.aircraft;
    out << "\n[system.aircraft]\ntau_z = " << fmt(a.tau_z) << "\ntau_theta = " << fmt(a.tau_theta)
        << "\ntau_s = " << fmt(a.tau_s) << "\nk_theta = " << fmt(a.k_theta) << "\ns_star = " << fmt(a.s_star)
        << "\n";
  }
  if (s.system == SystemKind::Perturbed) {
    const Disturbance& d = s.disturbance;
    out << "\n[system.disturbance]\nkind = " << quote(to_string(d.kind())) << "\n";
    switch (d.kind()) {
      case Disturbance::Kind::Zero: break;
      case Disturbance::Kind::Constant: out << "vector = " << fmt(d.vector()) << "\n"; break;
      case Disturbance::Kind::Sinusoid:
        out << "amplitude = " << fmt(d.vector()) << "\nfrequency = " << fmt(d.frequency())
            << "\nphase = " << fmt(d.phase()) << "\n";
        break;
      case Disturbance::Kind::Decaying: out << "d0 = " << fmt(d.vector()) << "\nrate = " << fmt(d.rate()) << "\n"; break;
    }
  }
  const IntegratorConfig& c = s.integrator;
  out << "\n[integrator]\nmethod = " << quote(to_string(c.method)) << "\ndt = " << fmt(c.dt)
      << "\nrtol = " << fmt(c.rtol) << "\natol = " << fmt(c.atol) << "\ndt_min = " << fmt(c.dt_min)
      << "\ndt_max = " << fmt(c.dt_max) << "\nrecord_every = " << c.record_every << "\n";
  out << "\n[output]\nprefix = " << quote(s.output.prefix) << "\nsvg = " << (s.output.svg ? "true" : "false")
      << "\nview = " << quote(s.output.view) << "\n";
  return out.str();
}

std::string scenario_hash(const Scenario& s) {
  const std::string text = to_toml(s);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

nlohmann::json to_json(const Scenario& s) {
  nlohmann::json path;
  if (const auto* b = std::get_if<BuiltinPathSpec>(&s.path)) {
    path = {{"builtin", b->name}};
    if (b->name == "cylinder_intersection") {
      path["a"] = b->a;
      path["b"] = b->b;
      path["R"] = b->R;
      path["r"] = b->r;
    }
  } else {
    const auto& e = std::get<ExpressionPathSpec>(s.path);
    path = {{"phi1", e.phi1}, {"phi2", e.phi2}, {"boundedness", to_string(e.boundedness)}};
  }
  nlohmann::json system = {{"kind", to_string(s.system)}, {"initial_state", s.initial_state}};
  if (s.system == SystemKind::Aircraft)
    system["aircraft"] = {{"tau_z", s.aircraft.tau_z},     {"tau_theta", s.aircraft.tau_theta},
                          {"tau_s", s.aircraft.tau_s},     {"k_theta", s.aircraft.k_theta},
                          {"s_star", s.aircraft.s_star}};
  if (s.system == SystemKind::Perturbed) {
    const Disturbance& d = s.disturbance;
    auto v = [](const Vec3& x) { return std::vector<double>{x.x(), x.y(), x.z()}; };
    nlohmann::json dj = {{"kind", to_string(d.kind())}, {"sup_norm", d.sup_norm()}};
    if (d.kind() == Disturbance::Kind::Constant) dj["vector"] = v(d.vector());
    if (d.kind() == Disturbance::Kind::Sinusoid) {
      dj["amplitude"] = v(d.vector());
      dj["frequency"] = v(d.frequency());
      dj["phase"] = v(d.phase());
    }
    if (d.kind() == Disturbance::Kind::Decaying) {
      dj["d0"] = v(d.vector());
      dj["rate"] = d.rate();
    }
    system["disturbance"] = dj;
  }
  const IntegratorConfig& c = s.integrator;
  return {{"name", s.name},
          {"t_end", s.t_end},
          {"path", path},
          {"field", {{"k1", s.k1}, {"k2", s.k2}}},
          {"system", system},
          {"integrator",
           {{"method", to_string(c.method)},
            {"dt", c.dt},
            {"rtol", c.rtol},
            {"atol", c.atol},
            {"dt_min", c.dt_min},
            {"dt_max", c.dt_max},
            {"record_every", c.record_every}}},
          {"output", {{"prefix", s.output.prefix}, {"svg", s.output.svg}, {"view", s.output.view}}}};
}

}  // namespace gvf3d
