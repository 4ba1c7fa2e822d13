#include "heatlab/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "heatlab/error.hpp"
#include "heatlab/numerics.hpp"

namespace heatlab {

namespace {

// Thrown by the field setters; the parser turns it into a line-numbered issue.
struct BadValue {
  std::string message;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, std::string_view seps) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b = s.find_first_not_of(seps, i);
    if (b == std::string_view::npos) break;
    auto e = s.find_first_of(seps, b);
    if (e == std::string_view::npos) e = s.size();
    out.push_back(s.substr(b, e - b));
    i = e;
  }
  return out;
}

double to_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw BadValue{"'" + std::string(s) + "' is not a number"};
  }
  return v;
}

long long to_integer(std::string_view s) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw BadValue{"'" + std::string(s) + "' is not an integer"};
  }
  return v;
}

int to_int(std::string_view s) {
  const long long v = to_integer(s);
  if (v < -1'000'000'000LL || v > 1'000'000'000LL) throw BadValue{"integer out of range"};
  return static_cast<int>(v);
}

std::vector<double> to_list(std::string_view s) {
  std::vector<double> out;
  for (auto tok : split(s, ", \t")) out.push_back(to_double(tok));
  if (out.empty()) throw BadValue{"empty list"};
  return out;
}

Vec2 to_point(std::string_view s) {
  const auto v = to_list(s);
  if (v.size() != 2) throw BadValue{"expected two coordinates, got " + std::to_string(v.size())};
  return {v[0], v[1]};
}

std::vector<cplx> to_points(std::string_view s) {
  std::vector<cplx> out;
  for (auto item : split(s, ";")) {
    if (trim(item).empty()) continue;
    out.push_back(to_complex(to_point(item)));
  }
  if (out.empty()) throw BadValue{"empty point list"};
  return out;
}

// "p1:m" / "p2:m"
std::pair<int, int> parse_model(std::string_view s) {
  s = trim(s);
  if (s.size() < 4 || s[0] != 'p' || (s[1] != '1' && s[1] != '2') || s[2] != ':') {
    throw BadValue{"model must be p1:m or p2:m, got '" + std::string(s) + "'"};
  }
  return {s[1] - '0', to_int(s.substr(3))};
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"polynomial.model",
       [](RunConfig& c, std::string_view v) {
         parse_model(v);
         c.model = std::string(trim(v));
         c.coeffs.clear();
       }},
      {"operator.tau", [](RunConfig& c, std::string_view v) { c.tau = to_double(v); }},
      {"grid.L", [](RunConfig& c, std::string_view v) { c.half_width = to_double(v); }},
      {"grid.n", [](RunConfig& c, std::string_view v) { c.n = to_int(v); }},
      {"solver.dt", [](RunConfig& c, std::string_view v) { c.dt = to_double(v); }},
      {"solver.schedule", [](RunConfig& c, std::string_view v) { c.schedule = to_list(v); }},
      {"solver.source", [](RunConfig& c, std::string_view v) { c.source = to_complex(to_point(v)); }},
      {"mc.n_paths", [](RunConfig& c, std::string_view v) { c.n_paths = to_int(v); }},
      {"mc.n_t", [](RunConfig& c, std::string_view v) { c.n_t = to_int(v); }},
      {"mc.seed",
       [](RunConfig& c, std::string_view v) {
         const long long s = to_integer(v);
         if (s < 0) throw BadValue{"seed must be nonnegative"};
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"mc.x", [](RunConfig& c, std::string_view v) { c.mc_x = to_point(v); }},
      {"mc.y", [](RunConfig& c, std::string_view v) { c.mc_y = to_point(v); }},
      {"mc.s", [](RunConfig& c, std::string_view v) { c.mc_s = to_double(v); }},
      {"geom.points", [](RunConfig& c, std::string_view v) { c.geom_points = to_points(v); }},
      {"geom.deltas", [](RunConfig& c, std::string_view v) { c.geom_deltas = to_list(v); }},
      {"rho.pairs", [](RunConfig& c, std::string_view v) { c.rho_pairs = to_int(v); }},
      {"gfield.s_max", [](RunConfig& c, std::string_view v) { c.gfield_s_max = to_double(v); }},
      {"gfield.points", [](RunConfig& c, std::string_view v) { c.gfield_points = to_int(v); }},
      {"verify.suite", [](RunConfig& c, std::string_view v) { c.suite = std::string(trim(v)); }},
      {"verify.appendix_m",
       [](RunConfig& c, std::string_view v) {
         c.appendix_m.clear();
         for (auto tok : split(v, ", \t")) c.appendix_m.push_back(to_int(tok));
         if (c.appendix_m.empty()) throw BadValue{"empty list"};
       }},
  };
  return table;
}

bool known_section(std::string_view s) {
  for (const char* name : {"polynomial", "operator", "grid", "solver", "mc", "geom", "rho", "gfield", "verify"}) {
    if (s == name) return true;
  }
  return false;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Polynomial RunConfig::polynomial() const {
  if (!coeffs.empty()) return Polynomial::make(coeffs);
  const auto [family, m] = parse_model(model);
  require(m >= 1, "model exponent m must be >= 1");
  return family == 1 ? model_p1(m) : model_p2(m);
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  if (coeffs.empty()) {
    os << "polynomial.model = " << model << "\n";
  } else {
    for (const auto& [jk, c] : coeffs) {
      os << "polynomial.coeff = " << jk.first << " " << jk.second << " " << fmt(c.real()) << " "
         << fmt(c.imag()) << "\n";
    }
  }
  const auto list = [](const auto& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(static_cast<double>(v[i]));
    return s;
  };
  os << "operator.tau = " << fmt(tau) << "\n"
     << "operator.oracle_mode = " << (oracle_mode ? 1 : 0) << "\n"
     << "grid.L = " << fmt(half_width) << "\n"
     << "grid.n = " << n << "\n"
     << "solver.dt = " << fmt(dt) << "\n"
     << "solver.schedule = " << list(schedule) << "\n"
     << "solver.source = " << fmt(source.real()) << ", " << fmt(source.imag()) << "\n"
     << "mc.n_paths = " << n_paths << "\n"
     << "mc.n_t = " << n_t << "\n"
     << "mc.seed = " << seed << "\n"
     << "mc.x = " << fmt(mc_x.x1) << ", " << fmt(mc_x.x2) << "\n"
     << "mc.y = " << fmt(mc_y.x1) << ", " << fmt(mc_y.x2) << "\n"
     << "mc.s = " << fmt(mc_s) << "\n"
     << "geom.points = ";
  for (std::size_t i = 0; i < geom_points.size(); ++i) {
    os << (i ? "; " : "") << fmt(geom_points[i].real()) << " " << fmt(geom_points[i].imag());
  }
  os << "\n"
     << "geom.deltas = " << list(geom_deltas) << "\n"
     << "rho.pairs = " << rho_pairs << "\n"
     << "gfield.s_max = " << fmt(gfield_s_max) << "\n"
     << "gfield.points = " << gfield_points << "\n"
     << "verify.suite = " << suite << "\n"
     << "verify.appendix_m = " << list(appendix_m) << "\n";
  return os.str();
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical())));
  return buf;
}

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> errs;
  const auto check = [&](bool ok, std::string msg) {
    if (!ok) errs.push_back(std::move(msg));
  };
  const auto finite = [](double v) { return std::isfinite(v); };

  if (c.coeffs.empty()) {
    try {
      const auto [family, m] = parse_model(c.model);
      (void)family;
      check(m >= 1 && m <= 12, "polynomial.model: m must lie in [1, 12]");
    } catch (const BadValue& e) {
      errs.push_back("polynomial.model: " + e.message);
    }
  }
  try {
    (void)c.polynomial();
  } catch (const Error& e) {
    errs.push_back(std::string("polynomial: ") + error_code_name(e.code()) + ": " + e.what());
  } catch (const BadValue&) {
    // already reported
  }

  if (!finite(c.tau)) {
    errs.push_back("operator.tau must be finite");
  } else if (c.tau < 0.0) {
    errs.push_back("operator.tau = " + fmt(c.tau) +
                   ": negative tau is a non-goal (the weight e^{-tau p} is only studied for tau > 0)");
  } else if (c.tau == 0.0 && !c.oracle_mode) {
    errs.push_back("operator.tau = 0 is only allowed in oracle mode (--oracle-mode)");
  }

  check(finite(c.half_width) && c.half_width > 0.0, "grid.L must be positive");
  check(c.n >= 33 && c.n <= 2049, "grid.n must lie in [33, 2049]");
  check(c.n % 2 == 1, "grid.n must be odd so the origin is a node");
  check(finite(c.dt) && c.dt > 0.0, "solver.dt must be positive");
  {
    bool ok = !c.schedule.empty();
    double prev = 0.0;
    for (double s : c.schedule) {
      ok = ok && finite(s) && s > prev;
      prev = s;
    }
    check(ok, "solver.schedule must be positive and strictly ascending");
  }
  check(finite(c.source.real()) && finite(c.source.imag()) &&
            std::abs(c.source.real()) < c.half_width && std::abs(c.source.imag()) < c.half_width,
        "solver.source must lie strictly inside the grid");

  check(c.n_paths >= 1000, "mc.n_paths must be >= 1000");
  check(c.n_t >= 64, "mc.n_t must be >= 64");
  check(finite(c.mc_s) && c.mc_s > 0.0, "mc.s must be positive");
  check(finite(c.mc_x.x1) && finite(c.mc_x.x2) && finite(c.mc_y.x1) && finite(c.mc_y.x2),
        "mc.x and mc.y must be finite");

  check(!c.geom_points.empty(), "geom.points must not be empty");
  for (const auto& z : c.geom_points) check(finite(z.real()) && finite(z.imag()), "geom.points must be finite");
  for (double d : c.geom_deltas) check(finite(d) && d > 0.0, "geom.deltas must be positive");
  check(c.rho_pairs >= 1 && c.rho_pairs <= 10000, "rho.pairs must lie in [1, 10000]");
  check(finite(c.gfield_s_max), "gfield.s_max must be finite");
  check(c.gfield_points >= 60, "gfield.points must be >= 60");

  static const char* suites[] = {"gaussian", "longtime", "energy", "derivs", "subsolution",
                                 "scaling", "gbounds", "appendix", "all", "semigroup", "mc", "free"};
  bool known = false;
  for (const char* s : suites) known = known || c.suite == s;
  check(known, "verify.suite: unknown suite '" + c.suite + "'");
  check(!c.appendix_m.empty(), "verify.appendix_m must not be empty");
  for (int m : c.appendix_m) check(m >= 1 && m <= 8, "verify.appendix_m entries must lie in [1, 8]");
  return errs;
}

void set_config_value(RunConfig& cfg, std::string_view dotted_key, std::string_view value) {
  const auto& table = setters();
  const auto it = table.find(dotted_key);
  if (it == table.end()) fail(ErrorCode::ParseError, "unknown key '" + std::string(dotted_key) + "'");
  try {
    it->second(cfg, value);
  } catch (const BadValue& e) {
    fail(ErrorCode::ParseError, std::string(dotted_key) + ": " + e.message);
  }
}

RunConfig parse_config(std::string_view text, bool oracle_mode) {
  RunConfig cfg;
  cfg.oracle_mode = oracle_mode;
  std::vector<std::string> issues;
  const auto issue = [&](int line, const std::string& msg) {
    issues.push_back("line " + std::to_string(line) + ": " + msg);
  };

  std::string section;
  CoeffTable coeffs;
  bool model_given = false;
  std::map<std::string, int> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }

    if (line.front() == '[') {
      if (line.back() != ']') {
        issue(line_no, "unterminated section header");
        continue;
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!known_section(section)) issue(line_no, "unknown section [" + section + "]");
      continue;
    }
    if (section.empty()) {
      issue(line_no, "entry outside any [section]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      if (section != "polynomial") {
        issue(line_no, "expected key = value");
        continue;
      }
      const auto tok = split(line, " \t");
      if (tok.size() != 4) {
        issue(line_no, "coefficient line must be 'j k re im'");
        continue;
      }
      try {
        const int j = to_int(tok[0]), k = to_int(tok[1]);
        if (j < 0 || k < 0 || j + k > 40) throw BadValue{"indices must satisfy j, k >= 0 and j + k <= 40"};
        const cplx c{to_double(tok[2]), to_double(tok[3])};
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw BadValue{"coefficient must be finite"};
        if (coeffs.count({j, k})) throw BadValue{"duplicate coefficient (" + std::to_string(j) + ", " + std::to_string(k) + ")"};
        coeffs[{j, k}] = c;
      } catch (const BadValue& e) {
        issue(line_no, "coefficient line: " + e.message);
      }
      continue;
    }

    const std::string key = section + "." + std::string(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!known_section(section)) continue;  // already reported at the header
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) {
      issue(line_no, "unknown key '" + key + "'");
      continue;
    }
    if (const auto prev = seen.find(key); prev != seen.end()) {
      issue(line_no, "duplicate key '" + key + "' (first set on line " + std::to_string(prev->second) + ")");
      continue;
    }
    seen[key] = line_no;
    try {
      it->second(cfg, value);
      if (key == "polynomial.model") model_given = true;
    } catch (const BadValue& e) {
      issue(line_no, key + ": " + e.message);
    }
    if (end == text.size()) break;
  }
  if (model_given && !coeffs.empty()) {
    issues.push_back("polynomial: give either model = ... or coefficient lines, not both");
  }
  if (!issues.empty()) {
    std::string msg = "configuration has " + std::to_string(issues.size()) + " syntax error(s):";
    for (const auto& s : issues) msg += "\n  " + s;
    fail(ErrorCode::ParseError, msg);
  }
  if (!coeffs.empty()) {
    cfg.model.clear();
    cfg.coeffs = std::move(coeffs);
  }

  const auto errs = validate(cfg);
  if (!errs.empty()) {
    std::string msg = "configuration has " + std::to_string(errs.size()) + " invalid value(s):";
    for (const auto& s : errs) msg += "\n  " + s;
    fail(ErrorCode::ValidationError, msg);
  }
  return cfg;
}

}  // namespace heatlab
