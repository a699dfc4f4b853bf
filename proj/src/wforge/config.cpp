#include "wforge/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "wforge/errors.hpp"

namespace wforge {

namespace {

// --- expression grammar -------------------------------------------------------
//
//   expr   := term (('+' | '-') term)*
//   term   := unary ('*' unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' number)?
//   atom   := number | 'x1' | 'x2' | 'pi' | 'sin' '(' expr ')'
//           | 'cos' '(' expr ')' | '(' expr ')'

struct ExprParser {
  const std::string& s;
  std::size_t pos = 0;
  int line = 1, col = 1;

  explicit ExprParser(const std::string& text) : s(text) {}

  [[noreturn]] void fail(const std::string& what) const {
    char msg[160];
    std::snprintf(msg, sizeof(msg), "expression parse error at line %d, column %d: %s", line, col,
                  what.c_str());
    throw ConfigError(msg);
  }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos < s.size(); ++i, ++pos) {
      if (s[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  }

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) advance(1);
  }

  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      advance(1);
      return true;
    }
    return false;
  }

  bool eat_word(const char* w) {
    skip_ws();
    const std::size_t n = std::char_traits<char>::length(w);
    if (s.compare(pos, n, w) != 0) return false;
    // Reject prefixes of longer identifiers (e.g. "pi" in "pix").
    if (pos + n < s.size()) {
      const char next = s[pos + n];
      if (std::isalnum(static_cast<unsigned char>(next)) || next == '_') return false;
    }
    advance(n);
    return true;
  }

  double number() {
    skip_ws();
    const char* begin = s.c_str() + pos;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    advance(static_cast<std::size_t>(end - begin));
    return v;
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (eat('+'))
        e = e + term();
      else if (eat('-'))
        e = e - term();
      else
        return e;
    }
  }

  Expr term() {
    Expr e = unary();
    while (eat('*')) e = e * unary();
    return e;
  }

  Expr unary() {
    if (eat('-')) return -unary();
    return power();
  }

  Expr power() {
    Expr base = atom();
    if (eat('^')) return pow_of(std::move(base), number());
    return base;
  }

  Expr atom() {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end of expression");
    if (eat_word("x1")) return x1();
    if (eat_word("x2")) return x2();
    if (eat_word("pi")) return constant(std::acos(-1.0));
    if (eat_word("sin")) {
      if (!eat('(')) fail("expected '(' after sin");
      Expr e = expr();
      if (!eat(')')) fail("expected ')' after sin argument");
      return sin_of(std::move(e));
    }
    if (eat_word("cos")) {
      if (!eat('(')) fail("expected '(' after cos");
      Expr e = expr();
      if (!eat(')')) fail("expected ')' after cos argument");
      return cos_of(std::move(e));
    }
    if (eat('(')) {
      Expr e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    const char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '+' || c == '-')
      return constant(number());
    fail(std::string("unexpected character '") + c + "'");
  }
};

}  // namespace

Expr parse_expression(const std::string& text) {
  ExprParser p(text);
  Expr e = p.expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing characters after expression");
  return e;
}

namespace {

struct RawConfig {
  // section -> key -> (value, line number)
  std::map<std::string, std::map<std::string, std::pair<std::string, int>>> kv;
};

RawConfig parse_sections(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string t) {
      const auto b = t.find_first_not_of(" \t\r");
      const auto e = t.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        char msg[96];
        std::snprintf(msg, sizeof(msg), "config parse error at line %d: unterminated section",
                      lineno);
        throw ConfigError(msg);
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      char msg[96];
      std::snprintf(msg, sizeof(msg), "config parse error at line %d: expected key = value",
                    lineno);
      throw ConfigError(msg);
    }
    raw.kv[section][trim(line.substr(0, eq))] = {trim(line.substr(eq + 1)), lineno};
  }
  return raw;
}

class Reader {
 public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {}

  std::optional<std::string> get(const std::string& sec, const std::string& key) const {
    const auto s = raw_.kv.find(sec);
    if (s == raw_.kv.end()) return std::nullopt;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second.first;
  }

  double num(const std::string& sec, const std::string& key, double dflt) const {
    const auto v = get(sec, key);
    if (!v) return dflt;
    try {
      std::size_t used = 0;
      const double x = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing");
      return x;
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + sec + "." + key + "' is not a number: '" + *v + "'");
    }
  }

  int integer(const std::string& sec, const std::string& key, int dflt) const {
    const double x = num(sec, key, dflt);
    if (x != std::floor(x))
      throw ConfigError("config: key '" + sec + "." + key + "' must be an integer");
    return static_cast<int>(x);
  }

  bool flag(const std::string& sec, const std::string& key, bool dflt) const {
    const auto v = get(sec, key);
    if (!v) return dflt;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw ConfigError("config: key '" + sec + "." + key + "' must be true or false");
  }

 private:
  const RawConfig& raw_;
};

}  // namespace

RunConfig parse_config(const std::string& text) {
  const RawConfig raw = parse_sections(text);
  const Reader r(raw);
  RunConfig c;

  const double xmin = r.num("domain", "xmin", 0.0);
  const double xmax = r.num("domain", "xmax", 1.0);
  const double ymin = r.num("domain", "ymin", 0.0);
  const double ymax = r.num("domain", "ymax", 1.0);
  const double margin = r.num("domain", "margin", 0.25);
  c.domain = Domain({xmin, ymin}, {xmax, ymax}, margin);

  auto expr_of = [&](const std::string& key, const std::string& dflt, std::string* keep) {
    const auto v = r.get("initial", key);
    const std::string text_value = v.value_or(dflt);
    if (keep) *keep = text_value;
    return parse_expression(text_value);
  };
  c.v0 = expr_of("v0", "0", &c.v0_text);
  c.w0[0] = expr_of("w1", "0", &c.w1_text);
  c.w0[1] = expr_of("w2", "0", &c.w2_text);

  const bool has_a = r.get("initial", "a11").has_value();
  const bool has_f = r.get("initial", "f").has_value();
  if (has_a) {
    SymField a;
    a.e11 = expr_of("a11", "0", &c.a11_text);
    a.e12 = expr_of("a12", "0", &c.a12_text);
    a.e22 = expr_of("a22", "0", &c.a22_text);
    c.a0 = a;
  }
  if (has_f) c.f = expr_of("f", "0", &c.f_text);

  SchemeConfig& s = c.scheme;
  s.alpha = r.num("scheme", "alpha", s.alpha);
  s.beta = r.num("scheme", "beta", s.beta);
  s.sigma = r.num("scheme", "sigma", s.sigma);
  s.m0 = r.num("scheme", "m0", s.m0);
  s.s = r.num("scheme", "s", s.s);
  s.frak_c = r.num("scheme", "frak_c", s.frak_c);
  s.max_stages = r.integer("scheme", "max_stages", s.max_stages);
  s.target_defect = r.num("scheme", "target_defect", s.target_defect);
  s.delta0 = r.num("scheme", "delta0", s.delta0);
  s.seed = static_cast<unsigned>(r.integer("scheme", "seed", static_cast<int>(s.seed)));
  s.strict_sigma = r.flag("scheme", "strict_sigma", s.strict_sigma);
  s.enforce_decay = r.flag("scheme", "enforce_decay", s.enforce_decay);
  s.resolution = r.integer("scheme", "resolution", s.resolution);
  s.quad_order = r.integer("scheme", "quad_order", s.quad_order);
  s.decomp_resolution = r.integer("scheme", "decomp_resolution", s.decomp_resolution);
  s.step_resolution = r.integer("scheme", "step_resolution", s.step_resolution);
  s.poisson_modes = r.integer("scheme", "poisson_modes", s.poisson_modes);
  s.c_extra = r.num("scheme", "c_extra", s.c_extra);
  if (const auto sched = r.get("scheme", "epsilon_schedule")) {
    s.epsilon_schedule.clear();
    std::istringstream ss(*sched);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) s.epsilon_schedule.push_back(std::stod(tok));
  }

  c.export_resolution = r.integer("export", "resolution", c.export_resolution);
  if (const auto od = r.get("export", "out_dir")) c.out_dir = *od;

  const ExponentGate gate = exponent_gate(s.alpha, s.beta);
  if (!gate.ok) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "config: exponents alpha=%.6g, beta=%.6g rejected by the admissibility gate "
                  "(need 0 < alpha < min{1/7, beta/2})",
                  s.alpha, s.beta);
    throw ConfigError(msg);
  }
  return c;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  char buf[128];
  std::ostringstream out;
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "[domain]\n";
  out << "xmin = " << num(c.domain.rect_min.x) << "\n";
  out << "xmax = " << num(c.domain.rect_max.x) << "\n";
  out << "ymin = " << num(c.domain.rect_min.y) << "\n";
  out << "ymax = " << num(c.domain.rect_max.y) << "\n";
  out << "margin = " << num(c.domain.margin) << "\n\n";
  out << "[initial]\n";
  out << "v0 = " << c.v0_text << "\n";
  out << "w1 = " << c.w1_text << "\n";
  out << "w2 = " << c.w2_text << "\n";
  if (c.a0.has_value()) {
    out << "a11 = " << c.a11_text << "\n";
    out << "a12 = " << c.a12_text << "\n";
    out << "a22 = " << c.a22_text << "\n";
  }
  if (c.f.has_value()) out << "f = " << c.f_text << "\n";
  out << "\n[scheme]\n";
  const SchemeConfig& s = c.scheme;
  out << "alpha = " << num(s.alpha) << "\n";
  out << "beta = " << num(s.beta) << "\n";
  out << "sigma = " << num(s.sigma) << "\n";
  out << "m0 = " << num(s.m0) << "\n";
  out << "s = " << num(s.s) << "\n";
  out << "frak_c = " << num(s.frak_c) << "\n";
  out << "max_stages = " << s.max_stages << "\n";
  out << "target_defect = " << num(s.target_defect) << "\n";
  out << "delta0 = " << num(s.delta0) << "\n";
  out << "seed = " << s.seed << "\n";
  out << "strict_sigma = " << (s.strict_sigma ? "true" : "false") << "\n";
  out << "enforce_decay = " << (s.enforce_decay ? "true" : "false") << "\n";
  out << "resolution = " << s.resolution << "\n";
  out << "quad_order = " << s.quad_order << "\n";
  out << "decomp_resolution = " << s.decomp_resolution << "\n";
  out << "step_resolution = " << s.step_resolution << "\n";
  out << "poisson_modes = " << s.poisson_modes << "\n";
  out << "c_extra = " << num(s.c_extra) << "\n";
  if (!s.epsilon_schedule.empty()) {
    out << "epsilon_schedule = ";
    for (std::size_t i = 0; i < s.epsilon_schedule.size(); ++i)
      out << (i ? "," : "") << num(s.epsilon_schedule[i]);
    out << "\n";
  }
  out << "\n[export]\n";
  out << "resolution = " << c.export_resolution << "\n";
  out << "out_dir = " << c.out_dir << "\n";
  return out.str();
}

}  // namespace wforge
