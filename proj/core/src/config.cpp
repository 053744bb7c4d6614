#include "nsfc/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace nsfc::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

double parse_double(int line, const std::string& v) {
  const char* begin = v.c_str();
  char* end = nullptr;
  double x = std::strtod(begin, &end);
  if (end == begin || *end != '\0') fail(line, "expected a number, got '" + v + "'");
  return x;
}

long parse_long(int line, const std::string& v) {
  const char* begin = v.c_str();
  char* end = nullptr;
  long x = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0') fail(line, "expected an integer, got '" + v + "'");
  return x;
}

int parse_int(int line, const std::string& v) { return static_cast<int>(parse_long(line, v)); }

std::uint64_t parse_u64(int line, const std::string& v) {
  const char* begin = v.c_str();
  char* end = nullptr;
  unsigned long long x = std::strtoull(begin, &end, 10);
  if (end == begin || *end != '\0') fail(line, "expected an unsigned integer, got '" + v + "'");
  return x;
}

std::vector<double> parse_list(int line, const std::string& v) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    std::size_t comma = v.find(',', pos);
    std::string item = trim(v.substr(pos, comma == std::string::npos ? comma : comma - pos));
    if (item.empty()) fail(line, "empty list entry");
    out.push_back(parse_double(line, item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) fail(line, "empty list");
  return out;
}

}  // namespace

Config parse_config(const std::string& text) {
  Config c;
  std::istringstream is(text);
  std::string raw;
  std::string section;
  int line = 0;

  while (std::getline(is, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;

    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "thermo" && section != "contact" && section != "grid" &&
          section != "solver" && section != "init" && section != "shift" && section != "sweep")
        fail(line, "unknown section [" + section + "]");
      continue;
    }

    std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail(line, "missing key");
    if (value.empty()) fail(line, "missing value for '" + key + "'");

    bool known = true;
    if (section.empty()) {
      if (key == "seed")
        c.seed = parse_u64(line, value);
      else
        known = false;
    } else if (section == "thermo") {
      if (key == "R")
        c.R = parse_double(line, value);
      else if (key == "a")
        c.a = parse_double(line, value);
      else if (key == "gamma")
        c.gamma = parse_double(line, value);
      else if (key == "theta_star")
        c.theta_star = parse_double(line, value);
      else if (key == "mu1")
        c.mu1 = parse_double(line, value);
      else if (key == "lambda1")
        c.lambda1 = parse_double(line, value);
      else
        known = false;
    } else if (section == "contact") {
      if (key == "rho_minus")
        c.rho_minus = parse_double(line, value);
      else if (key == "theta_minus")
        c.theta_minus = parse_double(line, value);
      else if (key == "rho_plus")
        c.rho_plus = parse_double(line, value);
      else
        known = false;
    } else if (section == "grid") {
      if (key == "dim")
        c.dim = parse_int(line, value);
      else if (key == "n")
        c.n = parse_int(line, value);
      else
        known = false;
    } else if (section == "solver") {
      if (key == "nu")
        c.nu = parse_double(line, value);
      else if (key == "kappa")
        c.kappa = parse_double(line, value);
      else if (key == "cfl")
        c.cfl = parse_double(line, value);
      else if (key == "t_end")
        c.t_end = parse_double(line, value);
      else if (key == "rho_floor")
        c.rho_floor = parse_double(line, value);
      else if (key == "reconstruction")
        c.reconstruction = value;
      else if (key == "max_steps")
        c.max_steps = parse_long(line, value);
      else
        known = false;
    } else if (section == "init") {
      if (key == "alpha")
        c.alpha = parse_double(line, value);
      else if (key == "width")
        c.width = parse_double(line, value);
      else if (key == "mode")
        c.mode = parse_int(line, value);
      else
        known = false;
    } else if (section == "shift") {
      if (key == "delta")
        c.delta = parse_double(line, value);
      else if (key == "epsilon")
        c.epsilon = parse_double(line, value);
      else if (key == "substeps")
        c.substeps = parse_int(line, value);
      else if (key == "frame_stride")
        c.frame_stride = parse_int(line, value);
      else if (key == "diag_stride")
        c.diag_stride = parse_int(line, value);
      else
        known = false;
    } else if (section == "sweep") {
      if (key == "alphas")
        c.alphas = parse_list(line, value);
      else if (key == "nus")
        c.nus = parse_list(line, value);
      else if (key == "alpha0")
        c.alpha0 = parse_double(line, value);
      else if (key == "levels")
        c.levels = parse_int(line, value);
      else
        known = false;
    }
    if (!known)
      fail(line, "unknown key '" + key + "'" +
                     (section.empty() ? " at top level" : " in [" + section + "]"));
  }

  if (c.dim < 1 || c.dim > 3) throw ConfigError("config: dim must be 1, 2, or 3");
  if (c.n < 8) throw ConfigError("config: n must be at least 8");
  if (c.width < 0.0) c.width = 8.0 / c.n;
  if (!(c.alpha >= 0.0)) throw ConfigError("config: alpha must be nonnegative");
  if (c.mode < 1) throw ConfigError("config: mode must be a positive integer");
  if (c.frame_stride < 1) throw ConfigError("config: frame_stride must be positive");
  if (c.diag_stride < 1) throw ConfigError("config: diag_stride must be positive");
  if (c.levels < 2) throw ConfigError("config: levels must be at least 2");
  if (!(c.alpha0 > 0.0)) throw ConfigError("config: alpha0 must be positive");
  for (double v : c.alphas)
    if (!(v >= 0.0)) throw ConfigError("config: alphas entries must be nonnegative");
  for (double v : c.nus)
    if (!(v >= 0.0)) throw ConfigError("config: nus entries must be nonnegative");

  // Cross-field checks run through the owning modules so the config layer
  // rejects exactly what the run would.
  try {
    thermo::ThermoParams p = c.thermo_params();
    func::ContactState contact = c.contact_state();
    contact.validate(p);
    c.solver_config().validate();
    fields::PeriodicGrid grid = fields::PeriodicGrid::make(c.dim, c.n);
    c.shift_config().validate(grid);
    if (c.width > 0.0 && c.width < 4.0 * grid.h)
      throw ConfigError("init: width must be at least 4 cells (or 0 for a sharp jump)");
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str());
}

thermo::ThermoParams Config::thermo_params() const {
  return thermo::ThermoParams::make(R, a, gamma, theta_star, mu1, lambda1);
}

func::ContactState Config::contact_state() const {
  return func::make_contact(thermo_params(), rho_minus, theta_minus, rho_plus);
}

solver::SolverConfig Config::solver_config() const {
  solver::SolverConfig sc;
  sc.nu = nu;
  sc.kappa = kappa;
  sc.cfl = cfl;
  sc.t_end = t_end;
  sc.rho_floor = rho_floor;
  sc.reconstruction = solver::reconstruction_from_string(reconstruction);
  sc.max_steps = max_steps;
  return sc;
}

shift::ShiftConfig Config::shift_config() const {
  shift::ShiftConfig sc;
  sc.delta = delta;
  sc.epsilon = epsilon;
  sc.substeps = substeps;
  return sc;
}

harness::Experiment Config::experiment() const {
  harness::Experiment ex;
  ex.params = thermo_params();
  ex.contact = contact_state();
  ex.dim = dim;
  ex.n = n;
  ex.solver_cfg = solver_config();
  ex.shift_cfg = shift_config();
  ex.width = width;
  ex.alpha = alpha;
  ex.mode = mode;
  ex.frame_stride = frame_stride;
  ex.diag_stride = diag_stride;
  return ex;
}

std::string canonical_text(const Config& c) {
  std::ostringstream os;
  os.precision(17);
  os << "seed = " << c.seed << "\n\n";
  os << "[thermo]\n";
  os << "R = " << c.R << "\n";
  os << "a = " << c.a << "\n";
  os << "gamma = " << c.gamma << "\n";
  os << "theta_star = " << c.theta_star << "\n";
  os << "mu1 = " << c.mu1 << "\n";
  os << "lambda1 = " << c.lambda1 << "\n\n";
  os << "[contact]\n";
  os << "rho_minus = " << c.rho_minus << "\n";
  os << "theta_minus = " << c.theta_minus << "\n";
  os << "rho_plus = " << c.rho_plus << "\n\n";
  os << "[grid]\n";
  os << "dim = " << c.dim << "\n";
  os << "n = " << c.n << "\n\n";
  os << "[solver]\n";
  os << "nu = " << c.nu << "\n";
  os << "kappa = " << c.kappa << "\n";
  os << "cfl = " << c.cfl << "\n";
  os << "t_end = " << c.t_end << "\n";
  os << "rho_floor = " << c.rho_floor << "\n";
  os << "reconstruction = " << c.reconstruction << "\n";
  os << "max_steps = " << c.max_steps << "\n\n";
  os << "[init]\n";
  os << "alpha = " << c.alpha << "\n";
  os << "width = " << c.width << "\n";
  os << "mode = " << c.mode << "\n\n";
  os << "[shift]\n";
  os << "delta = " << c.delta << "\n";
  os << "epsilon = " << c.epsilon << "\n";
  os << "substeps = " << c.substeps << "\n";
  os << "frame_stride = " << c.frame_stride << "\n";
  os << "diag_stride = " << c.diag_stride << "\n\n";
  os << "[sweep]\n";
  os << "alphas = ";
  for (std::size_t i = 0; i < c.alphas.size(); ++i) os << (i ? ", " : "") << c.alphas[i];
  os << "\n";
  os << "nus = ";
  for (std::size_t i = 0; i < c.nus.size(); ++i) os << (i ? ", " : "") << c.nus[i];
  os << "\n";
  os << "alpha0 = " << c.alpha0 << "\n";
  os << "levels = " << c.levels << "\n";
  return os.str();
}

}  // namespace nsfc::cli
