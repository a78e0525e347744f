#include "levylan/scenario.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace levylan {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    // from_chars rejects "inf"; strtod does not
    char* end = nullptr;
    x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') throw BadScenario("bad number for " + key + ": '" + v + "'");
  }
  return x;
}

long to_long(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x)) throw BadScenario("expected an integer for " + key + ": '" + v + "'");
  return static_cast<long>(x);
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split(v, ',')) out.push_back(to_double(key, item));
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Scenario::validate() const {
  if (n_list.empty()) throw BadScenario("n-list is empty");
  for (long n : n_list)
    if (n < 16) throw BadScenario("every n must be at least 16, got " + std::to_string(n));
  if (reps < 1) throw BadScenario("reps must be at least 1");
  if (m < 1) throw BadScenario("m must be at least 1");
  if (workers < 1) throw BadScenario("workers must be at least 1");
  if (shard_count < 1 || shard_index < 0 || shard_index >= shard_count) throw BadScenario("bad shard");
  if (init != "data" && init != "truth" && init != "perturbed") throw BadScenario("init must be data, truth or perturbed");
  if (!(tol > 0.0) || max_iter < 0) throw BadScenario("bad solver settings");
}

Scenario parse_scenario(const std::string& text) {
  Scenario s;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw BadScenario("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    try {
      if (key == "model") {
        if (v == "levy") s.model = Scenario::Model::levy;
        else if (v == "sde") s.model = Scenario::Model::sde;
        else throw BadScenario("model must be levy or sde");
      } else if (key == "theta0") {
        const auto t = to_list(key, v);
        if (t.size() != 3) throw BadScenario("theta0 needs three values");
        s.theta0 = Theta(t[0], t[1], t[2]);
      } else if (key == "n") {
        s.n_list.clear();
        for (const auto& item : split(v, ',')) s.n_list.push_back(to_long(key, item));
      } else if (key == "reps") {
        s.reps = to_long(key, v);
      } else if (key == "seed") {
        std::uint64_t x = 0;
        const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
        if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw BadScenario("bad seed");
        s.seed = x;
      } else if (key == "tau") {
        const auto parts = split(v, ' ');
        if (parts.empty()) throw BadScenario("empty tau");
        if (parts[0] == "none") {
          s.tau = TemperingSpec::none();
        } else if (parts[0] == "truncation" && parts.size() == 2) {
          s.tau = TemperingSpec::truncation(to_double(key, parts[1]));
        } else if (parts[0] == "exponential" && (parts.size() == 2 || parts.size() == 3)) {
          s.tau = TemperingSpec::exponential(to_double(key, parts[1]),
                                             parts.size() == 3 ? to_double(key, parts[2]) : INFINITY);
        } else {
          throw BadScenario("tau must be none | truncation ETA | exponential LAMBDA [ETA]");
        }
      } else if (key == "m") {
        s.m = static_cast<int>(to_long(key, v));
      } else if (key == "init") {
        s.init = v;
      } else if (key == "perturb") {
        s.perturb = to_double(key, v);
      } else if (key == "h") {
        s.h_list.clear();
        for (const auto& item : split(v, ';')) {
          const auto t = to_list(key, item);
          if (t.size() != 3) throw BadScenario("each h needs three values");
          s.h_list.emplace_back(t[0], t[1], t[2]);
        }
      } else if (key == "alphas") {
        s.alphas = to_list(key, v);
      } else if (key == "ws") {
        s.ws = to_list(key, v);
      } else if (key == "samples") {
        s.samples = to_long(key, v);
      } else if (key == "outputs") {
        s.outputs = v;
      } else if (key == "workers") {
        s.workers = static_cast<int>(to_long(key, v));
      } else if (key == "shard") {
        const auto parts = split(v, '/');
        if (parts.size() != 2) throw BadScenario("shard must be INDEX/COUNT");
        s.shard_index = static_cast<int>(to_long(key, parts[0]));
        s.shard_count = static_cast<int>(to_long(key, parts[1]));
      } else if (key == "tol") {
        s.tol = to_double(key, v);
      } else if (key == "max_iter") {
        s.max_iter = static_cast<int>(to_long(key, v));
      } else {
        throw BadScenario("unknown key '" + key + "'");
      }
    } catch (const DomainError& e) {
      throw BadScenario("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BadScenario("cannot read scenario file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize(const Scenario& s) {
  std::ostringstream o;
  auto list = [&](const std::vector<double>& v) {
    std::string r;
    for (std::size_t i = 0; i < v.size(); ++i) r += (i ? ", " : "") + format_double(v[i]);
    return r;
  };
  o << "model = " << (s.model == Scenario::Model::levy ? "levy" : "sde") << "\n";
  o << "theta0 = " << list({s.theta0.sigma, s.theta0.delta, s.theta0.alpha}) << "\n";
  o << "n = ";
  for (std::size_t i = 0; i < s.n_list.size(); ++i) o << (i ? ", " : "") << s.n_list[i];
  o << "\nreps = " << s.reps << "\nseed = " << s.seed << "\n";
  if (std::isinf(s.tau.eta) && s.tau.lambda == 0.0)
    o << "tau = none\n";
  else if (s.tau.lambda == 0.0)
    o << "tau = truncation " << format_double(s.tau.eta) << "\n";
  else
    o << "tau = exponential " << format_double(s.tau.lambda) << " " << format_double(s.tau.eta) << "\n";
  o << "m = " << s.m << "\ninit = " << s.init << "\nperturb = " << format_double(s.perturb) << "\n";
  o << "h = ";
  for (std::size_t i = 0; i < s.h_list.size(); ++i)
    o << (i ? "; " : "") << list({s.h_list[i][0], s.h_list[i][1], s.h_list[i][2]});
  o << "\nalphas = " << list(s.alphas) << "\nws = " << list(s.ws) << "\nsamples = " << s.samples << "\n";
  o << "outputs = " << s.outputs << "\nworkers = " << s.workers << "\n";
  o << "shard = " << s.shard_index << "/" << s.shard_count << "\n";
  o << "tol = " << format_double(s.tol) << "\nmax_iter = " << s.max_iter << "\n";
  return o.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string scenario_hash(const Scenario& s) {
  // Execution settings (workers, shard, output directory) do not change
  // results, so they are left out of the identity of a scenario.
  Scenario t = s;
  t.workers = 1;
  t.shard_index = 0;
  t.shard_count = 1;
  t.outputs = "";
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(serialize(t))));
  return buf;
}

}  // namespace levylan
