#include "affine/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "affine/error.hpp"

namespace affine {

namespace {

using json = nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
T get(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + " has the wrong type");
  }
}

Vec get_vec(const json& j, const std::string& where) {
  const auto xs = get<std::vector<double>>(j, where);
  Vec v(static_cast<long>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) v(static_cast<long>(i)) = xs[i];
  return v;
}

Box get_box(const json& j, const std::string& where) {
  check_keys(j, {"lower", "upper"}, where);
  if (!j.contains("lower") || !j.contains("upper")) throw ConfigError(where + " needs lower and upper");
  Box b{get_vec(j["lower"], where + ".lower"), get_vec(j["upper"], where + ".upper")};
  if (b.lower.size() != b.upper.size() || b.lower.size() == 0) throw ConfigError(where + ": lower/upper mismatch");
  for (long i = 0; i < b.lower.size(); ++i)
    if (!(b.lower(i) < b.upper(i))) throw ConfigError(where + ": lower must be below upper");
  return b;
}

std::vector<std::string> get_components(const json& j, const std::string& where) {
  return get<std::vector<std::string>>(j, where);
}

ConnectionSpec get_connection(const json& j, const std::string& where) {
  check_keys(j, {"catalog", "lambda", "christoffel", "metric"}, where);
  ConnectionSpec s;
  int kinds = 0;
  if (j.contains("catalog")) {
    s.catalog = get<std::string>(j["catalog"], where + ".catalog");
    ++kinds;
  }
  if (j.contains("lambda")) s.lambda = get<double>(j["lambda"], where + ".lambda");
  if (j.contains("christoffel")) {
    s.christoffel = get<std::map<std::string, std::string>>(j["christoffel"], where + ".christoffel");
    ++kinds;
  }
  if (j.contains("metric")) {
    s.metric = get<std::vector<std::vector<std::string>>>(j["metric"], where + ".metric");
    ++kinds;
  }
  if (kinds != 1) throw ConfigError(where + " needs exactly one of catalog, christoffel, metric");
  return s;
}

DistributionSpec get_distribution(const json& j, const std::string& where) {
  check_keys(j, {"generators", "rank", "rank_tolerance"}, where);
  if (!j.contains("generators") || !j["generators"].is_array() || j["generators"].empty())
    throw ConfigError(where + ".generators must be a nonempty array");
  DistributionSpec s;
  for (const auto& g : j["generators"]) {
    if (g.is_string())
      s.generators.push_back({g.get<std::string>(), {}});
    else
      s.generators.push_back({"", get_components(g, where + ".generators")});
  }
  if (j.contains("rank")) s.rank = get<int>(j["rank"], where + ".rank");
  if (j.contains("rank_tolerance")) s.rank_tolerance = get<double>(j["rank_tolerance"], where + ".rank_tolerance");
  return s;
}

ChartDomain config_domain(const ProblemConfig& cfg) {
  if (!cfg.dim) throw ConfigError("'dim' is required for connections given by expressions");
  if (cfg.bounds) {
    if (cfg.bounds->lower.size() != *cfg.dim) throw ConfigError("bounds do not match 'dim'");
    return ChartDomain(*cfg.dim, cfg.bounds->lower, cfg.bounds->upper);
  }
  return ChartDomain(*cfg.dim);
}

Box default_box(const ChartDomain& d) {
  if (!d.bounded()) return {Vec::Constant(d.dim(), -1.0), Vec::Constant(d.dim(), 1.0)};
  const Vec mid = 0.5 * (d.lower() + d.upper());
  const Vec half = 0.25 * (d.upper() - d.lower());
  return {mid - half, mid + half};
}

std::vector<Expr> parse_all(const std::vector<std::string>& texts, int dim, const std::string& where) {
  std::vector<Expr> out;
  for (const auto& t : texts) {
    try {
      out.push_back(parse(t, dim));
    } catch (const ParseError& e) {
      throw ConfigError(where + ": " + e.what() + " in '" + t + "'");
    }
  }
  return out;
}

}  // namespace

ProblemConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  check_keys(j,
             {"dim", "bounds", "connections", "connection", "fields", "distributions", "distribution", "pair",
              "point", "fiber", "probes", "integrator", "estimator", "verify", "convergence", "threshold"},
             "config");
  ProblemConfig cfg;
  if (j.contains("dim")) {
    cfg.dim = get<int>(j["dim"], "dim");
    if (*cfg.dim < 1) throw ConfigError("dim must be positive");
  }
  if (j.contains("bounds")) cfg.bounds = get_box(j["bounds"], "bounds");
  if (j.contains("connections")) {
    if (!j["connections"].is_object()) throw ConfigError("connections must be an object");
    for (const auto& [name, spec] : j["connections"].items())
      cfg.connections[name] = get_connection(spec, "connections." + name);
  }
  if (j.contains("connection")) cfg.connection = get<std::string>(j["connection"], "connection");
  if (j.contains("fields")) {
    if (!j["fields"].is_object()) throw ConfigError("fields must be an object");
    for (const auto& [name, comps] : j["fields"].items())
      cfg.fields[name] = get_components(comps, "fields." + name);
  }
  if (j.contains("distributions")) {
    if (!j["distributions"].is_object()) throw ConfigError("distributions must be an object");
    for (const auto& [name, spec] : j["distributions"].items())
      cfg.distributions[name] = get_distribution(spec, "distributions." + name);
  }
  if (j.contains("distribution")) cfg.distribution = get<std::string>(j["distribution"], "distribution");
  if (j.contains("pair")) {
    cfg.symprod_fields = get<std::vector<std::string>>(j["pair"], "pair");
    if (cfg.symprod_fields.size() != 2) throw ConfigError("pair must name exactly two fields");
  }
  if (j.contains("point")) cfg.point = get_vec(j["point"], "point");
  if (j.contains("fiber")) cfg.fiber = get_vec(j["fiber"], "fiber");
  if (j.contains("probes")) {
    const json& p = j["probes"];
    check_keys(p, {"lower", "upper", "random", "seed", "horizon"}, "probes");
    if (p.contains("lower") || p.contains("upper")) {
      json box;
      if (p.contains("lower")) box["lower"] = p["lower"];
      if (p.contains("upper")) box["upper"] = p["upper"];
      cfg.probes.box = get_box(box, "probes");
    }
    if (p.contains("random")) cfg.probes.random = get<int>(p["random"], "probes.random");
    if (p.contains("seed")) cfg.probes.seed = get<std::uint64_t>(p["seed"], "probes.seed");
    if (p.contains("horizon")) cfg.probes.horizon = get<double>(p["horizon"], "probes.horizon");
    if (cfg.probes.random < 0) throw ConfigError("probes.random must be nonnegative");
    if (!(cfg.probes.horizon > 0.0)) throw ConfigError("probes.horizon must be positive");
  }
  if (j.contains("integrator")) {
    const json& p = j["integrator"];
    check_keys(p, {"substeps_per_unit_time", "min_steps"}, "integrator");
    if (p.contains("substeps_per_unit_time"))
      cfg.integrator.substeps_per_unit_time = get<int>(p["substeps_per_unit_time"], "integrator.substeps_per_unit_time");
    if (p.contains("min_steps")) cfg.integrator.min_steps = get<int>(p["min_steps"], "integrator.min_steps");
    cfg.integrator.validate();
  }
  if (j.contains("estimator")) {
    const json& p = j["estimator"];
    check_keys(p, {"t", "richardson", "tolerance", "kinds"}, "estimator");
    if (p.contains("t")) cfg.estimator.t = get<double>(p["t"], "estimator.t");
    if (p.contains("richardson")) cfg.estimator.richardson = get<bool>(p["richardson"], "estimator.richardson");
    if (p.contains("tolerance")) cfg.estimator.tolerance = get<double>(p["tolerance"], "estimator.tolerance");
    if (p.contains("kinds")) cfg.estimator.kinds = get<std::vector<std::string>>(p["kinds"], "estimator.kinds");
    if (!(cfg.estimator.t > 0.0)) throw ConfigError("estimator.t must be positive");
  }
  if (j.contains("verify")) {
    const json& p = j["verify"];
    check_keys(p, {"draws", "seed"}, "verify");
    if (p.contains("draws")) cfg.verify.draws = get<int>(p["draws"], "verify.draws");
    if (p.contains("seed")) cfg.verify.seed = get<std::uint64_t>(p["seed"], "verify.seed");
    if (cfg.verify.draws < 1) throw ConfigError("verify.draws must be positive");
  }
  if (j.contains("convergence")) {
    const json& p = j["convergence"];
    check_keys(p, {"target", "t0", "points"}, "convergence");
    if (p.contains("target")) cfg.convergence.target = get<std::string>(p["target"], "convergence.target");
    if (p.contains("t0")) cfg.convergence.t0 = get<double>(p["t0"], "convergence.t0");
    if (p.contains("points")) cfg.convergence.points = get<int>(p["points"], "convergence.points");
    if (!(cfg.convergence.t0 > 0.0)) throw ConfigError("convergence.t0 must be positive");
    if (cfg.convergence.points < 1) throw ConfigError("convergence.points must be positive");
  }
  if (j.contains("threshold")) {
    cfg.threshold = get<double>(j["threshold"], "threshold");
    if (!(cfg.threshold > 0.0)) throw ConfigError("threshold must be positive");
  }
  return cfg;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ResolvedConnection resolve_connection(const ProblemConfig& cfg, const std::string& name) {
  auto finish = [&cfg](std::string n, Connection c, Box box) {
    if (cfg.probes.box) box = *cfg.probes.box;
    if (box.lower.size() != c.dim()) throw ConfigError("probe box does not match the connection dimension");
    return ResolvedConnection{std::move(n), std::move(c), std::move(box)};
  };
  const auto it = cfg.connections.find(name);
  if (it == cfg.connections.end() || !it->second.catalog.empty()) {
    const std::string cat = it == cfg.connections.end() ? name : it->second.catalog;
    catalog::ConnectionEntry e = [&] {
      if (cat == "torsion" && it != cfg.connections.end() && it->second.lambda)
        return catalog::ConnectionEntry{cat, catalog::epsilon_torsion(*it->second.lambda),
                                        catalog::connection(cat).sample_box};
      if (cat == "flat" && cfg.dim && *cfg.dim != 3) {
        ChartDomain d = cfg.bounds ? config_domain(cfg) : ChartDomain(*cfg.dim);
        return catalog::ConnectionEntry{cat, Connection::flat(d), default_box(d)};
      }
      return catalog::connection(cat);
    }();
    if (cfg.dim && *cfg.dim != e.connection.dim())
      throw ConfigError("connection '" + name + "' has dimension " + std::to_string(e.connection.dim()) +
                        " but the config declares " + std::to_string(*cfg.dim));
    return finish(name, std::move(e.connection), std::move(e.sample_box));
  }
  const ConnectionSpec& s = it->second;
  const ChartDomain d = config_domain(cfg);
  const int n = d.dim();
  if (!s.metric.empty()) {
    if (static_cast<int>(s.metric.size()) != n) throw ConfigError("metric of '" + name + "' must be n x n");
    std::vector<std::string> flat;
    for (const auto& row : s.metric) {
      if (static_cast<int>(row.size()) != n) throw ConfigError("metric of '" + name + "' must be n x n");
      flat.insert(flat.end(), row.begin(), row.end());
    }
    std::vector<Expr> entries = parse_all(flat, n, "metric of '" + name + "'");
    try {
      return finish(name, christoffel_from_metric(MetricField(d, std::move(entries))), default_box(d));
    } catch (const DomainError& e) {
      throw ConfigError("metric of '" + name + "': " + e.what());
    }
  }
  std::vector<Expr> gamma(static_cast<std::size_t>(n) * n * n);
  for (const auto& [key, text] : s.christoffel) {
    int k = 0, i = 0, j = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ks(key);
    if (!(ks >> k >> c1 >> i >> c2 >> j) || c1 != ',' || c2 != ',' || !ks.eof() || k < 1 || i < 1 || j < 1 ||
        k > n || i > n || j > n)
      throw ConfigError("christoffel key '" + key + "' must be 'k,i,j' with 1-based indices up to " +
                        std::to_string(n));
    gamma[static_cast<std::size_t>(((k - 1) * n + (i - 1)) * n + (j - 1))] =
        parse_all({text}, n, "christoffel '" + key + "' of '" + name + "'").front();
  }
  return finish(name, Connection(d, std::move(gamma)), default_box(d));
}

VectorField resolve_field(const ProblemConfig& cfg, const std::string& name, const ChartDomain& domain) {
  const auto it = cfg.fields.find(name);
  if (it == cfg.fields.end()) {
    // Coordinate fields e1..en need no declaration.
    if (name.size() >= 2 && name[0] == 'e' && name.find_first_not_of("0123456789", 1) == std::string::npos) {
      const int i = std::stoi(name.substr(1));
      if (i >= 1 && i <= domain.dim()) return VectorField::coordinate(domain, i - 1);
    }
    throw ConfigError("unknown field '" + name + "'");
  }
  if (static_cast<int>(it->second.size()) != domain.dim())
    throw ConfigError("field '" + name + "' has " + std::to_string(it->second.size()) + " components, expected " +
                      std::to_string(domain.dim()));
  return VectorField(domain, parse_all(it->second, domain.dim(), "field '" + name + "'"));
}

Distribution resolve_distribution(const ProblemConfig& cfg, const std::string& name, const ChartDomain& domain) {
  const auto it = cfg.distributions.find(name);
  if (it == cfg.distributions.end()) return catalog::distribution(name, domain);
  std::vector<VectorField> gens;
  for (const auto& g : it->second.generators) {
    if (!g.field.empty()) {
      gens.push_back(resolve_field(cfg, g.field, domain));
    } else {
      if (static_cast<int>(g.components.size()) != domain.dim())
        throw ConfigError("inline generator of '" + name + "' has the wrong component count");
      gens.push_back(VectorField(domain, parse_all(g.components, domain.dim(), "distribution '" + name + "'")));
    }
  }
  try {
    return Distribution(domain, std::move(gens), it->second.rank, it->second.rank_tolerance);
  } catch (const PreconditionError& e) {
    throw ConfigError("distribution '" + name + "': " + e.what());
  }
}

}  // namespace affine
