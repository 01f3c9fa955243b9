#include "gpmix/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "gpmix/errors.hpp"

namespace gpmix {

Json parse_config_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    const auto pos = what.find("syntax error");
    if (pos != std::string::npos) what = what.substr(pos);
    throw DomainError(source + ": invalid JSON at line " + std::to_string(line) + ", column " + std::to_string(col) +
                      ": " + what);
  }
}

Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

void ConfigView::fail(const std::string& key, const std::string& what) const {
  const std::string field = path_.empty() ? key : (key.empty() ? path_ : path_ + "." + key);
  throw DomainError("config field '" + field + "': " + what);
}

bool ConfigView::has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

ConfigView ConfigView::at(const std::string& key) const {
  if (!j_->is_object()) fail("", "expected an object");
  if (!j_->contains(key)) fail(key, "missing");
  return ConfigView((*j_)[key], path_.empty() ? key : path_ + "." + key);
}

double ConfigView::number(const std::string& key) const {
  const auto v = at(key);
  if (!v.json().is_number()) fail(key, "expected a number");
  return v.json().get<double>();
}

double ConfigView::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::int64_t ConfigView::integer(const std::string& key) const {
  const auto v = at(key);
  if (!v.json().is_number_integer()) fail(key, "expected an integer");
  return v.json().get<std::int64_t>();
}

std::int64_t ConfigView::integer_or(const std::string& key, std::int64_t fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::uint64_t ConfigView::seed_or(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const auto v = at(key);
  if (v.json().is_number_unsigned()) return v.json().get<std::uint64_t>();
  if (v.json().is_number_integer() && v.json().get<std::int64_t>() >= 0) return v.json().get<std::uint64_t>();
  fail(key, "expected a nonnegative integer seed");
}

bool ConfigView::boolean_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto v = at(key);
  if (!v.json().is_boolean()) fail(key, "expected true or false");
  return v.json().get<bool>();
}

std::string ConfigView::string(const std::string& key) const {
  const auto v = at(key);
  if (!v.json().is_string()) fail(key, "expected a string");
  return v.json().get<std::string>();
}

std::string ConfigView::string_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

std::vector<double> ConfigView::numbers(const std::string& key) const {
  const auto v = at(key);
  if (v.json().is_number()) return {v.json().get<double>()};
  if (!v.json().is_array()) fail(key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.json().size(); ++i) {
    if (!v.json()[i].is_number()) fail(key + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v.json()[i].get<double>());
  }
  return out;
}

std::vector<int> ConfigView::integers(const std::string& key) const {
  const auto v = at(key);
  if (v.json().is_number_integer()) return {v.json().get<int>()};
  if (!v.json().is_array()) fail(key, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.json().size(); ++i) {
    if (!v.json()[i].is_number_integer()) fail(key + "[" + std::to_string(i) + "]", "expected an integer");
    out.push_back(v.json()[i].get<int>());
  }
  return out;
}

std::vector<Vec> ConfigView::vectors(const std::string& key) const {
  const auto v = at(key);
  if (!v.json().is_array()) fail(key, "expected an array of points");
  std::vector<Vec> out;
  for (std::size_t i = 0; i < v.json().size(); ++i) {
    const auto& e = v.json()[i];
    const std::string sub = key + "[" + std::to_string(i) + "]";
    if (e.is_number()) {
      out.push_back(Vec::Constant(1, e.get<double>()));
    } else if (e.is_array()) {
      Vec p(static_cast<Eigen::Index>(e.size()));
      for (std::size_t d = 0; d < e.size(); ++d) {
        if (!e[d].is_number()) fail(sub, "expected numbers");
        p[d] = e[d].get<double>();
      }
      out.push_back(std::move(p));
    } else {
      fail(sub, "expected a number or an array of numbers");
    }
  }
  return out;
}

Vec ConfigView::vector(const std::string& key) const {
  const auto xs = numbers(key);
  return Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

std::vector<std::vector<double>> ConfigView::table(const std::string& key) const {
  const auto v = at(key);
  if (!v.json().is_array()) fail(key, "expected an array of rows");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < v.json().size(); ++i) {
    const auto& row = v.json()[i];
    const std::string sub = key + "[" + std::to_string(i) + "]";
    if (!row.is_array()) fail(sub, "expected an array of numbers");
    std::vector<double> r;
    for (const auto& e : row) {
      if (!e.is_number()) fail(sub, "expected numbers");
      r.push_back(e.get<double>());
    }
    out.push_back(std::move(r));
  }
  return out;
}

GibbsPartitionModel model_from_config(const ConfigView& v) {
  const auto kind = v.string("kind");
  if (kind == "dp") return GibbsPartitionModel::dirichlet(v.number("theta"));
  if (kind == "py") return GibbsPartitionModel::pitman_yor(v.number("sigma"), v.number("theta"));
  if (kind == "custom") return GibbsPartitionModel::custom(v.table("v"), v.table("w"));
  v.fail("kind", "expected \"dp\", \"py\" or \"custom\" (got \"" + kind + "\")");
}

ExponentialFamily family_from_config(const ConfigView& v) {
  const auto name = v.string("family");
  std::vector<double> variances;
  if (v.has("params")) {
    const auto p = v.at("params");
    if (p.has("variances")) variances = p.numbers("variances");
    if (p.has("variance")) variances = p.numbers("variance");
    if (p.has("dimension")) {
      const auto d = p.integer("dimension");
      if (d < 1) p.fail("dimension", "must be >= 1");
      if (variances.empty()) variances.assign(d, 1.0);
      if (variances.size() == 1 && d > 1) variances.assign(d, variances.front());
      if (static_cast<std::int64_t>(variances.size()) != d) p.fail("variances", "length must equal dimension");
    }
  }
  return ExponentialFamily::from_name(name, std::move(variances));
}

ConjugateHyper hyper_from_config(const ExponentialFamily& family, const ConfigView& v) {
  return make_hyper(family, v.vector("xi"), v.number("nu"));
}

MixtureSpec mixture_from_config(const ExponentialFamily& family, const ConfigView& v) {
  auto weights = v.numbers("weights");
  if (v.has("thetas")) return MixtureSpec(family, std::move(weights), v.vectors("thetas"));
  return MixtureSpec::from_means(family, std::move(weights), v.vectors("means"));
}

Dataset data_from_config(const ExponentialFamily& family, const ConfigView& v, std::uint64_t default_seed) {
  if (v.has("points")) {
    auto pts = v.vectors("points");
    if (v.has("n")) {
      const auto n = v.integer("n");
      if (n < 0 || n > static_cast<std::int64_t>(pts.size())) {
        v.fail("n", "must lie in 0.." + std::to_string(pts.size()) + " for explicit points");
      }
      pts.resize(n);
    }
    return Dataset(family, std::move(pts));
  }
  if (v.has("mixture")) {
    const auto spec = mixture_from_config(family, v.at("mixture"));
    const auto n = v.integer("n");
    if (n < 1) v.fail("n", "must be >= 1");
    return gen_mixture_data(spec, static_cast<int>(n), v.seed_or("seed", default_seed));
  }
  v.fail("", "expected \"points\" or \"mixture\"");
}

GibbsChainConfig gibbs_from_config(const ConfigView& v, std::uint64_t default_seed) {
  GibbsChainConfig g;
  g.seed = v.seed_or("seed", default_seed);
  g.burn_in_sweeps = v.integer_or("burn_in", g.burn_in_sweeps);
  g.sample_sweeps = v.integer_or("samples", g.sample_sweeps);
  g.chains = static_cast<int>(v.integer_or("chains", g.chains));
  g.random_scan = v.boolean_or("random_scan", false);
  const auto init = v.string_or("init", "all_in_one");
  if (init == "all_in_one") {
    g.init = GibbsInit::AllInOne;
  } else if (init == "singletons") {
    g.init = GibbsInit::Singletons;
  } else if (init == "random") {
    g.init = GibbsInit::Random;
  } else {
    v.fail("init", "expected all_in_one, singletons or random");
  }
  if (g.burn_in_sweeps < 0) v.fail("burn_in", "must be >= 0");
  if (g.sample_sweeps < 0) v.fail("samples", "must be >= 0");
  if (g.chains < 1) v.fail("chains", "must be >= 1");
  return g;
}

MomentSpaceBox box_from_config(const ConfigView& v) {
  MomentSpaceBox b;
  b.lo = v.vector("lo");
  b.hi = v.vector("hi");
  if (b.lo.size() != b.hi.size()) v.fail("hi", "must have the same length as lo");
  b.grid = static_cast<int>(v.integer_or("grid", b.grid));
  if (b.grid < 2) v.fail("grid", "must be >= 2");
  return b;
}

SampleRegion region_from_config(const ConfigView& v) {
  SampleRegion r;
  if (v.has("points")) r.points = v.vectors("points");
  if (v.has("lo") || v.has("hi")) {
    Vec lo = v.vector("lo"), hi = v.vector("hi");
    if (lo.size() != hi.size()) v.fail("hi", "must have the same length as lo");
    r.box = std::make_pair(lo, hi);
  }
  if (r.points.empty() && !r.box) v.fail("", "expected \"points\" or \"lo\"/\"hi\"");
  return r;
}

}  // namespace gpmix
