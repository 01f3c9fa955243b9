#include "gpmix/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

#include "gpmix/config.hpp"
#include "gpmix/errors.hpp"
#include "gpmix/experiments.hpp"
#include "gpmix/gibbs.hpp"
#include "gpmix/laplace.hpp"
#include "gpmix/numerics.hpp"
#include "gpmix/partition.hpp"
#include "gpmix/posterior.hpp"
#include "gpmix/rng.hpp"
#include "gpmix/theory.hpp"

namespace gpmix {

namespace {

namespace fs = std::filesystem;

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

Json json_num(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

Json json_nums(const std::vector<double>& xs) {
  Json a = Json::array();
  for (double x : xs) a.push_back(json_num(x));
  return a;
}

class Session {
 public:
  Session(const CliInvocation& inv) : inv_(inv) {
    config_ = inv.config_path.empty() ? Json::object() : load_config_file(inv.config_path);
    if (!config_.is_object()) throw DomainError("config root must be a JSON object");
    apply_overrides();
    const ConfigView root(config_, "");
    seed_ = root.seed_or("seed", 1);
    threads_ = inv.threads ? *inv.threads : static_cast<int>(root.integer_or("threads", 1));
    if (threads_ < 1) root.fail("threads", "must be >= 1");
    if (inv.out_dir) {
      out_dir_ = *inv.out_dir;
    } else if (root.has("output_dir")) {
      out_dir_ = root.string("output_dir");
    } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
      out_dir_ = env;
    } else {
      out_dir_ = "gpmix-out";
    }
  }

  ConfigView root() const { return ConfigView(config_, ""); }
  std::uint64_t seed() const { return seed_; }
  int threads() const { return threads_; }

  void log(int level, const std::string& msg) const {
    if (inv_.verbosity >= level) std::cerr << "[gpmix] " << msg << "\n";
  }

  void write(const std::string& name, const std::string& content) {
    fs::create_directories(out_dir_);
    const auto path = fs::path(out_dir_) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write " + path.string());
    out << content;
    artifacts_.push_back(name);
    log(1, "wrote " + path.string());
  }

  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

  /// CSV with the effective config as a leading comment line.
  void write_csv(const std::string& name, const std::string& header, const std::vector<std::string>& rows) {
    std::string s = "# config: " + config_.dump() + "\n" + header + "\n";
    for (const auto& r : rows) s += r + "\n";
    write(name, s);
  }

  void finish() {
    Json m;
    m["tool"] = "gpmix";
    m["subcommand"] = inv_.subcommand;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char ts[32];
    std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", &tm);
    m["timestamp"] = ts;
    m["config"] = config_;
    m["threads"] = threads_;
    m["artifacts"] = artifacts_;
    artifacts_.push_back("manifest.json");
    fs::create_directories(out_dir_);
    std::ofstream out(fs::path(out_dir_) / "manifest.json", std::ios::binary);
    out << m.dump(2) << "\n";
  }

 private:
  void apply_overrides() {
    if (inv_.seed) {
      config_["seed"] = *inv_.seed;
      for (const char* section : {"gibbs", "data", "capture", "sweep", "fig1b"}) {
        if (config_.contains(section) && config_[section].is_object() && config_[section].contains("seed")) {
          config_[section]["seed"] = *inv_.seed;
        }
      }
    }
    if (inv_.n) {
      if (inv_.subcommand == "fig3") {
        config_["fig3"]["n"] = Json::array({*inv_.n});
      } else if (inv_.subcommand == "prior") {
        config_["n"] = *inv_.n;
      } else if (config_.contains("data")) {
        config_["data"]["n"] = *inv_.n;
      } else {
        config_["n"] = *inv_.n;
      }
    }
    if (inv_.theta) config_["fig3"]["theta"] = *inv_.theta;
  }

  const CliInvocation& inv_;
  Json config_;
  std::uint64_t seed_ = 1;
  int threads_ = 1;
  std::string out_dir_;
  std::vector<std::string> artifacts_;
};

struct Problem {
  GibbsPartitionModel model;
  ExponentialFamily family;
  ConjugateHyper hyper;
};

Problem problem(const Session& s) {
  const auto root = s.root();
  auto family = family_from_config(root.at("family"));
  auto hyper = hyper_from_config(family, root.at("family"));
  return {model_from_config(root.at("model")), std::move(family), std::move(hyper)};
}

Json posterior_json(const ClusterCountPosterior& p, const std::string& engine) {
  Json j;
  j["n"] = p.n;
  j["engine"] = engine;
  j["log_joint"] = json_nums(p.log_joint);
  j["posterior"] = json_nums(p.posterior);
  j["log_evidence"] = json_num(p.log_evidence);
  j["degenerate"] = p.degenerate;
  return j;
}

Json bound_json(const BoundReport& r) {
  Json j;
  j["n"] = r.n;
  j["t"] = r.t;
  j["c"] = json_num(r.c);
  j["c_w"] = json_num(r.c_w);
  j["c_v"] = json_num(r.c_v);
  j["phi"] = r.phi;
  j["phi_exact"] = r.phi_exact;
  j["phi_argmin"] = r.phi_argmin;
  j["C_t"] = json_num(r.C_t);
  j["bound"] = r.bound;
  j["posterior"] = r.posterior ? Json(*r.posterior) : Json(nullptr);
  j["preconditions"] = {{"phi_above_t_over_n", r.phi_above_t_over_n},
                        {"c_w_finite", r.c_w_finite},
                        {"c_v_finite", r.c_v_finite}};
  j["holds"] = r.holds();
  j["note"] = r.note;
  return j;
}

ClusterCountPosterior exact_engine(const Session& s, const Problem& p, const Dataset& data, std::string& engine) {
  const auto root = s.root();
  engine = root.string_or("engine", "auto");
  int enum_cap = 13, dp_cap = kDefaultSubsetDpCap;
  if (root.has("caps")) {
    enum_cap = static_cast<int>(root.at("caps").integer_or("enumeration", enum_cap));
    dp_cap = static_cast<int>(root.at("caps").integer_or("dp", dp_cap));
  }
  if (engine == "enumeration") return exact_joint_enumeration(p.model, p.family, p.hyper, data, enum_cap);
  if (engine == "dp" || engine == "auto") {
    engine = "dp";
    return exact_joint_subset_dp(p.model, p.family, p.hyper, data, dp_cap, s.threads());
  }
  root.fail("engine", "expected auto, dp or enumeration");
}

void cmd_exact(Session& s) {
  const auto p = problem(s);
  const auto data = data_from_config(p.family, s.root().at("data"), s.seed());
  std::string engine;
  const auto post = exact_engine(s, p, data, engine);
  const auto j = posterior_json(post, engine);
  s.write_json("posterior.json", j);
  std::vector<std::string> rows;
  for (int t = 1; t <= post.n; ++t) rows.push_back(std::to_string(t) + "," + num(post.posterior[t - 1]));
  s.write_csv("posterior.csv", "t,posterior", rows);
  std::cout << j.dump(2) << "\n";
}

void cmd_gibbs(Session& s) {
  const auto p = problem(s);
  const auto root = s.root();
  const auto data = data_from_config(p.family, root.at("data"), s.seed());
  auto cfg = root.has("gibbs") ? gibbs_from_config(root.at("gibbs"), s.seed()) : GibbsChainConfig{.seed = s.seed()};
  cfg.threads = s.threads();
  s.log(1, "running " + std::to_string(cfg.chains) + " chain(s) on n = " + std::to_string(data.size()));
  const auto res = gibbs_sampler(p.model, p.family, p.hyper, data, cfg);
  Json j;
  j["n"] = res.n;
  j["pooled"] = json_nums(res.pooled);
  j["chain_mean_t"] = json_nums(res.chain_mean_t);
  j["histogram"] = res.histogram;
  j["final_labels"] = res.final_labels;
  if (root.has("gibbs") && root.at("gibbs").boolean_or("compare_exact", false) && data.size() <= kDefaultSubsetDpCap) {
    const auto exact = exact_joint_subset_dp(p.model, p.family, p.hyper, data, kDefaultSubsetDpCap, s.threads());
    j["exact_posterior"] = json_nums(exact.posterior);
    j["total_variation"] = total_variation(exact.posterior, res.pooled);
  }
  s.write_json("gibbs.json", j);
  std::vector<std::string> rows;
  for (int t = 1; t <= res.n; ++t) rows.push_back(std::to_string(t) + "," + num(res.pooled[t - 1]));
  s.write_csv("gibbs.csv", "t,posterior", rows);
  if (root.has("gibbs") && root.at("gibbs").boolean_or("trace", false)) {
    std::vector<std::string> tr;
    for (std::size_t c = 0; c < res.trace.size(); ++c) {
      for (std::size_t i = 0; i < res.trace[c].size(); ++i) {
        tr.push_back(std::to_string(c) + "," + std::to_string(i) + "," + std::to_string(res.trace[c][i]));
      }
    }
    s.write_csv("trace.csv", "chain,sweep,t", tr);
  }
  std::cout << j.dump(2) << "\n";
}

void cmd_prior(Session& s) {
  const auto root = s.root();
  const auto model = model_from_config(root.at("model"));
  const auto ns = root.integers("n");
  std::vector<std::string> rows;
  Json all = Json::array();
  for (int n : ns) {
    if (n < 1) root.fail("n", "must be >= 1");
    const auto prior = prior_on_t(model, n);
    for (int t = 1; t <= n; ++t) rows.push_back(std::to_string(n) + "," + std::to_string(t) + "," + num(prior.mass[t - 1]));
    Json j;
    j["n"] = n;
    j["mass"] = json_nums(prior.mass);
    j["total_mass"] = prior.total_mass;
    j["normalized"] = prior.normalized;
    all.push_back(j);
    if (!prior.normalized) std::cerr << "warning: prior for n = " << n << " has total mass " << num(prior.total_mass) << "\n";
  }
  s.write_csv("prior.csv", "n,t,probability", rows);
  s.write_json("prior.json", all);
  std::cout << all.dump(2) << "\n";
}

void cmd_bounds(Session& s) {
  const auto p = problem(s);
  const auto root = s.root();
  const auto data = data_from_config(p.family, root.at("data"), s.seed());
  const auto b = root.at("bounds");
  double c;
  Json cinfo;
  if (b.has("c")) {
    c = b.number("c");
    cinfo["source"] = "config";
  } else {
    const auto cc = bounded_case_constant(p.family, p.hyper, region_from_config(b.at("region")));
    c = cc.c;
    cinfo["source"] = cc.method;
  }
  cinfo["c"] = json_num(c);
  Json reports = Json::array();
  std::vector<std::string> rows;
  for (int t : b.integers("t")) {
    const auto r = lemma_bound(p.model, p.family, p.hyper, data, t, c);
    reports.push_back(bound_json(r));
    rows.push_back(std::to_string(r.n) + "," + std::to_string(t) + "," + num(r.phi) + "," + num(r.C_t) + "," +
                   num(r.bound) + "," + (r.posterior ? num(*r.posterior) : "nan") + "," +
                   (r.preconditions() ? "1" : "0") + "," + (r.holds() ? "1" : "0"));
  }
  Json j;
  j["constant"] = cinfo;
  j["reports"] = reports;
  s.write_json("bounds.json", j);
  s.write_csv("bounds.csv", "n,t,phi,C_t,bound,posterior,preconditions,holds", rows);
  std::cout << j.dump(2) << "\n";
}

void cmd_fig3(Session& s) {
  const auto root = s.root();
  double theta = 1.0;
  std::vector<int> ns{50, 500, 5000};
  if (root.has("fig3")) {
    const auto f = root.at("fig3");
    theta = f.number_or("theta", theta);
    if (f.has("n")) ns = f.integers("n");
  }
  std::vector<std::string> rows;
  Json summary = Json::array();
  for (int n : ns) {
    const auto d = fig3_size_distribution(theta, n);
    for (int a = 1; a < n; ++a) {
      rows.push_back(std::to_string(n) + "," + std::to_string(a) + "," + num(d.pmf[a - 1]) + "," + num(d.cdf[a - 1]));
    }
    summary.push_back({{"n", n},
                       {"lower_tail_0.05", d.lower_tail(0.05)},
                       {"extreme_mass_0.05", d.extreme_mass(0.05)}});
  }
  s.write_csv("fig3.csv", "n,a,pmf,cdf", rows);
  s.write_json("fig3.json", summary);
  std::cout << summary.dump(2) << "\n";
}

void cmd_capture(Session& s) {
  const auto root = s.root();
  const auto cap = root.at("capture");
  const auto family = family_from_config(root.at("family"));
  const auto mixture = mixture_from_config(family, cap.at("mixture"));
  const double beta = cap.number("beta");
  std::optional<HalfspaceRegion> region;
  if (cap.has("faces")) {
    std::vector<Halfspace> faces;
    const auto& arr = cap.at("faces").json();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const ConfigView f(arr[i], "capture.faces[" + std::to_string(i) + "]");
      faces.push_back({f.vector("u"), f.number("b")});
    }
    region.emplace(std::move(faces));
  } else {
    const auto box = box_from_config(cap.at("region"));
    validate_box(family, box);
    region.emplace(HalfspaceRegion::box(box.lo, box.hi));
  }
  const auto seed = cap.seed_or("seed", s.seed());
  const auto draw = [&](int n, std::uint64_t rep) {
    return gen_mixture_data(mixture, n, SplitMix64::stream_key(SplitMix64::stream_key(seed, n), rep)).stats();
  };
  const auto res = capture_convergence_experiment(draw, beta, *region, cap.integers("n_grid"),
                                                  static_cast<int>(cap.integer_or("seeds", 100)), s.threads());
  std::vector<std::string> rows;
  for (const auto& r : res.rows) {
    rows.push_back(std::to_string(r.n) + "," + std::to_string(r.seeds) + "," + std::to_string(r.captured) + "," +
                   num(r.frequency));
  }
  s.write_csv("capture.csv", "n,seeds,captured,frequency", rows);
  Json j;
  j["beta"] = beta;
  j["threshold_n"] = res.threshold_n ? Json(*res.threshold_n) : Json(nullptr);
  s.write_json("capture.json", j);
  std::cout << j.dump(2) << "\n";
}

Json certificate_json(const LaplaceCertificate& c) {
  Json j;
  j["box"] = {{"lo", json_nums({c.box.lo.data(), c.box.lo.data() + c.box.lo.size()})},
              {"hi", json_nums({c.box.hi.data(), c.box.hi.data() + c.box.hi.size()})},
              {"grid", c.box.grid}};
  j["epsilon"] = c.epsilon;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["gamma"] = c.gamma;
  j["delta"] = c.delta;
  j["log_c1"] = c.log_c1;
  j["log_c2"] = c.log_c2;
  j["log_C1"] = c.log_C1;
  j["log_C2"] = c.log_C2;
  j["direction_grid"] = c.direction_grid;
  return j;
}

void cmd_certify(Session& s) {
  const auto root = s.root();
  const auto family = family_from_config(root.at("family"));
  const auto hyper = hyper_from_config(family, root.at("family"));
  const auto cert_cfg = root.at("certify");
  const auto box = box_from_config(cert_cfg.at("box"));
  const auto cert = certify_box(family, hyper, box);
  Json j = certificate_json(cert);
  if (cert_cfg.boolean_or("splitting", false)) {
    const auto split = splitting_bound(family, hyper, box);
    j["splitting"] = {{"C0", split.C0}, {"log_C", split.log_C}, {"hull", certificate_json(split.hull)}};
  }
  std::vector<std::string> rows;
  if (family.stat_dim() == 1 || family.kind() == FamilyKind::GaussianKnownVariance) {
    MomentSpaceBox mu_box = box;
    mu_box.grid = static_cast<int>(cert_cfg.integer_or("mu_grid", 10));
    std::vector<double> ts{1, 10, 100, 1000};
    if (cert_cfg.has("t")) ts = cert_cfg.numbers("t");
    int violations = 0;
    for (const auto& mu : box_grid(mu_box)) {
      for (double t : ts) {
        const auto sw = laplace_sandwich(family, mu, t, cert.epsilon, cert.delta, cert.alpha, cert.beta);
        const bool ok = sw.lower <= sw.quadrature && sw.quadrature <= sw.upper;
        violations += !ok;
        std::string m;
        for (Eigen::Index i = 0; i < mu.size(); ++i) m += (i ? ";" : "") + num(mu[i]);
        rows.push_back(m + "," + num(t) + "," + num(sw.lower) + "," + num(sw.quadrature) + "," + num(sw.upper) + "," +
                       (ok ? "1" : "0"));
      }
    }
    j["sandwich_violations"] = violations;
    s.write_csv("sandwich.csv", "mu,t,log_lower,log_quadrature,log_upper,inside", rows);
  }
  s.write_json("certificate.json", j);
  std::cout << j.dump(2) << "\n";
}

void cmd_sweep(Session& s) {
  const auto root = s.root();
  bool ran = false;
  if (root.has("sweep")) {
    ran = true;
    const auto p = problem(s);
    const auto sw = root.at("sweep");
    SweepConfig cfg{.mixture = mixture_from_config(p.family, sw.at("mixture")),
                    .model = p.model,
                    .family = p.family,
                    .hyper = p.hyper,
                    .n_grid = sw.integers("n_grid"),
                    .seed = sw.seed_or("seed", s.seed()),
                    .region = region_from_config(sw.at("region")),
                    .exact_max_n = static_cast<int>(sw.integer_or("exact_max_n", 14)),
                    .gibbs = sw.has("gibbs") ? gibbs_from_config(sw.at("gibbs"), s.seed()) : GibbsChainConfig{}};
    const int t_star = static_cast<int>(sw.integer("t_star"));
    const auto res = inconsistency_sweep(cfg, t_star, s.threads());
    std::vector<std::string> rows;
    for (const auto& r : res.rows) {
      rows.push_back(std::to_string(r.n) + "," + r.engine + "," + num(r.posterior) + "," + num(r.mcmc_se) + "," +
                     num(r.bound.phi) + "," + (r.bound.phi_exact ? "1" : "0") + "," + num(r.bound.C_t) + "," +
                     (r.excluded ? "" : num(r.bound.bound)) + "," + (r.bound.preconditions() ? "1" : "0") + "," +
                     (r.excluded ? "1" : "0") + "," + num(r.running_max) + "," + num(r.running_max_se) + ",\"" +
                     r.bound.note + "\"");
    }
    s.write_csv("sweep.csv",
                "n,engine,posterior,mcmc_se,phi,phi_exact,C_t,bound,preconditions,excluded,running_max,running_max_se,note",
                rows);
    std::cout << "sweep: t* = " << t_star << ", c = " << num(res.c) << ", " << res.rows.size() << " rows\n";
  }
  if (root.has("fig1b")) {
    ran = true;
    const auto p = problem(s);
    const auto f = root.at("fig1b");
    Fig1bConfig cfg{.mixture = mixture_from_config(p.family, f.at("mixture")),
                    .model = p.model,
                    .family = p.family,
                    .hyper = p.hyper,
                    .n_grid = f.integers("n_grid"),
                    .replicates = static_cast<int>(f.integer_or("replicates", 10)),
                    .seed = f.seed_or("seed", s.seed()),
                    .gibbs = f.has("gibbs") ? gibbs_from_config(f.at("gibbs"), s.seed()) : GibbsChainConfig{},
                    .exact_max_n = static_cast<int>(f.integer_or("exact_max_n", 14))};
    const auto res = fig1b_experiment(cfg, s.threads());
    std::vector<std::string> rows;
    for (const auto& r : res.rows) {
      rows.push_back(std::to_string(r.n) + "," + std::to_string(r.t) + "," + num(r.mean_posterior) + "," + num(r.stderr_));
    }
    s.write_csv("fig1b.csv", "n,t,mean_posterior,stderr", rows);
    std::vector<std::string> census;
    for (std::size_t g = 0; g < res.tiny_block_counts.size(); ++g) {
      if (res.tiny_block_counts[g].empty()) continue;
      const auto c = census_from_counts(res.tiny_block_counts[g]);
      census.push_back(std::to_string(cfg.n_grid[g]) + "," + num(c.q10) + "," + num(c.median) + "," + num(c.q90));
    }
    s.write_csv("fig1b_census.csv", "n,q10_tiny_blocks,median_tiny_blocks,q90_tiny_blocks", census);
    std::cout << "fig1b: " << res.rows.size() << " rows\n";
  }
  if (!ran) root.fail("", "sweep needs a \"sweep\" or \"fig1b\" section");
}

}  // namespace

int run(const CliInvocation& inv) {
  Session s(inv);
  const auto& cmd = inv.subcommand;
  if (cmd == "exact") {
    cmd_exact(s);
  } else if (cmd == "gibbs") {
    cmd_gibbs(s);
  } else if (cmd == "prior") {
    cmd_prior(s);
  } else if (cmd == "bounds") {
    cmd_bounds(s);
  } else if (cmd == "fig3") {
    cmd_fig3(s);
  } else if (cmd == "capture") {
    cmd_capture(s);
  } else if (cmd == "certify") {
    cmd_certify(s);
  } else if (cmd == "sweep") {
    cmd_sweep(s);
  } else {
    throw DomainError("unknown subcommand '" + cmd + "'");
  }
  s.finish();
  return 0;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"gpmix: Gibbs-type partition mixtures over conjugate exponential families"};
  app.require_subcommand(1, 1);
  CliInvocation inv;
  std::uint64_t seed = 0;
  int n = 0, threads = 0;
  double theta = 0.0;
  std::string out;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"exact", "exact posterior on the number of clusters"},
      {"gibbs", "collapsed Gibbs estimate of the posterior on the number of clusters"},
      {"prior", "prior on the number of clusters"},
      {"bounds", "posterior upper bounds with their constants"},
      {"fig3", "law of the first block size given two blocks"},
      {"capture", "capture frequencies over a grid of n"},
      {"certify", "Laplace certificate for a moment-space box"},
      {"sweep", "inconsistency sweep and non-concentration experiment"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", inv.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides config)");
    sub->add_option("--n", n, "number of observations (overrides config)");
    sub->add_option("-o,--out", out, std::string("output directory (default: config output_dir, $") + kOutputDirEnv +
                                         ", gpmix-out)");
    sub->add_option("--threads", threads, "worker threads; results do not depend on it");
    sub->add_flag("-v,--verbose", inv.verbosity, "verbose logging to stderr");
    if (name == "fig3") sub->add_option("--theta", theta, "Dirichlet process concentration");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  auto* sub = app.get_subcommands().front();
  inv.subcommand = sub->get_name();
  if (sub->count("--seed")) inv.seed = seed;
  if (sub->count("--n")) inv.n = n;
  if (sub->count("--out")) inv.out_dir = out;
  if (sub->count("--threads")) inv.threads = threads;
  if (inv.subcommand == "fig3" && sub->count("--theta")) inv.theta = theta;
  try {
    return run(inv);
  } catch (const Refusal& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace gpmix
