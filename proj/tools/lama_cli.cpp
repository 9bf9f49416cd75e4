// lama: command-line front end for the detector, state-evolution analysis,
// threshold machinery and the Monte-Carlo harness.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <thread>

#include "lama/errors.hpp"
#include "lama/io.hpp"
#include "lama/simulator.hpp"
#include "lama/studies.hpp"
#include "lama/thresholds.hpp"

namespace {

using namespace lama;

struct GlobalOpts {
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency
  std::string out = "-";
  std::string format = "csv";

  int resolved_threads() const {
    if (threads > 0) return threads;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
  }
};

void emit(const Table& t, const GlobalOpts& g) {
  if (g.out == "-") {
    if (g.format == "json") {
      write_json(t, std::cout);
    } else {
      write_csv(t, std::cout);
    }
    return;
  }
  std::ofstream os(g.out);
  if (!os) throw validation_error("cannot open output file: " + g.out);
  if (g.format == "json") {
    write_json(t, os);
  } else {
    write_csv(t, os);
  }
}

Field parse_field(const std::string& s) {
  if (s == "real") return Field::real;
  if (s == "complex") return Field::complex_;
  throw validation_error("field must be `real` or `complex`, got " + s);
}

Constellation load_constellation(const std::string& spec, const std::string& field) {
  const Field f = parse_field(field);
  if (spec.rfind("file:", 0) == 0) return Constellation::from_file(spec.substr(5), f);
  return Constellation::make_standard(spec, f);
}

void echo_quad(Table& t, const QuadratureSpec& q) {
  t.add_meta("quad.nodes_per_dim", std::to_string(q.nodes_per_dim));
  t.add_meta("quad.abs_tol", fmt_g17(q.abs_tol));
  t.add_meta("quad.rel_tol", fmt_g17(q.rel_tol));
}

// ---------------------------------------------------------------- thresholds
int cmd_thresholds(const std::vector<std::string>& names, const std::string& field,
                   const QuadratureSpec& q, const GlobalOpts& g) {
  if (names.empty()) throw validation_error("thresholds: empty constellation list");
  Table t;
  t.add_meta("command", "thresholds");
  t.add_meta("constellations", [&] {
    std::string s;
    for (const auto& n : names) s += (s.empty() ? "" : ",") + n;
    return s;
  }());
  echo_quad(t, q);
  t.columns = {"constellation", "beta_min", "n0_min", "beta_max", "n0_max"};
  for (const auto& n : names) {
    const auto c = load_constellation(n, field);
    const auto rep = threshold_report(c, q);
    t.rows.push_back({rep.constellation, fmt_g17(rep.beta_min),
                      fmt_g17(rep.n0_min_at_beta_min), fmt_g17(rep.beta_max),
                      fmt_g17(rep.n0_max_at_beta_max)});
  }
  emit(t, g);
  return 0;
}

// ------------------------------------------------------------------------ se
int cmd_se(const std::string& name, const std::string& field, double beta, double n0,
           std::optional<double> snr_db, std::optional<double> n0post, int iters,
           double conv_tol, bool emit_g, int g_points, const QuadratureSpec& q,
           const GlobalOpts& g) {
  const auto c = load_constellation(name, field);
  SEParams p;
  p.beta = beta;
  p.n0 = snr_db ? n0_from_snr_db(*snr_db, beta, c.es()) : n0;
  p.n0post = n0post ? *n0post : p.n0;
  p.constellation = c;
  p.quad = q;
  p.validate();

  Table t;
  t.add_meta("command", "se");
  t.add_meta("constellation", c.name());
  t.add_meta("beta", fmt_g17(beta));
  t.add_meta("n0", fmt_g17(p.n0));
  t.add_meta("n0post", fmt_g17(p.n0post));
  t.add_meta("matched", p.matched() ? "true" : "false");
  echo_quad(t, q);

  if (emit_g) {
    if (!p.matched()) throw validation_error("--emit-g needs the matched case");
    t.add_meta("g_points", std::to_string(g_points));
    t.columns = {"sigma2", "g"};
    const double var = c.moments().variance;
    const double lo = 1e-8 * (p.n0 + p.beta);
    const double hi = 10.0 * (p.n0 + p.beta * var);
    for (int i = 0; i < g_points; ++i) {
      const double s2 =
          std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (g_points - 1));
      t.rows.push_back({fmt_g17(s2), fmt_g17(g_function(s2, p))});
    }
    emit(t, g);
    return 0;
  }

  t.add_meta("max_iters", std::to_string(iters));
  t.add_meta("conv_tol", fmt_g17(conv_tol));
  const auto trace = se_run(p, iters, conv_tol);
  t.add_meta("converged", trace.converged ? "true" : "false");
  t.columns = {"t", "sigma2", "gamma2"};
  for (const auto& s : trace.states)
    t.rows.push_back({std::to_string(s.t), fmt_g17(s.sigma2), fmt_g17(s.gamma2)});
  emit(t, g);
  return 0;
}

// ---------------------------------------------------------------- fixed-points
int cmd_fixed_points(const std::string& name, const std::string& field, double beta,
                     double n0, std::optional<double> snr_db, int grid_points,
                     bool skip_check, const QuadratureSpec& q, const GlobalOpts& g) {
  const auto c = load_constellation(name, field);
  SEParams p;
  p.beta = beta;
  p.n0 = snr_db ? n0_from_snr_db(*snr_db, beta, c.es()) : n0;
  p.n0post = p.n0;
  p.constellation = c;
  p.quad = q;
  const auto rep = fixed_points(p, 0.0, 0.0, grid_points, !skip_check);

  Table t;
  t.add_meta("command", "fixed-points");
  t.add_meta("constellation", c.name());
  t.add_meta("beta", fmt_g17(beta));
  t.add_meta("n0", fmt_g17(p.n0));
  t.add_meta("grid_points", std::to_string(grid_points));
  echo_quad(t, q);
  t.add_meta("count", std::to_string(rep.count));
  t.add_meta("largest", fmt_g17(rep.largest));
  t.add_meta("smallest", fmt_g17(rep.smallest));
  t.add_meta("eta", fmt_g17(rep.eta));
  t.add_meta("grid_warning", rep.grid_warning ? "true" : "false");
  t.columns = {"root", "sigma2"};
  for (std::size_t i = 0; i < rep.roots.size(); ++i)
    t.rows.push_back({std::to_string(i), fmt_g17(rep.roots[i])});
  emit(t, g);
  return 0;
}

// -------------------------------------------------------------------- tradeoff
int cmd_tradeoff(const std::string& name, const std::string& field,
                 const std::vector<double>& betas, double target_ser, int max_iters,
                 const QuadratureSpec& q, const GlobalOpts& g) {
  if (betas.empty()) throw validation_error("tradeoff: empty beta list");
  const auto c = load_constellation(name, field);
  Table t;
  t.add_meta("command", "tradeoff");
  t.add_meta("constellation", c.name());
  t.add_meta("target_ser", fmt_g17(target_ser));
  t.add_meta("max_iters", std::to_string(max_iters));
  echo_quad(t, q);
  t.columns = {"beta", "iterations", "required_snr_db", "awgn_snr_db"};
  for (double beta : betas) {
    const double awgn = awgn_snr_db_for_ser(c, beta, target_ser);
    for (const auto& row : tradeoff_study(c, beta, target_ser, max_iters, q)) {
      if (!row.reachable) continue;  // target not achievable at this depth
      t.rows.push_back({fmt_g17(beta), std::to_string(row.iterations),
                        fmt_g17(row.required_snr_db), fmt_g17(awgn)});
    }
  }
  emit(t, g);
  return 0;
}

// ------------------------------------------------------------------------ rate
int cmd_rate(const std::string& name, const std::string& field,
             const std::vector<double>& betas, const std::vector<double>& snr_grid,
             const QuadratureSpec& q, const GlobalOpts& g) {
  if (betas.empty()) throw validation_error("rate: empty beta list");
  const auto c = load_constellation(name, field);
  Table t;
  t.add_meta("command", "rate");
  t.add_meta("constellation", c.name());
  echo_quad(t, q);
  t.columns = {"beta", "snr_db", "n0", "sigma2_inf", "rate_bpcu"};
  for (double beta : betas) {
    for (double snr : snr_grid) {
      SEParams p;
      p.beta = beta;
      p.n0 = p.n0post = n0_from_snr_db(snr, beta, c.es());
      p.constellation = c;
      p.quad = q;
      const auto trace = se_run(p, 500, 1e-12);
      const double s2 = trace.last().sigma2;
      t.rows.push_back({fmt_g17(beta), fmt_g17(snr), fmt_g17(p.n0), fmt_g17(s2),
                        fmt_g17(achievable_rate(s2, c, q))});
    }
  }
  emit(t, g);
  return 0;
}

// ------------------------------------------------------------------- simulate
SimConfig parse_sim_config(const std::string& path, const GlobalOpts& g,
                           bool seed_overridden) {
  const auto sections = parse_config_file(path);
  for (const auto& [sec, _] : sections)
    if (sec != "simulate")
      throw validation_error(path + ": unknown section [" + sec + "]");
  if (sections.find("simulate") == sections.end())
    throw validation_error(path + ": missing [simulate] section");

  SimConfig cfg;
  cfg.seed = g.seed;
  cfg.threads = g.resolved_threads();
  std::string cname = "QPSK", cfield = "complex";
  bool have_snr = false;

  for (const auto& e : sections.at("simulate")) {
    auto bad = [&](const std::string& why) {
      return validation_error(path + ":" + std::to_string(e.line) + ": " + e.key + ": " + why);
    };
    try {
      if (e.key == "mr") {
        cfg.mr = std::stoi(e.value);
      } else if (e.key == "mt") {
        cfg.mt = std::stoi(e.value);
      } else if (e.key == "constellation") {
        cname = e.value;
      } else if (e.key == "field") {
        cfield = e.value;
      } else if (e.key == "snr_db") {
        cfg.snr_db_grid = parse_grid(e.value);
        have_snr = true;
      } else if (e.key == "n0post") {
        if (e.value == "matched") {
          cfg.n0post_matched = true;
        } else {
          cfg.n0post_matched = false;
          cfg.n0post_fixed = std::stod(e.value);
        }
      } else if (e.key == "trials") {
        cfg.trials = std::stoi(e.value);
      } else if (e.key == "max_iters") {
        cfg.max_iters = std::stoi(e.value);
      } else if (e.key == "stop_rule") {
        if (e.value == "fixed_iters") {
          cfg.stop_rule = StopRule::fixed_iters;
        } else if (e.value == "tau_non_improving") {
          cfg.stop_rule = StopRule::tau_non_improving;
        } else {
          throw bad("want fixed_iters or tau_non_improving");
        }
      } else if (e.key == "detectors") {
        cfg.detectors.clear();
        for (const auto& d : split_csv_list(e.value))
          cfg.detectors.push_back(detector_from_name(d));
      } else if (e.key == "channel") {
        if (e.value == "iid_gaussian") {
          cfg.channel = ChannelKind::iid_gaussian;
        } else if (e.value == "large_sparse") {
          cfg.channel = ChannelKind::large_sparse;
        } else {
          throw bad("want iid_gaussian or large_sparse");
        }
      } else if (e.key == "gamma") {
        cfg.gamma = std::stoi(e.value);
      } else if (e.key == "seed") {
        if (!seed_overridden) cfg.seed = std::stoull(e.value);
      } else if (e.key == "threads") {
        cfg.threads = std::stoi(e.value);
      } else {
        throw bad("unknown key");
      }
    } catch (const validation_error&) {
      throw;
    } catch (const std::exception&) {
      throw bad("cannot parse value `" + e.value + "`");
    }
  }
  if (!have_snr) throw validation_error(path + ": snr_db is required");
  cfg.constellation = load_constellation(cname, cfield);
  cfg.validate();
  return cfg;
}

void echo_sim_config(Table& t, const SimConfig& cfg) {
  t.add_meta("mr", std::to_string(cfg.mr));
  t.add_meta("mt", std::to_string(cfg.mt));
  t.add_meta("constellation", cfg.constellation.name());
  std::string snr;
  for (double v : cfg.snr_db_grid) snr += (snr.empty() ? "" : ",") + fmt_g17(v);
  t.add_meta("snr_db", snr);
  t.add_meta("n0post", cfg.n0post_matched ? "matched" : fmt_g17(cfg.n0post_fixed));
  t.add_meta("trials", std::to_string(cfg.trials));
  t.add_meta("max_iters", std::to_string(cfg.max_iters));
  t.add_meta("stop_rule", cfg.stop_rule == StopRule::fixed_iters ? "fixed_iters"
                                                                 : "tau_non_improving");
  std::string dets;
  for (auto d : cfg.detectors) dets += (dets.empty() ? "" : ",") + detector_name(d);
  t.add_meta("detectors", dets);
  t.add_meta("channel", cfg.channel == ChannelKind::iid_gaussian ? "iid_gaussian"
                                                                 : "large_sparse");
  if (cfg.gamma) t.add_meta("gamma", std::to_string(*cfg.gamma));
  t.add_meta("seed", std::to_string(cfg.seed));
}

int cmd_simulate(const std::string& config_path, const GlobalOpts& g, bool seed_overridden) {
  const auto cfg = parse_sim_config(config_path, g, seed_overridden);
  const auto result = ser_sweep(cfg);

  Table t;
  t.add_meta("command", "simulate");
  echo_sim_config(t, cfg);
  t.columns = {"detector", "snr_db", "ser", "stderr", "trials", "symbols", "errors",
               "divergences"};
  for (const auto& cell : result.cells) {
    t.rows.push_back({detector_name(cell.detector), fmt_g17(cell.snr_db),
                      fmt_g17(cell.ser), fmt_g17(cell.std_error),
                      std::to_string(cell.trials), std::to_string(cell.symbols),
                      std::to_string(cell.errors), std::to_string(cell.divergences)});
  }
  for (std::size_t si = 0; si < result.empirical_snr_db.size(); ++si)
    t.add_meta("empirical_snr_db." + std::to_string(si),
               fmt_g17(result.empirical_snr_db[si]));
  for (std::size_t si = 0; si < result.sigma2_hat_mean.size(); ++si) {
    if (result.sigma2_hat_mean[si].empty()) continue;
    std::string v;
    for (double x : result.sigma2_hat_mean[si]) v += (v.empty() ? "" : ",") + fmt_g17(x);
    t.add_meta("sigma2_hat_mean." + std::to_string(si), v);
  }
  emit(t, g);
  return 0;
}

// -------------------------------------------------------------- constellations
int cmd_constellations(const std::string& which, const std::string& field,
                       const GlobalOpts& g) {
  Table t;
  t.add_meta("command", "constellations");
  if (which.empty()) {
    t.columns = {"name", "field", "size", "es", "separable"};
    for (const auto& n : standard_constellation_names()) {
      const bool complex_ok = n.find("PAM") == std::string::npos;
      const auto c = Constellation::make_standard(
          n, complex_ok ? Field::complex_ : Field::real);
      t.rows.push_back({c.name(), complex_ok ? "complex" : "real",
                        std::to_string(c.size()), fmt_g17(c.es()),
                        c.separable() ? "true" : "false"});
    }
  } else {
    const auto c = load_constellation(which, field);
    const auto m = c.moments();
    t.add_meta("name", c.name());
    t.add_meta("field", c.field() == Field::real ? "real" : "complex");
    t.add_meta("es", fmt_g17(c.es()));
    t.add_meta("mean_re", fmt_g17(m.mean.real()));
    t.add_meta("mean_im", fmt_g17(m.mean.imag()));
    t.add_meta("variance", fmt_g17(m.variance));
    t.add_meta("separable", c.separable() ? "true" : "false");
    t.columns = {"re", "im", "prior"};
    for (std::size_t i = 0; i < c.size(); ++i)
      t.rows.push_back({fmt_g17(c.points()[i].real()), fmt_g17(c.points()[i].imag()),
                        fmt_g17(c.priors()[i])});
  }
  emit(t, g);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LAMA large-MIMO data detection: state evolution, recovery thresholds "
               "and Monte-Carlo simulation"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "master seed for randomized commands");
  app.add_option("--threads", g.threads, "worker threads (0: all cores)");
  app.add_option("--out", g.out, "output path (- for stdout)")->capture_default_str();
  app.add_option("--format", g.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  QuadratureSpec quad;
  app.add_option("--nodes", quad.nodes_per_dim, "Gauss-Hermite nodes per dimension")
      ->capture_default_str();

  // thresholds
  auto* th = app.add_subcommand("thresholds", "MRT/ERT and critical noise levels");
  std::string th_list;
  std::string th_field = "complex";
  th->add_option("--constellations", th_list, "comma list (names or file:PATH)")->required();
  th->add_option("--field", th_field, "real or complex")->capture_default_str();

  // se
  auto* se = app.add_subcommand("se", "state-evolution trace / fixed-point function");
  std::string se_name, se_field = "complex";
  double se_beta = 1.0, se_n0 = 0.0;
  std::optional<double> se_snr, se_n0post;
  int se_iters = 100, se_gpoints = 400;
  double se_conv = 1e-9;
  bool se_emitg = false;
  se->add_option("--constellation", se_name)->required();
  se->add_option("--field", se_field)->capture_default_str();
  se->add_option("--beta", se_beta)->required();
  auto* se_n0_opt = se->add_option("--n0", se_n0, "true noise variance");
  auto* se_snr_opt = se->add_option("--snr-db", se_snr, "receive SNR in dB");
  se_n0_opt->excludes(se_snr_opt);
  se->add_option("--n0post", se_n0post, "postulated noise variance (default: matched)");
  se->add_option("--iters", se_iters)->capture_default_str();
  se->add_option("--conv-tol", se_conv)->capture_default_str();
  se->add_flag("--emit-g", se_emitg, "emit the fixed-point function g over a sigma2 grid");
  se->add_option("--g-points", se_gpoints)->capture_default_str();

  // fixed-points
  auto* fp = app.add_subcommand("fixed-points", "roots of the matched SE fixed-point equation");
  std::string fp_name, fp_field = "complex";
  double fp_beta = 1.0, fp_n0 = 0.0;
  std::optional<double> fp_snr;
  int fp_grid = 2000;
  bool fp_nocheck = false;
  fp->add_option("--constellation", fp_name)->required();
  fp->add_option("--field", fp_field)->capture_default_str();
  fp->add_option("--beta", fp_beta)->required();
  auto* fp_n0_opt = fp->add_option("--n0", fp_n0);
  auto* fp_snr_opt = fp->add_option("--snr-db", fp_snr);
  fp_n0_opt->excludes(fp_snr_opt);
  fp->add_option("--grid-points", fp_grid)->capture_default_str();
  fp->add_flag("--no-refine-check", fp_nocheck, "skip the doubled-resolution root recount");

  // tradeoff
  auto* tr = app.add_subcommand("tradeoff", "required SNR vs iteration count");
  std::string tr_name, tr_field = "complex", tr_betas;
  double tr_target = 1e-3;
  int tr_iters = 20;
  tr->add_option("--constellation", tr_name)->required();
  tr->add_option("--field", tr_field)->capture_default_str();
  tr->add_option("--betas", tr_betas, "comma list of system ratios")->required();
  tr->add_option("--target-ser", tr_target)->capture_default_str();
  tr->add_option("--max-iters", tr_iters)->capture_default_str();

  // rate
  auto* ra = app.add_subcommand("rate", "achievable rate of the decoupled channel");
  std::string ra_name, ra_field = "complex", ra_betas, ra_snr;
  ra->add_option("--constellation", ra_name)->required();
  ra->add_option("--field", ra_field)->capture_default_str();
  ra->add_option("--betas", ra_betas)->required();
  ra->add_option("--snr-db", ra_snr, "grid: lo:hi:step or comma list")->required();

  // simulate
  auto* si = app.add_subcommand("simulate", "Monte-Carlo SER sweep from a config file");
  std::string si_config;
  si->add_option("config", si_config, "key=value config with a [simulate] section")
      ->required();

  // constellations
  auto* co = app.add_subcommand("constellations", "list alphabets or dump one");
  std::string co_which, co_field = "complex";
  co->add_option("--constellation", co_which, "name or file:PATH (empty: list all)");
  co->add_option("--field", co_field)->capture_default_str();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    quad.validate();
    if (th->parsed()) return cmd_thresholds(split_csv_list(th_list), th_field, quad, g);
    if (se->parsed()) {
      if (!*se_n0_opt && !se_snr) throw validation_error("se: need --n0 or --snr-db");
      return cmd_se(se_name, se_field, se_beta, se_n0, se_snr, se_n0post, se_iters,
                    se_conv, se_emitg, se_gpoints, quad, g);
    }
    if (fp->parsed()) {
      if (!*fp_n0_opt && !fp_snr)
        throw validation_error("fixed-points: need --n0 or --snr-db");
      return cmd_fixed_points(fp_name, fp_field, fp_beta, fp_n0, fp_snr, fp_grid,
                              fp_nocheck, quad, g);
    }
    if (tr->parsed())
      return cmd_tradeoff(tr_name, tr_field, parse_grid(tr_betas), tr_target, tr_iters,
                          quad, g);
    if (ra->parsed())
      return cmd_rate(ra_name, ra_field, parse_grid(ra_betas), parse_grid(ra_snr), quad, g);
    if (si->parsed()) return cmd_simulate(si_config, g, app.count("--seed") > 0);
    if (co->parsed()) return cmd_constellations(co_which, co_field, g);
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
