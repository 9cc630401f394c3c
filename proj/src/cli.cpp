#include "gqmet/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gqmet/coherence.hpp"
#include "gqmet/csv.hpp"
#include "gqmet/errors.hpp"
#include "gqmet/experiments.hpp"
#include "gqmet/oracle.hpp"

namespace gqmet::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string flag_name(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return "--" + key;
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

std::string fmt_num(double v) { return fmt::format("{:.12g}", v); }

double rel_diff(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct ProbeFlags {
  double beta = 1.0;
  double omega = 1.0;
  double nbar = kUnset;
  double sigma = 1.0;
  double sigma_q = kUnset;
  double sigma_p = kUnset;
  double epsilon = kUnset;

  void add(CLI::App* app) {
    app->add_option("--beta", beta, "inverse temperature")->capture_default_str();
    app->add_option("--omega", omega, "mode frequency")->capture_default_str();
    app->add_option("--nbar", nbar, "thermal occupation; overrides --beta/--omega");
    app->add_option("--sigma", sigma, "measurement scale")->capture_default_str();
    app->add_option("--sigma-q", sigma_q, "q-measurement uncertainty (default --sigma)");
    app->add_option("--sigma-p", sigma_p, "p-measurement uncertainty (default --sigma)");
    app->add_option("--epsilon", epsilon, "asymmetry; replaces --sigma-q/--sigma-p");
  }

  double occupation() const {
    if (!std::isnan(nbar)) {
      if (!std::isfinite(nbar) || nbar < 0.0) throw DomainError("--nbar must be finite and >= 0");
      return nbar;
    }
    if (!(beta > 0.0) || !(omega > 0.0) || !std::isfinite(beta) || !std::isfinite(omega)) {
      throw DomainError("--beta and --omega must be positive");
    }
    return thermal_occupation(beta, omega);
  }

  MeasurementSettings settings() const {
    MeasurementSettings m;
    if (!std::isnan(epsilon)) {
      m = settings_from_asymmetry({sigma, epsilon});
    } else {
      m = {std::isnan(sigma_q) ? sigma : sigma_q, std::isnan(sigma_p) ? sigma : sigma_p};
    }
    m.validate();
    return m;
  }

  ProbeSpec spec() const { return ProbeSpec{occupation(), settings()}; }
};

struct ChannelFlags {
  std::string channel = "attenuator";
  std::string estimate;
  double phi = std::numbers::pi / 4;
  double rg = 1.0;
  double mbar = 0.5;
  std::string variant = "corrected";
  double tau = kDefaultTau;
  double step = kDefaultStep;

  void add(CLI::App* app) {
    app->add_option("--channel", channel, "attenuator | amplifier")->capture_default_str();
    app->add_option("--estimate", estimate, "phi | mbar (attenuator), rg | mbar (amplifier)");
    app->add_option("--phi", phi, "beam-splitter angle")->capture_default_str();
    app->add_option("--rg", rg, "amplifier squeezing")->capture_default_str();
    app->add_option("--mbar", mbar, "environment occupation")->capture_default_str();
    app->add_option("--variant", variant, "attenuator-mbar closed form: corrected | as_printed")
        ->capture_default_str();
    app->add_option("--tau", tau, "Bures step")->capture_default_str();
    app->add_option("--step", step, "finite-difference step")->capture_default_str();
  }

  ChannelKind kind() const { return parse_channel(channel); }

  Parameter estimated() const {
    if (estimate.empty()) return kind() == ChannelKind::attenuator ? Parameter::phi : Parameter::rg;
    return parse_parameter(estimate);
  }

  AttMbarVariant att_variant() const {
    if (variant == "corrected") return AttMbarVariant::corrected;
    if (variant == "as_printed") return AttMbarVariant::as_printed;
    throw DomainError("unknown --variant '" + variant + "'");
  }

  void fill(SweepSpec& s) const {
    s.channel = kind();
    s.estimate = estimated();
    s.phi = phi;
    s.rg = rg;
    s.mbar = mbar;
    s.tau = tau;
    s.step = step;
    s.variant = att_variant();
  }
};

struct Context {
  std::vector<std::string> args;
  ConfigFile config;
  std::ostream& out;
  std::ostream& err;

  std::vector<std::string> provenance() const {
    std::string cmd = "gqmet";
    for (const auto& a : args) cmd += " " + a;
    std::vector<std::string> p{"command: " + cmd};
    for (const auto& l : config.lines) p.push_back("config: " + l);
    return p;
  }

  void emit(Table t, const std::string& path) const {
    auto comments = provenance();
    comments.insert(comments.end(), t.comments.begin(), t.comments.end());
    t.comments = std::move(comments);
    if (path.empty() || path == "-") {
      out << to_csv(t);
    } else {
      write_atomic(path, to_csv(t));
    }
  }
};

// ---------------------------------------------------------------------------

int cmd_qfi(const Context& ctx, const ProbeFlags& pf, const ChannelFlags& cf) {
  SweepSpec s;
  cf.fill(s);
  s.nbar = pf.occupation();
  s.settings = pf.settings();
  s.scan = s.estimate;
  const double theta = s.estimate == Parameter::phi ? s.phi : s.estimate == Parameter::rg ? s.rg : s.mbar;
  s.grid = {theta, theta, 2};
  s.validate();

  const ProbeSpec probe{s.nbar, s.settings};
  const GaussianState initial = prepare_physical_probe(probe);

  StateFamily family;
  double closed = 0.0;
  if (s.channel == ChannelKind::attenuator) {
    const AttenuatorParams ch{s.phi, s.mbar};
    if (s.estimate == Parameter::phi) {
      family = attenuator_phi_family(probe, s.mbar);
      closed = qfi_att_phi(ch, s.nbar, s.settings);
    } else {
      family = attenuator_mbar_family(probe, s.phi);
      closed = qfi_att_mbar(ch, s.nbar, s.settings, s.variant);
    }
  } else {
    const AmplifierParams ch{s.rg, s.mbar};
    if (s.estimate == Parameter::rg) {
      family = amplifier_rg_family(probe, s.mbar);
      closed = qfi_amp_rg(ch, s.nbar, s.settings);
    } else {
      family = amplifier_mbar_family(probe, s.rg);
      closed = qfi_amp_mbar(ch, s.nbar, s.settings);
    }
  }
  const QfiBreakdown b = qfi_generic(family, theta, s.step);
  const double bures = qfi_bures(family, theta, s.tau);
  const GaussianState st = family.evaluate(theta);

  auto& out = ctx.out;
  out << fmt::format("channel {} estimate {} theta {}\n", to_string(s.channel), to_string(s.estimate),
                     fmt_num(theta));
  out << fmt::format("probe nbar {} sigma_q {} sigma_p {} det {}\n", fmt_num(s.nbar),
                     fmt_num(s.settings.sigma_q), fmt_num(s.settings.sigma_p),
                     fmt_num(initial.cov.det()));
  out << fmt::format("output cov [{}, {}; {}, {}] purity {}\n", fmt_num(st.cov.s11), fmt_num(st.cov.s12),
                     fmt_num(st.cov.s12), fmt_num(st.cov.s22), fmt_num(purity(st)));
  out << fmt::format("term_cov {}\nterm_purity {}\nterm_mean {}\ntotal {}\n", fmt_num(b.term_cov),
                     fmt_num(b.term_purity), fmt_num(b.term_mean), fmt_num(b.total));
  out << fmt::format("cross-check closed {} generic {} bures {} rel(closed,generic) {:.3e} "
                     "rel(closed,bures) {:.3e}\n",
                     fmt_num(closed), fmt_num(b.total), fmt_num(bures), rel_diff(closed, b.total),
                     rel_diff(closed, bures));
  if (s.channel == ChannelKind::attenuator && s.estimate == Parameter::mbar &&
      s.variant == AttMbarVariant::as_printed) {
    out << "note: as_printed variant selected; it omits a factor nu1 nu2 and is not expected to match\n";
  }
  return kOk;
}

struct SweepFlags {
  std::string scan;
  double start = 0.0;
  double stop = 1.0;
  int count = 11;
  std::vector<std::string> outputs{"qfi_closed"};
  std::string out;
};

int cmd_sweep(const Context& ctx, const ProbeFlags& pf, const ChannelFlags& cf, const SweepFlags& sf) {
  SweepSpec s;
  cf.fill(s);
  s.nbar = pf.occupation();
  s.sigma = pf.sigma;
  s.settings = pf.settings();
  s.scan = sf.scan.empty() ? s.estimate : parse_parameter(sf.scan);
  s.grid = {sf.start, sf.stop, sf.count};
  s.outputs.clear();
  for (const auto& o : sf.outputs) s.outputs.push_back(parse_output(o));
  Table t = run_sweep(s, default_threads());
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) flagged += t.number(i, t.header.size() - 1) != 0.0;
  if (flagged > 0) {
    ctx.err << fmt::format("warning: {} of {} grid points violate the uncertainty bound\n", flagged,
                           t.rows.size());
  }
  ctx.emit(std::move(t), sf.out);
  return kOk;
}

struct CoherenceFlags {
  double start = kUnset;
  double stop = kUnset;
  int count = 31;
  std::string out;
};

int cmd_coherence(const Context& ctx, const ProbeFlags& pf, const CoherenceFlags& cf) {
  if (!std::isnan(cf.start) || !std::isnan(cf.stop) || !cf.out.empty()) {
    const GridSpec g{std::isnan(cf.start) ? 0.5 : cf.start, std::isnan(cf.stop) ? 2.0 : cf.stop, cf.count};
    for (double v : g.values()) {
      if (!(v > 0.0)) throw DomainError("coherence map: sigma grid must be positive");
    }
    ctx.emit(coherence_map(g, g, pf.occupation()).to_table(), cf.out);
    return kOk;
  }
  const GaussianState st = prepare_physical_probe(pf.spec());
  const CoherenceReport r = coherence(st);
  ctx.out << fmt::format("coherence {}\nref_occupation {}\nstate_entropy {}\nref_entropy {}\n",
                         fmt_num(r.coherence), fmt_num(r.ref_occupation), fmt_num(r.state_entropy),
                         fmt_num(r.ref_entropy));
  return kOk;
}

int cmd_figure(const Context& ctx, const std::string& id, const std::string& dir) {
  const FigureId fig = parse_figure(id);
  std::filesystem::create_directories(dir);
  for (const auto& p : reproduce_figure(fig, dir, default_threads(), ctx.provenance())) {
    ctx.out << p.string() << '\n';
  }
  return kOk;
}

int cmd_table1(const Context& ctx, const std::string& path) {
  const auto rows = reproduce_table1(default_threads());
  for (const auto& r : rows) {
    ctx.err << fmt::format("{:<9} alpha {:.6g} (published {}) beta {:.6g} (published {}) n {:.4g} {}\n",
                           r.name, r.alpha_ours, fmt_num(r.alpha_published), r.beta_ours,
                           fmt_num(r.beta_published), r.n_ours, r.mismatch ? "MISMATCH" : "ok");
  }
  ctx.emit(table1_to_table(rows), path);
  return kOk;
}

struct OracleFlags {
  std::string check = "probe-cov";
  int points = 2048;
  int cutoff = 200;
  std::string out;
};

Table quantity_table(const std::vector<std::pair<std::string, double>>& rows) {
  Table t;
  t.header = {"quantity", "value"};
  for (const auto& [k, v] : rows) t.rows.push_back({k, format_number(v)});
  return t;
}

int cmd_oracle(const Context& ctx, const ProbeFlags& pf, const OracleFlags& of) {
  const ProbeSpec spec = pf.spec();
  if (of.check == "probe-cov") {
    if (of.points <= 0) throw DomainError("--points must be positive");
    const auto r = oracle::oracle_probe_cov(spec.nbar, spec.measurement(), static_cast<std::size_t>(of.points));
    Table t = quantity_table({
        {"nbar", r.nbar},
        {"sigma_q", r.settings.sigma_q},
        {"sigma_p", r.settings.sigma_p},
        {"sigma_q_physical", r.sigma_q_physical},
        {"sigma_p_physical", r.sigma_p_physical},
        {"half_width", r.grid.half_width},
        {"points", static_cast<double>(r.grid.points)},
        {"trace_initial", r.trace_initial},
        {"trace_after_q", r.trace_after_q},
        {"trace_final", r.trace_final},
        {"q2_before", r.q2_before},
        {"q2_after_q", r.q2_after_q},
        {"p2_after_q", r.p2_after_q},
        {"p2_final", r.p2_final},
        {"oracle_s11", r.oracle_cov.s11},
        {"oracle_s22", r.oracle_cov.s22},
        {"production_s11", r.production_cov.s11},
        {"production_s22", r.production_cov.s22},
        {"difference_s11", r.difference.s11},
        {"difference_s22", r.difference.s22},
    });
    for (const auto& n : r.notes) t.comments.push_back(n);
    ctx.out << fmt::format("oracle probe covariance   diag({}, {})\n", fmt_num(r.oracle_cov.s11),
                           fmt_num(r.oracle_cov.s22));
    ctx.out << fmt::format("production probe covariance diag({}, {})\n", fmt_num(r.production_cov.s11),
                           fmt_num(r.production_cov.s22));
    ctx.out << fmt::format("trace initial {} after q {} final {}\n", fmt_num(r.trace_initial),
                           fmt_num(r.trace_after_q), fmt_num(r.trace_final));
    for (const auto& n : r.notes) ctx.out << "note: " << n << '\n';
    if (!of.out.empty()) ctx.emit(std::move(t), of.out);
    return kOk;
  }
  if (of.check == "coherence") {
    const GaussianState st = prepare_physical_probe(spec);
    const auto f = oracle::fock_coherence(st, of.cutoff);
    const auto c = coherence(st);
    Table t = quantity_table({
        {"cutoff", static_cast<double>(of.cutoff)},
        {"coherence_gaussian", c.coherence},
        {"coherence_fock", f.coherence_thermal_ref},
        {"coherence_dephased", f.coherence_dephased},
        {"difference", f.coherence_thermal_ref - c.coherence},
        {"tail_population", f.tail_population},
        {"mean_photons", f.mean_photons},
        {"state_entropy", f.state_entropy},
        {"fock_s11", f.cov.s11},
        {"fock_s22", f.cov.s22},
    });
    ctx.out << fmt::format("coherence gaussian {} fock {} difference {:.3e}\n", fmt_num(c.coherence),
                           fmt_num(f.coherence_thermal_ref), f.coherence_thermal_ref - c.coherence);
    ctx.out << fmt::format("dephased-state coherence {} tail {:.3e}\n", fmt_num(f.coherence_dephased),
                           f.tail_population);
    if (!of.out.empty()) ctx.emit(std::move(t), of.out);
    return kOk;
  }
  throw DomainError("unknown --check '" + of.check + "' (probe-cov | coherence)");
}

struct FitFlags {
  std::string in;
  std::string x = "epsilon";
  std::string y = "qfi_closed";
  double fixed_n = kUnset;
  std::string out;
};

int cmd_fit(const Context& ctx, const FitFlags& ff) {
  const Table t = read_csv(ff.in);
  const std::size_t cx = t.column(ff.x);
  const std::size_t cy = t.column(ff.y);
  std::vector<PowerLawPoint> pts;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double y = t.number(i, cy);
    if (std::isfinite(y)) pts.push_back({t.number(i, cx), y});
  }
  const FitResult f = fit_power_law(pts, std::isnan(ff.fixed_n) ? FitMode::free_n() : FitMode::fixed_n(ff.fixed_n));
  for (const auto& w : f.warnings) ctx.err << "warning: " << w << '\n';
  ctx.out << fmt::format("alpha {}\nbeta {}\nn {}\nrms_residual {}\ngrid {}\n", fmt_num(f.alpha),
                         fmt_num(f.beta), fmt_num(f.n), fmt_num(f.rms_residual), f.grid_used);
  if (!ff.out.empty()) {
    Table r = quantity_table({{"alpha", f.alpha},
                              {"beta", f.beta},
                              {"n", f.n},
                              {"rms_residual", f.rms_residual},
                              {"used", static_cast<double>(f.used)},
                              {"excluded", static_cast<double>(f.excluded)}});
    r.comments.push_back("grid: " + f.grid_used);
    ctx.emit(std::move(r), ff.out);
  }
  return kOk;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args, ConfigFile& config) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      continue;
    }
    std::ifstream in(path);
    if (!in) throw MalformedInput("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    config = parse_config(buf.str());
    return merge_config(args, config);
  }
  return args;
}

int exit_for(const std::exception& e, std::ostream& err, int code) {
  err << "error: " << e.what() << '\n';
  return code;
}

}  // namespace

ConfigFile parse_config(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw MalformedInput(fmt::format("config line {}: expected key = value", lineno));
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty() || value.empty() || key.find(' ') != std::string::npos) {
      throw MalformedInput(fmt::format("config line {}: expected key = value", lineno));
    }
    if (key == "config") throw MalformedInput("config files cannot include other config files");
    cfg.entries.emplace_back(key, value);
    cfg.lines.push_back(trim(line));
  }
  return cfg;
}

std::vector<std::string> merge_config(const std::vector<std::string>& args, const ConfigFile& config) {
  std::vector<std::string> merged = args;
  for (const auto& [key, value] : config.entries) {
    const std::string flag = flag_name(key);
    if (has_flag(args, flag)) continue;
    merged.push_back(flag);
    merged.push_back(value);
  }
  return merged;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian quantum metrology for attenuator and amplifier channels", "gqmet"};
  app.require_subcommand(1);
  std::string config_path;

  ProbeFlags probe;
  ChannelFlags channel;
  SweepFlags sweep_flags;
  CoherenceFlags coh_flags;
  OracleFlags oracle_flags;
  FitFlags fit_flags;
  std::string figure_id;
  std::string figure_dir = ".";
  std::string table_out;

  auto with_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key = value file; flags override it");
    return sub;
  };

  auto* qfi = with_config(app.add_subcommand("qfi", "QFI breakdown with closed/generic/Bures cross-check"));
  probe.add(qfi);
  channel.add(qfi);

  auto* sweep = with_config(app.add_subcommand("sweep", "parameter sweep to CSV"));
  probe.add(sweep);
  channel.add(sweep);
  sweep->add_option("--scan", sweep_flags.scan, "scanned parameter (default: the estimated one)");
  sweep->add_option("--start", sweep_flags.start)->capture_default_str();
  sweep->add_option("--stop", sweep_flags.stop)->capture_default_str();
  sweep->add_option("--count", sweep_flags.count)->capture_default_str();
  sweep->add_option("--outputs", sweep_flags.outputs, "comma-separated output columns")->delimiter(',');
  sweep->add_option("--out", sweep_flags.out, "CSV path (default stdout)");

  auto* coh = with_config(app.add_subcommand("coherence", "coherence of a probe, or a sigma_q x sigma_p map"));
  probe.add(coh);
  coh->add_option("--start", coh_flags.start, "map grid start");
  coh->add_option("--stop", coh_flags.stop, "map grid stop");
  coh->add_option("--count", coh_flags.count, "map grid points per axis")->capture_default_str();
  coh->add_option("--out", coh_flags.out, "map CSV path");

  auto* fig = with_config(app.add_subcommand("figure", "write the panel CSVs of a figure"));
  fig->add_option("--id", figure_id, "fig2 .. fig6")->required();
  fig->add_option("--out", figure_dir, "output directory")->capture_default_str();

  auto* tab = with_config(app.add_subcommand("table1", "power-law table compared with published values"));
  tab->add_option("--out", table_out, "CSV path (default stdout)");

  auto* orc = with_config(app.add_subcommand("oracle", "brute-force diagnostics"));
  probe.add(orc);
  orc->add_option("--check", oracle_flags.check, "probe-cov | coherence")->capture_default_str();
  orc->add_option("--points", oracle_flags.points, "kernel grid points")->capture_default_str();
  orc->add_option("--cutoff", oracle_flags.cutoff, "Fock cutoff")->capture_default_str();
  orc->add_option("--out", oracle_flags.out, "report CSV path");

  auto* fit = with_config(app.add_subcommand("fit", "fit I = alpha + beta eps^n to a CSV column"));
  fit->add_option("--in", fit_flags.in, "input CSV")->required();
  fit->add_option("--x", fit_flags.x)->capture_default_str();
  fit->add_option("--y", fit_flags.y)->capture_default_str();
  fit->add_option("--fixed-n", fit_flags.fixed_n, "hold the exponent fixed");
  fit->add_option("--out", fit_flags.out, "result CSV path");

  ConfigFile config;
  std::vector<std::string> args;
  try {
    args = expand_config(raw_args, config);
  } catch (const Error& e) {
    return exit_for(e, err, kInvalidArgs);
  }

  std::vector<const char*> cargv{"gqmet"};
  for (const auto& a : args) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidArgs;
  }

  const Context ctx{raw_args, config, out, err};
  try {
    if (*qfi) return cmd_qfi(ctx, probe, channel);
    if (*sweep) return cmd_sweep(ctx, probe, channel, sweep_flags);
    if (*coh) return cmd_coherence(ctx, probe, coh_flags);
    if (*fig) return cmd_figure(ctx, figure_id, figure_dir);
    if (*tab) return cmd_table1(ctx, table_out);
    if (*orc) return cmd_oracle(ctx, probe, oracle_flags);
    if (*fit) return cmd_fit(ctx, fit_flags);
  } catch (const UnphysicalState& e) {
    return exit_for(e, err, kUnphysical);
  } catch (const EmptyResult& e) {
    return exit_for(e, err, kUnphysical);
  } catch (const NumericalFailure& e) {
    return exit_for(e, err, kNumerical);
  } catch (const GridError& e) {
    return exit_for(e, err, kNumerical);
  } catch (const CutoffError& e) {
    return exit_for(e, err, kNumerical);
  } catch (const Error& e) {
    return exit_for(e, err, kInvalidArgs);
  } catch (const std::filesystem::filesystem_error& e) {
    return exit_for(e, err, kInvalidArgs);
  } catch (const std::exception& e) {
    return exit_for(e, err, kNumerical);
  }
  return kInvalidArgs;
}

}  // namespace gqmet::cli
