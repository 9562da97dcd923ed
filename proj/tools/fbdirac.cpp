// Command-line driver: radial Dirac pseudospectra in a cavity and
// relativistic two-photon decay rates, with result caching and plot-ready
// scan output.

#include "fbdirac/cache.hpp"
#include "fbdirac/config.hpp"
#include "fbdirac/dirac.hpp"
#include "fbdirac/twophoton.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

namespace {

using namespace fbdirac;
using config::OutputFormat;
using config::RunConfig;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string human(const BigReal &x) {
  return to_digits_string(x, 11);
}

struct Output {
  OutputFormat format = OutputFormat::Table;
  std::string path;

  void write(const std::string &text) const {
    if (path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream out(path);
    if (!out)
      throw Error("cannot write output file " + path);
    out << text;
  }
};

std::string csv_from_rows(const std::vector<std::string> &header,
                          const std::vector<std::vector<std::string>> &rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i)
    os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto &row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

std::string table_from_rows(const std::vector<std::string> &header,
                            const std::vector<std::vector<std::string>> &rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i)
    width[i] = header[i].size();
  for (const auto &row : rows)
    for (std::size_t i = 0; i < row.size(); ++i)
      width[i] = std::max(width[i], row[i].size());
  std::ostringstream os;
  auto emit_row = [&](const std::vector<std::string> &row) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "  " : "") << row[i]
         << std::string(width[i] - row[i].size(), ' ');
    os << "\n";
  };
  emit_row(header);
  std::size_t total = 0;
  for (auto w : width)
    total += w + 2;
  os << std::string(total > 2 ? total - 2 : total, '-') << "\n";
  for (const auto &row : rows)
    emit_row(row);
  return os.str();
}

struct SolveEnv {
  PrecisionCtx ctx;
  BigReal c;
  std::unique_ptr<cache::SpectrumCache> store;

  explicit SolveEnv(const RunConfig &cfg)
      : ctx(cfg.digits), c(config::kLightSpeed) {
    if (!cfg.cache_dir.empty())
      store = std::make_unique<cache::SpectrumCache>(cfg.cache_dir);
  }

  dirac::DiracSpectrum spectrum(const basis::BasisSpec &spec,
                                const basis::NuclearModel &nuc,
                                int kappa) const {
    return cache::cached_spectrum(ctx, store.get(), spec, nuc, kappa, c);
  }
};

void escalate_warnings(const RunConfig &cfg, const dirac::DiracSpectrum &sp) {
  for (const auto &w : sp.warnings) {
    std::cerr << "warning: kappa=" << sp.kappa << ": " << w << "\n";
    if (cfg.strict)
      throw ConvergenceError("strict mode: " + w);
  }
}

// ---------------------------------------------------------------------------

int cmd_spectrum(const RunConfig &cfg, const Output &out) {
  std::vector<std::string> header = {"z",       "kappa",   "n",       "e_basis",
                                     "e_exact", "rel_diff", "class"};
  std::vector<std::vector<std::string>> rows;
  json jout = json::array();

  SolveEnv env(cfg);
  for (double z : cfg.effective_z()) {
    const auto spec = cfg.make_basis(env.ctx, z);
    const auto nuc = cfg.make_nuclear(env.ctx, z);
    auto sp = env.spectrum(spec, nuc, cfg.kappa);
    escalate_warnings(cfg, sp);

    const unsigned abs_k = static_cast<unsigned>(std::abs(cfg.kappa));
    const unsigned n0 = (cfg.kappa > 0) ? abs_k + 1 : abs_k;
    for (unsigned idx = 0; idx < cfg.levels; ++idx) {
      const unsigned n = n0 + idx;
      const auto &orb = sp.bound(idx);
      const BigReal exact =
          dirac::exact_energy(env.ctx, n, cfg.kappa, BigReal(z), env.c);
      const BigReal rel = abs((exact - orb.energy) / exact);
      rows.push_back({std::to_string(static_cast<int>(z)),
                      std::to_string(cfg.kappa), std::to_string(n),
                      out.format == OutputFormat::Table
                          ? human(orb.energy)
                          : to_full_string(orb.energy),
                      out.format == OutputFormat::Table
                          ? human(exact)
                          : to_full_string(exact),
                      to_digits_string(rel, 3), to_string(orb.cls)});
      jout.push_back({{"z", z},
                      {"kappa", cfg.kappa},
                      {"n", n},
                      {"e_basis", to_full_string(orb.energy)},
                      {"e_exact", to_full_string(exact)},
                      {"rel_diff", to_full_string(rel)}});
    }
  }
  if (out.format == OutputFormat::Json)
    out.write(jout.dump(1) + "\n");
  else if (out.format == OutputFormat::Csv)
    out.write(csv_from_rows(header, rows));
  else
    out.write(table_from_rows(header, rows));
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_rate(const RunConfig &cfg, const Output &out) {
  std::vector<std::string> header = {"z",     "channel", "restriction",
                                     "gauge", "rate_s",  "delta_lv"};
  std::vector<std::vector<std::string>> rows;
  json jout = json::array();
  SolveEnv env(cfg);

  const bool want_all = cfg.restriction == "all";
  auto keep_restriction = [&](const char *name) {
    return want_all || cfg.restriction == name;
  };

  for (double z : cfg.effective_z()) {
    const auto spec = cfg.make_basis(env.ctx, z);
    const auto nuc = cfg.make_nuclear(env.ctx, z);

    std::set<int> needed = {-1};
    std::vector<twophoton::MultipoleChannel> channels;
    for (const auto &name : cfg.channels) {
      channels.push_back(twophoton::parse_channel(name, -1, -1));
      for (int k : channels.back().intermediate_kappas)
        needed.insert(k);
    }

    twophoton::SpectrumSet set;
    for (int k : needed) {
      auto sp = env.spectrum(spec, nuc, k);
      escalate_warnings(cfg, sp);
      set.insert(std::move(sp));
    }
    const auto &sk = set.at(-1);
    const auto &i2s = sk.bound(1);
    const auto &f1s = sk.bound(0);

    twophoton::Engine engine(env.ctx, spec, env.c, set);
    std::vector<twophoton::RateResult> results;
    for (const auto &ch : channels)
      results.push_back(engine.total_rate(ch, i2s, f1s, cfg.quad_points));

    auto rate_str = [&](const BigReal &v) {
      return out.format == OutputFormat::Table ? human(v) : to_full_string(v);
    };

    for (const auto &rr : results) {
      const std::string dl =
          rr.delta_lv ? to_digits_string(*rr.delta_lv, 3) : "--";
      const std::string zs = std::to_string(static_cast<int>(z));
      const struct {
        const char *restriction;
        const BigReal &len, &vel;
      } split_rows[] = {
          {"all", rr.length.full, rr.velocity.full},
          {"pos", rr.length.plus, rr.velocity.plus},
          {"neg", rr.length.minus, rr.velocity.minus},
      };
      for (const auto &sr : split_rows) {
        if (!keep_restriction(sr.restriction))
          continue;
        rows.push_back({zs, rr.channel, sr.restriction, "length",
                        rate_str(sr.len),
                        std::string(sr.restriction) == "all" ? dl : ""});
        rows.push_back(
            {zs, rr.channel, sr.restriction, "velocity", rate_str(sr.vel), ""});
      }
      json jr = {{"z", z},
                 {"channel", rr.channel},
                 {"omega_t", to_full_string(rr.omega_t)},
                 {"length",
                  {{"all", to_full_string(rr.length.full)},
                   {"pos", to_full_string(rr.length.plus)},
                   {"neg", to_full_string(rr.length.minus)}}},
                 {"velocity",
                  {{"all", to_full_string(rr.velocity.full)},
                   {"pos", to_full_string(rr.velocity.plus)},
                   {"neg", to_full_string(rr.velocity.minus)}}},
                 {"quad_points", rr.quad_points}};
      if (rr.delta_lv)
        jr["delta_lv"] = to_full_string(*rr.delta_lv);
      json diff = json::array();
      for (const auto &[w1, d] : rr.differential)
        diff.push_back({to_full_string(w1), to_full_string(d)});
      jr["differential"] = std::move(diff);
      jout.push_back(std::move(jr));
    }

    if (channels.size() > 1 && keep_restriction("all")) {
      auto [len, vel] = engine.channel_sum(results);
      const std::string zs = std::to_string(static_cast<int>(z));
      rows.push_back({zs, "total", "all", "length", rate_str(len), ""});
      rows.push_back({zs, "total", "all", "velocity", rate_str(vel), ""});
      jout.push_back({{"z", z},
                      {"channel", "total"},
                      {"length", to_full_string(len)},
                      {"velocity", to_full_string(vel)}});
    }
  }

  if (out.format == OutputFormat::Json)
    out.write(jout.dump(1) + "\n");
  else if (out.format == OutputFormat::Csv)
    out.write(csv_from_rows(header, rows));
  else
    out.write(table_from_rows(header, rows));
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_scan(const RunConfig &cfg, const Output &out) {
  std::vector<std::string> header = {"z",      "n_bp",     "radius",
                                     "digits", "domega_t", "delta_lv"};
  std::vector<std::vector<std::string>> rows;
  SolveEnv env(cfg);

  std::vector<unsigned> nbps = cfg.nbp_list;
  if (nbps.empty())
    for (unsigned n = 24; n <= 40; n += 2)
      nbps.push_back(n);

  for (double z : cfg.effective_z()) {
    std::vector<double> radii = cfg.r_list;
    if (radii.empty())
      radii.push_back(cfg.effective_radius(z));
    for (double r : radii) {
      for (unsigned nbp : nbps) {
        const std::string zs = std::to_string(static_cast<int>(z));
        try {
          ScopedPrecision guard(env.ctx);
          const auto spec = basis::BasisSpec::bpolynomial(nbp, BigReal(r));
          const auto nuc = cfg.make_nuclear(env.ctx, z);

          twophoton::SpectrumSet set;
          for (int k : {-1, 1, -2})
            set.insert(env.spectrum(spec, nuc, k));
          const auto &sk = set.at(-1);
          const auto &i2s = sk.bound(1);
          const auto &f1s = sk.bound(0);

          const BigReal wt_basis = i2s.energy - f1s.energy;
          const BigReal wt_exact =
              dirac::exact_energy(env.ctx, 2, -1, BigReal(z), env.c) -
              dirac::exact_energy(env.ctx, 1, -1, BigReal(z), env.c);
          const BigReal domega = abs((wt_exact - wt_basis) / wt_exact);

          twophoton::Engine engine(env.ctx, spec, env.c, set);
          auto rr =
              engine.total_rate(twophoton::parse_channel("2E1", -1, -1), i2s,
                                f1s, cfg.quad_points);
          rows.push_back({zs, std::to_string(nbp), std::to_string(r),
                          std::to_string(cfg.digits),
                          to_digits_string(domega, 6),
                          to_digits_string(*rr.delta_lv, 6)});
        } catch (const NotPositiveDefinite &) {
          // metric factorization failed at this digit count: record the
          // breakdown point instead of aborting the sweep
          rows.push_back({zs, std::to_string(nbp), std::to_string(r),
                          std::to_string(cfg.digits), "nan", "nan"});
        }
      }
    }
  }
  out.write(csv_from_rows(header, rows));
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_cache(const RunConfig &cfg, const Output &out, bool evict) {
  if (cfg.cache_dir.empty())
    throw ConfigError("cache command requires cache_dir (--cache-dir)");
  cache::SpectrumCache store(cfg.cache_dir);
  if (evict) {
    const auto n = store.evict_all();
    out.write("evicted " + std::to_string(n) + " cached spectra\n");
    return kExitOk;
  }
  std::vector<std::string> header = {"file", "key"};
  std::vector<std::vector<std::string>> rows;
  for (const auto &[file, key] : store.list())
    rows.push_back({file, key});
  out.write(out.format == OutputFormat::Csv ? csv_from_rows(header, rows)
                                            : table_from_rows(header, rows));
  return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"finite-basis radial Dirac solver and two-photon decay rates"};
  app.require_subcommand(1);
  app.fallthrough(); // allow global flags after the subcommand

  std::string config_path, emit_config_path;
  std::vector<std::string> z_tokens, channel_tokens;
  std::string basis_kind, nuclear, restriction, format, out_path, cache_dir;
  unsigned order = 0, count = 0, digits = 0, quad_points = 0, levels = 0;
  double radius = 0;
  int kappa = 0;
  bool strict = false, evict = false;
  std::vector<unsigned> nbp_list;
  std::vector<double> r_list;

  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--emit-config", emit_config_path,
                 "write the effective configuration to a file and continue");
  app.add_option("--z", z_tokens, "nuclear charge(s)")->delimiter(',');
  app.add_option("--basis", basis_kind, "bpoly | bspline");
  app.add_option("--order", order, "basis order k");
  app.add_option("--count", count, "number of basis functions");
  app.add_option("--radius", radius, "cavity radius (a.u.)");
  app.add_option("--digits", digits, "working decimal digits (>= 16)");
  app.add_option("--channels", channel_tokens, "multipole channels")
      ->delimiter(',');
  app.add_option("--nuclear", nuclear, "point | uniform:<r_N>");
  app.add_option("--restriction", restriction, "all | pos | neg");
  app.add_option("--format", format, "csv | json | table");
  app.add_option("--out", out_path, "output path (default stdout)");
  app.add_option("--cache-dir", cache_dir, "spectrum cache directory");
  app.add_option("--quad-points", quad_points, "photon-energy quadrature");
  app.add_option("--kappa", kappa, "spectrum symmetry (spectrum command)");
  app.add_option("--levels", levels, "bound levels to report");
  app.add_option("--nbp-list", nbp_list, "scan basis sizes")->delimiter(',');
  app.add_option("--r-list", r_list, "scan cavity radii")->delimiter(',');
  app.add_flag("--strict", strict, "escalate spectrum warnings to errors");

  auto *sub_spectrum =
      app.add_subcommand("spectrum", "bound levels vs the exact oracle");
  auto *sub_rate =
      app.add_subcommand("rate", "two-photon decay rates per channel");
  auto *sub_scan =
      app.add_subcommand("scan", "convergence sweep over basis sizes");
  auto *sub_cache = app.add_subcommand("cache", "cache maintenance");
  sub_cache->add_flag("--evict", evict, "remove all cached spectra");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in)
        throw ConfigError("cannot read config file " + config_path);
      std::stringstream buf;
      buf << in.rdbuf();
      cfg = config::parse_file_text(buf.str());
    }
    // flags override file settings
    if (!z_tokens.empty()) {
      std::string joined;
      for (const auto &t : z_tokens)
        joined += (joined.empty() ? "" : ",") + t;
      config::apply_setting(cfg, "z", joined);
    }
    if (!basis_kind.empty())
      cfg.basis = basis_kind;
    if (order)
      cfg.order = order;
    if (count)
      cfg.count = count;
    if (radius > 0)
      cfg.radius = radius;
    if (digits)
      cfg.digits = digits;
    if (!channel_tokens.empty())
      cfg.channels = channel_tokens;
    if (!nuclear.empty())
      cfg.nuclear = nuclear;
    if (!restriction.empty())
      cfg.restriction = restriction;
    if (!format.empty())
      config::apply_setting(cfg, "format", format);
    if (!out_path.empty())
      cfg.out_path = out_path;
    if (!cache_dir.empty())
      cfg.cache_dir = cache_dir;
    if (quad_points)
      cfg.quad_points = quad_points;
    if (kappa)
      cfg.kappa = kappa;
    if (levels)
      cfg.levels = levels;
    if (!nbp_list.empty())
      cfg.nbp_list = nbp_list;
    if (!r_list.empty())
      cfg.r_list = r_list;
    if (strict)
      cfg.strict = true;

    if (cfg.digits < 16)
      throw ConfigError("digits must be at least 16");
    cfg.make_restriction(); // validate early

    BigReal::default_precision(cfg.digits);

    if (!emit_config_path.empty()) {
      std::ofstream emit_out(emit_config_path);
      if (!emit_out)
        throw ConfigError("cannot write " + emit_config_path);
      emit_out << config::emit(cfg);
    }

    Output out{cfg.format, cfg.out_path};
    if (*sub_spectrum)
      return cmd_spectrum(cfg, out);
    if (*sub_rate)
      return cmd_rate(cfg, out);
    if (*sub_scan)
      return cmd_scan(cfg, out);
    if (*sub_cache)
      return cmd_cache(cfg, out, evict);
    return kExitConfig;
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error &e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
