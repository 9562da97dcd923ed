#pragma once

#include "fbdirac/dirac.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace fbdirac::cache {

using nlohmann::json;

inline const char *kSchema = "fbdirac-spectrum-v1";

inline std::string to_string(dirac::BondBranch b) {
  return b == dirac::BondBranch::CTimesP0 ? "c_times_p0" : "plain_p0";
}

inline dirac::BondBranch branch_from_string(const std::string &s) {
  if (s == "c_times_p0")
    return dirac::BondBranch::CTimesP0;
  if (s == "plain_p0")
    return dirac::BondBranch::PlainP0;
  throw ConfigError("unknown bond branch '" + s + "'");
}

inline json basis_to_json(const basis::BasisSpec &spec) {
  json j;
  j["kind"] = spec.kind == basis::BasisKind::BPolynomial ? "bpoly" : "bspline";
  j["order"] = spec.order;
  j["count"] = spec.count;
  j["radius"] = to_full_string(spec.cavity_radius);
  if (spec.kind == basis::BasisKind::BSpline) {
    json knots = json::array();
    for (const auto &t : spec.knots)
      knots.push_back(to_full_string(t));
    j["knots"] = knots;
  }
  return j;
}

inline basis::BasisSpec basis_from_json(const json &j) {
  const BigReal radius(j.at("radius").get<std::string>());
  if (j.at("kind") == "bpoly")
    return basis::BasisSpec::bpolynomial(j.at("count").get<unsigned>(),
                                         radius);
  std::vector<BigReal> knots;
  for (const auto &t : j.at("knots"))
    knots.emplace_back(t.get<std::string>());
  return basis::BasisSpec::bspline(j.at("order").get<unsigned>(),
                                   j.at("count").get<unsigned>(), radius,
                                   std::move(knots));
}

inline json nuclear_to_json(const basis::NuclearModel &nuc) {
  json j;
  j["z"] = to_full_string(nuc.Z);
  j["shape"] =
      nuc.shape == basis::NuclearShape::PointCharge ? "point" : "uniform";
  if (nuc.shape == basis::NuclearShape::UniformSphere)
    j["r_n"] = to_full_string(nuc.r_N);
  return j;
}

inline basis::NuclearModel nuclear_from_json(const json &j) {
  const BigReal z(j.at("z").get<std::string>());
  if (j.at("shape") == "point")
    return basis::NuclearModel::point(z);
  return basis::NuclearModel::uniform_sphere(
      z, BigReal(j.at("r_n").get<std::string>()));
}

inline json spectrum_to_json(const dirac::DiracSpectrum &sp, unsigned digits) {
  json j;
  j["schema"] = kSchema;
  j["digits"] = digits;
  j["kappa"] = sp.kappa;
  j["c"] = to_full_string(sp.c);
  j["basis"] = basis_to_json(sp.spec);
  j["nuclear"] = nuclear_to_json(sp.nuc);
  j["options"] = {{"reduce_large", sp.options.reduce_large},
                  {"reduce_small", sp.options.reduce_small},
                  {"branch", to_string(sp.options.branch)}};
  j["warnings"] = sp.warnings;
  json orbitals = json::array();
  for (const auto &o : sp.orbitals) {
    json jo;
    jo["energy"] = to_full_string(o.energy);
    jo["class"] = dirac::to_string(o.cls);
    json p = json::array(), q = json::array();
    for (const auto &x : o.p_coeffs)
      p.push_back(to_full_string(x));
    for (const auto &x : o.q_coeffs)
      q.push_back(to_full_string(x));
    jo["p"] = std::move(p);
    jo["q"] = std::move(q);
    orbitals.push_back(std::move(jo));
  }
  j["orbitals"] = std::move(orbitals);
  return j;
}

inline dirac::DiracSpectrum spectrum_from_json(const json &j) {
  if (j.at("schema") != kSchema)
    throw ConfigError("unexpected spectrum schema");
  dirac::DiracSpectrum sp;
  sp.kappa = j.at("kappa").get<int>();
  sp.c = BigReal(j.at("c").get<std::string>());
  sp.spec = basis_from_json(j.at("basis"));
  sp.nuc = nuclear_from_json(j.at("nuclear"));
  sp.options.reduce_large = j.at("options").at("reduce_large").get<bool>();
  sp.options.reduce_small = j.at("options").at("reduce_small").get<bool>();
  sp.options.branch =
      branch_from_string(j.at("options").at("branch").get<std::string>());
  sp.warnings = j.at("warnings").get<std::vector<std::string>>();
  for (const auto &jo : j.at("orbitals")) {
    dirac::RadialOrbital o;
    o.kappa = sp.kappa;
    o.energy = BigReal(jo.at("energy").get<std::string>());
    const std::string cls = jo.at("class").get<std::string>();
    o.cls = cls == "bound" ? dirac::OrbitalClass::Bound
            : cls == "negative-continuum"
                ? dirac::OrbitalClass::NegativeContinuum
                : dirac::OrbitalClass::PositiveContinuum;
    for (const auto &x : jo.at("p"))
      o.p_coeffs.emplace_back(x.get<std::string>());
    for (const auto &x : jo.at("q"))
      o.q_coeffs.emplace_back(x.get<std::string>());
    sp.orbitals.push_back(std::move(o));
  }
  return sp;
}

//! Canonical identity of one spectrum computation.
inline std::string cache_key(const basis::BasisSpec &spec,
                             const basis::NuclearModel &nuc, int kappa,
                             const BigReal &c, unsigned digits,
                             const dirac::AssembleOptions &opts) {
  std::string s = "v1|kappa=" + std::to_string(kappa) +
                  "|c=" + to_full_string(c) +
                  "|digits=" + std::to_string(digits) +
                  "|kind=" + (spec.kind == basis::BasisKind::BPolynomial
                                  ? "bpoly"
                                  : "bspline") +
                  "|order=" + std::to_string(spec.order) +
                  "|count=" + std::to_string(spec.count) +
                  "|radius=" + to_full_string(spec.cavity_radius);
  for (const auto &t : spec.knots)
    s += "|t=" + to_full_string(t);
  s += "|z=" + to_full_string(nuc.Z);
  s += nuc.shape == basis::NuclearShape::PointCharge
           ? "|point"
           : "|uniform=" + to_full_string(nuc.r_N);
  s += "|rl=" + std::to_string(opts.reduce_large);
  s += "|rs=" + std::to_string(opts.reduce_small);
  s += "|branch=" + to_string(opts.branch);
  return s;
}

inline std::string fnv1a_hex(const std::string &data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

//! Directory of spectrum dumps keyed by the canonical string above.
class SpectrumCache {
public:
  explicit SpectrumCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path &dir() const { return dir_; }

  std::filesystem::path path_for(const std::string &key) const {
    return dir_ / (fnv1a_hex(key) + ".json");
  }

  bool load(const std::string &key, dirac::DiracSpectrum &out) const {
    const auto file = path_for(key);
    std::ifstream in(file);
    if (!in)
      return false;
    json j;
    in >> j;
    if (j.value("key", "") != key) // hash collision or stale file
      return false;
    out = spectrum_from_json(j);
    return true;
  }

  void store(const std::string &key, const dirac::DiracSpectrum &sp,
             unsigned digits) const {
    std::filesystem::create_directories(dir_);
    json j = spectrum_to_json(sp, digits);
    j["key"] = key;
    // write-then-rename so concurrent readers never see a torn file
    const auto final_path = path_for(key);
    const auto tmp_path =
        final_path.string() + "." + std::to_string(::getpid()) + ".tmp";
    {
      std::ofstream out(tmp_path);
      if (!out)
        throw Error("cache: cannot write " + tmp_path);
      out << j.dump(1) << "\n";
    }
    std::filesystem::rename(tmp_path, final_path);
  }

  std::vector<std::pair<std::string, std::string>> list() const {
    std::vector<std::pair<std::string, std::string>> entries;
    if (!std::filesystem::exists(dir_))
      return entries;
    for (const auto &e : std::filesystem::directory_iterator(dir_)) {
      if (e.path().extension() != ".json")
        continue;
      std::ifstream in(e.path());
      json j;
      try {
        in >> j;
      } catch (...) {
        continue;
      }
      entries.emplace_back(e.path().filename().string(), j.value("key", "?"));
    }
    std::sort(entries.begin(), entries.end());
    return entries;
  }

  std::size_t evict_all() const {
    std::size_t n = 0;
    if (!std::filesystem::exists(dir_))
      return n;
    for (const auto &e : std::filesystem::directory_iterator(dir_)) {
      if (e.path().extension() == ".json") {
        std::filesystem::remove(e.path());
        ++n;
      }
    }
    return n;
  }

private:
  std::filesystem::path dir_;
};

//! Solve through the cache: recomputes (and stores) on any key mismatch.
inline dirac::DiracSpectrum
cached_spectrum(const PrecisionCtx &ctx, const SpectrumCache *cache,
                const basis::BasisSpec &spec, const basis::NuclearModel &nuc,
                int kappa, const BigReal &c,
                const dirac::AssembleOptions &opts = {}) {
  const std::string key = cache_key(spec, nuc, kappa, c, ctx.digits, opts);
  if (cache) {
    dirac::DiracSpectrum sp;
    ScopedPrecision guard(ctx); // parse stored decimals at ctx digits
    if (cache->load(key, sp))
      return sp;
  }
  auto sp = dirac::solve_spectrum(ctx, spec, nuc, kappa, c, opts);
  if (cache)
    cache->store(key, sp, ctx.digits);
  return sp;
}

} // namespace fbdirac::cache
