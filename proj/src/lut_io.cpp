#include <algorithm>
#include <map>
#include <set>

#include "csv.hpp"
#include "vswir/container.hpp"
#include "vswir/errors.hpp"
#include "vswir/io.hpp"

namespace vswir {

namespace {

constexpr const char* kLutMagic = "VSWIRLUT";
constexpr const char* kComponentMagic = "VSWIRCMP";

// Internal layout is channel-fastest; the file is AOD-fastest.
std::vector<double> to_file_order(const AtmLookupTable& lut, const std::vector<double>& v) {
  const std::size_t na = lut.aod_grid().size(), nh = lut.h2o_grid().size(), n = lut.channels();
  std::vector<double> out(v.size());
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t ih = 0; ih < nh; ++ih)
      for (std::size_t ia = 0; ia < na; ++ia) out[ia + na * (ih + nh * c)] = v[lut.offset(ia, ih) + c];
  return out;
}

std::vector<double> from_file_order(std::size_t na, std::size_t nh, std::size_t n,
                                    const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t ih = 0; ih < nh; ++ih)
      for (std::size_t ia = 0; ia < na; ++ia) out[(ia * nh + ih) * n + c] = v[ia + na * (ih + nh * c)];
  return out;
}

}  // namespace

void write_lut(const fs::path& path, const AtmLookupTable& lut) {
  const std::size_t na = lut.aod_grid().size(), nh = lut.h2o_grid().size(), n = lut.channels();
  Container c;
  c.magic = kLutMagic;
  c.meta["kind"] = "atm_lookup_table";
  c.meta["units"] = {{"wavelengths", "nm"}, {"aod_grid", "unitless at 550 nm"}, {"h2o_grid", "cm"}};
  c.arrays.push_back({"wavelengths", {n}, lut.wavelengths()});
  c.arrays.push_back({"aod_grid", {na}, lut.aod_grid()});
  c.arrays.push_back({"h2o_grid", {nh}, lut.h2o_grid()});
  c.arrays.push_back({"rho_a", {na, nh, n}, to_file_order(lut, lut.rho_a())});
  c.arrays.push_back({"s", {na, nh, n}, to_file_order(lut, lut.s())});
  c.arrays.push_back({"t", {na, nh, n}, to_file_order(lut, lut.t())});
  write_container(path, c);
}

std::shared_ptr<const AtmLookupTable> read_lut(const fs::path& path) {
  const Container c = read_container(path, kLutMagic);
  const auto& wl = c.get("wavelengths").data;
  const auto& aod = c.get("aod_grid").data;
  const auto& h2o = c.get("h2o_grid").data;
  const std::vector<std::size_t> shape{aod.size(), h2o.size(), wl.size()};
  auto field = [&](const char* name) {
    const auto& a = c.get(name);
    if (a.shape != shape) {
      throw InputError(path.string() + ": array '" + name + "' must have shape [n_aod, n_h2o, n]");
    }
    return from_file_order(aod.size(), h2o.size(), wl.size(), a.data);
  };
  return std::make_shared<const AtmLookupTable>(aod, h2o, wl, field("rho_a"), field("s"), field("t"));
}

std::shared_ptr<const AtmLookupTable> read_lut_csv(const fs::path& path) {
  const auto table = csv::read(path);
  const std::string file = path.string();
  const std::size_t ca = table.column("aod", file), chh = table.column("h2o", file),
                    cw = table.column("wavelength_nm", file), cr = table.column("rho_a", file),
                    cs = table.column("s", file), ct = table.column("t", file);
  std::set<double> aod_set, h2o_set, wl_set;
  for (const auto& r : table.rows) {
    aod_set.insert(r[ca]);
    h2o_set.insert(r[chh]);
    wl_set.insert(r[cw]);
  }
  const std::vector<double> aod(aod_set.begin(), aod_set.end()), h2o(h2o_set.begin(), h2o_set.end()),
      wl(wl_set.begin(), wl_set.end());
  const std::size_t total = aod.size() * h2o.size() * wl.size();
  if (table.rows.size() != total) {
    throw InputError(file + ": grid incomplete or duplicated (" + std::to_string(table.rows.size()) +
                     " rows for " + std::to_string(total) + " nodes)");
  }
  auto index_of = [](const std::vector<double>& g, double v) {
    return static_cast<std::size_t>(std::lower_bound(g.begin(), g.end(), v) - g.begin());
  };
  std::vector<double> rho(total), s(total), t(total);
  std::vector<bool> seen(total, false);
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const auto& r = table.rows[k];
    const std::size_t i = (index_of(aod, r[ca]) * h2o.size() + index_of(h2o, r[chh])) * wl.size() +
                          index_of(wl, r[cw]);
    if (seen[i]) throw InputError(file + ":" + std::to_string(table.lines[k]) + ": duplicate grid node");
    seen[i] = true;
    rho[i] = r[cr];
    s[i] = r[cs];
    t[i] = r[ct];
  }
  return std::make_shared<const AtmLookupTable>(aod, h2o, wl, rho, s, t);
}

void write_lut_csv(const fs::path& path, const AtmLookupTable& lut) {
  std::string out = "aod,h2o,wavelength_nm,rho_a,s,t\n";
  for (std::size_t ia = 0; ia < lut.aod_grid().size(); ++ia) {
    for (std::size_t ih = 0; ih < lut.h2o_grid().size(); ++ih) {
      for (std::size_t c = 0; c < lut.channels(); ++c) {
        const std::size_t i = lut.offset(ia, ih) + c;
        for (double v : {lut.aod_grid()[ia], lut.h2o_grid()[ih], lut.wavelengths()[c], lut.rho_a()[i],
                         lut.s()[i], lut.t()[i]}) {
          csv::append(out, v);
          out += ',';
        }
        out.back() = '\n';
      }
    }
  }
  csv::write_text(path, out);
}

std::shared_ptr<const AtmLookupTable> load_lut(const fs::path& path) {
  if (path.extension() == ".csv") return read_lut_csv(path);
  return read_lut(path);
}

const MixtureComponent& ComponentSet::by_label(const std::string& label) const {
  for (const auto& c : components) {
    if (c.label == label) return c;
  }
  throw InputError("no surface component labelled '" + label + "'");
}

void write_components(const fs::path& path, const ComponentSet& set) {
  const std::size_t n = set.wavelengths.size();
  Container c;
  c.magic = kComponentMagic;
  c.meta["kind"] = "surface_mixture";
  c.meta["components"] = nlohmann::json::array();
  c.arrays.push_back({"wavelengths", {n}, set.wavelengths});
  for (std::size_t k = 0; k < set.components.size(); ++k) {
    const auto& comp = set.components[k];
    if (static_cast<std::size_t>(comp.mean.size()) != n) {
      throw InputError("component '" + comp.label + "' does not match the wavelength grid");
    }
    nlohmann::json entry{{"label", comp.label}};
    if (k < set.params.size()) entry["params"] = set.params[k];
    c.meta["components"].push_back(entry);
    c.arrays.push_back({"mean_" + std::to_string(k), {n}, {comp.mean.data(), comp.mean.data() + n}});
    std::vector<double> lower;
    lower.reserve(n * (n + 1) / 2);
    const auto& m = comp.cov.values();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) lower.push_back(m(i, j));
    c.arrays.push_back({"cov_lower_" + std::to_string(k), {lower.size()}, std::move(lower)});
  }
  write_container(path, c);
}

ComponentSet read_components(const fs::path& path) {
  const Container c = read_container(path, kComponentMagic);
  ComponentSet set;
  set.wavelengths = c.get("wavelengths").data;
  const std::size_t n = set.wavelengths.size();
  const auto& list = c.meta.at("components");
  if (list.empty()) throw InputError(path.string() + ": no components");
  for (std::size_t k = 0; k < list.size(); ++k) {
    const auto& mean = c.get("mean_" + std::to_string(k)).data;
    const auto& lower = c.get("cov_lower_" + std::to_string(k)).data;
    if (mean.size() != n || lower.size() != n * (n + 1) / 2) {
      throw InputError(path.string() + ": component " + std::to_string(k) + " has the wrong size");
    }
    Eigen::MatrixXd cov(n, n);
    std::size_t p = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) cov(i, j) = cov(j, i) = lower[p++];
    const std::string label = list[k].at("label").get<std::string>();
    set.components.push_back(
        {Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(n)),
         SpdMatrix(std::move(cov), "component covariance '" + label + "'"), label});
    set.params.push_back(list[k].value("params", nlohmann::json::object()));
  }
  return set;
}

}  // namespace vswir
