#include <algorithm>

#include "csv.hpp"
#include "vswir/errors.hpp"
#include "vswir/io.hpp"

namespace vswir {

fs::path mask_sidecar_path(const fs::path& spectrum_path) {
  fs::path p = spectrum_path;
  p.replace_extension();
  p += ".mask.csv";
  return p;
}

Spectrum load_spectrum(const fs::path& path) {
  const auto table = csv::read(path);
  const std::string file = path.string();
  if (table.header.size() != 2) throw InputError(file + ": expected two columns (wavelength_nm, value)");
  std::vector<double> wl;
  Eigen::VectorXd values(static_cast<Eigen::Index>(table.rows.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (!wl.empty() && !(table.rows[i][0] > wl.back())) {
      throw InputError(file + ":" + std::to_string(table.lines[i]) + ": wavelengths must be strictly ascending");
    }
    wl.push_back(table.rows[i][0]);
    values[static_cast<Eigen::Index>(i)] = table.rows[i][1];
  }
  if (wl.empty()) throw InputError(file + ": no data rows");

  std::vector<bool> mask;
  const fs::path side = mask_sidecar_path(path);
  if (fs::exists(side)) {
    const auto m = csv::read(side);
    if (m.rows.size() != wl.size()) throw InputError(side.string() + ": row count differs from the spectrum");
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
      if (m.rows[i].size() != 2 || m.rows[i][0] != wl[i]) {
        throw InputError(side.string() + ":" + std::to_string(m.lines[i]) + ": wavelength mismatch");
      }
      const double v = m.rows[i][1];
      if (v != 0.0 && v != 1.0) {
        throw InputError(side.string() + ":" + std::to_string(m.lines[i]) + ": mask must be 0 or 1");
      }
      mask.push_back(v == 1.0);
    }
  }
  try {
    return {WavelengthGrid(std::move(wl), std::move(mask)), std::move(values)};
  } catch (const InputError& e) {
    throw InputError(file + ": " + e.what());
  }
}

void write_spectrum(const fs::path& path, const Spectrum& spectrum) {
  const auto& wl = spectrum.grid.wavelengths;
  if (static_cast<std::size_t>(spectrum.values.size()) != wl.size()) {
    throw InputError("spectrum values do not match the wavelength grid");
  }
  std::string out = "wavelength_nm,value\n";
  for (std::size_t i = 0; i < wl.size(); ++i) {
    csv::append(out, wl[i]);
    out += ',';
    csv::append(out, spectrum.values[static_cast<Eigen::Index>(i)]);
    out += '\n';
  }
  csv::write_text(path, out);

  const auto& mask = spectrum.grid.mask;
  const fs::path side = mask_sidecar_path(path);
  if (std::find(mask.begin(), mask.end(), false) == mask.end()) {
    fs::remove(side);
    return;
  }
  std::string m = "wavelength_nm,retained\n";
  for (std::size_t i = 0; i < wl.size(); ++i) {
    csv::append(m, wl[i]);
    m += mask[i] ? ",1\n" : ",0\n";
  }
  csv::write_text(side, m);
}

}  // namespace vswir
