#include "csv.hpp"
#include "vswir/container.hpp"
#include "vswir/errors.hpp"
#include "vswir/io.hpp"

namespace vswir {

namespace {

fs::path with_suffix(const fs::path& stem, const char* suffix) {
  fs::path p = stem;
  p += suffix;
  return p;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) { csv::write_text(path, j.dump(2) + "\n"); }

nlohmann::json state_json(const StateVector& x) {
  return {{"refl", std::vector<double>(x.refl.data(), x.refl.data() + x.refl.size())},
          {"aod", x.aod},
          {"h2o", x.h2o}};
}

StateVector state_from_json(const nlohmann::json& j) {
  const auto refl = j.at("refl").get<std::vector<double>>();
  StateVector x;
  x.refl = Eigen::Map<const Eigen::VectorXd>(refl.data(), static_cast<Eigen::Index>(refl.size()));
  x.aod = j.at("aod").get<double>();
  x.h2o = j.at("h2o").get<double>();
  return x;
}

McmcConfig config_from_json(const nlohmann::json& j) {
  McmcConfig c;
  c.n_samples = j.at("n_samples");
  c.thin = j.at("thin");
  c.burn_in = j.at("burn_in");
  c.eps2 = j.at("eps2");
  c.eps1 = j.at("eps1");
  c.adapt_start = j.at("adapt_start");
  c.eps0 = j.at("eps0");
  c.eps_am = j.at("eps_am");
  c.s2 = j.at("s2");
  c.refl_proposal = refl_proposal_from_string(j.at("refl_proposal"));
  c.seed = j.at("seed");
  c.truncation_correction = j.at("truncation_correction");
  c.sample_atm = j.at("sample_atm");
  c.sample_refl = j.at("sample_refl");
  return c;
}

}  // namespace

nlohmann::json to_json(const McmcConfig& c) {
  return {{"n_samples", c.n_samples},
          {"thin", c.thin},
          {"burn_in", c.burn_in},
          {"eps2", c.eps2},
          {"eps1", c.eps1},
          {"adapt_start", c.adapt_start},
          {"eps0", c.eps0},
          {"eps_am", c.eps_am},
          {"s2", c.s2},
          {"refl_proposal", to_string(c.refl_proposal)},
          {"seed", c.seed},
          {"truncation_correction", c.truncation_correction},
          {"sample_atm", c.sample_atm},
          {"sample_refl", c.sample_refl}};
}

void write_chain(const fs::path& stem, const Chain& chain) {
  const Eigen::Index rows = chain.samples.rows(), cols = chain.samples.cols();
  // Eigen is column-major; the file is row-major.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = chain.samples;
  write_matrix_bin(with_suffix(stem, ".bin"), rm.data(), static_cast<std::size_t>(rows * cols));
  nlohmann::json j{
      {"format", "vswir-chain"},
      {"format_version", 1},
      {"rows", rows},
      {"cols", cols},
      {"dtype", "float64"},
      {"order", "row-major"},
      {"seed", chain.config.seed},
      {"config", to_json(chain.config)},
      {"acceptance",
       {{"atm", {{"proposed", chain.atm.proposed}, {"accepted", chain.atm.accepted}, {"rate", chain.atm.rate()}}},
        {"refl", {{"proposed", chain.refl.proposed}, {"accepted", chain.refl.accepted}, {"rate", chain.refl.rate()}}},
        {"overall", chain.overall_acceptance()}}},
      {"truncation_fallbacks", chain.truncation_fallbacks},
      {"initial", state_json(chain.initial)},
      {"initial_projected", chain.initial_projected},
      {"log_posterior_trace", chain.log_posterior_trace}};
  write_json(with_suffix(stem, ".json"), j);
}

Chain read_chain(const fs::path& stem) {
  const auto j = read_json(with_suffix(stem, ".json"));
  Chain chain;
  const auto rows = j.at("rows").get<Eigen::Index>(), cols = j.at("cols").get<Eigen::Index>();
  const auto data = read_matrix_bin(with_suffix(stem, ".bin"), static_cast<std::size_t>(rows * cols));
  chain.samples = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      data.data(), rows, cols);
  chain.config = config_from_json(j.at("config"));
  const auto& acc = j.at("acceptance");
  chain.atm = {acc.at("atm").at("proposed"), acc.at("atm").at("accepted")};
  chain.refl = {acc.at("refl").at("proposed"), acc.at("refl").at("accepted")};
  chain.truncation_fallbacks = j.at("truncation_fallbacks");
  chain.initial = state_from_json(j.at("initial"));
  chain.initial_projected = j.at("initial_projected");
  chain.log_posterior_trace = j.at("log_posterior_trace").get<std::vector<double>>();
  return chain;
}

void write_chain_csv(const fs::path& path, const Eigen::MatrixXd& samples) {
  const Eigen::Index n = samples.cols() - 2;
  std::string out;
  for (Eigen::Index c = 0; c < n; ++c) out += "refl_" + std::to_string(c) + ",";
  out += "aod,h2o\n";
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    for (Eigen::Index c = 0; c < samples.cols(); ++c) {
      csv::append(out, samples(r, c));
      out += c + 1 < samples.cols() ? ',' : '\n';
    }
  }
  csv::write_text(path, out);
}

Eigen::MatrixXd read_chain_csv(const fs::path& path) {
  const auto t = csv::read(path);
  if (t.header.size() < 3 || t.header[t.header.size() - 2] != "aod" || t.header.back() != "h2o") {
    throw InputError(path.string() + ": chain CSV must end with columns aod,h2o");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < t.header.size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t.rows[r][c];
  return m;
}

void write_oe_result(const fs::path& stem, const OeResult& r) {
  const auto& cov = r.gamma_laplace.values();
  // Symmetric, so the column-major buffer is also the row-major one.
  write_matrix_bin(with_suffix(stem, ".cov.bin"), cov.data(), static_cast<std::size_t>(cov.size()));
  nlohmann::json j{{"format", "vswir-oe"},
                   {"format_version", 1},
                   {"dim", cov.rows()},
                   {"x_map", state_json(r.x_map)},
                   {"converged", r.converged},
                   {"iterations", r.iterations},
                   {"termination", r.termination},
                   {"extrapolated", r.extrapolated},
                   {"cost_trace", r.cost_trace}};
  write_json(with_suffix(stem, ".json"), j);
}

OeResult read_oe_result(const fs::path& stem) {
  const auto j = read_json(with_suffix(stem, ".json"));
  const auto dim = j.at("dim").get<Eigen::Index>();
  const auto data = read_matrix_bin(with_suffix(stem, ".cov.bin"), static_cast<std::size_t>(dim * dim));
  OeResult r{state_from_json(j.at("x_map")),
             SpdMatrix(Eigen::Map<const Eigen::MatrixXd>(data.data(), dim, dim), "Laplace covariance"),
             j.at("cost_trace").get<std::vector<double>>(),
             j.at("converged"),
             j.at("iterations"),
             j.at("extrapolated"),
             j.at("termination")};
  return r;
}

}  // namespace vswir
