#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "flagstat/io.hpp"
#include "flagstat/montecarlo.hpp"

namespace flagstat::cli {

namespace {

struct Shared {
  std::string type;
  double alpha = 0.05;
  std::uint64_t seed = 20240101;
  std::string denominator = "n";
  std::string output;
  std::string format;
  bool skip_header = false;
};

struct ModelOptions {
  int d = 0;
  std::string lambdas = "8,4,2,1";
  long n = 10000;
  long reps = 2000;
  std::string gamma;
  int threads = 0;
  bool serial = false;
};

// An empty default_type makes --type required; nullopt omits it.
void add_shared(CLI::App* app, Shared& s, std::optional<std::string> default_type = std::string()) {
  if (default_type) {
    s.type = *default_type;
    auto* type = app->add_option("--type", s.type, "Flag type as comma-separated multiplicities");
    if (default_type->empty()) type->required();
    else type->capture_default_str();
  }
  app->add_option("--alpha", s.alpha, "Significance level")->capture_default_str();
  app->add_option("--seed", s.seed, "Random seed")->capture_default_str();
  app->add_option("--denominator", s.denominator, "Sample covariance denominator")
      ->check(CLI::IsMember({"n", "n-1"}))
      ->capture_default_str();
  app->add_option("--output", s.output, "Write the result to this path instead of stdout");
  app->add_option("--format", s.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app->add_flag("--skip-header", s.skip_header, "Skip the first row of every CSV input");
}

void add_model(CLI::App* app, ModelOptions& m) {
  app->add_option("--d", m.d, "Dimension (checked against --type)");
  app->add_option("--lambdas", m.lambdas, "Distinct eigenvalues, decreasing")->capture_default_str();
  app->add_option("--n", m.n, "Sample size per replicate")->capture_default_str();
  app->add_option("--reps", m.reps, "Number of replicates")->capture_default_str();
  app->add_option("--gamma", m.gamma, "Eigenvector matrix: CSV path or 'identity' (default: Haar draw from --seed)");
  app->add_option("--threads", m.threads, "Worker threads (0: FLAGSTAT_THREADS or all cores)")->capture_default_str();
  app->add_flag("--serial", m.serial, "Use the serial reference loop");
}

std::vector<double> parse_doubles(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception&) {
      throw DomainError(what + ": cannot parse '" + text + "'");
    }
    if (used != item.size()) throw DomainError(what + ": cannot parse '" + text + "'");
    out.push_back(value);
  }
  if (out.empty()) throw DomainError(what + ": empty list");
  return out;
}

Denominator denominator_of(const Shared& s) { return s.denominator == "n-1" ? Denominator::NMinusOne : Denominator::N; }

Matrix read_orthogonal(const std::string& path, int d, bool skip_header, const std::string& what) {
  if (path == "identity") return Matrix::Identity(d, d);
  const Matrix q = read_csv_matrix(path, skip_header);
  if (q.rows() != d || q.cols() != d) {
    throw DomainError(what + ": expected " + std::to_string(d) + "x" + std::to_string(d) + " matrix, got " +
                      std::to_string(q.rows()) + "x" + std::to_string(q.cols()));
  }
  if (!is_orthogonal(q)) {
    throw DomainError(what + ": matrix is not orthogonal (error " + format_double(orthogonality_error(q)) + ")");
  }
  return q;
}

Matrix read_square(const std::string& path, bool skip_header) {
  const Matrix m = read_csv_matrix(path, skip_header);
  if (m.rows() != m.cols()) throw DomainError(path + ": matrix is not square");
  return m;
}

Projector read_projector(const std::string& path, bool skip_header) {
  try {
    return Projector::from_matrix(read_square(path, skip_header));
  } catch (const DomainError& e) {
    throw DomainError(path + ": " + e.what());
  }
}

void check_dimension(const FlagType& type, Eigen::Index d, const std::string& what) {
  if (type.dim() != d) {
    throw DomainError("--type " + type.to_string() + " sums to " + std::to_string(type.dim()) + " but " + what +
                      " has dimension " + std::to_string(d));
  }
}

// Writes to --output when given, otherwise to `out`.
void emit(const Shared& s, std::ostream& out, const std::string& text) {
  if (s.output.empty()) {
    out << text;
    return;
  }
  std::ofstream file(s.output, std::ios::binary);
  if (!file) throw IoError("cannot write '" + s.output + "'");
  file << text;
}

std::string report_csv(const PivotalReport& r, double alpha, Decision decision) {
  std::string truncated;
  for (std::size_t i = 0; i < r.truncated.size(); ++i) {
    if (i) truncated += ';';
    truncated += r.truncated[i] ? "true" : "false";
  }
  return "statistic,dof,p_value,truncated,alpha,decision\n" + format_double(r.statistic) + "," +
         std::to_string(r.dof) + "," + format_double(r.p_value) + "," + truncated + "," + format_double(alpha) + "," +
         to_string(decision) + "\n";
}

std::string render_report(const Shared& s, const PivotalReport& r, Decision decision) {
  if (s.format == "csv") return report_csv(r, s.alpha, decision);
  return report_to_json(r, s.alpha, decision).dump(2) + "\n";
}

int cmd_infer(const Shared& s, const std::string& data_path, const std::string& gamma_path, std::ostream& out,
              std::ostream& err) {
  const FlagType type = FlagType::parse(s.type);
  const Matrix data = read_csv_matrix(data_path, s.skip_header);
  check_dimension(type, data.cols(), "data");
  const Matrix gamma = read_orthogonal(gamma_path, type.dim(), s.skip_header, "--gamma");
  const Matrix sigma_hat = sample_covariance(data, denominator_of(s));
  const long n = static_cast<long>(data.rows());
  const PivotalReport report = pivotal_statistic(gamma, sigma_hat, type, n);
  std::string diagnostic;
  const bool inside =
      confidence_region_contains(flag_from_orthogonal(gamma, type), sigma_hat, type, n, s.alpha, &diagnostic);
  if (!inside) err << "note: " << diagnostic << "\n";
  emit(s, out, render_report(s, report, inside ? Decision::Accept : Decision::Reject));
  return kExitOk;
}

int cmd_test(const Shared& s, const std::string& data_path, const std::string& q0_path, std::ostream& out) {
  const FlagType type = FlagType::parse(s.type);
  const Matrix data = read_csv_matrix(data_path, s.skip_header);
  check_dimension(type, data.cols(), "data");
  const Matrix q0 = read_orthogonal(q0_path, type.dim(), s.skip_header, "--q0");
  const TestOutcome outcome = flag_hypothesis_test(q0, data, type, s.alpha, denominator_of(s));
  emit(s, out, render_report(s, outcome.report, outcome.decision));
  return outcome.decision == Decision::Accept ? kExitOk : kExitReject;
}

McConfig model_config(const Shared& s, const ModelOptions& m) {
  const FlagType type = FlagType::parse(s.type);
  if (m.d != 0) check_dimension(type, m.d, "--d");
  std::vector<double> lambdas = parse_doubles(m.lambdas, "--lambdas");
  if (static_cast<int>(lambdas.size()) != type.blocks()) {
    throw DomainError("--lambdas has " + std::to_string(lambdas.size()) + " values but --type has " +
                      std::to_string(type.blocks()) + " blocks");
  }
  if (m.n < 2) throw DomainError("--n must be at least 2");
  if (m.reps < 1) throw DomainError("--reps must be at least 1");
  if (!(s.alpha > 0.0 && s.alpha < 1.0)) throw DomainError("--alpha must lie in (0, 1)");
  CovModel model = m.gamma.empty()
                       ? seeded_model(std::move(lambdas), type, s.seed)
                       : CovModel(read_orthogonal(m.gamma, type.dim(), s.skip_header, "--gamma"), std::move(lambdas),
                                  type);
  McConfig cfg{std::move(model)};
  cfg.n = m.n;
  cfg.reps = m.reps;
  cfg.alpha = s.alpha;
  cfg.seed = s.seed;
  cfg.denominator = denominator_of(s);
  cfg.execution = m.serial ? Execution::Serial : Execution::Parallel;
  cfg.threads = m.threads;
  return cfg;
}

int cmd_simulate(const Shared& s, const ModelOptions& m, const std::string& histogram_path, int bins,
                 std::ostream& out, std::ostream& err) {
  const McConfig cfg = model_config(s, m);
  if (bins < 1) throw DomainError("--bins must be positive");
  const McResult result = replicate_pivotal(cfg, bins);
  if (!histogram_path.empty()) {
    std::ofstream file(histogram_path, std::ios::binary);
    if (!file) throw IoError("cannot write '" + histogram_path + "'");
    write_histogram_csv(file, result.histogram, result.dof);
  }
  if (s.format == "csv") {
    std::ostringstream text;
    text << "replicate,statistic\n";
    for (std::size_t k = 0; k < result.statistics.size(); ++k) {
      text << result.replicate_index[k] << ',' << format_double(result.statistics[k]) << '\n';
    }
    emit(s, out, text.str());
  } else {
    emit(s, out, mc_result_to_json(result, cfg).dump(2) + "\n");
  }
  std::ostream& summary = s.output.empty() ? err : out;
  summary << "dof " << result.dof << "\n";
  summary << "ks_distance " << (result.ks_distance ? format_double(*result.ks_distance) : std::string("none")) << "\n";
  summary << "truncated " << result.truncation_count << " aborted " << result.aborted << "\n";
  return kExitOk;
}

int cmd_coverage(const Shared& s, const ModelOptions& m, std::ostream& out) {
  const McConfig cfg = model_config(s, m);
  const CoverageResult r = coverage_rate(cfg);
  if (s.format == "csv") {
    emit(s, out, "coverage,covered,evaluated,aborted,alpha\n" + format_double(r.coverage) + "," +
                     std::to_string(r.covered) + "," + std::to_string(r.evaluated) + "," + std::to_string(r.aborted) +
                     "," + format_double(s.alpha) + "\n");
  } else {
    nlohmann::json doc{{"coverage", r.coverage},  {"covered", r.covered}, {"evaluated", r.evaluated},
                       {"aborted", r.aborted},    {"alpha", s.alpha},     {"n", cfg.n},
                       {"reps", cfg.reps},        {"seed", cfg.seed},     {"type", cfg.model.type.multiplicities()},
                       {"lambdas", cfg.model.lambdas}};
    emit(s, out, doc.dump(2) + "\n");
  }
  return kExitOk;
}

std::string render_matrix(const std::string& format, const Matrix& m) {
  if (format == "json") {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(row);
    }
    return nlohmann::json{{"matrix", rows}}.dump(2) + "\n";
  }
  std::ostringstream text;
  write_csv_matrix(text, m);
  return text.str();
}

int cmd_geom(const std::string& op, const std::vector<std::string>& files, const Shared& s, std::ostream& out) {
  const std::string format = s.format.empty() ? "csv" : s.format;
  auto need = [&](std::size_t count) {
    if (files.size() != count) {
      throw DomainError("geom " + op + ": expected " + std::to_string(count) + " matrix files, got " +
                        std::to_string(files.size()));
    }
  };
  if (op == "log") {
    need(2);
    const Projector p = read_projector(files[0], s.skip_header);
    const Projector r = read_projector(files[1], s.skip_header);
    emit(s, out, render_matrix(format, grass_log(p, r).delta));
  } else if (op == "exp") {
    need(2);
    const Projector p = read_projector(files[0], s.skip_header);
    const Matrix delta = read_square(files[1], s.skip_header);
    emit(s, out, render_matrix(format, grass_exp(p, GrassTangent{delta, p}).matrix()));
  } else if (op == "dist") {
    need(2);
    const double dist = grass_dist(read_projector(files[0], s.skip_header), read_projector(files[1], s.skip_header));
    if (format == "json") emit(s, out, nlohmann::json{{"distance", dist}}.dump(2) + "\n");
    else emit(s, out, format_double(dist) + "\n");
  } else if (op == "holonomy") {
    need(3);
    const Projector p = read_projector(files[0], s.skip_header);
    const Projector r = read_projector(files[1], s.skip_header);
    const Frame u = [&] {
      try {
        return Frame::from_matrix(read_csv_matrix(files[2], s.skip_header));
      } catch (const DomainError& e) {
        throw DomainError(files[2] + ": " + e.what());
      }
    }();
    emit(s, out, render_matrix(format, holonomy(p, r, u).matrix()));
  } else {
    throw DomainError("geom: unknown operation '" + op + "'");
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inference for flags of principal subspaces"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Shared infer_s, test_s, sim_s, cov_s, geom_s;
  ModelOptions sim_m, cov_m;
  std::string data_path, gamma_path = "identity", q0_path, histogram_path, geom_op;
  std::vector<std::string> geom_files;
  int bins = 50;

  auto* infer = app.add_subcommand("infer", "Pivotal statistic of a hypothesized Γ on a data file");
  add_shared(infer, infer_s);
  infer->add_option("data", data_path, "CSV data, one observation per row")->required();
  infer->add_option("--gamma", gamma_path, "CSV orthogonal matrix or 'identity'")->capture_default_str();

  auto* test = app.add_subcommand("test", "Test of a hypothesized flag; exit 1 on rejection");
  add_shared(test, test_s);
  test->add_option("data", data_path, "CSV data, one observation per row")->required();
  test->add_option("--q0", q0_path, "CSV orthogonal matrix representing the hypothesized flag")->required();

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo distribution of the pivotal statistic");
  add_shared(simulate, sim_s, "1,1,1,1");
  add_model(simulate, sim_m);
  simulate->add_option("--histogram", histogram_path, "Write the histogram CSV to this path");
  simulate->add_option("--bins", bins, "Histogram bins")->capture_default_str();

  auto* coverage = app.add_subcommand("coverage", "Monte Carlo coverage of the confidence region");
  add_shared(coverage, cov_s, "1,1,1,1");
  add_model(coverage, cov_m);

  auto* geom = app.add_subcommand("geom", "Grassmann primitives on CSV matrices");
  add_shared(geom, geom_s, std::nullopt);
  geom->add_option("op", geom_op, "log P R | exp P Delta | dist P R | holonomy P R U")
      ->required()
      ->check(CLI::IsMember({"log", "exp", "dist", "holonomy"}));
  geom->add_option("files", geom_files, "Matrix CSV files")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*infer) return cmd_infer(infer_s, data_path, gamma_path, out, err);
    if (*test) return cmd_test(test_s, data_path, q0_path, out);
    if (*simulate) return cmd_simulate(sim_s, sim_m, histogram_path, bins, out, err);
    if (*coverage) return cmd_coverage(cov_s, cov_m, out);
    if (*geom) return cmd_geom(geom_op, geom_files, geom_s, out);
  } catch (const CutLocusError& e) {
    err << "error: cut locus: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const NumericError& e) {
    err << "error: numerical failure: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace flagstat::cli
