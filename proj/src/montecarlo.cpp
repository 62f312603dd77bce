#include "flagstat/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

namespace flagstat {

namespace {

// Salts separating the reference samplers of haar_check from the data streams.
constexpr std::uint64_t kReferenceSalt = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kSecondReferenceSalt = 0xC2B2AE3D27D4EB4FULL;

double mean_of(std::span<const double> x) {
  return x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance_of(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

void require_config(const McConfig& cfg) {
  if (cfg.n < 2) throw DomainError("monte carlo: n must be at least 2");
  if (cfg.reps < 1) throw DomainError("monte carlo: reps must be at least 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw DomainError("monte carlo: alpha must lie in (0, 1)");
}

Matrix replicate_covariance(const McConfig& cfg, long k) {
  Rng rng = replicate_stream(cfg.seed, static_cast<std::uint64_t>(k));
  return sample_covariance(sample_gaussian(cfg.model, cfg.n, rng), cfg.denominator);
}

}  // namespace

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FLAGSTAT_THREADS")) {
    const int value = std::atoi(env);
    if (value > 0) return value;
  }
  return omp_get_max_threads();
}

CovModel seeded_model(std::vector<double> lambdas, const FlagType& type, std::uint64_t gamma_seed) {
  Rng rng = replicate_stream(gamma_seed, ~std::uint64_t{0});
  return CovModel(haar_orthogonal(type.dim(), rng), std::move(lambdas), type);
}

Matrix sample_gaussian(const CovModel& model, long n, Rng& rng) {
  if (n < 1) throw DomainError("sample_gaussian: n must be positive");
  const int d = model.type.dim();
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(n, d);
  for (long row = 0; row < n; ++row) {
    for (int col = 0; col < d; ++col) z(row, col) = normal(rng);
  }
  Vector root(d);
  for (int i = 0; i < model.type.blocks(); ++i) {
    root.segment(model.type.offset(i), model.type.multiplicity(i))
        .setConstant(std::sqrt(model.lambdas[static_cast<std::size_t>(i)]));
  }
  const Matrix factor = model.gamma * root.asDiagonal();
  return z * factor.transpose();
}

double ks_distance(std::span<const double> samples, int dof) {
  if (samples.empty()) throw DomainError("ks_distance: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const double f = chi2_cdf(dof, sorted[k]);
    worst = std::max({worst, f - static_cast<double>(k) / m, static_cast<double>(k + 1) / m - f});
  }
  return worst;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: no samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::size_t i = 0;
  std::size_t j = 0;
  double worst = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    worst = std::max(worst, std::abs(static_cast<double>(i) / static_cast<double>(x.size()) -
                                     static_cast<double>(j) / static_cast<double>(y.size())));
  }
  return worst;
}

Histogram make_histogram(std::span<const double> samples, int dof, int bins) {
  if (bins < 1) throw DomainError("make_histogram: bins must be positive");
  const double upper = dof > 0 ? chi2_quantile(dof, 0.999) : 1.0;
  Histogram h;
  for (int b = 0; b <= bins; ++b) h.edges.push_back(upper * b / bins);
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double x : samples) {
    if (x >= upper) {
      ++h.overflow;
      continue;
    }
    const int b = std::clamp(static_cast<int>(x / upper * bins), 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

McResult replicate_pivotal(const McConfig& cfg, int bins) {
  require_config(cfg);
  const std::size_t reps = static_cast<std::size_t>(cfg.reps);
  std::vector<double> stat(reps, 0.0);
  std::vector<char> truncated(reps, 0);

  const FlagType& type = cfg.model.type;
  const std::vector<char> ok = run_replicates(cfg.reps, cfg.execution, cfg.threads, [&](long k) {
    const PivotalReport report = pivotal_statistic(cfg.model.gamma, replicate_covariance(cfg, k), type, cfg.n);
    stat[static_cast<std::size_t>(k)] = report.statistic;
    truncated[static_cast<std::size_t>(k)] = report.truncation_applied ? 1 : 0;
  });

  McResult out;
  out.dof = dof(type);
  for (std::size_t k = 0; k < reps; ++k) {
    if (!ok[k]) {
      ++out.aborted;
      continue;
    }
    out.statistics.push_back(stat[k]);
    out.replicate_index.push_back(static_cast<long>(k));
    out.truncation_count += truncated[k];
  }
  out.mean = mean_of(out.statistics);
  out.variance = variance_of(out.statistics);
  if (out.statistics.size() >= 2 && out.dof > 0) out.ks_distance = ks_distance(out.statistics, out.dof);
  if (!out.statistics.empty()) {
    const double critical = out.dof > 0 ? chi2_quantile(out.dof, 1.0 - cfg.alpha) : 0.0;
    const long inside = std::count_if(out.statistics.begin(), out.statistics.end(),
                                      [critical](double t) { return t <= critical; });
    out.coverage = static_cast<double>(inside) / static_cast<double>(out.statistics.size());
  }
  out.histogram = make_histogram(out.statistics, out.dof, bins);
  return out;
}

CoverageResult coverage_rate(const McConfig& cfg) {
  require_config(cfg);
  const FlagType& type = cfg.model.type;
  const Flag truth = flag_from_orthogonal(cfg.model.gamma, type);
  std::vector<char> covered(static_cast<std::size_t>(cfg.reps), 0);
  const std::vector<char> ok = run_replicates(cfg.reps, cfg.execution, cfg.threads, [&](long k) {
    covered[static_cast<std::size_t>(k)] =
        confidence_region_contains(truth, replicate_covariance(cfg, k), type, cfg.n, cfg.alpha) ? 1 : 0;
  });
  CoverageResult out;
  for (std::size_t k = 0; k < ok.size(); ++k) {
    if (!ok[k]) {
      ++out.aborted;
      continue;
    }
    ++out.evaluated;
    out.covered += covered[k];
  }
  out.coverage = out.evaluated ? static_cast<double>(out.covered) / static_cast<double>(out.evaluated) : 0.0;
  return out;
}

CltCheck clt_block_check(const McConfig& cfg, int i, int j) {
  require_config(cfg);
  const FlagType& type = cfg.model.type;
  if (i == j || i < 0 || j < 0 || i >= type.blocks() || j >= type.blocks()) {
    throw DomainError("clt_block_check: requires distinct block indices within the type");
  }
  const std::size_t per = static_cast<std::size_t>(type.multiplicity(i) * type.multiplicity(j));
  const std::size_t reps = static_cast<std::size_t>(cfg.reps);
  std::vector<double> f_entries(reps * per), u_entries(reps * per), g_entries(reps * per);
  std::vector<char> truncated(reps, 0);
  const Matrix delta = cfg.model.delta();

  const std::vector<char> ok = run_replicates(cfg.reps, cfg.execution, cfg.threads, [&](long k) {
    const std::size_t slot = static_cast<std::size_t>(k);
    const AndersonStats st = anderson_statistics(cfg.model.gamma, delta, replicate_covariance(cfg, k), cfg.n, type);
    const TangentStatistic g = g_statistic_from_e(st.e, type, cfg.n, i);
    const Matrix fb = block(st.f, type, i, j);
    const Matrix ub = block(st.u, type, i, j);
    const Matrix gb = block(g.value, type, i, j);
    for (std::size_t e = 0; e < per; ++e) {
      f_entries[slot * per + e] = fb.data()[e];
      u_entries[slot * per + e] = ub.data()[e];
      g_entries[slot * per + e] = gb.data()[e];
    }
    truncated[slot] = g.truncated ? 1 : 0;
  });

  CltCheck out;
  std::vector<double> f, u, g;
  for (std::size_t k = 0; k < reps; ++k) {
    if (!ok[k]) {
      ++out.aborted;
      continue;
    }
    ++out.evaluated;
    out.truncated += truncated[k];
    for (std::size_t e = 0; e < per; ++e) {
      f.push_back(f_entries[k * per + e]);
      u.push_back(u_entries[k * per + e]);
      if (!truncated[k]) g.push_back(g_entries[k * per + e]);
    }
  }
  const double li = cfg.model.lambdas[static_cast<std::size_t>(i)];
  const double lj = cfg.model.lambdas[static_cast<std::size_t>(j)];
  out.var_f = variance_of(f);
  out.var_u = variance_of(u);
  out.var_g = variance_of(g);
  out.s2 = li * lj;
  out.sigma2 = li * lj / ((li - lj) * (li - lj));
  return out;
}

HaarCheck haar_check(const McConfig& cfg, int i) {
  require_config(cfg);
  const FlagType& type = cfg.model.type;
  if (i < 0 || i >= type.blocks()) throw DomainError("haar_check: block index out of range");
  const int q = type.multiplicity(i);
  const std::size_t per = static_cast<std::size_t>(q * q);
  const std::size_t reps = static_cast<std::size_t>(cfg.reps);

  std::vector<double> h(reps * per), ref(reps * per), ref2(reps * per);
  std::vector<double> h_trace(reps), ref_trace(reps), ref2_trace(reps), orth(reps, 0.0);
  std::vector<char> truncated(reps, 0), positive(reps, 0);

  const std::vector<char> ok = run_replicates(cfg.reps, cfg.execution, cfg.threads, [&](long k) {
    const std::size_t slot = static_cast<std::size_t>(k);
    const Matrix e = eigvec_map_psi(symmetrize(cfg.model.gamma.transpose() * replicate_covariance(cfg, k) *
                                               cfg.model.gamma));
    const HolonomyStatistic hs = h_statistic_from_e(e, type, i);
    Rng r1 = replicate_stream(cfg.seed ^ kReferenceSalt, static_cast<std::uint64_t>(k));
    Rng r2 = replicate_stream(cfg.seed ^ kSecondReferenceSalt, static_cast<std::uint64_t>(k));
    const Matrix a = conditional_haar_orthogonal(q, r1);
    const Matrix b = conditional_haar_orthogonal(q, r2);
    for (int row = 0; row < q; ++row) {
      for (int col = 0; col < q; ++col) {
        const std::size_t e_idx = slot * per + static_cast<std::size_t>(row * q + col);
        h[e_idx] = hs.value(row, col);
        ref[e_idx] = a(row, col);
        ref2[e_idx] = b(row, col);
      }
    }
    h_trace[slot] = hs.value.trace();
    ref_trace[slot] = a.trace();
    ref2_trace[slot] = b.trace();
    orth[slot] = orthogonality_error(hs.value);
    positive[slot] = (hs.value.diagonal().array() > 0.0).all() ? 1 : 0;
    truncated[slot] = hs.truncated ? 1 : 0;
  });

  HaarCheck out;
  std::vector<std::vector<double>> hs(per), as(per), bs(per);
  std::vector<double> ht, at, bt;
  long pos = 0;
  for (std::size_t k = 0; k < reps; ++k) {
    if (!ok[k]) {
      ++out.aborted;
      continue;
    }
    ++out.evaluated;
    out.truncated += truncated[k];
    pos += positive[k];
    out.max_orthogonality_error = std::max(out.max_orthogonality_error, orth[k]);
    for (std::size_t e = 0; e < per; ++e) {
      hs[e].push_back(h[k * per + e]);
      as[e].push_back(ref[k * per + e]);
      bs[e].push_back(ref2[k * per + e]);
    }
    ht.push_back(h_trace[k]);
    at.push_back(ref_trace[k]);
    bt.push_back(ref2_trace[k]);
  }
  if (out.evaluated == 0) return out;
  for (std::size_t e = 0; e < per; ++e) {
    out.entry_ks.push_back(ks_two_sample(hs[e], as[e]));
    out.reference_entry_ks = std::max(out.reference_entry_ks, ks_two_sample(as[e], bs[e]));
  }
  out.trace_ks = ks_two_sample(ht, at);
  out.reference_trace_ks = ks_two_sample(at, bt);
  out.positive_frequency = static_cast<double>(pos) / static_cast<double>(out.evaluated);
  return out;
}

nlohmann::json mc_result_to_json(const McResult& result, const McConfig& cfg) {
  nlohmann::json doc;
  nlohmann::json config;
  config["d"] = cfg.model.type.dim();
  config["type"] = cfg.model.type.multiplicities();
  config["lambdas"] = cfg.model.lambdas;
  std::vector<std::vector<double>> gamma_rows;
  for (Eigen::Index r = 0; r < cfg.model.gamma.rows(); ++r) {
    std::vector<double> row(cfg.model.gamma.cols());
    for (Eigen::Index c = 0; c < cfg.model.gamma.cols(); ++c) row[static_cast<std::size_t>(c)] = cfg.model.gamma(r, c);
    gamma_rows.push_back(std::move(row));
  }
  config["gamma"] = gamma_rows;
  config["n"] = cfg.n;
  config["reps"] = cfg.reps;
  config["alpha"] = cfg.alpha;
  config["seed"] = cfg.seed;
  config["denominator"] = cfg.denominator == Denominator::N ? "n" : "n-1";
  doc["config"] = config;
  doc["dof"] = result.dof;
  doc["statistics"] = result.statistics;
  doc["truncation_count"] = result.truncation_count;
  doc["aborted"] = result.aborted;
  doc["ks_distance"] = result.ks_distance ? nlohmann::json(*result.ks_distance) : nlohmann::json(nullptr);
  doc["coverage"] = result.coverage;
  doc["mean"] = result.mean;
  doc["variance"] = result.variance;
  doc["histogram"] = {{"edges", result.histogram.edges},
                      {"counts", result.histogram.counts},
                      {"overflow", result.histogram.overflow}};
  return doc;
}

void write_histogram_csv(std::ostream& out, const Histogram& hist, int dof) {
  out << "bin_left,bin_right,count,chi2_density_at_midpoint\n";
  char buf[128];
  for (std::size_t b = 0; b < hist.counts.size(); ++b) {
    const double left = hist.edges[b];
    const double right = hist.edges[b + 1];
    const double density = dof > 0 ? chi2_pdf(dof, 0.5 * (left + right)) : 0.0;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%ld,%.17g\n", left, right, hist.counts[b], density);
    out << buf;
  }
}

}  // namespace flagstat
