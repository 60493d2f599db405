#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "nsbvar/bvar.hpp"
#include "nsbvar/data_io.hpp"
#include "nsbvar/error.hpp"
#include "nsbvar/evaluation.hpp"
#include "nsbvar/io_tables.hpp"
#include "nsbvar/ns_factors.hpp"
#include "nsbvar/state_space.hpp"
#include "nsbvar/structural.hpp"
#include "nsbvar/var_engine.hpp"

namespace nsbvar::cli {

namespace fs = std::filesystem;

fs::path RunContext::input_path(const std::string& key) const {
  fs::path p = config.require(key);
  if (p.is_relative()) p = config_dir / p;
  if (!fs::exists(p)) throw ArgumentError(fmt::format("{}: input file '{}' does not exist", key, p.string()));
  return p;
}

fs::path RunContext::output(const std::string& name) {
  outputs.push_back(name);
  return out_dir / name;
}

namespace {

template <typename Body>
void emit(RunContext& ctx, const std::string& name, Body&& body) {
  const fs::path path = ctx.output(name);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError(fmt::format("cannot write '{}'", path.string()));
  body(out);
  if (!out) throw ArgumentError(fmt::format("write to '{}' failed", path.string()));
}

TableHeader header(const RunContext& ctx, const std::string& title) { return {title, ctx.config_hash()}; }

int get_positive(const KeyValueConfig& cfg, const std::string& key, long long fallback) {
  const long long v = cfg.get_int(key, fallback);
  if (v < 1) throw ArgumentError(fmt::format("{} must be >= 1, got {}", key, v));
  return static_cast<int>(v);
}

std::vector<std::string> maturity_names(const std::vector<int>& maturities) {
  std::vector<std::string> out;
  for (int m : maturities) out.push_back(std::to_string(m));
  return out;
}

struct Inputs {
  YieldPanel full;
  SplitPanel split;
  double lambda = 0.0;
};

double resolve_lambda(const KeyValueConfig& cfg) {
  if (cfg.has("lambda")) {
    const double l = cfg.get_double("lambda", 0.0);
    if (!(l > 0.0)) throw ArgumentError("lambda must be positive");
    return l;
  }
  return solve_lambda(cfg.get_double("lambda_target", 30.0));
}

Inputs load_inputs(const RunContext& ctx) {
  Inputs in;
  in.full = load_panel(ctx.input_path("data"), PanelSchema::from_config(ctx.config));
  in.split = split_panel(in.full, ctx.config.get_double("train_fraction", 0.85));
  in.lambda = resolve_lambda(ctx.config);
  return in;
}

struct FactorData {
  CrossSectionFit fit;
  FactorSeries train;
  FactorSeries test;  // zero rows without a test set
};

FactorData factor_data(const RunContext& ctx, const Inputs& in) {
  const bool macro = ctx.config.get_bool("var.macro", false);
  if (macro && in.full.macro.cols() == 0) throw ArgumentError("var.macro = true but the panel has no macro.* columns");
  FactorData fd;
  fd.fit = fit_cross_section(in.split.train, in.lambda);
  fd.train = macro ? append_macro(fd.fit.factors, in.split.train) : fd.fit.factors;
  if (in.split.test.rows() > 0) {
    const CrossSectionFit t = fit_cross_section(in.split.test, in.lambda);
    fd.test = macro ? append_macro(t.factors, in.split.test) : t.factors;
  }
  return fd;
}

int forecast_horizon(const RunContext& ctx, const Inputs& in) {
  const Eigen::Index fallback = in.split.test.rows() > 0 ? in.split.test.rows() : 12;
  return get_positive(ctx.config, "forecast.horizon", fallback);
}

std::vector<int> report_horizons(const RunContext& ctx, int H) {
  std::vector<int> out;
  if (ctx.config.has("forecast.report")) {
    for (int h : ctx.config.get_ints("forecast.report", {})) {
      if (h < 1 || h > H) {
        throw ArgumentError(fmt::format("forecast.report: horizon {} outside 1..{} (forecast.horizon)", h, H));
      }
      out.push_back(h);
    }
    return out;
  }
  for (int h : {1, 6, 12})
    if (h <= H) out.push_back(h);
  if (out.empty()) out.push_back(H);
  return out;
}

const std::vector<std::string> kPriors = {"diffuse", "minnesota", "conjugate", "indep_niw", "ssvs_partial", "ssvs_full", "dummy"};

bool is_prior(const std::string& name) { return std::find(kPriors.begin(), kPriors.end(), name) != kPriors.end(); }

PriorSpec prior_from_config(const KeyValueConfig& cfg, const std::string& name) {
  if (name == "diffuse") return DiffusePrior{};
  if (name == "minnesota") {
    MinnesotaPrior p;
    p.persistence = cfg.get_double("minnesota.persistence", p.persistence);
    p.d1 = cfg.get_double("minnesota.d1", p.d1);
    p.d2 = cfg.get_double("minnesota.d2", p.d2);
    p.d3 = cfg.get_double("minnesota.d3", p.d3);
    return p;
  }
  if (name == "conjugate") {
    NaturalConjugatePrior p;
    p.d1 = cfg.get_double("conjugate.d1", p.d1);
    p.d2 = cfg.get_double("conjugate.d2", p.d2);
    p.s_h0 = cfg.get_double("conjugate.s_h0", p.s_h0);
    return p;
  }
  if (name == "indep_niw") {
    IndepNiwPrior p;
    p.d1 = cfg.get_double("indep_niw.d1", p.d1);
    p.d2 = cfg.get_double("indep_niw.d2", p.d2);
    p.d3 = cfg.get_double("indep_niw.d3", p.d3);
    p.s_h0 = cfg.get_double("indep_niw.s_h0", p.s_h0);
    return p;
  }
  if (name == "ssvs_partial" || name == "ssvs_full") {
    SsvsPrior p;
    p.full = name == "ssvs_full";
    p.c0 = cfg.get_double("ssvs.c0", p.c0);
    p.c1 = cfg.get_double("ssvs.c1", p.c1);
    p.inclusion = cfg.get_double("ssvs.inclusion", p.inclusion);
    p.tau0 = cfg.get_double("ssvs.tau0", p.tau0);
    p.tau1 = cfg.get_double("ssvs.tau1", p.tau1);
    p.q = cfg.get_double("ssvs.q", p.q);
    p.s_h0 = cfg.get_double("ssvs.s_h0", p.s_h0);
    return p;
  }
  throw ArgumentError(fmt::format("unknown prior '{}' (expected one of diffuse, minnesota, conjugate, indep_niw, "
                                  "ssvs_partial, ssvs_full, dummy)",
                                  name));
}

std::string prior_choice(const RunContext& ctx, const std::string& fallback) {
  const std::string name = ctx.config.get_string("prior", fallback);
  if (!is_prior(name)) prior_from_config(ctx.config, name);  // throws with the list of names
  return name;
}

PosteriorDraws sample_posterior(const RunContext& ctx, const std::string& prior, const FactorSeries& data) {
  const auto& cfg = ctx.config;
  const int p = get_positive(cfg, "var.lags", 1);
  ChainOptions opt;
  opt.n_total = static_cast<std::size_t>(get_positive(cfg, "chain.total", 11000));
  opt.n_burn = static_cast<std::size_t>(cfg.get_int("chain.burn", 1000));
  opt.seed = ctx.seed;
  if (prior == "dummy") {
    DummyHyper h;
    h.p = p;
    h.f = cfg.get_double("dummy.f", h.f);
    h.c = cfg.get_double("dummy.c", h.c);
    h.theta = cfg.get_double("dummy.theta", h.theta);
    return gibbs_dummy_bvar(data.values, data.names, build_dummy_obs(data.values, h), p, opt);
  }
  const PriorSpec spec = prior_from_config(cfg, prior);
  const bool intercept = cfg.get_bool("var.intercept", true) && !std::holds_alternative<SsvsPrior>(spec);
  return estimate(build_design(data, p, intercept), spec, opt);
}

// Predictive simulation uses a stream family distinct from the sampler's.
std::uint64_t predict_seed(std::uint64_t seed) { return seed ^ 0x9e3779b97f4a7c15ULL; }

PredictiveDistribution predictive(const RunContext& ctx, const PosteriorDraws& draws, const FactorSeries& train,
                                  const FactorSeries& test, int H) {
  PredictOptions po;
  po.horizons = H;
  po.quantiles = ctx.config.get_doubles("bvar.quantiles", po.quantiles);
  po.seed = predict_seed(ctx.seed);
  po.stable_only = ctx.config.get_bool("bvar.stable_only", false);
  std::optional<Eigen::VectorXd> realized;
  if (test.rows() > 0) realized = test.values.row(0).transpose();
  return predict(draws, train.values.bottomRows(draws.p), po, realized);
}

PosteriorDraws structural_draws(const RunContext& ctx, const std::string& default_prior) {
  if (ctx.config.has("draws_file")) {
    std::ifstream in(ctx.input_path("draws_file"));
    return read_draws(in);
  }
  const std::string prior = prior_choice(ctx, default_prior);
  const Inputs in = load_inputs(ctx);
  const FactorData fd = factor_data(ctx, in);
  return sample_posterior(ctx, prior, fd.train);
}

// Conditional mean of the factors from the last filtered state.
Eigen::MatrixXd kalman_factor_path(const MleResult& fit, int H) {
  Eigen::VectorXd x = fit.filter.filtered_state.back();
  Eigen::MatrixXd out(H, 3);
  for (int h = 0; h < H; ++h) {
    x = fit.params.A * x;
    out.row(h) = (fit.params.mu + x).transpose();
  }
  return out;
}

QuasiNewtonOptions optimizer_options(const KeyValueConfig& cfg) {
  QuasiNewtonOptions o;
  o.max_evals = cfg.get_int("kalman.max_evals", o.max_evals);
  o.gradient_tol = cfg.get_double("kalman.gradient_tol", o.gradient_tol);
  o.relative_step_tol = cfg.get_double("kalman.step_tol", o.relative_step_tol);
  if (o.max_evals < 1) throw ArgumentError("kalman.max_evals must be >= 1");
  return o;
}

MleResult fit_kalman(const RunContext& ctx, const YieldPanel& train, double lambda) {
  return fit_mle(train, init_from_two_step(train, lambda), optimizer_options(ctx.config));
}

}  // namespace

void cmd_describe(RunContext& ctx) {
  const YieldPanel panel = load_panel(ctx.input_path("data"), PanelSchema::from_config(ctx.config));
  emit(ctx, "stats.csv", [&](std::ostream& out) {
    write_header(out, header(ctx, "descriptive statistics"));
    write_stats(out, describe(panel));
  });
}

void cmd_fit_two_step(RunContext& ctx) {
  const Inputs in = load_inputs(ctx);
  const FactorData fd = factor_data(ctx, in);
  const int p = get_positive(ctx.config, "var.lags", 1);
  const VarModel model = fit_var(fd.train, p, ctx.config.get_bool("var.intercept", true));
  const int H = forecast_horizon(ctx, in);
  const PathForecast pf = forecast_path(model, fd.train.values.bottomRows(p), H,
                                        ctx.config.get_doubles("forecast.levels", {0.95}));
  const YieldForecast yf = reconstruct_yields(pf.mean, pf.covariance, fd.fit.loadings);

  emit(ctx, "factors.csv", [&](std::ostream& out) { write_factors(out, fd.train, header(ctx, "two-step factors")); });
  emit(ctx, "loadings.csv", [&](std::ostream& out) { write_loadings(out, fd.fit.loadings, header(ctx, "loadings")); });
  emit(ctx, "var_model.csv", [&](std::ostream& out) {
    const double rho = spectral_radius(model.coef.lags);
    write_var_model(out, model, header(ctx, fmt::format("VAR on two-step factors, spectral radius {:.10g}", rho)));
  });
  emit(ctx, "factor_forecast.csv", [&](std::ostream& out) {
    write_path_forecast(out, pf, fd.train.names, header(ctx, "factor path forecast"));
  });
  emit(ctx, "yield_forecast.csv", [&](std::ostream& out) {
    write_yield_forecast(out, yf, report_horizons(ctx, H), header(ctx, "yield forecast"));
  });
  emit(ctx, "residuals.csv", [&](std::ostream& out) {
    write_states(out, in.split.train.dates, fd.fit.residuals, maturity_names(in.full.maturities),
                 header(ctx, "cross-section residuals"));
  });
}

void cmd_fit_pca(RunContext& ctx) {
  const Inputs in = load_inputs(ctx);
  const Eigen::Index k = get_positive(ctx.config, "pca.components", 3);
  const PcaResult res = pca(in.split.train.yields, k, ctx.config.get_bool("pca.standardize", false));
  std::vector<std::string> pcs;
  for (Eigen::Index i = 0; i < res.scores.cols(); ++i) pcs.push_back(fmt::format("PC{}", i + 1));
  emit(ctx, "pca_explained.csv", [&](std::ostream& out) { write_pca_explained(out, res, header(ctx, "PCA eigenvalues")); });
  emit(ctx, "pca_components.csv", [&](std::ostream& out) {
    write_pca_components(out, res, maturity_names(in.full.maturities), header(ctx, "PCA loadings"));
  });
  emit(ctx, "pca_scores.csv", [&](std::ostream& out) {
    write_states(out, in.split.train.dates, res.scores, pcs, header(ctx, "PCA scores"));
  });
}

void cmd_fit_kalman(RunContext& ctx) {
  const Inputs in = load_inputs(ctx);
  const MleResult fit = fit_kalman(ctx, in.split.train, in.lambda);
  const DnsSmootherOutput sm = kalman_smoother(fit.filter, fit.params);
  const int H = forecast_horizon(ctx, in);
  const NsLoadings loadings = ns_loadings(fit.params.lambda, in.full.maturities);
  const YieldForecast yf = reconstruct_yields(kalman_factor_path(fit, H), {}, loadings);

  emit(ctx, "params.txt", [&](std::ostream& out) {
    write_header(out, header(ctx, "state-space parameters"));
    write_params(out, fit.params);
  });
  emit(ctx, "kalman_summary.txt", [&](std::ostream& out) {
    write_header(out, header(ctx, "maximum likelihood"));
    out << fmt::format("log_likelihood = {:.12g}\n", fit.log_likelihood);
    out << fmt::format("initial_log_likelihood = {:.12g}\n", fit.initial_log_likelihood);
    out << "converged = " << (fit.optimizer.converged ? "true" : "false") << '\n';
    out << "stop_reason = " << to_string(fit.optimizer.reason) << '\n';
    out << "evaluations = " << fit.optimizer.evals << '\n';
    out << "iterations = " << fit.optimizer.iterations << '\n';
  });
  emit(ctx, "smoothed_states.csv", [&](std::ostream& out) {
    write_states(out, in.split.train.dates, smoothed_factors(sm, fit.params), {"L", "S", "C"},
                 header(ctx, "smoothed factors"));
  });
  emit(ctx, "optimizer_trace.csv", [&](std::ostream& out) {
    write_optimizer_trace(out, fit.optimizer, header(ctx, "optimizer trace"));
  });
  emit(ctx, "yield_forecast.csv", [&](std::ostream& out) {
    write_yield_forecast(out, yf, report_horizons(ctx, H), header(ctx, "yield forecast"));
  });
}

void cmd_bvar(RunContext& ctx) {
  const std::string prior = prior_choice(ctx, "minnesota");
  const Inputs in = load_inputs(ctx);
  const FactorData fd = factor_data(ctx, in);
  const PosteriorDraws draws = sample_posterior(ctx, prior, fd.train);
  const int H = get_positive(ctx.config, "forecast.horizon", 12);
  const PredictiveDistribution pred = predictive(ctx, draws, fd.train, fd.test, H);
  const YieldForecast yf = reconstruct_yields(pred, fd.fit.loadings);

  emit(ctx, "draws.csv", [&](std::ostream& out) { write_draws(out, draws, ctx.config_hash()); });
  emit(ctx, "posterior_mean.csv", [&](std::ostream& out) {
    write_header(out, header(ctx, "posterior mean of Phi (rows: intercept, lag blocks)"));
    write_matrix(out, draws.phi_mean(), draws.names, {});
    out << "# posterior mean of Sigma\n";
    write_matrix(out, draws.sigma_mean(), draws.names, {});
    if (!draws.gamma.empty()) {
      out << "# inclusion probabilities (column-major over Phi)\n";
      write_matrix(out, draws.inclusion_probability(), {"probability"}, {});
    }
  });
  emit(ctx, "predictive.csv", [&](std::ostream& out) {
    write_predictive(out, pred, header(ctx, fmt::format("factor predictive distribution, prior {}", prior)));
  });
  emit(ctx, "yield_forecast.csv", [&](std::ostream& out) {
    write_yield_forecast(out, yf, report_horizons(ctx, H), header(ctx, "yield predictive mean and sd"));
  });
}

void cmd_irf(RunContext& ctx) {
  const int H = static_cast<int>(ctx.config.get_int("irf.horizons", 24));
  if (H < 1) throw ArgumentError(fmt::format("irf.horizons must be >= 1, got {}", H));
  const PosteriorDraws draws = structural_draws(ctx, "minnesota");
  const IrfResult irf = irf_recursive(draws, H, ctx.config.get_doubles("irf.levels", {0.05, 0.5, 0.95}));
  emit(ctx, "irf.csv", [&](std::ostream& out) { write_irf(out, irf, header(ctx, "recursive impulse responses")); });
}

void cmd_sign_irf(RunContext& ctx) {
  SignOptions opt;
  opt.horizons = static_cast<int>(ctx.config.get_int("irf.horizons", opt.horizons));
  if (opt.horizons < 1) throw ArgumentError(fmt::format("irf.horizons must be >= 1, got {}", opt.horizons));
  opt.max_tries = get_positive(ctx.config, "sign.max_tries", opt.max_tries);
  opt.seed = ctx.seed;
  opt.levels = ctx.config.get_doubles("sign.levels", opt.levels);
  const std::string shock = ctx.config.require("sign.shock");
  const PosteriorDraws draws = structural_draws(ctx, "dummy");
  const SignRestriction r = parse_sign_restriction(shock, ctx.config.get_string("sign.constraints", shock + ":+"),
                                                   draws.names, ctx.config.get_ints("sign.horizons", {0}));
  const IrfResult irf = sign_restricted_irf(draws, r, opt);
  emit(ctx, "sign_irf.csv", [&](std::ostream& out) {
    write_irf(out, irf, header(ctx, "sign-restricted impulse responses"));
  });
}

void cmd_evaluate(RunContext& ctx) {
  const auto& cfg = ctx.config;
  const auto methods = cfg.get_strings("evaluate.methods", {"random_walk", "two_step"});
  for (const auto& m : methods)
    if (m != "random_walk" && m != "two_step" && m != "kalman" && !is_prior(m))
      throw ArgumentError(fmt::format("unknown evaluation method '{}'", m));
  const auto horizons = cfg.get_ints("evaluate.horizons", {1, 6, 12});
  const std::string mode_name = cfg.get_string("evaluate.mode", "point");
  if (mode_name != "point" && mode_name != "path") throw ArgumentError("evaluate.mode must be point or path");
  const HorizonMode mode = mode_name == "point" ? HorizonMode::Point : HorizonMode::Path;
  const Inputs in = load_inputs(ctx);

  auto kalman_fit = std::make_shared<std::optional<MleResult>>();
  auto forecaster = [&](const std::string& method) -> Forecaster {
    if (method == "random_walk") {
      return [](const YieldPanel& train, int H) {
        return Eigen::MatrixXd(train.yields.row(train.rows() - 1).replicate(H, 1));
      };
    }
    if (method == "two_step") {
      return [&](const YieldPanel& train, int H) {
        const CrossSectionFit fit = fit_cross_section(train, in.lambda);
        const int p = get_positive(cfg, "var.lags", 1);
        const VarModel model = fit_var(fit.factors, p, cfg.get_bool("var.intercept", true));
        const PathForecast pf = forecast_path(model, fit.factors.values.bottomRows(p), H, {});
        return Eigen::MatrixXd(pf.mean * fit.loadings.matrix.transpose());
      };
    }
    if (method == "kalman") {
      return [&, kalman_fit](const YieldPanel& train, int H) {
        *kalman_fit = fit_kalman(ctx, train, in.lambda);
        const NsLoadings l = ns_loadings((*kalman_fit)->params.lambda, train.maturities);
        return Eigen::MatrixXd(kalman_factor_path(**kalman_fit, H) * l.matrix.transpose());
      };
    }
    return [&, method](const YieldPanel& train, int H) {
      const CrossSectionFit fit = fit_cross_section(train, in.lambda);
      const PosteriorDraws draws = sample_posterior(ctx, method, fit.factors);
      const PredictiveDistribution pred = predictive(ctx, draws, fit.factors, FactorSeries{}, H);
      return reconstruct_yields(pred, fit.loadings).mean;
    };
  };

  EvalReport rep;
  std::vector<MethodForecast> paths;
  if (cfg.get_bool("evaluate.rolling", false)) {
    const Eigen::Index train_size = cfg.get_int("evaluate.train_size", in.split.train.rows());
    for (const auto& m : methods) {
      EvalReport r = evaluate_rolling(m, forecaster(m), in.full, train_size, horizons);
      if (rep.methods.empty()) rep = r;
      else {
        rep.methods.push_back(m);
        rep.msfe.push_back(r.msfe.front());
      }
    }
  } else {
    if (horizons.empty()) throw ArgumentError("evaluate.horizons is empty");
    const int h_max = *std::max_element(horizons.begin(), horizons.end());
    if (h_max > in.split.test.rows()) {
      throw ArgumentError(fmt::format("horizon {} exceeds the {} test observations", h_max, in.split.test.rows()));
    }
    for (const auto& m : methods) paths.push_back({m, forecaster(m)(in.split.train, h_max)});
    rep = evaluate_horizons(paths, in.split.test, horizons, mode);
  }
  rep.config_hash = ctx.config_hash();
  rep.train_end = in.split.train.dates.back().str();

  const CrossSectionFit fit = fit_cross_section(in.split.train, in.lambda);
  rep.residuals.push_back(summarize_residuals("two_step", fit.residuals));
  if (kalman_fit->has_value() && paths.size() == methods.size()) {
    const MleResult& k = **kalman_fit;
    const DnsSmootherOutput sm = kalman_smoother(k.filter, k.params);
    const NsLoadings l = ns_loadings(k.params.lambda, in.full.maturities);
    const Eigen::MatrixXd resid = in.split.train.yields - smoothed_factors(sm, k.params) * l.matrix.transpose();
    rep.residuals.push_back(summarize_residuals("kalman", resid));
  }

  emit(ctx, "msfe.csv", [&](std::ostream& out) { write_msfe_table(out, rep); });
  emit(ctx, "residual_summary.csv", [&](std::ostream& out) { write_residual_table(out, rep); });
  for (const auto& f : paths) {
    emit(ctx, fmt::format("forecast_{}.csv", f.method), [&](std::ostream& out) {
      const std::vector<MonthStamp> dates(in.split.test.dates.begin(), in.split.test.dates.begin() + f.path.rows());
      write_states(out, dates, f.path, maturity_names(in.full.maturities), header(ctx, f.method + " yield path"));
    });
  }
}

void write_manifest(RunContext& ctx) {
  emit(ctx, "config.txt", [&](std::ostream& out) { out << ctx.config.serialize(); });
  std::ofstream out(ctx.out_dir / "manifest.txt", std::ios::binary);
  if (!out) throw ArgumentError(fmt::format("cannot write manifest in '{}'", ctx.out_dir.string()));
  out << "command = " << ctx.command << '\n';
  out << "config_hash = " << ctx.config_hash() << '\n';
  out << "seed = " << ctx.seed << '\n';
  for (const auto& name : ctx.outputs) {
    std::ifstream in(ctx.out_dir / name, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    out << fmt::format("file = {} {} {:016x}\n", name, bytes.size(), fnv1a64(bytes));
  }
}

}  // namespace nsbvar::cli
