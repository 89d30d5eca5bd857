// Acceptance harness: one pass/fail line per criterion, nonzero exit when
// any criterion fails. Reference results are computed by straight-line
// reimplementations local to this file, never by the library code under
// test (estimator predictions are shared inputs, routing logic is not).

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gar/app_config.hpp"
#include "gar/engine.hpp"
#include "gar/metrics.hpp"
#include "gar/trace_io.hpp"
#include "gar/tracegen.hpp"

using namespace gar;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool ok, const std::string& detail = "") {
  std::cout << "criterion " << criterion << " (" << name << "): " << (ok ? "PASS" : "FAIL");
  if (!ok && !detail.empty()) {
    std::cout << " [" << detail << "]";
  }
  std::cout << "\n";
  if (!ok) ++g_failures;
}

bool close_rel(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

// ---------------------------------------------------------------------------
// shared scaffolding: fixed per-model predictions, margins re-applied
// ---------------------------------------------------------------------------

class ScriptedEstimators : public Estimators {
 public:
  struct Script {
    double p_hat;
    double ell_ms;
    double c_g;
    double t_hat;
  };

  explicit ScriptedEstimators(std::vector<Script> scripts) : scripts_(std::move(scripts)) {}

  PredictionBundle predict(const RequestInstance&, const ModelPool& pool, const SLOConfig& slo,
                           const GridIntensitySeries&) const override {
    PredictionBundle bundle;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const auto& s = scripts_[i];
      ModelPrediction p;
      p.p_hat = s.p_hat;
      p.ell_p95_hat_ms = s.ell_ms;
      p.c_hat_g = s.c_g;
      p.t_hat_tokens = s.t_hat;
      apply_margins(p, slo.margins);
      bundle.per_model.push_back(p);
    }
    return bundle;
  }

 private:
  std::vector<Script> scripts_;
};

// ---------------------------------------------------------------------------
// reference routing, written independently of src/ (tie chains per docs)
// ---------------------------------------------------------------------------

using Key3 = std::array<double, 3>;

Key3 ref_carbon_key(const PredictionBundle& b, int i) {
  return {b.per_model[i].c_tilde_g, b.per_model[i].ell_tilde_ms, -b.per_model[i].p_hat};
}

std::vector<int> ref_feasible(const PredictionBundle& b, double tau, double latency_ms) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(b.per_model.size()); ++i) {
    if (b.per_model[i].p_hat >= tau && b.per_model[i].ell_tilde_ms <= latency_ms) out.push_back(i);
  }
  return out;
}

int ref_carbon_min(const std::vector<int>& candidates, const PredictionBundle& b) {
  int best = candidates.front();
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (ref_carbon_key(b, candidates[i]) < ref_carbon_key(b, best)) best = candidates[i];
  }
  return best;
}

int ref_fallback(const PredictionBundle& b, double tau, double latency_ms,
                 const std::vector<int>& candidates) {
  auto key = [&](int i) {
    return std::pair<double, double>(std::max(0.0, tau - b.per_model[i].p_hat),
                                     std::max(0.0, b.per_model[i].ell_tilde_ms - latency_ms));
  };
  int best = candidates.front();
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (key(candidates[i]) < key(best)) best = candidates[i];
  }
  return best;
}

double ref_pd_score(const PredictionBundle& b, int i, double alpha_q, double alpha_ell, double L,
                    double lambda, double B) {
  return alpha_q * (1.0 - b.per_model[i].p_hat) + alpha_ell * b.per_model[i].ell_tilde_ms / L +
         lambda * b.per_model[i].c_tilde_g / B;
}

int ref_select_pd(const std::vector<int>& feasible, const PredictionBundle& b, double alpha_q,
                  double alpha_ell, double L, double lambda, double B) {
  auto key = [&](int i) {
    const Key3 tie = ref_carbon_key(b, i);
    return std::array<double, 4>{ref_pd_score(b, i, alpha_q, alpha_ell, L, lambda, B), tie[0],
                                 tie[1], tie[2]};
  };
  int best = feasible.front();
  for (std::size_t i = 1; i < feasible.size(); ++i) {
    if (key(feasible[i]) < key(best)) best = feasible[i];
  }
  return best;
}

double ref_param_count(const std::string& label) {
  std::size_t pos = 0;
  const double value = std::stod(label, &pos);
  double mult = 1.0;
  if (pos < label.size()) {
    switch (std::toupper(label[pos])) {
      case 'K': mult = 1e3; break;
      case 'M': mult = 1e6; break;
      case 'B': mult = 1e9; break;
      case 'T': mult = 1e12; break;
      default: mult = 1.0; break;
    }
  }
  return value * mult;
}

// ---------------------------------------------------------------------------
// criterion 1: straight-line GAR-PD replay, exact choices, lambda 1e-9
// ---------------------------------------------------------------------------

void criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;

  for (std::uint64_t seed = 42; seed < 92 && ok; ++seed) {
    GenSpec spec = GenSpec::default_spec();
    spec.n_requests = 1000;
    spec.seed = seed;
    auto [trace, grid] = generate(spec);
    const ModelPool& pool = spec.pool;
    const OracleEstimators estimators;

    SLOConfig slo;
    slo.default_floor = 0.6;
    slo.latency_target_ms = 3000.0;

    RunConfig cfg;
    cfg.policy.variant = PolicyVariant::gar_pd;
    cfg.slo = slo;
    const RunResult engine_result = run(trace, pool, grid, estimators, cfg);

    // reference: resolve B from the largest model's mean realized carbon
    int largest = 0;
    for (int i = 1; i < static_cast<int>(pool.size()); ++i) {
      if (ref_param_count(pool.at(i).size_label) > ref_param_count(pool.at(largest).size_label)) {
        largest = i;
      }
    }
    double baseline = 0.0;
    for (const auto& req : trace.requests) {
      baseline += req.realized.at(pool.at(largest).model_id).carbon_g;
    }
    baseline /= static_cast<double>(trace.requests.size());
    const double B = cfg.budget_fraction * baseline;
    const std::size_t W = cfg.policy.pd.window_W;
    const double eta = cfg.policy.pd.eta;

    std::deque<double> window;
    double lambda = 0.0;
    for (std::size_t t = 0; t < trace.requests.size(); ++t) {
      const auto& req = trace.requests[t];
      const PredictionBundle bundle = estimators.predict(req, pool, slo, grid);
      const std::vector<int> feasible = ref_feasible(bundle, 0.6, slo.latency_target_ms);

      int chosen;
      if (feasible.empty()) {
        std::vector<int> all(pool.size());
        std::iota(all.begin(), all.end(), 0);
        chosen = ref_fallback(bundle, 0.6, slo.latency_target_ms, all);
      } else {
        chosen = ref_select_pd(feasible, bundle, cfg.policy.pd.alpha_q, cfg.policy.pd.alpha_ell,
                               slo.latency_target_ms, lambda, B);
      }

      const auto& d = engine_result.decisions[t];
      if (d.chosen_model_id != pool.at(chosen).model_id || !close_rel(d.lambda_snapshot, lambda, 1e-9)) {
        ok = false;
        detail = "seed " + std::to_string(seed) + " request " + std::to_string(t) + ": engine " +
                 d.chosen_model_id + "/" + std::to_string(d.lambda_snapshot) + " vs reference " +
                 pool.at(chosen).model_id + "/" + std::to_string(lambda);
        break;
      }

      window.push_back(req.realized.at(pool.at(chosen).model_id).carbon_g);
      if (window.size() > W) window.pop_front();
      const double s = std::accumulate(window.begin(), window.end(), 0.0);
      const double denom = B * static_cast<double>(window.size());
      lambda = std::max(0.0, lambda + eta * (s - denom) / denom);
    }
    if (ok && !close_rel(engine_result.final_lambda, lambda, 1e-9)) {
      ok = false;
      detail = "seed " + std::to_string(seed) + ": final lambda mismatch";
    }
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (ok && elapsed >= 30.0) {
    ok = false;
    detail = "runtime " + std::to_string(elapsed) + " s exceeds 30 s";
  }
  report(1, "algorithm oracle equivalence, 50 traces x 1000 requests", ok, detail);
}

// ---------------------------------------------------------------------------
// criterion 2: ledger sum vs brute force at every one of 10^4 pushes
// ---------------------------------------------------------------------------

void criterion_2() {
  bool ok = true;
  std::string detail;
  CarbonLedger ledger(100, 1.0);
  std::deque<double> shadow;
  Rng rng(2024);
  for (int t = 0; t < 10000 && ok; ++t) {
    const double c = rng.uniform(0.0, 4.0);
    ledger.push(c);
    shadow.push_back(c);
    if (shadow.size() > 100) shadow.pop_front();
    const double exact = std::accumulate(shadow.begin(), shadow.end(), 0.0);
    if (!close_rel(ledger.sum(), exact, 1e-9)) {
      ok = false;
      detail = "push " + std::to_string(t) + ": " + std::to_string(ledger.sum()) + " vs " +
               std::to_string(exact);
    }
  }
  report(2, "sliding-window sum matches brute force over 10^4 pushes", ok, detail);
}

// ---------------------------------------------------------------------------
// criterion 3: dual dynamics
// ---------------------------------------------------------------------------

void criterion_3() {
  bool ok = true;
  std::string detail;

  // (a) nonnegativity under arbitrary traffic
  {
    Rng rng(31);
    CarbonLedger ledger(100, 0.7);
    DualState dual{0.0, 0.05};
    for (int t = 0; t < 5000; ++t) {
      ledger.push(rng.uniform(0.0, 3.0));
      dual_update(dual, ledger);
      if (dual.lambda < 0.0) {
        ok = false;
        detail = "lambda went negative";
        break;
      }
    }
  }

  // (b) strictly under budget: nonincreasing and reaches zero
  if (ok) {
    Rng rng(32);
    CarbonLedger ledger(100, 1.0);
    DualState dual{0.8, 0.05};
    double prev = dual.lambda;
    for (int t = 0; t < 3000; ++t) {
      ledger.push(rng.uniform(0.0, 0.9));
      dual_update(dual, ledger);
      if (dual.lambda > prev + 1e-15) {
        ok = false;
        detail = "lambda increased while under budget";
        break;
      }
      prev = dual.lambda;
    }
    if (ok && dual.lambda != 0.0) {
      ok = false;
      detail = "lambda did not reach zero under slack budget";
    }
  }

  // (c) binding two-model regime: window average within 10% of B after 10*W
  if (ok) {
    ModelPool pool;
    pool.models.push_back({"cheap", "7B", "r", 0.1, 1.0, 100.0});
    pool.models.push_back({"dear", "70B", "r", 0.5, 5.0, 100.0});
    Trace trace;
    trace.header.model_ids = {"cheap", "dear"};
    const long n = 4000;
    for (long i = 0; i < n; ++i) {
      RequestInstance req;
      req.request_index = i;
      req.dataset_id = "d";
      req.arrival_time_s = static_cast<double>(i);
      req.features = {1.0};
      req.realized["cheap"] = {false, 100.0, 0.5, 50};
      req.realized["dear"] = {true, 100.0, 2.0, 50};
      trace.requests.push_back(std::move(req));
    }
    const GridIntensitySeries grid = GridIntensitySeries::constant({{"r", 300.0}});
    const ScriptedEstimators estimators(
        {{0.6, 100.0, 0.5, 50.0}, {0.9, 100.0, 2.0, 50.0}});

    SLOConfig slo;
    slo.default_floor = 0.0;
    slo.latency_target_ms = 3000.0;
    RunConfig cfg;
    cfg.policy.variant = PolicyVariant::gar_pd;
    cfg.policy.pd.budget_B_g = 1.0;
    cfg.policy.pd.eta = 0.05;
    cfg.policy.pd.window_W = 100;
    cfg.slo = slo;
    const RunResult res = run(trace, pool, grid, estimators, cfg);

    // the dual chatters around its threshold, so the window average cycles
    // inside [c_low, c_high]; the long-run average must track B
    std::deque<double> window;
    double tail_total = 0.0;
    long tail_count = 0;
    for (long t = 0; t < n && ok; ++t) {
      const double c = res.decisions[t].realized.carbon_g;
      window.push_back(c);
      if (window.size() > 100) window.pop_front();
      if (t >= 1000) {
        const double avg =
            std::accumulate(window.begin(), window.end(), 0.0) / static_cast<double>(window.size());
        if (avg < 0.5 - 1e-12 || avg > 2.0 + 1e-12) {
          ok = false;
          detail = "window average " + std::to_string(avg) + " left [c_low, c_high] at request " +
                   std::to_string(t);
        }
        tail_total += c;
        ++tail_count;
      }
    }
    if (ok) {
      const double tail_mean = tail_total / static_cast<double>(tail_count);
      if (std::fabs(tail_mean - 1.0) > 0.1) {
        ok = false;
        detail = "long-run average " + std::to_string(tail_mean) + " not within 10% of B";
      }
    }
  }

  report(3, "dual dynamics: nonnegativity, slack decay, binding-regime tracking", ok, detail);
}

// ---------------------------------------------------------------------------
// criterion 4 and 8: selection brute-force equivalence and the epsilon contract
// ---------------------------------------------------------------------------

PredictionBundle random_bundle(Rng& rng, std::size_t n, const SafetyMargins& margins) {
  PredictionBundle bundle;
  for (std::size_t i = 0; i < n; ++i) {
    ModelPrediction p;
    if (i > 0 && rng.bernoulli(0.25)) {
      p = bundle.per_model[rng.next_below(i)];  // deliberate exact ties
    } else {
      p.p_hat = rng.uniform();
      p.ell_p95_hat_ms = rng.uniform(10.0, 4000.0);
      p.c_hat_g = rng.uniform(0.01, 3.0);
      p.t_hat_tokens = rng.uniform(10.0, 500.0);
      apply_margins(p, margins);
    }
    bundle.per_model.push_back(p);
  }
  return bundle;
}

void criterion_4() {
  bool ok = true;
  std::string detail;
  Rng rng(4004);
  int done = 0;
  auto fail = [&](const std::string& what) {
    if (ok) {
      ok = false;
      detail = what + " mismatch at instance " + std::to_string(done);
    }
  };

  while (done < 1000 && ok) {
    const std::size_t n = 1 + rng.next_below(8);
    SLOConfig slo;
    slo.default_floor = rng.uniform(0.0, 0.9);
    slo.latency_target_ms = rng.uniform(500.0, 4500.0);
    const PredictionBundle bundle = random_bundle(rng, n, slo.margins);

    const FeasibleSet fs = feasible_set(bundle, slo, "d");
    const std::vector<int> expect =
        ref_feasible(bundle, *slo.default_floor, slo.latency_target_ms);
    if (fs.model_indices != expect) fail("feasible_set");
    if (fs.empty()) continue;  // selection preconditions need a nonempty set
    ++done;

    if (select_gar(fs, bundle) != ref_carbon_min(expect, bundle)) fail("select_gar");

    const double cap = rng.uniform(0.0, 3.5);
    std::vector<int> capped;
    for (int i : expect) {
      if (bundle.per_model[i].c_tilde_g <= cap) capped.push_back(i);
    }
    const CapSelection sel = select_gar_fixed(fs, bundle, cap);
    const int cap_expect = capped.empty() ? ref_carbon_min(expect, bundle)
                                          : ref_carbon_min(capped, bundle);
    if (sel.model_index != cap_expect || sel.used_cap_fallback != capped.empty()) {
      fail("select_gar_fixed");
    }

    const double tau_tgt = rng.uniform();
    std::vector<int> meeting;
    for (int i : expect) {
      if (bundle.per_model[i].p_hat >= tau_tgt) meeting.push_back(i);
    }
    const int tgt_expect =
        meeting.empty() ? ref_fallback(bundle, tau_tgt, slo.latency_target_ms, expect)
                        : ref_carbon_min(meeting, bundle);
    if (select_gar_target(fs, bundle, {{"d", tau_tgt}}, "d", slo.latency_target_ms) != tgt_expect) {
      fail("select_gar_target");
    }

    PDConfig pd;
    pd.alpha_q = rng.uniform(0.1, 2.0);
    pd.alpha_ell = rng.uniform(0.1, 2.0);
    pd.budget_B_g = rng.uniform(0.2, 2.0);
    const double lambda = rng.uniform(0.0, 2.0);
    if (select_pd(fs, bundle, slo, pd, lambda) !=
        ref_select_pd(expect, bundle, pd.alpha_q, pd.alpha_ell, slo.latency_target_ms, lambda,
                      pd.budget_B_g)) {
      fail("select_pd");
    }

    // baselines, including pool-order argmax/argmin ties
    ModelPool pool;
    RequestInstance req;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = "m" + std::to_string(i);
      pool.models.push_back({id, std::to_string(1 + rng.next_below(100)) + "B", "r", 0.1, 1.0, 100.0});
      req.realized[id] = {rng.bernoulli(0.5), 100.0, rng.uniform(0.01, 3.0), 10};
    }
    int big = 0, small = 0, accmax = 0;
    for (int i = 1; i < static_cast<int>(n); ++i) {
      if (ref_param_count(pool.at(i).size_label) > ref_param_count(pool.at(big).size_label)) big = i;
      if (ref_param_count(pool.at(i).size_label) < ref_param_count(pool.at(small).size_label)) {
        small = i;
      }
      if (bundle.per_model[i].p_hat > bundle.per_model[accmax].p_hat) accmax = i;
    }
    int accmax_feas = expect.front();
    for (int i : expect) {
      if (bundle.per_model[i].p_hat > bundle.per_model[accmax_feas].p_hat) accmax_feas = i;
    }
    int oracle = expect.front();
    for (int i : expect) {
      if (req.realized.at(pool.at(i).model_id).carbon_g <
          req.realized.at(pool.at(oracle).model_id).carbon_g) {
        oracle = i;
      }
    }
    if (select_baseline(PolicyVariant::largest, fs, bundle, pool, req) != big) fail("largest");
    if (select_baseline(PolicyVariant::smallest, fs, bundle, pool, req) != small) fail("smallest");
    if (select_baseline(PolicyVariant::accmax_unconstrained, fs, bundle, pool, req) != accmax) {
      fail("accmax_unconstrained");
    }
    if (select_baseline(PolicyVariant::accmax_feasible, fs, bundle, pool, req) != accmax_feas) {
      fail("accmax_feasible");
    }
    if (select_baseline(PolicyVariant::oracle_feasible, fs, bundle, pool, req) != oracle) {
      fail("oracle_feasible");
    }
  }
  report(4, "selection brute-force equivalence, 1000 instances per policy", ok, detail);
}

void criterion_8() {
  bool ok = true;
  std::string detail;
  Rng rng(8008);
  int done = 0;
  while (done < 1000 && ok) {
    const std::size_t n = 1 + rng.next_below(8);
    SLOConfig slo;
    slo.default_floor = rng.uniform(0.0, 0.9);
    slo.latency_target_ms = rng.uniform(500.0, 4500.0);
    const PredictionBundle bundle = random_bundle(rng, n, slo.margins);
    const FeasibleSet fs = feasible_set(bundle, slo, "d");
    if (fs.empty()) continue;
    ++done;

    double p_star = -1.0;
    for (int i : fs.model_indices) p_star = std::max(p_star, bundle.per_model[i].p_hat);

    const double eps = rng.uniform(0.0, 0.5);
    const int chosen = select_gar_eps(fs, bundle, eps);
    if (bundle.per_model[chosen].p_hat < p_star - eps) {
      ok = false;
      detail = "epsilon slack violated at instance " + std::to_string(done);
    }

    const int exact = select_gar_eps(fs, bundle, 0.0);
    if (bundle.per_model[exact].p_hat != p_star) {
      ok = false;
      detail = "epsilon=0 selection left the argmax set at instance " + std::to_string(done);
    }
  }
  report(8, "epsilon-greedy accuracy slack contract, 1000 instances", ok, detail);
}

// ---------------------------------------------------------------------------
// criterion 5: oracle dominance
// ---------------------------------------------------------------------------

void criterion_5() {
  bool ok = true;
  std::string detail;

  GenSpec spec = GenSpec::default_spec();
  spec.seed = 42;
  auto [trace, grid] = generate(spec);
  const ModelPool& pool = spec.pool;
  const OracleEstimators estimators;

  SLOConfig slo;
  slo.default_floor = 0.6;
  slo.latency_target_ms = 3000.0;

  auto run_variant = [&](PolicyVariant v, const SLOConfig& s) {
    RunConfig cfg;
    cfg.policy.variant = v;
    cfg.policy.carbon_cap_g = 0.5;
    cfg.policy.epsilon = 0.05;
    cfg.policy.pd.budget_B_g = 0.0;
    cfg.slo = s;
    return run(trace, pool, grid, estimators, cfg);
  };

  const RunResult oracle = run_variant(PolicyVariant::oracle_feasible, slo);
  for (PolicyVariant v : {PolicyVariant::gar, PolicyVariant::gar_fixed, PolicyVariant::gar_eps,
                          PolicyVariant::gar_target, PolicyVariant::gar_pd}) {
    const RunResult res = run_variant(v, slo);
    double oracle_total = 0.0, variant_total = 0.0;
    long count = 0;
    for (std::size_t t = 0; t < res.decisions.size(); ++t) {
      const auto& d = res.decisions[t];
      const bool choice_feasible =
          !d.used_fallback && std::find(d.feasible_model_ids.begin(), d.feasible_model_ids.end(),
                                        d.chosen_model_id) != d.feasible_model_ids.end();
      if (!choice_feasible) continue;
      oracle_total += oracle.decisions[t].realized.carbon_g;
      variant_total += d.realized.carbon_g;
      ++count;
    }
    if (count == 0 || oracle_total > variant_total + 1e-12) {
      ok = false;
      detail = to_string(v) + ": oracle mean above variant mean on the feasible subset";
      break;
    }
  }

  // full-feasibility trace: vacuous constraints, ratio from summarize
  if (ok) {
    SLOConfig loose;
    loose.default_floor = 0.0;
    loose.latency_target_ms = std::numeric_limits<double>::infinity();
    const RunResult loose_oracle = run_variant(PolicyVariant::oracle_feasible, loose);
    double oracle_mean = 0.0;
    for (const auto& d : loose_oracle.decisions) oracle_mean += d.realized.carbon_g;
    oracle_mean /= static_cast<double>(loose_oracle.decisions.size());

    for (PolicyVariant v : {PolicyVariant::gar, PolicyVariant::gar_pd, PolicyVariant::largest,
                            PolicyVariant::accmax_feasible}) {
      const RunResult res = run_variant(v, loose);
      const MetricsReport r = summarize(res.decisions, loose, trace, oracle_mean);
      if (r.feasibility_coverage != 1.0 || !r.oracle_carbon_ratio.has_value() ||
          *r.oracle_carbon_ratio < 1.0 - 1e-12) {
        ok = false;
        detail = to_string(v) + ": oracle carbon ratio below one on a full-feasibility trace";
        break;
      }
    }
  }

  report(5, "hindsight oracle dominates on feasible choices", ok, detail);
}

// ---------------------------------------------------------------------------
// criteria 6 and 7: qualitative ordering and ablation directionality,
// full pipeline (generate -> split -> calibrate -> simulate), 5 seeds
// ---------------------------------------------------------------------------

struct PipelineRun {
  Trace test;
  GridIntensitySeries grid;
  ModelPool pool;
  FittedEstimators estimators;
  SLOConfig slo;
};

PipelineRun build_pipeline(std::uint64_t seed) {
  GenSpec spec = GenSpec::default_spec();
  spec.seed = seed;
  auto [trace, grid] = generate(spec);
  const SplitResult splits = split(trace, 800.0 / 1200.0, 200.0 / 1200.0, 200.0 / 1200.0, seed);
  FittedEstimators estimators = FittedEstimators::fit(splits.calibration, spec.pool, grid);
  SLOConfig slo;
  slo.default_floor = 0.6;
  slo.latency_target_ms = 3000.0;
  return {splits.test, std::move(grid), spec.pool, std::move(estimators), slo};
}

MetricsReport run_and_summarize(const PipelineRun& p, PolicyVariant v,
                                const AblationFlags& ablations = {}) {
  RunConfig cfg;
  cfg.policy.variant = v;
  cfg.slo = p.slo;
  cfg.ablations = ablations;
  const RunResult res = run(p.test, p.pool, p.grid, p.estimators, cfg);
  return summarize(res.decisions, p.slo, p.test);
}

void criteria_6_and_7() {
  bool ok6 = true, ok7 = true;
  std::string detail6, detail7;

  for (std::uint64_t seed = 42; seed <= 46; ++seed) {
    const PipelineRun p = build_pipeline(seed);
    const std::string tag = "seed " + std::to_string(seed) + ": ";

    std::map<PolicyVariant, MetricsReport> reports;
    for (PolicyVariant v : {PolicyVariant::largest, PolicyVariant::smallest,
                            PolicyVariant::accmax_unconstrained, PolicyVariant::accmax_feasible,
                            PolicyVariant::gar, PolicyVariant::gar_pd,
                            PolicyVariant::oracle_feasible}) {
      reports[v] = run_and_summarize(p, v);
    }

    if (ok6) {
      const auto& smallest = reports[PolicyVariant::smallest];
      const auto& accmax = reports[PolicyVariant::accmax_unconstrained];
      const auto& pd = reports[PolicyVariant::gar_pd];
      for (const auto& [v, r] : reports) {
        if (v != PolicyVariant::smallest && r.co2_g_per_request <= smallest.co2_g_per_request) {
          ok6 = false;
          detail6 = tag + to_string(v) + " emits no more than smallest";
        }
        if (r.macro_accuracy > accmax.macro_accuracy) {
          ok6 = false;
          detail6 = tag + to_string(v) + " beats accmax_unconstrained on accuracy";
        }
      }
      if (pd.co2_g_per_request >= reports[PolicyVariant::accmax_feasible].co2_g_per_request) {
        ok6 = false;
        detail6 = tag + "gar_pd does not emit less than accmax_feasible";
      }
      if (pd.macro_accuracy <= smallest.macro_accuracy) {
        ok6 = false;
        detail6 = tag + "gar_pd is not more accurate than smallest";
      }
    }

    if (ok7) {
      const MetricsReport base = reports[PolicyVariant::gar_pd];
      AblationFlags f;

      f = {};
      f.disable_carbon_estimator = true;
      const MetricsReport no_carbon = run_and_summarize(p, PolicyVariant::gar_pd, f);
      if (no_carbon.co2_g_per_request <= base.co2_g_per_request) {
        ok7 = false;
        detail7 = tag + "carbon ablation did not raise emissions";
      }

      f = {};
      f.disable_accuracy_estimator = true;
      const MetricsReport no_accuracy = run_and_summarize(p, PolicyVariant::gar_pd, f);
      if (no_accuracy.macro_accuracy >= base.macro_accuracy) {
        ok7 = false;
        detail7 = tag + "accuracy ablation did not lower accuracy";
      }

      f = {};
      f.disable_latency_estimator = true;
      const MetricsReport no_latency = run_and_summarize(p, PolicyVariant::gar_pd, f);
      if (no_latency.mean_latency_ms <= base.mean_latency_ms) {
        ok7 = false;
        detail7 = tag + "latency ablation did not raise mean latency";
      }

      f = {};
      f.disable_feasibility_gates = true;
      const MetricsReport no_gates = run_and_summarize(p, PolicyVariant::gar_pd, f);
      if (no_gates.macro_accuracy >= base.macro_accuracy) {
        ok7 = false;
        detail7 = tag + "gate ablation did not lower accuracy";
      }
    }
  }

  report(6, "qualitative policy ordering holds for 5/5 seeds", ok6, detail6);
  report(7, "ablation directionality holds for 5/5 seeds", ok7, detail7);
}

// ---------------------------------------------------------------------------
// criterion 9: target-floor tuning vs a straight-line probe-trajectory oracle
// ---------------------------------------------------------------------------

struct TuneFixture {
  ModelPool pool;
  Trace validation;
  GridIntensitySeries grid;
  std::vector<ScriptedEstimators::Script> scripts;
  SLOConfig slo;
};

// reference accuracy of target-floor routing at floor tau over one dataset
double ref_target_accuracy(const TuneFixture& fx, const PredictionBundle& bundle, double tau) {
  long correct = 0;
  const std::vector<int> feasible =
      ref_feasible(bundle, *fx.slo.default_floor, fx.slo.latency_target_ms);
  for (const auto& req : fx.validation.requests) {
    int chosen;
    if (feasible.empty()) {
      std::vector<int> all(fx.pool.size());
      std::iota(all.begin(), all.end(), 0);
      chosen = ref_fallback(bundle, *fx.slo.default_floor, fx.slo.latency_target_ms, all);
    } else {
      std::vector<int> meeting;
      for (int i : feasible) {
        if (bundle.per_model[i].p_hat >= tau) meeting.push_back(i);
      }
      chosen = meeting.empty() ? ref_fallback(bundle, tau, fx.slo.latency_target_ms, feasible)
                               : ref_carbon_min(meeting, bundle);
    }
    if (req.realized.at(fx.pool.at(chosen).model_id).correct) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(fx.validation.requests.size());
}

struct RefTuneResult {
  double floor;
  double achieved;
  bool shortfall;
  double shortfall_value;
};

RefTuneResult ref_tune(const TuneFixture& fx, const PredictionBundle& bundle, double desired) {
  std::map<double, double> probes;
  probes[0.0] = ref_target_accuracy(fx, bundle, 0.0);
  probes[1.0] = ref_target_accuracy(fx, bundle, 1.0);
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 24; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double acc = ref_target_accuracy(fx, bundle, mid);
    probes[mid] = acc;
    (acc >= desired ? hi : lo) = mid;
  }
  RefTuneResult out{0.0, -1.0, true, 0.0};
  double best_floor = 0.0, best_acc = -1.0;
  bool found = false;
  for (const auto& [tau, acc] : probes) {
    if (!found && acc >= desired) {
      out = {tau, acc, false, 0.0};
      found = true;
    }
    if (acc > best_acc) {
      best_acc = acc;
      best_floor = tau;
    }
  }
  if (!found) {
    out = {best_floor, best_acc, true, desired - best_acc};
  }
  return out;
}

TuneFixture make_fixture(const std::vector<ScriptedEstimators::Script>& scripts,
                         const std::vector<std::vector<bool>>& correct_per_request) {
  TuneFixture fx;
  for (std::size_t m = 0; m < scripts.size(); ++m) {
    fx.pool.models.push_back(
        {"m" + std::to_string(m), std::to_string(7 * (m + 1)) + "B", "r", 0.1, 1.0, 100.0});
  }
  fx.grid = GridIntensitySeries::constant({{"r", 300.0}});
  fx.scripts = scripts;
  fx.slo.default_floor = 0.0;
  fx.slo.latency_target_ms = 3000.0;
  fx.validation.header.model_ids.clear();
  for (const auto& m : fx.pool.models) fx.validation.header.model_ids.push_back(m.model_id);
  for (std::size_t r = 0; r < correct_per_request.size(); ++r) {
    RequestInstance req;
    req.request_index = static_cast<long>(r);
    req.dataset_id = "d";
    req.arrival_time_s = static_cast<double>(r);
    req.features = {1.0};
    for (std::size_t m = 0; m < scripts.size(); ++m) {
      req.realized[fx.pool.at(m).model_id] = {correct_per_request[r][m], 100.0, scripts[m].c_g, 10};
    }
    fx.validation.requests.push_back(std::move(req));
  }
  return fx;
}

void criterion_9() {
  bool ok = true;
  std::string detail;

  // separable construction: cheap model always wrong, accurate always right
  {
    std::vector<std::vector<bool>> outcomes(40, {false, true});
    const TuneFixture fx = make_fixture({{0.4, 100.0, 0.2, 10.0}, {0.9, 100.0, 1.0, 10.0}}, outcomes);
    const ScriptedEstimators est(fx.scripts);
    const TargetFloorResult tuned =
        tune_target_floors(fx.validation, fx.pool, fx.grid, est, fx.slo, 1.0);
    const double floor = tuned.floors.at("d");
    if (!(floor > 0.4 && floor <= 0.9) || tuned.achieved_accuracy.at("d") != 1.0 ||
        !tuned.shortfall.empty()) {
      ok = false;
      detail = "separable construction: floor " + std::to_string(floor);
    }
    // exhaustive scan over unique p_hat steps agrees by routing equivalence
    const PredictionBundle bundle =
        est.predict(fx.validation.requests.front(), fx.pool, fx.slo, fx.grid);
    if (ok && ref_target_accuracy(fx, bundle, floor) != ref_target_accuracy(fx, bundle, 0.65)) {
      ok = false;
      detail = "separable construction: tuned floor routes differently from the scan oracle";
    }
  }

  // vacuous and unreachable targets
  if (ok) {
    std::vector<std::vector<bool>> half(40, {false, true});
    for (std::size_t r = 0; r < half.size(); r += 2) half[r][1] = false;  // accurate right 50%
    const TuneFixture fx = make_fixture({{0.4, 100.0, 0.2, 10.0}, {0.9, 100.0, 1.0, 10.0}}, half);
    const ScriptedEstimators est(fx.scripts);

    const TargetFloorResult vacuous =
        tune_target_floors(fx.validation, fx.pool, fx.grid, est, fx.slo, 0.0);
    if (vacuous.floors.at("d") != 0.0 || !vacuous.shortfall.empty()) {
      ok = false;
      detail = "vacuous target did not return floor zero";
    }

    const TargetFloorResult unreachable =
        tune_target_floors(fx.validation, fx.pool, fx.grid, est, fx.slo, 0.99);
    if (ok && (unreachable.shortfall.count("d") != 1 ||
               std::fabs(unreachable.shortfall.at("d") -
                         (0.99 - unreachable.achieved_accuracy.at("d"))) > 1e-12 ||
               unreachable.achieved_accuracy.at("d") != 0.5)) {
      ok = false;
      detail = "unreachable target did not report the 0.5-accuracy shortfall";
    }
  }

  // random instances against the straight-line probe-trajectory oracle
  if (ok) {
    Rng rng(9009);
    for (int trial = 0; trial < 50 && ok; ++trial) {
      const std::size_t n_models = 2 + rng.next_below(3);
      std::vector<ScriptedEstimators::Script> scripts;
      for (std::size_t m = 0; m < n_models; ++m) {
        scripts.push_back({rng.uniform(0.1, 0.95), 100.0, rng.uniform(0.1, 2.0), 10.0});
      }
      std::vector<std::vector<bool>> outcomes;
      std::vector<double> rates;
      for (std::size_t m = 0; m < n_models; ++m) rates.push_back(rng.uniform());
      for (int r = 0; r < 30; ++r) {
        std::vector<bool> row;
        for (std::size_t m = 0; m < n_models; ++m) row.push_back(rng.bernoulli(rates[m]));
        outcomes.push_back(row);
      }
      const TuneFixture fx = make_fixture(scripts, outcomes);
      const ScriptedEstimators est(fx.scripts);
      const double desired = rng.uniform();

      const TargetFloorResult tuned =
          tune_target_floors(fx.validation, fx.pool, fx.grid, est, fx.slo, desired);
      const PredictionBundle bundle =
          est.predict(fx.validation.requests.front(), fx.pool, fx.slo, fx.grid);
      const RefTuneResult ref = ref_tune(fx, bundle, desired);

      const bool shortfall_reported = tuned.shortfall.count("d") == 1;
      if (tuned.floors.at("d") != ref.floor ||
          std::fabs(tuned.achieved_accuracy.at("d") - ref.achieved) > 1e-12 ||
          shortfall_reported != ref.shortfall ||
          (ref.shortfall &&
           std::fabs(tuned.shortfall.at("d") - ref.shortfall_value) > 1e-12)) {
        ok = false;
        detail = "random trial " + std::to_string(trial) + ": tuner diverged from the oracle";
      }
      // returned floor never underperforms a lower probed floor when no
      // shortfall is reported
      if (ok && !ref.shortfall && ref.achieved < desired) {
        ok = false;
        detail = "random trial " + std::to_string(trial) + ": achieved below desired";
      }
    }
  }

  report(9, "target-floor tuning matches the scan oracle", ok, detail);
}

// ---------------------------------------------------------------------------
// criterion 10: estimator spot checks
// ---------------------------------------------------------------------------

void criterion_10() {
  bool ok = true;
  std::string detail;

  // temperature scaling never reorders predictions
  {
    Rng rng(1010);
    FitConfig config;
    for (int batch = 0; batch < 100 && ok; ++batch) {
      std::vector<double> logits;
      std::vector<bool> labels;
      for (int i = 0; i < 60; ++i) {
        logits.push_back(rng.normal(0.0, 2.0));
        labels.push_back(rng.bernoulli(sigmoid(logits.back())));
      }
      const double temp = fit_temperature(logits, labels, config);
      for (std::size_t a = 0; a < logits.size() && ok; ++a) {
        for (std::size_t b = a + 1; b < logits.size(); ++b) {
          const double pa = sigmoid(logits[a] / temp);
          const double pb = sigmoid(logits[b] / temp);
          if ((logits[a] < logits[b]) != (pa < pb) && logits[a] != logits[b]) {
            ok = false;
            detail = "temperature scaling reordered batch " + std::to_string(batch);
            break;
          }
        }
      }
    }
  }

  // intercept-only quantile fits beat every sample-valued constant
  if (ok) {
    Rng rng(1011);
    for (int trial = 0; trial < 50 && ok; ++trial) {
      std::vector<double> latencies;
      std::vector<std::vector<double>> rows;
      const int n = 25 + static_cast<int>(rng.next_below(100));
      for (int i = 0; i < n; ++i) {
        latencies.push_back(rng.uniform(1.0, 2000.0));
        rows.push_back({0.0});  // constant design: intercept-only path
      }
      const double q = rng.uniform(0.5, 0.99);
      const LatencyModel model = fit_latency_model(rows, latencies, q, 20, "m");
      const double fitted = model.predict({0.0}, 0.0);
      const double fit_loss = pinball_loss_constant(latencies, fitted, q);
      for (double candidate : latencies) {
        if (fit_loss > pinball_loss_constant(latencies, candidate, q) + 1e-9) {
          ok = false;
          detail = "pinball loss above a sample candidate at trial " + std::to_string(trial);
          break;
        }
      }
    }
  }

  // carbon arithmetic anchor
  if (ok) {
    ModelProfile m{"m", "7B", "r", 0.0, 12.0, 100.0};
    const GridIntensitySeries grid = GridIntensitySeries::constant({{"r", 300.0}});
    const double c = estimate_carbon_g(m, 500.0, 0.0, grid);
    if (std::fabs(c - 1.8) > 1e-12) {
      ok = false;
      detail = "carbon anchor " + std::to_string(c) + " != 1.8";
    }
  }

  report(10, "estimator spot checks: temperature, pinball, carbon arithmetic", ok, detail);
}

// ---------------------------------------------------------------------------
// criterion 11: byte-identical determinism end to end
// ---------------------------------------------------------------------------

void criterion_11() {
  bool ok = true;
  std::string detail;

  auto one_pass = [&]() {
    GenSpec spec = GenSpec::default_spec();
    spec.seed = 42;
    auto [trace, grid] = generate(spec);
    const SplitResult splits = split(trace, 800.0 / 1200.0, 200.0 / 1200.0, 200.0 / 1200.0, 42);
    const FittedEstimators estimators = FittedEstimators::fit(splits.calibration, spec.pool, grid);
    SLOConfig slo;
    slo.default_floor = 0.6;
    slo.latency_target_ms = 3000.0;
    RunConfig cfg;
    cfg.policy.variant = PolicyVariant::gar_pd;
    cfg.slo = slo;
    cfg.record_scores = true;
    const RunResult res = run(splits.test, spec.pool, grid, estimators, cfg);
    const MetricsReport report = summarize(res.decisions, slo, splits.test);
    std::ostringstream trace_text;
    write_trace(splits.test, trace_text);
    return trace_text.str() + "\n---\n" + estimators.to_json_string() + "\n---\n" +
           decisions_to_jsonl(res.decisions) + "\n---\n" + report.to_json_string() + "\n---\n" +
           res.final_ledger_state;
  };

  const std::string first = one_pass();
  const std::string second = one_pass();
  if (first != second) {
    ok = false;
    detail = "repeated run produced different bytes";
  }
  report(11, "byte-identical logs and reports across repeated runs", ok, detail);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criteria_6_and_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  if (g_failures > 0) {
    std::cout << g_failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all acceptance criteria passed\n";
  return 0;
}
