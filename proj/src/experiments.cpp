#include "privdet/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "privdet/chi2.hpp"
#include "privdet/config_io.hpp"
#include "privdet/detector.hpp"
#include "privdet/errors.hpp"
#include "privdet/powergrid.hpp"
#include "privdet/rng.hpp"
#include "privdet/tradeoff.hpp"

namespace privdet {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
// Constant power offset injected at the attacked generator in the
// built-in scenario; sized so detection is likely but not saturated at
// the default horizon.
constexpr double kGridAttackValue = 2500.0;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

struct Resolved {
  InterconnectedSystem system;
  std::vector<PrivacyMechanism> mechanisms;
  std::vector<PrivacyMechanism> mechanisms_alt;
  std::vector<std::vector<PrivacyMechanism>> all_sets;
  std::optional<AttackSignal> attack;
  int horizon = 3;
  double pfa = 0.05;
  bool builtin = false;
};

Resolved resolve_scenario(const ExperimentOptions& opt, bool default_attack) {
  Resolved r;
  if (opt.config_path.empty()) {
    const std::string table =
        opt.data_path.empty() ? default_generator_table() : opt.data_path;
    GridScenario sc = benchmark_scenario(opt.seed, table);
    require(opt.mechanism_set >= 0 &&
                opt.mechanism_set <
                    static_cast<int>(sc.mechanism_sets.size()),
            "mechanism set index out of range");
    r.system = std::move(sc.system);
    r.all_sets = sc.mechanism_sets;
    r.mechanisms = sc.mechanism_sets[static_cast<std::size_t>(opt.mechanism_set)];
    r.horizon = opt.horizon.value_or(sc.horizon);
    r.pfa = opt.p_false_alarm.value_or(sc.p_false_alarm);
    r.builtin = true;
    if (default_attack) {
      AttackSignal a;
      a.subsystem = 0;
      for (int k = 0; k < r.horizon; ++k) {
        a.values.push_back(Vector::Constant(1, kGridAttackValue));
      }
      r.attack = std::move(a);
    }
  } else {
    Scenario sc = load_scenario(opt.config_path);
    require(!sc.mechanisms.empty(),
            "config must define a mechanism per non-detector subsystem");
    r.system = std::move(sc.system);
    r.mechanisms = std::move(sc.mechanisms);
    r.mechanisms_alt = std::move(sc.mechanisms_alt);
    r.attack = std::move(sc.attack);
    r.horizon = opt.horizon.value_or(sc.horizon.value_or(3));
    r.pfa = opt.p_false_alarm.value_or(sc.p_false_alarm.value_or(0.05));
  }
  require(r.horizon >= 1, "horizon must be >= 1");
  require(r.pfa > 0.0 && r.pfa < 1.0, "p_false_alarm must lie in (0, 1)");
  if (r.attack && default_attack) {
    require(r.attack->subsystem == 0,
            "experiments model attacks on the detector subsystem (index 1)");
    require(static_cast<int>(r.attack->values.size()) == r.horizon,
            "attack length must equal the horizon");
  }
  return r;
}

void run_pd_surface(const ExperimentOptions& opt) {
  const double pfa = opt.p_false_alarm.value_or(0.05);
  require(pfa > 0.0 && pfa < 1.0, "p_false_alarm must lie in (0, 1)");
  CsvWriter csv(opt.out_path);
  csv.metadata("experiment", "pd-surface");
  csv.metadata("p_false_alarm", pfa);
  csv.header({"q", "lambda", "p_false_alarm", "threshold", "p_detect"});
  for (int q = 1; q <= 20; ++q) {
    const double tau = chi2_quantile(q, pfa);
    for (int l = 0; l <= 40; ++l) {
      const double lambda = 2.0 * l;
      csv.row({double(q), lambda, pfa, tau,
               noncentral_chi2_tail(q, lambda, tau)});
    }
  }
}

void run_detect(const ExperimentOptions& opt) {
  Resolved r = resolve_scenario(opt, /*default_attack=*/true);
  const DetectionSetup setup =
      build_setup(batch_structure(r.system, r.mechanisms, r.horizon, 0));

  CsvWriter csv(opt.out_path);
  csv.metadata("experiment", "detect");
  csv.metadata("seed", double(opt.seed));
  csv.metadata("horizon", double(r.horizon));
  csv.metadata("q", double(setup.q));
  csv.header({"hypothesis", "statistic", "threshold", "detected", "lambda",
              "p_detect_analytic"});

  auto emit = [&](int hypothesis, const AttackSignal* atk,
                  std::uint64_t seed) {
    const Trajectory traj = atk ? simulate(r.system, *atk, r.horizon, seed)
                                : simulate(r.system, r.horizon, seed);
    const AggregatedBatch agg =
        aggregate(r.system, traj, r.mechanisms, seed, 0);
    const TestResult res = glrt(setup, residual(setup, agg), r.pfa);
    double lambda = 0.0, pd = r.pfa;
    if (atk) {
      const Vector a =
          stack_attack(r.system.subsystems[0].B_a, atk->values);
      const DetectionParameters dp = detection_parameters(setup, a);
      lambda = dp.lambda;
      pd = detection_probability(int(setup.q), lambda, r.pfa).p_detect;
    }
    csv.row({double(hypothesis), res.statistic, res.threshold,
             res.attack_detected ? 1.0 : 0.0, lambda, pd});
  };

  emit(0, nullptr, derive_seed(opt.seed, 0, StreamKind::kTrial));
  if (r.attack) {
    emit(1, &*r.attack, derive_seed(opt.seed, 1, StreamKind::kTrial));
  }
}

void run_montecarlo(const ExperimentOptions& opt) {
  Resolved r = resolve_scenario(opt, /*default_attack=*/true);
  require(opt.trials >= 1, "trials must be >= 1");
  const DetectionSetup setup =
      build_setup(batch_structure(r.system, r.mechanisms, r.horizon, 0));

  CsvWriter csv(opt.out_path);
  csv.metadata("experiment", "montecarlo");
  csv.metadata("seed", double(opt.seed));
  csv.metadata("horizon", double(r.horizon));
  csv.metadata("q", double(setup.q));
  csv.header({"hypothesis", "trials", "rejections", "empirical_rate",
              "analytic_rate", "three_sigma"});

  auto run_side = [&](int hypothesis, const AttackSignal* atk,
                      double analytic, std::uint64_t salt) {
    const int rej = count_rejections(
        [&](std::uint64_t ts) {
          const Trajectory traj = atk
                                      ? simulate(r.system, *atk, r.horizon, ts)
                                      : simulate(r.system, r.horizon, ts);
          const AggregatedBatch agg =
              aggregate(r.system, traj, r.mechanisms, ts, 0);
          return glrt(setup, residual(setup, agg), r.pfa).attack_detected;
        },
        opt.trials, derive_seed(opt.seed, salt, 0x4dcULL));
    const double rate = double(rej) / opt.trials;
    csv.row({double(hypothesis), double(opt.trials), double(rej), rate,
             analytic,
             3.0 * std::sqrt(analytic * (1.0 - analytic) / opt.trials)});
  };

  run_side(0, nullptr, r.pfa, 11);
  if (r.attack) {
    const Vector a =
        stack_attack(r.system.subsystems[0].B_a, r.attack->values);
    const DetectionParameters dp = detection_parameters(setup, a);
    run_side(1, &*r.attack,
             detection_probability(int(dp.q), dp.lambda, r.pfa).p_detect, 13);
  }
}

void run_privacy_compare(const ExperimentOptions& opt) {
  Resolved r = resolve_scenario(opt, /*default_attack=*/false);

  CsvWriter csv(opt.out_path);
  csv.metadata("experiment", "privacy-compare");
  csv.metadata("horizon", double(r.horizon));
  csv.header({"set_candidate", "set_baseline", "neighbor",
              "subspace_contained", "covariance_dominated", "more_private",
              "sufficient_condition", "trace_sigma_e_candidate",
              "trace_sigma_e_baseline"});

  std::vector<std::pair<int, int>> pairs;
  std::vector<std::vector<PrivacyMechanism>>* sets = nullptr;
  std::vector<std::vector<PrivacyMechanism>> config_sets;
  if (r.builtin) {
    sets = &r.all_sets;
    pairs = {{1, 0}, {2, 1}, {2, 0}};
  } else {
    require(!r.mechanisms_alt.empty(),
            "privacy-compare needs [mechanism2 ...] sections in the config");
    config_sets = {r.mechanisms, r.mechanisms_alt};
    sets = &config_sets;
    pairs = {{1, 0}};
  }

  for (const auto& [cand, base] : pairs) {
    std::size_t m = 0;
    for (std::size_t j = 0; j < r.system.subsystems.size(); ++j) {
      if (j == 0) continue;  // detector
      const auto& sub = r.system.subsystems[j];
      const auto& mc = (*sets)[cand][m];
      const auto& mb = (*sets)[base][m];
      const PrivacyComparison cmp =
          is_more_private(mc, mb, sub.C, sub.sigma_v, r.horizon);
      const double te_c =
          assess_privacy(mc, sub.C, sub.sigma_v, r.horizon).sigma_e.trace();
      const double te_b =
          assess_privacy(mb, sub.C, sub.sigma_v, r.horizon).sigma_e.trace();
      csv.row({double(cand), double(base), double(j + 1),
               cmp.subspace_contained ? 1.0 : 0.0,
               cmp.covariance_dominated ? 1.0 : 0.0,
               cmp.more_private ? 1.0 : 0.0,
               sufficient_condition_more_private(mc, mb) ? 1.0 : 0.0, te_c,
               te_b});
      ++m;
    }
  }
}

void run_tradeoff_map(const ExperimentOptions& opt) {
  Resolved r = resolve_scenario(opt, /*default_attack=*/false);
  std::vector<PrivacyMechanism> base, cand;
  if (r.builtin) {
    base = r.all_sets[0];
    cand = r.all_sets[2];
  } else {
    require(!r.mechanisms_alt.empty(),
            "tradeoff-map needs [mechanism2 ...] sections in the config");
    base = r.mechanisms;
    cand = r.mechanisms_alt;
  }
  const DetectionSetup s1 =
      build_setup(batch_structure(r.system, base, r.horizon, 0));
  const DetectionSetup s2 =
      build_setup(batch_structure(r.system, cand, r.horizon, 0));

  std::vector<std::pair<double, double>> grid;
  const double top = 50.0;
  for (int i = 0; i <= 25; ++i) {
    for (int j = 0; j <= 25; ++j) {
      grid.emplace_back(top * i / 25.0, top * j / 25.0);
    }
  }
  const auto region =
      admissible_region(s1.Lambda, s2.Lambda, s1.q, s2.q, grid, r.pfa);
  const GeneralizedEigen ge = generalized_eigenpairs(s1.Lambda, s2.Lambda);

  CsvWriter csv(opt.out_path);
  csv.metadata("experiment", "tradeoff-map");
  csv.metadata("q_baseline", double(s1.q));
  csv.metadata("q_candidate", double(s2.q));
  csv.metadata("mu_min", ge.values(0));
  csv.metadata("mu_max", ge.values(ge.values.size() - 1));
  csv.header({"lambda_candidate", "lambda_baseline", "admissible",
              "p_detect_baseline", "p_detect_candidate"});
  for (const auto& pt : region) {
    csv.row({pt.lambda2, pt.lambda1, pt.admissible ? 1.0 : 0.0, pt.pd1,
             pt.pd2});
  }
}

void run_noise_sweep(const ExperimentOptions& opt) {
  Resolved r = resolve_scenario(opt, /*default_attack=*/true);
  require(r.attack.has_value(), "noise-sweep needs an attack");

  std::vector<PrivacyMechanism> base;
  if (r.builtin) {
    // Full sharing with identity-shaped noise, so the scale sweep moves
    // every shared coordinate.
    for (std::size_t j = 1; j < r.system.subsystems.size(); ++j) {
      const Eigen::Index p = r.system.subsystems[j].output_dim();
      base.push_back({Matrix::Identity(p, p), Matrix::Identity(p, p)});
    }
  } else {
    base = r.mechanisms;
  }

  const std::vector<double> scales = {0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0};
  const auto curve =
      strict_tradeoff_check(r.system, base, scales, *r.attack, r.pfa, 0);

  CsvWriter csv(opt.out_path);
  csv.metadata("experiment", "noise-sweep");
  csv.metadata("horizon", double(r.horizon));
  csv.header({"noise_scale", "q", "lambda", "p_detect"});
  for (const auto& pt : curve) {
    csv.row({pt.scale, double(pt.q), pt.lambda, pt.p_detect});
  }
}

void run_noise_design(const ExperimentOptions& opt) {
  Resolved r = resolve_scenario(opt, /*default_attack=*/false);
  std::vector<PrivacyMechanism> mechs =
      r.builtin ? r.all_sets[2] : r.mechanisms;

  // Baseline problem to learn the noise-free floors g_j.
  NoiseDesignProblem prob = build_noise_design(
      r.system, mechs, r.horizon,
      std::vector<double>(mechs.size(), 0.0), 0);

  CsvWriter csv(opt.out_path);
  csv.metadata("experiment", "noise-design");
  csv.metadata("horizon", double(r.horizon));
  csv.metadata("l_constant", prob.l);
  std::vector<std::string> cols = {"eps_scale"};
  for (std::size_t j = 0; j < prob.G.size(); ++j) {
    cols.push_back("eps_target_" + std::to_string(j + 2));
    cols.push_back("eps_" + std::to_string(j + 2));
  }
  // `cost` is the unrestricted optimum; `cost_isotropic` restricts each
  // neighbor's noise to sigma^2 I, which is the natural scalar design.
  // The optimum can stay flat when some shared direction never reaches
  // the detector's accuracy metric (singular cost block).
  cols.push_back("cost");
  cols.push_back("cost_isotropic");
  csv.header(cols);

  CsvWriter sig(opt.out_path + ".sigma.csv");
  sig.metadata("experiment", "noise-design");
  sig.header({"eps_scale", "neighbor", "row", "col", "value"});

  for (int step = 0; step <= 10; ++step) {
    const double s = 0.2 * step;
    for (std::size_t j = 0; j < prob.G.size(); ++j) {
      prob.eps_desired[j] = (1.0 + s) * prob.g[j];
      prob.eps[j] =
          std::max(0.0, (prob.eps_desired[j] - prob.g[j]) / prob.T);
    }
    const NoiseDesignSolution sol = solve_noise_design(prob);
    double iso_cost = prob.l;
    for (std::size_t j = 0; j < prob.G.size(); ++j) {
      if (prob.eps[j] <= 0.0) continue;
      const double c = prob.eps[j] / prob.G[j].trace();
      iso_cost += c * prob.L_blocks[j].trace();
    }
    std::vector<double> row = {s};
    for (std::size_t j = 0; j < prob.G.size(); ++j) {
      row.push_back(prob.eps_desired[j]);
      row.push_back(prob.eps[j]);
    }
    row.push_back(sol.cost);
    row.push_back(iso_cost);
    csv.row(row);
    for (std::size_t j = 0; j < sol.sigma.size(); ++j) {
      for (Eigen::Index a = 0; a < sol.sigma[j].rows(); ++a) {
        for (Eigen::Index b = 0; b < sol.sigma[j].cols(); ++b) {
          sig.row({s, double(j + 2), double(a), double(b),
                   sol.sigma[j](a, b)});
        }
      }
    }
  }
}

void run_powergrid_demo(const ExperimentOptions& opt) {
  ExperimentOptions base = opt;
  base.config_path.clear();
  Resolved r = resolve_scenario(base, /*default_attack=*/true);
  const Vector a = stack_attack(r.system.subsystems[0].B_a, r.attack->values);

  CsvWriter csv(opt.out_path);
  csv.metadata("experiment", "powergrid-demo");
  csv.metadata("seed", double(opt.seed));
  csv.metadata("horizon", double(r.horizon));
  csv.metadata("p_false_alarm", r.pfa);
  csv.header({"mech_set", "q", "lambda", "p_detect",
              "more_private_than_prev", "sufficient_vs_prev", "mc_rate"});

  const int demo_trials = std::min(opt.trials, 2000);
  for (std::size_t c = 0; c < r.all_sets.size(); ++c) {
    const auto& mechs = r.all_sets[c];
    const DetectionSetup setup =
        build_setup(batch_structure(r.system, mechs, r.horizon, 0));
    const DetectionParameters dp = detection_parameters(setup, a);
    const double pd =
        dp.q >= 1
            ? detection_probability(int(dp.q), dp.lambda, r.pfa).p_detect
            : kNan;

    double more_private = kNan, sufficient = kNan;
    if (c > 0) {
      bool all_more = true, all_suff = true;
      std::size_t m = 0;
      for (std::size_t j = 1; j < r.system.subsystems.size(); ++j) {
        const auto& sub = r.system.subsystems[j];
        all_more = all_more &&
                   is_more_private(mechs[m], r.all_sets[c - 1][m], sub.C,
                                   sub.sigma_v, r.horizon)
                       .more_private;
        all_suff = all_suff && sufficient_condition_more_private(
                                   mechs[m], r.all_sets[c - 1][m]);
        ++m;
      }
      more_private = all_more ? 1.0 : 0.0;
      sufficient = all_suff ? 1.0 : 0.0;
    }

    const int rej = count_rejections(
        [&](std::uint64_t ts) {
          const Trajectory traj = simulate(r.system, *r.attack, r.horizon, ts);
          const AggregatedBatch agg = aggregate(r.system, traj, mechs, ts, 0);
          return glrt(setup, residual(setup, agg), r.pfa).attack_detected;
        },
        demo_trials, derive_seed(opt.seed, 77 + c, 5));

    csv.row({double(c), double(setup.q), dp.lambda, pd, more_private,
             sufficient, double(rej) / demo_trials});
  }
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "pd-surface",     "detect",      "montecarlo", "privacy-compare",
      "tradeoff-map",   "noise-sweep", "noise-design", "powergrid-demo"};
  return names;
}

void run_experiment(const ExperimentOptions& opt) {
  if (opt.experiment == "pd-surface") return run_pd_surface(opt);
  if (opt.experiment == "detect") return run_detect(opt);
  if (opt.experiment == "montecarlo") return run_montecarlo(opt);
  if (opt.experiment == "privacy-compare") return run_privacy_compare(opt);
  if (opt.experiment == "tradeoff-map") return run_tradeoff_map(opt);
  if (opt.experiment == "noise-sweep") return run_noise_sweep(opt);
  if (opt.experiment == "noise-design") return run_noise_design(opt);
  if (opt.experiment == "powergrid-demo") return run_powergrid_demo(opt);
  throw std::invalid_argument("unknown experiment '" + opt.experiment + "'");
}

int count_rejections(const std::function<bool(std::uint64_t)>& trial,
                     int trials, std::uint64_t seed) {
  require(trials >= 1, "count_rejections: trials must be >= 1");
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const unsigned nthreads =
      std::min({hw, 8u, static_cast<unsigned>(trials)});
  if (nthreads <= 1) {
    int count = 0;
    for (int t = 0; t < trials; ++t) {
      count += trial(derive_seed(seed, t, StreamKind::kTrial)) ? 1 : 0;
    }
    return count;
  }
  std::vector<int> counts(nthreads, 0);
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < nthreads; ++w) {
    workers.emplace_back([&, w] {
      int local = 0;
      for (int t = static_cast<int>(w); t < trials;
           t += static_cast<int>(nthreads)) {
        local += trial(derive_seed(seed, t, StreamKind::kTrial)) ? 1 : 0;
      }
      counts[w] = local;
    });
  }
  for (auto& th : workers) th.join();
  int total = 0;
  for (int c : counts) total += c;
  return total;
}

}  // namespace privdet
