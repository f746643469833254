// One PASS/FAIL line per acceptance check; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cayley/analytic.hpp"
#include "cayley/job.hpp"
#include "cayley/solver.hpp"
#include "cayley/tree_oracle.hpp"

using namespace cayley;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) ok = false;
    if (!detail.empty()) detail += "; ";
    detail += (cond ? "" : "!") + what;
  }
};

std::string num(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GridFunction random_positive(const RulePtr& rule, std::mt19937_64& rng, double amplitude = 1.0) {
  std::uniform_real_distribution<double> eps(-amplitude, amplitude);
  std::vector<double> v(rule->size());
  for (auto& x : v) x = std::exp(eps(rng));
  return GridFunction(rule, std::move(v));
}

const std::vector<OddRational> kTaus = {OddRational(1, 3), OddRational(1, 1), OddRational(5, 3), OddRational(3, 1)};

Check analytic_fixed_points() {
  Check c;
  for (const auto& tau : kTaus) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto k = make_tau_kernel(tau, TauConstantVariant::Corrected);
    const auto rule = default_rule_for(k, 64);
    const DiscreteOperator op(k, rule);
    const double r2 = verify_fixed_point(op, analytic_f2(tau, rule), "f2").residual_sup;
    const auto a1 = op.apply_A(analytic_f1(rule));
    double r1 = 0.0;
    for (double x : a1.image.values) r1 = std::max(r1, std::abs(x - 1.0));
    const double secs = seconds_since(t0);
    c.require(a1.ok() && r2 < 1e-8 && r1 < 1e-10 && secs < 1.0,
              "tau=" + tau.str() + " |Af2-f2|=" + num(r2) + " |Af1-1|=" + num(r1) + " t=" + num(secs) + "s");
  }
  return c;
}

Check non_uniqueness() {
  Check c;
  SolverConfig cfg;
  const auto pts = multistart_search(make_tau_kernel(OddRational(1, 1), TauConstantVariant::Corrected), cfg, 20);
  const double d = pts.size() == 2 ? sup_distance(pts[0].f, pts[1].f) : -1.0;
  c.require(pts.size() == 2, "distinct=" + std::to_string(pts.size()));
  c.require(d >= 1.9 && d <= 2.1, "sup distance=" + num(d));
  return c;
}

Check constant_discrepancy() {
  Check c;
  const OddRational tau(1, 1);
  const auto k = make_tau_kernel(tau, TauConstantVariant::Printed);
  const auto rule = default_rule_for(k, 64);
  const auto r = verify_fixed_point(k, analytic_f2(tau, rule), "f2");
  double closed = 0.0;
  double image_err = 0.0;
  for (std::size_t i = 0; i < rule->size(); ++i) {
    const double t = rule->nodes[i];
    const double img = (18.0 + 2.0 * (t - 0.5)) / 17.0;
    closed = std::max(closed, std::abs(img - tau_f2_value(tau, t)));
    image_err = std::max(image_err, std::abs(img - r.image[i]));
  }
  c.require(r.residual_sup >= 1.8 && r.residual_sup <= 2.0, "residual_sup=" + num(r.residual_sup));
  c.require(std::abs(r.residual_sup - closed) <= 1e-9, "closed form=" + num(closed));
  c.require(image_err <= 1e-9, "image vs closed form=" + num(image_err));
  return c;
}

Check degenerate_families() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> coupling(-2.0, 2.0);
  const auto rule = gauss_legendre(64);
  double ising = 0.0, potts = 0.0;
  bool images_ok = true;
  for (int s = 0; s < 100; ++s) {
    const CouplingParams p{0.0, coupling(rng), 0.0, coupling(rng), 1.0};
    const auto f = random_positive(rule, rng);
    const auto a = apply_A(make_ising_kernel(p), f);
    images_ok = images_ok && a.ok();
    for (double x : a.image.values) ising = std::max(ising, std::abs(x - 1.0));
  }
  for (int s = 0; s < 100; ++s) {
    const CouplingParams p{0.0, coupling(rng), coupling(rng), coupling(rng), 1.0};
    const auto f = random_positive(rule, rng);
    const auto a = apply_A(make_potts_kernel(p, PottsMode::reduced), f);
    images_ok = images_ok && a.ok();
    for (double x : a.image.values) potts = std::max(potts, std::abs(x - 1.0));
  }
  const double secs = seconds_since(t0);
  c.require(images_ok && ising < 1e-10, "ising max|Af-1|=" + num(ising));
  c.require(images_ok && potts < 1e-10, "potts max|Af-1|=" + num(potts));
  c.require(secs < 5.0, "t=" + num(secs) + "s");
  return c;
}

Check positivity() {
  Check c;
  for (int p : {1, 3, 5, 7, 9}) {
    const auto s = positivity_scan(make_tau_kernel(OddRational(p, 1), TauConstantVariant::Printed), 201);
    const bool want_positive = p >= 7;
    c.require(want_positive ? s.min_value > 0.0 : s.min_value < 0.0, "printed tau=" + std::to_string(p) + " min=" + num(s.min_value));
  }
  const auto s = positivity_scan(make_tau_kernel(OddRational(1, 1), TauConstantVariant::Corrected), 201);
  c.require(std::abs(s.min_value - (-16.75)) <= 0.05,
            "corrected tau=1 min=" + num(s.min_value) + " at (" + num(s.argmin[0]) + "," + num(s.argmin[1]) + "," +
                num(s.argmin[2]) + ") expected -16.75+-0.05");
  return c;
}

Check separability_reduction() {
  Check c;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> coupling(-2.0, 2.0);
  std::uniform_real_distribution<double> beta(0.2, 2.0);
  const auto rule = gauss_legendre(64);
  std::vector<Kernel> kernels;
  for (int s = 0; s < 10; ++s) kernels.push_back(make_ising_kernel({0.0, 0.0, coupling(rng), coupling(rng), beta(rng)}));
  for (int s = 0; s < 3; ++s)
    kernels.push_back(make_potts_kernel({0.0, 0.0, coupling(rng), coupling(rng), beta(rng)}, PottsMode::reduced));
  kernels.push_back(make_ising_kernel({0, 0, 0, 0, 1}));
  int separable = 0;
  double defect = 0.0;
  double mismatch = 0.0;
  for (const auto& k : kernels) {
    const auto rep = separability_test(k, 17, 1e-10);
    defect = std::max(defect, rep.max_mixed_defect);
    if (!rep.separable) continue;
    ++separable;
    const auto pk = reduce_to_pair_kernel(k, rep);
    for (int s = 0; s < 10; ++s) {
      const auto f = random_positive(rule, rng);
      mismatch = std::max(mismatch, sup_distance(apply_A(k, f).image, apply_pair_operator(pk, f)));
    }
  }
  c.require(separable == static_cast<int>(kernels.size()),
            "separable " + std::to_string(separable) + "/" + std::to_string(kernels.size()) + " max defect=" + num(defect));
  c.require(mismatch <= 1e-12, "pair operator vs A=" + num(mismatch));
  return c;
}

Check sum_kernel_uniqueness() {
  Check c;
  const auto k = make_sum_kernel([](double t, double u) { return std::exp(t * u); });
  const DiscreteOperator op(k, gauss_legendre(64));
  SolverConfig cfg;
  std::mt19937_64 rng(4101);
  int converged = 0, ti = 0;
  for (int s = 0; s < 50; ++s) {
    const auto f0 = random_positive(op.rule(), rng);
    const auto g0 = random_positive(op.rule(), rng);
    const auto r = solve_period_two(op, cfg, f0, g0);
    if (r.ok()) {
      ++converged;
      if (r.pair.classification == Classification::translation_invariant) ++ti;
    }
  }
  c.require(converged == 50 && ti == 50,
            "period-two converged " + std::to_string(converged) + "/50 translation-invariant " + std::to_string(ti));
  const auto pts = multistart_search(op, cfg, 20);
  c.require(pts.size() == 1, "distinct fixed points from 20 starts=" + std::to_string(pts.size()));
  return c;
}

Check tree_oracle() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto tree = build_tree(2);
  const CouplingParams p{0.0, 0.0, 0.5, 0.0, 1.0};
  const int m = 7;
  const auto field = solver_boundary_field(tree, make_ising_kernel(p), m, SolverConfig{});
  const double solved = compatibility_residual(tree, p, ising_interactions(), field, m).residual;
  const double zero =
      compatibility_residual(tree, p, ising_interactions(), BoundaryField::zero(tree, trapezoid_rule(m)->nodes), m)
          .residual;
  const double secs = seconds_since(t0);
  c.require(solved < 1e-6, "solver h residual=" + num(solved));
  c.require(zero > 1e-2, "h=0 residual=" + num(zero));
  c.require(secs < 60.0, "t=" + num(secs) + "s");
  return c;
}

Check numerics_hygiene() {
  Check c;
  double worst = 0.0;
  for (int n : {2, 8, 32}) {
    const auto rule = gauss_legendre(n);
    for (int d = 0; d <= 2 * n - 1; ++d)
      worst = std::max(worst, std::abs(integrate([d](double t) { return std::pow(t, d); }, *rule) - 1.0 / (d + 1)));
  }
  c.require(worst <= 1e-13, "GL exactness err=" + num(worst));

  std::mt19937_64 rng(9);
  double scale = 0.0;
  const std::vector<Kernel> kernels = {make_ising_kernel({0.4, -0.3, 1.2, 0.5, 1.5}),
                                       make_tau_kernel(OddRational(1, 1), TauConstantVariant::Corrected),
                                       make_sum_kernel([](double t, double u) { return std::exp(t * u); })};
  for (const auto& k : kernels) {
    const DiscreteOperator op(k, default_rule_for(k, 64));
    for (int s = 0; s < 5; ++s) {
      const auto f = k.tau() ? analytic_f2(*k.tau(), op.rule()) : random_positive(op.rule(), rng);
      const auto base = op.apply_A(f);
      for (double cst : {0.1, 7.3}) scale = std::max(scale, sup_distance(base.image, op.apply_A(f.scaled(cst)).image));
    }
  }
  c.require(scale < 1e-12, "scale invariance=" + num(scale));

  double moment = 0.0;
  for (const auto& tau : kTaus) {
    const auto mp = moment_integrals(tau, 64);
    const double target = std::pow(4.0, -tau.value()) / (2.0 * tau.value() + 1.0);
    moment = std::max({moment, std::abs(mp.I2 - target), std::abs(mp.I2_quadrature - target)});
  }
  c.require(moment <= 1e-12, "I2 err=" + num(moment));
  return c;
}

Check determinism() {
  Check c;
  const std::vector<std::string> jobs = {
      "command = solve\nkernel = tau\ntau = 1/1\nvariant = corrected\nstarts = 20\nseed = 42\n",
      "command = solve-period2\nkernel = sum\nzeta = exp_tu\nstarts = 10\nseed = 7\n",
      "command = verify-analytic\nkernel = tau\ntau = 5/3\nvariant = printed\nsamples = 10\nseed = 3\n",
      "command = scan-positivity\nkernel = tau\ntau = 1\nvariant = corrected\nresolution = 201\n",
      "command = check-separability\nkernel = ising\nJ1 = 0.5\nalpha = 0.2\n",
      "command = oracle-check\nkernel = ising\nJ1 = 0.5\ngrid = 7\n",
      "command = sweep\nkernel = tau\nvariant = printed\nsweep_tau = 1,3,5,7,9\nresolution = 101\n",
  };
  for (const auto& text : jobs) {
    const auto job = parse_config(text);
    const auto a = execute(job);
    const auto b = execute(job);
    const bool same = payload_without_timestamp(a.report) == payload_without_timestamp(b.report) && a.csv == b.csv;
    c.require(same, job.command + (same ? " identical" : " differs"));
  }
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> checks = {
      {"1 analytic fixed points, corrected constant", analytic_fixed_points},
      {"2 two distinct fixed points for tau=1", non_uniqueness},
      {"3 printed constant residual", constant_discrepancy},
      {"4 ising and potts operators are degenerate", degenerate_families},
      {"5 kernel positivity scans", positivity},
      {"6 separability and pair reduction", separability_reduction},
      {"7 sum kernel exp(tu) uniqueness", sum_kernel_uniqueness},
      {"8 tree compatibility oracle", tree_oracle},
      {"9 numerics hygiene", numerics_hygiene},
      {"10 deterministic reports", determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : checks) {
    Check c;
    try {
      c = fn();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    if (!c.ok) ++failed;
    std::printf("%s [%s] %s\n", c.ok ? "PASS" : "FAIL", name.c_str(), c.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu passed\n", static_cast<int>(checks.size()) - failed, checks.size());
  return failed == 0 ? 0 : 1;
}
