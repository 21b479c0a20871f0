#include "bergman_lab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <random>

#include "bergman_lab/curvature.hpp"
#include "bergman_lab/hormander.hpp"
#include "bergman_lab/iteration.hpp"

namespace bergman_lab {

std::string config_hash(const Scenario& s) { return hex64(fnv1a64(s.canonical())); }

namespace {

Json point_json(const CVector& v) { return json_vector(v); }

Json convergence_json(const ConvergenceDiagnostic& c) {
  return Json{{"degree", c.degree},
              {"kernel_n", json_number(c.kernel_n)},
              {"kernel_n_minus_2", json_number(c.kernel_n_minus_2)},
              {"relative_change", json_number(c.relative_change)},
              {"converged", c.converged}};
}

Json curvature_json(const CurvatureReport& r) {
  Json j;
  j["field"] = r.field_name;
  j["trace"] = json_number(r.trace);
  j["bound"] = json_number(r.bound);
  j["margin"] = json_number(r.margin);
  j["tolerance"] = json_number(r.tolerance);
  j["reference"] = json_number(r.reference);
  j["trace_h"] = json_number(r.trace_h);
  j["trace_h2"] = json_number(r.trace_h2);
  j["fd_error"] = json_number(r.fd_error);
  j["hessian"] = json_matrix(r.hessian);
  j["convergence"] = convergence_json(r.convergence);
  for (const auto& [k, v] : r.extras) j[k] = json_number(v);
  return j;
}

Json hormander_json(const HormanderCheck& c) {
  Json j;
  Json value = Json::array(), scale = Json::array(), ratio = Json::array();
  for (double v : c.value) value.push_back(json_number(v));
  for (double v : c.scale) scale.push_back(json_number(v));
  for (double v : c.ratio) ratio.push_back(json_number(v));
  j["value"] = value;
  j["scale"] = scale;
  j["ratio"] = ratio;
  j["worst"] = json_number(c.worst);
  j["limit"] = json_number(c.limit);
  for (const auto& [k, v] : c.extras) j[k] = json_number(v);
  return j;
}

// Random psd Hessian with a positive definite fiber block.
HermitianMatrix random_psd(std::mt19937_64& rng, int size) {
  std::normal_distribution<double> g;
  CMatrix a(size, size);
  for (Index r = 0; r < size; ++r)
    for (Index c = 0; c < size; ++c) a(r, c) = cplx(g(rng), g(rng));
  HermitianMatrix h = a * a.adjoint() / static_cast<double>(size) + 0.1 * HermitianMatrix::Identity(size, size);
  return 0.5 * (h + h.adjoint());
}

// Lazily computed state shared by the checks of one run.
class Context {
 public:
  Context(const Scenario& s, int threads) : s_(s), threads_(threads) {}

  const Scenario& scenario() const { return s_; }
  int threads() const { return threads_; }

  const std::shared_ptr<const FiberSpace>& space() {
    if (!space_) space_ = s_.fiber_space();
    return space_;
  }

  const WeightCertificate& certificate() {
    if (!cert_) cert_ = certify(s_.weight, s_.sampling_grid(), threads_);
    return *cert_;
  }

  double eps0() { return s_.eps0 ? *s_.eps0 : certificate().eps0; }
  std::string eps0_source() const { return s_.eps0 ? "scenario" : "certified"; }

  CheckConfig check_config() {
    CheckConfig cfg;
    cfg.space = space();
    cfg.patch = s_.patch;
    cfg.h = s_.numerics.fd_step;
    cfg.tolerance = s_.numerics.tolerance;
    cfg.threads = threads_;
    return cfg;
  }

  const BergmanBasis& basis() {
    if (!basis_) basis_ = bergman_basis(s_.weight, s_.t0, space());
    return *basis_;
  }

  const CurvatureReport& log_report() {
    if (!log_) log_ = check_log_inequality(s_.weight, s_.sections, s_.t0, eps0(), check_config());
    return *log_;
  }

  const HormanderData& hormander() {
    if (!hormander_) hormander_ = hormander_data(s_.weight, s_.sections, s_.t0, space(), s_.numerics.fd_step, threads_);
    return *hormander_;
  }

  Json base_inputs() {
    return Json{{"t0", point_json(s_.t0)}, {"eps0", json_number(eps0())}, {"eps0_source", eps0_source()}};
  }

 private:
  const Scenario& s_;
  int threads_;
  std::shared_ptr<const FiberSpace> space_;
  std::optional<WeightCertificate> cert_;
  std::optional<BergmanBasis> basis_;
  std::optional<CurvatureReport> log_;
  std::optional<HormanderData> hormander_;
};

void set_verdict(CheckRecord& r, bool pass) { r.verdict = pass ? "pass" : "fail"; }

void from_curvature(CheckRecord& r, const CurvatureReport& c) {
  r.outputs = curvature_json(c);
  r.margin = c.margin;
  r.verdict = to_string(c.verdict);
}

// Fiber points used by the pointwise kernel checks: section points plus a
// few sampling-grid points.
std::vector<FiberPoint> probe_points(Context& ctx) {
  std::vector<FiberPoint> pts = section_points(ctx.scenario().sections, ctx.scenario().t0);
  const SamplingGrid grid = ctx.scenario().sampling_grid();
  const std::size_t step = std::max<std::size_t>(1, grid.fiber_points.size() / 6);
  for (std::size_t i = 0; i < grid.fiber_points.size() && pts.size() < 8; i += step) {
    // Stay away from the rim where the truncated kernel is unconverged.
    if (ctx.scenario().fiber.contains(grid.fiber_points[i], 0.4)) pts.push_back(grid.fiber_points[i]);
  }
  return pts;
}

void check_certify(Context& ctx, CheckRecord& r) {
  const WeightCertificate& c = ctx.certificate();
  r.inputs = Json{{"grid", c.grid_spec}, {"tolerance", 1e-9}};
  r.outputs = Json{{"eps0", json_number(c.eps0)},
                   {"C", json_number(c.C)},
                   {"psh_min_eig", json_number(c.psh_min_eig)},
                   {"min_schur_trace", json_number(c.min_schur_trace)},
                   {"min_fiber_eig", json_number(c.min_fiber_eig)},
                   {"fiber_positive", c.fiber_positive},
                   {"samples", c.samples},
                   {"positivity_notion", c.positivity_notion},
                   {"norm_convention", "dz-trivialized, Wirtinger trace"}};
  if (!c.diagnostics.empty()) r.outputs["diagnostics"] = c.diagnostics;
  const auto& stated = ctx.scenario().eps0;
  if (stated) {
    r.outputs["stated_eps0"] = *stated;
    r.margin = c.eps0 - *stated;
    set_verdict(r, *r.margin >= -ctx.scenario().numerics.tolerance);
    if (r.verdict == "fail") r.message = "stated eps0 exceeds the certified constant";
  } else {
    const double scale = std::max(1.0, std::abs(c.psh_min_eig));
    r.margin = c.psh_min_eig;
    set_verdict(r, c.fiber_positive && c.psh_min_eig >= -1e-9 * scale);
    if (r.verdict == "fail") r.message = "weight is not plurisubharmonic on the sampling grid";
  }
}

void check_schur_identity(Context& ctx, CheckRecord& r) {
  const Scenario& s = ctx.scenario();
  const int n = s.base_dim, d = s.fiber.dim();
  std::mt19937_64 rng(s.seed);
  double worst_random = 0.0;
  for (int k = 0; k < 50; ++k) {
    const ComplexHessian h = ComplexHessian::split(random_psd(rng, n + d), n);
    worst_random = std::max(worst_random, std::abs(ma_ratio(h, n, d) - schur_trace(h)));
  }
  double worst_weight = 0.0;
  const SamplingGrid grid = s.sampling_grid();
  int used = 0;
  for (std::size_t i = 0; i < grid.base_points.size() && used < 50; i += std::max<std::size_t>(1, grid.base_points.size() / 10))
    for (std::size_t j = 0; j < grid.fiber_points.size() && used < 50; j += std::max<std::size_t>(1, grid.fiber_points.size() / 5)) {
      const ComplexHessian h = s.weight.hessian(grid.base_points[i], grid.fiber_points[j]);
      if (min_eigenvalue(h.ff) <= 0.0) continue;
      const double scale = std::max(1.0, h.assembled().norm());
      worst_weight = std::max(worst_weight, std::abs(ma_ratio(h, n, d) - schur_trace(h)) / scale);
      ++used;
    }
  r.inputs = Json{{"seed", s.seed}, {"random_samples", 50}, {"n", n}, {"d", d}};
  r.outputs = Json{{"max_abs_error_random", worst_random}, {"max_rel_error_weight", worst_weight}, {"weight_samples", used}};
  const double worst = std::max(worst_random, worst_weight);
  r.margin = 1e-10 - worst;
  set_verdict(r, worst < 1e-10);
}

void check_trace_optimality(Context& ctx, CheckRecord& r) {
  const Scenario& s = ctx.scenario();
  const int n = s.base_dim, d = s.fiber.dim();
  std::mt19937_64 rng(s.seed + 1);
  std::normal_distribution<double> g;
  double min_gap = std::numeric_limits<double>::infinity(), worst_equality = 0.0;
  for (int k = 0; k < 100; ++k) {
    const ComplexHessian h = normalize_fiber_block(ComplexHessian::split(random_psd(rng, n + d), n));
    CMatrix lambda(n, d);
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < d; ++b) lambda(a, b) = cplx(g(rng), g(rng));
    const double st = schur_trace(h);
    min_gap = std::min(min_gap, trace_quadratic_form(h, lambda) - st);
    worst_equality = std::max(worst_equality, std::abs(trace_quadratic_form(h, h.tf) - st));
  }
  r.inputs = Json{{"seed", s.seed + 1}, {"samples", 100}};
  r.outputs = Json{{"min_gap", min_gap}, {"max_equality_error", worst_equality}};
  r.margin = std::min(min_gap + 1e-12, 1e-12 - worst_equality);
  set_verdict(r, min_gap >= -1e-12 && worst_equality <= 1e-12);
}

void check_distortion(Context& ctx, CheckRecord& r) {
  const int n = ctx.scenario().base_dim;
  const double eps0 = ctx.eps0();
  const std::vector<double> deltas{0.0, 0.05, 0.1, 0.2, 0.3};
  Json values = Json::array();
  bool monotone = true;
  double prev = std::numeric_limits<double>::infinity();
  for (double dl : deltas) {
    const double v = distortion_margin(n, dl, eps0);
    values.push_back(Json{{"delta", dl}, {"margin", v}});
    // Strictly decreasing in delta for eps0 > 0, identically zero otherwise.
    const bool ok = eps0 > 0.0 ? v < prev : v == 0.0;
    if (!ok) monotone = false;
    prev = v;
  }
  r.inputs = ctx.base_inputs();
  r.outputs = Json{{"n", n}, {"margins", values}, {"monotone", monotone}};
  set_verdict(r, monotone && distortion_margin(n, 0.0, eps0) == eps0);
}

void check_twist(Context& ctx, CheckRecord& r) {
  const Scenario& s = ctx.scenario();
  const WeightCertificate& c = ctx.certificate();
  const double twist = s.twist > 0.0 ? s.twist : c.C;
  const WeightCertificate tc = certify(twist_weight(s.weight, twist), s.sampling_grid(), ctx.threads());
  r.inputs = Json{{"C", json_number(twist)}, {"source", s.twist > 0.0 ? "scenario" : "certified"}};
  r.outputs = Json{{"base_min_eig_before", json_number(c.psh_min_eig)},
                   {"twisted_eps0", json_number(tc.eps0)},
                   {"twisted_psh_min_eig", json_number(tc.psh_min_eig)},
                   {"twisted_min_schur_trace", json_number(tc.min_schur_trace)}};
  // The twist must make the base block psd.
  double min_tt = std::numeric_limits<double>::infinity();
  const SamplingGrid grid = s.sampling_grid();
  for (const BasePoint& t : grid.base_points)
    for (const FiberPoint& xi : grid.fiber_points)
      min_tt = std::min(min_tt, min_eigenvalue(twist_weight(s.weight, twist).hessian(t, xi).tt));
  r.outputs["twisted_base_min_eig"] = json_number(min_tt);
  r.margin = min_tt;
  set_verdict(r, min_tt >= -1e-9 * std::max(1.0, twist));
}

void check_reproducing(Context& ctx, CheckRecord& r) {
  const BergmanBasis& b = ctx.basis();
  const MonomialBasis& mono = b.space->basis;
  const Index m = mono.size_up_to(std::min(5, b.degree));
  const FiberFunction h = [&](const FiberPoint& z) {
    const CVector v = mono.evaluate(z);
    cplx sum = 0.0;
    for (Index j = 0; j < m; ++j) sum += cplx(1.0 / (j + 1), 0.5 / (j + 2)) * v(j);
    return sum;
  };
  double worst = 0.0;
  const std::vector<FiberPoint> pts = probe_points(ctx);
  for (const FiberPoint& w : pts) worst = std::max(worst, reproducing_residual(b, h, w) / std::max(1.0, std::abs(h(w))));
  r.inputs = Json{{"t0", point_json(ctx.scenario().t0)}, {"test_degree", std::min(5, b.degree)}, {"points", pts.size()}};
  r.outputs = Json{{"max_residual", worst}, {"condition", json_number(b.condition)}};
  r.margin = 1e-8 - worst;
  set_verdict(r, worst < 1e-8);
}

void check_extremal(Context& ctx, CheckRecord& r) {
  const BergmanBasis& b = ctx.basis();
  double worst = 0.0;
  Json pairs = Json::array();
  for (const FiberPoint& w : probe_points(ctx)) {
    const auto [diag, ext] = extremal_check(b, w);
    worst = std::max(worst, std::abs(diag - ext) / std::max(diag, ext));
    pairs.push_back(Json{{"kernel_diagonal", diag}, {"extremal", ext}});
  }
  r.inputs = Json{{"t0", point_json(ctx.scenario().t0)}};
  r.outputs = Json{{"pairs", pairs}, {"max_rel_difference", worst}};
  r.margin = 1e-10 - worst;
  set_verdict(r, worst < 1e-10);
}

void check_kernel_symmetry(Context& ctx, CheckRecord& r) {
  const BergmanBasis& b = ctx.basis();
  const std::vector<FiberPoint> pts = probe_points(ctx);
  double worst = 0.0, scale = 0.0;
  for (const FiberPoint& z : pts)
    for (const FiberPoint& w : pts) {
      const cplx kzw = kernel_eval(b, z, w);
      worst = std::max(worst, std::abs(kzw - std::conj(kernel_eval(b, w, z))));
      scale = std::max(scale, std::abs(kzw));
    }
  const double rel = scale > 0.0 ? worst / scale : worst;
  r.outputs = Json{{"max_rel_asymmetry", rel}, {"points", pts.size()}};
  r.margin = 1e-12 - rel;
  set_verdict(r, rel < 1e-12);
}

void check_section_value(Context& ctx, CheckRecord& r) {
  const Scenario& s = ctx.scenario();
  const BergmanBasis& b = ctx.basis();
  const double value = section_value(b, s.sections);
  // Dual norm of u -> sum_k a_k u(s_k) computed from the monomial Gram matrix.
  CVector e = CVector::Zero(b.space->basis.size());
  for (int k = 0; k < s.sections.size(); ++k)
    e += s.sections.amplitude(k, s.t0) * b.space->basis.evaluate(s.sections.section(k, s.t0));
  Eigen::LDLT<CMatrix> ldlt(b.gram);
  const double brute = (e.transpose() * ldlt.solve(e.conjugate()))(0).real();
  const double rel = std::abs(value - brute) / std::max(std::abs(value), 1e-300);
  r.inputs = Json{{"t0", point_json(s.t0)}, {"sections", s.sections.size()}};
  r.outputs = Json{{"B", value}, {"gram_inverse_B", brute}, {"rel_difference", rel}};
  r.margin = 1e-8 - rel;
  set_verdict(r, rel < 1e-8 && value > 0.0);
}

void check_direct_image_gram(Context& ctx, CheckRecord& r) {
  const Scenario& s = ctx.scenario();
  const HermitianMatrix g = frame_gram(s.weight, s.frame, s.t0, *ctx.space());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(g);
  Json eig = Json::array();
  for (Index i = 0; i < es.eigenvalues().size(); ++i) eig.push_back(es.eigenvalues()(i));
  r.inputs = Json{{"frame", s.frame_source}, {"t0", point_json(s.t0)}};
  r.outputs = Json{{"gram", json_matrix(g)}, {"eigenvalues", eig}, {"hermitian_defect", hermitian_defect(g)}};
  const double min_eig = es.eigenvalues()(0);
  r.margin = min_eig;
  if (min_eig > 0.0) r.outputs["log_det"] = log_det_hpd(g);
  set_verdict(r, min_eig > 0.0 && hermitian_defect(g) < 1e-12);
}

void check_convergence(Context& ctx, CheckRecord& r) {
  const ConvergenceDiagnostic c = kernel_convergence(ctx.basis(), probe_points(ctx));
  r.outputs = convergence_json(c);
  r.margin = kConvergenceTolerance - c.relative_change;
  r.verdict = c.converged ? "pass" : "unconverged";
}

void check_section_ineq(Context& ctx, CheckRecord& r) {
  const Scenario& s = ctx.scenario();
  r.inputs = ctx.base_inputs();
  from_curvature(r, check_section_inequality(s.weight, s.sections, s.t0, ctx.eps0(), ctx.check_config()));
}

void check_log_ineq(Context& ctx, CheckRecord& r) {
  r.inputs = ctx.base_inputs();
  from_curvature(r, ctx.log_report());
}

void check_det_ineq(Context& ctx, CheckRecord& r) {
  const Scenario& s = ctx.scenario();
  r.inputs = ctx.base_inputs();
  r.inputs["frame"] = s.frame_source;
  from_curvature(r, check_det_inequality(s.weight, s.frame, s.t0, ctx.eps0(), ctx.check_config()));
}

void check_psh_spectrum(Context& ctx, CheckRecord& r) {
  const CurvatureReport& lr = ctx.log_report();
  const double min_eig = min_eigenvalue(lr.hessian);
  const double scale = std::max(1.0, lr.hessian.norm());
  r.inputs = ctx.base_inputs();
  r.outputs = Json{{"field", lr.field_name}, {"min_eigenvalue", min_eig}, {"scale", scale}, {"hessian", json_matrix(lr.hessian)}};
  r.margin = min_eig + 1e-6 * scale;
  set_verdict(r, *r.margin >= 0.0);
}

void check_lgg(Context& ctx, CheckRecord& r) {
  const CurvatureReport& lr = ctx.log_report();
  const double shifted = lr.extras.at("lgg_trace_over_b0");
  const bool same_verdict = (lr.extras.at("lgg_pass") == 1.0) == (lr.verdict == Verdict::pass);
  const double diff = std::abs(shifted - lr.trace);
  r.inputs = ctx.base_inputs();
  r.outputs = Json{{"log_trace", lr.trace},
                   {"shifted_trace_over_b0", shifted},
                   {"difference", diff},
                   {"log_verdict", to_string(lr.verdict)},
                   {"lgg_verdict", lr.extras.at("lgg_pass") == 1.0 ? "pass" : "fail"},
                   {"alpha_norm", lr.extras.at("lgg_alpha_norm")}};
  r.margin = lr.tolerance - diff;
  set_verdict(r, same_verdict && diff <= lr.tolerance);
}

void check_orthogonality(Context& ctx, CheckRecord& r) {
  const HormanderData& d = ctx.hormander();
  const HormanderCheck c = orthogonality_residual(d);
  const HormanderCheck raw = orthogonality_residual(d, true);
  r.inputs = ctx.base_inputs();
  r.outputs = hormander_json(c);
  r.outputs["negative_control_worst"] = json_number(raw.worst);
  r.margin = c.limit - c.worst;
  set_verdict(r, c.pass);
}

void check_dbar(Context& ctx, CheckRecord& r) {
  const HormanderData& d = ctx.hormander();
  const HormanderCheck c = dbar_identity_residual(d, ctx.scenario().weight);
  const HormanderCheck raw = dbar_identity_residual(d, ctx.scenario().weight, true);
  r.inputs = ctx.base_inputs();
  r.outputs = hormander_json(c);
  r.outputs["negative_control_worst"] = json_number(raw.worst);
  r.margin = c.limit - c.worst;
  set_verdict(r, c.pass);
}

void check_hormander_bound(Context& ctx, CheckRecord& r) {
  const HormanderCheck c = hormander_bound_check(ctx.hormander(), ctx.scenario().weight);
  r.inputs = ctx.base_inputs();
  r.outputs = hormander_json(c);
  r.margin = c.limit - c.worst;
  set_verdict(r, c.pass);
}

void check_assembled(Context& ctx, CheckRecord& r) {
  const Scenario& s = ctx.scenario();
  const AssembledBound a = assembled_lower_bound(s.weight, s.sections, s.t0, ctx.eps0(), ctx.check_config(), &ctx.hormander());
  r.inputs = ctx.base_inputs();
  r.outputs = Json{{"lhs", a.lhs},
                   {"intermediate", a.intermediate},
                   {"rhs", a.rhs},
                   {"section_value", a.section_value},
                   {"bound", a.bound},
                   {"tolerance", a.tolerance},
                   {"chain_margin", a.chain_margin},
                   {"bound_margin", a.bound_margin}};
  r.margin = std::min(a.chain_margin, a.bound_margin);
  set_verdict(r, a.pass);
}

void check_iteration(Context& ctx, CheckRecord& r) {
  const Scenario& s = ctx.scenario();
  IterationConfig cfg;
  cfg.check = ctx.check_config();
  cfg.start = s.iteration_start;
  cfg.base_points = {s.t0};
  if ((s.patch.center - s.t0).norm() > 0.0) cfg.base_points.push_back(s.patch.center);
  WeightFamily w = s.weight;
  if (s.twist > 0.0) {
    // Twisted run: the weight gains C|t|^2 and the slack delta_k is reported.
    w = twist_weight(s.weight, s.twist);
    cfg.twist = s.twist;
    cfg.eps0 = s.eps0 ? *s.eps0 : certify(w, s.sampling_grid(), ctx.threads()).eps0;
  } else {
    cfg.eps0 = ctx.eps0();
  }
  r.inputs = Json{{"m", s.iteration_m},
                  {"steps", s.iteration_steps},
                  {"start", s.iteration_start == IterationStart::flat ? "flat" : "bergman"},
                  {"eps0", json_number(cfg.eps0)},
                  {"twist", s.twist},
                  {"base_points", cfg.base_points.size()}};
  if (!(cfg.eps0 > 0.0)) {
    r.verdict = "error";
    r.message = "iteration needs a certified eps0 > 0";
    return;
  }
  const IterationLedger ledger = run_iteration(w, s.iteration_m, s.iteration_steps, cfg);
  Json steps = Json::array();
  double margin = std::numeric_limits<double>::infinity();
  for (const IterationStep& st : ledger.steps) {
    steps.push_back(Json{{"k", st.k},
                         {"weight_id", st.weight_id},
                         {"b_k", st.bound},
                         {"closed_form", st.closed_form},
                         {"measured_trace", st.measured_trace},
                         {"measured_schur", json_number(st.measured_schur)},
                         {"margin", st.margin},
                         {"delta", st.delta},
                         {"untwisted_trace", st.untwisted_trace},
                         {"potential_min", st.potential_min},
                         {"potential_max", st.potential_max},
                         {"normalized_min", st.normalized_min},
                         {"separable_defect", st.separable_defect},
                         {"kernel_change", st.kernel_change},
                         {"pass", st.pass}});
    margin = std::min(margin, st.margin + ledger.tolerance);
  }
  r.outputs = Json{{"target", ledger.target}, {"steps", steps}, {"aborted", ledger.aborted}};
  if (!ledger.steps.empty()) r.margin = margin - ledger.tolerance;
  if (ledger.aborted) {
    r.message = ledger.abort_reason;
    r.verdict = ledger.abort_reason.find("unconverged") != std::string::npos ? "unconverged" : "fail";
    return;
  }
  set_verdict(r, ledger.pass());
}

using CheckFn = void (*)(Context&, CheckRecord&);

const std::map<std::string, CheckFn>& registry() {
  static const std::map<std::string, CheckFn> fns{
      {"certify", check_certify},
      {"schur_identity", check_schur_identity},
      {"trace_optimality", check_trace_optimality},
      {"distortion", check_distortion},
      {"twist", check_twist},
      {"reproducing", check_reproducing},
      {"extremal", check_extremal},
      {"kernel_symmetry", check_kernel_symmetry},
      {"section_value", check_section_value},
      {"direct_image_gram", check_direct_image_gram},
      {"convergence", check_convergence},
      {"section_inequality", check_section_ineq},
      {"log_inequality", check_log_ineq},
      {"det_inequality", check_det_ineq},
      {"psh_spectrum", check_psh_spectrum},
      {"lgg_consistency", check_lgg},
      {"orthogonality", check_orthogonality},
      {"dbar_identity", check_dbar},
      {"hormander_bound", check_hormander_bound},
      {"assembled_bound", check_assembled},
      {"iteration", check_iteration},
  };
  return fns;
}

}  // namespace

RunReport run_checks(const Scenario& s, const std::vector<std::string>& checks, const RunOptions& opts) {
  RunReport report;
  report.scenario = s.id;
  report.config_hash = config_hash(s);
  report.config = s.echo();
  Context ctx(s, std::max(1, opts.threads));
  for (const std::string& name : checks) {
    const auto it = registry().find(name);
    if (it == registry().end()) throw Error(ErrorKind::invalid_argument, "unknown check '" + name + "'");
    CheckRecord r;
    r.check = name;
    const auto start = std::chrono::steady_clock::now();
    try {
      it->second(ctx, r);
    } catch (const Error& e) {
      r.verdict = e.kind() == ErrorKind::unconverged ? "unconverged" : "error";
      r.message = std::string(to_string(e.kind())) + ": " + e.what();
    } catch (const std::exception& e) {
      r.verdict = "error";
      r.message = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (opts.on_record) opts.on_record(r);
    report.records.push_back(std::move(r));
  }
  return report;
}

RunReport run_scenario(const Scenario& s, const RunOptions& opts) { return run_checks(s, s.checks, opts); }

const std::vector<std::string>& checks_for(const std::string& subcommand) {
  static const std::map<std::string, std::vector<std::string>> groups{
      {"certify-weight", {"certify", "schur_identity", "trace_optimality", "distortion", "twist"}},
      {"bergman", {"reproducing", "extremal", "kernel_symmetry", "section_value", "direct_image_gram", "convergence"}},
      {"curvature", {"section_inequality", "log_inequality", "det_inequality", "psh_spectrum", "lgg_consistency"}},
      {"hormander", {"orthogonality", "dbar_identity", "hormander_bound", "assembled_bound"}},
      {"iterate", {"iteration"}},
  };
  const auto it = groups.find(subcommand);
  if (it == groups.end()) throw Error(ErrorKind::invalid_argument, "no check group for '" + subcommand + "'");
  return it->second;
}

}  // namespace bergman_lab
