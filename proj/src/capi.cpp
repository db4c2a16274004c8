#include "htem/htem.h"

#include <cstdlib>
#include <cstring>
#include <json.hpp>
#include <memory>
#include <new>
#include <string>

#include "htem/drift.hpp"
#include "htem/error.hpp"
#include "htem/fraclap.hpp"
#include "htem/harness.hpp"
#include "htem/ledger.hpp"
#include "htem/metrics.hpp"
#include "htem/schemes.hpp"
#include "htem/stable.hpp"

struct htem_drift {
  htem::DriftModel model;
};

struct htem_ensemble {
  htem::TrajectoryEnsemble ensemble;
};

namespace {

thread_local std::string g_last_error;

htem_status to_status(htem::ErrorCode code) { return static_cast<htem_status>(code); }

// Runs fn, translating exceptions into status codes and the last-error text.
template <class F>
htem_status guarded(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return HTEM_OK;
  } catch (const htem::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return HTEM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HTEM_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return HTEM_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr)
    throw htem::Error(static_cast<htem::ErrorCode>(HTEM_ERR_NULL_ARGUMENT),
                      std::string(what) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

htem::ProgressFn wrap_progress(htem_progress_fn fn, void* user) {
  if (fn == nullptr) return {};
  return [fn, user](const std::string& line) { fn(line.c_str(), user); };
}

}  // namespace

extern "C" {

const char* htem_version(void) { return "1.0.0"; }

const char* htem_last_error(void) { return g_last_error.c_str(); }

const char* htem_status_name(htem_status s) {
  switch (s) {
    case HTEM_OK: return "Ok";
    case HTEM_ERR_DOMAIN: return "Domain";
    case HTEM_ERR_CONFIG_INVALID: return "ConfigInvalid";
    case HTEM_ERR_TRAJECTORY_DIVERGED: return "TrajectoryDiverged";
    case HTEM_ERR_DIMENSION_MISMATCH: return "DimensionMismatch";
    case HTEM_ERR_UNEQUAL_SAMPLE_COUNTS: return "UnequalSampleCounts";
    case HTEM_ERR_BOUND_VIOLATED: return "BoundViolated";
    case HTEM_ERR_LAMBDA_OUT_OF_RANGE: return "LambdaOutOfRange";
    case HTEM_ERR_MOMENT_UNDEFINED: return "MomentUndefined";
    case HTEM_ERR_MISSING_C2: return "MissingC2";
    case HTEM_ERR_TAIL_BOUND_UNAVAILABLE: return "TailBoundUnavailable";
    case HTEM_ERR_IO: return "Io";
    case HTEM_ERR_NULL_ARGUMENT: return "NullArgument";
    case HTEM_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

void htem_string_free(char* s) { std::free(s); }

htem_status htem_p_alpha(double alpha, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = htem::compute_p_alpha(alpha);
  });
}

htem_status htem_sigma(double alpha, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = htem::StableSpec(alpha, 1).sigma();
  });
}

htem_status htem_stable_abs_moment(double alpha, double p, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = htem::levy_abs_moment(alpha, 1, p);
  });
}

htem_status htem_sample(const char* kind, double alpha, double scale, uint64_t seed, size_t n,
                        double* out) {
  return guarded([&] {
    need(kind, "kind");
    need(out, "out");
    const std::vector<double> v = htem::sample_draws(kind, alpha, scale, n, seed);
    std::copy(v.begin(), v.end(), out);
  });
}

htem_status htem_sample_stream(const char* kind, double alpha, double scale, uint64_t seed,
                               uint64_t stream_id, size_t n, double* out) {
  return guarded([&] {
    need(kind, "kind");
    need(out, "out");
    const htem::StableSpec spec(alpha, 1);
    const std::string k = kind;
    htem::require(k == "stable" || k == "pareto", htem::ErrorCode::ConfigInvalid,
                  "sample kind must be 'stable' or 'pareto'");
    htem::require(k == "pareto" || scale > 0.0, htem::ErrorCode::Domain,
                  "scale must be positive");
    htem::RngStream stream(seed, stream_id);
    for (size_t i = 0; i < n; ++i)
      out[i] = k == "pareto" ? htem::sample_pareto_1d(stream, spec.alpha())
                             : htem::sample_stable_1d(stream, spec.alpha(), scale);
  });
}

htem_status htem_drift_create(const char* kind, double param, size_t dim, htem_drift** out) {
  return guarded([&] {
    need(kind, "kind");
    need(out, "out");
    htem::DriftSpec s;
    s.kind = kind;
    s.theta = param;
    s.a = param;
    s.dim = dim;
    *out = new htem_drift{htem::make_drift(s)};
  });
}

void htem_drift_destroy(htem_drift* drift) { delete drift; }

size_t htem_drift_dim(const htem_drift* drift) { return drift ? drift->model.dim() : 0; }

htem_status htem_drift_params(const htem_drift* drift, double out[6]) {
  return guarded([&] {
    need(drift, "drift");
    need(out, "out");
    const htem::DriftParams& p = drift->model.params();
    const double v[6] = {p.theta1, p.theta2, p.theta3, p.theta4, p.K, p.b0_norm};
    std::copy(v, v + 6, out);
  });
}

htem_status htem_drift_eval(const htem_drift* drift, const double* x, double* out) {
  return guarded([&] {
    need(drift, "drift");
    need(x, "x");
    need(out, "out");
    const std::size_t d = drift->model.dim();
    drift->model.eval({x, d}, {out, d});
  });
}

htem_status htem_drift_certify(const htem_drift* drift, size_t samples, double radius,
                               uint64_t seed, char** out_json) {
  return guarded([&] {
    need(drift, "drift");
    need(out_json, "out_json");
    const htem::CertificationReport r = htem::certify(drift->model, samples, radius, seed);
    nlohmann::ordered_json j;
    j["drift"] = drift->model.name();
    j["passed"] = r.passed;
    j["samples"] = r.samples;
    j["radius"] = r.radius;
    j["theta1"] = drift->model.params().theta1;
    j["max_jacobian_norm"] = r.max_jacobian_norm;
    j["jacobian_witness"] = r.jacobian_witness;
    j["jacobian_ok"] = r.jacobian_ok;
    j["worst_dissipativity_slack"] = r.worst_dissipativity_slack;
    j["dissipativity_witness_x"] = r.dissipativity_witness_x;
    j["dissipativity_witness_y"] = r.dissipativity_witness_y;
    j["dissipativity_ok"] = r.dissipativity_ok;
    j["message"] = r.message;
    *out_json = dup_string(j.dump(2));
  });
}

htem_status htem_simulate(const htem_drift* drift, double alpha, const char* scheme, double eta,
                          uint64_t n_steps, const double* x0, uint64_t seed, uint64_t n_traj,
                          htem_ensemble** out) {
  return guarded([&] {
    need(drift, "drift");
    need(scheme, "scheme");
    need(x0, "x0");
    need(out, "out");
    const std::size_t d = drift->model.dim();
    htem::SchemeConfig c;
    c.eta = eta;
    c.n_steps = n_steps;
    c.scheme = htem::parse_scheme(scheme);
    c.x0.assign(x0, x0 + d);
    c.seed = seed;
    c.n_traj = n_traj;
    auto e = std::make_unique<htem_ensemble>();
    e->ensemble = htem::simulate_ensemble(c, drift->model, htem::StableSpec(alpha, d));
    *out = e.release();
  });
}

void htem_ensemble_destroy(htem_ensemble* e) { delete e; }
size_t htem_ensemble_rows(const htem_ensemble* e) { return e ? e->ensemble.n_traj : 0; }
size_t htem_ensemble_cols(const htem_ensemble* e) { return e ? e->ensemble.dim : 0; }
const double* htem_ensemble_data(const htem_ensemble* e) {
  return e ? e->ensemble.terminal.data() : nullptr;
}
int htem_ensemble_stepsize_gate_ok(const htem_ensemble* e) {
  return e && e->ensemble.stepsize_gate_ok ? 1 : 0;
}

htem_status htem_ensemble_write(const htem_ensemble* e, const char* path, const char* format) {
  return guarded([&] {
    need(e, "ensemble");
    need(path, "path");
    need(format, "format");
    const std::string f = format;
    if (f == "csv")
      htem::write_ensemble_csv(e->ensemble, path);
    else if (f == "binary")
      htem::write_ensemble_binary(e->ensemble, path);
    else
      htem::fail(htem::ErrorCode::ConfigInvalid, "format must be 'csv' or 'binary'");
  });
}

htem_status htem_ensemble_csv(const htem_ensemble* e, char** out_csv) {
  return guarded([&] {
    need(e, "ensemble");
    need(out_csv, "out_csv");
    *out_csv = dup_string(htem::ensemble_csv(e->ensemble));
  });
}

htem_status htem_w1_1d(const double* x, const double* y, size_t n, double* out) {
  return guarded([&] {
    need(x, "x");
    need(y, "y");
    need(out, "out");
    *out = htem::w1_1d(htem::EmpiricalMeasure::from_1d({x, x + n}),
                       htem::EmpiricalMeasure::from_1d({y, y + n}))
               .value;
  });
}

htem_status htem_w1_sliced(const double* x, const double* y, size_t n, size_t d,
                           size_t n_projections, uint64_t seed, double* out) {
  return guarded([&] {
    need(x, "x");
    need(y, "y");
    need(out, "out");
    *out = htem::w1_sliced(htem::EmpiricalMeasure({x, x + n * d}, d),
                           htem::EmpiricalMeasure({y, y + n * d}, d), n_projections, seed)
               .value;
  });
}

htem_status htem_empirical_cf(const double* x, size_t n, size_t d, const double* u,
                              double* out_re, double* out_im) {
  return guarded([&] {
    need(x, "x");
    need(u, "u");
    need(out_re, "out_re");
    need(out_im, "out_im");
    const std::complex<double> c =
        htem::empirical_cf(htem::EmpiricalMeasure({x, x + n * d}, d), {u, u + d});
    *out_re = c.real();
    *out_im = c.imag();
  });
}

htem_status htem_mom_abs_moment(const double* x, size_t n, size_t d, double power,
                                size_t n_blocks, uint64_t seed, double* out_value,
                                double* out_std_error) {
  return guarded([&] {
    need(x, "x");
    need(out_value, "out_value");
    const htem::W1Estimate e =
        htem::mom_abs_moment(htem::EmpiricalMeasure({x, x + n * d}, d), power, n_blocks, seed);
    *out_value = e.value;
    if (out_std_error) *out_std_error = e.std_error;
  });
}

htem_status htem_frac_laplacian_1d(htem_scalar_fn f, void* user, double x, double alpha,
                                   double lipschitz, double second_difference, double* out_value,
                                   double* out_error) {
  return guarded([&] {
    need(reinterpret_cast<const void*>(f), "f");
    need(out_value, "out_value");
    htem::TailBound tb;
    if (lipschitz >= 0.0) tb.lipschitz = lipschitz;
    if (second_difference >= 0.0) tb.second_difference = second_difference;
    const htem::FracLaplResult r = htem::frac_laplacian_1d(
        [f, user](double v) { return f(v, user); }, x, htem::StableSpec(alpha, 1), {}, tb);
    *out_value = r.value;
    if (out_error) *out_error = r.error_estimate;
  });
}

htem_status htem_frac_laplacian_drift_at_zero(const htem_drift* drift, double alpha,
                                              double* out_value, double* out_error) {
  return guarded([&] {
    need(drift, "drift");
    need(out_value, "out_value");
    const htem::FracLaplResult r = htem::frac_laplacian_drift_at_zero(
        drift->model, htem::StableSpec(alpha, drift->model.dim()));
    *out_value = r.value;
    if (out_error) *out_error = r.error_estimate;
  });
}

htem_status htem_constants_json(const char* request_json, char** out_json) {
  return guarded([&] {
    need(request_json, "request_json");
    need(out_json, "out_json");
    *out_json = dup_string(htem::ConstantsRequest::from_json(request_json).evaluate().to_json());
  });
}

htem_status htem_oracle_ou_json(double alpha, double eta, char** out_json) {
  return guarded([&] {
    need(out_json, "out_json");
    *out_json = dup_string(htem::ou_oracle(alpha, eta).to_json());
  });
}

htem_status htem_ou_invariant_json(double alpha, double eta, uint64_t n, uint64_t seed,
                                   char** out_json) {
  return guarded([&] {
    need(out_json, "out_json");
    *out_json = dup_string(htem::ou_invariant_w1_check(alpha, eta, n, seed).to_json());
  });
}

htem_status htem_converge_json(const char* config_json, htem_progress_fn progress, void* user,
                               char** out_json, char** out_csv) {
  return guarded([&] {
    need(config_json, "config_json");
    need(out_json, "out_json");
    const htem::RateFit fit = htem::run_convergence(
        htem::ConvergenceStudy::from_json(config_json), wrap_progress(progress, user));
    std::unique_ptr<char, decltype(&std::free)> json(dup_string(fit.to_json()), &std::free);
    if (out_csv) *out_csv = dup_string(fit.csv());
    *out_json = json.release();
  });
}

htem_status htem_audit_json(const char* config_json, htem_progress_fn progress, void* user,
                            char** out_json, int* out_passed) {
  return guarded([&] {
    need(config_json, "config_json");
    need(out_json, "out_json");
    const htem::AuditReport r = htem::run_ergodicity_audit(
        htem::AuditConfig::from_json(config_json), wrap_progress(progress, user));
    *out_json = dup_string(r.to_json());
    if (out_passed) *out_passed = r.passed ? 1 : 0;
  });
}

}  // extern "C"
