#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <autoconv/certify.hpp>
#include <autoconv/constants.hpp>
#include <autoconv/io.hpp>
#include <autoconv/objective.hpp>
#include <autoconv/search.hpp>
#include <autoconv/version.hpp>

using namespace autoconv;

namespace {

int threads_default() {
  const char* env = std::getenv("AUTOCONV_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 0 || v > 4096)
    throw DomainError("AUTOCONV_THREADS must be a nonnegative integer");
  return (int)v;
}

Rat parse_rational(const std::string& s, const char* what) {
  long long num = 0, den = 1;
  char extra = 0;
  if (std::sscanf(s.c_str(), "%lld/%lld %c", &num, &den, &extra) == 2) return Rat(num, den);
  if (std::sscanf(s.c_str(), "%lld %c", &num, &extra) == 1) return Rat(num, 1);
  throw DomainError(std::string(what) + " must be an integer or a fraction like 1/32");
}

void print_evaluation(const Profile& p, RangeMode mode) {
  Evaluation ev = objective(p, mode);
  std::printf("objective (%s) = %.10f\n", to_string(mode), ev.value);
  std::printf("argmax windows:");
  for (const Window& w : ev.argmax) std::printf(" (k=%d, l=%d)", w.k, w.ell);
  std::printf("\n");
}

struct EvalArgs {
  int n = 0;
  std::vector<double> coeffs;
  std::string file;
  std::string range = "proof";
  bool both = false;
  bool normalize = false;
};

int run_eval(const EvalArgs& a) {
  Profile p = a.file.empty()
                  ? make_profile(a.n, std::span<const double>(a.coeffs.data(), a.coeffs.size()),
                                 a.normalize)
                  : read_profile_text(a.file, a.n, a.normalize);
  std::printf("n = %d  mass = %.10f\n", p.n, p.mass());
  if (a.both) {
    print_evaluation(p, RangeMode::theorem);
    print_evaluation(p, RangeMode::proof);
  } else {
    print_evaluation(p, range_mode_from_string(a.range));
  }
  if (p.normalized())
    std::printf("step_sup = %.10f\n", step_sup(p));
  else
    std::printf("step_sup skipped: profile mass is not 4n (pass --normalize)\n");
  return 0;
}

struct CertifyArgs {
  int n = 0;
  long long m = 0;
  std::string range = "proof";
  std::string method = "cell-quadratic";
  int threads = 1;
  std::string margin;
  long long max_chunks = -1;
  double budget_s = -1.0;
  double checkpoint_every_s = 30.0;
  std::string checkpoint;
  std::string out;
};

int run_certify(const CertifyArgs& a) {
  const RangeMode mode = range_mode_from_string(a.range);
  const Method method = method_from_string(a.method);
  const MeshSpec mesh(a.n, a.m);

  CertifyOptions opt;
  opt.threads = a.threads;
  opt.max_chunks = a.max_chunks;
  opt.budget_s = a.budget_s;
  opt.checkpoint_every_s = a.checkpoint_every_s;
  if (!a.margin.empty()) opt.margin = parse_rational(a.margin, "--margin");
  if (!a.checkpoint.empty()) {
    std::string path = a.checkpoint;
    opt.save_checkpoint = [path](const Checkpoint& cp) {
      write_json_atomic(path, checkpoint_to_json(cp));
    };
  }

  if (mode == RangeMode::theorem)
    std::printf("note: the theorem range certifies the restricted window maximum; "
                "bounds on the autoconvolution constant need the proof range\n");

  CertifyOutcome out;
  if (!a.checkpoint.empty() && std::filesystem::exists(a.checkpoint)) {
    Checkpoint cp = load_checkpoint_file(a.checkpoint);
    if (cp.n != a.n || cp.m != a.m || cp.mode != mode || cp.method != method)
      throw CheckpointError("checkpoint does not match the requested run");
    if (!a.margin.empty() && cp.margin != opt.margin)
      throw CheckpointError("checkpoint margin differs from --margin");
    if (cp.phase >= 0)
      std::printf("resuming from checkpoint: phase %d, frontier %lld\n", cp.phase,
                  cp.next_first);
    out = resume(cp, opt);
  } else {
    out = method == Method::global_lipschitz ? certify_global(mesh, mode, opt)
                                             : certify_cells(mesh, mode, opt);
  }

  if (!out.complete()) {
    const Checkpoint& cp = *out.checkpoint;
    std::printf("stopped early at phase %d, frontier %lld (%llu points so far)\n", cp.phase,
                cp.next_first, cp.points_evaluated);
    if (a.checkpoint.empty())
      std::printf("warning: no --checkpoint path given, progress was discarded\n");
    else
      std::printf("resume with the same command to continue from %s\n", a.checkpoint.c_str());
    return 0;
  }

  const Certificate& cert = *out.certificate;
  std::printf("n = %d  m = %lld  range = %s  method = %s\n", cert.n, cert.m,
              to_string(cert.mode), to_string(cert.method));
  std::printf("lattice minimum    = %lld/%lld\n", (long long)cert.lattice_min.num,
              (long long)cert.lattice_min.den);
  std::printf("certified bound   >= %s\n", cert.certified.to_decimal_floor(6).c_str());
  std::printf("error term        <= %s\n", cert.error_term().to_decimal_ceil(6).c_str());
  std::printf("points evaluated   = %llu\n", cert.points_evaluated);
  std::printf("elapsed            = %.3f s\n", cert.elapsed_s);
  if (cert.mode == RangeMode::proof && cert.certified > Rat(0, 1)) {
    double sigma = sigma_upper_from_c_lower(cert.certified.to_double_floor());
    std::printf("sigma upper bound <= %.17g\n", sigma);
  }
  if (!a.out.empty()) {
    write_json_atomic(a.out, certificate_to_json(cert));
    std::printf("certificate written to %s\n", a.out.c_str());
  }
  return 0;
}

struct SearchArgs {
  int n = 0;
  std::uint64_t seed = 0;
  int restarts = 100;
  int iters = 10000;
  bool symmetric = false;
  std::string range = "proof";
  int threads = 1;
  std::string out;
};

int run_search(const SearchArgs& a) {
  SearchConfig cfg;
  cfg.n = a.n;
  cfg.mode = range_mode_from_string(a.range);
  cfg.seed = a.seed;
  cfg.restarts = a.restarts;
  cfg.max_iters = a.iters;
  cfg.symmetric = a.symmetric;
  cfg.threads = a.threads;
  SearchResult r = multistart(cfg);
  std::printf("n = %d  range = %s  seed = %llu  restarts = %d\n", r.n, to_string(r.mode),
              (unsigned long long)r.seed, r.restarts);
  std::printf("best value = %.10f  (upper bound for the mesh-free minimum)\n", r.best_value);
  std::printf("best restart = %d  iterations = %d\n", r.best_restart,
              r.per_restart[(std::size_t)r.best_restart].iterations);
  std::printf("step_sup   = %.10f\n", r.best_step_sup);
  std::printf("best profile:");
  for (double x : r.best_profile.coeffs) std::printf(" %.12g", x);
  std::printf("\n");
  if (!a.out.empty()) {
    write_json_atomic(a.out, search_result_to_json(r));
    std::printf("search result written to %s\n", a.out.c_str());
  }
  return 0;
}

struct ConvertArgs {
  double c = 0.0;
  double sigma = 0.0;
  std::vector<double> coeffs;
  int n = 0;
  bool has_c = false, has_sigma = false;
};

int run_convert(const ConvertArgs& a) {
  ScaledConstants sc;
  if (a.has_c) {
    sc = ScaledConstants::from_c(a.c);
  } else if (a.has_sigma) {
    sc = ScaledConstants::from_sigma(a.sigma);
  } else {
    if (a.n < 1) throw DomainError("--profile needs --n");
    Profile p =
        make_profile(a.n, std::span<const double>(a.coeffs.data(), a.coeffs.size()));
    double val = objective(p, RangeMode::proof).value;
    std::printf("proof objective = %.10f (treated as a value of c)\n", val);
    sc = ScaledConstants::from_c(val);
  }
  std::printf("c     = %.10f\n", sc.c_value);
  std::printf("sigma = %.10f\n", sc.sigma_value);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"autoconvolution lower-bound toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  EvalArgs ea;
  CLI::App* eval = app.add_subcommand("eval", "evaluate the windowed objective on a profile");
  eval->add_option("--n", ea.n, "half-length n (profile has 2n coefficients)")->required();
  auto* eopt_c = eval->add_option("--coeffs", ea.coeffs, "profile coefficients");
  auto* eopt_f = eval->add_option("--file", ea.file, "text file with 2n coefficients");
  eopt_c->excludes(eopt_f);
  eval->add_option("--range", ea.range, "window range: theorem|proof (default proof)");
  eval->add_flag("--both", ea.both, "evaluate both ranges");
  eval->add_flag("--normalize", ea.normalize, "rescale the profile to mass 4n");

  CertifyArgs ca;
  ca.threads = -2;  // sentinel: resolve from env after parsing
  CLI::App* certify = app.add_subcommand("certify", "certified lower bound over a lattice mesh");
  certify->add_option("--n", ca.n, "half-length n")->required();
  certify->add_option("--m", ca.m, "mesh mass (counts sum to m)")->required();
  certify->add_option("--range", ca.range, "window range: theorem|proof (default proof)");
  certify->add_option("--method", ca.method,
                      "global-lipschitz | cell-quadratic (default cell-quadratic)");
  certify->add_option("--threads", ca.threads, "worker threads (0 = all cores)");
  certify->add_option("--margin", ca.margin, "cell candidate margin (fraction, default 1/32)");
  certify->add_option("--max-chunks", ca.max_chunks, "stop resumably after this many chunks");
  certify->add_option("--budget-s", ca.budget_s, "stop resumably after this many seconds");
  certify->add_option("--checkpoint-every-s", ca.checkpoint_every_s,
                      "checkpoint interval in seconds (default 30)");
  certify->add_option("--checkpoint", ca.checkpoint, "checkpoint file to write and resume from");
  certify->add_option("--out", ca.out, "write the certificate JSON here");

  SearchArgs sa;
  sa.threads = -2;
  CLI::App* search = app.add_subcommand("search", "multistart descent for upper bounds");
  search->add_option("--n", sa.n, "half-length n")->required();
  search->add_option("--seed", sa.seed, "RNG seed (default 0)");
  search->add_option("--restarts", sa.restarts, "number of restarts (default 100)");
  search->add_option("--iters", sa.iters, "max descent iterations per restart (default 10000)");
  search->add_flag("--symmetric", sa.symmetric, "restrict to reflection-symmetric profiles");
  search->add_option("--range", sa.range, "window range: theorem|proof (default proof)");
  search->add_option("--threads", sa.threads, "worker threads (0 = all cores)");
  search->add_option("--out", sa.out, "write the search result JSON here");

  ConvertArgs va;
  CLI::App* convert = app.add_subcommand("convert", "convert between c and sigma scalings");
  auto* vopt_c = convert->add_option("--c", va.c, "value on the c scale");
  auto* vopt_s = convert->add_option("--sigma", va.sigma, "value on the sigma scale");
  auto* vopt_p = convert->add_option("--profile", va.coeffs, "profile to evaluate and convert");
  convert->add_option("--n", va.n, "half-length n for --profile");
  vopt_c->excludes(vopt_s);
  vopt_c->excludes(vopt_p);
  vopt_s->excludes(vopt_p);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (eval->parsed()) return run_eval(ea);
    if (certify->parsed()) {
      if (ca.threads == -2) ca.threads = threads_default();
      return run_certify(ca);
    }
    if (search->parsed()) {
      if (sa.threads == -2) sa.threads = threads_default();
      return run_search(sa);
    }
    if (convert->parsed()) {
      va.has_c = vopt_c->count() > 0;
      va.has_sigma = vopt_s->count() > 0;
      if (!va.has_c && !va.has_sigma && va.coeffs.empty())
        throw DomainError("convert needs one of --c, --sigma, or --profile");
      return run_convert(va);
    }
  } catch (const CheckpointError& e) {
    std::fprintf(stderr, "checkpoint error: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
