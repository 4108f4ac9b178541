#pragma once

// Command-line front end. `run_command` is the whole program; tools/pqnorm.cpp
// only forwards argv. All randomised subcommands take --seed (default 0, or
// PQNORM_SEED when set) and print deterministic JSON.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pqnorm/inversion.hpp"
#include "pqnorm/io.hpp"
#include "pqnorm/oracle.hpp"
#include "pqnorm/relaxation.hpp"
#include "pqnorm/rounding.hpp"
#include "pqnorm/specfn.hpp"

namespace pqnorm {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "inf", a decimal, or a fraction such as "4/3".
inline double parse_exponent(const std::string& s) {
  if (s == "inf" || s == "Inf" || s == "INF" || s == "infinity") return kInf;
  auto parse_plain = [&](const std::string& t) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      throw UsageError("bad exponent '" + s + "'");
    }
    if (used != t.size()) throw UsageError("bad exponent '" + s + "'");
    return v;
  };
  const auto slash = s.find('/');
  if (slash != std::string::npos) return parse_plain(s.substr(0, slash)) / parse_plain(s.substr(slash + 1));
  return parse_plain(s);
}

inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("PQNORM_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError("PQNORM_SEED must be a non-negative integer");
    }
  }
  return 0;
}

namespace detail {

inline json envelope(const std::string& command) { return json{{"schema", kSchema}, {"command", command}}; }

inline ExponentPair pair_from_flags(const std::string& p, const std::string& q) {
  try {
    return ExponentPair::from_pq(parse_exponent(p), parse_exponent(q));
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

inline Matrix random_matrix(Eigen::Index m, Eigen::Index n, Rng& rng) {
  Matrix A(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = rng.normal();
  return A;
}

}  // namespace detail

/// Runs one CLI invocation. Returns the process exit code:
/// 0 success, 1 numeric failure or failed verification, 2 usage error.
inline int run_command(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"p->q operator norm approximation and certification"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  bool seed_given = false;
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) {
      seed = s;
      seed_given = true;
    }, "random seed (default 0 or $PQNORM_SEED)");
  };

  // norm
  std::string file;
  std::string p_str = "inf";
  std::string q_str = "1";
  std::string method = "power";
  std::size_t starts = 20;
  std::size_t resolution = 720;
  std::size_t trials = 100;
  auto* norm = app.add_subcommand("norm", "estimate ||A||_{p->q}");
  norm->add_option("file", file, "matrix (CSV or JSON)")->required();
  norm->add_option("--p", p_str, "input exponent p (decimal or inf)");
  norm->add_option("--q", q_str, "output exponent q");
  norm->add_option("--method", method, "power | grid | cp | round")
      ->check(CLI::IsMember({"power", "grid", "cp", "round"}));
  norm->add_option("--starts", starts, "power-method starts");
  norm->add_option("--resolution", resolution, "grid resolution per angle");
  norm->add_option("--trials", trials, "rounding trials (method round)");
  add_seed(norm);

  // certify
  double grid_step = 0.0;
  bool use_certified = false;
  std::size_t truncation = kDefaultTruncation;
  auto* certify = app.add_subcommand("certify", "approximation ratio 1/(h^{-1}(1) gamma_{p*} gamma_q)");
  certify->add_option("--p", p_str, "input exponent p in [2, inf]");
  certify->add_option("--q", q_str, "output exponent q in [1, 2]");
  certify->add_option("--grid-step", grid_step, "also verify the sign pattern on a grid of this spacing");
  certify->add_flag("--certified", use_certified, "use the certified lower bound on h^{-1}(1)");
  certify->add_option("--K", truncation, "series truncation");

  // round
  auto* round = app.add_subcommand("round", "solve CP(A) and apply Krivine-type rounding");
  round->add_option("file", file, "matrix (CSV or JSON)")->required();
  round->add_option("--p", p_str, "input exponent p in [2, inf]");
  round->add_option("--q", q_str, "output exponent q in [1, 2]");
  round->add_option("--trials", trials, "independent Gaussian draws");
  add_seed(round);

  // verify
  auto* verify = app.add_subcommand("verify", "verification suites");
  verify->require_subcommand(1);
  std::size_t kmax = 29;
  double coeff_step = 0.05;
  auto* coeffs = verify->add_subcommand("coeffs", "coefficient sign conditions on a grid");
  coeffs->add_option("--kmax", kmax, "largest odd degree checked");
  coeffs->add_option("--grid-step", coeff_step, "grid spacing on [0,1]^2");

  double a_val = 0.0;
  double b_val = 0.0;
  double rho = 0.5;
  std::size_t samples = 1000000;
  auto* identity = verify->add_subcommand("identity", "Monte-Carlo check of the hypergeometric correlation identity");
  identity->add_option("--a", a_val, "a in [0,1]");
  identity->add_option("--b", b_val, "b in [0,1]");
  identity->add_option("--rho", rho, "correlation in [-1,1]");
  identity->add_option("--samples", samples, "Gaussian pairs");
  add_seed(identity);

  std::size_t count = 10;
  std::size_t size = 2;
  std::string kp = "2";
  std::string kq = "4";
  auto* kron = verify->add_subcommand("kron", "Kronecker multiplicativity for p <= q");
  kron->add_option("--p", kp, "p");
  kron->add_option("--q", kq, "q (>= p)");
  kron->add_option("--pairs", count, "random matrix pairs");
  kron->add_option("--size", size, "matrix dimension");
  add_seed(kron);

  std::string dp = "inf";
  std::string dq = "1";
  std::size_t instances = 20;
  std::size_t dsize = 3;
  auto* duality = verify->add_subcommand("duality", "||A||_{p->q} = ||A^T||_{q*->p*}");
  duality->add_option("--p", dp, "p");
  duality->add_option("--q", dq, "q");
  duality->add_option("--instances", instances, "random instances");
  duality->add_option("--size", dsize, "matrix dimension");
  add_seed(duality);

  std::size_t emb_n = 5;
  std::size_t emb_m = 0;
  double emb_q = 4.0;
  std::size_t emb_trials = 100;
  auto* embedding = verify->add_subcommand("embedding", "Gaussian l_2 -> l_q approximate isometry");
  embedding->add_option("--n", emb_n, "dimension");
  embedding->add_option("--m", emb_m, "rows (default 50 n^{q/2}, capped at 1e5)");
  embedding->add_option("--q", emb_q, "q >= 2");
  embedding->add_option("--trials", emb_trials, "random unit vectors");
  add_seed(embedding);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return 2;
  }

  auto error_json = [&](const std::string& kind, const std::string& what, const std::string& detail) {
    json j = detail::envelope("error");
    j["error"] = {{"type", kind}, {"message", what}};
    if (!detail.empty()) j["error"]["detail"] = detail;
    out << j.dump(2) << "\n";
    return 1;
  };

  try {
    if (!seed_given) seed = default_seed();

    if (norm->parsed()) {
      const Matrix A = load_matrix(file);
      json j = detail::envelope("norm");
      j["method"] = method;
      j["m"] = A.rows();
      j["n"] = A.cols();
      j["seed"] = seed;
      PowerOptions popt;
      popt.starts = starts;
      popt.seed = seed;
      if (method == "power" || method == "grid") {
        double p = 0.0;
        double q = 0.0;
        try {
          p = parse_exponent(p_str);
          q = parse_exponent(q_str);
          if (!(p >= 1.0 && q >= 1.0)) throw UsageError("exponents must be >= 1");
        } catch (const DomainError& e) {
          throw UsageError(e.what());
        }
        j["p"] = exponent_json(p);
        j["q"] = exponent_json(q);
        if (method == "power") {
          const PowerResult r = norm_power(A, p, q, popt);
          j["value"] = r.value;
          j["x"] = to_json(r.x);
        } else {
          if (A.cols() > 3) throw UsageError("grid method supports at most three columns");
          j["value"] = norm_grid(A, p, q, resolution);
          j["resolution"] = resolution;
        }
      } else {
        const ExponentPair pair = detail::pair_from_flags(p_str, q_str);
        j["p"] = exponent_json(pair.p);
        j["q"] = pair.q;
        CpOptions copt;
        copt.seed = seed;
        const GramSolution sol = solve_cp(A, pair, copt);
        if (method == "cp") {
          const DualCertificate dual = solve_dual(A, pair, {}, sol);
          j["value"] = sol.value;
          j["converged"] = sol.converged;
          j["dual"] = to_json(dual);
        } else {
          const RoundedPair r = round_best(A, sol, pair, trials, seed);
          j["value"] = r.value;
          j["cp_value"] = sol.value;
          j["trials"] = trials;
        }
      }
      out << j.dump(2) << "\n";
      return 0;
    }

    if (certify->parsed()) {
      const ExponentPair pair = detail::pair_from_flags(p_str, q_str);
      const InverseReport rep = approx_ratio(pair, use_certified, truncation);
      json j = detail::envelope("certify");
      j.update(to_json(rep));
      if (grid_step > 0.0) {
        const SignPatternReport sp = verify_sign_pattern(rep.k_checked, grid_step);
        j["grid_sign_pattern"] = {{"grid_step", grid_step}, {"pass", sp.pass}, {"method", sp.method}};
        j["c1c2_ok"] = rep.c1_c2_ok && sp.pass;
      }
      out << j.dump(2) << "\n";
      return 0;
    }

    if (round->parsed()) {
      const Matrix A = load_matrix(file);
      const ExponentPair pair = detail::pair_from_flags(p_str, q_str);
      CpOptions copt;
      copt.seed = seed;
      const GramSolution sol = solve_cp(A, pair, copt);
      const PreparedRounding pr = prepare_rounding(sol, pair);
      const RoundedPair r = round_best(A, pr, pair, trials, seed);
      json j = detail::envelope("round");
      j["p"] = exponent_json(pair.p);
      j["q"] = pair.q;
      j.update(to_json(r));
      j["trials"] = trials;
      j["cp_value"] = sol.value;
      j["c_ab"] = pr.gram.c;
      j["degenerate_scaling"] = pr.rows.degenerate_scaling;
      j["clipped_mass"] = pr.rows.clipped_mass;
      out << j.dump(2) << "\n";
      return 0;
    }

    if (coeffs->parsed()) {
      if (kmax % 2 == 0) throw UsageError("--kmax must be odd");
      if (!(coeff_step > 0.0 && coeff_step <= 0.5)) throw UsageError("--grid-step must lie in (0, 0.5]");
      const SignPatternReport rep = verify_sign_pattern(kmax, coeff_step);
      json j = detail::envelope("verify coeffs");
      j.update(to_json(rep));
      out << j.dump(2) << "\n";
      return rep.pass ? 0 : 1;
    }

    if (identity->parsed()) {
      if (!(a_val >= 0.0 && a_val <= 1.0 && b_val >= 0.0 && b_val <= 1.0)) throw UsageError("a, b must lie in [0,1]");
      if (!(std::abs(rho) <= 1.0)) throw UsageError("rho must lie in [-1,1]");
      if (samples < 2) throw UsageError("need at least two samples");
      Rng rng(seed, 0);
      const CorrelationSample s = sample_noise_correlation(a_val, b_val, rho, samples, rng);
      json j = detail::envelope("verify identity");
      j.update(to_json(s));
      j["seed"] = seed;
      const bool pass = std::abs(s.z_score()) <= 4.0;
      j["pass"] = pass;
      out << j.dump(2) << "\n";
      return pass ? 0 : 1;
    }

    if (kron->parsed()) {
      const double p = parse_exponent(kp);
      const double q = parse_exponent(kq);
      if (!(p >= 1.0 && q >= p)) throw UsageError("kron requires 1 <= p <= q");
      if (size < 1 || size > 4) throw UsageError("--size must lie in [1, 4]");
      json j = detail::envelope("verify kron");
      j["seed"] = seed;
      json list = json::array();
      bool all = true;
      for (std::size_t k = 0; k < count; ++k) {
        Rng rng(seed, k);
        const auto d = static_cast<Eigen::Index>(size);
        const Matrix A = detail::random_matrix(d, d, rng);
        const Matrix B = detail::random_matrix(d, d, rng);
        PowerOptions popt;
        popt.seed = seed + k;
        const KronReport r = kron_check(A, B, p, q, popt);
        all = all && r.pass;
        list.push_back(to_json(r));
      }
      j["reports"] = list;
      j["pass"] = all;
      out << j.dump(2) << "\n";
      return all ? 0 : 1;
    }

    if (duality->parsed()) {
      const double p = parse_exponent(dp);
      const double q = parse_exponent(dq);
      if (!(p >= 1.0 && q >= 1.0)) throw UsageError("exponents must be >= 1");
      if (dsize < 1 || dsize > 8) throw UsageError("--size must lie in [1, 8]");
      json j = detail::envelope("verify duality");
      j["seed"] = seed;
      json list = json::array();
      bool all = true;
      for (std::size_t k = 0; k < instances; ++k) {
        Rng rng(seed, k);
        const auto d = static_cast<Eigen::Index>(dsize);
        const Matrix A = detail::random_matrix(d, d, rng);
        PowerOptions popt;
        popt.seed = seed + k;
        const DualityReport r = duality_check(A, p, q, popt);
        all = all && r.pass;
        list.push_back(to_json(r));
      }
      j["reports"] = list;
      j["pass"] = all;
      out << j.dump(2) << "\n";
      return all ? 0 : 1;
    }

    if (embedding->parsed()) {
      if (!(emb_q >= 2.0)) throw UsageError("--q must be >= 2");
      const std::size_t m = emb_m ? emb_m : default_embedding_rows(emb_n, emb_q);
      const EmbeddingReport r = embedding_experiment(emb_n, m, emb_q, emb_trials, seed);
      json j = detail::envelope("verify embedding");
      j.update(to_json(r));
      j["seed"] = seed;
      out << j.dump(2) << "\n";
      return 0;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    return error_json("input", e.what(), "");
  } catch (const NumericError& e) {
    return error_json("numeric", e.what(), e.detail());
  } catch (const DomainError& e) {
    return error_json("domain", e.what(), "");
  }
  return 2;
}

inline int run_command(int argc, const char* const* argv, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_command(std::move(args), out, err);
}

}  // namespace pqnorm
