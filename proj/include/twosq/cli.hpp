#pragma once
// Command-line front end. Exit codes: 0 ok, 2 input error, 3 capability
// error, 4 invariant violation, 5 stopped early by --stop-after (resume
// from the checkpoint directory).

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <regex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "twosq/errors.hpp"
#include "twosq/heuristics.hpp"
#include "twosq/pair_sieve.hpp"
#include "twosq/report_io.hpp"
#include "twosq/sieve_lemmas.hpp"
#include "twosq/statistics.hpp"

namespace twosq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitCapability = 3;
inline constexpr int kExitInvariant = 4;
inline constexpr int kExitStopped = 5;

/// Integer flag value; accepts "1000000", "1e6", "2.5e3" (must be integral).
inline u64 parse_count(const std::string& text, const std::string& flag) {
  const std::string s = std::regex_replace(text, std::regex("_"), "");
  if (std::regex_match(s, std::regex("[0-9]+"))) {
    try {
      return std::stoull(s);
    } catch (const std::out_of_range&) {
      throw InputError(flag + ": value out of range: " + text);
    }
  }
  if (!std::regex_match(s, std::regex("[0-9]*\\.?[0-9]+([eE][+]?[0-9]+)?")))
    throw InputError(flag + ": not a nonnegative integer: " + text);
  const long double v = std::stold(s);
  if (v != std::floor(v) || v >= 18446744073709551616.0L)
    throw InputError(flag + ": not an integer in range: " + text);
  return static_cast<u64>(v);
}

inline double parse_real(const std::string& text, const std::string& flag) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw InputError(flag + ": not a number: " + text);
  }
  if (used != text.size() || !std::isfinite(v)) throw InputError(flag + ": not a number: " + text);
  return v;
}

/// Angle: a real number, or a multiple of pi such as "pi", "pi/4", "3pi/8",
/// "3*pi/8", "0".
inline double parse_angle(const std::string& text, const std::string& flag) {
  std::smatch m;
  static const std::regex pi_form(R"(\s*([0-9]*\.?[0-9]*)\s*\*?\s*pi\s*(?:/\s*([0-9]*\.?[0-9]+))?\s*)");
  if (std::regex_match(text, m, pi_form)) {
    const double num = m[1].length() ? parse_real(m[1].str(), flag) : 1.0;
    const double den = m[2].matched ? parse_real(m[2].str(), flag) : 1.0;
    if (den == 0.0) throw InputError(flag + ": zero denominator in " + text);
    return num * std::numbers::pi / den;
  }
  return parse_real(text, flag);
}

inline unsigned default_threads() {
  if (const char* env = std::getenv("TWO_SQUARES_THREADS"); env && *env) {
    const u64 v = parse_count(env, "TWO_SQUARES_THREADS");
    detail::require(v >= 1 && v <= 4096, "TWO_SQUARES_THREADS must lie in [1, 4096]");
    return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Rows of JSON scalars, emitted as CSV (header, comma, LF, %.17g doubles)
/// or as a JSON array of objects.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;

  void add(std::vector<nlohmann::json> row) {
    detail::ensure(row.size() == columns.size(), "Table: row width mismatch");
    rows.push_back(std::move(row));
  }

  static std::string cell(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_null()) return "";
    return v.dump();
  }

  std::string csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
    out += "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + cell(row[i]);
      out += "\n";
    }
    return out;
  }

  nlohmann::json json() const {
    auto arr = nlohmann::json::array();
    for (const auto& row : rows) {
      nlohmann::json obj = nlohmann::json::object();
      for (std::size_t i = 0; i < row.size(); ++i) obj[columns[i]] = row[i];
      arr.push_back(std::move(obj));
    }
    return arr;
  }
};

struct Output {
  std::string path;
  std::string format;  // csv unless stated; count defaults to json

  void emit(const std::string& text) const {
    if (path.empty() || path == "-")
      std::cout << text << std::flush;
    else
      write_atomic(path, text);
  }
  void emit(const Table& t) const { emit(format == "json" ? t.json().dump(2) + "\n" : t.csv()); }
};

struct SieveFlags {
  std::string x = "1e6";
  std::string in;
  std::string segment_size = std::to_string(kDefaultSegmentSize);
  std::optional<unsigned> threads;
  std::string checkpoint_dir;
  std::optional<std::size_t> stop_after;

  void attach(CLI::App* cmd, bool allow_input) {
    cmd->add_option("--x", x, "upper limit (scientific notation accepted)");
    if (allow_input) cmd->add_option("--in", in, "reuse a TallyReport JSON instead of counting");
    cmd->add_option("--segment-size", segment_size, "segment length (>= 65536)");
    cmd->add_option("--threads", threads, "worker threads (default: TWO_SQUARES_THREADS or all cores)");
    cmd->add_option("--checkpoint-dir", checkpoint_dir, "directory for per-segment checkpoints");
    cmd->add_option("--stop-after", stop_after, "stop after this many new segments (exit 5)");
  }
};

struct StoppedEarly {
  std::size_t computed = 0;
  std::size_t remaining = 0;
};

inline TallyReport obtain_report(const SieveFlags& f) {
  if (!f.in.empty()) return load_tally(f.in);
  const u64 x = parse_count(f.x, "--x");
  PairSieveOptions opts;
  opts.segment_size = parse_count(f.segment_size, "--segment-size");
  opts.thread_budget = f.threads ? *f.threads : default_threads();
  opts.stop_after = f.stop_after;
  validate_pair_sieve_args(x, opts.segment_size, opts.thread_budget);
  if (!f.checkpoint_dir.empty()) {
    std::filesystem::create_directories(f.checkpoint_dir);
    opts.completed = load_checkpoints(f.checkpoint_dir, x);
    const std::filesystem::path dir = f.checkpoint_dir;
    opts.on_segment = [dir](const TallyReport& t) { save_checkpoint(dir, t); };
  }
  const auto plan_size = plan_segments(x, opts.segment_size).size();
  PairSieveResult res = run_pair_sieve(x, std::move(opts));
  if (!res.complete)
    throw StoppedEarly{res.computed_segments,
                       plan_size - res.computed_segments - res.reused_segments};
  return std::move(res.report);
}

inline int run(int argc, char** argv) {
  CLI::App app{"Integers of the form a^2 + p^2: exact counts and heuristic predictions"};
  app.require_subcommand(1);
  Output out;
  app.add_option("--out", out.path, "output file (default stdout); written atomically");
  app.add_option("--format", out.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  auto global = [&](CLI::App* cmd) {
    cmd->add_option("--out", out.path, "output file (default stdout)");
    cmd->add_option("--format", out.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };

  std::string prime_limit = "1e7";
  auto kappa_flag = [&](CLI::App* cmd) {
    cmd->add_option("--prime-limit", prime_limit, "primes used in the Euler product (default 1e7)");
  };
  auto kappa_value = [&] { return compute_constants(parse_count(prime_limit, "--prime-limit")).kappa; };

  // count
  SieveFlags count_flags;
  auto* count_cmd = app.add_subcommand("count", "run the pair sieve and emit a TallyReport");
  count_flags.attach(count_cmd, false);
  global(count_cmd);
  count_cmd->callback([&] {
    const TallyReport t = obtain_report(count_flags);
    out.emit(out.format == "csv" ? tally_to_csv(t) : to_json(t).dump() + "\n");
  });

  // nr-table
  SieveFlags nr_flags;
  auto* nr_cmd = app.add_subcommand("nr-table", "N_r(x) for every r >= 1");
  nr_flags.attach(nr_cmd, true);
  global(nr_cmd);
  nr_cmd->callback([&] {
    const TallyReport t = obtain_report(nr_flags);
    Table tab{{"r", "count"}, {}};
    for (const auto& [r, c] : n_r_table(t)) tab.add({r, c});
    out.emit(tab);
  });

  // pi-n
  std::string pin_x = "1e6";
  auto* pin_cmd = app.add_subcommand("pi-n", "exact pi_N(x; k) histogram");
  pin_cmd->add_option("--x", pin_x, "upper limit");
  global(pin_cmd);
  pin_cmd->callback([&] {
    Table tab{{"k", "count"}, {}};
    for (const auto& [k, c] : pi_N_histogram(parse_count(pin_x, "--x"))) tab.add({k, c});
    out.emit(tab);
  });

  // daniel
  SieveFlags dan_flags;
  auto* dan_cmd = app.add_subcommand("daniel", "sum C(r1,2) against 9/8 x/log x");
  dan_flags.attach(dan_cmd, true);
  global(dan_cmd);
  dan_cmd->callback([&] {
    const auto c = daniel_ratio(obtain_report(dan_flags));
    Table tab{{"x", "empirical", "predicted", "ratio", "note"}, {}};
    tab.add({c.x, c.empirical, c.predicted, c.ratio, c.note});
    out.emit(tab);
  });

  // keysums
  std::string ks_m = "1", ks_k = "1", ks_lo = "0", ks_hi = "pi/2", ks_R = "10";
  auto* ks_cmd = app.add_subcommand("keysums", "lattice points with prescribed argument window");
  ks_cmd->add_option("--m", ks_m, "modulus m (gcd(n, 2m) = 1)");
  ks_cmd->add_option("--k", ks_k, "omega*(n)");
  ks_cmd->add_option("--lo", ks_lo, "interval start, e.g. 0 or pi/8");
  ks_cmd->add_option("--hi", ks_hi, "interval end (exclusive), e.g. pi/4");
  ks_cmd->add_option("--R", ks_R, "scale R (n in [2R^2, 4R^2])");
  global(ks_cmd);
  ks_cmd->callback([&] {
    const u64 m = parse_count(ks_m, "--m");
    const u64 k = parse_count(ks_k, "--k");
    const AngleInterval I(parse_angle(ks_lo, "--lo"), parse_angle(ks_hi, "--hi"));
    const double R = parse_real(ks_R, "--R");
    Table tab{{"m", "k", "lo", "hi", "R", "count"}, {}};
    tab.add({m, k, I.lo(), I.hi(), R, keysums_count(m, static_cast<unsigned>(k), I, R)});
    out.emit(tab);
  });

  // constants
  auto* const_cmd = app.add_subcommand("constants", "delta, tau, lambda, c_lambda, kappa");
  kappa_flag(const_cmd);
  global(const_cmd);
  const_cmd->callback([&] {
    const Constants c = compute_constants(parse_count(prime_limit, "--prime-limit"));
    Table tab{{"name", "value", "prime_limit", "reference"}, {}};
    const nlohmann::json none;
    tab.add({"delta", c.delta, c.prime_limit_used, kPaperDelta});
    tab.add({"tau", c.tau, c.prime_limit_used, kPaperTau});
    tab.add({"lambda", c.lambda, c.prime_limit_used, none});
    tab.add({"c_lambda", c.c_lambda, c.prime_limit_used, none});
    tab.add({"kappa", c.kappa, c.prime_limit_used, kPaperKappa});
    out.emit(tab);
  });

  // psi
  std::vector<int> psi_r_values{2, 3, 4, 5};
  std::vector<int> psi_star_values;
  std::string psi_samples = "64";
  auto* psi_cmd = app.add_subcommand("psi", "sample psi_r(t) and psi*_j(t) over t in [0, 1)");
  psi_cmd->add_option("--r", psi_r_values, "values of r (>= 2)")->delimiter(',');
  psi_cmd->add_option("--star", psi_star_values, "psi* variants among 0,1,2")->delimiter(',');
  psi_cmd->add_option("--samples", psi_samples, "points per period");
  kappa_flag(psi_cmd);
  global(psi_cmd);
  psi_cmd->callback([&] {
    const u64 n = parse_count(psi_samples, "--samples");
    detail::require(n >= 1 && n <= 1'000'000, "--samples must lie in [1, 1e6]");
    const double kappa = kappa_value();
    Table tab{{"t", "r", "psi"}, {}};
    for (int r : psi_r_values)
      for (u64 i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / n;
        tab.add({t, std::to_string(r), psi_r(r, t, kappa)});
      }
    for (int v : psi_star_values) {
      detail::require(v >= 0 && v <= 2, "--star values must be 0, 1 or 2");
      for (u64 i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / n;
        tab.add({t, "star" + std::to_string(v), psi_star(v, t, kappa)});
      }
    }
    out.emit(tab);
  });

  // fr
  std::vector<std::string> fr_R{"1", "2.5", "10"};
  std::string fr_samples = "64", fr_tol = "1e-16";
  auto* fr_cmd = app.add_subcommand("fr", "sample f_R(beta) over beta in [1, 2)");
  fr_cmd->add_option("--R", fr_R, "exponents R > 0")->delimiter(',');
  fr_cmd->add_option("--samples", fr_samples, "points per octave");
  fr_cmd->add_option("--tol", fr_tol, "relative truncation tolerance");
  global(fr_cmd);
  fr_cmd->callback([&] {
    const u64 n = parse_count(fr_samples, "--samples");
    detail::require(n >= 1 && n <= 1'000'000, "--samples must lie in [1, 1e6]");
    const double tol = parse_real(fr_tol, "--tol");
    Table tab{{"R", "beta", "f_R", "gamma_R"}, {}};
    for (const auto& rs : fr_R) {
      const double R = parse_real(rs, "--R");
      detail::require(R > 0, "--R values must be > 0");
      const double g = R <= 171.0 ? gamma_fn(R) : std::numeric_limits<double>::infinity();
      for (u64 i = 0; i < n; ++i) {
        const double beta = std::exp2(static_cast<double>(i) / n);
        tab.add({R, beta, f_R(R, beta, tol), g});
      }
    }
    out.emit(tab);
  });

  // crossover
  std::string co_rmin = "2", co_rmax = "30", co_grid = "1024";
  bool co_full = false;
  auto* co_cmd = app.add_subcommand("crossover", "scan f_{r-1-tau} >= f_{r-tau}/(r+1) over beta");
  co_cmd->add_option("--r-min", co_rmin, "smallest r (>= 2)");
  co_cmd->add_option("--r-max", co_rmax, "largest r (<= 100)");
  co_cmd->add_option("--grid", co_grid, "grid points on (1, 2]");
  co_cmd->add_flag("--full", co_full, "emit every grid point");
  co_cmd->add_option("--threads", count_flags.threads, "worker threads");
  global(co_cmd);
  co_cmd->callback([&] {
    const auto reports = crossover_scan(static_cast<int>(parse_count(co_rmin, "--r-min")),
                                        static_cast<int>(parse_count(co_rmax, "--r-max")),
                                        static_cast<int>(parse_count(co_grid, "--grid")),
                                        count_flags.threads ? *count_flags.threads : default_threads());
    Table tab{{"r", "point", "beta", "lhs", "rhs", "verdict"}, {}};
    for (const auto& rep : reports) {
      if (co_full)
        for (std::size_t j = 0; j < rep.beta_grid.size(); ++j)
          tab.add({rep.r, "grid", rep.beta_grid[j], rep.lhs[j], rep.rhs[j],
                   rep.lhs[j] >= rep.rhs[j] ? "holds" : "fails"});
      std::size_t worst = 0;
      for (std::size_t j = 1; j < rep.beta_grid.size(); ++j)
        if (rep.lhs[j] / rep.rhs[j] < rep.lhs[worst] / rep.rhs[worst]) worst = j;
      tab.add({rep.r, "summary", rep.witness_beta.value_or(rep.beta_grid[worst]), rep.lhs[worst],
               rep.rhs[worst], to_string(rep.verdict)});
      for (const auto& sp : rep.special)
        tab.add({rep.r, sp.family, sp.beta, sp.lhs, sp.rhs, sp.holds() ? "holds" : "fails"});
    }
    out.emit(tab);
  });

  // predict
  std::string pr_kind = "N_r", pr_x = "1e9";
  std::vector<int> pr_r{2, 3, 4, 5};
  int pr_k = 1;
  auto* pr_cmd = app.add_subcommand("predict", "heuristic N_r(x) or pi_N(x; k, r)");
  pr_cmd->add_option("--kind", pr_kind, "N_r or pi_N_kr")->check(CLI::IsMember({"N_r", "pi_N_kr"}));
  pr_cmd->add_option("--x", pr_x, "evaluation point");
  pr_cmd->add_option("--r", pr_r, "values of r")->delimiter(',');
  pr_cmd->add_option("--k", pr_k, "k (pi_N_kr only)");
  kappa_flag(pr_cmd);
  global(pr_cmd);
  pr_cmd->callback([&] {
    const double x = parse_real(pr_x, "--x");
    const double kappa = kappa_value();
    const PredictKind kind = pr_kind == "N_r" ? PredictKind::N_r : PredictKind::pi_N_kr;
    Table tab{{"kind", "x", "k", "r", "prediction"}, {}};
    for (int r : pr_r) tab.add({pr_kind, x, pr_k, r, predict(kind, x, {r, pr_k}, kappa)});
    out.emit(tab);
  });

  // compare
  SieveFlags cmp_flags;
  std::string cmp_kmax = "4", cmp_euler = "1e6";
  auto* cmp_cmd = app.add_subcommand("compare", "empirical counts against the asymptotic main terms");
  cmp_flags.attach(cmp_cmd, true);
  cmp_cmd->add_option("--k-max", cmp_kmax, "compare pi_N(x; k) for 2 <= k <= k-max");
  cmp_cmd->add_option("--prime-limit", cmp_euler, "primes in the c_kappa Euler product");
  global(cmp_cmd);
  cmp_cmd->callback([&] {
    const TallyReport t = obtain_report(cmp_flags);
    std::vector<AsymptoticComparison> rows{theorem1_check(t), daniel_ratio(t), gcd_defect_check(t)};
    const auto hist = pi_N_histogram(t.x);
    const PrimeTable euler = primes_up_to(parse_count(cmp_euler, "--prime-limit"));
    for (u64 k = 2; k <= parse_count(cmp_kmax, "--k-max"); ++k)
      rows.push_back(compare_pi_N(t.x, static_cast<unsigned>(k), hist, euler));
    if (out.format == "json") {
      nlohmann::json j;
      j["x"] = t.x;
      j["generated_by_version"] = kVersion;
      auto arr = nlohmann::json::array();
      for (const auto& c : rows) arr.push_back(to_json(c));
      j["comparisons"] = std::move(arr);
      j["normalized_deficit"] = normalized_deficit(t);
      j["sumidff_residual"] = sumidff_residual(t);
      out.emit(j.dump(2) + "\n");
    } else {
      out.emit(comparisons_to_csv(rows));
    }
  });

  // verify-lemmas
  std::string vl_contexts = "50", vl_seed = "1", vl_max_delta = "1e4", vl_max_component = "40";
  auto* vl_cmd = app.add_subcommand("verify-lemmas", "exhaustive checks of ell and nu on random contexts");
  vl_cmd->add_option("--contexts", vl_contexts, "number of random admissible contexts");
  vl_cmd->add_option("--seed", vl_seed, "RNG seed");
  vl_cmd->add_option("--max-delta", vl_max_delta, "upper bound on Delta");
  vl_cmd->add_option("--max-component", vl_max_component, "upper bound on g, h, r, s");
  global(vl_cmd);
  bool lemmas_failed = false;
  vl_cmd->callback([&] {
    std::mt19937_64 rng(parse_count(vl_seed, "--seed"));
    const auto ctxs = random_contexts(rng, parse_count(vl_contexts, "--contexts"),
                                      static_cast<i64>(parse_count(vl_max_component, "--max-component")),
                                      static_cast<i64>(parse_count(vl_max_delta, "--max-delta")));
    Table tab{{"g", "h", "r", "s", "Delta", "check", "verdict"}, {}};
    auto row = [&](const SieveContext& c, const std::string& check, bool ok) {
      lemmas_failed = lemmas_failed || !ok;
      tab.add({c.g, c.h, c.r, c.s, c.Delta, check, ok ? "pass" : "fail"});
    };
    for (const auto& c : ctxs) {
      row(c, "delta-identity", c.Delta == 2 * c.g * c.h * c.H);
      row(c, "xi-identity", c.xi == c.H * (c.g * c.g - c.h * c.h));
      row(c, "discriminant",
          4 * static_cast<i128>(c.xi) * c.xi - 4 * static_cast<i128>(c.m) * c.m ==
              -4 * static_cast<i128>(c.Delta) * c.Delta);
      row(c, "ell", c.Delta <= 100000 && verify_ell_bruteforce(c));
      for (u64 p = 3; p <= 100; p += 2) {
        if (!is_prime(p) || static_cast<i128>(p) * c.Delta > 1000000) continue;
        row(c, "nu(" + std::to_string(p) + ")", verify_nu_bruteforce(p, c));
      }
    }
    out.emit(tab);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    std::cerr << app.help();
    return kExitInput;
  } catch (const StoppedEarly& s) {
    std::cerr << "stopped after " << s.computed << " new segments; " << s.remaining
              << " remaining (resume with the same --checkpoint-dir)\n";
    return kExitStopped;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitInput;
  } catch (const CapabilityError& e) {
    std::cerr << "capability error: " << e.what() << "\n";
    return kExitCapability;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInvariant;
  }
  return lemmas_failed ? kExitInvariant : kExitOk;
}

}  // namespace twosq::cli
