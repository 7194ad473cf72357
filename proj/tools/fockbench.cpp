// fockbench command-line front end.

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fockbench/fockbench.hpp"

namespace fb = fockbench;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitCheck = 4;
constexpr double kCcrTolerance = 1e-10;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  bool json_errors = false;
  std::string model;
  std::size_t n_max = 12;
  std::optional<std::size_t> grid;
  std::optional<std::size_t> modes;
  std::optional<std::size_t> d;
  std::uint64_t seed = 42;
  std::size_t samples = 1000;
  std::string n_range;
  std::string variant = "quadratic";
  double threshold = 0.1;
  bool with_bounds = false;
  std::string out;
  std::string format = "json";
  std::string out_dir = ".";
  std::vector<std::string> bounds;
  std::vector<std::size_t> sectors;
  std::size_t exponent = 3;
  std::vector<std::size_t> cutoffs;
  double epsilon = 0.5;
  std::size_t levels = 4;
  std::size_t trials = 100;
};

std::string sha256_hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw fb::Error("SHA-256 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string model_hash(const fb::ModelSpec& m) { return "sha256:" + sha256_hex(fb::model_to_json(m).dump()); }

fb::ModelSpec load_model(const Options& o) {
  if (o.model.empty()) throw UsageError("--model is required");
  if (fb::is_preset(o.model)) return fb::make_preset(o.model, {o.grid, o.modes});
  if (o.grid || o.modes) throw fb::ValidationError("--grid and --modes apply to presets only", "model");
  if (!std::filesystem::exists(o.model))
    throw fb::ValidationError("'" + o.model + "' is neither a preset nor a readable file", "model");
  return fb::load_model_file(o.model);
}

std::size_t resolve_d(const Options& o) {
  if (o.d) return *o.d;
  if (!o.model.empty()) return load_model(o).d;
  throw UsageError("give --d or --model");
}

fb::NRange parse_range(const std::string& text, std::size_t n_max, std::size_t bandwidth) {
  if (text.empty()) return {0, n_max >= bandwidth ? n_max - bandwidth : 0};
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw fb::ValidationError("expected a:b, got '" + text + "'", "n_range");
  try {
    std::size_t p1 = 0, p2 = 0;
    const std::string a = text.substr(0, colon), b = text.substr(colon + 1);
    const long from = std::stol(a, &p1), to = std::stol(b, &p2);
    if (p1 != a.size() || p2 != b.size() || from < 0 || to < 0) throw std::invalid_argument(text);
    return {static_cast<std::size_t>(from), static_cast<std::size_t>(to)};
  } catch (const std::logic_error&) {
    throw fb::ValidationError("expected a:b with non-negative integers, got '" + text + "'", "n_range");
  }
}

void print_csv_row(std::ostream& out, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out << ",";
    out << c;
    first = false;
  }
  out << "\n";
}

std::string num(double v) { return fb::format_number(v); }

// ---------------------------------------------------------------------------------------------

int cmd_dims(const Options& o) {
  const std::size_t d = resolve_d(o);
  const fb::TruncatedFockSpace space(d, o.n_max);
  std::cout << "sector dimensions (d = " << d << ", n_max = " << o.n_max << "): ";
  for (std::size_t n = 0; n <= o.n_max; ++n) std::cout << (n ? "," : "") << space.sector_dim(n);
  std::cout << "\ntotal: " << space.dimension() << "\n";
  return 0;
}

int cmd_build(const Options& o) {
  const fb::ModelSpec m = load_model(o);
  const fb::CompiledModel c = fb::compile(m, fb::make_space(m.d, o.n_max));
  for (const auto& w : c.warnings) std::cerr << "warning: " << w << "\n";
  const std::filesystem::path dir(o.out_dir);
  std::filesystem::create_directories(dir);
  const std::vector<std::string> comments{"model " + m.name, "model_hash " + model_hash(m),
                                          "n_max " + std::to_string(o.n_max), "particle_dim " + std::to_string(m.L)};
  const std::pair<const char*, const fb::BlockBandedOperator*> parts[] = {
      {"H0", &c.H0}, {"HI", &c.HI}, {"Hdiag", &c.Hdiag}, {"H2", &c.H2}};
  for (const auto& [name, op] : parts) {
    const auto path = dir / (std::string(name) + ".mtx");
    fb::write_matrix_market(path, *op, comments);
    std::cout << name << ": " << path.string() << " (dimension " << op->dimension() << ", bandwidth "
              << op->bandwidth() << ")\n";
  }
  return 0;
}

int cmd_ccr(const Options& o) {
  const std::size_t d = resolve_d(o);
  const auto r = fb::ccr_selftest(fb::make_space(d, o.n_max), o.trials, o.seed);
  std::cout << "max_deviation: " << num(r.max_deviation) << "\n";
  std::cout << "boundary_defect: " << num(r.boundary_defect) << " (top sector, not counted)\n";
  if (r.max_deviation > kCcrTolerance) {
    std::cerr << "ccr: deviation " << num(r.max_deviation) << " exceeds " << num(kCcrTolerance) << "\n";
    return kExitCheck;
  }
  return 0;
}

std::vector<fb::InequalityResult> run_bounds(const fb::ModelSpec& m, const fb::CompiledModel& c,
                                             std::vector<std::string> bounds, std::vector<std::size_t> sectors,
                                             const Options& o) {
  if (bounds.empty()) bounds = fb::matching_bounds(m);
  if (bounds.empty()) throw fb::ValidationError("no inequality applies to family '" + m.family + "'", "bound");
  if (sectors.empty())
    for (std::size_t n = 0; n + 2 <= o.n_max; ++n) sectors.push_back(n);
  std::vector<fb::InequalityResult> out;
  for (const auto& b : bounds)
    for (std::size_t n : sectors) out.push_back(fb::inequality_sampler(m, c, b, n, o.samples, o.seed));
  return out;
}

int cmd_verify(const Options& o) {
  const fb::ModelSpec m = load_model(o);
  const fb::CompiledModel c = fb::compile(m, fb::make_space(m.d, o.n_max));
  for (const auto& w : c.warnings) std::cerr << "warning: " << w << "\n";
  const fb::NRange r = parse_range(o.n_range, o.n_max, c.HI.bandwidth());
  fb::ComplianceReport rep = fb::verify_model(m, c, r, fb::parse_variant(o.variant), o.threshold);
  rep.model_hash = model_hash(m);
  std::size_t violations = 0;
  if (o.with_bounds) {
    rep.inequalities = run_bounds(m, c, {}, {}, o);
    for (const auto& x : rep.inequalities) violations += x.violations;
  }
  const std::string json = fb::report_to_json(rep).dump(2) + "\n";
  const std::string csv = fb::report_to_csv(rep);
  const bool want_json = o.format != "csv", want_csv = o.format != "json";
  if (o.out.empty()) {
    if (want_json) std::cout << json;
    if (want_csv) std::cout << csv;
  } else {
    if (want_json) fb::write_file_atomic(o.out + ".json", json);
    if (want_csv) fb::write_file_atomic(o.out + ".csv", csv);
    std::cout << "model: " << m.name << " (" << rep.model_hash << ")\n";
    std::cout << "band: expected " << rep.band.expected << ", ok " << (rep.band.ok ? "true" : "false")
              << ", max off-band " << num(rep.band.max_offband) << "\n";
    if (rep.fit) std::cout << "slope: " << num(rep.fit->slope) << "\n";
    else std::cout << "slope: none\n";
    std::cout << "split: " << (rep.split.compliant ? "compliant" : "not compliant") << "\n";
    if (o.with_bounds) std::cout << "bounds violations: " << violations << "\n";
    std::cout << "verdict: " << fb::to_string(rep.verdict) << "\n";
  }
  return violations ? kExitCheck : 0;
}

int cmd_scaling(const Options& o) {
  const fb::ModelSpec m = load_model(o);
  const fb::CompiledModel c = fb::compile(m, fb::make_space(m.d, o.n_max));
  const fb::NRange r = parse_range(o.n_range, o.n_max, c.HI.bandwidth());
  const auto rows = fb::compliance_gamma(m, c, r, fb::parse_variant(o.variant));
  std::vector<std::size_t> ns;
  std::vector<double> gs;
  std::cout << "# model " << m.name << ", n_max " << o.n_max << ", variant " << o.variant << "\n";
  std::cout << "n,gamma\n";
  for (const auto& g : rows) {
    ns.push_back(g.n);
    gs.push_back(g.gamma);
    print_csv_row(std::cout, {std::to_string(g.n), num(g.gamma)});
  }
  if (const auto fit = fb::sector_fit(ns, gs))
    std::cout << "# slope " << num(fit->slope) << ", intercept " << num(fit->intercept) << ", residual "
              << num(fit->residual) << "\n";
  else std::cout << "# slope none (fewer than 3 positive values)\n";
  return 0;
}

int cmd_bounds(const Options& o) {
  const fb::ModelSpec m = load_model(o);
  const fb::CompiledModel c = fb::compile(m, fb::make_space(m.d, o.n_max));
  const auto results = run_bounds(m, c, o.bounds, o.sectors, o);
  std::size_t violations = 0;
  std::cout << "bound,n,samples,max_ratio,violations\n";
  for (const auto& x : results) {
    violations += x.violations;
    print_csv_row(std::cout, {x.bound, std::to_string(x.n), std::to_string(x.samples), num(x.max_ratio),
                              std::to_string(x.violations)});
  }
  std::cout << "# violations " << violations << "\n";
  return violations ? kExitCheck : 0;
}

int cmd_relbound(const Options& o) {
  const fb::ModelSpec m = load_model(o);
  if (!o.cutoffs.empty()) {
    const auto s = fb::relative_bound_scan(m, o.cutoffs, o.epsilon, o.exponent, o.samples, o.seed);
    std::cout << "# model " << m.name << ", epsilon " << num(s.epsilon) << ", exponent " << s.exponent << "\n";
    std::cout << "n_max,C\n";
    for (const auto& row : s.rows) print_csv_row(std::cout, {std::to_string(row.n_max), num(row.c)});
    std::cout << "# stable " << (s.stable ? "true" : "false") << "\n";
    return 0;
  }
  const fb::CompiledModel c = fb::compile(m, fb::make_space(m.d, o.n_max));
  const auto r = fb::relative_bound_fit(c, o.exponent, o.samples, o.seed);
  std::cout << "# model " << m.name << ", n_max " << o.n_max << ", exponent " << r.exponent << ", samples "
            << r.samples << "\n";
  std::cout << "epsilon,C_half,C_full,stable\n";
  for (const auto& row : r.rows)
    print_csv_row(std::cout, {num(row.epsilon), num(row.c_half), num(row.c_full), row.stable ? "true" : "false"});
  if (r.epsilon_min) std::cout << "# epsilon_min " << num(*r.epsilon_min) << ", C " << num(r.c_at_eps) << "\n";
  else std::cout << "# epsilon_min none\n";
  return 0;
}

int cmd_spectrum(const Options& o) {
  const fb::ModelSpec m = load_model(o);
  std::vector<std::size_t> cutoffs = o.cutoffs;
  if (cutoffs.empty()) cutoffs = {o.n_max};
  const auto rows = fb::spectrum_drift(m, cutoffs, o.levels);
  std::cout << "# truncation instability indicator; not a self-adjointness verdict\n";
  std::cout << "# model " << m.name << "\n";
  std::cout << "n_max,level,value,drift\n";
  for (const auto& row : rows)
    for (std::size_t i = 0; i < row.levels.size(); ++i)
      print_csv_row(std::cout, {std::to_string(row.n_max), std::to_string(i), num(row.levels[i]),
                                row.drift.empty() ? "" : num(row.drift[i])});
  return 0;
}

// ---------------------------------------------------------------------------------------------

void report_error(const Options& o, const char* kind, const std::string& message, const std::string& field,
                  int code) {
  if (o.json_errors) {
    nlohmann::json j{{"error", kind}, {"message", message}, {"exit_code", code}};
    if (!field.empty()) j["field"] = field;
    std::cerr << j.dump() << "\n";
  } else {
    std::cerr << "fockbench: " << kind << " error: " << message << "\n";
  }
}

void add_model_options(CLI::App* sub, Options& o) {
  sub->add_option("--model", o.model, "Preset name or path to a model JSON document")->required();
  sub->add_option("--n-max", o.n_max, "Particle-number cutoff")->capture_default_str();
  sub->add_option("--grid", o.grid, "Grid size for presets (toy K, lattice sites, Nelson L, Pauli-Fierz K)");
  sub->add_option("--modes", o.modes, "Number of field modes for boson and nelson presets");
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"fockbench: truncated Fock space operators and self-adjointness hypothesis checks", "fockbench"};
  app.set_version_flag("--version", FOCKBENCH_VERSION);
  app.add_flag("--json", o.json_errors, "Print errors as one-line JSON on stderr");
  app.require_subcommand(1);
  app.fallthrough();

  const std::string presets = [] {
    std::string s;
    for (const auto& p : fb::preset_names()) s += (s.empty() ? "" : ", ") + p;
    return s;
  }();

  auto* dims = app.add_subcommand("dims", "Print sector dimensions and the total dimension");
  dims->add_option("--d", o.d, "Number of modes");
  dims->add_option("--model", o.model, "Take the number of modes from this model");
  dims->add_option("--n-max", o.n_max, "Particle-number cutoff")->capture_default_str();

  auto* build = app.add_subcommand("build", "Compile H0, HI, Hdiag, H2 and write Matrix Market files");
  add_model_options(build, o);
  build->add_option("--out-dir", o.out_dir, "Directory for H0.mtx, HI.mtx, Hdiag.mtx, H2.mtx")->capture_default_str();

  auto* ccr = app.add_subcommand("ccr", "Random commutation-relation self-test; exit 4 if the deviation exceeds 1e-10");
  ccr->add_option("--d", o.d, "Number of modes");
  ccr->add_option("--model", o.model, "Take the number of modes from this model");
  ccr->add_option("--n-max", o.n_max, "Particle-number cutoff")->capture_default_str();
  ccr->add_option("--trials", o.trials, "Number of random trials")->capture_default_str();
  ccr->add_option("--seed", o.seed, "Random seed")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "Band check, compliance values and splitting fits; writes a report");
  add_model_options(verify, o);
  verify->add_option("--n-range", o.n_range, "Sectors a:b to evaluate (default 0:n_max-bandwidth)");
  verify->add_option("--variant", o.variant, "Weight variant")
      ->check(CLI::IsMember({"quadratic", "quartic"}))
      ->capture_default_str();
  verify->add_option("--threshold", o.threshold, "Largest fitted slope counted as bounded")->capture_default_str();
  verify->add_flag("--with-bounds", o.with_bounds, "Also sample the inequalities matching the model family");
  verify->add_option("--samples", o.samples, "Samples per sector for --with-bounds")->capture_default_str();
  verify->add_option("--seed", o.seed, "Random seed for --with-bounds")->capture_default_str();
  verify->add_option("--out", o.out, "Output stem; writes STEM.json and/or STEM.csv (default: stdout)");
  verify->add_option("--format", o.format, "Report format")
      ->check(CLI::IsMember({"json", "csv", "both"}))
      ->capture_default_str();

  auto* scaling = app.add_subcommand("scaling", "Table of compliance values and the fitted log-log slope");
  add_model_options(scaling, o);
  scaling->add_option("--n-range", o.n_range, "Sectors a:b to evaluate (default 0:n_max-bandwidth)");
  scaling->add_option("--variant", o.variant, "Weight variant")
      ->check(CLI::IsMember({"quadratic", "quartic"}))
      ->capture_default_str();

  auto* bounds = app.add_subcommand("bounds", "Sample the model inequalities; exit 4 on any violation");
  add_model_options(bounds, o);
  bounds->add_option("--bound", o.bounds, "Inequality: eq13, eq33, eq35, eq36 (default: all matching the family)")
      ->delimiter(',')
      ->check(CLI::IsMember({"eq13", "eq33", "eq35", "eq36"}));
  bounds->add_option("--n", o.sectors, "Sectors to sample, comma separated (default: all with n+2 <= n_max)")
      ->delimiter(',');
  bounds->add_option("--samples", o.samples, "Samples per sector")->capture_default_str();
  bounds->add_option("--seed", o.seed, "Random seed")->capture_default_str();

  auto* relbound = app.add_subcommand("relbound", "Relative-bound constants C(eps) against H0 and N^exponent");
  add_model_options(relbound, o);
  relbound->add_option("--exponent", o.exponent, "Power of N in the comparison operator")->capture_default_str();
  relbound->add_option("--samples", o.samples, "Sample count (doubled for the stability check)")
      ->capture_default_str();
  relbound->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  relbound->add_option("--cutoffs", o.cutoffs, "Scan C(epsilon) across these cutoffs instead")->delimiter(',');
  relbound->add_option("--epsilon", o.epsilon, "Epsilon for --cutoffs")->capture_default_str();

  auto* spectrum = app.add_subcommand("spectrum", "Lowest eigenvalues of H0 + HI across cutoffs, as CSV");
  add_model_options(spectrum, o);
  spectrum->add_option("--cutoffs", o.cutoffs, "Increasing cutoffs, comma separated (default: --n-max)")
      ->delimiter(',');
  spectrum->add_option("--levels", o.levels, "Number of levels per cutoff")->capture_default_str();

  app.footer("Presets: " + presets + "\nExit codes: 0 ok, 2 usage, 3 validation, 4 check failure");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error(o, "usage", e.what(), {}, kExitUsage);
    return kExitUsage;
  }

  try {
    if (*dims) return cmd_dims(o);
    if (*build) return cmd_build(o);
    if (*ccr) return cmd_ccr(o);
    if (*verify) return cmd_verify(o);
    if (*scaling) return cmd_scaling(o);
    if (*bounds) return cmd_bounds(o);
    if (*relbound) return cmd_relbound(o);
    if (*spectrum) return cmd_spectrum(o);
  } catch (const UsageError& e) {
    report_error(o, "usage", e.what(), {}, kExitUsage);
    return kExitUsage;
  } catch (const fb::ValidationError& e) {
    report_error(o, "validation", e.what(), e.field(), kExitValidation);
    return kExitValidation;
  } catch (const fb::SizingError& e) {
    report_error(o, "sizing", e.what(), {}, kExitValidation);
    return kExitValidation;
  } catch (const fb::SpaceMismatch& e) {
    report_error(o, "validation", e.what(), {}, kExitValidation);
    return kExitValidation;
  } catch (const std::exception& e) {
    report_error(o, "internal", e.what(), {}, 1);
    return 1;
  }
  return kExitUsage;
}
