// maslov-count: eigenvalue counts, assumption checks, oracle comparisons, box audits and
// spectral curves for a configured system.

#include "maslov/maslov.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_error = 1;
constexpr int exit_assumption = 2;
constexpr int exit_indeterminate = 3;

struct Flags {
  std::string command;
  std::string config;
  std::string window;
  int resolution = 0;
  bool json = false;
  std::string out;
  std::string method = "renormalized";
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw maslov::IoError("cannot read " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::pair<double, double> parse_window(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw maslov::Error("--window expects a,b");
  const auto a = maslov::Expression::parse(text.substr(0, comma));
  const auto b = maslov::Expression::parse(text.substr(comma + 1));
  if (a.depends_on_x() || b.depends_on_x()) throw maslov::Error("--window must not depend on x");
  return {a(0.0), b(0.0)};
}

void emit(const Flags& f, const std::string& body) {
  if (f.out.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream o(f.out, std::ios::binary);
  if (!o || !(o << body)) throw maslov::IoError("cannot write " + f.out);
}

template <class Report>
void emit_report(const Flags& f, const Report& r) {
  emit(f, f.json ? maslov::to_json(r).dump(2) + "\n" : maslov::to_text(r));
}

int run(const Flags& f) {
  using namespace maslov;
  const SystemConfig cfg = parse_config(read_file(f.config));
  std::optional<std::pair<double, double>> window;
  if (!f.window.empty()) window = parse_window(f.window);

  if (f.command == "check") {
    // Keep the window even inside the essential spectrum so the failing hypothesis is reported.
    const Problem p = build_problem(cfg, window, EssentialSpectrumPolicy::allow);
    const AssumptionReport r = check_assumptions(p.system, p.bc, p.lambda1, p.lambda2, p.count.assumptions);
    emit_report(f, r);
    return r.passed() ? exit_ok : exit_assumption;
  }

  Problem p = build_problem(cfg, window);
  if (f.resolution > 0) p.resolution = f.resolution;
  if (f.command == "count") {
    emit_report(f, renormalized_count(p.system, p.bc, p.lambda1, p.lambda2, p.count));
    return exit_ok;
  }
  if (f.command == "oracle") {
    OracleComparison o;
    o.window = {p.lambda1, p.lambda2};
    o.renormalized = renormalized_count(p.system, p.bc, p.lambda1, p.lambda2, p.count).count;
    try {
      o.standard = standard_maslov_count(p.system, p.bc, p.lambda1, p.lambda2, p.count).count;
    } catch (const UnsupportedSystem& e) {
      o.notes.push_back(std::string("standard: ") + e.what());
    }
    try {
      o.fd = fd_count(p.system, p.bc, p.lambda1, p.lambda2, p.fd);
    } catch (const UnsupportedSystem& e) {
      o.notes.push_back(std::string("fd: ") + e.what());
    } catch (const AmbiguousNearEndpoint& e) {
      o.notes.push_back(std::string("fd: ") + e.what());
    }
    emit_report(f, o);
    return o.agree() ? exit_ok : exit_error;
  }
  if (f.command == "audit") {
    const BoxAudit a = maslov_box_audit(p.system, p.bc, p.lambda1, p.lambda2,
                                        AuditOptions{p.count, p.audit_lambda_samples, false});
    emit_report(f, a);
    return a.consistent ? exit_ok : exit_error;
  }
  if (f.command == "curves") {
    const CurveMethod method = f.method == "standard" ? CurveMethod::standard : CurveMethod::renormalized;
    ScanOptions so;
    so.count = p.count;
    const CurveSet cs = scan_box(p.system, p.bc, p.lambda1, p.lambda2, p.resolution, method, so);
    if (f.json) {
      Flags g = f;
      if (!f.out.empty()) {
        export_curves(cs, CurveFormat::csv, f.out);
        g.out.clear();
      }
      emit_report(g, cs);
    } else if (f.out.empty()) {
      std::cout << curves_csv(cs);
    } else {
      const bool svg = f.out.size() >= 4 && f.out.compare(f.out.size() - 4, 4, ".svg") == 0;
      export_curves(cs, svg ? CurveFormat::svg : CurveFormat::csv, f.out);
    }
    return exit_ok;
  }
  throw Error("unknown command " + f.command);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenvalue counts for linear Hamiltonian systems on [0, 1] via conjugate points"};
  Flags f;
  app.add_option("command", f.command, "count | curves | check | oracle | audit")
      ->required()
      ->check(CLI::IsMember({"count", "curves", "check", "oracle", "audit"}));
  app.add_option("--config", f.config, "system configuration file")->required();
  app.add_option("--window", f.window, "spectral window a,b (overrides the config)");
  app.add_option("--resolution", f.resolution, "lambda columns for curves")->check(CLI::PositiveNumber);
  app.add_flag("--json", f.json, "JSON output");
  app.add_option("--out", f.out, "output file (.csv or .svg for curves)");
  app.add_option("--method", f.method, "curve method")->check(CLI::IsMember({"renormalized", "standard"}));
  CLI11_PARSE(app, argc, argv);
  try {
    return run(f);
  } catch (const maslov::AssumptionFailure& e) {
    std::cerr << "assumption failure: " << e.what() << "\n";
    return exit_assumption;
  } catch (const maslov::WindowTouchesEssentialSpectrum& e) {
    std::cerr << "assumption failure: " << e.what() << "\n";
    return exit_assumption;
  } catch (const maslov::OutsideSpectralInterval& e) {
    std::cerr << "assumption failure: " << e.what() << "\n";
    return exit_assumption;
  } catch (const maslov::IndeterminateCrossing& e) {
    std::cerr << "indeterminate crossing: " << e.what() << "\n";
    return exit_indeterminate;
  } catch (const maslov::ConfigError& e) {
    std::cerr << f.config << ": " << e.what() << "\n";
    return exit_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_error;
  }
}
