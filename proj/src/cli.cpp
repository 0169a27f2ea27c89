#include "stabhom/cli.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace stabhom::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error(ErrorKind::InvalidArgument, "cannot write " + p.string());
  os << content;
}

template <class T>
T parse_value(const std::string& key, const std::string& raw) {
  std::istringstream is(raw);
  T v{};
  is >> v;
  if (is.fail() || !(is >> std::ws).eof())
    throw Error(ErrorKind::InvalidArgument, "bad value for " + key + ": " + raw);
  return v;
}

void apply_section(RunOptions& o, const boost::property_tree::ptree& section) {
  for (const auto& [key, node] : section) {
    const std::string raw = node.get_value<std::string>();
    if (key == "rel_tol") o.cfg.rel_tol = parse_value<double>(key, raw);
    else if (key == "abs_tol") o.cfg.abs_tol = parse_value<double>(key, raw);
    else if (key == "max_step") o.cfg.max_step = parse_value<double>(key, raw);
    else if (key == "snap_radius") o.cfg.snap_radius = parse_value<double>(key, raw);
    else if (key == "samples") o.samples = parse_value<int>(key, raw);
    else if (key == "s_steps") o.s_steps = parse_value<int>(key, raw);
    else if (key == "seed") o.seed = parse_value<std::uint64_t>(key, raw);
    else if (key == "disturbance_kind") o.disturbance_kind = raw;
    else if (key == "disturbance_amplitude") o.disturbance_amplitude = parse_value<double>(key, raw);
    else if (key == "disturbance_hold") o.disturbance_hold = parse_value<double>(key, raw);
    else throw Error(ErrorKind::InvalidArgument, "unknown config key: " + key);
  }
}

void validate(const RunOptions& o) {
  o.cfg.validate();
  if (o.s_steps < 2) throw Error(ErrorKind::InvalidArgument, "s_steps must be at least 2");
  if (o.samples < 1) throw Error(ErrorKind::InvalidArgument, "samples must be positive");
  if (!(o.disturbance_amplitude >= 0.0) || !(o.disturbance_hold > 0.0))
    throw Error(ErrorKind::InvalidArgument, "disturbance amplitude must be >= 0 and hold > 0");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

// Runs one example and writes its directory; returns the outcome.
Outcome run_and_write(const Example& ex, const RunOptions& opts, const fs::path& root, std::string& report) {
  Outcome outcome = ex.run(opts);
  report = render_report(ex, opts, outcome);
  const fs::path dir = root / ex.name;
  fs::create_directories(dir);
  write_file(dir / "report.txt", report);
  write_file(dir / "summary.csv", render_summary_csv(outcome));
  const std::string margins = render_margins_csv(outcome);
  if (margins.find('\n') + 1 < margins.size()) write_file(dir / "margins.csv", margins);
  for (const auto& a : outcome.artifacts) write_file(dir / a.filename, a.content);
  return outcome;
}

int cmd_list(std::ostream& out) {
  for (const auto& ex : registry())
    out << ex.name << (ex.negative_control ? " [negative control]" : "") << "  " << ex.summary << '\n';
  return kExitPass;
}

int cmd_run(const RunSpec& spec, std::ostream& out) {
  const Example& ex = find_example(spec.example_name);
  const RunOptions opts = load_options(spec.config_file, ex.name, spec.overrides);
  std::string report;
  const Outcome outcome = run_and_write(ex, opts, spec.output_dir, report);
  out << report;
  for (const auto& c : outcome.checks)
    if (c.expect_pass && !c.cert.pass) return kExitFail;
  return kExitPass;
}

int cmd_verify(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  std::vector<const Example*> targets;
  if (spec.example_name == "all") {
    for (const auto& ex : registry()) targets.push_back(&ex);
  } else {
    targets.push_back(&find_example(spec.example_name));
  }
  std::string text;
  int as_expected = 0;
  bool errored = false;
  for (const Example* ex : targets) {
    text += "example: " + ex->name + "\n";
    text += std::string("expected: ") + (ex->negative_control ? "fail (negative control)" : "pass") + "\n";
    try {
      const RunOptions opts = load_options(spec.config_file, ex->name, spec.overrides);
      std::string report;
      const Outcome outcome = run_and_write(*ex, opts, spec.output_dir, report);
      const bool passed = outcome_passes(outcome);
      const bool ok = passed != ex->negative_control;
      as_expected += ok ? 1 : 0;
      for (const auto& c : outcome.checks)
        text += "  check: " + c.name + " | expect=" + (c.expect_pass ? "pass" : "fail") +
                " verdict=" + (c.cert.pass ? "pass" : "fail") + " worst_margin=" + fmt("%.9e", c.cert.worst_margin) +
                " samples=" + std::to_string(c.cert.sample_count) + "\n";
      text += std::string("observed: ") + (passed ? "pass" : "fail") + "\n";
      text += std::string("result: ") + (ok ? "as expected" : "UNEXPECTED") + "\n";
    } catch (const Error& e) {
      errored = true;
      text += std::string("result: error ") + e.what() + "\n";
      err << ex->name << ": " << e.what() << '\n';
    }
    text += "\n";
  }
  text += "verified: " + std::to_string(as_expected) + "/" + std::to_string(targets.size()) + " as expected\n";
  fs::create_directories(spec.output_dir);
  write_file(spec.output_dir / "verify_report.txt", text);
  out << text;
  if (errored) return kExitError;
  return as_expected == static_cast<int>(targets.size()) ? kExitPass : kExitFail;
}

int cmd_export(const RunSpec& spec, std::ostream& out) {
  const Example& ex = find_example(spec.example_name);
  if (!ex.path) throw Error(ErrorKind::InvalidArgument, ex.name + " has no homotopy path to draw");
  const RunOptions opts = load_options(spec.config_file, ex.name, spec.overrides);
  FrameStyle style;
  style.seed = opts.seed;
  const auto files =
      export_frames(ex.path(), ex.on_sphere, ex.potential, opts.s_steps, spec.output_dir / ex.name / "frames", style);
  for (const auto& f : files) out << f.string() << '\n';
  return kExitPass;
}

}  // namespace

fs::path resolve_output_dir(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "stabhom_out";
}

RunOptions load_options(const std::optional<fs::path>& config, const std::string& example, const Overrides& ov) {
  RunOptions o;
  if (config) {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::read_ini(config->string(), tree);
    } catch (const boost::property_tree::ptree_error& e) {
      throw Error(ErrorKind::InvalidArgument, std::string("config: ") + e.what());
    }
    for (const auto& [name, section] : tree)
      if (section.empty() && !section.data().empty())
        throw Error(ErrorKind::InvalidArgument, "config key outside a section: " + name);
    if (auto d = tree.get_child_optional("default")) apply_section(o, *d);
    if (auto s = tree.get_child_optional(example)) apply_section(o, *s);
  }
  if (ov.s_steps) o.s_steps = *ov.s_steps;
  if (ov.samples) o.samples = *ov.samples;
  if (ov.seed) o.seed = *ov.seed;
  if (ov.rel_tol) o.cfg.rel_tol = *ov.rel_tol;
  if (ov.abs_tol) o.cfg.abs_tol = *ov.abs_tol;
  if (ov.max_step) o.cfg.max_step = *ov.max_step;
  validate(o);
  return o;
}

bool outcome_passes(const Outcome& outcome) {
  for (const auto& c : outcome.checks)
    if (c.cert.pass != c.expect_pass) return false;
  return true;
}

std::string render_report(const Example& ex, const RunOptions& o, const Outcome& outcome) {
  std::string r;
  r += "example: " + ex.name + "\n";
  r += "summary: " + ex.summary + "\n";
  r += std::string("negative_control: ") + (ex.negative_control ? "yes" : "no") + "\n";
  r += "s_steps: " + std::to_string(o.s_steps) + "\n";
  r += "samples: " + std::to_string(o.samples) + "\n";
  r += "seed: " + std::to_string(o.seed) + "\n";
  r += "rel_tol: " + fmt("%.3e", o.cfg.rel_tol) + "\n";
  r += "abs_tol: " + fmt("%.3e", o.cfg.abs_tol) + "\n";
  r += "max_step: " + fmt("%.3e", o.cfg.max_step) + "\n";
  for (const auto& c : outcome.checks) {
    r += "\ncheck: " + c.name + "\n";
    r += std::string("expect: ") + (c.expect_pass ? "pass" : "fail") + "\n";
    r += c.cert.to_report();
  }
  if (!outcome.notes.empty()) r += "\n";
  for (const auto& n : outcome.notes) r += "note: " + n + "\n";
  r += std::string("\nstatus: ") + (outcome_passes(outcome) ? "pass" : "fail") + "\n";
  return r;
}

std::string render_summary_csv(const Outcome& outcome) {
  std::string s = "check,property,expect,verdict,worst_margin,sample_count,tolerance\n";
  for (const auto& c : outcome.checks)
    s += csv_field(c.name) + "," + csv_field(c.cert.property) + "," + (c.expect_pass ? "pass" : "fail") + "," +
         (c.cert.pass ? "pass" : "fail") + "," + fmt("%.17g", c.cert.worst_margin) + "," +
         std::to_string(c.cert.sample_count) + "," + fmt("%.17g", c.cert.tolerance) + "\n";
  return s;
}

std::string render_margins_csv(const Outcome& outcome) {
  std::string s = "check,s,worst_margin,verdict\n";
  for (const auto& c : outcome.checks)
    for (const auto& sl : c.cert.slices)
      s += csv_field(c.name) + "," + fmt("%.17g", sl.s) + "," + fmt("%.17g", sl.worst_margin) + "," +
           (sl.pass ? "pass" : "fail") + "\n";
  return s;
}

int execute(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    switch (spec.command) {
      case Command::List: return cmd_list(out);
      case Command::RunExample: return cmd_run(spec, out);
      case Command::Verify: return cmd_verify(spec, out, err);
      case Command::ExportFrames: return cmd_export(spec, out);
    }
    return kExitError;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return e.kind() == ErrorKind::UnknownExample ? kExitUnknown : kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace stabhom::cli
