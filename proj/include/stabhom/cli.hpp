#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stabhom/path.hpp"
#include "stabhom/registry.hpp"

namespace stabhom::cli {

enum class Command { RunExample, Verify, ExportFrames, List };

/// Exit codes shared by every command.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 2;
inline constexpr int kExitError = 3;
inline constexpr int kExitUnknown = 4;

inline constexpr const char* kOutputDirEnv = "STABHOM_OUTPUT_DIR";

/// Command-line overrides; unset fields fall back to the config file, then defaults.
struct Overrides {
  std::optional<int> s_steps;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> rel_tol;
  std::optional<double> abs_tol;
  std::optional<double> max_step;
};

struct RunSpec {
  Command command = Command::List;
  std::string example_name;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> config_file;
  Overrides overrides;
};

/// Flag value if given, else $STABHOM_OUTPUT_DIR, else ./stabhom_out.
[[nodiscard]] std::filesystem::path resolve_output_dir(const std::optional<std::string>& flag);

/// Options for one example: defaults, then the [default] and [<example>] sections of the
/// INI file, then the overrides. Unknown keys throw InvalidArgument.
[[nodiscard]] RunOptions load_options(const std::optional<std::filesystem::path>& config,
                                      const std::string& example, const Overrides& overrides);

/// An example passes when every expect-pass check passes and every expect-fail check fails.
[[nodiscard]] bool outcome_passes(const Outcome& outcome);

/// Full text report: options, one certificate per check, notes and the verdict.
[[nodiscard]] std::string render_report(const Example& example, const RunOptions& opts,
                                        const Outcome& outcome);
/// One row per check.
[[nodiscard]] std::string render_summary_csv(const Outcome& outcome);
/// One row per (check, s) for checks carrying per-s slices.
[[nodiscard]] std::string render_margins_csv(const Outcome& outcome);

/// Dispatches a command. Reports go to `out`, diagnostics to `err`; returns the exit code.
int execute(const RunSpec& spec, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------
// SVG frames

/// Scalar function of (s, x) drawn as a graph for one-dimensional examples.
using PotentialFn = std::function<double(double, double)>;

struct FrameStyle {
  double extent = 3.0;        // half-width of the planar viewport (chart viewport for spheres)
  double graph_extent = 10.0; // half-width of the x range for graphs
  int streamlines = 64;
  std::uint64_t seed = 20240601;
};

/// Streamline portrait of a planar field.
[[nodiscard]] std::string render_streamlines_svg(const FieldDescription& field, const std::string& title,
                                                 const FrameStyle& style = {});
/// Graph of x -> g(x) on [-graph_extent, graph_extent].
[[nodiscard]] std::string render_graph_svg(const std::function<double(double)>& g, const std::string& title,
                                           const FrameStyle& style = {});
/// Orthographic view of chart streamlines carried to the sphere by stereo_inv.
[[nodiscard]] std::string render_sphere_svg(const FieldDescription& chart_field, const std::string& title,
                                            const FrameStyle& style = {});

/// One frame per s in {0, 1/(K-1), ..., 1}. One-dimensional paths draw `potential` when given
/// and the field otherwise; planar paths draw streamlines, or the sphere view when on_sphere.
/// Any other dimension throws UnsupportedDimension. Returns the written paths in order.
std::vector<std::filesystem::path> export_frames(const HomotopyPath& path, bool on_sphere,
                                                 const PotentialFn& potential, int K,
                                                 const std::filesystem::path& dir,
                                                 const FrameStyle& style = {});

}  // namespace stabhom::cli
