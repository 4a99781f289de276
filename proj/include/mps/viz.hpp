#pragma once

#include <functional>
#include <string>

#include "mps/engine.hpp"

namespace mps {

struct RenderOptions {
  enum class Layout { linear_tree, radial };
  enum class Label { name_only, name_and_proportion };

  Layout layout = Layout::radial;
  Label label = Label::name_only;
  int max_label_chars = 24;
  /// Fill color for a node given its root-to-node covariate path; empty
  /// result or no hook falls back to the depth palette.
  std::function<std::string(const IndexList& path, const PathNode& node)> node_color;

  void validate() const;
};

RenderOptions::Layout parse_layout(std::string_view name);

/// Graphviz text: one digraph per root, children in stored (descending count)
/// order, node ids "n" + covariate prefix joined by '_'.
std::string to_dot(const PathForest& forest, const RenderOptions& opts = {});

/// Leaves on the outer ring at equal angles, depth mapped to radius.
/// Throws std::length_error above 10,000 leaves.
std::string to_svg_radial(const PathForest& forest, const RenderOptions& opts = {});

/// Left-justified top-down tree drawing.
std::string to_svg_tree(const PathForest& forest, const RenderOptions& opts = {});

/// Dispatches on opts.layout.
std::string to_svg(const PathForest& forest, const RenderOptions& opts = {});

/// Canonical JSON with fixed key order; forest_from_json(to_json(f)) == f.
std::string to_json(const PathForest& forest);
PathForest forest_from_json(const std::string& text);

/// Current rule-R slack memo as JSON (entries ordered by key).
std::string d_table_json();

}  // namespace mps
