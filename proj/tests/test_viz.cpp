#include <cmath>
#include <numbers>
#include <regex>
#include <vector>

#include "doctest.h"
#include "mps/viz.hpp"
#include "support.hpp"

using namespace mps;

PathForest figure3_forest();

namespace {

// Tag balance, quoted attributes and entity syntax; enough to catch broken output.
bool well_formed_xml(const std::string& s, std::string& why) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  bool root_seen = false;
  while (i < s.size()) {
    if (s[i] == '&') {
      const auto semi = s.find(';', i);
      static const std::regex ent("&(amp|lt|gt|quot|apos|#[0-9]+|#x[0-9a-fA-F]+);");
      if (semi == std::string::npos || !std::regex_match(s.substr(i, semi - i + 1), ent)) {
        why = "bad entity at " + std::to_string(i);
        return false;
      }
      i = semi + 1;
      continue;
    }
    if (s[i] != '<') {
      if (stack.empty() && !std::isspace(static_cast<unsigned char>(s[i]))) {
        why = "text outside root";
        return false;
      }
      ++i;
      continue;
    }
    if (s.compare(i, 5, "<?xml") == 0) {
      i = s.find("?>", i);
      if (i == std::string::npos) return why = "unterminated declaration", false;
      i += 2;
      continue;
    }
    if (s.compare(i, 4, "<!--") == 0) {
      i = s.find("-->", i);
      if (i == std::string::npos) return why = "unterminated comment", false;
      i += 3;
      continue;
    }
    // scan to the closing '>' honouring quotes
    std::size_t j = i + 1;
    char quote = 0;
    for (; j < s.size(); ++j) {
      if (quote) {
        if (s[j] == quote) quote = 0;
        else if (s[j] == '<') return why = "'<' inside attribute", false;
      } else if (s[j] == '"' || s[j] == '\'') {
        quote = s[j];
      } else if (s[j] == '>') {
        break;
      }
    }
    if (j >= s.size()) return why = "unterminated tag", false;
    std::string tag = s.substr(i + 1, j - i - 1);
    if (tag.empty()) return why = "empty tag", false;
    if (tag[0] == '/') {
      const std::string name = tag.substr(1);
      if (stack.empty() || stack.back() != name) return why = "mismatched </" + name + ">", false;
      stack.pop_back();
    } else {
      const bool self = tag.back() == '/';
      const std::string name = tag.substr(0, tag.find_first_of(" \t\n/"));
      if (stack.empty()) {
        if (root_seen) return why = "second root element", false;
        root_seen = true;
      }
      if (!self) stack.push_back(name);
    }
    i = j + 1;
  }
  if (!stack.empty()) return why = "unclosed <" + stack.back() + ">", false;
  if (!root_seen) return why = "no root", false;
  return true;
}

struct SvgNode {
  double x, y;
  std::string title;
};

// Covariate circles carry r="4" and a <title>.
std::vector<SvgNode> svg_nodes(const std::string& svg) {
  static const std::regex re("<circle cx=\"([-0-9.]+)\" cy=\"([-0-9.]+)\" r=\"4\"[^>]*><title>([^<]*)</title>");
  std::vector<SvgNode> out;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it)
    out.push_back({std::stod((*it)[1]), std::stod((*it)[2]), (*it)[3]});
  return out;
}

PathNode leaf(int cov, int count = 1) { return PathNode{cov, count, 10, count / 10.0, {}}; }

PathForest chain() {
  PathForest f;
  f.depth = 2;
  f.config.d = 2;
  f.names = {"A", "B", "C"};
  f.roots = {PathNode{0, 10, 12, 10 / 12.0, {leaf(1, 10)}}};
  return f;
}

// 67 leaves across a few roots, depth 3.
PathForest wide_forest() {
  PathForest f;
  f.depth = 3;
  f.config.d = 3;
  for (int j = 0; j < 64; ++j) f.names.push_back("term_" + std::to_string(j));
  int made = 0, cov = 0;
  while (made < 67) {
    PathNode root{cov++ % 64, 10, 20, 0.5, {}};
    for (int m = 0; m < 4 && made < 67; ++m) {
      PathNode mid{cov++ % 64, 10, 20, 0.5, {}};
      for (int k = 0; k < 5 && made < 67; ++k, ++made) mid.children.push_back(leaf(cov++ % 64, 10 - k));
      root.children.push_back(mid);
    }
    f.roots.push_back(root);
  }
  return f;
}

}  // namespace

TEST_SUITE("viz") {

TEST_CASE("dot for a single path") {
  const std::string dot = to_dot(chain());
  CHECK(dot.find("digraph root_0") != std::string::npos);
  CHECK(dot.find("n0 [label=\"A\"") != std::string::npos);
  CHECK(dot.find("n0_1 [label=\"B\"") != std::string::npos);
  CHECK(dot.find("n0 -> n0_1;") != std::string::npos);
  std::size_t edges = 0;
  for (std::size_t p = dot.find("->"); p != std::string::npos; p = dot.find("->", p + 1)) ++edges;
  CHECK(edges == 1);
}

TEST_CASE("dot for the two-tree example") {
  const std::string dot = to_dot(figure3_forest());
  CHECK(dot.find("digraph root_0") != std::string::npos);
  CHECK(dot.find("digraph root_1") != std::string::npos);
  CHECK(dot.find("digraph root_2") == std::string::npos);
  static const std::regex leafdef("n[0-9]+_[0-9]+_[0-9]+ \\[");
  CHECK(std::distance(std::sregex_iterator(dot.begin(), dot.end(), leafdef), std::sregex_iterator()) == 10);
  CHECK(to_dot(figure3_forest()) == dot);
}

TEST_CASE("labels") {
  RenderOptions o;
  o.label = RenderOptions::Label::name_and_proportion;
  CHECK(to_dot(chain(), o).find("A (0.83)") != std::string::npos);
  auto f = chain();
  f.names[0] = "a_very_long_covariate_name";
  RenderOptions shortl;
  shortl.max_label_chars = 8;
  CHECK(to_dot(f, shortl).find("\"a_ver...\"") != std::string::npos);
  shortl.max_label_chars = 0;
  CHECK_THROWS(shortl.validate());
  f.names[0] = "x<&>\"y";
  std::string why;
  CHECK(well_formed_xml(to_svg_radial(f), why));
  CHECK(well_formed_xml(to_svg_tree(f), why));
}

TEST_CASE("radial svg") {
  auto one = svg_nodes(to_svg_radial(chain()));
  REQUIRE(one.size() == 2);
  // a single path lies on one ray from the centre
  const std::string svg = to_svg_radial(chain());
  static const std::regex centre("<circle cx=\"([-0-9.]+)\" cy=\"([-0-9.]+)\" r=\"3\"");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, centre));
  const double cx = std::stod(m[1]), cy = std::stod(m[2]);
  const double a0 = std::atan2(one[0].y - cy, one[0].x - cx), a1 = std::atan2(one[1].y - cy, one[1].x - cx);
  CHECK(std::abs(a0 - a1) < 0.01);
  CHECK(std::hypot(one[1].x - cx, one[1].y - cy) > std::hypot(one[0].x - cx, one[0].y - cy));
}

TEST_CASE("67 leaves render without overlap, in DOT sibling order") {
  const auto f = wide_forest();
  REQUIRE(count_leaves(f) == 67);
  const std::string svg = to_svg_radial(f);
  std::string why;
  REQUIRE_MESSAGE(well_formed_xml(svg, why), why);

  static const std::regex centre("<circle cx=\"([-0-9.]+)\" cy=\"([-0-9.]+)\" r=\"3\"");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, centre));
  const double cx = std::stod(m[1]), cy = std::stod(m[2]);

  auto nodes = svg_nodes(svg);
  std::vector<SvgNode> leaves;
  // leaves are the nodes on the outer radius
  double outer = 0;
  for (auto& n : nodes) outer = std::max(outer, std::hypot(n.x - cx, n.y - cy));
  for (auto& n : nodes)
    if (std::hypot(n.x - cx, n.y - cy) > outer - 0.5) leaves.push_back(n);
  REQUIRE(leaves.size() == 67);
  for (std::size_t i = 0; i < leaves.size(); ++i)
    for (std::size_t j = i + 1; j < leaves.size(); ++j)
      CHECK(std::hypot(leaves[i].x - leaves[j].x, leaves[i].y - leaves[j].y) >= 8.0);

  // clockwise from the top, in the same order as the DOT leaves
  double prev = -1;
  for (auto& n : leaves) {
    double a = std::atan2(n.y - cy, n.x - cx) + std::numbers::pi / 2;
    if (a < 0) a += 2 * std::numbers::pi;
    CHECK(a > prev);
    prev = a;
  }
  const std::string dot = to_dot(f);
  static const std::regex leafdef("n[0-9]+_[0-9]+_[0-9]+ \\[label=\"([^\"]*)\"");
  std::vector<std::string> dot_leaves;
  for (auto it = std::sregex_iterator(dot.begin(), dot.end(), leafdef); it != std::sregex_iterator(); ++it)
    dot_leaves.push_back((*it)[1]);
  REQUIRE(dot_leaves.size() == 67);
  for (std::size_t i = 0; i < 67; ++i) CHECK(leaves[i].title.rfind(dot_leaves[i] + " ", 0) == 0);
}

TEST_CASE("radial svg refuses very wide forests") {
  PathForest f;
  f.depth = 1;
  f.config.d = 1;
  for (int k = 0; k < 10001; ++k) f.roots.push_back(leaf(k));
  CHECK_THROWS_AS(to_svg_radial(f), std::length_error);
  CHECK_NOTHROW(to_dot(f));
}

TEST_CASE("svg is well formed for both layouts") {
  for (const auto& f : {chain(), figure3_forest(), wide_forest()}) {
    std::string why;
    RenderOptions o;
    CHECK_MESSAGE(well_formed_xml(to_svg(f, o), why), why);
    o.layout = RenderOptions::Layout::linear_tree;
    CHECK_MESSAGE(well_formed_xml(to_svg(f, o), why), why);
  }
  CHECK(parse_layout("tree") == RenderOptions::Layout::linear_tree);
  CHECK_THROWS(parse_layout("spiral"));
}

TEST_CASE("color hook") {
  RenderOptions o;
  o.node_color = [](const IndexList& path, const PathNode&) { return path.size() == 2 ? "#123456" : ""; };
  const std::string svg = to_svg_radial(chain(), o);
  CHECK(svg.find("#123456") != std::string::npos);
  CHECK(to_dot(chain(), o).find("#123456") != std::string::npos);
}

TEST_CASE("json round trip and byte stability") {
  for (auto f : {chain(), figure3_forest(), wide_forest()}) {
    f.config.seed = 99;
    f.config.model_class.kind = ModelKind::logistic;
    if (f.names.size() < 41) f.names.resize(41, "pad");
    const std::string j = to_json(f);
    CHECK(forest_from_json(j) == f);
    CHECK(to_json(forest_from_json(j)) == j);
    CHECK(j.find("\"children\": []") != std::string::npos);
  }
  const std::string j = to_json(chain());
  CHECK(j.find("\"format\"") < j.find("\"version\""));
  CHECK(j.find("\"version\"") < j.find("\"depth\""));
  CHECK(j.find("\"depth\"") < j.find("\"roots\""));
}

TEST_CASE("json rejects malformed input") {
  CHECK_THROWS_AS(forest_from_json("{"), DataError);
  CHECK_THROWS_AS(forest_from_json("{\"format\": \"other\"}"), DataError);
  auto j = nlohmann::json::parse(to_json(chain()));
  j["roots"][0]["children"][0]["index"] = 7;
  CHECK_THROWS_AS(forest_from_json(j.dump()), DataError);
}

}  // TEST_SUITE
