#include "mps/viz.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mps {

namespace {

constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2",
                                    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};
constexpr int kMaxSvgLeaves = 10000;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string covariate_name(const PathForest& f, int k) {
  if (k >= 0 && static_cast<std::size_t>(k) < f.names.size()) return f.names[k];
  return "X" + std::to_string(k + 1);
}

std::string short_name(const PathForest& f, int k, int max_chars) {
  std::string name = covariate_name(f, k);
  if (static_cast<int>(name.size()) <= max_chars) return name;
  if (max_chars >= 4) return name.substr(0, static_cast<std::size_t>(max_chars - 3)) + "...";
  return name.substr(0, static_cast<std::size_t>(max_chars));
}

struct Placed {
  const PathNode* node = nullptr;
  IndexList path;
  int level = 1;
  double pos = 0.0;  // in leaf units
  int parent = -1;
};

// Pre-order placement; leaves take consecutive positions left to right.
std::vector<Placed> place(const PathForest& forest) {
  std::vector<Placed> out;
  int next_leaf = 0;
  std::function<int(const PathNode&, IndexList&, int, int)> visit = [&](const PathNode& n, IndexList& path,
                                                                        int level, int parent) {
    path.push_back(n.covariate);
    const int id = static_cast<int>(out.size());
    out.push_back({&n, path, level, 0.0, parent});
    if (n.children.empty()) {
      out[id].pos = next_leaf++;
    } else {
      int first = -1, last = -1;
      for (const auto& c : n.children) {
        const int cid = visit(c, path, level + 1, id);
        if (first < 0) first = cid;
        last = cid;
      }
      out[id].pos = 0.5 * (out[first].pos + out[last].pos);
    }
    path.pop_back();
    return id;
  };
  IndexList path;
  for (const auto& root : forest.roots) visit(root, path, 1, -1);
  return out;
}

std::string fill_for(const RenderOptions& opts, const Placed& p) {
  if (opts.node_color) {
    std::string c = opts.node_color(p.path, *p.node);
    if (!c.empty()) return c;
  }
  return kPalette[(p.level - 1) % std::size(kPalette)];
}

std::string label_for(const PathForest& f, const RenderOptions& opts, const PathNode& n) {
  std::string s = short_name(f, n.covariate, opts.max_label_chars);
  if (opts.label == RenderOptions::Label::name_and_proportion) s += " (" + fmt(n.proportion) + ")";
  return s;
}

int leaf_total(const std::vector<Placed>& placed) {
  int leaves = 0;
  for (const auto& p : placed) leaves += p.node->children.empty();
  return leaves;
}

std::string svg_open(double w, double h) {
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
    << "\" viewBox=\"0 0 " << fmt(w) << ' ' << fmt(h) << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return o.str();
}

nlohmann::ordered_json node_json(const PathForest& f, const PathNode& n) {
  nlohmann::ordered_json j;
  j["index"] = n.covariate;
  j["name"] = covariate_name(f, n.covariate);
  j["count"] = n.count;
  j["draws"] = n.draws;
  j["proportion"] = n.proportion;
  j["children"] = nlohmann::ordered_json::array();
  for (const auto& c : n.children) j["children"].push_back(node_json(f, c));
  return j;
}

PathNode node_from_json(const nlohmann::ordered_json& j, int p) {
  PathNode n;
  j.at("index").get_to(n.covariate);
  if (n.covariate < 0 || n.covariate >= p) throw DataError("forest JSON: covariate index out of range");
  j.at("count").get_to(n.count);
  j.at("draws").get_to(n.draws);
  j.at("proportion").get_to(n.proportion);
  for (const auto& c : j.at("children")) n.children.push_back(node_from_json(c, p));
  return n;
}

}  // namespace

void RenderOptions::validate() const {
  if (max_label_chars < 1) throw std::invalid_argument("max_label_chars must be >= 1");
}

RenderOptions::Layout parse_layout(std::string_view name) {
  if (name == "radial") return RenderOptions::Layout::radial;
  if (name == "tree" || name == "linear" || name == "linear_tree") return RenderOptions::Layout::linear_tree;
  throw std::invalid_argument("unknown layout '" + std::string(name) + "'");
}

std::string to_dot(const PathForest& forest, const RenderOptions& opts) {
  opts.validate();
  const auto placed = place(forest);
  std::ostringstream o;
  std::size_t i = 0;
  int root_no = 0;
  while (i < placed.size()) {
    o << "digraph root_" << root_no++ << " {\n"
      << "  ordering=out;\n"
      << "  node [shape=box, style=\"rounded,filled\", fontname=\"Helvetica\"];\n";
    std::size_t j = i;
    do {
      const Placed& p = placed[j];
      std::string id = "n";
      for (std::size_t k = 0; k < p.path.size(); ++k) id += (k ? "_" : "") + std::to_string(p.path[k]);
      o << "  " << id << " [label=\"" << dot_escape(label_for(forest, opts, *p.node)) << "\", fillcolor=\""
        << fill_for(opts, p) << "\"];\n";
      if (p.parent >= 0) {
        std::string pid = id.substr(0, id.rfind('_'));
        o << "  " << pid << " -> " << id << ";\n";
      }
      ++j;
    } while (j < placed.size() && placed[j].parent >= 0);
    o << "}\n";
    i = j;
  }
  return o.str();
}

std::string to_svg_radial(const PathForest& forest, const RenderOptions& opts) {
  opts.validate();
  const auto placed = place(forest);
  const int leaves = leaf_total(placed);
  if (leaves > kMaxSvgLeaves)
    throw std::length_error("forest has " + std::to_string(leaves) + " leaves; too wide for SVG, use DOT output");
  const int depth = std::max(forest.depth, 1);
  // Outer ring long enough for one 14px label slot per leaf.
  const double outer = std::max(160.0, 14.0 * leaves / (2.0 * std::numbers::pi));
  const double ring = outer / depth;
  const double margin = 12.0 + 6.5 * (opts.max_label_chars + 7);
  const double c = outer + margin;
  const auto angle = [&](double pos) {
    return leaves > 0 ? 2.0 * std::numbers::pi * (pos + 0.5) / leaves - std::numbers::pi / 2.0 : 0.0;
  };
  const auto xy = [&](const Placed& p) {
    const double a = angle(p.pos), rad = ring * p.level;
    return std::pair{c + rad * std::cos(a), c + rad * std::sin(a)};
  };

  std::ostringstream o;
  o << svg_open(2 * c, 2 * c);
  o << "<g stroke=\"#888888\" stroke-width=\"1\" fill=\"none\">\n";
  for (std::size_t k = 1; k <= static_cast<std::size_t>(depth); ++k)
    o << "<circle cx=\"" << fmt(c) << "\" cy=\"" << fmt(c) << "\" r=\"" << fmt(ring * k)
      << "\" stroke=\"#eeeeee\"/>\n";
  for (const auto& p : placed) {
    const auto [x, y] = xy(p);
    double px = c, py = c;
    if (p.parent >= 0) std::tie(px, py) = xy(placed[p.parent]);
    o << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(x) << "\" y2=\"" << fmt(y)
      << "\"/>\n";
  }
  o << "</g>\n<circle cx=\"" << fmt(c) << "\" cy=\"" << fmt(c) << "\" r=\"3\" fill=\"#333333\"/>\n";
  o << "<g font-family=\"Helvetica, Arial, sans-serif\" font-size=\"11\">\n";
  for (const auto& p : placed) {
    const auto [x, y] = xy(p);
    o << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"4\" fill=\"" << fill_for(opts, p)
      << "\"><title>" << xml_escape(covariate_name(forest, p.node->covariate)) << " " << p.node->count << "/"
      << p.node->draws << "</title></circle>\n";
    const std::string text = xml_escape(label_for(forest, opts, *p.node));
    if (p.node->children.empty()) {
      // Leaf labels run outward along the ray, flipped on the left half to stay upright.
      const double a = angle(p.pos);
      const double deg = a * 180.0 / std::numbers::pi;
      const bool left = std::cos(a) < 0;
      const double lx = x + 7 * std::cos(a), ly = y + 7 * std::sin(a);
      o << "<text x=\"" << fmt(lx) << "\" y=\"" << fmt(ly) << "\" dominant-baseline=\"middle\" text-anchor=\""
        << (left ? "end" : "start") << "\" transform=\"rotate(" << fmt(left ? deg + 180 : deg) << ' ' << fmt(lx)
        << ' ' << fmt(ly) << ")\">" << text << "</text>\n";
    } else {
      o << "<text x=\"" << fmt(x + 5) << "\" y=\"" << fmt(y - 5) << "\" font-size=\"9\" fill=\"#333333\">" << text
        << "</text>\n";
    }
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

std::string to_svg_tree(const PathForest& forest, const RenderOptions& opts) {
  opts.validate();
  const auto placed = place(forest);
  const int leaves = leaf_total(placed);
  if (leaves > kMaxSvgLeaves)
    throw std::length_error("forest has " + std::to_string(leaves) + " leaves; too wide for SVG, use DOT output");
  const double dx = 14.0, dy = 60.0;
  const double label_room = 6.5 * (opts.max_label_chars + 7) + 10;
  const double width = std::max(1, leaves) * dx + 60.0;
  const double height = std::max(forest.depth, 1) * dy + label_room + 20.0;
  const auto xy = [&](const Placed& p) { return std::pair{30.0 + dx * (p.pos + 0.5), 10.0 + dy * p.level}; };

  std::ostringstream o;
  o << svg_open(width, height);
  o << "<g stroke=\"#888888\" stroke-width=\"1\">\n";
  for (const auto& p : placed) {
    if (p.parent < 0) continue;
    const auto [x, y] = xy(p);
    const auto [px, py] = xy(placed[p.parent]);
    o << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(x) << "\" y2=\"" << fmt(y)
      << "\"/>\n";
  }
  o << "</g>\n<g font-family=\"Helvetica, Arial, sans-serif\" font-size=\"11\">\n";
  for (const auto& p : placed) {
    const auto [x, y] = xy(p);
    o << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"4\" fill=\"" << fill_for(opts, p)
      << "\"><title>" << xml_escape(covariate_name(forest, p.node->covariate)) << " " << p.node->count << "/"
      << p.node->draws << "</title></circle>\n";
    const std::string text = xml_escape(label_for(forest, opts, *p.node));
    if (p.node->children.empty()) {
      o << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y + 8) << "\" dominant-baseline=\"middle\" transform=\"rotate(90 "
        << fmt(x) << ' ' << fmt(y + 8) << ")\">" << text << "</text>\n";
    } else {
      o << "<text x=\"" << fmt(x + 6) << "\" y=\"" << fmt(y - 6) << "\" font-size=\"9\">" << text << "</text>\n";
    }
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

std::string to_svg(const PathForest& forest, const RenderOptions& opts) {
  return opts.layout == RenderOptions::Layout::radial ? to_svg_radial(forest, opts) : to_svg_tree(forest, opts);
}

std::string to_json(const PathForest& forest) {
  nlohmann::ordered_json j;
  j["format"] = "mps-path-forest";
  j["version"] = 1;
  j["depth"] = forest.depth;
  j["covariate_names"] = forest.names;
  j["config"] = forest.config;
  j["roots"] = nlohmann::ordered_json::array();
  for (const auto& r : forest.roots) j["roots"].push_back(node_json(forest, r));
  return j.dump(2) + "\n";
}

PathForest forest_from_json(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("forest JSON: ") + e.what());
  }
  try {
    if (j.at("format") != "mps-path-forest") throw DataError("forest JSON: unexpected format tag");
    if (j.at("version") != 1) throw DataError("forest JSON: unsupported version");
    PathForest f;
    j.at("depth").get_to(f.depth);
    j.at("covariate_names").get_to(f.names);
    j.at("config").get_to(f.config);
    const int p = static_cast<int>(f.names.size());
    for (const auto& r : j.at("roots")) f.roots.push_back(node_from_json(r, p));
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("forest JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("forest JSON: ") + e.what());
  }
}

std::string d_table_json() {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& e : d_cache_snapshot())
    arr.push_back(nlohmann::ordered_json{{"M", e.key.M},
                                         {"r", e.key.r},
                                         {"p_star", e.key.p_star},
                                         {"nsim", e.key.nsim},
                                         {"seed", e.key.seed},
                                         {"D", e.D}});
  return arr.dump(2) + "\n";
}

}  // namespace mps
