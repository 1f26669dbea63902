#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "igw/tree.hpp"

namespace igw {

class NewickError : public std::runtime_error {
 public:
  NewickError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Shortest decimal that parses back to the same double.
inline std::string format_length(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

// Unlabeled Newick with branch lengths; siblings in canonical order
// (edge count, shape code, text). The empty tree is written as ";".
inline std::string to_newick(const MetricTree& t) {
  if (t.empty()) return ";";
  const std::size_t n = t.vertex_count();
  const auto codes = subtree_codes(t.shape());
  std::vector<std::size_t> edges(n, 0);
  std::vector<std::string> text(n);
  std::vector<Vertex> kids;
  for (Vertex v = Vertex(n); v-- > 0;) {
    kids.clear();
    for (std::uint32_t i = 0; i < t.child_count(v); ++i) {
      const Vertex c = t.child(v, i);
      kids.push_back(c);
      edges[v] += 1 + edges[c];
    }
    std::sort(kids.begin(), kids.end(), [&](Vertex a, Vertex b) {
      if (edges[a] != edges[b]) return edges[a] < edges[b];
      if (codes[a] != codes[b]) return codes[a] < codes[b];
      return text[a] < text[b];
    });
    std::string s;
    if (!kids.empty()) {
      s += '(';
      for (std::size_t i = 0; i < kids.size(); ++i) {
        if (i) s += ',';
        s += text[kids[i]];
        std::string().swap(text[kids[i]]);
      }
      s += ')';
    }
    if (v != 0) s += ':' + format_length(t.length(v));
    text[v] = std::move(s);
  }
  return text[0] + ';';
}

namespace detail {

class NewickParser {
 public:
  explicit NewickParser(std::string_view s) : s_(s) {}

  MetricTree parse() {
    skip_ws();
    if (peek() == ';') {
      ++pos_;
      finish();
      return MetricTree{};
    }
    expect('(');
    parent_ = {no_vertex};
    length_ = {0.0};
    std::vector<Vertex> stack{0};
    skip_ws();
    if (peek() == ')') {
      // "();" is accepted as the empty tree.
      ++pos_;
      skip_ws();
      expect(';');
      finish();
      return MetricTree{};
    }
    for (;;) {
      skip_ws();
      if (peek() == '(') {
        ++pos_;
        stack.push_back(add(stack.back()));
        continue;
      }
      const Vertex leaf = add(stack.back());
      tail(leaf);
      for (;;) {
        skip_ws();
        const char c = peek();
        if (c == ',') {
          ++pos_;
          break;
        }
        if (c != ')') fail("expected ',' or ')'");
        ++pos_;
        const Vertex closed = stack.back();
        stack.pop_back();
        if (stack.empty()) {
          skip_label();
          skip_ws();
          if (peek() == ':') fail("root carries no edge length");
          expect(';');
          finish();
          return MetricTree::from_parents(parent_, length_);
        }
        tail(closed);
      }
    }
  }

 private:
  Vertex add(Vertex parent) {
    parent_.push_back(parent);
    length_.push_back(std::nan(""));
    return Vertex(parent_.size() - 1);
  }

  void tail(Vertex v) {
    skip_label();
    skip_ws();
    if (peek() != ':') fail("missing branch length");
    ++pos_;
    skip_ws();
    double x = 0.0;
    const char* first = s_.data() + pos_;
    const auto r = std::from_chars(first, s_.data() + s_.size(), x);
    if (r.ec != std::errc{}) fail("bad branch length");
    if (!(x > 0.0) || !std::isfinite(x)) fail("branch length must be positive");
    pos_ += std::size_t(r.ptr - first);
    length_[v] = x;
  }

  void skip_label() {
    skip_ws();
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '(' || c == ')' || c == ',' || c == ':' || c == ';' || std::isspace((unsigned char)c))
        break;
      ++pos_;
    }
  }

  void finish() {
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace((unsigned char)s_[pos_])) ++pos_;
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const { throw NewickError(what, pos_); }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::vector<Vertex> parent_;
  std::vector<double> length_;
};

}  // namespace detail

inline MetricTree from_newick(std::string_view text) { return detail::NewickParser(text).parse(); }

// One tree per ';'-terminated record; '#' starts a comment line.
inline std::vector<MetricTree> read_newick(std::istream& in) {
  std::vector<MetricTree> out;
  std::string line, record;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    record += line;
    std::size_t semi;
    while ((semi = record.find(';')) != std::string::npos) {
      out.push_back(from_newick(std::string_view(record).substr(0, semi + 1)));
      record.erase(0, semi + 1);
    }
  }
  if (record.find_first_not_of(" \t\r\n") != std::string::npos)
    throw NewickError("unterminated tree", record.size());
  return out;
}

// {"children": [...], "len": x}; the root has no "len".
inline nlohmann::json to_json(const MetricTree& t) {
  const std::size_t n = t.vertex_count();
  std::vector<nlohmann::json> node(n);
  for (Vertex v = Vertex(n); v-- > 0;) {
    nlohmann::json kids = nlohmann::json::array();
    for (std::uint32_t i = 0; i < t.child_count(v); ++i) kids.push_back(std::move(node[t.child(v, i)]));
    node[v] = {{"children", std::move(kids)}};
    if (v != 0) node[v]["len"] = t.length(v);
  }
  return std::move(node[0]);
}

inline MetricTree tree_from_json(const nlohmann::json& j) {
  std::vector<Vertex> parent{no_vertex};
  std::vector<double> length{0.0};
  std::vector<std::pair<const nlohmann::json*, Vertex>> stack{{&j, 0}};
  while (!stack.empty()) {
    auto [node, v] = stack.back();
    stack.pop_back();
    if (!node->is_object()) throw std::invalid_argument("tree node must be an object");
    if (!node->contains("children")) continue;
    for (const auto& c : node->at("children")) {
      if (!c.contains("len")) throw std::invalid_argument("non-root node needs \"len\"");
      parent.push_back(v);
      length.push_back(c.at("len").get<double>());
      stack.push_back({&c, Vertex(parent.size() - 1)});
    }
  }
  return MetricTree::from_parents(parent, length);
}

}  // namespace igw
