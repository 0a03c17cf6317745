#pragma once

// Best-effort conversion of JUnit XML results plus per-test JaCoCo XML
// coverage into a RunReport.
//
// Runner contract:
//  * Each <testcase> names its test either with a
//    <property name="test_id" value="..."/> child or, failing that, with the
//    testcase "name" attribute.
//  * <error type="...Compil..."> marks a compile error; any other <error>,
//    <failure> or <skipped> is a fail; no child element is a pass.
//  * Coverage comes as one JaCoCo XML report per test, each carrying the test
//    id as its <sessioninfo id="...">. A method counts as covered when its
//    METHOD counter reports covered > 0. Methods map to focal ids by simple
//    class name, method name and parameter count.

#include <a3kit/error.hpp>
#include <a3kit/evaluator.hpp>
#include <a3kit/focal_extract.hpp>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace a3kit {

namespace detail {

namespace pt = boost::property_tree;

inline pt::ptree parse_xml(const std::string& text, const std::string& source_name) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_xml(in, tree, pt::xml_parser::no_comments);
  } catch (const pt::xml_parser_error& e) {
    throw Error("input_format", source_name + ": " + e.what());
  }
  return tree;
}

inline std::string attr(const pt::ptree& node, const std::string& name) {
  return node.get<std::string>("<xmlattr>." + name, "");
}

template <typename Fn>
void for_each_named(const pt::ptree& node, const std::string& name, Fn&& fn) {
  for (const auto& [key, child] : node) {
    if (key == name) fn(child);
    if (key != "<xmlattr>") for_each_named(child, name, fn);
  }
}

// Number of parameters in a JVM method descriptor such as "(I[JLjava/lang/String;)V".
inline int descriptor_arity(const std::string& desc) {
  int n = 0;
  std::size_t i = desc.find('(');
  if (i == std::string::npos) return -1;
  for (++i; i < desc.size() && desc[i] != ')'; ++i) {
    while (i < desc.size() && desc[i] == '[') ++i;
    if (i < desc.size() && desc[i] == 'L') {
      const auto semi = desc.find(';', i);
      if (semi == std::string::npos) return -1;
      i = semi;
    }
    ++n;
  }
  return n;
}

inline int focal_arity(const FocalMethod& f) {
  const auto open = f.id.rfind('(');
  const auto close = f.id.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close <= open + 1) return 0;
  int n = 1;
  int depth = 0;
  for (std::size_t i = open + 1; i < close; ++i) {
    const char c = f.id[i];
    if (c == '<') ++depth;
    if (c == '>') --depth;
    if (c == ',' && depth == 0) ++n;
  }
  return n;
}

} // namespace detail

inline RunReport convert_reports(const std::string& junit_xml, const std::vector<std::string>& jacoco_xmls,
                                 const std::vector<FocalMethod>& focal) {
  using namespace detail;
  RunReport report;
  std::map<std::string, std::size_t> index;

  const pt::ptree junit = parse_xml(junit_xml, "junit");
  for_each_named(junit, "testcase", [&](const pt::ptree& tc) {
    std::string id = attr(tc, "name");
    if (auto props = tc.get_child_optional("properties")) {
      for (const auto& [key, p] : *props) {
        if (key == "property" && attr(p, "name") == "test_id") id = attr(p, "value");
      }
    }
    if (id.empty()) return;
    RunRecord rec;
    rec.test_id = id;
    rec.status = RunStatus::Pass;
    if (auto err = tc.get_child_optional("error")) {
      const std::string type = attr(*err, "type") + " " + attr(*err, "message");
      rec.status = (type.find("ompil") != std::string::npos) ? RunStatus::CompileError : RunStatus::Fail;
    } else if (tc.get_child_optional("failure") || tc.get_child_optional("skipped")) {
      rec.status = RunStatus::Fail;
    }
    if (index.contains(id)) throw Error("invalid_report", "duplicate testcase " + id);
    index.emplace(id, report.records.size());
    report.records.push_back(std::move(rec));
  });

  std::map<std::pair<std::string, std::string>, std::vector<const FocalMethod*>> by_name;
  for (const auto& f : focal) by_name[{f.class_name, f.method_name()}].push_back(&f);

  std::size_t n = 0;
  for (const auto& xml : jacoco_xmls) {
    const pt::ptree cov = parse_xml(xml, "jacoco[" + std::to_string(n++) + "]");
    std::string session;
    for_each_named(cov, "sessioninfo", [&](const pt::ptree& s) {
      if (session.empty()) session = attr(s, "id");
    });
    auto it = index.find(session);
    if (it == index.end()) continue;
    RunRecord& rec = report.records[it->second];
    if (rec.status == RunStatus::CompileError) continue;
    std::set<std::string> covered(rec.covered_focal_ids.begin(), rec.covered_focal_ids.end());
    for_each_named(cov, "class", [&](const pt::ptree& cls) {
      std::string cname = attr(cls, "name");
      if (const auto slash = cname.find_last_of("/."); slash != std::string::npos) cname = cname.substr(slash + 1);
      for (const auto& [key, m] : cls) {
        if (key != "method") continue;
        bool hit = false;
        for (const auto& [ckey, counter] : m) {
          if (ckey == "counter" && attr(counter, "type") == "METHOD") {
            hit = counter.get<int>("<xmlattr>.covered", 0) > 0;
          }
        }
        if (!hit) continue;
        auto fit = by_name.find({cname, attr(m, "name")});
        if (fit == by_name.end()) continue;
        const int arity = descriptor_arity(attr(m, "desc"));
        for (const FocalMethod* f : fit->second) {
          if (arity < 0 || focal_arity(*f) == arity) covered.insert(f->id);
        }
      }
    });
    rec.covered_focal_ids.assign(covered.begin(), covered.end());
  }
  validate(report);
  return report;
}

} // namespace a3kit
