#include "kplex/milp.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "kplex/graph.hpp"

namespace kplex {

MilpProblem::MilpProblem(std::vector<LabeledPoint> positives, std::vector<LabeledPoint> negatives,
                         int constraints, TermSpec terms, double big_m, double epsilon)
    : positives_(std::move(positives)), negatives_(std::move(negatives)), constraints_(constraints),
      terms_(std::move(terms)), big_m_(big_m), epsilon_(epsilon) {
  if (constraints_ < 1) throw std::invalid_argument("number of constraints must be positive");
  if (!(big_m_ > 0) || !(epsilon_ > 0)) throw std::invalid_argument("big-M and epsilon must be positive");
}

std::size_t MilpProblem::continuous_vars() const {
  return static_cast<std::size_t>(constraints_) * (term_count() + 1);
}

std::size_t MilpProblem::binary_vars() const {
  return negatives_.size() * static_cast<std::size_t>(constraints_);
}

std::size_t MilpProblem::row_count() const {
  const auto I = static_cast<std::size_t>(constraints_);
  return positives_.size() * I + negatives_.size() * I + negatives_.size();
}

std::size_t MilpProblem::weight_var(int i, std::size_t j) const {
  return static_cast<std::size_t>(i) * (term_count() + 1) + j;
}

std::size_t MilpProblem::offset_var(int i) const {
  return static_cast<std::size_t>(i) * (term_count() + 1) + term_count();
}

std::size_t MilpProblem::choice_var(std::size_t l, int i) const {
  return continuous_vars() + l * static_cast<std::size_t>(constraints_) + static_cast<std::size_t>(i);
}

std::string MilpProblem::var_name(std::size_t v) const {
  const std::size_t block = term_count() + 1;
  if (v < continuous_vars()) {
    const std::size_t i = v / block;
    const std::size_t j = v % block;
    if (j == term_count()) return "c_" + std::to_string(i);
    return "w_" + std::to_string(i) + "_" + std::to_string(j);
  }
  if (v < var_count()) {
    const std::size_t rest = v - continuous_vars();
    const auto I = static_cast<std::size_t>(constraints_);
    return "S_" + std::to_string(rest / I) + "_" + std::to_string(rest % I);
  }
  throw ContractViolation("variable index out of range");
}

MilpRow MilpProblem::row(std::size_t r) const {
  const auto I = static_cast<std::size_t>(constraints_);
  const std::size_t pos_rows = positives_.size() * I;
  const std::size_t neg_rows = negatives_.size() * I;
  MilpRow row;
  auto add_terms = [&](const LabeledPoint& e, int i) {
    const auto t = expand_terms(terms_, e.x);
    for (std::size_t j = 0; j < t.size(); ++j) row.terms.push_back({weight_var(i, j), t[j]});
    row.terms.push_back({offset_var(i), -1.0});
  };
  if (r < pos_rows) {
    const std::size_t p = r / I;
    const int i = static_cast<int>(r % I);
    row.name = "pos" + std::to_string(p) + "_" + std::to_string(i);
    add_terms(positives_[p], i);
    row.sense = RowSense::le;
    row.rhs = 0.0;
  } else if (r < pos_rows + neg_rows) {
    const std::size_t l = (r - pos_rows) / I;
    const int i = static_cast<int>((r - pos_rows) % I);
    row.name = "neg" + std::to_string(l) + "_" + std::to_string(i);
    add_terms(negatives_[l], i);
    row.terms.push_back({choice_var(l, i), -big_m_});
    row.sense = RowSense::ge;
    row.rhs = -big_m_;
    row.strict = true;
  } else if (r < row_count()) {
    const std::size_t l = r - pos_rows - neg_rows;
    row.name = "cover" + std::to_string(l);
    for (int i = 0; i < constraints_; ++i) row.terms.push_back({choice_var(l, i), 1.0});
    row.sense = RowSense::ge;
    row.rhs = 1.0;
  } else {
    throw ContractViolation("row index out of range");
  }
  return row;
}

MilpProblem encode_milp(std::vector<LabeledPoint> points, int dimension, int constraints, double big_m,
                        double epsilon) {
  if (points.empty()) throw std::invalid_argument("encode_milp: no examples");
  std::vector<LabeledPoint> pos, neg;
  for (auto& e : points) {
    if (e.x.size() != static_cast<std::size_t>(dimension)) {
      throw std::invalid_argument("encode_milp: examples have mixed feature dimensions");
    }
    if (e.count == 0) throw std::invalid_argument("encode_milp: zero multiplicity");
    (e.positive ? pos : neg).push_back(std::move(e));
  }
  return MilpProblem(std::move(pos), std::move(neg), constraints, TermSpec::quadratic(dimension), big_m,
                     epsilon);
}

MilpProblem encode_milp(std::span<const Example> examples, int constraints, double big_m, double epsilon) {
  std::vector<LabeledPoint> points;
  points.reserve(examples.size());
  for (const auto& e : examples) {
    points.push_back({std::vector<double>(e.features.begin(), e.features.end()), e.label, e.count});
  }
  return encode_milp(std::move(points), static_cast<int>(kFeatureCount), constraints, big_m, epsilon);
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Writes " + 3 x - 2 y" style sums, wrapping every few terms to keep lines short.
void write_sum(std::ostream& out, const std::vector<std::pair<double, std::string>>& terms) {
  bool first = true;
  int on_line = 0;
  for (const auto& [coef, var] : terms) {
    if (coef == 0.0) continue;
    if (on_line == 8) {
      out << "\n   ";
      on_line = 0;
    }
    if (first) {
      out << ' ' << (coef < 0 ? "-" : "") << num(std::fabs(coef)) << ' ' << var;
    } else {
      out << ' ' << (coef < 0 ? '-' : '+') << ' ' << num(std::fabs(coef)) << ' ' << var;
    }
    first = false;
    ++on_line;
  }
  if (first && !terms.empty()) out << " 0 " << terms.front().second;
}

}  // namespace

void export_lp(const MilpProblem& p, const std::filesystem::path& path, LpObjective objective) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write LP file: " + path.string());
  const bool coverage = objective == LpObjective::coverage && !p.negatives().empty();
  out << "\\ learned bound: " << p.constraints() << " constraint(s), " << p.term_count() << " terms, "
      << p.positives().size() << " positive and " << p.negatives().size() << " negative examples\n";
  out << "\\ strict rows written as >= rhs + " << num(p.epsilon()) << "\n";
  out << "Maximize\n obj:";
  if (coverage) {
    std::vector<std::pair<double, std::string>> obj;
    for (std::size_t l = 0; l < p.negatives().size(); ++l) {
      obj.emplace_back(static_cast<double>(p.negatives()[l].count), "u_" + std::to_string(l));
    }
    write_sum(out, obj);
  } else {
    out << " 0 " << p.var_name(0);
  }
  out << "\nSubject To\n";
  const std::size_t cover_start = p.row_count() - p.negatives().size();
  for (std::size_t r = 0; r < p.row_count(); ++r) {
    const MilpRow row = p.row(r);
    std::vector<std::pair<double, std::string>> terms;
    for (const auto& t : row.terms) terms.emplace_back(t.coef, p.var_name(t.var));
    double rhs = row.rhs;
    if (coverage && r >= cover_start) {
      terms.emplace_back(-1.0, "u_" + std::to_string(r - cover_start));
      rhs = 0.0;
    }
    if (row.strict) rhs += p.epsilon();
    out << ' ' << row.name << ':';
    write_sum(out, terms);
    out << (row.sense == RowSense::le ? " <= " : " >= ") << num(rhs) << '\n';
  }
  out << "Bounds\n";
  const std::string b = num(p.weight_bound());
  for (std::size_t v = 0; v < p.continuous_vars(); ++v) {
    out << " -" << b << " <= " << p.var_name(v) << " <= " << b << '\n';
  }
  if (p.binary_vars() > 0 || coverage) {
    out << "Binaries\n";
    for (std::size_t v = p.continuous_vars(); v < p.var_count(); ++v) out << ' ' << p.var_name(v) << '\n';
    if (coverage) {
      for (std::size_t l = 0; l < p.negatives().size(); ++l) out << " u_" << l << '\n';
    }
  }
  out << "End\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

enum class Section { none, objective, constraints, bounds, binaries, generals, end };

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool section_header(const std::string& line, Section& s, bool& maximize) {
  const std::string l = lower(line);
  if (l == "maximize" || l == "maximise" || l == "maximum" || l == "max") {
    s = Section::objective;
    maximize = true;
  } else if (l == "minimize" || l == "minimise" || l == "minimum" || l == "min") {
    s = Section::objective;
    maximize = false;
  } else if (l == "subject to" || l == "such that" || l == "st" || l == "s.t." || l == "st.") {
    s = Section::constraints;
  } else if (l == "bounds" || l == "bound") {
    s = Section::bounds;
  } else if (l == "binaries" || l == "binary" || l == "bin") {
    s = Section::binaries;
  } else if (l == "generals" || l == "general" || l == "gen" || l == "integers") {
    s = Section::generals;
  } else if (l == "end") {
    s = Section::end;
  } else {
    return false;
  }
  return true;
}

// Splits on whitespace and around relational operators.
std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (c == '<' || c == '>' || c == '=') {
      flush();
      std::string op(1, c);
      if (i + 1 < line.size() && (line[i + 1] == '=' || line[i + 1] == '<' || line[i + 1] == '>')) {
        op += line[++i];
      }
      out.push_back(op);
    } else if ((c == '+' || c == '-') && cur.empty()) {
      out.push_back(std::string(1, c));
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

bool is_sense(const std::string& t) {
  return t == "<=" || t == ">=" || t == "=<" || t == "=>" || t == "=" || t == "<" || t == ">";
}

bool is_number(const std::string& t) {
  if (t.empty()) return false;
  const std::string l = lower(t);
  if (l == "inf" || l == "infinity") return true;
  char* end = nullptr;
  std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

bool is_name(const std::string& t) {
  if (t.empty() || is_number(t) || is_sense(t) || t == "+" || t == "-") return false;
  const char c = t.front();
  return !std::isdigit(static_cast<unsigned char>(c)) && c != '.';
}

}  // namespace

LpFileSummary read_lp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read LP file: " + path.string());
  LpFileSummary s;
  std::set<std::string> vars, binaries, bounded;
  Section sec = Section::none;
  std::vector<std::string> pending;  // tokens of the row being read
  bool seen_sense = false;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) { throw LpParseError(path.string() + ":" + std::to_string(line_no) + ": " + why, line_no); };

  auto finish_row = [&] {
    std::size_t i = 0;
    std::string name;
    if (!pending.empty() && pending[0].back() == ':') {
      name = pending[0].substr(0, pending[0].size() - 1);
      i = 1;
    }
    for (; i < pending.size(); ++i) {
      if (is_name(pending[i])) vars.insert(pending[i]);
    }
    s.row_names.push_back(name.empty() ? "R" + std::to_string(s.rows + 1) : name);
    ++s.rows;
    pending.clear();
    seen_sense = false;
  };

  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto bs = raw.find('\\');
    if (bs != std::string::npos) raw.erase(bs);
    const auto b = raw.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = raw.find_last_not_of(" \t\r");
    const std::string line = raw.substr(b, e - b + 1);
    Section next = sec;
    bool max = s.maximize;
    if (section_header(line, next, max)) {
      if (!pending.empty() && sec == Section::constraints) fail("unterminated constraint");
      if (sec == Section::objective) {
        for (const auto& t : pending) {
          if (is_name(t) && t.back() != ':') vars.insert(t);
        }
        pending.clear();
      }
      if (next == Section::objective) s.maximize = max;
      sec = next;
      continue;
    }
    auto toks = tokenize(line);
    switch (sec) {
      case Section::none:
        fail("content before the objective section");
        break;
      case Section::end:
        fail("content after End");
        break;
      case Section::objective:
        pending.insert(pending.end(), toks.begin(), toks.end());
        break;
      case Section::constraints:
        for (auto& t : toks) {
          if (seen_sense && pending.size() && is_sense(pending.back())) {
            // The token after the sense is the right-hand side.
            if (t == "+" || t == "-") {
              pending.push_back(t);
              continue;
            }
            if (!is_number(t)) fail("expected a number after the relational operator");
            pending.push_back(t);
            finish_row();
            continue;
          }
          if (seen_sense && (pending.back() == "+" || pending.back() == "-")) {
            if (!is_number(t)) fail("expected a number after the sign");
            pending.push_back(t);
            finish_row();
            continue;
          }
          if (is_sense(t)) {
            if (seen_sense) fail("two relational operators in one row");
            if (pending.empty() || pending.back() == "+" || pending.back() == "-" ||
                pending.back().back() == ':') {
              fail("relational operator without a left-hand side term");
            }
            seen_sense = true;
          }
          pending.push_back(t);
        }
        break;
      case Section::bounds: {
        bool any = false;
        for (const auto& t : toks) {
          if (is_name(t) && lower(t) != "free") {
            vars.insert(t);
            bounded.insert(t);
            any = true;
          }
        }
        if (!any) fail("bound without a variable");
        break;
      }
      case Section::binaries:
      case Section::generals:
        for (const auto& t : toks) {
          if (!is_name(t)) fail("expected a variable name");
          vars.insert(t);
          if (sec == Section::binaries) binaries.insert(t);
        }
        break;
    }
  }
  if (sec != Section::end) fail("missing End");
  s.variables = vars.size();
  s.binaries = binaries.size();
  s.bounded = bounded.size();
  return s;
}

}  // namespace kplex
