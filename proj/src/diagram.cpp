#include "phfcox/diagram.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace phfcox {

PersistenceDiagram regularize_infinite(const PersistenceDiagram& d) {
  PersistenceDiagram out;
  out.dim = d.dim;
  out.pairs.reserve(d.pairs.size());
  for (const PersistencePair& p : d.pairs) {
    if (p.essential())
      out.pairs.push_back({p.dim, p.birth, p.birth});
    else
      out.pairs.push_back(p);
  }
  return out;
}

QuadrantCounts quadrant_summary(const PersistenceDiagram& d) {
  QuadrantCounts c;
  for (const PersistencePair& p : d.pairs) {
    double b = p.birth, dd = p.death;
    // A coordinate on an axis inherits the sign of the other one; the origin
    // is negative-negative by convention.
    bool b_pos = b > 0.0 || (b == 0.0 && dd > 0.0);
    bool d_pos = dd > 0.0 || (dd == 0.0 && b > 0.0);
    if (b_pos && d_pos)
      ++c.q[0];
    else if (!b_pos && d_pos)
      ++c.q[1];
    else if (!b_pos && !d_pos)
      ++c.q[2];
    else
      ++c.q[3];
  }
  return c;
}

namespace {

void write_value(std::ostream& out, double v) {
  if (std::isinf(v)) {
    out << "inf";
  } else {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, ptr - buf);
  }
}

}  // namespace

void write_diagrams_csv(std::ostream& out, const std::string& subject_id,
                        const std::vector<PersistenceDiagram>& diagrams, bool with_header) {
  if (with_header) out << "subject_id,dim,birth,death\n";
  for (const PersistenceDiagram& d : diagrams) {
    for (const PersistencePair& p : d.pairs) {
      out << subject_id << ',' << p.dim << ',';
      write_value(out, p.birth);
      out << ',';
      write_value(out, p.death);
      out << '\n';
    }
  }
}

std::vector<SubjectDiagrams> read_diagrams_csv(std::istream& in) {
  std::vector<SubjectDiagrams> result;
  std::map<std::string, size_t> index;
  std::string line;
  bool first = true;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("subject_id,", 0) == 0) continue;  // header
    }
    std::stringstream ss(line);
    std::string subject, dim_s, birth_s, death_s;
    if (!std::getline(ss, subject, ',') || !std::getline(ss, dim_s, ',') ||
        !std::getline(ss, birth_s, ',') || !std::getline(ss, death_s, ','))
      throw std::runtime_error("diagram CSV: malformed line " + std::to_string(lineno));
    int dim = std::stoi(dim_s);
    if (dim < 0 || dim > 2)
      throw std::runtime_error("diagram CSV: dim out of range on line " + std::to_string(lineno));
    double birth = std::stod(birth_s);
    double death = death_s == "inf" ? std::numeric_limits<double>::infinity() : std::stod(death_s);

    auto it = index.find(subject);
    if (it == index.end()) {
      it = index.emplace(subject, result.size()).first;
      result.push_back({subject, {PersistenceDiagram{0, {}}, PersistenceDiagram{1, {}},
                                  PersistenceDiagram{2, {}}}});
    }
    result[it->second].dims[dim].pairs.push_back({dim, birth, death});
  }
  return result;
}

}  // namespace phfcox
